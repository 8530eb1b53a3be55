//! Quantum Markov states.
//!
//! A tripartite state is Markov when H_B splits as ⊕_k b_k^L ⊗ b_k^R and
//! ρ_ABE = ⊕_k λ_k ρ_{A b_k^L} ⊗ ρ_{b_k^R E}. Rather than search over
//! decompositions, [`is_markov`] tests the equivalent condition that the
//! conditional mutual information I(A:E|B) vanishes. Separability of ρ_AE
//! (or of ρ_{E_A E_B} in the four-party setting) is a cheap necessary
//! condition, exposed through [`markov_necessary_witnesses`].

use num_complex::Complex64;
use rand::Rng;

use crate::entanglement::{concurrence_2q, ppt_min_eigenvalue, MONOTONE_SLACK};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::random::{random_unitary, seeded_rng};
use crate::spin_star::{LABEL_A, LABEL_B, LABEL_E};
use crate::state::{conditional_mutual_information, DensityMatrix, DimsSpec, LogBase, PureState};

/// Default CMI threshold; four entropies each carry eigensolver error.
pub const CMI_TOL: f64 = 1e-7;
/// Partial-transpose eigenvalues below -WITNESS_TOL count as NPT.
pub const WITNESS_TOL: f64 = 1e-10;

pub const LABEL_EA: &str = "E_A";
pub const LABEL_EB: &str = "E_B";

#[derive(Debug, Clone)]
pub struct MarkovBlock {
    pub weight: f64,
    /// ρ on A ⊗ b^L, A first.
    pub left: DensityMatrix,
    /// ρ on b^R ⊗ E, b^R first.
    pub right: DensityMatrix,
    pub dim_left: usize,
    pub dim_right: usize,
}

#[derive(Debug, Clone)]
pub struct MarkovBlockSpec {
    pub dim_a: usize,
    pub dim_e: usize,
    pub blocks: Vec<MarkovBlock>,
}

fn check_weights<'a>(weights: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut total = 0.0;
    for &w in weights {
        if w < 0.0 {
            return Err(Error::InvalidParameter(format!("negative block weight {w}")));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("block weights sum to {total}, not 1")));
    }
    Ok(())
}

impl MarkovBlockSpec {
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidParameter("a Markov state needs at least one block".into()));
        }
        check_weights(self.blocks.iter().map(|b| &b.weight))?;
        for (k, b) in self.blocks.iter().enumerate() {
            if b.dim_left == 0 || b.dim_right == 0 {
                return Err(Error::DimensionMismatch(format!("block {k} has an empty factor")));
            }
            if b.left.dim() != self.dim_a * b.dim_left || b.right.dim() != b.dim_right * self.dim_e {
                return Err(Error::DimensionMismatch(format!(
                    "block {k}: left state must be {}x{0} and right {}x{1}",
                    self.dim_a * b.dim_left,
                    b.dim_right * self.dim_e
                )));
            }
        }
        Ok(())
    }

    pub fn dim_b(&self) -> usize {
        self.blocks.iter().map(|b| b.dim_left * b.dim_right).sum()
    }

    /// One block with trivial b^R: ρ_AB ⊗ ρ_E.
    pub fn factorized(rho_ab: &DensityMatrix, rho_e: &DensityMatrix) -> Result<Self> {
        let dim_a = rho_ab.dims().factor(0).1;
        Ok(Self {
            dim_a,
            dim_e: rho_e.dim(),
            blocks: vec![MarkovBlock {
                weight: 1.0,
                left: rho_ab.clone(),
                dim_left: rho_ab.dim() / dim_a,
                right: rho_e.clone(),
                dim_right: 1,
            }],
        })
    }
}

/// Assembles ⊕_k λ_k ρ_{A b_k^L} ⊗ ρ_{b_k^R E} with the blocks laid out in
/// order along H_B, b index = offset_k + l·dim(b_k^R) + r.
pub fn make_markov_state(spec: &MarkovBlockSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let (da, de, db) = (spec.dim_a, spec.dim_e, spec.dim_b());
    let n = da * db * de;
    let mut mat = ComplexMatrix::zeros(n, n);
    let mut offset = 0;
    for blk in &spec.blocks {
        let (dl, dr) = (blk.dim_left, blk.dim_right);
        let full = |a: usize, l: usize, r: usize, e: usize| (a * db + offset + l * dr + r) * de + e;
        let (lm, rm) = (blk.left.mat(), blk.right.mat());
        for a in 0..da {
            for l in 0..dl {
                for a2 in 0..da {
                    for l2 in 0..dl {
                        let x = lm[(a * dl + l, a2 * dl + l2)] * blk.weight;
                        if x == c64(0.0, 0.0) {
                            continue;
                        }
                        for r in 0..dr {
                            for e in 0..de {
                                for r2 in 0..dr {
                                    for e2 in 0..de {
                                        mat[(full(a, l, r, e), full(a2, l2, r2, e2))] +=
                                            x * rm[(r * de + e, r2 * de + e2)];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        offset += dl * dr;
    }
    DensityMatrix::new(mat, DimsSpec::new(&[(LABEL_A, da), (LABEL_B, db), (LABEL_E, de)])?)
}

/// (CMI ≤ tol, CMI in bits). The three factors are read as A, B, E.
pub fn is_markov(rho: &DensityMatrix, tol: f64) -> Result<(bool, f64)> {
    let cmi = conditional_mutual_information(rho, LogBase::Two)?;
    Ok((cmi <= tol, cmi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// The two factors whose joint state must be separable.
    pub pair: (String, String),
    pub min_eigenvalue: f64,
}

impl WitnessReport {
    /// NPT on the witnessed pair rules out the Markov structure.
    pub fn certifies_non_markov(&self) -> bool {
        self.min_eigenvalue < -WITNESS_TOL
    }
}

/// Partial-transpose test on ρ_AE (three factors A, B, E) or on ρ_{E_A E_B}
/// (four factors read as A, E_A, B, E_B).
pub fn markov_necessary_witnesses(rho: &DensityMatrix) -> Result<WitnessReport> {
    let labels: Vec<&str> = rho.dims().labels().collect();
    let (x, y) = match labels.len() {
        3 => (labels[0], labels[2]),
        4 => (labels[1], labels[3]),
        n => return Err(Error::InvalidLabels(format!("Markov witnesses need three or four factors, got {n}"))),
    };
    let pair = rho.partial_trace(&[x, y])?;
    Ok(WitnessReport { pair: (x.to_string(), y.to_string()), min_eigenvalue: ppt_min_eigenvalue(&pair, (&[x], &[y]))? })
}

/// One term λ_jk ρ_{a_j^L E_A} ⊗ ρ_{a_j^R b_k^L} ⊗ ρ_{b_k^R E_B} of a
/// four-party Markov state.
#[derive(Debug, Clone)]
pub struct QuadTerm {
    pub j: usize,
    pub k: usize,
    pub weight: f64,
    pub left: DensityMatrix,
    pub middle: DensityMatrix,
    pub right: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct QuadMarkovSpec {
    /// (dim a_j^L, dim a_j^R) for each block of H_A.
    pub a_blocks: Vec<(usize, usize)>,
    /// (dim b_k^L, dim b_k^R) for each block of H_B.
    pub b_blocks: Vec<(usize, usize)>,
    pub dim_ea: usize,
    pub dim_eb: usize,
    pub terms: Vec<QuadTerm>,
}

/// The four-party direct sum on A, E_A, B, E_B.
pub fn make_quadripartite_markov_state(spec: &QuadMarkovSpec) -> Result<DensityMatrix> {
    if spec.terms.is_empty() {
        return Err(Error::InvalidParameter("a Markov state needs at least one term".into()));
    }
    check_weights(spec.terms.iter().map(|t| &t.weight))?;
    let offsets = |blocks: &[(usize, usize)]| {
        let mut acc = 0;
        blocks
            .iter()
            .map(|(l, r)| {
                let o = acc;
                acc += l * r;
                o
            })
            .collect::<Vec<_>>()
    };
    let (off_a, off_b) = (offsets(&spec.a_blocks), offsets(&spec.b_blocks));
    let da: usize = spec.a_blocks.iter().map(|(l, r)| l * r).sum();
    let db: usize = spec.b_blocks.iter().map(|(l, r)| l * r).sum();
    let (dea, deb) = (spec.dim_ea, spec.dim_eb);
    let n = da * dea * db * deb;
    let mut mat = ComplexMatrix::zeros(n, n);
    for (t_idx, t) in spec.terms.iter().enumerate() {
        let (&(dal, dar), &(dbl, dbr)) = match (spec.a_blocks.get(t.j), spec.b_blocks.get(t.k)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::DimensionMismatch(format!("term {t_idx} refers to a missing block"))),
        };
        if t.left.dim() != dal * dea || t.middle.dim() != dar * dbl || t.right.dim() != dbr * deb {
            return Err(Error::DimensionMismatch(format!("term {t_idx} factor sizes do not match its blocks")));
        }
        // ρ1 ⊗ ρ2 ⊗ ρ3 indexed by (aL, ea), (aR, bL), (bR, eb)
        let prod = t.left.mat().tensor(t.middle.mat()).tensor(t.right.mat());
        let place = |idx: usize| {
            let (i1, rest) = (idx / (dar * dbl * dbr * deb), idx % (dar * dbl * dbr * deb));
            let (i2, i3) = (rest / (dbr * deb), rest % (dbr * deb));
            let (al, ea) = (i1 / dea, i1 % dea);
            let (ar, bl) = (i2 / dbl, i2 % dbl);
            let (br, eb) = (i3 / deb, i3 % deb);
            let a = off_a[t.j] + al * dar + ar;
            let b = off_b[t.k] + bl * dbr + br;
            ((a * dea + ea) * db + b) * deb + eb
        };
        for r in 0..prod.rows() {
            let fr = place(r);
            for c in 0..prod.cols() {
                let x = prod[(r, c)];
                if x != c64(0.0, 0.0) {
                    mat[(fr, place(c))] += x * t.weight;
                }
            }
        }
    }
    DensityMatrix::new(mat, DimsSpec::new(&[(LABEL_A, da), (LABEL_EA, dea), (LABEL_B, db), (LABEL_EB, deb)])?)
}

/// |0_A⟩ ⊗ |0_B⟩ ⊗ |Ψ⟩ on A, E_A, B, E_B with Ψ on E_A E_B (index 2 e_a + e_b).
pub fn phi0_state(psi_env: &[Complex64; 4]) -> Result<PureState> {
    let mut v = vec![c64(0.0, 0.0); 16];
    for ea in 0..2 {
        for eb in 0..2 {
            // (a=0, ea, b=0, eb)
            v[ea * 4 + eb] = psi_env[ea * 2 + eb];
        }
    }
    PureState::new(v, DimsSpec::new(&[(LABEL_A, 2), (LABEL_EA, 2), (LABEL_B, 2), (LABEL_EB, 2)])?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub seed: Option<u64>,
    pub trials: usize,
    pub initial_concurrence: f64,
    pub max_concurrence: f64,
    pub violations: usize,
}

impl ReductionReport {
    pub fn max_excess(&self) -> f64 {
        self.max_concurrence - self.initial_concurrence
    }
}

/// Counts evolved states whose AB concurrence exceeds that of `rho0` by more
/// than the monotone slack. All states must carry factors A and B (qubits).
pub fn reduction_report(
    rho0: &DensityMatrix,
    evolved: impl IntoIterator<Item = Result<DensityMatrix>>,
) -> Result<ReductionReport> {
    let sys = |r: &DensityMatrix| concurrence_2q(&r.partial_trace(&[LABEL_A, LABEL_B])?, (LABEL_A, LABEL_B));
    let c0 = sys(rho0)?;
    let mut report =
        ReductionReport { seed: None, trials: 0, initial_concurrence: c0, max_concurrence: c0, violations: 0 };
    for state in evolved {
        let c = sys(&state?)?;
        report.trials += 1;
        report.max_concurrence = report.max_concurrence.max(c);
        if c > c0 + MONOTONE_SLACK {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Haar-random U_BE (trial i drawn from stream i of `seed`) applied as
/// I_A ⊗ U_BE to `rho` on A, B, E.
pub fn random_be_trials(rho: &DensityMatrix, trials: usize, seed: u64) -> Result<ReductionReport> {
    if rho.dims().len() != 3 {
        return Err(Error::InvalidLabels(format!("expected factors A, B, E, got {}", rho.dims())));
    }
    let da = rho.dims().dim_of(LABEL_A)?;
    let dbe = rho.dim() / da;
    let evolved = (0..trials).map(|i| {
        let mut rng = seeded_rng(seed, i as u64);
        let u = random_unitary(dbe, &mut rng);
        rho.evolve(&ComplexMatrix::identity(da).tensor(&u))
    });
    let mut report = reduction_report(rho, evolved)?;
    report.seed = Some(seed);
    Ok(report)
}

/// Builds the Markov state and checks that no random localized U_BE raises
/// the AB concurrence. A and B must be qubits.
pub fn verify_localized_reduction(spec: &MarkovBlockSpec, trials: usize, seed: u64) -> Result<ReductionReport> {
    if spec.dim_a != 2 || spec.dim_b() != 2 {
        return Err(Error::DimensionMismatch("localized-reduction check needs qubit A and qubit B".into()));
    }
    random_be_trials(&make_markov_state(spec)?, trials, seed)
}

/// A random qubit-qubit Markov spec with E of dimension `dim_e`, drawn from
/// one of the three ways to split a qubit B.
pub fn random_qubit_markov_spec<R: Rng>(dim_e: usize, rng: &mut R) -> MarkovBlockSpec {
    use crate::random::random_density;
    fn state(labels: &[(&str, usize)], rng: &mut impl Rng) -> DensityMatrix {
        let dims = DimsSpec::new(labels).expect("distinct labels");
        let rank = rng.gen_range(1..=dims.total_dim());
        random_density(&dims, rank, rng)
    }
    let block = |w: f64, dl: usize, dr: usize, rng: &mut R| MarkovBlock {
        weight: w,
        left: state(&[("a", 2), ("l", dl)], rng),
        right: state(&[("r", dr), ("e", dim_e)], rng),
        dim_left: dl,
        dim_right: dr,
    };
    let blocks = match rng.gen_range(0..3) {
        0 => vec![block(1.0, 2, 1, rng)],
        1 => vec![block(1.0, 1, 2, rng)],
        _ => {
            let w: f64 = rng.gen();
            vec![block(w, 1, 1, rng), block(1.0 - w, 1, 1, rng)]
        }
    };
    MarkovBlockSpec { dim_a: 2, dim_e, blocks }
}
