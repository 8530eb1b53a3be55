//! Completely positive maps on the two-qubit system.
//!
//! A system-environment state Σ p_i |ψ_i⟩⟨ψ_i| ⊗ |μ_i⟩⟨μ_i| with orthonormal
//! {ψ_i} and {μ_i} has zero discord, and for any joint unitary U its reduced
//! dynamics is the CP map with Kraus operators E_ik = D_ik Π_i, where
//! D_ik = I_A ⊗ ⟨k|U|μ_i⟩ and Π_i = |ψ_i⟩⟨ψ_i|. The same operators work for
//! every probability vector {p_i}.
//!
//! Random-unitary channels on qubit B and their dilation with a classical
//! environment live here too.

use num_complex::Complex64;

use crate::entanglement::{concurrence_2q, hidden_entanglement, EnsembleMember};
use crate::error::{Error, Result};
use crate::linalg::{c64, herm_eig, pauli_z, unitarity_deviation, ComplexMatrix, HERMITIAN_TOL};
use crate::spin_star::{
    abe_dims, dicke_flag, evolve_sector, psi1, psi2, psi3, psi4, sector_propagator, SpinStarParams, DICKE_LEVELS,
    LABEL_A, LABEL_B, LABEL_E,
};
use crate::state::{DensityMatrix, DimsSpec};

/// Completeness tolerance for Kraus channels.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Choi eigenvalues down to -CHOI_TOL count as non-negative.
pub const CHOI_TOL: f64 = 1e-8;
/// Dicke levels spanned by the environment basis {|k⟩} used for D_ik: one
/// above the flag truncation, since the evolution raises n by at most one.
pub const KRAUS_ENV_LEVELS: usize = DICKE_LEVELS + 1;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn gram_deviation(vectors: &[&[Complex64]]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((inner(a, b) - c64(target, 0.0)).norm());
        }
    }
    dev
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub prob: f64,
    /// |ψ_i⟩ on AB, index 2a + b.
    pub system: Vec<Complex64>,
    /// |μ_i⟩ on the Dicke factor.
    pub flag: Vec<Complex64>,
}

/// Σ p_i |ψ_i⟩⟨ψ_i| ⊗ |μ_i⟩⟨μ_i| with orthonormal ψ's and μ's.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDiscordFamily {
    members: Vec<FamilyMember>,
}

impl ZeroDiscordFamily {
    pub fn new(members: Vec<FamilyMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidState("empty family".into()));
        }
        let flag_len = members[0].flag.len();
        if members.iter().any(|m| m.system.len() != 4 || m.flag.len() != flag_len) {
            return Err(Error::DimensionMismatch("family members must share shapes (4 system amplitudes)".into()));
        }
        let total: f64 = members.iter().map(|m| m.prob).sum();
        if (total - 1.0).abs() > 1e-12 || members.iter().any(|m| m.prob < 0.0) {
            return Err(Error::InvalidState(format!("family probabilities must sum to 1 (got {total})")));
        }
        let systems: Vec<&[Complex64]> = members.iter().map(|m| m.system.as_slice()).collect();
        let flags: Vec<&[Complex64]> = members.iter().map(|m| m.flag.as_slice()).collect();
        if gram_deviation(&systems) > 1e-12 {
            return Err(Error::InvalidState("system states are not orthonormal".into()));
        }
        if gram_deviation(&flags) > 1e-12 {
            return Err(Error::InvalidState("environment flags are not orthonormal".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    /// Same ψ's and μ's, new probabilities.
    pub fn with_probabilities(&self, probs: &[f64]) -> Result<Self> {
        if probs.len() != self.members.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {} members",
                probs.len(),
                self.members.len()
            )));
        }
        Self::new(self.members.iter().zip(probs).map(|(m, &prob)| FamilyMember { prob, ..m.clone() }).collect())
    }

    pub fn env_levels(&self) -> usize {
        self.members[0].flag.len()
    }

    /// The system-environment state on A, B, E.
    pub fn state(&self) -> Result<DensityMatrix> {
        let levels = self.env_levels();
        let dim = 4 * levels;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for m in &self.members {
            let v = crate::linalg::tensor_vec(&m.system, &m.flag);
            acc = &acc + &ComplexMatrix::projector(&v).scale_real(m.prob);
        }
        DensityMatrix::new(acc, abe_dims(levels))
    }

    /// Σ p_i |ψ_i⟩⟨ψ_i|, the reduced system state.
    pub fn system_state(&self) -> Result<DensityMatrix> {
        let mut acc = ComplexMatrix::zeros(4, 4);
        for m in &self.members {
            acc = &acc + &ComplexMatrix::projector(&m.system).scale_real(m.prob);
        }
        DensityMatrix::new(acc, DimsSpec::qubits_ab())
    }
}

/// The four-member family of the classically-flagged spin-star state:
/// ψ1..ψ4 with flags |1̄⟩, |0̄⟩, |2̄⟩, |3̄⟩ and probabilities (p, 1-p, 0, 0).
pub fn zero_discord_family(params: &SpinStarParams) -> Result<ZeroDiscordFamily> {
    params.validate()?;
    let l = DICKE_LEVELS;
    ZeroDiscordFamily::new(vec![
        FamilyMember { prob: params.p, system: psi1(params.alpha).to_vec(), flag: dicke_flag(1, l) },
        FamilyMember { prob: 1.0 - params.p, system: psi2(params.beta).to_vec(), flag: dicke_flag(0, l) },
        FamilyMember { prob: 0.0, system: psi3(params.alpha).to_vec(), flag: dicke_flag(2, l) },
        FamilyMember { prob: 0.0, system: psi4(params.beta).to_vec(), flag: dicke_flag(3, l) },
    ])
}

/// ρ ↦ Σ K ρ K† with Σ K†K = I.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first =
            operators.first().ok_or_else(|| Error::InvalidState("a channel needs at least one operator".into()))?;
        let d = first.rows();
        if operators.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(Error::DimensionMismatch("Kraus operators must be square and equally sized".into()));
        }
        let ch = Self { operators };
        let residual = ch.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::Inconsistent(format!("Σ K†K deviates from I by {residual:.3e}")));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self { operators: vec![ComplexMatrix::identity(dim)] }
    }

    /// I_A ⊗ K for each single-qubit operator K on B.
    pub fn local_on_b(ops_b: &[ComplexMatrix]) -> Result<Self> {
        Self::new(ops_b.iter().map(|k| ComplexMatrix::identity(2).tensor(k)).collect())
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            out = &out + &(&(k * m) * &k.adjoint());
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel on dimension {} applied to a state of dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        DensityMatrix::new(self.apply_raw(rho.mat()), rho.dims().clone())
    }

    /// Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut choi = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(i, j)] = c64(1.0, 0.0);
                let image = self.apply_raw(&unit);
                for k in 0..d {
                    for l in 0..d {
                        choi[(i * d + k, j * d + l)] = image[(k, l)];
                    }
                }
            }
        }
        choi
    }

    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        Ok(herm_eig(&self.choi_matrix(), HERMITIAN_TOL)?.min())
    }

    pub fn is_completely_positive(&self) -> Result<bool> {
        Ok(self.choi_min_eigenvalue()? >= -CHOI_TOL)
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

/// Kraus operators E_ik = (I_A ⊗ ⟨k|U_BE(Ωt)|μ_i⟩) Π_i for the spin-star
/// evolution, with {|k⟩} the first [`KRAUS_ENV_LEVELS`] Dicke states.
pub fn extract_kraus(family: &ZeroDiscordFamily, params: &SpinStarParams, omega_t: f64) -> Result<KrausChannel> {
    params.validate()?;
    if omega_t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {omega_t}")));
    }
    let flag_levels = family.env_levels();
    let levels = KRAUS_ENV_LEVELS;
    if flag_levels >= levels {
        return Err(Error::OutsideTruncation(format!(
            "flags on {flag_levels} levels can reach beyond the {levels}-level environment basis"
        )));
    }
    for (i, m) in family.members().iter().enumerate() {
        if let Some(n) = m.flag.iter().rposition(|z| z.norm() > 0.0) {
            if n > params.max_dicke_level() {
                return Err(Error::OutsideTruncation(format!(
                    "flag {} uses Dicke level {n}, which a bath of {} does not have",
                    i + 1,
                    params.env
                )));
            }
        }
    }
    let u = sector_propagator(params, omega_t, levels);
    let idx = |b: usize, n: usize| b * levels + n;
    let mut ops = Vec::with_capacity(family.members().len() * levels);
    for m in family.members() {
        let proj = ComplexMatrix::projector(&m.system);
        for k in 0..levels {
            // D(b', b) = Σ_n ⟨b' k|U|b n⟩ μ_n
            let d = ComplexMatrix::from_fn(2, 2, |bp, b| {
                m.flag.iter().enumerate().map(|(n, mu)| u[(idx(bp, k), idx(b, n))] * mu).sum()
            });
            ops.push(&ComplexMatrix::identity(2).tensor(&d) * &proj);
        }
    }
    KrausChannel::new(ops)
}

/// Tr_E of the family state evolved by the spin-star propagator, with the
/// flags padded to [`KRAUS_ENV_LEVELS`] so nothing leaves the truncation.
/// This is the reference the extracted channel must reproduce.
pub fn traced_dynamics(family: &ZeroDiscordFamily, params: &SpinStarParams, omega_t: f64) -> Result<DensityMatrix> {
    let padded: Vec<FamilyMember> = family
        .members()
        .iter()
        .map(|m| {
            let mut flag = m.flag.clone();
            flag.resize(KRAUS_ENV_LEVELS.max(flag.len()), c64(0.0, 0.0));
            FamilyMember { flag, ..m.clone() }
        })
        .collect();
    let state = ZeroDiscordFamily::new(padded)?.state()?;
    evolve_sector(&state, omega_t, params)?.partial_trace(&[LABEL_A, LABEL_B])
}

/// max |ρ - Σ_k (I ⊗ P_k) ρ (I ⊗ P_k)| for the flag projectors P_k on
/// `env_label`. Flags need not span the factor; the complement projector is
/// added as one more outcome. Zero means ρ is block diagonal in the flags.
pub fn discord_zero_check(rho: &DensityMatrix, env_label: &str, flags: &[Vec<Complex64>]) -> Result<f64> {
    let d = rho.dims().dim_of(env_label)?;
    if flags.iter().any(|f| f.len() != d) {
        return Err(Error::DimensionMismatch(format!("flags must have length {d}")));
    }
    let refs: Vec<&[Complex64]> = flags.iter().map(|f| f.as_slice()).collect();
    if gram_deviation(&refs) > 1e-10 {
        return Err(Error::InvalidState("flags are not orthonormal".into()));
    }
    let mut projectors: Vec<ComplexMatrix> = flags.iter().map(|f| ComplexMatrix::projector(f)).collect();
    let mut rest = ComplexMatrix::identity(d);
    for p in &projectors {
        rest = &rest - p;
    }
    if rest.max_abs() > 1e-12 {
        projectors.push(rest);
    }
    let mut dephased = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for p in &projectors {
        let full = rho.embed(env_label, p)?;
        dephased = &dephased + &(&(&full * rho.mat()) * &full);
    }
    Ok(dephased.max_abs_diff(rho.mat()))
}

/// Outcome-by-outcome projective measurement of one factor: returns the
/// nonzero-probability outcomes with their normalized post-measurement states.
pub fn projective_measurement(
    rho: &DensityMatrix,
    label: &str,
    projectors: &[ComplexMatrix],
) -> Result<Vec<(f64, DensityMatrix)>> {
    let d = rho.dims().dim_of(label)?;
    if projectors.iter().any(|p| p.rows() != d || p.cols() != d) {
        return Err(Error::DimensionMismatch(format!("projectors must be {d}x{d}")));
    }
    let mut total = ComplexMatrix::zeros(d, d);
    for p in projectors {
        total = &total + p;
    }
    if total.max_abs_diff(&ComplexMatrix::identity(d)) > 1e-12 {
        return Err(Error::InvalidParameter("projectors must sum to the identity".into()));
    }
    let mut out = Vec::new();
    for p in projectors {
        if let Some(outcome) = rho.project_factor(label, p)? {
            out.push(outcome);
        }
    }
    Ok(out)
}

/// Probability-weighted unitaries on qubit B.
#[derive(Debug, Clone)]
pub struct RandomUnitaryChannel {
    branches: Vec<(f64, ComplexMatrix)>,
}

impl RandomUnitaryChannel {
    pub fn new(branches: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidState("a random-unitary channel needs a branch".into()));
        }
        let total: f64 = branches.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 || branches.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::InvalidState(format!("branch probabilities must sum to 1 (got {total})")));
        }
        for (_, u) in &branches {
            if u.rows() != 2 || u.cols() != 2 {
                return Err(Error::DimensionMismatch("branch unitaries act on qubit B (2x2)".into()));
            }
            let dev = unitarity_deviation(u);
            if dev > 1e-10 {
                return Err(Error::InvalidState(format!("branch is not unitary (deviation {dev:.3e})")));
            }
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[(f64, ComplexMatrix)] {
        &self.branches
    }

    /// Each branch (I_A ⊗ U_j) ρ (I_A ⊗ U_j)† with its probability.
    pub fn branch_states(&self, rho: &DensityMatrix) -> Result<Vec<(f64, DensityMatrix)>> {
        self.branches.iter().map(|(p, u)| Ok((*p, rho.evolve(&rho.embed(LABEL_B, u)?)?))).collect()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let branches = self.branch_states(rho)?;
        let refs: Vec<(f64, &DensityMatrix)> = branches.iter().map(|(p, r)| (*p, r)).collect();
        DensityMatrix::mixture(&refs)
    }

    pub fn as_kraus(&self) -> Result<KrausChannel> {
        KrausChannel::local_on_b(&self.branches.iter().map(|(p, u)| u.scale_real(p.sqrt())).collect::<Vec<_>>())
    }
}

/// Branches exp(∓iθσz/2) with probability 1/2 each, θ = ωt.
pub fn phase_model(omega_t: f64) -> RandomUnitaryChannel {
    let branch = |sign: f64| {
        ComplexMatrix::diag(&[
            Complex64::from_polar(1.0, -sign * omega_t / 2.0),
            Complex64::from_polar(1.0, sign * omega_t / 2.0),
        ])
    };
    RandomUnitaryChannel::new(vec![(0.5, branch(1.0)), (0.5, branch(-1.0))]).expect("valid phase branches")
}

/// {(1/2, I), (1/2, σz)}
pub fn full_dephasing() -> RandomUnitaryChannel {
    RandomUnitaryChannel::new(vec![(0.5, ComplexMatrix::identity(2)), (0.5, pauli_z())]).expect("valid branches")
}

/// Classical environment Σ_j p_j |j⟩⟨j| and the controlled unitary
/// Σ_j I_A ⊗ U_j ⊗ |j⟩⟨j| on A, B, E that reproduce the channel.
pub fn ruc_dilation(ch: &RandomUnitaryChannel) -> Result<(DensityMatrix, ComplexMatrix)> {
    let m = ch.branches.len();
    let probs: Vec<f64> = ch.branches.iter().map(|(p, _)| *p).collect();
    let env = DensityMatrix::new(ComplexMatrix::real_diag(&probs), DimsSpec::new(&[(LABEL_E, m)])?)?;
    let mut joint = ComplexMatrix::zeros(4 * m, 4 * m);
    for (j, (_, u)) in ch.branches.iter().enumerate() {
        let mut flag = ComplexMatrix::zeros(m, m);
        flag[(j, j)] = c64(1.0, 0.0);
        joint = &joint + &ComplexMatrix::identity(2).tensor(u).tensor(&flag);
    }
    Ok((env, joint))
}

#[derive(Debug, Clone)]
pub struct RucPoint {
    pub omega_t: f64,
    pub mixture: DensityMatrix,
    pub branches: Vec<(f64, DensityMatrix)>,
    pub c_mixture: f64,
    pub c_ensemble: f64,
    pub hidden: f64,
}

/// Mixture, branch states and hidden entanglement at every grid time. Fails
/// if the average branch concurrence drifts from C(ρ0) by more than 1e-9.
pub fn ruc_trajectory(
    builder: impl Fn(f64) -> RandomUnitaryChannel,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> Result<Vec<RucPoint>> {
    let c0 = concurrence_2q(rho0, (LABEL_A, LABEL_B))?;
    grid.iter()
        .map(|&omega_t| {
            let ch = builder(omega_t);
            let branches = ch.branch_states(rho0)?;
            let refs: Vec<(f64, &DensityMatrix)> = branches.iter().map(|(p, r)| (*p, r)).collect();
            let mixture = DensityMatrix::mixture(&refs)?;
            let members: Vec<EnsembleMember> =
                branches.iter().map(|(p, r)| EnsembleMember::mixed(*p, r.clone())).collect();
            let hidden = hidden_entanglement(&members, &mixture, (LABEL_A, LABEL_B))?;
            let c_mixture = concurrence_2q(&mixture, (LABEL_A, LABEL_B))?;
            let c_ensemble = c_mixture + hidden;
            if (c_ensemble - c0).abs() > 1e-9 {
                return Err(Error::Inconsistent(format!(
                    "average branch concurrence {c_ensemble} differs from the initial {c0} at Ωt = {omega_t}"
                )));
            }
            Ok(RucPoint { omega_t, mixture, branches, c_mixture, c_ensemble, hidden })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_unitary, seeded_rng};
    use crate::spin_star::{build_initial_state, build_omega0, EnvSize};
    use crate::state::{mutual_information, LogBase, PureState};
    use rand::Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    fn bell() -> DensityMatrix {
        let h = c64(FRAC_1_SQRT_2, 0.0);
        let z = c64(0.0, 0.0);
        PureState::new(vec![z, h, h, z], DimsSpec::qubits_ab()).unwrap().to_density()
    }

    fn traced_oracle(family: &ZeroDiscordFamily, params: &SpinStarParams, omega_t: f64) -> DensityMatrix {
        traced_dynamics(family, params, omega_t).unwrap()
    }

    #[test]
    fn family_at_pi_over_4_is_bell_basis() {
        let fam = zero_discord_family(&SpinStarParams::balanced()).unwrap();
        let h = FRAC_1_SQRT_2;
        let bells = [[0.0, h, h, 0.0], [h, 0.0, 0.0, h], [0.0, -h, h, 0.0], [-h, 0.0, 0.0, h]];
        for (m, b) in fam.members().iter().zip(bells) {
            for (x, y) in m.system.iter().zip(b) {
                assert!((x - c64(y, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn family_reproduces_initial_state() {
        let mut rng = seeded_rng(3, 0);
        for _ in 0..10 {
            let params = SpinStarParams {
                p: rng.gen(),
                alpha: rng.gen_range(0.0..2.0 * PI),
                beta: rng.gen_range(0.0..2.0 * PI),
                ..SpinStarParams::balanced()
            };
            let fam = zero_discord_family(&params).unwrap();
            let systems: Vec<&[Complex64]> = fam.members().iter().map(|m| m.system.as_slice()).collect();
            assert!(gram_deviation(&systems) < 1e-12);
            let diff = fam.state().unwrap().mat().max_abs_diff(build_initial_state(&params).unwrap().mat());
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn family_validation() {
        let fam = zero_discord_family(&SpinStarParams::balanced()).unwrap();
        assert!(fam.with_probabilities(&[0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(fam.with_probabilities(&[1.0]).is_err());
        let mut members = fam.members().to_vec();
        members[1].flag = members[0].flag.clone();
        assert!(ZeroDiscordFamily::new(members).is_err());
    }

    #[test]
    fn kraus_at_zero_dephases_in_psi_basis() {
        let params = SpinStarParams::balanced();
        let fam = zero_discord_family(&params).unwrap();
        let ch = extract_kraus(&fam, &params, 0.0).unwrap();
        let rho0 = fam.system_state().unwrap();
        assert!(ch.apply(&rho0).unwrap().mat().max_abs_diff(rho0.mat()) < 1e-15);
        // on a generic input it removes coherences between the ψ_i
        let mut rng = seeded_rng(8, 0);
        let rho = random_density(&DimsSpec::qubits_ab(), 4, &mut rng);
        let mut expected = ComplexMatrix::zeros(4, 4);
        for m in fam.members() {
            let p = ComplexMatrix::projector(&m.system);
            expected = &expected + &(&(&p * rho.mat()) * &p);
        }
        assert!(ch.apply(&rho).unwrap().mat().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn kraus_matches_traced_dynamics() {
        let params = SpinStarParams::balanced();
        let fam = zero_discord_family(&params).unwrap();
        for k in 0..12 {
            let x = 0.41 * k as f64;
            let ch = extract_kraus(&fam, &params, x).unwrap();
            assert!(ch.completeness_residual() <= 1e-9);
            let out = ch.apply(&fam.system_state().unwrap()).unwrap();
            assert!(out.mat().max_abs_diff(traced_oracle(&fam, &params, x).mat()) < 1e-9);
        }
    }

    #[test]
    fn kraus_works_for_any_probability_vector() {
        let mut rng = seeded_rng(12, 0);
        for env in [EnvSize::LargeN, EnvSize::Finite(3), EnvSize::Finite(7)] {
            let params = SpinStarParams {
                env,
                p: 0.3,
                alpha: rng.gen_range(0.0..2.0 * PI),
                beta: rng.gen_range(0.0..2.0 * PI),
                coupling: 1.0,
            };
            let raw: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let fam = zero_discord_family(&params).unwrap().with_probabilities(&probs).unwrap();
            let x = rng.gen_range(0.0..10.0);
            let ch = extract_kraus(&fam, &params, x).unwrap();
            let out = ch.apply(&fam.system_state().unwrap()).unwrap();
            assert!(out.mat().max_abs_diff(traced_oracle(&fam, &params, x).mat()) < 1e-9);
            assert!(ch.choi_min_eigenvalue().unwrap() >= -CHOI_TOL);
        }
    }

    #[test]
    fn kraus_rejects_small_bath() {
        let params = SpinStarParams::balanced().with_env(EnvSize::Finite(2));
        let fam = zero_discord_family(&params).unwrap();
        assert!(matches!(extract_kraus(&fam, &params, 1.0), Err(Error::OutsideTruncation(_))));
        assert!(extract_kraus(&fam, &SpinStarParams::balanced(), -1.0).is_err());
    }

    #[test]
    fn channel_basics() {
        let id = KrausChannel::identity(4);
        let rho = bell();
        assert!(id.apply(&rho).unwrap().mat().max_abs_diff(rho.mat()) < 1e-15);
        assert!(id.apply(&DensityMatrix::maximally_mixed(DimsSpec::new(&[("A", 2)]).unwrap())).is_err());
        assert!(KrausChannel::new(vec![ComplexMatrix::identity(4).scale_real(0.5)]).is_err());
        let params = SpinStarParams::balanced();
        let ch = extract_kraus(&zero_discord_family(&params).unwrap(), &params, 2.0).unwrap();
        let out = ch.apply(&DensityMatrix::maximally_mixed(DimsSpec::qubits_ab())).unwrap();
        assert!((out.mat().trace().re - 1.0).abs() < 1e-9);
        // Choi matrix of the identity channel is d |Φ+⟩⟨Φ+|
        let choi = id.choi_matrix();
        assert!((choi[(0, 5)].re - 1.0).abs() < 1e-15 && (choi.trace().re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn discord_check_examples() {
        let params = SpinStarParams::balanced();
        let flags: Vec<_> = (0..DICKE_LEVELS).map(|n| dicke_flag(n, DICKE_LEVELS)).collect();
        let rho = build_initial_state(&params).unwrap();
        assert!(discord_zero_check(&rho, LABEL_E, &flags).unwrap() < 1e-12);
        let s = 1.0 / 3f64.sqrt();
        let w = build_omega0(s, s, s).unwrap().to_density();
        assert!(discord_zero_check(&w, LABEL_E, &flags).unwrap() > 0.1);
        // partial flag set: complement is its own outcome
        assert!(discord_zero_check(&rho, LABEL_E, &flags[..2]).unwrap() < 1e-12);
        let mut rng = seeded_rng(4, 0);
        let prod = random_density(&DimsSpec::qubits_ab(), 4, &mut rng)
            .tensor(
                &DensityMatrix::new(
                    ComplexMatrix::real_diag(&[0.2, 0.3, 0.1, 0.4]),
                    DimsSpec::new(&[(LABEL_E, 4)]).unwrap(),
                )
                .unwrap(),
            )
            .unwrap();
        assert!(discord_zero_check(&prod, LABEL_E, &flags).unwrap() < 1e-15);
        let bad = vec![dicke_flag(0, 4), dicke_flag(0, 4)];
        assert!(discord_zero_check(&rho, LABEL_E, &bad).is_err());
    }

    #[test]
    fn dilation_reproduces_channel() {
        let mut rng = seeded_rng(6, 0);
        let channels = [
            full_dephasing(),
            phase_model(0.7),
            RandomUnitaryChannel::new(vec![
                (0.2, random_unitary(2, &mut rng)),
                (0.5, random_unitary(2, &mut rng)),
                (0.3, random_unitary(2, &mut rng)),
            ])
            .unwrap(),
        ];
        for ch in &channels {
            let rho = random_density(&DimsSpec::qubits_ab(), 3, &mut rng);
            let (env, u) = ruc_dilation(ch).unwrap();
            assert!(unitarity_deviation(&u) < 1e-12);
            let joint = rho.tensor(&env).unwrap().evolve(&u).unwrap();
            let reduced = joint.partial_trace(&[LABEL_A, LABEL_B]).unwrap();
            assert!(reduced.mat().max_abs_diff(ch.apply(&rho).unwrap().mat()) < 1e-10);
            let env_after = joint.partial_trace(&[LABEL_E]).unwrap();
            assert!(env_after.mat().max_abs_diff(env.mat()) < 1e-12);
        }
        // single branch: plain unitary
        let u = random_unitary(2, &mut rng);
        let single = RandomUnitaryChannel::new(vec![(1.0, u.clone())]).unwrap();
        let (_, joint) = ruc_dilation(&single).unwrap();
        let expected = ComplexMatrix::identity(2).tensor(&u);
        assert!(joint.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn dephasing_keeps_abe_but_kills_ab() {
        let (env, u) = ruc_dilation(&full_dephasing()).unwrap();
        let joint = bell().tensor(&env).unwrap().evolve(&u).unwrap();
        let ab = joint.partial_trace(&[LABEL_A, LABEL_B]).unwrap();
        assert!(concurrence_2q(&ab, (LABEL_A, LABEL_B)).unwrap() < 1e-9);
        // A;BE concurrence of (Bell ⊗ classical env) stays C(Bell) = 1 under the
        // local BE unitary: A's reduced state is unchanged and branch-wise pure.
        let a = joint.partial_trace(&[LABEL_A]).unwrap();
        assert!(a.mat().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-12);
        let branches = full_dephasing().branch_states(&bell()).unwrap();
        let avg: f64 = branches.iter().map(|(p, r)| p * concurrence_2q(r, (LABEL_A, LABEL_B)).unwrap()).sum();
        assert!((avg - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phase_model_trajectory() {
        let grid: Vec<f64> = (0..=64).map(|k| k as f64 * PI / 32.0).collect();
        let points = ruc_trajectory(phase_model, &bell(), &grid).unwrap();
        for pt in &points {
            assert!((pt.c_mixture - pt.omega_t.cos().abs()).abs() < 1e-9, "Ωt = {}", pt.omega_t);
            assert!(pt.c_mixture <= 1.0 + 1e-9);
            assert!((pt.c_ensemble - 1.0).abs() < 1e-9);
        }
        assert!(points[0].hidden.abs() < 1e-9);
        assert!((points[16].omega_t - FRAC_PI_2).abs() < 1e-12);
        assert!((points[16].hidden - 1.0).abs() < 1e-9);
        assert!((points[32].c_mixture - 1.0).abs() < 1e-9);
        let quarter = ruc_trajectory(phase_model, &bell(), &[FRAC_PI_4]).unwrap();
        assert!((quarter[0].hidden - (1.0 - FRAC_PI_4.cos())).abs() < 1e-9);
    }

    #[test]
    fn data_processing_on_b() {
        let mut rng = seeded_rng(10, 0);
        for trial in 0..20 {
            let rho = random_density(&DimsSpec::qubits_ab(), 1 + trial % 4, &mut rng);
            let ch =
                RandomUnitaryChannel::new(vec![(0.6, random_unitary(2, &mut rng)), (0.4, random_unitary(2, &mut rng))])
                    .unwrap();
            let out = ch.as_kraus().unwrap().apply(&rho).unwrap();
            let cut: (&[&str], &[&str]) = (&[LABEL_A], &[LABEL_B]);
            let before = mutual_information(&rho, cut, LogBase::Two).unwrap();
            let after = mutual_information(&out, cut, LogBase::Two).unwrap();
            assert!(before >= after - 1e-9);
        }
    }

    #[test]
    fn projective_measurement_equality_case() {
        let params = SpinStarParams { p: 0.3, alpha: 0.5, beta: 1.9, ..SpinStarParams::balanced() };
        let rho = build_initial_state(&params).unwrap();
        let p0 = ComplexMatrix::projector(&dicke_flag(0, DICKE_LEVELS));
        let p1 = ComplexMatrix::projector(&dicke_flag(1, DICKE_LEVELS));
        let rest = &(&ComplexMatrix::identity(DICKE_LEVELS) - &p0) - &p1;
        let outcomes = projective_measurement(&rho, LABEL_E, &[p0, p1, rest]).unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!((outcomes[0].0 - 0.7).abs() < 1e-12 && (outcomes[1].0 - 0.3).abs() < 1e-12);
        assert!(projective_measurement(&rho, LABEL_E, &[ComplexMatrix::identity(3)]).is_err());
    }
}
