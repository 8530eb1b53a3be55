//! Central qubit B exchanging excitations with a bath of N spins at uniform
//! coupling g, while qubit A is a spectator.
//!
//! Two independent evolution routes are provided:
//!
//! * the sector route works in the symmetric Dicke ladder {|0̄⟩, |1̄⟩, ...},
//!   where the flip-flop Hamiltonian splits into 2x2 blocks on
//!   {|1_B n̄⟩, |0_B (n+1)̄⟩} with frequencies Ω_n = g sqrt((n+1)(N-n));
//! * the brute-force route builds the full 2^(N+1)-dimensional Hamiltonian in
//!   the computational basis and diagonalizes it with Jacobi rotations.
//!
//! All times are the dimensionless scaled time Ωt with Ω = g sqrt(N). In the
//! large-N limit Ω_n / Ω = sqrt(n + 1).

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, herm_eig, ComplexMatrix, HermitianEigen, HERMITIAN_TOL};
use crate::state::{DensityMatrix, DimsSpec, PureState};

/// Dimension of the truncated Dicke factor carried by system-environment states.
pub const DICKE_LEVELS: usize = 4;
/// Largest bath the brute-force route accepts.
pub const MAX_BRUTE_FORCE_SPINS: usize = 12;

pub const LABEL_A: &str = "A";
pub const LABEL_B: &str = "B";
pub const LABEL_E: &str = "E";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvSize {
    Finite(usize),
    /// Ω_1 / Ω = sqrt(2) exactly.
    LargeN,
}

impl fmt::Display for EnvSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSize::Finite(n) => write!(f, "N={n}"),
            EnvSize::LargeN => f.write_str("large-N"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinStarParams {
    pub env: EnvSize,
    /// Coupling g (inverse time).
    pub coupling: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for SpinStarParams {
    fn default() -> Self {
        Self::balanced()
    }
}

impl SpinStarParams {
    /// p = 0.5, α = β = π/4, large-N bath, g = 1.
    pub fn balanced() -> Self {
        Self { env: EnvSize::LargeN, coupling: 1.0, p: 0.5, alpha: FRAC_PI_4, beta: FRAC_PI_4 }
    }

    pub fn with_env(self, env: EnvSize) -> Self {
        Self { env, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if let EnvSize::Finite(n) = self.env {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("the bath needs at least 2 spins, got {n}")));
            }
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {}", self.coupling)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {}", self.p)));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=two_pi + 1e-12).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 2π], got {v}")));
            }
        }
        Ok(())
    }

    /// Ω = g sqrt(N); in the large-N mode the scale is Ω = g.
    pub fn omega(&self) -> f64 {
        match self.env {
            EnvSize::Finite(n) => self.coupling * (n as f64).sqrt(),
            EnvSize::LargeN => self.coupling,
        }
    }

    /// Ω_1 = g sqrt(2N - 2), or sqrt(2) Ω in the large-N mode.
    pub fn omega1(&self) -> f64 {
        match self.env {
            EnvSize::Finite(n) => self.coupling * (2.0 * n as f64 - 2.0).sqrt(),
            EnvSize::LargeN => std::f64::consts::SQRT_2 * self.omega(),
        }
    }

    /// Ω_n / Ω for the block {|1_B n̄⟩, |0_B (n+1)̄⟩}.
    pub fn rabi_ratio(&self, n: usize) -> f64 {
        match self.env {
            EnvSize::Finite(big_n) if n >= big_n => 0.0,
            EnvSize::Finite(big_n) => (((n + 1) * (big_n - n)) as f64 / big_n as f64).sqrt(),
            EnvSize::LargeN => ((n + 1) as f64).sqrt(),
        }
    }

    /// Highest Dicke level that exists for this bath.
    pub fn max_dicke_level(&self) -> usize {
        match self.env {
            EnvSize::Finite(n) => n,
            EnvSize::LargeN => usize::MAX,
        }
    }
}

fn ab_vector(amps: [(usize, usize, f64); 2]) -> [Complex64; 4] {
    let mut v = [c64(0.0, 0.0); 4];
    for (a, b, x) in amps {
        v[2 * a + b] = c64(x, 0.0);
    }
    v
}

/// cos α |1_A 0_B⟩ + sin α |0_A 1_B⟩
pub fn psi1(alpha: f64) -> [Complex64; 4] {
    ab_vector([(1, 0, alpha.cos()), (0, 1, alpha.sin())])
}

/// cos β |1_A 1_B⟩ + sin β |0_A 0_B⟩
pub fn psi2(beta: f64) -> [Complex64; 4] {
    ab_vector([(1, 1, beta.cos()), (0, 0, beta.sin())])
}

/// sin α |1_A 0_B⟩ - cos α |0_A 1_B⟩
pub fn psi3(alpha: f64) -> [Complex64; 4] {
    ab_vector([(1, 0, alpha.sin()), (0, 1, -alpha.cos())])
}

/// sin β |1_A 1_B⟩ - cos β |0_A 0_B⟩
pub fn psi4(beta: f64) -> [Complex64; 4] {
    ab_vector([(1, 1, beta.sin()), (0, 0, -beta.cos())])
}

/// |n̄⟩ in a Dicke factor with `levels` levels.
pub fn dicke_flag(n: usize, levels: usize) -> Vec<Complex64> {
    let mut v = vec![c64(0.0, 0.0); levels];
    v[n] = c64(1.0, 0.0);
    v
}

pub fn abe_dims(levels: usize) -> DimsSpec {
    DimsSpec::new(&[(LABEL_A, 2), (LABEL_B, 2), (LABEL_E, levels)]).expect("static labels")
}

/// p |ψ1⟩⟨ψ1| ⊗ |1̄⟩⟨1̄| + (1 - p) |ψ2⟩⟨ψ2| ⊗ |0̄⟩⟨0̄| on A, B and the
/// truncated Dicke factor E.
pub fn build_initial_state(params: &SpinStarParams) -> Result<DensityMatrix> {
    params.validate()?;
    let one = crate::linalg::tensor_vec(&psi1(params.alpha), &dicke_flag(1, DICKE_LEVELS));
    let zero = crate::linalg::tensor_vec(&psi2(params.beta), &dicke_flag(0, DICKE_LEVELS));
    let mat = &ComplexMatrix::projector(&one).scale_real(params.p)
        + &ComplexMatrix::projector(&zero).scale_real(1.0 - params.p);
    DensityMatrix::new(mat, abe_dims(DICKE_LEVELS))
}

/// x |0_A 0_B 1̄⟩ + y |0_A 1_B 0̄⟩ + z |1_A 0_B 0̄⟩
pub fn build_omega0(x: f64, y: f64, z: f64) -> Result<PureState> {
    if (x * x + y * y + z * z - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("x² + y² + z² must equal 1, got {}", x * x + y * y + z * z)));
    }
    if x == 0.0 || y == 0.0 || z == 0.0 {
        return Err(Error::InvalidParameter("x, y and z must all be nonzero".into()));
    }
    let l = DICKE_LEVELS;
    let idx = |a: usize, b: usize, n: usize| (a * 2 + b) * l + n;
    let mut v = vec![c64(0.0, 0.0); 4 * l];
    v[idx(0, 0, 1)] = c64(x, 0.0);
    v[idx(0, 1, 0)] = c64(y, 0.0);
    v[idx(1, 0, 0)] = c64(z, 0.0);
    PureState::new(v, abe_dims(l))
}

/// Coefficients of the closed-form concurrence trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub omega: f64,
    pub omega1: f64,
}

pub fn closed_form_coeffs(params: &SpinStarParams) -> ClosedFormCoeffs {
    let (p, al, be) = (params.p, params.alpha, params.beta);
    ClosedFormCoeffs {
        a: (1.0 - p) * be.sin().powi(2),
        b: (1.0 - p) * be.cos().powi(2),
        c: 0.5 * (1.0 - p) * (2.0 * be).sin(),
        d: p * al.sin().powi(2),
        e: 0.5 * p * (2.0 * al).sin(),
        f: p * al.cos().powi(2),
        omega: params.omega(),
        omega1: params.omega1(),
    }
}

impl ClosedFormCoeffs {
    /// (C1, C2) at scaled time Ωt.
    pub fn components(&self, omega_t: f64) -> (f64, f64) {
        let x = omega_t;
        let x1 = omega_t * self.omega1 / self.omega;
        let (c0, s0) = (x.cos(), x.sin());
        let (c1, s1) = (x1.cos(), x1.sin());
        let first = (self.e * c1 * c0).abs()
            - ((self.b * c0 * c0 + self.f * s0 * s0) * (self.a + self.d * s1 * s1)).max(0.0).sqrt();
        let second = (self.c * c0).abs() - ((self.b * s0 * s0 + self.f * c0 * c0) * self.d * c1 * c1).max(0.0).sqrt();
        (first, second)
    }
}

/// 2 max{0, C1(Ωt), C2(Ωt)}.
pub fn concurrence_closed_form(coeffs: &ClosedFormCoeffs, omega_t: f64) -> f64 {
    let (first, second) = coeffs.components(omega_t);
    (2.0 * first.max(second).max(0.0)).min(1.0)
}

/// exp(-iHt) on B ⊗ (Dicke factor with `levels` levels), index b * levels + n.
///
/// The top state |1_B (levels-1)̄⟩ would couple outside the truncation and is
/// left invariant; callers must keep it unoccupied.
pub fn sector_propagator(params: &SpinStarParams, omega_t: f64, levels: usize) -> ComplexMatrix {
    let dim = 2 * levels;
    let mut u = ComplexMatrix::identity(dim);
    for n in 0..levels.saturating_sub(1) {
        let theta = omega_t * params.rabi_ratio(n);
        let (c, s) = (theta.cos(), theta.sin());
        let up = levels + n; // |1_B n̄⟩
        let down = n + 1; // |0_B (n+1)̄⟩
        u[(up, up)] = c64(c, 0.0);
        u[(down, down)] = c64(c, 0.0);
        u[(up, down)] = c64(0.0, -s);
        u[(down, up)] = c64(0.0, -s);
    }
    u
}

/// Evolves a state on A, B and the Dicke factor E by I_A ⊗ U_BE(Ωt).
pub fn evolve_sector(state: &DensityMatrix, omega_t: f64, params: &SpinStarParams) -> Result<DensityMatrix> {
    params.validate()?;
    let dims = state.dims();
    let labels: Vec<&str> = dims.labels().collect();
    if labels != [LABEL_A, LABEL_B, LABEL_E] || dims.factor(0).1 != 2 || dims.factor(1).1 != 2 {
        return Err(Error::InvalidLabels(format!("sector evolution needs factors [A:2, B:2, E:levels], got {dims}")));
    }
    let levels = dims.factor(2).1;
    if levels < 2 {
        return Err(Error::OutsideTruncation("the Dicke factor needs at least two levels".into()));
    }
    let mat = state.mat();
    for a in 0..2 {
        for b in 0..2 {
            for n in 0..levels {
                let i = (a * 2 + b) * levels + n;
                let occupied = mat[(i, i)].re > 1e-12;
                if occupied && b == 1 && n == levels - 1 {
                    return Err(Error::OutsideTruncation(format!(
                        "|{a}_A 1_B {n}̄⟩ couples to a level beyond the {levels}-level ladder"
                    )));
                }
                if occupied && n > params.max_dicke_level() {
                    return Err(Error::OutsideTruncation(format!(
                        "Dicke level {n} does not exist for a bath of {}",
                        params.env
                    )));
                }
            }
        }
    }
    let u = ComplexMatrix::identity(2).tensor(&sector_propagator(params, omega_t, levels));
    state.evolve(&u)
}

/// ρ_AB(Ωt) from the Dicke-sector route.
pub fn sector_reduced_state(params: &SpinStarParams, omega_t: f64) -> Result<DensityMatrix> {
    let rho = build_initial_state(params)?;
    evolve_sector(&rho, omega_t, params)?.partial_trace(&[LABEL_A, LABEL_B])
}

fn check_bath_size(n: usize) -> Result<()> {
    if !(2..=MAX_BRUTE_FORCE_SPINS).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "the brute-force bath must have 2..={MAX_BRUTE_FORCE_SPINS} spins, got {n}"
        )));
    }
    Ok(())
}

/// Nonzero entries (row, col, value) of H = g Σ_i (σ+^B I-^(i) + σ-^B I+^(i))
/// on B ⊗ E_1 ⊗ ... ⊗ E_N, B the most significant bit and spin 1 next.
pub fn flip_flop_entries(n_spins: usize, g: f64) -> Vec<(usize, usize, f64)> {
    let env_dim = 1usize << n_spins;
    let mut out = Vec::new();
    for e in 0..env_dim {
        for i in 0..n_spins {
            let bit = 1usize << (n_spins - 1 - i);
            if e & bit != 0 {
                // σ+^B I-^(i): |0_B e⟩ → |1_B e - bit⟩
                let from = e;
                let to = env_dim + (e ^ bit);
                out.push((to, from, g));
                out.push((from, to, g));
            }
        }
    }
    out
}

/// Dense flip-flop Hamiltonian on B ⊗ (N bath spins), dimension 2^(N+1).
pub fn build_full_hamiltonian(n_spins: usize, g: f64) -> Result<ComplexMatrix> {
    check_bath_size(n_spins)?;
    let dim = 2usize << n_spins;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (i, j, v) in flip_flop_entries(n_spins, g) {
        h[(i, j)] += c64(v, 0.0);
    }
    Ok(h)
}

/// Total excitation number of a B ⊗ bath basis index.
pub fn excitation_number(index: usize) -> usize {
    index.count_ones() as usize
}

/// Dicke state |n̄⟩ expanded in the computational basis of N spins.
pub fn dicke_vector(n_spins: usize, n: usize) -> Vec<Complex64> {
    let env_dim = 1usize << n_spins;
    let count = (0..env_dim).filter(|e| e.count_ones() as usize == n).count();
    let amp = if count == 0 { 0.0 } else { 1.0 / (count as f64).sqrt() };
    (0..env_dim).map(|e| if e.count_ones() as usize == n { c64(amp, 0.0) } else { c64(0.0, 0.0) }).collect()
}

/// Full-Hilbert-space propagator for the finite bath. The Hamiltonian is
/// diagonalized once, one excitation block at a time.
#[derive(Debug, Clone)]
pub struct BruteForceOracle {
    params: SpinStarParams,
    n_spins: usize,
    blocks: Vec<(Vec<usize>, HermitianEigen)>,
}

impl BruteForceOracle {
    pub fn new(params: &SpinStarParams) -> Result<Self> {
        params.validate()?;
        let n_spins = match params.env {
            EnvSize::Finite(n) => n,
            EnvSize::LargeN => {
                return Err(Error::InvalidParameter("the brute-force oracle needs a finite bath".into()))
            }
        };
        check_bath_size(n_spins)?;
        let dim = 2usize << n_spins;
        let entries = flip_flop_entries(n_spins, params.coupling);
        let mut blocks = Vec::new();
        for m in 0..=(n_spins + 1) {
            let members: Vec<usize> = (0..dim).filter(|&i| excitation_number(i) == m).collect();
            let mut local = vec![usize::MAX; dim];
            for (k, &i) in members.iter().enumerate() {
                local[i] = k;
            }
            let size = members.len();
            let mut h = ComplexMatrix::zeros(size, size);
            for &(i, j, v) in &entries {
                if local[i] != usize::MAX {
                    debug_assert!(local[j] != usize::MAX, "H mixes excitation sectors");
                    h[(local[i], local[j])] += c64(v, 0.0);
                }
            }
            blocks.push((members, herm_eig(&h, HERMITIAN_TOL)?));
        }
        Ok(Self { params: *params, n_spins, blocks })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// exp(-iHt)|v⟩ on B ⊗ bath at physical time t.
    pub fn propagate(&self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = vec![c64(0.0, 0.0); v.len()];
        for (members, eig) in &self.blocks {
            let vecs = &eig.vectors;
            let size = members.len();
            let coeffs: Vec<Complex64> = (0..size)
                .map(|k| {
                    let overlap: Complex64 = members.iter().enumerate().map(|(r, &i)| vecs[(r, k)].conj() * v[i]).sum();
                    overlap * Complex64::from_polar(1.0, -eig.values[k] * t)
                })
                .collect();
            for (r, &i) in members.iter().enumerate() {
                out[i] = (0..size).map(|k| vecs[(r, k)] * coeffs[k]).sum();
            }
        }
        out
    }

    /// Evolves Σ_j w_j |ψ_j⟩|n_j̄⟩ (Dicke flags expanded into the bath basis)
    /// and traces out every bath spin.
    pub fn reduced_state_of(&self, members: &[(f64, [Complex64; 4], usize)], omega_t: f64) -> Result<DensityMatrix> {
        let t = omega_t / self.params.omega();
        let env_dim = 1usize << self.n_spins;
        let full_dims = DimsSpec::new(&[(LABEL_A, 2), (LABEL_B, 2), (LABEL_E, env_dim)])?;
        let mut acc = ComplexMatrix::zeros(4, 4);
        for (w, psi, level) in members {
            if *level > self.n_spins {
                return Err(Error::OutsideTruncation(format!(
                    "Dicke level {level} does not exist for {} bath spins",
                    self.n_spins
                )));
            }
            let flag = dicke_vector(self.n_spins, *level);
            let full = crate::linalg::tensor_vec(psi, &flag);
            let be_dim = 2 * env_dim;
            let mut evolved = Vec::with_capacity(full.len());
            for a in 0..2 {
                evolved.extend(self.propagate(&full[a * be_dim..(a + 1) * be_dim], t));
            }
            let state = PureState::new(evolved, full_dims.clone())?;
            acc = &acc + &state.reduced(&[LABEL_A, LABEL_B])?.mat().scale_real(*w);
        }
        DensityMatrix::new(acc, DimsSpec::qubits_ab())
    }

    /// ρ_AB(Ωt) for the classically-flagged initial state.
    pub fn reduced_state(&self, omega_t: f64) -> Result<DensityMatrix> {
        let p = &self.params;
        self.reduced_state_of(&[(p.p, psi1(p.alpha), 1), (1.0 - p.p, psi2(p.beta), 0)], omega_t)
    }
}

/// One-shot form of [`BruteForceOracle::reduced_state`].
pub fn brute_force_reduced_state(params: &SpinStarParams, omega_t: f64) -> Result<DensityMatrix> {
    BruteForceOracle::new(params)?.reduced_state(omega_t)
}
