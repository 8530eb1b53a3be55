//! Entanglement measures: concurrence of pure states and two-qubit states,
//! the partial-transpose witness, ensemble averages, and the inaccessible and
//! hidden entanglement bookkeeping built from them.

use crate::error::{Error, Result};
use crate::linalg::{c64, herm_eig, pauli_y, psd_sqrt, ComplexMatrix, HERMITIAN_TOL};
use crate::spin_star::SpinStarParams;
use crate::state::{DensityMatrix, PureState, PSD_TOL};

/// Slack allowed when a quantity that is non-negative in exact arithmetic
/// comes out slightly negative.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// sqrt(2 (1 - Tr rho_r^2)) with rho_r the reduced state on the left side of the cut.
pub fn concurrence_pure(psi: &PureState, cut: (&[&str], &[&str])) -> Result<f64> {
    psi.dims().check_cut(cut.0, cut.1)?;
    let reduced = psi.reduced(cut.0)?;
    Ok((2.0 * (1.0 - reduced.purity())).max(0.0).sqrt())
}

/// (σy ⊗ σy) rho* (σy ⊗ σy), conjugation taken in the computational basis.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = pauli_y().tensor(&pauli_y());
    &(&yy * &rho.conj()) * &yy
}

/// Eigenvalues of rho below this are treated as exact zeros when taking sqrt(rho);
/// rounding in the entries of a rank-deficient state leaves eigenvalues of
/// order 1e-17 whose square roots would otherwise leak into Λ.
const RANK_CUTOFF: f64 = 64.0 * f64::EPSILON;

/// sqrt(rho) ρ̃ sqrt(rho): Hermitian, PSD, and isospectral with R = rho ρ̃.
pub fn hermitized_r(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let root = psd_sqrt(rho, PSD_TOL)?;
    Ok((&(&root * &spin_flip(rho)) * &root).hermitian_part())
}

/// Square roots of the eigenvalues of R = rho ρ̃, in descending order.
///
/// They are the singular values of X = sqrt(rho) sqrt(ρ̃), read off as the
/// non-negative half of the spectrum of the Hermitian matrix [[0, X], [X†, 0]].
/// This avoids a square root of the eigenvalues of sqrt(rho) ρ̃ sqrt(rho),
/// which would turn 1e-17 noise into 1e-9 errors.
pub fn wootters_lambdas(rho: &ComplexMatrix) -> Result<[f64; 4]> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "Wootters concurrence needs a 4x4 matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let eig = herm_eig(rho, HERMITIAN_TOL)?;
    if eig.min() < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: eig.min(), tol: PSD_TOL });
    }
    let root = eig.map(|l| c64(if l > RANK_CUTOFF { l.sqrt() } else { 0.0 }, 0.0));
    let x = &root * &spin_flip(&root);
    let xd = x.adjoint();
    let aug = ComplexMatrix::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, false) => x[(i, j - 4)],
        (false, true) => xd[(i - 4, j)],
        _ => c64(0.0, 0.0),
    });
    let ev = herm_eig(&aug, HERMITIAN_TOL)?.values;
    let mut out = [0.0; 4];
    for (o, l) in out.iter_mut().zip(ev.iter().rev()) {
        *o = l.max(0.0);
    }
    Ok(out)
}

/// Wootters concurrence max{0, Λ1 - Λ2 - Λ3 - Λ4} of a two-qubit state.
///
/// `rho` must consist of exactly the two qubit factors named by the cut.
pub fn concurrence_2q(rho: &DensityMatrix, cut: (&str, &str)) -> Result<f64> {
    let dims = rho.dims();
    dims.check_cut(&[cut.0], &[cut.1])?;
    if dims.dims().any(|d| d != 2) {
        return Err(Error::InvalidCut(format!("two-qubit concurrence needs qubit factors, got {dims}")));
    }
    let l = wootters_lambdas(rho.mat())?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Smallest eigenvalue of the partial transpose over the right side of the cut.
/// Negative values certify entanglement; for 2x2 and 2x3 cuts a non-negative
/// value certifies separability.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix, cut: (&[&str], &[&str])) -> Result<f64> {
    rho.dims().check_cut(cut.0, cut.1)?;
    let pt = rho.partial_transpose(cut.1)?;
    Ok(herm_eig(&pt, HERMITIAN_TOL)?.min())
}

#[derive(Debug, Clone, PartialEq)]
pub enum MemberState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl MemberState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            MemberState::Pure(p) => p.to_density(),
            MemberState::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: MemberState,
}

impl EnsembleMember {
    pub fn pure(weight: f64, psi: PureState) -> Self {
        Self { weight, state: MemberState::Pure(psi) }
    }

    pub fn mixed(weight: f64, rho: DensityMatrix) -> Self {
        Self { weight, state: MemberState::Mixed(rho) }
    }
}

fn check_weights(members: &[EnsembleMember]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::InvalidState("empty ensemble".into()));
    }
    if members.iter().any(|m| !(0.0..=1.0).contains(&m.weight)) {
        return Err(Error::InvalidState("ensemble weights must lie in [0, 1]".into()));
    }
    let total: f64 = members.iter().map(|m| m.weight).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!("ensemble weights sum to {total}")));
    }
    Ok(())
}

/// Concurrence of one member: pure members use the reduced-purity formula for
/// any cut, mixed members must be two-qubit states with single-factor sides.
pub fn member_concurrence(state: &MemberState, cut: (&[&str], &[&str])) -> Result<f64> {
    match state {
        MemberState::Pure(psi) => concurrence_pure(psi, cut),
        MemberState::Mixed(rho) => match cut {
            ([a], [b]) => concurrence_2q(rho, (a, b)),
            _ => Err(Error::InvalidCut("mixed members are only measurable across a single-qubit cut".into())),
        },
    }
}

/// Σ_k q_k C(member_k).
pub fn ensemble_concurrence(members: &[EnsembleMember], cut: (&[&str], &[&str])) -> Result<f64> {
    check_weights(members)?;
    members.iter().map(|m| Ok(m.weight * member_concurrence(&m.state, cut)?)).sum()
}

/// Concurrence across the A;BE cut for the classically-flagged spin-star state:
/// p |sin 2α| + (1 - p) |sin 2β|. Constant in time, since the evolution is
/// local to BE.
pub fn c_abe_closed_form(params: &SpinStarParams) -> f64 {
    params.p * (2.0 * params.alpha).sin().abs() + (1.0 - params.p) * (2.0 * params.beta).sin().abs()
}

/// Whole-configuration concurrence minus system concurrence.
pub fn inaccessible_concurrence(c_whole: f64, c_sys: f64) -> Result<f64> {
    if c_whole < c_sys - MONOTONE_SLACK {
        return Err(Error::Inconsistent(format!(
            "whole-state concurrence {c_whole} is below the system concurrence {c_sys}"
        )));
    }
    Ok((c_whole - c_sys).max(0.0))
}

/// Average branch concurrence minus the concurrence of the mixture.
pub fn hidden_entanglement(members: &[EnsembleMember], rho_mix: &DensityMatrix, cut: (&str, &str)) -> Result<f64> {
    check_weights(members)?;
    let mut mix = ComplexMatrix::zeros(rho_mix.dim(), rho_mix.dim());
    for m in members {
        let rho = m.state.density();
        if rho.dims() != rho_mix.dims() {
            return Err(Error::DimensionMismatch(format!(
                "member on {} but mixture on {}",
                rho.dims(),
                rho_mix.dims()
            )));
        }
        mix = &mix + &rho.mat().scale_real(m.weight);
    }
    let dev = mix.max_abs_diff(rho_mix.mat());
    if dev > 1e-9 {
        return Err(Error::Inconsistent(format!("mixture differs from the weighted members by {dev:.3e}")));
    }
    let avg = ensemble_concurrence(members, (&[cut.0], &[cut.1]))?;
    let c_mix = concurrence_2q(rho_mix, cut)?;
    let hidden = avg - c_mix;
    if hidden < -MONOTONE_SLACK {
        return Err(Error::Inconsistent(format!("mixture concurrence {c_mix} exceeds the ensemble average {avg}")));
    }
    Ok(hidden)
}
