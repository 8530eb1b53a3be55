//! Density matrices and pure states over labeled tensor factorizations,
//! with partial traces, partial transposes and entropic quantities.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, herm_eig, ComplexMatrix, HERMITIAN_TOL};

/// Trace deviation accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted by [`DensityMatrix::new`]; values in
/// `[-PSD_TOL, 0)` are treated as zero in entropies.
pub const PSD_TOL: f64 = 1e-9;
/// Norm deviation accepted by [`PureState::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Ordered list of labeled tensor factors. The first factor is the most
/// significant digit of the composite index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimsSpec {
    factors: Vec<(String, usize)>,
}

impl DimsSpec {
    pub fn new(factors: &[(&str, usize)]) -> Result<Self> {
        Self::from_owned(factors.iter().map(|(l, d)| (l.to_string(), *d)).collect())
    }

    pub fn from_owned(factors: Vec<(String, usize)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidLabels("at least one factor is required".into()));
        }
        let mut seen = HashSet::new();
        for (label, dim) in &factors {
            if label.is_empty() {
                return Err(Error::InvalidLabels("empty label".into()));
            }
            if *dim == 0 {
                return Err(Error::InvalidLabels(format!("factor `{label}` has dimension 0")));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidLabels(format!("duplicate label `{label}`")));
            }
        }
        Ok(Self { factors })
    }

    /// Two qubits labeled `A` and `B`.
    pub fn qubits_ab() -> Self {
        Self::new(&[("A", 2), ("B", 2)]).expect("static labels")
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|(_, d)| *d)
    }

    pub fn factor(&self, pos: usize) -> (&str, usize) {
        let (l, d) = &self.factors[pos];
        (l.as_str(), *d)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors.iter().position(|(l, _)| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].1)
    }

    /// Sorted factor positions for a label set; rejects unknown and repeated labels.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if pos.contains(&p) {
                return Err(Error::InvalidLabels(format!("label `{l}` listed twice")));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    fn select(&self, positions: &[usize]) -> Self {
        Self { factors: positions.iter().map(|&p| self.factors[p].clone()).collect() }
    }

    /// Concatenation; labels must stay unique.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        Self::from_owned(f)
    }

    /// Validates that `(left, right)` partitions all labels; returns sorted positions.
    pub fn check_cut(&self, left: &[&str], right: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidCut("both sides of a cut must be nonempty".into()));
        }
        let l = self.positions(left).map_err(|e| Error::InvalidCut(e.to_string()))?;
        let r = self.positions(right).map_err(|e| Error::InvalidCut(e.to_string()))?;
        if l.iter().any(|p| r.contains(p)) {
            return Err(Error::InvalidCut("the two sides overlap".into()));
        }
        if l.len() + r.len() != self.len() {
            return Err(Error::InvalidCut("the cut does not cover every factor".into()));
        }
        Ok((l, r))
    }

    /// `table[k][t]` is the composite index whose digits on `kept` spell `k`
    /// and whose remaining digits spell `t` (both in factor order).
    fn split_table(&self, kept: &[usize]) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].1;
        }
        let rest: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
        let offsets = |positions: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &p in positions {
                let (d, stride) = (self.factors[p].1, strides[p]);
                out = out.iter().flat_map(|&base| (0..d).map(move |digit| base + digit * stride)).collect();
            }
            out
        };
        let k_off = offsets(kept);
        let t_off = offsets(&rest);
        k_off.iter().map(|&k| t_off.iter().map(|&t| k + t).collect()).collect()
    }
}

impl fmt::Display for DimsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(l, d)| format!("{l}:{d}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Logarithm base for entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            "10" => Ok(LogBase::Ten),
            other => Err(Error::InvalidParameter(format!("log base must be 2, e or 10, got `{other}`"))),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::E => "e",
            LogBase::Ten => "10",
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix with a factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: DimsSpec,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix, dims: DimsSpec) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare { rows: mat.rows(), cols: mat.cols() });
        }
        if mat.rows() != dims.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimension {} does not match factorization {dims}",
                mat.rows()
            )));
        }
        let eig = herm_eig(&mat, HERMITIAN_TOL)?;
        let tr = mat.trace();
        if (tr - c64(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {:.12} {:+.3e}i, expected 1", tr.re, tr.im)));
        }
        if eig.min() < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: eig.min(), tol: PSD_TOL });
        }
        Ok(Self { mat: mat.hermitian_part(), dims })
    }

    /// Normalizes a nonzero PSD operator by its trace before validating.
    pub fn from_unnormalized(mat: ComplexMatrix, dims: DimsSpec) -> Result<Self> {
        let tr = mat.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidState(format!("cannot normalize an operator with trace {tr}")));
        }
        Self::new(mat.scale_real(1.0 / tr), dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { mat: ComplexMatrix::projector(&psi.vec), dims: psi.dims.clone() }
    }

    pub fn maximally_mixed(dims: DimsSpec) -> Self {
        let n = dims.total_dim();
        Self { mat: ComplexMatrix::identity(n).scale_real(1.0 / n as f64), dims }
    }

    /// Convex combination; every state must share the same factorization.
    pub fn mixture(members: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?.1;
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 || members.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidState(format!("mixture weights must be a probability vector (sum {total})")));
        }
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in members {
            if rho.dims != first.dims {
                return Err(Error::DimensionMismatch(format!("mixture members carry {} and {}", first.dims, rho.dims)));
            }
            acc = &acc + &rho.mat.scale_real(*w);
        }
        Self::new(acc, first.dims.clone())
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &DimsSpec {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn into_parts(self) -> (ComplexMatrix, DimsSpec) {
        (self.mat, self.dims)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.mat, HERMITIAN_TOL).expect("validated density matrix").values
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// rho ⊗ other with concatenated factorization.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { mat: self.mat.tensor(&other.mat), dims: self.dims.concat(&other.dims)? })
    }

    /// U rho U^dagger on the full space.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a state of dimension {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Self::new(self.mat.conjugate_by(u)?, self.dims.clone())
    }

    /// Reduced state on `keep`, factors in their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidLabels("partial trace must keep at least one factor".into()));
        }
        let kept = self.dims.positions(keep)?;
        let table = self.dims.split_table(&kept);
        let dk = table.len();
        let out = ComplexMatrix::from_fn(dk, dk, |a, b| {
            table[a].iter().zip(&table[b]).map(|(&i, &j)| self.mat[(i, j)]).sum()
        });
        Ok(Self { mat: out.hermitian_part(), dims: self.dims.select(&kept) })
    }

    /// Partial transpose over the factors named in `labels`.
    pub fn partial_transpose(&self, labels: &[&str]) -> Result<ComplexMatrix> {
        let transposed = self.dims.positions(labels)?;
        let others: Vec<usize> = (0..self.dims.len()).filter(|p| !transposed.contains(p)).collect();
        // table[x][y]: x indexes the untouched factors, y the transposed ones
        let table = self.dims.split_table(&others);
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (a, row_a) in table.iter().enumerate() {
            for (b, &i) in row_a.iter().enumerate() {
                for (c, row_c) in table.iter().enumerate() {
                    for (d, &j) in row_c.iter().enumerate() {
                        out[(i, j)] = self.mat[(table[a][d], table[c][b])];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Conditions on the support of `projector` (acting on `label`):
    /// returns the probability and the normalized post-measurement state,
    /// or `None` when the outcome has zero probability.
    pub fn project_factor(&self, label: &str, projector: &ComplexMatrix) -> Result<Option<(f64, Self)>> {
        let op = self.embed(label, projector)?;
        let post = &(&op * &self.mat) * &op;
        let prob = post.trace().re;
        if prob <= 1e-14 {
            return Ok(None);
        }
        Ok(Some((prob, Self::new(post.scale_real(1.0 / prob), self.dims.clone())?)))
    }

    /// Lifts an operator on one factor to the full space (identity elsewhere).
    pub fn embed(&self, label: &str, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        embed_operator(&self.dims, label, op)
    }

    /// Returns the pure state if the rank is one within `tol`.
    pub fn to_pure(&self, tol: f64) -> Result<PureState> {
        let eig = herm_eig(&self.mat, HERMITIAN_TOL)?;
        if (eig.max() - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("state is mixed (largest eigenvalue {:.6})", eig.max())));
        }
        let vec = eig.vectors.column(self.dim() - 1);
        PureState::normalized(vec, self.dims.clone())
    }
}

/// I ⊗ ... ⊗ op ⊗ ... ⊗ I with `op` on factor `label`.
pub fn embed_operator(dims: &DimsSpec, label: &str, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let pos = dims.position(label)?;
    let d = dims.factor(pos).1;
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on factor `{label}` of dimension {d}",
            op.rows(),
            op.cols()
        )));
    }
    let left: usize = dims.dims().take(pos).product();
    let right: usize = dims.dims().skip(pos + 1).product();
    Ok(ComplexMatrix::identity(left).tensor(op).tensor(&ComplexMatrix::identity(right)))
}

/// Normalized state vector with a factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: Vec<Complex64>,
    dims: DimsSpec,
}

impl PureState {
    pub fn new(vec: Vec<Complex64>, dims: DimsSpec) -> Result<Self> {
        if vec.len() != dims.total_dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} for factorization {dims}", vec.len())));
        }
        if vec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm is {norm:.15}, expected 1")));
        }
        Ok(Self { vec, dims })
    }

    pub fn normalized(vec: Vec<Complex64>, dims: DimsSpec) -> Result<Self> {
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(vec.into_iter().map(|z| z / norm).collect(), dims)
    }

    /// Computational basis state.
    pub fn basis(index: usize, dims: DimsSpec) -> Result<Self> {
        let n = dims.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch(format!("basis index {index} out of range {n}")));
        }
        let mut v = vec![c64(0.0, 0.0); n];
        v[index] = c64(1.0, 0.0);
        Self::new(v, dims)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.vec
    }

    pub fn dims(&self) -> &DimsSpec {
        &self.dims
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { vec: crate::linalg::tensor_vec(&self.vec, &other.vec), dims: self.dims.concat(&other.dims)? })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Reduced density matrix on `keep`, computed from the amplitudes.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidLabels("partial trace must keep at least one factor".into()));
        }
        let kept = self.dims.positions(keep)?;
        let table = self.dims.split_table(&kept);
        let dk = table.len();
        let out = ComplexMatrix::from_fn(dk, dk, |a, b| {
            table[a].iter().zip(&table[b]).map(|(&i, &j)| self.vec[i] * self.vec[j].conj()).sum()
        });
        Ok(DensityMatrix { mat: out.hermitian_part(), dims: self.dims.select(&kept) })
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.mul_vec(&self.vec)?, self.dims.clone())
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// -Σ λ log λ with 0 log 0 = 0; never negative.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues(), base)
}

pub fn entropy_of_spectrum(values: &[f64], base: LogBase) -> f64 {
    let s: f64 = values.iter().filter(|&&l| l > 0.0).map(|&l| -l * base.log(l)).sum();
    s.max(0.0)
}

/// S(X) + S(Y) - S(XY) for a cut covering every factor.
pub fn mutual_information(rho: &DensityMatrix, cut: (&[&str], &[&str]), base: LogBase) -> Result<f64> {
    rho.dims().check_cut(cut.0, cut.1)?;
    let sx = von_neumann_entropy(&rho.partial_trace(cut.0)?, base);
    let sy = von_neumann_entropy(&rho.partial_trace(cut.1)?, base);
    let sxy = von_neumann_entropy(rho, base);
    Ok(sx + sy - sxy)
}

/// I(A:E|B) = S(AB) + S(BE) - S(B) - S(ABE) for a state with exactly three
/// factors, read positionally as A, B, E.
pub fn conditional_mutual_information(rho: &DensityMatrix, base: LogBase) -> Result<f64> {
    if rho.dims().len() != 3 {
        return Err(Error::InvalidLabels(format!(
            "conditional mutual information needs exactly three factors, got {}",
            rho.dims()
        )));
    }
    let labels: Vec<&str> = rho.dims().labels().collect();
    let (a, b, e) = (labels[0], labels[1], labels[2]);
    let s_ab = von_neumann_entropy(&rho.partial_trace(&[a, b])?, base);
    let s_be = von_neumann_entropy(&rho.partial_trace(&[b, e])?, base);
    let s_b = von_neumann_entropy(&rho.partial_trace(&[b])?, base);
    let s_abe = von_neumann_entropy(rho, base);
    Ok(s_ab + s_be - s_b - s_abe)
}
