//! Dense complex linear algebra for small quantum operators.
//!
//! Bipartite index convention used everywhere in the crate: a space
//! `H1 ⊗ H2` is laid out with `H2` as the minor (fastest-varying) index, so
//! basis element `|i⟩ ⊗ |k⟩` sits at position `i * d2 + k`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity tolerance (max-norm of `A - A†`).
pub const HERM_TOL: f64 = 1e-9;
/// Positivity and unit-trace tolerance for states.
pub const PSD_TOL: f64 = 1e-9;
/// Eigen-equation tolerance.
pub const EIG_TOL: f64 = 1e-8;
/// Default eigenvalue cutoff separating support from kernel.
pub const RANK_TOL: f64 = 1e-7;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// `|ket⟩⟨bra|`.
pub fn outer(ket: &CVector, bra: &CVector) -> CMatrix {
    ket * bra.adjoint()
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn basis_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = ONE;
    v
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Real part of the Hilbert-Schmidt inner product `tr[A† B]`.
pub fn hs_inner_re(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Which factor of `H1 ⊗ H2` a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on `H1 ⊗ H2` with `dims = (d1, d2)`.
///
/// Tracing out [`Subsystem::Second`] returns a `d1 × d1` matrix with entries
/// `Σ_k m[(i,k),(j,k)]`; tracing out [`Subsystem::First`] returns `d2 × d2`.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), over: Subsystem) -> Result<CMatrix> {
    let (d1, d2) = dims;
    let n = d1 * d2;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {n}x{n} for dims ({d1},{d2}), got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match over {
        Subsystem::Second => CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()),
        Subsystem::First => CMatrix::from_fn(d2, d2, |k, l| (0..d1).map(|i| m[(i * d2 + k, i * d2 + l)]).sum()),
    })
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// Square complex matrix equal to its adjoint within [`HERM_TOL`].
///
/// Construction symmetrizes the input, so the stored matrix is exactly
/// Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tol(m, HERM_TOL)
    }

    pub fn with_tol(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let dev = max_abs(&(&m - m.adjoint()));
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::hermitize(&m))
    }

    /// `(M + M†) / 2` without any check.
    pub fn hermitize(m: &CMatrix) -> Self {
        Hermitian((m + m.adjoint()).scale(0.5))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        Hermitian(CMatrix::zeros(d, d))
    }

    /// Rank-one projector onto the (normalized) vector.
    pub fn projector(v: &CVector) -> Self {
        let n = v.norm();
        let u = v.unscale(n);
        Self::hermitize(&outer(&u, &u))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Hermitian(CMatrix::from_fn(d, d, |i, j| if i == j { c(diag[i], 0.0) } else { ZERO }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Complex transpose (equal to the entrywise conjugate for Hermitian input).
    pub fn transpose(&self) -> Self {
        Hermitian(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Hermitian(self.0.scale(s))
    }

    pub fn add(&self, other: &Hermitian) -> Self {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hermitian) -> Self {
        Hermitian(&self.0 - &other.0)
    }

    /// `tr[self · other]`, real for Hermitian arguments.
    pub fn inner(&self, other: &Hermitian) -> f64 {
        (&self.0 * &other.0).trace().re
    }

    pub fn kron(&self, other: &Hermitian) -> Self {
        Hermitian(kron(&self.0, &other.0))
    }

    pub fn eig(&self) -> EigenDecomposition {
        herm_eig(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let values = SymmetricEigen::new(self.0.clone()).eigenvalues;
        values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Positive part `Σ_{λ>0} λ |v⟩⟨v|`.
    pub fn positive_part(&self) -> Self {
        self.eig().rebuild(|l| l.max(0.0))
    }

    /// Negative part `Σ_{λ<0} |λ| |v⟩⟨v|`.
    pub fn negative_part(&self) -> Self {
        self.eig().rebuild(|l| (-l).max(0.0))
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eig().values.iter().map(|l| l.abs()).sum()
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let d = self.vectors.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (i, &l) in self.values.iter().enumerate() {
            let w = f(l);
            if w != 0.0 {
                let v = self.vector(i);
                out += outer(&v, &v).scale(w);
            }
        }
        Hermitian::hermitize(&out)
    }
}

/// Rotate `v` so its first non-negligible component is real and positive.
fn fix_phase(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-10).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Deterministic orthonormal basis for the column span of a projector `p`
/// of rank `r`: repeatedly take the standard basis vector with the largest
/// component left in the span (lowest index on ties) and orthogonalize.
fn canonical_basis(p: &CMatrix, r: usize) -> Vec<CVector> {
    let d = p.nrows();
    let mut chosen: Vec<CVector> = Vec::with_capacity(r);
    while chosen.len() < r {
        let mut best: Option<(f64, CVector)> = None;
        for k in 0..d {
            let mut v: CVector = p.column(k).into_owned();
            for u in &chosen {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
            let n = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| n > bn + 1e-12) {
                best = Some((n, v));
            }
        }
        match best {
            Some((n, v)) if n > 1e-12 => {
                let mut u = v.unscale(n);
                fix_phase(&mut u);
                chosen.push(u);
            }
            _ => break,
        }
    }
    chosen
}

/// Hermitian eigendecomposition with a reproducible basis.
///
/// Eigenvalues are sorted descending. Each vector is phase-fixed so its
/// first non-negligible component is real positive; inside a degenerate
/// eigenspace the basis is rebuilt from the standard basis (see
/// `canonical_basis`), so `I/2` yields `|0⟩, |1⟩`.
pub fn herm_eig(a: &Hermitian) -> EigenDecomposition {
    let d = a.dim();
    let eig = SymmetricEigen::new(a.matrix().clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let raw: Vec<CVector> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();

    let scale = values.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let cluster_tol = 1e-10 * scale;
    let mut vectors: Vec<CVector> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[end - 1] - values[end]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start == 1 {
            let mut v = raw[start].clone();
            fix_phase(&mut v);
            vectors.push(v);
        } else {
            let mut p = CMatrix::zeros(d, d);
            for v in &raw[start..end] {
                p += outer(v, v);
            }
            let basis = canonical_basis(&p, end - start);
            if basis.len() == end - start {
                vectors.extend(basis);
            } else {
                for v in &raw[start..end] {
                    let mut v = v.clone();
                    fix_phase(&mut v);
                    vectors.push(v);
                }
            }
        }
        start = end;
    }
    EigenDecomposition { values, vectors: CMatrix::from_columns(&vectors) }
}

fn require_psd(a: &Hermitian) -> Result<EigenDecomposition> {
    let e = herm_eig(a);
    let min = e.values.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(e)
}

/// Orthogonal projector onto the eigenvectors of `a` with eigenvalue above `rank_tol`.
pub fn support_projector(a: &Hermitian, rank_tol: f64) -> Result<Hermitian> {
    let e = require_psd(a)?;
    Ok(e.rebuild(|l| if l > rank_tol { 1.0 } else { 0.0 }))
}

/// `I - support_projector(a)`.
pub fn kernel_projector(a: &Hermitian, rank_tol: f64) -> Result<Hermitian> {
    let e = require_psd(a)?;
    Ok(e.rebuild(|l| if l > rank_tol { 0.0 } else { 1.0 }))
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Hermitian);

impl DensityMatrix {
    pub fn new(op: Hermitian) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > PSD_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = op.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix(op))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(Hermitian::new(m)?)
    }

    /// Wraps an operator whose validity the caller has already ensured.
    pub(crate) fn new_unchecked(op: Hermitian) -> Self {
        DensityMatrix(op)
    }

    /// Hermitize, clip eigenvalues below zero, and renormalize the trace.
    ///
    /// Used to absorb round-off after repeated channel applications.
    pub fn from_approximate(m: &CMatrix) -> Result<Self> {
        check_square(m)?;
        let h = Hermitian::hermitize(m).positive_part();
        let tr = h.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(DensityMatrix(h.scale(1.0 / tr)))
    }

    pub fn pure(v: &CVector) -> Self {
        DensityMatrix(Hermitian::projector(v))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        Self::pure(&basis_vector(d, i))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(Hermitian::identity(d).scale(1.0 / d as f64))
    }

    /// Normalized mixture `Σ w_i ρ_i`; weights must be a probability vector.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidInput("weights and states differ in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights {weights:?} are not a probability vector")));
        }
        let d = states[0].dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch("mixture of states with different dims".into()));
            }
            m += s.matrix().scale(*w);
        }
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn op(&self) -> &Hermitian {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn into_op(self) -> Hermitian {
        self.0
    }
}

/// `½ Σ |eig(a - b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("trace distance between dims {} and {}", a.dim(), b.dim())));
    }
    Ok(0.5 * a.op().sub(b.op()).trace_norm())
}

/// `½ ‖a - b‖₁` for arbitrary Hermitian operators of equal size.
pub fn half_trace_norm_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * Hermitian::hermitize(&(a - b)).trace_norm()
}

/// JSON wire form of a complex matrix: row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<CMatrix> {
        let n = j.rows * j.cols;
        if j.rows == 0 || j.cols == 0 || j.re.len() != n || j.im.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix JSON declares {}x{} but carries {} re / {} im entries",
                j.rows,
                j.cols,
                j.re.len(),
                j.im.len()
            )));
        }
        let m = CMatrix::from_fn(j.rows, j.cols, |r, c_| c(j.re[r * j.cols + c_], j.im[r * j.cols + c_]));
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

impl Serialize for Hermitian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hermitian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = CMatrix::try_from(&j).map_err(serde::de::Error::custom)?;
        Hermitian::new(m).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = Hermitian::deserialize(d)?;
        DensityMatrix::new(h).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket_plus() -> CVector {
        CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).unscale(2f64.sqrt())
    }

    #[test]
    fn kron_of_identities_is_identity() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p0 = DensityMatrix::basis(2, 0).matrix().clone();
        let p1 = DensityMatrix::basis(2, 1).matrix().clone();
        let k = kron(&p0, &p1);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(k[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn partial_trace_of_identity() {
        let r = partial_trace(&identity(4), (2, 2), Subsystem::First).unwrap();
        assert!(max_abs(&(r - identity(2).scale(2.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        assert!(matches!(partial_trace(&identity(4), (2, 3), Subsystem::Second), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn eig_of_diagonal_state() {
        let e = herm_eig(&Hermitian::from_real_diagonal(&[0.3, 0.7]));
        assert!((e.values[0] - 0.7).abs() < 1e-15 && (e.values[1] - 0.3).abs() < 1e-15);
        assert!((e.vectors[(1, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((e.vectors[(0, 1)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_eigenspace_uses_standard_basis() {
        let e = herm_eig(&Hermitian::identity(3).scale(0.5));
        assert!(max_abs(&(e.vectors.clone() - identity(3))) < 1e-12);
        assert_eq!(e.values, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn projectors_of_rank_one_state() {
        let rho = Hermitian::projector(&ket_plus()).scale(0.6);
        let s = support_projector(&rho, RANK_TOL).unwrap();
        assert!(max_abs(&(s.matrix() - Hermitian::projector(&ket_plus()).matrix())) < 1e-12);
        let k = kernel_projector(&DensityMatrix::basis(2, 0).into_op(), RANK_TOL).unwrap();
        assert!(max_abs(&(k.matrix() - DensityMatrix::basis(2, 1).matrix())) < 1e-12);
    }

    #[test]
    fn support_of_full_rank_and_kernel_of_mixed() {
        let mixed = DensityMatrix::maximally_mixed(3);
        let s = support_projector(mixed.op(), RANK_TOL).unwrap();
        assert!(max_abs(&(s.matrix() - identity(3))) < 1e-12);
        let k = kernel_projector(mixed.op(), RANK_TOL).unwrap();
        assert!(max_abs(k.matrix()) < 1e-12);
    }

    #[test]
    fn projectors_reject_non_psd() {
        let h = Hermitian::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(support_projector(&h, RANK_TOL), Err(Error::NotPsd(_))));
        assert!(matches!(kernel_projector(&h, RANK_TOL), Err(Error::NotPsd(_))));
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = DensityMatrix::basis(2, 0);
        let z1 = DensityMatrix::basis(2, 1);
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-15);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-14);
        let half = trace_distance(&z0, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((half - 0.5).abs() < 1e-14);
        assert!(trace_distance(&z0, &DensityMatrix::basis(3, 0)).is_err());
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn density_rejects_bad_trace_and_negativity() {
        assert!(matches!(DensityMatrix::new(Hermitian::identity(2)), Err(Error::InvalidTrace(_))));
        assert!(matches!(DensityMatrix::new(Hermitian::from_real_diagonal(&[1.2, -0.2])), Err(Error::NotPsd(_))));
    }

    #[test]
    fn matrix_json_round_trip_and_validation() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let j = MatrixJson::from(&m);
        assert_eq!(j.re, vec![1.0, 2.0, 0.0, 3.0]);
        assert_eq!(j.im, vec![0.5, 0.0, -1.0, 0.0]);
        assert_eq!(CMatrix::try_from(&j).unwrap(), m);
        let bad = MatrixJson { rows: 2, cols: 2, re: vec![1.0], im: vec![0.0] };
        assert!(CMatrix::try_from(&bad).is_err());
        let text = r#"{"rows":1,"cols":1,"re":[1.0],"im":[0.0],"extra":1}"#;
        assert!(serde_json::from_str::<MatrixJson>(text).is_err());
    }
}
