//! Channels in Choi form.
//!
//! A channel `Φ: L(C^d_in) → L(C^d_out)` is stored as
//! `C = Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|` on `H_out ⊗ H_in` (input is the minor
//! index) and acts as `Φ(ρ) = tr_in[C (I ⊗ ρᵀ)]`. Complete positivity is
//! `C ⪰ 0`; trace preservation is `tr_out[C] = I`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{
    c, half_trace_norm_diff, herm_eig, max_abs, partial_trace, CMatrix, DensityMatrix, Hermitian, MatrixJson,
    Subsystem, PSD_TOL,
};

/// Trace-preservation tolerance on `‖tr_out[C] − I‖_max`.
pub const TP_TOL: f64 = 1e-9;
/// Default tolerance for fixed-point detection and residuals.
pub const FP_TOL: f64 = 1e-8;
/// Iteration stops once consecutive states are this close in trace distance.
pub const SETTLE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    matrix: Hermitian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    pub min_eig: f64,
    pub tp_residual: f64,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.cp && self.tp
    }
}

impl ChoiMatrix {
    pub fn new(d_in: usize, d_out: usize, matrix: Hermitian) -> Result<Self> {
        if d_in == 0 || d_out == 0 || matrix.dim() != d_in * d_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of dim {} cannot describe a {d_in} -> {d_out} channel",
                matrix.dim()
            )));
        }
        Ok(ChoiMatrix { d_in, d_out, matrix })
    }

    /// Square channel on a `d`-dimensional system.
    pub fn square(matrix: Hermitian) -> Result<Self> {
        let n = matrix.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::DimensionMismatch(format!("Choi dim {n} is not a perfect square")));
        }
        Self::new(d, d, matrix)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(&[crate::linops::identity(d)]).expect("identity Kraus operator")
    }

    /// `ρ ↦ (1 − p) ρ + p tr[ρ] I/d`.
    pub fn depolarizing(d: usize, p: f64) -> Self {
        let id = Self::identity(d);
        let n = d * d;
        let full = Hermitian::identity(n).scale(1.0 / d as f64);
        let m = id.matrix.scale(1.0 - p).add(&full.scale(p));
        ChoiMatrix { d_in: d, d_out: d, matrix: m }
    }

    /// Complete dephasing in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let kraus: Vec<CMatrix> = (0..d)
            .map(|i| CMatrix::from_fn(d, d, |a, b| if a == i && b == i { c(1.0, 0.0) } else { c(0.0, 0.0) }))
            .collect();
        Self::from_kraus(&kraus).expect("projective Kraus operators")
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &CMatrix) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// Choi matrix of `ρ ↦ Σ_k K_k ρ K_k†`.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        let n = d_in * d_out;
        let mut m = CMatrix::zeros(n, n);
        for k in kraus {
            if k.shape() != (d_out, d_in) {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            let w = nalgebra::DVector::from_fn(n, |idx, _| k[(idx / d_in, idx % d_in)]);
            m += &w * w.adjoint();
        }
        Self::new(d_in, d_out, Hermitian::hermitize(&m))
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.matrix
    }

    fn require_square(&self) -> Result<usize> {
        if self.d_in != self.d_out {
            return Err(Error::DimensionMismatch(format!("channel {} -> {} is not square", self.d_in, self.d_out)));
        }
        Ok(self.d_in)
    }

    /// `tr_in[C (I ⊗ Xᵀ)]` for an arbitrary `d_in × d_in` matrix `X`.
    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        let (di, dout) = (self.d_in, self.d_out);
        if x.shape() != (di, di) {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {di}, operator is {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let m = self.matrix.matrix();
        Ok(CMatrix::from_fn(dout, dout, |a, b| {
            let mut acc = c(0.0, 0.0);
            for k in 0..di {
                for l in 0..di {
                    acc += m[(a * di + k, b * di + l)] * x[(k, l)];
                }
            }
            acc
        }))
    }

    /// `Φ(ρ)`; fails if the output is not a valid state (possible only for
    /// channels that are not CPTP).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.matrix())?;
        DensityMatrix::new(Hermitian::hermitize(&out))
    }

    /// Complete positivity and trace preservation.
    pub fn is_cptp(&self) -> CptpReport {
        self.is_cptp_with(PSD_TOL, TP_TOL)
    }

    pub fn is_cptp_with(&self, psd_tol: f64, tp_tol: f64) -> CptpReport {
        let min_eig = self.matrix.min_eigenvalue();
        let reduced = partial_trace(self.matrix.matrix(), (self.d_out, self.d_in), Subsystem::First)
            .expect("dimensions checked at construction");
        let tp_residual = max_abs(&(reduced - crate::linops::identity(self.d_in)));
        CptpReport { cp: min_eig >= -psd_tol, tp: tp_residual <= tp_tol, min_eig, tp_residual }
    }

    pub fn require_cptp(&self) -> Result<CptpReport> {
        let r = self.is_cptp();
        if !r.is_cptp() {
            return Err(Error::NotCptp { min_eig: r.min_eig, tp_residual: r.tp_residual });
        }
        Ok(r)
    }

    /// Matrix `S` with `S · vec(ρ) = vec(Φ(ρ))`, `vec` flattening row-major.
    pub fn superoperator(&self) -> Result<CMatrix> {
        let d = self.require_square()?;
        let m = self.matrix.matrix();
        Ok(CMatrix::from_fn(d * d, d * d, |row, col| {
            let (a, b) = (row / d, row % d);
            let (k, l) = (col / d, col % d);
            m[(a * d + k, b * d + l)]
        }))
    }

    /// Action of `Φ` on Hermitian operators as a real `d² × d²` matrix in the
    /// orthonormal basis returned by [`hermitian_basis`].
    fn real_superoperator(&self, basis: &[Hermitian]) -> Result<DMatrix<f64>> {
        self.require_square()?;
        let n = basis.len();
        let images: Vec<CMatrix> = basis.iter().map(|g| self.apply_operator(g.matrix())).collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |j, k| crate::linops::hs_inner_re(basis[j].matrix(), &images[k])))
    }

    /// Fixed states of a CPTP channel; see [`FixedPointSet`].
    pub fn fixed_points(&self, fp_tol: f64) -> Result<FixedPointSet> {
        self.require_cptp()?;
        let d = self.require_square()?;
        let basis = hermitian_basis(d);
        let r = self.real_superoperator(&basis)?;

        let peripheral_spectrum: Vec<[f64; 2]> = r
            .complex_eigenvalues()
            .iter()
            .filter(|z| (z.norm() - 1.0).abs() <= fp_tol.max(1e-9))
            .map(|z| [z.re, z.im])
            .collect();

        let shifted = &r - DMatrix::identity(r.nrows(), r.ncols());
        let kernel = real_null_space(&shifted, fp_tol);
        let fixed_basis: Vec<Hermitian> = kernel
            .iter()
            .map(|v| {
                let mut m = CMatrix::zeros(d, d);
                for (coef, g) in v.iter().zip(&basis) {
                    m += g.matrix().scale(*coef);
                }
                Hermitian::hermitize(&m)
            })
            .collect();

        let extractor = Extractor { basis: &fixed_basis, dim: d };
        let candidates = extractor.extreme_states();

        let mut states = Vec::new();
        let mut residuals = Vec::new();
        for s in candidates {
            let res = half_trace_norm_diff(&self.apply_operator(s.matrix())?, s.matrix());
            if res <= fp_tol {
                states.push(s);
                residuals.push(res);
            }
        }
        if states.is_empty() {
            return Err(Error::NumericalLimit(format!(
                "no fixed state within {fp_tol:e} found (fixed space dim {})",
                fixed_basis.len()
            )));
        }
        Ok(FixedPointSet {
            states,
            eigenvalue_residuals: residuals,
            peripheral_spectrum,
            fixed_space_dim: fixed_basis.len(),
        })
    }

    /// `[Φ(ρ₀), Φ²(ρ₀), …, Φⁿ(ρ₀)]`.
    ///
    /// Each state is re-hermitized, clipped to the PSD cone, and renormalized
    /// so round-off does not accumulate over long runs.
    pub fn iterate(&self, rho0: &DensityMatrix, n: usize) -> Result<Vec<DensityMatrix>> {
        if n == 0 {
            return Err(Error::InvalidInput("iteration count must be at least 1".into()));
        }
        let mut out = Vec::with_capacity(n);
        let mut cur = rho0.clone();
        for _ in 0..n {
            cur = DensityMatrix::from_approximate(&self.apply_operator(cur.matrix())?)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Apply `Φ` until two consecutive states are within `tol` in trace
    /// distance or `max_steps` applications have been made.
    pub fn settle(&self, rho0: &DensityMatrix, max_steps: usize, tol: f64) -> Result<Settled> {
        let mut cur = rho0.clone();
        for step in 1..=max_steps {
            let next = DensityMatrix::from_approximate(&self.apply_operator(cur.matrix())?)?;
            let delta = crate::linops::trace_distance(&cur, &next)?;
            cur = next;
            if delta <= tol {
                return Ok(Settled { state: cur, steps: step, converged: true, last_delta: delta });
            }
            if step == max_steps {
                return Ok(Settled { state: cur, steps: step, converged: false, last_delta: delta });
            }
        }
        Ok(Settled { state: cur, steps: 0, converged: false, last_delta: f64::INFINITY })
    }
}

#[derive(Clone, Debug)]
pub struct Settled {
    pub state: DensityMatrix,
    pub steps: usize,
    pub converged: bool,
    pub last_delta: f64,
}

/// Fixed states of a channel.
///
/// `states` are extreme points of the convex set of fixed states, found by
/// walking from a full-support fixed state to the boundary along traceless
/// fixed directions, then topped up until they span the Hermitian fixed
/// space. Traceless fixed operators are not states and appear only through
/// `fixed_space_dim` and `peripheral_spectrum`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub states: Vec<DensityMatrix>,
    /// `½‖Φ(ρ) − ρ‖₁` for each returned state.
    pub eigenvalue_residuals: Vec<f64>,
    /// Eigenvalues of the superoperator on the unit circle, as `[re, im]`.
    pub peripheral_spectrum: Vec<[f64; 2]>,
    /// Real dimension of the space of Hermitian fixed operators.
    pub fixed_space_dim: usize,
}

/// Orthonormal (Hilbert-Schmidt) basis of `d × d` Hermitian matrices.
pub fn hermitian_basis(d: usize) -> Vec<Hermitian> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in k..d {
            if k == l {
                out.push(Hermitian::hermitize(&CMatrix::from_fn(d, d, |a, b| {
                    if a == k && b == k {
                        c(1.0, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                })));
            } else {
                out.push(Hermitian::hermitize(&CMatrix::from_fn(d, d, |a, b| {
                    if (a, b) == (k, l) || (a, b) == (l, k) {
                        c(s, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                })));
                out.push(Hermitian::hermitize(&CMatrix::from_fn(d, d, |a, b| {
                    if (a, b) == (k, l) {
                        c(0.0, s)
                    } else if (a, b) == (l, k) {
                        c(0.0, -s)
                    } else {
                        c(0.0, 0.0)
                    }
                })));
            }
        }
    }
    out
}

/// Orthonormal basis of `{x : m x ≈ 0}` from singular values `≤ tol`.
pub(crate) fn real_null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    svd.singular_values.iter().enumerate().filter(|(_, s)| **s <= tol).map(|(i, _)| v_t.row(i).transpose()).collect()
}

struct Extractor<'a> {
    basis: &'a [Hermitian],
    dim: usize,
}

const MAX_STATES: usize = 256;
const SAME_STATE_TOL: f64 = 1e-7;
const SUPPORT_TOL: f64 = 1e-9;

impl Extractor<'_> {
    fn extreme_states(&self) -> Vec<DensityMatrix> {
        if self.basis.is_empty() {
            return Vec::new();
        }
        let mut seed = Hermitian::zeros(self.dim);
        for b in self.basis {
            seed = seed.add(&b.positive_part()).add(&b.negative_part());
        }
        let mut extremes: Vec<DensityMatrix> = Vec::new();
        if let Some(s) = normalize(&seed) {
            self.walk(s, &mut extremes);
        }

        // Top up until the extremes span the fixed space.
        loop {
            let before = extremes.len();
            for b in self.basis {
                let residual = residual_outside_span(b, &extremes);
                if residual.matrix().norm() <= 1e-6 {
                    continue;
                }
                for part in [residual.positive_part(), residual.negative_part()] {
                    if let Some(s) = normalize(&part) {
                        self.walk(s, &mut extremes);
                    }
                }
                if extremes.len() >= MAX_STATES {
                    break;
                }
            }
            if extremes.len() == before || extremes.len() >= MAX_STATES {
                break;
            }
        }
        extremes.sort_by(state_order);
        extremes
    }

    /// Depth-first split of `start` into extreme fixed states.
    fn walk(&self, start: DensityMatrix, extremes: &mut Vec<DensityMatrix>) {
        let mut stack = vec![start];
        let mut visited: Vec<DensityMatrix> = Vec::new();
        while let Some(rho) = stack.pop() {
            if extremes.len() >= MAX_STATES || visited.len() > 4 * MAX_STATES {
                break;
            }
            if contains(&visited, &rho) {
                continue;
            }
            visited.push(rho.clone());
            match self.split(&rho) {
                Some((a, b)) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => {
                    if !contains(extremes, &rho) {
                        extremes.push(rho);
                    }
                }
            }
        }
    }

    /// Traceless fixed operators supported inside the range of `support`.
    fn face_directions(&self, support: &CMatrix) -> Vec<Hermitian> {
        let d = self.dim;
        let m = self.basis.len();
        let rows = 1 + 2 * d * d;
        let mut a = DMatrix::<f64>::zeros(rows, m);
        for (k, b) in self.basis.iter().enumerate() {
            a[(0, k)] = b.trace();
            let outside = b.matrix() - support * b.matrix() * support;
            for (idx, z) in outside.iter().enumerate() {
                a[(1 + 2 * idx, k)] = z.re;
                a[(2 + 2 * idx, k)] = z.im;
            }
        }
        real_null_space(&a, 1e-9)
            .into_iter()
            .map(|v| {
                let mut h = CMatrix::zeros(d, d);
                for (coef, b) in v.iter().zip(self.basis) {
                    h += b.matrix().scale(*coef);
                }
                Hermitian::hermitize(&h)
            })
            .filter(|h| h.matrix().norm() > 1e-9)
            .collect()
    }

    /// Move from `rho` in both directions along a face direction until the
    /// state hits the boundary of the PSD cone. `None` means `rho` is extreme.
    fn split(&self, rho: &DensityMatrix) -> Option<(DensityMatrix, DensityMatrix)> {
        let e = herm_eig(rho.op());
        let r = e.values.iter().filter(|l| **l > SUPPORT_TOL).count();
        if r <= 1 {
            return None;
        }
        let u = e.vectors.columns(0, r).into_owned();
        let support = &u * u.adjoint();
        let dir = self.face_directions(&support).into_iter().next()?;
        let inv_sqrt =
            CMatrix::from_fn(r, r, |i, j| if i == j { c(1.0 / e.values[i].sqrt(), 0.0) } else { c(0.0, 0.0) });
        let k = &inv_sqrt * u.adjoint() * dir.matrix() * &u * &inv_sqrt;
        let mu = herm_eig(&Hermitian::hermitize(&k)).values;
        let (mu_max, mu_min) = (mu[0], mu[r - 1]);
        if mu_min >= -1e-12 || mu_max <= 1e-12 {
            return None;
        }
        let a = rho.matrix() + dir.matrix().scale(-1.0 / mu_min);
        let b = rho.matrix() - dir.matrix().scale(1.0 / mu_max);
        Some((DensityMatrix::from_approximate(&a).ok()?, DensityMatrix::from_approximate(&b).ok()?))
    }
}

fn normalize(h: &Hermitian) -> Option<DensityMatrix> {
    let tr = h.trace();
    (tr > 1e-9).then(|| DensityMatrix::new_unchecked(h.scale(1.0 / tr)))
}

fn contains(list: &[DensityMatrix], rho: &DensityMatrix) -> bool {
    list.iter().any(|s| half_trace_norm_diff(s.matrix(), rho.matrix()) < SAME_STATE_TOL)
}

/// Component of `h` orthogonal (Hilbert-Schmidt) to the span of `states`.
fn residual_outside_span(h: &Hermitian, states: &[DensityMatrix]) -> Hermitian {
    let mut ortho: Vec<CMatrix> = Vec::new();
    for s in states {
        let mut v = s.matrix().clone();
        for q in &ortho {
            let p = crate::linops::hs_inner_re(q, &v);
            v -= q.scale(p);
        }
        let n = v.norm();
        if n > 1e-9 {
            ortho.push(v.unscale(n));
        }
    }
    let mut r = h.matrix().clone();
    for q in &ortho {
        let p = crate::linops::hs_inner_re(q, &r);
        r -= q.scale(p);
    }
    Hermitian::hermitize(&r)
}

/// Order by diagonal (descending, lexicographic), then by off-diagonal entries.
fn state_order(a: &DensityMatrix, b: &DensityMatrix) -> std::cmp::Ordering {
    let key = |s: &DensityMatrix| -> Vec<f64> {
        let m = s.matrix();
        let d = m.nrows();
        let mut k: Vec<f64> = (0..d).map(|i| -round9(m[(i, i)].re)).collect();
        for i in 0..d {
            for j in (i + 1)..d {
                k.push(-round9(m[(i, j)].re));
                k.push(-round9(m[(i, j)].im));
            }
        }
        k
    };
    let (ka, kb) = (key(a), key(b));
    ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

#[derive(Serialize, Deserialize)]
struct ChoiJson {
    d_in: usize,
    d_out: usize,
    #[serde(flatten)]
    matrix: MatrixJson,
}

impl Serialize for ChoiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChoiJson { d_in: self.d_in, d_out: self.d_out, matrix: MatrixJson::from(self.matrix.matrix()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ChoiJson::deserialize(d)?;
        let m = CMatrix::try_from(&j.matrix).map_err(D::Error::custom)?;
        let h = Hermitian::new(m).map_err(D::Error::custom)?;
        ChoiMatrix::new(j.d_in, j.d_out, h).map_err(D::Error::custom)
    }
}
