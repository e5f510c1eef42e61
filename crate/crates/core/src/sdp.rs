//! Small dense semidefinite programs over Hermitian matrices.
//!
//! Problems have the form
//!
//! ```text
//!   minimize    tr[F X]
//!   subject to  tr[A_k X] = b_k,   k = 1..m
//!               X ⪰ 0
//! ```
//!
//! with `X` complex Hermitian. The solver works on the real symmetric
//! embedding `X ↦ [[Re X, −Im X], [Im X, Re X]]`, removes linearly dependent
//! constraints up front (reporting inconsistent ones with a certificate), and
//! runs an infeasible-start primal-dual path-following method with the HKM
//! direction and Mehrotra predictor-corrector steps.
//!
//! [`SdpSolution::objective_value`] is reported in maximization form,
//! `−tr[F X]`, so the fixed-point program with `F = I` reports `−tr X`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channel::hermitian_basis;
use crate::error::{Error, Result};
use crate::linops::{c, CMatrix, DensityMatrix, Hermitian};

pub const FEAS_TOL: f64 = 1e-7;
pub const MAX_ITER: usize = 200;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub a: Hermitian,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdpProblem {
    pub n: usize,
    /// Cost operator `F` in `minimize tr[F X]`.
    pub objective: Hermitian,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdpOptions {
    pub max_iter: usize,
    pub feas_tol: f64,
    pub psd_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { max_iter: MAX_ITER, feas_tol: FEAS_TOL, psd_tol: crate::linops::PSD_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Hermitian,
    /// `−tr[F X]`.
    pub objective_value: f64,
    /// Dual objective `bᵀy`, a lower bound on `tr[F X]`.
    pub dual_value: f64,
    /// `max_k |tr[A_k X] − b_k|`.
    pub primal_residual: f64,
    /// Max-norm of `F − Σ y_k A_k − Z` in the real embedding.
    pub dual_residual: f64,
    pub min_eig: f64,
    pub rank: usize,
    pub iterations: usize,
    /// Dual multipliers, one per input constraint.
    pub y: Vec<f64>,
    /// Farkas certificate when infeasible: `Σ y_k A_k ⪰ 0` with `bᵀy < 0`
    /// (or `Σ y_k A_k = 0` with `bᵀy ≠ 0` for inconsistent equalities).
    pub certificate: Option<Vec<f64>>,
    pub message: String,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn into_result(self) -> Result<SdpSolution> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            SdpStatus::Infeasible => Err(Error::Infeasible(self.message)),
            SdpStatus::NumericalLimit => Err(Error::NumericalLimit(self.message)),
        }
    }
}

impl SdpProblem {
    pub fn new(objective: Hermitian, constraints: Vec<Constraint>) -> Result<Self> {
        let n = objective.dim();
        if constraints.is_empty() {
            return Err(Error::InvalidInput("SDP needs at least one constraint".into()));
        }
        if let Some(bad) = constraints.iter().find(|k| k.a.dim() != n) {
            return Err(Error::DimensionMismatch(format!("constraint of dim {} in a problem of dim {n}", bad.a.dim())));
        }
        if constraints.iter().any(|k| !k.b.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SdpProblem { n, objective, constraints })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.objective.clone(), self.constraints.clone()).map(|_| ())
    }

    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpSolution> {
        solve(self, opts)
    }
}

/// Constraints `tr_in[X (I ⊗ σᵀ)] = σ` for every state, expanded over an
/// orthonormal Hermitian basis `E` of the output space:
/// `tr[(E ⊗ σᵀ) X] = tr[E σ]`. Objective is `F = I` (minimum trace).
///
/// Exactly repeated rows (e.g. from duplicated states) are dropped.
pub fn assemble_fixed_point_constraints(sigmas: &[DensityMatrix]) -> Result<SdpProblem> {
    let first = sigmas.first().ok_or_else(|| Error::InvalidInput("no states given".into()))?;
    let d = first.dim();
    if sigmas.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch("states differ in dimension".into()));
    }
    let basis = hermitian_basis(d);
    let mut constraints: Vec<Constraint> = Vec::with_capacity(sigmas.len() * d * d);
    for s in sigmas {
        let st = s.op().transpose();
        for e in &basis {
            let k = Constraint { a: e.kron(&st), b: e.inner(s.op()) };
            let duplicate = constraints.iter().any(|q| q.b == k.b && q.a.matrix() == k.a.matrix());
            if !duplicate {
                constraints.push(k);
            }
        }
    }
    SdpProblem::new(Hermitian::identity(d * d), constraints)
}

/// `[[Re H, −Im H], [Im H, Re H]]`.
fn embed(h: &Hermitian) -> DMatrix<f64> {
    let m = h.matrix();
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed`] after averaging over the embedding's symmetry.
fn extract(y: &DMatrix<f64>) -> Hermitian {
    let n = y.nrows() / 2;
    let m = CMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        c(re, im)
    });
    Hermitian::hermitize(&m)
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Constraint system after removing dependent rows: orthonormal `a`
/// (Frobenius), right-hand side `b`, and the map back to original duals.
struct Reduced {
    a: Vec<DMatrix<f64>>,
    b: DVector<f64>,
    /// `y_original = back · y_reduced`.
    back: DMatrix<f64>,
}

enum Preprocessed {
    Ok(Reduced),
    Inconsistent { certificate: Vec<f64>, residual: f64 },
}

fn preprocess(a: &[DMatrix<f64>], b: &DVector<f64>) -> Preprocessed {
    let m = a.len();
    let nn = a[0].len();
    let amat = DMatrix::from_fn(m, nn, |k, idx| a[k].as_slice()[idx]);
    let svd = amat.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 1e-10 * smax.max(1.0)).collect();

    let mut in_range = DVector::zeros(m);
    for &i in &keep {
        let col = u.column(i);
        in_range += col * col.dot(b);
    }
    let outside = b - &in_range;
    let residual = outside.norm();
    if residual > 1e-9 * (1.0 + b.norm()) {
        return Preprocessed::Inconsistent {
            certificate: outside.unscale(residual).iter().cloned().collect(),
            residual,
        };
    }
    let side = a[0].nrows();
    let a_red = keep
        .iter()
        .map(|&i| DMatrix::from_row_slice(side, side, v_t.row(i).transpose().as_slice()).transpose())
        .map(|m| sym(&m))
        .collect();
    let b_red = DVector::from_iterator(keep.len(), keep.iter().map(|&i| u.column(i).dot(b) / s[i]));
    let back = DMatrix::from_fn(m, keep.len(), |k, j| u[(k, keep[j])] / s[keep[j]]);
    Preprocessed::Ok(Reduced { a: a_red, b: b_red, back })
}

/// Largest `α` with `x + α·dx ⪰ 0`, or `∞`.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(ch) = Cholesky::new(x.clone()) else { return 0.0 };
    let l = ch.l();
    let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(l.nrows(), l.ncols()));
    let w = sym(&(&linv * dx * linv.transpose()));
    let lmin = SymmetricEigen::new(w).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn spd_inverse(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(s.clone()).map(|ch| ch.inverse())
}

struct Iterate {
    x: DMatrix<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
}

struct Metrics {
    relp: f64,
    reld: f64,
    gap: f64,
    dobj: f64,
}

fn metrics(it: &Iterate, cost: &DMatrix<f64>, red: &Reduced) -> Metrics {
    let ax = DVector::from_iterator(red.a.len(), red.a.iter().map(|a| dot(a, &it.x)));
    let rp = &red.b - ax;
    let mut rd = cost - &it.z;
    for (k, a) in red.a.iter().enumerate() {
        rd -= a * it.y[k];
    }
    let pobj = dot(cost, &it.x);
    let dobj = red.b.dot(&it.y);
    Metrics {
        relp: rp.norm() / (1.0 + red.b.norm()),
        reld: rd.norm() / (1.0 + cost.norm()),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        dobj,
    }
}

/// Score with the `(x, y, z)` iterate that produced it.
type Snapshot = (f64, DMatrix<f64>, DVector<f64>, DMatrix<f64>);

pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let a_emb: Vec<DMatrix<f64>> = p.constraints.iter().map(|k| embed(&k.a)).collect();
    let b_emb = DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|k| 2.0 * k.b));
    let cost = embed(&p.objective);
    let nn = 2 * p.n;

    let red = match preprocess(&a_emb, &b_emb) {
        Preprocessed::Ok(r) => r,
        Preprocessed::Inconsistent { certificate, residual } => {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                x: Hermitian::zeros(p.n),
                objective_value: f64::NAN,
                dual_value: f64::NAN,
                primal_residual: residual,
                dual_residual: f64::NAN,
                min_eig: f64::NAN,
                rank: 0,
                iterations: 0,
                y: vec![0.0; p.constraints.len()],
                certificate: Some(certificate),
                message: format!("equality constraints are inconsistent (residual {residual:.3e} outside their range)"),
            });
        }
    };
    let m = red.a.len();

    let bnorm_max = red.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let xi = 10f64.max((nn as f64).sqrt()).max(nn as f64 * (1.0 + bnorm_max));
    let eta = 10f64.max((nn as f64).sqrt()).max(cost.norm()).max(1.0);
    let mut it =
        Iterate { x: DMatrix::identity(nn, nn) * xi, y: DVector::zeros(m), z: DMatrix::identity(nn, nn) * eta };

    const TARGET: f64 = 1e-12;
    let mut status = SdpStatus::NumericalLimit;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;
    let mut best: Option<Snapshot> = None;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let mt = metrics(&it, &cost, &red);
        let score = mt.relp.max(mt.reld).max(mt.gap);
        if best.as_ref().is_none_or(|(s, ..)| score < *s) {
            best = Some((score, it.x.clone(), it.y.clone(), it.z.clone()));
        }
        if mt.relp <= TARGET && mt.reld <= TARGET && mt.gap <= TARGET {
            break;
        }

        // Primal infeasibility: dual ray with bᵀy → ∞ while Σ y A ⪯ F.
        let ynorm = it.y.norm();
        if ynorm > 1e10 * (1.0 + cost.norm()) && mt.dobj > 1e8 {
            let ray = &red.back * &it.y / ynorm;
            status = SdpStatus::Infeasible;
            message = "dual objective unbounded: no PSD matrix satisfies the constraints".into();
            return Ok(finish(p, &red, &it, status, message, iterations, Some(ray.iter().cloned().collect())));
        }

        let mu = dot(&it.x, &it.z) / nn as f64;
        let Some(zinv) = spd_inverse(&it.z) else {
            message = "dual slack lost definiteness".into();
            break;
        };
        let ax: Vec<f64> = red.a.iter().map(|a| dot(a, &it.x)).collect();
        let rp = DVector::from_iterator(m, ax.iter().enumerate().map(|(k, v)| red.b[k] - v));
        let mut rd = &cost - &it.z;
        for (k, a) in red.a.iter().enumerate() {
            rd -= a * it.y[k];
        }

        // Schur complement M_ij = tr[A_i X A_j Z⁻¹].
        let g: Vec<DMatrix<f64>> = red.a.iter().map(|a| &it.x * a * &zinv).collect();
        let mut schur = DMatrix::from_fn(m, m, |i, j| dot(&red.a[i], &g[j]));
        schur = (&schur + schur.transpose()) * 0.5;
        let chol = match Cholesky::new(schur.clone()) {
            Some(ch) => ch,
            None => {
                let reg = 1e-14 * schur.trace().abs().max(1.0);
                match Cholesky::new(schur + DMatrix::identity(m, m) * reg) {
                    Some(ch) => ch,
                    None => {
                        message = "Schur complement is singular".into();
                        break;
                    }
                }
            }
        };

        let direction = |sigma_mu: f64, corr: Option<&DMatrix<f64>>| {
            // ΔX̂ = −X + σμ Z⁻¹ − X ΔZ Z⁻¹ − corr·Z⁻¹, ΔZ = R_d − Aᵀ Δy.
            let mut base = -&it.x + &zinv * sigma_mu - &it.x * &rd * &zinv;
            if let Some(cm) = corr {
                base -= cm * &zinv;
            }
            let rhs = DVector::from_iterator(m, (0..m).map(|k| rp[k] - dot(&red.a[k], &base)));
            let dy = chol.solve(&rhs);
            let mut dz = rd.clone();
            for (k, a) in red.a.iter().enumerate() {
                dz -= a * dy[k];
            }
            let mut dx = -&it.x + &zinv * sigma_mu - &it.x * &dz * &zinv;
            if let Some(cm) = corr {
                dx -= cm * &zinv;
            }
            (sym(&dx), dy, sym(&dz))
        };

        let (dxa, _dya, dza) = direction(0.0, None);
        let ap = max_step(&it.x, &dxa).min(1.0);
        let ad = max_step(&it.z, &dza).min(1.0);
        let mu_aff = dot(&(&it.x + &dxa * ap), &(&it.z + &dza * ad)) / nn as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr = &dxa * &dza;
        let (dx, dy, dz) = direction(sigma * mu, Some(&corr));

        let tau = 0.98;
        let ap = (tau * max_step(&it.x, &dx)).min(1.0);
        let ad = (tau * max_step(&it.z, &dz)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            message = "step length collapsed".into();
            break;
        }
        it.x = sym(&(&it.x + dx * ap));
        it.y += dy * ad;
        it.z = sym(&(&it.z + dz * ad));
    }

    let final_metrics = metrics(&it, &cost, &red);
    let final_score = final_metrics.relp.max(final_metrics.reld).max(final_metrics.gap);
    if let Some((score, x, y, z)) = best {
        if score < final_score {
            it = Iterate { x, y, z };
        }
    }

    let mut sol = finish(p, &red, &it, status, message, iterations, None);
    let gap_ok = {
        let mt = metrics(&it, &cost, &red);
        mt.gap <= opts.feas_tol && mt.reld <= opts.feas_tol
    };
    if sol.primal_residual <= opts.feas_tol && gap_ok && sol.min_eig >= -opts.psd_tol {
        sol.status = SdpStatus::Optimal;
        sol.message = "optimal".into();
    }
    Ok(sol)
}

/// Polish, extract the complex solution, and fill in diagnostics.
fn finish(
    p: &SdpProblem,
    red: &Reduced,
    it: &Iterate,
    status: SdpStatus,
    message: String,
    iterations: usize,
    certificate: Option<Vec<f64>>,
) -> SdpSolution {
    // Minimal-norm correction onto the affine constraint set (rows are orthonormal).
    let mut y_mat = it.x.clone();
    if status != SdpStatus::Infeasible {
        for (k, a) in red.a.iter().enumerate() {
            let r = red.b[k] - dot(a, &y_mat);
            y_mat += a * r;
        }
    }
    let mut x = extract(&y_mat);
    let mut min_eig = x.min_eigenvalue();
    if min_eig < 0.0 && min_eig > -1e-7 {
        // The correction can push a boundary eigenvalue slightly negative;
        // fall back to the uncorrected iterate when that is the better point.
        let raw = extract(&it.x);
        let raw_min = raw.min_eigenvalue();
        if raw_min > min_eig && primal_residual(p, &raw) <= FEAS_TOL * 1e-2 {
            x = raw;
            min_eig = raw_min;
        }
    }
    let cost = embed(&p.objective);
    let mut rd = &cost - &it.z;
    for (k, a) in red.a.iter().enumerate() {
        rd -= a * it.y[k];
    }
    let y_orig = &red.back * &it.y;
    let eig = x.eig();
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = eig.values.iter().filter(|l| **l > 1e-6 * top.max(1e-12)).count();
    SdpSolution {
        status,
        objective_value: -p.objective.inner(&x),
        dual_value: red.b.dot(&it.y) / 2.0,
        primal_residual: primal_residual(p, &x),
        dual_residual: rd.iter().fold(0.0, |acc, v| acc.max(v.abs())),
        min_eig,
        rank,
        iterations,
        y: y_orig.iter().cloned().collect(),
        certificate,
        message,
        x,
    }
}

fn primal_residual(p: &SdpProblem, x: &Hermitian) -> f64 {
    p.constraints.iter().map(|k| (k.a.inner(x) - k.b).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{max_abs, CVector};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opts() -> SdpOptions {
        SdpOptions::default()
    }

    #[test]
    fn unit_trace_has_analytic_center_optimum() {
        let p =
            SdpProblem::new(Hermitian::identity(2), vec![Constraint { a: Hermitian::identity(2), b: 1.0 }]).unwrap();
        let s = p.solve(&opts()).unwrap();
        assert!(s.is_optimal(), "{}", s.message);
        assert!((s.objective_value + 1.0).abs() < 1e-8);
        // Every unit-trace PSD matrix is optimal; the path ends near the center.
        assert!(max_abs(&(s.x.matrix() - Hermitian::identity(2).scale(0.5).matrix())) < 1e-4);
    }

    #[test]
    fn inconsistent_equalities_are_infeasible() {
        let p = SdpProblem::new(
            Hermitian::identity(2),
            vec![Constraint { a: Hermitian::identity(2), b: 1.0 }, Constraint { a: Hermitian::identity(2), b: 2.0 }],
        )
        .unwrap();
        let s = p.solve(&opts()).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
        let cert = s.certificate.unwrap();
        // Σ y_k A_k = 0 while bᵀy ≠ 0.
        assert!((cert[0] + cert[1]).abs() < 1e-12);
        assert!((cert[0] + 2.0 * cert[1]).abs() > 0.1);
    }

    #[test]
    fn negative_trace_is_infeasible() {
        let p =
            SdpProblem::new(Hermitian::identity(2), vec![Constraint { a: Hermitian::identity(2), b: -1.0 }]).unwrap();
        let s = p.solve(&opts()).unwrap();
        assert_ne!(s.status, SdpStatus::Optimal);
    }

    #[test]
    fn empty_constraint_list_rejected() {
        assert!(SdpProblem::new(Hermitian::identity(2), vec![]).is_err());
    }

    #[test]
    fn assembler_counts_and_deduplicates() {
        let s0 = DensityMatrix::basis(2, 0);
        let s1 = DensityMatrix::basis(2, 1);
        assert_eq!(assemble_fixed_point_constraints(std::slice::from_ref(&s0)).unwrap().constraints.len(), 4);
        assert_eq!(assemble_fixed_point_constraints(&[s0.clone(), s1]).unwrap().constraints.len(), 8);
        assert_eq!(assemble_fixed_point_constraints(&[s0.clone(), s0]).unwrap().constraints.len(), 4);
    }

    #[test]
    fn assembler_accepts_known_feasible_points() {
        let s0 = DensityMatrix::basis(2, 0);
        let s1 = DensityMatrix::basis(2, 1);
        let x1 = s0.op().kron(s0.op());
        let p = assemble_fixed_point_constraints(std::slice::from_ref(&s0)).unwrap();
        assert!(primal_residual(&p, &x1) < 1e-15);
        let x2 = x1.add(&s1.op().kron(s1.op()));
        let p = assemble_fixed_point_constraints(&[s0, s1]).unwrap();
        assert!(primal_residual(&p, &x2) < 1e-15);
    }

    // Complex data with known optimum: the real embedding must reproduce it.
    #[test]
    fn complex_rank_one_constraint() {
        let psi = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let p = SdpProblem::new(Hermitian::identity(2), vec![Constraint { a: Hermitian::projector(&psi), b: 1.0 }])
            .unwrap();
        let s = p.solve(&opts()).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective_value + 1.0).abs() < 1e-7);
        assert!(max_abs(&(s.x.matrix() - Hermitian::projector(&psi).matrix())) < 1e-5);
    }

    #[test]
    fn complex_cost_minimum_eigenvalue() {
        // min tr[F X] with tr X = 1 is λ_min(F).
        let f = Hermitian::new(CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]))
            .unwrap();
        let lmin = f.min_eigenvalue();
        let p = SdpProblem::new(f, vec![Constraint { a: Hermitian::identity(2), b: 1.0 }]).unwrap();
        let s = p.solve(&opts()).unwrap();
        assert!(s.is_optimal());
        assert!((-s.objective_value - lmin).abs() < 1e-7);
    }

    #[test]
    fn complex_off_diagonal_pin() {
        // X₀₁ = 0.3 + 0.4i forces tr X ≥ 2|X₀₁| = 1.
        let re = Hermitian::new(CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]))
            .unwrap();
        let im = Hermitian::new(CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.0, 0.0)]))
            .unwrap();
        // tr[re X] = Re X₀₁, tr[im X] = Im X₀₁.
        let p =
            SdpProblem::new(Hermitian::identity(2), vec![Constraint { a: re, b: 0.3 }, Constraint { a: im, b: 0.4 }])
                .unwrap();
        let s = p.solve(&opts()).unwrap();
        assert!(s.is_optimal(), "{}", s.message);
        assert!((s.objective_value + 1.0).abs() < 1e-7);
        assert!((s.x.matrix()[(0, 1)] - c(0.3, 0.4)).norm() < 1e-7);
    }

    #[test]
    fn random_feasible_problems_are_solved() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..5 {
            let n = 2 + trial % 3;
            let x0 = random::density(n, n, &mut rng).into_op().scale(2.0);
            let constraints: Vec<Constraint> = (0..n + 1)
                .map(|_| {
                    let a = random::hermitian(n, &mut rng);
                    let b = a.inner(&x0);
                    Constraint { a, b }
                })
                .collect();
            let p = SdpProblem::new(Hermitian::identity(n), constraints).unwrap();
            let s = p.solve(&opts()).unwrap();
            assert!(s.is_optimal(), "trial {trial}: {}", s.message);
            assert!(-s.objective_value <= x0.trace() + 1e-6);
            assert!(s.primal_residual <= 1e-7);
        }
    }

    #[test]
    fn adding_constraints_never_lowers_min_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 3;
        let x0 = random::density(n, n, &mut rng).into_op();
        let all: Vec<Constraint> = (0..4)
            .map(|_| {
                let a = random::hermitian(n, &mut rng);
                let b = a.inner(&x0);
                Constraint { a, b }
            })
            .collect();
        let mut previous = f64::NEG_INFINITY;
        for k in 1..=all.len() {
            let p = SdpProblem::new(Hermitian::identity(n), all[..k].to_vec()).unwrap();
            let s = p.solve(&opts()).unwrap();
            assert!(s.is_optimal());
            let min_trace = -s.objective_value;
            assert!(min_trace >= previous - 1e-7, "{min_trace} < {previous}");
            previous = min_trace;
        }
    }
}
