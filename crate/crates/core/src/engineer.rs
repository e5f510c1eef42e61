//! Channels with prescribed fixed points.
//!
//! Three constructions, all producing a Choi matrix on `H_out ⊗ H_in`:
//!
//! * one state `σ`, with `P = |v⟩⟨v|` for the top eigenvector of `σ`:
//!   `C = σ ⊗ Pᵀ/λ + B ⊗ (I − Pᵀ/λ)`;
//! * several unambiguously distinguishable states with projectors `Π_i`:
//!   `C = Σ_i σ_i ⊗ Π_iᵀ/t_i + B ⊗ (I − Σ_i Π_iᵀ/t_i)`, `t_i = tr[Π_i σ_i]`;
//! * the minimum-trace PSD `X` with `tr_in[X (I ⊗ σ_iᵀ)] = σ_i`, completed to
//!   `C = X + B ⊗ (I − tr_out[X])`.
//!
//! Each builder returns a ledger of the numeric conditions it checked so
//! callers can report them.

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiMatrix, CptpReport};
use crate::error::{Error, Result};
use crate::linops::{
    herm_eig, kernel_projector, partial_trace, CVector, DensityMatrix, Hermitian, Subsystem, PSD_TOL, RANK_TOL,
};
use crate::sdp::{assemble_fixed_point_constraints, SdpOptions, SdpSolution, SdpStatus};

/// One numeric check with the value it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

impl ConditionCheck {
    fn new(name: impl Into<String>, value: f64, holds: bool) -> Self {
        ConditionCheck { name: name.into(), value, holds }
    }

    fn into_error(self) -> Error {
        Error::ConditionViolated { condition: self.name, value: self.value }
    }
}

pub const SINGLE_VALIDITY: &str = "<V_max|B|V_max> <= lambda_max";
pub const SINGLE_POSITIVITY: &str = "sigma - (1 - lambda_max) B >= 0";

#[derive(Clone, Debug)]
pub struct SingleFixedPointSpec {
    pub sigma: DensityMatrix,
    pub b: DensityMatrix,
    pub lambda_max: f64,
    pub v_max: CVector,
}

impl SingleFixedPointSpec {
    /// Takes `λ_max` and `V_max` from [`herm_eig`], so degenerate top
    /// eigenvalues resolve to the canonical first vector.
    pub fn new(sigma: DensityMatrix, b: DensityMatrix) -> Result<Self> {
        if sigma.dim() != b.dim() {
            return Err(Error::DimensionMismatch(format!("sigma has dim {}, B has dim {}", sigma.dim(), b.dim())));
        }
        let e = herm_eig(sigma.op());
        Ok(SingleFixedPointSpec { lambda_max: e.values[0], v_max: e.vector(0), sigma, b })
    }

    fn top_projector(&self) -> Hermitian {
        Hermitian::projector(&self.v_max)
    }

    /// `⟨V_max|B|V_max⟩`.
    pub fn b_overlap(&self) -> f64 {
        self.top_projector().inner(self.b.op())
    }

    /// The stated validity inequality and the positivity of the Choi
    /// matrix, which reduces to `σ ⪰ (1 − λ_max) B`.
    pub fn checks(&self) -> Vec<ConditionCheck> {
        let overlap = self.b_overlap();
        let slack = self.sigma.op().sub(&self.b.op().scale(1.0 - self.lambda_max));
        let min_eig = slack.min_eigenvalue();
        vec![
            ConditionCheck::new(SINGLE_VALIDITY, overlap - self.lambda_max, overlap <= self.lambda_max + PSD_TOL),
            ConditionCheck::new(SINGLE_POSITIVITY, min_eig, min_eig >= -PSD_TOL),
        ]
    }
}

/// `σ ⊗ Pᵀ/λ + B ⊗ (I − Pᵀ/λ)` with no validity checks.
pub fn single_fixed_point_choi(spec: &SingleFixedPointSpec) -> ChoiMatrix {
    let d = spec.sigma.dim();
    let pt = spec.top_projector().transpose().scale(1.0 / spec.lambda_max);
    let m = spec.sigma.op().kron(&pt).add(&spec.b.op().kron(&Hermitian::identity(d).sub(&pt)));
    ChoiMatrix::new(d, d, m).expect("square by construction")
}

/// Closed-form channel with fixed point `σ`.
///
/// Rejects the input when `⟨V_max|B|V_max⟩ > λ_max`, and also when the
/// resulting Choi matrix would not be positive (`σ ⋡ (1 − λ_max) B`), which
/// the first inequality alone does not exclude for `d ≥ 3`.
pub fn build_single_fixed_point(spec: &SingleFixedPointSpec) -> Result<ChoiMatrix> {
    if let Some(failed) = spec.checks().into_iter().find(|c| !c.holds) {
        return Err(failed.into_error());
    }
    Ok(single_fixed_point_choi(spec))
}

/// Outcome of the projector search.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Discrimination {
    Feasible {
        projectors: Vec<Hermitian>,
        /// `tr[Π_i σ_i]`.
        success: Vec<f64>,
    },
    Infeasible {
        /// First state whose projector misses it.
        index: usize,
        /// Projector onto the common kernel of the other states.
        kernel: Hermitian,
        /// `tr[Π_i σ_i]` for every state.
        success: Vec<f64>,
        /// Rank of each kernel projector.
        kernel_ranks: Vec<usize>,
    },
}

/// `Π_i` = projector onto `∩_{j≠i} ker σ_j`; feasible when every
/// `tr[Π_i σ_i] > rank_tol`.
pub fn find_discrimination_projectors(sigmas: &[DensityMatrix], rank_tol: f64) -> Result<Discrimination> {
    if sigmas.len() < 2 {
        return Err(Error::InvalidInput("need at least two states".into()));
    }
    let d = sigmas[0].dim();
    if sigmas.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch("states differ in dimension".into()));
    }
    let mut projectors = Vec::with_capacity(sigmas.len());
    let mut success = Vec::with_capacity(sigmas.len());
    for i in 0..sigmas.len() {
        let others =
            sigmas.iter().enumerate().filter(|(j, _)| *j != i).fold(Hermitian::zeros(d), |acc, (_, s)| acc.add(s.op()));
        let p = kernel_projector(&others, rank_tol)?;
        success.push(p.inner(sigmas[i].op()));
        projectors.push(p);
    }
    match success.iter().position(|t| *t <= rank_tol) {
        None => Ok(Discrimination::Feasible { projectors, success }),
        Some(index) => Ok(Discrimination::Infeasible {
            index,
            kernel: projectors[index].clone(),
            kernel_ranks: projectors.iter().map(|p| p.trace().round() as usize).collect(),
            success,
        }),
    }
}

/// Projector onto the support of `K σ K`: the part of the kernel projector
/// `K` that `σ` actually reaches. Orthogonality to the other states is
/// inherited from `K`, and directions outside every support are left to `B`.
pub fn compress_projector(kernel: &Hermitian, sigma: &DensityMatrix) -> Result<Hermitian> {
    let k = kernel.matrix();
    let compressed = Hermitian::hermitize(&(k * sigma.matrix() * k));
    crate::linops::support_projector(&compressed, RANK_TOL)
}

pub const SEP_ORTHOGONALITY: &str = "tr[sigma_i Pi_j] = 0 for i != j";
pub const SEP_SUCCESS: &str = "tr[Pi_i sigma_i] > 0";
pub const SEP_CONVERGENCE: &str = "sum_i tr[B Pi_i]/tr[Pi_i sigma_i] < 1 (or residual operator = 0)";

#[derive(Clone, Debug)]
pub struct SeparableMultiSpec {
    pub sigmas: Vec<DensityMatrix>,
    pub projectors: Vec<Hermitian>,
    pub b: DensityMatrix,
}

impl SeparableMultiSpec {
    pub fn new(sigmas: Vec<DensityMatrix>, projectors: Vec<Hermitian>, b: DensityMatrix) -> Result<Self> {
        if sigmas.is_empty() || sigmas.len() != projectors.len() {
            return Err(Error::InvalidInput(format!("{} states but {} projectors", sigmas.len(), projectors.len())));
        }
        let d = b.dim();
        if sigmas.iter().any(|s| s.dim() != d) || projectors.iter().any(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch("states, projectors, and B differ in dimension".into()));
        }
        Ok(SeparableMultiSpec { sigmas, projectors, b })
    }

    /// Uses the projectors from [`find_discrimination_projectors`], each
    /// compressed by [`compress_projector`].
    pub fn from_states(sigmas: Vec<DensityMatrix>, b: DensityMatrix) -> Result<Self> {
        let projectors = if sigmas.len() == 1 {
            vec![crate::linops::support_projector(sigmas[0].op(), RANK_TOL)?]
        } else {
            match find_discrimination_projectors(&sigmas, RANK_TOL)? {
                Discrimination::Feasible { projectors, .. } => {
                    projectors.iter().zip(&sigmas).map(|(k, s)| compress_projector(k, s)).collect::<Result<_>>()?
                }
                Discrimination::Infeasible { index, success, .. } => {
                    return Err(Error::ConditionViolated {
                        condition: format!("{SEP_SUCCESS} (state {index})"),
                        value: success[index],
                    })
                }
            }
        };
        Self::new(sigmas, projectors, b)
    }

    /// `t_i = tr[Π_i σ_i]`.
    pub fn success(&self) -> Vec<f64> {
        self.projectors.iter().zip(&self.sigmas).map(|(p, s)| p.inner(s.op())).collect()
    }

    /// `I − Σ_i Π_iᵀ / t_i`.
    pub fn residual_operator(&self) -> Hermitian {
        let d = self.b.dim();
        self.projectors
            .iter()
            .zip(self.success())
            .fold(Hermitian::identity(d), |acc, (p, t)| acc.sub(&p.transpose().scale(1.0 / t)))
    }

    /// `1 − Σ_i tr[B Π_i]/t_i`; positive means iterations contract.
    pub fn convergence_margin(&self) -> f64 {
        1.0 - self.projectors.iter().zip(self.success()).map(|(p, t)| p.inner(self.b.op()) / t).sum::<f64>()
    }

    pub fn checks(&self) -> Vec<ConditionCheck> {
        let mut cross = 0.0f64;
        for (i, s) in self.sigmas.iter().enumerate() {
            for (j, p) in self.projectors.iter().enumerate() {
                if i != j {
                    cross = cross.max(p.inner(s.op()).abs());
                }
            }
        }
        let min_success = self.success().into_iter().fold(f64::INFINITY, f64::min);
        let margin = self.convergence_margin();
        let residual_zero = self.residual_operator().matrix().norm() <= 1e-9;
        vec![
            ConditionCheck::new(SEP_ORTHOGONALITY, cross, cross <= RANK_TOL),
            ConditionCheck::new(SEP_SUCCESS, min_success, min_success > RANK_TOL),
            ConditionCheck::new(SEP_CONVERGENCE, 1.0 - margin, margin > 0.0 || residual_zero),
        ]
    }
}

/// `Σ_i σ_i ⊗ Π_iᵀ/t_i + B ⊗ (I − Σ_i Π_iᵀ/t_i)` with no validity checks.
pub fn separable_multi_choi(spec: &SeparableMultiSpec) -> ChoiMatrix {
    let d = spec.b.dim();
    let mut m = spec.b.op().kron(&spec.residual_operator());
    for ((s, p), t) in spec.sigmas.iter().zip(&spec.projectors).zip(spec.success()) {
        m = m.add(&s.op().kron(&p.transpose().scale(1.0 / t)));
    }
    ChoiMatrix::new(d, d, m).expect("square by construction")
}

/// Separable channel fixing every `σ_i`.
///
/// Fails naming the first violated condition. Positivity of the Choi matrix
/// is not required here: when `I − Σ Π_iᵀ/t_i` has negative eigenvalues the
/// channel may fail to be CP, which [`ChoiMatrix::is_cptp`] reports.
pub fn build_separable_multi(spec: &SeparableMultiSpec) -> Result<ChoiMatrix> {
    if let Some(failed) = spec.checks().into_iter().find(|c| !c.holds) {
        return Err(failed.into_error());
    }
    Ok(separable_multi_choi(spec))
}

/// Result of the SDP-backed construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpChannel {
    /// Minimum-trace solution `X`.
    pub x: ChoiMatrix,
    /// Trace-preserving completion `X + B ⊗ (I − tr_out[X])`.
    pub c: ChoiMatrix,
    /// `tr[X (I ⊗ Bᵀ)]`; iterations contract when this is below 1.
    pub contraction: f64,
    pub converges: bool,
    pub cptp: CptpReport,
    /// `½‖Φ(σ_i) − σ_i‖₁` per state.
    pub fixed_point_residuals: Vec<f64>,
    pub solution: SdpSolution,
}

/// Minimum-trace channel fixing every state, completed with `b`
/// (default: maximally mixed).
pub fn build_via_sdp(sigmas: &[DensityMatrix], b: Option<&DensityMatrix>, opts: &SdpOptions) -> Result<SdpChannel> {
    let problem = assemble_fixed_point_constraints(sigmas)?;
    let d = sigmas[0].dim();
    let b = match b {
        Some(b) if b.dim() != d => {
            return Err(Error::DimensionMismatch(format!("B has dim {}, states have dim {d}", b.dim())))
        }
        Some(b) => b.clone(),
        None => DensityMatrix::maximally_mixed(d),
    };
    let solution = problem.solve(opts)?;
    match solution.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => {
            return Err(Error::Infeasible(format!("{} (certificate {:?})", solution.message, solution.certificate)))
        }
        SdpStatus::NumericalLimit => {
            return Err(Error::NumericalLimit(format!(
                "{} (primal residual {:.3e}, min eig {:.3e})",
                solution.message, solution.primal_residual, solution.min_eig
            )))
        }
    }
    let x = ChoiMatrix::new(d, d, solution.x.clone())?;
    let c = complete_channel(&x, &b)?;
    let contraction = x.matrix().inner(&Hermitian::identity(d).kron(&b.op().transpose()));
    let fixed_point_residuals = sigmas
        .iter()
        .map(|s| c.apply_operator(s.matrix()).map(|out| crate::linops::half_trace_norm_diff(&out, s.matrix())))
        .collect::<Result<_>>()?;
    Ok(SdpChannel {
        cptp: c.is_cptp(),
        converges: contraction < 1.0,
        contraction,
        fixed_point_residuals,
        x,
        c,
        solution,
    })
}

/// `X + B ⊗ (I − tr_out[X])`, trace preserving by construction.
pub fn complete_channel(x: &ChoiMatrix, b: &DensityMatrix) -> Result<ChoiMatrix> {
    let d = x.d_in();
    let reduced = partial_trace(x.matrix().matrix(), (x.d_out(), d), Subsystem::First)?;
    let rest = Hermitian::hermitize(&(crate::linops::identity(d) - reduced));
    ChoiMatrix::new(d, x.d_out(), x.matrix().add(&b.op().kron(&rest)))
}
