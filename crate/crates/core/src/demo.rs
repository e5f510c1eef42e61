//! Two-qubit Bell-basis example.
//!
//! With Bell vectors `V₀ = (|00⟩+|11⟩)/√2`, `V₁ = (|00⟩−|11⟩)/√2`,
//! `V₂ = (|01⟩+|10⟩)/√2`, `V₃ = (|01⟩−|10⟩)/√2`, build
//!
//! ```text
//! V¹ⁱ = αᵢ V₁ + βᵢ V₂      V²ⁱ = δᵢ V₁ + εᵢ V₂
//! σ₀ = s₀ |V₀⟩⟨V₀| + s₁ |V¹⁰⟩⟨V¹⁰| + s₂ |V²⁰⟩⟨V²⁰|
//! σ₁ = r₀ |V₁⟩⟨V₁| + r₁ |V¹¹⟩⟨V¹¹| + r₂ |V²¹⟩⟨V²¹|
//! ```
//!
//! then try the separable two-state construction and fall back to the SDP
//! when the states cannot be discriminated unambiguously.

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiMatrix, CptpReport};
use crate::engineer::{
    build_separable_multi, build_via_sdp, find_discrimination_projectors, ConditionCheck, Discrimination,
    SeparableMultiSpec,
};
use crate::error::{Error, Result};
use crate::linops::{c, half_trace_norm_diff, CVector, DensityMatrix, RANK_TOL};
use crate::sdp::SdpOptions;

/// Coefficients `(α, β, δ, ε)` of the two superpositions in one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Superpositions {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for Superpositions {
    fn default() -> Self {
        Superpositions { alpha: 1.0, beta: 0.0, delta: 0.0, epsilon: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDemoParams {
    pub coeffs: [Superpositions; 2],
    pub s: [f64; 3],
    pub r: [f64; 3],
}

impl Default for BellDemoParams {
    fn default() -> Self {
        let third = 1.0 / 3.0;
        BellDemoParams { coeffs: [Superpositions::default(); 2], s: [third; 3], r: [third; 3] }
    }
}

impl BellDemoParams {
    /// Order `α₀, β₀, δ₀, ε₀, α₁, β₁, δ₁, ε₁`.
    pub fn with_coeffs(mut self, c: [f64; 8]) -> Self {
        for (i, chunk) in c.chunks(4).enumerate() {
            self.coeffs[i] = Superpositions { alpha: chunk[0], beta: chunk[1], delta: chunk[2], epsilon: chunk[3] };
        }
        self
    }
}

/// Bell vector `V_i` in the computational basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell_vector(i: usize) -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = match i {
        0 => [h, 0.0, 0.0, h],
        1 => [h, 0.0, 0.0, -h],
        2 => [0.0, h, h, 0.0],
        3 => [0.0, h, -h, 0.0],
        _ => panic!("Bell index {i} out of range"),
    };
    CVector::from_iterator(4, v.iter().map(|x| c(*x, 0.0)))
}

fn superposition(a: f64, b: f64, label: &str) -> Result<CVector> {
    let v = bell_vector(1) * c(a, 0.0) + bell_vector(2) * c(b, 0.0);
    let n = v.norm();
    if n < RANK_TOL {
        return Err(Error::InvalidInput(format!("superposition {label} is zero")));
    }
    Ok(v.unscale(n))
}

fn check_weights(w: &[f64; 3], name: &str) -> Result<()> {
    let sum: f64 = w.iter().sum();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("{name} = {w:?} is not a probability vector")));
    }
    Ok(())
}

/// `σ₀, σ₁` for the given parameters.
pub fn bell_states(p: &BellDemoParams) -> Result<[DensityMatrix; 2]> {
    check_weights(&p.s, "s")?;
    check_weights(&p.r, "r")?;
    let anchors = [bell_vector(0), bell_vector(1)];
    let mut out = Vec::with_capacity(2);
    for (i, (w, co)) in [p.s, p.r].iter().zip(&p.coeffs).enumerate() {
        let comps = [
            anchors[i].clone(),
            superposition(co.alpha, co.beta, &format!("V1^{i}"))?,
            superposition(co.delta, co.epsilon, &format!("V2^{i}"))?,
        ];
        let states: Vec<DensityMatrix> = comps.iter().map(DensityMatrix::pure).collect();
        out.push(DensityMatrix::mixture(w, &states)?);
    }
    Ok([out[0].clone(), out[1].clone()])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoPath {
    Separable,
    Sdp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSummary {
    pub trace_x: f64,
    pub rank: usize,
    pub contraction: f64,
    pub converges: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BellDemoReport {
    pub params: BellDemoParams,
    pub sigma0: DensityMatrix,
    pub sigma1: DensityMatrix,
    /// `tr[σ₀Π₁]`, `tr[σ₁Π₀]`, `tr[Π₀σ₀]`, `tr[Π₁σ₁]` for the kernel projectors.
    pub discriminability: Vec<ConditionCheck>,
    pub discrimination: Discrimination,
    /// Conditions of the separable construction, when it was attempted.
    pub separable_checks: Option<Vec<ConditionCheck>>,
    pub path: DemoPath,
    /// Why the separable construction was not used.
    pub fallback_reason: Option<String>,
    pub sdp: Option<SdpSummary>,
    pub channel: ChoiMatrix,
    pub cptp: CptpReport,
    /// `½‖Φ(σᵢ) − σᵢ‖₁`.
    pub fixed_point_residuals: [f64; 2],
}

pub fn run_bell_demo(params: &BellDemoParams, opts: &SdpOptions) -> Result<BellDemoReport> {
    let [sigma0, sigma1] = bell_states(params)?;
    let sigmas = vec![sigma0.clone(), sigma1.clone()];
    let discrimination = find_discrimination_projectors(&sigmas, RANK_TOL)?;
    let projectors = match &discrimination {
        Discrimination::Feasible { projectors, .. } => projectors.clone(),
        Discrimination::Infeasible { .. } => {
            let others = [&sigma1, &sigma0];
            others.iter().map(|o| crate::linops::kernel_projector(o.op(), RANK_TOL)).collect::<Result<_>>()?
        }
    };
    let tr = |p: usize, s: &DensityMatrix| projectors[p].inner(s.op());
    let discriminability = vec![
        cross_check("tr[sigma0 Pi1]", tr(1, &sigma0)),
        cross_check("tr[sigma1 Pi0]", tr(0, &sigma1)),
        success_check("tr[Pi0 sigma0]", tr(0, &sigma0)),
        success_check("tr[Pi1 sigma1]", tr(1, &sigma1)),
    ];

    let b = DensityMatrix::maximally_mixed(4);
    let mut separable_checks = None;
    let mut fallback_reason = None;
    let mut separable = None;
    match &discrimination {
        Discrimination::Feasible { .. } => {
            let spec = SeparableMultiSpec::from_states(sigmas.clone(), b.clone())?;
            separable_checks = Some(spec.checks());
            match build_separable_multi(&spec) {
                Ok(ch) => separable = Some(ch),
                Err(e) => fallback_reason = Some(e.to_string()),
            }
        }
        Discrimination::Infeasible { index, success, .. } => {
            fallback_reason = Some(format!(
                "state {index} cannot be discriminated unambiguously: tr[Pi{index} sigma{index}] = {:.3e}",
                success[*index]
            ));
        }
    }

    let (path, channel, sdp) = match separable {
        Some(ch) => (DemoPath::Separable, ch, None),
        None => {
            let out = build_via_sdp(&sigmas, Some(&b), opts)?;
            let summary = SdpSummary {
                trace_x: out.x.matrix().trace(),
                rank: out.solution.rank,
                contraction: out.contraction,
                converges: out.converges,
            };
            (DemoPath::Sdp, out.c, Some(summary))
        }
    };
    let residual = |s: &DensityMatrix| -> Result<f64> {
        Ok(half_trace_norm_diff(&channel.apply_operator(s.matrix())?, s.matrix()))
    };
    Ok(BellDemoReport {
        fixed_point_residuals: [residual(&sigma0)?, residual(&sigma1)?],
        cptp: channel.is_cptp(),
        params: params.clone(),
        sigma0,
        sigma1,
        discriminability,
        discrimination,
        separable_checks,
        path,
        fallback_reason,
        sdp,
        channel,
    })
}

fn cross_check(name: &str, value: f64) -> ConditionCheck {
    ConditionCheck { name: format!("{name} = 0"), value, holds: value.abs() <= RANK_TOL }
}

fn success_check(name: &str, value: f64) -> ConditionCheck {
    ConditionCheck { name: format!("{name} > 0"), value, holds: value > RANK_TOL }
}
