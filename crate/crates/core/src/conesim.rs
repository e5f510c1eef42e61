//! Classical processes from iterated channels.
//!
//! Each round settles the current state under a channel with several fixed
//! points, labels the result with the fixed point it reached, then kicks it
//! with a second channel. The label sequence is a classical stochastic
//! process; [`estimate_process`] fits a Markov chain to it and
//! [`to_quasi_realization`] packages that chain as a positive realization.
//!
//! A settled state that is a mixture of fixed points is labelled by sampling
//! from its conic weights and collapsing onto the drawn fixed point, unless
//! [`SimulationConfig::collapse`] is off.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{hermitian_basis, ChoiMatrix, FP_TOL, SETTLE_TOL};
use crate::error::{Error, Result};
use crate::linops::{hs_inner_re, trace_distance, DensityMatrix, Hermitian};
use crate::quasireal::{nnls, QuasiRealization};

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-3;

/// Channel applied between settling phases.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KickPolicy {
    Channel {
        choi: ChoiMatrix,
    },
    /// Fresh Haar unitary conjugation every round.
    HaarUnitary,
    /// `ρ ↦ (1 − p) ρ + p I/d`.
    Depolarizing {
        strength: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub channel: ChoiMatrix,
    pub kick: KickPolicy,
    pub n_iter: usize,
    pub n_rounds: usize,
    #[serde(default = "default_classify_tol")]
    pub classify_tol: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub collapse: bool,
    /// Defaults to the maximally mixed state.
    #[serde(default)]
    pub initial_state: Option<DensityMatrix>,
}

fn default_classify_tol() -> f64 {
    DEFAULT_CLASSIFY_TOL
}

fn default_true() -> bool {
    true
}

impl SimulationConfig {
    pub fn new(channel: ChoiMatrix, kick: KickPolicy, n_iter: usize, n_rounds: usize, seed: u64) -> Self {
        SimulationConfig {
            channel,
            kick,
            n_iter,
            n_rounds,
            classify_tol: DEFAULT_CLASSIFY_TOL,
            seed,
            collapse: true,
            initial_state: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 || self.n_rounds == 0 {
            return Err(Error::InvalidInput("n_iter and n_rounds must be at least 1".into()));
        }
        if self.classify_tol.is_nan() || self.classify_tol <= 0.0 {
            return Err(Error::InvalidInput("classify_tol must be positive".into()));
        }
        self.channel.require_cptp()?;
        let d = self.channel.d_in();
        match &self.kick {
            KickPolicy::Channel { choi } => {
                choi.require_cptp()?;
                if choi.d_in() != d || choi.d_out() != d {
                    return Err(Error::DimensionMismatch("kick channel dimension differs".into()));
                }
            }
            KickPolicy::Depolarizing { strength } if !(0.0..=1.0).contains(strength) => {
                return Err(Error::InvalidInput(format!("depolarizing strength {strength} outside [0, 1]")));
            }
            _ => {}
        }
        if let Some(rho) = &self.initial_state {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch("initial state dimension differs".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub round: usize,
    pub settled_state: DensityMatrix,
    /// Index into the fixed points, or `None` when unclassified.
    pub symbol: Option<usize>,
    /// Conic weights of the settled state over the fixed points, when it
    /// decomposes within `classify_tol`.
    pub weights: Option<Vec<f64>>,
    pub settle_steps: usize,
    pub converged: bool,
    pub post_kick_state: DensityMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub fixed_points: Vec<DensityMatrix>,
    pub rounds: Vec<Round>,
}

impl Trajectory {
    pub fn symbols(&self) -> Vec<Option<usize>> {
        self.rounds.iter().map(|r| r.symbol).collect()
    }

    pub fn unclassified(&self) -> usize {
        self.rounds.iter().filter(|r| r.symbol.is_none()).count()
    }

    /// One JSON record per round.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads rounds written by [`write_jsonl`](Self::write_jsonl); the
    /// fixed points are not stored and come back empty.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut rounds = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            rounds.push(serde_json::from_str(&line)?);
        }
        Ok(Trajectory { fixed_points: Vec::new(), rounds })
    }
}

struct Classifier {
    states: Vec<DensityMatrix>,
    basis: Vec<Hermitian>,
    generators: DMatrix<f64>,
    tol: f64,
}

impl Classifier {
    fn new(states: Vec<DensityMatrix>, tol: f64) -> Self {
        let d = states[0].dim();
        let basis = hermitian_basis(d);
        let cols: Vec<DVector<f64>> = states.iter().map(|s| coords(&basis, s.op())).collect();
        Classifier { generators: DMatrix::from_columns(&cols), states, basis, tol }
    }

    /// Nearest fixed point within `tol` (lowest index on ties).
    fn nearest(&self, rho: &DensityMatrix) -> Result<Option<usize>> {
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.states.iter().enumerate() {
            let dist = trace_distance(rho, s)?;
            if dist <= self.tol && best.is_none_or(|(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        Ok(best.map(|(i, _)| i))
    }

    fn weights(&self, rho: &DensityMatrix) -> Option<Vec<f64>> {
        let (w, residual) = nnls(&self.generators, &coords(&self.basis, rho.op()));
        (residual <= self.tol).then(|| {
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        })
    }
}

fn coords(basis: &[Hermitian], a: &Hermitian) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|g| hs_inner_re(g.matrix(), a.matrix())))
}

fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn kick<R: Rng>(policy: &KickPolicy, rho: &DensityMatrix, rng: &mut R) -> Result<DensityMatrix> {
    let d = rho.dim();
    let out = match policy {
        KickPolicy::Channel { choi } => choi.apply_operator(rho.matrix())?,
        KickPolicy::HaarUnitary => {
            let u = crate::random::haar_unitary(d, rng);
            &u * rho.matrix() * u.adjoint()
        }
        KickPolicy::Depolarizing { strength } => {
            rho.matrix().scale(1.0 - strength) + crate::linops::identity(d).scale(strength / d as f64)
        }
    };
    DensityMatrix::from_approximate(&out)
}

/// Runs the settle / classify / kick loop. Deterministic given the seed.
pub fn run(config: &SimulationConfig) -> Result<Trajectory> {
    config.validate()?;
    let d = config.channel.d_in();
    let fixed = config.channel.fixed_points(FP_TOL)?;
    let classifier = Classifier::new(fixed.states, config.classify_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rho = config.initial_state.clone().unwrap_or_else(|| DensityMatrix::maximally_mixed(d));
    let mut rounds = Vec::with_capacity(config.n_rounds);

    for round in 0..config.n_rounds {
        let settled = config.channel.settle(&rho, config.n_iter, SETTLE_TOL)?;
        let weights = classifier.weights(&settled.state);
        let symbol = match classifier.nearest(&settled.state)? {
            Some(i) => Some(i),
            None if config.collapse => weights.as_ref().map(|w| sample_index(w, &mut rng)),
            None => None,
        };
        let landed = match symbol {
            Some(i) if config.collapse => classifier.states[i].clone(),
            _ => settled.state.clone(),
        };
        let post = kick(&config.kick, &landed, &mut rng)?;
        rounds.push(Round {
            round,
            settled_state: settled.state,
            symbol,
            weights,
            settle_steps: settled.steps,
            converged: settled.converged,
            post_kick_state: post.clone(),
        });
        rho = post;
    }
    Ok(Trajectory { fixed_points: classifier.states, rounds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalProcess {
    /// Observed fixed-point indices, ascending.
    pub symbols: Vec<usize>,
    /// `counts[i][j]`: times `symbols[i]` was directly followed by `symbols[j]`.
    pub counts: Vec<Vec<u64>>,
    pub transition_estimate: Vec<Vec<f64>>,
    pub stationary_estimate: Vec<f64>,
}

/// Markov-chain fit to consecutive classified rounds.
pub fn estimate_process(t: &Trajectory) -> Result<EmpiricalProcess> {
    estimate_from_symbols(&t.symbols())
}

/// Same as [`estimate_process`] on a raw symbol sequence; `None` breaks the
/// chain of transitions.
pub fn estimate_from_symbols(seq: &[Option<usize>]) -> Result<EmpiricalProcess> {
    let classified = seq.iter().flatten().count();
    if classified < 2 {
        return Err(Error::InvalidInput(format!("need at least two classified rounds, found {classified}")));
    }
    let mut symbols: Vec<usize> = seq.iter().flatten().copied().collect();
    symbols.sort_unstable();
    symbols.dedup();
    let k = symbols.len();
    let pos = |s: usize| symbols.binary_search(&s).expect("symbol collected above");

    let mut counts = vec![vec![0u64; k]; k];
    for pair in seq.windows(2) {
        if let [Some(a), Some(b)] = pair {
            counts[pos(*a)][pos(*b)] += 1;
        }
    }
    let transition_estimate: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| {
            let n: u64 = row.iter().sum();
            if n == 0 {
                vec![0.0; k]
            } else {
                row.iter().map(|c| *c as f64 / n as f64).collect()
            }
        })
        .collect();
    let stationary_estimate = left_fixed_vector(&transition_estimate);
    Ok(EmpiricalProcess { symbols, counts, transition_estimate, stationary_estimate })
}

/// Least-squares solution of `π T = π`, `Σ π = 1`.
fn left_fixed_vector(t: &[Vec<f64>]) -> Vec<f64> {
    let k = t.len();
    let mut a = DMatrix::zeros(k + 1, k);
    for i in 0..k {
        for j in 0..k {
            a[(j, i)] = t[i][j] - if i == j { 1.0 } else { 0.0 };
        }
        a[(k, i)] = 1.0;
    }
    let mut b = DVector::zeros(k + 1);
    b[k] = 1.0;
    let pi = a.svd(true, true).solve(&b, 1e-12).expect("SVD computed with both factors");
    pi.iter().copied().collect()
}

/// Positive realization of the fitted chain: the map for symbol `u` keeps
/// column `u` of the transition matrix, `π` is the stationary estimate and
/// `τ` is all ones.
pub fn to_quasi_realization(e: &EmpiricalProcess) -> Result<QuasiRealization> {
    let missing: Vec<usize> =
        e.symbols.iter().zip(&e.counts).filter(|(_, row)| row.iter().sum::<u64>() == 0).map(|(s, _)| *s).collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!("no transitions observed out of symbols {missing:?}")));
    }
    let k = e.symbols.len();
    let t = DMatrix::from_fn(k, k, |i, j| e.transition_estimate[i][j]);
    let maps = (0..k).map(|u| DMatrix::from_fn(k, k, |i, j| if j == u { t[(i, j)] } else { 0.0 })).collect();
    QuasiRealization::new(
        e.symbols.iter().map(|s| s.to_string()).collect(),
        maps,
        DVector::from_vec(e.stationary_estimate.clone()),
        DVector::from_element(k, 1.0),
    )
}
