//! Quasi-realizations of stochastic processes and polyhedral cone checks.
//!
//! A quasi-realization `(π, {D⁽ᵘ⁾}, τ)` assigns the word `u₁…u_l` the value
//! `π D⁽ᵘ¹⁾ ⋯ D⁽ᵘˡ⁾ τ`. It is a positive realization when the maps are
//! nonnegative, their sum is row stochastic, `π` is stationary and `τ` is the
//! all-ones vector. A realization is equivalent to a positive one exactly
//! when some pointed polyhedral cone contains `τ`, is mapped into itself by
//! every `D⁽ᵘ⁾`, and has `π` in its dual; [`QuasiRealization::check_dharmadhikari`]
//! verifies those conditions for a given cone.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for cone membership residuals.
pub const CONE_TOL: f64 = 1e-8;
/// Default tolerance for probability identities.
pub const PROB_TOL: f64 = 1e-9;
/// Largest number of words [`QuasiRealization::word_distribution`] enumerates.
pub const MAX_WORDS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRealization", into = "RawRealization")]
pub struct QuasiRealization {
    alphabet: Vec<String>,
    maps: Vec<DMatrix<f64>>,
    pi: DVector<f64>,
    tau: DVector<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRealization {
    dim: usize,
    alphabet: Vec<String>,
    #[serde(rename = "D")]
    maps: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    tau: Vec<f64>,
}

impl TryFrom<RawRealization> for QuasiRealization {
    type Error = Error;

    fn try_from(raw: RawRealization) -> Result<Self> {
        let n = raw.dim;
        let maps = raw
            .maps
            .iter()
            .map(|rows| {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch(format!("every D must be {n}x{n}")));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        QuasiRealization::new(raw.alphabet, maps, DVector::from_vec(raw.pi), DVector::from_vec(raw.tau))
    }
}

impl From<QuasiRealization> for RawRealization {
    fn from(q: QuasiRealization) -> Self {
        RawRealization {
            dim: q.dim(),
            maps: q.maps.iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect(),
            pi: q.pi.iter().copied().collect(),
            tau: q.tau.iter().copied().collect(),
            alphabet: q.alphabet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub nonneg: bool,
    pub stochastic: bool,
    pub stationary: bool,
    pub tau_ones: bool,
}

impl PositivityReport {
    pub fn all(&self) -> bool {
        self.nonneg && self.stochastic && self.stationary && self.tau_ones
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DharmadhikariReport {
    pub tau_in_cone: bool,
    pub maps_preserve_cone: bool,
    pub pi_in_dual: bool,
    pub pointed: bool,
}

impl DharmadhikariReport {
    pub fn all(&self) -> bool {
        self.tau_in_cone && self.maps_preserve_cone && self.pi_in_dual && self.pointed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordProbability {
    pub word: Vec<String>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordDistribution {
    pub length: usize,
    pub words: Vec<WordProbability>,
}

impl WordDistribution {
    pub fn total(&self) -> f64 {
        self.words.iter().map(|w| w.probability).sum()
    }
}

impl QuasiRealization {
    pub fn new(alphabet: Vec<String>, maps: Vec<DMatrix<f64>>, pi: DVector<f64>, tau: DVector<f64>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidInput("alphabet is empty".into()));
        }
        if maps.len() != alphabet.len() {
            return Err(Error::DimensionMismatch(format!("{} symbols but {} maps", alphabet.len(), maps.len())));
        }
        for (i, a) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(a) {
                return Err(Error::InvalidInput(format!("symbol {a:?} repeated")));
            }
        }
        let n = pi.len();
        if n == 0 || tau.len() != n || maps.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::DimensionMismatch(format!(
                "pi has length {n}, tau {}, maps must be {n}x{n}",
                tau.len()
            )));
        }
        let finite = maps.iter().flat_map(|m| m.iter()).chain(pi.iter()).chain(tau.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(QuasiRealization { alphabet, maps, pi, tau })
    }

    /// Hidden Markov chain whose emitted symbol is the state entered:
    /// `D⁽ʲ⁾[i, j] = T[i, j]` and zero elsewhere, `τ = 1`.
    pub fn markov(transition: &DMatrix<f64>, pi: DVector<f64>) -> Result<Self> {
        let n = transition.nrows();
        if transition.ncols() != n {
            return Err(Error::DimensionMismatch("transition matrix is not square".into()));
        }
        let maps =
            (0..n).map(|u| DMatrix::from_fn(n, n, |i, j| if j == u { transition[(i, j)] } else { 0.0 })).collect();
        let alphabet = (0..n).map(|u| u.to_string()).collect();
        Self::new(alphabet, maps, pi, DVector::from_element(n, 1.0))
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn maps(&self) -> &[DMatrix<f64>] {
        &self.maps
    }

    pub fn pi(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn tau(&self) -> &DVector<f64> {
        &self.tau
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.alphabet.iter().position(|a| a == symbol).ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    /// `π D⁽ᵘ¹⁾ ⋯ D⁽ᵘˡ⁾ τ`; the empty word gives `π τ`.
    pub fn word_probability<S: AsRef<str>>(&self, word: &[S]) -> Result<f64> {
        let idx = word.iter().map(|s| self.symbol_index(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(self.word_probability_indices(&idx))
    }

    /// Same as [`word_probability`](Self::word_probability) with symbols
    /// given by position in the alphabet.
    ///
    /// # Panics
    /// If an index is out of range.
    pub fn word_probability_indices(&self, word: &[usize]) -> f64 {
        let row = word.iter().fold(self.pi.transpose(), |acc, &u| acc * &self.maps[u]);
        (row * &self.tau)[(0, 0)]
    }

    /// All words of length `l` in lexicographic alphabet order.
    pub fn word_distribution(&self, l: usize) -> Result<WordDistribution> {
        let k = self.alphabet.len();
        let count = (0..l).try_fold(1usize, |acc, _| acc.checked_mul(k)).filter(|c| *c <= MAX_WORDS);
        let Some(count) = count else {
            return Err(Error::InvalidInput(format!("{k}^{l} words exceeds the limit of {MAX_WORDS}")));
        };
        let mut words = Vec::with_capacity(count);
        let mut idx = vec![0usize; l];
        for _ in 0..count {
            words.push(WordProbability {
                word: idx.iter().map(|&u| self.alphabet[u].clone()).collect(),
                probability: self.word_probability_indices(&idx),
            });
            for pos in (0..l).rev() {
                idx[pos] += 1;
                if idx[pos] < k {
                    break;
                }
                idx[pos] = 0;
            }
        }
        Ok(WordDistribution { length: l, words })
    }

    /// `Σ_u D⁽ᵘ⁾`.
    pub fn cause_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.maps.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m)
    }

    pub fn is_positive_realization(&self, tol: f64) -> PositivityReport {
        let cause = self.cause_matrix();
        let ones = DVector::from_element(self.dim(), 1.0);
        PositivityReport {
            nonneg: self.maps.iter().flat_map(|m| m.iter()).all(|x| *x >= -tol),
            stochastic: (&cause * &ones - &ones).amax() <= tol,
            stationary: (self.pi.transpose() * &cause - self.pi.transpose()).amax() <= tol,
            tau_ones: (&self.tau - &ones).amax() <= tol,
        }
    }

    pub fn check_dharmadhikari(&self, cone: &PolyhedralCone, tol: f64) -> Result<DharmadhikariReport> {
        if cone.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cone lives in R^{}, realization in R^{}",
                cone.dim(),
                self.dim()
            )));
        }
        let maps_preserve_cone = self.maps.iter().all(|m| cone.generators.iter().all(|g| cone.contains(&(m * g), tol)));
        Ok(DharmadhikariReport {
            tau_in_cone: cone.contains(&self.tau, tol),
            maps_preserve_cone,
            pi_in_dual: cone.generators.iter().all(|g| self.pi.dot(g) >= -tol),
            pointed: cone.is_pointed(tol),
        })
    }

    /// Rewrites the realization in the coordinates of a simplicial cone, so
    /// the cone becomes the nonnegative orthant and `τ` becomes all ones.
    ///
    /// Generators are rescaled by the conic coefficients of `τ`, which must
    /// all be positive.
    pub fn in_cone_basis(&self, cone: &PolyhedralCone) -> Result<QuasiRealization> {
        let n = self.dim();
        if cone.dim() != n || cone.generators.len() != n {
            return Err(Error::DimensionMismatch(format!("need {n} generators in R^{n}")));
        }
        let (coeffs, residual) = cone.conic_coefficients(&self.tau);
        if residual > CONE_TOL || coeffs.iter().any(|c| *c <= CONE_TOL) {
            return Err(Error::InvalidInput("tau is not in the interior of the cone".into()));
        }
        let g = DMatrix::from_fn(n, n, |i, j| cone.generators[j][i] * coeffs[j]);
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("cone generators are linearly dependent".into()))?;
        let maps = self.maps.iter().map(|m| &g_inv * m * &g).collect();
        let pi = (self.pi.transpose() * &g).transpose();
        let tau = &g_inv * &self.tau;
        QuasiRealization::new(self.alphabet.clone(), maps, pi, tau)
    }
}

/// Conic hull of finitely many nonzero generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCone", into = "RawCone")]
pub struct PolyhedralCone {
    generators: Vec<DVector<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    generators: Vec<Vec<f64>>,
}

impl TryFrom<RawCone> for PolyhedralCone {
    type Error = Error;

    fn try_from(raw: RawCone) -> Result<Self> {
        PolyhedralCone::new(raw.generators.into_iter().map(DVector::from_vec).collect())
    }
}

impl From<PolyhedralCone> for RawCone {
    fn from(c: PolyhedralCone) -> Self {
        RawCone { generators: c.generators.iter().map(|g| g.iter().copied().collect()).collect() }
    }
}

impl PolyhedralCone {
    pub fn new(generators: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidInput("cone needs at least one generator".into()));
        };
        let d = first.len();
        if d == 0 || generators.iter().any(|g| g.len() != d) {
            return Err(Error::DimensionMismatch("generators differ in length".into()));
        }
        if generators.iter().any(|g| g.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite);
        }
        if let Some(i) = generators.iter().position(|g| g.amax() == 0.0) {
            return Err(Error::InvalidInput(format!("generator {i} is zero")));
        }
        Ok(PolyhedralCone { generators })
    }

    /// The nonnegative orthant of `R^d`.
    pub fn orthant(d: usize) -> Self {
        PolyhedralCone {
            generators: (0..d).map(|i| DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 })).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn generators(&self) -> &[DVector<f64>] {
        &self.generators
    }

    fn generator_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.generators)
    }

    /// Nonnegative coefficients minimizing `‖Σ cᵢ gᵢ − v‖₂`, with the residual.
    pub fn conic_coefficients(&self, v: &DVector<f64>) -> (DVector<f64>, f64) {
        nnls(&self.generator_matrix(), v)
    }

    /// Membership with residual at most `tol · max(1, ‖v‖)`.
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.conic_coefficients(v).1 <= tol * v.norm().max(1.0)
    }

    /// A cone contains a line exactly when `−gᵢ` lies in it for some generator.
    pub fn is_pointed(&self, tol: f64) -> bool {
        !self.generators.iter().any(|g| self.contains(&(-g), tol))
    }
}

/// Lawson–Hanson nonnegative least squares: `argmin_{x ≥ 0} ‖A x − b‖₂`.
/// Returns the minimizer and the residual norm.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let scale = a.amax().max(b.amax()).max(1.0);
    let tol = 1e-13 * scale * scale * (a.nrows().max(n) as f64);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        for _ in 0..=n {
            let s = restricted_lstsq(a, b, &passive);
            let blocking = (0..n).filter(|&i| passive[i] && s[i] <= 0.0);
            let alpha = blocking.map(|i| x[i] / (x[i] - s[i])).fold(f64::INFINITY, f64::min);
            if !alpha.is_finite() {
                x = s;
                break;
            }
            x += (s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 1e-15 * scale {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

fn restricted_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let mut out = DVector::zeros(passive.len());
    if cols.is_empty() {
        return out;
    }
    let sub = a.select_columns(&cols);
    let sol = sub.svd(true, true).solve(b, 1e-12).expect("SVD computed with both factors");
    for (k, &i) in cols.iter().enumerate() {
        out[i] = sol[k];
    }
    out
}
