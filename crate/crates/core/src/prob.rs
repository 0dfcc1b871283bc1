//! Finite-alphabet probability primitives.
//!
//! Everything here is measured in bits. A [`Pmf`] is validated at
//! construction and never renormalized behind the caller's back.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symbol label of a finite alphabet. The relay's silent symbol is `0`.
pub type Symbol = i32;

/// The relay's silent symbol.
pub const ZERO_SYMBOL: Symbol = 0;

/// Absolute tolerance for probability comparisons.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("empty support")]
    Empty,
    #[error("support has {support} labels but {probs} probabilities")]
    LengthMismatch { support: usize, probs: usize },
    #[error("duplicate symbol {0} in support")]
    DuplicateSymbol(Symbol),
    #[error("probability {value} of symbol {symbol} is negative or not finite")]
    InvalidProbability { symbol: Symbol, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("channel rows disagree on the output support")]
    RowSupportMismatch,
    #[error("symbol {0} has no channel row")]
    SupportMismatch(Symbol),
    #[error("active-symbol distribution must not contain the zero symbol")]
    ZeroInActiveSet,
    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("mixture has no components")]
    EmptyMixture,
    #[error("quadrature did not reach tolerance {target:e} (estimate {achieved:e})")]
    Quadrature { target: f64, achieved: f64 },
}

/// Probability mass function over an ordered list of distinct symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    support: Vec<Symbol>,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(support: Vec<Symbol>, probs: Vec<f64>) -> Result<Self, ProbError> {
        if support.is_empty() {
            return Err(ProbError::Empty);
        }
        if support.len() != probs.len() {
            return Err(ProbError::LengthMismatch {
                support: support.len(),
                probs: probs.len(),
            });
        }
        for (i, s) in support.iter().enumerate() {
            if support[..i].contains(s) {
                return Err(ProbError::DuplicateSymbol(*s));
            }
        }
        for (&symbol, &value) in support.iter().zip(&probs) {
            if !value.is_finite() || value < 0.0 {
                return Err(ProbError::InvalidProbability { symbol, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(Self { support, probs })
    }

    pub fn uniform(support: Vec<Symbol>) -> Result<Self, ProbError> {
        let n = support.len();
        Self::new(support, vec![1.0 / n.max(1) as f64; n])
    }

    /// Degenerate distribution at `symbol`.
    pub fn point(symbol: Symbol) -> Self {
        Self {
            support: vec![symbol],
            probs: vec![1.0],
        }
    }

    /// Distribution on `{0, 1}` with `P(1) = p_one`.
    pub fn bernoulli(p_one: f64) -> Result<Self, ProbError> {
        if !(0.0..=1.0).contains(&p_one) {
            return Err(ProbError::Domain {
                name: "p_one",
                value: p_one,
            });
        }
        Self::new(vec![0, 1], vec![1.0 - p_one, p_one])
    }

    pub fn support(&self) -> &[Symbol] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, symbol: Symbol) -> Option<usize> {
        self.support.iter().position(|&s| s == symbol)
    }

    /// Probability of `symbol`, zero when it is not in the support.
    pub fn prob(&self, symbol: Symbol) -> f64 {
        self.index_of(symbol).map_or(0.0, |i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Symbol, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }
}

/// Channel transition law: one output [`Pmf`] per input symbol, all rows on
/// the same output support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    input_support: Vec<Symbol>,
    rows: Vec<Pmf>,
}

impl ConditionalPmf {
    pub fn new(input_support: Vec<Symbol>, rows: Vec<Pmf>) -> Result<Self, ProbError> {
        if input_support.is_empty() {
            return Err(ProbError::Empty);
        }
        if input_support.len() != rows.len() {
            return Err(ProbError::LengthMismatch {
                support: input_support.len(),
                probs: rows.len(),
            });
        }
        for (i, s) in input_support.iter().enumerate() {
            if input_support[..i].contains(s) {
                return Err(ProbError::DuplicateSymbol(*s));
            }
        }
        let out = rows[0].support();
        if rows.iter().any(|r| r.support() != out) {
            return Err(ProbError::RowSupportMismatch);
        }
        Ok(Self {
            input_support,
            rows,
        })
    }

    /// Builds a channel from a row-stochastic matrix.
    pub fn from_matrix(
        input_support: Vec<Symbol>,
        output_support: Vec<Symbol>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self, ProbError> {
        let rows = matrix
            .into_iter()
            .map(|row| Pmf::new(output_support.clone(), row))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(input_support, rows)
    }

    /// Binary symmetric channel on `{0, 1}` with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self, ProbError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ProbError::Domain {
                name: "crossover",
                value: p,
            });
        }
        Self::from_matrix(
            vec![0, 1],
            vec![0, 1],
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        )
    }

    /// Identity channel on `0..n`.
    pub fn noiseless(n: usize) -> Result<Self, ProbError> {
        let support: Vec<Symbol> = (0..n as Symbol).collect();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_matrix(support.clone(), support, matrix)
    }

    pub fn input_support(&self) -> &[Symbol] {
        &self.input_support
    }

    pub fn output_support(&self) -> &[Symbol] {
        self.rows[0].support()
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn row(&self, input: Symbol) -> Result<&Pmf, ProbError> {
        self.input_support
            .iter()
            .position(|&s| s == input)
            .map(|i| &self.rows[i])
            .ok_or(ProbError::SupportMismatch(input))
    }

    /// Output distribution induced by `input`.
    pub fn push_forward(&self, input: &Pmf) -> Result<Pmf, ProbError> {
        let mut out = vec![0.0; self.output_support().len()];
        for (x, px) in input.iter() {
            let row = self.row(x)?;
            for (o, &py) in out.iter_mut().zip(row.probs()) {
                *o += px * py;
            }
        }
        renormalized_output(self.output_support().to_vec(), out)
    }
}

// Accumulated products can drift by a few ulps; anything beyond PROB_TOL is
// still rejected by `Pmf::new`.
fn renormalized_output(support: Vec<Symbol>, mut probs: Vec<f64>) -> Result<Pmf, ProbError> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() <= PROB_TOL {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Pmf::new(support, probs)
}

/// Relay input law: silent with probability `1 - p_u`, otherwise a symbol
/// drawn from `p_v` (whose support excludes the zero symbol).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayInputModel {
    p_u: f64,
    p_v: Pmf,
}

impl RelayInputModel {
    pub fn new(p_u: f64, p_v: Pmf) -> Result<Self, ProbError> {
        if !(0.0..=1.0).contains(&p_u) {
            return Err(ProbError::Domain {
                name: "p_u",
                value: p_u,
            });
        }
        if p_v.index_of(ZERO_SYMBOL).is_some() {
            return Err(ProbError::ZeroInActiveSet);
        }
        Ok(Self { p_u, p_v })
    }

    pub fn p_u(&self) -> f64 {
        self.p_u
    }

    pub fn p_v(&self) -> &Pmf {
        &self.p_v
    }

    /// `p(x2) = P_U p_V(x2) + (1 - P_U) δ(x2)`, zero symbol first.
    pub fn mixture(&self) -> Pmf {
        let mut support = Vec::with_capacity(self.p_v.len() + 1);
        let mut probs = Vec::with_capacity(self.p_v.len() + 1);
        support.push(ZERO_SYMBOL);
        probs.push(1.0 - self.p_u);
        for (s, p) in self.p_v.iter() {
            support.push(s);
            probs.push(self.p_u * p);
        }
        // p_v is normalized and p_u in [0,1]: the sum is within a few ulps of 1.
        Pmf { support, probs }
    }
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum()
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64, ProbError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ProbError::Domain {
            name: "p",
            value: p,
        });
    }
    Ok(h2(p))
}

/// Unchecked binary entropy for callers that already validated the domain.
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// `I(X;Y) = H(Y) - H(Y|X)` for input law `input` through `channel`.
pub fn mutual_information(input: &Pmf, channel: &ConditionalPmf) -> Result<f64, ProbError> {
    let output = channel.push_forward(input)?;
    let mut h_cond = 0.0;
    for (x, px) in input.iter() {
        if px > 0.0 {
            h_cond += px * entropy(channel.row(x)?);
        }
    }
    Ok((entropy(&output) - h_cond).max(0.0))
}

/// `H(Y2)` when the relay input follows the mixture of `model`.
pub fn mixture_output_entropy(
    model: &RelayInputModel,
    channel: &ConditionalPmf,
) -> Result<f64, ProbError> {
    let silent = channel.row(ZERO_SYMBOL)?;
    let mut out: Vec<f64> = silent
        .probs()
        .iter()
        .map(|p| (1.0 - model.p_u) * p)
        .collect();
    for (x, pv) in model.p_v.iter() {
        let row = channel.row(x)?;
        for (o, &py) in out.iter_mut().zip(row.probs()) {
            *o += model.p_u * pv * py;
        }
    }
    Ok(entropy_of(&out))
}

/// `H(Y2|X2)` split into the active and silent parts.
pub fn conditional_output_entropy(
    model: &RelayInputModel,
    channel: &ConditionalPmf,
) -> Result<f64, ProbError> {
    let h_silent = entropy(channel.row(ZERO_SYMBOL)?);
    let mut h_active = Vec::with_capacity(model.p_v.len());
    for (x, pv) in model.p_v.iter() {
        h_active.push((pv, entropy(channel.row(x)?)));
    }
    // Rows with identical entropy (symmetric channels) give that entropy exactly.
    if h_active.iter().all(|&(_, h)| h == h_silent) {
        return Ok(h_silent);
    }
    let active: f64 = h_active.iter().map(|&(pv, h)| pv * h).sum();
    Ok(model.p_u * active + (1.0 - model.p_u) * h_silent)
}

/// `I(X2;Y2)` evaluated at the mixture input of `model`.
pub fn relay_mutual_information(
    model: &RelayInputModel,
    channel: &ConditionalPmf,
) -> Result<f64, ProbError> {
    let h = mixture_output_entropy(model, channel)? - conditional_output_entropy(model, channel)?;
    Ok(h.max(0.0))
}
