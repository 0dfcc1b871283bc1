//! Joint-typicality decoding.
//!
//! A pair `(x, y)` of length `n` is typical when the empirical entropies
//! `-(1/n)·log₂ p(x)`, `-(1/n)·log₂ p(y)` and `-(1/n)·log₂ p(x, y)` are each
//! within `ε` of `H(X)`, `H(Y)` and `H(X, Y)`. A decoder succeeds only when
//! exactly one codeword is typical with the received sequence.
//!
//! The ensemble decoder reaches the same outcome distribution as a scan over
//! a fresh random codebook without building it: the candidate that was
//! actually sent is tested directly, and the number of other typical
//! codewords is drawn from its exact binomial law.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

use super::codebook::Codebook;
use crate::prob::{entropy, ConditionalPmf, Pmf, ProbError, Symbol};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    #[error("{candidates} codewords are jointly typical with the received sequence")]
    AmbiguousDecode { candidates: u64 },
    #[error("no codeword is jointly typical with the received sequence")]
    NoTypicalCodeword,
    #[error("received {got} symbols but the index set has {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Typicality test for one hop: codeword symbols drawn from `input`, sent
/// through `channel`.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    x_support: Vec<Symbol>,
    y_support: Vec<Symbol>,
    log_px: Vec<f64>,
    log_py: Vec<f64>,
    log_pxy: Vec<Vec<f64>>,
    h_x: f64,
    h_y: f64,
    h_xy: f64,
    eps: f64,
}

impl TypicalityTest {
    pub fn new(input: &Pmf, channel: &ConditionalPmf, eps: f64) -> Result<Self, ProbError> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(ProbError::Domain {
                name: "typicality_eps",
                value: eps,
            });
        }
        let output = channel.push_forward(input)?;
        let mut log_pxy = Vec::with_capacity(input.len());
        let mut h_xy = 0.0;
        for (x, px) in input.iter() {
            let row = channel.row(x)?;
            let mut logs = Vec::with_capacity(output.len());
            for &y in output.support() {
                let pxy = px * row.prob(y);
                if pxy > 0.0 {
                    h_xy -= pxy * pxy.log2();
                }
                logs.push(pxy.log2());
            }
            log_pxy.push(logs);
        }
        Ok(Self {
            x_support: input.support().to_vec(),
            y_support: output.support().to_vec(),
            log_px: input.probs().iter().map(|p| p.log2()).collect(),
            log_py: output.probs().iter().map(|p| p.log2()).collect(),
            log_pxy,
            h_x: entropy(input),
            h_y: entropy(&output),
            h_xy,
            eps,
        })
    }

    /// `0.05·H(input)`, the default tolerance for a hop.
    pub fn default_eps(input: &Pmf) -> f64 {
        0.05 * entropy(input)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn x_index(&self, s: Symbol) -> Option<usize> {
        self.x_support.iter().position(|&v| v == s)
    }

    fn y_index(&self, s: Symbol) -> Option<usize> {
        self.y_support.iter().position(|&v| v == s)
    }

    fn within(&self, total: f64, n: usize, h: f64) -> bool {
        if n == 0 {
            return true;
        }
        // A zero-probability symbol gives total = -inf and fails here.
        (-total / n as f64 - h).abs() <= self.eps + 1e-12
    }

    /// Output-marginal condition on its own.
    pub fn output_typical(&self, y: &[Symbol]) -> bool {
        let mut total = 0.0;
        for &s in y {
            match self.y_index(s) {
                Some(j) => total += self.log_py[j],
                None => return false,
            }
        }
        self.within(total, y.len(), self.h_y)
    }

    /// All three conditions; `x` and `y` must have equal length.
    pub fn jointly_typical(&self, x: &[Symbol], y: &[Symbol]) -> bool {
        debug_assert_eq!(x.len(), y.len());
        let (mut tx, mut ty, mut txy) = (0.0, 0.0, 0.0);
        for (&a, &b) in x.iter().zip(y) {
            let (Some(i), Some(j)) = (self.x_index(a), self.y_index(b)) else {
                return false;
            };
            tx += self.log_px[i];
            ty += self.log_py[j];
            txy += self.log_pxy[i][j];
        }
        let n = x.len();
        self.within(tx, n, self.h_x)
            && self.within(ty, n, self.h_y)
            && self.within(txy, n, self.h_xy)
    }

    fn is_binary(&self) -> bool {
        self.x_support.len() == 2 && self.y_support.len() == 2
    }
}

/// Scans the codebook, comparing the first `len` symbols of every codeword.
fn scan(
    test: &TypicalityTest,
    y: &[Symbol],
    codebook: &Codebook,
    len: usize,
) -> Result<u64, DecodeError> {
    let mut found = None;
    let mut count = 0u64;
    for (m, cw) in codebook.codewords().iter().enumerate() {
        if test.jointly_typical(&cw[..len], y) {
            count += 1;
            found.get_or_insert(m as u64);
        }
    }
    match count {
        0 => Err(DecodeError::NoTypicalCodeword),
        1 => Ok(found.expect("one match")),
        n => Err(DecodeError::AmbiguousDecode { candidates: n }),
    }
}

/// Relay decoder over the source codebook truncated to `index_set_size`
/// symbols. Truncated codewords that coincide and are both typical make the
/// decode ambiguous.
pub fn typical_decode_relay(
    test: &TypicalityTest,
    y_1r: &[Symbol],
    codebook: &Codebook,
    index_set_size: usize,
) -> Result<u64, DecodeError> {
    if y_1r.len() != index_set_size || index_set_size > codebook.codeword_len() {
        return Err(DecodeError::LengthMismatch {
            expected: index_set_size,
            got: y_1r.len(),
        });
    }
    scan(test, y_1r, codebook, index_set_size)
}

/// Destination decoder over the full-length relay codebook.
pub fn typical_decode_destination(
    test: &TypicalityTest,
    y2: &[Symbol],
    codebook: &Codebook,
) -> Result<u64, DecodeError> {
    if y2.len() != codebook.codeword_len() {
        return Err(DecodeError::LengthMismatch {
            expected: codebook.codeword_len(),
            got: y2.len(),
        });
    }
    scan(test, y2, codebook, y2.len())
}

/// Ensemble-averaged decoder for binary alphabets.
pub(crate) struct EnsembleDecoder<'a> {
    test: &'a TypicalityTest,
    ln_fact: Vec<f64>,
    cache: HashMap<(usize, usize), f64>,
}

impl<'a> EnsembleDecoder<'a> {
    pub(crate) fn new(test: &'a TypicalityTest, max_len: usize) -> Option<Self> {
        if !test.is_binary() {
            return None;
        }
        let mut ln_fact = vec![0.0; max_len + 1];
        for i in 1..=max_len {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        Some(Self {
            test,
            ln_fact,
            cache: HashMap::new(),
        })
    }

    fn binom(&self, k: usize, n: usize, p: f64) -> f64 {
        if p <= 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if p >= 1.0 {
            return if k == n { 1.0 } else { 0.0 };
        }
        let ln = self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
            + k as f64 * p.ln()
            + (n - k) as f64 * (-p).ln_1p();
        ln.exp()
    }

    /// Probability that a codeword drawn i.i.d. from the input law is jointly
    /// typical with a received sequence of length `n` holding `v` copies of
    /// the second output symbol. Depends on the sequence only through `(n, v)`.
    fn impostor_prob(&mut self, n: usize, v: usize) -> f64 {
        if let Some(&q) = self.cache.get(&(n, v)) {
            return q;
        }
        let t = self.test;
        let p1 = t.log_px[1].exp2();
        let term = |count: usize, log_p: f64| {
            if count == 0 {
                0.0
            } else {
                count as f64 * log_p
            }
        };
        let mut q = 0.0;
        for a in 0..=v {
            let pa = self.binom(a, v, p1);
            if pa == 0.0 {
                continue;
            }
            for b in 0..=(n - v) {
                let pb = self.binom(b, n - v, p1);
                if pb == 0.0 {
                    continue;
                }
                let ones = a + b;
                let tx = term(ones, t.log_px[1]) + term(n - ones, t.log_px[0]);
                let txy = term(a, t.log_pxy[1][1])
                    + term(v - a, t.log_pxy[0][1])
                    + term(b, t.log_pxy[1][0])
                    + term(n - v - b, t.log_pxy[0][0]);
                if t.within(tx, n, t.h_x) && t.within(txy, n, t.h_xy) {
                    q += pa * pb;
                }
            }
        }
        let q = q.min(1.0);
        self.cache.insert((n, v), q);
        q
    }

    /// Decodes `y` against a random codebook of `size` codewords, of which
    /// `sent` (if any) is the codeword actually transmitted.
    pub(crate) fn decode<R: Rng>(
        &mut self,
        y: &[Symbol],
        sent: Option<(u64, &[Symbol])>,
        size: u64,
        rng: &mut R,
    ) -> Result<u64, DecodeError> {
        let t = self.test;
        let sent_typical = sent.is_some_and(|(_, x)| t.jointly_typical(x, y));
        let others = size - u64::from(sent.is_some());
        let q = if t.output_typical(y) {
            let n = y.len();
            let v = y.iter().filter(|&&s| s == t.y_support[1]).count();
            self.impostor_prob(n, v)
        } else {
            0.0
        };
        // P(no impostor) and P(exactly one) under Binomial(others, q).
        let (p0, p1) = if others == 0 || q == 0.0 {
            (1.0, 0.0)
        } else if q >= 1.0 {
            (0.0, if others == 1 { 1.0 } else { 0.0 })
        } else {
            let m = others as f64;
            let ln_miss = (-q).ln_1p();
            (((m) * ln_miss).exp(), m * q * ((m - 1.0) * ln_miss).exp())
        };
        let u: f64 = rng.gen();
        let impostors = if u < p0 {
            0
        } else if u < p0 + p1 {
            1
        } else {
            2
        };
        match (sent_typical, impostors) {
            (true, 0) => Ok(sent.expect("typical implies sent").0),
            (false, 0) => Err(DecodeError::NoTypicalCodeword),
            (false, 1) => {
                // Uniform among the codewords that were not sent.
                let r = rng.gen_range(0..others);
                Ok(match sent {
                    Some((w, _)) if r >= w => r + 1,
                    _ => r,
                })
            }
            (typ, n) => Err(DecodeError::AmbiguousDecode {
                candidates: n + u64::from(typ),
            }),
        }
    }
}
