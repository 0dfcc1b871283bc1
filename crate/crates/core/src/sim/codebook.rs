//! Random codebooks and the keyed random streams behind them.
//!
//! Every random draw in a run comes from a ChaCha8 stream selected by
//! `(seed, domain, trial, index)`. The key is
//! `splitmix(splitmix(seed ^ splitmix(domain)) ^ trial)` and `index` picks
//! the ChaCha stream under that key. Codeword `m` of a codebook is stream
//! `m`, so any codeword can be regenerated on its own without building the
//! whole codebook.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CodingConfig, Engine, SimError};
use crate::prob::{Pmf, RelayInputModel, Symbol, ZERO_SYMBOL};

/// Trial key used by codebooks shared across all trials.
pub(crate) const SHARED: u64 = u64::MAX;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Domain {
    SourceCodebook = 1,
    RelayCodebook = 2,
    Messages = 3,
    Noise = 4,
    Decoder = 5,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn stream(seed: u64, domain: Domain, trial: u64, index: u64) -> ChaCha8Rng {
    let key = splitmix(splitmix(seed ^ splitmix(domain as u64)) ^ trial);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF draw from `pmf`.
pub(crate) fn sample<R: Rng>(pmf: &Pmf, rng: &mut R) -> Symbol {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = pmf.support()[0];
    for (s, p) in pmf.iter() {
        if p > 0.0 {
            acc += p;
            last = s;
            if u < acc {
                return s;
            }
        }
    }
    last
}

pub(crate) fn source_codeword(
    seed: u64,
    trial: u64,
    message: u64,
    len: usize,
    dist: &Pmf,
) -> Vec<Symbol> {
    let mut rng = stream(seed, Domain::SourceCodebook, trial, message);
    (0..len).map(|_| sample(dist, &mut rng)).collect()
}

/// One coin per symbol: with probability `P_U` the symbol is drawn from the
/// active distribution, otherwise it is the silent symbol.
pub(crate) fn relay_codeword(
    seed: u64,
    trial: u64,
    message: u64,
    len: usize,
    relay: &RelayInputModel,
) -> Vec<Symbol> {
    let mut rng = stream(seed, Domain::RelayCodebook, trial, message);
    (0..len)
        .map(|_| {
            let coin: f64 = rng.gen();
            let active = sample(relay.p_v(), &mut rng);
            if coin < relay.p_u() {
                active
            } else {
                ZERO_SYMBOL
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    /// Source codewords of length `⌊k(1 - P_U)⌋`, sent only while the relay
    /// listens.
    SourceConditional,
    /// Relay codewords of length `k` whose zeros form the switching pattern.
    RelayFull,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    kind: CodebookKind,
    codeword_len: usize,
    codewords: Vec<Vec<Symbol>>,
}

impl Codebook {
    #[cfg(test)]
    pub(crate) fn from_parts(
        kind: CodebookKind,
        codeword_len: usize,
        codewords: Vec<Vec<Symbol>>,
    ) -> Self {
        Self {
            kind,
            codeword_len,
            codewords,
        }
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword_len(&self) -> usize {
        self.codeword_len
    }

    pub fn codeword(&self, message: u64) -> Option<&[Symbol]> {
        self.codewords.get(message as usize).map(Vec::as_slice)
    }

    pub fn codewords(&self) -> &[Vec<Symbol>] {
        &self.codewords
    }
}

/// Materializes both codebooks for `cfg`. They depend only on the seed and
/// are shared by every trial of a run.
pub fn generate_codebooks(
    cfg: &CodingConfig,
    source_dist: &Pmf,
    relay: &RelayInputModel,
) -> Result<(Codebook, Codebook), SimError> {
    cfg.validate()?;
    cfg.check_codebook_budget(Engine::Explicit)?;
    let m = cfg.codebook_size();
    let len = cfg.source_codeword_len();
    let source = (0..m)
        .map(|w| source_codeword(cfg.seed, SHARED, w, len, source_dist))
        .collect();
    let relay_words = (0..m)
        .map(|w| relay_codeword(cfg.seed, SHARED, w, cfg.k, relay))
        .collect();
    Ok((
        Codebook {
            kind: CodebookKind::SourceConditional,
            codeword_len: len,
            codewords: source,
        },
        Codebook {
            kind: CodebookKind::RelayFull,
            codeword_len: cfg.k,
            codewords: relay_words,
        },
    ))
}
