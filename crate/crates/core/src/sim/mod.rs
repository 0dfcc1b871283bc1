//! Monte-Carlo run of the block-Markov half-duplex relaying scheme.
//!
//! The message is split into `N` sub-messages sent over `N + 1` blocks of
//! `k` channel uses. In block `b` the relay forwards its estimate of
//! sub-message `b - 1` with a codeword whose zeros are the slots where it
//! listens, and the source inserts the codeword for sub-message `b` into
//! those slots. The first block has a silent relay and the last a silent
//! source.
//!
//! The source builds its schedule from the true previous sub-message, while
//! the relay switches according to what it decoded. A relay decoding error
//! therefore also misaligns the next block, as it would in a real link.
//!
//! Two engines are available. [`Engine::Explicit`] materializes both
//! codebooks once per run and scans them. [`Engine::Ensemble`] draws a fresh
//! random codebook per trial, generating only the codewords that are
//! actually sent and sampling the number of competing typical codewords
//! from its exact law; it handles codebooks far too large to store but needs
//! binary alphabets.

mod codebook;
mod decode;
mod scheme;

pub use codebook::{generate_codebooks, Codebook, CodebookKind};
pub use decode::{typical_decode_destination, typical_decode_relay, DecodeError, TypicalityTest};
pub use scheme::{encode_block, insert_source_symbols, relay_receive, BlockInputs, RelayMode};

use std::borrow::Cow;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{
    relay_mutual_information, ConditionalPmf, Pmf, ProbError, RelayInputModel, Symbol, ZERO_SYMBOL,
};
use codebook::{relay_codeword, sample, source_codeword, stream, Domain};
use decode::EnsembleDecoder;

/// Largest `⌈kR⌉` the explicit engine will materialize.
pub const MAX_EXPLICIT_BITS: u32 = 20;
/// Largest message size the ensemble engine accepts.
pub const MAX_ENSEMBLE_BITS: u32 = 62;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("a codebook of 2^{bits} codewords exceeds the limit of 2^{limit}")]
    CodebookTooLarge { bits: u32, limit: u32 },
    #[error("message {message} is outside a codebook of {size} codewords")]
    MessageOutOfRange { message: u64, size: u64 },
    #[error("sequence has {got} symbols, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no usable observation in slot {0}")]
    MissingObservation(usize),
    #[error("the ensemble engine needs binary input and output alphabets")]
    EnsembleNeedsBinary,
    #[error(transparent)]
    Prob(#[from] ProbError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Explicit,
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingConfig {
    /// Channel uses per block.
    pub k: usize,
    /// Target rate in bits per channel use; each block carries `⌊kR⌋` bits.
    pub rate: f64,
    /// Probability that a relay symbol is non-zero.
    pub p_u: f64,
    /// Number of sub-messages `N`.
    pub n_blocks: usize,
    /// Typicality tolerance for both decoders. When absent each decoder uses
    /// `0.05·H` of its own codeword-symbol distribution.
    #[serde(default)]
    pub typicality_eps: Option<f64>,
    #[serde(default)]
    pub relay_mode: RelayMode,
    pub seed: u64,
    #[serde(default)]
    pub engine: Engine,
}

impl CodingConfig {
    /// Collects every field-level problem rather than stopping at the first.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut problems = Vec::new();
        if self.k == 0 {
            problems.push("k: must be a positive integer".to_string());
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            problems.push(format!("rate: {} is not a non-negative number", self.rate));
        }
        if !(0.0..=1.0).contains(&self.p_u) {
            problems.push(format!("p_u: {} is outside [0, 1]", self.p_u));
        }
        if self.n_blocks == 0 {
            problems.push("n_blocks: must be a positive integer".to_string());
        }
        if let Some(eps) = self.typicality_eps {
            if !(eps > 0.0 && eps.is_finite()) {
                problems.push(format!("typicality_eps: {eps} must be positive"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(problems))
        }
    }

    /// Bits per sub-message, `⌊kR⌋`.
    pub fn message_bits(&self) -> u32 {
        (self.k as f64 * self.rate + 1e-9).floor() as u32
    }

    pub fn codebook_size(&self) -> u64 {
        1u64 << self.message_bits()
    }

    /// Source codeword length `⌊k(1 - P_U)⌋`.
    pub fn source_codeword_len(&self) -> usize {
        (self.k as f64 * (1.0 - self.p_u) + 1e-9).floor() as usize
    }

    /// `N·⌊kR⌋ / (k(N + 1))`.
    pub fn effective_rate(&self) -> f64 {
        let n = self.n_blocks as f64;
        n * self.message_bits() as f64 / (self.k as f64 * (n + 1.0))
    }

    pub(crate) fn check_codebook_budget(&self, engine: Engine) -> Result<(), SimError> {
        match engine {
            Engine::Explicit => {
                let bits = (self.k as f64 * self.rate - 1e-9).ceil().max(0.0) as u32;
                if bits > MAX_EXPLICIT_BITS {
                    return Err(SimError::CodebookTooLarge {
                        bits,
                        limit: MAX_EXPLICIT_BITS,
                    });
                }
            }
            Engine::Ensemble => {
                let bits = self.message_bits();
                if bits > MAX_ENSEMBLE_BITS {
                    return Err(SimError::CodebookTooLarge {
                        bits,
                        limit: MAX_ENSEMBLE_BITS,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Symbol distributions and channels of the two hops.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    /// `p(x₁ | x₂ = 0)`, the source codeword symbol law.
    pub source: Pmf,
    /// `p_V`, the relay's law when it transmits; must not contain zero.
    pub relay_active: Pmf,
    pub channel1: ConditionalPmf,
    pub channel2: ConditionalPmf,
}

impl Scheme {
    /// Binary symmetric hops with a uniform source and a relay that always
    /// sends `1` when active.
    pub fn bsc(p_eps1: f64, p_eps2: f64) -> Result<Self, SimError> {
        Ok(Self {
            source: Pmf::bernoulli(0.5)?,
            relay_active: Pmf::point(1),
            channel1: ConditionalPmf::bsc(p_eps1)?,
            channel2: ConditionalPmf::bsc(p_eps2)?,
        })
    }

    pub fn relay_model(&self, p_u: f64) -> Result<RelayInputModel, SimError> {
        Ok(RelayInputModel::new(p_u, self.relay_active.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Per sub-message: the relay decoded it correctly.
    pub relay_decoded_ok: Vec<bool>,
    /// Per sub-message: the destination recovered what the relay forwarded,
    /// or `None` when the relay had nothing to forward.
    pub dest_decoded_ok: Vec<Option<bool>>,
    /// Per sub-message: the destination's final estimate is correct.
    pub end_to_end_ok: Vec<bool>,
    pub hd_violations: u64,
    /// Zero fraction of each relay codeword actually transmitted.
    pub zero_fraction: Vec<f64>,
    /// Blocks in which the relay listened in fewer slots than the source
    /// codeword length.
    pub shortfall_case_count: u64,
    /// Hash of every decoder input and decision in the trial.
    pub decoder_input_digest: u64,
}

/// Every signal of one block, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrace {
    pub x1: Vec<Option<Symbol>>,
    /// Relay codeword the source assumed when inserting.
    pub source_x2: Vec<Symbol>,
    /// Relay codeword actually transmitted.
    pub relay_x2: Vec<Symbol>,
    pub y1: Vec<Option<Symbol>>,
    pub y1r: Vec<Symbol>,
    pub y2: Vec<Symbol>,
    pub relay_decision: Option<Result<u64, DecodeError>>,
    pub dest_decision: Option<Result<u64, DecodeError>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub k: usize,
    pub rate: f64,
    pub p_u: f64,
    pub n_blocks: usize,
    pub n_trials: usize,
    pub message_bits: u32,
    pub relay_err: f64,
    pub dest_err: f64,
    pub e2e_err: f64,
    pub shortfall_freq: f64,
    pub zero_fraction_mean: f64,
    /// Mean of `|zero_fraction - (1 - P_U)|` over transmitted relay codewords.
    pub zero_fraction_abs_dev: f64,
    pub hd_violations: u64,
    pub effective_rate: f64,
    /// `I(X₂;Y₂)` at the configured `P_U`.
    pub relay_destination_mi: f64,
    pub decoder_input_digest: u64,
}

enum Books {
    Explicit { source: Codebook, relay: Codebook },
    Ensemble,
}

/// Everything a trial needs that is fixed for the whole run.
pub struct Experiment<'a> {
    cfg: &'a CodingConfig,
    scheme: &'a Scheme,
    relay_model: RelayInputModel,
    relay_test: TypicalityTest,
    dest_test: TypicalityTest,
    books: Books,
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn word(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn symbols(&mut self, s: &[Symbol]) {
        self.word(s.len() as u64);
        for &v in s {
            self.word(v as u64);
        }
    }

    fn decision(&mut self, d: &Result<u64, DecodeError>) {
        match d {
            Ok(m) => self.word(*m),
            Err(_) => self.word(u64::MAX),
        }
    }
}

impl<'a> Experiment<'a> {
    pub fn new(cfg: &'a CodingConfig, scheme: &'a Scheme) -> Result<Self, SimError> {
        cfg.validate()?;
        cfg.check_codebook_budget(cfg.engine)?;
        let relay_model = scheme.relay_model(cfg.p_u)?;
        let mixture = relay_model.mixture();
        let eps_r = cfg
            .typicality_eps
            .unwrap_or_else(|| TypicalityTest::default_eps(&scheme.source));
        let eps_d = cfg
            .typicality_eps
            .unwrap_or_else(|| TypicalityTest::default_eps(&mixture));
        let relay_test = TypicalityTest::new(&scheme.source, &scheme.channel1, eps_r)?;
        let dest_test = TypicalityTest::new(&mixture, &scheme.channel2, eps_d)?;
        let books = match cfg.engine {
            Engine::Explicit => {
                let (source, relay) = generate_codebooks(cfg, &scheme.source, &relay_model)?;
                Books::Explicit { source, relay }
            }
            Engine::Ensemble => {
                if EnsembleDecoder::new(&relay_test, 0).is_none()
                    || EnsembleDecoder::new(&dest_test, 0).is_none()
                {
                    return Err(SimError::EnsembleNeedsBinary);
                }
                Books::Ensemble
            }
        };
        Ok(Self {
            cfg,
            scheme,
            relay_model,
            relay_test,
            dest_test,
            books,
        })
    }

    fn source_cw(&self, trial: u64, m: u64) -> Cow<'_, [Symbol]> {
        match &self.books {
            Books::Explicit { source, .. } => {
                Cow::Borrowed(source.codeword(m).expect("message in range"))
            }
            Books::Ensemble => Cow::Owned(source_codeword(
                self.cfg.seed,
                trial,
                m,
                self.cfg.source_codeword_len(),
                &self.scheme.source,
            )),
        }
    }

    fn relay_cw(&self, trial: u64, m: u64) -> Cow<'_, [Symbol]> {
        match &self.books {
            Books::Explicit { relay, .. } => {
                Cow::Borrowed(relay.codeword(m).expect("message in range"))
            }
            Books::Ensemble => Cow::Owned(relay_codeword(
                self.cfg.seed,
                trial,
                m,
                self.cfg.k,
                &self.relay_model,
            )),
        }
    }

    fn transmit<R: Rng>(
        channel: &ConditionalPmf,
        input: Symbol,
        rng: &mut R,
    ) -> Result<Symbol, SimError> {
        Ok(sample(channel.row(input)?, rng))
    }

    /// Runs one trial; with `keep_trace` every block's signals are returned.
    pub fn run_trial(
        &self,
        trial: u64,
        keep_trace: bool,
    ) -> Result<(TrialReport, Option<Vec<BlockTrace>>), SimError> {
        let cfg = self.cfg;
        let (k, n) = (cfg.k, cfg.n_blocks);
        let size = cfg.codebook_size();
        let len = cfg.source_codeword_len();
        let mut msg_rng = stream(cfg.seed, Domain::Messages, trial, 0);
        let messages: Vec<u64> = (0..n).map(|_| msg_rng.gen_range(0..size)).collect();

        let mut ens_relay = EnsembleDecoder::new(&self.relay_test, k);
        let mut ens_dest = EnsembleDecoder::new(&self.dest_test, k);
        let mut digest = Fnv::new();
        let mut report = TrialReport {
            relay_decoded_ok: Vec::with_capacity(n),
            dest_decoded_ok: Vec::with_capacity(n),
            end_to_end_ok: Vec::with_capacity(n),
            hd_violations: 0,
            zero_fraction: Vec::with_capacity(n),
            shortfall_case_count: 0,
            decoder_input_digest: 0,
        };
        let mut trace = keep_trace.then(Vec::new);
        let mut relay_estimates: Vec<Option<u64>> = Vec::with_capacity(n);

        for b in 0..=n {
            // Relay input: silent in block 0, otherwise its own estimate.
            let forwarded = if b == 0 { None } else { relay_estimates[b - 1] };
            let relay_x2: Vec<Symbol> = match forwarded {
                Some(m) => self.relay_cw(trial, m).into_owned(),
                None => vec![ZERO_SYMBOL; k],
            };
            let source_x2: Vec<Symbol> = if b == 0 {
                vec![ZERO_SYMBOL; k]
            } else {
                self.relay_cw(trial, messages[b - 1]).into_owned()
            };
            let x1 = if b < n {
                insert_source_symbols(&self.source_cw(trial, messages[b]), &source_x2)
            } else {
                vec![None; k]
            };
            report.hd_violations += x1
                .iter()
                .zip(&source_x2)
                .filter(|(a, &s)| a.is_some() && s != ZERO_SYMBOL)
                .count() as u64;

            // Source-relay hop. Noise is drawn for every slot so that both
            // relay modes consume the stream identically.
            let mut noise1 = stream(cfg.seed, Domain::Noise, trial, 2 * b as u64);
            let mut y1 = Vec::with_capacity(k);
            for i in 0..k {
                let out = Self::transmit(
                    &self.scheme.channel1,
                    x1[i].unwrap_or(ZERO_SYMBOL),
                    &mut noise1,
                )?;
                let listening = relay_x2[i] == ZERO_SYMBOL;
                y1.push(match cfg.relay_mode {
                    RelayMode::SymbolSwitching if !listening => None,
                    _ => Some(out),
                });
            }
            if cfg.relay_mode == RelayMode::SymbolSwitching {
                report.hd_violations += y1
                    .iter()
                    .zip(&relay_x2)
                    .filter(|(y, &s)| y.is_some() && s != ZERO_SYMBOL)
                    .count() as u64;
            }

            let mut relay_decision = None;
            let mut y1r = Vec::new();
            if b < n {
                let listen = relay_x2.iter().filter(|&&s| s == ZERO_SYMBOL).count();
                if listen < len {
                    report.shortfall_case_count += 1;
                }
                let keep = listen.min(len);
                y1r = relay_receive(cfg.relay_mode, &y1, &relay_x2, keep)?;
                let decision = match (&self.books, ens_relay.as_mut()) {
                    (Books::Explicit { source, .. }, _) => {
                        typical_decode_relay(&self.relay_test, &y1r, source, keep)
                    }
                    (Books::Ensemble, Some(dec)) => {
                        let sent = self.source_cw(trial, messages[b]);
                        let mut rng = stream(cfg.seed, Domain::Decoder, trial, 2 * b as u64);
                        dec.decode(&y1r, Some((messages[b], &sent[..keep])), size, &mut rng)
                    }
                    (Books::Ensemble, None) => return Err(SimError::EnsembleNeedsBinary),
                };
                digest.symbols(&y1r);
                digest.decision(&decision);
                report.relay_decoded_ok.push(decision == Ok(messages[b]));
                relay_estimates.push(decision.ok());
                relay_decision = Some(decision);
            }

            // Relay-destination hop, decoding sub-message b - 1.
            let mut dest_decision = None;
            let mut y2 = Vec::new();
            if b > 0 {
                if forwarded.is_some() {
                    let zeros = relay_x2.iter().filter(|&&s| s == ZERO_SYMBOL).count();
                    report.zero_fraction.push(zeros as f64 / k as f64);
                }
                let mut noise2 = stream(cfg.seed, Domain::Noise, trial, 2 * b as u64 + 1);
                y2 = relay_x2
                    .iter()
                    .map(|&s| Self::transmit(&self.scheme.channel2, s, &mut noise2))
                    .collect::<Result<_, _>>()?;
                let decision = match (&self.books, ens_dest.as_mut()) {
                    (Books::Explicit { relay, .. }, _) => {
                        typical_decode_destination(&self.dest_test, &y2, relay)
                    }
                    (Books::Ensemble, Some(dec)) => {
                        let mut rng = stream(cfg.seed, Domain::Decoder, trial, 2 * b as u64 + 1);
                        let sent = forwarded.map(|m| (m, relay_x2.as_slice()));
                        dec.decode(&y2, sent, size, &mut rng)
                    }
                    (Books::Ensemble, None) => return Err(SimError::EnsembleNeedsBinary),
                };
                digest.symbols(&y2);
                digest.decision(&decision);
                report
                    .dest_decoded_ok
                    .push(forwarded.map(|m| decision == Ok(m)));
                report.end_to_end_ok.push(decision == Ok(messages[b - 1]));
                dest_decision = Some(decision);
            }

            if let Some(t) = trace.as_mut() {
                t.push(BlockTrace {
                    x1,
                    source_x2,
                    relay_x2,
                    y1,
                    y1r,
                    y2,
                    relay_decision,
                    dest_decision,
                });
            }
        }
        report.decoder_input_digest = digest.0;
        Ok((report, trace))
    }
}

/// Runs `n_trials` independent trials in parallel and aggregates them.
/// Results depend only on the configuration and seed.
pub fn run_experiment(
    cfg: &CodingConfig,
    scheme: &Scheme,
    n_trials: usize,
) -> Result<ExperimentReport, SimError> {
    if n_trials == 0 {
        return Err(SimError::InvalidConfig(vec![
            "n_trials: must be a positive integer".into(),
        ]));
    }
    let exp = Experiment::new(cfg, scheme)?;
    let trials: Vec<TrialReport> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| exp.run_trial(t, false).map(|(r, _)| r))
        .collect::<Result<_, _>>()?;
    Ok(aggregate(cfg, scheme, &exp.relay_model, &trials)?)
}

fn aggregate(
    cfg: &CodingConfig,
    scheme: &Scheme,
    relay_model: &RelayInputModel,
    trials: &[TrialReport],
) -> Result<ExperimentReport, ProbError> {
    let n_msgs = (trials.len() * cfg.n_blocks) as f64;
    let count = |f: &dyn Fn(&TrialReport) -> usize| trials.iter().map(f).sum::<usize>() as f64;
    let relay_err = count(&|t| t.relay_decoded_ok.iter().filter(|ok| !**ok).count()) / n_msgs;
    let e2e_err = count(&|t| t.end_to_end_ok.iter().filter(|ok| !**ok).count()) / n_msgs;
    let forwarded = count(&|t| t.dest_decoded_ok.iter().flatten().count());
    let dest_fail = count(&|t| {
        t.dest_decoded_ok
            .iter()
            .flatten()
            .filter(|ok| !**ok)
            .count()
    });
    let zf: Vec<f64> = trials
        .iter()
        .flat_map(|t| t.zero_fraction.iter().copied())
        .collect();
    let (zero_fraction_mean, zero_fraction_abs_dev) = if zf.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let m = zf.len() as f64;
        (
            zf.iter().sum::<f64>() / m,
            zf.iter().map(|z| (z - (1.0 - cfg.p_u)).abs()).sum::<f64>() / m,
        )
    };
    let mut digest = Fnv::new();
    for t in trials {
        digest.word(t.decoder_input_digest);
    }
    Ok(ExperimentReport {
        k: cfg.k,
        rate: cfg.rate,
        p_u: cfg.p_u,
        n_blocks: cfg.n_blocks,
        n_trials: trials.len(),
        message_bits: cfg.message_bits(),
        relay_err,
        dest_err: if forwarded > 0.0 {
            dest_fail / forwarded
        } else {
            f64::NAN
        },
        e2e_err,
        shortfall_freq: count(&|t| t.shortfall_case_count as usize) / n_msgs,
        zero_fraction_mean,
        zero_fraction_abs_dev,
        hd_violations: trials.iter().map(|t| t.hd_violations).sum(),
        effective_rate: cfg.effective_rate(),
        relay_destination_mi: relay_mutual_information(relay_model, &scheme.channel2)?,
        decoder_input_digest: digest.0,
    })
}
