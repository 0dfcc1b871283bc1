//! Per-block signal construction: the source's inserter and the relay's
//! selector.

use serde::{Deserialize, Serialize};

use super::{Codebook, CodingConfig, SimError};
use crate::prob::{Symbol, ZERO_SYMBOL};

/// How the relay avoids hearing itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayMode {
    /// The relay listens only in symbol slots where it transmits zero.
    #[default]
    SymbolSwitching,
    /// The relay listens continuously and drops the slots where it
    /// transmitted.
    SimultaneousDiscard,
}

/// Channel inputs of one block. `None` in `x1` is a silent source slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockInputs {
    pub x1: Vec<Option<Symbol>>,
    pub x2: Vec<Symbol>,
}

/// Places `x1r` into the zero slots of `x2`, in order. When `x2` has fewer
/// zeros than `x1r` has symbols, the surplus is not sent.
pub fn insert_source_symbols(x1r: &[Symbol], x2: &[Symbol]) -> Vec<Option<Symbol>> {
    let mut next = x1r.iter();
    x2.iter()
        .map(|&s| {
            if s == ZERO_SYMBOL {
                next.next().copied()
            } else {
                None
            }
        })
        .collect()
}

/// Builds `(x1, x2)` for a block in which the relay forwards `w_prev` and the
/// source sends `w_cur`. `None` marks a silent node: the relay in the first
/// block and the source in the last.
pub fn encode_block(
    cfg: &CodingConfig,
    w_prev: Option<u64>,
    w_cur: Option<u64>,
    source: &Codebook,
    relay: &Codebook,
) -> Result<BlockInputs, SimError> {
    fn lookup(cb: &Codebook, w: u64) -> Result<&[Symbol], SimError> {
        cb.codeword(w).ok_or(SimError::MessageOutOfRange {
            message: w,
            size: cb.len() as u64,
        })
    }
    let x2 = match w_prev {
        Some(w) => lookup(relay, w)?.to_vec(),
        None => vec![ZERO_SYMBOL; cfg.k],
    };
    let x1 = match w_cur {
        Some(w) => insert_source_symbols(lookup(source, w)?, &x2),
        None => vec![None; cfg.k],
    };
    Ok(BlockInputs { x1, x2 })
}

/// Selector: keeps the received symbols from slots where the relay's own
/// input was zero, at most `keep` of them.
///
/// In switching mode the relay has no observation in its transmit slots, so
/// `y1_raw` holds `None` there; in discard mode every slot is observed.
pub fn relay_receive(
    mode: RelayMode,
    y1_raw: &[Option<Symbol>],
    x2: &[Symbol],
    keep: usize,
) -> Result<Vec<Symbol>, SimError> {
    if y1_raw.len() != x2.len() {
        return Err(SimError::LengthMismatch {
            expected: x2.len(),
            got: y1_raw.len(),
        });
    }
    let mut out = Vec::with_capacity(keep.min(x2.len()));
    for (i, (&y, &x)) in y1_raw.iter().zip(x2).enumerate() {
        if out.len() == keep {
            break;
        }
        match (x == ZERO_SYMBOL, y) {
            (true, Some(v)) => out.push(v),
            (true, None) => return Err(SimError::MissingObservation(i)),
            (false, Some(_)) if mode == RelayMode::SymbolSwitching => {
                return Err(SimError::MissingObservation(i));
            }
            (false, _) => {}
        }
    }
    Ok(out)
}
