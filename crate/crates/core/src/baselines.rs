//! Conventional (codeword-by-codeword) decode-and-forward relaying.

use serde::{Deserialize, Serialize};

/// Best single-hop rates of the two links in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkRates {
    pub c1: f64,
    pub c2: f64,
}

impl LinkRates {
    pub fn new(c1: f64, c2: f64) -> Self {
        debug_assert!(c1 >= 0.0 && c2 >= 0.0);
        Self { c1, c2 }
    }

    /// Fraction of time the relay transmits when both hops carry the same
    /// number of bits: `(1 - p)·c1 = p·c2`.
    pub fn balanced_split(&self) -> f64 {
        if self.c1 + self.c2 > 0.0 {
            self.c1 / (self.c1 + self.c2)
        } else {
            0.0
        }
    }
}

/// `c1·c2 / (c1 + c2)`, or zero when either link is useless.
pub fn conventional_rate(rates: LinkRates) -> f64 {
    let LinkRates { c1, c2 } = rates;
    if c1 <= 0.0 || c2 <= 0.0 {
        0.0
    } else {
        c1 * c2 / (c1 + c2)
    }
}
