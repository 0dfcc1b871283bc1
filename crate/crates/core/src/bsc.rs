//! Relay channel whose two hops are binary symmetric channels.
//!
//! The relay transmits symbol `1` whenever it is active, so the
//! relay-destination output is Bernoulli with parameter
//! `A = ε₂(1 - 2P_U) + P_U` and
//!
//! ```text
//! r1(P_U) = (1 - H(ε₁))(1 - P_U)
//! r2(P_U) = H(A) - H(ε₂)
//! ```

use serde::{Deserialize, Serialize};

use crate::baselines::{conventional_rate, LinkRates};
use crate::prob::{h2, ProbError};
use crate::solver::{solve_capacity, CapacitySolution, RateCurves, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BscPair {
    p_eps1: f64,
    p_eps2: f64,
}

impl BscPair {
    /// Both crossover probabilities must lie in `[0, 0.5]`.
    pub fn new(p_eps1: f64, p_eps2: f64) -> Result<Self, ProbError> {
        for (name, value) in [("p_eps1", p_eps1), ("p_eps2", p_eps2)] {
            if !(0.0..=0.5).contains(&value) {
                return Err(ProbError::Domain { name, value });
            }
        }
        Ok(Self { p_eps1, p_eps2 })
    }

    pub fn p_eps1(&self) -> f64 {
        self.p_eps1
    }

    pub fn p_eps2(&self) -> f64 {
        self.p_eps2
    }

    pub fn link_rates(&self) -> LinkRates {
        LinkRates::new(1.0 - h2(self.p_eps1), 1.0 - h2(self.p_eps2))
    }
}

/// Probability that the destination observes a `1`.
pub fn bsc_mixture_param(p_eps2: f64, p_u: f64) -> Result<f64, ProbError> {
    if !(0.0..=1.0).contains(&p_eps2) {
        return Err(ProbError::Domain {
            name: "p_eps2",
            value: p_eps2,
        });
    }
    if !(0.0..=1.0).contains(&p_u) {
        return Err(ProbError::Domain {
            name: "p_u",
            value: p_u,
        });
    }
    Ok(p_eps2 * (1.0 - 2.0 * p_u) + p_u)
}

pub fn bsc_rate_curves(pair: BscPair) -> RateCurves<'static> {
    let c1 = 1.0 - h2(pair.p_eps1);
    let e2 = pair.p_eps2;
    let h_e2 = h2(e2);
    RateCurves::new(
        move |p| c1 * (1.0 - p),
        move |p| (h2(e2 * (1.0 - 2.0 * p) + p) - h_e2).max(0.0),
    )
}

pub fn bsc_capacity(pair: BscPair) -> CapacitySolution {
    solve_capacity(&bsc_rate_curves(pair), &SolverOptions::default())
}

/// Crossing point of the two BSC curves on `[0, ½]` by Newton's method from
/// `0.25`, falling back to bisection when an iterate leaves the bracket.
/// Returns `None` when the curves do not meet below `½`.
pub fn bsc_crossing(pair: BscPair) -> Option<f64> {
    let c1 = 1.0 - h2(pair.p_eps1);
    let e2 = pair.p_eps2;
    let h_e2 = h2(e2);
    let slope_a = 1.0 - 2.0 * e2;
    let g = |p: f64| c1 * (1.0 - p) - (h2(e2 * (1.0 - 2.0 * p) + p) - h_e2);
    let dg = |p: f64| {
        let a = e2 * (1.0 - 2.0 * p) + p;
        -c1 - slope_a * ((1.0 - a) / a).log2()
    };
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    if g(lo) <= 0.0 {
        return Some(0.0);
    }
    if g(hi) > 0.0 {
        return None;
    }
    let mut p = 0.25;
    for _ in 0..200 {
        let v = g(p);
        if v == 0.0 {
            return Some(p);
        }
        if v > 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let d = dg(p);
        let newton = p - v / d;
        let next = if d.is_finite() && d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - p).abs() <= 1e-15 || hi - lo <= 1e-15 {
            return Some(next);
        }
        p = next;
    }
    Some(p)
}

pub fn bsc_conventional_rate(pair: BscPair) -> f64 {
    conventional_rate(pair.link_rates())
}
