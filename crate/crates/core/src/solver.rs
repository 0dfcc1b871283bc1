//! Max-min solver over the relay's transmit probability `P_U`.
//!
//! The capacity is `max_{P_U} min{r1(P_U), r2(P_U)}` where `r1` is the
//! non-increasing source-relay curve and `r2` the concave relay-destination
//! curve. The optimum is either the first crossing of the two curves or the
//! maximizer of `r2`, whichever comes first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

type Curve<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;

/// The two rate curves, both in bits per channel use, as functions of `P_U`.
pub struct RateCurves<'a> {
    source_relay: Curve<'a>,
    relay_destination: Curve<'a>,
}

impl<'a> RateCurves<'a> {
    pub fn new<F, G>(source_relay: F, relay_destination: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'a,
        G: Fn(f64) -> f64 + Send + Sync + 'a,
    {
        Self {
            source_relay: Box::new(source_relay),
            relay_destination: Box::new(relay_destination),
        }
    }

    pub fn r1(&self, p_u: f64) -> f64 {
        (self.source_relay)(p_u)
    }

    pub fn r2(&self, p_u: f64) -> f64 {
        (self.relay_destination)(p_u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The two curves meet before `r2` peaks.
    Crossing,
    /// `r2` peaks while `r1` is still above it.
    InteriorMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitySolution {
    pub p_u_star: f64,
    pub capacity: f64,
    pub regime: Regime,
    pub r1_at_opt: f64,
    pub r2_at_opt: f64,
    /// Midpoint-concavity probes of `r2` that failed by more than the value
    /// tolerance. Zero for well-posed instances.
    pub concavity_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bracket width at which root and maximum searches stop.
    pub arg_tol: f64,
    /// Tolerance on rate values.
    pub value_tol: f64,
    /// Grid step of the upward scan that brackets the smallest crossing.
    pub bracket_step: f64,
    /// Number of midpoint concavity probes on `r2`; zero disables them.
    pub concavity_probes: usize,
    /// Finish the bisection with a safeguarded secant step.
    pub newton_polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            arg_tol: 1e-9,
            value_tol: 1e-8,
            bracket_step: 1e-3,
            concavity_probes: 64,
            newton_polish: true,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SolverError {
    #[error("r1 - r2 does not change sign on [0, 1]")]
    NoCrossing,
}

/// Smallest `P_U` in `[0, 1]` where `r1(P_U) = r2(P_U)`.
pub fn solve_crossing(curves: &RateCurves<'_>, opts: &SolverOptions) -> Result<f64, SolverError> {
    let gap = |p: f64| curves.r1(p) - curves.r2(p);
    let g0 = gap(0.0);
    if g0 <= 0.0 {
        return Ok(0.0);
    }
    let steps = (1.0 / opts.bracket_step).ceil().max(1.0) as usize;
    let mut lo = 0.0;
    let mut g_lo = g0;
    let mut bracket = None;
    for i in 1..=steps {
        let p = i as f64 / steps as f64;
        let g = gap(p);
        if g <= 0.0 {
            bracket = Some((p, g));
            break;
        }
        lo = p;
        g_lo = g;
    }
    let (mut hi, mut g_hi) = bracket.ok_or(SolverError::NoCrossing)?;
    if g_hi == 0.0 {
        // Exact hit on the grid; the previous grid point was strictly positive.
        return Ok(hi);
    }
    for _ in 0..200 {
        if hi - lo <= opts.arg_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g = gap(mid);
        if g > 0.0 {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }
    let mut best = if g_lo.abs() <= g_hi.abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    if opts.newton_polish && g_hi < 0.0 {
        let p = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        if p > lo && p < hi {
            let g = gap(p);
            if g.abs() < best.1.abs() {
                best = (p, g);
            }
        }
    }
    Ok(best.0)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizer of `r2` on `[0, 1]` by golden-section search, with the two
/// endpoints as fallback candidates.
pub fn solve_interior_max<F: Fn(f64) -> f64 + ?Sized>(r2: &F, tol: f64) -> f64 {
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = r2(c);
    let mut fd = r2(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = r2(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = r2(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, r2(mid));
    for p in [0.0, 1.0] {
        let v = r2(p);
        if v > best.1 {
            best = (p, v);
        }
    }
    best.0
}

/// Central-difference slope with step `1e-6·max(1, |p|)`, one-sided at the
/// ends of `[0, 1]`.
pub fn slope<F: Fn(f64) -> f64 + ?Sized>(f: &F, p: f64) -> f64 {
    let h = 1e-6 * p.abs().max(1.0);
    let lo = (p - h).max(0.0);
    let hi = (p + h).min(1.0);
    (f(hi) - f(lo)) / (hi - lo)
}

/// Counts interior points of an even grid of `probes + 1` cells where `r2`
/// falls below the chord of its neighbours by more than `tol`.
pub fn probe_concavity<F: Fn(f64) -> f64 + ?Sized>(r2: &F, probes: usize, tol: f64) -> usize {
    if probes == 0 {
        return 0;
    }
    let n = probes + 1;
    let values: Vec<f64> = (0..=n).map(|i| r2(i as f64 / n as f64)).collect();
    values
        .windows(3)
        .filter(|w| w[1] < 0.5 * (w[0] + w[2]) - tol)
        .count()
}

/// Solves the max-min problem, choosing between the crossing point and the
/// maximizer of `r2`.
pub fn solve_capacity(curves: &RateCurves<'_>, opts: &SolverOptions) -> CapacitySolution {
    let r2 = |p: f64| curves.r2(p);
    let p_max = solve_interior_max(&r2, opts.arg_tol);
    let concavity_violations = probe_concavity(&r2, opts.concavity_probes, opts.value_tol);
    let (p_u_star, regime) = match solve_crossing(curves, opts) {
        Ok(p_cross) if p_cross <= p_max + opts.arg_tol => (p_cross, Regime::Crossing),
        _ => (p_max, Regime::InteriorMax),
    };
    let r1_at_opt = curves.r1(p_u_star);
    let r2_at_opt = curves.r2(p_u_star);
    CapacitySolution {
        p_u_star,
        capacity: r1_at_opt.min(r2_at_opt),
        regime,
        r1_at_opt,
        r2_at_opt,
        concavity_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::h2;

    #[test]
    fn linear_crossing() {
        let c = RateCurves::new(|p| 1.0 - p, |p| p);
        let p = solve_crossing(&c, &SolverOptions::default()).unwrap();
        assert!((p - 0.5).abs() < 1e-9);
        let s = solve_capacity(&c, &SolverOptions::default());
        assert!((s.capacity - 0.5).abs() < 1e-9);
        assert!((s.p_u_star - 0.5).abs() < 1e-9);
        assert_eq!(s.regime, Regime::Crossing);
    }

    #[test]
    fn error_free_bsc_crossing() {
        let c = RateCurves::new(|p| 1.0 - p, h2);
        let p = solve_crossing(&c, &SolverOptions::default()).unwrap();
        assert!((p - 0.22709).abs() < 1e-5);
        assert!((1.0 - p - h2(p)).abs() < 1e-8);
    }

    #[test]
    fn crossing_picks_smaller_root() {
        // r2 - r1 rises above zero twice on [0, 1]; the first root is 0.2.
        let c = RateCurves::new(|_| 0.16, |p| p * (1.0 - p));
        let p = solve_crossing(&c, &SolverOptions::default()).unwrap();
        assert!((p - 0.2).abs() < 1e-8, "{p}");
    }

    #[test]
    fn no_crossing_is_reported() {
        let c = RateCurves::new(|_| 2.0, |p| p);
        assert_eq!(
            solve_crossing(&c, &SolverOptions::default()),
            Err(SolverError::NoCrossing)
        );
    }

    #[test]
    fn useless_source_link_crosses_at_zero() {
        let c = RateCurves::new(|_| 0.0, |p| p);
        assert_eq!(solve_crossing(&c, &SolverOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn interior_max_examples() {
        let p = solve_interior_max(&|p: f64| p * (1.0 - p), 1e-9);
        assert!((p - 0.5).abs() < 1e-8);
        assert!(slope(&|p: f64| p * (1.0 - p), p).abs() < 1e-8);
        // BSC relay-destination curve peaks at one half
        let e2 = 0.1;
        let r2 = move |p: f64| h2(e2 * (1.0 - 2.0 * p) + p) - h2(e2);
        assert!((solve_interior_max(&r2, 1e-9) - 0.5).abs() < 1e-7);
        // increasing curve: boundary maximum
        let inc = |p: f64| (1.0 + 3.0 * p).ln();
        assert!((solve_interior_max(&inc, 1e-9) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn strong_source_link_gives_interior_max() {
        let c = RateCurves::new(|p| 10.0 * (1.0 - p), h2);
        let s = solve_capacity(&c, &SolverOptions::default());
        assert_eq!(s.regime, Regime::InteriorMax);
        assert!((s.p_u_star - 0.5).abs() < 1e-7);
        assert!((s.capacity - 1.0).abs() < 1e-12);
        assert!(s.r2_at_opt <= s.r1_at_opt);
    }

    #[test]
    fn concavity_probe_flags_convex_curve() {
        assert_eq!(probe_concavity(&|p: f64| p * (1.0 - p), 32, 1e-12), 0);
        assert!(probe_concavity(&|p: f64| p * p, 32, 1e-12) > 0);
        assert_eq!(probe_concavity(&|p: f64| p * p, 0, 1e-12), 0);
    }

    #[test]
    fn degrading_r2_never_raises_capacity() {
        let opts = SolverOptions::default();
        let mut last = f64::INFINITY;
        for scale in [1.0, 0.9, 0.7, 0.5, 0.2, 0.0] {
            let c = RateCurves::new(|p| 0.8 * (1.0 - p), move |p| scale * h2(p));
            let s = solve_capacity(&c, &opts);
            assert!(s.capacity <= last + 1e-9);
            last = s.capacity;
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn grid_oracle(c: &RateCurves<'_>) -> f64 {
            (0..=100_000)
                .map(|i| {
                    let p = i as f64 * 1e-5;
                    c.r1(p).min(c.r2(p))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn matches_grid_search(
                c1 in 0.05f64..3.0,
                a in 0.1f64..3.0,
                peak in 0.05f64..0.95,
                e2 in 0.0f64..0.45,
            ) {
                // concave r2 with r2(0) = 0: a scaled concave parabola or a BSC curve
                let para = RateCurves::new(
                    move |p| c1 * (1.0 - p),
                    move |p| a * p * (2.0 * peak - p),
                );
                let bsc = RateCurves::new(
                    move |p| c1 * (1.0 - p),
                    move |p| h2(e2 * (1.0 - 2.0 * p) + p) - h2(e2),
                );
                for curves in [para, bsc] {
                    let s = solve_capacity(&curves, &SolverOptions::default());
                    let oracle = grid_oracle(&curves);
                    prop_assert!((s.capacity - oracle).abs() < 1e-5,
                        "solver {} oracle {}", s.capacity, oracle);
                    prop_assert_eq!(s.concavity_violations, 0);
                }
            }
        }
    }
}
