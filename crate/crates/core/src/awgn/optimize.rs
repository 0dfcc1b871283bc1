//! Search for the relay constellation that maximizes the relay-destination
//! rate at a given activity probability.
//!
//! Candidates are lattice Gaussians with a gap around zero: points at
//! `m·Δ` for `m ≥ m_min`, with per-side mass proportional to
//! `exp(-c·(m² - m_min²))`. For each `(m_min, c)` the spacing `Δ` is fixed by
//! the power constraint, so the search is one-dimensional in `c` for each
//! gap. The best candidate is then refined by projected ascent on the
//! individual masses with the locations held fixed.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{awgn_relay_rate, AwgnError, MassPointDistribution};
use crate::quadrature::{composite_kronrod_nodes, QuadratureSpec};

/// Which second moment is held to `P₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerConvention {
    /// The active-symbol distribution has power `P₂`.
    #[default]
    ActiveSymbol,
    /// The relay's overall input, silence included, has power `P₂`; the
    /// active constellation then carries `P₂ / P_U`.
    AverageSymbol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    /// Candidate values of the smallest lattice index `m_min`.
    pub gap_multipliers: Vec<u32>,
    /// Number of Gaussian-shaped starting shapes, spread over the gaps.
    pub restarts: usize,
    /// Range of `ln c` explored by the shape search.
    pub log_c_range: (f64, f64),
    /// Golden-section stopping width in `ln c`.
    pub refine_tol: f64,
    pub polish: bool,
    /// Stop polishing once an accepted step gains less than this (bits).
    pub improvement_tol: f64,
    pub max_polish_steps: usize,
    /// Largest discarded two-sided tail mass when truncating the lattice.
    pub tail_mass: f64,
    pub max_points: usize,
    pub power: PowerConvention,
    pub quad: QuadratureSpec,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            gap_multipliers: vec![1, 2, 3],
            restarts: 50,
            log_c_range: (1e-3f64.ln(), 5f64.ln()),
            refine_tol: 1e-4,
            polish: true,
            improvement_tol: 1e-7,
            max_polish_steps: 200,
            tail_mass: 1e-9,
            max_points: 2000,
            power: PowerConvention::ActiveSymbol,
            quad: QuadratureSpec::default(),
        }
    }
}

impl SearchSpec {
    fn validate(&self) -> Result<(), AwgnError> {
        let bad = |msg: &str| Err(AwgnError::InfeasibleSearch(msg.to_string()));
        if self.gap_multipliers.is_empty() || self.gap_multipliers.contains(&0) {
            return bad("gap multipliers must be a non-empty list of positive integers");
        }
        if self.restarts == 0 {
            return bad("at least one restart is required");
        }
        let (lo, hi) = self.log_c_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad("shape range must be a finite, non-empty interval");
        }
        if !(self.tail_mass > 0.0 && self.tail_mass < 1.0) {
            return bad("tail mass must lie in (0, 1)");
        }
        if !(self.refine_tol > 0.0) || self.max_points == 0 {
            return bad("refinement tolerance and point budget must be positive");
        }
        Ok(())
    }

    fn active_power(&self, snr2: f64, p_u: f64) -> f64 {
        match self.power {
            PowerConvention::ActiveSymbol => snr2,
            PowerConvention::AverageSymbol => snr2 / p_u,
        }
    }
}

/// Lattice-Gaussian constellation with smallest index `m_min`, shape `c` and
/// two-sided power `power`.
pub(crate) fn lattice_gaussian(
    m_min: u32,
    c: f64,
    power: f64,
    tail_mass: f64,
    max_points: usize,
) -> Result<MassPointDistribution, AwgnError> {
    let m0 = m_min as f64;
    let mut weights = Vec::new();
    let mut total = 0.0;
    loop {
        let m = m0 + weights.len() as f64;
        let w = (-c * (m * m - m0 * m0)).exp();
        weights.push(w);
        total += w;
        let next_m = m + 1.0;
        let next = (-c * (next_m * next_m - m0 * m0)).exp();
        let ratio = (-c * (2.0 * next_m + 1.0)).exp();
        if next / (1.0 - ratio) < tail_mass * total {
            break;
        }
        if weights.len() >= max_points {
            return Err(AwgnError::InfeasibleSearch(format!(
                "shape c = {c:e} needs more than {max_points} points"
            )));
        }
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / (2.0 * total)).collect();
    let second: f64 = probs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let m = m0 + k as f64;
            p * m * m
        })
        .sum();
    let delta = (power / (2.0 * second)).sqrt();
    if !(delta > 0.0 && delta <= 4.0 * power.sqrt()) {
        return Err(AwgnError::InfeasibleSearch(format!(
            "no lattice spacing meets power {power}"
        )));
    }
    let locations = (0..probs.len()).map(|k| (m0 + k as f64) * delta).collect();
    MassPointDistribution::new(locations, probs)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Best constellation found and its relay-destination rate.
pub(crate) fn search(
    snr2: f64,
    p_u: f64,
    spec: &SearchSpec,
) -> Result<(MassPointDistribution, f64), AwgnError> {
    if !(snr2 > 0.0 && snr2.is_finite()) {
        return Err(AwgnError::Domain {
            name: "snr2",
            value: snr2,
        });
    }
    if !(p_u > 0.0 && p_u <= 1.0) {
        return Err(AwgnError::Domain {
            name: "p_u",
            value: p_u,
        });
    }
    spec.validate()?;
    let power = spec.active_power(snr2, p_u);
    let rate_of = |m_min: u32, log_c: f64| -> Result<(MassPointDistribution, f64), AwgnError> {
        let d = lattice_gaussian(m_min, log_c.exp(), power, spec.tail_mass, spec.max_points)?;
        let r = awgn_relay_rate(&d, p_u, 1.0, &spec.quad)?;
        Ok((d, r))
    };

    let gaps = &spec.gap_multipliers;
    let per_gap = spec.restarts.div_ceil(gaps.len()).max(2);
    let (lo, hi) = spec.log_c_range;
    let grid: Vec<f64> = (0..per_gap)
        .map(|i| lo + (hi - lo) * i as f64 / (per_gap - 1) as f64)
        .collect();
    let starts: Vec<(u32, usize)> = gaps
        .iter()
        .flat_map(|&g| (0..per_gap).map(move |i| (g, i)))
        .collect();
    let coarse: Vec<f64> = starts
        .par_iter()
        .map(|&(g, i)| rate_of(g, grid[i]).map(|(_, r)| r))
        .collect::<Result<_, _>>()?;

    let refined: Vec<(u32, f64, f64)> = gaps
        .par_iter()
        .enumerate()
        .map(|(gi, &g)| {
            let row = &coarse[gi * per_gap..(gi + 1) * per_gap];
            let best = (0..per_gap)
                .max_by(|&a, &b| row[a].total_cmp(&row[b]))
                .expect("non-empty grid");
            let mut a = grid[best.saturating_sub(1)];
            let mut b = grid[(best + 1).min(per_gap - 1)];
            let mut x1 = b - INV_PHI * (b - a);
            let mut x2 = a + INV_PHI * (b - a);
            let mut f1 = rate_of(g, x1)?.1;
            let mut f2 = rate_of(g, x2)?.1;
            while b - a > spec.refine_tol {
                if f1 >= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - INV_PHI * (b - a);
                    f1 = rate_of(g, x1)?.1;
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + INV_PHI * (b - a);
                    f2 = rate_of(g, x2)?.1;
                }
            }
            let candidates = [(grid[best], row[best]), (x1, f1), (x2, f2)];
            let (log_c, rate) = candidates
                .into_iter()
                .max_by(|p, q| p.1.total_cmp(&q.1))
                .expect("three candidates");
            Ok((g, log_c, rate))
        })
        .collect::<Result<_, AwgnError>>()?;

    let &(g, log_c, _) = refined
        .iter()
        .max_by(|p, q| p.2.total_cmp(&q.2))
        .expect("at least one gap");
    let (dist, rate) = rate_of(g, log_c)?;
    if spec.polish {
        polish(dist, rate, p_u, power, spec)
    } else {
        Ok((dist, rate))
    }
}

/// Constellation maximizing the relay-destination rate at activity `p_u`
/// over the lattice-Gaussian family, refined by projected ascent.
pub fn optimize_mass_points(
    snr2: f64,
    p_u: f64,
    search_spec: &SearchSpec,
) -> Result<MassPointDistribution, AwgnError> {
    Ok(search(snr2, p_u, search_spec)?.0)
}

/// Gradient of the relay-destination rate with respect to each per-side
/// mass, up to a common additive constant.
fn rate_gradient(dist: &MassPointDistribution, p_u: f64) -> Vec<f64> {
    let xs = dist.locations();
    let x_max = xs[xs.len() - 1];
    let (a, b) = (-x_max - 9.0, x_max + 9.0);
    let nodes = composite_kronrod_nodes(a, b, ((b - a) * 2.0).ceil() as usize);
    let norm = 1.0 / (2.0 * PI).sqrt();
    let phi = |d: f64| norm * (-0.5 * d * d).exp();
    let log_f: Vec<f64> = nodes
        .iter()
        .map(|&(y, _)| {
            let active: f64 = dist.two_sided().map(|(x, p)| p * phi(y - x)).sum();
            let f = p_u * active + (1.0 - p_u) * phi(y);
            if f > 0.0 {
                f.log2()
            } else {
                0.0
            }
        })
        .collect();
    xs.iter()
        .map(|&x| {
            let s: f64 = nodes
                .iter()
                .zip(&log_f)
                .map(|(&(y, w), lf)| w * (phi(y - x) + phi(y + x)) * lf)
                .sum();
            -p_u * s - 2.0 * p_u / LN_2
        })
        .collect()
}

/// Projection of `q` onto the affine set `{Σp = mass, Σ p·x² = second}`
/// restricted to the coordinates marked `free`; the others are set to zero.
fn affine_projection(
    q: &[f64],
    x2: &[f64],
    mass: f64,
    second: f64,
    free: &[bool],
) -> Option<Vec<f64>> {
    let (mut n, mut s1, mut s2, mut q0, mut q1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in (0..q.len()).filter(|&i| free[i]) {
        n += 1.0;
        s1 += x2[i];
        s2 += x2[i] * x2[i];
        q0 += q[i];
        q1 += q[i] * x2[i];
    }
    let det = n * s2 - s1 * s1;
    if !(det.abs() > 1e-12 * (n * s2).max(1.0)) {
        return None;
    }
    let r0 = q0 - mass;
    let r1 = q1 - second;
    let l1 = (s2 * r0 - s1 * r1) / det;
    let l2 = (n * r1 - s1 * r0) / det;
    Some(
        (0..q.len())
            .map(|i| if free[i] { q[i] - l1 - l2 * x2[i] } else { 0.0 })
            .collect(),
    )
}

/// Projection of `q` onto `{p ≥ 0, Σp = mass, Σ p·x² = second}` by repeated
/// affine projection on the free coordinates, clamping the ones that go
/// negative.
fn project(q: &[f64], x2: &[f64], mass: f64, second: f64) -> Option<Vec<f64>> {
    let mut free = vec![true; q.len()];
    for _ in 0..=q.len() {
        let p = affine_projection(q, x2, mass, second, &free)?;
        if p.iter().all(|&v| v >= 0.0) {
            return Some(p);
        }
        for (f, v) in free.iter_mut().zip(&p) {
            if *v < 0.0 {
                *f = false;
            }
        }
    }
    None
}

fn polish(
    mut dist: MassPointDistribution,
    mut rate: f64,
    p_u: f64,
    power: f64,
    spec: &SearchSpec,
) -> Result<(MassPointDistribution, f64), AwgnError> {
    let xs = dist.locations().to_vec();
    let x2: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let mut step = f64::NAN;
    for _ in 0..spec.max_polish_steps {
        let grad = rate_gradient(&dist, p_u);
        let p = dist.side_probs().to_vec();
        // Remove the components along the two constraint normals so the
        // step size is set by the feasible direction.
        let all = vec![true; grad.len()];
        let tangent = affine_projection(&grad, &x2, 0.0, 0.0, &all).unwrap_or_else(|| grad.clone());
        let scale = tangent.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(scale > 0.0) {
            break;
        }
        if step.is_nan() {
            step = 0.05 * p.iter().cloned().fold(0.0, f64::max) / scale;
        }
        let mut accepted = None;
        for _ in 0..40 {
            let q: Vec<f64> = p.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            if let Some(cand) = project(&q, &x2, 0.5, 0.5 * power) {
                let total = 2.0 * cand.iter().sum::<f64>();
                let cand: Vec<f64> = cand.iter().map(|v| v / total).collect();
                if let Ok(d) = MassPointDistribution::new(xs.clone(), cand) {
                    let r = awgn_relay_rate(&d, p_u, 1.0, &spec.quad)?;
                    if r > rate {
                        accepted = Some((d, r));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some((d, r)) = accepted else { break };
        let gain = r - rate;
        dist = d;
        rate = r;
        step *= 2.0;
        if gain < spec.improvement_tol {
            break;
        }
    }
    Ok((dist, rate))
}
