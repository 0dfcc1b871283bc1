//! Relay channel whose two hops are real AWGN channels.
//!
//! The relay either stays silent (transmits zero) or draws from a discrete,
//! zero-symmetric constellation with a gap around zero. The destination then
//! sees a Gaussian mixture, and the relay-destination rate is that mixture's
//! differential entropy minus the noise entropy.
//!
//! All rates are in bits per channel use and all SNRs are linear.

mod fixtures;
mod optimize;

pub use fixtures::{published_distribution, PublishedSet};
pub use optimize::{optimize_mass_points, PowerConvention, SearchSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{conventional_rate, LinkRates};
use crate::prob::{h2, ProbError};
use crate::quadrature::{
    gaussian_entropy, gaussian_mixture_entropy, mixture_entropy, GaussianComponent, QuadratureSpec,
};
use crate::solver::{
    solve_capacity, solve_crossing, CapacitySolution, RateCurves, Regime, SolverError,
    SolverOptions,
};

#[derive(Debug, Error)]
pub enum AwgnError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("{name} = {value} must be positive and finite")]
    Domain { name: &'static str, value: f64 },
    #[error("invalid mass-point distribution: {0}")]
    InvalidDistribution(String),
    #[error("search is infeasible: {0}")]
    InfeasibleSearch(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, AwgnError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(AwgnError::Domain { name, value })
    }
}

/// Link SNRs (linear) and the relay-destination noise standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AwgnPair {
    snr1: f64,
    snr2: f64,
    sigma2: f64,
}

impl AwgnPair {
    pub fn new(snr1: f64, snr2: f64) -> Result<Self, AwgnError> {
        Self::with_sigma(snr1, snr2, 1.0)
    }

    pub fn with_sigma(snr1: f64, snr2: f64, sigma2: f64) -> Result<Self, AwgnError> {
        Ok(Self {
            snr1: positive("snr1", snr1)?,
            snr2: positive("snr2", snr2)?,
            sigma2: positive("sigma2", sigma2)?,
        })
    }

    pub fn from_db(snr1_db: f64, snr2_db: f64) -> Result<Self, AwgnError> {
        Self::new(db_to_linear(snr1_db), db_to_linear(snr2_db))
    }

    pub fn snr1(&self) -> f64 {
        self.snr1
    }

    pub fn snr2(&self) -> f64 {
        self.snr2
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Relay transmit power `P₂ = snr2·σ₂²`.
    pub fn p2(&self) -> f64 {
        self.snr2 * self.sigma2 * self.sigma2
    }

    pub fn link_rates(&self) -> LinkRates {
        LinkRates::new(shannon(self.snr1), shannon(self.snr2))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn shannon(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Relay constellation: points at `±locations[k]`, each side carrying
/// `side_probs[k]`, so the two-sided masses sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassPointDistribution {
    locations: Vec<f64>,
    side_probs: Vec<f64>,
}

/// Two-sided mass must equal one within this tolerance.
pub const MASS_TOL: f64 = 1e-10;

impl MassPointDistribution {
    /// Validates strictly increasing positive locations and per-side masses
    /// whose two-sided total is one.
    pub fn new(locations: Vec<f64>, side_probs: Vec<f64>) -> Result<Self, AwgnError> {
        if locations.is_empty() {
            return Err(AwgnError::InvalidDistribution("no mass points".into()));
        }
        if locations.len() != side_probs.len() {
            return Err(AwgnError::InvalidDistribution(format!(
                "{} locations but {} probabilities",
                locations.len(),
                side_probs.len()
            )));
        }
        if !(locations[0] > 0.0) || locations.iter().any(|x| !x.is_finite()) {
            return Err(AwgnError::InvalidDistribution(
                "locations must be positive and finite".into(),
            ));
        }
        if locations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AwgnError::InvalidDistribution(
                "locations must be strictly increasing".into(),
            ));
        }
        if side_probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(AwgnError::InvalidDistribution(
                "probabilities must be non-negative".into(),
            ));
        }
        let total = 2.0 * side_probs.iter().sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(AwgnError::InvalidDistribution(format!(
                "two-sided mass is {total}, expected 1"
            )));
        }
        Ok(Self {
            locations,
            side_probs,
        })
    }

    /// Single antipodal pair at `±amplitude`.
    pub fn antipodal(amplitude: f64) -> Result<Self, AwgnError> {
        Self::new(vec![amplitude], vec![0.5])
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn side_probs(&self) -> &[f64] {
        &self.side_probs
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Second moment of the two-sided distribution.
    pub fn power(&self) -> f64 {
        2.0 * self
            .locations
            .iter()
            .zip(&self.side_probs)
            .map(|(x, p)| p * x * x)
            .sum::<f64>()
    }

    /// Multiplies every location by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            locations: self.locations.iter().map(|x| x * factor).collect(),
            side_probs: self.side_probs.clone(),
        }
    }

    /// Full symmetric support as `(location, probability)` pairs, negative
    /// side first.
    pub fn two_sided(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let neg = self
            .locations
            .iter()
            .zip(&self.side_probs)
            .rev()
            .map(|(&x, &p)| (-x, p));
        let pos = self
            .locations
            .iter()
            .zip(&self.side_probs)
            .map(|(&x, &p)| (x, p));
        neg.chain(pos)
    }
}

/// `½·log₂(1 + snr1)`, the best source-relay rate while the relay listens.
pub fn awgn_source_rate(snr1: f64) -> Result<f64, AwgnError> {
    if !(snr1 >= 0.0) || !snr1.is_finite() {
        return Err(AwgnError::Domain {
            name: "snr1",
            value: snr1,
        });
    }
    Ok(shannon(snr1))
}

/// `I(X₂;Y₂)` when the relay is silent with probability `1 - p_u` and
/// otherwise draws from `dist`.
pub fn awgn_relay_rate(
    dist: &MassPointDistribution,
    p_u: f64,
    sigma2: f64,
    quad: &QuadratureSpec,
) -> Result<f64, AwgnError> {
    if !(0.0..=1.0).contains(&p_u) {
        return Err(ProbError::Domain {
            name: "p_u",
            value: p_u,
        }
        .into());
    }
    positive("sigma2", sigma2)?;
    if p_u == 0.0 {
        return Ok(0.0);
    }
    let mut weights = Vec::with_capacity(2 * dist.len() + 1);
    let mut means = Vec::with_capacity(2 * dist.len() + 1);
    for (x, p) in dist.two_sided() {
        weights.push(p_u * p);
        means.push(x);
    }
    weights.push(1.0 - p_u);
    means.push(0.0);
    let h = gaussian_mixture_entropy(&weights, &means, sigma2, quad)?;
    Ok((h - gaussian_entropy(sigma2)).max(0.0))
}

/// Relay-destination rate when the active relay symbol is Gaussian with
/// power `P₂` instead of discrete.
pub fn gaussian_input_relay_rate(
    pair: &AwgnPair,
    p_u: f64,
    quad: &QuadratureSpec,
) -> Result<f64, AwgnError> {
    if !(0.0..=1.0).contains(&p_u) {
        return Err(ProbError::Domain {
            name: "p_u",
            value: p_u,
        }
        .into());
    }
    let s = pair.sigma2;
    if p_u == 1.0 {
        return Ok(shannon(pair.snr2));
    }
    let comps = [
        GaussianComponent {
            weight: p_u,
            mean: 0.0,
            sd: (pair.p2() + s * s).sqrt(),
        },
        GaussianComponent {
            weight: 1.0 - p_u,
            mean: 0.0,
            sd: s,
        },
    ];
    Ok((mixture_entropy(&comps, quad)? - gaussian_entropy(s)).max(0.0))
}

fn crossing_options() -> SolverOptions {
    SolverOptions {
        arg_tol: 1e-7,
        bracket_step: 0.05,
        concavity_probes: 0,
        ..SolverOptions::default()
    }
}

/// Runs the crossing search on a fallible relay-destination curve, keeping
/// the first evaluation error.
fn crossing_with<F>(pair: &AwgnPair, r2: F) -> Result<CapacitySolution, AwgnError>
where
    F: Fn(f64) -> Result<f64, AwgnError> + Send + Sync,
{
    let c1 = shannon(pair.snr1);
    let failure = std::sync::Mutex::new(None::<AwgnError>);
    let curves = RateCurves::new(
        move |p| c1 * (1.0 - p),
        |p| match r2(p) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                f64::NAN
            }
        },
    );
    let p = solve_crossing(&curves, &crossing_options());
    let r2_at = curves.r2(p.unwrap_or(0.0));
    drop(curves);
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    let p = p?;
    let r1_at = c1 * (1.0 - p);
    Ok(CapacitySolution {
        p_u_star: p,
        capacity: r1_at.min(r2_at),
        regime: Regime::Crossing,
        r1_at_opt: r1_at,
        r2_at_opt: r2_at,
        concavity_violations: 0,
    })
}

/// Capacity lower bound `C_L`: the crossing of `r1` with the relay rate of
/// the best constellation the search finds at each `P_U`.
pub fn awgn_capacity_lower(
    pair: &AwgnPair,
    search: &SearchSpec,
) -> Result<CapacitySolution, AwgnError> {
    crossing_with(pair, |p| {
        if p == 0.0 {
            return Ok(0.0);
        }
        let dist = optimize_mass_points(pair.snr2, p, search)?;
        awgn_relay_rate(&dist, p, 1.0, &search.quad)
    })
}

/// Crossing for a fixed constellation given in units of the relay noise
/// standard deviation.
pub fn awgn_capacity_with_distribution(
    pair: &AwgnPair,
    dist: &MassPointDistribution,
    quad: &QuadratureSpec,
) -> Result<CapacitySolution, AwgnError> {
    let dist = dist.scaled(pair.sigma2);
    crossing_with(pair, |p| awgn_relay_rate(&dist, p, pair.sigma2, quad))
}

/// Full crossing solution of the Gaussian-input benchmark.
pub fn awgn_gaussian_input_solution(
    pair: &AwgnPair,
    quad: &QuadratureSpec,
) -> Result<CapacitySolution, AwgnError> {
    crossing_with(pair, |p| gaussian_input_relay_rate(pair, p, quad))
}

/// Benchmark rate `R_Gauss` with a Gaussian active relay symbol.
pub fn awgn_gaussian_input_rate(pair: &AwgnPair, quad: &QuadratureSpec) -> Result<f64, AwgnError> {
    Ok(awgn_gaussian_input_solution(pair, quad)?.capacity)
}

pub fn awgn_conventional_rate(pair: &AwgnPair) -> f64 {
    conventional_rate(pair.link_rates())
}

/// `max_P min{c1(1 - P), c2·P + H(P)}` with `c_i = ½log₂(1 + snr_i)`.
pub fn awgn_upper_bound(pair: &AwgnPair) -> f64 {
    let LinkRates { c1, c2 } = pair.link_rates();
    let curves = RateCurves::new(move |p| c1 * (1.0 - p), move |p| c2 * p + h2(p));
    solve_capacity(&curves, &SolverOptions::default()).capacity
}
