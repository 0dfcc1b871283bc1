//! Published relay constellations at 10 dB and 15 dB.
//!
//! The lists are printed to six significant digits, so their two-sided mass
//! misses one by up to about 1e-6. The loader rescales the probabilities to
//! restore exact normalization and leaves the locations untouched.

use serde::Deserialize;

use super::MassPointDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PublishedSet {
    Snr10Db,
    Snr15Db,
}

#[derive(Deserialize)]
struct Fixture {
    #[allow(dead_code)]
    snr_db: f64,
    locations: Vec<f64>,
    side_probs: Vec<f64>,
}

impl PublishedSet {
    pub fn snr_db(self) -> f64 {
        match self {
            Self::Snr10Db => 10.0,
            Self::Snr15Db => 15.0,
        }
    }

    fn raw(self) -> &'static str {
        match self {
            Self::Snr10Db => include_str!("../../fixtures/mass_points_10db.json"),
            Self::Snr15Db => include_str!("../../fixtures/mass_points_15db.json"),
        }
    }
}

/// Loads a published constellation, renormalized to unit two-sided mass.
pub fn published_distribution(set: PublishedSet) -> MassPointDistribution {
    let fx: Fixture = serde_json::from_str(set.raw()).expect("bundled fixture is valid JSON");
    let total = 2.0 * fx.side_probs.iter().sum::<f64>();
    let probs = fx.side_probs.iter().map(|p| p / total).collect();
    MassPointDistribution::new(fx.locations, probs)
        .expect("bundled fixture is a valid distribution")
}
