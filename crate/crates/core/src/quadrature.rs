//! Adaptive Gauss–Kronrod quadrature and differential entropy of Gaussian
//! mixtures.
//!
//! The integration range for a mixture is
//! `[min(mean - padding·sd), max(mean + padding·sd)]`; the global error
//! estimate is driven below `abs_tol` by repeatedly bisecting the worst
//! subinterval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::prob::ProbError;

/// Mixture weights are accepted when they sum to one within this tolerance.
pub const MIXTURE_WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Integration bounds extend this many standard deviations past the
    /// outermost component.
    pub padding: f64,
    /// Target absolute error of the integral.
    pub abs_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            padding: 8.0,
            abs_tol: 1e-8,
            max_subintervals: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Nodes and weights of the composite 15-point Kronrod rule on `pieces`
/// equal subintervals of `[a, b]`, for fixed-grid vector integrals.
pub(crate) fn composite_kronrod_nodes(a: f64, b: f64, pieces: usize) -> Vec<(f64, f64)> {
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut nodes = Vec::with_capacity(15 * pieces);
    for i in 0..pieces {
        let center = a + width * (i as f64 + 0.5);
        let half = 0.5 * width;
        nodes.push((center, WGK[7] * half));
        for j in 0..7 {
            let dx = half * XGK[j];
            nodes.push((center - dx, WGK[j] * half));
            nodes.push((center + dx, WGK[j] * half));
        }
    }
    nodes
}

/// Integrates `f` over `[a, b]`, starting from `pieces` equal subintervals.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    spec: &QuadratureSpec,
) -> Result<Integral, ProbError> {
    let pieces = pieces.clamp(1, spec.max_subintervals.max(1));
    let width = (b - a) / pieces as f64;
    let mut heap: BinaryHeap<Piece> = (0..pieces)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + width };
            gauss_kronrod(&f, lo, hi)
        })
        .collect();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    while total_err > spec.abs_tol && heap.len() < spec.max_subintervals {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so cancellation in the running total cannot stall.
        if heap.len().is_multiple_of(256) {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    total_err = heap.iter().map(|p| p.error).sum();
    if total_err > spec.abs_tol {
        return Err(ProbError::Quadrature {
            target: spec.abs_tol,
            achieved: total_err,
        });
    }
    Ok(Integral {
        value,
        error_estimate: total_err,
    })
}

/// One component of a Gaussian mixture density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Differential entropy of `N(·, sigma²)` in bits.
pub fn gaussian_entropy(sigma: f64) -> f64 {
    0.5 * (2.0 * PI * E * sigma * sigma).log2()
}

/// Differential entropy (bits) of `Σ w_i N(mean_i, sd_i²)`.
pub fn mixture_entropy(
    components: &[GaussianComponent],
    quad: &QuadratureSpec,
) -> Result<f64, ProbError> {
    if components.is_empty() {
        return Err(ProbError::EmptyMixture);
    }
    let mut sum = 0.0;
    for c in components {
        if !(c.sd > 0.0) || !c.sd.is_finite() {
            return Err(ProbError::Domain {
                name: "sigma",
                value: c.sd,
            });
        }
        if !(c.weight >= 0.0) || !c.weight.is_finite() {
            return Err(ProbError::Domain {
                name: "weight",
                value: c.weight,
            });
        }
        sum += c.weight;
    }
    if (sum - 1.0).abs() > MIXTURE_WEIGHT_TOL {
        return Err(ProbError::NotNormalized { sum });
    }

    let active: Vec<(f64, f64, f64)> = components
        .iter()
        .filter(|c| c.weight > 0.0)
        .map(|c| {
            (
                c.weight / (c.sd * (2.0 * PI).sqrt()),
                c.mean,
                -0.5 / (c.sd * c.sd),
            )
        })
        .collect();
    let lo = components
        .iter()
        .map(|c| c.mean - quad.padding * c.sd)
        .fold(f64::INFINITY, f64::min);
    let hi = components
        .iter()
        .map(|c| c.mean + quad.padding * c.sd)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_sd = components
        .iter()
        .map(|c| c.sd)
        .fold(f64::INFINITY, f64::min);
    let pieces = (((hi - lo) / min_sd).ceil() as usize).clamp(4, 4096);

    let density = |y: f64| -> f64 {
        active
            .iter()
            .map(|&(scale, mean, k)| {
                let d = y - mean;
                scale * (k * d * d).exp()
            })
            .sum()
    };
    let integrand = |y: f64| {
        let f = density(y);
        if f > 0.0 {
            -f * f.log2()
        } else {
            0.0
        }
    };
    Ok(integrate(integrand, lo, hi, pieces, quad)?.value)
}

/// Differential entropy (bits) of an equal-variance Gaussian mixture.
pub fn gaussian_mixture_entropy(
    weights: &[f64],
    means: &[f64],
    sigma: f64,
    quad: &QuadratureSpec,
) -> Result<f64, ProbError> {
    if weights.len() != means.len() {
        return Err(ProbError::LengthMismatch {
            support: means.len(),
            probs: weights.len(),
        });
    }
    let components: Vec<GaussianComponent> = weights
        .iter()
        .zip(means)
        .map(|(&weight, &mean)| GaussianComponent {
            weight,
            mean,
            sd: sigma,
        })
        .collect();
    mixture_entropy(&components, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_and_exp() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| x * x * x - 2.0 * x, -1.0, 3.0, 1, &spec).unwrap();
        assert!((r.value - (81.0 / 4.0 - 9.0 - (0.25 - 1.0))).abs() < 1e-12);
        let r = integrate(f64::exp, 0.0, 1.0, 1, &spec).unwrap();
        assert!((r.value - (E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn composite_nodes_integrate_gaussian() {
        let nodes = composite_kronrod_nodes(-10.0, 10.0, 40);
        let s: f64 = nodes.iter().map(|&(x, w)| w * (-0.5 * x * x).exp()).sum();
        assert!((s - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_with_estimate() {
        let spec = QuadratureSpec {
            abs_tol: 1e-14,
            max_subintervals: 2,
            ..Default::default()
        };
        let err = integrate(|x: f64| (1.0 / (x + 1e-3)).sin(), 0.0, 1.0, 1, &spec).unwrap_err();
        match err {
            ProbError::Quadrature { achieved, .. } => assert!(achieved > 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_component_matches_closed_form() {
        let quad = QuadratureSpec::default();
        for sigma in [0.1, 1.0, 10.0] {
            let h = gaussian_mixture_entropy(&[1.0], &[0.0], sigma, &quad).unwrap();
            assert!(
                (h - gaussian_entropy(sigma)).abs() < 1e-6,
                "sigma {sigma}: {h}"
            );
        }
        assert!((gaussian_entropy(1.0) - 2.047095).abs() < 1e-6);
    }

    #[test]
    fn separated_pair_adds_one_bit() {
        let quad = QuadratureSpec::default();
        let h = gaussian_mixture_entropy(&[0.5, 0.5], &[-30.0, 30.0], 1.0, &quad).unwrap();
        assert!((h - gaussian_entropy(1.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_mixtures() {
        let quad = QuadratureSpec::default();
        assert!(matches!(
            gaussian_mixture_entropy(&[], &[], 1.0, &quad),
            Err(ProbError::EmptyMixture)
        ));
        assert!(matches!(
            gaussian_mixture_entropy(&[0.5, 0.6], &[0.0, 1.0], 1.0, &quad),
            Err(ProbError::NotNormalized { .. })
        ));
        assert!(gaussian_mixture_entropy(&[1.0], &[0.0], 0.0, &quad).is_err());
    }

    #[test]
    fn unequal_variances() {
        // Both components identical in law: entropy of N(0, 4).
        let quad = QuadratureSpec::default();
        let comps = [
            GaussianComponent {
                weight: 0.3,
                mean: 0.0,
                sd: 2.0,
            },
            GaussianComponent {
                weight: 0.7,
                mean: 0.0,
                sd: 2.0,
            },
        ];
        let h = mixture_entropy(&comps, &quad).unwrap();
        assert!((h - gaussian_entropy(2.0)).abs() < 1e-7);
    }
}
