//! Monte Carlo harness: random subsets, threshold sweeps, power-law fits and
//! empirical checks of the inequality lemmas.

mod bounds;
mod sweep;
mod verify;

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::PointSet;
use crate::error::{param, Result};
use crate::field::FieldParams;

pub use bounds::{bound_report, BoundLemma, BoundReport, BoundRow, BoundSummary, BoundsConfig};
pub use sweep::{threshold_sweep, SweepCell, SweepConfig, SweepReport, SweepSummary, CAVEAT};
pub use verify::{verify, write_checks_csv, CheckResult, Suite};

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds several words into one seed.
pub fn derive_seed(words: &[u64]) -> u64 {
    words.iter().fold(0u64, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// E with each point included independently with probability q^{s−d}.
pub fn sample_subset(params: FieldParams, s: Ratio<i64>, seed: u64) -> Result<PointSet> {
    let d = params.d() as i64;
    if s > Ratio::from_integer(d) {
        return param(format!("s = {s} exceeds d = {d}"));
    }
    let exponent = (*(s - d).numer() as f64) / (*s.denom() as f64);
    let p = (params.q() as f64).powf(exponent);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = s == Ratio::from_integer(d);
    let indices = (0..params.size())
        .filter(|_| {
            let r: f64 = rng.gen();
            full || r < p
        })
        .collect();
    PointSet::from_indices(params, indices)
}

/// E with each point included independently with the given probability.
pub fn sample_density(params: FieldParams, density: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = (0..params.size()).filter(|_| rng.gen::<f64>() < density).collect();
    PointSet::from_indices(params, indices).expect("distinct indices")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals of log(value).
    pub residual: f64,
}

/// Least-squares fit of log(value) against log(q).
pub fn exponent_fit(measurements: &BTreeMap<u32, f64>) -> Result<PowerFit> {
    if measurements.len() < 3 {
        return param("an exponent fit needs at least 3 distinct q");
    }
    if measurements.values().any(|&v| !v.is_finite() || v <= 0.0) {
        return param("fit values must be positive and finite");
    }
    let pts: Vec<(f64, f64)> = measurements
        .iter()
        .map(|(&q, &v)| ((q as f64).ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerFit { slope, intercept, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaylorCheck {
    pub n: u32,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, or 0 when both vanish.
    pub ratio: f64,
}

/// Σφⁿ against q^{−d(n−1)}‖φ‖₁ⁿ + ‖φ‖_∞^{n−2} Σ(φ − ‖φ‖₁/q^d)².
pub fn taylor_check(params: FieldParams, phi: &[f64], n: u32) -> Result<TaylorCheck> {
    if n < 2 {
        return param("the power must be at least 2");
    }
    if phi.len() != params.size() || phi.iter().any(|&v| v < 0.0) {
        return param("phi must be a nonnegative grid on F_q^d");
    }
    let size = params.size() as f64;
    let l1: f64 = phi.iter().sum();
    let linf = phi.iter().copied().fold(0.0, f64::max);
    let mean = l1 / size;
    let lhs: f64 = phi.iter().map(|v| v.powi(n as i32)).sum();
    let variance: f64 = phi.iter().map(|v| (v - mean).powi(2)).sum();
    let rhs = size.powi(-(n as i32 - 1)) * l1.powi(n as i32) + linf.powi(n as i32 - 2) * variance;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(TaylorCheck { n, lhs, rhs, ratio })
}

/// Median of a nonempty slice; the mean of the middle pair for even lengths.
pub(crate) fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_extremes_and_determinism() {
        let p = FieldParams::new(7, 2).unwrap();
        assert_eq!(sample_subset(p, Ratio::from_integer(2), 1).unwrap().len(), 49);
        assert!(sample_subset(p, Ratio::from_integer(-3), 1).unwrap().len() <= 1);
        let a = sample_subset(p, Ratio::new(3, 2), 42).unwrap();
        let b = sample_subset(p, Ratio::new(3, 2), 42).unwrap();
        assert_eq!(a, b);
        assert!(sample_subset(p, Ratio::new(5, 2), 1).is_err());
    }

    #[test]
    fn fits() {
        let sq: BTreeMap<u32, f64> = [3u32, 5, 7].iter().map(|&q| (q, (q * q) as f64)).collect();
        let f = exponent_fit(&sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
        assert!(f.residual < 1e-9);
        let flat: BTreeMap<u32, f64> = [3u32, 5, 7].iter().map(|&q| (q, 4.0)).collect();
        assert!(exponent_fit(&flat).unwrap().slope.abs() < 1e-12);
        let two: BTreeMap<u32, f64> = [(3, 1.0), (5, 2.0)].into_iter().collect();
        assert!(exponent_fit(&two).is_err());
    }

    #[test]
    fn taylor_on_constant_and_spike() {
        let p = FieldParams::new(3, 2).unwrap();
        let c = taylor_check(p, &[2.0; 9], 3).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-12);
        let mut spike = [0.0; 9];
        spike[4] = 5.0;
        let s = taylor_check(p, &spike, 2).unwrap();
        assert!(s.ratio <= 4.0);
        assert_eq!(taylor_check(p, &[0.0; 9], 2).unwrap().ratio, 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
