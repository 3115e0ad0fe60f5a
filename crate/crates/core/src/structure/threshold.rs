//! Predicted size thresholds and the exponent identity behind unbalancing.

use num_rational::Ratio;
use serde::Serialize;

use super::{c_simplex, Kind, SimplexStructure};
use crate::error::{param, Result};
use crate::group::stab_exponent;

/// Thresholds s (as in |E| ≳ q^s) predicted for one structure, d and k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdPrediction {
    pub d: usize,
    pub k: usize,
    pub n_k: usize,
    /// max((d·N_k + 1)/(N_k + 1), k + (d − 1)/2).
    #[serde(serialize_with = "ser_ratio")]
    pub general: Ratio<i64>,
    /// 4N/(2N + 1) with N = N_1; only for d = 2, and only under q ≡ 3 (mod 4).
    #[serde(serialize_with = "ser_opt_ratio")]
    pub planar: Option<Ratio<i64>>,
    /// n_max + (d − 1)/2, when every simplex has dimension below (d + 1)/2.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub small_simplex: Option<Ratio<i64>>,
    #[serde(serialize_with = "ser_ratio")]
    pub minimum: Ratio<i64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_ratio<S: serde::Serializer>(
    r: &Option<Ratio<i64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Largest admissible k: ⌈(d + 1)/2⌉ − 1.
pub(crate) fn max_k(d: usize) -> usize {
    (d + 2) / 2 - 1
}

pub fn predict_threshold(structure: &SimplexStructure, d: usize, k: usize) -> Result<ThresholdPrediction> {
    if structure.kind() != Kind::Tree {
        return param("threshold prediction needs a simplex tree");
    }
    if d < 2 {
        return param("d must be at least 2");
    }
    if k < 1 || k > max_k(d) {
        return param(format!("k = {k} outside [1, {}] for d = {d}", max_k(d)));
    }
    let (di, ki) = (d as i64, k as i64);
    let n = structure.n_k(k) as i64;
    let general = Ratio::new(di * n + 1, n + 1).max(Ratio::from_integer(ki) + Ratio::new(di - 1, 2));
    let planar = (d == 2).then(|| {
        let n1 = structure.n_k(1) as i64;
        Ratio::new(4 * n1, 2 * n1 + 1)
    });
    let max_dim = structure.max_dim() as i64;
    let small_simplex = (2 * max_dim < di + 1).then(|| Ratio::from_integer(max_dim) + Ratio::new(di - 1, 2));
    let minimum = [Some(general), planar, small_simplex]
        .into_iter()
        .flatten()
        .min()
        .expect("general threshold present");
    Ok(ThresholdPrediction {
        d,
        k,
        n_k: n as usize,
        general,
        planar,
        small_simplex,
        minimum,
    })
}

/// Predictions for every admissible k.
pub fn predict_all_k(structure: &SimplexStructure, d: usize) -> Result<Vec<ThresholdPrediction>> {
    (1..=max_k(d).max(1)).map(|k| predict_threshold(structure, d, k)).collect()
}

/// Exponent bookkeeping for moving one free vertex from an n-simplex to an
/// m-simplex (giving an (n−1)- and an (m+1)-simplex).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentBalance {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    /// e(n) − e(n−1) + e(m) − e(m+1) for the stabilizer exponent e.
    pub stabilizer_change: i64,
    /// c(T) − c(T′) = c(n) + c(m) − c(n−1) − c(m+1).
    pub class_change: i64,
    pub balanced: bool,
}

pub fn exponent_identity_check(d: usize, n: usize, m: usize) -> Result<ExponentBalance> {
    if n < 1 || m < 1 || d < 2 {
        return param("need n >= 1, m >= 1, d >= 2");
    }
    let e = |x: usize| stab_exponent(x, d) as i64;
    let c = |x: usize| c_simplex(x, d) as i64;
    let stabilizer_change = e(n) - e(n - 1) + e(m) - e(m + 1);
    let class_change = c(n) + c(m) - c(n - 1) - c(m + 1);
    Ok(ExponentBalance {
        d,
        n,
        m,
        stabilizer_change,
        class_change,
        balanced: stabilizer_change == class_change,
    })
}
