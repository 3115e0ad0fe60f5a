//! Empirical ratios LHS/RHS for the λ and Γ inequalities, with implied constant 1.
//!
//! Left sides are exact integer sums over every rotation θ. Right sides are
//! evaluated in floating point because some exponents are fractional.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::{derive_seed, exponent_fit, sample_density};
use crate::counting::{f_tree, lambda_perm, ClassKey, PointSet};
use crate::error::{Error, Result};
use crate::field::{FieldParams, Space};
use crate::group::{enumerate_group, ActionTable};
use crate::structure::{binomial, fnv1a, WeakTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundLemma {
    /// Σ_θ Σ_w λ_θⁿ(w) ≤ |E|^{2n} q^{−dn + C(d+1,2)}.
    LambdaPowerSumD,
    /// Σ_θ Σ_w (λ_θ(w) − λ̂_θ(0))² ≤ q^{C(d,2)+1} |E|².
    LambdaVarianceD,
    /// Planar, q ≡ 3 mod 4: Σ_θ Σ_w λ_θⁿ(w) ≤ |E|^{2n} q^{−(2n−3)}.
    LambdaPowerSum2d,
    /// Planar, q ≡ 3 mod 4: Σ_θ Σ_w (λ_θ(w) − λ̂_θ(0))² ≤ |E|^{5/2} q.
    LambdaVariance2d,
    /// Planar, q ≡ 3 mod 4, graph tree with ℓ edges:
    /// Σ λ_θⁿ Γ_θ ≤ |E|^{2ℓ+2n+2} q^{−(2ℓ+2n−1)}.
    LambdaGamma2d,
    /// k-weak tree with ℓ simplices:
    /// Σ λ_θⁿ Γ_θ ≤ |E|^{2ℓk+2n+2} q^{−(2ℓC(k+1,2) + d(n+1) − C(d+1,2))}.
    LambdaGammaD,
    /// Planar, q ≡ 3 mod 4: Σ (Γ_θ − Γ̂_θ(0))² ≤ |E|^{4ℓ+5/2} q^{−(4ℓ−1)}.
    GammaVariance2d,
    /// Σ (Γ_θ − Γ̂_θ(0))² ≤ |E|^{4ℓk+2} q^{d + C(d−1,2) − 4ℓC(k+1,2)}.
    GammaVarianceD,
}

impl BoundLemma {
    pub const ALL: [BoundLemma; 8] = [
        BoundLemma::LambdaPowerSumD,
        BoundLemma::LambdaVarianceD,
        BoundLemma::LambdaPowerSum2d,
        BoundLemma::LambdaVariance2d,
        BoundLemma::LambdaGamma2d,
        BoundLemma::LambdaGammaD,
        BoundLemma::GammaVariance2d,
        BoundLemma::GammaVarianceD,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BoundLemma::LambdaPowerSumD => "lambda-power-sum-d",
            BoundLemma::LambdaVarianceD => "lambda-variance-d",
            BoundLemma::LambdaPowerSum2d => "lambda-power-sum-2d",
            BoundLemma::LambdaVariance2d => "lambda-variance-2d",
            BoundLemma::LambdaGamma2d => "lambda-gamma-2d",
            BoundLemma::LambdaGammaD => "lambda-gamma-d",
            BoundLemma::GammaVariance2d => "gamma-variance-2d",
            BoundLemma::GammaVarianceD => "gamma-variance-d",
        }
    }

    fn planar_only(self) -> bool {
        matches!(
            self,
            BoundLemma::LambdaPowerSum2d
                | BoundLemma::LambdaVariance2d
                | BoundLemma::LambdaGamma2d
                | BoundLemma::GammaVariance2d
        )
    }

    fn powers(self) -> &'static [u32] {
        match self {
            BoundLemma::LambdaPowerSumD | BoundLemma::LambdaPowerSum2d => &[2, 3],
            BoundLemma::LambdaGamma2d | BoundLemma::LambdaGammaD => &[1, 2],
            _ => &[0],
        }
    }

    fn uses_tree(self) -> bool {
        matches!(
            self,
            BoundLemma::LambdaGamma2d
                | BoundLemma::LambdaGammaD
                | BoundLemma::GammaVariance2d
                | BoundLemma::GammaVarianceD
        )
    }

    /// Exponent s of the size hypothesis |E| ≳ q^s.
    fn hypothesis(self, d: usize, n: u32, k: usize) -> f64 {
        let (d, n, k) = (d as f64, n as f64, k as f64);
        match self {
            BoundLemma::LambdaPowerSumD => (d * n - d + 1.0) / n,
            BoundLemma::LambdaVarianceD | BoundLemma::LambdaVariance2d => 0.0,
            BoundLemma::LambdaPowerSum2d => (4.0 * n - 4.0) / (2.0 * n - 1.0),
            BoundLemma::LambdaGamma2d => 4.0 * n / (2.0 * n + 1.0),
            BoundLemma::LambdaGammaD => ((d * n + 1.0) / (n + 1.0)).max(k + (d - 1.0) / 2.0),
            BoundLemma::GammaVariance2d => 1.5,
            BoundLemma::GammaVarianceD => k + (d - 1.0) / 2.0,
        }
    }

    /// (exponent of |E|, exponent of q) on the right side.
    fn rhs_exponents(self, d: usize, n: u32, ell: usize, k: usize) -> (f64, f64) {
        let (n, l) = (n as f64, ell as f64);
        let c = |a: usize, b: usize| binomial(a, b) as f64;
        let (df, kf) = (d as f64, k as f64);
        match self {
            BoundLemma::LambdaPowerSumD => (2.0 * n, -df * n + c(d + 1, 2)),
            BoundLemma::LambdaVarianceD => (2.0, c(d, 2) + 1.0),
            BoundLemma::LambdaPowerSum2d => (2.0 * n, -(2.0 * n - 3.0)),
            BoundLemma::LambdaVariance2d => (2.5, 1.0),
            BoundLemma::LambdaGamma2d => (2.0 * l + 2.0 * n + 2.0, -(2.0 * l + 2.0 * n - 1.0)),
            BoundLemma::LambdaGammaD => (
                2.0 * l * kf + 2.0 * n + 2.0,
                -(2.0 * l * c(k + 1, 2) + df * (n + 1.0) - c(d + 1, 2)),
            ),
            BoundLemma::GammaVariance2d => (4.0 * l + 2.5, -(4.0 * l - 1.0)),
            BoundLemma::GammaVarianceD => (
                4.0 * l * kf + 2.0,
                df + c(d.saturating_sub(1), 2) - 4.0 * l * c(k + 1, 2),
            ),
        }
    }
}

impl fmt::Display for BoundLemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BoundLemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundLemma::ALL
            .into_iter()
            .find(|l| l.id() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown lemma {s:?}")))
    }
}

impl Serialize for BoundLemma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsConfig {
    pub lemmas: Vec<BoundLemma>,
    /// Field sizes used for d = 2.
    pub q_planar: Vec<u32>,
    /// Field sizes used for d = 3.
    pub q_spatial: Vec<u32>,
    /// Include dense random sets besides the full space.
    pub random_sets: bool,
    pub density: f64,
    pub seed: u64,
    pub max_ratio: f64,
    pub max_slope: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            lemmas: BoundLemma::ALL.to_vec(),
            q_planar: vec![3, 5, 7, 11],
            q_spatial: vec![3, 5, 7],
            random_sets: true,
            density: 0.5,
            seed: 0,
            max_ratio: 64.0,
            max_slope: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub lemma: BoundLemma,
    pub q: u32,
    pub d: usize,
    /// Human-readable instance description.
    pub instance: String,
    pub instance_hash: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub lemma: BoundLemma,
    pub d: usize,
    pub max_ratio: f64,
    /// Slope of the per-q maximum ratio against q, when at least 3 q have positive ratios.
    pub slope: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub max_ratio: f64,
    pub max_slope: f64,
    pub rows: Vec<BoundRow>,
    pub summaries: Vec<BoundSummary>,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.summaries.iter().all(|s| s.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV with columns lemma, q, d, instance-hash, lhs, rhs, ratio; skipped rows carry NA.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lemma,q,d,instance-hash,lhs,rhs,ratio")?;
        for r in &self.rows {
            if r.skipped.is_some() {
                writeln!(out, "{},{},{},{},NA,NA,NA", r.lemma, r.q, r.d, r.instance_hash)?;
            } else {
                writeln!(
                    out,
                    "{},{},{},{},{:e},{:e},{}",
                    r.lemma, r.q, r.d, r.instance_hash, r.lhs, r.rhs, r.ratio
                )?;
            }
        }
        Ok(())
    }
}

fn overflow() -> Error {
    Error::Overflow("bound report")
}

/// Per-set data shared by every lemma.
struct Instance<'a> {
    e: &'a PointSet,
    space: &'a Space,
    lambdas: Vec<Vec<u64>>,
    perms: &'a [Vec<u32>],
}

impl Instance<'_> {
    fn lambda_power_sum(&self, n: u32) -> Result<u128> {
        self.lambdas.iter().try_fold(0u128, |acc, l| {
            l.iter().try_fold(acc, |a, &v| {
                (v as u128).checked_pow(n).and_then(|p| a.checked_add(p)).ok_or_else(overflow)
            })
        })
    }

    /// Σ_θ Σ_w (λ_θ(w) − |E|²/q^d)².
    fn lambda_variance(&self) -> Result<f64> {
        let size = self.space.size() as u128;
        let e2 = (self.e.len() as u128).pow(2);
        let mut num = 0u128;
        for l in &self.lambdas {
            let sq: u128 = l.iter().map(|&v| (v as u128) * (v as u128)).sum();
            num = num
                .checked_add(sq.checked_mul(size).ok_or_else(overflow)? - e2 * e2)
                .ok_or_else(overflow)?;
        }
        Ok(num as f64 / size as f64)
    }

    fn gammas(&self, f: &[u64]) -> Result<Vec<Vec<u128>>> {
        let support: Vec<(usize, u128)> = f
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, c as u128))
            .collect();
        self.perms
            .par_iter()
            .map(|perm| {
                let mut g = vec![0u128; self.space.size()];
                for &(xp, cp) in &support {
                    let rot = perm[xp] as usize;
                    for &(x, c) in &support {
                        let cell = &mut g[self.space.sub(x, rot)];
                        *cell = cell.checked_add(c * cp).ok_or_else(overflow)?;
                    }
                }
                Ok(g)
            })
            .collect()
    }

    fn lambda_gamma(&self, gammas: &[Vec<u128>], n: u32) -> Result<u128> {
        self.lambdas.iter().zip(gammas).try_fold(0u128, |acc, (l, g)| {
            l.iter().zip(g).try_fold(acc, |a, (&lv, &gv)| {
                (lv as u128)
                    .checked_pow(n)
                    .and_then(|p| p.checked_mul(gv))
                    .and_then(|t| a.checked_add(t))
                    .ok_or_else(overflow)
            })
        })
    }

    /// Σ_θ Σ_w (Γ_θ(w) − ‖f‖₁²/q^d)².
    fn gamma_variance(gammas: &[Vec<u128>], f_l1: u128, size: usize) -> Result<f64> {
        let total = f_l1.checked_mul(f_l1).ok_or_else(overflow)?;
        let mut acc = 0f64;
        for g in gammas {
            let sq = g.iter().try_fold(0u128, |a, &v| {
                v.checked_mul(v).and_then(|s| a.checked_add(s)).ok_or_else(overflow)
            })?;
            // Σ(Γ − c)² = ΣΓ² − (ΣΓ)²/q^d, kept exact as a difference of u128.
            let scaled = sq.checked_mul(size as u128).ok_or_else(overflow)?;
            let sq_total = total.checked_mul(total).ok_or_else(overflow)?;
            acc += (scaled - sq_total) as f64 / size as f64;
        }
        Ok(acc)
    }
}

/// The smallest nonzero square and the smallest nonsquare of F_q.
fn square_class_representatives(q: u32) -> Vec<u32> {
    let is_square = |t: u32| (1..q).any(|x| (x * x) % q == t);
    let square = (1..q).find(|&t| is_square(t)).expect("1 is a square");
    let mut out = vec![square];
    out.extend((1..q).find(|&t| !is_square(t)));
    out
}

fn hash_instance(label: &str, e: &PointSet) -> String {
    let mut bytes = label.as_bytes().to_vec();
    for &i in e.indices() {
        bytes.extend_from_slice(&(i as u64).to_le_bytes());
    }
    format!("{:016x}", fnv1a(&bytes))
}

/// Evaluates every requested lemma on the full space and, optionally, dense random sets.
pub fn bound_report(config: &BoundsConfig) -> Result<BoundReport> {
    let mut rows = Vec::new();
    let mut fields: Vec<(usize, u32)> = config.q_planar.iter().map(|&q| (2, q)).collect();
    fields.extend(config.q_spatial.iter().map(|&q| (3, q)));
    for (d, q) in fields {
        let params = FieldParams::new(q, d)?;
        let group = enumerate_group(params)?;
        let space = Space::new(params);
        let action: ActionTable = group.action(&space)?;
        let perms: Vec<Vec<u32>> = (0..group.len()).map(|g| action.perm(g).to_vec()).collect();
        let mut sets = vec![("full".to_string(), PointSet::full(params))];
        if config.random_sets {
            let seed = derive_seed(&[config.seed, q as u64, d as u64]);
            sets.push((format!("random-{}", config.density), sample_density(params, config.density, seed)));
        }
        let planar_ok = d == 2 && q % 4 == 3;
        for (set_name, e) in &sets {
            let lambdas: Vec<Vec<u64>> = perms.par_iter().map(|p| lambda_perm(&space, e, p)).collect();
            let inst = Instance { e, space: &space, lambdas, perms: &perms };
            // Γ tables for paths of 1 and 2 edges with all distances equal to t,
            // for one t from each square class of F_q^×.
            let mut trees: Vec<(usize, u32, u128, Vec<Vec<u128>>)> = Vec::new();
            if config.lemmas.iter().any(|l| l.uses_tree()) {
                for ell in [1usize, 2] {
                    let tree = WeakTree::path(ell, 1)?;
                    for t in square_class_representatives(q) {
                        let f = f_tree(e, &tree, &ClassKey(vec![t; ell]))?;
                        let gammas = inst.gammas(f.counts())?;
                        trees.push((ell, t, f.l1(), gammas));
                    }
                }
            }
            let size_e = e.len() as f64;
            for &lemma in &config.lemmas {
                if lemma.planar_only() && d != 2 {
                    continue;
                }
                let tree_cases: Vec<Option<usize>> = if lemma.uses_tree() {
                    (0..trees.len()).map(Some).collect()
                } else {
                    vec![None]
                };
                for &n in lemma.powers() {
                    for &tc in &tree_cases {
                        let ell = tc.map_or(0, |i| trees[i].0);
                        let label = match tc {
                            Some(i) => format!("{lemma}|{set_name}|n={n}|path={}|t={}", trees[i].0, trees[i].1),
                            None => format!("{lemma}|{set_name}|n={n}"),
                        };
                        let mut row = BoundRow {
                            lemma,
                            q,
                            d,
                            instance: label.clone(),
                            instance_hash: hash_instance(&label, e),
                            lhs: 0.0,
                            rhs: 0.0,
                            ratio: 0.0,
                            skipped: None,
                        };
                        let hyp = lemma.hypothesis(d, n, 1);
                        if lemma.planar_only() && !planar_ok {
                            row.skipped = Some("needs q ≡ 3 mod 4".into());
                        } else if hyp >= d as f64 {
                            row.skipped = Some(format!("size hypothesis q^{hyp} unattainable"));
                        } else if e.is_empty() {
                            row.skipped = Some("empty set".into());
                        }
                        if row.skipped.is_none() {
                            let gam = tc.map(|i| &trees[i].3);
                            let f_l1 = tc.map(|i| trees[i].2);
                            row.lhs = match lemma {
                                BoundLemma::LambdaPowerSumD | BoundLemma::LambdaPowerSum2d => {
                                    inst.lambda_power_sum(n)? as f64
                                }
                                BoundLemma::LambdaVarianceD | BoundLemma::LambdaVariance2d => inst.lambda_variance()?,
                                BoundLemma::LambdaGamma2d | BoundLemma::LambdaGammaD => {
                                    inst.lambda_gamma(gam.expect("tree case"), n)? as f64
                                }
                                BoundLemma::GammaVariance2d | BoundLemma::GammaVarianceD => Instance::gamma_variance(
                                    gam.expect("tree case"),
                                    f_l1.expect("tree case"),
                                    space.size(),
                                )?,
                            };
                            let (ae, aq) = lemma.rhs_exponents(d, n, ell, 1);
                            row.rhs = (ae * size_e.ln() + aq * (q as f64).ln()).exp();
                            row.ratio = row.lhs / row.rhs;
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }

    let mut summaries = Vec::new();
    for &lemma in &config.lemmas {
        for d in [2usize, 3] {
            let computed: Vec<&BoundRow> = rows
                .iter()
                .filter(|r| r.lemma == lemma && r.d == d && r.skipped.is_none())
                .collect();
            if computed.is_empty() {
                continue;
            }
            let max_ratio = computed.iter().map(|r| r.ratio).fold(0.0, f64::max);
            let mut per_q: BTreeMap<u32, f64> = BTreeMap::new();
            for r in &computed {
                let m = per_q.entry(r.q).or_insert(0.0);
                *m = m.max(r.ratio);
            }
            per_q.retain(|_, v| *v > 0.0);
            let slope = exponent_fit(&per_q).ok().map(|f| f.slope);
            let pass = max_ratio <= config.max_ratio && slope.is_none_or(|s| s <= config.max_slope);
            summaries.push(BoundSummary { lemma, d, max_ratio, slope, pass });
        }
    }
    Ok(BoundReport {
        max_ratio: config.max_ratio,
        max_slope: config.max_slope,
        rows,
        summaries,
    })
}
