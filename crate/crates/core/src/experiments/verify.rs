//! Self-checks of the library's invariants, grouped into suites.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{bound_report, derive_seed, sample_density, taylor_check, BoundsConfig};
use crate::counting::{f_tree, lambda, ClassKey};
use crate::error::{Error, Result};
use crate::field::{FieldParams, Space, Vector};
use crate::fourier::{parseval_defect, transform, ComplexGrid};
use crate::group::{enumerate_group, is_nondegenerate, scan_group, stab_exponent};
use crate::structure::{exponent_identity_check, WeakTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Fourier,
    Ortho,
    Bounds,
    Identity,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "fourier" => Ok(Suite::Fourier),
            "ortho" => Ok(Suite::Ortho),
            "bounds" => Ok(Suite::Bounds),
            "identity" => Ok(Suite::Identity),
            _ => Err(Error::Parameter(format!("unknown suite {s:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::All => "all",
            Suite::Fourier => "fourier",
            Suite::Ortho => "ortho",
            Suite::Bounds => "bounds",
            Suite::Identity => "identity",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

fn check(suite: Suite, name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult { suite, check: name.to_string(), pass, detail }
}

/// CSV with columns suite, check, result, detail.
pub fn write_checks_csv<W: Write>(checks: &[CheckResult], mut out: W) -> Result<()> {
    writeln!(out, "suite,check,result,detail")?;
    for c in checks {
        let result = if c.pass { "pass" } else { "fail" };
        writeln!(out, "{},{},{},\"{}\"", c.suite, c.check, result, c.detail.replace('"', "'"))?;
    }
    Ok(())
}

fn random_grid(params: FieldParams, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..params.size()).map(|_| rng.gen_range(0..20) as f64).collect()
}

fn ortho(seed: u64) -> Result<Vec<CheckResult>> {
    let s = Suite::Ortho;
    let mut out = Vec::new();
    let mut agree = true;
    for q in [3, 5, 7] {
        let p = FieldParams::new(q, 2)?;
        agree &= enumerate_group(p)?.encodings() == scan_group(p)?.encodings();
    }
    out.push(check(s, "frame-extension-matches-scan", agree, "d=2, q in {3,5,7}".into()));

    let sizes: Vec<(u32, usize, usize)> = [(3, 2), (5, 2), (7, 2), (3, 3)]
        .iter()
        .map(|&(q, d)| Ok((q, d, enumerate_group(FieldParams::new(q, d)?)?.len())))
        .collect::<Result<_>>()?;
    let expected = |q: u32, d: usize| -> usize {
        let q = q as usize;
        match d {
            2 if q % 4 == 1 => 2 * (q - 1),
            2 => 2 * (q + 1),
            _ => 2 * q * (q * q - 1),
        }
    };
    let ok = sizes.iter().all(|&(q, d, n)| n == expected(q, d));
    let detail = sizes.iter().map(|(q, d, n)| format!("|O_{d}(F_{q})|={n}")).collect::<Vec<_>>().join(" ");
    out.push(check(s, "group-sizes", ok, detail));

    let g = enumerate_group(FieldParams::new(3, 3)?)?;
    out.push(check(s, "closed-under-composition", g.is_group(), "d=3, q=3".into()));

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 1]));
    let mut worst = 1.0f64;
    for (q, d) in [(3u32, 2usize), (5, 2), (3, 3)] {
        let p = FieldParams::new(q, d)?;
        let group = enumerate_group(p)?;
        for n in 1..=d + 1 {
            let mut found = 0;
            while found < 5 {
                let pts: Vec<Vector> = (0..n).map(|_| p.vector_at(rng.gen_range(0..p.size()))).collect();
                let mut simplex = vec![p.zero()];
                simplex.extend(pts.iter().cloned());
                if !is_nondegenerate(p, &simplex) {
                    continue;
                }
                found += 1;
                let size = group.stabilizer_size(&pts) as f64;
                let target = (q as f64).powi(stab_exponent(n, d) as i32);
                worst = worst.max(size / target).max(target / size);
            }
        }
    }
    out.push(check(s, "stabilizer-law", worst <= 4.0, format!("worst factor {worst:.4}")));
    Ok(out)
}

fn fourier(seed: u64) -> Result<Vec<CheckResult>> {
    let s = Suite::Fourier;
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 2]));
    let mut worst = 0.0f64;
    for i in 0..20 {
        let p = FieldParams::new([3, 5, 7][i % 3], 1 + i % 2)?;
        let g = ComplexGrid::from_real(p, &random_grid(p, &mut rng))?;
        let scale = g.sum_sq() / p.size() as f64;
        if scale > 0.0 {
            worst = worst.max(parseval_defect(&g) / scale);
        }
    }
    out.push(check(s, "parseval", worst <= 1e-9, format!("max relative defect {worst:.3e}")));

    let mut worst_lambda = 0.0f64;
    let mut worst_gamma = 0.0f64;
    for (i, q) in [3u32, 5, 7].into_iter().enumerate() {
        let p = FieldParams::new(q, 2)?;
        let e = sample_density(p, 0.5, derive_seed(&[seed, 3, i as u64]));
        let group = enumerate_group(p)?;
        let space = Space::new(p);
        let action = group.action(&space)?;
        let expected = (e.len() * e.len()) as f64 / p.size() as f64;
        for theta in group.elements() {
            let hat = transform(&lambda(&e, theta)?.to_complex());
            worst_lambda = worst_lambda.max((hat.get(0).re - expected).abs() / expected.max(1.0));
        }
        // Γ̂_θ(m) = q^d f̂(m) conj(f̂(θ^{-1} m)).
        let tree = WeakTree::path(1, 1)?;
        let f = f_tree(&e, &tree, &ClassKey(vec![1]))?;
        let f_hat = transform(&f.to_complex());
        for (gi, theta) in group.elements().iter().enumerate().take(4) {
            let gamma = crate::counting::gamma(&e, theta, &tree, &ClassKey(vec![1]))?;
            let g_hat = transform(&gamma.to_complex());
            let inv = action.inverse(gi);
            let scale = gamma.l1() as f64 / p.size() as f64;
            for m in 0..p.size() {
                let rhs: Complex64 = f_hat.get(m) * f_hat.get(action.apply(inv, m)).conj() * p.size() as f64;
                worst_gamma = worst_gamma.max((g_hat.get(m) - rhs).norm() / scale.max(1.0));
            }
        }
    }
    out.push(check(s, "lambda-zero-coefficient", worst_lambda <= 1e-9, format!("max relative error {worst_lambda:.3e}")));
    out.push(check(s, "gamma-factorization", worst_gamma <= 1e-9, format!("max relative error {worst_gamma:.3e}")));
    Ok(out)
}

fn bounds(seed: u64) -> Result<Vec<CheckResult>> {
    let s = Suite::Bounds;
    let mut out = Vec::new();
    let report = bound_report(&BoundsConfig { seed, ..BoundsConfig::default() })?;
    for sum in &report.summaries {
        let slope = sum.slope.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        out.push(check(
            s,
            &format!("{}-d{}", sum.lemma, sum.d),
            sum.pass,
            format!("max ratio {:.4}, slope {slope}", sum.max_ratio),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 4]));
    let mut worst = 0.0f64;
    for i in 0..20 {
        let p = FieldParams::new([3, 5, 7][i % 3], 2)?;
        let mut grid = random_grid(p, &mut rng);
        // Sparse spikes stress the variance term.
        if i % 2 == 1 {
            grid.iter_mut().enumerate().for_each(|(j, v)| if j % 5 != 0 { *v = 0.0 });
        }
        for n in [2, 3] {
            worst = worst.max(taylor_check(p, &grid, n)?.ratio);
        }
    }
    out.push(check(s, "finite-taylor", worst <= 4.0, format!("max ratio {worst:.4}")));
    Ok(out)
}

fn identity(seed: u64) -> Result<Vec<CheckResult>> {
    let s = Suite::Identity;
    let mut out = Vec::new();
    let mut all = true;
    for d in 2..=6 {
        for n in 1..=8 {
            for m in 1..=8 {
                all &= exponent_identity_check(d, n, m)?.balanced;
            }
        }
    }
    out.push(check(s, "exponent-identity", all, "n, m in [1,8], d in [2,6]".into()));

    let p = FieldParams::new(5, 2)?;
    let e = sample_density(p, 0.4, derive_seed(&[seed, 5]));
    let group = enumerate_group(p)?;
    let mut l1_ok = true;
    for theta in group.elements() {
        l1_ok &= lambda(&e, theta)?.l1() == (e.len() * e.len()) as u128;
    }
    out.push(check(s, "lambda-l1", l1_ok, format!("|E|={}", e.len())));

    let tree = WeakTree::path(2, 1)?;
    let key = ClassKey(vec![1, 2]);
    let f1 = f_tree(&e, &tree, &key)?.l1();
    let mut gamma_ok = true;
    for theta in group.elements() {
        gamma_ok &= crate::counting::gamma(&e, theta, &tree, &key)?.l1() == f1 * f1;
    }
    out.push(check(s, "gamma-l1", gamma_ok, format!("|f|_1={f1}")));
    Ok(out)
}

/// Runs a suite; results are a pure function of the seed.
pub fn verify(suite: Suite, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Ortho) {
        out.extend(ortho(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Fourier) {
        out.extend(fourier(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Bounds) {
        out.extend(bounds(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Identity) {
        out.extend(identity(seed)?);
    }
    Ok(out)
}
