//! Threshold sweeps: the proportion of congruence classes realized by random E.

use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, median, sample_subset};
use crate::counting::{cauchy_schwarz_lower_bound, nu_histogram, NuOptions};
use crate::error::{param, Error, Result};
use crate::field::FieldParams;
use crate::structure::{SimplexStructure, StructureDoc};

/// Attached to every report.
pub const CAVEAT: &str = "consistency probe only: asymptotic thresholds cannot be confirmed or refuted at these field sizes";

fn default_c0() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub structure: StructureDoc,
    pub d: usize,
    pub q: Vec<u32>,
    /// Exponents s as rationals such as "3/2".
    pub s: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    /// A cell passes when Δ(E) ≥ c₀ · q^{c(structure)}.
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Count only classes with every distance nonzero.
    #[serde(default)]
    pub nonzero_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub q: u32,
    pub s: String,
    pub trial: usize,
    pub size: usize,
    pub delta: usize,
    pub proportion: f64,
    pub pass: bool,
    pub cauchy_schwarz: f64,
    /// Reason the cell was not computed.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub q: u32,
    /// (s, median proportion) over computed trials.
    pub medians: Vec<(String, Option<f64>)>,
    /// Smallest s on the grid whose median proportion reaches c₀.
    pub transition: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub caveat: String,
    pub classes_exponent: usize,
    pub c0: f64,
    pub cells: Vec<SweepCell>,
    pub summaries: Vec<SweepSummary>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn grid(&self) -> Result<Vec<Ratio<i64>>> {
        self.s
            .iter()
            .map(|s| {
                let r = Ratio::<i64>::from_str(s.trim())
                    .map_err(|_| Error::Parameter(format!("bad exponent {s:?}")))?;
                if r <= Ratio::from_integer(0) || r > Ratio::from_integer(self.d as i64) {
                    return param(format!("exponent {s} lies outside (0, d]"));
                }
                Ok(r)
            })
            .collect()
    }
}

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "q,s,trial,size,delta,proportion,pass,cauchy_schwarz,skipped")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.q,
                c.s,
                c.trial,
                c.size,
                c.delta,
                c.proportion,
                c.pass,
                c.cauchy_schwarz,
                c.skipped.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }
}

fn run_cell(
    structure: &SimplexStructure,
    config: &SweepConfig,
    params: FieldParams,
    s: Ratio<i64>,
    trial: usize,
    classes: f64,
) -> Result<SweepCell> {
    let seed = derive_seed(&[
        config.seed,
        params.q() as u64,
        *s.numer() as u64,
        *s.denom() as u64,
        trial as u64,
    ]);
    let e = sample_subset(params, s, seed)?;
    let mut cell = SweepCell {
        q: params.q(),
        s: s.to_string(),
        trial,
        size: e.len(),
        delta: 0,
        proportion: 0.0,
        pass: false,
        cauchy_schwarz: 0.0,
        skipped: None,
    };
    match nu_histogram(&e, structure, NuOptions::default()) {
        Ok(h) => {
            cell.delta = if config.nonzero_only { h.delta_nonzero() } else { h.delta() };
            cell.proportion = cell.delta as f64 / classes;
            cell.pass = cell.proportion >= config.c0;
            let cs = cauchy_schwarz_lower_bound(&h);
            cell.cauchy_schwarz = *cs.numer() as f64 / *cs.denom() as f64;
        }
        Err(Error::Resource(msg)) => cell.skipped = Some(msg),
        Err(e) => return Err(e),
    }
    Ok(cell)
}

/// Runs every (q, s, trial) cell and summarizes medians per q.
pub fn threshold_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.trials == 0 {
        return param("a sweep needs at least one trial");
    }
    let structure = config.structure.structure()?;
    let grid = config.grid()?;
    let exponent = structure.c(config.d);
    let mut jobs = Vec::new();
    for &q in &config.q {
        let params = FieldParams::new(q, config.d)?;
        for &s in &grid {
            for trial in 0..config.trials {
                jobs.push((params, s, trial));
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(params, s, trial)| {
            let classes = (params.q() as f64).powi(exponent as i32);
            run_cell(&structure, config, params, s, trial, classes)
        })
        .collect::<Result<Vec<_>>>()?;

    let summaries = config
        .q
        .iter()
        .map(|&q| {
            let medians: Vec<(String, Option<f64>)> = grid
                .iter()
                .map(|s| {
                    let label = s.to_string();
                    let props: Vec<f64> = cells
                        .iter()
                        .filter(|c| c.q == q && c.s == label && c.skipped.is_none())
                        .map(|c| c.proportion)
                        .collect();
                    (label, median(&props))
                })
                .collect();
            let mut sorted: Vec<(Ratio<i64>, Option<f64>)> =
                grid.iter().copied().zip(medians.iter().map(|m| m.1)).collect();
            sorted.sort_by_key(|a| a.0);
            let transition = sorted
                .iter()
                .find(|(_, m)| m.is_some_and(|m| m >= config.c0))
                .map(|(s, _)| s.to_string());
            SweepSummary { q, medians, transition }
        })
        .collect();

    Ok(SweepReport {
        caveat: CAVEAT.to_string(),
        classes_exponent: exponent,
        c0: config.c0,
        cells,
        summaries,
    })
}
