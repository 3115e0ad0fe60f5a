//! Brute-force congruence-class histograms ν and the distance-set size Δ(E).

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{distance_matrix, PointSet};
use crate::error::{Error, Result};
use crate::field::{Space, Vector};
use crate::group::rank;
use crate::structure::SimplexStructure;

/// Largest vertex count the oracle enumerates.
pub const MAX_ORACLE_VERTICES: usize = 8;
/// Point sets up to this size are always enumerated.
pub const MAX_ORACLE_POINTS: usize = 60;
/// Larger point sets are enumerated while |E|^|V| stays within this bound.
pub const MAX_ORACLE_MAPS: u128 = 1 << 27;

/// Edge distances t₁, …, t_e in the order of [`SimplexStructure::edges`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassKey(pub Vec<u32>);

impl ClassKey {
    pub fn has_zero(&self) -> bool {
        self.0.contains(&0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NuOptions {
    /// Count only maps under which every simplex is nondegenerate.
    pub nondegenerate_only: bool,
    /// Count maps with at least one degenerate simplex.
    pub track_degenerate: bool,
}

/// ν: the number of maps V → E in each congruence class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassHistogram {
    edges: Vec<(String, String)>,
    counts: BTreeMap<ClassKey, u64>,
    degenerate_maps: Option<u64>,
    nondegenerate_only: bool,
}

impl ClassHistogram {
    pub fn from_counts(edges: Vec<(String, String)>, counts: BTreeMap<ClassKey, u64>) -> Self {
        ClassHistogram {
            edges,
            counts: counts.into_iter().filter(|(_, c)| *c > 0).collect(),
            degenerate_maps: None,
            nondegenerate_only: false,
        }
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn counts(&self) -> &BTreeMap<ClassKey, u64> {
        &self.counts
    }

    pub fn get(&self, key: &ClassKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Δ(E): the number of classes realized.
    pub fn delta(&self) -> usize {
        self.counts.len()
    }

    /// Classes realized with every distance nonzero.
    pub fn delta_nonzero(&self) -> usize {
        self.counts.keys().filter(|k| !k.has_zero()).count()
    }

    /// Number of realized classes with a zero distance.
    pub fn zero_distance_classes(&self) -> usize {
        self.delta() - self.delta_nonzero()
    }

    pub fn total(&self) -> u128 {
        self.counts.values().map(|&c| c as u128).sum()
    }

    pub fn sum_sq(&self) -> u128 {
        self.counts.values().map(|&c| (c as u128) * (c as u128)).sum()
    }

    /// Maps with a degenerate simplex, when tracked.
    pub fn degenerate_maps(&self) -> Option<u64> {
        self.degenerate_maps
    }

    pub fn nondegenerate_only(&self) -> bool {
        self.nondegenerate_only
    }

    /// CSV with one column per edge (named `a-b`), a zero-distance flag and the count.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cols: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        writeln!(out, "{},has_zero,count", cols.join(","))?;
        for (k, c) in &self.counts {
            let ts: Vec<String> = k.0.iter().map(u32::to_string).collect();
            writeln!(out, "{},{},{c}", ts.join(","), u8::from(k.has_zero()))?;
        }
        Ok(())
    }
}

/// (Σν)² / Σν², or 0 for an empty histogram.
pub fn cauchy_schwarz_lower_bound(hist: &ClassHistogram) -> Ratio<u128> {
    let s2 = hist.sum_sq();
    if s2 == 0 {
        return Ratio::from_integer(0);
    }
    let t = hist.total();
    Ratio::new(t * t, s2)
}

fn check_guard(vertices: usize, points: usize) -> Result<()> {
    let maps = (points as u128).checked_pow(vertices as u32).unwrap_or(u128::MAX);
    if vertices > MAX_ORACLE_VERTICES || (points > MAX_ORACLE_POINTS && maps > MAX_ORACLE_MAPS) {
        return Err(Error::Resource(format!(
            "oracle enumeration of {points}^{vertices} maps exceeds its guard"
        )));
    }
    Ok(())
}

struct Walker<'a> {
    n: usize,
    q: u64,
    dist: &'a [u32],
    /// For each vertex slot, the edges (earlier slot, edge index) it closes.
    closes: Vec<Vec<(usize, usize)>>,
    simplices: Vec<Vec<usize>>,
    /// Slot after which each simplex is fully assigned.
    simplex_done_at: Vec<Vec<usize>>,
    e_idx: &'a [usize],
    space: &'a Space,
    opts: NuOptions,
    assign: Vec<usize>,
    key: Vec<u32>,
    dense: Option<Vec<u64>>,
    sparse: HashMap<u64, u64>,
    degenerate: u64,
}

impl Walker<'_> {
    fn nondegenerate(&self, simplex: &[usize]) -> bool {
        let p = self.space.params();
        let base = self.e_idx[self.assign[simplex[0]]];
        let diffs: Vec<Vector> = simplex[1..]
            .iter()
            .map(|&s| p.vector_at(self.space.sub(self.e_idx[self.assign[s]], base)))
            .collect();
        let r = rank(p, &diffs);
        r == diffs.len() || r == p.d()
    }

    fn walk(&mut self, slot: usize, degenerate: bool) {
        if slot == self.assign.len() {
            if degenerate {
                self.degenerate += 1;
                if self.opts.nondegenerate_only {
                    return;
                }
            }
            let code = self.key.iter().rev().fold(0u64, |acc, &t| acc * self.q + t as u64);
            match &mut self.dense {
                Some(d) => d[code as usize] += 1,
                None => *self.sparse.entry(code).or_insert(0) += 1,
            }
            return;
        }
        for x in 0..self.n {
            self.assign[slot] = x;
            for &(earlier, edge) in &self.closes[slot] {
                self.key[edge] = self.dist[self.assign[earlier] * self.n + x];
            }
            let mut deg = degenerate;
            if (self.opts.nondegenerate_only || self.opts.track_degenerate) && !deg {
                for s in &self.simplex_done_at[slot] {
                    if !self.nondegenerate(&self.simplices[*s]) {
                        deg = true;
                        break;
                    }
                }
                if deg && self.opts.nondegenerate_only && !self.opts.track_degenerate {
                    continue;
                }
            }
            self.walk(slot + 1, deg);
        }
    }
}

/// Enumerates every map V → E and records its class key.
pub fn nu_histogram(e: &PointSet, structure: &SimplexStructure, opts: NuOptions) -> Result<ClassHistogram> {
    let vertices: Vec<String> = structure.vertices().into_iter().collect();
    check_guard(vertices.len(), e.len())?;
    let slot = |v: &str| vertices.iter().position(|x| x == v).expect("vertex listed");
    let edges = structure.edges();
    let mut closes = vec![Vec::new(); vertices.len()];
    for (i, (a, b)) in edges.iter().enumerate() {
        let (sa, sb) = (slot(a), slot(b));
        let (lo, hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
        closes[hi].push((lo, i));
    }
    let simplices: Vec<Vec<usize>> = structure
        .simplices()
        .iter()
        .map(|s| s.vertices.iter().map(|v| slot(v)).collect())
        .collect();
    let mut simplex_done_at = vec![Vec::new(); vertices.len()];
    for (i, s) in simplices.iter().enumerate() {
        simplex_done_at[*s.iter().max().expect("nonempty simplex")].push(i);
    }
    let params = e.params();
    let space = Space::new(params);
    let dist = distance_matrix(&space, e);
    let q = params.q() as u64;
    let key_space = (q as u128).checked_pow(edges.len() as u32).unwrap_or(u128::MAX);
    let dense = (key_space <= 1 << 22).then(|| vec![0u64; key_space as usize]);
    let mut w = Walker {
        n: e.len(),
        q,
        dist: &dist,
        closes,
        simplices,
        simplex_done_at,
        e_idx: e.indices(),
        space: &space,
        opts,
        assign: vec![0; vertices.len()],
        key: vec![0; edges.len()],
        dense,
        sparse: HashMap::new(),
        degenerate: 0,
    };
    w.walk(0, false);

    let decode = |mut code: u64| {
        let mut k = Vec::with_capacity(edges.len());
        for _ in 0..edges.len() {
            k.push((code % q) as u32);
            code /= q;
        }
        ClassKey(k)
    };
    let mut counts = BTreeMap::new();
    match &w.dense {
        Some(d) => {
            for (code, &c) in d.iter().enumerate() {
                if c > 0 {
                    counts.insert(decode(code as u64), c);
                }
            }
        }
        None => {
            for (&code, &c) in &w.sparse {
                counts.insert(decode(code), c);
            }
        }
    }
    Ok(ClassHistogram {
        edges,
        counts,
        degenerate_maps: opts.track_degenerate.then_some(w.degenerate),
        nondegenerate_only: opts.nondegenerate_only,
    })
}
