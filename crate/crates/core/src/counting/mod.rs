//! Embedding counts over a point set E ⊂ F_q^d.
//!
//! Everything here is exact integer arithmetic. Grids are indexed by the
//! dense point index of [`FieldParams`](crate::field::FieldParams).

mod cycles;
mod embed;
mod histogram;
mod sums;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{FieldParams, Space, Vector};
use crate::fourier::ComplexGrid;
use crate::group::OrthogonalElement;

pub use cycles::{cycle_sums, Adjacency, CycleSum};
pub use embed::{
    beta_alpha, f_rooted, f_tree, gamma, obstruction_probe, path_counts, ObstructionProbe,
};
pub use histogram::{
    cauchy_schwarz_lower_bound, nu_histogram, ClassHistogram, ClassKey, NuOptions, MAX_ORACLE_MAPS,
    MAX_ORACLE_POINTS, MAX_ORACLE_VERTICES,
};
pub use sums::{d_free_rooted, d_simplex, r_rooted, Mode, RootedSum, SumContext};

/// Limit on q^{2d} for dense pair grids.
pub const MAX_PAIR_CELLS: u64 = 1 << 24;

/// A finite point set E ⊂ F_q^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    params: FieldParams,
    indices: Vec<usize>,
    position: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

/// A nonnegative integer function on F_q^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountGrid {
    params: FieldParams,
    counts: Vec<u64>,
}

/// A nonnegative integer function on F_q^d × F_q^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairGrid {
    params: FieldParams,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct PointSetDoc {
    points: Vec<Vec<i64>>,
}

impl PointSet {
    pub fn from_indices(params: FieldParams, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return param("point set contains a repeated point");
        }
        if indices.last().is_some_and(|&i| i >= params.size()) {
            return param("point index out of range");
        }
        let mut position = vec![ABSENT; params.size()];
        for (p, &i) in indices.iter().enumerate() {
            position[i] = p as u32;
        }
        Ok(PointSet {
            params,
            indices,
            position,
        })
    }

    pub fn new(params: FieldParams, points: &[Vector]) -> Result<Self> {
        for p in points {
            if p.dim() != params.d() || p.coords().iter().any(|&c| c >= params.q()) {
                return param("point outside F_q^d");
            }
        }
        Self::from_indices(params, points.iter().map(|p| params.index_of(p)).collect())
    }

    pub fn full(params: FieldParams) -> Self {
        Self::from_indices(params, (0..params.size()).collect()).expect("distinct indices")
    }

    pub fn empty(params: FieldParams) -> Self {
        Self::from_indices(params, Vec::new()).expect("empty set")
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Point indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.position.get(idx).is_some_and(|&p| p != ABSENT)
    }

    /// Position of a point index within [`indices`](Self::indices).
    pub fn position(&self, idx: usize) -> Option<usize> {
        self.position
            .get(idx)
            .and_then(|&p| (p != ABSENT).then_some(p as usize))
    }

    pub fn points(&self) -> Vec<Vector> {
        self.indices.iter().map(|&i| self.params.vector_at(i)).collect()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Reads `{"points": [[x1, …, xd], …]}`.
    pub fn from_json(params: FieldParams, text: &str) -> Result<Self> {
        let doc: PointSetDoc = serde_json::from_str(text)?;
        let points = doc
            .points
            .iter()
            .map(|p| params.vector(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, &points)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = PointSetDoc {
            points: self
                .points()
                .iter()
                .map(|v| v.coords().iter().map(|&c| c as i64).collect())
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }
}

impl CountGrid {
    pub fn zeros(params: FieldParams) -> Self {
        CountGrid {
            params,
            counts: vec![0; params.size()],
        }
    }

    pub(crate) fn from_counts(params: FieldParams, counts: Vec<u64>) -> Self {
        debug_assert_eq!(counts.len(), params.size());
        CountGrid { params, counts }
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn at(&self, v: &Vector) -> u64 {
        self.counts[self.params.index_of(v)]
    }

    pub fn l1(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    pub fn linf(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Σ c(x)^n with overflow checking.
    pub fn power_sum(&self, n: u32) -> Result<u128> {
        self.counts.iter().try_fold(0u128, |acc, &c| {
            (c as u128)
                .checked_pow(n)
                .and_then(|p| acc.checked_add(p))
                .ok_or(Error::Overflow("power sum"))
        })
    }

    pub fn to_complex(&self) -> ComplexGrid {
        let values = self.counts.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
        ComplexGrid::from_values(self.params, values).expect("sizes agree")
    }

    /// CSV with columns x1..xd, count.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.params.d()).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},count", header.join(","))?;
        for (i, &c) in self.counts.iter().enumerate() {
            let v = self.params.vector_at(i);
            let coords: Vec<String> = v.coords().iter().map(u32::to_string).collect();
            writeln!(out, "{},{c}", coords.join(","))?;
        }
        Ok(())
    }

    /// Flat little-endian u64 counts in point-index order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        for &c in &self.counts {
            out.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }
}

impl PairGrid {
    pub fn zeros(params: FieldParams) -> Result<Self> {
        let cells = (params.size() as u64).pow(2);
        if cells > MAX_PAIR_CELLS {
            return Err(Error::Resource(format!(
                "pair grid with {cells} cells exceeds {MAX_PAIR_CELLS}"
            )));
        }
        Ok(PairGrid {
            params,
            counts: vec![0; cells as usize],
        })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.params.size() + b]
    }

    pub(crate) fn add(&mut self, a: usize, b: usize, v: u64) -> Result<()> {
        let cell = &mut self.counts[a * self.params.size() + b];
        *cell = cell.checked_add(v).ok_or(Error::Overflow("pair grid"))?;
        Ok(())
    }

    pub fn l1(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// Nonzero entries as (a, b, count), in index order.
    pub fn support(&self) -> Vec<(usize, usize, u64)> {
        let n = self.params.size();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i / n, i % n, c))
            .collect()
    }
}

/// Applies θ to every point index.
pub(crate) fn rotation_perm(space: &Space, theta: &OrthogonalElement) -> Vec<usize> {
    let p = space.params();
    (0..space.size())
        .map(|x| p.index_of(&theta.apply(p, &p.vector_at(x))))
        .collect()
}

/// λ_θ(w) = #{(u, u') ∈ E² : u − θu' = w}, given θ as an index permutation.
pub(crate) fn lambda_perm(space: &Space, e: &PointSet, perm: &[u32]) -> Vec<u64> {
    let mut counts = vec![0u64; space.size()];
    for &up in e.indices() {
        let rot = perm[up] as usize;
        for &u in e.indices() {
            counts[space.sub(u, rot)] += 1;
        }
    }
    counts
}

/// λ_θ(w) = #{(u, u') ∈ E² : u − θu' = w}.
pub fn lambda(e: &PointSet, theta: &OrthogonalElement) -> Result<CountGrid> {
    let params = e.params();
    if theta.dim() != params.d() {
        return param("rotation dimension differs from the point set");
    }
    let space = Space::new(params);
    let perm: Vec<u32> = rotation_perm(&space, theta).into_iter().map(|x| x as u32).collect();
    Ok(CountGrid::from_counts(params, lambda_perm(&space, e, &perm)))
}

/// Distances between points of E, by position.
pub(crate) fn distance_matrix(space: &Space, e: &PointSet) -> Vec<u32> {
    let idx = e.indices();
    let n = idx.len();
    let mut out = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = space.dist(idx[i], idx[j]);
        }
    }
    out
}
