//! The group-action sums D_S, D_(T,S,v0) and R_(T,S0).
//!
//! Sums are accumulated as integers and divided once at the end. In literal
//! mode every simplex contributes a factor 1/Stab(dim S), with Stab the exact
//! minimal stabilizer size. In nondegenerate mode only nondegenerate simplex
//! embeddings count, each pair weighted by |O|/|Stab(h′)| for the pinned
//! simplex h′, so every simplex contributes a factor 1/|O|.

use std::collections::HashMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::PointSet;
use crate::error::{param, Error, Result};
use crate::field::{Space, Vector};
use crate::group::{rank, ActionTable, GroupTable, StabilizerTable};
use crate::structure::{Orientation, RootedTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every map allowed by the displayed sums, degenerate or not.
    Literal,
    /// Only nondegenerate simplex embeddings, with exact per-embedding stabilizers.
    Nondegenerate,
}

/// An exact nonnegative rational `numerator / denominator`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RootedSum {
    pub numerator: u128,
    pub denominator: u128,
}

impl RootedSum {
    pub fn value(&self) -> Ratio<u128> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Shared tables for evaluating sums over one point set and group.
pub struct SumContext<'a> {
    e: &'a PointSet,
    group: &'a GroupTable,
    space: Space,
    action: ActionTable,
    stab: StabilizerTable,
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow("group-action sum"))
}

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow("group-action sum"))
}

/// Per-position-pair weights W_v(x, x′), or `None` for the constant 1.
type Weight = Option<Vec<u128>>;

impl<'a> SumContext<'a> {
    pub fn new(e: &'a PointSet, group: &'a GroupTable) -> Result<Self> {
        if e.params() != group.params() {
            return param("point set and group live in different spaces");
        }
        let space = Space::new(e.params());
        let action = group.action(&space)?;
        let stab = StabilizerTable::new(group, e.params().d());
        Ok(SumContext {
            e,
            group,
            space,
            action,
            stab,
        })
    }

    /// Exact minimal stabilizer size for pinned nondegenerate n-simplices.
    pub fn stab(&self, n: usize) -> usize {
        self.stab.get(n)
    }

    fn n(&self) -> usize {
        self.e.len()
    }

    fn position(&self, v: &Vector) -> Result<usize> {
        let p = self.e.params();
        if v.dim() != p.d() {
            return param("vector dimension differs from the point set");
        }
        self.e
            .position(p.index_of(v))
            .ok_or_else(|| Error::Parameter("base point is not in E".into()))
    }

    /// G_v(t) = Σ_{x − θx′ = t} W(x, x′) for one group element.
    fn vertex_grid(&self, g: usize, w: &Weight) -> Result<Vec<u128>> {
        let idx = self.e.indices();
        let n = self.n();
        let mut grid = vec![0u128; self.space.size()];
        for (j, &xp) in idx.iter().enumerate() {
            let rot = self.action.apply(g, xp);
            for (i, &x) in idx.iter().enumerate() {
                let t = self.space.sub(x, rot);
                let val = match w {
                    Some(w) => w[i * n + j],
                    None => 1,
                };
                grid[t] = add(grid[t], val)?;
            }
        }
        Ok(grid)
    }

    fn grids(&self, g: usize, weights: &[Weight]) -> Result<Vec<Vec<u128>>> {
        let mut plain: Option<Vec<u128>> = None;
        weights
            .iter()
            .map(|w| match w {
                None => {
                    if plain.is_none() {
                        plain = Some(self.vertex_grid(g, &None)?);
                    }
                    Ok(plain.clone().expect("just built"))
                }
                Some(_) => self.vertex_grid(g, w),
            })
            .collect()
    }

    fn product_at(grids: &[Vec<u128>], t: usize) -> Result<u128> {
        grids.iter().try_fold(1u128, |acc, g| mul(acc, g[t]))
    }

    /// Σ_θ Π_v G_v^θ(u − θu′) for every base pair (u, u′) of E.
    fn literal_table(&self, weights: &[Weight]) -> Result<Vec<u128>> {
        let n = self.n();
        let idx = self.e.indices();
        let parts: Vec<Vec<u128>> = (0..self.group.len())
            .into_par_iter()
            .map(|g| -> Result<Vec<u128>> {
                let grids = self.grids(g, weights)?;
                let mut out = vec![0u128; n * n];
                for (b, &up) in idx.iter().enumerate() {
                    let rot = self.action.apply(g, up);
                    for (a, &u) in idx.iter().enumerate() {
                        out[a * n + b] = Self::product_at(&grids, self.space.sub(u, rot))?;
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        sum_tables(parts, n * n)
    }

    /// Σ_θ Σ_t Π_v G_v^θ(t).
    fn literal_total(&self, weights: &[Weight]) -> Result<u128> {
        let parts: Vec<u128> = (0..self.group.len())
            .into_par_iter()
            .map(|g| -> Result<u128> {
                let grids = self.grids(g, weights)?;
                (0..self.space.size()).try_fold(0u128, |acc, t| add(acc, Self::product_at(&grids, t)?))
            })
            .collect::<Result<_>>()?;
        parts.into_iter().try_fold(0u128, add)
    }

    /// Pairs (x, x′) of positions with x − θx′ = t, bucketed by t.
    fn buckets(&self, g: usize) -> Vec<Vec<(u32, u32)>> {
        let idx = self.e.indices();
        let mut out = vec![Vec::new(); self.space.size()];
        for (j, &xp) in idx.iter().enumerate() {
            let rot = self.action.apply(g, xp);
            for (i, &x) in idx.iter().enumerate() {
                out[self.space.sub(x, rot)].push((i as u32, j as u32));
            }
        }
        out
    }

    /// |O| / |Stab(pinned)| for a pinned nondegenerate simplex, else 0.
    fn orbit_weight(&self, base: usize, others: &[usize], cache: &mut HashMap<Vec<usize>, u128>) -> u128 {
        let mut diffs: Vec<usize> = others.iter().map(|&x| self.space.sub(x, base)).collect();
        diffs.sort_unstable();
        if let Some(&w) = cache.get(&diffs) {
            return w;
        }
        let p = self.e.params();
        let vectors: Vec<Vector> = diffs.iter().map(|&x| p.vector_at(x)).collect();
        let r = rank(p, &vectors);
        let w = if r == vectors.len() || r == p.d() {
            let fix = (0..self.group.len())
                .filter(|&g| diffs.iter().all(|&y| self.action.apply(g, y) == y))
                .count();
            (self.group.len() / fix) as u128
        } else {
            0
        };
        cache.insert(diffs, w);
        w
    }

    /// Weighted count of tuples of pairs drawn from `bucket`, one per vertex.
    #[allow(clippy::too_many_arguments)]
    fn nd_tuples(
        &self,
        bucket: &[(u32, u32)],
        weights: &[Weight],
        base: Option<usize>,
        chosen: &mut Vec<(usize, usize)>,
        cache: &mut HashMap<Vec<usize>, u128>,
        acc: u128,
    ) -> Result<u128> {
        let n = self.n();
        let idx = self.e.indices();
        if chosen.len() == weights.len() {
            let pins: Vec<usize> = chosen.iter().map(|&(_, j)| idx[j]).collect();
            let (b, rest) = match base {
                Some(b) => (b, &pins[..]),
                None => (pins[0], &pins[1..]),
            };
            let w = self.orbit_weight(b, rest, cache);
            return mul(acc, w);
        }
        let k = chosen.len();
        let mut total = 0u128;
        for &(i, j) in bucket {
            let (i, j) = (i as usize, j as usize);
            let w = match &weights[k] {
                Some(w) => w[i * n + j],
                None => 1,
            };
            if w == 0 {
                continue;
            }
            chosen.push((i, j));
            let sub = self.nd_tuples(bucket, weights, base, chosen, cache, mul(acc, w)?)?;
            chosen.pop();
            total = add(total, sub)?;
        }
        Ok(total)
    }

    fn nondegenerate_table(&self, weights: &[Weight]) -> Result<Vec<u128>> {
        let n = self.n();
        let idx = self.e.indices();
        let parts: Vec<Vec<u128>> = (0..self.group.len())
            .into_par_iter()
            .map(|g| -> Result<Vec<u128>> {
                let buckets = self.buckets(g);
                let mut cache = HashMap::new();
                let mut out = vec![0u128; n * n];
                for (b, &up) in idx.iter().enumerate() {
                    let rot = self.action.apply(g, up);
                    for (a, &u) in idx.iter().enumerate() {
                        let bucket = &buckets[self.space.sub(u, rot)];
                        out[a * n + b] =
                            self.nd_tuples(bucket, weights, Some(up), &mut Vec::new(), &mut cache, 1)?;
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        sum_tables(parts, n * n)
    }

    fn nondegenerate_total(&self, weights: &[Weight]) -> Result<u128> {
        let parts: Vec<u128> = (0..self.group.len())
            .into_par_iter()
            .map(|g| -> Result<u128> {
                let mut cache = HashMap::new();
                self.buckets(g).iter().try_fold(0u128, |acc, bucket| {
                    add(acc, self.nd_tuples(bucket, weights, None, &mut Vec::new(), &mut cache, 1)?)
                })
            })
            .collect::<Result<_>>()?;
        parts.into_iter().try_fold(0u128, add)
    }

    /// Weights of the non-parent vertices of simplex `c`, from its child branches.
    fn child_weights(&self, o: &Orientation, c: usize, tree: &RootedTree, mode: Mode, skip: Option<&str>) -> Result<Vec<Weight>> {
        let s = &tree.structure().simplices()[c];
        let parent = o.parent_vertex[c].as_deref().or(skip);
        s.vertices
            .iter()
            .filter(|v| Some(v.as_str()) != parent)
            .map(|v| -> Result<Weight> {
                let Some(kids) = o.children[c].get(v) else {
                    return Ok(None);
                };
                let mut w = vec![1u128; self.n() * self.n()];
                for &k in kids {
                    let table = self.branch_table(o, k, tree, mode)?;
                    for (a, b) in w.iter_mut().zip(&table) {
                        *a = mul(*a, *b)?;
                    }
                }
                Ok(Some(w))
            })
            .collect()
    }

    /// Undivided D̃ for the branch hanging from simplex `c`, indexed by the
    /// positions of the parent vertex images.
    fn branch_table(&self, o: &Orientation, c: usize, tree: &RootedTree, mode: Mode) -> Result<Vec<u128>> {
        let weights = self.child_weights(o, c, tree, mode, None)?;
        match mode {
            Mode::Literal => self.literal_table(&weights),
            Mode::Nondegenerate => self.nondegenerate_table(&weights),
        }
    }

    fn denominator(&self, tree: &RootedTree, mode: Mode) -> Result<u128> {
        tree.structure().simplices().iter().try_fold(1u128, |acc, s| {
            let f = match mode {
                Mode::Literal => self.stab(s.dim()),
                Mode::Nondegenerate => self.group.len(),
            };
            mul(acc, f as u128)
        })
    }

    /// D_S(u, u′) = Stab(n)^{−1} Σ_θ λ_θ(u − θu′)^n.
    pub fn d_simplex(&self, u: &Vector, u2: &Vector, n: usize) -> Result<Ratio<u128>> {
        if n == 0 {
            return param("simplex dimension must be at least 1");
        }
        let (a, b) = (self.position(u)?, self.position(u2)?);
        let weights = vec![None; n];
        let table = self.literal_table(&weights)?;
        Ok(Ratio::new(table[a * self.n() + b], self.stab(n) as u128))
    }

    /// D_(T,S,v0)(u, u′) for a free-rooted tree with base points u, u′ for v0.
    pub fn d_free_rooted(&self, tree: &RootedTree, u: &Vector, u2: &Vector, mode: Mode) -> Result<RootedSum> {
        let v0 = tree
            .designated_free_vertex()
            .ok_or_else(|| Error::Parameter("tree has no designated free vertex".into()))?;
        let (a, b) = (self.position(u)?, self.position(u2)?);
        let o = tree.orientation();
        let root = tree.structure().index_of(tree.root())?;
        let weights = self.child_weights(&o, root, tree, mode, Some(v0))?;
        let table = match mode {
            Mode::Literal => self.literal_table(&weights)?,
            Mode::Nondegenerate => self.nondegenerate_table(&weights)?,
        };
        Ok(RootedSum {
            numerator: table[a * self.n() + b],
            denominator: self.denominator(tree, mode)?,
        })
    }

    /// R_(T,S0) = Stab(dim S0)^{−1} Σ_w Σ_θ Π_{v ∈ S0} Σ_{x − θx′ = w} Π_B D_B(x, x′).
    pub fn r_rooted(&self, tree: &RootedTree, mode: Mode) -> Result<RootedSum> {
        let o = tree.orientation();
        let root = tree.structure().index_of(tree.root())?;
        let weights = self.child_weights(&o, root, tree, mode, None)?;
        let numerator = match mode {
            Mode::Literal => self.literal_total(&weights)?,
            Mode::Nondegenerate => self.nondegenerate_total(&weights)?,
        };
        Ok(RootedSum {
            numerator,
            denominator: self.denominator(tree, mode)?,
        })
    }
}

fn sum_tables(parts: Vec<Vec<u128>>, len: usize) -> Result<Vec<u128>> {
    let mut out = vec![0u128; len];
    for part in parts {
        for (a, b) in out.iter_mut().zip(part) {
            *a = add(*a, b)?;
        }
    }
    Ok(out)
}

/// D_S(u, u′) for an n-simplex.
pub fn d_simplex(e: &PointSet, u: &Vector, u2: &Vector, n: usize, group: &GroupTable) -> Result<Ratio<u128>> {
    SumContext::new(e, group)?.d_simplex(u, u2, n)
}

/// D_(T,S,v0)(u, u′) for a free-rooted simplex tree.
pub fn d_free_rooted(
    e: &PointSet,
    tree: &RootedTree,
    u: &Vector,
    u2: &Vector,
    group: &GroupTable,
    mode: Mode,
) -> Result<RootedSum> {
    SumContext::new(e, group)?.d_free_rooted(tree, u, u2, mode)
}

/// R_(T,S0) for a rooted simplex tree.
pub fn r_rooted(e: &PointSet, tree: &RootedTree, group: &GroupTable, mode: Mode) -> Result<RootedSum> {
    SumContext::new(e, group)?.r_rooted(tree, mode)
}
