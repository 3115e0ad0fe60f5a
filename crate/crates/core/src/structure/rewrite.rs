//! Rewrites that trade one structure for a pair of derived structures.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{shape_key, Kind, Orientation, RootedTree, Simplex, SimplexStructure, Start, StructureDoc};
use crate::error::{param, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewriteKind {
    BranchShift,
    Unbalance,
    CycleUnbalance,
}

/// One application of a rewrite and its two outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RewriteStep {
    pub operation: RewriteKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<StructureDoc>,
}

/// Every rewrite performed by [`canonicalize_traced`] and the terminal trees.
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalTrace {
    pub k: usize,
    pub steps: Vec<RewriteStep>,
    #[serde(skip)]
    pub terminal: Vec<RootedTree>,
}

/// Allocates ids not yet used, by appending `~n` to a base name.
struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    fn new(s: &SimplexStructure) -> Self {
        let mut used = s.vertices();
        used.extend(s.simplices().iter().map(|x| x.id.clone()));
        Fresh { used }
    }

    fn make(&mut self, base: &str) -> String {
        let mut n = 1;
        loop {
            let candidate = format!("{base}~{n}");
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
            n += 1;
        }
    }
}

fn descendants(o: &Orientation, s: usize, v: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = o.children[s].get(v).cloned().unwrap_or_default();
    stack.reverse();
    while let Some(i) = stack.pop() {
        out.push(i);
        for kids in o.children[i].values().rev() {
            stack.extend(kids.iter().rev());
        }
    }
    out
}

fn rebuild(tree: &RootedTree, simplices: Vec<Simplex>) -> Result<RootedTree> {
    let s = SimplexStructure::tree(simplices)?;
    let root = tree.root().to_string();
    let free = tree
        .designated_free_vertex()
        .filter(|v| {
            s.index_of(&root)
                .map(|i| s.unshared_vertices(i).iter().any(|u| u == v))
                .unwrap_or(false)
        })
        .map(str::to_string);
    RootedTree::new(s, root, free)
}

/// Deletes the branches of `s2` at `v2` and duplicates those of `s1` at `v1`
/// (T₁), and symmetrically (T₂). Duplicates receive fresh ids.
pub fn branch_shift(
    tree: &RootedTree,
    s1: &str,
    v1: &str,
    s2: &str,
    v2: &str,
) -> Result<(RootedTree, RootedTree)> {
    let s = tree.structure();
    let (i1, i2) = (s.index_of(s1)?, s.index_of(s2)?);
    let o = tree.orientation();
    for (i, v, name) in [(i1, v1, s1), (i2, v2, s2)] {
        if !o.children[i].contains_key(v) {
            return param(format!("{v} is not a child vertex of {name}"));
        }
    }
    if i1 == i2 && v1 == v2 {
        return param("branch shifting needs two distinct child vertices");
    }
    let b1 = descendants(&o, i1, v1);
    let b2 = descendants(&o, i2, v2);
    if b1.contains(&i2) || b2.contains(&i1) {
        return param("one simplex lies inside the other's shifted branches");
    }
    let shift = |keep: &[usize], drop: &[usize], anchor: &str| -> Result<RootedTree> {
        let mut fresh = Fresh::new(s);
        let mut out: Vec<Simplex> = s
            .simplices()
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, x)| x.clone())
            .collect();
        let mut renamed: BTreeMap<String, String> = BTreeMap::new();
        renamed.insert(anchor.to_string(), anchor.to_string());
        for &i in keep {
            let src = &s.simplices()[i];
            let vertices: Vec<String> = src
                .vertices
                .iter()
                .map(|v| {
                    renamed
                        .entry(v.clone())
                        .or_insert_with(|| fresh.make(v))
                        .clone()
                })
                .collect();
            out.push(Simplex::new(fresh.make(&src.id), vertices));
        }
        rebuild(tree, out)
    };
    Ok((shift(&b1, &b2, v1)?, shift(&b2, &b1, v2)?))
}

fn movable_free(tree: &RootedTree, id: &str) -> Vec<String> {
    let roles = tree.classify_vertices();
    roles[id]
        .free
        .iter()
        .filter(|v| Some(v.as_str()) != tree.designated_free_vertex())
        .cloned()
        .collect()
}

fn move_free(tree: &RootedTree, from: &str, to: &str, count: usize) -> Result<RootedTree> {
    let s = tree.structure();
    let free = movable_free(tree, from);
    let removed: BTreeSet<&String> = free.iter().rev().take(count).collect();
    let mut fresh = Fresh::new(s);
    let out = s
        .simplices()
        .iter()
        .map(|x| {
            if x.id == from {
                Simplex::new(
                    x.id.clone(),
                    x.vertices.iter().filter(|v| !removed.contains(v)).cloned(),
                )
            } else if x.id == to {
                let mut vs = x.vertices.clone();
                vs.extend((0..count).map(|_| fresh.make(&format!("{to}.v"))));
                Simplex::new(x.id.clone(), vs)
            } else {
                x.clone()
            }
        })
        .collect();
    rebuild(tree, out)
}

/// Moves `k2` free vertices from `s2` to `s1` (T₁) and `k1` from `s1` to `s2` (T₂).
///
/// The lexicographically largest free vertices move first; the designated
/// free vertex of a free-rooted tree never moves.
pub fn simplex_unbalance(
    tree: &RootedTree,
    s1: &str,
    k1: usize,
    s2: &str,
    k2: usize,
) -> Result<(RootedTree, RootedTree)> {
    if s1 == s2 {
        return param("simplex unbalancing needs two distinct simplices");
    }
    let s = tree.structure();
    for (id, k) in [(s1, k1), (s2, k2)] {
        let dim = s.simplices()[s.index_of(id)?].dim();
        let free = movable_free(tree, id).len();
        if dim < 2 {
            return param(format!("{id} has dimension {dim} < 2"));
        }
        if free == 0 || k == 0 || k > free {
            return param(format!("{id} has {free} movable free vertices, asked to move {k}"));
        }
        if dim < k + 1 {
            return param(format!("moving {k} vertices would leave {id} below dimension 1"));
        }
    }
    Ok((move_free(tree, s2, s1, k2)?, move_free(tree, s1, s2, k1)?))
}

/// Big simplices (dimension > k) with at most one vertex leading to another
/// big simplex, sorted by id.
fn k_leaves(s: &SimplexStructure, k: usize) -> Vec<usize> {
    let big: Vec<bool> = s.simplices().iter().map(|x| x.dim() > k).collect();
    let mut out: Vec<usize> = (0..big.len())
        .filter(|&i| big[i])
        .filter(|&i| {
            let o = s.orient(Start::Simplex(i));
            o.children[i]
                .keys()
                .filter(|v| descendants(&o, i, v).iter().any(|&j| big[j]))
                .count()
                <= 1
        })
        .collect();
    out.sort_by(|&a, &b| s.simplices()[a].id.cmp(&s.simplices()[b].id));
    out
}

fn big_count(s: &SimplexStructure, k: usize) -> usize {
    s.dims().into_iter().filter(|&n| n > k).count()
}

/// Child vertices of `leaf` (in `t`, rooted at `l1`) whose branches hold only
/// small simplices.
fn small_branch_vertices(t: &RootedTree, leaf: &str, k: usize) -> Vec<String> {
    let s = t.structure();
    let i = s.index_of(leaf).expect("leaf exists");
    let o = t.orientation();
    o.children[i]
        .keys()
        .filter(|v| {
            descendants(&o, i, v)
                .iter()
                .all(|&j| s.simplices()[j].dim() <= k)
        })
        .cloned()
        .collect()
}

fn dedup(trees: Vec<RootedTree>) -> Vec<RootedTree> {
    let mut seen = BTreeMap::new();
    for t in trees {
        seen.entry(shape_key(t.structure())).or_insert(t);
    }
    seen.into_values().collect()
}

fn record(steps: &mut Vec<RewriteStep>, operation: RewriteKind, inputs: Vec<String>, a: &RootedTree, b: &RootedTree) {
    steps.push(RewriteStep {
        operation,
        inputs,
        outputs: vec![a.to_doc(), b.to_doc()],
    });
}

/// One round: isolate child vertices on two k-leaves, then unbalance them.
fn round(t: &RootedTree, k: usize, steps: &mut Vec<RewriteStep>) -> Result<Vec<RootedTree>> {
    let s = t.structure();
    let leaves = k_leaves(s, k);
    let (l1, l2) = (s.simplices()[leaves[0]].id.clone(), s.simplices()[leaves[1]].id.clone());
    let work = RootedTree::new(s.clone(), l1.clone(), None)?;
    let mut states = vec![work];

    for leaf in [&l1, &l2] {
        let mut done = Vec::new();
        while let Some(st) = states.pop() {
            let vs = small_branch_vertices(&st, leaf, k);
            if vs.len() >= 2 {
                let (a, b) = branch_shift(&st, leaf, &vs[0], leaf, &vs[1])?;
                record(steps, RewriteKind::BranchShift, vec![leaf.clone(), vs[0].clone(), leaf.clone(), vs[1].clone()], &a, &b);
                states.push(a);
                states.push(b);
            } else {
                done.push(st);
            }
        }
        states = dedup(done);
    }

    let mut isolated = Vec::new();
    for st in states {
        let (u1, u2) = (small_branch_vertices(&st, &l1, k), small_branch_vertices(&st, &l2, k));
        if let (Some(a1), Some(a2)) = (u1.first(), u2.first()) {
            let (a, b) = branch_shift(&st, &l1, a1, &l2, a2)?;
            record(steps, RewriteKind::BranchShift, vec![l1.clone(), a1.clone(), l2.clone(), a2.clone()], &a, &b);
            isolated.push(a);
            isolated.push(b);
        } else {
            isolated.push(st);
        }
    }

    let mut out = Vec::new();
    for st in dedup(isolated) {
        let dim = |id: &str| st.structure().simplex(id).expect("leaf survives").dim();
        let (k1, k2) = (dim(&l1) - k, dim(&l2) - k);
        let (a, b) = simplex_unbalance(&st, &l1, k1, &l2, k2)?;
        record(steps, RewriteKind::Unbalance, vec![l1.clone(), k1.to_string(), l2.clone(), k2.to_string()], &a, &b);
        out.push(a);
        out.push(b);
    }
    out.into_iter()
        .map(|x| {
            let root = if x.structure().simplex(t.root()).is_some() {
                t.root().to_string()
            } else {
                l1.clone()
            };
            let keep = t.designated_free_vertex().filter(|v| {
                let s = x.structure();
                s.index_of(&root)
                    .map(|i| s.unshared_vertices(i).iter().any(|u| u == v))
                    .unwrap_or(false)
            });
            RootedTree::new(x.structure().clone(), root, keep.map(str::to_string))
        })
        .collect()
}

/// Rewrites until each tree has at most one simplex of dimension > k, and
/// records every rewrite.
pub fn canonicalize_traced(tree: &RootedTree, k: usize) -> Result<CanonicalTrace> {
    if k == 0 {
        return param("k must be at least 1");
    }
    let mut steps = Vec::new();
    let mut frontier = vec![tree.clone()];
    let mut terminal = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for t in frontier {
            let before = big_count(t.structure(), k);
            if before <= 1 {
                terminal.push(t);
                continue;
            }
            for out in round(&t, k, &mut steps)? {
                if big_count(out.structure(), k) >= before {
                    return Err(Error::Invalid("rewrite round did not shrink the big simplices".into()));
                }
                next.push(out);
            }
        }
        frontier = dedup(next);
    }
    Ok(CanonicalTrace {
        k,
        steps,
        terminal: dedup(terminal),
    })
}

/// Terminal trees of the canonicalization, deduplicated by shape.
pub fn canonicalize(tree: &RootedTree, k: usize) -> Result<Vec<RootedTree>> {
    Ok(canonicalize_traced(tree, k)?.terminal)
}

/// C₁ moves every free vertex of `s2` onto `s1`; C₂ is the mirror.
pub fn cycle_unbalance(
    cycle: &SimplexStructure,
    s1: &str,
    s2: &str,
) -> Result<(SimplexStructure, SimplexStructure)> {
    if cycle.kind() != Kind::Cycle {
        return param("cycle unbalancing needs a cycle");
    }
    cycle.validate().map_err(|v| Error::Invalid(v.to_string()))?;
    if s1 == s2 {
        return param("cycle unbalancing needs two distinct simplices");
    }
    let (i1, i2) = (cycle.index_of(s1)?, cycle.index_of(s2)?);
    for i in [i1, i2] {
        if cycle.simplices()[i].dim() < 2 {
            return param(format!("{} has dimension < 2", cycle.simplices()[i].id));
        }
    }
    let apply = |to: usize, from: usize| -> Result<SimplexStructure> {
        let removed = cycle.unshared_vertices(from);
        let mut fresh = Fresh::new(cycle);
        let to_id = cycle.simplices()[to].id.clone();
        let simplices = cycle
            .simplices()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if i == from {
                    Simplex::new(x.id.clone(), x.vertices.iter().filter(|v| !removed.contains(v)).cloned())
                } else if i == to {
                    let mut vs = x.vertices.clone();
                    vs.extend(removed.iter().map(|_| fresh.make(&format!("{to_id}.v"))));
                    Simplex::new(x.id.clone(), vs)
                } else {
                    x.clone()
                }
            })
            .collect();
        SimplexStructure::cycle(simplices)
    };
    Ok((apply(i1, i2)?, apply(i2, i1)?))
}

/// Applies [`cycle_unbalance`] to the first two simplices of dimension ≥ 2
/// until none remain; returns the distinct terminal cycles.
pub fn cycle_normal_forms(cycle: &SimplexStructure) -> Result<Vec<SimplexStructure>> {
    let mut frontier = vec![cycle.clone()];
    let mut out = BTreeMap::new();
    while let Some(c) = frontier.pop() {
        let mut big: Vec<&Simplex> = c.simplices().iter().filter(|s| s.dim() >= 2).collect();
        big.sort_by(|a, b| a.id.cmp(&b.id));
        if big.len() < 2 {
            out.entry(shape_key(&c)).or_insert(c);
            continue;
        }
        let (a, b) = cycle_unbalance(&c, &big[0].id, &big[1].id)?;
        frontier.push(a);
        frontier.push(b);
    }
    Ok(out.into_values().collect())
}
