//! Rooted embedding counts f_T, the correlation Γ_θ, and path statistics.

use serde::Serialize;

use super::histogram::ClassKey;
use super::{distance_matrix, rotation_perm, CountGrid, PairGrid, PointSet};
use crate::error::{param, Error, Result};
use crate::field::Space;
use crate::group::OrthogonalElement;
use crate::structure::{Kind, SimplexStructure, Start, WeakTree};

/// Zero-coefficient probes of β_θ and α_θ for path counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObstructionProbe {
    /// q^{−d} Σ_{‖u−v‖ = ‖u′−v′‖} P(u, v) P(u′, v′): the zero coefficient of β
    /// averaged over the rotations compatible with each pair of paths.
    pub beta_hat_zero: f64,
    /// α̂(0, 0) = q^{−2d} (Σ P)².
    pub alpha_hat_zero: f64,
    pub ratio: f64,
    /// q^{d−1}.
    pub expected_ratio: f64,
    /// β̂_θ(0) = q^{−d} Σ_w β_θ(w) for the supplied θ.
    pub beta_hat_zero_theta: f64,
    pub ratio_theta: f64,
}

/// For each distance t, the positions of E at distance t from each position.
struct Neighbours {
    lists: Vec<Vec<Vec<u32>>>,
}

impl Neighbours {
    fn new(q: u32, n: usize, dist: &[u32]) -> Self {
        let mut lists = vec![vec![Vec::new(); n]; q as usize];
        for x in 0..n {
            for y in 0..n {
                lists[dist[x * n + y] as usize][x].push(y as u32);
            }
        }
        Neighbours { lists }
    }

    fn at(&self, t: u32, x: usize) -> &[u32] {
        &self.lists[t as usize][x]
    }
}

fn key_lookup<'a>(structure: &'a SimplexStructure, key: &ClassKey) -> Result<std::collections::BTreeMap<(&'a str, &'a str), u32>> {
    let edges = structure.edges();
    if key.0.len() != edges.len() {
        return param(format!(
            "class key has {} entries, structure has {} edges",
            key.0.len(),
            edges.len()
        ));
    }
    let mut map = std::collections::BTreeMap::new();
    for s in structure.simplices() {
        for i in 0..s.vertices.len() {
            for j in i + 1..s.vertices.len() {
                let pos = edges
                    .iter()
                    .position(|(a, b)| a == &s.vertices[i] && b == &s.vertices[j])
                    .expect("edge listed");
                map.insert((s.vertices[i].as_str(), s.vertices[j].as_str()), key.0[pos]);
            }
        }
    }
    Ok(map)
}

fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow("embedding count"))
}

/// Counts embeddings of a simplex tree into E rooted at vertex `root`, with
/// edge distances fixed by `key` (edge order of [`SimplexStructure::edges`]).
pub fn f_rooted(e: &PointSet, structure: &SimplexStructure, root: &str, key: &ClassKey) -> Result<CountGrid> {
    if structure.kind() != Kind::Tree {
        return param("rooted embedding counts need a tree");
    }
    structure.validate().map_err(|v| Error::Invalid(v.to_string()))?;
    if !structure.vertices().contains(root) {
        return param(format!("root {root} is not a vertex"));
    }
    if key.0.contains(&0) {
        return param("class key contains a zero distance");
    }
    let params = e.params();
    let q = params.q();
    if key.0.iter().any(|&t| t >= q) {
        return param("class key entry is not a residue");
    }
    let lookup = key_lookup(structure, key)?;
    let t_of = |a: &str, b: &str| if a < b { lookup[&(a, b)] } else { lookup[&(b, a)] };

    let space = Space::new(params);
    let n = e.len();
    let dist = distance_matrix(&space, e);
    let nbr = Neighbours::new(q, n, &dist);
    let o = structure.orient(Start::Vertex(root));
    let simplices = structure.simplices();
    let mut tables: Vec<Vec<u128>> = vec![Vec::new(); simplices.len()];

    let weight_at = |tables: &Vec<Vec<u128>>, kids: Option<&Vec<usize>>| -> Result<Vec<u128>> {
        let mut w = vec![1u128; n];
        for &c in kids.map(Vec::as_slice).unwrap_or(&[]) {
            for (wx, &tx) in w.iter_mut().zip(&tables[c]) {
                *wx = checked_mul(*wx, tx)?;
            }
        }
        Ok(w)
    };

    for &c in o.order.iter().rev() {
        let parent = o.parent_vertex[c].clone().expect("rooted at a vertex");
        let others: Vec<&String> = simplices[c].vertices.iter().filter(|v| **v != parent).collect();
        let weights: Vec<Vec<u128>> = others
            .iter()
            .map(|u| weight_at(&tables, o.children[c].get(*u)))
            .collect::<Result<_>>()?;
        let t_parent: Vec<u32> = others.iter().map(|u| t_of(&parent, u)).collect();
        let t_pair: Vec<Vec<u32>> = others
            .iter()
            .map(|a| others.iter().map(|b| if a == b { 0 } else { t_of(a, b) }).collect())
            .collect();
        let mut table = vec![0u128; n];
        let mut assign = vec![0usize; others.len()];
        for (x, slot) in table.iter_mut().enumerate() {
            *slot = extend(0, x, &mut assign, &nbr, &dist, n, &t_parent, &t_pair, &weights)?;
        }
        tables[c] = table;
    }

    let top: Vec<usize> = o.order.iter().copied().filter(|&c| o.depth[c] == 0).collect();
    let root_weight = weight_at(&tables, Some(&top))?;
    let mut counts = vec![0u64; params.size()];
    for (pos, &idx) in e.indices().iter().enumerate() {
        counts[idx] = u64::try_from(root_weight[pos]).map_err(|_| Error::Overflow("embedding count"))?;
    }
    Ok(CountGrid::from_counts(params, counts))
}

#[allow(clippy::too_many_arguments)]
fn extend(
    i: usize,
    x: usize,
    assign: &mut [usize],
    nbr: &Neighbours,
    dist: &[u32],
    n: usize,
    t_parent: &[u32],
    t_pair: &[Vec<u32>],
    weights: &[Vec<u128>],
) -> Result<u128> {
    if i == assign.len() {
        return Ok(1);
    }
    let mut total = 0u128;
    'cand: for &y in nbr.at(t_parent[i], x) {
        let y = y as usize;
        for j in 0..i {
            if dist[assign[j] * n + y] != t_pair[j][i] {
                continue 'cand;
            }
        }
        let w = weights[i][y];
        if w == 0 {
            continue;
        }
        assign[i] = y;
        let rest = extend(i + 1, x, assign, nbr, dist, n, t_parent, t_pair, weights)?;
        total = total
            .checked_add(checked_mul(w, rest)?)
            .ok_or(Error::Overflow("embedding count"))?;
    }
    Ok(total)
}

/// f_T(x): embeddings of a k-weak tree rooted at x with edge distances `key`.
pub fn f_tree(e: &PointSet, tree: &WeakTree, key: &ClassKey) -> Result<CountGrid> {
    f_rooted(e, tree.structure(), tree.root(), key)
}

/// Γ_θ(w) = Σ_{x − θx′ = w} f_T(x) f_T(x′).
pub fn gamma(e: &PointSet, theta: &OrthogonalElement, tree: &WeakTree, key: &ClassKey) -> Result<CountGrid> {
    let f = f_tree(e, tree, key)?;
    let params = e.params();
    let space = Space::new(params);
    let perm = rotation_perm(&space, theta);
    let support: Vec<(usize, u64)> = f
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i, c))
        .collect();
    let mut counts = vec![0u64; params.size()];
    for &(xp, cp) in &support {
        let rot = perm[xp];
        for &(x, c) in &support {
            let cell = &mut counts[space.sub(x, rot)];
            *cell = c
                .checked_mul(cp)
                .and_then(|v| cell.checked_add(v))
                .ok_or(Error::Overflow("gamma"))?;
        }
    }
    Ok(CountGrid::from_counts(params, counts))
}

/// P(u, v): paths x_1, …, x_k in E with x_1 = u, x_k = v and ‖x_{i+1} − x_i‖ = t_i.
pub fn path_counts(e: &PointSet, key: &[u32]) -> Result<PairGrid> {
    if key.is_empty() {
        return param("a path needs at least one edge");
    }
    let params = e.params();
    if key.iter().any(|&t| t == 0 || t >= params.q()) {
        return param("path key entries must be nonzero residues");
    }
    let mut grid = PairGrid::zeros(params)?;
    let space = Space::new(params);
    let n = e.len();
    let dist = distance_matrix(&space, e);
    let nbr = Neighbours::new(params.q(), n, &dist);
    let idx = e.indices();
    for start in 0..n {
        let mut cur = vec![0u64; n];
        cur[start] = 1;
        for &t in key {
            let mut next = vec![0u64; n];
            for (y, slot) in next.iter_mut().enumerate() {
                for &x in nbr.at(t, y) {
                    *slot = slot
                        .checked_add(cur[x as usize])
                        .ok_or(Error::Overflow("path count"))?;
                }
            }
            cur = next;
        }
        for (v, &c) in cur.iter().enumerate() {
            if c != 0 {
                grid.add(idx[start], idx[v], c)?;
            }
        }
    }
    Ok(grid)
}

/// β_θ(w) = Σ_{u−θu′ = v−θv′ = w} P(u,v)P(u′,v′) and
/// α_θ(w₁, w₂) = Σ_{u−θu′ = w₁, v−θv′ = w₂} P(u,v)P(u′,v′).
pub fn beta_alpha(e: &PointSet, theta: &OrthogonalElement, paths: &PairGrid) -> Result<(CountGrid, PairGrid)> {
    let params = e.params();
    if paths.params() != params {
        return param("path data lives in a different space");
    }
    let space = Space::new(params);
    let perm = rotation_perm(&space, theta);
    let support = paths.support();
    let mut alpha = PairGrid::zeros(params)?;
    for &(up, vp, cp) in &support {
        let (ru, rv) = (perm[up], perm[vp]);
        for &(u, v, c) in &support {
            let prod = c.checked_mul(cp).ok_or(Error::Overflow("alpha"))?;
            alpha.add(space.sub(u, ru), space.sub(v, rv), prod)?;
        }
    }
    let beta = (0..params.size()).map(|w| alpha.get(w, w)).collect();
    Ok((CountGrid::from_counts(params, beta), alpha))
}

/// The zero-coefficient comparison between β and α for one set of path counts.
pub fn obstruction_probe(e: &PointSet, theta: &OrthogonalElement, paths: &PairGrid) -> Result<ObstructionProbe> {
    let params = e.params();
    let space = Space::new(params);
    let qd = params.size() as f64;
    let mut shells = vec![0u128; params.q() as usize];
    for (u, v, c) in paths.support() {
        shells[space.dist(u, v) as usize] += c as u128;
    }
    let total: u128 = shells.iter().sum();
    let shell_sq: f64 = shells.iter().map(|&m| (m as f64) * (m as f64)).sum();
    let beta_hat_zero = shell_sq / qd;
    let alpha_hat_zero = (total as f64) * (total as f64) / (qd * qd);
    let (beta, _) = beta_alpha(e, theta, paths)?;
    let beta_hat_zero_theta = beta.l1() as f64 / qd;
    let ratio_of = |b: f64| if alpha_hat_zero > 0.0 { b / alpha_hat_zero } else { 0.0 };
    Ok(ObstructionProbe {
        beta_hat_zero,
        alpha_hat_zero,
        ratio: ratio_of(beta_hat_zero),
        expected_ratio: (params.q() as f64).powi(params.d() as i32 - 1),
        beta_hat_zero_theta,
        ratio_theta: ratio_of(beta_hat_zero_theta),
    })
}
