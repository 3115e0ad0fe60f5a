//! Congruent-pair sums over a cycle of simplices, split at two distinguished simplices.
//!
//! The chains joining the two simplices are summarized by
//! M((x₁, x₂), (x₁′, x₂′)) = Σ_δ f_δ(x₁, x₂) f_δ(x₁′, x₂′), where f_δ counts chain
//! embeddings in class δ with prescribed endpoint images. The rotation sums
//! then only need M.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{distance_matrix, lambda_perm, PointSet, MAX_ORACLE_MAPS};
use crate::error::{param, Error, Result};
use crate::field::Space;
use crate::group::{GroupTable, StabilizerTable};
use crate::structure::{Kind, Simplex, SimplexStructure};

/// Limit on |E|⁴ for the chain pairing table.
const MAX_CHAIN_TABLE: usize = 1 << 24;
/// Limit on |O|²·|E|⁴ inner-loop steps.
const MAX_CYCLE_WORK: u128 = 1 << 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    Adjacent,
    Nonadjacent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSum {
    pub adjacency: Adjacency,
    pub numerator: u128,
    pub denominator: u128,
}

impl CycleSum {
    pub fn value(&self) -> Ratio<u128> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow("cycle sum"))
}

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow("cycle sum"))
}

fn shared_vertex(a: &Simplex, b: &Simplex) -> String {
    a.vertices
        .iter()
        .find(|v| b.contains(v))
        .cloned()
        .expect("consecutive cycle simplices share a vertex")
}

/// Pairing table M over positions in E, flattened as ((x₁·n + x₂)·n + x₁′)·n + x₂′.
fn chain_table(e: &PointSet, dist: &[u32], chain: &[Simplex], start: &str, end: &str) -> Result<Vec<u64>> {
    let n = e.len();
    let mut vertices: Vec<String> = vec![start.to_string(), end.to_string()];
    for s in chain {
        for v in &s.vertices {
            if !vertices.contains(v) {
                vertices.push(v.clone());
            }
        }
    }
    let maps = (n as u128).checked_pow(vertices.len() as u32).unwrap_or(u128::MAX);
    if maps > MAX_ORACLE_MAPS {
        return Err(Error::Resource(format!(
            "chain enumeration of {n}^{} maps exceeds its guard",
            vertices.len()
        )));
    }
    let slot = |v: &str| vertices.iter().position(|x| x == v).expect("vertex listed");
    let edges = SimplexStructure::new(Kind::Tree, chain.to_vec()).edges();
    let mut closes = vec![Vec::new(); vertices.len()];
    for (i, (a, b)) in edges.iter().enumerate() {
        let (sa, sb) = (slot(a), slot(b));
        closes[sa.max(sb)].push((sa.min(sb), i));
    }

    // Class histogram for each endpoint pair.
    let mut by_class: HashMap<Vec<u32>, HashMap<usize, u64>> = HashMap::new();
    let mut assign = vec![0usize; vertices.len()];
    let mut key = vec![0u32; edges.len()];
    fn walk(
        slot: usize,
        n: usize,
        dist: &[u32],
        closes: &[Vec<(usize, usize)>],
        assign: &mut [usize],
        key: &mut [u32],
        out: &mut HashMap<Vec<u32>, HashMap<usize, u64>>,
    ) {
        if slot == assign.len() {
            *out.entry(key.to_vec()).or_default().entry(assign[0] * n + assign[1]).or_insert(0) += 1;
            return;
        }
        for x in 0..n {
            assign[slot] = x;
            for &(earlier, edge) in &closes[slot] {
                key[edge] = dist[assign[earlier] * n + x];
            }
            walk(slot + 1, n, dist, closes, assign, key, out);
        }
    }
    if n > 0 {
        walk(0, n, dist, &closes, &mut assign, &mut key, &mut by_class);
    }

    let mut table = vec![0u64; n.pow(4)];
    for cells in by_class.values() {
        for (&p, &c) in cells {
            for (&p2, &c2) in cells {
                let cell = &mut table[p * n * n + p2];
                *cell = cell.checked_add(c * c2).ok_or(Error::Overflow("chain table"))?;
            }
        }
    }
    Ok(table)
}

struct Setup<'a> {
    e: &'a PointSet,
    space: Space,
    group: &'a GroupTable,
    perms: Vec<Vec<u32>>,
    lambdas: Vec<Vec<u64>>,
}

impl Setup<'_> {
    /// K_{θ,φ}(w₁, w₂) = Σ M((x₁, x₂), (x₁′, x₂′)) over x₁ − θx₁′ = w₁, x₂ − φx₂′ = w₂.
    fn paired(&self, table: &[u64], theta: usize, phi: usize) -> Result<Vec<u128>> {
        let size = self.space.size();
        let idx = self.e.indices();
        let n = idx.len();
        let mut out = vec![0u128; size * size];
        for (x1, &i1) in idx.iter().enumerate() {
            for (x2, &i2) in idx.iter().enumerate() {
                let row = (x1 * n + x2) * n * n;
                for (y1, &j1) in idx.iter().enumerate() {
                    let w1 = self.space.sub(i1, self.perms[theta][j1] as usize);
                    for (y2, &j2) in idx.iter().enumerate() {
                        let c = table[row + y1 * n + y2];
                        if c == 0 {
                            continue;
                        }
                        let w2 = self.space.sub(i2, self.perms[phi][j2] as usize);
                        out[w1 * size + w2] += c as u128;
                    }
                }
            }
        }
        Ok(out)
    }

    fn lambda_pow(&self, g: usize, w: usize, exp: usize) -> Result<u128> {
        (self.lambdas[g][w] as u128)
            .checked_pow(exp as u32)
            .ok_or(Error::Overflow("cycle sum"))
    }
}

/// D_nonadj or D_adj for the cycle split at simplices `s1` and `s2`.
pub fn cycle_sums(
    e: &PointSet,
    cycle: &SimplexStructure,
    s1: &str,
    s2: &str,
    adjacency: Adjacency,
    group: &GroupTable,
) -> Result<CycleSum> {
    if cycle.kind() != Kind::Cycle {
        return param("cycle sums need a cycle");
    }
    cycle.validate().map_err(|v| Error::Invalid(v.to_string()))?;
    let params = e.params();
    if group.params() != params {
        return param("group parameters differ from the point set");
    }
    let (i1, i2) = (cycle.index_of(s1)?, cycle.index_of(s2)?);
    if i1 == i2 {
        return param("the two simplices must differ");
    }
    let simplices = cycle.simplices();
    let k = simplices.len();
    let adjacent = (i1 + 1) % k == i2 || (i2 + 1) % k == i1;
    if adjacent != (adjacency == Adjacency::Adjacent) {
        return param(format!("{s1} and {s2} are not {adjacency:?}").to_lowercase());
    }
    let (m, dn) = (simplices[i1].dim(), simplices[i2].dim());
    let stab = StabilizerTable::new(group, m.max(dn));
    let denominator = (stab.get(m) * stab.get(dn)) as u128;
    let n = e.len();
    if n.pow(4) > MAX_CHAIN_TABLE {
        return Err(Error::Resource(format!("chain table for |E| = {n} is too large")));
    }
    let work = (group.len() as u128).pow(2) * (n as u128).pow(4);
    if work > MAX_CYCLE_WORK {
        return Err(Error::Resource(format!("cycle sum needs {work} steps")));
    }
    if (params.size() as u64).pow(2) > super::MAX_PAIR_CELLS {
        return Err(Error::Resource("cycle sum grid exceeds its guard".into()));
    }
    if n == 0 {
        return Ok(CycleSum { adjacency, numerator: 0, denominator });
    }

    let space = Space::new(params);
    let action = group.action(&space)?;
    let perms: Vec<Vec<u32>> = (0..group.len()).map(|g| action.perm(g).to_vec()).collect();
    let lambdas = perms.iter().map(|p| lambda_perm(&space, e, p)).collect();
    let dist = distance_matrix(&space, e);
    let setup = Setup { e, space, group, perms, lambdas };

    // Walk forward from `from` to `to`, exclusive of both.
    let chain = |from: usize, to: usize| -> Vec<Simplex> {
        let mut out = Vec::new();
        let mut i = (from + 1) % k;
        while i != to {
            out.push(simplices[i].clone());
            i = (i + 1) % k;
        }
        out
    };
    let next = |i: usize| (i + 1) % k;
    let prev = |i: usize| (i + k - 1) % k;
    let size = setup.space.size();
    let idx = e.indices();
    let mut numerator = 0u128;

    match adjacency {
        Adjacency::Nonadjacent => {
            // Chain one runs from S₁ forward to S₂, chain two from S₂ forward back to S₁.
            let a1 = shared_vertex(&simplices[i1], &simplices[next(i1)]);
            let b1 = shared_vertex(&simplices[prev(i2)], &simplices[i2]);
            let b2 = shared_vertex(&simplices[i2], &simplices[next(i2)]);
            let a2 = shared_vertex(&simplices[prev(i1)], &simplices[i1]);
            let f = chain_table(e, &dist, &chain(i1, i2), &a1, &b1)?;
            let g = chain_table(e, &dist, &chain(i2, i1), &a2, &b2)?;
            for theta in 0..setup.group.len() {
                for phi in 0..setup.group.len() {
                    let kf = setup.paired(&f, theta, phi)?;
                    let kg = setup.paired(&g, theta, phi)?;
                    for w1 in 0..size {
                        let l1 = setup.lambda_pow(theta, w1, m - 1)?;
                        if l1 == 0 {
                            continue;
                        }
                        for w2 in 0..size {
                            let cell = w1 * size + w2;
                            if kf[cell] == 0 || kg[cell] == 0 {
                                continue;
                            }
                            let l2 = setup.lambda_pow(phi, w2, dn - 1)?;
                            let term = mul(mul(l1, l2)?, mul(kf[cell], kg[cell])?)?;
                            numerator = add(numerator, term)?;
                        }
                    }
                }
            }
        }
        Adjacency::Adjacent => {
            // Orient so that S₂ follows S₁; the chain runs from S₂ forward back to S₁.
            let forward = next(i1) == i2;
            let (first, second) = if forward { (i1, i2) } else { (i2, i1) };
            let v_first = shared_vertex(&simplices[prev(first)], &simplices[first]);
            let v_second = shared_vertex(&simplices[second], &simplices[next(second)]);
            let h = chain(second, first);
            // Endpoint order in the table follows (S₁ side, S₂ side).
            let table = if forward {
                chain_table(e, &dist, &h, &v_first, &v_second)?
            } else {
                chain_table(e, &dist, &h, &v_second, &v_first)?
            };
            for theta in 0..setup.group.len() {
                for phi in 0..setup.group.len() {
                    let kk = setup.paired(&table, theta, phi)?;
                    for &x in idx {
                        for &xp in idx {
                            let w1 = setup.space.sub(x, setup.perms[theta][xp] as usize);
                            let w2 = setup.space.sub(x, setup.perms[phi][xp] as usize);
                            let c = kk[w1 * size + w2];
                            if c == 0 {
                                continue;
                            }
                            let l = mul(setup.lambda_pow(theta, w1, m - 1)?, setup.lambda_pow(phi, w2, dn - 1)?)?;
                            numerator = add(numerator, mul(l, c)?)?;
                        }
                    }
                }
            }
        }
    }
    Ok(CycleSum { adjacency, numerator, denominator })
}
