//! Brute-force reference implementations shared by the integration tests.
//! None of these call into the library's counting or transform code.

#![allow(dead_code)]

use std::collections::HashMap;

use congruence_lab::structure::{Simplex, SimplexStructure};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dist(q: u32, a: &[u32], b: &[u32]) -> u32 {
    let q = q as i64;
    let s: i64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let t = (x as i64 - y as i64).rem_euclid(q);
            t * t
        })
        .sum();
    (s % q) as u32
}

/// Row-major d×d matrices A with AᵀA = I over F_q, by scanning all q^{d²}.
pub fn orthogonal_matrices(q: u32, d: usize) -> Vec<Vec<u32>> {
    let cells = d * d;
    let total = (q as usize).pow(cells as u32);
    let mut out = Vec::new();
    let mut m = vec![0u32; cells];
    for code in 0..total {
        let mut c = code;
        for slot in m.iter_mut() {
            *slot = (c % q as usize) as u32;
            c /= q as usize;
        }
        let ok = (0..d).all(|i| {
            (0..d).all(|j| {
                let dot: u64 = (0..d).map(|r| m[r * d + i] as u64 * m[r * d + j] as u64).sum();
                dot % q as u64 == u64::from(i == j)
            })
        });
        if ok {
            out.push(m.clone());
        }
    }
    out
}

/// Rank over F_q by Gaussian elimination.
pub fn rank(q: u32, rows: &[Vec<u32>]) -> usize {
    let q = q as i64;
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] % q != 0) else { continue };
        m.swap(r, p);
        let inv = (1..q).find(|&x| x * m[r][c] % q == 1).unwrap();
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c] * inv % q;
                for j in 0..cols {
                    m[i][j] = (m[i][j] - f * m[r][j]).rem_euclid(q);
                }
            }
        }
        r += 1;
    }
    r
}

pub fn nondegenerate(q: u32, d: usize, pts: &[&[u32]]) -> bool {
    let diffs: Vec<Vec<u32>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(pts[0]).map(|(&a, &b)| (a + q - b) % q).collect())
        .collect();
    let r = rank(q, &diffs);
    r == diffs.len() || r == d
}

/// A structure flattened to vertex slots, edges and simplices.
pub struct Shape {
    pub vertices: Vec<String>,
    /// (slot a, slot b) in the order of `SimplexStructure::edges`.
    pub edges: Vec<(usize, usize)>,
    pub simplices: Vec<Vec<usize>>,
}

impl Shape {
    pub fn of(s: &SimplexStructure) -> Self {
        let vertices: Vec<String> = s.vertices().into_iter().collect();
        let slot = |v: &str| vertices.iter().position(|x| x == v).unwrap();
        let edges = s.edges().iter().map(|(a, b)| (slot(a), slot(b))).collect();
        let simplices = s
            .simplices()
            .iter()
            .map(|x| x.vertices.iter().map(|v| slot(v)).collect())
            .collect();
        Shape { vertices, edges, simplices }
    }
}

/// Histogram of distance keys over all maps V → E, and the number of maps
/// sending some simplex to a degenerate one.
pub struct OracleHistogram {
    pub counts: HashMap<Vec<u32>, u64>,
    pub degenerate: u64,
}

impl OracleHistogram {
    pub fn sum_sq(&self) -> u128 {
        self.counts.values().map(|&c| c as u128 * c as u128).sum()
    }
}

pub fn histogram(q: u32, d: usize, points: &[Vec<u32>], shape: &Shape, nondegenerate_only: bool) -> OracleHistogram {
    let nv = shape.vertices.len();
    let mut counts = HashMap::new();
    let mut degenerate = 0;
    let mut assign = vec![0usize; nv];
    loop {
        let deg = shape.simplices.iter().any(|s| {
            let pts: Vec<&[u32]> = s.iter().map(|&v| points[assign[v]].as_slice()).collect();
            !nondegenerate(q, d, &pts)
        });
        if deg {
            degenerate += 1;
        }
        if !(deg && nondegenerate_only) {
            let key: Vec<u32> = shape
                .edges
                .iter()
                .map(|&(a, b)| dist(q, &points[assign[a]], &points[assign[b]]))
                .collect();
            *counts.entry(key).or_insert(0) += 1;
        }
        let mut i = 0;
        while i < nv {
            assign[i] += 1;
            if assign[i] < points.len() {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == nv || points.is_empty() {
            break;
        }
    }
    if points.is_empty() {
        counts.clear();
    }
    OracleHistogram { counts, degenerate }
}

/// Number of maps V → E whose edge distances equal `key`, by backtracking.
pub fn count_embeddings(q: u32, points: &[Vec<u32>], shape: &Shape, key: &[u32]) -> u64 {
    fn go(q: u32, points: &[Vec<u32>], shape: &Shape, key: &[u32], assign: &mut [usize], v: usize) -> u64 {
        if v == assign.len() {
            return 1;
        }
        let mut total = 0;
        for x in 0..points.len() {
            let ok = shape.edges.iter().zip(key).all(|(&(a, b), &t)| {
                let other = if a == v { b } else if b == v { a } else { return true };
                other > v || dist(q, &points[x], &points[assign[other]]) == t
            });
            if ok {
                assign[v] = x;
                total += go(q, points, shape, key, assign, v + 1);
            }
        }
        total
    }
    let mut assign = vec![0; shape.vertices.len()];
    go(q, points, shape, key, &mut assign, 0)
}

/// Sequences y_0, …, y_k in E with dist(y_i, y_{i+1}) = key[i].
pub fn count_paths(q: u32, points: &[Vec<u32>], key: &[u32]) -> u64 {
    let mut cur = vec![1u64; points.len()];
    for &t in key {
        cur = (0..points.len())
            .map(|y| {
                (0..points.len())
                    .filter(|&x| dist(q, &points[x], &points[y]) == t)
                    .map(|x| cur[x])
                    .sum()
            })
            .collect();
    }
    cur.iter().sum()
}

/// Flat index of coordinates, first coordinate least significant.
pub fn index(q: u32, coords: &[u32]) -> usize {
    coords.iter().rev().fold(0usize, |acc, &c| acc * q as usize + c as usize)
}

pub fn coords(q: u32, d: usize, mut idx: usize) -> Vec<u32> {
    (0..d)
        .map(|_| {
            let c = (idx % q as usize) as u32;
            idx /= q as usize;
            c
        })
        .collect()
}

/// f̂(m) = q^{−d} Σ_x e^{−2πi m·x/q} f(x), evaluated term by term.
pub fn naive_dft(q: u32, d: usize, f: &[Complex64]) -> Vec<Complex64> {
    let size = f.len();
    (0..size)
        .map(|m| {
            let mc = coords(q, d, m);
            let s: Complex64 = (0..size)
                .map(|x| {
                    let xc = coords(q, d, x);
                    let dot: u64 = mc.iter().zip(&xc).map(|(&a, &b)| a as u64 * b as u64).sum();
                    let angle = -2.0 * std::f64::consts::PI * (dot % q as u64) as f64 / q as f64;
                    f[x] * Complex64::from_polar(1.0, angle)
                })
                .sum();
            s / size as f64
        })
        .collect()
}

/// A random simplex tree: each new simplex hangs off a random existing vertex.
pub fn random_tree(rng: &mut ChaCha8Rng, max_simplices: usize, max_dim: usize) -> SimplexStructure {
    let count = rng.gen_range(1..=max_simplices);
    let mut next = 0;
    let mut fresh = || {
        next += 1;
        format!("v{next}")
    };
    let mut simplices = Vec::new();
    let mut all: Vec<String> = Vec::new();
    for i in 0..count {
        let dim = rng.gen_range(1..=max_dim);
        let mut vs = Vec::new();
        if i > 0 {
            vs.push(all[rng.gen_range(0..all.len())].clone());
        } else {
            vs.push(fresh());
        }
        for _ in 0..dim {
            vs.push(fresh());
        }
        all.extend(vs.iter().skip(usize::from(i > 0)).cloned());
        simplices.push(Simplex::new(format!("S{i}"), vs));
    }
    SimplexStructure::tree(simplices).expect("generated trees satisfy the axioms")
}

/// A random subset of F_q^d with exactly `size` points.
pub fn random_points(rng: &mut ChaCha8Rng, q: u32, d: usize, size: usize) -> Vec<usize> {
    let total = (q as usize).pow(d as u32);
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..size.min(total) {
        let j = rng.gen_range(i..total);
        idx.swap(i, j);
    }
    idx.truncate(size.min(total));
    idx.sort_unstable();
    idx
}
