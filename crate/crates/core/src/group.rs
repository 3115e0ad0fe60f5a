//! The orthogonal group O_d(F_q), its action on F_q^d, and stabilizers.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{param, Error, Result};
use crate::field::{FieldParams, Space, Vector};

/// Largest q accepted by [`enumerate_group`].
pub const MAX_GROUP_Q: u32 = 31;
/// Largest d accepted by [`enumerate_group`].
pub const MAX_GROUP_D: usize = 3;
/// Limit on `q^(d*d)` for the full matrix scan.
pub const MAX_SCAN: u64 = 1 << 22;
/// Limit on `|G| * q^d` entries in an [`ActionTable`].
pub const MAX_ACTION_ENTRIES: u64 = 1 << 27;

const CACHE_MAGIC: &[u8; 4] = b"OGT1";

/// A d×d matrix with MᵀM = I, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrthogonalElement {
    d: usize,
    entries: Vec<u32>,
}

/// The map x ↦ θx + w.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidMotion {
    pub rotation: OrthogonalElement,
    pub translation: Vector,
}

/// Every element of O_d(F_q) in a fixed order.
#[derive(Clone, Debug)]
pub struct GroupTable {
    params: FieldParams,
    elements: Vec<OrthogonalElement>,
    lookup: HashMap<Vec<u32>, usize>,
}

/// Permutations of point indices induced by each group element.
#[derive(Clone, Debug)]
pub struct ActionTable {
    perms: Vec<Vec<u32>>,
    inverse: Vec<usize>,
}

fn matrix_is_orthogonal(q: u32, d: usize, m: &[u32]) -> bool {
    let q = q as u64;
    (0..d).all(|i| {
        (0..d).all(|j| {
            let s: u64 = (0..d)
                .map(|k| m[k * d + i] as u64 * m[k * d + j] as u64)
                .sum();
            s % q == u64::from(i == j)
        })
    })
}

impl OrthogonalElement {
    /// Builds an element from rows, rejecting anything that is not orthogonal.
    pub fn from_rows(params: FieldParams, rows: &[Vec<i64>]) -> Result<Self> {
        let d = params.d();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return param(format!("matrix must be {d}x{d}"));
        }
        let entries: Vec<u32> = rows.iter().flatten().map(|&a| params.reduce(a)).collect();
        Self::from_entries(params, entries)
    }

    fn from_entries(params: FieldParams, entries: Vec<u32>) -> Result<Self> {
        let d = params.d();
        if entries.len() != d * d || entries.iter().any(|&a| a >= params.q()) {
            return Err(Error::Format("matrix entries out of range".into()));
        }
        if !matrix_is_orthogonal(params.q(), d, &entries) {
            return param("matrix is not orthogonal");
        }
        Ok(OrthogonalElement { d, entries })
    }

    pub fn identity(params: FieldParams) -> Self {
        let d = params.d();
        let entries = (0..d * d).map(|k| u32::from(k / d == k % d)).collect();
        OrthogonalElement { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Row-major residues.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.d + col]
    }

    pub fn apply(&self, params: FieldParams, x: &Vector) -> Vector {
        let q = params.q() as u64;
        let c = x.coords();
        let out: Vec<i64> = (0..self.d)
            .map(|i| {
                let s: u64 = (0..self.d)
                    .map(|j| self.entry(i, j) as u64 * c[j] as u64)
                    .sum();
                (s % q) as i64
            })
            .collect();
        params.vector(&out).expect("dimension preserved")
    }

    pub fn compose(&self, params: FieldParams, other: &Self) -> Self {
        let (d, q) = (self.d, params.q() as u64);
        let entries = (0..d * d)
            .map(|k| {
                let (i, j) = (k / d, k % d);
                let s: u64 = (0..d)
                    .map(|l| self.entry(i, l) as u64 * other.entry(l, j) as u64)
                    .sum();
                (s % q) as u32
            })
            .collect();
        OrthogonalElement { d, entries }
    }

    /// The inverse, which for an orthogonal matrix is its transpose.
    pub fn inverse(&self) -> Self {
        let d = self.d;
        let entries = (0..d * d).map(|k| self.entry(k % d, k / d)).collect();
        OrthogonalElement { d, entries }
    }

    /// Canonical byte encoding: row-major residues, one byte each.
    pub fn encode(&self) -> Vec<u8> {
        self.entries.iter().map(|&a| a as u8).collect()
    }
}

impl RigidMotion {
    pub fn apply(&self, params: FieldParams, x: &Vector) -> Vector {
        params.add(&self.rotation.apply(params, x), &self.translation)
    }
}

/// Stabilizer exponent e with Stab(n) ≈ q^e for pinned n-simplices in F_q^d.
pub fn stab_exponent(n: usize, d: usize) -> usize {
    if n + 1 < d {
        let m = d - n;
        m * (m - 1) / 2
    } else {
        0
    }
}

fn inv_mod(a: u32, q: u32) -> u32 {
    let (mut base, mut exp, mut acc) = (a as u64 % q as u64, q - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q as u64;
        }
        base = base * base % q as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Rank over F_q of the given vectors.
pub fn rank(params: FieldParams, vectors: &[Vector]) -> usize {
    let q = params.q() as u64;
    let d = params.d();
    let mut rows: Vec<Vec<u64>> = vectors
        .iter()
        .map(|v| v.coords().iter().map(|&c| c as u64).collect())
        .collect();
    let mut r = 0;
    for col in 0..d {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = inv_mod(rows[r][col] as u32, q as u32) as u64;
        for x in rows[r].iter_mut() {
            *x = *x * inv % q;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                for j in 0..d {
                    rows[i][j] = (rows[i][j] + (q - f) * rows[r][j]) % q;
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// True iff the differences x_i − x_0 are linearly independent or span F_q^d.
pub fn is_nondegenerate(params: FieldParams, points: &[Vector]) -> bool {
    if points.len() < 2 {
        return false;
    }
    let diffs: Vec<Vector> = points[1..]
        .iter()
        .map(|p| params.sub(p, &points[0]))
        .collect();
    let r = rank(params, &diffs);
    r == diffs.len() || r == params.d()
}

fn check_guard(params: FieldParams) -> Result<()> {
    if params.d() > MAX_GROUP_D || params.q() > MAX_GROUP_Q {
        return Err(Error::Resource(format!(
            "group enumeration limited to d <= {MAX_GROUP_D}, q <= {MAX_GROUP_Q} (got d = {}, q = {})",
            params.d(),
            params.q()
        )));
    }
    Ok(())
}

/// Enumerates O_d(F_q) by extending orthonormal frames one column at a time.
pub fn enumerate_group(params: FieldParams) -> Result<GroupTable> {
    check_guard(params)?;
    let d = params.d();
    let units: Vec<Vector> = params.sphere(1).points;
    let mut elements = Vec::new();
    let mut columns: Vec<&Vector> = Vec::with_capacity(d);
    extend_frame(params, &units, &mut columns, &mut elements);
    Ok(GroupTable::from_elements(params, elements))
}

fn extend_frame<'a>(
    params: FieldParams,
    units: &'a [Vector],
    columns: &mut Vec<&'a Vector>,
    out: &mut Vec<OrthogonalElement>,
) {
    let d = params.d();
    if columns.len() == d {
        let entries = (0..d * d)
            .map(|k| columns[k % d].coords()[k / d])
            .collect();
        out.push(OrthogonalElement { d, entries });
        return;
    }
    for u in units {
        if columns.iter().all(|c| params.dot(c, u) == 0) {
            columns.push(u);
            extend_frame(params, units, columns, out);
            columns.pop();
        }
    }
}

/// Enumerates O_d(F_q) by testing every d×d matrix. Used as an oracle.
pub fn scan_group(params: FieldParams) -> Result<GroupTable> {
    let (q, d) = (params.q(), params.d());
    let total = (q as u64).checked_pow((d * d) as u32).unwrap_or(u64::MAX);
    if total > MAX_SCAN {
        return Err(Error::Resource(format!(
            "full scan of {q}^{} matrices exceeds {MAX_SCAN}",
            d * d
        )));
    }
    let mut elements = Vec::new();
    let mut entries = vec![0u32; d * d];
    for mut code in 0..total {
        for e in entries.iter_mut() {
            *e = (code % q as u64) as u32;
            code /= q as u64;
        }
        if matrix_is_orthogonal(q, d, &entries) {
            elements.push(OrthogonalElement {
                d,
                entries: entries.clone(),
            });
        }
    }
    Ok(GroupTable::from_elements(params, elements))
}

impl GroupTable {
    fn from_elements(params: FieldParams, elements: Vec<OrthogonalElement>) -> Self {
        let lookup = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.entries.clone(), i))
            .collect();
        GroupTable {
            params,
            elements,
            lookup,
        }
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[OrthogonalElement] {
        &self.elements
    }

    pub fn position(&self, element: &OrthogonalElement) -> Option<usize> {
        self.lookup.get(&element.entries).copied()
    }

    /// The elements as a set of canonical encodings.
    pub fn encodings(&self) -> HashSet<Vec<u8>> {
        self.elements.iter().map(|e| e.encode()).collect()
    }

    /// Checks the group axioms: identity, inverses, closure, no duplicates.
    pub fn is_group(&self) -> bool {
        let p = self.params;
        self.lookup.len() == self.elements.len()
            && self.position(&OrthogonalElement::identity(p)).is_some()
            && self
                .elements
                .iter()
                .all(|a| self.position(&a.inverse()).is_some())
            && self.elements.iter().all(|a| {
                self.elements
                    .iter()
                    .all(|b| self.position(&a.compose(p, b)).is_some())
            })
    }

    /// Number of elements fixing every given point.
    pub fn stabilizer_size(&self, points: &[Vector]) -> usize {
        self.elements
            .iter()
            .filter(|g| points.iter().all(|p| &g.apply(self.params, p) == p))
            .count()
    }

    /// Minimal stabilizer size over all pinned nondegenerate n-simplices.
    ///
    /// A pinned nondegenerate n-simplex spans an n-dimensional subspace when
    /// n < d and all of F_q^d otherwise, so the minimum runs over subspaces.
    pub fn minimal_stabilizer(&self, n: usize) -> usize {
        let d = self.params.d();
        if n >= d {
            return 1;
        }
        subspace_bases(self.params, n)
            .iter()
            .map(|basis| self.stabilizer_size(basis))
            .min()
            .unwrap_or(1)
    }

    /// Index permutations of every element; guarded by [`MAX_ACTION_ENTRIES`].
    pub fn action(&self, space: &Space) -> Result<ActionTable> {
        let entries = self.len() as u64 * space.size() as u64;
        if entries > MAX_ACTION_ENTRIES {
            return Err(Error::Resource(format!(
                "action table with {entries} entries exceeds {MAX_ACTION_ENTRIES}"
            )));
        }
        let d = self.params.d();
        let q = self.params.q();
        let perms = self
            .elements
            .iter()
            .map(|g| {
                (0..space.size())
                    .map(|x| {
                        let c = space.coords(x);
                        let image = (0..d).map(|i| {
                            let s: u64 = (0..d)
                                .map(|j| g.entry(i, j) as u64 * c[j] as u64)
                                .sum();
                            (s % q as u64) as u32
                        });
                        space.index_from_coords(image) as u32
                    })
                    .collect()
            })
            .collect();
        let inverse = self
            .elements
            .iter()
            .map(|g| self.position(&g.inverse()).expect("closed under inverse"))
            .collect();
        Ok(ActionTable { perms, inverse })
    }

    /// Writes the table in the cache format: `OGT1`, q (u32 LE), d (u32 LE),
    /// count (u64 LE), then `count * d * d` row-major residue bytes.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(20 + self.len() * self.params.d().pow(2));
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&self.params.q().to_le_bytes());
        buf.extend_from_slice(&(self.params.d() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for e in &self.elements {
            buf.extend_from_slice(&e.encode());
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Reads a cache file, re-checking MᵀM = I for every element.
    pub fn read_cache(path: &Path, params: FieldParams) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 20 || &buf[..4] != CACHE_MAGIC {
            return Err(Error::Format("not a group cache file".into()));
        }
        let q = u32::from_le_bytes(buf[4..8].try_into().expect("4 bytes"));
        let d = u32::from_le_bytes(buf[8..12].try_into().expect("4 bytes")) as usize;
        let count = u64::from_le_bytes(buf[12..20].try_into().expect("8 bytes")) as usize;
        if q != params.q() || d != params.d() {
            return Err(Error::Format(format!(
                "cache holds q = {q}, d = {d}; expected q = {}, d = {}",
                params.q(),
                params.d()
            )));
        }
        let body = &buf[20..];
        if body.len() != count * d * d {
            return Err(Error::Format("cache length does not match count".into()));
        }
        let elements = body
            .chunks(d * d)
            .map(|chunk| {
                OrthogonalElement::from_entries(params, chunk.iter().map(|&b| b as u32).collect())
                    .map_err(|_| Error::Format("cache holds a non-orthogonal matrix".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let table = GroupTable::from_elements(params, elements);
        if table.lookup.len() != count {
            return Err(Error::Format("cache holds duplicate elements".into()));
        }
        Ok(table)
    }
}

impl ActionTable {
    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// Image of point index `x` under element `g`.
    #[inline]
    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.perms[g][x] as usize
    }

    pub fn perm(&self, g: usize) -> &[u32] {
        &self.perms[g]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }
}

/// One basis (in reduced row echelon form) for each n-dimensional subspace.
pub fn subspace_bases(params: FieldParams, n: usize) -> Vec<Vec<Vector>> {
    let d = params.d();
    let q = params.q() as u64;
    let mut out = Vec::new();
    if n == 0 || n > d {
        return out;
    }
    let mut pivots: Vec<usize> = (0..n).collect();
    loop {
        // Free slots: (row, col) with col > pivot(row) and col not a pivot.
        let free: Vec<(usize, usize)> = (0..n)
            .flat_map(|r| {
                let pv = pivots.clone();
                (pv[r] + 1..d)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = q.pow(free.len() as u32);
        for mut code in 0..total {
            let mut rows = vec![vec![0i64; d]; n];
            for (r, &p) in pivots.iter().enumerate() {
                rows[r][p] = 1;
            }
            for &(r, c) in &free {
                rows[r][c] = (code % q) as i64;
                code /= q;
            }
            out.push(
                rows.iter()
                    .map(|r| params.vector(r).expect("length d"))
                    .collect(),
            );
        }
        // Next pivot combination in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < d - n + i {
                pivots[i] += 1;
                for j in i + 1..n {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact minimal stabilizer sizes, computed once per dimension.
#[derive(Clone, Debug)]
pub struct StabilizerTable {
    sizes: Vec<usize>,
}

impl StabilizerTable {
    pub fn new(group: &GroupTable, max_dim: usize) -> Self {
        let sizes = (0..=max_dim.max(1))
            .map(|n| {
                if n == 0 {
                    group.len()
                } else {
                    group.minimal_stabilizer(n)
                }
            })
            .collect();
        StabilizerTable { sizes }
    }

    /// Minimal stabilizer size for dimension `n`; 1 beyond the table.
    pub fn get(&self, n: usize) -> usize {
        self.sizes.get(n).copied().unwrap_or(1)
    }
}
