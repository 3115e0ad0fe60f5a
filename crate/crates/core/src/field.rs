//! Arithmetic in the prime field F_q and the space F_q^d.
//!
//! Points are stored as canonical residues in `[0, q)`. Every point also has a
//! dense index `Σ x_i q^i`, which the counting code uses to address flat arrays.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest number of points a space may have.
pub const MAX_POINTS: u64 = 1 << 24;

/// The ambient space F_q^d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    q: u32,
    d: usize,
}

/// A point of F_q^d with reduced coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vector(Vec<u32>);

/// All points at a fixed distance from the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sphere {
    pub radius: u32,
    pub points: Vec<Vector>,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u32;
    while (p as u64) * (p as u64) <= n as u64 {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

impl Vector {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl FieldParams {
    pub fn new(q: u32, d: usize) -> Result<Self> {
        if q < 3 || !is_prime(q) {
            return param(format!("q = {q} must be an odd prime"));
        }
        if d == 0 {
            return param("d must be at least 1");
        }
        let size = (q as u64).checked_pow(d as u32);
        match size {
            Some(n) if n <= MAX_POINTS => Ok(FieldParams { q, d }),
            _ => Err(Error::Resource(format!(
                "q^d = {q}^{d} exceeds the limit of {MAX_POINTS} points"
            ))),
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of points, q^d.
    pub fn size(&self) -> usize {
        (self.q as usize).pow(self.d as u32)
    }

    pub fn reduce(&self, a: i64) -> u32 {
        a.rem_euclid(self.q as i64) as u32
    }

    pub fn vector(&self, coords: &[i64]) -> Result<Vector> {
        if coords.len() != self.d {
            return param(format!(
                "vector has {} coordinates, expected {}",
                coords.len(),
                self.d
            ));
        }
        Ok(Vector(coords.iter().map(|&c| self.reduce(c)).collect()))
    }

    pub fn zero(&self) -> Vector {
        Vector(vec![0; self.d])
    }

    /// The standard basis vector e_i (0-based).
    pub fn basis(&self, i: usize) -> Vector {
        let mut v = vec![0; self.d];
        v[i] = 1;
        Vector(v)
    }

    pub fn index_of(&self, v: &Vector) -> usize {
        v.0.iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.q as usize + c as usize)
    }

    pub fn vector_at(&self, mut idx: usize) -> Vector {
        let q = self.q as usize;
        let mut coords = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            coords.push((idx % q) as u32);
            idx /= q;
        }
        Vector(coords)
    }

    pub fn points(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.size()).map(move |i| self.vector_at(i))
    }

    fn check(&self, v: &Vector) -> Result<()> {
        if v.0.len() != self.d {
            return param(format!(
                "vector of length {} used in dimension {}",
                v.0.len(),
                self.d
            ));
        }
        Ok(())
    }

    pub fn add(&self, x: &Vector, y: &Vector) -> Vector {
        Vector(
            x.0.iter()
                .zip(&y.0)
                .map(|(&a, &b)| (a + b) % self.q)
                .collect(),
        )
    }

    pub fn sub(&self, x: &Vector, y: &Vector) -> Vector {
        Vector(
            x.0.iter()
                .zip(&y.0)
                .map(|(&a, &b)| (a + self.q - b) % self.q)
                .collect(),
        )
    }

    pub fn scale(&self, c: u32, x: &Vector) -> Vector {
        let q = self.q as u64;
        Vector(
            x.0.iter()
                .map(|&a| ((c as u64 % q) * a as u64 % q) as u32)
                .collect(),
        )
    }

    pub fn dot(&self, x: &Vector, y: &Vector) -> u32 {
        let q = self.q as u64;
        (x.0.iter()
            .zip(&y.0)
            .map(|(&a, &b)| a as u64 * b as u64 % q)
            .sum::<u64>()
            % q) as u32
    }

    /// The quadratic form ‖x‖ = Σ x_i².
    pub fn norm(&self, x: &Vector) -> u32 {
        self.dot(x, x)
    }

    /// ‖x − y‖ = Σ (x_i − y_i)² mod q.
    pub fn distance(&self, x: &Vector, y: &Vector) -> Result<u32> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.norm(&self.sub(x, y)))
    }

    pub fn sphere(&self, t: u32) -> Sphere {
        let t = t % self.q;
        Sphere {
            radius: t,
            points: self.points().filter(|x| self.norm(x) == t).collect(),
        }
    }

    /// True iff −1 is a square mod q, which for odd primes means q ≡ 1 (mod 4).
    pub fn has_sqrt_minus_one(&self) -> bool {
        self.q % 4 == 1
    }
}

/// Precomputed coordinate and norm tables for index-based arithmetic.
#[derive(Clone, Debug)]
pub struct Space {
    params: FieldParams,
    coords: Vec<u32>,
    norms: Vec<u32>,
    powers: Vec<usize>,
}

impl Space {
    pub fn new(params: FieldParams) -> Self {
        let (q, d, n) = (params.q as usize, params.d, params.size());
        let mut coords = Vec::with_capacity(n * d);
        let mut norms = Vec::with_capacity(n);
        for idx in 0..n {
            let mut rest = idx;
            let mut norm = 0usize;
            for _ in 0..d {
                let c = rest % q;
                rest /= q;
                coords.push(c as u32);
                norm = (norm + c * c) % q;
            }
            norms.push(norm as u32);
        }
        let powers = (0..d).map(|i| q.pow(i as u32)).collect();
        Space {
            params,
            coords,
            norms,
            powers,
        }
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn size(&self) -> usize {
        self.norms.len()
    }

    pub fn coords(&self, idx: usize) -> &[u32] {
        let d = self.params.d;
        &self.coords[idx * d..(idx + 1) * d]
    }

    pub fn index_from_coords(&self, coords: impl IntoIterator<Item = u32>) -> usize {
        coords
            .into_iter()
            .zip(&self.powers)
            .map(|(c, p)| c as usize * p)
            .sum()
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        let q = self.params.q;
        let (ca, cb) = (self.coords(a), self.coords(b));
        self.index_from_coords(ca.iter().zip(cb).map(|(&x, &y)| (x + q - y) % q))
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let q = self.params.q;
        let (ca, cb) = (self.coords(a), self.coords(b));
        self.index_from_coords(ca.iter().zip(cb).map(|(&x, &y)| (x + y) % q))
    }

    pub fn norm(&self, a: usize) -> u32 {
        self.norms[a]
    }

    pub fn dist(&self, a: usize, b: usize) -> u32 {
        self.norms[self.sub(a, b)]
    }

    /// Dot product of the points with indices `a` and `b`.
    pub fn dot(&self, a: usize, b: usize) -> u32 {
        let q = self.params.q as u64;
        let s: u64 = self
            .coords(a)
            .iter()
            .zip(self.coords(b))
            .map(|(&x, &y)| x as u64 * y as u64)
            .sum();
        (s % q) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let p = FieldParams::new(5, 2).unwrap();
        let x = p.vector(&[1, 2]).unwrap();
        assert_eq!(p.distance(&x, &p.zero()).unwrap(), 0);
        assert_eq!(p.distance(&x, &x).unwrap(), 0);
        let p = FieldParams::new(7, 3).unwrap();
        let x = p.vector(&[1, 2, 3]).unwrap();
        assert_eq!(p.distance(&x, &p.zero()).unwrap(), 0);
    }

    #[test]
    fn distance_rejects_mismatched_dimension() {
        let p = FieldParams::new(5, 2).unwrap();
        let other = FieldParams::new(5, 3).unwrap();
        assert!(p.distance(&p.zero(), &other.zero()).is_err());
    }

    #[test]
    fn spheres_in_one_dimension() {
        let p = FieldParams::new(3, 1).unwrap();
        let s1 = p.sphere(1);
        assert_eq!(
            s1.points,
            vec![p.vector(&[1]).unwrap(), p.vector(&[2]).unwrap()]
        );
        assert!(p.sphere(2).points.is_empty());
    }

    #[test]
    fn zero_sphere_is_origin_without_sqrt_minus_one() {
        let p = FieldParams::new(3, 2).unwrap();
        assert_eq!(p.sphere(0).points, vec![p.zero()]);
    }

    #[test]
    fn sqrt_minus_one_matches_residue_scan() {
        for q in [3u32, 5, 7, 11, 13, 17, 19, 23] {
            let p = FieldParams::new(q, 1).unwrap();
            let scan = (1..q).any(|x| x * x % q == q - 1);
            assert_eq!(p.has_sqrt_minus_one(), scan, "q = {q}");
        }
        assert!(FieldParams::new(13, 1).unwrap().has_sqrt_minus_one());
        assert!(!FieldParams::new(7, 1).unwrap().has_sqrt_minus_one());
    }

    #[test]
    fn constructor_guards() {
        assert!(FieldParams::new(4, 2).is_err());
        assert!(FieldParams::new(2, 2).is_err());
        assert!(FieldParams::new(3, 0).is_err());
        assert!(matches!(
            FieldParams::new(101, 4),
            Err(Error::Resource(_))
        ));
        assert!(FieldParams::new(4093, 2).is_ok());
    }

    #[test]
    fn index_round_trip_and_space_tables() {
        let p = FieldParams::new(5, 3).unwrap();
        let space = Space::new(p);
        for i in 0..p.size() {
            let v = p.vector_at(i);
            assert_eq!(p.index_of(&v), i);
            assert_eq!(space.norm(i), p.norm(&v));
        }
        let (a, b) = (17, 99);
        let (va, vb) = (p.vector_at(a), p.vector_at(b));
        assert_eq!(space.sub(a, b), p.index_of(&p.sub(&va, &vb)));
        assert_eq!(space.add(a, b), p.index_of(&p.add(&va, &vb)));
        assert_eq!(space.dot(a, b), p.dot(&va, &vb));
    }
}
