//! The finite Fourier transform on F_q^d.
//!
//! Conventions: f̂(m) = q^{−d} Σ_x χ(−m·x) f(x) and f(x) = Σ_m χ(m·x) f̂(m),
//! with the character χ(a) = e^{2πia/q}.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::field::{FieldParams, Space};

/// A complex-valued function on F_q^d, indexed by point index.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexGrid {
    params: FieldParams,
    values: Vec<Complex64>,
}

/// The additive character a ↦ e^{2πia/q}.
#[derive(Clone, Debug)]
pub struct Character {
    q: u32,
    table: Vec<Complex64>,
}

/// Sphere-restricted norms of a function h: ‖(hS_t)^‖₄ and ‖hS_t‖₂.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereNorms {
    pub l4_of_transform: f64,
    pub l2: f64,
    /// ‖(hS_t)^‖₄ / (q^{−3/2} ‖hS_t‖₂), or 0 when h vanishes on the sphere.
    pub ratio: f64,
    /// False unless d = 2 and q ≡ 3 (mod 4).
    pub in_hypothesis: bool,
}

impl Character {
    pub fn new(q: u32) -> Self {
        let table = (0..q)
            .map(|a| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * a as f64 / q as f64))
            .collect();
        Character { q, table }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn eval(&self, a: u32) -> Complex64 {
        self.table[(a % self.q) as usize]
    }
}

impl ComplexGrid {
    pub fn zeros(params: FieldParams) -> Self {
        ComplexGrid {
            params,
            values: vec![Complex64::new(0.0, 0.0); params.size()],
        }
    }

    pub fn from_values(params: FieldParams, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != params.size() {
            return param(format!(
                "grid has {} values, expected {}",
                values.len(),
                params.size()
            ));
        }
        Ok(ComplexGrid { params, values })
    }

    pub fn from_real(params: FieldParams, values: &[f64]) -> Result<Self> {
        Self::from_values(
            params,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Indicator function of a set of point indices.
    pub fn indicator(params: FieldParams, points: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Self::zeros(params);
        for p in points {
            g.values[p] = Complex64::new(1.0, 0.0);
        }
        g
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    pub fn set(&mut self, idx: usize, v: Complex64) {
        self.values[idx] = v;
    }

    /// Σ |f(x)|².
    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn apply_kernel(f: &ComplexGrid, sign: u32, scale: f64) -> ComplexGrid {
    let params = f.params;
    let q = params.q();
    let space = Space::new(params);
    let chi = Character::new(q);
    let support: Vec<(usize, Complex64)> = f
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() != 0.0)
        .map(|(i, &v)| (i, v))
        .collect();
    let values = (0..params.size())
        .into_par_iter()
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, v) in &support {
                let dot = space.dot(m, x);
                let arg = if sign == 0 { (q - dot) % q } else { dot };
                acc += chi.eval(arg) * v;
            }
            acc * scale
        })
        .collect();
    ComplexGrid { params, values }
}

/// f̂(m) = q^{−d} Σ_x χ(−m·x) f(x).
pub fn transform(f: &ComplexGrid) -> ComplexGrid {
    let scale = 1.0 / f.params.size() as f64;
    apply_kernel(f, 0, scale)
}

/// f(x) = Σ_m χ(m·x) g(m).
pub fn inverse_transform(g: &ComplexGrid) -> ComplexGrid {
    apply_kernel(g, 1, 1.0)
}

/// |Σ_m |f̂(m)|² − q^{−d} Σ_x |f(x)|²|.
pub fn parseval_defect(f: &ComplexGrid) -> f64 {
    let lhs = transform(f).sum_sq();
    let rhs = f.sum_sq() / f.params.size() as f64;
    (lhs - rhs).abs()
}

/// Norms of h restricted to the sphere of radius t, for the L⁴ restriction probe.
pub fn sphere_restricted_norms(h: &ComplexGrid, t: u32) -> SphereNorms {
    let params = h.params;
    let space = Space::new(params);
    let t = t % params.q();
    let mut restricted = ComplexGrid::zeros(params);
    for x in 0..params.size() {
        if space.norm(x) == t {
            restricted.values[x] = h.values[x];
        }
    }
    let hat = transform(&restricted);
    let l4 = hat
        .values
        .iter()
        .map(|v| v.norm_sqr() * v.norm_sqr())
        .sum::<f64>()
        .powf(0.25);
    let l2 = restricted.sum_sq().sqrt();
    let scale = (params.q() as f64).powf(-1.5) * l2;
    SphereNorms {
        l4_of_transform: l4,
        l2,
        ratio: if scale > 0.0 { l4 / scale } else { 0.0 },
        in_hypothesis: params.d() == 2 && params.q() % 4 == 3,
    }
}
