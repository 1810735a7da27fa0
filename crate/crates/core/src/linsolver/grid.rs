//! Uniform interior grids on the unit cube and the fields that live on them.
//!
//! A grid with `n` interior points per axis has spacing `h = 1/(n+1)`; the
//! point with indices `(i, j, k)` sits at `y = ((i+1)h, (j+1)h, (k+1)h)` and is
//! stored at `(i n + j) n + k`. Boundary values are identically zero and are
//! never stored.

use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interior grid of the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!("grid needs n >= 4, got {n}")));
        }
        Ok(Grid { n })
    }

    /// Spacing `1/(n+1)`.
    pub fn h(&self) -> f64 {
        1.0 / (self.n as f64 + 1.0)
    }

    /// Number of stored points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Inverse of [`Grid::idx`].
    pub fn ijk(&self, p: usize) -> [usize; 3] {
        let n = self.n;
        [p / (n * n), (p / n) % n, p % n]
    }

    /// Coordinate of interior index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.h()
    }

    pub fn point(&self, p: usize) -> [f64; 3] {
        self.ijk(p).map(|i| self.coord(i))
    }

    /// Volume weight `h³` of the trapezoidal rule with zero boundary values.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3)
    }

    /// Memory stride of a unit step along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n * self.n,
            1 => self.n,
            _ => 1,
        }
    }
}

/// A scalar on the interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGridField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarGridField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarGridField { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarGridField { grid, data })
    }

    /// Samples `f(y)` at every interior point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let data = (0..grid.len()).into_par_iter().map(|p| f(grid.point(p))).collect();
        ScalarGridField { grid, data }
    }

    /// Builds a field from `f(i, j, k)` in parallel over points.
    pub fn from_index_fn(grid: Grid, f: impl Fn(usize, usize, usize) -> f64 + Sync) -> Self {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let [i, j, k] = grid.ijk(p);
                f(i, j, k)
            })
            .collect();
        ScalarGridField { grid, data }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.idx(i, j, k)]
    }

    /// Discrete `L²` inner product `h³ Σ u v`.
    pub fn dot(&self, o: &ScalarGridField) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        ScalarGridField { grid: self.grid, data: self.data.par_iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination with another field.
    pub fn zip_map(&self, o: &ScalarGridField, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        ScalarGridField {
            grid: self.grid,
            data: self.data.par_iter().zip(&o.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self += c·x`.
    pub fn axpy(&mut self, c: f64, x: &ScalarGridField) {
        self.data.par_iter_mut().zip(&x.data).for_each(|(a, b)| *a += c * b);
    }

    /// Pointwise product.
    pub fn mul(&self, o: &ScalarGridField) -> Self {
        self.zip_map(o, |a, b| a * b)
    }

    /// Multiplies by the coordinate function `y_axis`.
    pub fn times_coord(&self, axis: usize) -> Self {
        let g = self.grid;
        ScalarGridField::from_index_fn(g, |i, j, k| {
            let c = g.coord([i, j, k][axis]);
            c * self.get(i, j, k)
        })
    }
}

impl Add for &ScalarGridField {
    type Output = ScalarGridField;
    fn add(self, o: &ScalarGridField) -> ScalarGridField {
        self.zip_map(o, |a, b| a + b)
    }
}

impl Sub for &ScalarGridField {
    type Output = ScalarGridField;
    fn sub(self, o: &ScalarGridField) -> ScalarGridField {
        self.zip_map(o, |a, b| a - b)
    }
}

impl Neg for &ScalarGridField {
    type Output = ScalarGridField;
    fn neg(self) -> ScalarGridField {
        self.scale(-1.0)
    }
}

impl Mul<&ScalarGridField> for f64 {
    type Output = ScalarGridField;
    fn mul(self, o: &ScalarGridField) -> ScalarGridField {
        o.scale(self)
    }
}

/// Three scalar components on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGridField {
    pub c: [ScalarGridField; 3],
}

impl VectorGridField {
    pub fn zeros(grid: Grid) -> Self {
        VectorGridField { c: std::array::from_fn(|_| ScalarGridField::zeros(grid)) }
    }

    pub fn new(c: [ScalarGridField; 3]) -> Self {
        VectorGridField { c }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        VectorGridField { c: std::array::from_fn(|i| ScalarGridField::from_fn(grid, |y| f(y)[i])) }
    }

    pub fn grid(&self) -> Grid {
        self.c[0].grid
    }

    pub fn dot(&self, o: &VectorGridField) -> f64 {
        (0..3).map(|i| self.c[i].dot(&o.c[i])).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(ScalarGridField::is_finite)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn map(&self, f: impl Fn(&ScalarGridField) -> ScalarGridField) -> Self {
        VectorGridField { c: std::array::from_fn(|i| f(&self.c[i])) }
    }

    pub fn axpy(&mut self, s: f64, x: &VectorGridField) {
        for i in 0..3 {
            self.c[i].axpy(s, &x.c[i]);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.data.iter().all(|&v| v == 0.0))
    }
}

impl Add for &VectorGridField {
    type Output = VectorGridField;
    fn add(self, o: &VectorGridField) -> VectorGridField {
        VectorGridField { c: std::array::from_fn(|i| &self.c[i] + &o.c[i]) }
    }
}

impl Sub for &VectorGridField {
    type Output = VectorGridField;
    fn sub(self, o: &VectorGridField) -> VectorGridField {
        VectorGridField { c: std::array::from_fn(|i| &self.c[i] - &o.c[i]) }
    }
}

/// The pair `(h, q)` of unknowns, or any pair of vector fields with the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub h: VectorGridField,
    pub q: VectorGridField,
}

impl FieldPair {
    pub fn zeros(grid: Grid) -> Self {
        FieldPair { h: VectorGridField::zeros(grid), q: VectorGridField::zeros(grid) }
    }

    pub fn new(h: VectorGridField, q: VectorGridField) -> Self {
        FieldPair { h, q }
    }

    pub fn grid(&self) -> Grid {
        self.h.grid()
    }

    pub fn dot(&self, o: &FieldPair) -> f64 {
        self.h.dot(&o.h) + self.q.dot(&o.q)
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `½(‖h‖² + ‖q‖²)`.
    pub fn energy(&self) -> f64 {
        0.5 * self.dot(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        FieldPair { h: self.h.scale(s), q: self.q.scale(s) }
    }

    pub fn axpy(&mut self, s: f64, x: &FieldPair) {
        self.h.axpy(s, &x.h);
        self.q.axpy(s, &x.q);
    }

    pub fn map(&self, f: impl Fn(&VectorGridField) -> VectorGridField) -> Self {
        FieldPair { h: f(&self.h), q: f(&self.q) }
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.q.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.h.is_zero() && self.q.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.h.max_abs().max(self.q.max_abs())
    }

    /// The six scalars in the order `h1, h2, h3, q1, q2, q3`.
    pub fn components(&self) -> impl Iterator<Item = &ScalarGridField> {
        self.h.c.iter().chain(self.q.c.iter())
    }
}

impl Add for &FieldPair {
    type Output = FieldPair;
    fn add(self, o: &FieldPair) -> FieldPair {
        FieldPair { h: &self.h + &o.h, q: &self.q + &o.q }
    }
}

impl Sub for &FieldPair {
    type Output = FieldPair;
    fn sub(self, o: &FieldPair) -> FieldPair {
        FieldPair { h: &self.h - &o.h, q: &self.q - &o.q }
    }
}

/// Solver state: the unknowns at similarity time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinState {
    pub fields: FieldPair,
    pub tau: f64,
}

impl LinState {
    pub fn new(fields: FieldPair, tau: f64) -> Self {
        LinState { fields, tau }
    }

    pub fn h(&self) -> &VectorGridField {
        &self.fields.h
    }

    pub fn q(&self) -> &VectorGridField {
        &self.fields.q
    }
}
