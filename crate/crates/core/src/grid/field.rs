use std::marker::PhantomData;
use std::ops::{Add, Mul, Sub};

use super::Grid;
use crate::error::{Error, Result};

/// Number of components a field carries per node.
pub trait Rank: Clone + std::fmt::Debug + PartialEq {
    fn components(dim: usize) -> usize;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scalar;
#[derive(Clone, Debug, PartialEq)]
pub struct Vector;
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor;

impl Rank for Scalar {
    fn components(_dim: usize) -> usize {
        1
    }
}

impl Rank for Vector {
    fn components(dim: usize) -> usize {
        dim
    }
}

impl Rank for Tensor {
    fn components(dim: usize) -> usize {
        dim * dim
    }
}

/// Real samples on a [`Grid`]; one array per component.
///
/// Tensor components are stored row-major, `(i, j)` at `i * dim + j`.
#[derive(Clone, Debug)]
pub struct Field<R: Rank> {
    grid: Grid,
    comps: Vec<Vec<f64>>,
    _rank: PhantomData<R>,
}

pub type ScalarField = Field<Scalar>;
pub type VectorField = Field<Vector>;
pub type TensorField = Field<Tensor>;

impl<R: Rank> PartialEq for Field<R> {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.comps == other.comps
    }
}

impl<R: Rank> Field<R> {
    pub fn zeros(grid: &Grid) -> Self {
        let count = R::components(grid.dim());
        Field {
            grid: grid.clone(),
            comps: vec![vec![0.0; grid.len()]; count],
            _rank: PhantomData,
        }
    }

    /// Wraps raw component arrays, checking their count and length.
    pub fn from_components(grid: &Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        let count = R::components(grid.dim());
        if comps.len() != count || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter(format!(
                "expected {count} components of length {}",
                grid.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            comps,
            _rank: PhantomData,
        })
    }

    pub(crate) fn from_components_unchecked(grid: &Grid, comps: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(comps.len(), R::components(grid.dim()));
        Field {
            grid: grid.clone(),
            comps,
            _rank: PhantomData,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    /// Same samples, relabeled onto another grid with the same node layout.
    pub fn on_grid(&self, grid: &Grid) -> Result<Self> {
        if grid.dim() != self.grid.dim() || grid.n() != self.grid.n() {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_components_unchecked(grid, self.comps.clone()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    /// Applies `f` componentwise and pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|c| c.iter().map(|&v| f(v)).collect())
            .collect();
        Field::from_components_unchecked(&self.grid, comps)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert!(self.grid.same_as(&other.grid));
        for (dst, src) in self.comps.iter_mut().zip(&other.comps) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Field::from_components_unchecked(&self.grid, comps)
    }

    /// Pointwise Euclidean (Frobenius for tensors) magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .zip(other.comps.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Mean of every component.
    pub fn means(&self) -> Vec<f64> {
        self.comps.iter().map(|c| self.grid.mean(c)).collect()
    }
}

impl ScalarField {
    pub fn constant(grid: &Grid, value: f64) -> Self {
        Field::from_components_unchecked(grid, vec![vec![value; grid.len()]])
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        Field::from_components(grid, vec![values])
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.coords(j))).collect();
        Field::from_components_unchecked(grid, vec![values])
    }

    pub fn values(&self) -> &[f64] {
        &self.comps[0]
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.comps[0]
    }

    pub fn min(&self) -> f64 {
        self.values().iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(self.values())
    }
}

impl VectorField {
    /// Samples `f` at every node; components beyond `dim` are ignored.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let dim = grid.dim();
        let mut comps = vec![vec![0.0; grid.len()]; dim];
        for j in 0..grid.len() {
            let v = f(grid.coords(j));
            for i in 0..dim {
                comps[i][j] = v[i];
            }
        }
        Field::from_components_unchecked(grid, comps)
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.comps[i]
    }
}

impl TensorField {
    /// Samples `f` at every node; entries beyond `dim` are ignored.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [[f64; 3]; 3]) -> Self {
        let dim = grid.dim();
        let mut comps = vec![vec![0.0; grid.len()]; dim * dim];
        for p in 0..grid.len() {
            let t = f(grid.coords(p));
            for i in 0..dim {
                for j in 0..dim {
                    comps[i * dim + j][p] = t[i][j];
                }
            }
        }
        Field::from_components_unchecked(grid, comps)
    }

    /// The identity tensor at every node.
    pub fn identity(grid: &Grid) -> Self {
        let dim = grid.dim();
        let mut t = TensorField::zeros(grid);
        for i in 0..dim {
            t.comps[i * dim + i].iter_mut().for_each(|v| *v = 1.0);
        }
        t
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        &self.comps[i * self.grid.dim() + j]
    }

    pub fn component_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let dim = self.grid.dim();
        &mut self.comps[i * dim + j]
    }

    pub fn transpose(&self) -> Self {
        let dim = self.grid.dim();
        let mut comps = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                comps.push(self.comps[j * dim + i].clone());
            }
        }
        Field::from_components_unchecked(&self.grid, comps)
    }

    /// Pointwise trace.
    pub fn trace(&self) -> ScalarField {
        let dim = self.grid.dim();
        let mut out = vec![0.0; self.grid.len()];
        for i in 0..dim {
            for (o, v) in out.iter_mut().zip(&self.comps[i * dim + i]) {
                *o += v;
            }
        }
        Field::from_components_unchecked(&self.grid, vec![out])
    }
}

impl<R: Rank> Add for &Field<R> {
    type Output = Field<R>;
    fn add(self, rhs: &Field<R>) -> Field<R> {
        self.lincomb(1.0, rhs, 1.0)
    }
}

impl<R: Rank> Sub for &Field<R> {
    type Output = Field<R>;
    fn sub(self, rhs: &Field<R>) -> Field<R> {
        self.lincomb(1.0, rhs, -1.0)
    }
}

impl<R: Rank> Mul<f64> for &Field<R> {
    type Output = Field<R>;
    fn mul(self, rhs: f64) -> Field<R> {
        self.scaled(rhs)
    }
}
