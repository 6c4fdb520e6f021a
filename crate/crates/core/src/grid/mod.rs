//! Periodic box, FFT machinery and the field types living on it.
//!
//! Samples are stored in x-fastest order: the flat index of node
//! `(j0, j1, j2)` is `j0 + n * (j1 + n * j2)`. Spectral arrays use the same
//! layout with the usual FFT frequency ordering along each axis
//! (`0, 1, …, n/2-1, -n/2, …, -1`).

mod field;
mod norms;
mod ops;

pub(crate) use norms::{check_exponent, lq_of_magnitude};
pub use field::{Field, Rank, Scalar, ScalarField, Tensor, TensorField, Vector, VectorField};

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the box `[0, L)^dim`.
///
/// Cloning is cheap; the FFT plans and wavenumber tables are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Integer frequency of each FFT slot along one axis.
    freq: Vec<i64>,
    /// Physical wavevector per flat spectral index.
    k: Vec<[f64; 3]>,
    /// Wavevector used for first derivatives (Nyquist component zeroed).
    k_deriv: Vec<[f64; 3]>,
    /// |k|^2 per flat spectral index.
    k_sq: Vec<f64>,
    /// true where the mode survives the 2/3 rule.
    keep: Vec<bool>,
}

impl Grid {
    /// Builds the grid; `n` must be a power of two no smaller than 8.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be > 0, got {length}")));
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let half = (n / 2) as i64;
        let freq: Vec<i64> = (0..n as i64)
            .map(|j| if j < half { j } else { j - n as i64 })
            .collect();
        let scale = 2.0 * std::f64::consts::PI / length;
        let cutoff = (n / 3) as i64;

        let total = n.pow(dim as u32);
        let mut k = Vec::with_capacity(total);
        let mut k_deriv = Vec::with_capacity(total);
        let mut k_sq = Vec::with_capacity(total);
        let mut keep = Vec::with_capacity(total);
        for flat in 0..total {
            let mut kv = [0.0; 3];
            let mut kd = [0.0; 3];
            let mut kept = true;
            let mut rem = flat;
            for axis in 0..dim {
                let m = freq[rem % n];
                rem /= n;
                kv[axis] = m as f64 * scale;
                kd[axis] = if m == -half { 0.0 } else { kv[axis] };
                if m.abs() > cutoff {
                    kept = false;
                }
            }
            k_sq.push(kv.iter().map(|c| c * c).sum());
            k.push(kv);
            k_deriv.push(kd);
            keep.push(kept);
        }

        Ok(Grid {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                forward,
                inverse,
                freq,
                k,
                k_deriv,
                k_sq,
                keep,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.inner.k.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.inner.dim as i32)
    }

    /// Largest integer frequency kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.inner.n / 3
    }

    /// Same node layout, different box side. Used by the scaling transform.
    pub fn with_length(&self, length: f64) -> Result<Grid> {
        Grid::new(self.dim(), self.n(), length)
    }

    /// Physical coordinates of a node (unused axes are zero).
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let n = self.n();
        let h = self.spacing();
        let mut x = [0.0; 3];
        let mut rem = flat;
        for c in x.iter_mut().take(self.dim()) {
            *c = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }

    /// Integer frequencies of a flat spectral index.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let n = self.n();
        let mut m = [0i64; 3];
        let mut rem = flat;
        for c in m.iter_mut().take(self.dim()) {
            *c = self.inner.freq[rem % n];
            rem /= n;
        }
        m
    }

    /// Flat spectral index of integer frequencies (each in `-n/2..n/2`).
    pub fn mode_index(&self, mode: [i64; 3]) -> usize {
        let n = self.n() as i64;
        let mut flat = 0usize;
        for axis in (0..self.dim()).rev() {
            let slot = mode[axis].rem_euclid(n) as usize;
            flat = flat * self.n() + slot;
        }
        flat
    }

    pub(crate) fn deriv_wavevector(&self, flat: usize) -> [f64; 3] {
        self.inner.k_deriv[flat]
    }

    pub(crate) fn k_sq(&self, flat: usize) -> f64 {
        self.inner.k_sq[flat]
    }

    #[cfg(test)]
    pub(crate) fn keeps(&self, flat: usize) -> bool {
        self.inner.keep[flat]
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }

    /// Forward transform of real samples (unnormalized).
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.inner.forward);
        buf
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, &self.inner.inverse);
        let norm = 1.0 / self.len() as f64;
        spec.into_iter().map(|c| c.re * norm).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // axis 0 is contiguous
        plan.process_with_scratch(buf, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 1..self.dim() {
            let stride = n.pow(axis as u32);
            let block = stride * n;
            for base in (0..buf.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = buf[start + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, slot) in line.iter().enumerate() {
                        buf[start + j * stride] = *slot;
                    }
                }
            }
        }
    }

    /// ∂/∂x_axis of real samples.
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let spec = self.forward(values);
        self.inverse(self.spectral_derivative(&spec, axis))
    }

    /// All first derivatives of real samples, indexed by axis.
    pub fn gradient_values(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let spec = self.forward(values);
        (0..self.dim())
            .map(|axis| self.inverse(self.spectral_derivative(&spec, axis)))
            .collect()
    }

    pub(crate) fn spectral_derivative(&self, spec: &[Complex64], axis: usize) -> Vec<Complex64> {
        spec.iter()
            .enumerate()
            .map(|(flat, c)| {
                let kd = self.inner.k_deriv[flat][axis];
                Complex64::new(-kd * c.im, kd * c.re)
            })
            .collect()
    }

    /// Laplacian of real samples.
    pub fn laplacian_values(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (c, ksq) in spec.iter_mut().zip(&self.inner.k_sq) {
            *c *= -ksq;
        }
        self.inverse(spec)
    }

    /// Solves `-Δg = f - mean(f)` with `mean(g) = 0`.
    pub fn inverse_neg_laplacian_values(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (c, ksq) in spec.iter_mut().zip(&self.inner.k_sq) {
            if *ksq == 0.0 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= *ksq;
            }
        }
        self.inverse(spec)
    }

    /// Inverse of `-Σ_a D_a D_a` built from the first-derivative symbols, so
    /// it is an exact inverse of `-div ∇` as assembled from
    /// [`Grid::gradient_values`]. Modes the derivatives annihilate map to 0.
    pub(crate) fn inverse_neg_div_grad_values(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (c, kd) in spec.iter_mut().zip(&self.inner.k_deriv) {
            let ksq: f64 = kd.iter().map(|k| k * k).sum();
            if ksq == 0.0 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= ksq;
            }
        }
        self.inverse(spec)
    }

    /// 2/3-rule truncation of real samples.
    pub fn dealias_values(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        self.dealias_spectrum(&mut spec);
        self.inverse(spec)
    }

    pub(crate) fn dealias_spectrum(&self, spec: &mut [Complex64]) {
        for (c, &kept) in spec.iter_mut().zip(&self.inner.keep) {
            if !kept {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Multiplies every spectral coefficient by `exp(-mu |k|^2 dt)`.
    pub fn heat_propagate_values(&self, values: &[f64], mu_dt: f64) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (c, ksq) in spec.iter_mut().zip(&self.inner.k_sq) {
            *c *= (-mu_dt * ksq).exp();
        }
        self.inverse(spec)
    }

    /// Arithmetic mean of samples.
    pub fn mean(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }

    /// Rectangle-rule integral over the box.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.n() == other.n()
            && self.length().to_bits() == other.length().to_bits()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("length", &self.length())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constructor_arithmetic() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        let g3 = Grid::new(3, 32, 2.0 * PI).unwrap();
        assert_eq!(g3.len(), 32768);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(Grid::new(2, 7, 2.0 * PI).is_err());
        assert!(Grid::new(2, 4, 2.0 * PI).is_err());
        assert!(Grid::new(1, 8, 2.0 * PI).is_err());
        assert!(Grid::new(4, 8, 2.0 * PI).is_err());
        assert!(Grid::new(2, 8, 0.0).is_err());
        assert!(Grid::new(2, 8, -1.0).is_err());
    }

    #[test]
    fn wavenumbers_are_centered() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        let mut seen: Vec<i64> = (0..8).map(|j| g.mode(j)[0]).collect();
        seen.sort();
        assert_eq!(seen, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        for flat in 0..g.len() {
            assert_eq!(g.mode_index(g.mode(flat)), flat);
        }
    }

    #[test]
    fn round_trip_3d() {
        let g = Grid::new(3, 8, 1.3).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let back = g.inverse(g.forward(&vals));
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * max);
        }
    }

    #[test]
    fn dealias_cutoff_is_floor_n_over_3() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        assert_eq!(g.dealias_cutoff(), 10);
        assert!(g.keeps(g.mode_index([10, -10, 0])));
        assert!(!g.keeps(g.mode_index([11, 0, 0])));
    }
}
