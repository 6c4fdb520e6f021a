//! Rectangle-rule norms. Sums run in flat index order so results do not
//! depend on how the fields were produced.

use super::field::{Field, Rank, VectorField};
use crate::error::{Error, Result};

pub(crate) fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidParameter(format!("norm exponent must be >= 1, got {q}")));
    }
    Ok(())
}

/// `(∫ |f|^q dx)^(1/q)` of pointwise magnitudes, or their max when `q` is infinite.
pub(crate) fn lq_of_magnitude(mag: &[f64], cell_volume: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return mag.iter().fold(0.0f64, |m, &v| m.max(v));
    }
    if q == 2.0 {
        return (mag.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt();
    }
    (mag.iter().map(|v| v.powf(q)).sum::<f64>() * cell_volume).powf(1.0 / q)
}

impl<R: Rank> Field<R> {
    /// L^q norm of the pointwise magnitude; `q = f64::INFINITY` gives the max.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        check_exponent(q)?;
        Ok(lq_of_magnitude(&self.magnitude(), self.grid().cell_volume(), q))
    }

    /// `‖f‖_{L^2}`.
    pub fn l2_norm(&self) -> f64 {
        lq_of_magnitude(&self.magnitude(), self.grid().cell_volume(), 2.0)
    }

    /// `∫ |∇f|^2 dx` summed over components.
    pub fn gradient_sq_integral(&self) -> f64 {
        let grads = self.component_gradients();
        let mut total = 0.0;
        for comp in &grads {
            for axis in comp {
                total += axis.iter().map(|v| v * v).sum::<f64>();
            }
        }
        total * self.grid().cell_volume()
    }

    /// W^{1,q} norm taken as `‖f‖_{L^q} + ‖∇f‖_{L^q}`.
    pub fn w1q_norm(&self, q: f64) -> Result<f64> {
        check_exponent(q)?;
        let grads = self.component_gradients();
        let mut mag = vec![0.0; self.grid().len()];
        for comp in &grads {
            for axis in comp {
                for (m, v) in mag.iter_mut().zip(axis) {
                    *m += v * v;
                }
            }
        }
        mag.iter_mut().for_each(|m| *m = m.sqrt());
        let grad = lq_of_magnitude(&mag, self.grid().cell_volume(), q);
        Ok(self.lq_norm(q)? + grad)
    }

    /// W^{2,q} norm taken as `‖f‖_{L^q} + ‖∇f‖_{L^q} + ‖∇²f‖_{L^q}`.
    pub fn w2q_norm(&self, q: f64) -> Result<f64> {
        let grid = self.grid();
        let mut mag = vec![0.0; grid.len()];
        for comp in self.components() {
            for a in 0..grid.dim() {
                let da = grid.derivative(comp, a);
                for b in 0..grid.dim() {
                    for (m, v) in mag.iter_mut().zip(grid.derivative(&da, b)) {
                        *m += v * v;
                    }
                }
            }
        }
        mag.iter_mut().for_each(|m| *m = m.sqrt());
        Ok(self.w1q_norm(q)? + lq_of_magnitude(&mag, grid.cell_volume(), q))
    }
}

impl VectorField {
    /// `∫ |∇u|^2 dx`.
    pub fn h1_seminorm_sq(&self) -> f64 {
        self.gradient_sq_integral()
    }
}
