//! Spectral differential operators on fields.

use rustfft::num_complex::Complex64;

use super::field::{Field, Rank, ScalarField, TensorField, VectorField};

impl<R: Rank> Field<R> {
    /// Zeroes every mode with an integer frequency above `n/3` on any axis.
    pub fn dealias(&self) -> Self {
        let comps = self
            .components()
            .iter()
            .map(|c| self.grid().dealias_values(c))
            .collect();
        Field::from_components_unchecked(self.grid(), comps)
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> Self {
        let comps = self
            .components()
            .iter()
            .map(|c| self.grid().laplacian_values(c))
            .collect();
        Field::from_components_unchecked(self.grid(), comps)
    }

    /// Componentwise mean-zero solution `g` of `-Δg = f`; the mean of `f`
    /// is projected out first.
    pub fn inverse_laplacian_meanzero(&self) -> Self {
        let comps = self
            .components()
            .iter()
            .map(|c| self.grid().inverse_neg_laplacian_values(c))
            .collect();
        Field::from_components_unchecked(self.grid(), comps)
    }

    /// Componentwise gradients, `out[c][axis]`.
    pub(crate) fn component_gradients(&self) -> Vec<Vec<Vec<f64>>> {
        self.components()
            .iter()
            .map(|c| self.grid().gradient_values(c))
            .collect()
    }
}

impl ScalarField {
    pub fn gradient(&self) -> VectorField {
        let comps = self.grid().gradient_values(self.values());
        Field::from_components_unchecked(self.grid(), comps)
    }
}

impl VectorField {
    /// `(∇u)_ij = ∂u_i/∂x_j`.
    pub fn gradient(&self) -> TensorField {
        let dim = self.grid().dim();
        let mut comps = Vec::with_capacity(dim * dim);
        for c in self.components() {
            comps.extend(self.grid().gradient_values(c));
        }
        Field::from_components_unchecked(self.grid(), comps)
    }

    /// `∂_j u_j`.
    pub fn divergence(&self) -> ScalarField {
        let grid = self.grid();
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (axis, c) in self.components().iter().enumerate() {
            let d = grid.spectral_derivative(&grid.forward(c), axis);
            for (a, v) in acc.iter_mut().zip(d) {
                *a += v;
            }
        }
        Field::from_components_unchecked(grid, vec![grid.inverse(acc)])
    }

    /// Removes the gradient part: `w - ∇Δ⁻¹(div w)`.
    pub fn leray_project(&self) -> VectorField {
        let grid = self.grid();
        let dim = grid.dim();
        let specs: Vec<Vec<Complex64>> = self.components().iter().map(|c| grid.forward(c)).collect();
        let mut out = specs.clone();
        for flat in 0..grid.len() {
            let kd = grid.deriv_wavevector(flat);
            let kk: f64 = kd[..dim].iter().map(|v| v * v).sum();
            if kk == 0.0 {
                continue;
            }
            let mut dot = Complex64::new(0.0, 0.0);
            for axis in 0..dim {
                dot += specs[axis][flat] * kd[axis];
            }
            for axis in 0..dim {
                out[axis][flat] -= dot * (kd[axis] / kk);
            }
        }
        let comps = out.into_iter().map(|s| grid.inverse(s)).collect();
        Field::from_components_unchecked(grid, comps)
    }
}

impl TensorField {
    /// Row-wise divergence, `(div T)_i = ∂_j T_ij`.
    pub fn divergence(&self) -> VectorField {
        let grid = self.grid();
        let dim = grid.dim();
        let mut comps = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
            for j in 0..dim {
                let d = grid.spectral_derivative(&grid.forward(self.component(i, j)), j);
                for (a, v) in acc.iter_mut().zip(d) {
                    *a += v;
                }
            }
            comps.push(grid.inverse(acc));
        }
        Field::from_components_unchecked(grid, comps)
    }
}
