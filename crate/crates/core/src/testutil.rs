pub use crate::init::{random_scalar, random_tensor, random_vector};

use crate::grid::Grid;

/// Second-order central difference along `axis`.
pub fn fd_derivative(grid: &Grid, values: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let stride = n.pow(axis as u32);
    (0..grid.len())
        .map(|p| {
            let j = (p / stride) % n;
            let up = p - j * stride + ((j + 1) % n) * stride;
            let down = p - j * stride + ((j + n - 1) % n) * stride;
            (values[up] - values[down]) / (2.0 * h)
        })
        .collect()
}
