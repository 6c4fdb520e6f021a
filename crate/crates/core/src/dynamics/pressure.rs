use super::{divergence_of, StepConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField, VectorField};
use crate::state::State;

/// Result of the variable-coefficient pressure solve.
#[derive(Clone, Debug)]
pub struct PressureSolution {
    pub q: ScalarField,
    /// Number of fixed-point updates taken.
    pub iterations: usize,
    /// Final `‖div w - div(∇q/ρ)‖₂ / ‖div w‖₂`.
    pub relative_residual: f64,
}

pub(crate) struct RawSolution {
    pub q: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn l2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves `div(β∇q) = rhs` for mean-zero `q` by fixed-point iteration,
/// preconditioned with the constant-coefficient inverse at
/// `β̄ = (min β + max β) / 2`. Contracts with factor
/// `(max β - min β) / (max β + min β) < 1`.
pub(crate) fn solve_variable_coefficient(
    grid: &Grid,
    beta: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<RawSolution> {
    let n = grid.len();
    let rhs_norm = l2(rhs);
    if rhs_norm == 0.0 {
        return Ok(RawSolution {
            q: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let (lo, hi) = beta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let beta_bar = 0.5 * (lo + hi);

    let mut q = vec![0.0; n];
    let mut residual = rhs.to_vec();
    let mut iterations = 0;
    loop {
        let rel = l2(&residual) / rhs_norm;
        if !rel.is_finite() {
            return Err(Error::PressureDiverged {
                iterations,
                residual: rel,
            });
        }
        if rel <= tol {
            return Ok(RawSolution {
                q,
                iterations,
                relative_residual: rel,
            });
        }
        if iterations == max_iter {
            return Err(Error::PressureDiverged {
                iterations,
                residual: rel,
            });
        }
        let update = grid.inverse_neg_div_grad_values(&residual);
        for (a, d) in q.iter_mut().zip(&update) {
            *a -= d / beta_bar;
        }
        iterations += 1;

        let grad_q = grid.gradient_values(&q);
        let flux: Vec<Vec<f64>> = grad_q
            .into_iter()
            .map(|g| g.iter().zip(beta).map(|(a, b)| a * b).collect())
            .collect();
        let op = divergence_of(grid, &flux, false);
        residual = rhs.iter().zip(&op).map(|(a, b)| a - b).collect();
    }
}

/// Finds the multiplier `q` with `div((1/ρ)∇q) = div w`, mean zero.
pub fn pressure_solve(s: &State, w: &VectorField, cfg: &StepConfig) -> Result<PressureSolution> {
    let min = s.min_density();
    if !(min > 0.0) {
        return Err(Error::DensityPositivity { min });
    }
    let grid = s.grid();
    let beta: Vec<f64> = s.rho.values().iter().map(|r| 1.0 / r).collect();
    let div_w = divergence_of(grid, w.components(), false);
    let raw = solve_variable_coefficient(grid, &beta, &div_w, cfg.pressure_tol, cfg.pressure_max_iter)?;
    Ok(PressureSolution {
        q: Field::from_components_unchecked(grid, vec![raw.q]),
        iterations: raw.iterations,
        relative_residual: raw.relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_vector;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (Grid, StepConfig) {
        (Grid::new(2, n, 2.0 * PI).unwrap(), StepConfig::new(1e-3, 0.1).unwrap())
    }

    #[test]
    fn constant_density_solves_in_one_iteration() {
        let (g, cfg) = setup(32);
        let s = State::equilibrium(&g);
        let w = random_vector(&g, 4, 3);
        let sol = pressure_solve(&s, &w, &cfg).unwrap();
        assert_eq!(sol.iterations, 1);
        let expected = w.divergence().inverse_laplacian_meanzero().scaled(-1.0);
        assert!(sol.q.max_abs_diff(&expected) <= 1e-13);
    }

    #[test]
    fn solenoidal_input_gives_zero() {
        let (g, cfg) = setup(16);
        let mut s = State::equilibrium(&g);
        s.rho = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * x[0].cos());
        let w = VectorField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), 0.0]);
        let sol = pressure_solve(&s, &w, &cfg).unwrap();
        assert!(sol.q.max_abs() <= 1e-14);
    }

    #[test]
    fn manufactured_multiplier_is_recovered() {
        let (g, cfg) = setup(32);
        let mut s = State::equilibrium(&g);
        s.rho = ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[0].sin());
        let q_star = ScalarField::from_fn(&g, |x| x[1].cos());
        let grad = q_star.gradient();
        let noise = random_vector(&g, 5, 8).leray_project();
        let comps = (0..2)
            .map(|i| {
                grad.component(i)
                    .iter()
                    .zip(s.rho.values())
                    .zip(noise.component(i))
                    .map(|((gq, r), nz)| gq / r + nz)
                    .collect()
            })
            .collect();
        let w = VectorField::from_components(&g, comps).unwrap();
        let sol = pressure_solve(&s, &w, &cfg).unwrap();
        assert!(sol.iterations > 1);
        assert!(sol.q.max_abs_diff(&q_star) <= 1e-8, "{}", sol.q.max_abs_diff(&q_star));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let (g, mut cfg) = setup(16);
        cfg.pressure_max_iter = 1;
        let mut s = State::equilibrium(&g);
        s.rho = ScalarField::from_fn(&g, |x| 1.0 + 0.4 * x[0].sin());
        let w = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
        let err = pressure_solve(&s, &w, &cfg).unwrap_err();
        assert!(err.to_string().contains("pressure iteration diverged"));
    }
}
