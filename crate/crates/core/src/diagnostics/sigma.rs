use crate::dynamics::{Scheme, StepConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, VectorField};
use crate::state::State;

/// `σ`, evolved on its own next to the state and compared with `∇ln ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaState {
    pub sigma: VectorField,
}

fn log_density_gradient(s: &State) -> Result<VectorField> {
    let min = s.min_density();
    if !(min > 0.0) {
        return Err(Error::DensityPositivity { min });
    }
    Ok(s.rho.map(f64::ln).gradient())
}

impl SigmaState {
    /// `σ = ∇ln ρ` of the given state.
    pub fn from_state(s: &State) -> Result<Self> {
        Ok(SigmaState {
            sigma: log_density_gradient(s)?,
        })
    }
}

/// `-∇(u·σ) - ∇div u`. The last term vanishes for solenoidal `u`.
fn tendency(grid: &Grid, sigma: &VectorField, u: &VectorField, dealias: bool) -> Vec<Vec<f64>> {
    let mut dot = vec![0.0; grid.len()];
    for l in 0..grid.dim() {
        for ((a, s), v) in dot.iter_mut().zip(sigma.component(l)).zip(u.component(l)) {
            *a += s * v;
        }
    }
    if dealias {
        dot = grid.dealias_values(&dot);
    }
    let div: Vec<f64> = u.divergence().values().to_vec();
    let total: Vec<f64> = dot.iter().zip(&div).map(|(a, b)| a + b).collect();
    grid.gradient_values(&total)
        .into_iter()
        .map(|c| c.into_iter().map(|v| -v).collect())
        .collect()
}

/// Advances `σ` over one step with the same explicit stages as the
/// stepper: `start` is the state at the beginning of the step and `stage`
/// the predictor state it produced.
pub fn sigma_step(sigma: &SigmaState, start: &State, stage: &State, cfg: &StepConfig) -> SigmaState {
    let grid = start.grid();
    let dt = cfg.dt;
    let k0 = tendency(grid, &sigma.sigma, &start.u, cfg.dealias);
    let predicted: Vec<Vec<f64>> = sigma
        .sigma
        .components()
        .iter()
        .zip(&k0)
        .map(|(s, k)| s.iter().zip(k).map(|(a, b)| a + dt * b).collect())
        .collect();
    let out = match cfg.scheme {
        Scheme::Imex1 => predicted,
        Scheme::Imex2 => {
            let pred_field: VectorField = Field::from_components_unchecked(grid, predicted.clone());
            let k1 = tendency(grid, &pred_field, &stage.u, cfg.dealias);
            sigma
                .sigma
                .components()
                .iter()
                .zip(&predicted)
                .zip(&k1)
                .map(|((s0, sp), k)| {
                    (0..grid.len()).map(|p| 0.5 * s0[p] + 0.5 * (sp[p] + dt * k[p])).collect()
                })
                .collect()
        }
    };
    SigmaState {
        sigma: Field::from_components_unchecked(grid, out),
    }
}

/// `‖σ - ∇ln ρ‖₂`.
pub fn sigma_consistency(sigma: &SigmaState, s: &State) -> Result<f64> {
    Ok((&sigma.sigma - &log_density_gradient(s)?).l2_norm())
}
