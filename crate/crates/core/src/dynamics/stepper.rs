use log::warn;

use super::rhs::{tendencies, Tendencies};
use super::{Forcing, Mode, Scheme, StepConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, VectorField};
use crate::state::State;

const CFL_WARN: f64 = 0.5;
const CFL_ABORT: f64 = 1.0;

/// Everything one time step produces.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: State,
    /// Predictor state at `t + dt` (equal to `state` for the first-order scheme).
    pub stage: State,
    /// `μ∫∫|∇u|²` over the step, with the scheme's stage weights.
    pub dissipation: f64,
    /// CFL number of the step's initial state.
    pub cfl: f64,
    pub pressure_iterations: usize,
}

/// `max|u| dt / h`.
pub fn cfl_number(s: &State, dt: f64) -> f64 {
    let umax = s.u.magnitude().into_iter().fold(0.0f64, f64::max);
    umax * dt / s.grid().spacing()
}

fn heat(grid: &Grid, u: Vec<Vec<f64>>, mu_dt: f64) -> Vec<Vec<f64>> {
    u.iter().map(|c| grid.heat_propagate_values(c, mu_dt)).collect()
}

fn euler(base: &[Vec<f64>], tend: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
    base.iter()
        .zip(tend)
        .map(|(b, t)| b.iter().zip(t).map(|(x, y)| x + dt * y).collect())
        .collect()
}

fn finish_stage(grid: &Grid, t: f64, rho: Vec<f64>, u: Vec<Vec<f64>>, e: Vec<Vec<f64>>, mode: Mode) -> Result<State> {
    let mut u: VectorField = Field::from_components_unchecked(grid, u);
    if mode == Mode::Incompressible {
        u = u.leray_project();
    }
    let s = State {
        t,
        rho: Field::from_components_unchecked(grid, vec![rho]),
        u,
        e: Field::from_components_unchecked(grid, e),
    };
    s.validate()?;
    Ok(s)
}

fn evaluate(s: &State, cfg: &StepConfig, forcing: Option<&dyn Forcing>) -> Result<Tendencies> {
    let sources = forcing.map(|f| f.sources(s.t)).transpose()?;
    tendencies(s, cfg, sources.as_ref())
}

/// Advances one step of size `cfg.dt`.
///
/// `μΔu` is integrated exactly in spectral space; the remaining terms use
/// forward Euler (`Imex1`) or Heun (`Imex2`). In incompressible mode every
/// stage velocity is Leray-projected.
pub fn advance(s: &State, cfg: &StepConfig, forcing: Option<&dyn Forcing>) -> Result<StepOutcome> {
    cfg.validate()?;
    let dt = cfg.dt;
    let cfl = cfl_number(s, dt);
    if cfl > CFL_ABORT {
        return Err(Error::CflAbort { cfl });
    }
    if cfl > CFL_WARN {
        warn!("CFL number {cfl:.3} exceeds {CFL_WARN}");
    }

    let grid = s.grid();
    let mu_dt = cfg.mu * dt;
    let t1 = s.t + dt;
    let rho0 = s.rho.components();
    let u0 = s.u.components();
    let e0 = s.e.components();

    let k0 = evaluate(s, cfg, forcing)?;
    let rho_star = euler(rho0, std::slice::from_ref(&k0.rho), dt).remove(0);
    let u_star = heat(grid, euler(u0, &k0.u, dt), mu_dt);
    let e_star = euler(e0, &k0.e, dt);
    let stage = finish_stage(grid, t1, rho_star, u_star, e_star, cfg.mode)?;
    let diss0 = cfg.mu * s.u.h1_seminorm_sq();

    match cfg.scheme {
        Scheme::Imex1 => Ok(StepOutcome {
            state: stage.clone(),
            stage,
            dissipation: dt * diss0,
            cfl,
            pressure_iterations: k0.pressure_iterations,
        }),
        Scheme::Imex2 => {
            let k1 = evaluate(&stage, cfg, forcing)?;
            let avg = |a: &[Vec<f64>], b: &[Vec<f64>], tb: &[Vec<f64>]| -> Vec<Vec<f64>> {
                a.iter()
                    .zip(b)
                    .zip(tb)
                    .map(|((x, y), z)| {
                        x.iter()
                            .zip(y)
                            .zip(z)
                            .map(|((p, q), r)| 0.5 * p + 0.5 * (q + dt * r))
                            .collect()
                    })
                    .collect()
            };
            let rho1 = avg(rho0, stage.rho.components(), std::slice::from_ref(&k1.rho)).remove(0);
            let u0_heat = heat(grid, u0.to_vec(), mu_dt);
            let u1 = avg(&u0_heat, stage.u.components(), &k1.u);
            let e1 = avg(e0, stage.e.components(), &k1.e);
            let state = finish_stage(grid, t1, rho1, u1, e1, cfg.mode)?;
            let diss1 = cfg.mu * stage.u.h1_seminorm_sq();
            Ok(StepOutcome {
                state,
                stage,
                dissipation: 0.5 * dt * (diss0 + diss1),
                cfl,
                pressure_iterations: k0.pressure_iterations + k1.pressure_iterations,
            })
        }
    }
}

/// Unforced step; see [`advance`].
pub fn step(s: &State, cfg: &StepConfig) -> Result<State> {
    Ok(advance(s, cfg, None)?.state)
}
