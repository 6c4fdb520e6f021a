//! Manufactured solutions: analytic states, the forcing that makes them
//! exact solutions, and convergence studies against them.

use std::f64::consts::PI;

use crate::dynamics::{
    advance, residual_with, Forcing, Mode, ResidualOptions, Sources, StepConfig, TimeDerivatives,
};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Rank};
use crate::state::State;

/// One term `A e^{-λt} sin(k·x' + φ + ωt)` with `x' = 2πx/L`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedMode {
    pub wavevector: [i64; 3],
    /// One entry per field component (1, d or d² entries).
    pub amplitude: Vec<f64>,
    pub phase: f64,
    /// `ω`
    pub frequency: f64,
    /// `λ`
    pub decay: f64,
}

impl ManufacturedMode {
    pub fn new(wavevector: [i64; 3], amplitude: Vec<f64>, phase: f64, frequency: f64) -> Self {
        ManufacturedMode {
            wavevector,
            amplitude,
            phase,
            frequency,
            decay: 0.0,
        }
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }
}

/// Truncated Fourier descriptions of `ρ - 1`, `u` and `E`, all scaled by
/// `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedSpec {
    pub dim: usize,
    pub epsilon: f64,
    pub rho: Vec<ManufacturedMode>,
    pub u: Vec<ManufacturedMode>,
    pub e: Vec<ManufacturedMode>,
    /// Project every velocity amplitude onto the plane normal to its
    /// wavevector, making `u` divergence-free.
    pub solenoidal: bool,
}

/// Lowest density the spec may reach.
pub const DENSITY_FLOOR: f64 = 0.5;

impl ManufacturedSpec {
    /// No modes: the equilibrium.
    pub fn empty(dim: usize) -> Self {
        ManufacturedSpec {
            dim,
            epsilon: 1.0,
            rho: Vec::new(),
            u: Vec::new(),
            e: Vec::new(),
            solenoidal: true,
        }
    }

    /// 2-D, three modes per field, `|k| ≤ 2`, `ε = 1e-2`, `ω = 1`.
    pub fn standard(mode: Mode) -> Self {
        let m = |k: [i64; 2], a: Vec<f64>, phase: f64| ManufacturedMode::new([k[0], k[1], 0], a, phase, 1.0);
        ManufacturedSpec {
            dim: 2,
            epsilon: 1e-2,
            rho: vec![
                m([1, 0], vec![1.0], 0.3),
                m([0, 1], vec![0.7], 1.1),
                m([1, 1], vec![0.5], -0.4),
            ],
            u: vec![
                m([1, 1], vec![1.0, -0.4], 0.2),
                m([0, 2], vec![0.8, 0.3], 0.9),
                m([1, -1], vec![0.5, 0.6], -1.3),
            ],
            e: vec![
                m([1, 0], vec![0.6, -0.2, 0.4, 0.3], 0.5),
                m([0, 1], vec![-0.3, 0.5, 0.2, 0.7], -0.8),
                m([1, -1], vec![0.4, 0.1, -0.5, 0.2], 1.7),
            ],
            solenoidal: mode == Mode::Incompressible,
        }
    }

    /// 2-D Taylor–Green vortex `(sin x cos y, -cos x sin y) e^{-2μt}` on
    /// `ρ ≡ 1`, `E ≡ 0`.
    pub fn taylor_green(mu: f64) -> Self {
        let tg = |k: [i64; 3], a: Vec<f64>| ManufacturedMode::new(k, a, 0.0, 0.0).with_decay(2.0 * mu);
        ManufacturedSpec {
            u: vec![tg([1, 1, 0], vec![0.5, -0.5]), tg([1, -1, 0], vec![0.5, 0.5])],
            ..ManufacturedSpec::empty(2)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim;
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        for (name, modes, count) in [("rho", &self.rho, 1), ("u", &self.u, dim), ("E", &self.e, dim * dim)] {
            for m in modes {
                if m.amplitude.len() != count {
                    return Err(Error::InvalidParameter(format!(
                        "{name} mode {:?} needs {count} amplitudes, got {}",
                        m.wavevector,
                        m.amplitude.len()
                    )));
                }
                if m.wavevector[dim..].iter().any(|&k| k != 0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} mode {:?} exceeds dimension {dim}",
                        m.wavevector
                    )));
                }
                let finite = m.amplitude.iter().chain([&m.phase, &m.frequency, &m.decay]).all(|v| v.is_finite());
                if !finite || m.decay < 0.0 {
                    return Err(Error::InvalidParameter(format!("{name} mode {:?} is not finite", m.wavevector)));
                }
            }
        }
        let swing: f64 = self.rho.iter().map(|m| self.epsilon.abs() * m.amplitude[0].abs()).sum();
        if swing > 1.0 - DENSITY_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "density modes can reach {:.3}, below the floor {DENSITY_FLOOR}",
                1.0 - swing
            )));
        }
        Ok(())
    }

    /// Largest per-axis mode number over all fields.
    pub fn max_mode(&self) -> i64 {
        self.rho
            .iter()
            .chain(&self.u)
            .chain(&self.e)
            .flat_map(|m| m.wavevector)
            .map(i64::abs)
            .max()
            .unwrap_or(0)
    }
}

fn projected_amplitude(m: &ManufacturedMode, dim: usize) -> Vec<f64> {
    let k = &m.wavevector[..dim];
    let k2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
    if k2 == 0.0 {
        return m.amplitude.clone();
    }
    let dot: f64 = k.iter().zip(&m.amplitude).map(|(&a, b)| a as f64 * b).sum();
    m.amplitude
        .iter()
        .zip(k)
        .map(|(a, &kk)| a - dot * kk as f64 / k2)
        .collect()
}

/// Values and time derivatives of a mode list, component-major.
fn evaluate_modes(
    grid: &Grid,
    modes: &[ManufacturedMode],
    amplitudes: &[Vec<f64>],
    count: usize,
    epsilon: f64,
    t: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let scale = 2.0 * PI / grid.length();
    let mut values = vec![vec![0.0; grid.len()]; count];
    let mut rates = vec![vec![0.0; grid.len()]; count];
    for (m, amp) in modes.iter().zip(amplitudes) {
        let envelope = epsilon * (-m.decay * t).exp();
        for p in 0..grid.len() {
            let x = grid.coords(p);
            let kx: f64 = (0..grid.dim()).map(|a| m.wavevector[a] as f64 * scale * x[a]).sum();
            let theta = kx + m.phase + m.frequency * t;
            let (s, c) = theta.sin_cos();
            let v = envelope * s;
            let r = envelope * (m.frequency * c - m.decay * s);
            for (comp, a) in amp.iter().enumerate() {
                values[comp][p] += a * v;
                rates[comp][p] += a * r;
            }
        }
    }
    (values, rates)
}

fn field<R: Rank>(grid: &Grid, comps: Vec<Vec<f64>>) -> Field<R> {
    Field::from_components_unchecked(grid, comps)
}

/// The manufactured state at time `t` with its analytic time derivatives.
pub fn manufactured_fields(spec: &ManufacturedSpec, grid: &Grid, t: f64) -> Result<(State, TimeDerivatives)> {
    spec.validate()?;
    if grid.dim() != spec.dim {
        return Err(Error::InvalidParameter(format!(
            "spec is {}-D but the grid is {}-D",
            spec.dim,
            grid.dim()
        )));
    }
    let dim = grid.dim();
    let raw = |modes: &[ManufacturedMode]| modes.iter().map(|m| m.amplitude.clone()).collect::<Vec<_>>();
    let u_amp: Vec<Vec<f64>> = if spec.solenoidal {
        spec.u.iter().map(|m| projected_amplitude(m, dim)).collect()
    } else {
        raw(&spec.u)
    };
    let (mut rho, drho) = evaluate_modes(grid, &spec.rho, &raw(&spec.rho), 1, spec.epsilon, t);
    rho[0].iter_mut().for_each(|v| *v += 1.0);
    let (u, du) = evaluate_modes(grid, &spec.u, &u_amp, dim, spec.epsilon, t);
    let (e, de) = evaluate_modes(grid, &spec.e, &raw(&spec.e), dim * dim, spec.epsilon, t);
    let state = State::new(t, field(grid, rho), field(grid, u), field(grid, e))?;
    let derivs = TimeDerivatives {
        rho: field(grid, drho),
        u: field(grid, du),
        e: field(grid, de),
    };
    Ok((state, derivs))
}

/// Source terms under which the manufactured state solves the system:
/// the residual of the state with its exact time derivatives.
pub fn manufactured_forcing(spec: &ManufacturedSpec, grid: &Grid, t: f64, cfg: &StepConfig) -> Result<Sources> {
    let (s, derivs) = manufactured_fields(spec, grid, t)?;
    let r = residual_with(&s, &derivs, &ResidualOptions::from_config(cfg));
    Ok(Sources {
        rho: r.continuity,
        momentum: r.momentum,
        e: r.deformation,
    })
}

/// [`Forcing`] adapter for a spec on a fixed grid.
#[derive(Clone, Debug)]
pub struct ManufacturedForcing {
    spec: ManufacturedSpec,
    grid: Grid,
    cfg: StepConfig,
}

impl ManufacturedForcing {
    pub fn new(spec: ManufacturedSpec, grid: &Grid, cfg: &StepConfig) -> Result<Self> {
        spec.validate()?;
        Ok(ManufacturedForcing {
            spec,
            grid: grid.clone(),
            cfg: cfg.clone(),
        })
    }
}

impl Forcing for ManufacturedForcing {
    fn sources(&self, t: f64) -> Result<Sources> {
        manufactured_forcing(&self.spec, &self.grid, t, &self.cfg)
    }
}

/// Resolutions and horizons of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyPlan {
    pub length: f64,
    /// Time steps of the temporal study, run on `time_n` points per axis.
    pub dts: Vec<f64>,
    pub time_n: usize,
    pub horizon: f64,
    /// Grid sizes of the spatial study, run with `space_dt` for
    /// `space_steps` steps.
    pub ns: Vec<usize>,
    pub space_dt: f64,
    pub space_steps: usize,
}

impl Default for StudyPlan {
    fn default() -> Self {
        StudyPlan {
            length: 2.0 * PI,
            dts: vec![0.1, 0.05, 0.025, 0.0125],
            time_n: 32,
            horizon: 1.0,
            ns: vec![16, 32, 64],
            space_dt: 1e-4,
            space_steps: 10,
        }
    }
}

/// L² errors against the manufactured solution at the final time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub rho: f64,
    pub u: f64,
    pub e: f64,
    /// `(rho² + u² + e²)^½`
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub temporal: Vec<ErrorRow>,
    /// Least-squares slope of `log total` against `log dt`.
    pub temporal_order: f64,
    pub spatial: Vec<ErrorRow>,
    /// Largest total error of the spatial study.
    pub spatial_floor: f64,
}

impl ConvergenceReport {
    /// Whether errors never grow as `dt` shrinks or `n` grows, allowing
    /// `slack` for rounding noise.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let ok = |rows: &[ErrorRow]| rows.windows(2).all(|w| w[1].total <= w[0].total + slack);
        ok(&self.temporal) && ok(&self.spatial)
    }

    /// Rows as CSV with a header; `study` is `temporal` or `spatial`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("study,n,dt,steps,rho_l2,u_l2,E_l2,total_l2\n");
        let rows = self
            .temporal
            .iter()
            .map(|r| ("temporal", r))
            .chain(self.spatial.iter().map(|r| ("spatial", r)));
        for (study, r) in rows {
            out.push_str(&format!(
                "{study},{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.n, r.dt, r.steps, r.rho, r.u, r.e, r.total
            ));
        }
        out
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_order(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Runs the forced system from the manufactured state at `t = 0` for
/// `steps` steps and measures the error at the end.
pub fn manufactured_run(
    spec: &ManufacturedSpec,
    grid: &Grid,
    cfg: &StepConfig,
    steps: usize,
) -> Result<ErrorRow> {
    let forcing = ManufacturedForcing::new(spec.clone(), grid, cfg)?;
    let (mut s, _) = manufactured_fields(spec, grid, 0.0)?;
    for k in 0..steps {
        s = advance(&s, cfg, Some(&forcing))
            .map_err(|e| e.context(format!("n = {}, dt = {}, step {k}", grid.n(), cfg.dt)))?
            .state;
    }
    // exact time of the final state, not the accumulated sum
    let t_end = steps as f64 * cfg.dt;
    let (exact, _) = manufactured_fields(spec, grid, t_end)?;
    let rho = (&s.rho - &exact.rho).l2_norm();
    let u = (&s.u - &exact.u).l2_norm();
    let e = (&s.e - &exact.e).l2_norm();
    Ok(ErrorRow {
        n: grid.n(),
        dt: cfg.dt,
        steps,
        rho,
        u,
        e,
        total: (rho * rho + u * u + e * e).sqrt(),
    })
}

/// Temporal and spatial convergence of the forced system. `cfg` supplies
/// everything but the step size.
pub fn convergence_study(spec: &ManufacturedSpec, cfg: &StepConfig, plan: &StudyPlan) -> Result<ConvergenceReport> {
    if plan.dts.len() < 3 {
        return Err(Error::InvalidParameter("a temporal study needs at least 3 step sizes".into()));
    }
    if plan.ns.len() < 2 {
        return Err(Error::InvalidParameter("a spatial study needs at least 2 grid sizes".into()));
    }
    let grid = Grid::new(spec.dim, plan.time_n, plan.length)?;
    let mut temporal = Vec::with_capacity(plan.dts.len());
    for &dt in &plan.dts {
        let steps = (plan.horizon / dt).round().max(1.0) as usize;
        let run_cfg = cfg.clone().with_dt(plan.horizon / steps as f64);
        temporal.push(manufactured_run(spec, &grid, &run_cfg, steps)?);
    }
    let mut spatial = Vec::with_capacity(plan.ns.len());
    for &n in &plan.ns {
        let grid = Grid::new(spec.dim, n, plan.length)?;
        let run_cfg = cfg.clone().with_dt(plan.space_dt);
        spatial.push(manufactured_run(spec, &grid, &run_cfg, plan.space_steps)?);
    }
    let dts: Vec<f64> = temporal.iter().map(|r| r.dt).collect();
    let errs: Vec<f64> = temporal.iter().map(|r| r.total).collect();
    Ok(ConvergenceReport {
        temporal_order: fit_order(&dts, &errs),
        spatial_floor: spatial.iter().map(|r| r.total).fold(0.0, f64::max),
        temporal,
        spatial,
    })
}
