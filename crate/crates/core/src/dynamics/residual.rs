use super::{divergence_of, StepConfig};
use crate::grid::{Field, Grid, ScalarField, TensorField, VectorField};
use crate::state::{PressureLaw, State};

/// Candidate time derivatives `(∂ρ, ∂u, ∂E)` at one instant.
#[derive(Clone, Debug)]
pub struct TimeDerivatives {
    pub rho: ScalarField,
    pub u: VectorField,
    pub e: TensorField,
}

impl TimeDerivatives {
    pub fn zeros(grid: &Grid) -> Self {
        TimeDerivatives {
            rho: ScalarField::zeros(grid),
            u: VectorField::zeros(grid),
            e: TensorField::zeros(grid),
        }
    }
}

/// Defects of the three evolution equations in conservative form.
#[derive(Clone, Debug)]
pub struct SystemResidual {
    /// `∂ρ + div(ρu)`
    pub continuity: ScalarField,
    /// `∂(ρu) + div(ρu⊗u) - μΔu + w ∇P(ρ) + ∇q - w div(ρFFᵀ)`
    pub momentum: VectorField,
    /// `∂E + u·∇E - ∇u E - ∇u`
    pub deformation: TensorField,
}

/// Knobs of [`residual_with`].
#[derive(Clone, Debug)]
pub struct ResidualOptions<'a> {
    pub mu: f64,
    pub law: PressureLaw,
    pub dealias: bool,
    /// Weight `w` on the pressure and elastic stress terms. `1` for the
    /// model itself, `ν⁻²` for the rescaled system.
    pub stress_weight: f64,
    /// Extra pressure `q` (e.g. the incompressibility multiplier).
    pub extra_pressure: Option<&'a ScalarField>,
}

impl<'a> ResidualOptions<'a> {
    pub fn from_config(cfg: &StepConfig) -> Self {
        ResidualOptions {
            mu: cfg.mu,
            law: cfg.law,
            dealias: cfg.dealias,
            stress_weight: 1.0,
            extra_pressure: None,
        }
    }
}

/// Residual with the model's own parameters and no extra pressure.
pub fn residual(s: &State, derivs: &TimeDerivatives, cfg: &StepConfig) -> SystemResidual {
    residual_with(s, derivs, &ResidualOptions::from_config(cfg))
}

pub fn residual_with(s: &State, derivs: &TimeDerivatives, opts: &ResidualOptions<'_>) -> SystemResidual {
    let grid = s.grid();
    let dim = grid.dim();
    let n = grid.len();
    let d = |v: Vec<f64>| if opts.dealias { grid.dealias_values(&v) } else { v };
    let rho = s.rho.values();
    let f = s.deformation_gradient();

    // continuity
    let flux: Vec<Vec<f64>> = (0..dim)
        .map(|l| rho.iter().zip(s.u.component(l)).map(|(r, v)| r * v).collect())
        .collect();
    let div_flux = divergence_of(grid, &flux, opts.dealias);
    let continuity: Vec<f64> = derivs.rho.values().iter().zip(&div_flux).map(|(a, b)| a + b).collect();

    // momentum
    let pressure: Vec<f64> = rho.iter().map(|&r| opts.law.pressure(r)).collect();
    let pressure = d(pressure);
    let grad_p = grid.gradient_values(&pressure);
    let grad_q = opts.extra_pressure.map(|q| grid.gradient_values(q.values()));
    let lap_u = s.u.laplacian();
    let mut momentum = Vec::with_capacity(dim);
    for i in 0..dim {
        let ui = s.u.component(i);
        let time: Vec<f64> = (0..n)
            .map(|p| rho[p] * derivs.u.component(i)[p] + ui[p] * derivs.rho.values()[p])
            .collect();
        let time = d(time);
        let convective: Vec<Vec<f64>> = (0..dim)
            .map(|j| {
                let uj = s.u.component(j);
                (0..n).map(|p| rho[p] * ui[p] * uj[p]).collect()
            })
            .collect();
        let convective = divergence_of(grid, &convective, opts.dealias);
        let stress: Vec<Vec<f64>> = (0..dim)
            .map(|j| {
                let mut row = vec![0.0; n];
                for k in 0..dim {
                    let (fik, fjk) = (f.component(i, k), f.component(j, k));
                    for p in 0..n {
                        row[p] += rho[p] * fik[p] * fjk[p];
                    }
                }
                row
            })
            .collect();
        let elastic = divergence_of(grid, &stress, opts.dealias);
        let lap = lap_u.component(i);
        let w = opts.stress_weight;
        let mut m: Vec<f64> = (0..n)
            .map(|p| time[p] + convective[p] - opts.mu * lap[p] + w * (grad_p[i][p] - elastic[p]))
            .collect();
        if let Some(gq) = &grad_q {
            for (a, b) in m.iter_mut().zip(&gq[i]) {
                *a += b;
            }
        }
        momentum.push(m);
    }

    // deformation
    let grad_u = s.u.gradient();
    let grad_e = s.e.component_gradients();
    let mut deformation = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut nonlinear = vec![0.0; n];
            for l in 0..dim {
                let (ul, de) = (s.u.component(l), &grad_e[i * dim + j][l]);
                let (du, elj) = (grad_u.component(i, l), s.e.component(l, j));
                for p in 0..n {
                    nonlinear[p] += ul[p] * de[p] - du[p] * elj[p];
                }
            }
            let nonlinear = d(nonlinear);
            let (dt, du) = (derivs.e.component(i, j), grad_u.component(i, j));
            deformation.push((0..n).map(|p| dt[p] + nonlinear[p] - du[p]).collect());
        }
    }

    SystemResidual {
        continuity: Field::from_components_unchecked(grid, vec![continuity]),
        momentum: Field::from_components_unchecked(grid, momentum),
        deformation: Field::from_components_unchecked(grid, deformation),
    }
}
