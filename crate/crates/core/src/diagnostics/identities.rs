use log::warn;

use crate::dynamics::{deformation_rhs, momentum_rhs_with_multiplier, Mode, MomentumRhs, StepConfig};
use crate::error::Result;
use crate::grid::{Field, Grid, ScalarField, TensorField, VectorField};
use crate::state::{constraint_div_rho_ft, State};

/// Constraint level above which the identities below are not expected to hold.
pub const CONSTRAINT_WARN_LEVEL: f64 = 1e-6;

fn warn_if_incompatible(s: &State, what: &str) -> f64 {
    let c = constraint_div_rho_ft(s).l2_norm();
    if c > CONSTRAINT_WARN_LEVEL {
        warn!("{what}: ‖div(ρFᵀ)‖₂ = {c:.3e}, the identity does not apply to this state");
    }
    c
}

/// `∫ρ tr E`.
pub fn tr_integral(s: &State) -> f64 {
    let tr = s.e.trace();
    s.grid()
        .integrate(&tr.values().iter().zip(s.rho.values()).map(|(t, r)| t * r).collect::<Vec<_>>())
}

/// `‖∂_t(ρ tr E) + div(ρu tr E)‖₂` with the time derivatives from the
/// equations. Informational: only its integral vanishes.
pub fn tr_transport_defect(s: &State, cfg: &StepConfig) -> f64 {
    let grid = s.grid();
    let dim = grid.dim();
    let n = grid.len();
    let rho = s.rho.values();
    let tr = s.e.trace();
    let tr = tr.values();
    let drho = crate::dynamics::continuity_rhs(s, cfg);
    let de = deformation_rhs(s, cfg).trace();
    let flux: Vec<Vec<f64>> = (0..dim)
        .map(|l| (0..n).map(|p| rho[p] * s.u.component(l)[p] * tr[p]).collect())
        .collect();
    let div = crate::dynamics::divergence_of(grid, &flux, false);
    let defect: Vec<f64> = (0..n)
        .map(|p| drho.values()[p] * tr[p] + rho[p] * de.values()[p] + div[p])
        .collect();
    ScalarField::from_values(grid, defect).map(|f| f.l2_norm()).unwrap_or(f64::NAN)
}

/// `∫|ρ det F - 1|`. Informational.
pub fn rho_det_f_defect(s: &State) -> f64 {
    let grid = s.grid();
    let f = s.deformation_gradient();
    let g = |i: usize, j: usize, p: usize| f.component(i, j)[p];
    let vals: Vec<f64> = (0..grid.len())
        .map(|p| {
            let det = if grid.dim() == 2 {
                g(0, 0, p) * g(1, 1, p) - g(0, 1, p) * g(1, 0, p)
            } else {
                g(0, 0, p) * (g(1, 1, p) * g(2, 2, p) - g(1, 2, p) * g(2, 1, p))
                    - g(0, 1, p) * (g(1, 0, p) * g(2, 2, p) - g(1, 2, p) * g(2, 0, p))
                    + g(0, 2, p) * (g(1, 0, p) * g(2, 1, p) - g(1, 1, p) * g(2, 0, p))
            };
            (s.rho.values()[p] * det - 1.0).abs()
        })
        .collect();
    grid.integrate(&vals)
}

/// `Z₁ = (-Δ)⁻¹ div E` and `Z = u - Z₁/μ`.
pub fn compute_z(s: &State, mu: f64) -> (VectorField, VectorField) {
    let z1 = s.e.divergence().inverse_laplacian_meanzero();
    let z = s.u.lincomb(1.0, &z1, -1.0 / mu);
    (z1, z)
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn truncate(grid: &Grid, v: Vec<f64>, dealias: bool) -> Vec<f64> {
    if dealias {
        grid.dealias_values(&v)
    } else {
        v
    }
}

/// `(u·∇)u`, row `i` is `u_j ∂_j u_i`.
fn advection(s: &State, dealias: bool) -> Vec<Vec<f64>> {
    let grid = s.grid();
    let dim = grid.dim();
    let grad = s.u.gradient();
    (0..dim)
        .map(|i| {
            let mut a = vec![0.0; grid.len()];
            for j in 0..dim {
                for (x, (u, d)) in a.iter_mut().zip(s.u.component(j).iter().zip(grad.component(i, j))) {
                    *x += u * d;
                }
            }
            truncate(grid, a, dealias)
        })
        .collect()
}

/// `ρ E Eᵀ`.
fn rho_e_et(s: &State, dealias: bool) -> TensorField {
    let grid = s.grid();
    let dim = grid.dim();
    let rho = s.rho.values();
    let mut comps = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut t = vec![0.0; grid.len()];
            for k in 0..dim {
                let (a, b) = (s.e.component(i, k), s.e.component(j, k));
                for p in 0..grid.len() {
                    t[p] += rho[p] * a[p] * b[p];
                }
            }
            comps.push(truncate(grid, t, dealias));
        }
    }
    Field::from_components_unchecked(grid, comps)
}

fn total_pressure(s: &State, cfg: &StepConfig, q: Option<&ScalarField>) -> ScalarField {
    let grid = s.grid();
    let mut p: Vec<f64> = s.rho.values().iter().map(|&r| cfg.law.pressure(r)).collect();
    p = truncate(grid, p, cfg.dealias);
    if let Some(q) = q {
        for (a, b) in p.iter_mut().zip(q.values()) {
            *a += b;
        }
    }
    Field::from_components_unchecked(grid, vec![p])
}

/// Defect of the forced heat equation for `Z`:
/// `∂_tZ - μΔZ - (𝓕₁ - 𝓕₂)` with
///
/// ```text
/// 𝓕₁ = -ρ(u·∇)u - ∇(P + q) + div((ρ-1)E) + div(ρEEᵀ) + (1-ρ)∂_tu
/// 𝓕₂ = -(u - ū)/μ + (1/μ)(-Δ)⁻¹ div(∇u E - (u·∇)E)
/// ```
///
/// `∂_tu` (and `q`) come from the momentum equation, `∂_tZ₁` from the
/// deformation equation. The defect equals `div(ρFᵀ)` up to discretization
/// error, so it is small exactly on constraint-compatible states.
pub fn z_parabolic_residual_field(s: &State, cfg: &StepConfig) -> Result<VectorField> {
    let mom = momentum_rhs_with_multiplier(s, cfg)?;
    Ok(z_residual_with(s, cfg, &mom))
}

pub(crate) fn z_residual_with(s: &State, cfg: &StepConfig, mom: &MomentumRhs) -> VectorField {
    warn_if_incompatible(s, "Z identity");
    let grid = s.grid();
    let dim = grid.dim();
    let n = grid.len();
    let mu = cfg.mu;
    let rho = s.rho.values();
    let du = &mom.du_dt;

    let (_, z) = compute_z(s, mu);
    let dz1 = deformation_rhs(s, cfg).divergence().inverse_laplacian_meanzero();
    let dz = du.lincomb(1.0, &dz1, -1.0 / mu);
    let lap_z = z.laplacian();

    // 𝓕₁
    let adv = advection(s, cfg.dealias);
    let grad_p = total_pressure(s, cfg, mom.multiplier.as_ref()).gradient();
    let rho_m1_e: TensorField = Field::from_components_unchecked(
        grid,
        s.e.components()
            .iter()
            .map(|c| truncate(grid, (0..n).map(|p| (rho[p] - 1.0) * c[p]).collect(), cfg.dealias))
            .collect(),
    );
    let div_rho_m1_e = rho_m1_e.divergence();
    let div_eet = rho_e_et(s, cfg.dealias).divergence();

    // 𝓕₂ without the 1/μ factor on the convolution part
    let grad_u = s.u.gradient();
    let grad_e = s.e.component_gradients();
    let mut stretch = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut t = vec![0.0; n];
            for l in 0..dim {
                let (du_il, e_lj) = (grad_u.component(i, l), s.e.component(l, j));
                let (u_l, de) = (s.u.component(l), &grad_e[i * dim + j][l]);
                for p in 0..n {
                    t[p] += du_il[p] * e_lj[p] - u_l[p] * de[p];
                }
            }
            stretch.push(truncate(grid, t, cfg.dealias));
        }
    }
    let stretch: TensorField = Field::from_components_unchecked(grid, stretch);
    let conv = stretch.divergence().inverse_laplacian_meanzero();
    let means = s.u.means();

    let mut comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let ui = s.u.component(i);
        let f1: Vec<f64> = (0..n)
            .map(|p| {
                -rho[p] * adv[i][p] - grad_p.component(i)[p] + div_rho_m1_e.component(i)[p] + div_eet.component(i)[p]
                    + (1.0 - rho[p]) * du.component(i)[p]
            })
            .collect();
        let f2: Vec<f64> = (0..n)
            .map(|p| (-(ui[p] - means[i]) + conv.component(i)[p]) / mu)
            .collect();
        comps.push(
            (0..n)
                .map(|p| dz.component(i)[p] - mu * lap_z.component(i)[p] - (f1[p] - f2[p]))
                .collect(),
        );
    }
    Field::from_components_unchecked(grid, comps)
}

/// `‖∂_tZ - μΔZ - (𝓕₁ - 𝓕₂)‖₂`; see [`z_parabolic_residual_field`].
pub fn z_parabolic_residual(s: &State, cfg: &StepConfig) -> Result<f64> {
    Ok(z_parabolic_residual_field(s, cfg)?.l2_norm())
}

/// Defect of the pressure Poisson relation
///
/// ```text
/// Δ(P + q) + Δρ - div div(ρEEᵀ) + div(ρ(u·∇)u) + div((ρ-1)∂_tu)
/// ```
///
/// for a given `∂_tu` and multiplier `q`. Equals `2 div(div(ρFᵀ))` when
/// `div u = 0` and `div ∂_tu = 0`.
pub fn pressure_poisson_residual_field(
    s: &State,
    du_dt: &VectorField,
    q: Option<&ScalarField>,
    cfg: &StepConfig,
) -> ScalarField {
    warn_if_incompatible(s, "pressure Poisson identity");
    let grid = s.grid();
    let dim = grid.dim();
    let n = grid.len();
    let rho = s.rho.values();
    let lap_p = total_pressure(s, cfg, q).laplacian();
    let lap_rho = s.rho.laplacian();
    let divdiv = rho_e_et(s, cfg.dealias).divergence().divergence();
    let adv = advection(s, cfg.dealias);
    let inertia: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let a = truncate(grid, product(rho, &adv[i]), cfg.dealias);
            let b = truncate(
                grid,
                (0..n).map(|p| (rho[p] - 1.0) * du_dt.component(i)[p]).collect(),
                cfg.dealias,
            );
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        })
        .collect();
    let div_inertia = crate::dynamics::divergence_of(grid, &inertia, false);
    let values = (0..n)
        .map(|p| lap_p.values()[p] + lap_rho.values()[p] - divdiv.values()[p] + div_inertia[p])
        .collect();
    Field::from_components_unchecked(grid, vec![values])
}

/// L² norm of [`pressure_poisson_residual_field`] with `∂_tu` and `q` from
/// the momentum equation. Defined for incompressible mode only; `NaN`
/// otherwise.
pub fn pressure_poisson_residual(s: &State, cfg: &StepConfig) -> Result<f64> {
    if cfg.mode != Mode::Incompressible {
        return Ok(f64::NAN);
    }
    let mom = momentum_rhs_with_multiplier(s, cfg)?;
    Ok(pressure_poisson_residual_field(s, &mom.du_dt, mom.multiplier.as_ref(), cfg).l2_norm())
}
