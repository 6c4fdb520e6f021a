use rustfft::num_complex::Complex64;

use super::pressure::solve_variable_coefficient;
use super::{Mode, Sources, StepConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField, TensorField, VectorField};
use crate::state::State;

/// First derivatives of every unknown, computed once per evaluation.
pub(crate) struct Kinematics {
    /// `[axis]`
    pub grad_rho: Vec<Vec<f64>>,
    /// `[i][j] = ∂_j u_i`
    pub grad_u: Vec<Vec<Vec<f64>>>,
    /// `[i * dim + j][l] = ∂_l E_ij`
    pub grad_e: Vec<Vec<Vec<f64>>>,
    /// Spectra of the velocity components.
    pub u_hat: Vec<Vec<Complex64>>,
}

impl Kinematics {
    pub fn new(s: &State) -> Self {
        let grid = s.grid();
        let dim = grid.dim();
        let grad_rho = grid.gradient_values(s.rho.values());
        let mut grad_u = Vec::with_capacity(dim);
        let mut u_hat = Vec::with_capacity(dim);
        for c in s.u.components() {
            let spec = grid.forward(c);
            grad_u.push(
                (0..dim)
                    .map(|axis| grid.inverse(grid.spectral_derivative(&spec, axis)))
                    .collect(),
            );
            u_hat.push(spec);
        }
        let grad_e = s.e.component_gradients();
        Kinematics {
            grad_rho,
            grad_u,
            grad_e,
            u_hat,
        }
    }
}

fn maybe_dealias(grid: &Grid, values: Vec<f64>, dealias: bool) -> Vec<f64> {
    if dealias {
        grid.dealias_values(&values)
    } else {
        values
    }
}

/// `Σ_l ∂_l comps[l]`, optionally truncated by the 2/3 rule.
pub(crate) fn divergence_of(grid: &Grid, comps: &[Vec<f64>], dealias: bool) -> Vec<f64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, c) in comps.iter().enumerate() {
        let d = grid.spectral_derivative(&grid.forward(c), axis);
        for (a, v) in acc.iter_mut().zip(d) {
            *a += v;
        }
    }
    if dealias {
        grid.dealias_spectrum(&mut acc);
    }
    grid.inverse(acc)
}

/// Gradient, optionally truncated by the 2/3 rule.
fn gradient_of(grid: &Grid, values: &[f64], dealias: bool) -> Vec<Vec<f64>> {
    let mut spec = grid.forward(values);
    if dealias {
        grid.dealias_spectrum(&mut spec);
    }
    (0..grid.dim())
        .map(|axis| grid.inverse(grid.spectral_derivative(&spec, axis)))
        .collect()
}

fn continuity_with(s: &State, kin: &Kinematics, mode: Mode, dealias: bool) -> Vec<f64> {
    let grid = s.grid();
    let dim = grid.dim();
    let rho = s.rho.values();
    match mode {
        Mode::Incompressible => {
            let mut adv = vec![0.0; grid.len()];
            for l in 0..dim {
                let (ul, dl) = (s.u.component(l), &kin.grad_rho[l]);
                for p in 0..grid.len() {
                    adv[p] -= ul[p] * dl[p];
                }
            }
            maybe_dealias(grid, adv, dealias)
        }
        Mode::Compressible => {
            let flux: Vec<Vec<f64>> = (0..dim)
                .map(|l| rho.iter().zip(s.u.component(l)).map(|(r, v)| r * v).collect())
                .collect();
            divergence_of(grid, &flux, dealias).into_iter().map(|v| -v).collect()
        }
    }
}

fn deformation_with(s: &State, kin: &Kinematics, dealias: bool) -> Vec<Vec<f64>> {
    let grid = s.grid();
    let dim = grid.dim();
    let n = grid.len();
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut t = vec![0.0; n];
            let de = &kin.grad_e[i * dim + j];
            for l in 0..dim {
                let ul = s.u.component(l);
                for p in 0..n {
                    t[p] -= ul[p] * de[l][p];
                }
            }
            for k in 0..dim {
                let (du, ekj) = (&kin.grad_u[i][k], s.e.component(k, j));
                for p in 0..n {
                    t[p] += du[p] * ekj[p];
                }
            }
            let mut t = maybe_dealias(grid, t, dealias);
            for (a, d) in t.iter_mut().zip(&kin.grad_u[i][j]) {
                *a += d;
            }
            out.push(t);
        }
    }
    out
}

/// Explicit momentum tendency before the multiplier: everything except
/// `μΔu` and `-∇q/ρ`.
fn momentum_explicit(
    s: &State,
    kin: &Kinematics,
    cfg: &StepConfig,
    sources: Option<&Sources>,
) -> Vec<Vec<f64>> {
    let grid = s.grid();
    let dim = grid.dim();
    let n = grid.len();
    let dealias = cfg.dealias;
    let rho = s.rho.values();
    let f = s.deformation_gradient();

    let pressure: Vec<f64> = rho.iter().map(|&r| cfg.law.pressure(r)).collect();
    let grad_p = gradient_of(grid, &pressure, dealias);

    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut adv = vec![0.0; n];
        for j in 0..dim {
            let (uj, du) = (s.u.component(j), &kin.grad_u[i][j]);
            for p in 0..n {
                adv[p] += uj[p] * du[p];
            }
        }
        let adv = maybe_dealias(grid, adv, dealias);

        let lap: Vec<f64> = {
            let spec: Vec<Complex64> = kin.u_hat[i]
                .iter()
                .enumerate()
                .map(|(flat, c)| c * -grid.k_sq(flat))
                .collect();
            grid.inverse(spec)
        };
        let visc: Vec<f64> = (0..n).map(|p| cfg.mu * (1.0 / rho[p] - 1.0) * lap[p]).collect();
        let visc = maybe_dealias(grid, visc, dealias);

        // row i of ρFFᵀ
        let stress: Vec<Vec<f64>> = (0..dim)
            .map(|j| {
                let mut row = vec![0.0; n];
                for k in 0..dim {
                    let (fik, fjk) = (f.component(i, k), f.component(j, k));
                    for p in 0..n {
                        row[p] += rho[p] * fik[p] * fjk[p];
                    }
                }
                maybe_dealias(grid, row, dealias)
            })
            .collect();
        let elastic = divergence_of(grid, &stress, dealias);

        let mut force: Vec<f64> = (0..n).map(|p| elastic[p] - grad_p[i][p]).collect();
        if let Some(src) = sources {
            let (sm, sr, ui) = (src.momentum.component(i), src.rho.values(), s.u.component(i));
            for p in 0..n {
                force[p] += sm[p] - ui[p] * sr[p];
            }
        }
        let accel: Vec<f64> = force.iter().zip(rho).map(|(v, r)| v / r).collect();
        let accel = maybe_dealias(grid, accel, dealias);

        out.push((0..n).map(|p| visc[p] + accel[p] - adv[p]).collect());
    }
    out
}

/// Full explicit tendencies of one evaluation.
pub(crate) struct Tendencies {
    pub rho: Vec<f64>,
    /// Momentum tendency without the `μΔu` part, multiplier included.
    pub u: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    pub multiplier: Option<Vec<f64>>,
    pub pressure_iterations: usize,
}

fn check_density(s: &State) -> Result<()> {
    let min = s.min_density();
    if !(min > 0.0) {
        return Err(Error::DensityPositivity { min });
    }
    Ok(())
}

pub(crate) fn tendencies(s: &State, cfg: &StepConfig, sources: Option<&Sources>) -> Result<Tendencies> {
    check_density(s)?;
    let grid = s.grid();
    let kin = Kinematics::new(s);
    let mut rho = continuity_with(s, &kin, cfg.mode, cfg.dealias);
    let mut e = if cfg.evolve_e {
        deformation_with(s, &kin, cfg.dealias)
    } else {
        vec![vec![0.0; grid.len()]; grid.dim() * grid.dim()]
    };
    if let Some(src) = sources.filter(|_| cfg.evolve_e) {
        for (a, b) in rho.iter_mut().zip(src.rho.values()) {
            *a += b;
        }
        for (dst, srcc) in e.iter_mut().zip(src.e.components()) {
            for (a, b) in dst.iter_mut().zip(srcc) {
                *a += b;
            }
        }
    }
    let mut u = momentum_explicit(s, &kin, cfg, sources);
    let mut multiplier = None;
    let mut pressure_iterations = 0;
    if cfg.mode == Mode::Incompressible {
        let beta: Vec<f64> = s.rho.values().iter().map(|r| 1.0 / r).collect();
        let div_w = divergence_of(grid, &u, false);
        let sol = solve_variable_coefficient(grid, &beta, &div_w, cfg.pressure_tol, cfg.pressure_max_iter)?;
        let grad_q = grid.gradient_values(&sol.q);
        for (i, ui) in u.iter_mut().enumerate() {
            // not truncated: div(w - β∇q) = 0 holds only for the raw product
            for ((a, g), b) in ui.iter_mut().zip(&grad_q[i]).zip(&beta) {
                *a -= g * b;
            }
        }
        pressure_iterations = sol.iterations;
        multiplier = Some(sol.q);
    }
    Ok(Tendencies {
        rho,
        u,
        e,
        multiplier,
        pressure_iterations,
    })
}

/// `∂ρ/∂t`: `-u·∇ρ` in incompressible mode, `-div(ρu)` in compressible mode.
pub fn continuity_rhs(s: &State, cfg: &StepConfig) -> ScalarField {
    let kin = Kinematics::new(s);
    let v = continuity_with(s, &kin, cfg.mode, cfg.dealias);
    Field::from_components_unchecked(s.grid(), vec![v])
}

/// `∂E/∂t = -u·∇E + ∇u E + ∇u`.
pub fn deformation_rhs(s: &State, cfg: &StepConfig) -> TensorField {
    let kin = Kinematics::new(s);
    Field::from_components_unchecked(s.grid(), deformation_with(s, &kin, cfg.dealias))
}

/// `∂u/∂t` together with the pressure multiplier used to obtain it.
#[derive(Clone, Debug)]
pub struct MomentumRhs {
    pub du_dt: VectorField,
    /// `q` in incompressible mode, `None` in compressible mode.
    pub multiplier: Option<ScalarField>,
}

pub fn momentum_rhs_with_multiplier(s: &State, cfg: &StepConfig) -> Result<MomentumRhs> {
    let tend = tendencies(s, cfg, None)?;
    let grid = s.grid();
    let lap = s.u.laplacian();
    let comps = tend
        .u
        .into_iter()
        .zip(lap.components())
        .map(|(n, l)| n.iter().zip(l).map(|(a, b)| a + cfg.mu * b).collect())
        .collect();
    Ok(MomentumRhs {
        du_dt: Field::from_components_unchecked(grid, comps),
        multiplier: tend
            .multiplier
            .map(|q| Field::from_components_unchecked(grid, vec![q])),
    })
}

/// `∂u/∂t`; divergence-free in incompressible mode.
pub fn momentum_rhs(s: &State, cfg: &StepConfig) -> Result<VectorField> {
    Ok(momentum_rhs_with_multiplier(s, cfg)?.du_dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PressureLaw;
    use crate::testutil::{fd_derivative, random_scalar, random_tensor, random_vector};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(2, n, 2.0 * PI).unwrap()
    }

    fn cfg() -> StepConfig {
        StepConfig::new(1e-3, 0.1).unwrap()
    }

    #[test]
    fn equilibrium_tendencies_vanish() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 8, 2.0 * PI).unwrap();
            let s = State::equilibrium(&g);
            for mode in [Mode::Incompressible, Mode::Compressible] {
                let c = cfg().with_mode(mode);
                assert!(continuity_rhs(&s, &c).max_abs() <= 1e-15);
                assert!(deformation_rhs(&s, &c).max_abs() <= 1e-15);
                assert!(momentum_rhs(&s, &c).unwrap().max_abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn continuity_analytic() {
        let g = grid(32);
        let mut s = State::equilibrium(&g);
        s.rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
        s.u = VectorField::from_fn(&g, |x| [x[1].cos(), 0.0, 0.0]);
        let exact = ScalarField::from_fn(&g, |x| -0.1 * x[1].cos() * x[0].cos());
        for mode in [Mode::Incompressible, Mode::Compressible] {
            let r = continuity_rhs(&s, &cfg().with_mode(mode));
            assert!(r.max_abs_diff(&exact) <= 1e-12, "{mode:?}");
        }
    }

    #[test]
    fn continuity_zero_for_uniform_density() {
        let g = grid(16);
        let mut s = State::equilibrium(&g);
        s.rho = ScalarField::constant(&g, 1.3);
        s.u = random_vector(&g, 3, 4).leray_project();
        for mode in [Mode::Incompressible, Mode::Compressible] {
            assert!(continuity_rhs(&s, &cfg().with_mode(mode)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn deformation_is_velocity_gradient_when_e_vanishes() {
        let g = grid(16);
        let mut s = State::equilibrium(&g);
        s.u = random_vector(&g, 3, 7);
        let r = deformation_rhs(&s, &cfg());
        assert!(r.max_abs_diff(&s.u.gradient()) <= 1e-13);
    }

    #[test]
    fn deformation_against_finite_differences() {
        let errs: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let mut s = State::equilibrium(&g);
                s.u = VectorField::from_fn(&g, |x| [0.3 * x[1].sin(), 0.2 * (x[0] + x[1]).cos(), 0.0]);
                s.e = TensorField::from_fn(&g, |x| {
                    [[0.1 * x[0].cos(), 0.2 * x[1].sin(), 0.0], [0.1 * (x[0] - x[1]).sin(), 0.05 * x[0].sin(), 0.0], [0.0; 3]]
                });
                let r = deformation_rhs(&s, &cfg());
                let mut worst = 0.0f64;
                for i in 0..2 {
                    for j in 0..2 {
                        let d = |c: &[f64], axis| fd_derivative(&g, c, axis);
                        for p in 0..g.len() {
                            let mut v = d(s.u.component(i), j)[p];
                            for l in 0..2 {
                                v -= s.u.component(l)[p] * d(s.e.component(i, j), l)[p];
                                v += d(s.u.component(i), l)[p] * s.e.component(l, j)[p];
                            }
                            worst = worst.max((v - r.component(i, j)[p]).abs());
                        }
                    }
                }
                worst
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.5 && ratio < 4.5, "{errs:?}");
    }

    #[test]
    fn incompressible_momentum_is_solenoidal() {
        let g = grid(32);
        let mut s = State::equilibrium(&g);
        s.rho = random_scalar(&g, 3, 1).map(|v| 1.0 + 0.2 * v);
        s.u = random_vector(&g, 3, 2).leray_project().scaled(0.5);
        s.e = random_tensor(&g, 3, 3).scaled(0.2);
        let du = momentum_rhs(&s, &cfg().with_law(PressureLaw::with_gamma(1.4).unwrap())).unwrap();
        assert!(du.divergence().l2_norm() <= 1e-9, "{}", du.divergence().l2_norm());
    }

    #[test]
    fn momentum_aborts_on_nonpositive_density() {
        let g = grid(8);
        let mut s = State::equilibrium(&g);
        s.rho = ScalarField::from_fn(&g, |x| x[0].sin());
        let err = momentum_rhs(&s, &cfg()).unwrap_err();
        assert!(err.to_string().contains("density positivity lost"));
    }

    #[test]
    fn taylor_green_rhs_is_pure_diffusion() {
        let g = grid(32);
        let mu = 0.1;
        let mut s = State::equilibrium(&g);
        s.u = VectorField::from_fn(&g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
        let du = momentum_rhs(&s, &StepConfig::new(1e-3, mu).unwrap()).unwrap();
        // (u·∇)u is a gradient, so only -2μu survives
        assert!(du.max_abs_diff(&s.u.scaled(-2.0 * mu)) <= 1e-12);
    }
}
