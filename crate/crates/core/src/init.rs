//! Initial states.
//!
//! Random fields come from a ChaCha8 stream seeded with a `u64`, so every
//! initial condition is reproducible across platforms.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::dynamics::divergence_of;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Rank, ScalarField, TensorField, VectorField};
use crate::state::State;

fn band_limited_component(grid: &Grid, kmax: i64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = grid.dim();
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut bound = 0.0;
    let side = 2 * kmax + 1;
    // canonical draw order over the band, so the field does not depend on n
    for idx in 0..side.pow(dim as u32) {
        let mut mode = [0i64; 3];
        let mut rest = idx;
        for m in mode.iter_mut().take(dim) {
            *m = rest % side - kmax;
            rest /= side;
        }
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if mode.iter().all(|&m| m == 0) {
            continue;
        }
        bound += c.norm();
        spec[grid.mode_index(mode)] += c * grid.len() as f64;
    }
    let values = grid.inverse(spec);
    if bound > 0.0 {
        values.iter().map(|v| v / bound).collect()
    } else {
        values
    }
}

/// Mean-free random field `Σ Re(c_m e^{i m·x'})` over modes
/// `|m_axis| ≤ kmax`, with `x' = 2πx/L`. Each component is scaled by
/// `1/Σ|c_m|`, so its amplitude is at most 1. The field is the same
/// function for every grid that resolves the band.
pub fn random_field<R: Rank>(grid: &Grid, kmax: i64, seed: u64) -> Field<R> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..R::components(grid.dim()))
        .map(|_| band_limited_component(grid, kmax, &mut rng))
        .collect();
    Field::from_components_unchecked(grid, comps)
}

pub fn random_scalar(grid: &Grid, kmax: i64, seed: u64) -> ScalarField {
    random_field(grid, kmax, seed)
}

pub fn random_vector(grid: &Grid, kmax: i64, seed: u64) -> VectorField {
    random_field(grid, kmax, seed)
}

pub fn random_tensor(grid: &Grid, kmax: i64, seed: u64) -> TensorField {
    random_field(grid, kmax, seed)
}

/// Unit-amplitude Taylor–Green vortex on the box, divergence-free.
///
/// 2-D: `(sin x cos y, -cos x sin y)`; 3-D adds a `cos z` factor and a zero
/// third component.
pub fn taylor_green(grid: &Grid) -> VectorField {
    let k = 2.0 * PI / grid.length();
    let three = grid.dim() == 3;
    VectorField::from_fn(grid, |x| {
        let (a, b) = (k * x[0], k * x[1]);
        let cz = if three { (k * x[2]).cos() } else { 1.0 };
        [a.sin() * b.cos() * cz, -a.cos() * b.sin() * cz, 0.0]
    })
}

fn symmetric_part(t: &TensorField) -> TensorField {
    t.lincomb(0.5, &t.transpose(), 0.5)
}

/// `ρ = 1 + δ s₁`, `u = δ TG`, `E = δ sym(s₂)` with random band-limited
/// `s₁`, `s₂` (modes up to 2). `E` generally violates `div(ρFᵀ) = 0`.
pub fn taylor_green_perturbed(grid: &Grid, delta: f64, seed: u64) -> Result<State> {
    check_delta(delta)?;
    let rho = random_scalar(grid, 2, seed).map(|v| 1.0 + delta * v);
    let u = taylor_green(grid).scaled(delta).leray_project();
    let e = symmetric_part(&random_tensor(grid, 2, seed.wrapping_add(1))).scaled(delta);
    State::new(0.0, rho, u, e)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && (0.0..0.5).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must lie in [0, 0.5), got {delta}")))
    }
}

/// Parameters of the transport run that produces constraint-compatible
/// `(ρ, E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatibleGeneration {
    /// Length of the transport window.
    pub duration: f64,
    pub dt: f64,
    /// Highest mode of the synthetic velocity.
    pub kmax: i64,
}

impl Default for CompatibleGeneration {
    fn default() -> Self {
        CompatibleGeneration {
            duration: 1.0,
            dt: 5e-3,
            kmax: 2,
        }
    }
}

/// Tendencies of `ρ_t = -div(ρv)`, `E_t = -v·∇E + ∇v E + ∇v` for a frozen
/// velocity `v` with gradient `grad_v[i][j] = ∂_j v_i`.
fn transport_tendency(
    grid: &Grid,
    v: &VectorField,
    grad_v: &TensorField,
    rho: &[f64],
    e: &[Vec<f64>],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dim = grid.dim();
    let n = grid.len();
    let flux: Vec<Vec<f64>> = (0..dim)
        .map(|l| rho.iter().zip(v.component(l)).map(|(r, w)| r * w).collect())
        .collect();
    let drho: Vec<f64> = divergence_of(grid, &flux, true).into_iter().map(|x| -x).collect();
    let grad_e: Vec<Vec<Vec<f64>>> = e.iter().map(|c| grid.gradient_values(c)).collect();
    let mut de = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut t = vec![0.0; n];
            for l in 0..dim {
                let (vl, g) = (v.component(l), &grad_e[i * dim + j][l]);
                let (dv, elj) = (grad_v.component(i, l), &e[l * dim + j]);
                for p in 0..n {
                    t[p] += dv[p] * elj[p] - vl[p] * g[p];
                }
            }
            let mut t = grid.dealias_values(&t);
            for (a, d) in t.iter_mut().zip(grad_v.component(i, j)) {
                *a += d;
            }
            de.push(t);
        }
    }
    (drho, de)
}

/// Generates `(ρ, E)` with `div(ρFᵀ) = 0` and curl compatibility up to
/// discretization error, by transporting `(1, 0)` with a steady synthetic
/// velocity of amplitude `delta` (classical RK4).
///
/// The synthetic velocity keeps both its solenoidal and compressive parts;
/// the latter is what makes `ρ` non-uniform.
pub fn compatible_density_and_deformation(
    grid: &Grid,
    delta: f64,
    seed: u64,
    gen: &CompatibleGeneration,
) -> Result<(ScalarField, TensorField)> {
    check_delta(delta)?;
    if !(gen.duration >= 0.0 && gen.dt > 0.0 && gen.kmax >= 1) {
        return Err(Error::InvalidParameter("invalid generation window".into()));
    }
    let v = random_vector(grid, gen.kmax, seed).scaled(delta);
    let grad_v = v.gradient();
    let steps = (gen.duration / gen.dt).round() as usize;
    let dt = if steps > 0 { gen.duration / steps as f64 } else { 0.0 };
    let dim = grid.dim();
    let mut rho = vec![1.0; grid.len()];
    let mut e = vec![vec![0.0; grid.len()]; dim * dim];
    let shifted = |base: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    let shifted_all = |base: &[Vec<f64>], k: &[Vec<f64>], h: f64| -> Vec<Vec<f64>> {
        base.iter().zip(k).map(|(a, b)| shifted(a, b, h)).collect()
    };
    for _ in 0..steps {
        let (r1, e1) = transport_tendency(grid, &v, &grad_v, &rho, &e);
        let (r2, e2) =
            transport_tendency(grid, &v, &grad_v, &shifted(&rho, &r1, 0.5 * dt), &shifted_all(&e, &e1, 0.5 * dt));
        let (r3, e3) =
            transport_tendency(grid, &v, &grad_v, &shifted(&rho, &r2, 0.5 * dt), &shifted_all(&e, &e2, 0.5 * dt));
        let (r4, e4) = transport_tendency(grid, &v, &grad_v, &shifted(&rho, &r3, dt), &shifted_all(&e, &e3, dt));
        for p in 0..grid.len() {
            rho[p] += dt / 6.0 * (r1[p] + 2.0 * r2[p] + 2.0 * r3[p] + r4[p]);
        }
        for c in 0..dim * dim {
            for p in 0..grid.len() {
                e[c][p] += dt / 6.0 * (e1[c][p] + 2.0 * e2[c][p] + 2.0 * e3[c][p] + e4[c][p]);
            }
        }
    }
    let rho: ScalarField = Field::from_components_unchecked(grid, vec![rho]);
    let e: TensorField = Field::from_components_unchecked(grid, e);
    if !(rho.is_finite() && e.is_finite()) {
        return Err(Error::NonFinite("constraint-compatible generation"));
    }
    if !(rho.min() > 0.0) {
        return Err(Error::DensityPositivity { min: rho.min() });
    }
    Ok((rho, e))
}

/// Constraint-compatible `(ρ, E)` from the default transport window,
/// with `u = δ TG`.
pub fn constraint_compatible(grid: &Grid, delta: f64, seed: u64) -> Result<State> {
    let (rho, e) = compatible_density_and_deformation(grid, delta, seed, &CompatibleGeneration::default())?;
    State::new(0.0, rho, taylor_green(grid).scaled(delta), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{constraint_report, curl_compat_residual};

    #[test]
    fn random_fields_are_band_limited_and_reproducible() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let a = random_vector(&g, 3, 11);
        assert_eq!(a, random_vector(&g, 3, 11));
        assert_ne!(a, random_vector(&g, 3, 12));
        for c in a.components() {
            let spec = g.forward(c);
            for (flat, v) in spec.iter().enumerate() {
                let m = g.mode(flat);
                if m[0].abs() > 3 || m[1].abs() > 3 || flat == 0 {
                    assert!(v.norm() <= 1e-11);
                }
            }
            let peak = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(peak <= 1.0 && peak > 0.1);
        }
        // same function on a finer grid
        let fine = Grid::new(2, 64, 2.0 * PI).unwrap();
        let b = random_vector(&fine, 3, 11);
        for p in 0..g.len() {
            let x = g.coords(p);
            let q = 2 * (p % 32) + 128 * (p / 32);
            assert!((fine.coords(q)[0] - x[0]).abs() <= 1e-15 && (fine.coords(q)[1] - x[1]).abs() <= 1e-15);
            assert!((a.component(0)[p] - b.component(0)[q]).abs() <= 1e-14);
        }
    }

    #[test]
    fn taylor_green_is_solenoidal() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16, 2.0 * PI).unwrap();
            assert!(taylor_green(&g).divergence().max_abs() <= 1e-13);
        }
    }

    #[test]
    fn perturbed_init_has_requested_amplitude() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let s = taylor_green_perturbed(&g, 1e-2, 5).unwrap();
        let amp = s.rho.map(|v| v - 1.0).max_abs();
        assert!(amp <= 1e-2 && amp > 1e-3);
        assert!((s.u.max_abs() - 1e-2).abs() <= 1e-12);
        assert!(s.e.max_abs_diff(&s.e.transpose()) == 0.0);
        assert!(taylor_green_perturbed(&g, -1.0, 5).is_err());
    }

    #[test]
    fn generated_data_satisfies_the_constraints() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let s = constraint_compatible(&g, 1e-2, 7).unwrap();
        assert!(s.rho.map(|v| v - 1.0).max_abs() > 1e-3);
        assert!(s.e.max_abs() > 1e-3);
        let report = constraint_report(&s);
        assert!(report.div_rho_ft_l2 <= 1e-10, "{report:?}");
        assert!(report.force_equivalence_l2 <= 1e-10, "{report:?}");
        assert!(curl_compat_residual(&s.e).l2_norm() <= 1e-10);
    }
}
