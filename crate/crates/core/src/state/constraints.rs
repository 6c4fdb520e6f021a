use super::State;
use crate::error::Result;
use crate::grid::{check_exponent, lq_of_magnitude, Field, Grid, TensorField, VectorField};

/// Residual norms of the structural constraints of a state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstraintReport {
    /// `‖div(ρFᵀ)‖₂`
    pub div_rho_ft_l2: f64,
    /// L² norm of the curl-compatibility residual.
    pub curl_compat_l2: f64,
    /// L² norm of `∇ρ + ρ div Eᵀ + ∇ρ Eᵀ`.
    pub grad_rho_identity_l2: f64,
    /// `‖div(ρFFᵀ) - ρ F_jk ∂_j E_ik‖₂`
    pub force_equivalence_l2: f64,
}

/// `c_k = ∂_j(ρ F_jk)`; vanishes for states compatible with the flow map.
pub fn constraint_div_rho_ft(s: &State) -> VectorField {
    let grid = s.grid();
    let dim = grid.dim();
    let f = s.deformation_gradient();
    let rho = s.rho.values();
    let mut comps = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut acc = vec![0.0; grid.len()];
        for j in 0..dim {
            let prod: Vec<f64> = rho.iter().zip(f.component(j, k)).map(|(r, v)| r * v).collect();
            for (a, d) in acc.iter_mut().zip(grid.derivative(&prod, j)) {
                *a += d;
            }
        }
        comps.push(acc);
    }
    Field::from_components_unchecked(grid, comps)
}

/// `r_i = ∂_iρ + ρ ∂_j E_ji + E_ji ∂_jρ`, the product-rule expansion of
/// [`constraint_div_rho_ft`].
pub fn grad_rho_identity_residual(s: &State) -> VectorField {
    let grid = s.grid();
    let dim = grid.dim();
    let grad_rho = grid.gradient_values(s.rho.values());
    let grad_e = s.e.component_gradients();
    let rho = s.rho.values();
    let mut comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut r = grad_rho[i].clone();
        for j in 0..dim {
            let d_e = &grad_e[j * dim + i][j];
            let e_ji = s.e.component(j, i);
            for p in 0..grid.len() {
                r[p] += rho[p] * d_e[p] + e_ji[p] * grad_rho[j][p];
            }
        }
        comps.push(r);
    }
    Field::from_components_unchecked(grid, comps)
}

/// Which algebraic form of the elastic force to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForceForm {
    /// `∂_j(ρ F_ik F_jk)`
    Full,
    /// `ρ F_jk ∂_j E_ik`, equal to the full form when `div(ρFᵀ) = 0`.
    Reduced,
}

/// Elastic force `div(ρFFᵀ)` in the requested form, without dealiasing.
pub fn elastic_force(s: &State, form: ForceForm) -> VectorField {
    let grid = s.grid();
    let dim = grid.dim();
    let f = s.deformation_gradient();
    let rho = s.rho.values();
    let n = grid.len();
    let mut comps = Vec::with_capacity(dim);
    match form {
        ForceForm::Full => {
            for i in 0..dim {
                let mut acc = vec![0.0; n];
                for j in 0..dim {
                    let mut stress = vec![0.0; n];
                    for k in 0..dim {
                        let (fik, fjk) = (f.component(i, k), f.component(j, k));
                        for p in 0..n {
                            stress[p] += rho[p] * fik[p] * fjk[p];
                        }
                    }
                    for (a, d) in acc.iter_mut().zip(grid.derivative(&stress, j)) {
                        *a += d;
                    }
                }
                comps.push(acc);
            }
        }
        ForceForm::Reduced => {
            let grad_e = s.e.component_gradients();
            for i in 0..dim {
                let mut acc = vec![0.0; n];
                for j in 0..dim {
                    for k in 0..dim {
                        let fjk = f.component(j, k);
                        let d = &grad_e[i * dim + k][j];
                        for p in 0..n {
                            acc[p] += rho[p] * fjk[p] * d[p];
                        }
                    }
                }
                comps.push(acc);
            }
        }
    }
    Field::from_components_unchecked(grid, comps)
}

/// Rank-3 residual `R_ijk = ∇_k E_ij + E_lk ∇_l E_ij - ∇_j E_ik - E_nj ∇_n E_ik`.
#[derive(Clone, Debug)]
pub struct CurlResidual {
    grid: Grid,
    /// Index `(i * dim + j) * dim + k`.
    comps: Vec<Vec<f64>>,
}

impl CurlResidual {
    pub fn component(&self, i: usize, j: usize, k: usize) -> &[f64] {
        let dim = self.grid.dim();
        &self.comps[(i * dim + j) * dim + k]
    }

    fn magnitude(&self) -> Vec<f64> {
        let mut mag = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (m, v) in mag.iter_mut().zip(c) {
                *m += v * v;
            }
        }
        mag.iter_mut().for_each(|m| *m = m.sqrt());
        mag
    }

    pub fn l2_norm(&self) -> f64 {
        lq_of_magnitude(&self.magnitude(), self.grid.cell_volume(), 2.0)
    }

    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        check_exponent(q)?;
        Ok(lq_of_magnitude(&self.magnitude(), self.grid.cell_volume(), q))
    }
}

/// Curl-compatibility residual of `E`. Antisymmetric in `(j, k)` exactly.
pub fn curl_compat_residual(e: &TensorField) -> CurlResidual {
    let grid = e.grid();
    let dim = grid.dim();
    let n = grid.len();
    let grad_e = e.component_gradients();
    // a[(i, j, k)] = ∂_k E_ij + E_lk ∂_l E_ij
    let mut a = Vec::with_capacity(dim * dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let d = &grad_e[i * dim + j];
            for k in 0..dim {
                let mut v = d[k].clone();
                for l in 0..dim {
                    let e_lk = e.component(l, k);
                    for p in 0..n {
                        v[p] += e_lk[p] * d[l][p];
                    }
                }
                a.push(v);
            }
        }
    }
    let mut comps = Vec::with_capacity(dim * dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let ijk = &a[(i * dim + j) * dim + k];
                let ikj = &a[(i * dim + k) * dim + j];
                comps.push(ijk.iter().zip(ikj).map(|(x, y)| x - y).collect());
            }
        }
    }
    CurlResidual {
        grid: grid.clone(),
        comps,
    }
}

pub fn constraint_report(s: &State) -> ConstraintReport {
    let full = elastic_force(s, ForceForm::Full);
    let reduced = elastic_force(s, ForceForm::Reduced);
    ConstraintReport {
        div_rho_ft_l2: constraint_div_rho_ft(s).l2_norm(),
        curl_compat_l2: curl_compat_residual(&s.e).l2_norm(),
        grad_rho_identity_l2: grad_rho_identity_residual(s).l2_norm(),
        force_equivalence_l2: (&full - &reduced).l2_norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;
    use crate::testutil::{fd_derivative, random_scalar, random_tensor, random_vector};
    use std::f64::consts::PI;

    fn random_state(grid: &Grid, kmax: i64, seed: u64) -> State {
        let rho = random_scalar(grid, kmax, seed).map(|v| 1.0 + 0.2 * v);
        let u = random_vector(grid, kmax, seed + 1).scaled(0.3);
        let e = random_tensor(grid, kmax, seed + 2).scaled(0.3);
        State::new(0.0, rho, u, e).unwrap()
    }

    #[test]
    fn equilibrium_residuals_vanish() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let r = constraint_report(&State::equilibrium(&g));
        assert_eq!(r, ConstraintReport::default());
    }

    #[test]
    fn curl_residual_zero_for_constant_e() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let e = TensorField::from_fn(&g, |_| [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6], [0.7, 0.8, 0.9]]);
        assert!(curl_compat_residual(&e).l2_norm() <= 1e-14);
        assert_eq!(curl_compat_residual(&TensorField::zeros(&g)).l2_norm(), 0.0);
    }

    #[test]
    fn curl_residual_matches_naive_loops() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16, 2.0 * PI).unwrap();
            let e = random_tensor(&g, 3, 11).scaled(0.5);
            let r = curl_compat_residual(&e);
            // naive oracle: per-node nested loops over the spectral derivative table
            let mut d = vec![vec![vec![Vec::new(); dim]; dim]; dim];
            for i in 0..dim {
                for j in 0..dim {
                    for l in 0..dim {
                        d[i][j][l] = g.derivative(e.component(i, j), l);
                    }
                }
            }
            let mut worst = 0.0f64;
            for p in 0..g.len() {
                for i in 0..dim {
                    for j in 0..dim {
                        for k in 0..dim {
                            let mut v = d[i][j][k][p] - d[i][k][j][p];
                            for l in 0..dim {
                                v += e.component(l, k)[p] * d[i][j][l][p];
                                v -= e.component(l, j)[p] * d[i][k][l][p];
                            }
                            worst = worst.max((v - r.component(i, j, k)[p]).abs());
                            // exact antisymmetry
                            assert_eq!(r.component(i, j, k)[p], -r.component(i, k, j)[p]);
                        }
                    }
                }
            }
            assert!(worst <= 1e-12, "dim {dim}: {worst}");
        }
    }

    #[test]
    fn grad_rho_identity_matches_constraint() {
        // band limit n/4 keeps every product resolved on the grid
        for dim in [2, 3] {
            let g = Grid::new(dim, 16, 2.0 * PI).unwrap();
            let s = random_state(&g, 3, 5);
            let diff = &constraint_div_rho_ft(&s) - &grad_rho_identity_residual(&s);
            assert!(diff.max_abs() <= 1e-12, "{}", diff.max_abs());
        }
    }

    #[test]
    fn force_difference_is_f_times_constraint() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16, 2.0 * PI).unwrap();
            let s = random_state(&g, 2, 9);
            let full = elastic_force(&s, ForceForm::Full);
            let reduced = elastic_force(&s, ForceForm::Reduced);
            let c = constraint_div_rho_ft(&s);
            let f = s.deformation_gradient();
            let mut worst = 0.0f64;
            for i in 0..dim {
                for p in 0..g.len() {
                    let mut fc = 0.0;
                    for k in 0..dim {
                        fc += f.component(i, k)[p] * c.component(k)[p];
                    }
                    let d = full.component(i)[p] - reduced.component(i)[p];
                    worst = worst.max((d - fc).abs());
                }
            }
            assert!(worst <= 1e-12, "dim {dim}: {worst}");
        }
    }

    #[test]
    fn single_shear_entry_force_defect() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let eps = 0.1;
        let mut s = State::equilibrium(&g);
        s.e = TensorField::from_fn(&g, |x| {
            let mut m = [[0.0; 3]; 3];
            m[0][1] = eps * x[1].sin();
            m
        });
        let full = elastic_force(&s, ForceForm::Full);
        let reduced = elastic_force(&s, ForceForm::Reduced);
        // E_01 varies only along x1, so ∂_j(ρ F_jk) vanishes and both forms agree
        let c = constraint_div_rho_ft(&s);
        assert!(c.max_abs() <= 1e-13);
        assert!((&full - &reduced).max_abs() <= 1e-12);
        // full form: ∂_j(F_0k F_jk) = ∂_1(E_01) = eps cos(x1) in component 0
        let exact = ScalarField::from_fn(&g, |x| eps * x[1].cos());
        let err = full.component(0).iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12);
    }

    #[test]
    fn constraint_against_finite_differences() {
        // second-order central differences converge to the spectral value at O(h^2)
        let errs: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&n| {
                let g = Grid::new(2, n, 2.0 * PI).unwrap();
                let mut s = State::equilibrium(&g);
                s.rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * (x[0] + x[1]).sin());
                s.e = TensorField::from_fn(&g, |x| {
                    [[0.2 * x[1].cos(), 0.1 * x[0].sin(), 0.0], [0.1 * (x[0] - x[1]).cos(), -0.2 * x[0].sin(), 0.0], [0.0; 3]]
                });
                let c = constraint_div_rho_ft(&s);
                let f = s.deformation_gradient();
                let mut worst = 0.0f64;
                for k in 0..2 {
                    let mut fd = vec![0.0; g.len()];
                    for j in 0..2 {
                        let prod: Vec<f64> = s.rho.values().iter().zip(f.component(j, k)).map(|(r, v)| r * v).collect();
                        for (a, d) in fd.iter_mut().zip(fd_derivative(&g, &prod, j)) {
                            *a += d;
                        }
                    }
                    for (a, b) in fd.iter().zip(c.component(k)) {
                        worst = worst.max((a - b).abs());
                    }
                }
                worst
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(errs[0] < 0.05, "{errs:?}");
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }
}
