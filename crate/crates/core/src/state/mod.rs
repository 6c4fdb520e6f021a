//! The solution triple `(ρ, u, E)`, the pressure law and the structural
//! residuals of the model.

mod constraints;

pub use constraints::{
    constraint_div_rho_ft, constraint_report, curl_compat_residual, elastic_force,
    grad_rho_identity_residual, ConstraintReport, CurlResidual, ForceForm,
};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, TensorField, VectorField};

/// `P(ρ) = A ρ^γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureLaw {
    a: f64,
    gamma: f64,
}

impl PressureLaw {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("pressure coefficient A must be > 0, got {a}")));
        }
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must satisfy gamma > 1, got {gamma}")));
        }
        Ok(PressureLaw { a, gamma })
    }

    /// `A = 1`.
    pub fn with_gamma(gamma: f64) -> Result<Self> {
        PressureLaw::new(1.0, gamma)
    }

    pub fn coefficient(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma)
    }

    /// `A (ρ^γ - γρ + γ - 1) / (γ - 1)`, the pressure potential relative to ρ = 1.
    pub fn potential(&self, rho: f64) -> f64 {
        let g = self.gamma;
        self.a * (rho.powf(g) - g * rho + g - 1.0) / (g - 1.0)
    }
}

impl Default for PressureLaw {
    fn default() -> Self {
        PressureLaw { a: 1.0, gamma: 2.0 }
    }
}

/// Pointwise pressure potential; rejects non-positive density.
pub fn pressure_potential(rho: &ScalarField, law: &PressureLaw) -> Result<ScalarField> {
    let min = rho.min();
    if !(min > 0.0) {
        return Err(Error::DensityPositivity { min });
    }
    Ok(rho.map(|r| law.potential(r)))
}

/// Density, velocity and `E = F - I` at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub rho: ScalarField,
    pub u: VectorField,
    pub e: TensorField,
}

impl State {
    pub fn new(t: f64, rho: ScalarField, u: VectorField, e: TensorField) -> Result<Self> {
        if !rho.grid().same_as(u.grid()) || !rho.grid().same_as(e.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(State { t, rho, u, e })
    }

    /// ρ = 1, u = 0, F = I at t = 0.
    pub fn equilibrium(grid: &Grid) -> Self {
        State {
            t: 0.0,
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid),
            e: TensorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// `F = I + E`.
    pub fn deformation_gradient(&self) -> TensorField {
        &TensorField::identity(self.grid()) + &self.e
    }

    pub fn min_density(&self) -> f64 {
        self.rho.min()
    }

    /// Errors unless `min ρ > 0` and every sample is finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.u.is_finite() && self.e.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        let min = self.min_density();
        if !(min > 0.0) {
            return Err(Error::DensityPositivity { min });
        }
        Ok(())
    }

    /// Largest pointwise change of any field relative to `other`.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.rho
            .max_abs_diff(&other.rho)
            .max(self.u.max_abs_diff(&other.u))
            .max(self.e.max_abs_diff(&other.e))
    }

    /// Bitwise equality of time and every sample.
    pub fn bitwise_eq(&self, other: &State) -> bool {
        let bits = |s: &State| -> Vec<u64> {
            std::iter::once(s.t)
                .chain(s.rho.components().iter().flatten().copied())
                .chain(s.u.components().iter().flatten().copied())
                .chain(s.e.components().iter().flatten().copied())
                .map(f64::to_bits)
                .collect()
        };
        self.grid() == other.grid() && bits(self) == bits(other)
    }
}

/// Alias of [`State::equilibrium`].
pub fn equilibrium_state(grid: &Grid) -> State {
    State::equilibrium(grid)
}

/// Rescales `s = ν²t, y = νx, v = u/ν, r = ρ, G = E`.
///
/// The samples stay where they are; the returned state lives on a grid of
/// side `νL`.
pub fn scale_state(s: &State, nu: f64) -> Result<State> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidParameter(format!("scaling factor must be > 0, got {nu}")));
    }
    if nu == 1.0 {
        return Ok(s.clone());
    }
    let grid = s.grid().with_length(nu * s.grid().length())?;
    State::new(
        nu * nu * s.t,
        s.rho.on_grid(&grid)?,
        s.u.scaled(1.0 / nu).on_grid(&grid)?,
        s.e.on_grid(&grid)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn potential_values() {
        let law = PressureLaw::with_gamma(2.0).unwrap();
        assert_eq!(law.potential(1.0), 0.0);
        assert!((law.potential(1.5) - 0.25).abs() <= 1e-15);
        let law = PressureLaw::with_gamma(1.4).unwrap();
        let expected = (1.2f64.powf(1.4) - 1.68 + 0.4) / 0.4;
        assert!((law.potential(1.2) - expected).abs() <= 1e-15);
        for gamma in [1.1, 1.4, 2.0, 3.0] {
            let law = PressureLaw::with_gamma(gamma).unwrap();
            assert!(law.potential(1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn potential_is_nonnegative_and_vanishes_only_at_one() {
        for gamma in [1.1, 1.4, 2.0, 5.0 / 3.0, 3.0] {
            let law = PressureLaw::with_gamma(gamma).unwrap();
            for k in 0..=100 {
                let rho = 0.5 + k as f64 / 100.0;
                let p = law.potential(rho);
                if k == 50 {
                    assert!(p.abs() <= 1e-15);
                } else {
                    assert!(p > 0.0, "gamma {gamma} rho {rho} -> {p}");
                }
            }
        }
    }

    #[test]
    fn pressure_law_validation() {
        assert!(PressureLaw::with_gamma(0.9).is_err());
        assert!(PressureLaw::with_gamma(1.0).is_err());
        assert!(PressureLaw::new(0.0, 2.0).is_err());
    }

    #[test]
    fn pressure_potential_rejects_nonpositive_density() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let rho = ScalarField::from_fn(&g, |x| x[0] - 0.5);
        assert!(pressure_potential(&rho, &PressureLaw::default()).is_err());
        let rho = ScalarField::constant(&g, 1.5);
        let p = pressure_potential(&rho, &PressureLaw::default()).unwrap();
        assert!(p.values().iter().all(|v| (v - 0.25).abs() <= 1e-15));
    }

    #[test]
    fn equilibrium_has_unit_density() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let s = State::equilibrium(&g);
        assert_eq!(s.t, 0.0);
        assert!(s.rho.values().iter().all(|&r| r == 1.0));
        assert_eq!(s.u.max_abs(), 0.0);
        assert_eq!(s.e.max_abs(), 0.0);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn scale_state_relabels_geometry() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let mut s = State::equilibrium(&g);
        s.t = 0.3;
        s.u = VectorField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), 0.0]);
        assert!(scale_state(&s, 1.0).unwrap().bitwise_eq(&s));
        let scaled = scale_state(&s, 2.0).unwrap();
        assert!((scaled.grid().length() - 4.0 * PI).abs() <= 1e-15);
        assert!((scaled.t - 1.2).abs() <= 1e-15);
        assert!((scaled.u.max_abs() - 0.5 * s.u.max_abs()).abs() <= 1e-15);
        assert!(scale_state(&s, 0.0).is_err());
        assert!(scale_state(&s, -1.0).is_err());
    }
}
