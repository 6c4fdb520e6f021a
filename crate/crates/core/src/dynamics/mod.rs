//! Right-hand sides of the model, the variable-density pressure solve and
//! time integration.
//!
//! Momentum is advanced in primitive form,
//!
//! ```text
//! ∂u/∂t = (1/ρ) [ -ρ(u·∇)u + μΔu - ∇P(ρ) + div(ρFFᵀ) - ∇q ]
//! ```
//!
//! where in incompressible mode `q` is the multiplier that keeps the
//! tendency divergence-free (total pressure `P(ρ) + q`), and in
//! compressible mode `q = 0`.

mod pressure;
mod residual;
mod rhs;
mod stepper;

pub use pressure::{pressure_solve, PressureSolution};
pub use residual::{residual, residual_with, ResidualOptions, SystemResidual, TimeDerivatives};
pub use rhs::{continuity_rhs, deformation_rhs, momentum_rhs, momentum_rhs_with_multiplier, MomentumRhs};
pub use stepper::{advance, cfl_number, step, StepOutcome};

pub(crate) use rhs::divergence_of;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TensorField, VectorField};
use crate::state::PressureLaw;

/// Whether `div u = 0` is enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Incompressible,
    Compressible,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Incompressible => "incompressible",
            Mode::Compressible => "compressible",
        }
    }
}

/// Time scheme. Both treat `μΔu` with an exact spectral integrating factor
/// and everything else explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Integrating-factor Heun (second order).
    Imex2,
    /// Integrating-factor forward Euler (first order).
    Imex1,
}

impl Scheme {
    pub fn order(&self) -> f64 {
        match self {
            Scheme::Imex2 => 2.0,
            Scheme::Imex1 => 1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Imex2 => "imex2",
            Scheme::Imex1 => "imex1",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    pub mu: f64,
    pub law: PressureLaw,
    pub pressure_tol: f64,
    pub pressure_max_iter: usize,
    /// Apply the 2/3 rule after every nonlinear product.
    pub dealias: bool,
    /// When false, `E` is frozen (its equation is dropped). With `E = 0`
    /// this is the density-dependent Navier–Stokes system.
    pub evolve_e: bool,
}

impl StepConfig {
    /// Second-order incompressible defaults with `P(ρ) = ρ²`.
    pub fn new(dt: f64, mu: f64) -> Result<Self> {
        let cfg = StepConfig {
            dt,
            scheme: Scheme::Imex2,
            mode: Mode::Incompressible,
            mu,
            law: PressureLaw::default(),
            pressure_tol: 1e-10,
            pressure_max_iter: 200,
            dealias: true,
            evolve_e: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_law(mut self, law: PressureLaw) -> Self {
        self.law = law;
        self
    }

    pub fn without_deformation(mut self) -> Self {
        self.evolve_e = false;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("mu", self.mu)?;
        positive("pressure_tol", self.pressure_tol)?;
        if self.pressure_max_iter == 0 {
            return Err(Error::InvalidParameter("pressure_max_iter must be > 0".into()));
        }
        Ok(())
    }
}

/// Source terms added to the three equations, in the conservative form of
/// the residual: `∂ρ + div(ρu) = s_ρ`, `∂(ρu) + … = s_m`, `∂E + … = s_E`.
#[derive(Clone, Debug)]
pub struct Sources {
    pub rho: ScalarField,
    pub momentum: VectorField,
    pub e: TensorField,
}

/// Time-dependent source terms, e.g. manufactured forcing.
pub trait Forcing {
    fn sources(&self, t: f64) -> Result<Sources>;
}
