//! Energy ledger, constraint and identity residuals, and tracked norms of a
//! trajectory.

mod energy;
mod identities;
mod sigma;

pub use energy::{energy_report, energy_terms, EnergyLedger, EnergyReport};
pub use identities::{
    compute_z, pressure_poisson_residual, pressure_poisson_residual_field, rho_det_f_defect, tr_integral,
    tr_transport_defect, z_parabolic_residual, z_parabolic_residual_field, CONSTRAINT_WARN_LEVEL,
};
pub use sigma::{sigma_consistency, sigma_step, SigmaState};

use crate::dynamics::{momentum_rhs_with_multiplier, Mode, StepConfig};
use crate::error::Result;
use crate::state::{constraint_report, ConstraintReport, State};

/// Default norm exponent.
pub const DEFAULT_Q: f64 = 4.0;

/// Sobolev-type norms of the unknowns. `*_w1q` is `‖f‖_q + ‖∇f‖_q`;
/// `u_h1semi` is `(∫|∇u|²)^½`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrackedNorms {
    pub u_l2: f64,
    pub u_lq: f64,
    pub u_w1q: f64,
    pub u_h1semi: f64,
    pub rho_m1_l2: f64,
    pub rho_m1_lq: f64,
    pub rho_m1_w1q: f64,
    pub e_l2: f64,
    pub e_lq: f64,
    pub e_w1q: f64,
}

impl TrackedNorms {
    pub fn of(s: &State, q: f64) -> Result<Self> {
        let rho_m1 = s.rho.map(|r| r - 1.0);
        Ok(TrackedNorms {
            u_l2: s.u.l2_norm(),
            u_lq: s.u.lq_norm(q)?,
            u_w1q: s.u.w1q_norm(q)?,
            u_h1semi: s.u.h1_seminorm_sq().sqrt(),
            rho_m1_l2: rho_m1.l2_norm(),
            rho_m1_lq: rho_m1.lq_norm(q)?,
            rho_m1_w1q: rho_m1.w1q_norm(q)?,
            e_l2: s.e.l2_norm(),
            e_lq: s.e.lq_norm(q)?,
            e_w1q: s.e.w1q_norm(q)?,
        })
    }

    /// Values in a fixed order, with their names.
    pub fn named(&self) -> [(&'static str, f64); 10] {
        [
            ("u_l2", self.u_l2),
            ("u_lq", self.u_lq),
            ("u_w1q", self.u_w1q),
            ("u_h1semi", self.u_h1semi),
            ("rho_m1_l2", self.rho_m1_l2),
            ("rho_m1_lq", self.rho_m1_lq),
            ("rho_m1_w1q", self.rho_m1_w1q),
            ("E_l2", self.e_l2),
            ("E_lq", self.e_lq),
            ("E_w1q", self.e_w1q),
        ]
    }
}

/// Everything recorded at one output time.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport {
    pub time: f64,
    pub energy: EnergyReport,
    pub constraints: ConstraintReport,
    pub tr_integral: f64,
    /// `NaN` when no `σ` is tracked.
    pub sigma_consistency_l2: f64,
    pub z_residual_l2: f64,
    /// `NaN` in compressible mode.
    pub pressure_poisson_residual_l2: f64,
    pub norms: TrackedNorms,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `elastic_F - elastic_E - ∫ρ tr E - ½d∫ρ`.
    pub energy_split_defect: f64,
    /// Informational, see [`tr_transport_defect`].
    pub tr_transport_defect_l2: f64,
    /// Informational, see [`rho_det_f_defect`].
    pub rho_det_f_l1: f64,
}

/// Assembles the report of `s`. The momentum tendency is evaluated once
/// and shared by the `Z` and Poisson identities.
pub fn report(
    s: &State,
    cfg: &StepConfig,
    sigma: Option<&SigmaState>,
    ledger: &EnergyLedger,
    q: f64,
) -> Result<DiagnosticsReport> {
    let energy = ledger.report(s);
    let mom = momentum_rhs_with_multiplier(s, cfg)?;
    let z_residual_l2 = identities::z_residual_with(s, cfg, &mom).l2_norm();
    let pressure_poisson_residual_l2 = match cfg.mode {
        Mode::Incompressible => {
            pressure_poisson_residual_field(s, &mom.du_dt, mom.multiplier.as_ref(), cfg).l2_norm()
        }
        Mode::Compressible => f64::NAN,
    };
    let sigma_consistency_l2 = match sigma {
        Some(sig) => sigma_consistency(sig, s)?,
        None => f64::NAN,
    };
    Ok(DiagnosticsReport {
        time: s.t,
        energy,
        constraints: constraint_report(s),
        tr_integral: tr_integral(s),
        sigma_consistency_l2,
        z_residual_l2,
        pressure_poisson_residual_l2,
        norms: TrackedNorms::of(s, q)?,
        rho_min: s.rho.min(),
        rho_max: s.rho.max(),
        energy_split_defect: energy.split_defect(s),
        tr_transport_defect_l2: tr_transport_defect(s, cfg),
        rho_det_f_l1: rho_det_f_defect(s),
    })
}
