use crate::state::{PressureLaw, State};

/// Energy terms of one state plus the running dissipation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    /// `½∫ρ|u|²`
    pub kinetic: f64,
    /// `½∫ρ|E|²`
    pub elastic_e: f64,
    /// `½∫ρ|F|²`
    pub elastic_f: f64,
    /// `∫Π(ρ)`
    pub potential: f64,
    /// `μ∫₀ᵗ∫|∇u|²` with the stepper's stage weights.
    pub dissipation_cum: f64,
    /// `total(t) + dissipation_cum(t) - total(0)`
    pub balance_residual: f64,
}

impl EnergyReport {
    /// `kinetic + elastic_E + potential`.
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic_e + self.potential
    }

    /// `elastic_F - elastic_E - ∫ρ tr E - ½ d ∫ρ`, zero up to rounding.
    pub fn split_defect(&self, s: &State) -> f64 {
        let d = s.grid().dim() as f64;
        self.elastic_f - self.elastic_e - super::tr_integral(s) - 0.5 * d * s.rho.integral()
    }
}

fn weighted_half_square(rho: &[f64], comps: &[Vec<f64>], cell: f64) -> f64 {
    let mut sum = 0.0;
    for (p, r) in rho.iter().enumerate() {
        let sq: f64 = comps.iter().map(|c| c[p] * c[p]).sum();
        sum += r * sq;
    }
    0.5 * sum * cell
}

/// Instantaneous terms; `dissipation_cum` and `balance_residual` are zero.
pub fn energy_terms(s: &State, law: &PressureLaw) -> EnergyReport {
    let grid = s.grid();
    let cell = grid.cell_volume();
    let rho = s.rho.values();
    let f = s.deformation_gradient();
    let potential: Vec<f64> = rho.iter().map(|&r| law.potential(r)).collect();
    EnergyReport {
        kinetic: weighted_half_square(rho, s.u.components(), cell),
        elastic_e: weighted_half_square(rho, s.e.components(), cell),
        elastic_f: weighted_half_square(rho, f.components(), cell),
        potential: grid.integrate(&potential),
        dissipation_cum: 0.0,
        balance_residual: 0.0,
    }
}

/// Energy balance along a trajectory. Owned by the run loop.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyLedger {
    law: PressureLaw,
    initial_total: f64,
    dissipation_cum: f64,
}

impl EnergyLedger {
    pub fn new(initial: &State, law: PressureLaw) -> Self {
        EnergyLedger {
            law,
            initial_total: energy_terms(initial, &law).total(),
            dissipation_cum: 0.0,
        }
    }

    /// Adds one step's dissipation (see `StepOutcome::dissipation`).
    pub fn record(&mut self, dissipation: f64) {
        self.dissipation_cum += dissipation;
    }

    pub fn dissipation_cum(&self) -> f64 {
        self.dissipation_cum
    }

    pub fn initial_total(&self) -> f64 {
        self.initial_total
    }

    pub fn report(&self, s: &State) -> EnergyReport {
        energy_report(s, &self.law, self.dissipation_cum, self.initial_total)
    }
}

/// Energy terms of `s` with the balance against `initial_total`.
pub fn energy_report(s: &State, law: &PressureLaw, dissipation_cum: f64, initial_total: f64) -> EnergyReport {
    let mut r = energy_terms(s, law);
    r.dissipation_cum = dissipation_cum;
    r.balance_residual = r.total() + dissipation_cum - initial_total;
    r
}
