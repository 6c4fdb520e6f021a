use std::fmt::Write as _;
use std::path::Path;

use super::checkpoint::read_checkpoint;
use super::config::RunConfig;
use super::run::{initial_state, manufactured_spec};
use super::CliError;
use crate::diagnostics::{energy_terms, pressure_poisson_residual, rho_det_f_defect, z_parabolic_residual};
use crate::dynamics::{Mode, Scheme};
use crate::mms::{convergence_study, StudyPlan};
use crate::state::{constraint_report, State};

/// One line of the identity report.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityLine {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    /// Informational lines never fail.
    pub hard: bool,
}

impl IdentityLine {
    pub fn passed(&self) -> bool {
        !self.hard || self.value <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub lines: Vec<IdentityLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(IdentityLine::passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityLine> {
        self.lines.iter().find(|l| l.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let verdict = match (l.hard, l.passed()) {
                (false, _) => "info",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            let _ = writeln!(out, "{:<28} {:>24.16e}  tol {:.1e}  {verdict}", l.name, l.value, l.tolerance);
        }
        out
    }
}

/// Evaluates the structural identities on `s` against `cfg.tolerance`.
pub fn check_state(s: &State, cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let step_cfg = cfg.step_config().map_err(CliError::Setup)?;
    let tol = cfg.tolerance;
    let c = constraint_report(s);
    let hard = |name, value| IdentityLine {
        name,
        value,
        tolerance: tol,
        hard: true,
    };
    let mut lines = vec![
        hard("div_rhoFT_l2", c.div_rho_ft_l2),
        hard("curl_compat_l2", c.curl_compat_l2),
        hard("grad_rho_identity_l2", c.grad_rho_identity_l2),
        hard("force_equivalence_l2", c.force_equivalence_l2),
        hard("z_residual_l2", z_parabolic_residual(s, &step_cfg).map_err(CliError::Setup)?),
    ];
    if cfg.mode == Mode::Incompressible {
        lines.push(hard("div_u_l2", s.u.divergence().l2_norm()));
        lines.push(hard(
            "pressure_poisson_residual_l2",
            pressure_poisson_residual(s, &step_cfg).map_err(CliError::Setup)?,
        ));
    }
    let law = cfg.law().map_err(CliError::Setup)?;
    let split = energy_terms(s, &law).split_defect(s).abs();
    // relative to the size of the split terms
    lines.push(hard("energy_split_defect", split / (0.5 * s.grid().dim() as f64 * s.rho.integral()).max(1.0)));
    lines.push(IdentityLine {
        name: "rho_det_f_l1",
        value: rho_det_f_defect(s),
        tolerance: tol,
        hard: false,
    });
    Ok(CheckReport { lines })
}

/// Identity report of the configured initial state, or of `checkpoint`
/// when given.
pub fn check_identities(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<CheckReport, CliError> {
    let state = match checkpoint {
        Some(path) => {
            read_checkpoint(path, Some(cfg.dim))
                .map_err(|source| CliError::Checkpoint {
                    path: path.to_path_buf(),
                    source,
                })?
                .state
        }
        None => initial_state(cfg)?.0,
    };
    check_state(&state, cfg)
}

/// Human-readable summary of a checkpoint file.
pub fn info(path: &Path) -> Result<String, CliError> {
    let ckpt = read_checkpoint(path, None).map_err(|source| CliError::Checkpoint {
        path: path.to_path_buf(),
        source,
    })?;
    let s = &ckpt.state;
    let g = s.grid();
    let c = constraint_report(s);
    let mut out = String::new();
    let _ = writeln!(out, "file            {}", path.display());
    let _ = writeln!(out, "grid            {}-D, n = {}, length = {}", g.dim(), g.n(), g.length());
    let _ = writeln!(out, "time            {}", s.t);
    let _ = writeln!(out, "mode            {}", ckpt.mode.as_str());
    let _ = writeln!(out, "gamma           {}", ckpt.gamma);
    let _ = writeln!(out, "mu              {}", ckpt.mu);
    let _ = writeln!(out, "rho             [{:.6e}, {:.6e}], mass {:.12e}", s.rho.min(), s.rho.max(), s.rho.integral());
    let _ = writeln!(out, "max |u|         {:.6e}", s.u.max_abs());
    let _ = writeln!(out, "max |E|         {:.6e}", s.e.max_abs());
    let _ = writeln!(out, "div_rhoFT_l2    {:.6e}", c.div_rho_ft_l2);
    let _ = writeln!(out, "curl_compat_l2  {:.6e}", c.curl_compat_l2);
    Ok(out)
}

/// Study matrix used by `vela mms`.
pub fn mms_plan(cfg: &RunConfig) -> StudyPlan {
    StudyPlan {
        length: cfg.length,
        time_n: cfg.n.min(32),
        // first order needs a much smaller step to expose the spatial floor
        space_dt: match cfg.scheme {
            Scheme::Imex2 => 1e-4,
            Scheme::Imex1 => 1e-6,
        },
        ..StudyPlan::default()
    }
}

/// Allowed deviation of the fitted order from the scheme's order.
pub const ORDER_TOLERANCE: f64 = 0.2;
/// Largest acceptable spatial error below the dealias cutoff.
pub const SPATIAL_FLOOR: f64 = 1e-10;

/// Runs the convergence study and writes its table to `csv_path`.
/// Returns the printed summary and whether the order, the floor and
/// monotonicity all meet their targets.
pub fn run_mms(cfg: &RunConfig) -> Result<(String, bool), CliError> {
    let step_cfg = cfg.step_config().map_err(CliError::Setup)?;
    let spec = manufactured_spec(cfg);
    let plan = mms_plan(cfg);
    let r = convergence_study(&spec, &step_cfg, &plan).map_err(CliError::Setup)?;
    let mut out = String::new();
    let _ = writeln!(out, "{:>6} {:>10} {:>6} {:>12} {:>12} {:>12} {:>12}", "n", "dt", "steps", "rho", "u", "E", "total");
    for row in r.temporal.iter().chain(&r.spatial) {
        let _ = writeln!(
            out,
            "{:>6} {:>10.3e} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.n, row.dt, row.steps, row.rho, row.u, row.e, row.total
        );
    }
    let csv = r.to_csv();
    std::fs::write(&cfg.csv_path, csv).map_err(|source| CliError::Io {
        path: cfg.csv_path.clone(),
        source,
    })?;
    let expected = cfg.scheme.order();
    let order_ok = (r.temporal_order - expected).abs() <= ORDER_TOLERANCE;
    let floor_ok = r.spatial_floor <= SPATIAL_FLOOR;
    let monotone = r.is_monotone(SPATIAL_FLOOR / 100.0);
    let verdict = |ok| if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(
        out,
        "temporal order {:.3} (expected {expected} ± {ORDER_TOLERANCE})  {}",
        r.temporal_order,
        verdict(order_ok)
    );
    let _ = writeln!(
        out,
        "spatial floor {:.3e} (limit {SPATIAL_FLOOR:.0e})  {}",
        r.spatial_floor,
        verdict(floor_ok)
    );
    let _ = writeln!(out, "errors monotone in resolution  {}", verdict(monotone));
    let _ = writeln!(out, "table written to {}", cfg.csv_path.display());
    Ok((out, order_ok && floor_ok && monotone))
}
