use std::fs::File;
use std::io::{BufWriter, Write};
use std::sync::mpsc;
use std::thread;

use log::{info, warn};

use super::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use super::config::{ConfigError, InitKind, RunConfig};
use super::CliError;
use crate::diagnostics::{report, sigma_step, DiagnosticsReport, EnergyLedger, SigmaState};
use crate::dynamics::{advance, cfl_number, Forcing, StepConfig};
use crate::init::{constraint_compatible, taylor_green_perturbed};
use crate::mms::{manufactured_fields, ManufacturedForcing, ManufacturedSpec};
use crate::state::State;

/// CSV columns, in order. The trailing `status` column is `ok` or
/// `abort: <reason>`.
pub const CSV_COLUMNS: [&str; 27] = [
    "t",
    "kinetic",
    "elastic_E",
    "elastic_F",
    "potential",
    "dissipation_cum",
    "energy_balance_residual",
    "div_rhoFT_l2",
    "curl_compat_l2",
    "tr_integral",
    "sigma_consistency_l2",
    "z_residual_l2",
    "pressure_poisson_residual_l2",
    "u_l2",
    "u_lq",
    "u_w1q",
    "u_h1semi",
    "rho_m1_l2",
    "rho_m1_lq",
    "rho_m1_w1q",
    "E_l2",
    "E_lq",
    "E_w1q",
    "rho_min",
    "rho_max",
    "cfl",
    "status",
];

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// The 26 numeric values of a row.
pub fn csv_values(r: &DiagnosticsReport, cfl: f64) -> [f64; 26] {
    let e = &r.energy;
    let c = &r.constraints;
    let n = &r.norms;
    [
        r.time,
        e.kinetic,
        e.elastic_e,
        e.elastic_f,
        e.potential,
        e.dissipation_cum,
        e.balance_residual,
        c.div_rho_ft_l2,
        c.curl_compat_l2,
        r.tr_integral,
        r.sigma_consistency_l2,
        r.z_residual_l2,
        r.pressure_poisson_residual_l2,
        n.u_l2,
        n.u_lq,
        n.u_w1q,
        n.u_h1semi,
        n.rho_m1_l2,
        n.rho_m1_lq,
        n.rho_m1_w1q,
        n.e_l2,
        n.e_lq,
        n.e_w1q,
        r.rho_min,
        r.rho_max,
        cfl,
    ]
}

/// 17 significant digits per value.
pub fn csv_row(values: &[f64], status: &str) -> String {
    let mut out = String::with_capacity(26 * 25);
    for v in values {
        out.push_str(&format!("{v:.16e},"));
    }
    out.push_str(&status.replace([',', '\n'], ";"));
    out
}

/// Initial state and, for `init = manufactured`, the forcing that keeps
/// the manufactured solution exact.
pub fn initial_state(cfg: &RunConfig) -> Result<(State, Option<ManufacturedForcing>), CliError> {
    let grid = cfg.grid().map_err(CliError::Setup)?;
    let state = match cfg.init {
        InitKind::Equilibrium => State::equilibrium(&grid),
        InitKind::TaylorGreenPerturbed => taylor_green_perturbed(&grid, cfg.delta, cfg.seed).map_err(CliError::Setup)?,
        InitKind::ConstraintCompatible => constraint_compatible(&grid, cfg.delta, cfg.seed).map_err(CliError::Setup)?,
        InitKind::Checkpoint => {
            let path = cfg.checkpoint_in.as_ref().expect("validated");
            let ckpt = read_checkpoint(path, Some(cfg.dim)).map_err(|source| CliError::Checkpoint {
                path: path.clone(),
                source,
            })?;
            let g = ckpt.state.grid();
            if g.n() != cfg.n || g.length() != cfg.length {
                return Err(CliError::Config(ConfigError {
                    line: None,
                    key: Some("checkpoint_in".into()),
                    message: format!(
                        "checkpoint grid (n = {}, length = {}) differs from the config (n = {}, length = {})",
                        g.n(),
                        g.length(),
                        cfg.n,
                        cfg.length
                    ),
                }));
            }
            if ckpt.mode != cfg.mode || ckpt.gamma != cfg.gamma || ckpt.mu != cfg.mu {
                warn!("checkpoint parameters differ from the config; the config wins");
            }
            ckpt.state
        }
        InitKind::Manufactured => {
            let spec = manufactured_spec(cfg);
            let forcing = ManufacturedForcing::new(spec.clone(), &grid, &cfg.step_config().map_err(CliError::Setup)?)
                .map_err(CliError::Setup)?;
            let (state, _) = manufactured_fields(&spec, &grid, 0.0).map_err(CliError::Setup)?;
            return Ok((state, Some(forcing)));
        }
    };
    Ok((state, None))
}

/// The standard manufactured spec with amplitude `delta`.
pub fn manufactured_spec(cfg: &RunConfig) -> ManufacturedSpec {
    ManufacturedSpec {
        epsilon: cfg.delta,
        ..ManufacturedSpec::standard(cfg.mode)
    }
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub rows: usize,
    /// Reason of a numerical abort.
    pub abort: Option<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.abort.is_some() {
            super::EXIT_ABORT
        } else {
            super::EXIT_OK
        }
    }
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    step_cfg: StepConfig,
    ledger: EnergyLedger,
    sigma: Option<SigmaState>,
}

impl Recorder<'_> {
    fn values(&self, s: &State) -> crate::Result<[f64; 26]> {
        let r = report(s, &self.step_cfg, self.sigma.as_ref(), &self.ledger, self.cfg.q_norm)?;
        Ok(csv_values(&r, cfl_number(s, self.step_cfg.dt)))
    }
}

/// Runs the configured simulation, writing the CSV series and the final
/// checkpoint. A numerical abort still yields `Ok`: the last row carries
/// the reason and the checkpoint holds the last good state.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let step_cfg = cfg.step_config().map_err(CliError::Setup)?;
    let (initial, forcing) = initial_state(cfg)?;
    let law = cfg.law().map_err(CliError::Setup)?;
    // σ is only transported by the unforced equations
    let sigma = match forcing {
        Some(_) => None,
        None => Some(SigmaState::from_state(&initial).map_err(CliError::Setup)?),
    };
    let mut rec = Recorder {
        cfg,
        step_cfg: step_cfg.clone(),
        ledger: EnergyLedger::new(&initial, law),
        sigma,
    };
    let csv = File::create(&cfg.csv_path).map_err(|source| CliError::Io {
        path: cfg.csv_path.clone(),
        source,
    })?;

    let steps = cfg.steps();
    let forcing = forcing.as_ref().map(|f| f as &dyn Forcing);
    let (tx, rx) = mpsc::sync_channel::<String>(64);
    let (summary, last) = thread::scope(|scope| {
        let writer = scope.spawn(move || -> std::io::Result<()> {
            let mut w = BufWriter::new(csv);
            writeln!(w, "{}", csv_header())?;
            for row in rx {
                writeln!(w, "{row}")?;
            }
            w.flush()
        });

        let mut s = initial.clone();
        let mut rows = 0;
        let mut abort = None;
        let mut emit = |row: String| {
            rows += 1;
            // a send fails only if the writer died; its error surfaces on join
            let _ = tx.send(row);
        };
        match rec.values(&s) {
            Ok(v) => emit(csv_row(&v, "ok")),
            Err(e) => abort = Some(e),
        }
        let mut done = 0;
        while abort.is_none() && done < steps {
            match advance(&s, &step_cfg, forcing) {
                Ok(out) => {
                    if let Some(sig) = rec.sigma.as_mut() {
                        *sig = sigma_step(sig, &s, &out.stage, &step_cfg);
                    }
                    rec.ledger.record(out.dissipation);
                    s = out.state;
                    done += 1;
                    if done % cfg.output_every == 0 || done == steps {
                        match rec.values(&s) {
                            Ok(v) => {
                                emit(csv_row(&v, "ok"));
                                info!("step {done}/{steps} t = {:.6}", s.t);
                            }
                            Err(e) => abort = Some(e),
                        }
                    }
                }
                Err(e) => abort = Some(e),
            }
        }
        let abort = abort.map(|e| {
            let reason = format!("abort: {e}");
            warn!("step {done}: {reason}");
            let v = rec.values(&s).unwrap_or_else(|_| {
                let mut v = [f64::NAN; 26];
                v[0] = s.t;
                v
            });
            emit(csv_row(&v, &reason));
            (e, reason)
        });
        drop(tx);
        let written = writer.join().expect("CSV writer panicked");
        (
            written.map(|_| (done, rows, abort)),
            s,
        )
    });
    let (done, rows, abort) = summary.map_err(|source| CliError::Io {
        path: cfg.csv_path.clone(),
        source,
    })?;
    let abort = match abort {
        Some((e, _)) if !e.is_numerical_abort() => return Err(CliError::Setup(e)),
        other => other.map(|(_, reason)| reason),
    };

    let ckpt = Checkpoint {
        state: last,
        gamma: cfg.gamma,
        mu: cfg.mu,
        mode: cfg.mode,
    };
    write_checkpoint(&ckpt, &cfg.checkpoint_path).map_err(|source| CliError::Checkpoint {
        path: cfg.checkpoint_path.clone(),
        source,
    })?;
    Ok(RunSummary {
        steps: done,
        final_time: ckpt.state.t,
        rows,
        abort,
    })
}
