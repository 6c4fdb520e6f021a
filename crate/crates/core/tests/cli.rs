use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use vela::cli::{
    check_state, csv_header, execute, parse_config, read_checkpoint, run_simulation, write_checkpoint, Checkpoint,
    Cli, RunConfig, CSV_COLUMNS, EXIT_ABORT, EXIT_CONFIG, EXIT_FAILED, EXIT_OK,
};
use vela::dynamics::Mode;
use vela::init::constraint_compatible;
use vela::{Grid, ScalarField, State, VectorField};

const GOLDEN_HEADER: &str = "t,kinetic,elastic_E,elastic_F,potential,dissipation_cum,energy_balance_residual,\
div_rhoFT_l2,curl_compat_l2,tr_integral,sigma_consistency_l2,z_residual_l2,pressure_poisson_residual_l2,\
u_l2,u_lq,u_w1q,u_h1semi,rho_m1_l2,rho_m1_lq,rho_m1_w1q,E_l2,E_lq,E_w1q,rho_min,rho_max,cfl,status";

const RESIDUAL_COLUMNS: [&str; 6] = [
    "energy_balance_residual",
    "div_rhoFT_l2",
    "curl_compat_l2",
    "sigma_consistency_l2",
    "z_residual_l2",
    "pressure_poisson_residual_l2",
];

fn config_in(dir: &Path, text: &str) -> RunConfig {
    let text = format!(
        "csv_path = {}\ncheckpoint_path = {}\n{text}",
        dir.join("out.csv").display(),
        dir.join("out.ckpt").display()
    );
    parse_config(&text).unwrap()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Csv {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Csv { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap()
    }

    fn value(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }
}

#[test]
fn golden_header() {
    assert_eq!(csv_header(), GOLDEN_HEADER);
    assert_eq!(CSV_COLUMNS.len(), 27);
}

#[test]
fn equilibrium_run_has_zero_residual_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "n = 16\ndt = 1e-2\nt_end = 1\noutput_every = 10");
    let summary = run_simulation(&cfg).unwrap();
    assert_eq!(summary.exit_code(), EXIT_OK);
    assert_eq!(summary.steps, 100);
    let csv = Csv::read(&cfg.csv_path);
    assert_eq!(csv.rows.len(), 11);
    for r in 0..csv.rows.len() {
        assert_eq!(csv.rows[r].len(), 27);
        assert_eq!(csv.rows[r][26], "ok");
        for name in RESIDUAL_COLUMNS {
            assert_eq!(csv.value(r, name), 0.0, "row {r} {name}");
        }
    }
    assert!((csv.value(10, "t") - 1.0).abs() <= 1e-12);
}

#[test]
fn values_use_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "n = 16\ndt = 1e-2\nt_end = 0.02\ninit = taylor_green_perturbed");
    run_simulation(&cfg).unwrap();
    let csv = Csv::read(&cfg.csv_path);
    let cell = &csv.rows[1][csv.col("kinetic")];
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{cell}");
}

#[test]
fn cfl_abort_writes_final_row_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "n = 64\ndt = 0.5\nt_end = 1\ninit = taylor_green_perturbed\ndelta = 0.4");
    let summary = run_simulation(&cfg).unwrap();
    assert_eq!(summary.exit_code(), EXIT_ABORT);
    assert!(summary.abort.as_deref().unwrap().contains("CFL abort"));
    let csv = Csv::read(&cfg.csv_path);
    let last = csv.rows.last().unwrap();
    assert_eq!(last.len(), 27);
    assert!(last[26].starts_with("abort: CFL abort"), "{}", last[26]);
    assert!(csv.value(csv.rows.len() - 1, "cfl") > 1.0);
    // the checkpoint holds the last good state
    assert!(read_checkpoint(&cfg.checkpoint_path, Some(2)).is_ok());
}

#[test]
fn density_abort_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let mut state = State::equilibrium(&grid);
    state.rho = ScalarField::from_fn(&grid, |x| 0.02 + 0.5 * (1.0 + x[0].sin()));
    state.u = VectorField::from_fn(&grid, |x| [-5.0 * x[0].cos(), 0.0, 0.0]);
    let start = dir.path().join("start.ckpt");
    let ckpt = Checkpoint {
        state,
        gamma: 2.0,
        mu: 0.1,
        mode: Mode::Compressible,
    };
    write_checkpoint(&ckpt, &start).unwrap();
    let cfg = config_in(
        dir.path(),
        &format!(
            "n = 16\nmode = compressible\ndt = 0.05\nt_end = 2.5\ninit = checkpoint\ncheckpoint_in = {}",
            start.display()
        ),
    );
    let summary = run_simulation(&cfg).unwrap();
    assert_eq!(summary.exit_code(), EXIT_ABORT);
    let reason = summary.abort.unwrap();
    assert!(reason.contains("density positivity lost"), "{reason}");
    let csv = Csv::read(&cfg.csv_path);
    let last = csv.rows.last().unwrap();
    assert_eq!(last[26], reason);
    assert!(last[..26].iter().all(|v| v.parse::<f64>().is_ok()));
}

#[test]
fn runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let text = "n = 16\ndt = 1e-2\nt_end = 0.2\noutput_every = 5\ninit = taylor_green_perturbed\ndelta = 0.05\nseed = 11";
    let a = config_in(&dir.path().join(""), text);
    let mut b = a.clone();
    b.csv_path = dir.path().join("b.csv");
    b.checkpoint_path = dir.path().join("b.ckpt");
    run_simulation(&a).unwrap();
    run_simulation(&b).unwrap();
    assert_eq!(fs::read(&a.csv_path).unwrap(), fs::read(&b.csv_path).unwrap());
    assert_eq!(fs::read(&a.checkpoint_path).unwrap(), fs::read(&b.checkpoint_path).unwrap());
}

#[test]
fn restart_from_checkpoint_matches_straight_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = "n = 16\ndt = 1e-2\ninit = taylor_green_perturbed\ndelta = 0.05\nmode = compressible";
    let mut whole = config_in(dir.path(), &format!("{base}\nt_end = 0.2"));
    whole.checkpoint_path = dir.path().join("whole.ckpt");
    run_simulation(&whole).unwrap();

    let mut first = config_in(dir.path(), &format!("{base}\nt_end = 0.1"));
    first.checkpoint_path = dir.path().join("half.ckpt");
    run_simulation(&first).unwrap();
    let mut second = config_in(
        dir.path(),
        &format!(
            "n = 16\ndt = 1e-2\nmode = compressible\nt_end = 0.1\ninit = checkpoint\ncheckpoint_in = {}",
            first.checkpoint_path.display()
        ),
    );
    second.checkpoint_path = dir.path().join("second.ckpt");
    run_simulation(&second).unwrap();

    let a = read_checkpoint(&whole.checkpoint_path, None).unwrap().state;
    let b = read_checkpoint(&second.checkpoint_path, None).unwrap().state;
    assert!(a.max_abs_diff(&b) <= 1e-14, "{}", a.max_abs_diff(&b));
}

#[test]
fn checkpoint_dimension_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "n = 8\nt_end = 0.001");
    run_simulation(&cfg).unwrap();
    let cli = Cli::parse_from([
        "vela",
        "run",
        "-s",
        "dim=3",
        "-s",
        "n=8",
        "-s",
        "init=checkpoint",
        "-s",
        &format!("checkpoint_in={}", cfg.checkpoint_path.display()),
    ]);
    assert_eq!(execute(&cli, &mut Vec::new()), EXIT_CONFIG);
}

#[test]
fn check_passes_on_compatible_and_fails_on_corrupted_e() {
    let cfg = parse_config("n = 32\ninit = constraint_compatible").unwrap();
    let grid = cfg.grid().unwrap();
    let mut s = constraint_compatible(&grid, cfg.delta, cfg.seed).unwrap();
    let report = check_state(&s, &cfg).unwrap();
    assert!(report.passed(), "{}", report.render());

    // a localized bump in one entry breaks curl compatibility
    let bump: Vec<f64> = (0..grid.len())
        .map(|p| {
            let x = grid.coords(p);
            1e-2 * (-(x[0] - 3.0).powi(2) - (x[1] - 3.0).powi(2)).exp()
        })
        .collect();
    for (v, b) in s.e.components_mut()[0].iter_mut().zip(&bump) {
        *v += b;
    }
    let report = check_state(&s, &cfg).unwrap();
    assert!(!report.passed());
    assert!(!report.get("curl_compat_l2").unwrap().passed());
    let mut out = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ckpt");
    write_checkpoint(
        &Checkpoint {
            state: s,
            gamma: 2.0,
            mu: 0.1,
            mode: Mode::Incompressible,
        },
        &path,
    )
    .unwrap();
    let cli = Cli::parse_from(["vela", "check", "-s", "n=32", "--checkpoint", path.to_str().unwrap()]);
    assert_eq!(execute(&cli, &mut out), EXIT_FAILED);
    let text = String::from_utf8(out).unwrap();
    let curl = text.lines().find(|l| l.starts_with("curl_compat_l2")).unwrap();
    assert!(curl.ends_with("FAIL"), "{text}");
}

#[test]
fn check_equilibrium_passes_with_zero() {
    let mut out = Vec::new();
    let cli = Cli::parse_from(["vela", "check", "-s", "n=16"]);
    assert_eq!(execute(&cli, &mut out), EXIT_OK);
    let text = String::from_utf8(out).unwrap();
    for line in text.lines() {
        let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(value, 0.0, "{line}");
    }
}

#[test]
fn manufactured_run_tracks_the_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "n = 16\ndt = 1e-2\nt_end = 0.5\ninit = manufactured\noutput_every = 25");
    assert_eq!(run_simulation(&cfg).unwrap().exit_code(), EXIT_OK);
    let csv = Csv::read(&cfg.csv_path);
    // σ is not tracked under forcing
    assert!(csv.value(0, "sigma_consistency_l2").is_nan());
}

#[test]
fn binary_reports_config_errors_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "n = 32\n# fine\ngamma = 0.9\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vela"))
        .args(["check", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("gamma > 1"), "{err}");
}

#[test]
fn binary_info_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "n = 8\nt_end = 0.002");
    run_simulation(&cfg).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vela"))
        .args(["info", cfg.checkpoint_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2-D, n = 8"), "{text}");

    let out = Command::new(env!("CARGO_BIN_EXE_vela"))
        .args(["config", "-s", "mu=0.25"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_config(&text).unwrap().mu, 0.25);
}
