//! `pursuit`: command-line front end for the sensing-budget pursuit game.
//!
//! Every command writes its outputs plus a `<command>.manifest.json` into
//! `--out`. Exit status is 0 on success, 1 when a verification fails and 2
//! on usage or configuration errors. Worker threads follow
//! `RAYON_NUM_THREADS`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use pursuit_core::config::GameConfig;
use pursuit_core::engine::{format_sig9, round_sig9, write_trajectory_csv, Scenario};
use pursuit_core::payoff::{PayoffKind, PayoffSpec};
use pursuit_core::value::{self, ValueQuery};
use pursuit_core::verify::{self, DEFAULT_ORACLE_DT};
use pursuit_core::Error as CoreError;

#[derive(Parser, Debug)]
#[command(name = "pursuit", version, about = "Pursuit-evasion with intermittent, budgeted sensing")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Master seed; overrides the seed in `--config`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Game or scenario JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one game from a scenario file.
    Simulate,
    /// Tabulate the value bound V(rho, tau, ell) over a grid.
    ValueGrid(ValueGridArgs),
    /// Compare the two sensing-count formulas across nu.
    CompareNmax(CompareArgs),
    /// Payoff degradation and its exponential coefficient per budget.
    Degradation(DegradationArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum PhiArg {
    Hinge,
    QuadraticAboveCapture,
}

impl From<PhiArg> for PayoffKind {
    fn from(p: PhiArg) -> Self {
        match p {
            PhiArg::Hinge => PayoffKind::Hinge,
            PhiArg::QuadraticAboveCapture => PayoffKind::QuadraticAboveCapture,
        }
    }
}

/// `MIN:MAX:STEP`, or a single value.
#[derive(Clone, Copy, Debug, Serialize)]
struct Range {
    min: f64,
    max: f64,
    step: f64,
}

impl Range {
    fn points(&self) -> Vec<f64> {
        if self.min == self.max {
            return vec![self.min];
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        // snap to 1e-12 so that 0.05 * 3 prints as 0.15
        (0..count)
            .map(|i| ((self.min + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let r = match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            Range { min: v, max: v, step: 1.0 }
        }
        [a, b, c] => Range {
            min: num(a)?,
            max: num(b)?,
            step: num(c)?,
        },
        _ => return Err(format!("expected MIN:MAX:STEP or a single value, got {s:?}")),
    };
    if !(r.min.is_finite() && r.max.is_finite() && r.step.is_finite()) {
        return Err("range bounds must be finite".into());
    }
    if !(r.step > 0.0) {
        return Err(format!("step must be positive, got {}", r.step));
    }
    if r.max < r.min {
        return Err(format!("max {} is below min {}", r.max, r.min));
    }
    Ok(r)
}

#[derive(Args, Debug, Serialize)]
struct ValueGridArgs {
    /// Speed ratio; defaults to the config's, else 0.7.
    #[arg(long)]
    nu: Option<f64>,
    /// Capture radius; defaults to the config's, else 0.1.
    #[arg(long)]
    r_cap: Option<f64>,
    #[arg(long, value_parser = parse_range, default_value = "0:2:0.01")]
    rho: Range,
    #[arg(long, value_parser = parse_range, default_value = "0:3:0.01")]
    tau: Range,
    /// Remaining sensings, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    ell: Vec<u32>,
    #[arg(long, value_enum)]
    phi: Option<PhiArg>,
}

#[derive(Args, Debug, Serialize)]
struct CompareArgs {
    #[arg(long, default_value_t = 5.0)]
    rho0: f64,
    #[arg(long, default_value_t = 0.1)]
    r_cap: f64,
    #[arg(long, value_parser = parse_range, default_value = "0.05:0.95:0.05")]
    nu: Range,
}

#[derive(Args, Debug, Serialize)]
struct DegradationArgs {
    #[arg(long, default_value_t = 5.0)]
    rho0: f64,
    #[arg(long, default_value_t = 0.1)]
    r_cap: f64,
    /// t_f as a fraction of the no-sensing capture horizon (rho0 - r_cap)/(1 - nu).
    #[arg(long, default_value_t = 0.9)]
    tf_frac: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7,0.8")]
    nu: Vec<f64>,
    #[arg(long, value_enum, default_value = "hinge")]
    phi: PhiArg,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// One of pursuer, evader, jensen, capture_time, oracle, all.
    #[arg(default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Time step of the dense oracle simulator.
    #[arg(long, default_value_t = DEFAULT_ORACLE_DT)]
    oracle_dt: f64,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: Value,
    seed: Option<u64>,
    version: &'static str,
    outputs: Vec<PathBuf>,
    duration_secs: f64,
}

/// What a command that ran to completion reports back to `main`.
struct Done {
    status: u8,
    config: Value,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let name = match &cli.command {
        Command::Simulate => "simulate",
        Command::ValueGrid(_) => "value-grid",
        Command::CompareNmax(_) => "compare-nmax",
        Command::Degradation(_) => "degradation",
        Command::Verify(_) => "verify",
    };
    let result = fs::create_dir_all(&cli.common.out)
        .with_context(|| format!("cannot create {}", cli.common.out.display()))
        .and_then(|_| match &cli.command {
            Command::Simulate => cmd_simulate(&cli.common),
            Command::ValueGrid(a) => cmd_value_grid(&cli.common, a),
            Command::CompareNmax(a) => cmd_compare_nmax(&cli.common, a),
            Command::Degradation(a) => cmd_degradation(&cli.common, a),
            Command::Verify(a) => cmd_verify(&cli.common, a),
        });
    match result {
        Ok(done) => {
            let manifest = RunManifest {
                command: name.to_string(),
                config: done.config,
                seed: done.seed,
                version: env!("CARGO_PKG_VERSION"),
                outputs: done.outputs,
                duration_secs: started.elapsed().as_secs_f64(),
            };
            let path = cli.common.out.join(format!("{name}.manifest.json"));
            if let Err(e) = write_json(&path, &manifest) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            ExitCode::from(done.status)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Every float in `v` rounded to 9 significant digits.
fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round_sig9(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn read_config_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_error(path: &Path, e: serde_json::Error) -> anyhow::Error {
    let text = e.to_string();
    let message = text.split(" at line ").next().unwrap_or(&text);
    anyhow!("{}:{}:{}: {}", path.display(), e.line(), e.column(), message)
}

fn load_game(common: &Common) -> anyhow::Result<Option<GameConfig>> {
    let Some(path) = &common.config else {
        return Ok(None);
    };
    let text = read_config_text(path)?;
    let game: GameConfig = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    Ok(Some(game))
}

fn check_nu_rcap(nu: f64, r_cap: f64) -> anyhow::Result<()> {
    if !(nu > 0.0 && nu < 1.0) {
        bail!("nu must lie in (0, 1), got {nu}");
    }
    if !(r_cap > 0.0) || !r_cap.is_finite() {
        bail!("r_cap must be positive, got {r_cap}");
    }
    Ok(())
}

fn cmd_simulate(common: &Common) -> anyhow::Result<Done> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("simulate needs --config <scenario.json>"))?;
    let text = read_config_text(path)?;
    let mut scenario = Scenario::from_json(&text).map_err(|e| parse_error(path, e))?;
    if let Some(seed) = common.seed {
        scenario.game.seed = seed;
    }
    scenario.game.validate()?;
    let result = scenario.run()?;

    let outcome_path = common.out.join("outcome.json");
    write_json(&outcome_path, &result.outcome)?;
    let traj_path = common.out.join("trajectory.csv");
    let file = fs::File::create(&traj_path).with_context(|| format!("cannot write {}", traj_path.display()))?;
    write_trajectory_csv(file, &result.pursuer, &result.evader)?;

    let o = &result.outcome;
    match o.capture_time {
        Some(t) if o.captured => println!("captured t={}", format_sig9(t)),
        _ => println!("payoff = {}", format_sig9(o.payoff)),
    }
    Ok(Done {
        status: 0,
        config: serde_json::to_value(&scenario)?,
        seed: Some(scenario.game.seed),
        outputs: vec![outcome_path, traj_path],
    })
}

fn cmd_value_grid(common: &Common, a: &ValueGridArgs) -> anyhow::Result<Done> {
    let game = load_game(common)?;
    let nu = a.nu.or(game.as_ref().map(|g| g.nu)).unwrap_or(0.7);
    let r_cap = a.r_cap.or(game.as_ref().map(|g| g.r_cap)).unwrap_or(0.1);
    let kind = a
        .phi
        .map(PayoffKind::from)
        .or(game.as_ref().map(|g| g.phi.kind))
        .unwrap_or_default();
    check_nu_rcap(nu, r_cap)?;
    if a.rho.min < 0.0 || a.tau.min < 0.0 {
        bail!("rho and tau ranges must be non-negative");
    }
    let phi = PayoffSpec { kind, r_cap };

    let mut queries = Vec::new();
    for &ell in &a.ell {
        for rho in a.rho.points() {
            for tau in a.tau.points() {
                queries.push(ValueQuery::new(rho, tau, ell)?);
            }
        }
    }
    let bounds: Vec<_> = queries
        .par_iter()
        .map(|&q| value::v_bound(q, &phi, nu, r_cap))
        .collect();

    let path = common.out.join("value_grid.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["rho", "tau", "ell", "value", "case_tag", "is_tight"])?;
    for (q, b) in queries.iter().zip(&bounds) {
        w.write_record([
            format_sig9(q.rho),
            format_sig9(q.tau),
            q.ell.to_string(),
            format_sig9(b.value),
            b.case_tag.as_str().to_string(),
            b.is_tight.to_string(),
        ])?;
    }
    w.flush()?;
    let config = json!({
        "nu": nu, "r_cap": r_cap, "phi": { "kind": kind },
        "rho": a.rho, "tau": a.tau, "ell": a.ell,
    });
    Ok(Done {
        status: 0,
        config,
        seed: None,
        outputs: vec![path],
    })
}

fn cmd_compare_nmax(common: &Common, a: &CompareArgs) -> anyhow::Result<Done> {
    if a.nu.min <= 0.0 || a.nu.max >= 1.0 {
        bail!("nu range must stay inside (0, 1), got [{}, {}]", a.nu.min, a.nu.max);
    }
    if !(a.r_cap > 0.0) || !(a.rho0 > a.r_cap) {
        bail!("need 0 < r_cap < rho0, got r_cap = {}, rho0 = {}", a.r_cap, a.rho0);
    }
    let path = common.out.join("compare_nmax.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["nu", "aleem_n_max", "prop1_n_max"])?;
    for nu in a.nu.points() {
        let aleem = value::aleem_n_max(a.rho0, a.r_cap, nu)?;
        let prop1 = value::prop1_n_max(a.rho0, a.r_cap, nu)?;
        w.write_record([format_sig9(nu), aleem.to_string(), prop1.to_string()])?;
    }
    w.flush()?;
    Ok(Done {
        status: 0,
        config: serde_json::to_value(a)?,
        seed: None,
        outputs: vec![path],
    })
}

fn cmd_degradation(common: &Common, a: &DegradationArgs) -> anyhow::Result<Done> {
    if !(a.tf_frac >= 0.0) || !a.tf_frac.is_finite() {
        bail!("tf-frac must be non-negative, got {}", a.tf_frac);
    }
    let path = common.out.join("degradation.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["nu", "n", "beta", "delta", "continuous_payoff", "n_star"])?;
    let mut status = 0;
    for &nu in &a.nu {
        check_nu_rcap(nu, a.r_cap)?;
        let phi = PayoffSpec {
            kind: a.phi.into(),
            r_cap: a.r_cap,
        };
        let t_f = a.tf_frac * value::capture_horizon(a.rho0, a.r_cap, nu);
        let report = match value::degradation(a.rho0, t_f, nu, a.r_cap, &phi) {
            Ok(r) => r,
            Err(e @ CoreError::RegionNotCovered(_)) => {
                eprintln!("warning: skipping nu={nu}: {e}");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for row in &report.rows {
            if row.jensen_holds == Some(false) {
                eprintln!(
                    "lower bound violated: nu={nu} n={}: delta {} < beta*continuous_payoff",
                    row.n,
                    format_sig9(row.delta)
                );
                status = 1;
            }
            w.write_record([
                format_sig9(nu),
                row.n.to_string(),
                row.beta.map(format_sig9).unwrap_or_default(),
                format_sig9(row.delta),
                format_sig9(report.continuous_payoff),
                report.n_star.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(Done {
        status,
        config: serde_json::to_value(a)?,
        seed: None,
        outputs: vec![path],
    })
}

fn cmd_verify(common: &Common, a: &VerifyArgs) -> anyhow::Result<Done> {
    if a.suite != "all" && !verify::SUITES.contains(&a.suite.as_str()) {
        bail!(
            "unknown suite {:?}; expected one of {:?} or \"all\"",
            a.suite,
            verify::SUITES
        );
    }
    if !(a.oracle_dt > 0.0) {
        bail!("oracle-dt must be positive, got {}", a.oracle_dt);
    }
    let seed = common
        .seed
        .or(load_game(common)?.map(|g| g.seed))
        .unwrap_or(0);
    let reports = verify::run_suite(&a.suite, a.trials, seed, a.oracle_dt)?;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        println!(
            "{} {} trials={} violations={} worst={:.3e}",
            r.suite,
            if r.passed { "PASS" } else { "FAIL" },
            r.trials,
            r.violation_count,
            r.worst_violation
        );
    }
    let path = common.out.join("verify_report.json");
    write_json(&path, &reports)?;
    Ok(Done {
        status: if passed { 0 } else { 1 },
        config: serde_json::to_value(a)?,
        seed: Some(seed),
        outputs: vec![path],
    })
}
