//! Batch driver for the heatlab library: reads a plain-text config,
//! dispatches one subcommand, and writes a deterministic artifact bundle
//! (`results.json` with sorted keys, one CSV per table, `plot.gp`).
//!
//! Exit codes: 0 — success; 1 — a verdict failed (membership violated when
//! asserted, a check did not pass) or a numerical diagnostic fired (error
//! bar above `--tol`); 2 — usage error (bad flags, unreadable or malformed
//! config, unwritable output directory). Artifacts are still written on
//! verdict failures so the failure is documented.

use clap::{Parser, Subcommand};
use heatlab::config::{Config, ConfigError, Section};
use heatlab::estimator::{
    ball_time_samples, pointwise_envelope_check, weighted_spacetime_l2, HeatSolution,
    IntegralReport,
};
use heatlab::growth::{
    classify_curvature, classify_curvature_numeric, classify_osgood, classify_osgood_numeric,
    CurvatureFunction, DoublingRow, GrowthError, GrowthFunction, OsgoodVerdict,
};
use heatlab::kernel::{evolve_point, BaseProfile, InitialData, KernelError, Point, SpikeSpec};
use heatlab::logscalar::LogScalar;
use heatlab::report::{fmt_f64, write_report, ReportError, Table};
use heatlab::schedule::{
    build_schedule, small_time_vanishing_probe, telescoped_bound, ProbeParams, ScheduleError,
    ScheduleParams,
};
use heatlab::spikes::{verify_example, Section3Config, SpikesError};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "heatlab",
    version,
    about = "Growth classes for heat-flow solutions: classification, schedules, evolution, and estimates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Plain-text configuration: `[section]` headers over `key = value`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for results.json, the CSV tables, and plot.gp.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for any randomized sampling (envelope sample clouds).
    #[arg(long, global = true, value_name = "N", default_value_t = 7)]
    seed: u64,
    /// Worker threads for independent sub-tasks (fixed chunking, so the
    /// artifact bytes do not depend on this).
    #[arg(long, global = true, value_name = "K", default_value_t = 1)]
    threads: usize,
    /// Accuracy demand: any report whose log-scale error estimate exceeds
    /// this fails the run with a diagnostic.
    #[arg(long, global = true, value_name = "X", default_value_t = 1e-2)]
    tol: f64,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Cmd {
    /// Classify growth/curvature divergence integrals, analytic vs doubling probe.
    Osgood,
    /// Run the doubling budget schedule for a growth law.
    Schedule,
    /// Evolve initial data and sample it on a (time, radius) grid.
    Evolve,
    /// Weighted space-time integrals over balls, optional membership/probe/envelope.
    Estimate,
    /// The spike-family verification: lower bounds, envelope, membership, violations.
    Example,
    /// Run every configured section and emit one combined bundle.
    Report,
}

enum RunError {
    /// Exit 2: the run never got off the ground.
    Usage(String),
    /// Exit 1: the run executed and something numerical went wrong.
    Failure(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> RunError {
        RunError::Usage(e.to_string())
    }
}
impl From<GrowthError> for RunError {
    fn from(e: GrowthError) -> RunError {
        RunError::Usage(e.to_string())
    }
}
impl From<KernelError> for RunError {
    fn from(e: KernelError) -> RunError {
        RunError::Usage(e.to_string())
    }
}
impl From<SpikesError> for RunError {
    fn from(e: SpikesError) -> RunError {
        RunError::Usage(e.to_string())
    }
}
impl From<ScheduleError> for RunError {
    fn from(e: ScheduleError) -> RunError {
        RunError::Usage(e.to_string())
    }
}
impl From<ReportError> for RunError {
    fn from(e: ReportError) -> RunError {
        RunError::Usage(e.to_string())
    }
}

/// Everything one subcommand produces before artifacts hit disk.
struct RunOutput {
    results: Value,
    tables: Vec<Table>,
    /// False ⇒ exit 1 after the artifacts are written.
    verdict_ok: bool,
    /// Numerical diagnostics (error bars above --tol); non-empty ⇒ exit 1.
    diagnostics: Vec<String>,
}

struct RunConfig {
    seed: u64,
    threads: usize,
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli.out.clone();
    match run(cli) {
        Ok(output) => {
            if let Err(e) = write_report(&out_dir, &output.results, &output.tables) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            for d in &output.diagnostics {
                eprintln!("diagnostic: {d}");
            }
            if output.verdict_ok && output.diagnostics.is_empty() {
                println!("ok: artifacts in {}", out_dir.display());
                ExitCode::SUCCESS
            } else {
                println!("FAILED: see {}", out_dir.join("results.json").display());
                ExitCode::from(1)
            }
        }
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<RunOutput, RunError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(RunError::Usage(format!(
            "--tol must be a positive number, got {}",
            cli.tol
        )));
    }
    if cli.threads == 0 {
        return Err(RunError::Usage("--threads must be at least 1".to_string()));
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| RunError::Usage("--config PATH is required".to_string()))?;
    let cfg = Config::from_file(path)?;
    let rc = RunConfig {
        seed: cli.seed,
        threads: cli.threads,
        tol: cli.tol,
    };
    match cli.cmd {
        Cmd::Osgood => run_osgood(&cfg, &rc),
        Cmd::Schedule => run_schedule(&cfg, &rc),
        Cmd::Evolve => run_evolve(&cfg, &rc),
        Cmd::Estimate => run_estimate(&cfg, &rc),
        Cmd::Example => run_example(&cfg, &rc),
        Cmd::Report => run_report(&cfg, &rc),
    }
}

/// Map `f` over `items` on up to `threads` workers, one contiguous chunk
/// each; results come back in input order whatever the thread count, so
/// artifacts never depend on `--threads`.
fn map_chunked<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = threads.max(1).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let mut parts: Vec<Vec<U>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(|| c.iter().map(&f).collect::<Vec<U>>()))
            .collect();
        parts = handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect();
    });
    parts.into_iter().flatten().collect()
}

/// `r:v` pairs, e.g. `points = 0:1 0.5:0.3 1:0`.
fn parse_points(sec: &Section, key: &str) -> Result<Vec<(f64, f64)>, RunError> {
    let raw = sec.require(key)?;
    let mut pts = Vec::new();
    for tok in raw.split([' ', '\t', ',']).filter(|s| !s.is_empty()) {
        let (r, v) = tok.split_once(':').ok_or_else(|| {
            RunError::Usage(format!("[{}] {key}: expected r:v pairs, got `{tok}`", sec.name))
        })?;
        let pair = (r.parse::<f64>(), v.parse::<f64>());
        match pair {
            (Ok(r), Ok(v)) if r.is_finite() && v.is_finite() => pts.push((r, v)),
            _ => {
                return Err(RunError::Usage(format!(
                    "[{}] {key}: `{tok}` is not a pair of finite numbers",
                    sec.name
                )))
            }
        }
    }
    Ok(pts)
}

/// Growth family from `family`/`c`/`beta`/`gamma`/`points` keys.
fn growth_from(sec: &Section) -> Result<GrowthFunction, RunError> {
    let c = sec.f64("c")?.unwrap_or(1.0);
    Ok(match sec.require("family")? {
        "power" => GrowthFunction::power(c, sec.require_f64("beta")?)?,
        "power_log" => GrowthFunction::power_log(
            c,
            sec.require_f64("beta")?,
            sec.f64("gamma")?.unwrap_or(1.0),
        )?,
        "constant" => GrowthFunction::constant(c)?,
        "table" => GrowthFunction::table(&parse_points(sec, "points")?)?,
        other => {
            return Err(RunError::Usage(format!(
                "[{}] family = {other}: expected power, power_log, constant, or table",
                sec.name
            )))
        }
    })
}

/// Curvature family from the same keys.
fn curvature_from(sec: &Section) -> Result<CurvatureFunction, RunError> {
    let c = sec.f64("c")?.unwrap_or(1.0);
    Ok(match sec.require("family")? {
        "power" => CurvatureFunction::power(c, sec.require_f64("beta")?)?,
        "power_log" => CurvatureFunction::power_log(
            c,
            sec.require_f64("beta")?,
            sec.f64("gamma")?.unwrap_or(1.0),
        )?,
        "constant" => CurvatureFunction::constant(c)?,
        "table" => CurvatureFunction::table(&parse_points(sec, "points")?)?,
        other => {
            return Err(RunError::Usage(format!(
                "[{}] family = {other}: expected power, power_log, constant, or table",
                sec.name
            )))
        }
    })
}

/// Initial data from a `[data]` section: either the `section3 = n i_max`
/// spike-family shorthand, or `base = ...` plus repeated `spike =` lines.
fn data_from(sec: &Section) -> Result<InitialData, RunError> {
    if let Some(raw) = sec.get("section3") {
        let parts: Vec<u32> = raw
            .split_whitespace()
            .map(|s| s.parse::<u32>().ok())
            .collect::<Option<_>>()
            .ok_or_else(|| {
                RunError::Usage(format!(
                    "[{}] section3 = {raw}: expected two integers `n i_max`",
                    sec.name
                ))
            })?;
        if parts.len() != 2 {
            return Err(RunError::Usage(format!(
                "[{}] section3 = {raw}: expected two integers `n i_max`",
                sec.name
            )));
        }
        let cfg = Section3Config::new(parts[0], parts[1])?;
        return Ok(heatlab::spikes::build_example(&cfg)?);
    }
    let dim = sec.require_u32("dim")?;
    let base = match sec.get("base").unwrap_or("zero") {
        "zero" => BaseProfile::Zero,
        "constant" => BaseProfile::Constant {
            level: sec.require_f64("level")?,
        },
        "gaussian" => BaseProfile::Gaussian {
            amplitude: sec.require_f64("amplitude")?,
            sigma: sec.require_f64("sigma")?,
        },
        "ball" => BaseProfile::BallIndicator {
            radius: sec.require_f64("radius")?,
            height: sec.require_f64("height")?,
        },
        "table" => BaseProfile::Table {
            pts: parse_points(sec, "points")?,
        },
        other => {
            return Err(RunError::Usage(format!(
                "[{}] base = {other}: expected zero, constant, gaussian, ball, or table",
                sec.name
            )))
        }
    };
    let mut spikes = Vec::new();
    for raw in sec.all("spike") {
        let parts: Vec<f64> = raw
            .split_whitespace()
            .map(|s| s.parse::<f64>().ok())
            .collect::<Option<_>>()
            .unwrap_or_default();
        if parts.len() != 4 {
            return Err(RunError::Usage(format!(
                "[{}] spike = {raw}: expected `center inner outer ln_height`",
                sec.name
            )));
        }
        spikes.push(SpikeSpec {
            center: parts[0],
            inner_radius: parts[1],
            outer_radius: parts[2],
            height: LogScalar::exp_ln(parts[3]),
        });
    }
    Ok(InitialData::new(dim, base, spikes)?)
}

fn verdict_json(v: &OsgoodVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

fn doubling_table(rows: &[DoublingRow]) -> Table {
    let mut t = Table::new(
        "osgood_doubling",
        &["k", "r_hi", "ln_increment", "partial_integral"],
    )
    .plot(1, 4);
    for r in rows {
        t.push(vec![
            r.k.to_string(),
            fmt_f64(r.r_hi),
            fmt_f64(r.ln_increment),
            fmt_f64(r.partial_integral),
        ]);
    }
    t
}

fn run_osgood(cfg: &Config, _rc: &RunConfig) -> Result<RunOutput, RunError> {
    let sec = cfg.require_section("osgood")?;
    let kind = sec.get("kind").unwrap_or("growth");
    let (family, analytic, numeric, rows) = match kind {
        "growth" => {
            let l = growth_from(sec)?;
            let (num, rows) = classify_osgood_numeric(&l);
            (l.to_string(), classify_osgood(&l)?, num, rows)
        }
        "curvature" => {
            let k = curvature_from(sec)?;
            let (num, rows) = classify_curvature_numeric(&k);
            (k.to_string(), classify_curvature(&k)?, num, rows)
        }
        other => {
            return Err(RunError::Usage(format!(
                "[osgood] kind = {other}: expected growth or curvature"
            )))
        }
    };
    let results = json!({
        "family": family,
        "kind": kind,
        "verdict": analytic.divergence,
        "analytic": verdict_json(&analytic),
        "numeric": verdict_json(&numeric),
        "agree": analytic.divergence == numeric.divergence,
    });
    Ok(RunOutput {
        results,
        tables: vec![doubling_table(&rows)],
        verdict_ok: true,
        diagnostics: Vec::new(),
    })
}

fn run_schedule(cfg: &Config, _rc: &RunConfig) -> Result<RunOutput, RunError> {
    let sec = cfg.require_section("schedule")?;
    let l = growth_from(sec)?;
    let params = ScheduleParams {
        r0: sec.f64("r0")?.unwrap_or(1.0),
        tau0: sec.require_f64("tau0")?,
        max_steps: sec.usize("max_steps")?.unwrap_or(100_000),
    };
    let res = build_schedule(&l, params)?;
    // Optional telescoped ceiling for a cutoff order m and weight a.
    let telescoped = match (sec.u32("m")?, sec.f64("a")?) {
        (Some(m), a) => Some(telescoped_bound(
            m,
            a.unwrap_or(0.0),
            params.tau0.ln(),
            params.r0.ln(),
        )?),
        (None, _) => None,
    };
    let mut t = Table::new("schedule", &["i", "ln_r", "tau", "ln_step"]).plot(1, 3);
    for row in &res.rows {
        t.push(vec![
            row.i.to_string(),
            fmt_f64(row.ln_r),
            fmt_f64(row.tau),
            fmt_f64(row.ln_step),
        ]);
    }
    let results = json!({
        "growth": l.to_string(),
        "r0": params.r0,
        "tau0": params.tau0,
        "max_steps": params.max_steps,
        "rows": res.rows.len(),
        "terminated": res.exhausted,
        "final_tau": res.final_tau,
        "telescoped_bound": telescoped,
    });
    Ok(RunOutput {
        results,
        tables: vec![t],
        verdict_ok: true,
        diagnostics: Vec::new(),
    })
}

fn run_evolve(cfg: &Config, rc: &RunConfig) -> Result<RunOutput, RunError> {
    let data = data_from(cfg.require_section("data")?)?;
    let sec = cfg.require_section("evolve")?;
    let times = sec.require_f64_list("times")?;
    let radii = sec.require_f64_list("radii")?;
    if times.iter().any(|t| *t <= 0.0) || radii.iter().any(|r| *r < 0.0) {
        return Err(RunError::Usage(
            "[evolve] needs times > 0 and radii >= 0".to_string(),
        ));
    }
    let grid: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| radii.iter().map(move |&r| (t, r)))
        .collect();
    let values = map_chunked(&grid, rc.threads, |&(t, r)| {
        evolve_point(&data, Point { axial: r, perp: 0.0 }, t)
    });
    let mut table = Table::new("evolution", &["t", "r", "sign", "ln_value"]).plot(2, 4);
    for ((t, r), v) in grid.iter().zip(&values) {
        table.push(vec![
            fmt_f64(*t),
            fmt_f64(*r),
            v.sign().as_char().to_string(),
            fmt_f64(v.ln_mag()),
        ]);
    }
    // Construction already validated the data, so a norm failure here is
    // a numerical problem, not a config problem.
    let l1 = data
        .l1_norm()
        .map_err(|e| RunError::Failure(e.to_string()))?;
    let results = json!({
        "dim": data.dim,
        "l1_ln": l1,
        "linf_ln": data.linf_norm(),
        "times": times,
        "radii": radii,
        "samples": grid.len(),
    });
    Ok(RunOutput {
        results,
        tables: vec![table],
        verdict_ok: true,
        diagnostics: Vec::new(),
    })
}

fn report_cells(r: &IntegralReport) -> Vec<String> {
    let (allowed, margin, inside) = match &r.comparison {
        Some(c) => (
            fmt_f64(c.ln_allowed),
            fmt_f64(c.margin),
            c.inside.to_string(),
        ),
        None => (String::new(), String::new(), String::new()),
    };
    vec![
        fmt_f64(r.radius),
        fmt_f64(r.ln_value.ln_mag()),
        fmt_f64(r.quadrature_error_estimate),
        allowed,
        margin,
        inside,
    ]
}

fn run_estimate(cfg: &Config, rc: &RunConfig) -> Result<RunOutput, RunError> {
    let data = data_from(cfg.require_section("data")?)?;
    let sec = cfg.require_section("estimate")?;
    let a = sec.f64("a")?.unwrap_or(0.0);
    let radii = sec.require_f64_list("radii")?;
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii.iter().any(|r| *r <= 0.0) {
        return Err(RunError::Usage(
            "[estimate] radii must be positive and strictly increasing".to_string(),
        ));
    }
    let budget = match sec.get("budget") {
        None => None,
        Some("constant") => Some(GrowthFunction::constant(sec.require_f64("budget_c")?)?),
        Some("power") => Some(GrowthFunction::power(
            sec.f64("budget_c")?.unwrap_or(1.0),
            sec.require_f64("budget_beta")?,
        )?),
        Some("power_log") => Some(GrowthFunction::power_log(
            sec.f64("budget_c")?.unwrap_or(1.0),
            sec.require_f64("budget_beta")?,
            sec.f64("budget_gamma")?.unwrap_or(1.0),
        )?),
        Some(other) => {
            return Err(RunError::Usage(format!(
                "[estimate] budget = {other}: expected constant, power, or power_log"
            )))
        }
    };
    let assert_inside = sec.bool("assert_inside")?.unwrap_or(false);
    if assert_inside && budget.is_none() {
        return Err(RunError::Usage(
            "[estimate] assert_inside needs a budget family".to_string(),
        ));
    }
    let sol = HeatSolution::new(data.clone());
    let reports = map_chunked(&radii, rc.threads, |&r| {
        weighted_spacetime_l2(&sol, a, r, budget.as_ref())
    });

    let mut diagnostics = Vec::new();
    for r in &reports {
        if !(r.quadrature_error_estimate <= rc.tol) {
            diagnostics.push(format!(
                "radius {}: error estimate {:.3e} exceeds --tol {:.3e}",
                r.radius, r.quadrature_error_estimate, rc.tol
            ));
        }
    }
    let mut tables = Vec::new();
    let mut est = Table::new(
        "estimates",
        &["radius", "ln_value", "error_ln", "allowed", "margin", "inside"],
    );
    for r in &reports {
        est.push(report_cells(r));
    }
    tables.push(est);

    // Optional small-time probe along halving times.
    let probe = if sec.bool("probe")?.unwrap_or(false) {
        let params = ProbeParams {
            radius: sec.f64("probe_radius")?.unwrap_or(radii[0]),
            t0: sec.f64("probe_t0")?.unwrap_or(0.25),
            steps: sec.usize("probe_steps")?.unwrap_or(10),
        };
        let rep = small_time_vanishing_probe(&sol, params);
        let mut t = Table::new("probe", &["t", "sign", "ln_scaled_energy"]).plot(1, 3);
        for row in &rep.rows {
            t.push(vec![
                fmt_f64(row.t),
                row.scaled_energy.sign().as_char().to_string(),
                fmt_f64(row.scaled_energy.ln_mag()),
            ]);
        }
        tables.push(t);
        Some(rep)
    } else {
        None
    };

    // Optional pointwise check against the mass-smoothing ceiling.
    let envelope = match sec.usize("envelope_samples")?.unwrap_or(0) {
        0 => None,
        count => {
            let r_max = radii.last().copied().expect("radii nonempty");
            let samples = ball_time_samples(data.dim, r_max, 1e-4, 1.0, count, rc.seed);
            let env_data = data.clone();
            let env = move |_r: f64, t: f64| {
                env_data.linf_envelope(t).expect("envelope needs finite mass")
            };
            Some(pointwise_envelope_check(&sol, &env, &samples))
        }
    };

    let inside_all = reports
        .iter()
        .all(|r| r.comparison.as_ref().is_none_or(|c| c.inside));
    let verdict_ok = !assert_inside || inside_all;
    let results = json!({
        "a": a,
        "radii": radii,
        "budget": budget.as_ref().map(|b| b.to_string()),
        "assert_inside": assert_inside,
        "inside_all": inside_all,
        "reports": reports,
        "probe": probe,
        "envelope": envelope,
    });
    Ok(RunOutput {
        results,
        tables,
        verdict_ok,
        diagnostics,
    })
}

fn run_example(cfg: &Config, _rc: &RunConfig) -> Result<RunOutput, RunError> {
    let sec = cfg.require_section("example")?;
    let n = sec.require_u32("n")?;
    let i_max = sec.require_u32("i_max")?;
    let a = sec.f64("a")?.unwrap_or(2.0);
    let cfg3 = Section3Config::new(n, i_max)?;
    let verdict = verify_example(&cfg3, a)?;

    let mut lower = Table::new(
        "lower_bounds",
        &["i", "radius", "ln_bound", "ln_computed", "target_exponent", "passed"],
    )
    .plot(1, 4);
    for r in &verdict.lower_bounds {
        lower.push(vec![
            r.i.to_string(),
            fmt_f64(r.radius),
            fmt_f64(r.ln_bound),
            fmt_f64(r.ln_computed),
            fmt_f64(r.target_exponent),
            r.passed.to_string(),
        ]);
    }
    let mut member = Table::new(
        "membership",
        &["radius", "ln_value", "error_ln", "allowed", "margin", "inside"],
    );
    for r in &verdict.membership {
        member.push(report_cells(r));
    }
    let mut viol = Table::new(
        "violations",
        &["growth_constant", "first_violating_index", "persistent"],
    );
    for v in &verdict.violations {
        viol.push(vec![
            fmt_f64(v.growth_constant),
            v.first_violating_index
                .map(|i| i.to_string())
                .unwrap_or_default(),
            v.persistent.to_string(),
        ]);
    }

    // The four checks are the whole contract here; membership already
    // folds its error bar into the inside test, so --tol does not gate
    // this subcommand. (A ball through a spike center has a legitimately
    // wide bracket while the slice is patch-bounded one-sidedly.)
    let verdict_ok = verdict.passed;
    Ok(RunOutput {
        results: serde_json::to_value(&verdict).expect("verdict serializes"),
        tables: vec![lower, member, viol],
        verdict_ok,
        diagnostics: Vec::new(),
    })
}

/// Umbrella: run whichever of the other subcommands have their sections
/// configured, nesting each bundle under its name.
fn run_report(cfg: &Config, rc: &RunConfig) -> Result<RunOutput, RunError> {
    let mut results = serde_json::Map::new();
    let mut tables = Vec::new();
    let mut verdict_ok = true;
    let mut diagnostics = Vec::new();
    let mut ran = Vec::new();
    let runners: [(&str, bool, fn(&Config, &RunConfig) -> Result<RunOutput, RunError>); 5] = [
        ("osgood", cfg.section("osgood").is_some(), run_osgood),
        ("schedule", cfg.section("schedule").is_some(), run_schedule),
        (
            "evolve",
            cfg.section("evolve").is_some() && cfg.section("data").is_some(),
            run_evolve,
        ),
        (
            "estimate",
            cfg.section("estimate").is_some() && cfg.section("data").is_some(),
            run_estimate,
        ),
        ("example", cfg.section("example").is_some(), run_example),
    ];
    for (name, present, runner) in runners {
        if !present {
            continue;
        }
        let out = runner(cfg, rc)?;
        results.insert(name.to_string(), out.results);
        tables.extend(out.tables);
        verdict_ok &= out.verdict_ok;
        diagnostics.extend(out.diagnostics);
        ran.push(name);
    }
    if ran.is_empty() {
        return Err(RunError::Usage(
            "report: no runnable sections in the config".to_string(),
        ));
    }
    Ok(RunOutput {
        results: Value::Object(results),
        tables,
        verdict_ok,
        diagnostics,
    })
}
