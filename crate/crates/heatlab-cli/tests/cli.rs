//! End-to-end runs of the `heatlab` binary: exit codes, artifact layout,
//! verdicts in results.json, and byte-determinism across repeated runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_heatlab")
}

/// Fresh scratch directory per test, cleaned up by the caller at the end
/// (left in place on failure for inspection).
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("heatlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg_path = dir.join("run.cfg");
    std::fs::write(&cfg_path, config).unwrap();
    let out_dir = dir.join("out");
    Command::new(bin())
        .args(args)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .expect("binary runs")
}

fn results_json(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("out/results.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn osgood_power_two_is_divergent_with_exit_zero() {
    let dir = scratch("osgood");
    let out = run_in(
        &dir,
        "[osgood]\nfamily = power\nc = 1\nbeta = 2\n",
        &["osgood"],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = results_json(&dir);
    assert_eq!(v["verdict"], "Divergent");
    assert_eq!(v["agree"], true);
    for f in ["results.json", "osgood_doubling.csv", "plot.gp"] {
        assert!(dir.join("out").join(f).exists(), "missing {f}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn schedule_quadratic_growth_terminates_in_64_rows() {
    let dir = scratch("schedule");
    let out = run_in(
        &dir,
        "[schedule]\nfamily = power\nc = 1\nbeta = 2\ntau0 = 1\n",
        &["schedule"],
    );
    assert!(out.status.success());
    let v = results_json(&dir);
    assert_eq!(v["rows"], 64);
    assert_eq!(v["terminated"], true);
    let csv = std::fs::read_to_string(dir.join("out/schedule.csv")).unwrap();
    // Header plus one line per doubling step, CRLF-terminated.
    assert_eq!(csv.matches("\r\n").count(), 65);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn evolve_samples_the_whole_grid() {
    let dir = scratch("evolve");
    let out = run_in(
        &dir,
        "[data]\ndim = 3\nbase = gaussian\namplitude = 1\nsigma = 1\n\n\
         [evolve]\ntimes = 0.1, 1\nradii = 0 1 2\n",
        &["evolve"],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = results_json(&dir);
    assert_eq!(v["samples"], 6);
    let csv = std::fs::read_to_string(dir.join("out/evolution.csv")).unwrap();
    assert_eq!(csv.matches("\r\n").count(), 7);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn estimate_membership_violation_exits_one_when_asserted() {
    let dir = scratch("violate");
    // A ceiling of e^{-1000} is far below the Gaussian's energy, so the
    // asserted membership must fail — after writing the artifacts.
    let out = run_in(
        &dir,
        "[data]\ndim = 2\nbase = gaussian\namplitude = 1.3\nsigma = 0.8\n\n\
         [estimate]\na = 1\nradii = 1.5\nbudget = constant\nbudget_c = -1000\nassert_inside = true\n",
        &["estimate"],
    );
    assert_eq!(out.status.code(), Some(1));
    let v = results_json(&dir);
    assert_eq!(v["inside_all"], false);
    assert_eq!(v["reports"][0]["comparison"]["inside"], false);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn example_runs_all_four_checks_to_a_passing_verdict() {
    let dir = scratch("example");
    let out = run_in(&dir, "[example]\nn = 3\ni_max = 2\na = 2\n", &["example"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = results_json(&dir);
    assert_eq!(v["passed"], true);
    assert_eq!(v["lower_bounds"].as_array().unwrap().len(), 2);
    assert_eq!(v["membership"].as_array().unwrap().len(), 3);
    assert_eq!(v["envelope"]["violations"].as_array().unwrap().len(), 0);
    for f in ["lower_bounds.csv", "membership.csv", "violations.csv"] {
        assert!(dir.join("out").join(f).exists(), "missing {f}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_config_and_seed_give_byte_identical_artifacts() {
    let dir = scratch("determinism");
    let cfg = "[data]\ndim = 2\nbase = gaussian\namplitude = 1\nsigma = 0.7\n\n\
               [estimate]\na = 1\nradii = 1 2\nenvelope_samples = 50\nprobe = true\n";
    let run = |sub: &str, seeds: &str, threads: &str| {
        run_in(&dir, cfg, &[sub, "--seed", seeds, "--threads", threads])
    };
    assert!(run("estimate", "11", "1").status.success());
    let artifacts: Vec<PathBuf> = ["results.json", "estimates.csv", "probe.csv", "plot.gp"]
        .iter()
        .map(|f| dir.join("out").join(f))
        .collect();
    let first: Vec<Vec<u8>> = artifacts.iter().map(|p| std::fs::read(p).unwrap()).collect();
    // Same seed, different thread count: bytes must not move.
    assert!(run("estimate", "11", "3").status.success());
    for (p, old) in artifacts.iter().zip(&first) {
        assert_eq!(
            &std::fs::read(p).unwrap(),
            old,
            "{} changed across identical runs",
            p.display()
        );
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    let dir = scratch("usage");
    // No --config at all.
    let out = Command::new(bin()).arg("osgood").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Malformed config line.
    let out = run_in(&dir, "[osgood]\nfamily power\n", &["osgood"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // Section for a different subcommand than requested.
    let out = run_in(&dir, "[schedule]\ntau0 = 1\nfamily = power\nbeta = 2\n", &["osgood"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown subcommand is a clap usage error.
    let out = Command::new(bin()).arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn report_combines_every_configured_section() {
    let dir = scratch("report");
    let out = run_in(
        &dir,
        "[osgood]\nfamily = power_log\nbeta = 2\ngamma = 2\n\n\
         [schedule]\nfamily = power\nbeta = 2\ntau0 = 1\nm = 2\na = 0\n",
        &["report"],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = results_json(&dir);
    // r² ln²(e+r) converges — uniqueness may fail out there.
    assert_eq!(v["osgood"]["verdict"], "Convergent");
    assert_eq!(v["schedule"]["terminated"], true);
    assert!(dir.join("out/osgood_doubling.csv").exists());
    assert!(dir.join("out/schedule.csv").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}
