use std::fs;
use std::path::Path;
use std::process::Command;

use qglab_cli::config::Config;
use qglab_cli::{commands, run_with_threads, Command as Cmd};

const SMALL: &str = r#"
seed = 17
[tolerances]
gap_threshold = 0.6
universality = 0.5
[graph]
sizes = [4, 5, 6, 7, 8]
[w_stats]
sizes = [4, 6]
chain_samples = 8
[contraction]
vertices = 4
[coset]
generators = [2]
points = 2
[form_factor]
vertices = 4
samples = 16
"#;

fn qglab(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qglab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QGLAB_OUT")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn gap_sweep_writes_schema_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (code, stdout, stderr) = qglab(dir.path(), &["gap-sweep", "--config", &cfg, "--out", "res"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let res = dir.path().join("res");
    assert_eq!(header(&res.join("gap-sweep.csv")), "V,B,twoB,gap_a,lambda_sub,method");
    assert!(res.join("gap-sweep.structure.csv").exists());
    assert!(res.join("gap-sweep.dat").exists());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(res.join("gap-sweep.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["config"]["seed"], 17);
    assert!(report["config"].get("threads").is_none());
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(res.join("gap-sweep.meta.json")).unwrap()).unwrap();
    assert!(meta["runtime_seconds"].as_f64().unwrap() >= 0.0);
    let rows = fs::read_to_string(res.join("gap-sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 6);
}

#[test]
fn failing_criterion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("gap_threshold = 0.6", "gap_threshold = 0.99"));
    let (code, stdout, _) = qglab(dir.path(), &["gap-sweep", "-c", &cfg, "--out", "res"]);
    assert_eq!(code, 2);
    assert!(stdout.contains("[FAIL] criterion 6"));
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[graph]\nsizes = \"many\"\n");
    let (code, _, stderr) = qglab(dir.path(), &["gap-sweep", "-c", &cfg]);
    assert_eq!(code, 1);
    assert!(stderr.contains("configuration error"), "{stderr}");
    let (code, _, stderr) = qglab(dir.path(), &["gap-sweep"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("seed"), "{stderr}");
    let (code, _, _) = qglab(dir.path(), &["no-such-command"]);
    assert_ne!(code, 0);
}

#[test]
fn seed_flag_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qglab"))
        .args(["coset-verify", "--seed", "5", "--quiet"])
        .current_dir(dir.path())
        .env("QGLAB_OUT", dir.path().join("from-env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report = fs::read_to_string(dir.path().join("from-env/coset-verify.json")).unwrap();
    assert!(report.contains("\"seed\": 5"));

    let out = Command::new(env!("CARGO_BIN_EXE_qglab"))
        .args(["coset-verify", "--seed", "5", "--quiet", "--out", "from-flag"])
        .current_dir(dir.path())
        .env("QGLAB_OUT", dir.path().join("ignored"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("from-flag/coset-verify.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for sub in ["a", "b"] {
        let (code, _, _) = qglab(dir.path(), &["form-factor", "-c", &cfg, "--out", sub, "-q"]);
        assert_eq!(code, 0);
    }
    for name in ["form-factor.csv", "form-factor.dat", "form-factor.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn every_command_reports_named_criteria() {
    let cfg = Config::from_toml(SMALL).unwrap();
    let expected: [(Cmd, &[u8]); 6] = [
        (Cmd::GapSweep, &[1, 6]),
        (Cmd::WStats, &[2]),
        (Cmd::SourceScaling, &[5]),
        (Cmd::ContractionCheck, &[3, 4]),
        (Cmd::CosetVerify, &[7]),
        (Cmd::FormFactor, &[8]),
    ];
    for (cmd, ids) in expected {
        let outcome = run_with_threads(cmd, &cfg).unwrap();
        let got: Vec<u8> = outcome.report.criteria.iter().map(|c| c.number).collect();
        assert_eq!(got, ids, "{}", cmd.name());
        assert_eq!(outcome.report.command, cmd.name());
    }
}

#[test]
fn schemas_match_the_contract() {
    let cfg = Config::from_toml(SMALL).unwrap();
    let source = commands::run(Cmd::SourceScaling, &cfg).unwrap();
    assert_eq!(source.table("").unwrap().header, ["B", "T_value", "bound", "slope_running"]);
    assert!(source.report.summary["t_slope"].is_number());
    let ff = commands::run(Cmd::FormFactor, &cfg).unwrap();
    assert_eq!(ff.table("").unwrap().header, ["n", "K", "stderr", "cue"]);
    assert_eq!(ff.table("").unwrap().rows.len(), 24);
    let cc = commands::run(Cmd::ContractionCheck, &cfg).unwrap();
    let counts = &cc.report.summary["counts"];
    assert_eq!(counts["m0"], 1);
    assert_eq!(counts["m1n2"], 2);
    assert_eq!(cc.report.summary["expected"]["m2n22"], 6);
    let coset = commands::run(Cmd::CosetVerify, &cfg).unwrap();
    assert_eq!(
        coset.table("").unwrap().header,
        ["generators", "identity", "max_deviation", "tolerance", "passed", "seed"]
    );
}

#[test]
fn size_failures_are_recorded_and_the_run_continues() {
    let cfg = Config::from_toml(&SMALL.replace("universality = 0.5", "universality = 0.5\ngap_floor = 0.8")).unwrap();
    let outcome = commands::run(Cmd::SourceScaling, &cfg).unwrap();
    assert!(!outcome.report.failures.is_empty());
    assert!(outcome.report.failures.iter().all(|f| f.error.contains("ill-conditioned")));
    assert!(!outcome.table("").unwrap().rows.is_empty());
    assert!(!outcome.report.all_passed);
}
