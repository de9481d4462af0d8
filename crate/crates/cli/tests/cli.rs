use std::path::Path;
use std::process::{Command, Output};

fn mpcqkd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpcqkd"))
        .args(args)
        .current_dir(dir)
        .env_remove("MPCQKD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn gen_writes_a_deterministic_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcqkd(&["gen", "--nodes", "10", "--seed", "1"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let path = dir.path().join("instance_10_1.json");
    assert!(path.exists());
    let first = std::fs::read(&path).unwrap();
    let out2 = mpcqkd(&["gen", "--nodes", "10", "--seed", "1"], dir.path());
    assert!(out2.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), first);
    // The resolved config hash is embedded for provenance.
    assert!(String::from_utf8_lossy(&first).contains("config_hash"));
}

#[test]
fn missing_input_exits_with_input_code_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcqkd(
        &["optimize", "--input", "missing.json", "--variant", "mpc"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("missing.json"));
}

#[test]
fn unknown_variant_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    mpcqkd(&["gen", "--nodes", "5", "--seed", "2"], dir.path());
    let out = mpcqkd(
        &["optimize", "--input", "instance_5_2.json", "--variant", "wat"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("wat"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcqkd(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_rates_optimize_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gen = mpcqkd(&["gen", "--nodes", "5", "--seed", "3"], dir.path());
    assert!(gen.status.success(), "{}", stderr(&gen));

    let rates = mpcqkd(
        &["rates", "--input", "instance_5_3.json", "--out", "rates.json"],
        dir.path(),
    );
    assert!(rates.status.success(), "{}", stderr(&rates));
    let rates_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rates.json")).unwrap())
            .unwrap();
    assert!(rates_doc["c2c"].as_array().unwrap().len() >= 4);

    let opt = mpcqkd(
        &[
            "optimize",
            "--input",
            "instance_5_3.json",
            "--variant",
            "mpc",
            "--mode",
            "heuristic",
            "--out",
            "sol.json",
        ],
        dir.path(),
    );
    assert!(opt.status.success(), "{}", stderr(&opt));
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sol.json")).unwrap())
            .unwrap();
    assert_eq!(sol["variant"], "mpc");
    assert_eq!(sol["violations"], 0);
    assert_eq!(sol["config_hash"], rates_doc["config_hash"]);
    assert_eq!(sol["instance_hash"], rates_doc["instance_hash"]);
}

#[test]
fn simulate_relay_reports_no_exposure() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcqkd(
        &["simulate-relay", "--seed", "9", "--messages", "20", "--max-size", "256", "--baseline"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("roundtrip_ok: 20"));
    assert!(text.contains("relay_exposures: 0"));
    assert!(text.contains("baseline_relay_saw_plaintext: true"));
}

#[test]
fn experiment_emits_hashed_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcqkd(
        &[
            "experiment", "--group", "1", "--profile", "ci", "--seed", "7",
            "--scales", "10", "--instances", "1", "--out", "exp",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let raw = std::fs::read_to_string(dir.path().join("exp/raw.csv")).unwrap();
    assert!(raw.starts_with("# config_hash="));
    assert_eq!(raw.lines().count(), 2 + 3); // comment + header + 3 variants
    assert!(dir.path().join("exp/aggregate.csv").exists());
}

#[test]
fn report_merges_and_rejects_mismatched_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = mpcqkd(args, dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
    };
    run(&[
        "experiment", "--group", "1", "--profile", "ci", "--seed", "7",
        "--scales", "10", "--instances", "1", "--out", "a",
    ]);
    run(&[
        "experiment", "--group", "1", "--profile", "ci", "--seed", "8",
        "--scales", "10", "--instances", "1", "--out", "b",
    ]);
    run(&[
        "report", "--input", "a/raw.csv", "b/raw.csv", "--out", "merged.csv",
    ]);
    let merged = std::fs::read_to_string(dir.path().join("merged.csv")).unwrap();
    assert!(merged.contains("mean_sod"));

    // A different econ config changes the hash; report must then refuse.
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"econ": {"q_trust_cost": 50.0, "total_budget": 10000.0, "tau": 0.5, "beta": 0.9, "device_count_cap": 50}}"#,
    )
    .unwrap();
    run(&[
        "--config", "cfg.json",
        "experiment", "--group", "1", "--profile", "ci", "--seed", "7",
        "--scales", "10", "--instances", "1", "--out", "c",
    ]);
    let refuse = mpcqkd(
        &["report", "--input", "a/raw.csv", "c/raw.csv", "--out", "bad.csv"],
        dir.path(),
    );
    assert_eq!(refuse.status.code(), Some(3), "{}", stderr(&refuse));
    let forced = mpcqkd(
        &["report", "--input", "a/raw.csv", "c/raw.csv", "--force", "--out", "forced.csv"],
        dir.path(),
    );
    assert!(forced.status.success(), "{}", stderr(&forced));
}

#[test]
fn out_dir_env_var_sets_the_default_target() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("artifacts");
    std::fs::create_dir(&target).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mpcqkd"))
        .args(["gen", "--nodes", "5", "--seed", "4"])
        .current_dir(dir.path())
        .env("MPCQKD_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(target.join("instance_5_4.json").exists());
}
