//! End-to-end checks of the command-line interface: exit codes, file
//! artifacts, and idempotence.

use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_cate-select");

fn write_dataset(path: &Path, n: usize) {
    use std::io::Write;
    let mut f = std::fs::File::create(path).unwrap();
    writeln!(f, "t,yf,ycf,mu0,mu1,x1,x2").unwrap();
    let mut state = 88172645463325252u64;
    let mut rng = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..n {
        let x1 = rng() * 4.0 - 2.0;
        let x2 = rng() * 4.0 - 2.0;
        let g = (x1 + x2) / 2.0_f64.sqrt();
        let t = u8::from(rng() < 1.0 / (1.0 + (-g).exp()));
        let mu0 = g;
        let mu1 = g + 2.0;
        let noise = rng() - 0.5;
        let (yf, ycf) =
            if t == 1 { (mu1 + noise, mu0 - noise) } else { (mu0 + noise, mu1 - noise) };
        writeln!(f, "{t},{yf:.6},{ycf:.6},{mu0:.6},{mu1:.6},{x1:.6},{x2:.6}").unwrap();
    }
}

fn run(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).current_dir(cwd).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
    )
}

const CONFIG: &str = r#"
version = 1

[data]
csv = "data.csv"

[grid]
estimators = ["SL", "TL"]
families = ["l2_linear"]
reduced = true

[run]
seed = 3
ensemble_size = 20

[metrics]
validation = ["mu_risk", "mu_risk_r2"]
test = ["pehe", "e_ate"]
"#;

#[test]
fn split_writes_plan_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("data.csv"), 160);
    let args = [
        "split", "--data", "data.csv", "--iters", "3", "--folds", "5", "--test-frac", "0.1",
        "--seed", "42", "--out", "plan.txt",
    ];
    let (code, stdout, _) = run(&args, dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("3 iterations × 5 folds"), "{stdout}");
    let first = std::fs::read(dir.path().join("plan.txt")).unwrap();

    let (code, _, _) = run(&args, dir.path());
    assert_eq!(code, 0);
    let second = std::fs::read(dir.path().join("plan.txt")).unwrap();
    assert_eq!(first, second, "rerun with identical flags must be byte-identical");
}

#[test]
fn invalid_test_fraction_exits_2_naming_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("data.csv"), 60);
    let (code, _, stderr) = run(
        &["split", "--data", "data.csv", "--test-frac", "1.5", "--out", "plan.txt"],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("test_fraction"), "{stderr}");
}

#[test]
fn run_produces_records_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("data.csv"), 160);
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    let (code, _, _) = run(
        &["split", "--data", "data.csv", "--iters", "2", "--folds", "4", "--test-frac", "0.15",
          "--seed", "1", "--out", "plan.txt"],
        dir.path(),
    );
    assert_eq!(code, 0);

    let run_args = [
        "run", "--plan", "plan.txt", "--config", "run.toml", "--out", "out", "--jobs", "2",
    ];
    let (code, stdout, stderr) = run(&run_args, dir.path());
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    for f in ["records.csv", "results.csv", "run_manifest.toml"] {
        assert!(dir.path().join("out").join(f).exists(), "{f} missing");
    }
    let manifest = std::fs::read_to_string(dir.path().join("out/run_manifest.toml")).unwrap();
    assert!(manifest.contains("config_sha256"));
    assert!(manifest.contains("n_fit_failures = 0"));

    // identical rerun with a different jobs degree: identical records
    let first = std::fs::read(dir.path().join("out/records.csv")).unwrap();
    let run_args_j1 = [
        "run", "--plan", "plan.txt", "--config", "run.toml", "--out", "out2", "--jobs", "1",
    ];
    let (code, _, _) = run(&run_args_j1, dir.path());
    assert_eq!(code, 0);
    let second = std::fs::read(dir.path().join("out2/records.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn unknown_estimator_in_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("data.csv"), 80);
    std::fs::write(
        dir.path().join("bad.toml"),
        "version = 1\n[data]\ncsv = \"data.csv\"\n[grid]\nestimators = [\"causal_forest\"]\nfamilies = [\"tree\"]\n",
    )
    .unwrap();
    let (code, _, _) = run(
        &["split", "--data", "data.csv", "--iters", "1", "--folds", "3", "--out", "plan.txt"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let (code, _, stderr) = run(
        &["run", "--plan", "plan.txt", "--config", "bad.toml", "--out", "out"],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("estimator out of scope"), "{stderr}");
}

#[test]
fn analyze_modes_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("data.csv"), 160);
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    run(
        &["split", "--data", "data.csv", "--iters", "2", "--folds", "4", "--test-frac", "0.15",
          "--seed", "1", "--out", "plan.txt"],
        dir.path(),
    );
    run(&["run", "--plan", "plan.txt", "--config", "run.toml", "--out", "out"], dir.path());

    for (mode, file) in [
        ("winners", "winners.csv"),
        ("oracle", "oracle.csv"),
        ("regret", "regret.csv"),
        ("rank-corr", "rank_corr.csv"),
        ("truth-corr", "truth_corr.csv"),
        ("defaults-vs-oracle", "defaults_vs_oracle.csv"),
    ] {
        let (code, _, stderr) = run(
            &["analyze", "--records", "out/records.csv", "--mode", mode, "--out", "analysis"],
            dir.path(),
        );
        assert_eq!(code, 0, "mode {mode}: {stderr}");
        assert!(dir.path().join("analysis").join(file).exists(), "{file} missing");
    }

    let (code, _, stderr) = run(
        &["analyze", "--records", "out/records.csv", "--mode", "nonsense", "--out", "analysis"],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown mode"), "{stderr}");
}

#[test]
fn demo_succeeds_and_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&["demo", "--seed", "7", "--out", "demo"], dir.path());
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("orderings hold"));
    assert!(dir.path().join("demo/demo_scores.csv").exists());
    assert!(dir.path().join("demo/demo_curves.csv").exists());
}

#[test]
fn missing_input_file_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(
        &["split", "--data", "absent.csv", "--out", "plan.txt"],
        dir.path(),
    );
    assert_ne!(code, 0);
    assert!(!stderr.is_empty());
}
