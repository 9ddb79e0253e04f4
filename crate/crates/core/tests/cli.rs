use std::path::Path;
use std::process::{Command, Output};

fn ohwave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ohwave"))
        .args(args)
        .current_dir(dir)
        .env_remove("OHWAVE_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn criteria_flags_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = ohwave(
        &["criteria", "--a", "1", "--b", "1", "--gamma", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["criteria"]["cond1"]["satisfied"], true);
    assert_eq!(v["criteria"]["cond2"]["satisfied"], true);
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ohwave(&["simulate", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"));

    let cfg = write(dir.path(), "typo.toml", "a = 0.1\nb = 0\nt_mx = 1\n");
    assert_eq!(
        ohwave(&["simulate", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ohwave(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(ohwave(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn unstable_step_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "a = 0.2\nb = 0.0\nn = 256\ndt = 0.5\nt_max = 20.0\n",
    );
    let out = ohwave(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("NumericalFailure"));
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "a = 0.05\nb = 0.0\nn = 512\ndt = 0.002\nt_max = 10.0\nsnapshot_times = [0.0, 1.0]\n",
    );
    let out = ohwave(
        &["simulate", "--config", &cfg, "--output-dir", "res"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let res = dir.path().join("res");
    assert_eq!(
        first_line(&res.join("timeseries.csv")),
        "t,min_ux,max_ux,sup_u,mass,q_drift,e_drift"
    );
    assert_eq!(first_line(&res.join("snapshot_000.csv")), "x,u");
    assert_eq!(first_line(&res.join("rates.csv")), "t,p_min,p_max");
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(res.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["terminated"], "SlopeBlowup");
    let c = s["blowup"]["C"].as_f64().unwrap();
    assert!((-1.15..=-0.9).contains(&c), "C = {c}");
    for key in ["B", "T", "residual"] {
        assert!(s["blowup"][key].is_number());
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ohwave"))
        .args(["wave", "--c-over-gamma", "1.03"])
        .current_dir(dir.path())
        .env("OHWAVE_OUTPUT_DIR", "envdir")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first_line(&dir.path().join("envdir/profile.csv")), "x,phi");
    assert!(dir.path().join("envdir/corner.csv").exists());
}

#[test]
fn wave_branch_and_scan_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wave.toml",
        "gamma = 2.0\nc_over_gamma = 1.04\nbranch = [1.01, 1.02, 1.03]\n",
    );
    assert_eq!(
        ohwave(&["wave", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(0)
    );
    let branch = std::fs::read_to_string(dir.path().join("out/branch.csv")).unwrap();
    assert_eq!(branch.lines().count(), 4);
    assert_eq!(
        branch.lines().next().unwrap(),
        "c_over_gamma,amplitude,residual"
    );

    let cfg = write(dir.path(), "scan.toml", "a_count = 3\nb_count = 4\n");
    assert_eq!(
        ohwave(&["scan", "--config", &cfg, "--workers", "2"], dir.path())
            .status
            .code(),
        Some(0)
    );
    let map = std::fs::read_to_string(dir.path().join("out/region_map.csv")).unwrap();
    assert_eq!(map.lines().count(), 13);
    assert_eq!(
        map.lines().next().unwrap(),
        "a,b,hunter,cond1,cond2,charac,margin_charac"
    );
    assert!(dir.path().join("out/scan.csv").exists());
    assert!(dir.path().join("out/plot_region_map.py").exists());
}

#[test]
fn characteristics_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ch.toml",
        "a = 0.05\nb = 0.0\nn = 256\ndt = 0.002\nt_max = 1.0\nn_xi = 32\n",
    );
    let out = ohwave(&["characteristics", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        first_line(&dir.path().join("out/characteristics.csv")),
        "t,xi,X,U,V"
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["diffeomorphic"], true);
    assert!(v["max_consistency"].as_f64().unwrap() < 1e-6);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let config = ohwave::cli::RunConfig::load(&path).unwrap();
        if config.a.is_some() {
            config.simulation().unwrap();
        }
        count += 1;
    }
    assert!(count >= 5);
}
