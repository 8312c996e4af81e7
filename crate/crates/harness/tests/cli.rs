use std::path::Path;
use std::process::{Command, Output};

use sacwick::config::{SimulateConfig, SweepConfig};
use sacwick::io::read_field;
use sacwick_core::schedule::NoiseSchedule;

fn sacwick(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sacwick"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned()
}

#[test]
fn renorm_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = sacwick(dir.path(), &["renorm", "--eps", "0.01,0.001"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("renorm.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "epsilon,sigma,c_eps,d_eps_sq,asymptotic,ratio"
    );
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn check_bounds_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = sacwick(dir.path(), &["check-bounds", "--max-exponent", "2"]);
    assert!(out.status.success());
    let path = dir.path().join("bounds.csv");
    assert_eq!(
        header(&path),
        "a,radius,sum_value,integral_value,discrepancy,bound_rhs_shape,ratio"
    );
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1 + 9);
}

#[test]
fn simulate_writes_trajectory_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SimulateConfig {
        epsilon: 0.25,
        ..SimulateConfig::default()
    };
    cfg.integrator.dt = 0.01;
    cfg.integrator.t_end = 0.1;
    cfg.integrator.warmup_delta = 0.02;
    cfg.integrator.record_times.clear();
    let config = dir.path().join("run.json");
    std::fs::write(&config, serde_json::to_string(&cfg).unwrap()).unwrap();
    let config = config.to_str().unwrap();

    let out = sacwick(dir.path(), &["--seed", "5", "simulate", "--config", config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        header(&dir.path().join("trajectory.csv")),
        "time,besov_norm,l2_norm,max_abs"
    );
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trajectory.json")).unwrap()).unwrap();
    assert_eq!(sidecar["seed"], 5);
    assert!(sidecar["renorm"]["c_eps"].as_f64().unwrap() > 1.0);
    let field = read_field(&dir.path().join("final.bin")).unwrap();
    assert_eq!(field.lattice().k_max(), 4);
    assert_eq!(header(&dir.path().join("final.csv")), "x1,x2,value");

    let first = std::fs::read(dir.path().join("trajectory.csv")).unwrap();
    let out = sacwick(
        dir.path(),
        &["--seed", "5", "simulate", "--config", config, "--equation", "aux"],
    );
    assert!(out.status.success());
    assert_ne!(std::fs::read(dir.path().join("trajectory.csv")).unwrap(), first);
}

#[test]
fn sweep_subcommand_emits_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::desk_scale(NoiseSchedule::Constant { sigma0: 1.0 });
    cfg.eps_list = vec![0.25];
    cfg.n_realizations = 2;
    cfg.integrator.dt = 0.01;
    cfg.integrator.t_end = 0.1;
    cfg.integrator.warmup_delta = 0.02;
    cfg.integrator.record_times.clear();
    let config = dir.path().join("sweep.json");
    std::fs::write(&config, serde_json::to_string(&cfg).unwrap()).unwrap();
    let config = config.to_str().unwrap();
    let out_dir = dir.path().join("report");

    let args = [
        "--threads",
        "1",
        "--seed",
        "9",
        "sweep",
        "--regime",
        "trivial",
        "--config",
        config,
    ];
    let out = sacwick(&out_dir, &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["sweep.csv", "config.json", "plotdata_norms.csv", "plotdata_cells.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let provenance: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(provenance["master_seed"], 9);

    let args = ["sweep", "--regime", "limit", "--config", config];
    let out = sacwick(&out_dir, &args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no finite λ²"));
}

#[test]
fn deterministic_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = sacwick(
        dir.path(),
        &[
            "deterministic",
            "--lambda-sq",
            "4",
            "--cosine",
            "--k-max",
            "4",
            "--dt",
            "0.01",
            "--t-end",
            "0.5",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        header(&dir.path().join("deterministic.csv")),
        "time,besov_norm,l2_norm,max_abs"
    );
    assert!(dir.path().join("deterministic.json").exists());
    assert_eq!(
        read_field(&dir.path().join("deterministic_final.bin"))
            .unwrap()
            .lattice()
            .k_max(),
        4
    );
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = sacwick(dir.path(), &["renorm", "--eps", "2.0"]);
    assert!(!out.status.success());
    let out = sacwick(
        dir.path(),
        &["sweep", "--regime", "trivial", "--config", "/nonexistent.json"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
