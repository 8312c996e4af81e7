use sacwick::config::SweepConfig;
use sacwick::report::emit_report;
use sacwick::sweep::{run_limit_sweep, run_triviality_sweep, thread_pool};
use sacwick_core::schedule::NoiseSchedule;
use sacwick_core::stats::Summary;

fn small(schedule: NoiseSchedule) -> SweepConfig {
    let mut cfg = SweepConfig::desk_scale(schedule);
    cfg.eps_list = vec![0.25, 0.125];
    cfg.n_realizations = 2;
    cfg.master_seed = 11;
    cfg.integrator.dt = 0.01;
    cfg.integrator.t_end = 0.1;
    cfg.integrator.warmup_delta = 0.02;
    cfg.integrator.record_times.clear();
    cfg
}

#[test]
fn two_by_two_sweep_writes_every_cell() {
    let pool = thread_pool(2).unwrap();
    let result = run_triviality_sweep(&small(NoiseSchedule::Constant { sigma0: 1.0 }), &pool).unwrap();
    assert_eq!(result.rows.len(), 2);
    assert_eq!(result.cells.len(), 4);
    assert!(result.cells.iter().all(|c| c.failure.is_none()));
    // Realisation i uses one seed across all ε.
    assert_eq!(result.cells[0].seed, result.cells[2].seed);
    assert_ne!(result.cells[0].seed, result.cells[1].seed);

    let dir = tempfile::tempdir().unwrap();
    emit_report(&result, dir.path()).unwrap();
    let sweep = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "eps,sigma,c_eps,d_eps_sq,mean_norm,stderr,n,failed");
    assert_eq!(lines.len(), 3);
    let cells = std::fs::read_to_string(dir.path().join("plotdata_cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 5);
    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(config["master_seed"], 11);
    assert_eq!(config["realization_seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn stderr_matches_the_cells() {
    let pool = thread_pool(1).unwrap();
    let mut cfg = small(NoiseSchedule::Constant { sigma0: 1.0 });
    cfg.n_realizations = 5;
    let result = run_triviality_sweep(&cfg, &pool).unwrap();
    for row in &result.rows {
        let norms: Vec<f64> = result
            .cells
            .iter()
            .filter(|c| c.eps == row.eps)
            .filter_map(|c| c.sup_norm)
            .collect();
        let mean = norms.iter().sum::<f64>() / 5.0;
        let var = norms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((row.summary.stderr - (var / 5.0).sqrt()).abs() < 1e-12);
        assert_eq!(row.summary, Summary::of(&norms));
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = small(NoiseSchedule::Critical { lambda: 1.5 });
    let one = run_limit_sweep(&cfg, &thread_pool(1).unwrap()).unwrap();
    let three = run_limit_sweep(&cfg, &thread_pool(3).unwrap()).unwrap();
    assert_eq!(one, three);
}

#[test]
fn empty_sweep_has_header_only_tables() {
    let mut cfg = small(NoiseSchedule::Constant { sigma0: 1.0 });
    cfg.eps_list.clear();
    let result = run_triviality_sweep(&cfg, &thread_pool(1).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&result, dir.path()).unwrap();
    assert_eq!(
        std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap(),
        "eps,sigma,c_eps,d_eps_sq,mean_norm,stderr,n,failed\n"
    );
}

#[test]
fn triviality_sweep_needs_divergent_noise() {
    let pool = thread_pool(1).unwrap();
    assert!(run_triviality_sweep(&small(NoiseSchedule::Constant { sigma0: 0.0 }), &pool).is_err());
    assert!(run_triviality_sweep(&small(NoiseSchedule::Power { tau: 1.0 }), &pool).is_err());
    assert!(run_limit_sweep(&small(NoiseSchedule::Constant { sigma0: 1.0 }), &pool).is_err());
}

#[test]
fn zero_noise_limit_sweep_tracks_the_reference() {
    let pool = thread_pool(1).unwrap();
    let result = run_limit_sweep(&small(NoiseSchedule::Critical { lambda: 0.0 }), &pool).unwrap();
    assert_eq!(result.reference_lambda_sq, Some(0.0));
    let means = result.means();
    assert!(result.rows.iter().all(|r| r.failed == 0));
    // The coarser lattice truncates the harmonics generated by the cube.
    assert!(means[0] < 1e-4, "{means:?}");
    // The finest level shares the reference's lattice.
    assert!(means[1] < 1e-10, "{means:?}");
}

#[test]
fn seed_changes_the_output() {
    let pool = thread_pool(1).unwrap();
    let mut cfg = small(NoiseSchedule::Constant { sigma0: 1.0 });
    let a = run_triviality_sweep(&cfg, &pool).unwrap();
    cfg.master_seed += 1;
    let b = run_triviality_sweep(&cfg, &pool).unwrap();
    assert_ne!(a.means(), b.means());
}
