use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sacwick::config::{lattice_for, BesovSpec, InitialCondition, SimulateConfig, SweepConfig};
use sacwick::io::{write_bounds_csv, write_field, write_physical_csv, write_renorm_csv, write_trajectory, RenormRow};
use sacwick::report::emit_report;
use sacwick::sweep::{run_limit_sweep, run_triviality_sweep, thread_pool, SweepResult};
use sacwick::{HarnessError, Result};
use sacwick_core::integrators::{integrate_deterministic, integrate_path, Equation, IntegratorConfig, Scheme};
use sacwick_core::renorm::{asymptotic_c_eps, check_log_bound, solve_renorm_constant, Flavor, RenormState};
use sacwick_core::schedule::damping_coefficient;
use sacwick_core::spectral::Lattice;

#[derive(Parser)]
#[command(
    name = "sacwick",
    version,
    about = "Stochastic Allen-Cahn on the 2D torus: simulation and ε-sweeps"
)]
struct Cli {
    /// Master seed (overrides `master_seed` in sweep configs).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Trivial,
    Limit,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquationArg {
    /// The regularised equation for u_ε.
    Phi,
    /// The shifted equation for v_ε = u_ε − z_ε.
    Aux,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Euler,
    Rk2,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Euler => Scheme::ExponentialEuler,
            SchemeArg::Rk2 => Scheme::ExponentialRk2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// One trajectory of the regularised (or shifted) equation.
    Simulate {
        /// JSON run configuration; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, value_enum)]
        equation: Option<EquationArg>,
    },
    /// Monte-Carlo sweep over ε; writes sweep.csv, config.json and plotdata_*.csv.
    Sweep {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        config: PathBuf,
    },
    /// Renormalisation constants C_ε and D_ε² for a list of ε.
    Renorm {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])]
        eps: Vec<f64>,
    },
    /// Lattice sum versus integral over the grid a, R ∈ {10⁰, …, 10^max_exponent}.
    CheckBounds {
        #[arg(long, default_value_t = 3)]
        max_exponent: u32,
    },
    /// The deterministic limit equation.
    Deterministic {
        #[arg(long, default_value_t = 0.0)]
        lambda_sq: f64,
        /// Spatially constant initial value; a cos(x₁) profile of this
        /// amplitude is used with --cosine.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long)]
        cosine: bool,
        #[arg(long, default_value_t = 16)]
        k_max: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Rk2)]
        scheme: SchemeArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn create_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|source| HarnessError::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            eps,
            sigma,
            equation,
        } => {
            let mut cfg = match config {
                Some(path) => SimulateConfig::load(&path)?,
                None => SimulateConfig::default(),
            };
            if let Some(eps) = eps {
                cfg.epsilon = eps;
            }
            if let Some(sigma) = sigma {
                cfg.sigma = sigma;
            }
            match equation {
                Some(EquationArg::Phi) => cfg.integrator.equation = Equation::PhiEps,
                Some(EquationArg::Aux) => cfg.integrator.equation = Equation::AuxEps,
                None => {}
            }
            simulate(&cfg, cli.seed.unwrap_or(0), &cli.out)
        }
        Command::Sweep { regime, config } => {
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.master_seed = seed;
            }
            let pool = thread_pool(cli.threads)?;
            let result = match regime {
                RegimeArg::Trivial => run_triviality_sweep(&cfg, &pool)?,
                RegimeArg::Limit => run_limit_sweep(&cfg, &pool)?,
            };
            for path in emit_report(&result, &cli.out)? {
                println!("wrote {}", path.display());
            }
            print_sweep(&result);
            Ok(())
        }
        Command::Renorm { sigma, eps } => {
            create_out(&cli.out)?;
            let rows = eps
                .iter()
                .map(|&e| {
                    let state = solve_renorm_constant(e, sigma)?;
                    let c = state.c_eps.expect("solved");
                    let asymptotic = asymptotic_c_eps(e, sigma);
                    Ok(RenormRow {
                        epsilon: e,
                        sigma,
                        c_eps: c,
                        d_eps_sq: state.d_eps_sq,
                        asymptotic,
                        ratio: c / asymptotic,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let path = cli.out.join("renorm.csv");
            write_renorm_csv(&path, &rows)?;
            println!("{:>10} {:>14} {:>14} {:>10}", "epsilon", "c_eps", "asymptotic", "ratio");
            for r in &rows {
                println!(
                    "{:>10.1e} {:>14.8} {:>14.8} {:>10.6}",
                    r.epsilon, r.c_eps, r.asymptotic, r.ratio
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::CheckBounds { max_exponent } => {
            create_out(&cli.out)?;
            let values: Vec<f64> = (0..=max_exponent).map(|j| 10f64.powi(j as i32)).collect();
            let grid: Vec<(f64, f64)> = values
                .iter()
                .flat_map(|&a| values.iter().map(move |&r| (a, r)))
                .collect();
            let (reports, constant) = check_log_bound(&grid)?;
            let path = cli.out.join("bounds.csv");
            write_bounds_csv(&path, &reports)?;
            println!("empirical constant max |S − I| / shape = {constant:.6}");
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Deterministic {
            lambda_sq,
            amplitude,
            cosine,
            k_max,
            dt,
            t_end,
            scheme,
        } => {
            create_out(&cli.out)?;
            let lattice = Lattice::alias_free(k_max);
            let initial = if cosine {
                InitialCondition::Cosine {
                    amplitude,
                    k1: 1,
                    k2: 0,
                }
            } else {
                InitialCondition::Constant { value: amplitude }
            };
            let cfg = IntegratorConfig {
                scheme: scheme.into(),
                keep_fields: true,
                ..IntegratorConfig::new(Equation::PsiLambda, dt, t_end)
            };
            let besov = BesovSpec::default().params()?;
            let record = integrate_deterministic(&initial.build(lattice)?, lambda_sq, &cfg, &besov)?;
            let cfg = IntegratorConfig { lambda_sq, ..cfg };
            write_trajectory(&cli.out, "deterministic", &record, &cfg, None)?;
            if let Some(last) = record.fields.last() {
                write_field(&cli.out.join("deterministic_final.bin"), last)?;
                write_physical_csv(&cli.out.join("deterministic_final.csv"), last)?;
            }
            println!(
                "λ² = {lambda_sq}: damping 3λ²/8π − 1 = {:.6}, final sup |w| = {:.6e}",
                damping_coefficient(lambda_sq),
                record.max_abs.last().copied().unwrap_or(f64::NAN)
            );
            println!("wrote {}", cli.out.display());
            Ok(())
        }
    }
}

fn simulate(cfg: &SimulateConfig, seed: u64, out: &Path) -> Result<()> {
    create_out(out)?;
    let renorm = match cfg.flavor {
        Flavor::StrongNoise => RenormState::strong_noise(cfg.epsilon, cfg.sigma)?,
        Flavor::WeakNoise => RenormState::weak_noise(cfg.epsilon, cfg.sigma)?,
    };
    let lattice = lattice_for(cfg.epsilon)?;
    let icfg = IntegratorConfig {
        keep_fields: true,
        ..cfg.integrator_config()
    };
    let besov = cfg.besov.params()?;
    let record = integrate_path(&cfg.initial.build(lattice)?, Some(&renorm), &icfg, &besov, seed, None)?;
    write_trajectory(out, "trajectory", &record, cfg, Some(renorm))?;
    if let Some(last) = record.fields.last() {
        write_field(&out.join("final.bin"), last)?;
        write_physical_csv(&out.join("final.csv"), last)?;
    }
    match record.blow_up {
        Some(b) => println!("blew up at t = {} (|c| = {:e}); prefix written", b.time, b.magnitude),
        None => println!(
            "sup over [δ, T] of the B^s norm: {:.6}, Lᵖ-in-time B^s̄ norm: {:.6}",
            record.norm.sup_besov, record.norm.lp_time_besov
        ),
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn print_sweep(result: &SweepResult) {
    println!(
        "{:>10} {:>10} {:>12} {:>10} {:>5} {:>7}",
        "eps", "sigma", "mean", "stderr", "n", "failed"
    );
    for r in &result.rows {
        println!(
            "{:>10.6} {:>10.6} {:>12.6} {:>10.6} {:>5} {:>7}",
            r.eps, r.sigma, r.summary.mean, r.summary.stderr, r.summary.n, r.failed
        );
    }
    println!(
        "non-increasing within 2 pooled SE: {}; final/initial mean: {:.4}; p90 non-increasing: {}",
        result.trend.non_increasing, result.trend.final_over_initial, result.p90_non_increasing
    );
}
