use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use surface_afem::fem::{Discretization, FeSpace};
use surface_afem::geometry::SurfaceRegistry;
use surface_afem::harness::{
    benchmark, fit_history, load_config, read_history_csv, run_benchmark_with, run_checks,
    surface_off, MeshState, Quantity,
};
use surface_afem::Result;

const THREADS_VAR: &str = "SURFACE_AFEM_THREADS";

#[derive(Parser)]
#[command(
    name = "surface-afem",
    version,
    about = "Adaptive FEM for the Laplace-Beltrami equation on parametric surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured benchmark and write its artifacts.
    Solve { config: PathBuf },
    /// Fit a convergence rate to a history file.
    Rates {
        history: PathBuf,
        #[arg(long, default_value = "energy_error")]
        quantity: String,
        #[arg(long, default_value_t = 4)]
        window: usize,
        /// Subtracted from element counts; taken from --benchmark when omitted.
        #[arg(long)]
        n0: Option<usize>,
        /// Benchmark whose macro element count is used as n0.
        #[arg(long)]
        benchmark: Option<String>,
        /// Scaling of λ in the total estimator.
        #[arg(long, default_value_t = 0.1)]
        omega: f64,
    },
    /// Write the discrete surface of a saved mesh state as OFF.
    ExportMesh {
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: u32,
        /// Output file; standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Outcome {
    Ok,
    Violation,
}

fn threads() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(1),
        Ok(v) => {
            v.parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| surface_afem::Error::Range {
                    key: THREADS_VAR.into(),
                    msg: format!("`{v}` is not a positive integer"),
                })
        }
    }
}

fn solve(config: PathBuf) -> Result<Outcome> {
    let cfg = load_config(&config)?;
    println!("k j phase n_elements n_dofs n_marked eta lambda energy_error eps_k");
    let out = run_benchmark_with(&cfg, &mut |r| {
        println!(
            "{} {} {} {} {} {} {:.6e} {:.6e} {:.6e} {:.6e}",
            r.k,
            r.j,
            r.phase,
            r.n_elements,
            r.n_dofs,
            r.n_marked,
            r.eta,
            r.lambda,
            r.energy_error,
            r.eps_k
        );
        Ok(())
    })?;
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
    if out.violations.is_empty() {
        Ok(Outcome::Ok)
    } else {
        for v in &out.violations {
            eprintln!("contract violation: {v}");
        }
        Ok(Outcome::Violation)
    }
}

fn rates(
    history: PathBuf,
    quantity: &str,
    window: usize,
    n0: Option<usize>,
    bench: Option<String>,
    omega: f64,
) -> Result<Outcome> {
    let quantity = Quantity::parse(quantity)?;
    let n0 = match (n0, bench) {
        (Some(n), _) => n,
        (None, Some(name)) => benchmark(&name)?.surface.topology().num_elements(),
        (None, None) => 0,
    };
    let h = read_history_csv(&history)?;
    let fit = fit_history(&h, quantity, window, n0, omega)?;
    println!("quantity {}", quantity.as_str());
    for (n, e) in &fit.points {
        println!("N {n} value {e:.6e}");
    }
    println!("slope {:.6}", fit.slope);
    println!("intercept {:.6}", fit.intercept);
    Ok(Outcome::Ok)
}

fn export_mesh(state: PathBuf, level: u32, output: Option<PathBuf>) -> Result<Outcome> {
    let st = MeshState::load(&state)?;
    let (surface, mesh) = st.restore(&SurfaceRegistry::with_builtins())?;
    let disc = Discretization::new(st.degree, Default::default())?;
    let space = FeSpace::new(&mesh, &surface, &disc)?;
    let text = surface_off(&mesh, &disc, &space, level)?;
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(Outcome::Ok)
}

fn check(seed: u64) -> Result<Outcome> {
    let mut failed = 0;
    for r in run_checks(seed) {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += usize::from(!r.passed);
    }
    Ok(if failed == 0 {
        Outcome::Ok
    } else {
        Outcome::Violation
    })
}

fn run(cli: Cli) -> Result<Outcome> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads()?)
        .build_global()
        .map_err(|e| surface_afem::Error::Range {
            key: THREADS_VAR.into(),
            msg: e.to_string(),
        })?;
    match cli.command {
        Command::Solve { config } => solve(config),
        Command::Rates {
            history,
            quantity,
            window,
            n0,
            benchmark,
            omega,
        } => rates(history, &quantity, window, n0, benchmark, omega),
        Command::ExportMesh {
            state,
            level,
            output,
        } => export_mesh(state, level, output),
        Command::Check { seed } => check(seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
