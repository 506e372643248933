//! Running a configured benchmark and writing its artifacts.

use std::path::PathBuf;

use crate::adaptivity::{afem_run, uniform_run, ContractViolation, HistoryRow, RunHistory};
use crate::error::Result;
use crate::fem::{Discretization, FeSpace};
use crate::harness::benchmarks::benchmark;
use crate::harness::config::{Mode, RunConfig};
use crate::harness::history_io::HistoryWriter;
use crate::harness::mesh_io::{export_surface_off, MeshState};
use crate::mesh::ConformingMesh;

pub const HISTORY_FILE: &str = "history.csv";
pub const STATE_FILE: &str = "mesh.state";
pub const OFF_FILE: &str = "surface.off";

#[derive(Debug)]
pub struct RunOutcome {
    pub history: RunHistory,
    pub violations: Vec<ContractViolation>,
    pub mesh: ConformingMesh,
    pub solution: Vec<f64>,
    /// Number of macro elements, the `#T₀` of rate fits.
    pub initial_elements: usize,
    /// Files written, in order.
    pub written: Vec<PathBuf>,
}

/// Runs `config`, streaming history rows to `output_dir/history.csv` when an
/// output directory is set, and replays the exit contracts afterwards.
pub fn run_benchmark(config: &RunConfig) -> Result<RunOutcome> {
    run_benchmark_with(config, &mut |_| Ok(()))
}

/// As [`run_benchmark`], also passing every row to `observer`.
pub fn run_benchmark_with(
    config: &RunConfig,
    observer: &mut dyn FnMut(&HistoryRow) -> Result<()>,
) -> Result<RunOutcome> {
    config.validate()?;
    let bench = benchmark(&config.benchmark)?;
    let mut written = Vec::new();
    let mut writer = match &config.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(HISTORY_FILE);
            let w = HistoryWriter::create(&path)?;
            written.push(path);
            Some(w)
        }
        None => None,
    };
    let mut sink = |row: &HistoryRow| {
        if let Some(w) = writer.as_mut() {
            w.write(row)?;
        }
        observer(row)
    };
    let p = &config.params;
    let (history, mesh, solution) = match config.mode {
        Mode::Adaptive => afem_run(&bench.surface, &bench.problem, p, &mut sink)?,
        Mode::Uniform => uniform_run(&bench.surface, &bench.problem, p, config.rounds, &mut sink)?,
    };
    drop(writer);
    let violations = match config.mode {
        Mode::Adaptive => history.replay_contracts(p.delta0, p.omega, p.rho),
        Mode::Uniform => Vec::new(),
    };
    if let Some(dir) = &config.output_dir {
        let path = dir.join(STATE_FILE);
        MeshState::of(&mesh, &bench.surface, p.degree).save(&path)?;
        written.push(path);
        let disc = Discretization::new(p.degree, p.quadrature)?;
        let space = FeSpace::new(&mesh, &bench.surface, &disc)?;
        let path = dir.join(OFF_FILE);
        export_surface_off(&mesh, &disc, &space, &path, config.off_level)?;
        written.push(path);
    }
    Ok(RunOutcome {
        history,
        violations,
        mesh,
        solution,
        initial_elements: bench.surface.topology().num_elements(),
        written,
    })
}
