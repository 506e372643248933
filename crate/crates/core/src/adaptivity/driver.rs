use std::time::Instant;

use crate::adaptivity::greedy::adapt_surface;
use crate::adaptivity::history::{HistoryRow, Phase, RunHistory};
use crate::adaptivity::marking::dorfler_mark;
use crate::error::{Error, Result};
use crate::estimators::{energy_error, estimate, IndicatorSet, ManufacturedProblem};
use crate::fem::{
    assemble, prolongate, solve, Discretization, FeSpace, QuadratureDegrees, SolverOptions,
};
use crate::geometry::chart::MacroSurface;
use crate::geometry::interpolant::geometric_indicators;
use crate::mesh::{ConformingMesh, ElementId};

/// Parameters of the adaptive loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AfemParams {
    /// Polynomial degree `n` of both the surface interpolant and the finite elements.
    pub degree: usize,
    pub theta: f64,
    pub rho: f64,
    pub omega: f64,
    /// Bisections applied to every marked element.
    pub b: u32,
    /// Initial tolerance; `None` uses `η` on the pre-refined mesh.
    pub eps0: Option<f64>,
    /// Geometric threshold of the pre-refinement.
    pub delta0: f64,
    /// Stop before the first outer step with `ε_k < eps_stop`.
    pub eps_stop: Option<f64>,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Hard cap on the number of leaves; exceeding it is an error.
    pub max_elements: usize,
    /// Stop before the first outer step that starts with more dofs than this.
    pub max_dofs: Option<usize>,
    pub solver: SolverOptions,
    pub quadrature: QuadratureDegrees,
    /// Record wall-clock times; when off, `wall_ms` is zero and runs are reproducible bit for bit.
    pub timing: bool,
}

impl Default for AfemParams {
    fn default() -> Self {
        AfemParams {
            degree: 1,
            theta: 0.5,
            rho: 0.5,
            omega: 0.1,
            b: 1,
            eps0: None,
            delta0: 0.1,
            eps_stop: None,
            max_outer: 10,
            max_inner: 50,
            max_elements: 2_000_000,
            max_dofs: None,
            solver: SolverOptions::default(),
            quadrature: QuadratureDegrees::default(),
            timing: true,
        }
    }
}

fn range(key: &str, msg: impl Into<String>) -> Error {
    Error::Range {
        key: key.to_string(),
        msg: msg.into(),
    }
}

impl AfemParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.degree) {
            return Err(range("n", "must be 1, 2 or 3"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(range("theta", "must lie in (0, 1]"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(range("rho", "must lie in (0, 1)"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(range("omega", "must be positive"));
        }
        if self.b == 0 || self.b > 8 {
            return Err(range("b", "must lie in 1..=8"));
        }
        if let Some(e) = self.eps0 {
            if !(e > 0.0 && e.is_finite()) {
                return Err(range("eps0", "must be positive"));
            }
        }
        if !(self.delta0 > 0.0) {
            return Err(range("delta0", "must be positive"));
        }
        if let Some(e) = self.eps_stop {
            if !(e > 0.0) {
                return Err(range("eps_stop", "must be positive"));
            }
        }
        if self.max_inner == 0 {
            return Err(range("max_inner", "must be at least 1"));
        }
        if !(self.solver.rel_tol > 0.0 && self.solver.rel_tol < 1.0) {
            return Err(range("rel_tol", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Results of one solve on the current mesh.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub indicators: IndicatorSet,
    pub energy_error: f64,
    pub cg_iters: usize,
}

/// Mesh, discrete surface and discrete solution, kept consistent across refinements.
pub struct AdaptiveState<'a> {
    pub surface: &'a MacroSurface,
    pub problem: &'a ManufacturedProblem,
    pub disc: Discretization,
    pub mesh: ConformingMesh,
    pub space: FeSpace,
    pub solution: Vec<f64>,
    solved_leaves: Vec<ElementId>,
    solved_space: Option<FeSpace>,
}

impl<'a> AdaptiveState<'a> {
    pub fn new(
        surface: &'a MacroSurface,
        problem: &'a ManufacturedProblem,
        degree: usize,
        quadrature: QuadratureDegrees,
    ) -> Result<Self> {
        let disc = Discretization::new(degree, quadrature)?;
        let mesh = ConformingMesh::new(std::sync::Arc::clone(surface.topology()))?;
        let space = FeSpace::new(&mesh, surface, &disc)?;
        Ok(AdaptiveState {
            surface,
            problem,
            disc,
            mesh,
            space,
            solution: Vec::new(),
            solved_leaves: Vec::new(),
            solved_space: None,
        })
    }

    /// Rebuilds the dof numbering and the surface interpolant after the mesh changed.
    pub fn rebuild(&mut self) -> Result<()> {
        self.space = FeSpace::new(&self.mesh, self.surface, &self.disc)?;
        Ok(())
    }

    pub fn lambda(&self) -> Vec<f64> {
        geometric_indicators(
            &self.mesh,
            self.surface,
            &self.disc.basis,
            &self.disc.sampler,
        )
    }

    /// Assembles, solves (warm-started from the previous solution) and estimates.
    pub fn solve_and_estimate(&mut self, opts: &SolverOptions) -> Result<StepReport> {
        let system = assemble(
            &self.mesh,
            self.surface,
            &self.disc,
            &self.space,
            &*self.problem.f,
        )?;
        let initial = self.solved_space.as_ref().map(|old| {
            prolongate(
                &self.mesh,
                &self.disc.basis,
                &self.solved_leaves,
                &old.dofmap,
                &self.solution,
                &self.space.dofmap,
            )
        });
        let sol = solve(&system, &self.space.dofmap, opts, initial.as_deref())?;
        self.solution = sol.coefficients;
        self.solved_leaves = self.mesh.leaves().to_vec();
        self.solved_space = Some(self.space.clone());
        let mut indicators = estimate(
            &self.mesh,
            self.surface,
            &self.disc,
            &self.space,
            &self.solution,
            self.problem,
        )?;
        indicators.lambda = self.lambda();
        let energy_error = if self.problem.has_exact_solution() {
            energy_error(
                &self.mesh,
                self.surface,
                &self.disc,
                &self.space,
                &self.solution,
                self.problem,
            )?
        } else {
            f64::NAN
        };
        Ok(StepReport {
            indicators,
            energy_error,
            cg_iters: sol.iterations,
        })
    }

    fn row(&self, k: usize, j: usize, phase: Phase, report: Option<&StepReport>) -> HistoryRow {
        let mut r = HistoryRow::new(k, j, phase);
        r.n_elements = self.mesh.num_elements();
        r.n_dofs = self.space.n_dofs();
        if let Some(rep) = report {
            r.eta = rep.indicators.eta();
            r.lambda = rep.indicators.lambda_max();
            r.osc_u = rep.indicators.osc_u();
            r.osc_f = rep.indicators.osc_f();
            r.energy_error = rep.energy_error;
            r.cg_iters = rep.cg_iters;
        }
        r
    }
}

/// Receives every history row as soon as it is recorded.
pub type RowSink<'s> = dyn FnMut(&HistoryRow) -> Result<()> + 's;

struct Recorder<'s, 'h> {
    start: Instant,
    timing: bool,
    history: &'h mut RunHistory,
    sink: &'h mut RowSink<'s>,
}

impl Recorder<'_, '_> {
    fn record(&mut self, mut row: HistoryRow) -> Result<()> {
        if self.timing {
            row.wall_ms = self.start.elapsed().as_secs_f64() * 1e3;
        }
        (self.sink)(&row)?;
        self.history.push(row);
        Ok(())
    }
}

fn adapt_pde_inner(
    state: &mut AdaptiveState<'_>,
    eps: f64,
    k: usize,
    params: &AfemParams,
    rec: &mut Recorder<'_, '_>,
) -> Result<usize> {
    let mut j = 0;
    loop {
        let report = state
            .solve_and_estimate(&params.solver)
            .map_err(|e| e.at_step(k, j))?;
        let eta = report.indicators.eta();
        if eta <= eps {
            let mut row = state.row(k, j, Phase::PdeExit, Some(&report));
            row.eps_k = eps;
            rec.record(row)?;
            return Ok(j);
        }
        if j >= params.max_inner {
            return Err(Error::BudgetExceeded(format!(
                "inner loop did not reach η <= {eps:.3e} within {} refinements (η = {eta:.3e})",
                params.max_inner
            ))
            .at_step(k, j));
        }
        let marked: Vec<ElementId> = dorfler_mark(&report.indicators.eta_elements(), params.theta)
            .into_iter()
            .map(|i| state.mesh.leaves()[i])
            .collect();
        let mut row = state.row(k, j, Phase::Pde, Some(&report));
        row.eps_k = eps;
        row.n_marked = marked.len();
        rec.record(row)?;
        if state.mesh.num_elements() + marked.len() * ((1usize << params.b) - 1)
            > params.max_elements
        {
            return Err(Error::BudgetExceeded(format!(
                "refinement would exceed {} elements",
                params.max_elements
            ))
            .at_step(k, j));
        }
        state
            .mesh
            .refine(&marked, params.b)
            .and_then(|_| state.rebuild())
            .map_err(|e| e.at_step(k, j))?;
        j += 1;
    }
}

/// Inner loop: solve, estimate, mark, refine until `η <= ε`. Returns the
/// number of refinements `J`; rows are appended to `history`.
pub fn adapt_pde(
    state: &mut AdaptiveState<'_>,
    eps: f64,
    k: usize,
    params: &AfemParams,
    history: &mut RunHistory,
) -> Result<usize> {
    let mut sink = |_: &HistoryRow| Ok(());
    let mut rec = Recorder {
        start: Instant::now(),
        timing: params.timing,
        history,
        sink: &mut sink,
    };
    adapt_pde_inner(state, eps, k, params, &mut rec)
}

/// Adaptive loop: pre-refinement to `λ <= δ₀`, then for `k = 0, 1, ...`
/// surface resolution to `λ <= ω ε_k`, the inner loop to `η <= ε_k`, and
/// `ε_{k+1} = ρ ε_k`.
pub fn afem_run(
    surface: &MacroSurface,
    problem: &ManufacturedProblem,
    params: &AfemParams,
    sink: &mut RowSink<'_>,
) -> Result<(RunHistory, ConformingMesh, Vec<f64>)> {
    params.validate()?;
    let mut history = RunHistory::default();
    let mut rec = Recorder {
        start: Instant::now(),
        timing: params.timing,
        history: &mut history,
        sink,
    };
    let mut state = AdaptiveState::new(surface, problem, params.degree, params.quadrature)
        .map_err(|e| e.at_step(0, 0))?;

    let pre = adapt_surface(
        &mut state.mesh,
        surface,
        &state.disc,
        params.delta0,
        params.b,
        params.max_elements,
    )
    .and_then(|out| state.rebuild().map(|_| out))
    .map_err(|e| e.at_step(0, 0))?;
    let report = state
        .solve_and_estimate(&params.solver)
        .map_err(|e| e.at_step(0, 0))?;
    let mut eps = params.eps0.unwrap_or_else(|| report.indicators.eta());
    if !(eps > 0.0) {
        eps = f64::MIN_POSITIVE;
    }
    let mut row = state.row(0, 0, Phase::PreSurface, Some(&report));
    row.n_marked = pre.marked;
    row.eps_k = eps;
    rec.record(row)?;

    for k in 0..params.max_outer {
        if params.eps_stop.is_some_and(|stop| eps < stop)
            || params.max_dofs.is_some_and(|m| state.space.n_dofs() > m)
        {
            break;
        }
        let out = adapt_surface(
            &mut state.mesh,
            surface,
            &state.disc,
            params.omega * eps,
            params.b,
            params.max_elements,
        )
        .and_then(|out| state.rebuild().map(|_| out))
        .map_err(|e| e.at_step(k, 0))?;
        let mut row = state.row(k, 0, Phase::Surface, None);
        row.lambda = out.max_indicator;
        row.n_marked = out.marked;
        row.eps_k = eps;
        rec.record(row)?;
        adapt_pde_inner(&mut state, eps, k, params, &mut rec)?;
        eps *= params.rho;
    }
    let u = std::mem::take(&mut state.solution);
    Ok((history, state.mesh, u))
}

/// Baseline: `rounds + 1` solves, refining every leaf twice between them.
pub fn uniform_run(
    surface: &MacroSurface,
    problem: &ManufacturedProblem,
    params: &AfemParams,
    rounds: usize,
    sink: &mut RowSink<'_>,
) -> Result<(RunHistory, ConformingMesh, Vec<f64>)> {
    params.validate()?;
    let mut history = RunHistory::default();
    let mut rec = Recorder {
        start: Instant::now(),
        timing: params.timing,
        history: &mut history,
        sink,
    };
    let mut state = AdaptiveState::new(surface, problem, params.degree, params.quadrature)
        .map_err(|e| e.at_step(0, 0))?;
    for k in 0..=rounds {
        let mut marked = 0;
        if k > 0 {
            if state.mesh.num_elements() * 4 > params.max_elements {
                return Err(Error::BudgetExceeded(format!(
                    "uniform refinement would exceed {} elements",
                    params.max_elements
                ))
                .at_step(k, 0));
            }
            marked = state.mesh.num_elements();
            state
                .mesh
                .refine_uniform(2)
                .and_then(|_| state.rebuild())
                .map_err(|e| e.at_step(k, 0))?;
        }
        let report = state
            .solve_and_estimate(&params.solver)
            .map_err(|e| e.at_step(k, 0))?;
        let mut row = state.row(k, 0, Phase::Uniform, Some(&report));
        row.n_marked = marked;
        rec.record(row)?;
        if params.max_dofs.is_some_and(|m| state.space.n_dofs() > m) {
            break;
        }
    }
    let u = std::mem::take(&mut state.solution);
    Ok((history, state.mesh, u))
}
