//! Residual estimator, oscillation and true error on a sequence of uniform meshes.

use std::sync::Arc;

use surface_afem::estimators::{effectivity, energy_error, estimate};
use surface_afem::fem::{
    assemble, solve, Discretization, FeSpace, QuadratureDegrees, SolverOptions,
};
use surface_afem::harness::benchmark;
use surface_afem::mesh::ConformingMesh;

fn main() -> surface_afem::Result<()> {
    let bench = benchmark("graph_peak")?;
    let (surface, problem) = (&bench.surface, &bench.problem);
    let disc = Discretization::new(2, QuadratureDegrees::default())?;
    let mut mesh = ConformingMesh::new(Arc::clone(surface.topology()))?;
    mesh.refine_uniform(4)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "elems", "eta", "osc_u", "osc_f", "error", "eff"
    );
    for _ in 0..4 {
        mesh.refine_uniform(2)?;
        let space = FeSpace::new(&mesh, surface, &disc)?;
        let system = assemble(&mesh, surface, &disc, &space, &*problem.f)?;
        let u = solve(&system, &space.dofmap, &SolverOptions::default(), None)?.coefficients;
        let ind = estimate(&mesh, surface, &disc, &space, &u, problem)?;
        let err = energy_error(&mesh, surface, &disc, &space, &u, problem)?;
        println!(
            "{:>6} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>8.3}",
            mesh.num_elements(),
            ind.eta(),
            ind.osc_u(),
            ind.osc_f(),
            err,
            effectivity(ind.eta(), err)
        );
    }
    Ok(())
}
