//! Resolving a steep graph surface with the geometric estimator alone.

use std::sync::Arc;

use surface_afem::adaptivity::adapt_surface;
use surface_afem::fem::{Discretization, QuadratureDegrees};
use surface_afem::geometry::{geometric_indicators, surfaces};
use surface_afem::mesh::ConformingMesh;

fn main() -> surface_afem::Result<()> {
    let surface = surfaces::graph_peak();
    for n in 1..=3 {
        let disc = Discretization::new(n, QuadratureDegrees::default())?;
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology()))?;
        println!("n = {n}");
        for i in 0..4 {
            let tol = 0.4 / f64::powi(2.0, i);
            let out = adapt_surface(&mut mesh, &surface, &disc, tol, 1, 2_000_000)?;
            let lambda = geometric_indicators(&mesh, &surface, &disc.basis, &disc.sampler);
            let max = lambda.iter().copied().fold(0.0, f64::max);
            println!(
                "  tol {tol:.4}  rounds {:>2}  marked {:>6}  elements {:>6}  max lambda {max:.3e}",
                out.rounds,
                out.marked,
                mesh.num_elements()
            );
        }
    }
    Ok(())
}
