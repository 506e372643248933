//! Newest-vertex bisection: repeated local refinement towards a corner stays conforming.

use std::sync::Arc;

use surface_afem::geometry::surfaces;
use surface_afem::mesh::ConformingMesh;

fn main() -> surface_afem::Result<()> {
    let surface = surfaces::lshape();
    let mut mesh = ConformingMesh::new(Arc::clone(surface.topology()))?;
    let corner = [0.0, 0.0, 0.0];
    for step in 0..20 {
        let macro_vertex = nalgebra::Vector3::from(corner);
        // Mark every leaf whose parametric image touches the re-entrant corner.
        let marked: Vec<_> = mesh
            .leaves()
            .iter()
            .copied()
            .filter(|&id| {
                let s = mesh.element(id);
                let chart = surface.chart(s.macro_id);
                s.vertex_coords()
                    .iter()
                    .any(|&p| (chart.eval(p) - macro_vertex).norm() < 1e-12)
            })
            .collect();
        let stats = mesh.refine(&marked, 1)?;
        let report = mesh.check_conformity();
        println!(
            "step {step:>2}: marked {:>2}  closure {:>3}  elements {:>5}  hanging {}  C = {:.3}",
            stats.marked,
            stats.closure_bisections,
            mesh.num_elements(),
            report.hanging_faces,
            mesh.complexity_ratio().unwrap_or(0.0)
        );
    }
    let min_angle = mesh
        .leaves()
        .iter()
        .map(|&id| mesh.element(id).min_angle())
        .fold(f64::INFINITY, f64::min);
    println!(
        "smallest parametric angle {:.2} degrees",
        min_angle.to_degrees()
    );
    Ok(())
}
