//! Writes the discrete sphere as OFF files at increasing tessellation levels.

use surface_afem::fem::{Discretization, FeSpace, QuadratureDegrees};
use surface_afem::geometry::surfaces;
use surface_afem::harness::{export_surface_off, parse_off};
use surface_afem::mesh::ConformingMesh;

fn main() -> surface_afem::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(std::env::temp_dir, Into::into);
    let surface = surfaces::sphere();
    let mut mesh = ConformingMesh::new(std::sync::Arc::clone(surface.topology()))?;
    mesh.refine_uniform(2)?;
    let disc = Discretization::new(3, QuadratureDegrees::default())?;
    let space = FeSpace::new(&mesh, &surface, &disc)?;
    for level in 0..=3 {
        let path = dir.join(format!("sphere_p3_level{level}.off"));
        export_surface_off(&mesh, &disc, &space, &path, level)?;
        let off = parse_off(&std::fs::read_to_string(&path)?)?;
        println!(
            "{}: {} vertices, {} faces",
            path.display(),
            off.vertices.len(),
            off.faces.len()
        );
    }
    Ok(())
}
