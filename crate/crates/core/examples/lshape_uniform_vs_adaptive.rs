//! Corner singularity on the L-shape: uniform refinement against AFEM.

use surface_afem::adaptivity::{afem_run, uniform_run, AfemParams};
use surface_afem::harness::{benchmark, fit_history, Quantity};

fn main() -> surface_afem::Result<()> {
    let bench = benchmark("lshape_f1")?;
    let params = AfemParams {
        degree: 2,
        max_outer: 10,
        ..AfemParams::default()
    };
    let n0 = bench.surface.topology().num_elements();
    let (uniform, _, _) = uniform_run(&bench.surface, &bench.problem, &params, 5, &mut |_| Ok(()))?;
    let (adaptive, mesh, _) = afem_run(&bench.surface, &bench.problem, &params, &mut |_| Ok(()))?;
    for (label, h) in [("uniform", &uniform), ("adaptive", &adaptive)] {
        let fit = fit_history(h, Quantity::TotalEstimator, 4, n0, params.omega)?;
        println!("{label:>8}: estimator ~ N^{:.3}", fit.slope);
        for (n, e) in &fit.points {
            println!("          N = {n:>7}  eta = {e:.3e}");
        }
    }
    let h_min = mesh
        .leaves()
        .iter()
        .map(|&id| mesh.element(id).mesh_size())
        .fold(f64::INFINITY, f64::min);
    println!("smallest adaptive element size {h_min:.2e}");
    Ok(())
}
