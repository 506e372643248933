//! Adaptive solve of `−Δ_γ u = 6xy` on the unit sphere with quadratic elements.

use surface_afem::adaptivity::{afem_run, AfemParams, HistoryRow, Phase};
use surface_afem::harness::{benchmark, fit_history, Quantity};

fn main() -> surface_afem::Result<()> {
    let bench = benchmark("sphere_xy")?;
    let params = AfemParams {
        degree: 2,
        max_outer: 4,
        ..AfemParams::default()
    };
    println!(
        "{:>2} {:>2} {:>10} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "k", "j", "phase", "elems", "dofs", "eta", "lambda", "error"
    );
    let mut print = |r: &HistoryRow| {
        if r.phase != Phase::Pde {
            println!(
                "{:>2} {:>2} {:>10} {:>8} {:>8} {:>10.3e} {:>10.3e} {:>10.3e}",
                r.k, r.j, r.phase, r.n_elements, r.n_dofs, r.eta, r.lambda, r.energy_error
            );
        }
        Ok(())
    };
    let (history, _, _) = afem_run(&bench.surface, &bench.problem, &params, &mut print)?;
    let violations = history.replay_contracts(params.delta0, params.omega, params.rho);
    println!("contract violations: {}", violations.len());
    let n0 = bench.surface.topology().num_elements();
    let fit = fit_history(&history, Quantity::EnergyError, 4, n0, params.omega)?;
    println!("energy error ~ N^{:.3}", fit.slope);
    Ok(())
}
