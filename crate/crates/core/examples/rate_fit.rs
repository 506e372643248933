//! Uniform convergence study on the unit square and the fitted rates.

use surface_afem::harness::{fit_history, run_benchmark, Mode, Quantity, RunConfig};

fn main() -> surface_afem::Result<()> {
    for n in 1..=3 {
        let mut cfg = RunConfig::new("flat_square_sin");
        cfg.mode = Mode::Uniform;
        cfg.rounds = 5;
        cfg.params.degree = n;
        let out = run_benchmark(&cfg)?;
        print!("n = {n}:");
        for q in [Quantity::EnergyError, Quantity::Eta, Quantity::OscF] {
            let fit = fit_history(&out.history, q, 4, out.initial_elements, cfg.params.omega)?;
            print!("  {} {:.3}", q.as_str(), fit.slope);
        }
        println!();
    }
    Ok(())
}
