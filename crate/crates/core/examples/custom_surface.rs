//! A user-defined graph surface and load, solved adaptively.

use std::f64::consts::PI;
use std::sync::Arc;

use surface_afem::adaptivity::{afem_run, AfemParams, Phase};
use surface_afem::estimators::ManufacturedProblem;
use surface_afem::geometry::{HeightFunction, Lift, MacroSurface};
use surface_afem::mesh::MacroTopology;

/// `g(x, y) = a sin(2πx) sin(2πy)`.
struct EggCrate(f64);

impl HeightFunction for EggCrate {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.0 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
    }
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * x).sin_cos();
        let (sy, cy) = (2.0 * PI * y).sin_cos();
        [2.0 * PI * self.0 * cx * sy, 2.0 * PI * self.0 * sx * cy]
    }
    fn hessian(&self, x: f64, y: f64) -> [f64; 3] {
        let (sx, cx) = (2.0 * PI * x).sin_cos();
        let (sy, cy) = (2.0 * PI * y).sin_cos();
        let k = 4.0 * PI * PI * self.0;
        [-k * sx * sy, k * cx * cy, -k * sx * sy]
    }
}

fn main() -> surface_afem::Result<()> {
    let surface = MacroSurface::lifted(
        "egg_crate",
        MacroTopology::unit_square(),
        Lift::Graph(Arc::new(EggCrate(0.15))),
    );
    let problem = ManufacturedProblem::new("f1", |_| 1.0);
    let params = AfemParams {
        degree: 2,
        max_outer: 3,
        ..AfemParams::default()
    };
    let (history, mesh, u) = afem_run(&surface, &problem, &params, &mut |_| Ok(()))?;
    for r in history.rows_with(Phase::PdeExit) {
        println!(
            "k {}  J {}  elements {:>6}  eta {:.3e}  lambda {:.3e}",
            r.k, r.j, r.n_elements, r.eta, r.lambda
        );
    }
    let peak = u.iter().copied().fold(0.0, f64::max);
    println!("{} leaves, max U = {peak:.5}", mesh.num_elements());
    Ok(())
}
