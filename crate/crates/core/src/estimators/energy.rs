use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::problem::ManufacturedProblem;
use crate::fem::field::{local_coefficients, local_derivatives};
use crate::fem::space::{Discretization, FeSpace};
use crate::geometry::chart::MacroSurface;
use crate::geometry::frame::{AffineMap, SurfaceFrame};
use crate::mesh::ConformingMesh;

/// `‖∇_γ(u − U∘P)‖_{L²(γ)}`, with the discrete field pulled back through the
/// parametrization and the exact metric throughout.
pub fn energy_error(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    disc: &Discretization,
    space: &FeSpace,
    u: &[f64],
    problem: &ManufacturedProblem,
) -> Result<f64> {
    let grad_u = problem.grad_u.as_ref().ok_or(Error::MissingExactSolution)?;
    let parts: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|leaf| {
            let id = mesh.leaves()[leaf];
            let s = mesh.element(id);
            let affine = AffineMap::from_simplex(s);
            let chart = surface.chart(s.macro_id);
            let coeffs = local_coefficients(&space.dofmap, u, leaf);
            let mut sum = 0.0;
            for (xi, w, e) in disc.energy.iter() {
                let x = affine.map(xi);
                let jac = chart.jacobian(x);
                let frame = SurfaceFrame::from_tangent(jac)
                    .ok_or_else(|| Error::degenerate(id.0, "chart jacobian is rank deficient"))?;
                let (_, g, _) = local_derivatives(&coeffs, e, &affine);
                let d = jac.transpose() * grad_u(&chart.eval(x)) - g;
                sum += w * affine.det.abs() * d.dot(&(frame.metric_inv * d)) * frame.area;
            }
            Ok(sum)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `η / e`, or NaN when both vanish.
pub fn effectivity(eta: f64, error: f64) -> f64 {
    if error == 0.0 && eta == 0.0 {
        f64::NAN
    } else {
        eta / error
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use nalgebra::Vector3;

    use super::*;
    use crate::fem::QuadratureDegrees;
    use crate::geometry::surfaces;

    fn sin_problem() -> ManufacturedProblem {
        ManufacturedProblem::new("sin", |p: &Vector3<f64>| {
            2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin()
        })
        .with_solution(
            |p| (PI * p.x).sin() * (PI * p.y).sin(),
            |p| {
                Vector3::new(
                    PI * (PI * p.x).cos() * (PI * p.y).sin(),
                    PI * (PI * p.x).sin() * (PI * p.y).cos(),
                    0.0,
                )
            },
        )
    }

    #[test]
    fn zero_field_gives_the_energy_norm() {
        // ∫_{[0,1]²} |∇ sin(πx) sin(πy)|² = π²/2.
        let surface = surfaces::flat_square();
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        mesh.refine_uniform(4).unwrap();
        let disc = Discretization::new(2, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let u = vec![0.0; space.n_dofs()];
        let e = energy_error(&mesh, &surface, &disc, &space, &u, &sin_problem()).unwrap();
        assert!((e - PI / 2f64.sqrt()).abs() < 1e-10, "{e}");
    }

    #[test]
    fn missing_solution_is_reported() {
        let surface = surfaces::flat_square();
        let mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        let disc = Discretization::new(1, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let p = ManufacturedProblem::new("f", |_| 1.0);
        assert!(matches!(
            energy_error(&mesh, &surface, &disc, &space, &[0.0; 4], &p),
            Err(Error::MissingExactSolution)
        ));
    }

    #[test]
    fn effectivity_flags_the_trivial_case() {
        assert!(effectivity(0.0, 0.0).is_nan());
        assert_eq!(effectivity(2.0, 1.0), 2.0);
    }
}
