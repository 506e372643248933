use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::fem::AmbientFn;
use crate::geometry::chart::MacroSurface;
use crate::geometry::frame::{AffineMap, SurfaceFrame};
use crate::geometry::quadrature::{quadrature_rule, Domain};
use crate::mesh::ConformingMesh;

pub type AmbientVecFn = dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync;

/// Data `f` and, when known, the exact solution `u` with its ambient gradient.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub f: Arc<AmbientFn>,
    pub u: Option<Arc<AmbientFn>>,
    pub grad_u: Option<Arc<AmbientVecFn>>,
}

impl std::fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("exact", &self.has_exact_solution())
            .finish()
    }
}

impl ManufacturedProblem {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Vector3<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ManufacturedProblem {
            name: name.into(),
            f: Arc::new(f),
            u: None,
            grad_u: None,
        }
    }

    pub fn with_solution(
        mut self,
        u: impl Fn(&Vector3<f64>) -> f64 + Send + Sync + 'static,
        grad_u: impl Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
    ) -> Self {
        self.u = Some(Arc::new(u));
        self.grad_u = Some(Arc::new(grad_u));
        self
    }

    pub fn has_exact_solution(&self) -> bool {
        self.grad_u.is_some()
    }

    /// `(∫_γ f, ∫_γ u)` by high-order quadrature over the leaves of `mesh`.
    pub fn surface_integrals(
        &self,
        mesh: &ConformingMesh,
        surface: &MacroSurface,
        degree: usize,
    ) -> Result<(f64, Option<f64>)> {
        let rule = quadrature_rule(Domain::Triangle, degree)?;
        let (mut int_f, mut int_u) = (0.0, 0.0);
        for &id in mesh.leaves() {
            let s = mesh.element(id);
            let affine = AffineMap::from_simplex(s);
            let chart = surface.chart(s.macro_id);
            for (xi, w) in rule.iter() {
                let x = affine.map(xi);
                let q = SurfaceFrame::from_tangent(chart.jacobian(x))
                    .ok_or_else(|| Error::degenerate(id.0, "chart jacobian is rank deficient"))?
                    .area;
                let p = chart.eval(x);
                let dw = w * affine.det.abs() * q;
                int_f += dw * (self.f)(&p);
                if let Some(u) = &self.u {
                    int_u += dw * u(&p);
                }
            }
        }
        Ok((int_f, self.u.as_ref().map(|_| int_u)))
    }
}
