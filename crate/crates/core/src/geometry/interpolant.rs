//! The piecewise Lagrange interpolant `X_T = I_T χ` and the geometric indicator.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::geometry::basis::{lattice, BasisEval, LagrangeBasis};
use crate::geometry::chart::{Chart, MacroSurface};
use crate::geometry::frame::{discrete_frame, discrete_tangent, AffineMap, SurfaceFrame};
use crate::geometry::quadrature::QuadratureRule;
use crate::mesh::{ConformingMesh, ParametricSimplex};

/// Nodal positions of `X_T` for every leaf, in local node order.
#[derive(Debug, Clone)]
pub struct SurfaceInterpolant {
    degree: usize,
    local: usize,
    nodes: Vec<Vector3<f64>>,
}

impl SurfaceInterpolant {
    /// Evaluates each chart once per global node, so shared nodes are bit-identical.
    pub fn new(
        mesh: &ConformingMesh,
        surface: &MacroSurface,
        dofmap: &DofMap,
        basis: &LagrangeBasis,
    ) -> Self {
        let positions: Vec<Vector3<f64>> = (0..dofmap.n_dofs())
            .into_par_iter()
            .map(|dof| {
                let (patch, x) = dofmap.location(mesh, basis, dof);
                surface.chart(patch).eval(x)
            })
            .collect();
        let local = basis.len();
        let mut nodes = Vec::with_capacity(mesh.num_elements() * local);
        for leaf in 0..mesh.num_elements() {
            nodes.extend(dofmap.element(leaf).iter().map(|&d| positions[d]));
        }
        SurfaceInterpolant {
            degree: basis.degree(),
            local,
            nodes,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn element_nodes(&self, leaf: usize) -> &[Vector3<f64>] {
        &self.nodes[leaf * self.local..(leaf + 1) * self.local]
    }

    /// Fails if the discrete surface is singular or folded against the exact
    /// orientation at any point of `rule`.
    pub fn check(
        &self,
        mesh: &ConformingMesh,
        surface: &MacroSurface,
        basis: &LagrangeBasis,
        rule: &QuadratureRule,
    ) -> Result<()> {
        let evals: Vec<BasisEval> = rule.points.iter().map(|&p| basis.eval(p)).collect();
        mesh.leaves()
            .par_iter()
            .enumerate()
            .try_for_each(|(leaf, &id)| {
                let s = mesh.element(id);
                let affine = AffineMap::from_simplex(s);
                let chart = surface.chart(s.macro_id);
                for (e, &xi) in evals.iter().zip(&rule.points) {
                    let t = discrete_tangent(self.element_nodes(leaf), e, &affine);
                    let Some(f) = SurfaceFrame::from_tangent(t) else {
                        return Err(Error::degenerate(id.0, "det G_Γ <= 0"));
                    };
                    let exact = chart.jacobian(affine.map(xi));
                    let nu = exact.column(0).cross(&exact.column(1));
                    if f.normal.dot(&nu) <= 0.0 {
                        return Err(Error::degenerate(id.0, "discrete surface folds over"));
                    }
                }
                Ok(())
            })
    }
}

/// Builds `X_T` and verifies it is nondegenerate at the points of `rule`.
pub fn interpolate_chart(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    dofmap: &DofMap,
    basis: &LagrangeBasis,
    rule: &QuadratureRule,
) -> Result<SurfaceInterpolant> {
    let interp = SurfaceInterpolant::new(mesh, surface, dofmap, basis);
    interp.check(mesh, surface, basis, rule)?;
    Ok(interp)
}

/// Chart values at the Lagrange nodes of one leaf, evaluated in its own patch.
pub fn local_nodes(
    surface: &MacroSurface,
    s: &ParametricSimplex,
    basis: &LagrangeBasis,
) -> Vec<Vector3<f64>> {
    let affine = AffineMap::from_simplex(s);
    let chart = surface.chart(s.macro_id);
    basis
        .nodes()
        .iter()
        .map(|&p| chart.eval(affine.map(p)))
        .collect()
}

/// Reference points at which `‖∇̂(χ − X_T)‖` is sampled: the degree `2n + 2`
/// lattice together with the element quadrature nodes.
#[derive(Debug, Clone)]
pub struct GeometricSampler {
    points: Vec<[f64; 2]>,
    evals: Vec<BasisEval>,
    pub safety: f64,
}

impl GeometricSampler {
    pub fn new(basis: &LagrangeBasis, rule: &QuadratureRule) -> Self {
        let mut points = lattice(2 * basis.degree() + 2);
        points.extend_from_slice(&rule.points);
        let evals = points.iter().map(|&p| basis.eval(p)).collect();
        GeometricSampler {
            points,
            evals,
            safety: 1.0,
        }
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }
}

/// `λ_T(γ, T)`: sampled maximum of the Frobenius norm of `∇̂(χ − X_T)`.
pub fn geometric_indicator(
    chart: &dyn Chart,
    s: &ParametricSimplex,
    nodes: &[Vector3<f64>],
    sampler: &GeometricSampler,
) -> f64 {
    let affine = AffineMap::from_simplex(s);
    let mut worst: f64 = 0.0;
    for (e, &xi) in sampler.evals.iter().zip(&sampler.points) {
        let t = discrete_tangent(nodes, e, &affine);
        let exact = chart.jacobian(affine.map(xi));
        worst = worst.max((exact - t).norm());
    }
    sampler.safety * worst
}

/// `λ_T` for every leaf, in leaf order.
pub fn geometric_indicators(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    basis: &LagrangeBasis,
    sampler: &GeometricSampler,
) -> Vec<f64> {
    if surface
        .polynomial_degree()
        .is_some_and(|d| d <= basis.degree())
    {
        return vec![0.0; mesh.num_elements()];
    }
    mesh.leaves()
        .par_iter()
        .map(|&id| {
            let s = mesh.element(id);
            let nodes = local_nodes(surface, s, basis);
            geometric_indicator(surface.chart(s.macro_id), s, &nodes, sampler)
        })
        .collect()
}

/// `E_Γ = q⁻¹ T (q_Γ G_Γ⁻¹ − q G⁻¹) Tᵀ` at one point.
pub fn consistency_matrix(exact: &SurfaceFrame, discrete: &SurfaceFrame) -> Matrix3<f64> {
    let inner = discrete.metric_inv * discrete.area - exact.metric_inv * exact.area;
    exact.tangent * inner * exact.tangent.transpose() / exact.area
}

/// `max |E_Γ|` (largest entry) over the sampling points of one leaf.
pub fn consistency_error(
    chart: &dyn Chart,
    s: &ParametricSimplex,
    nodes: &[Vector3<f64>],
    sampler: &GeometricSampler,
) -> Result<f64> {
    let affine = AffineMap::from_simplex(s);
    let mut worst: f64 = 0.0;
    for (e, &xi) in sampler.evals.iter().zip(&sampler.points) {
        let discrete = discrete_frame(nodes, e, &affine)
            .ok_or_else(|| Error::degenerate(0, "det G_Γ <= 0"))?;
        let exact = SurfaceFrame::from_tangent(chart.jacobian(affine.map(xi)))
            .ok_or_else(|| Error::degenerate(0, "chart jacobian is rank deficient"))?;
        worst = worst.max(consistency_matrix(&exact, &discrete.frame).amax());
    }
    Ok(worst)
}
