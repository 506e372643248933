//! Interior and jump residuals, the indicators `η_T` and the oscillations.
//!
//! Sign conventions, in one place:
//! - `η` jump: `J_S = ∇_ΓU⁺·n⁺ + ∇_ΓU⁻·n⁻` with each side's outward co-normal,
//!   integrated against surface length `r_Γ dŝ`;
//! - `osc_U` face term: `q⁺∇̂U⁺G⁺⁻¹n̂⁺ − q⁻∇̂U⁻G⁻⁻¹n̂⁻`, plain parametric length;
//! - combined `osc` face term: the same with `+`, plain parametric length;
//! - element terms `fq`, `div̂(q_Γ∇̂UG_Γ⁻¹)` and their sum, plain parametric area.

use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::problem::ManufacturedProblem;
use crate::estimators::projection::Projector;
use crate::fem::assemble::AmbientFn;
use crate::fem::field::{local_coefficients, local_derivatives};
use crate::fem::space::{Discretization, FeSpace};
use crate::geometry::basis::{BasisEval, LagrangeBasis, MAX_LOCAL};
use crate::geometry::chart::{Chart, MacroSurface};
use crate::geometry::frame::{
    discrete_frame, discrete_tangent, face_frame, AffineMap, SurfaceFrame,
};
use crate::mesh::{ConformingMesh, ElementId, FaceSide, InteriorFace};

/// Per-element indicator values (squared) and their aggregates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndicatorSet {
    pub eta_interior_sq: Vec<f64>,
    pub eta_jump_sq: Vec<f64>,
    pub lambda: Vec<f64>,
    pub osc_u_sq: Vec<f64>,
    pub osc_f_sq: Vec<f64>,
    /// The combined `osc_T(U, f, T)²`.
    pub osc_sq: Vec<f64>,
}

impl IndicatorSet {
    pub fn len(&self) -> usize {
        self.eta_interior_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta_interior_sq.is_empty()
    }

    /// `η_T` per element.
    pub fn eta_elements(&self) -> Vec<f64> {
        self.eta_interior_sq
            .iter()
            .zip(&self.eta_jump_sq)
            .map(|(a, b)| (a + b).sqrt())
            .collect()
    }

    pub fn eta(&self) -> f64 {
        self.eta_interior_sq
            .iter()
            .chain(&self.eta_jump_sq)
            .sum::<f64>()
            .sqrt()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }

    pub fn osc_u(&self) -> f64 {
        self.osc_u_sq.iter().sum::<f64>().sqrt()
    }

    pub fn osc_f(&self) -> f64 {
        self.osc_f_sq.iter().sum::<f64>().sqrt()
    }

    pub fn osc(&self) -> f64 {
        self.osc_sq.iter().sum::<f64>().sqrt()
    }
}

/// Data shared by all points of one leaf.
struct Leaf<'a> {
    index: usize,
    id: ElementId,
    affine: AffineMap,
    nodes: &'a [Vector3<f64>],
    coeffs: [f64; MAX_LOCAL],
}

impl<'a> Leaf<'a> {
    fn new(mesh: &ConformingMesh, space: &'a FeSpace, u: &[f64], index: usize) -> Self {
        let id = mesh.leaves()[index];
        Leaf {
            index,
            id,
            affine: AffineMap::from_simplex(mesh.element(id)),
            nodes: space.interpolant.element_nodes(index),
            coeffs: local_coefficients(&space.dofmap, u, index),
        }
    }
}

/// Pointwise interior data.
struct InteriorPoint {
    /// `div̂(q_Γ ∇̂U G_Γ⁻¹)`.
    div_flux: f64,
    /// `f q`.
    fq: f64,
    q_gamma: f64,
}

impl InteriorPoint {
    fn residual(&self) -> f64 {
        (self.fq + self.div_flux) / self.q_gamma
    }
}

fn interior_point(
    leaf: &Leaf<'_>,
    chart: &dyn Chart,
    f: &AmbientFn,
    xi: [f64; 2],
    eval: &BasisEval,
) -> Result<InteriorPoint> {
    let frame = discrete_frame(leaf.nodes, eval, &leaf.affine)
        .ok_or_else(|| Error::degenerate(leaf.id.0, "det G_Γ <= 0"))?;
    let (_, g, h) = local_derivatives(&leaf.coeffs, eval, &leaf.affine);
    let x = leaf.affine.map(xi);
    let q = SurfaceFrame::from_tangent(chart.jacobian(x))
        .ok_or_else(|| Error::degenerate(leaf.id.0, "chart jacobian is rank deficient"))?
        .area;
    Ok(InteriorPoint {
        div_flux: frame.divergence_flux(&g, &h),
        fq: f(&chart.eval(x)) * q,
        q_gamma: frame.frame.area,
    })
}

/// One side of a face with its leaf data.
struct Side<'a> {
    leaf: Leaf<'a>,
    face: FaceSide,
    centroid: [f64; 2],
    edge: Vector2<f64>,
}

impl<'a> Side<'a> {
    fn new(mesh: &ConformingMesh, space: &'a FeSpace, u: &[f64], face: FaceSide) -> Result<Self> {
        let index = mesh
            .leaf_index(face.element)
            .ok_or(Error::UnknownElement(face.element.0))?;
        let c = mesh.element(face.element).vertex_coords();
        Ok(Side {
            leaf: Leaf::new(mesh, space, u, index),
            face,
            centroid: [
                (c[0][0] + c[1][0] + c[2][0]) / 3.0,
                (c[0][1] + c[1][1] + c[2][1]) / 3.0,
            ],
            edge: Vector2::new(face.end[0] - face.start[0], face.end[1] - face.start[1]),
        })
    }

    /// `(∇_ΓU·n_Γ, r_Γ)` at face parameter `t`.
    fn flux(&self, basis: &LagrangeBasis, t: f64) -> Result<(f64, f64)> {
        let affine = &self.leaf.affine;
        let x = self.face.point(t);
        let eval = basis.eval(affine.pull_back(x));
        let frame = SurfaceFrame::from_tangent(discrete_tangent(self.leaf.nodes, &eval, affine))
            .ok_or_else(|| Error::degenerate(self.leaf.id.0, "det G_Γ <= 0"))?;
        let inward = Vector2::new(self.centroid[0] - x[0], self.centroid[1] - x[1]);
        let ff = face_frame(&frame, self.edge, inward);
        let (_, g, _) = local_derivatives(&self.leaf.coeffs, &eval, affine);
        Ok((g.dot(&ff.weight), ff.r))
    }
}

/// `R_T = F_Γ + Δ_ΓU` at reference point `xi` of a leaf.
#[allow(clippy::too_many_arguments)]
pub fn interior_residual(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    disc: &Discretization,
    space: &FeSpace,
    u: &[f64],
    problem: &ManufacturedProblem,
    leaf: usize,
    xi: [f64; 2],
) -> Result<f64> {
    let leaf = Leaf::new(mesh, space, u, leaf);
    let chart = surface.chart(mesh.element(leaf.id).macro_id);
    Ok(interior_point(&leaf, chart, &*problem.f, xi, &disc.basis.eval(xi))?.residual())
}

/// `J_S = ∇_ΓU⁺·n⁺ + ∇_ΓU⁻·n⁻` at face parameter `t ∈ [0, 1]`.
pub fn jump_residual(
    mesh: &ConformingMesh,
    disc: &Discretization,
    space: &FeSpace,
    u: &[f64],
    face: &InteriorFace,
    t: f64,
) -> Result<f64> {
    let (a, _) = Side::new(mesh, space, u, face.plus)?.flux(&disc.basis, t)?;
    let (b, _) = Side::new(mesh, space, u, face.minus)?.flux(&disc.basis, t)?;
    Ok(a + b)
}

struct ElementTerms {
    interior_sq: f64,
    osc_u_sq: f64,
    osc_f_sq: f64,
    osc_sq: f64,
}

struct FaceTerms {
    plus: usize,
    minus: usize,
    /// `∫_S J² dS`.
    jump_sq: f64,
    /// Projection residuals on `[0, 1]` for the `osc_U` and combined face terms.
    osc_u_res: f64,
    osc_res: f64,
}

/// `η`, `osc_U`, `osc_f` and the combined `osc` for every leaf; `lambda` is left empty.
pub fn estimate(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    disc: &Discretization,
    space: &FeSpace,
    u: &[f64],
    problem: &ManufacturedProblem,
) -> Result<IndicatorSet> {
    let n = disc.degree();
    let el_proj = Projector::new(&disc.element.rule, 2 * n - 2)?;
    let face_proj = Projector::new(&disc.edge, 2 * n - 1)?;
    let f = &*problem.f;

    let elements: Vec<ElementTerms> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|index| {
            let leaf = Leaf::new(mesh, space, u, index);
            let s = mesh.element(leaf.id);
            let chart = surface.chart(s.macro_id);
            let h = s.mesh_size();
            let det = leaf.affine.det.abs();
            let len = disc.element.rule.len();
            let mut interior = 0.0;
            let mut fq = Vec::with_capacity(len);
            let mut div = Vec::with_capacity(len);
            let mut sum = Vec::with_capacity(len);
            for (xi, w, e) in disc.element.iter() {
                let p = interior_point(&leaf, chart, f, xi, e)?;
                let r = p.residual();
                interior += w * det * r * r * p.q_gamma;
                fq.push(p.fq);
                div.push(p.div_flux);
                sum.push(p.fq + p.div_flux);
            }
            let scale = h * h * det;
            Ok(ElementTerms {
                interior_sq: h * h * interior,
                osc_u_sq: scale * el_proj.residual_sq(&div),
                osc_f_sq: scale * el_proj.residual_sq(&fq),
                osc_sq: scale * el_proj.residual_sq(&sum),
            })
        })
        .collect::<Result<_>>()?;

    let faces = mesh.interior_faces();
    let edge_rule = &disc.edge;
    let face_terms: Vec<FaceTerms> = faces
        .par_iter()
        .map(|face| {
            let plus = Side::new(mesh, space, u, face.plus)?;
            let minus = Side::new(mesh, space, u, face.minus)?;
            let len = face.plus.parametric_length();
            let mut jump_sq = 0.0;
            let mut minus_vals = Vec::with_capacity(edge_rule.len());
            let mut plus_vals = Vec::with_capacity(edge_rule.len());
            for (p, w) in edge_rule.iter() {
                let (fp, rp) = plus.flux(&disc.basis, p[0])?;
                let (fm, rm) = minus.flux(&disc.basis, p[0])?;
                let j = fp + fm;
                jump_sq += w * j * j * rp * len;
                // q_Γ ∇̂U G_Γ⁻¹ n̂ = r_Γ ∇_ΓU·n_Γ on each side.
                minus_vals.push(rp * fp - rm * fm);
                plus_vals.push(rp * fp + rm * fm);
            }
            Ok(FaceTerms {
                plus: plus.leaf.index,
                minus: minus.leaf.index,
                jump_sq,
                osc_u_res: face_proj.residual_sq(&minus_vals),
                osc_res: face_proj.residual_sq(&plus_vals),
            })
        })
        .collect::<Result<_>>()?;

    let mut set = IndicatorSet {
        eta_interior_sq: elements.iter().map(|e| e.interior_sq).collect(),
        eta_jump_sq: vec![0.0; mesh.num_elements()],
        lambda: Vec::new(),
        osc_u_sq: elements.iter().map(|e| e.osc_u_sq).collect(),
        osc_f_sq: elements.iter().map(|e| e.osc_f_sq).collect(),
        osc_sq: elements.iter().map(|e| e.osc_sq).collect(),
    };
    for (face, terms) in faces.iter().zip(&face_terms) {
        for (leaf, side) in [(terms.plus, &face.plus), (terms.minus, &face.minus)] {
            let h = mesh.element(side.element).mesh_size();
            let len = side.parametric_length();
            set.eta_jump_sq[leaf] += h * terms.jump_sq;
            set.osc_u_sq[leaf] += h * len * terms.osc_u_res;
            set.osc_sq[leaf] += h * len * terms.osc_res;
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{assemble, solve, QuadratureDegrees, SolverOptions};
    use crate::geometry::surfaces;

    fn setup(
        surface: &MacroSurface,
        n: usize,
        uniform: u32,
    ) -> (ConformingMesh, Discretization, FeSpace) {
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        if uniform > 0 {
            mesh.refine_uniform(uniform).unwrap();
        }
        let disc = Discretization::new(n, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, surface, &disc).unwrap();
        (mesh, disc, space)
    }

    /// Nodal interpolation of an ambient function.
    fn interpolate(
        mesh: &ConformingMesh,
        surface: &MacroSurface,
        disc: &Discretization,
        space: &FeSpace,
        g: impl Fn(Vector3<f64>) -> f64,
    ) -> Vec<f64> {
        (0..space.n_dofs())
            .map(|d| {
                let (patch, x) = space.dofmap.location(mesh, &disc.basis, d);
                g(surface.chart(patch).eval(x))
            })
            .collect()
    }

    #[test]
    fn flat_residual_values() {
        let surface = surfaces::flat_triangle();
        let (mesh, disc, space) = setup(&surface, 1, 0);
        let zero = ManufacturedProblem::new("zero", |_| 0.0);
        let one = ManufacturedProblem::new("one", |_| 1.0);
        let u = vec![0.0, 1.0, 0.0];
        let r =
            interior_residual(&mesh, &surface, &disc, &space, &u, &zero, 0, [0.2, 0.3]).unwrap();
        assert_eq!(r, 0.0);
        let r = interior_residual(
            &mesh,
            &surface,
            &disc,
            &space,
            &[0.0; 3],
            &one,
            0,
            [0.2, 0.3],
        )
        .unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn flat_p2_x_squared_with_f_minus_two() {
        let surface = surfaces::flat_triangle();
        let (mesh, disc, space) = setup(&surface, 2, 0);
        let u = interpolate(&mesh, &surface, &disc, &space, |p| p.x * p.x);
        let problem = ManufacturedProblem::new("m2", |_| -2.0);
        let r =
            interior_residual(&mesh, &surface, &disc, &space, &u, &problem, 0, [0.3, 0.1]).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn single_triangle_eta_is_one_half() {
        let surface = surfaces::flat_triangle();
        let (mesh, disc, space) = setup(&surface, 1, 0);
        let problem = ManufacturedProblem::new("one", |_| 1.0);
        let set = estimate(&mesh, &surface, &disc, &space, &[0.0; 3], &problem).unwrap();
        assert!((set.eta() - 0.5).abs() < 1e-15);
        assert_eq!(set.eta_jump_sq, vec![0.0]);
    }

    #[test]
    fn linear_field_has_no_jumps_on_flat_mesh() {
        let surface = surfaces::flat_square();
        let (mesh, disc, space) = setup(&surface, 1, 3);
        let u = interpolate(&mesh, &surface, &disc, &space, |p| 2.0 * p.x - 3.0 * p.y);
        for face in mesh.interior_faces() {
            for t in [0.1, 0.5, 0.9] {
                assert!(
                    jump_residual(&mesh, &disc, &space, &u, &face, t)
                        .unwrap()
                        .abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn gradient_kink_across_one_face() {
        // U = max(x - y, 0) on the square split along y = x.
        let surface = surfaces::flat_square();
        let (mesh, disc, space) = setup(&surface, 1, 0);
        let u = interpolate(&mesh, &surface, &disc, &space, |p| (p.x - p.y).max(0.0));
        let face = mesh.interior_faces()[0];
        let j = jump_residual(&mesh, &disc, &space, &u, &face, 0.5).unwrap();
        // ∇U = (1, -1) on one side, 0 on the other, normal (-1, 1)/√2.
        assert!((j.abs() - 2f64.sqrt()).abs() < 1e-14, "{j}");
    }

    #[test]
    fn flat_p1_has_exactly_zero_osc_u() {
        let surface = surfaces::lshape();
        let (mut mesh, disc, _) = setup(&surface, 1, 2);
        let marked: Vec<_> = mesh.leaves().iter().step_by(5).copied().collect();
        mesh.refine(&marked, 1).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let problem = ManufacturedProblem::new("one", |_| 1.0);
        let sys = assemble(&mesh, &surface, &disc, &space, &*problem.f).unwrap();
        let sol = solve(&sys, &space.dofmap, &SolverOptions::default(), None).unwrap();
        let set = estimate(&mesh, &surface, &disc, &space, &sol.coefficients, &problem).unwrap();
        assert!(set.osc_u_sq.iter().all(|&v| v == 0.0));
        assert!(set.osc_f_sq.iter().all(|&v| v == 0.0));
        assert!(set.eta() > 0.0);
    }

    #[test]
    fn osc_f_of_x_cubed_on_reference_triangle() {
        // Oracle: ‖x³ − mean‖² = ∫x⁶ − (∫x³)²/|T| = 6!/8! − (3!/5!)²·2.
        let surface = surfaces::flat_triangle();
        let (mesh, disc, space) = setup(&surface, 1, 0);
        let problem = ManufacturedProblem::new("x3", |p: &Vector3<f64>| p.x.powi(3));
        let set = estimate(&mesh, &surface, &disc, &space, &[0.0; 3], &problem).unwrap();
        let exact_sq = 1.0 / 56.0 - 2.0 * (1.0f64 / 20.0).powi(2);
        let h2 = 0.5;
        assert!((set.osc_f_sq[0] - h2 * exact_sq).abs() < 1e-14);
    }

    #[test]
    fn sphere_jumps_are_small_for_smooth_interpolant() {
        let surface = surfaces::sphere();
        let mut prev = f64::INFINITY;
        for level in [2, 4] {
            let (mesh, disc, space) = setup(&surface, 2, level);
            let u: Vec<f64> = (0..space.n_dofs())
                .map(|d| {
                    let (patch, x) = space.dofmap.location(&mesh, &disc.basis, d);
                    surface.chart(patch).eval(x).z
                })
                .collect();
            let worst = mesh
                .interior_faces()
                .iter()
                .map(|f| {
                    jump_residual(&mesh, &disc, &space, &u, f, 0.5)
                        .unwrap()
                        .abs()
                })
                .fold(0.0, f64::max);
            assert!(worst < prev / 2.0, "{worst} vs {prev}");
            prev = worst;
        }
    }
}
