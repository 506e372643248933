use std::collections::HashMap;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::fem::dofmap::DofMap;
use crate::fem::space::{Discretization, FeSpace};
use crate::geometry::basis::{BasisEval, LagrangeBasis, MAX_LOCAL};
use crate::geometry::frame::{discrete_tangent, AffineMap, SurfaceFrame};
use crate::mesh::{ConformingMesh, ElementId};

/// Coefficients of the leaf at position `leaf`.
pub fn local_coefficients(dofmap: &DofMap, u: &[f64], leaf: usize) -> [f64; MAX_LOCAL] {
    let mut c = [0.0; MAX_LOCAL];
    for (ci, &d) in c.iter_mut().zip(dofmap.element(leaf)) {
        *ci = u[d];
    }
    c
}

/// Value, parametric gradient and parametric Hessian of a local polynomial.
pub fn local_derivatives(
    coeffs: &[f64; MAX_LOCAL],
    eval: &BasisEval,
    affine: &AffineMap,
) -> (f64, Vector2<f64>, Matrix2<f64>) {
    let mut v = 0.0;
    let mut g = [0.0; 2];
    let mut h = [0.0; 3];
    for k in 0..eval.len {
        let c = coeffs[k];
        v += c * eval.values[k];
        g[0] += c * eval.grads[k][0];
        g[1] += c * eval.grads[k][1];
        for r in 0..3 {
            h[r] += c * eval.hessians[k][r];
        }
    }
    (v, affine.gradient(g), affine.hessian(h))
}

/// Value of `U`, its parametric gradient `∇̂U` and surface gradient `∇_ΓU`
/// at reference point `xi` of a leaf.
pub fn eval_field_gradient(
    mesh: &ConformingMesh,
    disc: &Discretization,
    space: &FeSpace,
    u: &[f64],
    leaf: usize,
    xi: [f64; 2],
) -> Option<(f64, Vector2<f64>, Vector3<f64>)> {
    let s = mesh.element(mesh.leaves()[leaf]);
    let affine = AffineMap::from_simplex(s);
    let e = disc.basis.eval(xi);
    let coeffs = local_coefficients(&space.dofmap, u, leaf);
    let (v, g, _) = local_derivatives(&coeffs, &e, &affine);
    let tangent = discrete_tangent(space.interpolant.element_nodes(leaf), &e, &affine);
    let frame = SurfaceFrame::from_tangent(tangent)?;
    Some((v, g, frame.surface_gradient(&g)))
}

/// Interpolates a field on an earlier mesh of the same forest onto the current
/// leaves. Exact when the current mesh refines the earlier one.
pub fn prolongate(
    mesh: &ConformingMesh,
    basis: &LagrangeBasis,
    old_leaves: &[ElementId],
    old_dofmap: &DofMap,
    old_u: &[f64],
    new_dofmap: &DofMap,
) -> Vec<f64> {
    let old_index: HashMap<ElementId, usize> = old_leaves
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    (0..new_dofmap.n_dofs())
        .map(|dof| {
            let (leaf, node) = new_dofmap.owner(dof);
            let id = mesh.leaves()[leaf];
            let x = AffineMap::from_simplex(mesh.element(id)).map(basis.nodes()[node]);
            let mut anc = Some(id);
            while let Some(a) = anc {
                if let Some(&old_leaf) = old_index.get(&a) {
                    let affine = AffineMap::from_simplex(mesh.element(a));
                    let e = basis.eval(affine.pull_back(x));
                    let c = local_coefficients(old_dofmap, old_u, old_leaf);
                    return (0..e.len).map(|k| c[k] * e.values[k]).sum();
                }
                anc = mesh.parent(a);
            }
            0.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::space::QuadratureDegrees;
    use crate::geometry::surfaces;

    #[test]
    fn gradients_on_graph_of_x() {
        let surface = {
            use crate::geometry::chart::{FnChart, MacroSurface};
            let c = FnChart::new(
                |p| Vector3::new(p[0], p[1], p[0]),
                |_| nalgebra::Matrix3x2::new(1.0, 0.0, 0.0, 1.0, 1.0, 0.0),
            )
            .with_polynomial_degree(1);
            let topo = Arc::new(crate::mesh::MacroTopology::reference_triangle());
            MacroSurface::new("graph_x", topo, vec![Arc::new(c)]).unwrap()
        };
        let mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        let disc = Discretization::new(1, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        // U = x̂ at the nodes (0,0), (1,0), (0,1).
        let u = [0.0, 1.0, 0.0];
        let (_, g, sg) = eval_field_gradient(&mesh, &disc, &space, &u, 0, [0.3, 0.3]).unwrap();
        assert_eq!(g, Vector2::new(1.0, 0.0));
        assert!((sg - Vector3::new(0.5, 0.0, 0.5)).norm() < 1e-15);
        let (_, _, zero) =
            eval_field_gradient(&mesh, &disc, &space, &[2.0; 3], 0, [0.3, 0.3]).unwrap();
        assert!(zero.norm() < 1e-15);
    }

    #[test]
    fn prolongation_is_exact_under_refinement() {
        let surface = surfaces::sphere();
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        mesh.refine_uniform(1).unwrap();
        let disc = Discretization::new(2, QuadratureDegrees::default()).unwrap();
        let old = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let old_leaves = mesh.leaves().to_vec();
        let u: Vec<f64> = (0..old.n_dofs())
            .map(|i| ((i * 37) % 11) as f64 - 5.0)
            .collect();
        let marked = [mesh.leaves()[3], mesh.leaves()[7]];
        mesh.refine(&marked, 2).unwrap();
        let new = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let v = prolongate(
            &mesh,
            &disc.basis,
            &old_leaves,
            &old.dofmap,
            &u,
            &new.dofmap,
        );
        // Compare at reference quadrature points of every new leaf.
        let old_index: HashMap<ElementId, usize> = old_leaves
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        for (leaf, &id) in mesh.leaves().iter().enumerate() {
            let mut anc = id;
            while !old_index.contains_key(&anc) {
                anc = mesh.parent(anc).unwrap();
            }
            let a_new = AffineMap::from_simplex(mesh.element(id));
            let a_old = AffineMap::from_simplex(mesh.element(anc));
            for &xi in &disc.element.rule.points {
                let e_new = disc.basis.eval(xi);
                let e_old = disc.basis.eval(a_old.pull_back(a_new.map(xi)));
                let cn = local_coefficients(&new.dofmap, &v, leaf);
                let co = local_coefficients(&old.dofmap, &u, old_index[&anc]);
                let vn: f64 = (0..e_new.len).map(|k| cn[k] * e_new.values[k]).sum();
                let vo: f64 = (0..e_old.len).map(|k| co[k] * e_old.values[k]).sum();
                assert!((vn - vo).abs() < 1e-12);
            }
        }
    }
}
