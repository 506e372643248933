use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::space::{Discretization, FeSpace};
use crate::fem::sparse::CsrMatrix;
use crate::geometry::basis::MAX_LOCAL;
use crate::geometry::chart::MacroSurface;
use crate::geometry::frame::{discrete_tangent, AffineMap, SurfaceFrame};
use crate::mesh::ConformingMesh;

/// Ambient scalar function on `R³`.
pub type AmbientFn = dyn Fn(&Vector3<f64>) -> f64 + Send + Sync;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `m_i = ∫_Γ φ_i`.
    pub mass: Vec<f64>,
}

/// Local stiffness (full, symmetric), load and mass of one leaf.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub len: usize,
    pub stiffness: [[f64; MAX_LOCAL]; MAX_LOCAL],
    pub load: [f64; MAX_LOCAL],
    pub mass: [f64; MAX_LOCAL],
}

pub fn local_system(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    disc: &Discretization,
    space: &FeSpace,
    leaf: usize,
    f: &AmbientFn,
) -> Result<LocalSystem> {
    let id = mesh.leaves()[leaf];
    let s = mesh.element(id);
    let affine = AffineMap::from_simplex(s);
    let chart = surface.chart(s.macro_id);
    let nodes = space.interpolant.element_nodes(leaf);
    let len = disc.basis.len();
    let mut out = LocalSystem {
        len,
        stiffness: [[0.0; MAX_LOCAL]; MAX_LOCAL],
        load: [0.0; MAX_LOCAL],
        mass: [0.0; MAX_LOCAL],
    };
    let scale = affine.det.abs();
    for (xi, w, e) in disc.element.iter() {
        let frame = SurfaceFrame::from_tangent(discrete_tangent(nodes, e, &affine))
            .ok_or_else(|| Error::degenerate(id.0, "det G_Γ <= 0"))?;
        let x = affine.map(xi);
        let q = SurfaceFrame::from_tangent(chart.jacobian(x))
            .ok_or_else(|| Error::degenerate(id.0, "chart jacobian is rank deficient"))?
            .area;
        let fq = f(&chart.eval(x)) * q;
        let wq = w * scale * frame.area;
        let mut flux = [nalgebra::Vector2::zeros(); MAX_LOCAL];
        for i in 0..len {
            let g = affine.gradient(e.grads[i]);
            flux[i] = frame.metric_inv * g;
        }
        for i in 0..len {
            let gi = affine.gradient(e.grads[i]);
            for j in i..len {
                out.stiffness[i][j] += wq * gi.dot(&flux[j]);
            }
            out.load[i] += w * scale * fq * e.values[i];
            out.mass[i] += wq * e.values[i];
        }
    }
    for i in 0..len {
        for j in 0..i {
            out.stiffness[i][j] = out.stiffness[j][i];
        }
    }
    Ok(out)
}

/// Galerkin system with `A_ij = ∫_Γ ∇_Γφ_i·∇_Γφ_j`, `b_i = ∫ f(χ) q φ̂_i`.
pub fn assemble(
    mesh: &ConformingMesh,
    surface: &MacroSurface,
    disc: &Discretization,
    space: &FeSpace,
    f: &AmbientFn,
) -> Result<LinearSystem> {
    let locals: Vec<LocalSystem> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|leaf| local_system(mesh, surface, disc, space, leaf, f))
        .collect::<Result<_>>()?;
    let n = space.n_dofs();
    let len = disc.basis.len();
    let mut triplets = Vec::with_capacity(locals.len() * len * len);
    let mut rhs = vec![0.0; n];
    let mut mass = vec![0.0; n];
    for (leaf, local) in locals.iter().enumerate() {
        let dofs = space.dofmap.element(leaf);
        for i in 0..len {
            rhs[dofs[i]] += local.load[i];
            mass[dofs[i]] += local.mass[i];
            for j in 0..len {
                triplets.push((dofs[i], dofs[j], local.stiffness[i][j]));
            }
        }
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::from_triplets(n, triplets),
        rhs,
        mass,
    })
}
