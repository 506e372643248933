//! Pointwise geometry of the exact and the discrete surface.

use nalgebra::{Matrix2, Matrix2x3, Matrix3x2, Vector2, Vector3};

use crate::geometry::basis::BasisEval;
use crate::mesh::ParametricSimplex;

/// The affine map `x̂ = a + B ξ` from the reference triangle onto a parametric leaf.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: [f64; 2],
    pub jacobian: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
    pub det: f64,
}

impl AffineMap {
    pub fn from_simplex(s: &ParametricSimplex) -> Self {
        Self::from_points(s.vertex_coords())
    }

    pub fn from_points([a, b, c]: [[f64; 2]; 3]) -> Self {
        let jacobian = Matrix2::new(b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1]);
        let det = jacobian.determinant();
        let inverse = Matrix2::new(
            jacobian[(1, 1)],
            -jacobian[(0, 1)],
            -jacobian[(1, 0)],
            jacobian[(0, 0)],
        ) / det;
        AffineMap {
            origin: a,
            jacobian,
            inverse,
            det,
        }
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let b = &self.jacobian;
        [
            self.origin[0] + b[(0, 0)] * xi[0] + b[(0, 1)] * xi[1],
            self.origin[1] + b[(1, 0)] * xi[0] + b[(1, 1)] * xi[1],
        ]
    }

    pub fn pull_back(&self, x: [f64; 2]) -> [f64; 2] {
        let d = Vector2::new(x[0] - self.origin[0], x[1] - self.origin[1]);
        let xi = self.inverse * d;
        [xi.x, xi.y]
    }

    /// Parametric gradient (row vector) from a reference gradient.
    pub fn gradient(&self, g: [f64; 2]) -> Vector2<f64> {
        // ∇̂v = ∇_ξ v B⁻¹, stored as a column.
        self.inverse.transpose() * Vector2::new(g[0], g[1])
    }

    /// Parametric Hessian from a reference Hessian `(xx, xy, yy)`.
    pub fn hessian(&self, h: [f64; 3]) -> Matrix2<f64> {
        let hx = Matrix2::new(h[0], h[1], h[1], h[2]);
        self.inverse.transpose() * hx * self.inverse
    }
}

/// First fundamental form and derived quantities for a tangent pair.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceFrame {
    /// Columns `∂̂₁X`, `∂̂₂X`.
    pub tangent: Matrix3x2<f64>,
    pub metric: Matrix2<f64>,
    pub metric_inv: Matrix2<f64>,
    pub area: f64,
    /// `D = G⁻¹ Tᵀ`.
    pub d: Matrix2x3<f64>,
    pub normal: Vector3<f64>,
}

impl SurfaceFrame {
    /// `None` when `det G <= 0` or the data is not finite.
    pub fn from_tangent(tangent: Matrix3x2<f64>) -> Option<Self> {
        let metric = tangent.transpose() * tangent;
        let det = metric[(0, 0)] * metric[(1, 1)] - metric[(0, 1)] * metric[(1, 0)];
        if !(det > 0.0) || !det.is_finite() {
            return None;
        }
        let metric_inv = Matrix2::new(
            metric[(1, 1)],
            -metric[(0, 1)],
            -metric[(1, 0)],
            metric[(0, 0)],
        ) / det;
        let cross = tangent.column(0).cross(&tangent.column(1));
        Some(SurfaceFrame {
            tangent,
            metric,
            metric_inv,
            area: det.sqrt(),
            d: metric_inv * tangent.transpose(),
            normal: cross / cross.norm(),
        })
    }

    /// Surface gradient `∇̂v D` of a function with parametric gradient `g`.
    pub fn surface_gradient(&self, g: &Vector2<f64>) -> Vector3<f64> {
        self.d.transpose() * g
    }
}

/// Frame of the discrete surface with the analytic coefficient derivatives.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteFrame {
    pub position: Vector3<f64>,
    pub frame: SurfaceFrame,
    /// `∂̂_j q_Γ`.
    pub d_area: [f64; 2],
    /// `∂̂_j G_Γ⁻¹`.
    pub d_metric_inv: [Matrix2<f64>; 2],
}

impl DiscreteFrame {
    /// `(div̂ G⁻¹)_k = Σ_j ∂̂_j (G⁻¹)_{jk}`.
    pub fn div_metric_inv(&self) -> Vector2<f64> {
        let [d0, d1] = &self.d_metric_inv;
        Vector2::new(d0[(0, 0)] + d1[(1, 0)], d0[(0, 1)] + d1[(1, 1)])
    }

    /// `div̂(q_Γ ∇̂V G_Γ⁻¹)` for a function with parametric gradient `g` and Hessian `h`.
    pub fn divergence_flux(&self, g: &Vector2<f64>, h: &Matrix2<f64>) -> f64 {
        let f = &self.frame;
        let flux = f.metric_inv * g;
        let dq = Vector2::new(self.d_area[0], self.d_area[1]);
        dq.dot(&flux)
            + f.area * (f.metric_inv.component_mul(h)).sum()
            + f.area * g.dot(&self.div_metric_inv())
    }
}

/// Tangents of the discrete surface at a reference point of an element.
pub fn discrete_tangent(
    nodes: &[Vector3<f64>],
    eval: &BasisEval,
    affine: &AffineMap,
) -> Matrix3x2<f64> {
    let mut t_xi = Matrix3x2::zeros();
    for (x, g) in nodes.iter().zip(&eval.grads[..eval.len]) {
        t_xi.column_mut(0).axpy(g[0], x, 1.0);
        t_xi.column_mut(1).axpy(g[1], x, 1.0);
    }
    t_xi * affine.inverse
}

/// Discrete frame at a reference point of an element with nodal positions `nodes`.
pub fn discrete_frame(
    nodes: &[Vector3<f64>],
    eval: &BasisEval,
    affine: &AffineMap,
) -> Option<DiscreteFrame> {
    let mut position = Vector3::zeros();
    let mut t_xi = Matrix3x2::zeros();
    // Reference second derivatives of X, per component: (xx, xy, yy).
    let mut h_xi = [Vector3::zeros(); 3];
    for k in 0..eval.len {
        let x = &nodes[k];
        position += x * eval.values[k];
        t_xi.column_mut(0).axpy(eval.grads[k][0], x, 1.0);
        t_xi.column_mut(1).axpy(eval.grads[k][1], x, 1.0);
        for r in 0..3 {
            h_xi[r] += x * eval.hessians[k][r];
        }
    }
    let binv = affine.inverse;
    let tangent = t_xi * binv;
    let frame = SurfaceFrame::from_tangent(tangent)?;

    // ∂̂_j ∂̂_k X = Σ_{a,b} B⁻¹_{aj} B⁻¹_{bk} ∂_a ∂_b X.
    let hx = |a: usize, b: usize| -> Vector3<f64> {
        match (a, b) {
            (0, 0) => h_xi[0],
            (1, 1) => h_xi[2],
            _ => h_xi[1],
        }
    };
    let mut second = [[Vector3::zeros(); 2]; 2];
    for (j, row) in second.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    *entry += hx(a, b) * (binv[(a, j)] * binv[(b, k)]);
                }
            }
        }
    }

    let g = &frame.metric;
    let det = frame.area * frame.area;
    let mut d_area = [0.0; 2];
    let mut d_metric_inv = [Matrix2::zeros(); 2];
    for j in 0..2 {
        let mut dg = Matrix2::zeros();
        for k in 0..2 {
            for l in 0..2 {
                dg[(k, l)] =
                    second[j][k].dot(&tangent.column(l)) + tangent.column(k).dot(&second[j][l]);
            }
        }
        let ddet = dg[(0, 0)] * g[(1, 1)] + g[(0, 0)] * dg[(1, 1)] - 2.0 * g[(0, 1)] * dg[(0, 1)];
        d_area[j] = ddet / (2.0 * det.sqrt());
        d_metric_inv[j] = -(frame.metric_inv * dg * frame.metric_inv);
    }
    Some(DiscreteFrame {
        position,
        frame,
        d_area,
        d_metric_inv,
    })
}

/// Co-normal data on one side of a face.
#[derive(Debug, Clone, Copy)]
pub struct FaceFrame {
    /// Ratio of surface length to parametric length along the face.
    pub r: f64,
    /// Outward unit normal of the parametric element at the face.
    pub n_hat: Vector2<f64>,
    /// Unit co-normal on the surface, tangent to the element and pointing outward.
    pub conormal: Vector3<f64>,
    /// `(q_Γ / r_Γ) G_Γ⁻¹ n̂`, so that `∇_ΓV · n_Γ = ∇̂V · weight`.
    pub weight: Vector2<f64>,
}

/// Face frame for the parametric edge direction `edge` (from start to end),
/// with `interior` any parametric vector pointing into the element.
pub fn face_frame(frame: &SurfaceFrame, edge: Vector2<f64>, interior: Vector2<f64>) -> FaceFrame {
    let e_len = edge.norm();
    let mut n_hat = Vector2::new(edge.y, -edge.x) / e_len;
    if n_hat.dot(&interior) > 0.0 {
        n_hat = -n_hat;
    }
    let r = (frame.tangent * edge).norm() / e_len;
    let scale = frame.area / r;
    FaceFrame {
        r,
        n_hat,
        conormal: frame.d.transpose() * n_hat * scale,
        weight: frame.metric_inv * n_hat * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::basis::LagrangeBasis;
    use crate::geometry::chart::{Chart, FaceChart, Lift};

    fn graph_x_nodes(basis: &LagrangeBasis) -> Vec<Vector3<f64>> {
        basis
            .nodes()
            .iter()
            .map(|p| Vector3::new(p[0], p[1], p[0]))
            .collect()
    }

    #[test]
    fn graph_of_x_has_metric_diag_two_one() {
        let basis = LagrangeBasis::new(1).unwrap();
        let nodes = graph_x_nodes(&basis);
        let affine = AffineMap::from_points([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let f = discrete_frame(&nodes, &basis.eval([0.2, 0.2]), &affine).unwrap();
        assert!(
            (f.frame.metric - Matrix2::new(2.0, 0.0, 0.0, 1.0))
                .abs()
                .max()
                < 1e-14
        );
        assert!((f.frame.area - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(f.d_area, [0.0, 0.0]);
        // ∇_Γ x̂ = D_Γᵀ (1, 0)ᵀ = (1/2, 0, 1/2).
        let g = f.frame.surface_gradient(&Vector2::new(1.0, 0.0));
        assert!((g - Vector3::new(0.5, 0.0, 0.5)).norm() < 1e-14);
    }

    fn sphere_nodes(basis: &LagrangeBasis, affine: &AffineMap) -> Vec<Vector3<f64>> {
        let c = FaceChart::new(
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            Lift::RadialProjection,
        );
        basis
            .nodes()
            .iter()
            .map(|&p| c.eval(affine.map(p)))
            .collect()
    }

    #[test]
    fn frame_identities_and_derivatives_on_sphere() {
        let basis = LagrangeBasis::new(3).unwrap();
        let affine = AffineMap::from_points([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]);
        let nodes = sphere_nodes(&basis, &affine);
        let frame_at = |xi: [f64; 2]| discrete_frame(&nodes, &basis.eval(xi), &affine).unwrap();
        let xi = [0.27, 0.31];
        let f = frame_at(xi);
        let s = &f.frame;
        assert!(
            (s.d * s.d.transpose() * s.metric - Matrix2::identity())
                .abs()
                .max()
                < 1e-10
        );
        let proj = s.tangent * s.d + s.normal * s.normal.transpose();
        assert!((proj - nalgebra::Matrix3::identity()).abs().max() < 1e-10);

        // Parametric derivatives by central differences along ξ, mapped with B⁻¹.
        let h = 1e-5;
        let mut dq_xi = [0.0; 2];
        let mut dginv_xi = [Matrix2::zeros(); 2];
        for a in 0..2 {
            let mut p = xi;
            let mut m = xi;
            p[a] += h;
            m[a] -= h;
            let (fp, fm) = (frame_at(p).frame, frame_at(m).frame);
            dq_xi[a] = (fp.area - fm.area) / (2.0 * h);
            dginv_xi[a] = (fp.metric_inv - fm.metric_inv) / (2.0 * h);
        }
        let binv = affine.inverse;
        for j in 0..2 {
            let dq: f64 = (0..2).map(|a| binv[(a, j)] * dq_xi[a]).sum();
            let dg: Matrix2<f64> = (0..2).map(|a| dginv_xi[a] * binv[(a, j)]).sum();
            assert!((dq - f.d_area[j]).abs() < 1e-6, "dq {j}");
            assert!((dg - f.d_metric_inv[j]).abs().max() < 1e-6, "dG {j}");
        }
    }

    #[test]
    fn sphere_conormal_is_unit_and_tangent() {
        let basis = LagrangeBasis::new(2).unwrap();
        let affine = AffineMap::from_points([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]);
        let nodes = sphere_nodes(&basis, &affine);
        let f = discrete_frame(&nodes, &basis.eval([0.5, 0.5]), &affine).unwrap();
        // Hypotenuse of the leaf in parametric coordinates.
        let edge = Vector2::new(-0.5, 0.5);
        let ff = face_frame(&f.frame, edge, Vector2::new(-0.1, -0.1));
        assert!((ff.conormal.norm() - 1.0).abs() < 1e-12);
        assert!(ff.conormal.dot(&f.frame.normal).abs() < 1e-12);
        assert!(ff.n_hat.x > 0.0 && ff.n_hat.y > 0.0);
    }

    #[test]
    fn flat_conormals_are_opposite() {
        let t = Matrix3x2::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let s = SurfaceFrame::from_tangent(t).unwrap();
        let e = Vector2::new(1.0, 1.0);
        let plus = face_frame(&s, e, Vector2::new(1.0, -1.0));
        let minus = face_frame(&s, e, Vector2::new(-1.0, 1.0));
        assert!((plus.conormal + minus.conormal).norm() < 1e-15);
        assert!((plus.r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_round_trip() {
        let a = AffineMap::from_points([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]);
        let x = a.map([0.2, 0.3]);
        let xi = a.pull_back(x);
        assert!((xi[0] - 0.2).abs() < 1e-15 && (xi[1] - 0.3).abs() < 1e-15);
        assert!((a.det - 0.25).abs() < 1e-15);
    }
}
