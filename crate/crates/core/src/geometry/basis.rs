//! Lagrange shape functions of degree 1, 2 and 3 on the reference triangle.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::EDGE_CORNERS;

/// Largest number of local shape functions (degree 3).
pub const MAX_LOCAL: usize = 10;

/// Where a local node sits on the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalNode {
    Vertex(usize),
    /// `k`-th interior point of local edge `edge`, counted from its first corner.
    Edge {
        edge: usize,
        k: usize,
    },
    Interior(usize),
}

/// Values, gradients and Hessians `(xx, xy, yy)` of all shape functions at one point.
#[derive(Debug, Clone, Copy)]
pub struct BasisEval {
    pub len: usize,
    pub values: [f64; MAX_LOCAL],
    pub grads: [[f64; 2]; MAX_LOCAL],
    pub hessians: [[f64; 3]; MAX_LOCAL],
}

#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<[f64; 2]>,
    kinds: Vec<LocalNode>,
    exponents: Vec<(i32, i32)>,
    /// Row `k` holds the monomial coefficients of shape function `k`.
    coefficients: Vec<[f64; MAX_LOCAL]>,
}

/// Points `(i/m, j/m)` with `i + j <= m`.
pub fn lattice(m: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for j in 0..=m {
        for i in 0..=(m - j) {
            out.push([i as f64 / m as f64, j as f64 / m as f64]);
        }
    }
    out
}

const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl LagrangeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::UnsupportedPolynomialDegree(degree));
        }
        let n = degree;
        let mut nodes = Vec::new();
        let mut kinds = Vec::new();
        for (c, p) in CORNERS.iter().enumerate() {
            nodes.push(*p);
            kinds.push(LocalNode::Vertex(c));
        }
        for (edge, [a, b]) in EDGE_CORNERS.iter().enumerate() {
            let (pa, pb) = (CORNERS[*a], CORNERS[*b]);
            for k in 1..n {
                let t = k as f64 / n as f64;
                nodes.push([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]);
                kinds.push(LocalNode::Edge { edge, k });
            }
        }
        let mut interior = 0;
        for j in 1..n {
            for i in 1..n {
                if i + j < n {
                    nodes.push([i as f64 / n as f64, j as f64 / n as f64]);
                    kinds.push(LocalNode::Interior(interior));
                    interior += 1;
                }
            }
        }
        let exponents: Vec<(i32, i32)> = (0..=n as i32)
            .flat_map(|s| (0..=s).map(move |b| (s - b, b)))
            .collect();
        let len = nodes.len();
        debug_assert_eq!(len, exponents.len());
        let vandermonde = DMatrix::from_fn(len, len, |r, c| {
            let (a, b) = exponents[c];
            nodes[r][0].powi(a) * nodes[r][1].powi(b)
        });
        let inverse = vandermonde
            .try_inverse()
            .expect("Lagrange nodes are unisolvent");
        // φ_k = Σ_m inverse[m, k] x^a_m y^b_m
        let coefficients = (0..len)
            .map(|k| {
                let mut row = [0.0; MAX_LOCAL];
                for (m, c) in row.iter_mut().take(len).enumerate() {
                    *c = inverse[(m, k)];
                }
                row
            })
            .collect();
        Ok(LagrangeBasis {
            degree,
            nodes,
            kinds,
            exponents,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_kinds(&self) -> &[LocalNode] {
        &self.kinds
    }

    pub fn eval(&self, p: [f64; 2]) -> BasisEval {
        let len = self.len();
        let [x, y] = p;
        let pw = |v: f64, e: i32| if e <= 0 { 1.0 } else { v.powi(e) };
        let mut mono = [0.0; MAX_LOCAL];
        let mut dmono = [[0.0; 2]; MAX_LOCAL];
        let mut hmono = [[0.0; 3]; MAX_LOCAL];
        for (m, &(a, b)) in self.exponents.iter().enumerate() {
            let (af, bf) = (a as f64, b as f64);
            mono[m] = pw(x, a) * pw(y, b);
            dmono[m] = [af * pw(x, a - 1) * pw(y, b), bf * pw(x, a) * pw(y, b - 1)];
            hmono[m] = [
                af * (af - 1.0) * pw(x, a - 2) * pw(y, b),
                af * bf * pw(x, a - 1) * pw(y, b - 1),
                bf * (bf - 1.0) * pw(x, a) * pw(y, b - 2),
            ];
        }
        let mut out = BasisEval {
            len,
            values: [0.0; MAX_LOCAL],
            grads: [[0.0; 2]; MAX_LOCAL],
            hessians: [[0.0; 3]; MAX_LOCAL],
        };
        for k in 0..len {
            let c = &self.coefficients[k];
            for m in 0..len {
                out.values[k] += c[m] * mono[m];
                out.grads[k][0] += c[m] * dmono[m][0];
                out.grads[k][1] += c[m] * dmono[m][1];
                for r in 0..3 {
                    out.hessians[k][r] += c[m] * hmono[m][r];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        for (n, len) in [(1, 3), (2, 6), (3, 10)] {
            assert_eq!(LagrangeBasis::new(n).unwrap().len(), len);
        }
        assert!(matches!(
            LagrangeBasis::new(4),
            Err(Error::UnsupportedPolynomialDegree(4))
        ));
    }

    #[test]
    fn kronecker_property() {
        for n in 1..=3 {
            let basis = LagrangeBasis::new(n).unwrap();
            for (i, &p) in basis.nodes().iter().enumerate() {
                let e = basis.eval(p);
                for k in 0..basis.len() {
                    let expected = if i == k { 1.0 } else { 0.0 };
                    assert!((e.values[k] - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reproduces_polynomials_with_derivatives() {
        // x^2 y - 3 x y + y^2 with gradient and Hessian in closed form.
        let f = |x: f64, y: f64| x * x * y - 3.0 * x * y + y * y;
        let basis = LagrangeBasis::new(3).unwrap();
        let p = [0.21, 0.37];
        let e = basis.eval(p);
        let (mut v, mut g, mut h) = (0.0, [0.0; 2], [0.0; 3]);
        for (k, node) in basis.nodes().iter().enumerate() {
            let fk = f(node[0], node[1]);
            v += fk * e.values[k];
            g[0] += fk * e.grads[k][0];
            g[1] += fk * e.grads[k][1];
            for r in 0..3 {
                h[r] += fk * e.hessians[k][r];
            }
        }
        let [x, y] = p;
        assert!((v - f(x, y)).abs() < 1e-12);
        assert!((g[0] - (2.0 * x * y - 3.0 * y)).abs() < 1e-12);
        assert!((g[1] - (x * x - 3.0 * x + 2.0 * y)).abs() < 1e-12);
        assert!((h[0] - 2.0 * y).abs() < 1e-11);
        assert!((h[1] - (2.0 * x - 3.0)).abs() < 1e-11);
        assert!((h[2] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn partition_of_unity() {
        let basis = LagrangeBasis::new(2).unwrap();
        let e = basis.eval([0.3, 0.1]);
        let s: f64 = e.values[..e.len].iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_size() {
        assert_eq!(lattice(4).len(), 15);
    }
}
