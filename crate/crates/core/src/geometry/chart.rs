//! Charts `χ^i : Ω → R³` and the macro surface that carries them.

use std::sync::Arc;

use nalgebra::{Matrix3, Matrix3x2, Vector3};

use crate::error::{Error, Result};
use crate::mesh::MacroTopology;

/// A parametrization of one surface patch over the reference triangle.
pub trait Chart: Send + Sync {
    fn eval(&self, p: [f64; 2]) -> Vector3<f64>;

    /// Columns `∂̂₁χ`, `∂̂₂χ`.
    fn jacobian(&self, p: [f64; 2]) -> Matrix3x2<f64>;

    /// `Some(k)` when the chart is itself a polynomial of degree `k`.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

/// Value and first/second derivatives of a height function `g(x, y)`.
pub trait HeightFunction: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];
    /// `(g_xx, g_xy, g_yy)`.
    fn hessian(&self, x: f64, y: f64) -> [f64; 3];
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

/// How a flat macro face is lifted to the surface.
#[derive(Clone)]
pub enum Lift {
    Identity,
    /// `p ↦ p / |p|`.
    RadialProjection,
    /// `(x, y, z) ↦ (x, y, z + g(x, y))`.
    Graph(Arc<dyn HeightFunction>),
}

/// A chart obtained by lifting the affine parametrization of a flat macro face.
#[derive(Clone)]
pub struct FaceChart {
    origin: Vector3<f64>,
    edges: Matrix3x2<f64>,
    lift: Lift,
}

impl FaceChart {
    /// The affine map sending the reference corners to `a`, `b`, `c`.
    pub fn new(a: [f64; 3], b: [f64; 3], c: [f64; 3], lift: Lift) -> Self {
        let a = Vector3::from(a);
        let e1 = Vector3::from(b) - a;
        let e2 = Vector3::from(c) - a;
        FaceChart {
            origin: a,
            edges: Matrix3x2::from_columns(&[e1, e2]),
            lift,
        }
    }

    fn flat(&self, p: [f64; 2]) -> Vector3<f64> {
        self.origin + self.edges.column(0) * p[0] + self.edges.column(1) * p[1]
    }
}

impl Chart for FaceChart {
    fn eval(&self, p: [f64; 2]) -> Vector3<f64> {
        let y = self.flat(p);
        match &self.lift {
            Lift::Identity => y,
            Lift::RadialProjection => y / y.norm(),
            Lift::Graph(g) => Vector3::new(y.x, y.y, y.z + g.value(y.x, y.y)),
        }
    }

    fn jacobian(&self, p: [f64; 2]) -> Matrix3x2<f64> {
        let y = self.flat(p);
        let d = match &self.lift {
            Lift::Identity => Matrix3::identity(),
            Lift::RadialProjection => {
                let r = y.norm();
                (Matrix3::identity() - y * y.transpose() / (r * r)) / r
            }
            Lift::Graph(g) => {
                let [gx, gy] = g.gradient(y.x, y.y);
                let mut d = Matrix3::identity();
                d[(2, 0)] = gx;
                d[(2, 1)] = gy;
                d
            }
        };
        d * self.edges
    }

    fn polynomial_degree(&self) -> Option<usize> {
        match &self.lift {
            Lift::Identity => Some(1),
            Lift::RadialProjection => None,
            Lift::Graph(g) => g.polynomial_degree(),
        }
    }
}

type EvalFn = dyn Fn([f64; 2]) -> Vector3<f64> + Send + Sync;
type JacobianFn = dyn Fn([f64; 2]) -> Matrix3x2<f64> + Send + Sync;

/// A chart given by user callbacks.
#[derive(Clone)]
pub struct FnChart {
    eval: Arc<EvalFn>,
    jacobian: Arc<JacobianFn>,
    degree: Option<usize>,
}

impl FnChart {
    pub fn new(
        eval: impl Fn([f64; 2]) -> Vector3<f64> + Send + Sync + 'static,
        jacobian: impl Fn([f64; 2]) -> Matrix3x2<f64> + Send + Sync + 'static,
    ) -> Self {
        FnChart {
            eval: Arc::new(eval),
            jacobian: Arc::new(jacobian),
            degree: None,
        }
    }

    pub fn with_polynomial_degree(mut self, degree: usize) -> Self {
        self.degree = Some(degree);
        self
    }
}

impl Chart for FnChart {
    fn eval(&self, p: [f64; 2]) -> Vector3<f64> {
        (self.eval)(p)
    }

    fn jacobian(&self, p: [f64; 2]) -> Matrix3x2<f64> {
        (self.jacobian)(p)
    }

    fn polynomial_degree(&self) -> Option<usize> {
        self.degree
    }
}

/// The exact surface: macro topology plus one chart per macro element.
#[derive(Clone)]
pub struct MacroSurface {
    pub name: String,
    topology: Arc<MacroTopology>,
    charts: Vec<Arc<dyn Chart>>,
    /// Bi-Lipschitz constant of the charts, when known.
    pub lipschitz: Option<f64>,
}

impl std::fmt::Debug for MacroSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MacroSurface")
            .field("name", &self.name)
            .field("patches", &self.charts.len())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl MacroSurface {
    pub fn new(
        name: impl Into<String>,
        topology: Arc<MacroTopology>,
        charts: Vec<Arc<dyn Chart>>,
    ) -> Result<Self> {
        if charts.len() != topology.num_elements() {
            return Err(Error::InvalidTopology(format!(
                "{} charts for {} macro elements",
                charts.len(),
                topology.num_elements()
            )));
        }
        Ok(MacroSurface {
            name: name.into(),
            topology,
            charts,
            lipschitz: None,
        })
    }

    /// Lifts every flat macro face of `topology` with the same rule.
    pub fn lifted(name: impl Into<String>, topology: MacroTopology, lift: Lift) -> Self {
        let charts = topology
            .elements()
            .iter()
            .map(|tri| {
                let v = topology.vertices();
                Arc::new(FaceChart::new(
                    v[tri[0]],
                    v[tri[1]],
                    v[tri[2]],
                    lift.clone(),
                )) as Arc<dyn Chart>
            })
            .collect();
        MacroSurface::new(name, Arc::new(topology), charts).expect("one chart per face")
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn topology(&self) -> &Arc<MacroTopology> {
        &self.topology
    }

    pub fn chart(&self, patch: usize) -> &dyn Chart {
        self.charts[patch].as_ref()
    }

    /// Largest polynomial degree over all charts, or `None` if any chart is not polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        self.charts
            .iter()
            .map(|c| c.polynomial_degree())
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    /// Largest mismatch between neighboring charts at sample points of shared macro edges.
    pub fn interface_mismatch(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for fi in self.topology.face_identifications() {
            let [(e0, l0), (e1, l1)] = fi.sides;
            for i in 0..=samples {
                let t = i as f64 / samples as f64;
                let p0 = edge_point(l0, t);
                let p1 = if fi.same_direction {
                    edge_point(l1, t)
                } else {
                    edge_point(l1, 1.0 - t)
                };
                let d = (self.chart(e0).eval(p0) - self.chart(e1).eval(p1)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

fn edge_point(local: usize, t: f64) -> [f64; 2] {
    const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let [a, b] = crate::mesh::EDGE_CORNERS[local];
    let (pa, pb) = (CORNERS[a], CORNERS[b]);
    [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
}
