//! Built-in surfaces and the name registry.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::chart::{Chart, FaceChart, HeightFunction, Lift, MacroSurface};
use crate::mesh::MacroTopology;

/// `g(x, y) = x²`.
#[derive(Debug, Clone, Copy)]
pub struct Parabola;

impl HeightFunction for Parabola {
    fn value(&self, x: f64, _y: f64) -> f64 {
        x * x
    }
    fn gradient(&self, x: f64, _y: f64) -> [f64; 2] {
        [2.0 * x, 0.0]
    }
    fn hessian(&self, _x: f64, _y: f64) -> [f64; 3] {
        [2.0, 0.0, 0.0]
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(2)
    }
}

/// `g(x, y) = a exp(-|p - c|² / s)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width_sq: f64,
}

impl GaussianBump {
    pub const PEAK: GaussianBump = GaussianBump {
        amplitude: 0.4,
        center: [0.5, 0.5],
        width_sq: 0.01,
    };
}

impl HeightFunction for GaussianBump {
    fn value(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        self.amplitude * (-(dx * dx + dy * dy) / self.width_sq).exp()
    }
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let g = self.value(x, y);
        let s = self.width_sq;
        [
            -2.0 * (x - self.center[0]) / s * g,
            -2.0 * (y - self.center[1]) / s * g,
        ]
    }
    fn hessian(&self, x: f64, y: f64) -> [f64; 3] {
        let g = self.value(x, y);
        let s = self.width_sq;
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        [
            (4.0 * dx * dx / (s * s) - 2.0 / s) * g,
            4.0 * dx * dy / (s * s) * g,
            (4.0 * dy * dy / (s * s) - 2.0 / s) * g,
        ]
    }
}

/// Height over one face of the pinwheel square: a pyramid with apex at the
/// origin plus a smooth cap vanishing on the boundary of `[-1, 1]²`.
#[derive(Debug, Clone, Copy)]
pub struct PyramidFace {
    /// The face's outward direction: 0 `+x`, 1 `+y`, 2 `-x`, 3 `-y`.
    pub face: usize,
}

impl PyramidFace {
    const APEX: f64 = 0.5;
    const CAP: f64 = 0.1;

    fn slope(&self) -> [f64; 2] {
        match self.face {
            0 => [1.0, 0.0],
            1 => [0.0, 1.0],
            2 => [-1.0, 0.0],
            _ => [0.0, -1.0],
        }
    }
}

impl HeightFunction for PyramidFace {
    fn value(&self, x: f64, y: f64) -> f64 {
        let [a, b] = self.slope();
        let cap = (0.5 * PI * x).cos() * (0.5 * PI * y).cos();
        Self::APEX * (1.0 - a * x - b * y) + Self::CAP * cap
    }
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let [a, b] = self.slope();
        let k = 0.5 * PI;
        [
            -Self::APEX * a - Self::CAP * k * (k * x).sin() * (k * y).cos(),
            -Self::APEX * b - Self::CAP * k * (k * x).cos() * (k * y).sin(),
        ]
    }
    fn hessian(&self, x: f64, y: f64) -> [f64; 3] {
        let k = 0.5 * PI;
        let c = Self::CAP * k * k;
        [
            -c * (k * x).cos() * (k * y).cos(),
            c * (k * x).sin() * (k * y).sin(),
            -c * (k * x).cos() * (k * y).cos(),
        ]
    }
}

pub fn flat_square() -> MacroSurface {
    MacroSurface::lifted("flat_square", MacroTopology::unit_square(), Lift::Identity)
        .with_lipschitz(std::f64::consts::SQRT_2 + 1.0)
}

pub fn flat_triangle() -> MacroSurface {
    MacroSurface::lifted(
        "flat_triangle",
        MacroTopology::reference_triangle(),
        Lift::Identity,
    )
}

/// `χ(x̂, ŷ) = (x̂, ŷ, x̂²)` over the reference triangle.
pub fn parabola_triangle() -> MacroSurface {
    MacroSurface::lifted(
        "parabola_triangle",
        MacroTopology::reference_triangle(),
        Lift::Graph(Arc::new(Parabola)),
    )
}

pub fn lshape() -> MacroSurface {
    MacroSurface::lifted("lshape", MacroTopology::lshape(), Lift::Identity)
}

/// Unit sphere as the radial projection of the octahedron.
pub fn sphere() -> MacroSurface {
    MacroSurface::lifted(
        "sphere",
        MacroTopology::octahedron(),
        Lift::RadialProjection,
    )
}

/// Graph of [`GaussianBump::PEAK`] over the unit square.
pub fn graph_peak() -> MacroSurface {
    MacroSurface::lifted(
        "graph_peak",
        MacroTopology::unit_square(),
        Lift::Graph(Arc::new(GaussianBump::PEAK)),
    )
}

/// Piecewise-smooth pyramid over `[-1, 1]²`, kinked along the macro diagonals.
pub fn pyramid() -> MacroSurface {
    let topology = MacroTopology::square_pinwheel();
    let v = topology.vertices();
    let charts = topology
        .elements()
        .iter()
        .enumerate()
        .map(|(face, tri)| {
            Arc::new(FaceChart::new(
                v[tri[0]],
                v[tri[1]],
                v[tri[2]],
                Lift::Graph(Arc::new(PyramidFace { face })),
            )) as Arc<dyn Chart>
        })
        .collect();
    MacroSurface::new("pyramid", Arc::new(topology), charts).expect("one chart per face")
}

type Builder = Arc<dyn Fn() -> MacroSurface + Send + Sync>;

/// Surfaces selectable by name.
#[derive(Clone)]
pub struct SurfaceRegistry {
    entries: BTreeMap<String, Builder>,
}

impl Default for SurfaceRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl SurfaceRegistry {
    pub fn empty() -> Self {
        SurfaceRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("flat_square", flat_square);
        r.register("flat_triangle", flat_triangle);
        r.register("parabola_triangle", parabola_triangle);
        r.register("lshape", lshape);
        r.register("sphere", sphere);
        r.register("graph_peak", graph_peak);
        r.register("pyramid", pyramid);
        r
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        build: impl Fn() -> MacroSurface + Send + Sync + 'static,
    ) {
        self.entries.insert(name.into(), Arc::new(build));
    }

    pub fn get(&self, name: &str) -> Result<MacroSurface> {
        self.entries
            .get(name)
            .map(|b| b())
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_continuous_across_patches() {
        let r = SurfaceRegistry::with_builtins();
        for name in r.names() {
            let s = r.get(name).unwrap();
            assert!(s.interface_mismatch(8) < 1e-14, "{name}");
        }
    }

    #[test]
    fn unknown_surface() {
        assert!(matches!(
            SurfaceRegistry::with_builtins().get("torus"),
            Err(Error::UnknownName(_))
        ));
    }

    #[test]
    fn pyramid_height_derivatives() {
        let g = PyramidFace { face: 1 };
        let (x, y, h) = (0.3, 0.6, 1e-5);
        let fd = [
            (g.value(x + h, y) - g.value(x - h, y)) / (2.0 * h),
            (g.value(x, y + h) - g.value(x, y - h)) / (2.0 * h),
        ];
        let an = g.gradient(x, y);
        assert!((fd[0] - an[0]).abs() < 1e-8 && (fd[1] - an[1]).abs() < 1e-8);
        let fxy = (g.gradient(x, y + h)[0] - g.gradient(x, y - h)[0]) / (2.0 * h);
        assert!((fxy - g.hessian(x, y)[1]).abs() < 1e-7);
    }

    #[test]
    fn bump_hessian() {
        let g = GaussianBump::PEAK;
        let (x, y, h) = (0.45, 0.58, 1e-6);
        let fxx = (g.gradient(x + h, y)[0] - g.gradient(x - h, y)[0]) / (2.0 * h);
        let fyy = (g.gradient(x, y + h)[1] - g.gradient(x, y - h)[1]) / (2.0 * h);
        let [hxx, _, hyy] = g.hessian(x, y);
        assert!((fxx - hxx).abs() < 1e-5 * hxx.abs().max(1.0));
        assert!((fyy - hyy).abs() < 1e-5 * hyy.abs().max(1.0));
    }

    #[test]
    fn pyramid_has_a_kink() {
        // Slopes of neighboring faces differ across the diagonal x = y.
        let (a, b) = (PyramidFace { face: 0 }, PyramidFace { face: 1 });
        assert!((a.value(0.4, 0.4) - b.value(0.4, 0.4)).abs() < 1e-15);
        assert!((a.gradient(0.4, 0.4)[0] - b.gradient(0.4, 0.4)[0]).abs() > 0.4);
    }
}
