//! Built-in benchmark problems.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::estimators::ManufacturedProblem;
use crate::geometry::chart::{HeightFunction, MacroSurface};
use crate::geometry::surfaces::{self, GaussianBump};

/// Quantity whose decay is reported for a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    EnergyError,
    Eta,
    Lambda,
    OscU,
    OscF,
    /// `η + λ / ω`.
    TotalEstimator,
}

impl Quantity {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "energy_error" => Quantity::EnergyError,
            "eta" => Quantity::Eta,
            "lambda" => Quantity::Lambda,
            "osc_u" => Quantity::OscU,
            "osc_f" => Quantity::OscF,
            "total" => Quantity::TotalEstimator,
            other => return Err(Error::UnknownName(other.to_string())),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::EnergyError => "energy_error",
            Quantity::Eta => "eta",
            Quantity::Lambda => "lambda",
            Quantity::OscU => "osc_u",
            Quantity::OscF => "osc_f",
            Quantity::TotalEstimator => "total",
        }
    }
}

/// A surface, data and the quantity its convergence study tracks.
pub struct Benchmark {
    pub name: &'static str,
    pub surface: MacroSurface,
    pub problem: ManufacturedProblem,
    pub rate_quantity: Quantity,
}

pub const BENCHMARK_NAMES: [&str; 5] = [
    "flat_square_sin",
    "lshape_f1",
    "sphere_xy",
    "graph_peak",
    "pyramid_f1",
];

pub fn benchmark(name: &str) -> Result<Benchmark> {
    Ok(match name {
        "flat_square_sin" => Benchmark {
            name: "flat_square_sin",
            surface: surfaces::flat_square(),
            problem: flat_square_sin(),
            rate_quantity: Quantity::EnergyError,
        },
        "lshape_f1" => Benchmark {
            name: "lshape_f1",
            surface: surfaces::lshape(),
            problem: ManufacturedProblem::new("f1", |_| 1.0),
            rate_quantity: Quantity::TotalEstimator,
        },
        "sphere_xy" => Benchmark {
            name: "sphere_xy",
            surface: surfaces::sphere(),
            problem: sphere_xy(),
            rate_quantity: Quantity::EnergyError,
        },
        "graph_peak" => Benchmark {
            name: "graph_peak",
            surface: surfaces::graph_peak(),
            problem: graph_problem(GaussianBump::PEAK),
            rate_quantity: Quantity::EnergyError,
        },
        "pyramid_f1" => Benchmark {
            name: "pyramid_f1",
            surface: surfaces::pyramid(),
            problem: ManufacturedProblem::new("f1", |_| 1.0),
            rate_quantity: Quantity::TotalEstimator,
        },
        other => return Err(Error::UnknownName(other.to_string())),
    })
}

/// `u = sin πx sin πy`, `f = 2π² u`.
pub fn flat_square_sin() -> ManufacturedProblem {
    ManufacturedProblem::new("flat_square_sin", |p: &Vector3<f64>| {
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

/// `u = xy` on the unit sphere, an eigenfunction with `−Δ_γ u = 6u`.
pub fn sphere_xy() -> ManufacturedProblem {
    ManufacturedProblem::new("sphere_xy", |p: &Vector3<f64>| 6.0 * p.x * p.y)
        .with_solution(|p| p.x * p.y, |p| Vector3::new(p.y, p.x, 0.0))
}

/// `u = sin πx sin πy` on the graph of `g` over the unit square, with the
/// matching `f = −Δ_γ u`.
pub fn graph_problem<G: HeightFunction + Send + Sync + 'static>(g: G) -> ManufacturedProblem {
    let g = std::sync::Arc::new(g);
    ManufacturedProblem::new("graph", move |p: &Vector3<f64>| {
        let (x, y) = (p.x, p.y);
        let [gx, gy] = g.gradient(x, y);
        let [hxx, hxy, hyy] = g.hessian(x, y);
        let q2 = 1.0 + gx * gx + gy * gy;
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        let ux = PI * cx * sy;
        let uy = PI * sx * cy;
        let uxx = -PI * PI * sx * sy;
        let uxy = PI * PI * cx * cy;
        let uyy = uxx;
        // ∇²u : (I − ppᵀ/q²)
        let second = uxx + uyy - (gx * gx * uxx + 2.0 * gx * gy * uxy + gy * gy * uyy) / q2;
        let php = gx * gx * hxx + 2.0 * gx * gy * hxy + gy * gy * hyy;
        let first = (gx * ux + gy * uy) * (php / (q2 * q2) - (hxx + hyy) / q2);
        -(second + first)
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
