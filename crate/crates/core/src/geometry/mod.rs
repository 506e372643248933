//! Charts, surface interpolants, pointwise geometry and quadrature.

pub mod basis;
pub mod chart;
pub mod frame;
pub mod interpolant;
pub mod quadrature;
pub mod surfaces;

pub use basis::{lattice, BasisEval, LagrangeBasis, LocalNode, MAX_LOCAL};
pub use chart::{Chart, FaceChart, FnChart, HeightFunction, Lift, MacroSurface};
pub use frame::{discrete_frame, face_frame, AffineMap, DiscreteFrame, FaceFrame, SurfaceFrame};
pub use interpolant::{
    consistency_error, consistency_matrix, geometric_indicator, geometric_indicators,
    interpolate_chart, local_nodes, GeometricSampler, SurfaceInterpolant,
};
pub use quadrature::{gauss_legendre, quadrature_rule, Domain, QuadratureRule};
pub use surfaces::SurfaceRegistry;
