//! Macro topology, bisection forest and conforming leaf meshes.

pub mod dyadic;
pub mod forest;
pub mod topology;

pub use dyadic::{DyadicPoint, DYADIC_BITS, DYADIC_ONE};
pub use forest::{
    ConformingMesh, ConformityReport, ElementId, FaceNeighbor, FaceSide, InteriorFace, Neighbor,
    ParametricSimplex, RefineCounters, RefineStats, DIM, REFERENCE_AREA,
};
pub use topology::{FaceIdentification, MacroTopology, PointKey, EDGE_CORNERS};
