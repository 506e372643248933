//! The finite element space on the discrete surface, assembly and solver.

pub mod assemble;
pub mod dofmap;
pub mod field;
pub mod solver;
pub mod space;
pub mod sparse;

pub use assemble::{assemble, local_system, AmbientFn, LinearSystem, LocalSystem};
pub use dofmap::{Constraint, DofMap, NodeKey};
pub use field::{eval_field_gradient, local_coefficients, local_derivatives, prolongate};
pub use solver::{solve, solve_constrained, Solution, SolverOptions};
pub use space::{Discretization, FeSpace, QuadratureDegrees, TabulatedRule};
pub use sparse::CsrMatrix;
