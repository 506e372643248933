//! Thresholding, Dörfler marking, the inner solve-estimate-mark-refine loop and the outer driver.

pub mod driver;
pub mod greedy;
pub mod history;
pub mod marking;

pub use driver::{
    adapt_pde, afem_run, uniform_run, AdaptiveState, AfemParams, RowSink, StepReport,
};
pub use greedy::{adapt_surface, greedy, GreedyOutcome};
pub use history::{ContractViolation, HistoryRow, Phase, RunHistory};
pub use marking::{dorfler_mark, ExactSum};
