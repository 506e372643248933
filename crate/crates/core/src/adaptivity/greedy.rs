use crate::error::{Error, Result};
use crate::fem::space::Discretization;
use crate::geometry::chart::MacroSurface;
use crate::geometry::interpolant::geometric_indicators;
use crate::mesh::{ConformingMesh, ElementId};

/// What a thresholding loop did.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GreedyOutcome {
    pub rounds: usize,
    pub marked: usize,
    /// Largest indicator on the returned mesh.
    pub max_indicator: f64,
}

/// Refines every leaf whose indicator exceeds `tol`, `b` times, until none does.
///
/// The indicator is re-evaluated on each new mesh. Fails with
/// `BudgetExceeded` once the mesh would grow past `max_elements` leaves.
pub fn greedy<F>(
    mesh: &mut ConformingMesh,
    mut indicator: F,
    tol: f64,
    b: u32,
    max_elements: usize,
) -> Result<GreedyOutcome>
where
    F: FnMut(&ConformingMesh) -> Result<Vec<f64>>,
{
    let mut out = GreedyOutcome::default();
    loop {
        let values = indicator(mesh)?;
        let marked: Vec<ElementId> = mesh
            .leaves()
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v > tol)
            .map(|(&id, _)| id)
            .collect();
        if marked.is_empty() {
            out.max_indicator = values.iter().copied().fold(0.0, f64::max);
            return Ok(out);
        }
        if mesh.num_elements() + marked.len() * ((1usize << b) - 1) > max_elements {
            return Err(Error::BudgetExceeded(format!(
                "greedy refinement to tolerance {tol:.3e} needs more than {max_elements} elements"
            )));
        }
        mesh.refine(&marked, b)?;
        out.rounds += 1;
        out.marked += marked.len();
    }
}

/// [`greedy`] driven by the geometric estimator `λ_T`.
pub fn adapt_surface(
    mesh: &mut ConformingMesh,
    surface: &MacroSurface,
    disc: &Discretization,
    tol: f64,
    b: u32,
    max_elements: usize,
) -> Result<GreedyOutcome> {
    greedy(
        mesh,
        |m| Ok(geometric_indicators(m, surface, &disc.basis, &disc.sampler)),
        tol,
        b,
        max_elements,
    )
}
