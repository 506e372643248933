use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which part of the algorithm produced a history row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Geometric pre-refinement and the first solve.
    PreSurface,
    /// Exit of a surface-resolution call.
    Surface,
    /// One solve-estimate step of the inner loop that was followed by refinement.
    Pde,
    /// The inner loop step that met its tolerance.
    PdeExit,
    /// One round of uniform refinement.
    Uniform,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PreSurface => "presurface",
            Phase::Surface => "surface",
            Phase::Pde => "pde",
            Phase::PdeExit => "pde_exit",
            Phase::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "presurface" => Phase::PreSurface,
            "surface" => Phase::Surface,
            "pde" => Phase::Pde,
            "pde_exit" => Phase::PdeExit,
            "uniform" => Phase::Uniform,
            other => return Err(Error::UnknownName(other.to_string())),
        })
    }
}

/// One recorded event. Quantities not computed for an event are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub k: usize,
    pub j: usize,
    pub phase: Phase,
    pub n_elements: usize,
    pub n_dofs: usize,
    pub n_marked: usize,
    pub eta: f64,
    pub lambda: f64,
    pub osc_u: f64,
    pub osc_f: f64,
    pub energy_error: f64,
    pub eps_k: f64,
    pub cg_iters: usize,
    pub wall_ms: f64,
}

impl HistoryRow {
    pub(crate) fn new(k: usize, j: usize, phase: Phase) -> Self {
        HistoryRow {
            k,
            j,
            phase,
            n_elements: 0,
            n_dofs: 0,
            n_marked: 0,
            eta: f64::NAN,
            lambda: f64::NAN,
            osc_u: f64::NAN,
            osc_f: f64::NAN,
            energy_error: f64::NAN,
            eps_k: f64::NAN,
            cg_iters: 0,
            wall_ms: 0.0,
        }
    }
}

/// A broken exit condition found by [`RunHistory::replay_contracts`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractViolation {
    pub row: usize,
    pub k: usize,
    pub j: usize,
    pub what: String,
}

impl fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row {} (k={}, j={}): {}",
            self.row, self.k, self.j, self.what
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunHistory {
    pub rows: Vec<HistoryRow>,
}

impl RunHistory {
    pub fn push(&mut self, row: HistoryRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows_with(&self, phase: Phase) -> impl Iterator<Item = &HistoryRow> {
        self.rows.iter().filter(move |r| r.phase == phase)
    }

    /// Inner refinement count `J` of every completed inner loop, by outer step.
    pub fn inner_iterations(&self) -> Vec<(usize, usize)> {
        self.rows_with(Phase::PdeExit).map(|r| (r.k, r.j)).collect()
    }

    /// Checks the recorded exit conditions:
    /// `λ <= δ₀` after pre-refinement, `λ <= ω ε_k` at every surface exit,
    /// `η <= ε_k` at every inner-loop exit and `ε_{k+1} = ρ ε_k`.
    pub fn replay_contracts(&self, delta0: f64, omega: f64, rho: f64) -> Vec<ContractViolation> {
        let mut out = Vec::new();
        let mut report = |row: usize, r: &HistoryRow, what: String| {
            out.push(ContractViolation {
                row,
                k: r.k,
                j: r.j,
                what,
            })
        };
        let mut last_eps: Option<(usize, f64)> = None;
        for (i, r) in self.rows.iter().enumerate() {
            match r.phase {
                Phase::PreSurface if !(r.lambda <= delta0) => {
                    report(i, r, format!("λ = {:e} > δ₀ = {:e}", r.lambda, delta0))
                }
                Phase::Surface if !(r.lambda <= omega * r.eps_k) => report(
                    i,
                    r,
                    format!("λ = {:e} > ω ε_k = {:e}", r.lambda, omega * r.eps_k),
                ),
                Phase::PdeExit if !(r.eta <= r.eps_k) => {
                    report(i, r, format!("η = {:e} > ε_k = {:e}", r.eta, r.eps_k))
                }
                _ => {}
            }
            if matches!(r.phase, Phase::Surface | Phase::Pde | Phase::PdeExit) {
                match last_eps {
                    Some((k, eps)) if k == r.k && eps != r.eps_k => report(
                        i,
                        r,
                        format!("ε_k changed within step k: {eps:e} -> {:e}", r.eps_k),
                    ),
                    Some((k, eps)) if r.k == k + 1 && r.eps_k != rho * eps => report(
                        i,
                        r,
                        format!(
                            "ε_(k+1) = {:e} differs from ρ ε_k = {:e}",
                            r.eps_k,
                            rho * eps
                        ),
                    ),
                    _ => {}
                }
                last_eps = Some((r.k, r.eps_k));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, j: usize, phase: Phase, eta: f64, lambda: f64, eps: f64) -> HistoryRow {
        HistoryRow {
            eta,
            lambda,
            eps_k: eps,
            ..HistoryRow::new(k, j, phase)
        }
    }

    #[test]
    fn phases_round_trip() {
        for p in [
            Phase::PreSurface,
            Phase::Surface,
            Phase::Pde,
            Phase::PdeExit,
            Phase::Uniform,
        ] {
            assert_eq!(p.as_str().parse::<Phase>().unwrap(), p);
        }
        assert!("other".parse::<Phase>().is_err());
    }

    #[test]
    fn clean_history_has_no_violations() {
        let mut h = RunHistory::default();
        h.push(row(0, 0, Phase::PreSurface, 1.0, 0.05, 1.0));
        h.push(row(0, 0, Phase::Surface, f64::NAN, 0.1, 1.0));
        h.push(row(0, 0, Phase::PdeExit, 1.0, 0.1, 1.0));
        h.push(row(1, 0, Phase::Surface, f64::NAN, 0.04, 0.5));
        h.push(row(1, 0, Phase::Pde, 0.7, 0.04, 0.5));
        h.push(row(1, 1, Phase::PdeExit, 0.5, 0.04, 0.5));
        assert!(h.replay_contracts(0.1, 0.1, 0.5).is_empty());
        assert_eq!(h.inner_iterations(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn violations_are_found() {
        let mut h = RunHistory::default();
        h.push(row(0, 0, Phase::PreSurface, 1.0, 0.2, 1.0));
        h.push(row(0, 0, Phase::Surface, f64::NAN, 0.2, 1.0));
        h.push(row(0, 0, Phase::PdeExit, 1.5, 0.1, 1.0));
        h.push(row(1, 0, Phase::PdeExit, 0.3, 0.1, 0.4));
        h.push(row(1, 1, Phase::PdeExit, f64::NAN, 0.1, 0.4));
        let v = h.replay_contracts(0.1, 0.1, 0.5);
        assert_eq!(
            v.iter().map(|v| v.row).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4]
        );
    }
}
