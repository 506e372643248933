//! Least-squares convergence rates on log–log data.

use crate::adaptivity::{HistoryRow, Phase, RunHistory};
use crate::error::{Error, Result};
use crate::harness::benchmarks::Quantity;

/// `E ≈ exp(intercept) · N^slope` fitted over the last `window` points.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(N, E)` pairs actually used.
    pub points: Vec<(f64, f64)>,
    pub window: usize,
}

/// Fits `log E = intercept + slope · log N` to the trailing `window` points.
pub fn fit_rate(points: &[(f64, f64)], window: usize) -> Result<RateFit> {
    let tail = &points[points.len().saturating_sub(window)..];
    if tail.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points in the window, need at least 3",
            tail.len()
        )));
    }
    if tail.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InsufficientData(
            "N is not strictly increasing".into(),
        ));
    }
    if tail
        .iter()
        .any(|&(n, e)| !(n > 0.0 && e > 0.0 && e.is_finite()))
    {
        return Err(Error::InsufficientData(
            "N and the quantity must be positive and finite".into(),
        ));
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        points: tail.to_vec(),
        window,
    })
}

pub fn quantity_value(row: &HistoryRow, quantity: Quantity, omega: f64) -> f64 {
    match quantity {
        Quantity::EnergyError => row.energy_error,
        Quantity::Eta => row.eta,
        Quantity::Lambda => row.lambda,
        Quantity::OscU => row.osc_u,
        Quantity::OscF => row.osc_f,
        Quantity::TotalEstimator => row.eta + row.lambda / omega,
    }
}

/// One `(N, E)` point per outer step: the exit row of each adaptive step, or
/// each uniform round. `N = #T − n0`; rows with `N = 0` are skipped.
pub fn history_points(
    history: &RunHistory,
    quantity: Quantity,
    n0: usize,
    omega: f64,
) -> Vec<(f64, f64)> {
    history
        .rows
        .iter()
        .filter(|r| matches!(r.phase, Phase::PdeExit | Phase::Uniform))
        .filter(|r| r.n_elements > n0)
        .map(|r| {
            (
                (r.n_elements - n0) as f64,
                quantity_value(r, quantity, omega),
            )
        })
        .collect()
}

pub fn fit_history(
    history: &RunHistory,
    quantity: Quantity,
    window: usize,
    n0: usize,
    omega: f64,
) -> Result<RateFit> {
    fit_rate(&history_points(history, quantity, n0, omega), window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_per_quadrupling_is_minus_one_half() {
        let fit = fit_rate(&[(100.0, 0.1), (400.0, 0.05), (1600.0, 0.025)], 4).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - (0.1f64.ln() + 0.5 * 100f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn constant_quantity_has_zero_slope() {
        let fit = fit_rate(&[(1.0, 3.0), (2.0, 3.0), (5.0, 3.0)], 3).unwrap();
        assert_eq!(fit.slope, 0.0);
    }

    #[test]
    fn two_points_are_not_enough() {
        let err = fit_rate(&[(1.0, 1.0), (2.0, 0.5)], 4).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn window_keeps_the_tail() {
        let pts = [
            (1.0, 1.0),
            (10.0, 100.0),
            (20.0, 0.5),
            (40.0, 0.25),
            (80.0, 0.125),
        ];
        let fit = fit_rate(&pts, 3).unwrap();
        assert_eq!(fit.points.len(), 3);
        assert!((fit.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_n_is_rejected() {
        let err = fit_rate(&[(1.0, 1.0), (2.0, 0.5), (2.0, 0.4)], 3).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn history_points_use_exit_rows() {
        let mut h = RunHistory::default();
        for (k, n, e) in [(0, 8, 0.4), (1, 20, 0.2), (2, 44, 0.1)] {
            let mut pde = HistoryRow::new(k, 0, Phase::Pde);
            pde.n_elements = n / 2;
            pde.energy_error = 1.0;
            h.push(pde);
            let mut exit = HistoryRow::new(k, 1, Phase::PdeExit);
            exit.n_elements = n;
            exit.energy_error = e;
            exit.eta = e;
            exit.lambda = 0.01;
            h.push(exit);
        }
        let pts = history_points(&h, Quantity::EnergyError, 4, 0.1);
        assert_eq!(pts, vec![(4.0, 0.4), (16.0, 0.2), (40.0, 0.1)]);
        let total = history_points(&h, Quantity::TotalEstimator, 4, 0.1);
        assert!((total[0].1 - 0.5).abs() < 1e-15);
    }
}
