//! Local best L2 approximation by polynomials.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::quadrature::{Domain, QuadratureRule};

fn exponents(domain: Domain, m: usize) -> Vec<(i32, i32)> {
    match domain {
        Domain::Edge => (0..=m as i32).map(|a| (a, 0)).collect(),
        Domain::Triangle => (0..=m as i32)
            .flat_map(|s| (0..=s).map(move |b| (s - b, b)))
            .collect(),
    }
}

fn monomial(p: [f64; 2], (a, b): (i32, i32)) -> f64 {
    p[0].powi(a) * p[1].powi(b)
}

fn vandermonde(rule: &QuadratureRule, exps: &[(i32, i32)]) -> DMatrix<f64> {
    DMatrix::from_fn(rule.len(), exps.len(), |i, a| {
        monomial(rule.points[i], exps[a])
    })
}

fn gram(phi: &DMatrix<f64>, rule: &QuadratureRule) -> DMatrix<f64> {
    let k = phi.ncols();
    DMatrix::from_fn(k, k, |a, b| {
        (0..rule.len())
            .map(|i| rule.weights[i] * phi[(i, a)] * phi[(i, b)])
            .sum()
    })
}

/// Monomial coefficients of `Π²_m v` on the reference domain of `rule`, with
/// `v` given by its values at the rule's points.
///
/// Triangle coefficients are ordered by total degree, then by decreasing
/// power of `x`; edge coefficients by power of `s`.
pub fn l2_project_local(values: &[f64], rule: &QuadratureRule, m: usize) -> Result<Vec<f64>> {
    let exps = exponents(rule.domain, m);
    let phi = vandermonde(rule, &exps);
    let chol = gram(&phi, rule).cholesky().ok_or(Error::SingularGram)?;
    let rhs = DVector::from_fn(exps.len(), |a, _| {
        (0..rule.len())
            .map(|i| rule.weights[i] * values[i] * phi[(i, a)])
            .sum()
    });
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// `Π²_m` as a matrix acting on point values of one quadrature rule.
#[derive(Debug, Clone)]
pub struct Projector {
    weights: Vec<f64>,
    /// `Φ G⁻¹ Φᵀ W`.
    matrix: DMatrix<f64>,
}

impl Projector {
    pub fn new(rule: &QuadratureRule, m: usize) -> Result<Self> {
        let phi = vandermonde(rule, &exponents(rule.domain, m));
        let chol = gram(&phi, rule).cholesky().ok_or(Error::SingularGram)?;
        let mut rhs = phi.transpose();
        for (mut col, &w) in rhs.column_iter_mut().zip(&rule.weights) {
            col *= w;
        }
        let matrix = &phi * chol.solve(&rhs);
        Ok(Projector {
            weights: rule.weights.clone(),
            matrix,
        })
    }

    /// `‖(id − Π²_m) v‖²`.
    ///
    /// The first sample is subtracted beforehand, which leaves the result
    /// unchanged in exact arithmetic and makes it vanish exactly for constants.
    pub fn residual_sq(&self, values: &[f64]) -> f64 {
        let Some(&shift) = values.first() else {
            return 0.0;
        };
        if values.iter().all(|&v| v == shift) {
            return 0.0;
        }
        let n = values.len();
        let mut sum = 0.0;
        for i in 0..n {
            let pv: f64 = (0..n)
                .map(|j| self.matrix[(i, j)] * (values[j] - shift))
                .sum();
            let r = values[i] - shift - pv;
            sum += self.weights[i] * r * r;
        }
        sum
    }
}

/// `‖(id − Π²_m) v‖²` over the reference domain of `rule`.
pub fn projection_residual_sq(values: &[f64], rule: &QuadratureRule, m: usize) -> Result<f64> {
    Ok(Projector::new(rule, m)?.residual_sq(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature::quadrature_rule;

    #[test]
    fn reproduces_members_of_the_space() {
        let rule = quadrature_rule(Domain::Triangle, 8).unwrap();
        let values: Vec<f64> = rule
            .points
            .iter()
            .map(|p| 1.0 + 2.0 * p[0] - p[1] + 3.0 * p[0] * p[1])
            .collect();
        let c = l2_project_local(&values, &rule, 2).unwrap();
        let expected = [1.0, 2.0, -1.0, 0.0, 3.0, 0.0];
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(projection_residual_sq(&values, &rule, 2).unwrap() < 1e-24);
    }

    #[test]
    fn degree_zero_is_the_mean() {
        let rule = quadrature_rule(Domain::Triangle, 6).unwrap();
        let values: Vec<f64> = rule.points.iter().map(|p| p[0] * p[0]).collect();
        let c = l2_project_local(&values, &rule, 0).unwrap();
        // ∫ x² = 1/12 over area 1/2.
        assert!((c[0] - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn x_squared_onto_linears_matches_normal_equations() {
        // Independent oracle: Gram matrix of {1, x, y} and moments of x²
        // from ∫ x^a y^b = a! b! / (a + b + 2)!.
        let g = DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0 / 2.0,
                1.0 / 6.0,
                1.0 / 6.0,
                1.0 / 6.0,
                1.0 / 12.0,
                1.0 / 24.0,
                1.0 / 6.0,
                1.0 / 24.0,
                1.0 / 12.0,
            ],
        );
        let r = DVector::from_column_slice(&[1.0 / 12.0, 1.0 / 20.0, 1.0 / 60.0]);
        let oracle = g.lu().solve(&r).unwrap();
        let rule = quadrature_rule(Domain::Triangle, 6).unwrap();
        let values: Vec<f64> = rule.points.iter().map(|p| p[0] * p[0]).collect();
        let c = l2_project_local(&values, &rule, 1).unwrap();
        for i in 0..3 {
            assert!((c[i] - oracle[i]).abs() < 1e-12);
        }
        // ‖x² − Π x²‖² = ∫x⁴ − rᵀc with ∫x⁴ = 4!/6!.
        let res = 1.0 / 30.0 - r.dot(&oracle);
        let got = projection_residual_sq(&values, &rule, 1).unwrap();
        assert!((got - res).abs() < 1e-14);
    }

    #[test]
    fn constants_leave_an_exact_zero() {
        let rule = quadrature_rule(Domain::Edge, 5).unwrap();
        let values = vec![0.1 + 0.2; rule.len()];
        assert_eq!(projection_residual_sq(&values, &rule, 1).unwrap(), 0.0);
    }

    #[test]
    fn edge_projection_of_a_quadratic() {
        // s² onto linears on [0, 1]: residual is the Legendre P₂ component, 1/180.
        let rule = quadrature_rule(Domain::Edge, 6).unwrap();
        let values: Vec<f64> = rule.points.iter().map(|p| p[0] * p[0]).collect();
        let got = projection_residual_sq(&values, &rule, 1).unwrap();
        assert!((got - 1.0 / 180.0).abs() < 1e-15);
    }
}
