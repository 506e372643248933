//! Quadrature on the reference triangle and the unit interval.
//!
//! Low degrees use the classical symmetric rules; from degree 3 upwards the
//! triangle rule is the conical (collapsed) product of Gauss-Legendre rules,
//! which has positive weights and is exact to any requested degree.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest exactness degree served.
pub const MAX_DEGREE: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `{x >= 0, y >= 0, x + y <= 1}`, area 1/2.
    Triangle,
    /// `[0, 1]`.
    Edge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub domain: Domain,
    pub degree: usize,
    /// For [`Domain::Edge`] only the first coordinate is used.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Integral of `f` over the reference domain.
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev-like initial guess.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        // Map from [-1, 1] to [0, 1].
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * weight;
        w[n - 1 - i] = 0.5 * weight;
    }
    (x, w)
}

/// A rule on `domain` exact for polynomials of total degree `degree`.
pub fn quadrature_rule(domain: Domain, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let (points, weights) = match domain {
        Domain::Edge => {
            let (x, w) = gauss_legendre(degree / 2 + 1);
            (x.into_iter().map(|s| [s, 0.0]).collect(), w)
        }
        Domain::Triangle => match degree {
            0 | 1 => (vec![[1.0 / 3.0, 1.0 / 3.0]], vec![0.5]),
            2 => (
                vec![
                    [1.0 / 6.0, 1.0 / 6.0],
                    [2.0 / 3.0, 1.0 / 6.0],
                    [1.0 / 6.0, 2.0 / 3.0],
                ],
                vec![1.0 / 6.0; 3],
            ),
            _ => conical_product(degree),
        },
    };
    Ok(QuadratureRule {
        domain,
        degree,
        points,
        weights,
    })
}

fn conical_product(degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    // ∫_T f = ∫_0^1 ∫_0^1 f(u, (1 - u) v) (1 - u) dv du; the u-integrand has degree + 1.
    let (u, wu) = gauss_legendre((degree + 2).div_ceil(2));
    let (v, wv) = gauss_legendre(degree / 2 + 1);
    let mut points = Vec::with_capacity(u.len() * v.len());
    let mut weights = Vec::with_capacity(u.len() * v.len());
    for (&ui, &wi) in u.iter().zip(&wu) {
        for (&vj, &wj) in v.iter().zip(&wv) {
            points.push([ui, (1.0 - ui) * vj]);
            weights.push(wi * wj * (1.0 - ui));
        }
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫_T x^a y^b = a! b! / (a + b + 2)!
    fn monomial_integral(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_rules_integrate_monomials_exactly() {
        for degree in 0..=20 {
            let rule = quadrature_rule(Domain::Triangle, degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let q = rule.integrate(|[x, y]| x.powi(a as i32) * y.powi(b as i32));
                    let exact = monomial_integral(a, b);
                    assert!(
                        (q - exact).abs() < 1e-14,
                        "degree {degree}: x^{a} y^{b}: {q} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn edge_rules_integrate_monomials_exactly() {
        for degree in 0..=25 {
            let rule = quadrature_rule(Domain::Edge, degree).unwrap();
            for a in 0..=degree as i32 {
                let q = rule.integrate(|[s, _]| s.powi(a));
                assert!((q - 1.0 / (a as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degree_two_xy() {
        let rule = quadrature_rule(Domain::Triangle, 2).unwrap();
        let q = rule.integrate(|[x, y]| x * y);
        assert!((q - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn degree_zero_is_one_point() {
        let rule = quadrature_rule(Domain::Triangle, 0).unwrap();
        assert_eq!(rule.len(), 1);
        assert_eq!(rule.weights[0], 0.5);
    }

    #[test]
    fn edge_degree_one_weights_sum_to_one() {
        let rule = quadrature_rule(Domain::Edge, 1).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn too_high_degree_is_rejected() {
        assert!(matches!(
            quadrature_rule(Domain::Triangle, MAX_DEGREE + 1),
            Err(Error::UnsupportedDegree(_))
        ));
    }
}
