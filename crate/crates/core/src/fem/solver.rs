use crate::error::{Error, Result};
use crate::fem::assemble::LinearSystem;
use crate::fem::dofmap::{Constraint, DofMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `‖r‖ <= rel_tol ‖b‖`.
    pub rel_tol: f64,
    /// Iteration cap; `None` means `10 n_dofs`.
    pub max_iter: Option<usize>,
    /// Largest accepted `|1ᵀb| / (√N ‖b‖)` on closed surfaces.
    pub compatibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-10,
            max_iter: None,
            compatibility_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    /// Relative mean component of the load before it was removed (closed case).
    pub load_mean: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Jacobi-preconditioned conjugate gradients on the constrained system.
///
/// Dirichlet dofs are held at zero. On closed surfaces the load is made
/// orthogonal to constants, iterates are kept in the complement of the
/// constants, and the result is shifted to `mᵀU = 0`.
pub fn solve(
    system: &LinearSystem,
    dofmap: &DofMap,
    opts: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<Solution> {
    let closed = dofmap.constraint() == Constraint::ZeroMean;
    solve_constrained(system, dofmap.dirichlet_mask(), closed, opts, initial)
}

/// As [`solve`], with the constraint given directly.
pub fn solve_constrained(
    system: &LinearSystem,
    mask: &[bool],
    closed: bool,
    opts: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<Solution> {
    let n = system.rhs.len();
    let a = &system.matrix;

    let mut b = system.rhs.clone();
    let mut load_mean = 0.0;
    if closed {
        let norm = dot(&b, &b).sqrt();
        let total: f64 = b.iter().sum();
        if norm > 0.0 {
            load_mean = total.abs() / ((n as f64).sqrt() * norm);
        }
        if load_mean > opts.compatibility_tol {
            return Err(Error::IncompatibleLoad(load_mean));
        }
        let area: f64 = system.mass.iter().sum();
        let c = total / area;
        for (bi, mi) in b.iter_mut().zip(&system.mass) {
            *bi -= c * mi;
        }
    }
    for (bi, &d) in b.iter_mut().zip(mask) {
        if d {
            *bi = 0.0;
        }
    }
    let b_norm = dot(&b, &b).sqrt();

    let mut x = match initial {
        Some(x0) if x0.len() == n => x0.to_vec(),
        _ => vec![0.0; n],
    };
    for (xi, &d) in x.iter_mut().zip(mask) {
        if d {
            *xi = 0.0;
        }
    }
    if b_norm == 0.0 {
        return Ok(Solution {
            coefficients: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            load_mean,
        });
    }

    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .zip(mask)
        .map(|(&d, &m)| if m || d == 0.0 { 0.0 } else { 1.0 / d })
        .collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        a.mul_vec(v, out);
        for (o, &d) in out.iter_mut().zip(mask) {
            if d {
                *o = 0.0;
            }
        }
        if closed {
            remove_mean(out);
        }
    };
    let precondition = |r: &[f64], z: &mut [f64]| {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&inv_diag) {
            *zi = ri * di;
        }
        if closed {
            remove_mean(z);
        }
    };

    let mut r = vec![0.0; n];
    apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(&b) {
        *ri = bi - *ri;
    }
    if closed {
        remove_mean(&mut r);
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let cap = opts.max_iter.unwrap_or(10 * n.max(1));
    let mut residual = dot(&r, &r).sqrt() / b_norm;
    let mut iterations = 0;
    while residual > opts.rel_tol {
        if iterations >= cap {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
        residual = dot(&r, &r).sqrt() / b_norm;
    }
    if closed {
        let area: f64 = system.mass.iter().sum();
        let shift = dot(&system.mass, &x) / area;
        x.iter_mut().for_each(|v| *v -= shift);
    }
    Ok(Solution {
        coefficients: x,
        iterations,
        residual,
        load_mean,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::assemble::assemble;
    use crate::fem::space::{Discretization, FeSpace, QuadratureDegrees};
    use crate::fem::sparse::CsrMatrix;
    use crate::geometry::surfaces;
    use crate::mesh::ConformingMesh;

    #[test]
    fn one_free_dof() {
        let system = LinearSystem {
            matrix: CsrMatrix::from_triplets(1, vec![(0, 0, 2.0)]),
            rhs: vec![4.0],
            mass: vec![1.0],
        };
        let sol =
            solve_constrained(&system, &[false], false, &SolverOptions::default(), None).unwrap();
        assert_eq!(sol.coefficients, vec![2.0]);
    }

    #[test]
    fn zero_load_gives_zero() {
        let surface = surfaces::flat_square();
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        mesh.refine_uniform(2).unwrap();
        let disc = Discretization::new(1, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let sys = assemble(&mesh, &surface, &disc, &space, &|_| 0.0).unwrap();
        let sol = solve(&sys, &space.dofmap, &SolverOptions::default(), None).unwrap();
        assert!(sol.coefficients.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closed_solution_has_zero_mean() {
        let surface = surfaces::sphere();
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        mesh.refine_uniform(2).unwrap();
        let disc = Discretization::new(2, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let f = |p: &nalgebra::Vector3<f64>| 6.0 * p.x * p.y;
        let sys = assemble(&mesh, &surface, &disc, &space, &f).unwrap();
        let sol = solve(&sys, &space.dofmap, &SolverOptions::default(), None).unwrap();
        assert!(dot(&sys.mass, &sol.coefficients).abs() < 1e-12);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn constant_load_on_closed_surface_is_incompatible() {
        let surface = surfaces::sphere();
        let mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        let disc = Discretization::new(1, QuadratureDegrees::default()).unwrap();
        let space = FeSpace::new(&mesh, &surface, &disc).unwrap();
        let sys = assemble(&mesh, &surface, &disc, &space, &|_| 1.0).unwrap();
        assert!(matches!(
            solve(&sys, &space.dofmap, &SolverOptions::default(), None),
            Err(Error::IncompatibleLoad(_))
        ));
    }
}
