//! Headless invariant suite behind the `check` subcommand.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adaptivity::{afem_run, dorfler_mark, AfemParams, ExactSum};
use crate::error::Result;
use crate::estimators::energy_error;
use crate::fem::{
    assemble, local_system, solve, Discretization, FeSpace, QuadratureDegrees, SolverOptions,
};
use crate::geometry::surfaces;
use crate::harness::benchmarks::flat_square_sin;
use crate::harness::history_io::{read_history_csv, HistoryWriter};
use crate::harness::mesh_io::{parse_off, surface_off};
use crate::mesh::ConformingMesh;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng) -> Result<std::result::Result<String, String>>;

const CHECKS: [(&str, Check); 8] = [
    ("p1_reference_stiffness", p1_reference_stiffness),
    ("dorfler_minimality", dorfler_minimality),
    ("refinement_conformity", refinement_conformity),
    ("energy_error_of_zero", energy_error_of_zero),
    ("cg_matches_direct_solve", cg_matches_direct_solve),
    ("off_round_trip", off_round_trip),
    ("history_csv_round_trip", history_csv_round_trip),
    ("contract_replay", contract_replay),
];

pub fn check_names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|c| c.0)
}

/// Runs every check; errors inside a check count as failures.
pub fn run_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let (passed, detail) = match check(&mut rng) {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn verdict(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn setup(
    surface: &crate::geometry::MacroSurface,
    n: usize,
    uniform: u32,
) -> Result<(ConformingMesh, Discretization, FeSpace)> {
    let mut mesh = ConformingMesh::new(Arc::clone(surface.topology()))?;
    if uniform > 0 {
        mesh.refine_uniform(uniform)?;
    }
    let disc = Discretization::new(n, QuadratureDegrees::default())?;
    let space = FeSpace::new(&mesh, surface, &disc)?;
    Ok((mesh, disc, space))
}

fn p1_reference_stiffness(_: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let surface = surfaces::flat_triangle();
    let (mesh, disc, space) = setup(&surface, 1, 0)?;
    let local = local_system(&mesh, &surface, &disc, &space, 0, &|_| 0.0)?;
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    let mut err = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            err = err.max((local.stiffness[i][j] - expected[i][j]).abs());
        }
    }
    Ok(verdict(err <= 1e-12, format!("max deviation {err:.2e}")))
}

fn brute_force_minimum(eta: &[f64], theta: f64) -> usize {
    let total = eta.iter().map(|e| e * e).collect::<ExactSum>().value();
    let target = theta * theta * total;
    let n = eta.len();
    (0u32..1 << n)
        .filter(|&mask| {
            let mass = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| eta[i] * eta[i])
                .collect::<ExactSum>()
                .value();
            mass >= target
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

fn dorfler_minimality(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let mut cases = 0;
    for _ in 0..50 {
        let len = rng.gen_range(1..=12);
        let eta: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        for theta in [0.3, 0.5, 0.8, 1.0] {
            let marked = dorfler_mark(&eta, theta);
            let total = eta.iter().map(|e| e * e).collect::<ExactSum>().value();
            let mass = marked
                .iter()
                .map(|&i| eta[i] * eta[i])
                .collect::<ExactSum>()
                .value();
            let min = brute_force_minimum(&eta, theta);
            if marked.len() != min || mass < theta * theta * total {
                return Ok(Err(format!(
                    "θ = {theta}, {len} elements: marked {} (minimum {min})",
                    marked.len()
                )));
            }
            cases += 1;
        }
    }
    Ok(Ok(format!("{cases} cases")))
}

fn refinement_conformity(rng: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let mut mesh = ConformingMesh::new(Arc::clone(surfaces::sphere().topology()))?;
    let mut steps = 0;
    for _ in 0..200 {
        let leaves = mesh.leaves();
        let pick = leaves[rng.gen_range(0..leaves.len())];
        mesh.refine(&[pick], 1)?;
        steps += 1;
        if mesh.num_elements() > 20_000 {
            break;
        }
    }
    let report = mesh.check_conformity();
    Ok(verdict(
        report.is_conforming(),
        format!(
            "{steps} refinements, {} elements, {report:?}",
            mesh.num_elements()
        ),
    ))
}

fn energy_error_of_zero(_: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let surface = surfaces::flat_square();
    let (mesh, disc, space) = setup(&surface, 2, 4)?;
    let zero = vec![0.0; space.n_dofs()];
    let e = energy_error(&mesh, &surface, &disc, &space, &zero, &flat_square_sin())?;
    let dev = (e - PI / SQRT_2).abs();
    Ok(verdict(dev <= 1e-6, format!("deviation {dev:.2e}")))
}

fn cg_matches_direct_solve(_: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let surface = surfaces::lshape();
    let (mesh, disc, space) = setup(&surface, 2, 4)?;
    let sys = assemble(&mesh, &surface, &disc, &space, &|p| 1.0 + p.x * p.y)?;
    let opts = SolverOptions {
        rel_tol: 1e-13,
        ..SolverOptions::default()
    };
    let cg = solve(&sys, &space.dofmap, &opts, None)?;
    let free: Vec<usize> = (0..space.n_dofs())
        .filter(|&i| !space.dofmap.is_dirichlet(i))
        .collect();
    let dense = sys.matrix.to_dense();
    let a = DMatrix::from_fn(free.len(), free.len(), |i, j| dense[(free[i], free[j])]);
    let b = DVector::from_fn(free.len(), |i, _| sys.rhs[free[i]]);
    let x = a.cholesky().map(|c| c.solve(&b));
    let Some(x) = x else {
        return Ok(Err("reduced matrix is not positive definite".into()));
    };
    let err = free
        .iter()
        .enumerate()
        .map(|(i, &d)| (x[i] - cg.coefficients[d]).abs())
        .fold(0.0, f64::max);
    Ok(verdict(
        err <= 1e-8,
        format!("{} dofs, max deviation {err:.2e}", space.n_dofs()),
    ))
}

fn off_round_trip(_: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let surface = surfaces::sphere();
    let (mesh, disc, space) = setup(&surface, 1, 0)?;
    let off = parse_off(&surface_off(&mesh, &disc, &space, 0)?)?;
    let (v, f) = (off.vertices.len(), off.faces.len());
    let (mesh, disc, space) = setup(&surface, 2, 2)?;
    let fine = parse_off(&surface_off(&mesh, &disc, &space, 1)?)?;
    Ok(verdict(
        (v, f) == (6, 8) && fine.faces.len() == 4 * mesh.num_elements(),
        format!("octahedron {v} vertices {f} faces"),
    ))
}

fn history_csv_round_trip(_: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let params = AfemParams {
        max_outer: 2,
        timing: false,
        ..AfemParams::default()
    };
    let (history, _, _) = afem_run(
        &surfaces::flat_square(),
        &flat_square_sin(),
        &params,
        &mut |_| Ok(()),
    )?;
    let dir = std::env::temp_dir().join(format!("surface-afem-check-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("history.csv");
    let mut w = HistoryWriter::create(&path)?;
    for row in &history.rows {
        w.write(row)?;
    }
    drop(w);
    let back = read_history_csv(&path)?;
    let _ = std::fs::remove_dir_all(&dir);
    let same = back.rows.len() == history.rows.len()
        && back.rows.iter().zip(&history.rows).all(|(a, b)| {
            let bits = |r: &crate::adaptivity::HistoryRow| {
                [
                    r.eta,
                    r.lambda,
                    r.osc_u,
                    r.osc_f,
                    r.energy_error,
                    r.eps_k,
                    r.wall_ms,
                ]
                .map(f64::to_bits)
            };
            bits(a) == bits(b) && a.n_elements == b.n_elements && a.phase == b.phase
        });
    Ok(verdict(same, format!("{} rows", history.len())))
}

fn contract_replay(_: &mut ChaCha8Rng) -> Result<std::result::Result<String, String>> {
    let mut total = 0;
    let mut violations = Vec::new();
    for (surface, problem, degree) in [
        (
            surfaces::lshape(),
            crate::estimators::ManufacturedProblem::new("f1", |_| 1.0),
            1,
        ),
        (
            surfaces::sphere(),
            crate::harness::benchmarks::sphere_xy(),
            2,
        ),
    ] {
        let params = AfemParams {
            degree,
            max_outer: 2,
            timing: false,
            ..AfemParams::default()
        };
        let (h, _, _) = afem_run(&surface, &problem, &params, &mut |_| Ok(()))?;
        total += h.len();
        violations.extend(h.replay_contracts(params.delta0, params.omega, params.rho));
    }
    Ok(verdict(
        violations.is_empty(),
        match violations.first() {
            None => format!("{total} rows"),
            Some(v) => format!("{} violations, first: {v}", violations.len()),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for r in run_checks(0) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn brute_force_agrees_on_a_hand_case() {
        assert_eq!(brute_force_minimum(&[1.0, 3.0, 4.0, 2.0], 0.5), 1);
        assert_eq!(brute_force_minimum(&[1.0, 1.0, 1.0, 1.0], 1.0), 4);
    }
}
