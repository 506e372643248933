use std::sync::Arc;

use proptest::prelude::*;

use surface_afem::geometry::{surfaces, SurfaceRegistry};
use surface_afem::harness::MeshState;
use surface_afem::mesh::{ConformingMesh, MacroTopology, ParametricSimplex, DYADIC_ONE};

fn surface_by_index(i: usize) -> surface_afem::geometry::MacroSurface {
    match i % 4 {
        0 => surfaces::flat_square(),
        1 => surfaces::lshape(),
        2 => surfaces::sphere(),
        _ => surfaces::pyramid(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_refinement_stays_conforming(
        which in 0usize..4,
        picks in prop::collection::vec((any::<prop::sample::Index>(), 1u32..3), 1..40),
    ) {
        let surface = surface_by_index(which);
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        let n0 = mesh.num_elements();
        let mut marked_total = 0;
        for (idx, b) in picks {
            let leaf = mesh.leaves()[idx.index(mesh.num_elements())];
            let before = mesh.num_elements();
            let stats = mesh.refine(&[leaf], b).unwrap();
            marked_total += 1;
            prop_assert!(mesh.num_elements() > before);
            prop_assert_eq!(stats.marked, 1);
            prop_assert!(!mesh.is_leaf(leaf));
        }
        let report = mesh.check_conformity();
        prop_assert!(report.is_conforming(), "{:?}", report);
        prop_assert_eq!(report.hanging_faces, 0);
        prop_assert_eq!(mesh.counters().total_marked(), marked_total);
        let c = mesh.complexity_ratio().unwrap();
        prop_assert!(c * marked_total as f64 >= (mesh.num_elements() - n0) as f64 - 1e-9);
    }

    #[test]
    fn leaves_tile_every_macro_element(
        which in 0usize..4,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..30),
    ) {
        let surface = surface_by_index(which);
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        for idx in picks {
            let leaf = mesh.leaves()[idx.index(mesh.num_elements())];
            mesh.refine(&[leaf], 1).unwrap();
        }
        let mut area = vec![0.0; surface.topology().num_elements()];
        for &id in mesh.leaves() {
            let s = mesh.element(id);
            prop_assert!(s.area() > 0.0);
            prop_assert!(s.vertices.iter().all(|v| v.x + v.y <= DYADIC_ONE));
            area[s.macro_id] += s.area();
        }
        for a in area {
            prop_assert!((a - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn saved_states_restore_the_same_leaves(
        which in 0usize..4,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..20),
    ) {
        let surface = surface_by_index(which);
        let mut mesh = ConformingMesh::new(Arc::clone(surface.topology())).unwrap();
        for idx in picks {
            let leaf = mesh.leaves()[idx.index(mesh.num_elements())];
            mesh.refine(&[leaf], 1).unwrap();
        }
        let state = MeshState::of(&mesh, &surface, 1);
        let parsed = MeshState::parse(&state.to_text(), std::path::Path::new("mem")).unwrap();
        let (_, restored) = parsed.restore(&SurfaceRegistry::with_builtins()).unwrap();
        prop_assert_eq!(MeshState::of(&restored, &surface, 1).leaves, state.leaves);
    }
}

/// Smallest angle of `s` measured on its flat macro triangle.
fn physical_min_angle(topology: &MacroTopology, s: &ParametricSimplex) -> f64 {
    let v = topology.vertices();
    let tri = topology.elements()[s.macro_id];
    let p: Vec<[f64; 3]> = s
        .vertex_coords()
        .iter()
        .map(|&[x, y]| {
            std::array::from_fn(|d| {
                v[tri[0]][d] + x * (v[tri[1]][d] - v[tri[0]][d]) + y * (v[tri[2]][d] - v[tri[0]][d])
            })
        })
        .collect();
    (0..3)
        .map(|i| {
            let u: [f64; 3] = std::array::from_fn(|d| p[(i + 1) % 3][d] - p[i][d]);
            let w: [f64; 3] = std::array::from_fn(|d| p[(i + 2) % 3][d] - p[i][d]);
            let dot: f64 = (0..3).map(|d| u[d] * w[d]).sum();
            let nu = u.iter().map(|c| c * c).sum::<f64>().sqrt();
            let nw = w.iter().map(|c| c * c).sum::<f64>().sqrt();
            (dot / (nu * nw)).clamp(-1.0, 1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn bisection_angles_stay_bounded_below() {
    let surface = surfaces::lshape();
    let topology = Arc::clone(surface.topology());
    let mut mesh = ConformingMesh::new(Arc::clone(&topology)).unwrap();
    let worst_angle = |mesh: &ConformingMesh| {
        mesh.leaves()
            .iter()
            .map(|&id| physical_min_angle(&topology, mesh.element(id)))
            .fold(f64::INFINITY, f64::min)
    };
    let initial = worst_angle(&mesh);
    for _ in 0..30 {
        let first = mesh.leaves()[0];
        mesh.refine(&[first], 2).unwrap();
    }
    // Right isosceles macros bisected across their hypotenuses stay similar.
    assert!((initial - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert!((worst_angle(&mesh) - initial).abs() < 1e-12);
}
