//! Bisection forest over the macro elements and the conforming leaf mesh.
//!
//! Each macro element owns a binary tree of parametric simplices in its copy
//! of the reference triangle. Refinement is newest-vertex bisection: a simplex
//! stores its vertices as `(newest, a, b)` and its refinement edge is `a-b`.
//! Leaves are linked across patches through canonical [`PointKey`]s, so the
//! conformity closure runs over the whole surface at once.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::dyadic::{squared_distance, twice_signed_area, DyadicPoint, DYADIC_ONE};
use crate::mesh::topology::{MacroTopology, PointKey, EDGE_CORNERS};

/// Intrinsic dimension of the surfaces handled here.
pub const DIM: usize = 2;

/// Area of the reference triangle.
pub const REFERENCE_AREA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParametricSimplex {
    pub macro_id: usize,
    /// `vertices[0]` is the newest vertex; the refinement edge is opposite to it.
    pub vertices: [DyadicPoint; 3],
    pub generation: u32,
}

impl ParametricSimplex {
    /// Local index of the refinement edge (always the edge opposite the newest vertex).
    pub fn refinement_edge(&self) -> usize {
        0
    }

    /// `|T̂| = |Ω| 2^(-generation)`.
    pub fn area(&self) -> f64 {
        REFERENCE_AREA * (-(self.generation as f64)).exp2()
    }

    /// `h_T = |T̂|^(1/d)`.
    pub fn mesh_size(&self) -> f64 {
        // |T̂|^(1/2) = 2^(-(generation + 1) / 2), evaluated exactly as a power of two.
        (-((self.generation + 1) as f64) / DIM as f64).exp2()
    }

    pub fn vertex_coords(&self) -> [[f64; 2]; 3] {
        self.vertices.map(DyadicPoint::to_f64)
    }

    /// Endpoints of local edge `l` in reference-corner order.
    pub fn edge_vertices(&self, l: usize) -> [DyadicPoint; 2] {
        let [a, b] = EDGE_CORNERS[l];
        [self.vertices[a], self.vertices[b]]
    }

    /// Smallest interior angle, in radians.
    pub fn min_angle(&self) -> f64 {
        let p = self.vertex_coords();
        (0..3)
            .map(|i| {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1])
                    / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt());
                cos.clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Exact similarity-class signature: sorted squared side lengths reduced by their gcd.
    pub fn similarity_class(&self) -> [u128; 3] {
        let v = self.vertices;
        let mut l = [
            squared_distance(v[1], v[2]),
            squared_distance(v[2], v[0]),
            squared_distance(v[0], v[1]),
        ];
        l.sort_unstable();
        let g = gcd(gcd(l[0], l[1]), l[2]);
        l.map(|x| x / g)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

type EdgeKey = (PointKey, PointKey);

fn edge_key(a: PointKey, b: PointKey) -> EdgeKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Up to two leaves incident to an edge.
#[derive(Debug, Clone, Copy)]
struct EdgeSlots([usize; 2]);

const EMPTY: usize = usize::MAX;

impl EdgeSlots {
    fn new(id: usize) -> Self {
        EdgeSlots([id, EMPTY])
    }

    fn insert(&mut self, id: usize) {
        if self.0[0] == EMPTY {
            self.0[0] = id;
        } else if self.0[1] == EMPTY {
            self.0[1] = id;
        } else {
            panic!("edge shared by more than two leaves");
        }
    }

    /// Removes `id`; returns `true` when the slot becomes empty.
    fn remove(&mut self, id: usize) -> bool {
        if self.0[0] == id {
            self.0[0] = self.0[1];
            self.0[1] = EMPTY;
        } else if self.0[1] == id {
            self.0[1] = EMPTY;
        }
        self.0[0] == EMPTY
    }

    fn other(&self, id: usize) -> Option<usize> {
        self.0.iter().copied().find(|&x| x != id && x != EMPTY)
    }

    fn count(&self) -> usize {
        self.0.iter().filter(|&&x| x != EMPTY).count()
    }
}

#[derive(Debug, Clone)]
struct Node {
    simplex: ParametricSimplex,
    parent: Option<usize>,
    children: Option<[usize; 2]>,
}

/// One side of a face: the element, its local edge, and the parametric
/// endpoints of the face in that element's own patch. Both sides of a face
/// list their endpoints in the same order, which realizes the affine
/// correspondence between the two parametric traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceSide {
    pub element: ElementId,
    pub local_edge: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl FaceSide {
    /// Parametric point at face parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> [f64; 2] {
        [
            self.start[0] + s * (self.end[0] - self.start[0]),
            self.start[1] + s * (self.end[1] - self.start[1]),
        ]
    }

    /// Length of the face in the parametric plane of this side.
    pub fn parametric_length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    Interior(FaceSide),
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceNeighbor {
    /// This element's side of the face.
    pub side: FaceSide,
    pub neighbor: Neighbor,
}

/// An interior face with both incident leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorFace {
    pub plus: FaceSide,
    pub minus: FaceSide,
}

impl InteriorFace {
    pub fn crosses_patches(&self, mesh: &ConformingMesh) -> bool {
        mesh.element(self.plus.element).macro_id != mesh.element(self.minus.element).macro_id
    }
}

/// Result of a conformity audit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConformityReport {
    pub interior_faces: usize,
    pub boundary_faces: usize,
    pub hanging_faces: usize,
    /// Patches whose leaf areas do not add up to `|Ω|` exactly.
    pub area_defects: usize,
}

impl ConformityReport {
    pub fn is_conforming(&self) -> bool {
        self.hanging_faces == 0 && self.area_defects == 0
    }
}

/// Bookkeeping for the complexity bound `#T_k - #T_0 <= C Σ #M_j`.
#[derive(Debug, Clone, Default)]
pub struct RefineCounters {
    pub initial_elements: usize,
    pub marked_per_call: Vec<usize>,
    pub bisections: usize,
}

impl RefineCounters {
    pub fn total_marked(&self) -> usize {
        self.marked_per_call.iter().sum()
    }
}

/// Outcome of one `refine` call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefineStats {
    pub marked: usize,
    pub bisections: usize,
    /// Bisections of elements that were neither marked nor descendants of marked elements.
    pub closure_bisections: usize,
}

#[derive(Debug, Clone)]
pub struct ConformingMesh {
    topology: Arc<MacroTopology>,
    nodes: Vec<Node>,
    leaves: Vec<ElementId>,
    leaf_pos: Vec<usize>,
    edges: HashMap<EdgeKey, EdgeSlots>,
    counters: RefineCounters,
}

impl ConformingMesh {
    /// One leaf per macro element, each rooted at the reference triangle with
    /// its label-0 edge as refinement edge.
    pub fn new(topology: Arc<MacroTopology>) -> Result<Self> {
        let roots = (0..topology.num_elements())
            .map(|e| {
                let r = topology.refinement_edge(e);
                let [p, q] = EDGE_CORNERS[r];
                ParametricSimplex {
                    macro_id: e,
                    vertices: [
                        DyadicPoint::corner(r),
                        DyadicPoint::corner(p),
                        DyadicPoint::corner(q),
                    ],
                    generation: 0,
                }
            })
            .collect();
        Self::from_leaves(topology, roots)
    }

    /// Rebuilds a mesh from its leaves (e.g. a saved state). The forest
    /// history is not retained; every leaf becomes a root.
    pub fn from_leaves(
        topology: Arc<MacroTopology>,
        leaves: Vec<ParametricSimplex>,
    ) -> Result<Self> {
        let mut mesh = ConformingMesh {
            topology,
            nodes: Vec::with_capacity(leaves.len()),
            leaves: Vec::new(),
            leaf_pos: Vec::new(),
            edges: HashMap::new(),
            counters: RefineCounters::default(),
        };
        for s in leaves {
            if s.macro_id >= mesh.topology.num_elements() {
                return Err(Error::InvalidTopology(format!(
                    "leaf references macro element {}",
                    s.macro_id
                )));
            }
            let twice = twice_signed_area(s.vertices[0], s.vertices[1], s.vertices[2]);
            let full = (DYADIC_ONE as i128) * (DYADIC_ONE as i128);
            if twice <= 0 || full % twice != 0 || !((full / twice) as u128).is_power_of_two() {
                return Err(Error::InvalidTopology(
                    "leaf is not a positively oriented bisection simplex".into(),
                ));
            }
            let generation = ((full / twice) as u128).trailing_zeros();
            let id = mesh.nodes.len();
            mesh.nodes.push(Node {
                simplex: ParametricSimplex { generation, ..s },
                parent: None,
                children: None,
            });
            mesh.insert_edges(id);
        }
        mesh.rebuild_leaves();
        mesh.counters.initial_elements = mesh.leaves.len();
        let report = mesh.check_conformity();
        if !report.is_conforming() {
            return Err(Error::InvalidTopology(format!(
                "leaves do not form a conforming mesh: {report:?}"
            )));
        }
        Ok(mesh)
    }

    pub fn topology(&self) -> &MacroTopology {
        &self.topology
    }

    pub fn topology_arc(&self) -> &Arc<MacroTopology> {
        &self.topology
    }

    /// Leaves in ascending id order.
    pub fn leaves(&self) -> &[ElementId] {
        &self.leaves
    }

    pub fn num_elements(&self) -> usize {
        self.leaves.len()
    }

    pub fn counters(&self) -> &RefineCounters {
        &self.counters
    }

    pub fn element(&self, id: ElementId) -> &ParametricSimplex {
        &self.nodes[id.0].simplex
    }

    pub fn parent(&self, id: ElementId) -> Option<ElementId> {
        self.nodes.get(id.0)?.parent.map(ElementId)
    }

    pub fn children(&self, id: ElementId) -> Option<[ElementId; 2]> {
        self.nodes.get(id.0)?.children.map(|c| c.map(ElementId))
    }

    pub fn is_leaf(&self, id: ElementId) -> bool {
        self.leaf_pos.get(id.0).is_some_and(|&p| p != EMPTY)
    }

    /// Position of a leaf in [`leaves`](Self::leaves).
    pub fn leaf_index(&self, id: ElementId) -> Option<usize> {
        self.leaf_pos.get(id.0).copied().filter(|&p| p != EMPTY)
    }

    fn check_leaf(&self, id: ElementId) -> Result<()> {
        if self.is_leaf(id) {
            Ok(())
        } else {
            Err(Error::UnknownElement(id.0))
        }
    }

    pub fn point_key(&self, id: ElementId, p: DyadicPoint) -> PointKey {
        self.topology.point_key(self.element(id).macro_id, p)
    }

    fn local_edge_key(&self, id: usize, l: usize) -> EdgeKey {
        let s = &self.nodes[id].simplex;
        let [a, b] = s.edge_vertices(l);
        edge_key(
            self.topology.point_key(s.macro_id, a),
            self.topology.point_key(s.macro_id, b),
        )
    }

    /// Whether local edge `l` of a leaf lies on the boundary of the macro surface.
    pub fn is_boundary_edge(&self, id: ElementId, l: usize) -> bool {
        let s = self.element(id);
        let [a, b] = s.edge_vertices(l);
        let side = if a.y == 0 && b.y == 0 {
            Some(2)
        } else if a.x == 0 && b.x == 0 {
            Some(1)
        } else if a.x + a.y == DYADIC_ONE && b.x + b.y == DYADIC_ONE {
            Some(0)
        } else {
            None
        };
        side.is_some_and(|side| self.topology.is_boundary_side(s.macro_id, side))
    }

    fn insert_edges(&mut self, id: usize) {
        for l in 0..3 {
            let key = self.local_edge_key(id, l);
            self.edges
                .entry(key)
                .and_modify(|s| s.insert(id))
                .or_insert_with(|| EdgeSlots::new(id));
        }
    }

    fn remove_edges(&mut self, id: usize) {
        for l in 0..3 {
            let key = self.local_edge_key(id, l);
            if let Some(slots) = self.edges.get_mut(&key) {
                if slots.remove(id) {
                    self.edges.remove(&key);
                }
            }
        }
    }

    fn node_is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_none()
    }

    fn rebuild_leaves(&mut self) {
        self.leaves.clear();
        self.leaf_pos.clear();
        self.leaf_pos.resize(self.nodes.len(), EMPTY);
        for (i, n) in self.nodes.iter().enumerate() {
            if n.children.is_none() {
                self.leaf_pos[i] = self.leaves.len();
                self.leaves.push(ElementId(i));
            }
        }
    }

    fn bisect(&mut self, id: usize) -> Result<()> {
        let s = self.nodes[id].simplex;
        let [p0, p1, p2] = s.vertices;
        let m = p1.midpoint(p2)?;
        let child = |vertices| ParametricSimplex {
            macro_id: s.macro_id,
            vertices,
            generation: s.generation + 1,
        };
        self.remove_edges(id);
        let first = self.nodes.len();
        for c in [child([m, p0, p1]), child([m, p2, p0])] {
            self.nodes.push(Node {
                simplex: c,
                parent: Some(id),
                children: None,
            });
        }
        self.nodes[id].children = Some([first, first + 1]);
        self.insert_edges(first);
        self.insert_edges(first + 1);
        self.counters.bisections += 1;
        Ok(())
    }

    /// Bisects `id` and whatever is needed to keep the mesh conforming.
    fn refine_element(&mut self, id: usize, bisections: &mut usize) -> Result<()> {
        while self.node_is_leaf(id) {
            let e = self.local_edge_key(id, 0);
            match self.edges.get(&e).and_then(|s| s.other(id)) {
                None => {
                    self.bisect(id)?;
                    *bisections += 1;
                }
                Some(nb) if self.local_edge_key(nb, 0) == e => {
                    self.bisect(id)?;
                    self.bisect(nb)?;
                    *bisections += 2;
                }
                Some(nb) => self.refine_element(nb, bisections)?,
            }
        }
        Ok(())
    }

    /// Bisects every marked leaf at least `b` times and closes the result to a
    /// conforming mesh.
    pub fn refine(&mut self, marked: &[ElementId], b: u32) -> Result<RefineStats> {
        for &id in marked {
            self.check_leaf(id)?;
        }
        let mut targets: Vec<ElementId> = marked.to_vec();
        targets.sort_unstable();
        targets.dedup();
        let before = self.nodes.len();
        let mut bisections = 0usize;
        let mut direct = 0usize;
        for &ElementId(root) in &targets {
            let target_generation = self.nodes[root].simplex.generation + b;
            let mut stack = vec![root];
            while let Some(e) = stack.pop() {
                if self.node_is_leaf(e) {
                    if self.nodes[e].simplex.generation >= target_generation {
                        continue;
                    }
                    self.refine_element(e, &mut bisections)?;
                    direct += 1;
                }
                if let Some([c0, c1]) = self.nodes[e].children {
                    stack.push(c1);
                    stack.push(c0);
                }
            }
        }
        debug_assert_eq!(self.nodes.len() - before, 2 * bisections);
        self.rebuild_leaves();
        self.counters.marked_per_call.push(targets.len());
        Ok(RefineStats {
            marked: targets.len(),
            bisections,
            closure_bisections: bisections.saturating_sub(direct),
        })
    }

    /// Marks every leaf.
    pub fn refine_uniform(&mut self, b: u32) -> Result<RefineStats> {
        let all = self.leaves.clone();
        self.refine(&all, b)
    }

    fn face_side(&self, id: usize, l: usize, reference: Option<PointKey>) -> FaceSide {
        let s = &self.nodes[id].simplex;
        let [mut a, mut b] = s.edge_vertices(l);
        if let Some(first) = reference {
            if self.topology.point_key(s.macro_id, a) != first {
                std::mem::swap(&mut a, &mut b);
            }
        }
        FaceSide {
            element: ElementId(id),
            local_edge: l,
            start: a.to_f64(),
            end: b.to_f64(),
        }
    }

    fn local_edge_of(&self, id: usize, key: &EdgeKey) -> usize {
        (0..3)
            .find(|&l| &self.local_edge_key(id, l) == key)
            .expect("neighbor shares the edge")
    }

    /// One entry per local edge of a leaf, with the neighbor (possibly in another patch).
    pub fn face_neighbors(&self, id: ElementId) -> Result<[FaceNeighbor; 3]> {
        self.check_leaf(id)?;
        let mut out = [FaceNeighbor {
            side: self.face_side(id.0, 0, None),
            neighbor: Neighbor::Boundary,
        }; 3];
        for (l, slot) in out.iter_mut().enumerate() {
            let side = self.face_side(id.0, l, None);
            let key = self.local_edge_key(id.0, l);
            let other = self.edges.get(&key).and_then(|s| s.other(id.0));
            let neighbor = match other {
                Some(nb) => {
                    let s = self.element(id);
                    let first = self.topology.point_key(s.macro_id, s.edge_vertices(l)[0]);
                    let nl = self.local_edge_of(nb, &key);
                    Neighbor::Interior(self.face_side(nb, nl, Some(first)))
                }
                None if self.is_boundary_edge(id, l) => Neighbor::Boundary,
                None => {
                    return Err(Error::InvalidTopology(format!(
                        "hanging face on element {} edge {l}",
                        id.0
                    )))
                }
            };
            *slot = FaceNeighbor { side, neighbor };
        }
        Ok(out)
    }

    /// All interior faces, each once, with the lower element id as the `plus` side.
    pub fn interior_faces(&self) -> Vec<InteriorFace> {
        let mut faces = Vec::new();
        for &id in &self.leaves {
            for l in 0..3 {
                let key = self.local_edge_key(id.0, l);
                let Some(nb) = self.edges.get(&key).and_then(|s| s.other(id.0)) else {
                    continue;
                };
                if nb < id.0 {
                    continue;
                }
                let plus = self.face_side(id.0, l, None);
                let s = self.element(id);
                let first = self.topology.point_key(s.macro_id, s.edge_vertices(l)[0]);
                let nl = self.local_edge_of(nb, &key);
                let minus = self.face_side(nb, nl, Some(first));
                faces.push(InteriorFace { plus, minus });
            }
        }
        faces
    }

    /// Audits the leaf mesh: every leaf edge must be shared by exactly two
    /// leaves or lie on the macro boundary, and each patch must be tiled
    /// exactly.
    pub fn check_conformity(&self) -> ConformityReport {
        let mut report = ConformityReport::default();
        for &id in &self.leaves {
            for l in 0..3 {
                let key = self.local_edge_key(id.0, l);
                let count = self.edges.get(&key).map_or(0, EdgeSlots::count);
                match count {
                    2 => report.interior_faces += 1,
                    1 if self.is_boundary_edge(id, l) => report.boundary_faces += 1,
                    _ => report.hanging_faces += 1,
                }
            }
        }
        report.interior_faces /= 2;
        let full = (DYADIC_ONE as i128) * (DYADIC_ONE as i128);
        let mut area = vec![0i128; self.topology.num_elements()];
        for &id in &self.leaves {
            let s = self.element(id);
            area[s.macro_id] += twice_signed_area(s.vertices[0], s.vertices[1], s.vertices[2]);
        }
        report.area_defects = area.iter().filter(|&&a| a != full).count();
        report
    }

    /// Measured constant in `#T_k - #T_0 <= C Σ_j #M_j`.
    pub fn complexity_ratio(&self) -> Option<f64> {
        let marked = self.counters.total_marked();
        (marked > 0)
            .then(|| (self.num_elements() - self.counters.initial_elements) as f64 / marked as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConformingMesh {
        ConformingMesh::new(Arc::new(MacroTopology::unit_square())).unwrap()
    }

    #[test]
    fn bisection_children_halve_area() {
        let mut mesh = square();
        let first = mesh.leaves()[0];
        let h = mesh.element(first).mesh_size();
        mesh.refine(&[first], 2).unwrap();
        for &leaf in mesh.leaves() {
            let s = mesh.element(leaf);
            if s.macro_id == 0 {
                assert_eq!(s.generation, 2);
                assert_eq!(s.mesh_size(), h / 2.0);
            }
        }
    }

    #[test]
    fn stale_id_is_rejected() {
        let mut mesh = square();
        let first = mesh.leaves()[0];
        mesh.refine(&[first], 1).unwrap();
        assert!(matches!(
            mesh.refine(&[first], 1),
            Err(Error::UnknownElement(0))
        ));
    }

    #[test]
    fn empty_mark_is_a_no_op() {
        let mut mesh = square();
        let stats = mesh.refine(&[], 1).unwrap();
        assert_eq!(stats.bisections, 0);
        assert_eq!(mesh.num_elements(), 2);
    }

    #[test]
    fn from_leaves_round_trip() {
        let mut mesh = square();
        mesh.refine_uniform(3).unwrap();
        let leaves: Vec<_> = mesh.leaves().iter().map(|&id| *mesh.element(id)).collect();
        let rebuilt = ConformingMesh::from_leaves(mesh.topology_arc().clone(), leaves).unwrap();
        assert_eq!(rebuilt.num_elements(), mesh.num_elements());
        assert!(rebuilt.check_conformity().is_conforming());
    }
}
