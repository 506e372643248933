//! Macro topology: the flat polyhedral surface whose faces carry the charts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::mesh::dyadic::{DyadicPoint, DYADIC_ONE};

/// Corners of the reference triangle spanned by local edge `i` (edge `i` is opposite corner `i`).
pub const EDGE_CORNERS: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

/// Cap on backtracking steps of the labeling search.
const LABELING_STEP_LIMIT: usize = 1_000_000;

/// A macro edge shared by two macro elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceIdentification {
    /// Global vertex ids, sorted.
    pub edge: (usize, usize),
    /// `(macro element, local edge)` for both sides.
    pub sides: [(usize, usize); 2],
    /// Whether the two sides traverse the edge in the same local corner order.
    pub same_direction: bool,
}

/// Canonical identity of a parametric point, independent of the patch it is seen from.
///
/// Points on a macro edge are keyed by the edge's global vertex ids and the
/// dyadic parameter measured from the smaller id; macro vertices by their
/// global id. Interior points stay patch-local.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKey {
    Vertex(u32),
    Edge { a: u32, b: u32, t: u64 },
    Interior { patch: u32, x: u64, y: u64 },
}

#[derive(Debug, Clone)]
pub struct MacroTopology {
    elements: Vec<[usize; 3]>,
    vertices: Vec<[f64; 3]>,
    face_identifications: Vec<FaceIdentification>,
    boundary_edges: BTreeSet<(usize, usize)>,
    boundary_vertices: BTreeSet<usize>,
    labels: Vec<[u8; 3]>,
    /// `(global edge) -> [(element, local edge)]`
    edge_table: BTreeMap<(usize, usize), Vec<(usize, usize)>>,
}

fn sorted(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MacroTopology {
    /// Builds the topology, verifying structure and either checking the
    /// supplied labels or searching for an admissible labeling.
    ///
    /// Labels are per element and per local edge (edge `i` opposite corner
    /// `i`); label `0` marks the refinement edge.
    pub fn new(
        vertices: Vec<[f64; 3]>,
        elements: Vec<[usize; 3]>,
        labels: Option<Vec<[u8; 3]>>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidTopology("no macro elements".into()));
        }
        let mut edge_table: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (e, tri) in elements.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::InvalidTopology(format!(
                        "element {e} references missing vertex {v}"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidTopology(format!(
                    "element {e} has repeated vertices"
                )));
            }
            for (local, [c0, c1]) in EDGE_CORNERS.iter().enumerate() {
                edge_table
                    .entry(sorted(tri[*c0], tri[*c1]))
                    .or_default()
                    .push((e, local));
            }
        }

        let mut face_identifications = Vec::new();
        let mut boundary_edges = BTreeSet::new();
        for (&edge, sides) in &edge_table {
            match sides.len() {
                1 => {
                    boundary_edges.insert(edge);
                }
                2 => {
                    let dir = |(e, l): (usize, usize)| {
                        let [c0, _] = EDGE_CORNERS[l];
                        elements[e][c0] == edge.0
                    };
                    face_identifications.push(FaceIdentification {
                        edge,
                        sides: [sides[0], sides[1]],
                        same_direction: dir(sides[0]) == dir(sides[1]),
                    });
                }
                k => return Err(Error::NonManifoldTopology(edge.0, edge.1, k)),
            }
        }
        let boundary_vertices = boundary_edges.iter().flat_map(|&(a, b)| [a, b]).collect();

        let mut topo = MacroTopology {
            elements,
            vertices,
            face_identifications,
            boundary_edges,
            boundary_vertices,
            labels: Vec::new(),
            edge_table,
        };
        topo.labels = match labels {
            Some(labels) => {
                topo.check_labels(&labels)?;
                labels
            }
            None => {
                let labels = topo.search_labeling()?;
                topo.check_labels(&labels)?;
                labels
            }
        };
        Ok(topo)
    }

    fn check_labels(&self, labels: &[[u8; 3]]) -> Result<()> {
        if labels.len() != self.elements.len() {
            return Err(Error::InadmissibleLabeling(format!(
                "{} label triples for {} elements",
                labels.len(),
                self.elements.len()
            )));
        }
        for (e, l) in labels.iter().enumerate() {
            let zeros = l.iter().filter(|&&x| x == 0).count();
            let ones = l.iter().filter(|&&x| x == 1).count();
            if zeros != 1 || ones != 2 {
                return Err(Error::InadmissibleLabeling(format!(
                    "element {e} must have exactly one edge labeled 0 and two labeled 1"
                )));
            }
        }
        for fi in &self.face_identifications {
            let [(e0, l0), (e1, l1)] = fi.sides;
            if labels[e0][l0] != labels[e1][l1] {
                return Err(Error::InadmissibleLabeling(format!(
                    "macro edge {:?} carries different labels on its two sides",
                    fi.edge
                )));
            }
        }
        Ok(())
    }

    fn edge_length(&self, e: usize, local: usize) -> f64 {
        let [c0, c1] = EDGE_CORNERS[local];
        let a = self.vertices[self.elements[e][c0]];
        let b = self.vertices[self.elements[e][c1]];
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Neighbor across local edge `local` of element `e`, with its local edge index.
    pub fn macro_neighbor(&self, e: usize, local: usize) -> Option<(usize, usize)> {
        let [c0, c1] = EDGE_CORNERS[local];
        let key = sorted(self.elements[e][c0], self.elements[e][c1]);
        self.edge_table[&key]
            .iter()
            .copied()
            .find(|&(other, _)| other != e)
    }

    /// Chooses one refinement edge per element so that every interior
    /// refinement edge is chosen from both sides. Elements are visited in
    /// breadth-first order over the dual graph; longer edges are tried first.
    fn search_labeling(&self) -> Result<Vec<[u8; 3]>> {
        let m = self.elements.len();
        let mut order = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(e) = queue.pop_front() {
                order.push(e);
                for l in 0..3 {
                    if let Some((nb, _)) = self.macro_neighbor(e, l) {
                        if !seen[nb] {
                            seen[nb] = true;
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
        let candidates: Vec<Vec<usize>> = (0..m)
            .map(|e| {
                let mut c = vec![0, 1, 2];
                c.sort_by(|&a, &b| {
                    self.edge_length(e, b)
                        .partial_cmp(&self.edge_length(e, a))
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                c
            })
            .collect();

        let mut choice: Vec<Option<usize>> = vec![None; m];
        let mut steps = 0usize;
        if !self.assign(&order, 0, &candidates, &mut choice, &mut steps) {
            return Err(Error::InadmissibleLabeling(
                "no refinement-edge matching found for the macro triangulation".into(),
            ));
        }
        Ok(choice
            .into_iter()
            .map(|c| {
                let mut l = [1u8; 3];
                l[c.expect("all elements assigned")] = 0;
                l
            })
            .collect())
    }

    fn assign(
        &self,
        order: &[usize],
        pos: usize,
        candidates: &[Vec<usize>],
        choice: &mut [Option<usize>],
        steps: &mut usize,
    ) -> bool {
        let Some(offset) = order[pos..].iter().position(|&e| choice[e].is_none()) else {
            return true;
        };
        let pos = pos + offset;
        let e = order[pos];
        *steps += 1;
        if *steps > LABELING_STEP_LIMIT {
            return false;
        }
        for &l in &candidates[e] {
            match self.macro_neighbor(e, l) {
                None => {
                    choice[e] = Some(l);
                    if self.assign(order, pos + 1, candidates, choice, steps) {
                        return true;
                    }
                    choice[e] = None;
                }
                Some((nb, nl)) if choice[nb].is_none() => {
                    choice[e] = Some(l);
                    choice[nb] = Some(nl);
                    if self.assign(order, pos + 1, candidates, choice, steps) {
                        return true;
                    }
                    choice[e] = None;
                    choice[nb] = None;
                }
                Some(_) => {}
            }
        }
        false
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn labels(&self) -> &[[u8; 3]] {
        &self.labels
    }

    pub fn face_identifications(&self) -> &[FaceIdentification] {
        &self.face_identifications
    }

    pub fn boundary_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.boundary_edges
    }

    /// `true` when the macro surface has no boundary (zero-mean constraint case).
    pub fn is_closed(&self) -> bool {
        self.boundary_edges.is_empty()
    }

    /// Local index of the label-0 edge of element `e`.
    pub fn refinement_edge(&self, e: usize) -> usize {
        self.labels[e]
            .iter()
            .position(|&l| l == 0)
            .expect("labels verified at construction")
    }

    pub fn is_boundary_side(&self, patch: usize, side: usize) -> bool {
        let [c0, c1] = EDGE_CORNERS[side];
        let tri = self.elements[patch];
        self.boundary_edges.contains(&sorted(tri[c0], tri[c1]))
    }

    /// Canonical key of the parametric point `(x, y) / one` of `patch`.
    pub fn point_key_scaled(&self, patch: usize, x: u64, y: u64, one: u64) -> PointKey {
        let tri = self.elements[patch];
        let g = |c: usize| tri[c] as u32;
        let on_edge = |from: usize, to: usize, t: u64| {
            let (a, b) = (g(from), g(to));
            if a < b {
                PointKey::Edge { a, b, t }
            } else {
                PointKey::Edge {
                    a: b,
                    b: a,
                    t: one - t,
                }
            }
        };
        match (x, y) {
            (0, 0) => PointKey::Vertex(g(0)),
            (x, 0) if x == one => PointKey::Vertex(g(1)),
            (0, y) if y == one => PointKey::Vertex(g(2)),
            (x, 0) => on_edge(0, 1, x),
            (0, y) => on_edge(0, 2, y),
            (x, y) if x + y == one => on_edge(1, 2, y),
            (x, y) => PointKey::Interior {
                patch: patch as u32,
                x,
                y,
            },
        }
    }

    pub fn point_key(&self, patch: usize, p: DyadicPoint) -> PointKey {
        self.point_key_scaled(patch, p.x, p.y, DYADIC_ONE)
    }

    /// Whether a canonical point lies on the boundary of the macro surface.
    pub fn is_boundary_point(&self, key: &PointKey) -> bool {
        match *key {
            PointKey::Vertex(v) => self.boundary_vertices.contains(&(v as usize)),
            PointKey::Edge { a, b, .. } => self.boundary_edges.contains(&(a as usize, b as usize)),
            PointKey::Interior { .. } => false,
        }
    }

    /// Two unit-square triangles `(0,1,2)`, `(0,2,3)` sharing the diagonal.
    pub fn unit_square() -> Self {
        Self::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            vec![[0, 1, 2], [0, 2, 3]],
            None,
        )
        .expect("unit square topology is valid")
    }

    /// The reference triangle itself as a single macro element.
    pub fn reference_triangle() -> Self {
        Self::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
            None,
        )
        .expect("reference triangle topology is valid")
    }

    /// Regular octahedron with vertices `±e_i`, faces oriented outward.
    pub fn octahedron() -> Self {
        let vertices = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let mut elements = Vec::new();
        for sz in [1.0f64, -1.0] {
            for sy in [1.0f64, -1.0] {
                for sx in [1.0f64, -1.0] {
                    let a = if sx > 0.0 { 0 } else { 1 };
                    let b = if sy > 0.0 { 2 } else { 3 };
                    let c = if sz > 0.0 { 4 } else { 5 };
                    if sx * sy * sz > 0.0 {
                        elements.push([a, b, c]);
                    } else {
                        elements.push([a, c, b]);
                    }
                }
            }
        }
        Self::new(vertices, elements, None).expect("octahedron topology is valid")
    }

    /// L-shaped domain `(-1,1)^2 \ [0,1) x (-1,0]` made of three unit squares, six triangles.
    pub fn lshape() -> Self {
        let vertices = vec![
            [-1.0, -1.0, 0.0],
            [0.0, -1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [-1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        ];
        let elements = vec![
            [0, 1, 3],
            [0, 3, 2],
            [2, 3, 6],
            [2, 6, 5],
            [3, 4, 7],
            [3, 7, 6],
        ];
        Self::new(vertices, elements, None).expect("L-shape topology is valid")
    }

    /// Square `[-1,1]^2` split into four triangles around its center.
    pub fn square_pinwheel() -> Self {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, -1.0, 0.0],
            [1.0, 1.0, 0.0],
            [-1.0, 1.0, 0.0],
            [-1.0, -1.0, 0.0],
        ];
        let elements = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]];
        Self::new(vertices, elements, None).expect("pinwheel topology is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octahedron_is_closed_with_twelve_shared_edges() {
        let t = MacroTopology::octahedron();
        assert!(t.is_closed());
        assert_eq!(t.face_identifications().len(), 12);
    }

    #[test]
    fn square_labels_the_diagonal() {
        let t = MacroTopology::unit_square();
        for e in 0..2 {
            let l = t.refinement_edge(e);
            let [c0, c1] = EDGE_CORNERS[l];
            let mut edge = [t.elements()[e][c0], t.elements()[e][c1]];
            edge.sort();
            assert_eq!(edge, [0, 2]);
        }
    }

    #[test]
    fn three_triangles_on_one_edge_is_rejected() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let elements = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        let err = MacroTopology::new(vertices, elements, None).unwrap_err();
        assert!(matches!(err, Error::NonManifoldTopology(0, 1, 3)));
    }

    #[test]
    fn supplied_labels_must_agree_across_edges() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ];
        // Element 0 refines the diagonal (local edge 1), element 1 refines a boundary edge.
        let labels = vec![[1, 0, 1], [0, 1, 1]];
        let err =
            MacroTopology::new(vertices, vec![[0, 1, 2], [0, 2, 3]], Some(labels)).unwrap_err();
        assert!(matches!(err, Error::InadmissibleLabeling(_)));
    }

    #[test]
    fn point_keys_agree_across_patches() {
        let t = MacroTopology::unit_square();
        // The diagonal 0-2 is the side x = 0 of element [0,1,2] and y = 0 of [0,2,3].
        let half = DYADIC_ONE / 2;
        let k0 = t.point_key(0, DyadicPoint::new(0, half));
        let k1 = t.point_key(1, DyadicPoint::new(half, 0));
        assert_eq!(k0, k1);
    }
}
