use std::collections::HashMap;

use crate::geometry::basis::{LagrangeBasis, LocalNode};
use crate::geometry::frame::AffineMap;
use crate::mesh::{ConformingMesh, PointKey, EDGE_CORNERS};

/// How the space `V(T)` is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `V = 0` on the boundary.
    Dirichlet,
    /// `∫_Γ V = 0` on a closed surface.
    ZeroMean,
}

impl Constraint {
    pub fn for_mesh(mesh: &ConformingMesh) -> Self {
        if mesh.topology().is_closed() {
            Constraint::ZeroMean
        } else {
            Constraint::Dirichlet
        }
    }
}

/// Global identity of a Lagrange node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Vertex(PointKey),
    /// Node `k` of `n - 1` on the edge between two points, counted from the smaller key.
    Edge(PointKey, PointKey, u8),
    Cell(usize, u8),
}

/// Continuous global numbering of the degree-`n` Lagrange nodes.
#[derive(Debug, Clone)]
pub struct DofMap {
    degree: usize,
    local: usize,
    n_dofs: usize,
    element_dofs: Vec<usize>,
    dirichlet: Vec<bool>,
    /// First `(leaf index, local node)` at which each dof was seen.
    owners: Vec<(usize, usize)>,
    constraint: Constraint,
}

impl DofMap {
    pub fn new(mesh: &ConformingMesh, basis: &LagrangeBasis, constraint: Constraint) -> Self {
        let n = basis.degree();
        let local = basis.len();
        let topo = mesh.topology();
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let mut element_dofs = Vec::with_capacity(mesh.num_elements() * local);
        let mut dirichlet = Vec::new();
        let mut owners = Vec::new();
        for (leaf, &id) in mesh.leaves().iter().enumerate() {
            let s = mesh.element(id);
            for (i, kind) in basis.node_kinds().iter().enumerate() {
                let (key, boundary) = match *kind {
                    LocalNode::Vertex(c) => {
                        let k = topo.point_key(s.macro_id, s.vertices[c]);
                        (NodeKey::Vertex(k), topo.is_boundary_point(&k))
                    }
                    LocalNode::Edge { edge, k } => {
                        let [a, b] = EDGE_CORNERS[edge];
                        let ka = topo.point_key(s.macro_id, s.vertices[a]);
                        let kb = topo.point_key(s.macro_id, s.vertices[b]);
                        let key = if ka < kb {
                            NodeKey::Edge(ka, kb, k as u8)
                        } else {
                            NodeKey::Edge(kb, ka, (n - k) as u8)
                        };
                        (key, mesh.is_boundary_edge(id, edge))
                    }
                    LocalNode::Interior(j) => (NodeKey::Cell(id.0, j as u8), false),
                };
                let next = owners.len();
                let dof = *index.entry(key).or_insert(next);
                if dof == next {
                    owners.push((leaf, i));
                    dirichlet.push(boundary && constraint == Constraint::Dirichlet);
                }
                element_dofs.push(dof);
            }
        }
        DofMap {
            degree: n,
            local,
            n_dofs: owners.len(),
            element_dofs,
            dirichlet,
            owners,
            constraint,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn local_len(&self) -> usize {
        self.local
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    /// Global dofs of the leaf at position `leaf`, in local node order.
    pub fn element(&self, leaf: usize) -> &[usize] {
        &self.element_dofs[leaf * self.local..(leaf + 1) * self.local]
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn owner(&self, dof: usize) -> (usize, usize) {
        self.owners[dof]
    }

    /// Parametric location of a dof in the patch of its owning leaf.
    pub fn location(
        &self,
        mesh: &ConformingMesh,
        basis: &LagrangeBasis,
        dof: usize,
    ) -> (usize, [f64; 2]) {
        let (leaf, i) = self.owners[dof];
        let s = mesh.element(mesh.leaves()[leaf]);
        (s.macro_id, AffineMap::from_simplex(s).map(basis.nodes()[i]))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::MacroTopology;

    fn dofs(topo: MacroTopology, n: usize, uniform: u32) -> DofMap {
        let mut mesh = ConformingMesh::new(Arc::new(topo)).unwrap();
        if uniform > 0 {
            mesh.refine_uniform(uniform).unwrap();
        }
        let basis = LagrangeBasis::new(n).unwrap();
        DofMap::new(&mesh, &basis, Constraint::for_mesh(&mesh))
    }

    #[test]
    fn single_triangle_p1_is_all_dirichlet() {
        let d = dofs(MacroTopology::reference_triangle(), 1, 0);
        assert_eq!(d.n_dofs(), 3);
        assert!(d.dirichlet_mask().iter().all(|&b| b));
    }

    #[test]
    fn square_shares_the_diagonal() {
        let d = dofs(MacroTopology::unit_square(), 1, 0);
        assert_eq!(d.n_dofs(), 4);
    }

    #[test]
    fn refined_octahedron_p2_counts_vertices_and_edges() {
        // 16 triangles: E = 3F/2 = 24, V = 2 - F + E = 10.
        let d = dofs(MacroTopology::octahedron(), 2, 1);
        assert_eq!(d.n_dofs(), 34);
        assert_eq!(d.constraint(), Constraint::ZeroMean);
        assert!(d.dirichlet_mask().iter().all(|&b| !b));
    }

    #[test]
    fn cubic_edge_nodes_are_shared_across_patches() {
        // Octahedron, n = 3: V + 2E + F = 6 + 24 + 8.
        let d = dofs(MacroTopology::octahedron(), 3, 0);
        assert_eq!(d.n_dofs(), 38);
    }
}
