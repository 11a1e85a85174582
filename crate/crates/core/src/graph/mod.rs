//! Embedded-graph model: validation, connectivity, planarity of the given
//! embedding, face enumeration and the decompositions used by the exact
//! deciders.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{segment_segment_distance, Point2, Segment, EPS_GEOM};

mod decompose;
mod faces;

pub use decompose::{
    biconnected_components, chord_decomposition, peel_tree_substructures, BlockDecomposition,
    DecompError, DecompNode, DecompositionTree, PeelResult,
};
pub use faces::{faces, FaceError, FaceSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex id {0}")]
    DuplicateId(u64),
    #[error("self loop at vertex {0}")]
    SelfLoop(u64),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(u64, u64),
    #[error("degenerate edge {{{0}, {1}}}: endpoint positions coincide")]
    DegenerateEdge(u64, u64),
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(u64),
    #[error("edge references unknown vertex id {0}")]
    UnknownVertex(u64),
}

/// A straight-line embedded graph. Immutable after validation; all queries
/// are read-only and safe to share across threads.
///
/// Vertices carry external `u64` ids (preserved by subgraph extraction) but
/// the whole crate works with dense indices internally. Edges are unordered
/// pairs stored with the lower vertex index first; this orientation is the
/// canonical one for points on edges.
#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    ids: Vec<u64>,
    pos: Vec<Point2>,
    edges: Vec<[usize; 2]>,
    adj: Vec<Vec<(usize, usize)>>,
    id_to_index: HashMap<u64, usize>,
}

impl EmbeddedGraph {
    /// Validates raw graph data and computes the adjacency structure.
    pub fn new(
        vertices: Vec<(u64, Point2)>,
        edge_ids: Vec<(u64, u64)>,
    ) -> Result<EmbeddedGraph, GraphError> {
        let mut id_to_index = HashMap::with_capacity(vertices.len());
        let mut ids = Vec::with_capacity(vertices.len());
        let mut pos = Vec::with_capacity(vertices.len());
        for (id, p) in vertices {
            if !p.is_finite() {
                return Err(GraphError::NonFinite(id));
            }
            if id_to_index.insert(id, ids.len()).is_some() {
                return Err(GraphError::DuplicateId(id));
            }
            ids.push(id);
            pos.push(p);
        }
        let mut edges = Vec::with_capacity(edge_ids.len());
        let mut seen = HashMap::new();
        for (a, b) in edge_ids {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let ia = *id_to_index.get(&a).ok_or(GraphError::UnknownVertex(a))?;
            let ib = *id_to_index.get(&b).ok_or(GraphError::UnknownVertex(b))?;
            let key = (ia.min(ib), ia.max(ib));
            if seen.insert(key, true).is_some() {
                return Err(GraphError::DuplicateEdge(a, b));
            }
            if pos[ia].dist(pos[ib]) <= EPS_GEOM {
                return Err(GraphError::DegenerateEdge(a, b));
            }
            edges.push([key.0, key.1]);
        }
        let mut adj = vec![Vec::new(); ids.len()];
        for (ei, &[u, v]) in edges.iter().enumerate() {
            adj[u].push((v, ei));
            adj[v].push((u, ei));
        }
        Ok(EmbeddedGraph {
            ids,
            pos,
            edges,
            adj,
            id_to_index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn pos(&self, v: usize) -> Point2 {
        self.pos[v]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.id_to_index.get(&id).copied()
    }

    /// Endpoints of edge `e`, lower vertex index first.
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Edge `e` as a segment in its canonical orientation.
    pub fn edge_segment(&self, e: usize) -> Segment {
        let [u, v] = self.edges[e];
        Segment::new(self.pos[u], self.pos[v])
    }

    /// Neighbors of `v` as `(neighbor, edge index)` pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
    }

    /// Looks an edge up by external vertex ids.
    pub fn edge_by_ids(&self, a: u64, b: u64) -> Option<usize> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        self.edge_between(ia, ib)
    }

    /// Induced subgraph on `keep` (vertex indices), preserving external ids.
    /// Returns the subgraph plus the map from new to old vertex indices.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (EmbeddedGraph, Vec<usize>) {
        let mut old_of_new = keep.to_vec();
        old_of_new.sort_unstable();
        old_of_new.dedup();
        let mut new_of_old = HashMap::new();
        for (ni, &oi) in old_of_new.iter().enumerate() {
            new_of_old.insert(oi, ni);
        }
        let vertices: Vec<(u64, Point2)> = old_of_new
            .iter()
            .map(|&oi| (self.ids[oi], self.pos[oi]))
            .collect();
        let mut edge_ids = Vec::new();
        for &[u, v] in &self.edges {
            if new_of_old.contains_key(&u) && new_of_old.contains_key(&v) {
                edge_ids.push((self.ids[u], self.ids[v]));
            }
        }
        let g = EmbeddedGraph::new(vertices, edge_ids).expect("subgraph of valid graph is valid");
        (g, old_of_new)
    }

    /// Subgraph given by explicit vertex and edge index sets.
    pub fn subgraph_of_edges(&self, edge_idxs: &[usize], extra_vertices: &[usize]) -> EmbeddedGraph {
        let mut verts: Vec<usize> = extra_vertices.to_vec();
        for &e in edge_idxs {
            verts.extend_from_slice(&self.edges[e]);
        }
        verts.sort_unstable();
        verts.dedup();
        let vertices: Vec<(u64, Point2)> = verts
            .iter()
            .map(|&v| (self.ids[v], self.pos[v]))
            .collect();
        let edge_ids: Vec<(u64, u64)> = edge_idxs
            .iter()
            .map(|&e| {
                let [u, v] = self.edges[e];
                (self.ids[u], self.ids[v])
            })
            .collect();
        EmbeddedGraph::new(vertices, edge_ids).expect("subgraph of valid graph is valid")
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count() > 0
            && self.edge_count() + 1 == self.vertex_count()
            && connected_components(self).len() == 1
    }

    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        if self.pos.is_empty() {
            return None;
        }
        let mut min = self.pos[0];
        let mut max = self.pos[0];
        for p in &self.pos {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some((min, max))
    }
}

/// Partition of the vertex indices by connectivity, each component sorted.
/// Invariant under vertex/edge list permutation up to component order; the
/// result is sorted by smallest contained index.
pub fn connected_components(g: &EmbeddedGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let c = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        comp[start] = c;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &(w, _) in g.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// True iff no two edges of the embedding intersect except at shared
/// endpoints. Pairwise segment tests with the crate tolerance, `O(m^2)`.
pub fn is_plane(g: &EmbeddedGraph) -> bool {
    let m = g.edge_count();
    for i in 0..m {
        let [a1, b1] = g.edge(i);
        let s1 = g.edge_segment(i);
        for j in (i + 1)..m {
            let [a2, b2] = g.edge(j);
            let shared = [a1, b1]
                .iter()
                .find(|v| [a2, b2].contains(v))
                .copied();
            match shared {
                Some(v) => {
                    // Segments sharing an endpoint overlap beyond it iff they
                    // leave the shared vertex in the same direction.
                    let p = g.pos(v);
                    let q1 = g.pos(if a1 == v { b1 } else { a1 });
                    let q2 = g.pos(if a2 == v { b2 } else { a2 });
                    let (d1x, d1y) = (q1.x - p.x, q1.y - p.y);
                    let (d2x, d2y) = (q2.x - p.x, q2.y - p.y);
                    let cr = crate::geometry::cross(d1x, d1y, d2x, d2y);
                    let dt = crate::geometry::dot(d1x, d1y, d2x, d2y);
                    let scale = p.dist(q1) * p.dist(q2);
                    if cr.abs() <= EPS_GEOM * scale.max(1.0) && dt > 0.0 {
                        return false;
                    }
                }
                None => {
                    let s2 = g.edge_segment(j);
                    if segment_segment_distance(s1, s2).0 <= EPS_GEOM {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    pub(crate) fn graph(
        vertices: &[(u64, f64, f64)],
        edges: &[(u64, u64)],
    ) -> EmbeddedGraph {
        EmbeddedGraph::new(
            vertices.iter().map(|&(id, x, y)| (id, pt(x, y))).collect(),
            edges.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn validate_single_edge() {
        let g = graph(&[(0, 0.0, 0.0), (1, 1.0, 0.0)], &[(0, 1)]);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn validate_rejects_degenerate_edge() {
        let r = EmbeddedGraph::new(
            vec![(0, pt(0.0, 0.0)), (1, pt(0.0, 0.0))],
            vec![(0, 1)],
        );
        assert!(matches!(r, Err(GraphError::DegenerateEdge(0, 1))));
    }

    #[test]
    fn validate_rejects_duplicate_id() {
        let r = EmbeddedGraph::new(vec![(7, pt(0.0, 0.0)), (7, pt(1.0, 0.0))], vec![]);
        assert!(matches!(r, Err(GraphError::DuplicateId(7))));
    }

    #[test]
    fn validate_rejects_self_loop_and_duplicates() {
        let verts = vec![(0, pt(0.0, 0.0)), (1, pt(1.0, 0.0))];
        assert!(matches!(
            EmbeddedGraph::new(verts.clone(), vec![(0, 0)]),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            EmbeddedGraph::new(verts, vec![(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(1, 0))
        ));
    }

    #[test]
    fn components_cases() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 5.0, 0.0), (3, 6.0, 0.0)],
            &[(0, 1), (2, 3)],
        );
        assert_eq!(connected_components(&g).len(), 2);

        let path = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.0), (3, 3.0, 0.0)],
            &[(0, 1), (1, 2), (2, 3)],
        );
        assert_eq!(connected_components(&path).len(), 1);

        let empty = EmbeddedGraph::new(vec![], vec![]).unwrap();
        assert_eq!(connected_components(&empty).len(), 0);
    }

    #[test]
    fn is_plane_cases() {
        let square = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 1.0), (3, 0.0, 1.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        );
        assert!(is_plane(&square));

        let crossing = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 1.0), (2, 0.0, 1.0), (3, 1.0, 0.0)],
            &[(0, 1), (2, 3)],
        );
        assert!(!is_plane(&crossing));

        // K4 with all vertices on a circle: the two diagonals cross.
        let k4 = graph(
            &[
                (0, 0.0, 0.0),
                (1, 2.0, 0.0),
                (2, 2.0, 2.0),
                (3, 0.0, 2.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)],
        );
        assert!(!is_plane(&k4));

        // K4 embedded with one vertex inside the triangle is plane.
        let k4_plane = graph(
            &[
                (0, 0.0, 0.0),
                (1, 4.0, 0.0),
                (2, 2.0, 3.0),
                (3, 2.0, 1.0),
            ],
            &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)],
        );
        assert!(is_plane(&k4_plane));
    }

    #[test]
    fn is_plane_rejects_collinear_overlap() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 2.0, 0.0), (2, 1.0, 0.0)],
            &[(0, 1), (0, 2)],
        );
        assert!(!is_plane(&g));
    }
}
