//! Face enumeration for plane connected graphs via rotation systems.

use thiserror::Error;

use super::{connected_components, is_plane, EmbeddedGraph};
use crate::geometry::cross;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaceError {
    #[error("graph embedding is not plane")]
    NotPlane,
    #[error("graph is not connected")]
    NotConnected,
}

/// One directed edge of the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dart {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
}

/// The faces of a plane connected graph. Every directed edge appears in
/// exactly one face walk; bounded faces have positive signed area, the outer
/// face non-positive.
#[derive(Debug, Clone)]
pub struct FaceSet {
    pub faces: Vec<Vec<Dart>>,
    pub outer_face_index: usize,
    /// For every edge, the face of its canonical dart and of its reverse.
    pub edge_faces: Vec<[usize; 2]>,
}

impl FaceSet {
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn bounded_faces(&self) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| f != self.outer_face_index)
            .collect()
    }

    /// Vertices on the boundary walk of face `f`, deduplicated, sorted.
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.faces[f].iter().map(|d| d.from).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Edge indices on the boundary walk of face `f`, deduplicated, sorted.
    pub fn face_edges(&self, f: usize) -> Vec<usize> {
        let mut es: Vec<usize> = self.faces[f].iter().map(|d| d.edge).collect();
        es.sort_unstable();
        es.dedup();
        es
    }

    /// Boundary of `f` as a vertex cycle (first vertex not repeated at the
    /// end). Meaningful when the walk is a simple cycle, which holds for
    /// faces of 2-connected graphs.
    pub fn face_cycle(&self, f: usize) -> Vec<usize> {
        self.faces[f].iter().map(|d| d.from).collect()
    }
}

/// Traces the faces of a plane connected graph.
///
/// The rotation system sorts incident edges counterclockwise around each
/// vertex (ties between collinear edges broken by neighbor id); the next
/// dart after arriving at `v` is the clockwise-next one after the reversal,
/// which makes every bounded face a counterclockwise walk. The outer face is
/// the unique walk with non-positive total signed area.
pub fn faces(g: &EmbeddedGraph) -> Result<FaceSet, FaceError> {
    if g.vertex_count() == 0 || connected_components(g).len() != 1 {
        return Err(FaceError::NotConnected);
    }
    if !is_plane(g) {
        return Err(FaceError::NotPlane);
    }

    // rotation[v] = neighbors of v in ccw angular order
    let mut rotation: Vec<Vec<(usize, usize)>> = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() {
        let p = g.pos(v);
        let mut inc: Vec<(usize, usize)> = g.neighbors(v).to_vec();
        inc.sort_by(|&(a, _), &(b, _)| {
            let pa = g.pos(a);
            let pb = g.pos(b);
            let ang_a = (pa.y - p.y).atan2(pa.x - p.x);
            let ang_b = (pb.y - p.y).atan2(pb.x - p.x);
            ang_a
                .partial_cmp(&ang_b)
                .unwrap()
                .then_with(|| g.id(a).cmp(&g.id(b)))
        });
        rotation.push(inc);
    }
    let pos_in_rotation = |v: usize, nbr: usize| -> usize {
        rotation[v].iter().position(|&(w, _)| w == nbr).unwrap()
    };

    // dart id: 2*edge + (0 if canonical direction, 1 if reversed)
    let dart_count = 2 * g.edge_count();
    let dart_of = |from: usize, edge: usize| -> usize {
        let [u, _] = g.edge(edge);
        if from == u {
            2 * edge
        } else {
            2 * edge + 1
        }
    };
    let mut visited = vec![false; dart_count];
    let mut face_of_dart = vec![usize::MAX; dart_count];
    let mut out: Vec<Vec<Dart>> = Vec::new();

    for e in 0..g.edge_count() {
        for dir in 0..2 {
            let start = 2 * e + dir;
            if visited[start] {
                continue;
            }
            let face_idx = out.len();
            let mut walk = Vec::new();
            let [u, v] = g.edge(e);
            let (mut from, mut to) = if dir == 0 { (u, v) } else { (v, u) };
            let mut edge = e;
            loop {
                let d = dart_of(from, edge);
                if visited[d] {
                    break;
                }
                visited[d] = true;
                face_of_dart[d] = face_idx;
                walk.push(Dart { from, to, edge });
                // Next dart: clockwise-next after the reversal at `to`.
                let k = pos_in_rotation(to, from);
                let len = rotation[to].len();
                let (w, next_edge) = rotation[to][(k + len - 1) % len];
                from = to;
                to = w;
                edge = next_edge;
            }
            out.push(walk);
        }
    }

    // Outer face: non-positive signed area (walks over bridges cancel).
    let mut outer = 0;
    let mut min_area = f64::INFINITY;
    for (i, walk) in out.iter().enumerate() {
        let mut area = 0.0;
        for d in walk {
            let p = g.pos(d.from);
            let q = g.pos(d.to);
            area += cross(p.x, p.y, q.x, q.y);
        }
        if area < min_area {
            min_area = area;
            outer = i;
        }
    }

    let edge_faces = (0..g.edge_count())
        .map(|e| [face_of_dart[2 * e], face_of_dart[2 * e + 1]])
        .collect();

    Ok(FaceSet {
        faces: out,
        outer_face_index: outer,
        edge_faces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn graph(vertices: &[(u64, f64, f64)], edges: &[(u64, u64)]) -> EmbeddedGraph {
        EmbeddedGraph::new(
            vertices
                .iter()
                .map(|&(id, x, y)| (id, Point2::new(x, y)))
                .collect(),
            edges.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn square_has_two_faces() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 1.0), (3, 0.0, 1.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        );
        let fs = faces(&g).unwrap();
        assert_eq!(fs.face_count(), 2);
        assert_eq!(fs.bounded_faces().len(), 1);
        assert_eq!(fs.face_cycle(fs.bounded_faces()[0]).len(), 4);
    }

    #[test]
    fn theta_graph_has_three_faces() {
        // square with one chord
        let g = graph(
            &[(0, 0.0, 0.0), (1, 2.0, 0.0), (2, 2.0, 2.0), (3, 0.0, 2.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
        );
        let fs = faces(&g).unwrap();
        assert_eq!(fs.face_count(), 3);
    }

    #[test]
    fn tree_has_one_face() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 1.0)],
            &[(0, 1), (1, 2)],
        );
        let fs = faces(&g).unwrap();
        assert_eq!(fs.face_count(), 1);
        assert_eq!(fs.outer_face_index, 0);
    }

    #[test]
    fn euler_formula_on_grid() {
        // 2x2 grid of unit squares: 9 vertices, 12 edges, 4+1 faces.
        let mut verts = Vec::new();
        for y in 0..3u64 {
            for x in 0..3u64 {
                verts.push((y * 3 + x, x as f64, y as f64));
            }
        }
        let mut edges = Vec::new();
        for y in 0..3u64 {
            for x in 0..3u64 {
                let v = y * 3 + x;
                if x < 2 {
                    edges.push((v, v + 1));
                }
                if y < 2 {
                    edges.push((v, v + 3));
                }
            }
        }
        let g = graph(&verts, &edges);
        let fs = faces(&g).unwrap();
        assert_eq!(
            fs.face_count(),
            g.edge_count() - g.vertex_count() + 2,
            "Euler: f = m - n + 2"
        );
        assert_eq!(fs.bounded_faces().len(), 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let crossing = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 1.0), (2, 0.0, 1.0), (3, 1.0, 0.0)],
            &[(0, 1), (2, 3), (1, 2)],
        );
        assert!(matches!(faces(&crossing), Err(FaceError::NotPlane)));

        let disconnected = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 5.0, 0.0), (3, 6.0, 0.0)],
            &[(0, 1), (2, 3)],
        );
        assert!(matches!(faces(&disconnected), Err(FaceError::NotConnected)));
    }
}
