//! Structural decompositions of `G1`: pendant-tree peeling, biconnected
//! blocks, and the recursive chord decomposition of plane cores that drives
//! the exponential-time exact decider.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{faces, EmbeddedGraph, FaceError, FaceSet};

/// Result of iteratively removing degree-1 vertices.
#[derive(Debug, Clone)]
pub struct PeelResult {
    /// The remainder (minimum degree >= 2 or a single isolated vertex per
    /// tree component). Vertex ids are preserved.
    pub core: EmbeddedGraph,
    /// Removed pendant forests, one per attachment root: `(root id, tree)`.
    /// The root is retained in both the core and its tree.
    pub trees: Vec<(u64, EmbeddedGraph)>,
}

/// Iteratively removes degree-1 vertices; the removed forests are grouped by
/// the core vertex they hang off.
pub fn peel_tree_substructures(g: &EmbeddedGraph) -> PeelResult {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed_vertex = vec![false; n];
    let mut removed_edge = vec![false; g.edge_count()];
    let mut queue: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = queue.pop() {
        if removed_vertex[v] || degree[v] != 1 {
            continue;
        }
        removed_vertex[v] = true;
        for &(w, e) in g.neighbors(v) {
            if removed_edge[e] || removed_vertex[w] {
                continue;
            }
            removed_edge[e] = true;
            degree[v] -= 1;
            degree[w] -= 1;
            if degree[w] == 1 {
                queue.push(w);
            }
        }
    }

    let core_vertices: Vec<usize> = (0..n).filter(|&v| !removed_vertex[v]).collect();
    let core_edges: Vec<usize> = (0..g.edge_count()).filter(|&e| !removed_edge[e]).collect();
    let core = g.subgraph_of_edges(&core_edges, &core_vertices);

    // Group removed edges into pendant trees by union-find over endpoints.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in 0..g.edge_count() {
        if removed_edge[e] {
            let [u, v] = g.edge(e);
            let ru = find(&mut parent, u);
            let rv = find(&mut parent, v);
            if ru != rv {
                parent[ru] = rv;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in 0..g.edge_count() {
        if removed_edge[e] {
            let root = find(&mut parent, g.edge(e)[0]);
            groups.entry(root).or_default().push(e);
        }
    }
    let mut trees: Vec<(u64, EmbeddedGraph)> = Vec::new();
    let mut keys: Vec<usize> = groups.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let edges = &groups[&key];
        let tree = g.subgraph_of_edges(edges, &[]);
        // The attachment root is the unique non-removed endpoint in the
        // component; for a pure tree input it is the single vertex the
        // peeling left behind.
        let mut root = None;
        for e in edges {
            for &v in &g.edge(*e) {
                if !removed_vertex[v] {
                    root = Some(v);
                }
            }
        }
        let root = root.expect("pendant component touches the core");
        trees.push((g.id(root), tree));
    }
    PeelResult { core, trees }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompError {
    #[error("graph embedding is not plane")]
    NotPlane,
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph has a vertex of degree <= 1")]
    HasDegreeOne,
}

impl From<FaceError> for DecompError {
    fn from(e: FaceError) -> Self {
        match e {
            FaceError::NotPlane => DecompError::NotPlane,
            FaceError::NotConnected => DecompError::NotConnected,
        }
    }
}

/// Node of the chord decomposition: a set of bounded faces plus, for inner
/// nodes, the chord (shared vertex path) along which the region was split.
#[derive(Debug, Clone)]
pub enum DecompNode {
    /// A chordless cycle: one bounded face and its boundary cycle.
    Leaf { face: usize, cycle: Vec<usize> },
    Inner {
        /// Vertex indices of the splitting chord. A path when the separator
        /// is clean (the usual case), a single vertex at cut vertices, and
        /// possibly an unordered set for degenerate splits.
        chord: Vec<usize>,
        faces: Vec<usize>,
        left: Box<DecompNode>,
        right: Box<DecompNode>,
    },
}

impl DecompNode {
    pub fn leaf_count(&self) -> usize {
        match self {
            DecompNode::Leaf { .. } => 1,
            DecompNode::Inner { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn inner_count(&self) -> usize {
        match self {
            DecompNode::Leaf { .. } => 0,
            DecompNode::Inner { left, right, .. } => 1 + left.inner_count() + right.inner_count(),
        }
    }

    pub fn faces(&self) -> Vec<usize> {
        match self {
            DecompNode::Leaf { face, .. } => vec![*face],
            DecompNode::Inner { faces, .. } => faces.clone(),
        }
    }
}

/// Binary decomposition of a plane core into chordless cycles.
#[derive(Debug, Clone)]
pub struct DecompositionTree {
    pub root: DecompNode,
    pub face_set: FaceSet,
}

/// Recursively splits the bounded region of `core` by chords, preferring the
/// chord that most evenly divides the face count (ties by smallest
/// lexicographic vertex-id sequence). Leaves are chordless cycles.
pub fn chord_decomposition(core: &EmbeddedGraph) -> Result<DecompositionTree, DecompError> {
    if (0..core.vertex_count()).any(|v| core.degree(v) <= 1) {
        return Err(DecompError::HasDegreeOne);
    }
    let fs = faces(core)?;
    let bounded = fs.bounded_faces();
    let face_vertices: Vec<Vec<usize>> = (0..fs.face_count())
        .map(|f| fs.face_vertices(f))
        .collect();
    let root = split_region(core, &fs, &face_vertices, &bounded);
    Ok(DecompositionTree {
        root,
        face_set: fs,
    })
}

fn split_region(
    g: &EmbeddedGraph,
    fs: &FaceSet,
    face_vertices: &[Vec<usize>],
    region: &[usize],
) -> DecompNode {
    if region.len() == 1 {
        return DecompNode::Leaf {
            face: region[0],
            cycle: fs.face_cycle(region[0]),
        };
    }

    let k = region.len();
    let best = if k <= 16 {
        best_split_exhaustive(g, fs, face_vertices, region)
    } else {
        best_split_greedy(fs, region)
    };
    let (side_a, side_b, chord) = best;
    let left = split_region(g, fs, face_vertices, &side_a);
    let right = split_region(g, fs, face_vertices, &side_b);
    DecompNode::Inner {
        chord,
        faces: region.to_vec(),
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Shared vertices of two face-set subgraphs.
fn shared_vertices(face_vertices: &[Vec<usize>], a: &[usize], b: &[usize]) -> Vec<usize> {
    let va: HashSet<usize> = a.iter().flat_map(|&f| face_vertices[f].iter().copied()).collect();
    let vb: HashSet<usize> = b.iter().flat_map(|&f| face_vertices[f].iter().copied()).collect();
    let mut out: Vec<usize> = va.intersection(&vb).copied().collect();
    out.sort_unstable();
    out
}

/// Edges with one incident bounded face on each side of the split.
fn crossing_edges(fs: &FaceSet, a: &[usize], b: &[usize]) -> Vec<usize> {
    let sa: HashSet<usize> = a.iter().copied().collect();
    let sb: HashSet<usize> = b.iter().copied().collect();
    (0..fs.edge_faces.len())
        .filter(|&e| {
            let [f0, f1] = fs.edge_faces[e];
            (sa.contains(&f0) && sb.contains(&f1)) || (sa.contains(&f1) && sb.contains(&f0))
        })
        .collect()
}

/// If `vertices` with `edges` forms a simple path (or a single vertex),
/// returns the vertex sequence from one end to the other.
fn as_path(g: &EmbeddedGraph, vertices: &[usize], edges: &[usize]) -> Option<Vec<usize>> {
    if vertices.is_empty() {
        return None;
    }
    if vertices.len() == 1 && edges.is_empty() {
        return Some(vec![vertices[0]]);
    }
    if edges.len() + 1 != vertices.len() {
        return None;
    }
    let vset: HashSet<usize> = vertices.iter().copied().collect();
    let mut deg: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in edges {
        let [u, v] = g.edge(e);
        if !vset.contains(&u) || !vset.contains(&v) {
            return None;
        }
        deg.entry(u).or_default().push(v);
        deg.entry(v).or_default().push(u);
    }
    let mut ends: Vec<usize> = Vec::new();
    for &v in vertices {
        match deg.get(&v).map(|d| d.len()).unwrap_or(0) {
            0 => return None,
            1 => ends.push(v),
            2 => {}
            _ => return None,
        }
    }
    if ends.len() != 2 {
        return None;
    }
    // Walk from the lexicographically (by id) smaller end.
    ends.sort_by_key(|&v| g.id(v));
    let mut walk = vec![ends[0]];
    let mut prev = usize::MAX;
    let mut cur = ends[0];
    while walk.len() < vertices.len() {
        let nexts = &deg[&cur];
        let next = *nexts.iter().find(|&&w| w != prev)?;
        walk.push(next);
        prev = cur;
        cur = next;
    }
    Some(walk)
}

fn subgraph_connected(face_vertices: &[Vec<usize>], fs: &FaceSet, side: &[usize]) -> bool {
    if side.len() <= 1 {
        return true;
    }
    // Faces sharing a vertex are adjacent for this purpose.
    let mut seen = vec![false; side.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        let vi: HashSet<usize> = face_vertices[side[i]].iter().copied().collect();
        for j in 0..side.len() {
            if !seen[j]
                && face_vertices[side[j]]
                    .iter()
                    .any(|v| vi.contains(v))
            {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    let _ = fs;
    count == side.len()
}

type Split = (Vec<usize>, Vec<usize>, Vec<usize>);

fn best_split_exhaustive(
    g: &EmbeddedGraph,
    fs: &FaceSet,
    face_vertices: &[Vec<usize>],
    region: &[usize],
) -> Split {
    let k = region.len();
    let mut best: Option<(Split, (bool, usize, usize, Vec<u64>))> = None;
    for mask in 1..(1u32 << (k - 1)) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, &f) in region.iter().enumerate() {
            if i > 0 && mask & (1 << (i - 1)) != 0 {
                b.push(f);
            } else {
                a.push(f);
            }
        }
        if !subgraph_connected(face_vertices, fs, &a) || !subgraph_connected(face_vertices, fs, &b)
        {
            continue;
        }
        let shared = shared_vertices(face_vertices, &a, &b);
        if shared.is_empty() {
            continue;
        }
        let xing = crossing_edges(fs, &a, &b);
        let path = as_path(g, &shared, &xing);
        let is_path = path.is_some();
        let chord = path.unwrap_or_else(|| shared.clone());
        let balance = a.len().abs_diff(b.len());
        let lex: Vec<u64> = {
            let fwd: Vec<u64> = chord.iter().map(|&v| g.id(v)).collect();
            let mut rev = fwd.clone();
            rev.reverse();
            fwd.min(rev)
        };
        // Prefer real path separators, then the most balanced face counts,
        // then fewer shared vertices, ties by lexicographic chord ids.
        let key = (!is_path, balance, shared.len(), lex);
        let cand = ((a, b, chord), key);
        best = match best {
            None => Some(cand),
            Some(prev) => {
                if cand.1 < prev.1 {
                    Some(cand)
                } else {
                    Some(prev)
                }
            }
        };
    }
    if let Some((split, _)) = best {
        return split;
    }
    // No split with shared vertices: the region is disconnected (detached
    // cycles); split off the first face with an empty chord.
    let a = vec![region[0]];
    let b = region[1..].to_vec();
    (a, b, Vec::new())
}

fn best_split_greedy(fs: &FaceSet, region: &[usize]) -> Split {
    // BFS half-split over face adjacency via shared edges.
    let rset: HashSet<usize> = region.iter().copied().collect();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in 0..fs.edge_faces.len() {
        let [f0, f1] = fs.edge_faces[e];
        if rset.contains(&f0) && rset.contains(&f1) && f0 != f1 {
            adj.entry(f0).or_default().push(f1);
            adj.entry(f1).or_default().push(f0);
        }
    }
    let mut order = Vec::new();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(region[0]);
    seen.insert(region[0]);
    while let Some(f) = queue.pop_front() {
        order.push(f);
        for &n in adj.get(&f).map(|v| v.as_slice()).unwrap_or(&[]) {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    for &f in region {
        if seen.insert(f) {
            order.push(f);
        }
    }
    let half = order.len() / 2;
    let a: Vec<usize> = order[..half].to_vec();
    let b: Vec<usize> = order[half..].to_vec();
    let shared: Vec<usize> = Vec::new();
    (a, b, shared)
}

/// Biconnected components of a graph: each block is a maximal set of edges
/// such that any two lie on a common cycle, or a single bridge edge.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    /// Edge indices per block.
    pub blocks: Vec<Vec<usize>>,
    /// Vertices belonging to more than one block (cut vertices).
    pub cut_vertices: Vec<usize>,
}

pub fn biconnected_components(g: &EmbeddedGraph) -> BlockDecomposition {
    let n = g.vertex_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut timer = 0usize;

    // Iterative DFS: (vertex, parent edge, neighbor cursor)
    for start in 0..n {
        if disc[start] != usize::MAX || g.degree(start) == 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        loop {
            let Some(&(v, pe, cursor)) = stack.last() else {
                break;
            };
            if cursor < g.degree(v) {
                stack.last_mut().unwrap().2 += 1;
                let (w, e) = g.neighbors(v)[cursor];
                if e == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(e);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, e, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] >= disc[parent] {
                        // parent separates v's subtree: pop the block down to
                        // and including the tree edge (parent, v).
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        if !block.is_empty() {
                            blocks.push(block);
                        }
                    }
                }
            }
        }
    }

    let mut block_count = vec![0usize; n];
    for block in &blocks {
        let mut verts: Vec<usize> = block.iter().flat_map(|&e| g.edge(e)).collect();
        verts.sort_unstable();
        verts.dedup();
        for v in verts {
            block_count[v] += 1;
        }
    }
    let cut_vertices = (0..n).filter(|&v| block_count[v] > 1).collect();
    BlockDecomposition {
        blocks,
        cut_vertices,
    }
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
    fn peel_pure_tree() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.5), (3, 1.0, 1.0)],
            &[(0, 1), (1, 2), (1, 3)],
        );
        let peel = peel_tree_substructures(&g);
        assert_eq!(peel.core.vertex_count(), 1);
        assert_eq!(peel.core.edge_count(), 0);
        assert_eq!(peel.trees.len(), 1);
        let (_, tree) = &peel.trees[0];
        assert_eq!(tree.edge_count(), 3);
        assert_eq!(tree.vertex_count(), 4);
    }

    #[test]
    fn peel_cycle_with_pendant_path() {
        let g = graph(
            &[
                (0, 0.0, 0.0),
                (1, 1.0, 0.0),
                (2, 1.0, 1.0),
                (3, 0.0, 1.0),
                (4, 2.0, 0.0),
                (5, 3.0, 0.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 4), (4, 5)],
        );
        let peel = peel_tree_substructures(&g);
        assert_eq!(peel.core.vertex_count(), 4);
        assert_eq!(peel.core.edge_count(), 4);
        assert_eq!(peel.trees.len(), 1);
        let (root_id, tree) = &peel.trees[0];
        assert_eq!(*root_id, 1);
        assert_eq!(tree.edge_count(), 2);
    }

    #[test]
    fn peel_two_connected_graph_is_identity() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 1.0), (3, 0.0, 1.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        );
        let peel = peel_tree_substructures(&g);
        assert_eq!(peel.core.edge_count(), 4);
        assert!(peel.trees.is_empty());
    }

    #[test]
    fn peel_reassembly_covers_input() {
        let g = graph(
            &[
                (0, 0.0, 0.0),
                (1, 1.0, 0.0),
                (2, 1.0, 1.0),
                (3, 0.0, 1.0),
                (4, 2.0, 0.0),
                (5, 2.0, 1.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 4), (2, 5)],
        );
        let peel = peel_tree_substructures(&g);
        let mut edges: Vec<(u64, u64)> = Vec::new();
        let mut collect = |h: &EmbeddedGraph| {
            for e in 0..h.edge_count() {
                let [u, v] = h.edge(e);
                let (a, b) = (h.id(u).min(h.id(v)), h.id(u).max(h.id(v)));
                edges.push((a, b));
            }
        };
        collect(&peel.core);
        for (_, t) in &peel.trees {
            collect(t);
        }
        edges.sort_unstable();
        edges.dedup();
        assert_eq!(edges.len(), g.edge_count());
    }

    #[test]
    fn decomposition_single_cycle_is_leaf() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 1.0), (3, 0.0, 1.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        );
        let t = chord_decomposition(&g).unwrap();
        assert_eq!(t.root.leaf_count(), 1);
        assert_eq!(t.root.inner_count(), 0);
    }

    #[test]
    fn decomposition_theta_graph() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 2.0, 0.0), (2, 2.0, 2.0), (3, 0.0, 2.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
        );
        let t = chord_decomposition(&g).unwrap();
        assert_eq!(t.root.leaf_count(), 2);
        assert_eq!(t.root.inner_count(), 1);
        match &t.root {
            DecompNode::Inner { chord, .. } => {
                let mut ids: Vec<u64> = chord.iter().map(|&v| g.id(v)).collect();
                ids.sort_unstable();
                assert_eq!(ids, vec![0, 2], "chord is the diagonal");
            }
            _ => panic!("expected inner node"),
        }
    }

    #[test]
    fn decomposition_grid() {
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
        let t = chord_decomposition(&g).unwrap();
        assert_eq!(t.root.leaf_count(), 4);
        assert_eq!(t.root.inner_count(), 3);
    }

    #[test]
    fn decomposition_rejects_degree_one() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 1.0), (3, 0.0, 1.0), (4, 2.0, 0.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 4)],
        );
        assert!(matches!(
            chord_decomposition(&g),
            Err(DecompError::HasDegreeOne)
        ));
    }

    #[test]
    fn decomposition_leaves_partition_faces() {
        let g = graph(
            &[(0, 0.0, 0.0), (1, 2.0, 0.0), (2, 2.0, 2.0), (3, 0.0, 2.0)],
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
        );
        let t = chord_decomposition(&g).unwrap();
        let mut leaves = Vec::new();
        fn collect(n: &DecompNode, out: &mut Vec<usize>) {
            match n {
                DecompNode::Leaf { face, .. } => out.push(*face),
                DecompNode::Inner { left, right, .. } => {
                    collect(left, out);
                    collect(right, out);
                }
            }
        }
        collect(&t.root, &mut leaves);
        leaves.sort_unstable();
        let mut bounded = t.face_set.bounded_faces();
        bounded.sort_unstable();
        assert_eq!(leaves, bounded);
    }

    #[test]
    fn blocks_of_dumbbell() {
        // two triangles joined by a bar
        let g = graph(
            &[
                (0, 0.0, 0.0),
                (1, 1.0, 0.0),
                (2, 0.5, 1.0),
                (3, 3.0, 0.0),
                (4, 4.0, 0.0),
                (5, 3.5, 1.0),
            ],
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (1, 3)],
        );
        let bd = biconnected_components(&g);
        assert_eq!(bd.blocks.len(), 3);
        let mut sizes: Vec<usize> = bd.blocks.iter().map(|b| b.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 3]);
        let mut cuts: Vec<u64> = bd.cut_vertices.iter().map(|&v| g.id(v)).collect();
        cuts.sort_unstable();
        assert_eq!(cuts, vec![1, 3]);
    }

    #[test]
    fn blocks_of_bowtie() {
        let g = graph(
            &[
                (0, 0.0, 0.0),
                (1, 1.0, 1.0),
                (2, 0.0, 2.0),
                (3, 2.0, 0.0),
                (4, 2.0, 2.0),
            ],
            &[(0, 1), (1, 2), (2, 0), (1, 3), (3, 4), (4, 1)],
        );
        let bd = biconnected_components(&g);
        assert_eq!(bd.blocks.len(), 2);
        assert_eq!(bd.cut_vertices, vec![1]);
    }
}
