//! Steps 1-3 of the decision pipeline: vertex placements, per-edge
//! reachability in the `eps`-tube, and the recursive pruning fixpoint.
//!
//! A vertex placement is a maximally connected part of `G2` inside the
//! `eps`-ball of a `G1` vertex. Placement identity is by index into the
//! per-vertex list created at compute time; pruning tombstones (the
//! [`Survivors`] mask) rather than reindexing, so reachability entries stay
//! valid throughout.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::geometry::{
    clip_segment_to_disk, clip_segment_to_tube, free_interval, Interval, Point2, Segment, EPS_GEOM,
};
use crate::graph::EmbeddedGraph;
use crate::par;

/// Strong (monotone) or weak (non-monotone) edge placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strong,
    Weak,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Strong => write!(f, "strong"),
            Mode::Weak => write!(f, "weak"),
        }
    }
}

/// A point on `G2`: edge index plus parameter along the canonical
/// orientation (lower vertex index first). Points at shared vertices
/// compare equal regardless of the incident edge chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOnGraph {
    pub edge: usize,
    pub t: f64,
}

impl PointOnGraph {
    pub fn pos(&self, g2: &EmbeddedGraph) -> Point2 {
        g2.edge_segment(self.edge).eval(self.t)
    }

    /// The `G2` vertex this point sits on, if any.
    pub fn at_vertex(&self, g2: &EmbeddedGraph) -> Option<usize> {
        let [a, b] = g2.edge(self.edge);
        if self.t <= 1e-9 {
            Some(a)
        } else if self.t >= 1.0 - 1e-9 {
            Some(b)
        } else {
            None
        }
    }

    pub fn same_point(&self, other: &PointOnGraph, g2: &EmbeddedGraph) -> bool {
        match (self.at_vertex(g2), other.at_vertex(g2)) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.edge == other.edge && (self.t - other.t).abs() <= 1e-9,
            _ => false,
        }
    }
}

/// One maximally connected piece of `G2` inside the `eps`-ball of `owner`.
#[derive(Debug, Clone)]
pub struct VertexPlacement {
    pub owner: usize,
    pub index: usize,
    /// `(G2 edge, parameter sub-interval)`, non-overlapping, one per edge.
    pub portions: Vec<(usize, Interval)>,
    /// `G2` vertices inside the ball belonging to this piece.
    pub touched_vertices: BTreeSet<usize>,
    /// Point of maximum clearance inside the ball (closest to the owner),
    /// ties by smallest edge id then smallest parameter.
    pub representative: PointOnGraph,
}

impl VertexPlacement {
    pub fn contains(&self, p: &PointOnGraph, g2: &EmbeddedGraph) -> bool {
        if let Some(v) = p.at_vertex(g2) {
            if self.touched_vertices.contains(&v) {
                return true;
            }
        }
        self.portions
            .iter()
            .any(|&(e, iv)| e == p.edge && iv.contains(p.t, 1e-9))
    }
}

/// All placements at a fixed `eps`, indexed per `G1` vertex.
#[derive(Debug, Clone)]
pub struct PlacementSet {
    pub eps: f64,
    pub per_vertex: Vec<Vec<VertexPlacement>>,
}

impl PlacementSet {
    pub fn count(&self, v: usize) -> usize {
        self.per_vertex[v].len()
    }

    pub fn get(&self, v: usize, i: usize) -> &VertexPlacement {
        &self.per_vertex[v][i]
    }
}

/// Computes every vertex placement: clip each `G2` edge to the ball, then
/// take connected components of the clipped subgraph. Parallel across
/// vertices.
pub fn compute_placements(g1: &EmbeddedGraph, g2: &EmbeddedGraph, eps: f64) -> PlacementSet {
    assert!(eps > 0.0, "eps must be positive");
    let per_vertex = par::map_indexed(g1.vertex_count(), |v| placements_of_vertex(g1, g2, v, eps));
    PlacementSet { eps, per_vertex }
}

fn placements_of_vertex(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    v: usize,
    eps: f64,
) -> Vec<VertexPlacement> {
    let center = g1.pos(v);
    let m2 = g2.edge_count();
    let mut clip: Vec<Option<Interval>> = Vec::with_capacity(m2);
    for e in 0..m2 {
        clip.push(clip_segment_to_disk(g2.edge_segment(e), center, eps));
    }
    let in_ball = |w: usize| g2.pos(w).dist(center) <= eps + EPS_GEOM;

    // Union-find over G2 edges with nonempty clips; edges joined through a
    // shared vertex inside the ball.
    let mut parent: Vec<usize> = (0..m2).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for w in 0..g2.vertex_count() {
        if !in_ball(w) {
            continue;
        }
        let mut first: Option<usize> = None;
        for &(_, e) in g2.neighbors(w) {
            if clip[e].is_none() {
                continue;
            }
            match first {
                None => first = Some(e),
                Some(f) => {
                    let rf = find(&mut parent, f);
                    let re = find(&mut parent, e);
                    if rf != re {
                        parent[rf] = re;
                    }
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in 0..m2 {
        if clip[e].is_some() {
            let root = find(&mut parent, e);
            groups.entry(root).or_default().push(e);
        }
    }

    let mut placements = Vec::new();
    // BTreeMap iteration gives deterministic placement order by the
    // smallest contained edge? Roots are arbitrary; sort groups by their
    // minimum edge index instead.
    let mut group_list: Vec<Vec<usize>> = groups.into_values().collect();
    group_list.sort_by_key(|g| g.iter().copied().min());
    for (index, edges) in group_list.into_iter().enumerate() {
        let mut portions = Vec::with_capacity(edges.len());
        let mut touched = BTreeSet::new();
        let mut best: Option<(f64, usize, f64)> = None; // (dist, edge, t)
        for &e in &edges {
            let iv = clip[e].unwrap();
            portions.push((e, iv));
            let seg = g2.edge_segment(e);
            let [a, b] = g2.edge(e);
            if in_ball(a) && iv.contains(0.0, 1e-9) {
                touched.insert(a);
            }
            if in_ball(b) && iv.contains(1.0, 1e-9) {
                touched.insert(b);
            }
            // closest point of the portion to the ball center
            let t_free = crate::geometry::closest_param(center, seg).clamp(iv.lo(), iv.hi());
            let d = seg.eval(t_free).dist(center);
            let better = match best {
                None => true,
                Some((bd, be, bt)) => {
                    d < bd - 1e-12
                        || ((d - bd).abs() <= 1e-12 && (e, t_free) < (be, bt))
                }
            };
            if better {
                best = Some((d, e, t_free));
            }
        }
        let (_, edge, t) = best.expect("placement has at least one portion");
        placements.push(VertexPlacement {
            owner: v,
            index,
            portions,
            touched_vertices: touched,
            representative: PointOnGraph { edge, t },
        });
    }
    let _ = g1;
    placements
}

/// Node of the clipped tube graph: a point of `G2` inside the `eps`-tube of
/// a `G1` edge, labeled with its free interval on that edge.
#[derive(Debug, Clone)]
pub struct TubeNode {
    pub point: PointOnGraph,
    pub pos: Point2,
    pub free: Option<Interval>,
}

/// `G2` restricted to the `eps`-tube of one `G1` edge, cut at tube
/// boundaries and at placement boundaries of the edge's two endpoints.
#[derive(Debug)]
pub struct ClippedTubeGraph {
    pub nodes: Vec<TubeNode>,
    pub adj: Vec<Vec<usize>>,
    pub component: Vec<usize>,
    /// Node sets per placement of the canonical first / second endpoint.
    pub u_nodes: Vec<Vec<usize>>,
    pub v_nodes: Vec<Vec<usize>>,
}

#[derive(PartialEq, Eq, Hash, Clone, Copy)]
enum NodeKey {
    Vertex(usize),
    Mid(usize, i64),
}

impl ClippedTubeGraph {
    /// Builds the tube graph for `G1` edge `e1` at `eps`. `placements` must
    /// have been computed at the same `eps`.
    pub fn build(
        g1: &EmbeddedGraph,
        g2: &EmbeddedGraph,
        e1: usize,
        eps: f64,
        placements: &PlacementSet,
    ) -> ClippedTubeGraph {
        let [u, v] = g1.edge(e1);
        let e_seg = g1.edge_segment(e1);
        let pls_u = &placements.per_vertex[u];
        let pls_v = &placements.per_vertex[v];

        let mut nodes: Vec<TubeNode> = Vec::new();
        let mut adj: Vec<Vec<usize>> = Vec::new();
        let mut key_of: HashMap<NodeKey, usize> = HashMap::new();

        fn node_at(
            g2: &EmbeddedGraph,
            e_seg: Segment,
            eps: f64,
            nodes: &mut Vec<TubeNode>,
            adj: &mut Vec<Vec<usize>>,
            key_of: &mut HashMap<NodeKey, usize>,
            edge: usize,
            t: f64,
        ) -> usize {
            let [a, b] = g2.edge(edge);
            let key = if t <= 1e-9 {
                NodeKey::Vertex(a)
            } else if t >= 1.0 - 1e-9 {
                NodeKey::Vertex(b)
            } else {
                NodeKey::Mid(edge, (t * 1e12).round() as i64)
            };
            if let Some(&i) = key_of.get(&key) {
                return i;
            }
            let point = PointOnGraph { edge, t };
            let pos = point.pos(g2);
            let free = free_interval(e_seg, pos, eps);
            nodes.push(TubeNode { point, pos, free });
            adj.push(Vec::new());
            key_of.insert(key, nodes.len() - 1);
            nodes.len() - 1
        }

        for f in 0..g2.edge_count() {
            let f_seg = g2.edge_segment(f);
            let Some(tube_iv) = clip_segment_to_tube(f_seg, e_seg, eps) else {
                continue;
            };
            let mut cuts = vec![tube_iv.lo(), tube_iv.hi()];
            for pls in [pls_u, pls_v] {
                for pl in pls {
                    for &(pe, piv) in &pl.portions {
                        if pe == f {
                            cuts.push(piv.lo().clamp(tube_iv.lo(), tube_iv.hi()));
                            cuts.push(piv.hi().clamp(tube_iv.lo(), tube_iv.hi()));
                        }
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
            let idxs: Vec<usize> = cuts
                .iter()
                .map(|&t| node_at(g2, e_seg, eps, &mut nodes, &mut adj, &mut key_of, f, t))
                .collect();
            for w in idxs.windows(2) {
                if w[0] != w[1] {
                    adj[w[0]].push(w[1]);
                    adj[w[1]].push(w[0]);
                }
            }
        }

        // connected components
        let mut component = vec![usize::MAX; nodes.len()];
        let mut next = 0;
        for s in 0..nodes.len() {
            if component[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            component[s] = next;
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if component[y] == usize::MAX {
                        component[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }

        let membership = |pl: &VertexPlacement| -> Vec<usize> {
            let mut out = Vec::new();
            for (i, n) in nodes.iter().enumerate() {
                let in_pl = match n.point.at_vertex(g2) {
                    Some(w) => pl.touched_vertices.contains(&w),
                    None => pl
                        .portions
                        .iter()
                        .any(|&(pe, piv)| pe == n.point.edge && piv.contains(n.point.t, 1e-9)),
                };
                if in_pl {
                    out.push(i);
                }
            }
            out
        };
        let u_nodes = pls_u.iter().map(&membership).collect();
        let v_nodes = pls_v.iter().map(&membership).collect();

        ClippedTubeGraph {
            nodes,
            adj,
            component,
            u_nodes,
            v_nodes,
        }
    }

    /// Shortest node path (by hops) between two node sets, if connected.
    pub fn bfs_path(&self, from: &[usize], to: &[usize]) -> Option<Vec<usize>> {
        let target: BTreeSet<usize> = to.iter().copied().collect();
        let mut parent = vec![usize::MAX; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        for &s in from {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            if target.contains(&x) {
                let mut path = vec![x];
                let mut cur = x;
                while parent[cur] != usize::MAX {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

/// Weak reachability entry of one `G1` edge: tube components with the
/// placements of each endpoint they contain. Components lacking either side
/// are discarded.
#[derive(Debug, Clone)]
pub struct WeakEdgeEntry {
    pub components: Vec<(Vec<usize>, Vec<usize>)>,
}

impl WeakEdgeEntry {
    pub fn pair_reachable(&self, i: usize, j: usize) -> bool {
        self.components
            .iter()
            .any(|(us, vs)| us.contains(&i) && vs.contains(&j))
    }
}

/// Strong reachability entry of one `G1` edge: ordered placement pairs that
/// admit a monotone edge image, each with one stored witness path.
#[derive(Debug, Clone, Default)]
pub struct StrongEdgeEntry {
    pub pairs: BTreeMap<(usize, usize), Vec<PointOnGraph>>,
}

impl StrongEdgeEntry {
    pub fn pair_reachable(&self, i: usize, j: usize) -> bool {
        self.pairs.contains_key(&(i, j))
    }
}

#[derive(Debug, Clone)]
pub enum EdgeEntry {
    Weak(WeakEdgeEntry),
    Strong(StrongEdgeEntry),
}

impl EdgeEntry {
    /// Is the ordered pair (placement of canonical-u, placement of
    /// canonical-v) reachable?
    pub fn pair_reachable(&self, i: usize, j: usize) -> bool {
        match self {
            EdgeEntry::Weak(w) => w.pair_reachable(i, j),
            EdgeEntry::Strong(s) => s.pair_reachable(i, j),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReachStats {
    /// Node expansions performed by the strong graph explorations.
    pub expansions: u64,
}

/// Per-`G1`-edge reachability at a fixed `eps` and mode.
#[derive(Debug, Clone)]
pub struct ReachabilityIndex {
    pub mode: Mode,
    pub entries: Vec<EdgeEntry>,
    pub stats: ReachStats,
}

/// Computes reachability for every `G1` edge, parallel across edges.
pub fn compute_reachability(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    placements: &PlacementSet,
    eps: f64,
    mode: Mode,
) -> ReachabilityIndex {
    let results = par::map_indexed(g1.edge_count(), |e| match mode {
        Mode::Weak => (
            EdgeEntry::Weak(weak_edge_reachability(g1, g2, e, placements, eps)),
            0u64,
        ),
        Mode::Strong => {
            let (entry, expansions) = strong_edge_reachability(g1, g2, e, placements, eps);
            (EdgeEntry::Strong(entry), expansions)
        }
    });
    let mut entries = Vec::with_capacity(results.len());
    let mut stats = ReachStats::default();
    for (entry, expansions) in results {
        stats.expansions += expansions;
        entries.push(entry);
    }
    ReachabilityIndex {
        mode,
        entries,
        stats,
    }
}

/// Weak reachability: placements grouped by their tube component. Every
/// placement lies wholly in one component because the endpoint balls are
/// contained in the tube.
pub fn weak_edge_reachability(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    e1: usize,
    placements: &PlacementSet,
    eps: f64,
) -> WeakEdgeEntry {
    let tube = ClippedTubeGraph::build(g1, g2, e1, eps, placements);
    let comp_of = |nodes: &Vec<usize>| -> Option<usize> {
        let first = *nodes.first()?;
        let c = tube.component[first];
        debug_assert!(
            nodes.iter().all(|&n| tube.component[n] == c),
            "placement spans tube components"
        );
        Some(c)
    };
    let mut by_comp: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, nodes) in tube.u_nodes.iter().enumerate() {
        if let Some(c) = comp_of(nodes) {
            by_comp.entry(c).or_default().0.push(i);
        }
    }
    for (j, nodes) in tube.v_nodes.iter().enumerate() {
        if let Some(c) = comp_of(nodes) {
            by_comp.entry(c).or_default().1.push(j);
        }
    }
    let components = by_comp
        .into_values()
        .filter(|(us, vs)| !us.is_empty() && !vs.is_empty())
        .collect();
    WeakEdgeEntry { components }
}

/// Strong reachability: one lower-bound Dijkstra per placement of the first
/// endpoint. The exploration state is `(node, smallest reachable parameter
/// on the edge)`; keeping only the minimal lower bound per node is exact
/// because feasibility is monotone in the bound and each free-space cell of
/// a segment pair is convex.
pub fn strong_edge_reachability(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    e1: usize,
    placements: &PlacementSet,
    eps: f64,
) -> (StrongEdgeEntry, u64) {
    let tube = ClippedTubeGraph::build(g1, g2, e1, eps, placements);
    let mut entry = StrongEdgeEntry::default();
    let mut expansions = 0u64;

    #[derive(PartialEq)]
    struct State(f64, usize);
    impl Eq for State {}
    impl Ord for State {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            other
                .0
                .total_cmp(&self.0)
                .then_with(|| other.1.cmp(&self.1))
        }
    }
    impl PartialOrd for State {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    for (i, seeds) in tube.u_nodes.iter().enumerate() {
        let mut label = vec![f64::INFINITY; tube.nodes.len()];
        let mut parent = vec![usize::MAX; tube.nodes.len()];
        let mut heap = std::collections::BinaryHeap::new();
        for &s in seeds {
            if let Some(iv) = tube.nodes[s].free {
                let l = iv.lo();
                if l < label[s] {
                    label[s] = l;
                    heap.push(State(l, s));
                }
            }
        }
        while let Some(State(l, x)) = heap.pop() {
            if l > label[x] {
                continue;
            }
            expansions += 1;
            for &y in &tube.adj[x] {
                let Some(iv) = tube.nodes[y].free else {
                    continue;
                };
                let l2 = l.max(iv.lo());
                if l2 <= iv.hi() + EPS_GEOM && l2 < label[y] - 1e-15 {
                    label[y] = l2;
                    parent[y] = x;
                    heap.push(State(l2, y));
                }
            }
        }
        for (j, targets) in tube.v_nodes.iter().enumerate() {
            let mut best: Option<usize> = None;
            for &t in targets {
                if label[t].is_finite() {
                    let better = match best {
                        None => true,
                        Some(b) => label[t] < label[b] || (label[t] == label[b] && t < b),
                    };
                    if better {
                        best = Some(t);
                    }
                }
            }
            if let Some(t) = best {
                let mut node_path = vec![t];
                let mut cur = t;
                while parent[cur] != usize::MAX {
                    cur = parent[cur];
                    node_path.push(cur);
                }
                node_path.reverse();
                let witness: Vec<PointOnGraph> =
                    node_path.iter().map(|&n| tube.nodes[n].point).collect();
                entry.pairs.insert((i, j), witness);
            }
        }
    }
    (entry, expansions)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PruneError {
    #[error("reachability was computed in {found} mode, expected {expected}")]
    ModeMismatch { expected: Mode, found: Mode },
}

/// Alive mask over placements; indices stay stable under pruning.
#[derive(Debug, Clone)]
pub struct Survivors {
    pub alive: Vec<Vec<bool>>,
}

impl Survivors {
    pub fn all(placements: &PlacementSet) -> Survivors {
        Survivors {
            alive: placements
                .per_vertex
                .iter()
                .map(|p| vec![true; p.len()])
                .collect(),
        }
    }

    pub fn count(&self, v: usize) -> usize {
        self.alive[v].iter().filter(|&&a| a).count()
    }

    pub fn alive_indices(&self, v: usize) -> Vec<usize> {
        (0..self.alive[v].len())
            .filter(|&i| self.alive[v][i])
            .collect()
    }
}

/// Cascade report: placements deleted per worklist round. The fixpoint is
/// independent of processing order; rounds record the cascade structure.
#[derive(Debug, Clone, Default)]
pub struct PruneReport {
    pub surviving_per_vertex: Vec<usize>,
    pub deletion_rounds: Vec<Vec<(usize, usize)>>,
}

/// Deletes placements lacking a reachable surviving partner for some
/// incident edge, cascading to a fixpoint.
pub fn prune_invalid(
    g1: &EmbeddedGraph,
    placements: &PlacementSet,
    reach: &ReachabilityIndex,
    mode: Mode,
    initial: Option<&Survivors>,
) -> Result<(Survivors, PruneReport), PruneError> {
    if reach.mode != mode {
        return Err(PruneError::ModeMismatch {
            expected: mode,
            found: reach.mode,
        });
    }
    let mut alive = match initial {
        Some(s) => s.clone(),
        None => Survivors::all(placements),
    };

    // support[v][i] per incident edge slot: number of alive partners (or the
    // alive count of the placement's component counterpart for weak mode).
    // Recomputing support from scratch per round keeps this simple; graphs
    // at this layer are small compared to the reachability work.
    let has_support = |alive: &Survivors, v: usize, i: usize| -> bool {
        for &(w, e) in g1.neighbors(v) {
            let [a, _] = g1.edge(e);
            let v_is_first = a == v;
            let ok = match &reach.entries[e] {
                EdgeEntry::Weak(entry) => entry.components.iter().any(|(us, vs)| {
                    let (mine, theirs) = if v_is_first { (us, vs) } else { (vs, us) };
                    mine.contains(&i) && theirs.iter().any(|&j| alive.alive[w][j])
                }),
                EdgeEntry::Strong(entry) => entry.pairs.keys().any(|&(pi, pj)| {
                    let (mine, their) = if v_is_first { (pi, pj) } else { (pj, pi) };
                    mine == i && alive.alive[w][their]
                }),
            };
            if !ok {
                return false;
            }
        }
        true
    };

    let mut rounds: Vec<Vec<(usize, usize)>> = Vec::new();
    loop {
        let mut dead_now = Vec::new();
        for v in 0..g1.vertex_count() {
            for i in 0..alive.alive[v].len() {
                if alive.alive[v][i] && !has_support(&alive, v, i) {
                    dead_now.push((v, i));
                }
            }
        }
        if dead_now.is_empty() {
            break;
        }
        for &(v, i) in &dead_now {
            alive.alive[v][i] = false;
        }
        rounds.push(dead_now);
    }

    let report = PruneReport {
        surviving_per_vertex: (0..g1.vertex_count()).map(|v| alive.count(v)).collect(),
        deletion_rounds: rounds,
    };
    Ok((alive, report))
}
