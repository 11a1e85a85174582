//! Step 4 of the pipeline: per-component decision procedures, witness
//! construction and verification.
//!
//! Each connected component of `G1` is decided independently against each
//! connected component of `G2` (a component passes if any host component
//! accepts). After pruning, the dispatch is: empty-survivor shortcut, the
//! unique-placement shortcut, trees by root-outward greedy, plane weak by
//! the survivor criterion, and plane strong by either the chordless-cycle
//! decomposition or brute force over placement assignments.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{connected_components, faces, is_plane, EmbeddedGraph};
use crate::placements::{
    compute_placements, compute_reachability, prune_invalid, Mode, PlacementSet, PruneError,
    ReachabilityIndex, Survivors,
};

mod search;
mod witness;

pub use search::plane_strong_exact_component;
pub use witness::{build_witness, verify_mapping, GraphMapping, VerifyReport, WitnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    YesApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    EmptyPlacement,
    UniquePlacement,
    Tree,
    PlaneWeak,
    PlaneStrongChord,
    BruteForce,
    Approx,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::EmptyPlacement => "empty-placement",
            Method::UniquePlacement => "unique-placement",
            Method::Tree => "tree",
            Method::PlaneWeak => "plane-weak",
            Method::PlaneStrongChord => "plane-strong-chord",
            Method::BruteForce => "brute-force",
            Method::Approx => "approx",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    Tree,
    PlaneWeak,
    PlaneStrongChord,
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct DecisionConfig {
    /// Backtracking-node budget for the brute-force assignment search.
    pub brute_force_node_budget: u64,
    /// Cap on stored placement combinations in the chord decomposition
    /// solver.
    pub combination_store_cap: usize,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig {
            brute_force_node_budget: 10_000_000,
            combination_store_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DecisionStats {
    /// Node expansions of the strong reachability explorations.
    pub reach_expansions: u64,
    /// Total vertex placements before pruning.
    pub placements_total: usize,
    /// Backtracking nodes visited by assignment searches.
    pub search_nodes: u64,
}

#[derive(Debug, Clone)]
pub struct DecisionOutcome {
    pub answer: Answer,
    pub method: Method,
    pub witness: Option<GraphMapping>,
    pub approx_factor: Option<f64>,
    pub notes: String,
    /// Surviving placements per `G1` vertex after pruning (best host
    /// component per vertex when `G2` is disconnected).
    pub survivors_per_vertex: Vec<usize>,
    pub stats: DecisionStats,
}

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("eps must be positive, got {0}")]
    InvalidEps(f64),
    #[error("strategy not applicable: {0}")]
    StrategyInapplicable(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no vertex of degree >= 3: the approximation angle is undefined")]
    NoBranchVertex,
    #[error(transparent)]
    Prune(#[from] PruneError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

/// Steps 1-2 of the pipeline, computed once per `(G1, G2, eps, mode)`.
pub struct PipelineState<'a> {
    pub g1: &'a EmbeddedGraph,
    pub g2: &'a EmbeddedGraph,
    pub eps: f64,
    pub mode: Mode,
    pub placements: PlacementSet,
    pub reach: ReachabilityIndex,
}

pub fn prepare<'a>(
    g1: &'a EmbeddedGraph,
    g2: &'a EmbeddedGraph,
    eps: f64,
    mode: Mode,
) -> PipelineState<'a> {
    let placements = compute_placements(g1, g2, eps);
    let reach = compute_reachability(g1, g2, &placements, eps, mode);
    PipelineState {
        g1,
        g2,
        eps,
        mode,
        placements,
        reach,
    }
}

/// Decides the directed (strong or weak) graph distance question
/// `distance(G1 -> G2) <= eps` with the default configuration.
pub fn decide_directed(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    eps: f64,
    mode: Mode,
    strategy: Strategy,
) -> Result<DecisionOutcome, DecisionError> {
    decide_directed_with(g1, g2, eps, mode, strategy, &DecisionConfig::default())
}

/// One component's accepting result.
struct ComponentAccept {
    method: Method,
    /// Placement per vertex when the method fixes one (everything except
    /// plane-weak).
    assignment: Option<BTreeMap<usize, usize>>,
}

pub fn decide_directed_with(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    eps: f64,
    mode: Mode,
    strategy: Strategy,
    cfg: &DecisionConfig,
) -> Result<DecisionOutcome, DecisionError> {
    if !(eps > 0.0) {
        return Err(DecisionError::InvalidEps(eps));
    }
    if matches!(strategy, Strategy::PlaneWeak) && mode != Mode::Weak {
        return Err(DecisionError::StrategyInapplicable(
            "plane_weak requires weak mode".into(),
        ));
    }
    if matches!(strategy, Strategy::PlaneStrongChord) && mode != Mode::Strong {
        return Err(DecisionError::StrategyInapplicable(
            "plane_strong_chord requires strong mode".into(),
        ));
    }

    let comps1 = connected_components(g1);
    let mut stats = DecisionStats::default();
    if comps1.is_empty() {
        return Ok(DecisionOutcome {
            answer: Answer::Yes,
            method: Method::Tree,
            witness: Some(GraphMapping::default()),
            approx_factor: None,
            notes: "empty G1".into(),
            survivors_per_vertex: Vec::new(),
            stats,
        });
    }

    let state = prepare(g1, g2, eps, mode);
    stats.reach_expansions = state.reach.stats.expansions;
    stats.placements_total = state
        .placements
        .per_vertex
        .iter()
        .map(|p| p.len())
        .sum();

    let comps2 = connected_components(g2);
    // G2 component of each placement (placements never span components).
    let mut comp2_of_vertex = vec![usize::MAX; g2.vertex_count()];
    for (ci, comp) in comps2.iter().enumerate() {
        for &v in comp {
            comp2_of_vertex[v] = ci;
        }
    }

    // Component-wise planarity, computed lazily.
    let g2_plane = is_plane(g2);
    let comp_graphs: Vec<(EmbeddedGraph, Vec<usize>)> = comps1
        .iter()
        .map(|comp| g1.induced_subgraph(comp))
        .collect();

    let mut survivors_best: Vec<usize> = vec![0; g1.vertex_count()];
    let mut accepted: Vec<Option<ComponentAccept>> = (0..comps1.len()).map(|_| None).collect();
    let mut failing_method = Method::EmptyPlacement;
    let mut search_nodes = 0u64;

    for c2 in 0..comps2.len().max(1) {
        if accepted.iter().all(|a| a.is_some()) {
            break;
        }
        // Restrict placements to this host component.
        let mut initial = Survivors::all(&state.placements);
        if comps2.is_empty() {
            for flags in initial.alive.iter_mut() {
                for f in flags.iter_mut() {
                    *f = false;
                }
            }
        } else {
            for (v, pls) in state.placements.per_vertex.iter().enumerate() {
                for (i, pl) in pls.iter().enumerate() {
                    let host = pl
                        .portions
                        .first()
                        .map(|&(e, _)| comp2_of_vertex[g2.edge(e)[0]])
                        .unwrap_or(usize::MAX);
                    initial.alive[v][i] = host == c2;
                }
            }
        }
        let (survivors, _report) =
            prune_invalid(g1, &state.placements, &state.reach, mode, Some(&initial))?;
        for v in 0..g1.vertex_count() {
            survivors_best[v] = survivors_best[v].max(survivors.count(v));
        }

        for (ci, comp) in comps1.iter().enumerate() {
            if accepted[ci].is_some() {
                continue;
            }
            let (comp_graph, _) = &comp_graphs[ci];
            let result = decide_component(
                &state,
                comp,
                comp_graph,
                &survivors,
                strategy,
                g2_plane,
                cfg,
                &mut search_nodes,
            )?;
            match result {
                Some(acc) => accepted[ci] = Some(acc),
                None => {
                    // remember the strongest method that produced a NO
                    let attempt = attempted_method(&state, comp, comp_graph, strategy, g2_plane);
                    failing_method = failing_method.max(attempt);
                }
            }
        }
    }
    stats.search_nodes = search_nodes;

    if accepted.iter().all(|a| a.is_some()) {
        let accepted: Vec<ComponentAccept> = accepted.into_iter().map(Option::unwrap).collect();
        let method = accepted
            .iter()
            .map(|a| a.method)
            .max()
            .unwrap_or(Method::Tree);
        let witness = if accepted.iter().all(|a| a.assignment.is_some()) {
            let mut assignment = BTreeMap::new();
            for acc in &accepted {
                assignment.extend(acc.assignment.clone().unwrap());
            }
            Some(build_witness(
                g1,
                g2,
                eps,
                mode,
                &state.placements,
                &state.reach,
                &assignment,
            )?)
        } else {
            None
        };
        Ok(DecisionOutcome {
            answer: Answer::Yes,
            method,
            witness,
            approx_factor: None,
            notes: String::new(),
            survivors_per_vertex: survivors_best,
            stats,
        })
    } else {
        Ok(DecisionOutcome {
            answer: Answer::No,
            method: failing_method,
            witness: None,
            approx_factor: None,
            notes: String::new(),
            survivors_per_vertex: survivors_best,
            stats,
        })
    }
}

/// The method the dispatch would use for this component (for NO reporting).
fn attempted_method(
    state: &PipelineState,
    comp: &[usize],
    comp_graph: &EmbeddedGraph,
    strategy: Strategy,
    g2_plane: bool,
) -> Method {
    match strategy {
        Strategy::Tree => Method::Tree,
        Strategy::PlaneWeak => Method::PlaneWeak,
        Strategy::PlaneStrongChord => Method::PlaneStrongChord,
        Strategy::BruteForce => Method::BruteForce,
        Strategy::Auto => {
            if comp_graph.is_tree() {
                Method::Tree
            } else if state.mode == Mode::Weak && g2_plane && is_plane(comp_graph) {
                Method::PlaneWeak
            } else if state.mode == Mode::Strong && g2_plane && is_plane(comp_graph) {
                if let Ok(fs) = faces(comp_graph) {
                    if 2 * fs.face_count() - 1 <= comp.len() {
                        return Method::PlaneStrongChord;
                    }
                }
                Method::BruteForce
            } else {
                Method::BruteForce
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn decide_component(
    state: &PipelineState,
    comp: &[usize],
    comp_graph: &EmbeddedGraph,
    survivors: &Survivors,
    strategy: Strategy,
    g2_plane: bool,
    cfg: &DecisionConfig,
    search_nodes: &mut u64,
) -> Result<Option<ComponentAccept>, DecisionError> {
    // (a) A vertex without surviving placements is an exact NO in any mode.
    if comp.iter().any(|&v| survivors.count(v) == 0) {
        return Ok(None);
    }

    match strategy {
        Strategy::Tree => {
            if !comp_graph.is_tree() {
                return Err(DecisionError::StrategyInapplicable(
                    "tree strategy on a component with cycles".into(),
                ));
            }
            return Ok(Some(tree_accept(state, comp, survivors)));
        }
        Strategy::PlaneWeak => {
            if !(g2_plane && is_plane(comp_graph)) {
                return Err(DecisionError::StrategyInapplicable(
                    "plane_weak requires plane embeddings of both graphs".into(),
                ));
            }
            return Ok(Some(ComponentAccept {
                method: Method::PlaneWeak,
                assignment: None,
            }));
        }
        Strategy::PlaneStrongChord => {
            if !(g2_plane && is_plane(comp_graph)) {
                return Err(DecisionError::StrategyInapplicable(
                    "plane_strong_chord requires plane embeddings of both graphs".into(),
                ));
            }
            let result =
                plane_strong_exact_component(state.g1, comp, survivors, &state.reach, cfg)?;
            return Ok(result.map(|assignment| ComponentAccept {
                method: Method::PlaneStrongChord,
                assignment: Some(assignment),
            }));
        }
        Strategy::BruteForce => {
            let result = search::brute_force_assignment(
                state.g1,
                comp,
                survivors,
                &state.reach,
                cfg,
                search_nodes,
            )?;
            return Ok(result.map(|assignment| ComponentAccept {
                method: Method::BruteForce,
                assignment: Some(assignment),
            }));
        }
        Strategy::Auto => {}
    }

    // (b) Unique surviving placements at internal vertices decide YES.
    let internal_unique = comp
        .iter()
        .all(|&v| state.g1.degree(v) < 2 || survivors.count(v) == 1);
    if internal_unique {
        let assignment = unique_assignment(state, comp, survivors);
        return Ok(Some(ComponentAccept {
            method: Method::UniquePlacement,
            assignment: Some(assignment),
        }));
    }

    // (c) Trees: root-outward greedy over valid placements.
    if comp_graph.is_tree() {
        return Ok(Some(tree_accept(state, comp, survivors)));
    }

    let comp_plane = g2_plane && is_plane(comp_graph);

    // (d) Weak mode with both graphs plane: survivors everywhere suffice.
    if state.mode == Mode::Weak && comp_plane {
        return Ok(Some(ComponentAccept {
            method: Method::PlaneWeak,
            assignment: None,
        }));
    }

    // (e) Strong mode with both graphs plane: chord decomposition when its
    // bound beats brute force.
    if state.mode == Mode::Strong && comp_plane {
        let use_chord = faces(comp_graph)
            .map(|fs| 2 * fs.face_count() - 1 <= comp.len())
            .unwrap_or(false);
        if use_chord {
            let result =
                plane_strong_exact_component(state.g1, comp, survivors, &state.reach, cfg)?;
            return Ok(result.map(|assignment| ComponentAccept {
                method: Method::PlaneStrongChord,
                assignment: Some(assignment),
            }));
        }
    }

    // (f) Brute force over placement assignments with forward checking.
    let result = search::brute_force_assignment(
        state.g1,
        comp,
        survivors,
        &state.reach,
        cfg,
        search_nodes,
    )?;
    Ok(result.map(|assignment| ComponentAccept {
        method: Method::BruteForce,
        assignment: Some(assignment),
    }))
}

/// Assignment for the unique-placement shortcut: internal vertices take
/// their unique survivor, degree <= 1 vertices greedily follow a neighbor.
fn unique_assignment(
    state: &PipelineState,
    comp: &[usize],
    survivors: &Survivors,
) -> BTreeMap<usize, usize> {
    let mut assignment = BTreeMap::new();
    for &v in comp {
        if state.g1.degree(v) >= 2 {
            assignment.insert(v, survivors.alive_indices(v)[0]);
        }
    }
    for &v in comp {
        if assignment.contains_key(&v) {
            continue;
        }
        match state.g1.neighbors(v).first() {
            None => {
                assignment.insert(v, survivors.alive_indices(v)[0]);
            }
            Some(&(w, e)) => {
                // w is internal (already fixed) unless the component is a
                // single edge, where any valid placement of w works.
                let w_choice = *assignment
                    .entry(w)
                    .or_insert_with(|| survivors.alive_indices(w)[0]);
                let choice = pick_partner(state, e, v, w, w_choice, survivors)
                    .expect("valid placement has a reachable partner");
                assignment.insert(v, choice);
            }
        }
    }
    assignment
}

/// A surviving placement of `v` reachable from placement `w_choice` of `w`
/// along edge `e`.
fn pick_partner(
    state: &PipelineState,
    e: usize,
    v: usize,
    w: usize,
    w_choice: usize,
    survivors: &Survivors,
) -> Option<usize> {
    let [a, _] = state.g1.edge(e);
    let v_is_first = a == v;
    for i in survivors.alive_indices(v) {
        let ok = if v_is_first {
            state.reach.entries[e].pair_reachable(i, w_choice)
        } else {
            state.reach.entries[e].pair_reachable(w_choice, i)
        };
        if ok {
            return Some(i);
        }
    }
    None
}

/// Tree decision: map the root to any valid placement, then every child to
/// a valid placement reachable from its parent's.
fn tree_accept(state: &PipelineState, comp: &[usize], survivors: &Survivors) -> ComponentAccept {
    let root = *comp.iter().min().unwrap();
    let mut assignment = BTreeMap::new();
    assignment.insert(root, survivors.alive_indices(root)[0]);
    let mut stack = vec![root];
    let mut seen: std::collections::BTreeSet<usize> = [root].into_iter().collect();
    while let Some(p) = stack.pop() {
        let p_choice = assignment[&p];
        for &(child, e) in state.g1.neighbors(p) {
            if !seen.insert(child) {
                continue;
            }
            let choice = pick_partner(state, e, child, p, p_choice, survivors)
                .expect("valid placement has a reachable partner");
            assignment.insert(child, choice);
            stack.push(child);
        }
    }
    ComponentAccept {
        method: Method::Tree,
        assignment: Some(assignment),
    }
}

/// Exponential exact decision restricted to the chord-decomposition method,
/// for plane graphs in strong mode. Runs steps 1-3 internally.
pub fn decide_plane_strong_exact(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    eps: f64,
    cfg: &DecisionConfig,
) -> Result<DecisionOutcome, DecisionError> {
    decide_directed_with(g1, g2, eps, Mode::Strong, Strategy::PlaneStrongChord, cfg)
}

/// Angle parameters of the alpha-approximation.
#[derive(Debug, Clone, Copy)]
pub struct ApproxParams {
    /// Half the smallest angle between two edges incident to a vertex of
    /// degree >= 3.
    pub alpha: f64,
    pub balls_disjoint: bool,
}

pub fn approx_params(g1: &EmbeddedGraph, eps: f64) -> Result<ApproxParams, DecisionError> {
    let mut min_angle = f64::INFINITY;
    for v in 0..g1.vertex_count() {
        if g1.degree(v) < 3 {
            continue;
        }
        let p = g1.pos(v);
        let mut angles: Vec<f64> = g1
            .neighbors(v)
            .iter()
            .map(|&(w, _)| {
                let q = g1.pos(w);
                (q.y - p.y).atan2(q.x - p.x)
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        for i in 0..angles.len() {
            let next = angles[(i + 1) % angles.len()];
            let mut gap = next - angles[i];
            if i + 1 == angles.len() {
                gap += std::f64::consts::TAU;
            }
            min_angle = min_angle.min(gap);
        }
    }
    if !min_angle.is_finite() {
        return Err(DecisionError::NoBranchVertex);
    }
    let balls_disjoint = (0..g1.edge_count()).all(|e| g1.edge_segment(e).len() > 2.0 * eps);
    Ok(ApproxParams {
        alpha: 0.5 * min_angle,
        balls_disjoint,
    })
}

/// Approximate strong decision for plane graphs with disjoint endpoint
/// balls: NO is exact; YES means the distance is at most
/// `eps / sin(alpha)`.
pub fn decide_approx_strong_plane(
    g1: &EmbeddedGraph,
    g2: &EmbeddedGraph,
    eps: f64,
) -> Result<DecisionOutcome, DecisionError> {
    if !(eps > 0.0) {
        return Err(DecisionError::InvalidEps(eps));
    }
    if !is_plane(g1) || !is_plane(g2) {
        return Err(DecisionError::PreconditionViolated(
            "both graphs must be plane".into(),
        ));
    }
    let params = approx_params(g1, eps)?;
    if !params.balls_disjoint {
        return Err(DecisionError::PreconditionViolated(
            "eps-balls of adjacent vertices must be disjoint".into(),
        ));
    }
    let factor = 1.0 / params.alpha.sin();

    let comps1 = connected_components(g1);
    let comps2 = connected_components(g2);
    let state = prepare(g1, g2, eps, Mode::Strong);
    let mut comp2_of_vertex = vec![usize::MAX; g2.vertex_count()];
    for (ci, comp) in comps2.iter().enumerate() {
        for &v in comp {
            comp2_of_vertex[v] = ci;
        }
    }
    let mut survivors_best = vec![0usize; g1.vertex_count()];
    let mut ok_per_comp = vec![false; comps1.len()];
    for c2 in 0..comps2.len() {
        let mut initial = Survivors::all(&state.placements);
        for (v, pls) in state.placements.per_vertex.iter().enumerate() {
            for (i, pl) in pls.iter().enumerate() {
                let host = pl
                    .portions
                    .first()
                    .map(|&(e, _)| comp2_of_vertex[g2.edge(e)[0]])
                    .unwrap_or(usize::MAX);
                initial.alive[v][i] = host == c2;
            }
        }
        let (survivors, _) = prune_invalid(
            g1,
            &state.placements,
            &state.reach,
            Mode::Strong,
            Some(&initial),
        )?;
        for v in 0..g1.vertex_count() {
            survivors_best[v] = survivors_best[v].max(survivors.count(v));
        }
        for (ci, comp) in comps1.iter().enumerate() {
            if !ok_per_comp[ci] && comp.iter().all(|&v| survivors.count(v) > 0) {
                ok_per_comp[ci] = true;
            }
        }
    }
    let yes = ok_per_comp.iter().all(|&b| b);
    Ok(DecisionOutcome {
        answer: if yes { Answer::YesApprox } else { Answer::No },
        method: if yes { Method::Approx } else { Method::EmptyPlacement },
        witness: None,
        approx_factor: if yes { Some(factor) } else { None },
        notes: format!("alpha = {:.6} rad", params.alpha),
        survivors_per_vertex: survivors_best,
        stats: DecisionStats {
            reach_expansions: state.reach.stats.expansions,
            placements_total: state.placements.per_vertex.iter().map(|p| p.len()).sum(),
            search_nodes: 0,
        },
    })
}
