//! Distances between straight-line embedded graphs.
//!
//! Two embedded graphs are compared by mapping one continuously onto the
//! other: every vertex of `G1` goes to a point on an edge of `G2`, and every
//! edge of `G1` goes to a simple path in `G2`. The directed graph distance is
//! the smallest `eps` for which such a mapping exists with every edge within
//! (strong or weak) Fréchet distance `eps` of its image path; the undirected
//! distance is the maximum over both directions.
//!
//! The crate is organised around a four-step decision pipeline:
//!
//! 1. [`placements::compute_placements`] — connected pieces of `G2` inside
//!    the `eps`-ball of each `G1` vertex,
//! 2. [`placements::compute_reachability`] — which placement pairs admit an
//!    edge image inside the `eps`-tube,
//! 3. [`placements::prune_invalid`] — fixpoint deletion of placements that
//!    cannot support all incident edges,
//! 4. [`decision::decide_directed`] — per-component dispatch to the tree,
//!    plane-weak, chordless-cycle or brute-force deciders.
//!
//! [`optimize::compute_distance`] turns the decision procedure into an exact
//! distance by binary search over the enumerated critical values, and
//! [`oracle::oracle_decide`] provides an independent brute-force reference
//! for tiny instances.
//!
//! Deciding the strong distance is NP-hard in general (and remains NP-hard
//! for plane graphs), so the exact deciders are exponential with explicit
//! budgets; the tree and plane-weak cases are polynomial.

pub mod decision;
pub mod frechet;
pub mod geometry;
pub mod graph;
pub mod instances;
pub mod optimize;
pub mod oracle;
pub(crate) mod par;
pub mod placements;

pub use geometry::{Interval, Point2, Segment, Tolerance};
pub use graph::{EmbeddedGraph, GraphError};
pub use placements::{Mode, PointOnGraph};
