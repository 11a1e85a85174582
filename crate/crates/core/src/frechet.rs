//! Curve-level distance kernels.
//!
//! The decision pipeline only ever compares a straight `G1` edge against a
//! path in `G2`, which keeps the strong decision linear: every free-space
//! cell of a segment-vs-segment pair is convex, so propagating a single
//! lower bound along the path is exact. The general polyline-vs-polyline
//! decisions exist for the property-test suite and the optimizer brackets.

use crate::geometry::{
    cross, dot, free_interval, point_segment_distance, segment_segment_distance, Point2, Segment,
    EPS_GEOM,
};

/// A polygonal curve. Consecutive duplicate points are collapsed on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pts: Vec<Point2>,
}

impl Polyline {
    pub fn new(pts: Vec<Point2>) -> Polyline {
        let mut out: Vec<Point2> = Vec::with_capacity(pts.len());
        for p in pts {
            assert!(p.is_finite(), "non-finite polyline coordinate");
            if out.last().map_or(true, |q| q.dist(p) > 1e-12) {
                out.push(p);
            }
        }
        Polyline { pts: out }
    }

    pub fn points(&self) -> &[Point2] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.pts.clone();
        pts.reverse();
        Polyline { pts }
    }
}

/// Decides whether the Fréchet distance between the straight segment `e`
/// and the path `path` is at most `eps`.
///
/// Left-to-right lower-bound propagation over the path vertices: the state
/// after vertex `i` is the smallest parameter of `e` that a monotone
/// matching can have reached. A single-point path is legal (degenerate
/// placements) and reduces to the two endpoint checks.
pub fn strong_decide_segment_path(e: Segment, path: &[Point2], eps: f64) -> bool {
    assert!(!path.is_empty(), "empty path");
    let tol = EPS_GEOM;
    if path.len() == 1 {
        return e.a.dist(path[0]) <= eps + tol && e.b.dist(path[0]) <= eps + tol;
    }
    if e.a.dist(path[0]) > eps + tol {
        return false;
    }
    let mut lower = 0.0f64;
    for p in &path[1..] {
        match free_interval(e, *p, eps) {
            None => return false,
            Some(iv) => {
                lower = lower.max(iv.lo());
                if lower > iv.hi() + tol {
                    return false;
                }
            }
        }
    }
    e.b.dist(*path.last().unwrap()) <= eps + tol
}

/// The weak Fréchet distance between a straight segment and a path equals
/// the maximum of the endpoint distances and the Hausdorff distance.
pub fn weak_value_segment_path(e: Segment, path: &[Point2]) -> f64 {
    assert!(!path.is_empty(), "empty path");
    let d_start = e.a.dist(path[0]);
    let d_end = e.b.dist(*path.last().unwrap());
    d_start.max(d_end).max(hausdorff_segment_path(e, path))
}

/// Symmetric Hausdorff distance between segment `e` and the path.
///
/// Direction path -> e is attained at a path vertex (distance to a segment
/// is convex along each path segment). Direction e -> path is the maximum
/// of the lower envelope of the per-segment distance functions along `e`;
/// each function is convex, so the maximum sits at `t = 0`, `t = 1` or a
/// crossing of two envelope members — all roots of piecewise-quadratic
/// equalities, enumerated exactly.
pub fn hausdorff_segment_path(e: Segment, path: &[Point2]) -> f64 {
    assert!(!path.is_empty(), "empty path");
    let path_to_e = path
        .iter()
        .map(|&p| point_segment_distance(p, e))
        .fold(0.0, f64::max);

    let segs: Vec<Segment> = if path.len() == 1 {
        vec![Segment::new(path[0], path[0])]
    } else {
        path.windows(2).map(|w| Segment::new(w[0], w[1])).collect()
    };

    let mut cands: Vec<f64> = vec![0.0, 1.0];
    let pieces: Vec<Vec<Quad>> = segs.iter().map(|s| dist_sq_pieces(e, *s)).collect();
    for ps in &pieces {
        for q in ps {
            cands.extend(q.domain_breaks());
            cands.extend(q.stationary());
        }
    }
    for i in 0..pieces.len() {
        for j in (i + 1)..pieces.len() {
            for qi in &pieces[i] {
                for qj in &pieces[j] {
                    quad_roots(
                        qi.a - qj.a,
                        qi.b - qj.b,
                        qi.c - qj.c,
                        &mut cands,
                    );
                }
            }
        }
    }

    let mut e_to_path = 0.0f64;
    for &t in &cands {
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let p = e.eval(t);
        let d = segs
            .iter()
            .map(|s| point_segment_distance(p, *s))
            .fold(f64::INFINITY, f64::min);
        e_to_path = e_to_path.max(d);
    }
    path_to_e.max(e_to_path)
}

/// One piece of `dist^2(e(t), segment)` as a quadratic in `t`, valid on
/// `[t_lo, t_hi]`.
struct Quad {
    a: f64,
    b: f64,
    c: f64,
    t_lo: f64,
    t_hi: f64,
}

impl Quad {
    fn domain_breaks(&self) -> Vec<f64> {
        let mut v = Vec::new();
        if self.t_lo > 0.0 && self.t_lo < 1.0 {
            v.push(self.t_lo);
        }
        if self.t_hi > 0.0 && self.t_hi < 1.0 {
            v.push(self.t_hi);
        }
        v
    }

    fn stationary(&self) -> Option<f64> {
        if self.a.abs() > f64::MIN_POSITIVE {
            Some(-self.b / (2.0 * self.a))
        } else {
            None
        }
    }
}

fn dist_sq_pieces(e: Segment, s: Segment) -> Vec<Quad> {
    let de = (e.b.x - e.a.x, e.b.y - e.a.y);
    let point_piece = |p: Point2, t_lo: f64, t_hi: f64| -> Quad {
        let f = (e.a.x - p.x, e.a.y - p.y);
        Quad {
            a: de.0 * de.0 + de.1 * de.1,
            b: 2.0 * dot(f.0, f.1, de.0, de.1),
            c: f.0 * f.0 + f.1 * f.1,
            t_lo,
            t_hi,
        }
    };
    let d = (s.b.x - s.a.x, s.b.y - s.a.y);
    let len_sq = d.0 * d.0 + d.1 * d.1;
    if len_sq <= f64::MIN_POSITIVE {
        return vec![point_piece(s.a, 0.0, 1.0)];
    }
    // projection parameter u(t) = u0 + u1 * t
    let u0 = dot(e.a.x - s.a.x, e.a.y - s.a.y, d.0, d.1) / len_sq;
    let u1 = dot(de.0, de.1, d.0, d.1) / len_sq;
    // perpendicular distance h(t) = (h0 + h1 * t) / |d|
    let h0 = cross(e.a.x - s.a.x, e.a.y - s.a.y, d.0, d.1);
    let h1 = cross(de.0, de.1, d.0, d.1);
    let inv = 1.0 / len_sq;
    let perp = |t_lo: f64, t_hi: f64| -> Quad {
        Quad {
            a: h1 * h1 * inv,
            b: 2.0 * h0 * h1 * inv,
            c: h0 * h0 * inv,
            t_lo,
            t_hi,
        }
    };
    if u1.abs() <= f64::MIN_POSITIVE {
        // projection constant along e
        return if u0 < 0.0 {
            vec![point_piece(s.a, 0.0, 1.0)]
        } else if u0 > 1.0 {
            vec![point_piece(s.b, 0.0, 1.0)]
        } else {
            vec![perp(0.0, 1.0)]
        };
    }
    let t_at_0 = -u0 / u1;
    let t_at_1 = (1.0 - u0) / u1;
    let (tq0, tq1) = if t_at_0 <= t_at_1 {
        (t_at_0, t_at_1)
    } else {
        (t_at_1, t_at_0)
    };
    let (first_pt, last_pt) = if u1 > 0.0 { (s.a, s.b) } else { (s.b, s.a) };
    vec![
        point_piece(first_pt, f64::NEG_INFINITY, tq0),
        perp(tq0, tq1),
        point_piece(last_pt, tq1, f64::INFINITY),
    ]
}

fn quad_roots(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    if a.abs() <= 1e-30 {
        if b.abs() > 1e-30 {
            out.push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q.abs() > f64::MIN_POSITIVE {
        out.push(q / a);
        out.push(c / q);
    } else {
        out.push(0.0);
    }
}

/// Classic free-space decision for the Fréchet distance of two polylines,
/// `O(nm)`. Both curves need at least two points.
pub fn strong_decide_polyline(f: &Polyline, g: &Polyline, eps: f64) -> bool {
    let fp = f.points();
    let gp = g.points();
    assert!(fp.len() >= 2 && gp.len() >= 2, "polylines need >= 2 points");
    let tol = EPS_GEOM;
    let cols = fp.len() - 1;
    let rows = gp.len() - 1;

    let fseg = |i: usize| Segment::new(fp[i], fp[i + 1]);
    let gseg = |j: usize| Segment::new(gp[j], gp[j + 1]);

    if fp[0].dist(gp[0]) > eps + tol || fp[cols].dist(gp[rows]) > eps + tol {
        return false;
    }

    // Reachable sub-intervals of the vertical boundaries (f vertex i within
    // g segment j) and horizontal boundaries (f segment i at g vertex j).
    let mut rv: Vec<Vec<Option<(f64, f64)>>> = vec![vec![None; rows]; cols + 1];
    let mut rh: Vec<Vec<Option<(f64, f64)>>> = vec![vec![None; cols]; rows + 1];

    let vfree = |i: usize, j: usize| free_interval(gseg(j), fp[i], eps);
    let hfree = |i: usize, j: usize| free_interval(fseg(i), gp[j], eps);

    if let Some(iv) = vfree(0, 0) {
        if iv.lo() <= tol {
            rv[0][0] = Some((0.0, iv.hi()));
        }
    }
    if let Some(iv) = hfree(0, 0) {
        if iv.lo() <= tol {
            rh[0][0] = Some((0.0, iv.hi()));
        }
    }

    for i in 0..cols {
        for j in 0..rows {
            let left = rv[i][j];
            let bottom = rh[j][i];
            if left.is_none() && bottom.is_none() {
                continue;
            }
            if let Some(iv) = vfree(i + 1, j) {
                let reach = if bottom.is_some() {
                    Some((iv.lo(), iv.hi()))
                } else {
                    let (a, _) = left.unwrap();
                    if iv.hi() + tol >= a {
                        Some((iv.lo().max(a), iv.hi()))
                    } else {
                        None
                    }
                };
                rv[i + 1][j] = reach;
            }
            if let Some(iv) = hfree(i, j + 1) {
                let reach = if left.is_some() {
                    Some((iv.lo(), iv.hi()))
                } else {
                    let (a, _) = bottom.unwrap();
                    if iv.hi() + tol >= a {
                        Some((iv.lo().max(a), iv.hi()))
                    } else {
                        None
                    }
                };
                rh[j + 1][i] = reach;
            }
        }
    }

    let top_right_v = rv[cols][rows - 1].map_or(false, |(_, b)| b >= 1.0 - tol);
    let top_right_h = rh[rows][cols - 1].map_or(false, |(_, b)| b >= 1.0 - tol);
    top_right_v || top_right_h
}

/// Weak Fréchet decision: connectivity (non-monotone) search over the
/// free-space cells. With `boundary_fixed` the path must join the two
/// corners; otherwise any free point on the left boundary must connect to
/// any free point on the right boundary.
pub fn weak_decide_polyline(f: &Polyline, g: &Polyline, eps: f64, boundary_fixed: bool) -> bool {
    let fp = f.points();
    let gp = g.points();
    assert!(fp.len() >= 2 && gp.len() >= 2, "polylines need >= 2 points");
    let tol = EPS_GEOM;
    let cols = fp.len() - 1;
    let rows = gp.len() - 1;
    let fseg = |i: usize| Segment::new(fp[i], fp[i + 1]);
    let gseg = |j: usize| Segment::new(gp[j], gp[j + 1]);

    let cell_free =
        |i: usize, j: usize| segment_segment_distance(fseg(i), gseg(j)).0 <= eps + tol;
    let vopen = |i: usize, j: usize| free_interval(gseg(j), fp[i], eps).is_some();
    let hopen = |i: usize, j: usize| free_interval(fseg(i), gp[j], eps).is_some();

    let mut start_cells: Vec<(usize, usize)> = Vec::new();
    if boundary_fixed {
        if fp[0].dist(gp[0]) <= eps + tol {
            start_cells.push((0, 0));
        }
    } else {
        for j in 0..rows {
            if vopen(0, j) {
                start_cells.push((0, j));
            }
        }
    }

    let is_target = |i: usize, j: usize| -> bool {
        if boundary_fixed {
            i == cols - 1 && j == rows - 1 && fp[cols].dist(gp[rows]) <= eps + tol
        } else {
            i == cols - 1 && vopen(cols, j)
        }
    };

    let mut seen = vec![vec![false; rows]; cols];
    let mut queue: std::collections::VecDeque<(usize, usize)> = std::collections::VecDeque::new();
    for (i, j) in start_cells {
        if cell_free(i, j) && !seen[i][j] {
            seen[i][j] = true;
            queue.push_back((i, j));
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        if is_target(i, j) {
            return true;
        }
        let mut push = |ni: usize, nj: usize, open: bool| {
            if open && !seen[ni][nj] && cell_free(ni, nj) {
                seen[ni][nj] = true;
                queue.push_back((ni, nj));
            }
        };
        if i + 1 < cols {
            push(i + 1, j, vopen(i + 1, j));
        }
        if i > 0 {
            push(i - 1, j, vopen(i, j));
        }
        if j + 1 < rows {
            push(i, j + 1, hopen(i, j + 1));
        }
        if j > 0 {
            push(i, j - 1, hopen(i, j));
        }
    }
    false
}

/// Fréchet distance of two polylines in the orientation-choosing variant
/// (minimum over running `g` forward and reversed), via bisection on the
/// decision to absolute precision `tol`.
pub fn strong_distance_polyline(f: &Polyline, g: &Polyline, tol: f64) -> f64 {
    bisect_value(
        |eps| strong_decide_polyline(f, g, eps) || strong_decide_polyline(f, &g.reversed(), eps),
        f,
        g,
        tol,
    )
}

/// Weak Fréchet distance via bisection; `boundary_fixed = false` gives the
/// variant without boundary restriction.
pub fn weak_distance_polyline(f: &Polyline, g: &Polyline, boundary_fixed: bool, tol: f64) -> f64 {
    bisect_value(
        |eps| {
            weak_decide_polyline(f, g, eps, boundary_fixed)
                || weak_decide_polyline(f, &g.reversed(), eps, boundary_fixed)
        },
        f,
        g,
        tol,
    )
}

fn bisect_value<F: Fn(f64) -> bool>(decide: F, f: &Polyline, g: &Polyline, tol: f64) -> f64 {
    let mut hi = 0.0f64;
    for p in f.points() {
        for q in g.points() {
            hi = hi.max(p.dist(*q));
        }
    }
    if decide(0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    debug_assert!(decide(hi + 1e-9));
    let mut hi = hi + 1e-9;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if decide(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(pt(ax, ay), pt(bx, by))
    }

    #[test]
    fn strong_segment_path_examples() {
        let e = seg(0.0, 0.0, 2.0, 0.0);
        assert!(strong_decide_segment_path(
            e,
            &[pt(0.0, 0.0), pt(1.0, 0.5), pt(2.0, 0.0)],
            0.5
        ));
        // Zigzag forcing backtracking on e: weakly fine, strongly not.
        let zigzag = [pt(0.0, 0.0), pt(2.0, 0.0), pt(0.0, 0.0), pt(2.0, 0.0)];
        assert!(!strong_decide_segment_path(e, &zigzag, 0.3));
        assert!(weak_value_segment_path(e, &zigzag) <= 0.3);
        // identity
        assert!(strong_decide_segment_path(e, &[e.a, e.b], 0.0));
    }

    #[test]
    fn strong_segment_path_single_point() {
        let e = seg(0.0, 0.0, 1.0, 0.0);
        assert!(strong_decide_segment_path(e, &[pt(0.5, 0.0)], 0.5));
        assert!(!strong_decide_segment_path(e, &[pt(0.5, 0.0)], 0.4));
    }

    #[test]
    fn weak_value_examples() {
        let e = seg(0.0, 0.0, 2.0, 0.0);
        assert_relative_eq!(weak_value_segment_path(e, &[e.a, e.b]), 0.0);
        assert_relative_eq!(
            weak_value_segment_path(e, &[pt(0.0, 0.0), pt(1.0, 1.0), pt(2.0, 0.0)]),
            1.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            weak_value_segment_path(e, &[pt(0.5, 0.0), pt(2.0, 0.0)]),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hausdorff_examples() {
        let e = seg(0.0, 0.0, 4.0, 0.0);
        assert_relative_eq!(hausdorff_segment_path(e, &[e.b, e.a]), 0.0);
        assert_relative_eq!(
            hausdorff_segment_path(
                e,
                &[pt(0.0, 0.0), pt(0.0, 1.0), pt(4.0, 1.0), pt(4.0, 0.0)]
            ),
            1.0,
            epsilon = 1e-9
        );
        let e2 = seg(0.0, 0.0, 1.0, 0.0);
        assert_relative_eq!(
            hausdorff_segment_path(e2, &[pt(0.0, 0.0), pt(0.5, 0.0)]),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn polyline_strong_examples() {
        let f = Polyline::new(vec![pt(0.0, 0.0), pt(2.0, 0.0)]);
        assert!(strong_decide_polyline(&f, &f, 0.0));

        let g = Polyline::new(vec![pt(0.0, 1.0), pt(2.0, 1.0)]);
        assert!(strong_decide_polyline(&f, &g, 1.0));
        assert!(!strong_decide_polyline(&f, &g, 0.99));

        let zig = Polyline::new(vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(0.0, 0.0), pt(2.0, 0.0)]);
        let mono = Polyline::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]);
        assert!(!strong_decide_polyline(&zig, &mono, 0.99));
        assert!(strong_decide_polyline(&zig, &mono, 2.0));
    }

    #[test]
    fn polyline_weak_examples() {
        // 1D zigzag against a straight cover: weak distance 0 with fixed
        // boundaries.
        let f = Polyline::new(vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(0.0, 0.0), pt(2.0, 0.0)]);
        let g = Polyline::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]);
        assert!(weak_decide_polyline(&f, &g, 0.0, true));

        let h = Polyline::new(vec![pt(0.0, 5.0), pt(2.0, 5.0)]);
        assert!(!weak_decide_polyline(&g, &h, 4.9, true));
        assert!(weak_decide_polyline(&g, &h, 5.0, true));
    }

    #[test]
    fn strong_implies_weak_value() {
        let e = seg(0.0, 0.0, 3.0, 0.0);
        let path = [pt(0.1, 0.2), pt(1.0, -0.4), pt(2.2, 0.3), pt(3.0, 0.1)];
        for eps in [0.3, 0.45, 0.6, 1.0] {
            if strong_decide_segment_path(e, &path, eps) {
                assert!(weak_value_segment_path(e, &path) <= eps + 1e-9);
            }
        }
    }

    fn small_pt() -> impl Strategy<Value = Point2> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| pt(x, y))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn segment_path_agrees_with_polyline_decision(
            a in small_pt(), b in small_pt(),
            path in proptest::collection::vec(small_pt(), 2..6),
            eps in 0.1..4.0f64,
        ) {
            prop_assume!(a.dist(b) > 1e-6);
            let e = Segment::new(a, b);
            let poly = Polyline::new(path.clone());
            prop_assume!(poly.len() >= 2);
            let f = Polyline::new(vec![a, b]);
            let d1 = strong_decide_segment_path(e, poly.points(), eps);
            let d2 = strong_decide_polyline(&f, &poly, eps);
            // Skip razor-thin margins where the tolerance may differ.
            let v = weak_value_segment_path(e, poly.points());
            prop_assume!((v - eps).abs() > 1e-6);
            prop_assert_eq!(d1, d2);
        }

        #[test]
        fn hausdorff_matches_dense_sampling(
            a in small_pt(), b in small_pt(),
            path in proptest::collection::vec(small_pt(), 1..6),
        ) {
            prop_assume!(a.dist(b) > 1e-6);
            let e = Segment::new(a, b);
            let exact = hausdorff_segment_path(e, &path);
            // dense sampling oracle
            let n = 2000;
            let segs: Vec<Segment> = if path.len() == 1 {
                vec![Segment::new(path[0], path[0])]
            } else {
                path.windows(2).map(|w| Segment::new(w[0], w[1])).collect()
            };
            let mut approx_val = 0.0f64;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let p = e.eval(t);
                let d = segs.iter().map(|s| point_segment_distance(p, *s)).fold(f64::INFINITY, f64::min);
                approx_val = approx_val.max(d);
            }
            for s in &segs {
                for i in 0..=n {
                    let t = i as f64 / n as f64;
                    approx_val = approx_val.max(point_segment_distance(s.eval(t), e));
                }
            }
            prop_assert!(exact >= approx_val - 1e-9, "exact {exact} < sampled {approx_val}");
            prop_assert!(exact <= approx_val + 0.05, "exact {exact} >> sampled {approx_val}");
        }

        #[test]
        fn decisions_monotone_in_eps(
            a in small_pt(), b in small_pt(),
            path in proptest::collection::vec(small_pt(), 1..6),
            eps in 0.05..3.0f64, bump in 0.0..2.0f64,
        ) {
            prop_assume!(a.dist(b) > 1e-6);
            let e = Segment::new(a, b);
            if strong_decide_segment_path(e, &path, eps) {
                prop_assert!(strong_decide_segment_path(e, &path, eps + bump));
            }
        }

        #[test]
        fn reversal_symmetry(
            a in small_pt(), b in small_pt(),
            path in proptest::collection::vec(small_pt(), 1..6),
            eps in 0.05..3.0f64,
        ) {
            prop_assume!(a.dist(b) > 1e-6);
            let e = Segment::new(a, b);
            let mut rev = path.clone();
            rev.reverse();
            let v = weak_value_segment_path(e, &path);
            prop_assume!((v - eps).abs() > 1e-6);
            prop_assert_eq!(
                strong_decide_segment_path(e, &path, eps),
                strong_decide_segment_path(e.reversed(), &rev, eps)
            );
        }
    }
}
