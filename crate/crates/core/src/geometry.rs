//! Planar primitives: distances, ball/tube clipping, free intervals and the
//! critical-value formulas everything else is built on.
//!
//! All predicates here compare with a symmetric slack of [`Tolerance`]
//! (default `1e-9`), so "within distance `eps`" means `<= eps + tol`. The
//! decision procedures inherit this, which makes the boundary case — `eps`
//! exactly at a critical value — resolve to YES, matching the fact that the
//! distance infimum is attained on closed sets.

/// Comparison slack used by every geometric predicate in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps_geom: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps_geom: 1e-9 }
    }
}

/// Default symmetric slack for geometric predicates.
pub const EPS_GEOM: f64 = 1e-9;

/// A point of the plane. Coordinates must be finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point2) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(&self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

pub(crate) fn dot(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * bx + ay * by
}

pub(crate) fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

/// A closed straight segment. Degenerate segments (`a == b`) are permitted
/// only where an operation says so.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn eval(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }

    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn len_sq(&self) -> f64 {
        self.a.dist_sq(self.b)
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.b, self.a)
    }
}

/// A closed sub-interval of `[0, 1]`, used for edge parameter ranges.
/// Emptiness is expressed as `Option<Interval>` by the clip operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Builds an interval; `lo` and `hi` are clamped to `[0, 1]` and must
    /// satisfy `lo <= hi` after clamping.
    pub fn new(lo: f64, hi: f64) -> Interval {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(0.0, 1.0);
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(t: f64) -> Interval {
        let t = t.clamp(0.0, 1.0);
        Interval { lo: t, hi: t }
    }

    pub fn full() -> Interval {
        Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, t: f64, tol: f64) -> bool {
        t >= self.lo - tol && t <= self.hi + tol
    }

    pub fn subset_of(&self, other: &Interval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }
}

/// Parameter of the point on `s` closest to `p` (0 for degenerate `s`).
pub fn closest_param(p: Point2, s: Segment) -> f64 {
    let dx = s.b.x - s.a.x;
    let dy = s.b.y - s.a.y;
    let len_sq = dx * dx + dy * dy;
    if len_sq <= f64::MIN_POSITIVE {
        return 0.0;
    }
    (dot(p.x - s.a.x, p.y - s.a.y, dx, dy) / len_sq).clamp(0.0, 1.0)
}

/// Euclidean distance from `p` to the closed segment `s`.
/// Degenerate `s` is allowed and yields `|p - s.a|`.
pub fn point_segment_distance(p: Point2, s: Segment) -> f64 {
    p.dist(s.eval(closest_param(p, s)))
}

/// Solves `|e(t) - w| <= eps` for `t in [0, 1]`.
///
/// `e` must be non-degenerate and `eps > 0`. The result is the (possibly
/// empty) closed parameter interval; emptiness is a value, not an error.
/// When the quadratic narrowly misses but the true distance is within
/// `eps + tol`, the interval degenerates to the closest parameter so that
/// non-emptiness agrees with `point_segment_distance(w, e) <= eps + tol`.
pub fn free_interval(e: Segment, w: Point2, eps: f64) -> Option<Interval> {
    free_interval_tol(e, w, eps, EPS_GEOM)
}

pub fn free_interval_tol(e: Segment, w: Point2, eps: f64, tol: f64) -> Option<Interval> {
    let dx = e.b.x - e.a.x;
    let dy = e.b.y - e.a.y;
    let fx = e.a.x - w.x;
    let fy = e.a.y - w.y;
    let a = dx * dx + dy * dy;
    if a <= f64::MIN_POSITIVE {
        // Degenerate reference segment: the interval is all or nothing.
        return if e.a.dist(w) <= eps + tol {
            Some(Interval::full())
        } else {
            None
        };
    }
    let b = 2.0 * dot(fx, fy, dx, dy);
    let c = fx * fx + fy * fy - eps * eps;
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        // Citardauq form: q carries the dominant magnitude, avoiding
        // cancellation when b ~ +-sqrt(disc).
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        let (mut t0, mut t1) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / a, c / q)
        };
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        let lo = t0.max(0.0);
        let hi = t1.min(1.0);
        if lo <= hi {
            return Some(Interval::new(lo, hi));
        }
    }
    // Near-miss fallback keeps the equivalence with the distance predicate.
    let t = closest_param(w, e);
    if e.eval(t).dist(w) <= eps + tol {
        Some(Interval::point(t))
    } else {
        None
    }
}

/// Parameter sub-interval of `s` inside the closed disk around `c`.
/// A single interval by convexity of the disk.
pub fn clip_segment_to_disk(s: Segment, c: Point2, r: f64) -> Option<Interval> {
    free_interval(s, c, r)
}

/// Parameter sub-interval of `s` inside the stadium
/// `T_eps(e) = { x : dist(x, e) <= eps }`.
///
/// The stadium is convex and `dist(., e)` is convex along `s`, so the result
/// is a single interval. Computed as the union of the clips against the two
/// end disks and the central rectangle, which are convex pieces covering the
/// stadium.
pub fn clip_segment_to_tube(s: Segment, e: Segment, eps: f64) -> Option<Interval> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut any = false;
    for iv in [
        free_interval(s, e.a, eps),
        free_interval(s, e.b, eps),
        clip_segment_to_slab(s, e, eps),
    ]
    .into_iter()
    .flatten()
    {
        lo = lo.min(iv.lo());
        hi = hi.max(iv.hi());
        any = true;
    }
    if any {
        return Some(Interval::new(lo, hi));
    }
    // The pieces can all narrowly miss while the segment still grazes the
    // stadium boundary; fall back to the exact minimum distance.
    let (d, t) = segment_segment_distance(s, e);
    if d <= eps + EPS_GEOM {
        Some(Interval::point(t))
    } else {
        None
    }
}

/// Clips `s` against the rectangle part of the stadium: within `eps` of the
/// line through `e` and between the two cap lines perpendicular at `e.a`,
/// `e.b`. Liang-Barsky style half-plane clipping.
fn clip_segment_to_slab(s: Segment, e: Segment, eps: f64) -> Option<Interval> {
    let dx = e.b.x - e.a.x;
    let dy = e.b.y - e.a.y;
    let len = (dx * dx + dy * dy).sqrt();
    if len <= f64::MIN_POSITIVE {
        return None;
    }
    let (ux, uy) = (dx / len, dy / len); // axis direction
    let (nx, ny) = (-uy, ux); // normal

    // Each constraint: g(p) <= bound with g affine, evaluated at s(t).
    // along-axis coordinate q(p) = (p - e.a) . u in [0, len]
    // normal coordinate   r(p) = (p - e.a) . n in [-eps, eps]
    let qa = dot(s.a.x - e.a.x, s.a.y - e.a.y, ux, uy);
    let qb = dot(s.b.x - e.a.x, s.b.y - e.a.y, ux, uy);
    let ra = dot(s.a.x - e.a.x, s.a.y - e.a.y, nx, ny);
    let rb = dot(s.b.x - e.a.x, s.b.y - e.a.y, nx, ny);

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // (value at t=0, value at t=1, lower bound, upper bound)
    for (v0, v1, lb, ub) in [(qa, qb, 0.0, len), (ra, rb, -eps, eps)] {
        let dv = v1 - v0;
        if dv.abs() <= f64::MIN_POSITIVE {
            if v0 < lb || v0 > ub {
                return None;
            }
            continue;
        }
        let t_at_lb = (lb - v0) / dv;
        let t_at_ub = (ub - v0) / dv;
        let (tmin, tmax) = if t_at_lb <= t_at_ub {
            (t_at_lb, t_at_ub)
        } else {
            (t_at_ub, t_at_lb)
        };
        lo = lo.max(tmin);
        hi = hi.min(tmax);
        if lo > hi {
            return None;
        }
    }
    Some(Interval::new(lo, hi))
}

/// Minimum distance between two closed segments together with the parameter
/// on `s` where it is attained.
pub fn segment_segment_distance(s: Segment, e: Segment) -> (f64, f64) {
    if segments_properly_intersect(s, e) {
        // Intersection parameter on s via the cross-ratio.
        let d1x = s.b.x - s.a.x;
        let d1y = s.b.y - s.a.y;
        let d2x = e.b.x - e.a.x;
        let d2y = e.b.y - e.a.y;
        let denom = cross(d1x, d1y, d2x, d2y);
        if denom.abs() > f64::MIN_POSITIVE {
            let t = cross(e.a.x - s.a.x, e.a.y - s.a.y, d2x, d2y) / denom;
            return (0.0, t.clamp(0.0, 1.0));
        }
        return (0.0, 0.0);
    }
    let mut best = (f64::INFINITY, 0.0);
    let mut consider = |d: f64, t: f64| {
        if d < best.0 {
            best = (d, t);
        }
    };
    consider(point_segment_distance(s.a, e), 0.0);
    consider(point_segment_distance(s.b, e), 1.0);
    let ta = closest_param(e.a, s);
    consider(e.a.dist(s.eval(ta)), ta);
    let tb = closest_param(e.b, s);
    consider(e.b.dist(s.eval(tb)), tb);
    best
}

/// True iff the two closed segments share at least one point (exact
/// orientation tests, no tolerance).
pub fn segments_properly_intersect(s: Segment, e: Segment) -> bool {
    let o1 = orient(s.a, s.b, e.a);
    let o2 = orient(s.a, s.b, e.b);
    let o3 = orient(e.a, e.b, s.a);
    let o4 = orient(e.a, e.b, s.b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point2, s: Segment, o: f64| -> bool {
        o == 0.0
            && p.x >= s.a.x.min(s.b.x)
            && p.x <= s.a.x.max(s.b.x)
            && p.y >= s.a.y.min(s.b.y)
            && p.y <= s.a.y.max(s.b.y)
    };
    on(e.a, s, o1) || on(e.b, s, o2) || on(s.a, e, o3) || on(s.b, e, o4)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y)
}

/// Type-1 critical value: a new vertex placement emerges when a `G2` edge is
/// at distance exactly `eps` from a `G1` vertex.
pub fn critical_type1(v: Point2, g2_edge: Segment) -> f64 {
    point_segment_distance(v, g2_edge)
}

/// Type-2 critical value: two vertex placements merge at the `G2` vertex `w`
/// when it is at distance exactly `eps` from the `G1` vertex `v`.
pub fn critical_type2(v: Point2, w: Point2) -> f64 {
    v.dist(w)
}

/// Type-3 critical value defined by a `G2` vertex and a `G1` edge.
pub fn critical_type3_vertex(w: Point2, g1_edge: Segment) -> f64 {
    point_segment_distance(w, g1_edge)
}

/// Type-3 critical value defined by two `G2` vertices and a `G1` edge: if the
/// perpendicular bisector of `w1, w2` meets the edge at `q`, the value is
/// `|q - w1|`.
pub fn critical_type3_bisector(w1: Point2, w2: Point2, g1_edge: Segment) -> Option<f64> {
    let ux = w2.x - w1.x;
    let uy = w2.y - w1.y;
    if ux * ux + uy * uy <= f64::MIN_POSITIVE {
        return None;
    }
    let dx = g1_edge.b.x - g1_edge.a.x;
    let dy = g1_edge.b.y - g1_edge.a.y;
    let denom = 2.0 * dot(dx, dy, ux, uy);
    if denom.abs() <= f64::MIN_POSITIVE {
        // Bisector parallel to the edge; grazing cases contribute nothing
        // beyond the vertex-edge values.
        return None;
    }
    let rhs = (w2.x * w2.x + w2.y * w2.y) - (w1.x * w1.x + w1.y * w1.y)
        - 2.0 * dot(g1_edge.a.x, g1_edge.a.y, ux, uy);
    let t = rhs / denom;
    if !(-EPS_GEOM..=1.0 + EPS_GEOM).contains(&t) {
        return None;
    }
    Some(g1_edge.eval(t.clamp(0.0, 1.0)).dist(w1))
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
    fn point_segment_distance_cases() {
        assert_relative_eq!(
            point_segment_distance(pt(0.0, 1.0), seg(-1.0, 0.0, 1.0, 0.0)),
            1.0
        );
        assert_relative_eq!(
            point_segment_distance(pt(2.0, 0.0), seg(-1.0, 0.0, 1.0, 0.0)),
            1.0
        );
        // degenerate segment
        assert_relative_eq!(
            point_segment_distance(pt(3.0, 4.0), seg(0.0, 0.0, 0.0, 0.0)),
            5.0
        );
    }

    #[test]
    fn free_interval_cases() {
        // (10t-5)^2 + 1 <= 2  =>  t in [0.4, 0.6]
        let iv = free_interval(seg(0.0, 0.0, 10.0, 0.0), pt(5.0, 1.0), 2.0f64.sqrt()).unwrap();
        assert_relative_eq!(iv.lo(), 0.4, epsilon = 1e-12);
        assert_relative_eq!(iv.hi(), 0.6, epsilon = 1e-12);

        let iv = free_interval(seg(0.0, 0.0, 1.0, 0.0), pt(0.0, 0.0), 2.0).unwrap();
        assert_eq!((iv.lo(), iv.hi()), (0.0, 1.0));

        assert!(free_interval(seg(0.0, 0.0, 1.0, 0.0), pt(0.0, 5.0), 1.0).is_none());
    }

    #[test]
    fn clip_disk_cases() {
        let iv = clip_segment_to_disk(seg(-2.0, 0.0, 2.0, 0.0), pt(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(iv.lo(), 0.25, epsilon = 1e-12);
        assert_relative_eq!(iv.hi(), 0.75, epsilon = 1e-12);

        assert!(clip_segment_to_disk(seg(5.0, 5.0, 6.0, 6.0), pt(0.0, 0.0), 1.0).is_none());

        let iv = clip_segment_to_disk(seg(0.0, 0.0, 1.0, 0.0), pt(0.5, 0.0), 10.0).unwrap();
        assert_eq!((iv.lo(), iv.hi()), (0.0, 1.0));
    }

    #[test]
    fn clip_tube_cap_intersections() {
        // Horizontal line at eps/2 across a stadium of radius 1 around
        // [(0,0),(2,0)]: enters and leaves through the end caps at
        // x = -sqrt(3)/2 and x = 2 + sqrt(3)/2.
        let eps = 1.0;
        let s = seg(-1.0, 0.5, 3.0, 0.5);
        let e = seg(0.0, 0.0, 2.0, 0.0);
        let iv = clip_segment_to_tube(s, e, eps).unwrap();
        let x_lo = -1.0 + 4.0 * iv.lo();
        let x_hi = -1.0 + 4.0 * iv.hi();
        assert_relative_eq!(x_lo, -3.0f64.sqrt() / 2.0, epsilon = 1e-9);
        assert_relative_eq!(x_hi, 2.0 + 3.0f64.sqrt() / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn clip_tube_trivial_cases() {
        let e = seg(0.0, 0.0, 2.0, 0.0);
        assert!(clip_segment_to_tube(seg(0.0, 5.0, 2.0, 5.0), e, 1.0).is_none());
        let iv = clip_segment_to_tube(e, e, 1.0).unwrap();
        assert_eq!((iv.lo(), iv.hi()), (0.0, 1.0));
    }

    #[test]
    fn critical_value_cases() {
        assert_relative_eq!(critical_type2(pt(0.0, 0.0), pt(3.0, 4.0)), 5.0);

        let v = critical_type3_bisector(pt(0.0, 1.0), pt(2.0, 1.0), seg(0.0, 0.0, 2.0, 0.0));
        assert_relative_eq!(v.unwrap(), 2.0f64.sqrt(), epsilon = 1e-12);

        // bisector y = 2 misses the edge
        assert!(
            critical_type3_bisector(pt(0.0, 1.0), pt(0.0, 3.0), seg(0.0, 0.0, 2.0, 0.0)).is_none()
        );
    }

    fn finite_pt() -> impl Strategy<Value = Point2> {
        (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| pt(x, y))
    }

    fn nondeg_seg() -> impl Strategy<Value = Segment> {
        (finite_pt(), finite_pt())
            .prop_filter("non-degenerate", |(a, b)| a.dist(*b) > 1e-6)
            .prop_map(|(a, b)| Segment::new(a, b))
    }

    proptest! {
        #[test]
        fn free_interval_iff_within_distance(e in nondeg_seg(), w in finite_pt(), eps in 0.01..30.0f64) {
            let d = point_segment_distance(w, e);
            let iv = free_interval(e, w, eps);
            if d <= eps - 1e-9 {
                prop_assert!(iv.is_some());
            }
            if d > eps + 1e-9 {
                prop_assert!(iv.is_none());
            }
        }

        #[test]
        fn free_interval_monotone_in_eps(e in nondeg_seg(), w in finite_pt(),
                                         eps1 in 0.01..20.0f64, delta in 0.0..10.0f64) {
            let eps2 = eps1 + delta;
            if let Some(iv1) = free_interval(e, w, eps1) {
                let iv2 = free_interval(e, w, eps2).expect("monotone");
                prop_assert!(iv1.subset_of(&iv2, 1e-9));
            }
        }

        #[test]
        fn tube_clip_is_single_interval(s in nondeg_seg(), e in nondeg_seg(), eps in 0.05..20.0f64) {
            // Membership along s must match the clipped interval: convexity
            // means no second component can exist.
            let iv = clip_segment_to_tube(s, e, eps);
            for i in 0..=64 {
                let t = i as f64 / 64.0;
                let d = point_segment_distance(s.eval(t), e);
                match iv {
                    Some(iv) => {
                        if d <= eps - 1e-7 {
                            prop_assert!(iv.contains(t, 1e-7), "t={t} inside tube but outside clip");
                        }
                        if iv.contains(t, -1e-7) {
                            prop_assert!(d <= eps + 1e-7, "t={t} in clip but outside tube");
                        }
                    }
                    None => prop_assert!(d > eps - 1e-7),
                }
            }
        }

        #[test]
        fn outputs_invariant_under_rigid_motion(e in nondeg_seg(), w in finite_pt(),
                                                eps in 0.05..20.0f64,
                                                angle in 0.0..std::f64::consts::TAU,
                                                tx in -20.0..20.0f64, ty in -20.0..20.0f64) {
            let rot = |p: Point2| pt(
                p.x * angle.cos() - p.y * angle.sin() + tx,
                p.x * angle.sin() + p.y * angle.cos() + ty,
            );
            let e2 = Segment::new(rot(e.a), rot(e.b));
            let w2 = rot(w);
            let d1 = point_segment_distance(w, e);
            let d2 = point_segment_distance(w2, e2);
            prop_assert!((d1 - d2).abs() <= 1e-9 * (1.0 + d1.abs()));
            match (free_interval(e, w, eps), free_interval(e2, w2, eps)) {
                (Some(a), Some(b)) => {
                    prop_assert!((a.lo() - b.lo()).abs() <= 1e-7);
                    prop_assert!((a.hi() - b.hi()).abs() <= 1e-7);
                }
                (None, None) => {}
                // A boundary-grazing pair may flip across the tolerance.
                (a, b) => {
                    let d = point_segment_distance(w, e);
                    prop_assert!((d - eps).abs() <= 1e-6, "inconsistent: {a:?} {b:?}");
                }
            }
        }
    }
}
