//! Distances between loops and loop collections, the simple-collection
//! predicate, and the map from loop collections to crossing fingerprints.

use serde::{Deserialize, Serialize};

use crate::annuli::{annulus_distance, fingerprint, AnnulusFamily, CrossingFingerprint, PointSet};
use crate::error::{Error, Result};
use crate::lattice::{DiscreteLoop, GridGeometry, Orientation};
use crate::polygon::{dyadic_from_f64, DyadicPolygon, Location};

/// A closed polygonal curve through `points` (the closing point is not
/// repeated). A single point is a degenerate point loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyLoop {
    points: Vec<[f64; 2]>,
}

impl PolyLoop {
    pub fn new(mut points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::MalformedLoop("a loop needs at least one point".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::MalformedLoop("non-finite coordinate".into()));
        }
        while points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        Ok(PolyLoop { points })
    }

    /// The lattice loop in physical coordinates.
    pub fn from_discrete(l: &DiscreteLoop, geometry: GridGeometry) -> Self {
        PolyLoop { points: l.vertices().iter().map(|&p| geometry.to_physical(p)).collect() }
    }

    /// The axis-aligned rectangle `[x0, x1] × [y0, y1]`, traversed
    /// counterclockwise from its lower-left corner with a point every `step`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, step: f64) -> Self {
        let mut pts = Vec::new();
        let side = |a: [f64; 2], b: [f64; 2], pts: &mut Vec<[f64; 2]>| {
            let len = (b[0] - a[0]).abs() + (b[1] - a[1]).abs();
            let m = (len / step).round().max(1.0) as usize;
            for t in 0..m {
                let s = t as f64 / m as f64;
                pts.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        };
        side([x0, y0], [x1, y0], &mut pts);
        side([x1, y0], [x1, y1], &mut pts);
        side([x1, y1], [x0, y1], &mut pts);
        side([x0, y1], [x0, y0], &mut pts);
        PolyLoop { points: pts }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn is_point(&self) -> bool {
        self.points.len() == 1
    }

    pub fn reversed(&self) -> PolyLoop {
        let mut points = self.points.clone();
        points[1..].reverse();
        PolyLoop { points }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> PolyLoop {
        PolyLoop { points: self.points.iter().map(|p| [p[0] + dx, p[1] + dy]).collect() }
    }

    /// Twice the signed area (positive for counterclockwise loops).
    pub fn signed_area2(&self) -> f64 {
        let m = self.points.len();
        (0..m)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % m]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum()
    }

    pub fn orientation(&self) -> Orientation {
        let a = self.signed_area2();
        if a > 0.0 {
            Orientation::CounterClockwise
        } else if a < 0.0 {
            Orientation::Clockwise
        } else {
            Orientation::Undefined
        }
    }

    /// Euclidean diameter of the point set.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.max(dist(*p, *q));
            }
        }
        best
    }

    /// Closed segments of the curve.
    fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let m = self.points.len();
        (0..m).map(move |i| (self.points[i], self.points[(i + 1) % m]))
    }

    /// Whether distinct points and pairwise non-touching non-adjacent
    /// segments make this a simple closed curve.
    pub fn is_simple(&self) -> bool {
        let m = self.points.len();
        if m < 3 {
            return false;
        }
        for i in 0..m {
            for j in i + 1..m {
                if self.points[i] == self.points[j] {
                    return false;
                }
            }
        }
        let segs: Vec<_> = self.segments().collect();
        for i in 0..m {
            for j in i + 1..m {
                let adjacent = j == i + 1 || (i == 0 && j == m - 1);
                if adjacent {
                    if collinear_overlap(segs[i], segs[j]) {
                        return false;
                    }
                } else if segments_intersect(segs[i], segs[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Winding number of the curve around `p`, which must not lie on it.
    fn winding(&self, p: [f64; 2]) -> i32 {
        let mut w = 0;
        for (a, b) in self.segments() {
            if a[1] <= p[1] {
                if b[1] > p[1] && cross(a, b, p) > 0.0 {
                    w += 1;
                }
            } else if b[1] <= p[1] && cross(a, b, p) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    fn touches(&self, other: &PolyLoop) -> bool {
        self.segments().any(|s| other.segments().any(|t| segments_intersect(s, t)))
    }

    /// The curve as a point set on the dyadic grid; fails unless every
    /// coordinate is dyadic and every segment axis-aligned.
    pub fn to_point_set(&self) -> Result<PointSet> {
        let conv: Vec<(i64, u32, i64, u32)> = self
            .points
            .iter()
            .map(|p| {
                let (a, ea) = dyadic_from_f64(p[0])?;
                let (b, eb) = dyadic_from_f64(p[1])?;
                Ok((a, ea, b, eb))
            })
            .collect::<Result<_>>()?;
        let e = conv.iter().map(|c| c.1.max(c.3)).max().unwrap();
        let mut pts: Vec<[i64; 2]> = conv.iter().map(|c| [c.0 << (e - c.1), c.2 << (e - c.3)]).collect();
        pts.push(pts[0]);
        PointSet::from_path(1i64 << e, &pts)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    cross(a, b, p) == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Whether two closed segments share a point.
fn segments_intersect(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2])) -> bool {
    let (a, b) = s;
    let (c, d) = t;
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Whether two segments sharing an endpoint overlap in more than a point.
fn collinear_overlap(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2])) -> bool {
    if cross(s.0, s.1, t.0) != 0.0 || cross(s.0, s.1, t.1) != 0.0 {
        return false;
    }
    let u = [s.1[0] - s.0[0], s.1[1] - s.0[1]];
    let proj = |p: [f64; 2]| (p[0] - s.0[0]) * u[0] + (p[1] - s.0[1]) * u[1];
    let (lo, hi) = (0.0f64, proj(s.1));
    let (a, b) = (proj(t.0), proj(t.1));
    a.max(b).min(hi) - a.min(b).max(lo) > 0.0
}

/// Cyclic discrete Fréchet distance between two closed point sequences with
/// the same orientation: the minimum, over couplings that traverse both
/// cycles once in order, of the largest coupled distance.
pub fn cyclic_frechet(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    cyclic_frechet_capped(a, b, f64::INFINITY)
}

/// [`cyclic_frechet`], returning any value `≥ cap` once the distance is
/// known to be at least `cap`.
pub fn cyclic_frechet_capped(a: &[[f64; 2]], b: &[[f64; 2]], cap: f64) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "loops must be nonempty");
    let lb = bbox_lower_bound(a, b);
    if lb >= cap {
        return lb;
    }
    let (m, n) = (a.len(), b.len());
    let mut best = cap;
    let mut row = vec![0.0f64; n + 1];
    let mut prev = vec![0.0f64; n + 1];
    for s in 0..n {
        if dist(a[0], b[s]) >= best {
            continue;
        }
        // Coupling of a[0..=m] (a[m] = a[0]) with b[s..=s+n] (b[s+n] = b[s]).
        let bj = |j: usize| b[(s + j) % n];
        for i in 0..=m {
            let ai = a[i % m];
            let mut row_min = f64::INFINITY;
            for j in 0..=n {
                let d = dist(ai, bj(j));
                let reach = match (i, j) {
                    (0, 0) => d,
                    (0, _) => row[j - 1].max(d),
                    (_, 0) => prev[0].max(d),
                    _ => prev[j].min(prev[j - 1]).min(row[j - 1]).max(d),
                };
                row[j] = reach;
                row_min = row_min.min(reach);
            }
            if row_min >= best {
                row[n] = f64::INFINITY;
                break;
            }
            std::mem::swap(&mut row, &mut prev);
        }
        // After the loop the last computed row sits in `prev` unless the
        // search was cut short.
        let value = if row[n].is_infinite() { f64::INFINITY } else { prev[n] };
        best = best.min(value);
    }
    if best >= cap {
        cap.max(lb)
    } else {
        best
    }
}

/// Differences of bounding-box coordinates are lower bounds for any
/// coupling distance: the extreme point of one curve is coupled with a
/// point of the other that is at most as extreme.
fn bbox_lower_bound(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let bb = |v: &[[f64; 2]]| {
        v.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |acc, p| {
            [acc[0].min(p[0]), acc[1].min(p[1]), acc[2].max(p[0]), acc[3].max(p[1])]
        })
    };
    let (x, y) = (bb(a), bb(b));
    (0..4).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max)
}

/// The distance between two loops: cyclic discrete Fréchet over
/// orientation-preserving reparametrizations.
pub fn loop_distance(l1: &PolyLoop, l2: &PolyLoop) -> f64 {
    cyclic_frechet(&l1.points, &l2.points)
}

/// A finite collection of loops.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoopCollection {
    loops: Vec<PolyLoop>,
}

impl LoopCollection {
    /// A collection; point loops are rejected.
    pub fn new(loops: Vec<PolyLoop>) -> Result<Self> {
        if loops.iter().any(|l| l.is_point()) {
            return Err(Error::Invalid("loop collections may not contain point loops".into()));
        }
        Ok(LoopCollection { loops })
    }

    /// The loops of a lattice loop list, in physical coordinates.
    pub fn from_discrete<'a>(loops: impl IntoIterator<Item = &'a DiscreteLoop>, geometry: GridGeometry) -> Self {
        LoopCollection { loops: loops.into_iter().filter(|l| !l.is_empty()).map(|l| PolyLoop::from_discrete(l, geometry)).collect() }
    }

    pub fn loops(&self) -> &[PolyLoop] {
        &self.loops
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }
}

/// A matching between two index sets: each index appears at most once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Whether no index repeats on either side.
    pub fn is_valid(&self) -> bool {
        let mut l: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        let mut r: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        l.sort_unstable();
        r.sort_unstable();
        l.windows(2).all(|w| w[0] != w[1]) && r.windows(2).all(|w| w[0] != w[1])
    }
}

/// The cost of a matching: the largest matched loop distance and half
/// diameter of an unmatched loop.
pub fn matching_cost(l1: &LoopCollection, l2: &LoopCollection, m: &Matching) -> f64 {
    let mut cost = 0.0f64;
    let mut used1 = vec![false; l1.len()];
    let mut used2 = vec![false; l2.len()];
    for &(i, j) in &m.pairs {
        used1[i] = true;
        used2[j] = true;
        cost = cost.max(loop_distance(&l1.loops[i], &l2.loops[j]));
    }
    for (_, l) in l1.loops.iter().enumerate().filter(|(i, _)| !used1[*i]) {
        cost = cost.max(l.diameter() / 2.0);
    }
    for (_, l) in l2.loops.iter().enumerate().filter(|(j, _)| !used2[*j]) {
        cost = cost.max(l.diameter() / 2.0);
    }
    cost
}

/// The distance between loop collections: the minimum over matchings of
/// [`matching_cost`], computed exactly as a bottleneck assignment.
pub fn collection_distance(l1: &LoopCollection, l2: &LoopCollection) -> f64 {
    collection_distance_with_matching(l1, l2).0
}

/// [`collection_distance`] together with an optimal matching.
pub fn collection_distance_with_matching(l1: &LoopCollection, l2: &LoopCollection) -> (f64, Matching) {
    let h1: Vec<f64> = l1.loops.iter().map(|l| l.diameter() / 2.0).collect();
    let h2: Vec<f64> = l2.loops.iter().map(|l| l.diameter() / 2.0).collect();
    // Matching i with j only helps when it beats leaving both unmatched.
    let mut d = vec![vec![f64::INFINITY; l2.len()]; l1.len()];
    for i in 0..l1.len() {
        for j in 0..l2.len() {
            let cap = h1[i].max(h2[j]);
            let v = cyclic_frechet_capped(&l1.loops[i].points, &l2.loops[j].points, cap);
            if v < cap {
                d[i][j] = v;
            }
        }
    }
    let mut candidates: Vec<f64> = h1.iter().chain(&h2).copied().chain(d.iter().flatten().copied().filter(|v| v.is_finite())).collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    // The largest candidate is always feasible: leave everything unmatched.
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bottleneck_feasible(&d, &h1, &h2, candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let tau = candidates[lo];
    let pairs = bottleneck_feasible(&d, &h1, &h2, tau).expect("largest candidate is feasible");
    (tau, Matching { pairs })
}

/// A matching of cost at most `tau`, if one exists.
///
/// This is a perfect matching problem. Left nodes are the loops of the first
/// collection followed by one "unmatched" dummy per loop of the second.
/// Right nodes are the loops of the second collection followed by one dummy
/// per loop of the first. Allowed edges:
/// - loop `i` to loop `j` when `d(i, j) ≤ tau`;
/// - loop `i` to its own dummy when half its diameter is at most `tau`;
/// - loop `j` to its own dummy under the same rule;
/// - any dummy to any dummy.
///
/// Solved by augmenting paths.
fn bottleneck_feasible(d: &[Vec<f64>], h1: &[f64], h2: &[f64], tau: f64) -> Option<Vec<(usize, usize)>> {
    let (n1, n2) = (h1.len(), h2.len());
    let n = n1 + n2;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            if u < n1 {
                let mut v: Vec<usize> = (0..n2).filter(|&j| d[u][j] <= tau).collect();
                if h1[u] <= tau {
                    v.push(n2 + u);
                }
                v
            } else {
                let j = u - n1;
                let mut v: Vec<usize> = if h2[j] <= tau { vec![j] } else { Vec::new() };
                v.extend(n2..n);
                v
            }
        })
        .collect();
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], match_r: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if match_r[v].is_none_or(|w| augment(w, adj, seen, match_r)) {
                match_r[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut match_r: Vec<Option<usize>> = vec![None; n];
    for u in 0..n {
        let mut seen = vec![false; n];
        if !augment(u, &adj, &mut seen, &mut match_r) {
            return None;
        }
    }
    let mut pairs: Vec<(usize, usize)> =
        (0..n2).filter_map(|j| match_r[j].filter(|&i| i < n1).map(|i| (i, j))).collect();
    pairs.sort_unstable();
    Some(pairs)
}

/// Whether the collection is simple in the domain: every loop is a simple
/// closed curve in the open interior of `domain`, loops are pairwise
/// disjoint, and a loop is clockwise iff its level (one plus the number of
/// loops surrounding it) is odd.
pub fn is_smpl(l: &LoopCollection, domain: &DyadicPolygon) -> bool {
    let den = domain.denominator() as f64;
    let dom: Vec<[f64; 2]> = domain.corners().iter().map(|c| [c[0] as f64 / den, c[1] as f64 / den]).collect();
    let dom_loop = PolyLoop { points: dom };
    for lp in &l.loops {
        if !lp.is_simple() || lp.touches(&dom_loop) || dom_loop.winding(lp.points[0]) == 0 {
            return false;
        }
    }
    for (i, a) in l.loops.iter().enumerate() {
        for b in &l.loops[i + 1..] {
            if a.touches(b) {
                return false;
            }
        }
    }
    for (i, a) in l.loops.iter().enumerate() {
        let level = 1 + l.loops.iter().enumerate().filter(|(j, b)| *j != i && b.winding(a.points[0]) != 0).count();
        let expected = if level % 2 == 1 { Orientation::Clockwise } else { Orientation::CounterClockwise };
        if a.orientation() != expected {
            return false;
        }
    }
    true
}

/// Levels of the loops of a simple collection: one plus the number of
/// loops surrounding each.
pub fn levels(l: &LoopCollection) -> Vec<usize> {
    l.loops
        .iter()
        .enumerate()
        .map(|(i, a)| 1 + l.loops.iter().enumerate().filter(|(j, b)| *j != i && b.winding(a.points[0]) != 0).count())
        .collect()
}

/// `F(L)`: bit `i` is set iff some loop of the collection crosses the
/// `i`-th family annulus. Fails unless every loop is rectilinear with
/// dyadic coordinates.
pub fn f_fingerprint(l: &LoopCollection, family: &AnnulusFamily) -> Result<CrossingFingerprint> {
    let mut fp = CrossingFingerprint::zeros(family.k(), family.len());
    for lp in &l.loops {
        let one = fingerprint(&lp.to_point_set()?, family);
        for i in one.bits().iter_ones() {
            fp.set(i, true);
        }
    }
    Ok(fp)
}

/// `F` for lattice loops, avoiding the floating-point round trip.
pub fn f_fingerprint_discrete(loops: &[DiscreteLoop], geometry: GridGeometry, family: &AnnulusFamily) -> CrossingFingerprint {
    let mut fp = CrossingFingerprint::zeros(family.k(), family.len());
    for lp in loops {
        let one = fingerprint(&PointSet::from_loop(lp, geometry), family);
        for i in one.bits().iter_ones() {
            fp.set(i, true);
        }
    }
    fp
}

/// Result of comparing fingerprints of two nearby collections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuityReport {
    /// Annuli whose bits differ.
    pub differing: usize,
    /// Differing annuli with no family neighbour crossed by both
    /// collections.
    pub unexplained: usize,
}

/// Continuity diagnostic for `F`: counts the annuli whose bits differ
/// between two fingerprints and, among them, those with no family member
/// within annulus distance `2^-k` that both fingerprints mark as crossed.
pub fn continuity_diagnostic(a: &CrossingFingerprint, b: &CrossingFingerprint, family: &AnnulusFamily) -> ContinuityReport {
    let diff = a.differences(b);
    let radius = 1.0 / (1u64 << family.k()) as f64 + 1e-12;
    let both: Vec<usize> = (0..family.len()).filter(|&i| a.get(i) && b.get(i)).collect();
    let unexplained = diff
        .iter()
        .filter(|&&i| !both.iter().any(|&j| annulus_distance(&family.annuli()[i], &family.annuli()[j]) <= radius))
        .count();
    ContinuityReport { differing: diff.len(), unexplained }
}

/// Outcome of the injectivity diagnostic over pairs of collections.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    /// Pairs at collection distance at least `2^{-k+1}`.
    pub tested: usize,
    /// Tested pairs with equal fingerprints.
    pub collisions: usize,
}

/// Injectivity diagnostic for `F` on simple collections: among the pairs
/// at distance at least `2^{-k+1}`, counts those with equal resolution-`k`
/// fingerprints.
pub fn injectivity_diagnostic(pairs: &[(LoopCollection, LoopCollection)], family: &AnnulusFamily) -> Result<InjectivityReport> {
    let threshold = 2.0 / (1u64 << family.k()) as f64;
    let mut report = InjectivityReport::default();
    for (a, b) in pairs {
        if collection_distance(a, b) < threshold {
            continue;
        }
        report.tested += 1;
        if f_fingerprint(a, family)? == f_fingerprint(b, family)? {
            report.collisions += 1;
        }
    }
    Ok(report)
}

/// Whether every point of `l` lies within Euclidean distance `r` of the
/// point set of `other` (vertices and segments).
pub fn within_neighbourhood(l: &PolyLoop, other: &PolyLoop, r: f64) -> bool {
    l.points.iter().all(|&p| other.segments().any(|(a, b)| point_segment_distance(p, a, b) <= r))
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1]];
    let len2 = u[0] * u[0] + u[1] * u[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * u[0] + (p[1] - a[1]) * u[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * u[0], a[1] + t * u[1]])
}

/// Whether the point `p` lies in the closed region bounded by `domain`.
pub fn in_domain(p: [f64; 2], domain: &DyadicPolygon) -> Result<bool> {
    let (x, ex) = dyadic_from_f64(p[0])?;
    let (y, ey) = dyadic_from_f64(p[1])?;
    let e = ex.max(ey);
    Ok(domain.locate([x << (e - ex), y << (e - ey)], 1i64 << e) != Location::Outside)
}
