//! Polygonal annuli: crossing and separation by planar point sets, the
//! crossing order, dyadic annulus families and hereditary crossing
//! fingerprints.
//!
//! Every predicate is evaluated exactly on an integer canvas whose unit
//! divides every coordinate involved (lattice points, polygon corners and
//! thickening radii), with all "interesting" coordinates on even canvas
//! positions. On such a canvas two parallel segments are at least two units
//! apart, so connectivity of a union of axis-aligned segments (or of its
//! complement) is exactly 4-neighbour connectivity of canvas points.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::fmt;

use bitvec::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{DiscreteLoop, Edge, GridGeometry};
use crate::loopmetric::cyclic_frechet;
use crate::percolation::Config;
use crate::polygon::{dyadic_from_f64, locate_i64, DyadicPolygon, Location};

/// Largest supported family resolution.
pub const DEFAULT_K_MAX: u32 = 4;

/// Largest family size accepted by [`AnnulusFamily::dyadic`].
pub const MAX_FAMILY_SIZE: usize = 4_000_000;

/// A closed annulus between two nested rectilinear polygons. `inner` bounds
/// the hole (its boundary is `∂₀A`), `outer` the outside (`∂₁A`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyAnnulus {
    inner: DyadicPolygon,
    outer: DyadicPolygon,
    resolution: Option<u32>,
}

impl PolyAnnulus {
    /// The annulus between `inner` and `outer`; the inner boundary must lie
    /// in the open interior of the outer region.
    pub fn new(inner: DyadicPolygon, outer: DyadicPolygon) -> Result<Self> {
        if !outer.strictly_contains_polygon(&inner) {
            return Err(Error::Invalid("inner boundary must lie strictly inside the outer boundary".into()));
        }
        Ok(PolyAnnulus { inner, outer, resolution: None })
    }

    /// The square annulus `A_{r0,r1}` of sup-norm radii `r0 < r1` around
    /// `(cx, cy)`.
    pub fn square(cx: f64, cy: f64, r0: f64, r1: f64) -> Result<Self> {
        Self::new(DyadicPolygon::square(cx, cy, r0)?, DyadicPolygon::square(cx, cy, r1)?)
    }

    /// A dyadic rectangle annulus with `[x0, y0, x1, y1]` corners over `2^k`.
    pub fn dyadic(k: u32, inner: [i64; 4], outer: [i64; 4]) -> Result<Self> {
        let i = DyadicPolygon::rect_exact(k, inner[0], inner[1], inner[2], inner[3])?;
        let o = DyadicPolygon::rect_exact(k, outer[0], outer[1], outer[2], outer[3])?;
        let mut a = Self::new(i, o)?;
        a.resolution = Some(k);
        Ok(a)
    }

    pub fn inner(&self) -> &DyadicPolygon {
        &self.inner
    }

    pub fn outer(&self) -> &DyadicPolygon {
        &self.outer
    }

    /// The dyadic resolution when the annulus belongs to a dyadic family.
    pub fn resolution(&self) -> Option<u32> {
        self.resolution
    }

    /// `A^ε`: the annulus whose hole is the inner region dilated by `eps` in
    /// the sup norm. Crossing `A` implies crossing `A^ε`, and `A^0 = A`.
    pub fn widened_hole(&self, eps: f64) -> Result<Self> {
        if eps < 0.0 {
            return Err(Error::Invalid(format!("negative erosion {eps}")));
        }
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let (num, exp) = dyadic_from_f64(eps)?;
        let inner = self.inner.dilated(num, exp)?;
        let mut a = Self::new(inner, self.outer.clone())?;
        a.resolution = None;
        Ok(a)
    }

    /// Both boundaries as axis-aligned rectangles over a common exponent.
    fn as_rects(&self) -> Option<(u32, [i64; 4], [i64; 4])> {
        let e = self.inner.exp().max(self.outer.exp());
        let i = self.inner.as_rectangle()?;
        let o = self.outer.as_rectangle()?;
        let si = 1i64 << (e - self.inner.exp());
        let so = 1i64 << (e - self.outer.exp());
        Some((e, i.map(|v| v * si), o.map(|v| v * so)))
    }
}

impl fmt::Display for PolyAnnulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &DyadicPolygon| {
            p.corners_f64().iter().map(|c| format!("({} {})", c[0], c[1])).collect::<Vec<_>>().join(" ")
        };
        write!(f, "[{}]/[{}]", show(&self.inner), show(&self.outer))
    }
}

/// `a1 ≤_crs a2`: `a1` circulates `a2`, i.e. both boundaries of `a1` lie in
/// the closed annular region of `a2` and surround its hole. Every set that
/// crosses `a2` then also crosses `a1`.
pub fn leq_crs(a1: &PolyAnnulus, a2: &PolyAnnulus) -> bool {
    if let (Some((e1, i1, o1)), Some((e2, i2, o2))) = (a1.as_rects(), a2.as_rects()) {
        let e = e1.max(e2);
        let (s1, s2) = (1i64 << (e - e1), 1i64 << (e - e2));
        let (i1, o1, i2, o2) = (i1.map(|v| v * s1), o1.map(|v| v * s1), i2.map(|v| v * s2), o2.map(|v| v * s2));
        let contains = |big: [i64; 4], small: [i64; 4]| {
            big[0] <= small[0] && big[1] <= small[1] && small[2] <= big[2] && small[3] <= big[3]
        };
        return contains(o2, o1) && contains(i1, i2);
    }
    a2.outer.contains_polygon(&a1.outer) && a1.inner.contains_polygon(&a2.inner)
}

/// A finite union of closed axis-aligned segments with coordinates
/// `c / denom`. Degenerate segments stand for isolated points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    denom: i64,
    segments: Vec<[[i64; 2]; 2]>,
}

impl PointSet {
    pub fn new(denom: i64, segments: Vec<[[i64; 2]; 2]>) -> Result<Self> {
        if denom <= 0 {
            return Err(Error::Invalid("point set denominator must be positive".into()));
        }
        if let Some(s) = segments.iter().find(|s| s[0][0] != s[1][0] && s[0][1] != s[1][1]) {
            return Err(Error::Invalid(format!("segment {s:?} is not axis-aligned")));
        }
        Ok(PointSet { denom, segments })
    }

    pub fn empty() -> Self {
        PointSet { denom: 1, segments: Vec::new() }
    }

    /// The union of the given lattice edges.
    pub fn from_edges(geometry: GridGeometry, edges: impl IntoIterator<Item = Edge>) -> Self {
        let segments = edges.into_iter().map(|e| [[e.a().x as i64, e.a().y as i64], [e.b().x as i64, e.b().y as i64]]).collect();
        PointSet { denom: geometry.denominator(), segments }
    }

    /// The open edges of a configuration.
    pub fn from_config(k: &Config) -> Self {
        Self::from_edges(k.geometry(), k.open_edges())
    }

    /// The trace of a lattice loop; a point loop is a single point.
    pub fn from_loop(l: &DiscreteLoop, geometry: GridGeometry) -> Self {
        Self::from_loops([l], geometry)
    }

    /// The union of the traces of several lattice loops.
    pub fn from_loops<'a>(loops: impl IntoIterator<Item = &'a DiscreteLoop>, geometry: GridGeometry) -> Self {
        let mut segments = Vec::new();
        for l in loops {
            if l.len() == 0 {
                let p = l.vertices()[0];
                segments.push([[p.x as i64, p.y as i64]; 2]);
            }
            for (p, q) in l.steps() {
                segments.push([[p.x as i64, p.y as i64], [q.x as i64, q.y as i64]]);
            }
        }
        PointSet { denom: geometry.denominator(), segments }
    }

    /// A rectilinear path through `points`, each over `denom`.
    pub fn from_path(denom: i64, points: &[[i64; 2]]) -> Result<Self> {
        let segments = if points.len() == 1 { vec![[points[0]; 2]] } else { points.windows(2).map(|w| [w[0], w[1]]).collect() };
        Self::new(denom, segments)
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn segments(&self) -> &[[[i64; 2]; 2]] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// The union of two point sets.
    pub fn union(&self, other: &PointSet) -> PointSet {
        let l = lcm(self.denom, other.denom);
        let scale = |p: &PointSet| -> Vec<[[i64; 2]; 2]> {
            let f = l / p.denom;
            p.segments.iter().map(|s| s.map(|c| [c[0] * f, c[1] * f])).collect()
        };
        let mut segments = scale(self);
        segments.extend(scale(other));
        PointSet { denom: l, segments }
    }
}

impl From<&Config> for PointSet {
    fn from(k: &Config) -> Self {
        PointSet::from_config(k)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// A rectilinear region in canvas units.
#[derive(Clone, Debug)]
enum Shape {
    Rect([i64; 4]),
    Poly(Vec<[i64; 2]>),
}

impl Shape {
    fn new(p: &DyadicPolygon, scale: i64) -> Shape {
        let f = scale / p.denominator();
        match p.as_rectangle() {
            Some(r) => Shape::Rect(r.map(|v| v * f)),
            None => Shape::Poly(p.corners().iter().map(|c| [c[0] * f, c[1] * f]).collect()),
        }
    }

    fn locate(&self, p: [i64; 2]) -> Location {
        match self {
            Shape::Rect([x0, y0, x1, y1]) => {
                if p[0] < *x0 || p[0] > *x1 || p[1] < *y0 || p[1] > *y1 {
                    Location::Outside
                } else if p[0] == *x0 || p[0] == *x1 || p[1] == *y0 || p[1] == *y1 {
                    Location::Boundary
                } else {
                    Location::Inside
                }
            }
            Shape::Poly(c) => locate_i64(c, p),
        }
    }

    /// Sup-norm distance from `p` to the boundary curve.
    fn boundary_distance(&self, p: [i64; 2]) -> i64 {
        let seg = |a: [i64; 2], b: [i64; 2]| {
            let gap = |v: i64, lo: i64, hi: i64| (lo - v).max(v - hi).max(0);
            let dx = gap(p[0], a[0].min(b[0]), a[0].max(b[0]));
            let dy = gap(p[1], a[1].min(b[1]), a[1].max(b[1]));
            dx.max(dy)
        };
        match self {
            Shape::Rect([x0, y0, x1, y1]) => {
                let c = [[*x0, *y0], [*x1, *y0], [*x1, *y1], [*x0, *y1]];
                (0..4).map(|i| seg(c[i], c[(i + 1) % 4])).min().unwrap()
            }
            Shape::Poly(c) => (0..c.len()).map(|i| seg(c[i], c[(i + 1) % c.len()])).min().unwrap(),
        }
    }

    fn bbox(&self) -> [i64; 4] {
        match self {
            Shape::Rect(r) => *r,
            Shape::Poly(c) => [
                c.iter().map(|p| p[0]).min().unwrap(),
                c.iter().map(|p| p[1]).min().unwrap(),
                c.iter().map(|p| p[0]).max().unwrap(),
                c.iter().map(|p| p[1]).max().unwrap(),
            ],
        }
    }
}

/// Canvas units per physical unit for a point set drawn together with the
/// given polygons and extra dyadic denominators.
fn canvas_scale(s: &PointSet, polys: &[&DyadicPolygon], extra: &[i64]) -> i64 {
    let mut l = s.denom;
    for p in polys {
        l = lcm(l, p.denominator());
    }
    for &d in extra {
        l = lcm(l, d);
    }
    let f = l / s.denom;
    let seg_even = s.segments.iter().all(|sg| sg.iter().all(|c| (c[0] * f) % 2 == 0 && (c[1] * f) % 2 == 0));
    let poly_even = polys.iter().all(|p| {
        let g = l / p.denominator();
        p.corners().iter().all(|c| (c[0] * g) % 2 == 0 && (c[1] * g) % 2 == 0)
    });
    let extra_even = extra.iter().all(|&d| (l / d) % 2 == 0);
    if seg_even && poly_even && extra_even {
        l
    } else {
        2 * l
    }
}

/// The point set rasterized on a window of the canvas.
struct Canvas {
    x0: i64,
    y0: i64,
    w: i64,
    h: i64,
    on_set: BitVec,
    /// The canvas points of the set, in raster order.
    on_points: Vec<[i64; 2]>,
    /// Visit stamps for crossing searches, one per canvas point.
    stamps: RefCell<(u32, Vec<u32>)>,
}

impl Canvas {
    fn new(s: &PointSet, scale: i64, window: [i64; 4]) -> Canvas {
        let [x0, y0, x1, y1] = window;
        let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut on_set = bitvec![0; (w * h) as usize];
        let f = scale / s.denom;
        for sg in &s.segments {
            let a = [sg[0][0] * f, sg[0][1] * f];
            let b = [sg[1][0] * f, sg[1][1] * f];
            let (lx, hx) = (a[0].min(b[0]).max(x0), a[0].max(b[0]).min(x1));
            let (ly, hy) = (a[1].min(b[1]).max(y0), a[1].max(b[1]).min(y1));
            for x in lx..=hx {
                for y in ly..=hy {
                    on_set.set(((y - y0) * w + (x - x0)) as usize, true);
                }
            }
        }
        let on_points = on_set.iter_ones().map(|i| [x0 + i as i64 % w, y0 + i as i64 / w]).collect();
        Canvas { x0, y0, w, h, on_set, on_points, stamps: RefCell::new((0, Vec::new())) }
    }

    fn index(&self, p: [i64; 2]) -> Option<usize> {
        let (x, y) = (p[0] - self.x0, p[1] - self.y0);
        (x >= 0 && y >= 0 && x < self.w && y < self.h).then(|| (y * self.w + x) as usize)
    }

    fn on(&self, p: [i64; 2]) -> bool {
        self.index(p).is_some_and(|i| self.on_set[i])
    }
}

/// An annulus drawn on the canvas.
struct View {
    inner: Shape,
    outer: Shape,
    bbox: [i64; 4],
}

impl View {
    fn new(a: &PolyAnnulus, scale: i64) -> View {
        let outer = Shape::new(&a.outer, scale);
        let bbox = outer.bbox();
        View { inner: Shape::new(&a.inner, scale), outer, bbox }
    }

    fn contains(&self, p: [i64; 2]) -> bool {
        self.outer.locate(p) != Location::Outside && self.inner.locate(p) != Location::Inside
    }

    /// Breadth-first search over the canvas points of the annulus accepted
    /// by `pass`, from the points accepted by `start` until one accepted by
    /// `goal` is reached.
    fn search(
        &self,
        pass: impl Fn([i64; 2]) -> bool,
        start: impl Fn([i64; 2]) -> bool,
        goal: impl Fn([i64; 2]) -> bool,
    ) -> bool {
        let [x0, y0, x1, y1] = self.bbox;
        let w = x1 - x0 + 1;
        let idx = |p: [i64; 2]| ((p[1] - y0) * w + (p[0] - x0)) as usize;
        let mut seen = bitvec![0; (w * (y1 - y0 + 1)) as usize];
        let mut queue = VecDeque::new();
        let ok = |p: [i64; 2]| self.contains(p) && pass(p);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let p = [x, y];
                if start(p) && ok(p) {
                    if goal(p) {
                        return true;
                    }
                    seen.set(idx(p), true);
                    queue.push_back(p);
                }
            }
        }
        while let Some(p) = queue.pop_front() {
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let q = [p[0] + dx, p[1] + dy];
                if q[0] < x0 || q[0] > x1 || q[1] < y0 || q[1] > y1 || seen[idx(q)] || !ok(q) {
                    continue;
                }
                if goal(q) {
                    return true;
                }
                seen.set(idx(q), true);
                queue.push_back(q);
            }
        }
        false
    }

    /// Searches the points of the set inside the annulus, from those near
    /// the inner boundary to one near the outer boundary.
    fn crosses(&self, c: &Canvas, r: i64) -> bool {
        let near = |s: &Shape, p: [i64; 2]| if r == 0 { s.locate(p) == Location::Boundary } else { s.boundary_distance(p) <= r };
        let [x0, y0, x1, y1] = self.bbox;
        let in_box = |p: [i64; 2]| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
        let mut guard = c.stamps.borrow_mut();
        let (stamp, seen) = &mut *guard;
        if seen.len() != c.on_set.len() || *stamp == u32::MAX {
            *seen = vec![0; c.on_set.len()];
            *stamp = 0;
        }
        *stamp += 1;
        let stamp = *stamp;
        let mut stack = Vec::new();
        for &p in &c.on_points {
            if !in_box(p) || !self.contains(p) || !near(&self.inner, p) {
                continue;
            }
            if near(&self.outer, p) {
                return true;
            }
            seen[c.index(p).unwrap()] = stamp;
            stack.push(p);
        }
        while let Some(p) = stack.pop() {
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let q = [p[0] + dx, p[1] + dy];
                let Some(i) = c.index(q) else { continue };
                if seen[i] == stamp || !c.on_set[i] || !in_box(q) || !self.contains(q) {
                    continue;
                }
                if near(&self.outer, q) {
                    return true;
                }
                seen[i] = stamp;
                stack.push(q);
            }
        }
        false
    }

    fn separates(&self, c: &Canvas) -> bool {
        !self.search(
            |p| !c.on(p),
            |p| self.inner.locate(p) == Location::Boundary,
            |p| self.outer.locate(p) == Location::Boundary,
        )
    }
}

/// Whether `s ∩ a` has a connected component meeting both boundaries of `a`.
pub fn crosses(s: &PointSet, a: &PolyAnnulus) -> bool {
    let scale = canvas_scale(s, &[&a.inner, &a.outer], &[]);
    let view = View::new(a, scale);
    view.crosses(&Canvas::new(s, scale, view.bbox), 0)
}

/// Whether `s ∩ a` has a connected component meeting both sup-norm
/// `r`-thickenings `(∂₀a)_r` and `(∂₁a)_r`; `r` must be dyadic.
pub fn crosses_thickened(s: &PointSet, a: &PolyAnnulus, r: f64) -> Result<bool> {
    if r < 0.0 {
        return Err(Error::Invalid(format!("negative thickening {r}")));
    }
    let (num, exp) = dyadic_from_f64(r)?;
    let scale = canvas_scale(s, &[&a.inner, &a.outer], &[1i64 << exp]);
    let view = View::new(a, scale);
    let r = num * (scale >> exp);
    Ok(view.crosses(&Canvas::new(s, scale, view.bbox), r))
}

/// Whether `s ∩ a` disconnects the two boundaries of `a`: no path in
/// `a ∖ s` joins a point of `∂₀a` to a point of `∂₁a`.
pub fn separates(s: &PointSet, a: &PolyAnnulus) -> bool {
    let scale = canvas_scale(s, &[&a.inner, &a.outer], &[]);
    let view = View::new(a, scale);
    view.separates(&Canvas::new(s, scale, view.bbox))
}

/// The dyadic annulus family at resolution `k` in a window: every pair of
/// axis-aligned rectangles with corners on `2^-k Z²`, the outer one in the
/// open interior of the window and the inner one in the open interior of
/// the outer one.
///
/// Enumeration order is lexicographic in the outer rectangle
/// `(x0, x1, y0, y1)` and then in the inner rectangle `(x0, x1, y0, y1)`,
/// all coordinates in units of `2^-k`.
#[derive(Clone, Debug)]
pub struct AnnulusFamily {
    k: u32,
    window: DyadicPolygon,
    annuli: Vec<PolyAnnulus>,
}

impl AnnulusFamily {
    /// Enumerates the family, failing when `k > k_max` or when it would hold
    /// more than [`MAX_FAMILY_SIZE`] annuli.
    pub fn dyadic(window: &DyadicPolygon, k: u32, k_max: u32) -> Result<Self> {
        if k > k_max {
            return Err(Error::TooLarge(format!("resolution {k} exceeds the cap {k_max}")));
        }
        let d = window.denominator();
        let g = 1i64 << k;
        let (bx0, by0, bx1, by1) = window.bbox();
        let grid = |lo: i64, hi: i64| -> Vec<i64> {
            let first = (lo * g).div_euclid(d) + 1;
            let last = (hi * g - 1).div_euclid(d);
            (first..=last).collect()
        };
        let (xs, ys) = (grid(bx0, bx1), grid(by0, by1));
        let choose4 = |m: usize| -> usize { if m < 4 { 0 } else { m * (m - 1) * (m - 2) * (m - 3) / 24 } };
        if choose4(xs.len()).saturating_mul(choose4(ys.len())) > MAX_FAMILY_SIZE {
            return Err(Error::TooLarge(format!("the resolution-{k} family exceeds {MAX_FAMILY_SIZE} annuli")));
        }
        let is_rect = window.as_rectangle().is_some();
        let mut annuli = Vec::new();
        let pairs = |v: &[i64]| -> Vec<(i64, i64)> {
            let mut out = Vec::new();
            for (i, &a) in v.iter().enumerate() {
                for &b in &v[i + 1..] {
                    out.push((a, b));
                }
            }
            out
        };
        let (xp, yp) = (pairs(&xs), pairs(&ys));
        for &(ox0, ox1) in &xp {
            for &(oy0, oy1) in &yp {
                if ox1 - ox0 < 2 || oy1 - oy0 < 2 {
                    continue;
                }
                let outer = DyadicPolygon::rect_exact(k, ox0, oy0, ox1, oy1)?;
                if !is_rect && !window.strictly_contains_polygon(&outer) {
                    continue;
                }
                for &(ix0, ix1) in xp.iter().filter(|(a, b)| *a > ox0 && *b < ox1) {
                    for &(iy0, iy1) in yp.iter().filter(|(a, b)| *a > oy0 && *b < oy1) {
                        annuli.push(PolyAnnulus::dyadic(k, [ix0, iy0, ix1, iy1], [ox0, oy0, ox1, oy1])?);
                    }
                }
            }
        }
        Ok(AnnulusFamily { k, window: window.clone(), annuli })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn window(&self) -> &DyadicPolygon {
        &self.window
    }

    pub fn annuli(&self) -> &[PolyAnnulus] {
        &self.annuli
    }

    pub fn len(&self) -> usize {
        self.annuli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annuli.is_empty()
    }

    /// Evaluates `pred` on every family member with a canvas shared across
    /// the family.
    fn evaluate(&self, s: &PointSet, pred: impl Fn(&View, &Canvas) -> bool) -> CrossingFingerprint {
        let scale = canvas_scale(s, &[&self.window], &[1i64 << self.k]);
        let w = Shape::new(&self.window, scale).bbox();
        let canvas = Canvas::new(s, scale, w);
        let mut fp = CrossingFingerprint::zeros(self.k, self.len());
        for (i, a) in self.annuli.iter().enumerate() {
            if pred(&View::new(a, scale), &canvas) {
                fp.bits.set(i, true);
            }
        }
        fp
    }
}

/// The set of family annuli crossed by a point set, as a bitset in family
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CrossingFingerprint {
    k: u32,
    bits: BitVec<u64, Lsb0>,
}

impl CrossingFingerprint {
    pub fn zeros(k: u32, len: usize) -> Self {
        CrossingFingerprint { k, bits: bitvec![u64, Lsb0; 0; len] }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.bits.set(i, v);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    /// Indices where the two fingerprints differ.
    pub fn differences(&self, other: &CrossingFingerprint) -> Vec<usize> {
        (0..self.len().min(other.len())).filter(|&i| self.bits[i] != other.bits[i]).collect()
    }

    /// Lower-case hex of the bytes, where bit `i` is bit `i % 8` of byte
    /// `i / 8`.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for i in self.bits.iter_ones() {
            bytes[i / 8] |= 1 << (i % 8);
        }
        hex::encode(bytes)
    }

    pub fn from_hex(k: u32, len: usize, s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Decode(format!("fingerprint hex: {e}")))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Decode(format!("fingerprint of {len} bits needs {} bytes", len.div_ceil(8))));
        }
        let mut fp = Self::zeros(k, len);
        for i in 0..len {
            fp.bits.set(i, bytes[i / 8] >> (i % 8) & 1 == 1);
        }
        if (len..bytes.len() * 8).any(|i| bytes[i / 8] >> (i % 8) & 1 == 1) {
            return Err(Error::Decode("fingerprint has bits past its length".into()));
        }
        Ok(fp)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FingerprintRepr {
    k: u32,
    len: usize,
    hex: String,
}

impl Serialize for CrossingFingerprint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FingerprintRepr { k: self.k, len: self.len(), hex: self.to_hex() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CrossingFingerprint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FingerprintRepr::deserialize(d)?;
        CrossingFingerprint::from_hex(r.k, r.len, &r.hex).map_err(serde::de::Error::custom)
    }
}

/// The crossing fingerprint of `s`: bit `i` is set iff `s` crosses the
/// `i`-th family annulus.
pub fn fingerprint(s: &PointSet, family: &AnnulusFamily) -> CrossingFingerprint {
    family.evaluate(s, |v, c| v.crosses(c, 0))
}

/// The separation fingerprint of `s`: bit `i` is set iff `s` separates the
/// boundaries of the `i`-th family annulus.
pub fn separation_fingerprint(s: &PointSet, family: &AnnulusFamily) -> CrossingFingerprint {
    family.evaluate(s, |v, c| v.separates(c))
}

/// Pairs `(i, j)` with bit `i` set, `a_j ≤_crs a_i` and bit `j` clear. A
/// fingerprint is hereditary iff this is empty.
pub fn heredity_violations(fp: &CrossingFingerprint, family: &AnnulusFamily) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in fp.bits.iter_ones() {
        for (j, a) in family.annuli.iter().enumerate() {
            if !fp.bits[j] && leq_crs(a, &family.annuli[i]) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn is_hereditary(fp: &CrossingFingerprint, family: &AnnulusFamily) -> bool {
    heredity_violations(fp, family).is_empty()
}

/// The boundary of a polygon as a counterclockwise closed point sequence
/// with a point at every multiple of `2^-exp` along each side.
pub fn resampled_boundary(p: &DyadicPolygon, exp: u32) -> Vec<[f64; 2]> {
    let e = exp.max(p.exp());
    let f = 1i64 << (e - p.exp());
    let mut c: Vec<[i64; 2]> = p.corners().iter().map(|v| [v[0] * f, v[1] * f]).collect();
    let area2: i128 = (0..c.len())
        .map(|i| {
            let (a, b) = (c[i], c[(i + 1) % c.len()]);
            a[0] as i128 * b[1] as i128 - b[0] as i128 * a[1] as i128
        })
        .sum();
    if area2 < 0 {
        c.reverse();
    }
    let d = (1i64 << e) as f64;
    let mut out = Vec::new();
    for i in 0..c.len() {
        let (a, b) = (c[i], c[(i + 1) % c.len()]);
        let steps = (b[0] - a[0]).abs() + (b[1] - a[1]).abs();
        let (sx, sy) = ((b[0] - a[0]).signum(), (b[1] - a[1]).signum());
        for t in 0..steps {
            out.push([(a[0] + sx * t) as f64 / d, (a[1] + sy * t) as f64 / d]);
        }
    }
    out
}

/// The distance between two annuli: the larger of the loop distances
/// between corresponding boundaries, traversed counterclockwise.
pub fn annulus_distance(a1: &PolyAnnulus, a2: &PolyAnnulus) -> f64 {
    let e = [&a1.inner, &a1.outer, &a2.inner, &a2.outer].iter().map(|p| p.exp()).max().unwrap();
    let d0 = cyclic_frechet(&resampled_boundary(&a1.inner, e), &resampled_boundary(&a2.inner, e));
    let d1 = cyclic_frechet(&resampled_boundary(&a1.outer, e), &resampled_boundary(&a2.outer, e));
    d0.max(d1)
}
