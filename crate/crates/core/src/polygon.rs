//! Rectilinear polygons with dyadic corners.
//!
//! Corners are stored as integers over a common power-of-two denominator, so
//! every containment predicate is evaluated exactly in integer arithmetic.
//! Callers that mix polygons with lattice points rescale both to a common
//! integer grid (see [`DyadicPolygon::corners_over`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported denominator exponent: corners are multiples of `2^-30`.
pub const MAX_EXP: u32 = 30;

/// Where a point lies relative to a closed polygonal region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// A simple rectilinear polygon whose corners are `corners[i] / 2^exp`.
///
/// The corner list is normalized: no repeated closing corner, no collinear
/// middle corners, and the exponent is the smallest one that makes every
/// coordinate integral.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicPolygon {
    exp: u32,
    corners: Vec<[i64; 2]>,
}

impl DyadicPolygon {
    /// Builds a polygon from integer corners over `2^exp`.
    pub fn new(exp: u32, corners: Vec<[i64; 2]>) -> Result<Self> {
        if exp > MAX_EXP {
            return Err(Error::Invalid(format!("polygon exponent {exp} exceeds {MAX_EXP}")));
        }
        let corners = normalize_corners(corners);
        if corners.len() < 4 {
            return Err(Error::Invalid("a polygon needs at least four corners".into()));
        }
        let m = corners.len();
        for i in 0..m {
            let a = corners[i];
            let b = corners[(i + 1) % m];
            if a[0] != b[0] && a[1] != b[1] {
                return Err(Error::Invalid(format!(
                    "polygon edge {a:?}-{b:?} is not axis-aligned"
                )));
            }
        }
        if !is_simple(&corners) {
            return Err(Error::Invalid("polygon boundary intersects itself".into()));
        }
        let mut poly = DyadicPolygon { exp, corners };
        poly.reduce();
        Ok(poly)
    }

    /// Builds a polygon from floating-point corners, each of which must be a
    /// dyadic rational with denominator at most `2^MAX_EXP`.
    pub fn from_f64(corners: &[[f64; 2]]) -> Result<Self> {
        let scale = (1u64 << MAX_EXP) as f64;
        let mut ints = Vec::with_capacity(corners.len());
        for c in corners {
            let mut out = [0i64; 2];
            for (k, &v) in c.iter().enumerate() {
                let s = v * scale;
                if !s.is_finite() || s.fract() != 0.0 || s.abs() > 1e15 {
                    return Err(Error::Invalid(format!(
                        "coordinate {v} is not a dyadic rational with denominator <= 2^{MAX_EXP}"
                    )));
                }
                out[k] = s as i64;
            }
            ints.push(out);
        }
        Self::new(MAX_EXP, ints)
    }

    /// The axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::Invalid(format!("degenerate rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        Self::from_f64(&[[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// The rectangle with integer corners over `2^exp`.
    pub fn rect_exact(exp: u32, x0: i64, y0: i64, x1: i64, y1: i64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::Invalid("degenerate rectangle".into()));
        }
        Self::new(exp, vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// The square of sup-norm radius `r` centered at `(cx, cy)`.
    pub fn square(cx: f64, cy: f64, r: f64) -> Result<Self> {
        Self::rectangle(cx - r, cy - r, cx + r, cy + r)
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn corners(&self) -> &[[i64; 2]] {
        &self.corners
    }

    /// The denominator `2^exp` of the stored corners.
    pub fn denominator(&self) -> i64 {
        1i64 << self.exp
    }

    /// Corners as floating-point coordinates.
    pub fn corners_f64(&self) -> Vec<[f64; 2]> {
        let d = self.denominator() as f64;
        self.corners.iter().map(|c| [c[0] as f64 / d, c[1] as f64 / d]).collect()
    }

    /// `Some([x0, y0, x1, y1])` when the polygon is an axis-aligned rectangle.
    pub fn as_rectangle(&self) -> Option<[i64; 4]> {
        if self.corners.len() != 4 {
            return None;
        }
        let (x0, y0, x1, y1) = self.bbox();
        Some([x0, y0, x1, y1])
    }

    /// Bounding box `(x0, y0, x1, y1)` in stored units.
    pub fn bbox(&self) -> (i64, i64, i64, i64) {
        let x0 = self.corners.iter().map(|c| c[0]).min().unwrap();
        let x1 = self.corners.iter().map(|c| c[0]).max().unwrap();
        let y0 = self.corners.iter().map(|c| c[1]).min().unwrap();
        let y1 = self.corners.iter().map(|c| c[1]).max().unwrap();
        (x0, y0, x1, y1)
    }

    /// Corners expressed as integers over `denom`, which must be a multiple
    /// of `2^exp`.
    pub fn corners_over(&self, denom: i64) -> Option<Vec<[i64; 2]>> {
        let d = self.denominator();
        if denom <= 0 || denom % d != 0 {
            return None;
        }
        let f = denom / d;
        Some(self.corners.iter().map(|c| [c[0] * f, c[1] * f]).collect())
    }

    /// Locates the point `p / denom` relative to the closed region.
    pub fn locate(&self, p: [i64; 2], denom: i64) -> Location {
        let d = self.denominator() as i128;
        let q = [p[0] as i128 * d, p[1] as i128 * d];
        let scaled: Vec<[i128; 2]> = self
            .corners
            .iter()
            .map(|c| [c[0] as i128 * denom as i128, c[1] as i128 * denom as i128])
            .collect();
        locate_i128(&scaled, q)
    }

    /// True when the closed region of `other` lies in the closed region of
    /// `self`.
    pub fn contains_polygon(&self, other: &DyadicPolygon) -> bool {
        self.boundary_of_in(other, false)
    }

    /// True when the boundary of `other` lies in the open interior of `self`.
    pub fn strictly_contains_polygon(&self, other: &DyadicPolygon) -> bool {
        self.boundary_of_in(other, true)
    }

    /// Checks every point of `other`'s boundary against `self`. Both polygons
    /// are rescaled to a common grid (doubled so that midpoints stay
    /// integral); each boundary edge of `other` is cut at every coordinate
    /// where `self` has a corner, so testing the cut points and the midpoints
    /// of the pieces decides the whole edge.
    fn boundary_of_in(&self, other: &DyadicPolygon, strict: bool) -> bool {
        let e = self.exp.max(other.exp);
        let a: Vec<[i128; 2]> = rescale(self, e);
        let b: Vec<[i128; 2]> = rescale(other, e);
        let xs: Vec<i128> = a.iter().map(|c| c[0]).collect();
        let ys: Vec<i128> = a.iter().map(|c| c[1]).collect();
        let doubled: Vec<[i128; 2]> = a.iter().map(|c| [2 * c[0], 2 * c[1]]).collect();
        let m = b.len();
        for i in 0..m {
            let p = b[i];
            let q = b[(i + 1) % m];
            let (fixed, lo, hi, horizontal) = if p[1] == q[1] {
                (p[1], p[0].min(q[0]), p[0].max(q[0]), true)
            } else {
                (p[0], p[1].min(q[1]), p[1].max(q[1]), false)
            };
            let cuts_src = if horizontal { &xs } else { &ys };
            let mut cuts: Vec<i128> = cuts_src.iter().copied().filter(|&c| c > lo && c < hi).collect();
            cuts.push(lo);
            cuts.push(hi);
            cuts.sort_unstable();
            cuts.dedup();
            let mut probes = Vec::with_capacity(2 * cuts.len());
            for w in cuts.windows(2) {
                probes.push(2 * w[0]);
                probes.push(w[0] + w[1]);
            }
            probes.push(2 * hi);
            for t in probes {
                let pt = if horizontal { [t, 2 * fixed] } else { [2 * fixed, t] };
                match locate_i128(&doubled, pt) {
                    Location::Outside => return false,
                    Location::Boundary if strict => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// Boundary segments in stored units.
    pub fn segments(&self) -> impl Iterator<Item = ([i64; 2], [i64; 2])> + '_ {
        let m = self.corners.len();
        (0..m).map(move |i| (self.corners[i], self.corners[(i + 1) % m]))
    }

    /// Sup-norm dilation of the region by `eps` (given as an integer over
    /// `2^eps_exp`): each edge moves outward by `eps` and consecutive edges
    /// are re-intersected. Valid while no edge collapses; the result is
    /// re-validated.
    pub fn dilated(&self, eps: i64, eps_exp: u32) -> Result<Self> {
        let e = self.exp.max(eps_exp);
        let c: Vec<[i64; 2]> = self.corners.iter().map(|p| [p[0] << (e - self.exp), p[1] << (e - self.exp)]).collect();
        let eps = eps << (e - eps_exp);
        let m = c.len();
        let ccw = signed_area2(&c) > 0;
        // Outward normal of edge i: for a counterclockwise polygon the
        // outside is on the right of the direction of travel.
        let offset_line = |i: usize| -> (bool, i64) {
            let p = c[i];
            let q = c[(i + 1) % m];
            if p[1] == q[1] {
                let dir = (q[0] - p[0]).signum();
                let out = if ccw { -dir } else { dir };
                (true, p[1] + out * eps)
            } else {
                let dir = (q[1] - p[1]).signum();
                let out = if ccw { dir } else { -dir };
                (false, p[0] + out * eps)
            }
        };
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let prev = offset_line((i + m - 1) % m);
            let cur = offset_line(i);
            let corner = match (prev.0, cur.0) {
                (true, false) => [cur.1, prev.1],
                (false, true) => [prev.1, cur.1],
                _ => return Err(Error::Invariant("collinear consecutive polygon edges".into())),
            };
            out.push(corner);
        }
        let result = DyadicPolygon::new(e, out)?;
        if !result.strictly_contains_polygon(self) && eps > 0 {
            return Err(Error::Invalid("dilation collapsed an edge".into()));
        }
        Ok(result)
    }
}

fn rescale(p: &DyadicPolygon, e: u32) -> Vec<[i128; 2]> {
    let f = 1i128 << (e - p.exp);
    p.corners.iter().map(|c| [c[0] as i128 * f, c[1] as i128 * f]).collect()
}

impl DyadicPolygon {
    fn reduce(&mut self) {
        while self.exp > 0 && self.corners.iter().all(|c| c[0] % 2 == 0 && c[1] % 2 == 0) {
            for c in &mut self.corners {
                c[0] /= 2;
                c[1] /= 2;
            }
            self.exp -= 1;
        }
    }
}

fn normalize_corners(mut corners: Vec<[i64; 2]>) -> Vec<[i64; 2]> {
    corners.dedup();
    while corners.len() > 1 && corners.first() == corners.last() {
        corners.pop();
    }
    // Drop corners that sit in the middle of a straight run.
    loop {
        let m = corners.len();
        if m < 3 {
            return corners;
        }
        let mut removed = false;
        for i in 0..m {
            let a = corners[(i + m - 1) % m];
            let b = corners[i];
            let c = corners[(i + 1) % m];
            if (a[0] == b[0] && b[0] == c[0]) || (a[1] == b[1] && b[1] == c[1]) {
                corners.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return corners;
        }
    }
}

/// Converts a floating-point value to `num / 2^exp` with the smallest
/// exponent; fails unless the value is dyadic with denominator at most
/// `2^MAX_EXP`.
pub fn dyadic_from_f64(v: f64) -> Result<(i64, u32)> {
    let s = v * (1u64 << MAX_EXP) as f64;
    if !s.is_finite() || s.fract() != 0.0 || s.abs() > 1e15 {
        return Err(Error::Invalid(format!("{v} is not a dyadic rational with denominator <= 2^{MAX_EXP}")));
    }
    let (mut num, mut exp) = (s as i64, MAX_EXP);
    while exp > 0 && num % 2 == 0 {
        num /= 2;
        exp -= 1;
    }
    Ok((num, exp))
}

/// Twice the signed area of a closed corner sequence.
pub(crate) fn signed_area2(c: &[[i64; 2]]) -> i128 {
    let m = c.len();
    (0..m)
        .map(|i| {
            let p = c[i];
            let q = c[(i + 1) % m];
            p[0] as i128 * q[1] as i128 - q[0] as i128 * p[1] as i128
        })
        .sum()
}

fn is_simple(c: &[[i64; 2]]) -> bool {
    let m = c.len();
    for i in 0..m {
        for j in (i + 1)..m {
            let adjacent = j == i + 1 || (i == 0 && j == m - 1);
            let (a, b) = (c[i], c[(i + 1) % m]);
            let (p, q) = (c[j], c[(j + 1) % m]);
            if adjacent {
                // Adjacent edges share exactly one corner; they may not fold
                // back onto each other.
                if overlap_len(a, b, p, q) > 0 {
                    return false;
                }
            } else if segments_touch(a, b, p, q) {
                return false;
            }
        }
    }
    true
}

fn overlap_len(a: [i64; 2], b: [i64; 2], p: [i64; 2], q: [i64; 2]) -> i64 {
    if a[1] == b[1] && p[1] == q[1] && a[1] == p[1] {
        let lo = a[0].min(b[0]).max(p[0].min(q[0]));
        let hi = a[0].max(b[0]).min(p[0].max(q[0]));
        (hi - lo).max(0)
    } else if a[0] == b[0] && p[0] == q[0] && a[0] == p[0] {
        let lo = a[1].min(b[1]).max(p[1].min(q[1]));
        let hi = a[1].max(b[1]).min(p[1].max(q[1]));
        (hi - lo).max(0)
    } else {
        0
    }
}

/// Whether two axis-aligned segments share at least one point.
pub(crate) fn segments_touch(a: [i64; 2], b: [i64; 2], p: [i64; 2], q: [i64; 2]) -> bool {
    let (ax0, ax1) = (a[0].min(b[0]), a[0].max(b[0]));
    let (ay0, ay1) = (a[1].min(b[1]), a[1].max(b[1]));
    let (px0, px1) = (p[0].min(q[0]), p[0].max(q[0]));
    let (py0, py1) = (p[1].min(q[1]), p[1].max(q[1]));
    ax0 <= px1 && px0 <= ax1 && ay0 <= py1 && py0 <= ay1
}

/// Locates `p` relative to the closed region bounded by the rectilinear
/// corner cycle `c` (all in the same integer units).
pub(crate) fn locate_i128(c: &[[i128; 2]], p: [i128; 2]) -> Location {
    let m = c.len();
    let mut winding = 0i32;
    for i in 0..m {
        let a = c[i];
        let b = c[(i + 1) % m];
        let on = if a[1] == b[1] {
            p[1] == a[1] && p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0])
        } else {
            p[0] == a[0] && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
        };
        if on {
            return Location::Boundary;
        }
        if a[0] == b[0] && a[0] > p[0] {
            if a[1] <= p[1] && p[1] < b[1] {
                winding += 1;
            } else if b[1] <= p[1] && p[1] < a[1] {
                winding -= 1;
            }
        }
    }
    if winding != 0 {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// [`locate_i128`] for `i64` corners.
pub(crate) fn locate_i64(c: &[[i64; 2]], p: [i64; 2]) -> Location {
    let c: Vec<[i128; 2]> = c.iter().map(|v| [v[0] as i128, v[1] as i128]).collect();
    locate_i128(&c, [p[0] as i128, p[1] as i128])
}
