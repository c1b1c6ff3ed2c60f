//! The square lattice δZ², its dual, and discrete domains, discs and loops.
//!
//! Coordinates are stored in doubled units: the primal vertex `(iδ, jδ)` is
//! the integer pair `(2i, 2j)` and the dual vertex `((i+½)δ, (j+½)δ)` is
//! `(2i+1, 2j+1)`. Lattice neighbors sit at doubled distance 2 and the
//! midpoint of every edge is an integer pair, so all topological predicates
//! below are exact integer computations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygon::{DyadicPolygon, Location};

/// The mesh of the lattice: `δ = 1/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridGeometry {
    n: u32,
}

impl GridGeometry {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("mesh parameter n must be at least 1".into()));
        }
        Ok(GridGeometry { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The mesh size δ.
    pub fn mesh(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Denominator of doubled coordinates: the doubled coordinate `c` is the
    /// physical coordinate `c / (2n)`.
    pub fn denominator(&self) -> i64 {
        2 * self.n as i64
    }

    /// Physical position of a doubled-unit point.
    pub fn to_physical(&self, p: Point) -> [f64; 2] {
        let d = self.denominator() as f64;
        [p.x as f64 / d, p.y as f64 / d]
    }
}

/// A point of the doubled integer grid. Primal vertices have both
/// coordinates even, dual vertices both odd; points with mixed parity are
/// edge midpoints.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    /// The primal vertex `(iδ, jδ)`.
    pub const fn primal(i: i32, j: i32) -> Self {
        Point { x: 2 * i, y: 2 * j }
    }

    /// The dual vertex `((i+½)δ, (j+½)δ)`.
    pub const fn dual(i: i32, j: i32) -> Self {
        Point { x: 2 * i + 1, y: 2 * j + 1 }
    }

    pub fn is_primal(self) -> bool {
        self.x.rem_euclid(2) == 0 && self.y.rem_euclid(2) == 0
    }

    pub fn is_dual(self) -> bool {
        self.x.rem_euclid(2) == 1 && self.y.rem_euclid(2) == 1
    }

    pub fn is_vertex(self) -> bool {
        self.is_primal() || self.is_dual()
    }

    pub fn step(self, d: Dir) -> Point {
        let (dx, dy) = d.vector();
        Point::new(self.x + dx, self.y + dy)
    }

    /// The four lattice neighbors in the order E, N, W, S.
    pub fn neighbors(self) -> [Point; 4] {
        Dir::ALL.map(|d| self.step(d))
    }

    pub fn is_neighbor(self, other: Point) -> bool {
        self.is_vertex() && Dir::between(self, other).is_some()
    }

    /// The four faces (dual vertices for a primal point and vice versa)
    /// touching a vertex.
    pub fn corners(self) -> [Point; 4] {
        [
            Point::new(self.x + 1, self.y + 1),
            Point::new(self.x - 1, self.y + 1),
            Point::new(self.x - 1, self.y - 1),
            Point::new(self.x + 1, self.y - 1),
        ]
    }
}

/// The four lattice directions, in counterclockwise order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    E,
    N,
    W,
    S,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

    /// Displacement in doubled units.
    pub fn vector(self) -> (i32, i32) {
        match self {
            Dir::E => (2, 0),
            Dir::N => (0, 2),
            Dir::W => (-2, 0),
            Dir::S => (0, -2),
        }
    }

    pub fn left(self) -> Dir {
        match self {
            Dir::E => Dir::N,
            Dir::N => Dir::W,
            Dir::W => Dir::S,
            Dir::S => Dir::E,
        }
    }

    pub fn right(self) -> Dir {
        match self {
            Dir::E => Dir::S,
            Dir::N => Dir::E,
            Dir::W => Dir::N,
            Dir::S => Dir::W,
        }
    }

    pub fn opposite(self) -> Dir {
        self.left().left()
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Dir::E | Dir::W)
    }

    /// Direction of the step from `a` to its neighbor `b`.
    pub fn between(a: Point, b: Point) -> Option<Dir> {
        match (b.x - a.x, b.y - a.y) {
            (2, 0) => Some(Dir::E),
            (0, 2) => Some(Dir::N),
            (-2, 0) => Some(Dir::W),
            (0, -2) => Some(Dir::S),
            _ => None,
        }
    }
}

/// An unordered pair of lattice neighbors (primal or dual), stored with the
/// lexicographically smaller endpoint first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    a: Point,
    b: Point,
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-{:?}", self.a, self.b)
    }
}

impl Edge {
    pub fn new(p: Point, q: Point) -> Result<Self> {
        if !p.is_neighbor(q) {
            return Err(Error::NotNeighbors((p.x, p.y), (q.x, q.y)));
        }
        Ok(Self::new_unchecked(p, q))
    }

    pub(crate) fn new_unchecked(p: Point, q: Point) -> Self {
        if p <= q {
            Edge { a: p, b: q }
        } else {
            Edge { a: q, b: p }
        }
    }

    /// The edge leaving `p` in direction `d`.
    pub fn from_dir(p: Point, d: Dir) -> Self {
        Self::new_unchecked(p, p.step(d))
    }

    /// Smaller endpoint.
    pub fn a(&self) -> Point {
        self.a
    }

    /// Larger endpoint.
    pub fn b(&self) -> Point {
        self.b
    }

    pub fn is_primal(&self) -> bool {
        self.a.is_primal()
    }

    pub fn is_horizontal(&self) -> bool {
        self.a.y == self.b.y
    }

    pub fn midpoint(&self) -> Point {
        Point::new((self.a.x + self.b.x) / 2, (self.a.y + self.b.y) / 2)
    }

    pub fn has_endpoint(&self, p: Point) -> bool {
        self.a == p || self.b == p
    }

    /// The endpoint other than `p` (which must be an endpoint).
    pub fn other(&self, p: Point) -> Point {
        if self.a == p {
            self.b
        } else {
            self.a
        }
    }

    /// The unique edge of the other lattice crossing this one at its
    /// midpoint. Applying it twice is the identity.
    pub fn dual(&self) -> Edge {
        let m = self.midpoint();
        if self.is_horizontal() {
            Edge { a: Point::new(m.x, m.y - 1), b: Point::new(m.x, m.y + 1) }
        } else {
            Edge { a: Point::new(m.x - 1, m.y), b: Point::new(m.x + 1, m.y) }
        }
    }
}

/// The dual edge crossing `e`; see [`Edge::dual`].
pub fn dual_edge(e: Edge) -> Edge {
    e.dual()
}

/// A subgraph of the primal or dual lattice: a vertex set and an edge set.
///
/// The edge set is not required to be closed under taking endpoints, because
/// the explored regions of an exploration process contain edges whose
/// endpoints were removed (an edge of `D∖[γ]` may end on `γ`). Both sets are
/// kept sorted, which fixes the canonical vertex and edge indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgraph {
    geometry: GridGeometry,
    vertices: Vec<Point>,
    edges: Vec<Edge>,
}

impl Subgraph {
    pub fn new(
        geometry: GridGeometry,
        vertices: impl IntoIterator<Item = Point>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        let mut vertices: Vec<Point> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        Subgraph { geometry, vertices, edges }
    }

    pub fn empty(geometry: GridGeometry) -> Self {
        Subgraph { geometry, vertices: Vec::new(), edges: Vec::new() }
    }

    /// The vertex set together with every lattice edge joining two of its
    /// vertices.
    pub fn induced(geometry: GridGeometry, vertices: impl IntoIterator<Item = Point>) -> Self {
        let vs: BTreeSet<Point> = vertices.into_iter().collect();
        let mut edges = Vec::new();
        for &v in &vs {
            for d in [Dir::E, Dir::N] {
                let w = v.step(d);
                if vs.contains(&w) {
                    edges.push(Edge::new_unchecked(v, w));
                }
            }
        }
        Subgraph::new(geometry, vs, edges)
    }

    /// The full primal block `{i0..=i1} × {j0..=j1}` (lattice indices) with
    /// all its edges.
    pub fn block(geometry: GridGeometry, i0: i32, j0: i32, i1: i32, j1: i32) -> Self {
        let pts = (i0..=i1).flat_map(|i| (j0..=j1).map(move |j| Point::primal(i, j)));
        Subgraph::induced(geometry, pts)
    }

    /// The primal block covering the unit square at this mesh.
    pub fn unit_square(geometry: GridGeometry) -> Self {
        let n = geometry.n as i32;
        Subgraph::block(geometry, 0, 0, n, n)
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }

    pub fn contains_vertex(&self, p: Point) -> bool {
        self.vertices.binary_search(&p).is_ok()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Canonical index of `e` among the edges, if present.
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn vertex_index(&self, p: Point) -> Option<usize> {
        self.vertices.binary_search(&p).ok()
    }

    /// Edges of this subgraph that have `p` as an endpoint.
    pub fn incident_edges(&self, p: Point) -> impl Iterator<Item = Edge> + '_ {
        Dir::ALL.into_iter().map(move |d| Edge::from_dir(p, d)).filter(|e| self.contains_edge(*e))
    }

    /// True when every edge has both endpoints among the vertices.
    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|e| self.contains_vertex(e.a) && self.contains_vertex(e.b))
    }

    pub fn is_subgraph_of(&self, other: &Subgraph) -> bool {
        self.vertices.iter().all(|&v| other.contains_vertex(v))
            && self.edges.iter().all(|&e| other.contains_edge(e))
    }

    /// Vertex-wise and edge-wise union.
    pub fn union(&self, other: &Subgraph) -> Subgraph {
        Subgraph::new(
            self.geometry,
            self.vertices.iter().chain(other.vertices.iter()).copied(),
            self.edges.iter().chain(other.edges.iter()).copied(),
        )
    }

    /// `V(self)∖V(other)` and `E(self)∖E(other)`.
    pub fn difference(&self, other: &Subgraph) -> Subgraph {
        Subgraph {
            geometry: self.geometry,
            vertices: self.vertices.iter().copied().filter(|&v| !other.contains_vertex(v)).collect(),
            edges: self.edges.iter().copied().filter(|&e| !other.contains_edge(e)).collect(),
        }
    }

    /// Connected pieces. Two vertices are connected when an edge of the
    /// subgraph joins them; an edge belongs to the piece of its endpoints.
    /// Edges without an endpoint in the vertex set form their own pieces.
    pub fn components(&self) -> Vec<Subgraph> {
        let mut ids: HashMap<Point, usize> = HashMap::new();
        for v in &self.vertices {
            let k = ids.len();
            ids.insert(*v, k);
        }
        for e in &self.edges {
            for p in [e.a, e.b] {
                let k = ids.len();
                ids.entry(p).or_insert(k);
            }
        }
        let mut uf = UnionFind::new(ids.len());
        for e in &self.edges {
            uf.union(ids[&e.a], ids[&e.b]);
        }
        let mut groups: Vec<(Vec<Point>, Vec<Edge>)> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for v in &self.vertices {
            let r = uf.find(ids[v]);
            let k = *slot.entry(r).or_insert_with(|| {
                groups.push((Vec::new(), Vec::new()));
                groups.len() - 1
            });
            groups[k].0.push(*v);
        }
        for e in &self.edges {
            let r = uf.find(ids[&e.a]);
            let k = *slot.entry(r).or_insert_with(|| {
                groups.push((Vec::new(), Vec::new()));
                groups.len() - 1
            });
            groups[k].1.push(*e);
        }
        groups.into_iter().map(|(v, e)| Subgraph::new(self.geometry, v, e)).collect()
    }

    /// Bounding box `(min, max)` of the vertices and edge endpoints.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let pts = self.vertices.iter().copied().chain(self.edges.iter().flat_map(|e| [e.a, e.b]));
        let mut it = pts.peekable();
        it.peek()?;
        let (mut lo, mut hi) = (Point::new(i32::MAX, i32::MAX), Point::new(i32::MIN, i32::MIN));
        for p in it {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Some((lo, hi))
    }
}

/// The inner boundary `{x ∈ V(g) : some lattice neighbor of x is not in V(g)}`.
pub fn boundary(g: &Subgraph) -> Vec<Point> {
    g.vertices
        .iter()
        .copied()
        .filter(|v| v.neighbors().iter().any(|w| !g.contains_vertex(*w)))
        .collect()
}

/// Classes of discrete loops, from most to least restrictive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopClass {
    /// Distinct vertices (a single vertex, or at least four vertices).
    Simple,
    /// Distinct edges, and every visit to a vertex whose four incident edges
    /// all belong to the loop turns by a right angle.
    WeaklySimple,
    /// Distinct oriented edges, and no vertex is passed straight through
    /// once horizontally and once vertically.
    NonSelfCrossing,
    General,
}

impl LoopClass {
    /// True when a loop of this class is at least as regular as `other`.
    pub fn at_least(self, other: LoopClass) -> bool {
        self <= other
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "cw")]
    Clockwise,
    #[serde(rename = "ccw")]
    CounterClockwise,
    #[serde(rename = "undefined")]
    Undefined,
}

/// A closed lattice walk `(x_0, …, x_{m-1}, x_0)`, stored without the
/// repeated closing vertex. A single vertex is the degenerate point loop.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteLoop {
    vertices: Vec<Point>,
}

impl DiscreteLoop {
    /// Builds a loop from a vertex cycle; a trailing copy of the first vertex
    /// is accepted and dropped.
    pub fn new(mut seq: Vec<Point>) -> Result<Self> {
        if seq.len() > 1 && seq.first() == seq.last() {
            seq.pop();
        }
        if seq.is_empty() {
            return Err(Error::MalformedLoop("empty vertex sequence".into()));
        }
        if !seq[0].is_vertex() {
            return Err(Error::MalformedLoop(format!("{:?} is not a lattice vertex", seq[0])));
        }
        if seq.len() > 1 {
            for i in 0..seq.len() {
                let p = seq[i];
                let q = seq[(i + 1) % seq.len()];
                if !p.is_neighbor(q) {
                    return Err(Error::MalformedLoop(format!(
                        "consecutive vertices {p:?} and {q:?} are not neighbors"
                    )));
                }
            }
        }
        Ok(DiscreteLoop { vertices: seq })
    }

    pub(crate) fn new_unchecked(vertices: Vec<Point>) -> Self {
        DiscreteLoop { vertices }
    }

    /// The point loop at `p`.
    pub fn point(p: Point) -> Self {
        DiscreteLoop { vertices: vec![p] }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Number of traversed edges (0 for a point loop).
    pub fn len(&self) -> usize {
        if self.vertices.len() == 1 {
            0
        } else {
            self.vertices.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_primal(&self) -> bool {
        self.vertices[0].is_primal()
    }

    /// Oriented edges `(x_i, x_{i+1})`.
    pub fn steps(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let m = self.vertices.len();
        (0..self.len()).map(move |i| (self.vertices[i], self.vertices[(i + 1) % m]))
    }

    /// Traversed edges in traversal order (with repetitions, if any).
    pub fn edges(&self) -> Vec<Edge> {
        self.steps().map(|(p, q)| Edge::new_unchecked(p, q)).collect()
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.steps().map(|(p, q)| Edge::new_unchecked(p, q)).collect()
    }

    pub fn vertex_set(&self) -> BTreeSet<Point> {
        self.vertices.iter().copied().collect()
    }

    /// Twice the signed shoelace area, in doubled units squared. Positive
    /// for counterclockwise traversal.
    pub fn signed_area2(&self) -> i64 {
        self.steps().map(|(p, q)| p.x as i64 * q.y as i64 - q.x as i64 * p.y as i64).sum()
    }

    pub fn reversed(&self) -> DiscreteLoop {
        let mut v = self.vertices.clone();
        v.reverse();
        DiscreteLoop { vertices: v }
    }

    /// The same cycle started at index `k`.
    pub fn rotated(&self, k: usize) -> DiscreteLoop {
        let mut v = self.vertices.clone();
        v.rotate_left(k % self.vertices.len());
        DiscreteLoop { vertices: v }
    }

    /// The rotation starting at the first occurrence of the smallest vertex.
    pub fn canonical_rotation(&self) -> DiscreteLoop {
        let k = (0..self.vertices.len()).min_by_key(|&i| self.vertices[i]).unwrap();
        self.rotated(k)
    }

    /// Equality up to cyclic rotation of the traversal.
    pub fn same_cycle(&self, other: &DiscreteLoop) -> bool {
        let m = self.vertices.len();
        if m != other.vertices.len() {
            return false;
        }
        (0..m).any(|k| (0..m).all(|i| self.vertices[(i + k) % m] == other.vertices[i]))
    }

    /// Equality of the loops as planar graphs (same vertices and edges),
    /// i.e. equality of their continuous versions as subsets of the plane.
    pub fn same_trace(&self, other: &DiscreteLoop) -> bool {
        self.vertex_set() == other.vertex_set() && self.edge_set() == other.edge_set()
    }

    /// Class and orientation; the orientation is defined for weakly simple
    /// loops with nonzero area and undefined otherwise.
    pub fn classify(&self) -> (LoopClass, Orientation) {
        let class = self.class();
        let orientation = if class.at_least(LoopClass::WeaklySimple) {
            match self.signed_area2().signum() {
                1 => Orientation::CounterClockwise,
                -1 => Orientation::Clockwise,
                _ => Orientation::Undefined,
            }
        } else {
            Orientation::Undefined
        };
        (class, orientation)
    }

    pub fn orientation(&self) -> Orientation {
        self.classify().1
    }

    pub fn class(&self) -> LoopClass {
        let m = self.vertices.len();
        if m == 1 {
            return LoopClass::Simple;
        }
        let distinct_vertices = self.vertex_set().len() == m;
        if distinct_vertices && m >= 4 {
            return LoopClass::Simple;
        }
        let edges = self.edges();
        let edge_set: HashSet<Edge> = edges.iter().copied().collect();
        let visits = self.visits();
        if edge_set.len() == edges.len() {
            let full = |v: Point| Dir::ALL.iter().all(|&d| edge_set.contains(&Edge::from_dir(v, d)));
            if visits.iter().all(|&(v, din, dout)| !full(v) || din.is_horizontal() != dout.is_horizontal()) {
                return LoopClass::WeaklySimple;
            }
        }
        let oriented: HashSet<(Point, Point)> = self.steps().collect();
        if oriented.len() == self.len() {
            let mut straight: HashMap<Point, (bool, bool)> = HashMap::new();
            for &(v, din, dout) in &visits {
                if din == dout {
                    let slot = straight.entry(v).or_default();
                    if din.is_horizontal() {
                        slot.0 = true;
                    } else {
                        slot.1 = true;
                    }
                }
            }
            if !straight.values().any(|&(h, v)| h && v) {
                return LoopClass::NonSelfCrossing;
            }
        }
        LoopClass::General
    }

    /// Each visit `(x_i, incoming direction, outgoing direction)`.
    fn visits(&self) -> Vec<(Point, Dir, Dir)> {
        let m = self.vertices.len();
        (0..m)
            .map(|i| {
                let prev = self.vertices[(i + m - 1) % m];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % m];
                (cur, Dir::between(prev, cur).unwrap(), Dir::between(cur, next).unwrap())
            })
            .collect()
    }

    /// True when `p` is a vertex of the loop or lies on one of its edges.
    pub fn touches(&self, p: Point) -> bool {
        if self.len() == 0 {
            return self.vertices[0] == p;
        }
        self.steps().any(|(a, b)| {
            if a.y == b.y {
                p.y == a.y && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x)
            } else {
                p.x == a.x && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
            }
        })
    }

    /// Winding number of the loop around a point not on the loop.
    pub fn winding_number(&self, p: Point) -> i32 {
        let mut w = 0;
        for (a, b) in self.steps() {
            if a.x == b.x && a.x > p.x {
                if a.y <= p.y && p.y < b.y {
                    w += 1;
                } else if b.y <= p.y && p.y < a.y {
                    w -= 1;
                }
            }
        }
        w
    }

    /// True when `p` lies in the closed region bounded by the loop: on the
    /// loop or with nonzero winding number.
    pub fn encloses(&self, p: Point) -> bool {
        self.touches(p) || self.winding_number(p) != 0
    }

    /// True when `p` is off the loop and has nonzero winding number.
    pub fn strictly_encloses(&self, p: Point) -> bool {
        !self.touches(p) && self.winding_number(p) != 0
    }

    /// All lattice points of the loop's own kind (primal or dual) lying in
    /// the closed region bounded by the loop, in sorted order.
    pub fn closed_region(&self) -> Vec<Point> {
        if self.len() == 0 {
            return vec![self.vertices[0]];
        }
        let on_loop: BTreeSet<Point> = self.vertices.iter().copied().collect();
        let mut out = self.scan_region(0, |p, w| w != 0 || on_loop.contains(&p));
        out.sort_unstable();
        out
    }

    /// The points of the other lattice (faces, for a primal loop) with
    /// nonzero winding number, in sorted order.
    pub fn interior_faces(&self) -> Vec<Point> {
        let mut out = self.scan_region(1, |_, w| w != 0);
        out.sort_unstable();
        out
    }

    /// Scans the points offset by `(offset, offset)` from the loop's lattice
    /// inside its bounding box, one scanline per row, keeping those accepted
    /// by `keep(point, winding number)`.
    fn scan_region(&self, offset: i32, mut keep: impl FnMut(Point, i32) -> bool) -> Vec<Point> {
        let v0 = self.vertices[0];
        let (mut lo, mut hi) = (v0, v0);
        for &v in &self.vertices {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let mut out = Vec::new();
        let mut crossings: Vec<(i32, i32)> = Vec::new();
        let mut y = lo.y + offset;
        while y <= hi.y {
            crossings.clear();
            for (a, b) in self.steps() {
                if a.x == b.x {
                    if a.y <= y && y < b.y {
                        crossings.push((a.x, 1));
                    } else if b.y <= y && y < a.y {
                        crossings.push((a.x, -1));
                    }
                }
            }
            crossings.sort_unstable();
            let mut w: i32 = crossings.iter().map(|c| c.1).sum();
            let mut k = 0;
            let mut x = lo.x + offset;
            while x <= hi.x {
                while k < crossings.len() && crossings[k].0 <= x {
                    w -= crossings[k].1;
                    k += 1;
                }
                let p = Point::new(x, y);
                if keep(p, w) {
                    out.push(p);
                }
                x += 2;
            }
            y += 2;
        }
        out
    }

    /// True when every point of this loop lies in the closed region bounded
    /// by `other` ("this loop is inside `other`").
    pub fn is_inside(&self, other: &DiscreteLoop) -> bool {
        self.vertices.iter().all(|&v| other.encloses(v))
            && self.steps().all(|(a, b)| {
                other.encloses(Point::new((a.x + b.x) / 2, (a.y + b.y) / 2))
            })
    }

    /// Euclidean diameter of the vertex set, in physical units.
    pub fn diameter(&self, geometry: GridGeometry) -> f64 {
        let mut best = 0i64;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                let dx = (p.x - q.x) as i64;
                let dy = (p.y - q.y) as i64;
                best = best.max(dx * dx + dy * dy);
            }
        }
        (best as f64).sqrt() / geometry.denominator() as f64
    }
}

/// Classifies the vertex cycle `seq` (closing vertex optional).
pub fn classify_loop(seq: &[Point]) -> Result<(LoopClass, Orientation)> {
    Ok(DiscreteLoop::new(seq.to_vec())?.classify())
}

/// Whether `dual_loop` surrounds `l`: for every edge `e` of `l`, the endpoint
/// of `e*` outside `l` is a vertex of `dual_loop`.
pub fn surrounds(dual_loop: &DiscreteLoop, l: &DiscreteLoop) -> Result<bool> {
    if dual_loop.class() != LoopClass::Simple || dual_loop.is_primal() == l.is_primal() {
        return Err(Error::LoopClass("the surrounding loop must be a simple loop of the other lattice".into()));
    }
    if !l.class().at_least(LoopClass::WeaklySimple) {
        return Err(Error::LoopClass("the surrounded loop must be weakly simple".into()));
    }
    let ring = dual_loop.vertex_set();
    for e in l.edge_set() {
        let d = e.dual();
        let outside: Vec<Point> = [d.a(), d.b()].into_iter().filter(|&p| l.winding_number(p) == 0).collect();
        if outside.is_empty() || !outside.iter().all(|p| ring.contains(p)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The walk around the outer face of a connected subgraph, keeping the
/// outside on the right (counterclockwise for a disc). Uses the subgraph's
/// own edges. Returns the point loop for a single vertex.
pub fn outer_boundary_walk(g: &Subgraph) -> Result<DiscreteLoop> {
    let start = *g.vertices().first().ok_or_else(|| Error::NotADisc("empty subgraph".into()))?;
    let has = |p: Point, d: Dir| g.contains_edge(Edge::from_dir(p, d)) && g.contains_vertex(p.step(d));
    let choose = |p: Point, heading: Dir| {
        [heading.right(), heading, heading.left(), heading.opposite()].into_iter().find(|&d| has(p, d))
    };
    let first = match choose(start, Dir::S) {
        Some(d) => d,
        None => return Ok(DiscreteLoop::point(start)),
    };
    let mut seq = vec![start];
    let (mut cur, mut heading) = (start.step(first), first);
    let limit = 4 * g.num_edges() + 4;
    while seq.len() <= limit {
        let next = choose(cur, heading).ok_or_else(|| Error::Invariant("boundary walk got stuck".into()))?;
        if cur == start && next == first {
            return Ok(DiscreteLoop::new_unchecked(seq));
        }
        seq.push(cur);
        cur = cur.step(next);
        heading = next;
    }
    Err(Error::Invariant("boundary walk did not close".into()))
}

/// A discrete disc: a connected subgraph whose boundary is traversed by a
/// non-self-crossing loop.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteDisc {
    graph: Subgraph,
    boundary: DiscreteLoop,
}

impl DiscreteDisc {
    /// Certifies `g` as a disc. The certificate: `g` is nonempty, closed and
    /// connected; its outer boundary walk is non-self-crossing; and every
    /// vertex with fewer than four incident edges of `g` lies on that walk
    /// (so there are no holes).
    pub fn from_subgraph(g: Subgraph) -> Result<Self> {
        if g.vertices().is_empty() {
            return Err(Error::NotADisc("no vertices".into()));
        }
        if !g.is_closed() {
            return Err(Error::NotADisc("an edge has an endpoint outside the vertex set".into()));
        }
        if g.components().len() != 1 {
            return Err(Error::NotADisc("not connected".into()));
        }
        let walk = outer_boundary_walk(&g)?;
        if !walk.class().at_least(LoopClass::NonSelfCrossing) {
            return Err(Error::NotADisc("the boundary walk crosses itself".into()));
        }
        let on_walk = walk.vertex_set();
        for &v in g.vertices() {
            if g.incident_edges(v).count() < 4 && !on_walk.contains(&v) {
                return Err(Error::NotADisc(format!("vertex {v:?} borders a hole")));
            }
        }
        // No holes: every vertex of the closed region bounded by the walk
        // belongs to `g`, and so does every edge running through its interior.
        for v in walk.closed_region() {
            if !g.contains_vertex(v) {
                return Err(Error::NotADisc(format!("the boundary encloses the missing vertex {v:?}")));
            }
            if on_walk.contains(&v) {
                for d in [Dir::E, Dir::N] {
                    let w = v.step(d);
                    let e = Edge::new_unchecked(v, w);
                    if on_walk.contains(&w)
                        && !g.contains_edge(e)
                        && walk.strictly_encloses(e.midpoint())
                    {
                        return Err(Error::NotADisc(format!("the boundary encloses the missing edge {e:?}")));
                    }
                }
            }
        }
        Ok(DiscreteDisc { graph: g, boundary: walk })
    }

    pub fn graph(&self) -> &Subgraph {
        &self.graph
    }

    pub fn geometry(&self) -> GridGeometry {
        self.graph.geometry()
    }

    /// The boundary walk, counterclockwise and starting at the smallest
    /// vertex.
    pub fn boundary_loop(&self) -> &DiscreteLoop {
        &self.boundary
    }

    /// The vertex boundary `∂K`.
    pub fn boundary_vertices(&self) -> Vec<Point> {
        boundary(&self.graph)
    }

    /// The dual disc `K*`: all faces touching a vertex of `K`, with every
    /// dual edge between two of them. Its boundary is the simple dual loop
    /// surrounding `∂K`.
    pub fn dual(&self) -> Result<DiscreteDisc> {
        let faces: BTreeSet<Point> = self.graph.vertices().iter().flat_map(|v| v.corners()).collect();
        DiscreteDisc::from_subgraph(Subgraph::induced(self.geometry(), faces))
    }
}

/// Domain specifications accepted by [`discretize_domain`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// The rectangle `[x0, x1] × [y0, y1]` with dyadic corners.
    Rectangle { x0: f64, y0: f64, x1: f64, y1: f64 },
    /// A simple rectilinear polygon with dyadic corners, listed in order.
    Polygon { corners: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        DomainSpec::Rectangle { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    pub fn polygon(&self) -> Result<DyadicPolygon> {
        match self {
            DomainSpec::Rectangle { x0, y0, x1, y1 } => DyadicPolygon::rectangle(*x0, *y0, *x1, *y1),
            DomainSpec::Polygon { corners } => DyadicPolygon::from_f64(corners),
        }
    }
}

/// The largest δ-disc contained in the closed domain: lattice vertices in
/// the domain, lattice edges whose midpoint lies in the domain, restricted to
/// the largest connected piece (ties broken by the smallest vertex).
pub fn discretize_domain(spec: &DomainSpec, n: u32) -> Result<DiscreteDisc> {
    let geometry = GridGeometry::new(n)?;
    let poly = spec.polygon()?;
    let d = poly.denominator() as f64;
    let (x0, y0, x1, y1) = poly.bbox();
    let nf = n as f64;
    let (i0, i1) = ((x0 as f64 / d * nf).floor() as i32 - 1, (x1 as f64 / d * nf).ceil() as i32 + 1);
    let (j0, j1) = ((y0 as f64 / d * nf).floor() as i32 - 1, (y1 as f64 / d * nf).ceil() as i32 + 1);
    let denom = geometry.denominator();
    let inside = |p: Point| poly.locate([p.x as i64, p.y as i64], denom) != Location::Outside;
    let mut vertices = Vec::new();
    for i in i0..=i1 {
        for j in j0..=j1 {
            let p = Point::primal(i, j);
            if inside(p) {
                vertices.push(p);
            }
        }
    }
    let vs: HashSet<Point> = vertices.iter().copied().collect();
    let mut edges = Vec::new();
    for &v in &vertices {
        for dir in [Dir::E, Dir::N] {
            let w = v.step(dir);
            let e = Edge::new_unchecked(v, w);
            if vs.contains(&w) && inside(e.midpoint()) {
                edges.push(e);
            }
        }
    }
    if edges.is_empty() {
        return Err(Error::Invalid(format!("domain contains no lattice edge at n={n}")));
    }
    let g = Subgraph::new(geometry, vertices, edges);
    let best = g
        .components()
        .into_iter()
        .max_by(|a, b| a.num_vertices().cmp(&b.num_vertices()).then(b.vertices()[0].cmp(&a.vertices()[0])))
        .unwrap();
    DiscreteDisc::from_subgraph(best)
}

/// Dense indexing of the doubled-grid points in a bounding box, used by the
/// performance-sensitive algorithms in place of hash maps.
#[derive(Clone, Debug)]
pub struct PointIndex {
    x0: i32,
    y0: i32,
    w: usize,
    h: usize,
}

impl PointIndex {
    /// An index covering the box `[lo, hi]` enlarged by `margin` on all
    /// sides.
    pub fn covering(lo: Point, hi: Point, margin: i32) -> Self {
        let (x0, y0) = (lo.x - margin, lo.y - margin);
        let w = (hi.x + margin - x0 + 1).max(0) as usize;
        let h = (hi.y + margin - y0 + 1).max(0) as usize;
        PointIndex { x0, y0, w, h }
    }

    pub fn len(&self) -> usize {
        self.w * self.h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, p: Point) -> Option<usize> {
        let dx = p.x - self.x0;
        let dy = p.y - self.y0;
        if dx < 0 || dy < 0 || dx as usize >= self.w || dy as usize >= self.h {
            return None;
        }
        Some(dy as usize * self.w + dx as usize)
    }

    pub fn point(&self, idx: usize) -> Point {
        Point::new(self.x0 + (idx % self.w) as i32, self.y0 + (idx / self.w) as i32)
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
