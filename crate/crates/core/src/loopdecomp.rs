//! Loop decomposition of sourceless configurations: peeling by exposure
//! level, detection of outmost loops, and concatenation into disjoint weakly
//! simple loops.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    Dir, DiscreteDisc, DiscreteLoop, Edge, LoopClass, Orientation, Point, PointIndex,
    Subgraph, UnionFind,
};
use crate::percolation::Config;

/// A loop of a decomposition together with its level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelledLoop {
    pub cycle: DiscreteLoop,
    pub level: u32,
    pub orientation: Orientation,
    /// Whether the seed loop is outmost, i.e. surrounded by a simple loop of
    /// open dual edges through faces touching it. Seeds that are not
    /// outmost have one-face pockets that no simple dual loop can enter.
    pub seed_outmost: bool,
}

/// The output of [`peel_levels`].
#[derive(Clone, Debug)]
pub struct Peeling {
    /// `levels[i]` holds the loops peeled at level `i + 1`, in peeling
    /// order, oriented clockwise at odd and counterclockwise at even levels.
    pub levels: Vec<Vec<DiscreteLoop>>,
    /// `residuals[i]` is the configuration left before peeling level
    /// `i + 1`; the last entry is the empty configuration.
    pub residuals: Vec<Config>,
}

/// Disjoint weakly simple loops whose edges are exactly the open edges.
#[derive(Clone, Debug)]
pub struct LoopDecomposition {
    pub loops: Vec<LevelledLoop>,
    /// The decomposed configuration, restricted to the disc.
    pub source_config: Config,
    /// The highest peeling level reached (`0` for the empty configuration).
    pub max_level: u32,
}

/// Orientation carried by loops of a given level.
pub fn level_orientation(level: u32) -> Orientation {
    if level % 2 == 1 {
        Orientation::Clockwise
    } else {
        Orientation::CounterClockwise
    }
}

/// Dense per-disc lookup tables in doubled coordinates.
struct Frame<'a> {
    disc: &'a DiscreteDisc,
    index: PointIndex,
    /// Faces of the dual disc `K*`.
    face_in: Vec<bool>,
    /// Vertices of the boundary loop of `K*`.
    outer_faces: Vec<Point>,
}

impl<'a> Frame<'a> {
    fn new(disc: &'a DiscreteDisc) -> Result<Self> {
        let dual = disc.dual()?;
        let (lo, hi) = dual.graph().bounding_box().expect("a dual disc is nonempty");
        let index = PointIndex::covering(lo, hi, 2);
        let mut face_in = vec![false; index.len()];
        for &f in dual.graph().vertices() {
            face_in[index.index(f).unwrap()] = true;
        }
        let outer_faces = dual.boundary_loop().vertices().to_vec();
        Ok(Frame { disc, index, face_in, outer_faces })
    }

    fn at(&self, p: Point) -> usize {
        self.index.index(p).expect("point inside the frame")
    }

    fn has_face(&self, f: Point) -> bool {
        self.index.index(f).is_some_and(|i| self.face_in[i])
    }

    /// Open-edge table (indexed by midpoint) for the edges of `k` in `E(K)`.
    fn open_table(&self, k: &Config) -> Vec<bool> {
        let mut open = vec![false; self.index.len()];
        for e in k.open_edges() {
            if self.disc.graph().contains_edge(e) {
                open[self.at(e.midpoint())] = true;
            }
        }
        open
    }

    /// Whether the dual edge between two faces is open in the dual
    /// configuration of `open`: both faces lie in `K*` and the crossing
    /// primal edge is closed (or absent from `K`).
    fn dual_open(&self, open: &[bool], f: Point, d: Dir) -> bool {
        let g = f.step(d);
        if !self.has_face(f) || !self.has_face(g) {
            return false;
        }
        let mid = Point::new((f.x + g.x) / 2, (f.y + g.y) / 2);
        !open[self.at(mid)]
    }

    /// Faces joined to the boundary loop of `K*` by open dual edges.
    fn reached_faces(&self, open: &[bool]) -> Vec<bool> {
        let mut reached = vec![false; self.index.len()];
        let mut queue: Vec<Point> = Vec::new();
        for &f in &self.outer_faces {
            let i = self.at(f);
            if !reached[i] {
                reached[i] = true;
                queue.push(f);
            }
        }
        while let Some(f) = queue.pop() {
            for d in Dir::ALL {
                if self.dual_open(open, f, d) {
                    let g = f.step(d);
                    let i = self.at(g);
                    if !reached[i] {
                        reached[i] = true;
                        queue.push(g);
                    }
                }
            }
        }
        reached
    }

    fn degree(&self, open: &[bool], v: Point) -> usize {
        Dir::ALL.iter().filter(|&&d| open[self.at(half_step(v, d))]).count()
    }
}

/// The point half a lattice step from `p`: an edge midpoint for a vertex.
fn half_step(p: Point, d: Dir) -> Point {
    let (dx, dy) = d.vector();
    Point::new(p.x + dx / 2, p.y + dy / 2)
}

/// The face to the right of the step leaving `p` in direction `d`.
fn right_face(p: Point, d: Dir) -> Point {
    let m = half_step(p, d);
    half_step(m, d.right())
}

fn check_sources(k: &Config, disc: &DiscreteDisc) -> Result<()> {
    let sources = k.source_set(disc.graph());
    if sources.is_empty() {
        Ok(())
    } else {
        Err(Error::HasSources(sources.len()))
    }
}

/// Peels a sourceless configuration level by level. At each level the
/// exposed edges are the open edges whose dual edge touches the dual
/// component of the boundary of `K*`; they are traced into loops keeping
/// that component on the right, turning towards it at vertices with four
/// open edges.
pub fn peel_levels(k: &Config, disc: &DiscreteDisc) -> Result<Peeling> {
    check_sources(k, disc)?;
    let frame = Frame::new(disc)?;
    let support = Arc::new(disc.graph().clone());
    let mut open = frame.open_table(k);
    let mut levels = Vec::new();
    let mut residuals = vec![residual_config(&frame, &support, &open)];
    let mut remaining = residuals[0].num_open();
    while remaining > 0 {
        let level = levels.len() as u32 + 1;
        let reached = frame.reached_faces(&open);
        let loops = peel_one_level(&frame, &open, &reached)?;
        if loops.is_empty() {
            return Err(Error::Invariant(format!("no exposed edge at level {level}")));
        }
        let mut oriented = Vec::with_capacity(loops.len());
        for l in loops {
            for e in l.edges() {
                open[frame.at(e.midpoint())] = false;
                remaining -= 1;
            }
            let l = if level % 2 == 1 { l.reversed() } else { l };
            let (class, orientation) = l.classify();
            if !class.at_least(LoopClass::WeaklySimple) || orientation != level_orientation(level) {
                return Err(Error::Invariant(format!(
                    "peeled loop at level {level} is {class:?} with orientation {orientation:?}"
                )));
            }
            oriented.push(l);
        }
        levels.push(oriented);
        residuals.push(residual_config(&frame, &support, &open));
    }
    Ok(Peeling { levels, residuals })
}

fn residual_config(frame: &Frame<'_>, support: &Arc<Subgraph>, open: &[bool]) -> Config {
    let mut c = Config::empty(Arc::clone(support));
    for (i, e) in support.edges().iter().enumerate() {
        if open[frame.at(e.midpoint())] {
            c.set_bit(i, true);
        }
    }
    c
}

/// Traces all loops of one level, counterclockwise (reached side on the
/// right), starting each at the smallest unused exposed edge.
fn peel_one_level(frame: &Frame<'_>, open: &[bool], reached: &[bool]) -> Result<Vec<DiscreteLoop>> {
    let mut used = vec![false; frame.index.len()];
    let mut loops = Vec::new();
    let mut touched = vec![false; frame.index.len()];
    for &e in frame.disc.graph().edges() {
        let m = frame.at(e.midpoint());
        if !open[m] || used[m] {
            continue;
        }
        let d = Dir::between(e.a(), e.b()).unwrap();
        let (x0, first) = if reached[frame.at(right_face(e.a(), d))] {
            (e.a(), d)
        } else if reached[frame.at(right_face(e.b(), d.opposite()))] {
            (e.b(), d.opposite())
        } else {
            continue;
        };
        let l = trace_loop(frame, open, reached, &mut used, x0, first)?;
        for &v in l.vertices() {
            let i = frame.at(v);
            if touched[i] {
                return Err(Error::Invariant(format!("two loops of one level share the vertex {v:?}")));
            }
        }
        for &v in l.vertices() {
            touched[frame.at(v)] = true;
        }
        loops.push(l);
    }
    Ok(loops)
}

fn trace_loop(
    frame: &Frame<'_>,
    open: &[bool],
    reached: &[bool],
    used: &mut [bool],
    x0: Point,
    first: Dir,
) -> Result<DiscreteLoop> {
    let mut seq = vec![x0];
    used[frame.at(half_step(x0, first))] = true;
    let (mut cur, mut heading) = (x0.step(first), first);
    loop {
        let next = match frame.degree(open, cur) {
            2 => Dir::ALL
                .into_iter()
                .find(|&d| d != heading.opposite() && open[frame.at(half_step(cur, d))])
                .unwrap(),
            4 => heading.right(),
            deg => return Err(Error::Invariant(format!("vertex {cur:?} has {deg} open edges"))),
        };
        if cur == x0 {
            if next != first {
                return Err(Error::Invariant(format!("peeling returned to {x0:?} along a different edge")));
            }
            return Ok(DiscreteLoop::new_unchecked(seq));
        }
        let m = frame.at(half_step(cur, next));
        if used[m] || !reached[frame.at(right_face(cur, next))] {
            return Err(Error::Invariant(format!("peeling left the exposed edges at {cur:?}")));
        }
        used[m] = true;
        seq.push(cur);
        cur = cur.step(next);
        heading = next;
    }
}

/// Whether `l` (a loop on open edges of `k`) is outmost: some simple dual
/// loop on open dual edges of `k`, through faces that touch `l`, surrounds
/// it. The candidate checked is [`hugging_walk`], the tightest such loop:
/// any surrounding loop must visit the outer face of every edge of `l` in
/// order, and between two of them it can only pass through the corner face
/// of a turn.
pub fn is_outmost(l: &DiscreteLoop, k: &Config, disc: &DiscreteDisc) -> Result<bool> {
    let frame = Frame::new(disc)?;
    let open = frame.open_table(k);
    outmost_in_frame(&frame, &open, l)
}

fn outmost_in_frame(frame: &Frame<'_>, open: &[bool], l: &DiscreteLoop) -> Result<bool> {
    Ok(outmost_witness(frame, open, l)?.is_some())
}

/// The closed walk of faces hugging `l` on its outer side: the outer face
/// of each edge, plus the outer corner face wherever `l` turns away from
/// its outside. Consecutive repeats are merged. Returns `None` for loops
/// of fewer than four steps or without an orientation.
pub fn hugging_walk(l: &DiscreteLoop) -> Option<Vec<Point>> {
    let v = l.vertices();
    let n = v.len();
    let outside_left = match l.orientation() {
        Orientation::Clockwise => true,
        Orientation::CounterClockwise => false,
        _ => return None,
    };
    if n < 4 {
        return None;
    }
    let side = |d: Dir| if outside_left { d.left() } else { d.right() };
    let mut walk: Vec<Point> = Vec::with_capacity(2 * n);
    for k in 0..n {
        let (a, b, c) = (v[(k + n - 1) % n], v[k], v[(k + 1) % n]);
        let din = Dir::between(a, b)?;
        let dout = Dir::between(b, c)?;
        let face_in = half_step(half_step(a, din), side(din));
        let face_out = half_step(half_step(b, dout), side(dout));
        walk.push(face_in);
        if dout == side(din).opposite() {
            // Turning away from the outside: the corner face diagonal to
            // the inner corner.
            let (ix, iy) = din.vector();
            let (ox, oy) = dout.vector();
            walk.push(Point::new(b.x + (ix - ox) / 2, b.y + (iy - oy) / 2));
        }
        walk.push(face_out);
    }
    walk.dedup();
    while walk.len() > 1 && walk.first() == walk.last() {
        walk.pop();
    }
    Some(walk)
}

fn outmost_witness(frame: &Frame<'_>, open: &[bool], l: &DiscreteLoop) -> Result<Option<DiscreteLoop>> {
    let Some(walk) = hugging_walk(l) else { return Ok(None) };
    if walk.len() < 4 || walk.iter().any(|&f| !frame.has_face(f)) {
        return Ok(None);
    }
    let distinct: BTreeSet<Point> = walk.iter().copied().collect();
    if distinct.len() != walk.len() {
        return Ok(None);
    }
    let n = walk.len();
    for i in 0..n {
        let (f, g) = (walk[i], walk[(i + 1) % n]);
        let Some(d) = Dir::between(f, g) else {
            return Err(Error::Invariant(format!("hugging walk steps from {f:?} to {g:?}")));
        };
        if !frame.dual_open(open, f, d) {
            return Ok(None);
        }
    }
    Ok(Some(DiscreteLoop::new(walk)?))
}

/// The concatenation `l ⊕ l2` started at `start`: follow `l` from `start`
/// to the first common vertex `z = x_k = x'_{k'}` where
/// `(x_{k-1}, z, x'_{k'-1})` and `(x_{k+1}, z, x'_{k'+1})` are straight,
/// then all of `l2` from `x'_{k'+1}` back to `z`, then the rest of `l`.
pub fn concatenate(l: &DiscreteLoop, l2: &DiscreteLoop, start: Point) -> Result<DiscreteLoop> {
    if l.len() < 2 || l2.len() < 2 {
        return Err(Error::Concatenation("cannot concatenate a point loop".into()));
    }
    let s = l
        .vertices()
        .iter()
        .position(|&v| v == start)
        .ok_or_else(|| Error::Concatenation(format!("start vertex {start:?} is not on the loop")))?;
    let x = l.rotated(s);
    let x = x.vertices();
    let y = l2.vertices();
    let (n, n2) = (x.len(), y.len());
    let opposite = |a: Point, z: Point, b: Point| a.x - z.x == z.x - b.x && a.y - z.y == z.y - b.y;
    let mut shared = false;
    for k in 0..n {
        let z = x[k];
        for k2 in (0..n2).filter(|&k2| y[k2] == z) {
            shared = true;
            let (xp, xn) = (x[(k + n - 1) % n], x[(k + 1) % n]);
            let (yp, yn) = (y[(k2 + n2 - 1) % n2], y[(k2 + 1) % n2]);
            if opposite(xp, z, yp) && opposite(xn, z, yn) {
                let mut seq = Vec::with_capacity(n + n2);
                seq.extend_from_slice(&x[..=k]);
                seq.extend((1..=n2).map(|j| y[(k2 + j) % n2]));
                seq.extend_from_slice(&x[k + 1..]);
                return Ok(DiscreteLoop::new_unchecked(seq));
            }
        }
    }
    Err(Error::Concatenation(if shared {
        "no shared vertex satisfies the straight-line condition".into()
    } else {
        "the loops share no vertex".into()
    }))
}

/// Decomposes a sourceless configuration on a disc into disjoint weakly
/// simple loops. Every peeled loop sharing no vertex with a loop of a lower
/// level seeds one output loop (outmost loops always do); the loops of the
/// following levels sharing a vertex with it are concatenated into it in
/// peeling order, level by level.
pub fn decompose(k: &Config, disc: &DiscreteDisc) -> Result<LoopDecomposition> {
    let peeling = peel_levels(k, disc)?;
    let frame = Frame::new(disc)?;
    let open = frame.open_table(k);
    let source_config = peeling.residuals[0].clone();

    struct Chain {
        cycle: DiscreteLoop,
        level: u32,
        outmost: bool,
    }
    let mut chains: Vec<Chain> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; frame.index.len()];
    for (i, level_loops) in peeling.levels.iter().enumerate() {
        let level = i as u32 + 1;
        for l in level_loops {
            let mut touching: BTreeSet<usize> = BTreeSet::new();
            for &v in l.vertices() {
                if let Some(c) = owner[frame.at(v)] {
                    touching.insert(c);
                }
            }
            let c = match touching.len() {
                0 => {
                    let outmost = outmost_in_frame(&frame, &open, l)?;
                    chains.push(Chain { cycle: l.clone(), level, outmost });
                    chains.len() - 1
                }
                1 => {
                    if outmost_in_frame(&frame, &open, l)? {
                        return Err(Error::Concatenation(format!(
                            "outmost level-{level} loop through {:?} touches a lower-level loop",
                            l.vertices()[0]
                        )));
                    }
                    let c = *touching.iter().next().unwrap();
                    let acc = &chains[c].cycle;
                    let start = *acc.vertices().iter().min().unwrap();
                    chains[c].cycle = concatenate(acc, l, start)?;
                    c
                }
                _ => {
                    return Err(Error::Concatenation(format!(
                        "level-{level} loop through {:?} touches several chains",
                        l.vertices()[0]
                    )))
                }
            };
            for &v in l.vertices() {
                owner[frame.at(v)] = Some(c);
            }
        }
    }

    let loops: Vec<LevelledLoop> = chains
        .into_iter()
        .map(|c| LevelledLoop {
            orientation: level_orientation(c.level),
            cycle: c.cycle,
            level: c.level,
            seed_outmost: c.outmost,
        })
        .collect();
    let decomposition =
        LoopDecomposition { loops, source_config, max_level: peeling.levels.len() as u32 };
    decomposition.check()?;
    Ok(decomposition)
}

impl LoopDecomposition {
    /// Verifies the defining properties: weakly simple loops with the
    /// orientation of their level, pairwise vertex-disjoint, whose edges are
    /// exactly the open edges.
    pub fn check(&self) -> Result<()> {
        let mut seen_vertices: BTreeSet<Point> = BTreeSet::new();
        let mut edges: BTreeSet<Edge> = BTreeSet::new();
        for l in &self.loops {
            let (class, orientation) = l.cycle.classify();
            if !class.at_least(LoopClass::WeaklySimple) || orientation != l.orientation {
                return Err(Error::Invariant(format!(
                    "decomposition loop is {class:?} with orientation {orientation:?}, expected {:?}",
                    l.orientation
                )));
            }
            for v in l.cycle.vertex_set() {
                if !seen_vertices.insert(v) {
                    return Err(Error::Invariant(format!("decomposition loops share the vertex {v:?}")));
                }
            }
            edges.extend(l.cycle.edge_set());
        }
        let open: BTreeSet<Edge> = self.source_config.open_edges().collect();
        if edges != open {
            return Err(Error::Invariant("decomposition edges differ from the open edges".into()));
        }
        Ok(())
    }

    /// Edge sets of the loops, sorted; comparable with [`component_oracle`].
    pub fn edge_partition(&self) -> Vec<BTreeSet<Edge>> {
        let mut parts: Vec<BTreeSet<Edge>> = self.loops.iter().map(|l| l.cycle.edge_set()).collect();
        parts.sort();
        parts
    }

    /// The JSON form documented in `docs/formats.md`.
    pub fn to_json(&self) -> serde_json::Value {
        let loops: Vec<serde_json::Value> = self
            .loops
            .iter()
            .map(|l| {
                serde_json::json!({
                    "level": l.level,
                    "orientation": l.orientation,
                    "vertices": l.cycle.vertices().iter().map(|p| [p.x / 2, p.y / 2]).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "n": self.source_config.geometry().n(),
            "max_level": self.max_level,
            "loops": loops,
        })
    }
}

/// Upper bound on the number of loops [`level_sets`] will enumerate.
pub const MAX_ENUMERATED_LOOPS: usize = 200_000;

/// Every weakly simple loop on open edges, grouped by level, together with
/// the outmost loops of each level.
#[derive(Clone, Debug, Default)]
pub struct LevelSets {
    /// `levels[i]` holds the level-`(i + 1)` loops, each listed once per
    /// trace and oriented by its level.
    pub levels: Vec<Vec<DiscreteLoop>>,
    /// `most[i]` holds the outmost loops of `levels[i]`.
    pub most: Vec<Vec<DiscreteLoop>>,
}

/// The level-indexed collection of all weakly simple loops on the open
/// edges of `k`. A loop has level 1 when one of its edges is dual to an
/// edge whose face touches the dual component of the boundary of `K*`; it
/// has level `i + 1` when it lies inside a level-`i` loop and some edge of
/// each is dual to the same dual component. Exponential in general: meant
/// for small configurations and cross-checks.
pub fn level_sets(k: &Config, disc: &DiscreteDisc) -> Result<LevelSets> {
    check_sources(k, disc)?;
    let frame = Frame::new(disc)?;
    let open = frame.open_table(k);
    let loops = enumerate_weakly_simple(&frame, &open)?;

    // Dual components over open dual edges.
    let mut uf = UnionFind::new(frame.index.len());
    for i in 0..frame.index.len() {
        let f = frame.index.point(i);
        if f.is_dual() && frame.face_in[i] {
            for d in [Dir::E, Dir::N] {
                if frame.dual_open(&open, f, d) {
                    uf.union(i, frame.at(f.step(d)));
                }
            }
        }
    }
    let comps: Vec<BTreeSet<usize>> = loops
        .iter()
        .map(|l| {
            l.edge_set()
                .iter()
                .flat_map(|e| {
                    let d = e.dual();
                    [d.a(), d.b()]
                })
                .filter(|&f| frame.has_face(f))
                .map(|f| uf.find(frame.at(f)))
                .collect()
        })
        .collect();
    let ring: BTreeSet<usize> = frame.outer_faces.iter().map(|&f| uf.find(frame.at(f))).collect();

    let mut level: Vec<Option<u32>> = comps.iter().map(|c| (!c.is_disjoint(&ring)).then_some(1)).collect();
    let mut current = 1;
    loop {
        let prev: Vec<usize> = (0..loops.len()).filter(|&i| level[i] == Some(current)).collect();
        if prev.is_empty() {
            break;
        }
        for i in 0..loops.len() {
            if level[i].is_none()
                && prev.iter().any(|&j| loops[i].is_inside(&loops[j]) && !comps[i].is_disjoint(&comps[j]))
            {
                level[i] = Some(current + 1);
            }
        }
        current += 1;
    }

    let mut out = LevelSets::default();
    for (l, lv) in loops.into_iter().zip(level) {
        let Some(lv) = lv else { continue };
        let idx = lv as usize - 1;
        while out.levels.len() <= idx {
            out.levels.push(Vec::new());
            out.most.push(Vec::new());
        }
        let l = if l.orientation() == level_orientation(lv) { l } else { l.reversed() };
        if outmost_in_frame(&frame, &open, &l)? {
            out.most[idx].push(l.clone());
        }
        out.levels[idx].push(l);
    }
    Ok(out)
}

/// All weakly simple loops on open edges, one per trace (vertex and edge
/// set), each found from its smallest edge.
fn enumerate_weakly_simple(frame: &Frame<'_>, open: &[bool]) -> Result<Vec<DiscreteLoop>> {
    let edges: Vec<Edge> =
        frame.disc.graph().edges().iter().copied().filter(|e| open[frame.at(e.midpoint())]).collect();
    let mut found: std::collections::BTreeMap<Vec<Edge>, DiscreteLoop> = std::collections::BTreeMap::new();
    let mut used = vec![false; frame.index.len()];
    for &e0 in &edges {
        let mut path = vec![e0.a(), e0.b()];
        used[frame.at(e0.midpoint())] = true;
        // Depth-first search with an explicit stack of direction cursors.
        let mut cursors: Vec<usize> = vec![0];
        let mut trail: Vec<Point> = vec![e0.midpoint()];
        while let Some(c) = cursors.last_mut() {
            if *c == 4 {
                cursors.pop();
                if let Some(m) = trail.pop() {
                    used[frame.at(m)] = false;
                }
                path.pop();
                continue;
            }
            let d = Dir::ALL[*c];
            *c += 1;
            let cur = *path.last().unwrap();
            let e = Edge::from_dir(cur, d);
            let m = e.midpoint();
            let Some(mi) = frame.index.index(m) else { continue };
            if e <= e0 || !open[mi] || used[mi] {
                continue;
            }
            let next = cur.step(d);
            if next == path[0] {
                let mut seq = path.clone();
                seq.push(next);
                let l = DiscreteLoop::new(seq)?;
                if l.class().at_least(LoopClass::WeaklySimple) {
                    found.entry(l.edge_set().into_iter().collect()).or_insert(l);
                    if found.len() > MAX_ENUMERATED_LOOPS {
                        return Err(Error::TooLarge(format!("more than {MAX_ENUMERATED_LOOPS} loops")));
                    }
                }
            }
            used[mi] = true;
            trail.push(m);
            path.push(next);
            cursors.push(0);
        }
    }
    Ok(found.into_values().collect())
}

/// Connected components of the open edges (joined at shared vertices), each
/// as a sorted edge set; the list is sorted. Fails if some vertex has an odd
/// number of open edges.
pub fn component_oracle(k: &Config) -> Result<Vec<BTreeSet<Edge>>> {
    let edges: Vec<Edge> = k.open_edges().collect();
    let mut degree: std::collections::BTreeMap<Point, usize> = std::collections::BTreeMap::new();
    for e in &edges {
        *degree.entry(e.a()).or_default() += 1;
        *degree.entry(e.b()).or_default() += 1;
    }
    let odd = degree.values().filter(|&&d| d % 2 == 1).count();
    if odd > 0 {
        return Err(Error::HasSources(odd));
    }
    let vertices: Vec<Point> = degree.keys().copied().collect();
    let id = |p: Point| vertices.binary_search(&p).unwrap();
    let mut uf = UnionFind::new(vertices.len());
    for e in &edges {
        uf.union(id(e.a()), id(e.b()));
    }
    let mut parts: std::collections::BTreeMap<usize, BTreeSet<Edge>> = std::collections::BTreeMap::new();
    for &e in &edges {
        let r = uf.find(id(e.a()));
        parts.entry(r).or_default().insert(e);
    }
    let mut out: Vec<BTreeSet<Edge>> = parts.into_values().collect();
    out.sort();
    Ok(out)
}
