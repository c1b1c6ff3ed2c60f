//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! runtime budget. Every check compares library output with an independent
//! oracle (exhaustive enumeration, brute-force search or a closed form).
//! The process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crossloop_core::annuli::{
    crosses, fingerprint, is_hereditary, leq_crs, AnnulusFamily, PointSet, PolyAnnulus, DEFAULT_K_MAX,
};
use crossloop_core::exploration::{explore_outside, is_admissible, unexplored_discs};
use crossloop_core::lattice::{
    discretize_domain, DiscreteDisc, DiscreteLoop, DomainSpec, Edge, GridGeometry, LoopClass, Orientation, Point,
    Subgraph,
};
use crossloop_core::loopdecomp::{component_oracle, decompose, level_sets, peel_levels};
use crossloop_core::loopmetric::{
    collection_distance, f_fingerprint, f_fingerprint_discrete, LoopCollection, PolyLoop,
};
use crossloop_core::models::{
    critical_constants, enumerate_law, interface_of, sample_ising_plus, IsingDomain, ModelKind, SweepSchedule,
};
use crossloop_core::percolation::Config;
use crossloop_core::polygon::DyadicPolygon;
use crossloop_experiments::{markov_check, symdiff_ladder, MarkovCase, Setup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> String,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Kramers-Wannier exactness", budget: secs(10), check: kramers_wannier },
        Criterion { id: 2, name: "coupling exactness", budget: secs(5), check: coupling },
        Criterion { id: 3, name: "loop-decomposition soundness", budget: secs(60), check: decomposition },
        Criterion { id: 4, name: "exploration process", budget: secs(120), check: exploration },
        Criterion { id: 5, name: "annulus-order coherence", budget: secs(30), check: annulus_order },
        Criterion { id: 6, name: "crossings equal F of loops", budget: secs(60), check: consistency },
        Criterion { id: 7, name: "metric axioms", budget: secs(30), check: metric_axioms },
        Criterion { id: 8, name: "symmetric-difference ladder", budget: secs(15 * 60), check: symdiff },
        Criterion { id: 9, name: "CSV reproducibility", budget: secs(600), check: reproducibility },
    ];
    // Failures are reported on the criterion's line, not as panics.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(detail) if elapsed <= c.budget => (true, detail),
            Ok(detail) => (false, format!("{detail}; over the {} s budget", c.budget.as_secs())),
            Err(e) => (false, panic_message(e)),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {}: {} [{:.1} s of {} s] {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

// ---------------------------------------------------------------------------
// Shared helpers

fn block_disc(w: i32, h: i32) -> DiscreteDisc {
    DiscreteDisc::from_subgraph(Subgraph::block(GridGeometry::new(16).unwrap(), 0, 0, w, h)).unwrap()
}

/// The face blocks whose vertex grids are at most `4 × 4`.
fn small_blocks() -> Vec<(i32, i32)> {
    (1..=3).flat_map(|w| (1..=3).map(move |h| (w, h))).collect()
}

/// The sourceless configuration formed by the symmetric difference of the
/// boundaries of the selected faces of a `w × h` face block.
fn from_faces(disc: &DiscreteDisc, w: i32, h: i32, mask: u64) -> Config {
    let p = Point::primal;
    let mut open: BTreeSet<Edge> = BTreeSet::new();
    for f in 0..(w * h) {
        if mask >> f & 1 == 1 {
            let (i, j) = (f % w, f / w);
            for (a, b) in [(p(i, j), p(i + 1, j)), (p(i + 1, j), p(i + 1, j + 1)), (p(i, j + 1), p(i + 1, j + 1)), (p(i, j), p(i, j + 1))] {
                let e = Edge::new(a, b).unwrap();
                if !open.remove(&e) {
                    open.insert(e);
                }
            }
        }
    }
    Config::from_open_edges(Arc::new(disc.graph().clone()), open).unwrap()
}

/// The counterclockwise boundary of the lattice rectangle `[x0, x1] × [y0, y1]`.
fn rect_loop(x0: i32, y0: i32, x1: i32, y1: i32) -> DiscreteLoop {
    let mut v = Vec::new();
    v.extend((x0..x1).map(|i| Point::primal(i, y0)));
    v.extend((y0..y1).map(|j| Point::primal(x1, j)));
    v.extend((x0 + 1..=x1).rev().map(|i| Point::primal(i, y1)));
    v.extend((y0 + 1..=y1).rev().map(|j| Point::primal(x0, j)));
    DiscreteLoop::new(v).unwrap()
}

fn unit_window() -> DyadicPolygon {
    DyadicPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
}

/// `count` interfaces of the `+` boundary Ising model on the unit square
/// at mesh `1/n`.
fn sampled_interfaces(n: u32, count: u64, seed: u64) -> (DiscreteDisc, Vec<Config>) {
    let disc = discretize_domain(&DomainSpec::unit_square(), n).unwrap();
    let domain = Arc::new(IsingDomain::new(&disc).unwrap());
    let etas = (0..count).map(|r| interface_of(&sample_ising_plus(&domain, seed, r, SweepSchedule::default()))).collect();
    (disc, etas)
}

// ---------------------------------------------------------------------------
// 1. Kramers–Wannier duality

/// Every fixed polyomino with at most `max` cells, as sorted cell lists
/// translated to the origin.
fn polyominoes(max: usize) -> Vec<Vec<Vec<(i32, i32)>>> {
    let mut by_size = vec![vec![vec![(0, 0)]]];
    while by_size.len() < max {
        let mut next: BTreeSet<Vec<(i32, i32)>> = BTreeSet::new();
        for cells in by_size.last().unwrap() {
            for &(i, j) in cells {
                for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let c = (i + di, j + dj);
                    if cells.contains(&c) {
                        continue;
                    }
                    let mut grown = cells.clone();
                    grown.push(c);
                    let mi = grown.iter().map(|c| c.0).min().unwrap();
                    let mj = grown.iter().map(|c| c.1).min().unwrap();
                    let mut grown: Vec<_> = grown.iter().map(|&(a, b)| (a - mi, b - mj)).collect();
                    grown.sort();
                    next.insert(grown);
                }
            }
        }
        by_size.push(next.into_iter().collect());
    }
    by_size
}

fn kramers_wannier() -> String {
    let geometry = GridGeometry::new(16).unwrap();
    let mut discs: BTreeMap<Vec<Edge>, DiscreteDisc> = BTreeMap::new();
    for w in 1..=16 {
        for h in 1..=16 / w {
            let d = block_disc(w, h);
            discs.insert(d.graph().edges().to_vec(), d);
        }
    }
    let polys = polyominoes(7);
    let counts: Vec<usize> = polys.iter().map(Vec::len).collect();
    assert_eq!(counts, [1, 2, 6, 19, 63, 216, 760], "fixed polyomino counts");
    for cells in polys.iter().flatten() {
        let corners: BTreeSet<Point> =
            cells.iter().flat_map(|&(i, j)| [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]).map(|(i, j)| Point::primal(i, j)).collect();
        if let Ok(d) = DiscreteDisc::from_subgraph(Subgraph::induced(geometry, corners)) {
            discs.insert(d.graph().edges().to_vec(), d);
        }
    }
    let mut worst: f64 = 0.0;
    for disc in discs.values() {
        let free = IsingDomain::new(disc).unwrap().num_free();
        assert!(free <= 16, "{free} free spins");
        let ising = enumerate_law(ModelKind::IsingPlus, disc).unwrap();
        let ht = enumerate_law(ModelKind::HtExpansion, disc).unwrap();
        assert_eq!(ising.len(), 1 << free);
        let tv = ising.tv(&ht).unwrap();
        assert!(tv < 1e-12, "TV {tv:e} on a disc with {free} free spins");
        worst = worst.max(tv);
    }
    let ising = enumerate_law(ModelKind::IsingPlus, &block_disc(1, 1)).unwrap();
    let p = ising.prob(&Config::full(Arc::clone(ising.support())));
    let x4 = (2f64.sqrt() - 1.0).powi(4);
    assert!((p - x4 / (1.0 + x4)).abs() < 1e-15 && (p - 0.028_595_5).abs() < 1e-7, "square loop probability {p}");
    format!("{} discs, max TV {worst:.1e}, P(square loop) = {p:.7}", discs.len())
}

// ---------------------------------------------------------------------------
// 2. The current trace as η ∨ b^{t_c}

fn coupling() -> String {
    let t_c = critical_constants().t_c;
    let edge = DiscreteDisc::from_subgraph(Subgraph::block(GridGeometry::new(8).unwrap(), 0, 0, 1, 0)).unwrap();
    let mut tvs = Vec::new();
    for disc in [&edge, &block_disc(1, 1)] {
        let coupled = enumerate_law(ModelKind::IsingPlus, disc).unwrap().overlay_bernoulli(t_c).unwrap();
        let trace = enumerate_law(ModelKind::CurrentTrace { n_max: 8 }, disc).unwrap();
        let tv = coupled.tv(&trace).unwrap();
        assert!(tv < 1e-4, "TV {tv:e}");
        tvs.push(tv);
    }
    let trace = enumerate_law(ModelKind::CurrentTrace { n_max: 8 }, &edge).unwrap();
    let p1 = trace.prob(&Config::full(Arc::clone(trace.support())));
    let closed = 1.0 - 1.0 / (0.5 * 2f64.sqrt().ln_1p()).cosh();
    assert!((p1 - closed).abs() < 1e-6 && (p1 - 0.089_820_1).abs() < 1e-6, "P(edge open) = {p1}");
    format!("TV edge {:.1e}, TV square {:.1e}, P(edge open) = {p1:.7}", tvs[0], tvs[1])
}

// ---------------------------------------------------------------------------
// 3. Loop decomposition

fn decomposition() -> String {
    let mut configs = 0;
    let mut loops_checked = 0;
    for (w, h) in small_blocks() {
        let disc = block_disc(w, h);
        let g = disc.geometry();
        for mask in 0..(1u64 << (w * h)) {
            let k = from_faces(&disc, w, h, mask);
            let tag = format!("{w}x{h} faces, mask {mask:#x}");
            let dec = decompose(&k, &disc).unwrap_or_else(|e| panic!("{tag}: {e}"));
            // Edge property and disjointness.
            let open: BTreeSet<Edge> = k.open_edges().collect();
            let union: BTreeSet<Edge> = dec.loops.iter().flat_map(|l| l.cycle.edge_set()).collect();
            let total: usize = dec.loops.iter().map(|l| l.cycle.edge_set().len()).sum();
            assert_eq!(union, open, "{tag}: loops do not cover the open edges");
            assert_eq!(total, open.len(), "{tag}: loops share edges");
            // Uniqueness up to the trace in the plane.
            assert_eq!(dec.edge_partition(), component_oracle(&k).unwrap(), "{tag}: partition");
            let peeling = peel_levels(&k, &disc).unwrap();
            let sets = level_sets(&k, &disc).unwrap();
            for l in &dec.loops {
                assert!(l.cycle.class().at_least(LoopClass::WeaklySimple), "{tag}: class");
                assert_eq!(l.cycle.orientation(), l.orientation, "{tag}: orientation");
                assert_eq!(l.orientation == Orientation::Clockwise, l.level % 2 == 1, "{tag}: orientation rule");
                let seed = peeling.levels[l.level as usize - 1]
                    .iter()
                    .find(|s| s.vertex_set().is_subset(&l.cycle.vertex_set()))
                    .unwrap_or_else(|| panic!("{tag}: no seed"));
                assert!((l.cycle.diameter(g) - seed.diameter(g)).abs() < 1e-12, "{tag}: diameter");
                assert!(l.cycle.is_inside(seed), "{tag}: inside");
                loops_checked += 1;
            }
            // Level sandwich, level by level.
            let levels = sets.levels.len().max(peeling.levels.len());
            for i in 0..levels {
                let all = sets.levels.get(i).map(Vec::as_slice).unwrap_or(&[]);
                let most = sets.most.get(i).map(Vec::as_slice).unwrap_or(&[]);
                let peeled = peeling.levels.get(i).map(Vec::as_slice).unwrap_or(&[]);
                for m in most {
                    assert!(peeled.iter().any(|p| p.same_trace(m)), "{tag}: outmost loop not peeled at level {}", i + 1);
                }
                for p in peeled {
                    assert!(all.iter().any(|l| l.same_trace(p)), "{tag}: peeled loop has the wrong level");
                }
            }
            configs += 1;
        }
    }
    format!("{configs} configurations, {loops_checked} loops")
}

// ---------------------------------------------------------------------------
// 4. Exploration from outside a loop

fn parity_ok(open: &BTreeSet<Edge>, g: &Subgraph) -> bool {
    g.vertices().iter().all(|&v| g.incident_edges(v).filter(|e| open.contains(e)).count() % 2 == 0)
}

/// Admissibility, efficiency, disc decomposition and factorisation for one
/// block and one loop γ; returns the number of distinct outcomes.
fn exploration_case(w: i32, h: i32, gamma: &DiscreteLoop) -> usize {
    let disc = block_disc(w, h);
    let support = Arc::new(disc.graph().clone());
    let configs: Vec<Config> = (0..1u64 << (w * h)).map(|m| from_faces(&disc, w, h, m)).collect();
    let tag = format!("{w}x{h} faces, γ {:?}", gamma.vertices().first());
    let mut explored = Vec::new();
    for k in &configs {
        let x = explore_outside(k, gamma, &disc).unwrap();
        assert!(x.is_admissible(&disc).unwrap(), "{tag}: revealed state not admissible");
        let pieces = unexplored_discs(&x, &disc).unwrap();
        let covered: BTreeSet<Edge> = pieces.iter().flat_map(|p| p.graph().edges().iter().copied()).collect();
        let rest = disc.graph().difference(&x.region);
        assert!(rest.edges().iter().all(|e| covered.contains(e)), "{tag}: unexplored edges not covered by discs");
        explored.push(x);
    }
    // Efficiency: k restricted to an occurring region R' is admissible only
    // for k's own region.
    let mut regions: BTreeMap<Vec<Edge>, Arc<Subgraph>> = BTreeMap::new();
    for x in &explored {
        regions.entry(x.region.edges().to_vec()).or_insert_with(|| x.region.clone());
    }
    for (k, x) in configs.iter().zip(&explored) {
        for r in regions.values() {
            if **r != *x.region && is_admissible(r, &k.restrict_arc(r).unwrap(), gamma, &disc).unwrap() {
                panic!("{tag}: efficiency violated");
            }
        }
    }
    // Factorisation of the configurations revealing each outcome.
    let mut classes: BTreeMap<(Vec<Edge>, Vec<Edge>), usize> = BTreeMap::new();
    for x in &explored {
        *classes.entry((x.region.edges().to_vec(), x.state.open_edges().collect())).or_default() += 1;
    }
    for ((region_edges, state_open), members) in &classes {
        let region = &regions[region_edges];
        let rest = support.difference(region);
        let state: BTreeSet<Edge> = state_open.iter().copied().collect();
        let expected = configs
            .iter()
            .filter(|k| {
                let open: BTreeSet<Edge> = k.open_edges().collect();
                open.iter().filter(|e| region.contains_edge(**e)).copied().collect::<BTreeSet<_>>() == state
                    && parity_ok(&open.iter().filter(|e| rest.contains_edge(**e)).copied().collect(), &rest)
            })
            .count();
        assert_eq!(*members, expected, "{tag}: factorisation");
    }
    classes.len()
}

fn exploration() -> String {
    let (mut cases, mut outcomes) = (0, 0);
    let mut worst: f64 = 0.0;
    for (w, h) in small_blocks() {
        for (x0, x1) in (0..w).flat_map(|a| (a + 1..=w).map(move |b| (a, b))) {
            for (y0, y1) in (0..h).flat_map(|a| (a + 1..=h).map(move |b| (a, b))) {
                outcomes += exploration_case(w, h, &rect_loop(x0, y0, x1, y1));
                let report = markov_check(MarkovCase { w, h, gamma: [x0, y0, x1, y1] }).unwrap();
                assert!(report.max_tv < 1e-12, "{w}x{h} γ {:?}: conditional TV {:e}", [x0, y0, x1, y1], report.max_tv);
                worst = worst.max(report.max_tv);
                cases += 1;
            }
        }
    }
    format!("{cases} (disc, γ) cases, {outcomes} outcomes, max conditional TV {worst:.1e}")
}

// ---------------------------------------------------------------------------
// 5. The crossing order

/// Integer rectangle `[x0, y0, x1, y1]`.
type Rect = [i64; 4];

fn random_rect(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rect {
    let (a, b) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
    let (c, d) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
    [a.min(b), c.min(d), a.max(b) + 1, c.max(d) + 1]
}

fn nested(inner: Rect, outer: Rect) -> bool {
    outer[0] < inner[0] && inner[2] < outer[2] && outer[1] < inner[1] && inner[3] < outer[3]
}

fn random_annulus(rng: &mut ChaCha8Rng, size: i64) -> (Rect, Rect) {
    loop {
        let (inner, outer) = (random_rect(rng, 0, size), random_rect(rng, 0, size));
        if nested(inner, outer) {
            return (inner, outer);
        }
    }
}

/// An annulus inside `a`'s region around its hole, when one is found.
fn circulating(rng: &mut ChaCha8Rng, (i, o): (Rect, Rect)) -> Option<(Rect, Rect)> {
    (0..20).find_map(|_| {
        let no = [o[0] + rng.gen_range(0..2), o[1] + rng.gen_range(0..2), o[2] - rng.gen_range(0..2), o[3] - rng.gen_range(0..2)];
        let ni = [i[0] - rng.gen_range(0..2), i[1] - rng.gen_range(0..2), i[2] + rng.gen_range(0..2), i[3] + rng.gen_range(0..2)];
        nested(ni, no).then_some((ni, no))
    })
}

/// 0 outside the closed rectangle, 1 on its boundary, 2 inside.
fn loc(r: Rect, p: [i64; 2]) -> u8 {
    if p[0] < r[0] || p[0] > r[2] || p[1] < r[1] || p[1] > r[3] {
        0
    } else if p[0] == r[0] || p[0] == r[2] || p[1] == r[1] || p[1] == r[3] {
        1
    } else {
        2
    }
}

fn in_annulus((i, o): (Rect, Rect), p: [i64; 2]) -> bool {
    loc(o, p) > 0 && loc(i, p) < 2
}

/// Breadth-first search for a unit-step lattice path in `a2` from its
/// inner to its outer boundary, none of whose excursions into `a1` touches
/// both boundaries of `a1`: a crossing of `a2` that does not cross `a1`.
fn avoiding_crossing(a1: (Rect, Rect), a2: (Rect, Rect)) -> Option<Vec<[i64; 2]>> {
    let (i1, o1) = a1;
    let (i2, o2) = a2;
    let (x0, y0) = (o2[0], o2[1]);
    let w = (o2[2] - x0 + 1) as usize;
    let h = (o2[3] - y0 + 1) as usize;
    let id = |p: [i64; 2], s: u8| ((p[1] - y0) as usize * w + (p[0] - x0) as usize) * 3 + s as usize;
    let decode = |k: usize| ([x0 + (k / 3 % w) as i64, y0 + (k / 3 / w) as i64], (k % 3) as u8);
    let touch = |p: [i64; 2]| u8::from(loc(i1, p) == 1) | u8::from(loc(o1, p) == 1) << 1;
    // The state records which boundaries of a1 the current excursion has touched.
    let step = |from_inside: bool, s: u8, q: [i64; 2]| -> Option<u8> {
        if !in_annulus(a1, q) {
            return Some(0);
        }
        let t = if from_inside { s | touch(q) } else { touch(q) };
        (t != 3).then_some(t)
    };
    let mut prev: Vec<Option<usize>> = vec![None; w * h * 3];
    let mut seen = vec![false; w * h * 3];
    let mut queue = VecDeque::new();
    for y in o2[1]..=o2[3] {
        for x in o2[0]..=o2[2] {
            if loc(i2, [x, y]) == 1 {
                if let Some(s) = step(false, 0, [x, y]) {
                    seen[id([x, y], s)] = true;
                    queue.push_back(id([x, y], s));
                }
            }
        }
    }
    while let Some(k) = queue.pop_front() {
        let (p, s) = decode(k);
        if loc(o2, p) == 1 {
            let mut path = vec![p];
            let mut cur = k;
            while let Some(pk) = prev[cur] {
                path.push(decode(pk).0);
                cur = pk;
            }
            return Some(path);
        }
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let q = [p[0] + dx, p[1] + dy];
            if !in_annulus(a2, q) {
                continue;
            }
            let Some(t) = step(in_annulus(a1, p), s, q) else { continue };
            if !seen[id(q, t)] {
                seen[id(q, t)] = true;
                prev[id(q, t)] = Some(k);
                queue.push_back(id(q, t));
            }
        }
    }
    None
}

fn annulus_order() -> String {
    let build = |(i, o): (Rect, Rect)| PolyAnnulus::dyadic(0, i, o).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ordered = 0;
    for trial in 0..1000 {
        let r2 = random_annulus(&mut rng, 12);
        let r1 = if trial % 2 == 0 { circulating(&mut rng, r2).unwrap_or_else(|| random_annulus(&mut rng, 12)) } else { random_annulus(&mut rng, 12) };
        let (a1, a2) = (build(r1), build(r2));
        let leq = leq_crs(&a1, &a2);
        match avoiding_crossing(r1, r2) {
            Some(path) => {
                let s = PointSet::from_path(1, &path).unwrap();
                assert!(crosses(&s, &a2) && !crosses(&s, &a1), "witness path is not a crossing of {a2} avoiding {a1}");
                assert!(!leq, "{a1} ≤ {a2} although a crossing of {a2} avoids {a1}");
            }
            None => {
                assert!(leq, "every crossing of {a2} crosses {a1} but the order says otherwise");
                ordered += 1;
            }
        }
    }
    assert!(ordered > 100, "too few ordered pairs ({ordered}) to be informative");
    let family = AnnulusFamily::dyadic(&unit_window(), 3, DEFAULT_K_MAX).unwrap();
    let (_, etas) = sampled_interfaces(32, 100, 5);
    let mut crossed = 0;
    for (r, eta) in etas.iter().enumerate() {
        let fp = fingerprint(&PointSet::from_config(eta), &family);
        assert!(is_hereditary(&fp, &family), "interface {r} is not hereditary");
        crossed += fp.count_ones();
    }
    format!("1000 pairs ({ordered} ordered), 100 hereditary fingerprints over {} annuli ({crossed} crossings)", family.len())
}

// ---------------------------------------------------------------------------
// 6. Crossings of a configuration versus F of its loops

fn consistency() -> String {
    let family = AnnulusFamily::dyadic(&unit_window(), 3, DEFAULT_K_MAX).unwrap();
    let check = |k: &Config, disc: &DiscreteDisc, tag: &str| {
        let dec = decompose(k, disc).unwrap();
        let loops: Vec<DiscreteLoop> = dec.loops.iter().map(|l| l.cycle.clone()).collect();
        let direct = fingerprint(&PointSet::from_config(k), &family);
        assert_eq!(f_fingerprint_discrete(&loops, k.geometry(), &family), direct, "{tag}: exact route");
        let coll = LoopCollection::from_discrete(&loops, k.geometry());
        assert_eq!(f_fingerprint(&coll, &family).unwrap(), direct, "{tag}: floating-point route");
    };
    let disc = discretize_domain(&DomainSpec::unit_square(), 2).unwrap();
    let mut exhaustive = 0;
    for mask in 0..1u64 << 4 {
        check(&from_faces(&disc, 2, 2, mask), &disc, &format!("3x3 vertices, mask {mask:#x}"));
        exhaustive += 1;
    }
    let (disc, etas) = sampled_interfaces(32, 100, 6);
    for (r, eta) in etas.iter().enumerate() {
        check(eta, &disc, &format!("interface {r}"));
    }
    format!("{exhaustive} exhaustive configurations and 100 interfaces at n = 32, {} annuli", family.len())
}

// ---------------------------------------------------------------------------
// 7. The metric on loop collections

/// A random rectilinear loop on the `1/2` grid: a rectangle or an L-shape,
/// in a random orientation.
fn random_loop(rng: &mut ChaCha8Rng) -> PolyLoop {
    let x0 = rng.gen_range(0..8) as f64 * 0.5;
    let y0 = rng.gen_range(0..8) as f64 * 0.5;
    let w = rng.gen_range(1..5) as f64 * 0.5;
    let h = rng.gen_range(1..5) as f64 * 0.5;
    let l = if rng.gen_bool(0.5) {
        PolyLoop::rectangle(x0, y0, x0 + w, y0 + h, 0.5)
    } else {
        let (w, h) = (w + 0.5, h + 0.5);
        PolyLoop::new(vec![[x0, y0], [x0 + w, y0], [x0 + w, y0 + 0.5], [x0 + 0.5, y0 + 0.5], [x0 + 0.5, y0 + h], [x0, y0 + h]])
            .unwrap()
    };
    if rng.gen_bool(0.5) {
        l.reversed()
    } else {
        l
    }
}

fn random_collection(rng: &mut ChaCha8Rng) -> LoopCollection {
    let n = rng.gen_range(0..4);
    LoopCollection::new((0..n).map(|_| random_loop(rng)).collect()).unwrap()
}

fn metric_axioms() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut slack = f64::INFINITY;
    for _ in 0..10_000 {
        let (a, b, c) = (random_collection(&mut rng), random_collection(&mut rng), random_collection(&mut rng));
        let (ab, ba) = (collection_distance(&a, &b), collection_distance(&b, &a));
        let (bc, ac) = (collection_distance(&b, &c), collection_distance(&a, &c));
        assert_eq!(collection_distance(&a, &a), 0.0, "identity");
        assert!((ab - ba).abs() < 1e-12, "symmetry: {ab} vs {ba}");
        assert!(ac <= ab + bc + 1e-9, "triangle inequality: {ac} > {ab} + {bc}");
        assert!(ab >= 0.0);
        slack = slack.min(ab + bc - ac);
    }
    let square = |x: f64, s: f64| PolyLoop::new(vec![[x, 0.0], [x + s, 0.0], [x + s, s], [x, s]]).unwrap();
    let d1 = collection_distance(&LoopCollection::new(vec![square(0.0, 2.0)]).unwrap(), &LoopCollection::default());
    let d2 = collection_distance(
        &LoopCollection::new(vec![square(0.0, 1.0)]).unwrap(),
        &LoopCollection::new(vec![square(3.0, 1.0)]).unwrap(),
    );
    assert!((d1 - 2f64.sqrt()).abs() < 1e-9, "side-2 square vs empty: {d1}");
    assert!((d2 - 2f64.sqrt() / 2.0).abs() < 1e-9, "offset unit squares: {d2}");
    format!("10000 triples (min triangle slack {slack:.3}), examples {d1:.9} and {d2:.9}")
}

// ---------------------------------------------------------------------------
// 8. The symmetric-difference ladder, with golden values

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn symdiff() -> String {
    let annulus = PolyAnnulus::square(0.5, 0.5, 0.125, 0.25).unwrap();
    let setup = Setup { replicas: 10_000, seed: 0, ..Setup::default() };
    let t = critical_constants().t_c;
    let ladder = symdiff_ladder(&annulus, t, &[16, 32, 64], &setup).unwrap();
    let (first, last) = (&ladder.rungs[0].estimate, &ladder.rungs[2].estimate);
    assert!(
        !last.exceeds(first, 2.0),
        "n = 64 value {} exceeds n = 16 value {} by more than 2 joint stderr ({})",
        last.value,
        first.value,
        last.joint_stderr(first)
    );
    let current: Vec<serde_json::Value> = ladder
        .rungs
        .iter()
        .map(|r| serde_json::json!({"n": r.param, "value": r.estimate.value, "stderr": r.estimate.stderr}))
        .collect();
    let summary = ladder.rungs.iter().map(|r| format!("n={} {:.5}±{:.5}", r.param, r.estimate.value, r.estimate.stderr));
    let summary = summary.collect::<Vec<_>>().join(", ");
    let path = fixture("symdiff_golden.json");
    match fs::read_to_string(&path) {
        Ok(text) => {
            let golden: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(golden["rungs"], serde_json::Value::Array(current), "golden values changed ({summary})");
            format!("{summary}; matches golden values")
        }
        Err(_) => {
            let doc = serde_json::json!({"annulus": annulus.to_string(), "t": t, "seed": setup.seed, "replicas": setup.replicas, "rungs": current});
            fs::write(&path, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
            format!("{summary}; golden values recorded")
        }
    }
}

// ---------------------------------------------------------------------------
// 9. Reproducibility of every CSV artifact

fn reproducibility() -> String {
    let configs = [
        ("cross", r#"{"command": "cross", "seed": 3, "params": {"ns": [8, 16], "replicas": 200}}"#, "cross.csv"),
        ("couple-test", r#"{"command": "couple-test", "seed": 3}"#, "couple-test.csv"),
        ("stability", r#"{"command": "stability", "seed": 3, "params": {"ns": [8, 16], "replicas": 200}}"#, "stability.csv"),
        ("conditions", r#"{"command": "conditions", "seed": 3, "params": {"n": 16, "replicas": 200}}"#, "conditions.csv"),
    ];
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let run = |name: &str, config: &str, csv: &str, tag: &str, threads: &str| -> Vec<u8> {
        let dir = root.join(format!("{name}-{tag}"));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("config.json");
        fs::write(&cfg, config).unwrap();
        let out = dir.join("out");
        let status = Command::new(env!("CARGO_BIN_EXE_crossloop"))
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads])
            .output()
            .unwrap();
        assert!(status.status.success(), "{name}: {}", String::from_utf8_lossy(&status.stderr));
        fs::read(out.join(csv)).unwrap()
    };
    let mut bytes = 0;
    for (name, config, csv) in configs {
        let a = run(name, config, csv, "a", "1");
        assert_eq!(a, run(name, config, csv, "b", "1"), "{csv} differs between identical runs");
        assert_eq!(a, run(name, config, csv, "c", "8"), "{csv} differs between 1 and 8 threads");
        bytes += a.len();
    }
    format!("{} commands, {bytes} CSV bytes identical across runs and 1/8 threads", configs.len())
}
