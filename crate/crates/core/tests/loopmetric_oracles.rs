//! Oracles for the loop metrics and the loops-to-fingerprint map: metric
//! axioms on random triples, the containment bound, agreement of `F` on a
//! loop decomposition with the configuration fingerprint, and the
//! injectivity diagnostic on separated simple collections.

use std::sync::Arc;

use crossloop_core::annuli::{fingerprint, AnnulusFamily, PointSet, DEFAULT_K_MAX};
use crossloop_core::lattice::{discretize_domain, DomainSpec};
use crossloop_core::loopdecomp::decompose;
use crossloop_core::loopmetric::{
    collection_distance, f_fingerprint, f_fingerprint_discrete, injectivity_diagnostic, is_smpl, loop_distance,
    within_neighbourhood, LoopCollection, PolyLoop,
};
use crossloop_core::percolation::Config;
use crossloop_core::polygon::DyadicPolygon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random rectilinear loop on the `1/2` grid: a rectangle or an L-shape,
/// resampled at every grid point, in a random orientation.
fn random_loop(rng: &mut ChaCha8Rng) -> PolyLoop {
    let x0 = rng.gen_range(0..8) as f64 * 0.5;
    let y0 = rng.gen_range(0..8) as f64 * 0.5;
    let w = rng.gen_range(1..5) as f64 * 0.5;
    let h = rng.gen_range(1..5) as f64 * 0.5;
    let l = if rng.gen_bool(0.5) {
        PolyLoop::rectangle(x0, y0, x0 + w, y0 + h, 0.5)
    } else {
        let (w2, h2) = (w + 0.5, h + 0.5);
        let corners = [[x0, y0], [x0 + w2, y0], [x0 + w2, y0 + 0.5], [x0 + 0.5, y0 + 0.5], [x0 + 0.5, y0 + h2], [x0, y0 + h2]];
        let mut pts = Vec::new();
        for i in 0..6 {
            let (a, b): ([f64; 2], [f64; 2]) = (corners[i], corners[(i + 1) % 6]);
            let m = (((b[0] - a[0]).abs() + (b[1] - a[1]).abs()) / 0.5).round() as usize;
            for t in 0..m {
                let s = t as f64 / m as f64;
                pts.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
        PolyLoop::new(pts).unwrap()
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

#[test]
fn collection_distance_is_a_metric_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10_000 {
        let (a, b, c) = (random_collection(&mut rng), random_collection(&mut rng), random_collection(&mut rng));
        let ab = collection_distance(&a, &b);
        let ba = collection_distance(&b, &a);
        let bc = collection_distance(&b, &c);
        let ac = collection_distance(&a, &c);
        assert_eq!(collection_distance(&a, &a), 0.0);
        assert!((ab - ba).abs() < 1e-12);
        assert!(ac <= ab + bc + 1e-9, "triangle inequality: {ac} > {ab} + {bc}");
        assert!(ab >= 0.0);
    }
}

#[test]
fn loop_distance_bounds_containment() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..2000 {
        let (a, b) = (random_loop(&mut rng), random_loop(&mut rng));
        let d = loop_distance(&a, &b);
        assert!(within_neighbourhood(&a, &b, d + 1e-12));
        assert!(within_neighbourhood(&b, &a, d + 1e-12));
        // Triangle inequality for single loops.
        let c = random_loop(&mut rng);
        assert!(loop_distance(&a, &c) <= d + loop_distance(&b, &c) + 1e-9);
    }
}

/// Checks `F(decompose(k)) = fingerprint(k)` for the given configurations.
fn check_consistency(n: u32, family: &AnnulusFamily, configs: impl Iterator<Item = u64>) -> usize {
    let disc = discretize_domain(&DomainSpec::unit_square(), n).unwrap();
    let support = Arc::new(disc.graph().clone());
    let m = support.num_edges();
    let mut count = 0;
    for mask in configs {
        let k = Config::from_mask(support.clone(), mask & ((1u64 << m) - 1));
        if !k.is_sourceless() {
            continue;
        }
        let dec = decompose(&k, &disc).unwrap();
        let loops: Vec<_> = dec.loops.iter().map(|l| l.cycle.clone()).collect();
        let via_loops = f_fingerprint_discrete(&loops, k.geometry(), family);
        let direct = fingerprint(&PointSet::from_config(&k), family);
        assert_eq!(via_loops, direct, "mask {mask:#x}");
        // The floating-point route agrees with the exact one on dyadic
        // meshes.
        if n.is_power_of_two() {
            let coll = LoopCollection::from_discrete(&loops, k.geometry());
            assert_eq!(f_fingerprint(&coll, family).unwrap(), direct);
        }
        count += 1;
    }
    count
}

/// The edge mask (in the support's edge order) of the sourceless
/// configuration whose open edges are the symmetric difference of the
/// boundaries of the selected faces of the `n × n` face block.
fn face_mask(n: u32, faces: u64) -> u64 {
    let disc = discretize_domain(&DomainSpec::unit_square(), n).unwrap();
    let support = disc.graph();
    let n = n as i32;
    let mut open = std::collections::BTreeSet::new();
    for f in 0..n * n {
        if faces >> f & 1 == 1 {
            let (i, j) = (f % n, f / n);
            let p = crossloop_core::lattice::Point::primal;
            for (a, b) in [(p(i, j), p(i + 1, j)), (p(i + 1, j), p(i + 1, j + 1)), (p(i, j + 1), p(i + 1, j + 1)), (p(i, j), p(i, j + 1))] {
                let e = crossloop_core::lattice::Edge::new(a, b).unwrap();
                if !open.remove(&e) {
                    open.insert(e);
                }
            }
        }
    }
    open.iter().fold(0u64, |acc, e| acc | 1 << support.edge_index(*e).unwrap())
}

#[test]
fn f_of_decomposition_matches_fingerprint_exhaustively_on_small_grids() {
    let w = DyadicPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
    let family = AnnulusFamily::dyadic(&w, 3, DEFAULT_K_MAX).unwrap();
    // 3×3 vertices (mesh 1/2) and 4×4 vertices (mesh 1/3, not dyadic).
    assert_eq!(check_consistency(2, &family, (0..1 << 4).map(|f| face_mask(2, f))), 16);
    assert_eq!(check_consistency(3, &family, (0..1 << 9).map(|f| face_mask(3, f))), 512);
}

#[test]
fn f_of_decomposition_matches_fingerprint_on_random_five_by_five() {
    let w = DyadicPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
    let family = AnnulusFamily::dyadic(&w, 3, DEFAULT_K_MAX).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let masks: Vec<u64> = (0..300).map(|_| face_mask(4, rng.gen_range(0..1 << 16))).collect();
    assert_eq!(check_consistency(4, &family, masks.into_iter()), 300);
}

/// Random simple collections in the unit square: nested or side-by-side
/// rectangles on the `1/16` grid with the level orientation rule, kept at
/// distance at least `1/8` from the boundary. The resolution-3 family only
/// contains annuli in the open window, so loops inside the boundary strip
/// of width `1/8` cross no family annulus at all.
fn random_simple(rng: &mut ChaCha8Rng, domain: &DyadicPolygon) -> LoopCollection {
    loop {
        let mut loops = Vec::new();
        let n = rng.gen_range(1..4);
        for _ in 0..n {
            let x0 = rng.gen_range(2..13) as f64 / 16.0;
            let y0 = rng.gen_range(2..13) as f64 / 16.0;
            let x1 = x0 + rng.gen_range(1..(15 - (x0 * 16.0) as i32)) as f64 / 16.0;
            let y1 = y0 + rng.gen_range(1..(15 - (y0 * 16.0) as i32)) as f64 / 16.0;
            loops.push(PolyLoop::rectangle(x0, y0, x1, y1, 1.0 / 16.0));
        }
        let plain = LoopCollection::new(loops.clone()).unwrap();
        let levels = crossloop_core::loopmetric::levels(&plain);
        let oriented: Vec<PolyLoop> =
            loops.into_iter().zip(levels).map(|(l, lv)| if lv % 2 == 1 { l.reversed() } else { l }).collect();
        let c = LoopCollection::new(oriented).unwrap();
        if is_smpl(&c, domain) {
            return c;
        }
    }
}

#[test]
fn separated_simple_collections_have_distinct_fingerprints() {
    let w = DyadicPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
    let family = AnnulusFamily::dyadic(&w, 3, DEFAULT_K_MAX).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let pairs: Vec<_> = (0..1000).map(|_| (random_simple(&mut rng, &w), random_simple(&mut rng, &w))).collect();
    let report = injectivity_diagnostic(&pairs, &family).unwrap();
    assert!(report.tested > 100, "{report:?}");
    assert_eq!(report.collisions, 0, "{report:?}");
}
