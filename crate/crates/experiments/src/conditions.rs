//! Checks of the three conditions on the interface model: the exact Markov
//! property of the exploration (`H0`), the crossing defect of annuli with a
//! widened hole (`H1`), and boundary connection probabilities of the
//! coupled configuration (`H2`).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crossloop_core::annuli::{crosses, PointSet, PolyAnnulus};
use crossloop_core::error::{Error, Result};
use crossloop_core::exploration::{explore_outside, unexplored_discs};
use crossloop_core::lattice::{discretize_domain, DiscreteDisc, DiscreteLoop, DomainSpec, Edge, GridGeometry, Point, Subgraph};
use crossloop_core::models::{critical_constants, sourceless_law, ExactLaw, TanhWeight};
use crossloop_core::percolation::Config;

use crate::crossing::{disc_for, CoupledSampler, Setup};
use crate::estimate::{replicate, transpose_estimates, Estimate};

/// An `H0` case: the `w × h` face block explored from outside the
/// rectangle loop with face corners `gamma = [x0, y0, x1, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovCase {
    pub w: i32,
    pub h: i32,
    pub gamma: [i32; 4],
}

/// The outcome of one `H0` case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub case: MarkovCase,
    /// Number of distinct explored outcomes `(R, state)`.
    pub outcomes: usize,
    /// Largest total-variation distance between a conditional law on the
    /// unexplored part and the product of free laws on its discs.
    pub max_tv: f64,
}

/// Settings for [`condition_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionSettings {
    pub markov_cases: Vec<MarkovCase>,
    /// Annulus whose hole is widened for `H1`.
    pub annulus: PolyAnnulus,
    pub eps_ladder: Vec<f64>,
    /// Half-width `R` of the box `x + [−R, R]²` for `H2`.
    pub box_radius: f64,
    pub box_center: [f64; 2],
    /// Domains `K` with `x + [−2R, 2R]² ⊂ K ⊄ x + [−3R, 3R]²`.
    pub discs: Vec<DomainSpec>,
    pub r_ladder: Vec<f64>,
}

impl Default for ConditionSettings {
    fn default() -> Self {
        ConditionSettings {
            markov_cases: vec![
                MarkovCase { w: 2, h: 2, gamma: [0, 0, 1, 1] },
                MarkovCase { w: 3, h: 3, gamma: [1, 1, 2, 2] },
                MarkovCase { w: 4, h: 4, gamma: [1, 1, 3, 3] },
            ],
            annulus: PolyAnnulus::square(0.5, 0.5, 0.125, 0.25).expect("nested squares"),
            eps_ladder: vec![0.0, 0.015625, 0.03125, 0.0625],
            box_radius: 0.125,
            box_center: [0.5, 0.5],
            discs: vec![
                DomainSpec::unit_square(),
                DomainSpec::Rectangle { x0: 0.25, y0: 0.0, x1: 0.75, y1: 1.0 },
            ],
            r_ladder: vec![0.0, 0.03125, 0.0625],
        }
    }
}

/// One row of the `H1` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingDefect {
    pub eps: f64,
    pub estimate: Estimate,
}

/// One row of the `H2` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConnection {
    pub disc: DomainSpec,
    pub r: f64,
    pub estimate: Estimate,
}

/// The full condition report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub markov: Vec<MarkovReport>,
    pub crossing_defect: Vec<CrossingDefect>,
    pub boundary_connection: Vec<BoundaryConnection>,
}

/// The rectangle loop with lattice corners `(x0, y0)` and `(x1, y1)`.
pub fn rectangle_loop(x0: i32, y0: i32, x1: i32, y1: i32) -> Result<DiscreteLoop> {
    let mut v = Vec::new();
    v.extend((x0..x1).map(|i| Point::primal(i, y0)));
    v.extend((y0..y1).map(|j| Point::primal(x1, j)));
    v.extend((x0 + 1..=x1).rev().map(|i| Point::primal(i, y1)));
    v.extend((y0 + 1..=y1).rev().map(|j| Point::primal(x0, j)));
    DiscreteLoop::new(v)
}

/// Exact check of the Markov property of the exploration from outside a
/// loop under the critical high-temperature law: conditionally on the
/// explored region and its state, the configuration on the rest is the
/// product of the free sourceless laws on the unexplored discs.
pub fn markov_check(case: MarkovCase) -> Result<MarkovReport> {
    let geometry = GridGeometry::new((case.w.max(case.h)).max(1) as u32)?;
    let disc = DiscreteDisc::from_subgraph(Subgraph::block(geometry, 0, 0, case.w, case.h))?;
    let [x0, y0, x1, y1] = case.gamma;
    let gamma = rectangle_loop(x0, y0, x1, y1)?;
    let support = Arc::new(disc.graph().clone());
    let law = sourceless_law(&support, &TanhWeight::default())?;

    // Group the atoms by explored outcome.
    type Outcome = (Vec<Edge>, Vec<Edge>);
    let mut classes: BTreeMap<Outcome, Vec<(Config, f64)>> = BTreeMap::new();
    let mut pieces_of: BTreeMap<Outcome, Vec<DiscreteDisc>> = BTreeMap::new();
    for (k, p) in law.atoms() {
        let x = explore_outside(&k, &gamma, &disc)?;
        let key = (x.region.edges().to_vec(), x.state.open_edges().collect());
        if !pieces_of.contains_key(&key) {
            pieces_of.insert(key.clone(), unexplored_discs(&x, &disc)?);
        }
        classes.entry(key).or_default().push((k, p));
    }

    let mut max_tv = 0.0f64;
    for (key, members) in &classes {
        let pieces = &pieces_of[key];
        let piece_laws = pieces
            .iter()
            .map(|d| sourceless_law(&Arc::new(d.graph().clone()), &TanhWeight::default()))
            .collect::<Result<Vec<ExactLaw>>>()?;
        let region_edges: std::collections::BTreeSet<Edge> = key.0.iter().copied().collect();
        let total: f64 = members.iter().map(|(_, p)| p).sum();
        let mut observed: BTreeMap<Vec<Vec<Edge>>, f64> = BTreeMap::new();
        for (k, p) in members {
            let mut parts = vec![Vec::new(); pieces.len()];
            for e in k.open_edges().filter(|e| !region_edges.contains(e)) {
                let i = pieces
                    .iter()
                    .position(|d| d.graph().contains_edge(e))
                    .ok_or_else(|| Error::Invariant(format!("open edge {e:?} outside R and every unexplored disc")))?;
                parts[i].push(e);
            }
            *observed.entry(parts).or_default() += p / total;
        }
        // Product law over the pieces.
        let mut expected: BTreeMap<Vec<Vec<Edge>>, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
        for law in &piece_laws {
            let mut next = BTreeMap::new();
            for (prefix, q) in &expected {
                for (c, p) in law.atoms() {
                    let mut key = prefix.clone();
                    key.push(c.open_edges().collect());
                    next.insert(key, q * p);
                }
            }
            expected = next;
        }
        let keys: std::collections::BTreeSet<_> = observed.keys().chain(expected.keys()).cloned().collect();
        let tv: f64 = keys
            .iter()
            .map(|k| (observed.get(k).copied().unwrap_or(0.0) - expected.get(k).copied().unwrap_or(0.0)).abs())
            .sum::<f64>()
            / 2.0;
        max_tv = max_tv.max(tv);
    }
    Ok(MarkovReport { case, outcomes: classes.len(), max_tv })
}

/// `P(η crosses A^ε but not A)` for each `ε`, all on the same samples.
pub fn crossing_defect(annulus: &PolyAnnulus, eps: &[f64], setup: &Setup) -> Result<Vec<CrossingDefect>> {
    let disc = disc_for(annulus, setup)?;
    let widened = eps.iter().map(|&e| annulus.widened_hole(e)).collect::<Result<Vec<_>>>()?;
    let sampler = CoupledSampler::new(&disc, 0.0, setup.seed, setup.schedule)?;
    let rows = replicate(setup.replicas, |r| {
        let s = PointSet::from_config(&sampler.eta(r));
        if crosses(&s, annulus) {
            return Ok(vec![0.0; eps.len()]);
        }
        Ok(widened.iter().map(|a| if crosses(&s, a) { 1.0 } else { 0.0 }).collect())
    })?;
    let est = transpose_estimates(&rows, eps.len(), setup.seed);
    Ok(eps.iter().zip(est).map(|(&eps, estimate)| CrossingDefect { eps, estimate }).collect())
}

/// `P(x + [−R, R]² ↔ (∂K)_r by ω)` at `t = t_c` on the disc `K`, for each
/// `r` in the ladder, all on the same samples. `(∂K)_r` is the set of
/// vertices within sup distance `r` of a boundary vertex of the discretized
/// `K`; at `r = 0` it is the boundary itself.
pub fn boundary_connection(
    disc_spec: &DomainSpec,
    center: [f64; 2],
    radius: f64,
    rs: &[f64],
    setup: &Setup,
) -> Result<Vec<BoundaryConnection>> {
    let k_poly = disc_spec.polygon()?;
    let square = |s: f64| crossloop_core::polygon::DyadicPolygon::square(center[0], center[1], s);
    if !k_poly.contains_polygon(&square(2.0 * radius)?) || square(3.0 * radius)?.contains_polygon(&k_poly) {
        return Err(Error::Invalid(format!("disc {disc_spec:?} must contain the 2R box and leave the 3R box")));
    }
    if let Some(r) = rs.iter().find(|&&r| r < 0.0) {
        return Err(Error::Invalid(format!("negative boundary thickening {r}")));
    }
    let disc = discretize_domain(disc_spec, setup.n)?;
    let g = disc.graph();
    let n = setup.n as f64;
    // Boundary distance of every vertex, in lattice units.
    let boundary = disc.boundary_vertices();
    let dist: BTreeMap<Point, i32> = g
        .vertices()
        .iter()
        .map(|&v| {
            let d = boundary.iter().map(|b| ((v.x - b.x).abs()).max((v.y - b.y).abs()) / 2).min().unwrap_or(0);
            (v, d)
        })
        .collect();
    let in_box = |v: Point| {
        let p = disc.geometry().to_physical(v);
        (p[0] - center[0]).abs() <= radius && (p[1] - center[1]).abs() <= radius
    };
    let seeds: Vec<Point> = g.vertices().iter().copied().filter(|&v| in_box(v)).collect();
    let thresholds: Vec<i32> = rs.iter().map(|r| (r * n + 1e-9).floor() as i32).collect();
    let sampler = CoupledSampler::new(&disc, critical_constants().t_c, setup.seed, setup.schedule)?;
    let rows = replicate(setup.replicas, |rep| {
        let (_, omega) = sampler.pair(rep)?;
        // The smallest boundary distance reached from the box by ω.
        let mut seen: std::collections::BTreeSet<Point> = seeds.iter().copied().collect();
        let mut stack = seeds.clone();
        let mut best = i32::MAX;
        while let Some(v) = stack.pop() {
            best = best.min(dist[&v]);
            for e in g.incident_edges(v) {
                if omega.is_open(e) {
                    let w = e.other(v);
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        Ok(thresholds.iter().map(|&t| if best <= t { 1.0 } else { 0.0 }).collect())
    })?;
    let est = transpose_estimates(&rows, rs.len(), setup.seed);
    Ok(rs.iter().zip(est).map(|(&r, estimate)| BoundaryConnection { disc: disc_spec.clone(), r, estimate }).collect())
}

/// Runs all three checks.
pub fn condition_suite(settings: &ConditionSettings, setup: &Setup) -> Result<ConditionReport> {
    let markov = settings.markov_cases.iter().map(|&c| markov_check(c)).collect::<Result<Vec<_>>>()?;
    let crossing_defect = crossing_defect(&settings.annulus, &settings.eps_ladder, setup)?;
    let mut boundary = Vec::new();
    for k in &settings.discs {
        boundary.extend(boundary_connection(k, settings.box_center, settings.box_radius, &settings.r_ladder, setup)?);
    }
    Ok(ConditionReport { markov, crossing_defect, boundary_connection: boundary })
}
