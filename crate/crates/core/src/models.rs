//! Exact laws and samplers for the critical Ising model with `+` boundary
//! condition on a dual disc, its interface, the high-temperature expansion,
//! truncated random-current traces and their Bernoulli coupling, and the
//! level structure of Ising loops.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Dir, DiscreteDisc, DiscreteLoop, Edge, LoopClass, Orientation, Point, PointIndex, Subgraph};
use crate::loopdecomp::level_orientation;
use crate::percolation::{overlay, sample_bernoulli, BernoulliField, Config};
use crate::rng::{stream, Purpose};

/// Largest state space an exact enumerator will visit.
pub const MAX_STATES: u64 = 1 << 24;

/// Default per-edge truncation of current values.
pub const DEFAULT_N_MAX: u32 = 8;

/// Closed forms at the critical point of the square-lattice Ising model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    /// `½ ln(1 + √2)`.
    pub beta_c: f64,
    /// `tanh β_c = √2 − 1`.
    pub tanh_beta_c: f64,
    /// The coupling intensity `1 − 1/cosh β_c`.
    pub t_c: f64,
    /// The stability threshold `1 − 1/cosh² β_c = 3 − 2√2`.
    pub t_star: f64,
}

pub fn critical_constants() -> CriticalConstants {
    let beta_c = 0.5 * (1.0 + std::f64::consts::SQRT_2).ln();
    let sech = 1.0 / beta_c.cosh();
    CriticalConstants { beta_c, tanh_beta_c: beta_c.tanh(), t_c: 1.0 - sech, t_star: 1.0 - sech * sech }
}

// ---------------------------------------------------------------------------
// Ising domains and states

/// The spin sites of a `+` boundary Ising model dual to a primal disc `D`.
///
/// Sites are the faces of the dual disc `D*`. A site is free when all four
/// primal edges around it belong to `D`; every other site is frozen at `+`.
/// Every dual edge with a free endpoint then crosses an edge of `D`, so the
/// interface of any state is a configuration on `D`.
#[derive(Clone, Debug)]
pub struct IsingDomain {
    disc: DiscreteDisc,
    support: Arc<Subgraph>,
    sites: Vec<Point>,
    free: Vec<bool>,
    free_sites: Vec<u32>,
    /// Neighbouring sites in the order E, N, W, S; `NONE` when absent.
    neighbors: Vec<[u32; 4]>,
    /// Index in `support` of the primal edge crossed by each neighbour
    /// link; `NONE` when the link joins two frozen sites outside `D`.
    crossing: Vec<[u32; 4]>,
    side: usize,
    updates_per_sweep: std::sync::OnceLock<u64>,
}

const NONE: u32 = u32::MAX;

impl IsingDomain {
    pub fn new(disc: &DiscreteDisc) -> Result<Self> {
        let dual = disc.dual()?;
        let support = Arc::new(disc.graph().clone());
        let sites: Vec<Point> = dual.graph().vertices().to_vec();
        let id = |p: Point| sites.binary_search(&p).ok().map(|i| i as u32).unwrap_or(NONE);
        let mut free = Vec::with_capacity(sites.len());
        let mut neighbors = Vec::with_capacity(sites.len());
        let mut crossing = Vec::with_capacity(sites.len());
        for &f in &sites {
            let mut nb = [NONE; 4];
            let mut cr = [NONE; 4];
            for (k, d) in Dir::ALL.into_iter().enumerate() {
                let g = f.step(d);
                nb[k] = id(g);
                let e = Edge::new(f, g)?.dual();
                cr[k] = support.edge_index(e).map(|i| i as u32).unwrap_or(NONE);
            }
            free.push(cr.iter().all(|&c| c != NONE));
            neighbors.push(nb);
            crossing.push(cr);
        }
        let free_sites = (0..sites.len() as u32).filter(|&i| free[i as usize]).collect();
        let (lo, hi) = dual.graph().bounding_box().expect("a dual disc is nonempty");
        let side = ((hi.x - lo.x).max(hi.y - lo.y) / 2 + 1) as usize;
        Ok(IsingDomain {
            disc: disc.clone(),
            support,
            sites,
            free,
            free_sites,
            neighbors,
            crossing,
            side,
            updates_per_sweep: std::sync::OnceLock::new(),
        })
    }

    /// The primal disc `D`.
    pub fn disc(&self) -> &DiscreteDisc {
        &self.disc
    }

    /// The edges of `D`, the support of interfaces.
    pub fn support(&self) -> &Arc<Subgraph> {
        &self.support
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn num_free(&self) -> usize {
        self.free_sites.len()
    }

    pub fn is_free(&self, p: Point) -> bool {
        self.site_index(p).is_some_and(|i| self.free[i])
    }

    pub fn site_index(&self, p: Point) -> Option<usize> {
        self.sites.binary_search(&p).ok()
    }

    /// The number of cluster updates making up one sweep: the number of free
    /// spins divided by the mean number of sites a cluster update visits,
    /// measured once on a pilot chain with a fixed seed.
    pub fn updates_per_sweep(self: &Arc<Self>) -> u64 {
        *self.updates_per_sweep.get_or_init(|| {
            let nf = self.num_free() as u64;
            if nf == 0 {
                return 0;
            }
            let mut pilot = WolffChain::new(Arc::clone(self), PILOT_SEED, 0);
            let (mut visited, mut updates) = (0u64, 0u64);
            while updates < 64 || visited < 50 * nf {
                visited += pilot.update() as u64;
                updates += 1;
            }
            (nf * updates).div_ceil(visited).max(1)
        })
    }

    /// Side length `L` of the dual disc's bounding box, in sites.
    pub fn side(&self) -> usize {
        self.side
    }
}

/// A spin configuration on the sites of an [`IsingDomain`].
#[derive(Clone, Debug)]
pub struct IsingState {
    domain: Arc<IsingDomain>,
    spins: Vec<i8>,
}

impl PartialEq for IsingState {
    fn eq(&self, other: &Self) -> bool {
        self.domain.sites == other.domain.sites && self.spins == other.spins
    }
}

impl Eq for IsingState {}

impl IsingState {
    pub fn all_plus(domain: Arc<IsingDomain>) -> Self {
        let spins = vec![1; domain.sites.len()];
        IsingState { domain, spins }
    }

    /// Builds a state from one spin per free site, in site order.
    pub fn from_free_spins(domain: Arc<IsingDomain>, free_spins: &[i8]) -> Result<Self> {
        if free_spins.len() != domain.num_free() || free_spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Invalid(format!("expected {} spins of ±1", domain.num_free())));
        }
        let mut s = IsingState::all_plus(domain);
        for (k, &i) in s.domain.free_sites.clone().iter().enumerate() {
            s.spins[i as usize] = free_spins[k];
        }
        Ok(s)
    }

    pub fn domain(&self) -> &Arc<IsingDomain> {
        &self.domain
    }

    /// The spin at a site of `D*`; `None` for other points.
    pub fn spin(&self, p: Point) -> Option<i8> {
        self.domain.site_index(p).map(|i| self.spins[i])
    }

    /// Sets a free spin.
    pub fn set(&mut self, p: Point, spin: i8) -> Result<()> {
        match self.domain.site_index(p) {
            Some(i) if self.domain.free[i] && (spin == 1 || spin == -1) => {
                self.spins[i] = spin;
                Ok(())
            }
            _ => Err(Error::Invalid(format!("{p:?} is not a free site or {spin} is not a spin"))),
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Sum of the free spins.
    pub fn magnetization(&self) -> i64 {
        self.domain.free_sites.iter().map(|&i| self.spins[i as usize] as i64).sum()
    }

    /// `Σ σ_x σ_y` over neighbouring sites with at least one free endpoint.
    pub fn interaction(&self) -> i64 {
        let d = &self.domain;
        let mut sum = 0;
        for i in 0..d.sites.len() {
            for k in 0..2 {
                let j = d.neighbors[i][k];
                if j != NONE && (d.free[i] || d.free[j as usize]) {
                    sum += (self.spins[i] * self.spins[j as usize]) as i64;
                }
            }
        }
        sum
    }
}

/// The interface of a state: the edges of `D` whose dual edge joins two
/// sites of opposite spin. Always sourceless on `D`.
pub fn interface_of(s: &IsingState) -> Config {
    let d = &s.domain;
    let mut k = Config::empty(Arc::clone(&d.support));
    for i in 0..d.sites.len() {
        for c in 0..2 {
            let j = d.neighbors[i][c];
            let e = d.crossing[i][c];
            if j != NONE && e != NONE && s.spins[i] != s.spins[j as usize] {
                k.set_bit(e as usize, true);
            }
        }
    }
    k
}

// ---------------------------------------------------------------------------
// Exact laws

/// A finite probability distribution over configurations on one support.
#[derive(Clone, Debug)]
pub struct ExactLaw {
    support: Arc<Subgraph>,
    probs: BTreeMap<Vec<u64>, f64>,
    /// Per-edge truncation mass bound, for truncated current laws.
    pub truncation_bound: Option<f64>,
}

/// A compact key for a configuration: the open-edge bitset as words.
fn law_key(k: &Config) -> Vec<u64> {
    let mut words = vec![0u64; k.support().num_edges().div_ceil(64)];
    for i in k.bits().iter_ones() {
        words[i / 64] |= 1 << (i % 64);
    }
    words
}

impl ExactLaw {
    fn from_weights(support: Arc<Subgraph>, weights: BTreeMap<Vec<u64>, f64>) -> Result<Self> {
        let total = pairwise_sum(&weights.values().copied().collect::<Vec<_>>());
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Invariant(format!("law has total weight {total}")));
        }
        let probs = weights.into_iter().map(|(k, w)| (k, w / total)).collect();
        Ok(ExactLaw { support, probs, truncation_bound: None })
    }

    pub fn support(&self) -> &Arc<Subgraph> {
        &self.support
    }

    /// Probability of a configuration (zero off the law's support).
    pub fn prob(&self, k: &Config) -> f64 {
        self.probs.get(&law_key(k)).copied().unwrap_or(0.0)
    }

    /// Number of configurations with positive probability.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The atoms as `(configuration, probability)`, in key order.
    pub fn atoms(&self) -> impl Iterator<Item = (Config, f64)> + '_ {
        self.probs.iter().map(move |(key, &p)| {
            let mut k = Config::empty(Arc::clone(&self.support));
            for (w, word) in key.iter().enumerate() {
                let mut bits = *word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    k.set_bit(w * 64 + b, true);
                    bits &= bits - 1;
                }
            }
            (k, p)
        })
    }

    /// Total variation distance `½ Σ |p − q|`.
    pub fn tv(&self, other: &ExactLaw) -> Result<f64> {
        if *self.support != *other.support {
            return Err(Error::SupportMismatch);
        }
        let keys: BTreeSet<&Vec<u64>> = self.probs.keys().chain(other.probs.keys()).collect();
        let diffs: Vec<f64> = keys
            .into_iter()
            .map(|k| (self.probs.get(k).copied().unwrap_or(0.0) - other.probs.get(k).copied().unwrap_or(0.0)).abs())
            .collect();
        Ok(0.5 * pairwise_sum(&diffs))
    }

    /// The law of `κ ∨ b`, with `κ` drawn from this law and `b` an
    /// independent Bernoulli configuration of constant intensity `t`.
    pub fn overlay_bernoulli(&self, t: f64) -> Result<ExactLaw> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid(format!("intensity {t} outside [0, 1]")));
        }
        let m = self.support.num_edges();
        if m > 24 {
            return Err(Error::TooLarge(format!("{m} edges")));
        }
        let mut out: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (k, p) in self.atoms() {
            let closed: Vec<usize> = (0..m).filter(|&i| !k.bit(i)).collect();
            for sub in 0u64..(1 << closed.len()) {
                let mut w = k.clone();
                let mut q = p;
                for (j, &i) in closed.iter().enumerate() {
                    if sub >> j & 1 == 1 {
                        w.set_bit(i, true);
                        q *= t;
                    } else {
                        q *= 1.0 - t;
                    }
                }
                *out.entry(law_key(&w)).or_default() += q;
            }
        }
        ExactLaw::from_weights(Arc::clone(&self.support), out)
    }
}

/// Sum with a fixed binary tree over the input order, so the result does
/// not depend on how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// A nonnegative weight on percolation configurations, defining the law
/// `P(κ) ∝ w(κ)` on sourceless configurations.
pub trait ConfigWeight {
    fn weight(&self, k: &Config) -> f64;
}

/// The high-temperature weight `x^{|κ|}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TanhWeight(pub f64);

impl Default for TanhWeight {
    /// The critical weight `tanh β_c`.
    fn default() -> Self {
        TanhWeight(critical_constants().tanh_beta_c)
    }
}

impl ConfigWeight for TanhWeight {
    fn weight(&self, k: &Config) -> f64 {
        self.0.powi(k.num_open() as i32)
    }
}

/// The models with an exact enumerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    /// The interface of the critical `+` boundary Ising model.
    IsingPlus,
    /// The critical high-temperature expansion.
    HtExpansion,
    /// The trace of the critical sourceless random current, with currents
    /// truncated at `n_max` per edge.
    CurrentTrace { n_max: u32 },
}

/// The exact law of `model` on the disc `disc`, as a law over
/// configurations on its edges.
pub fn enumerate_law(model: ModelKind, disc: &DiscreteDisc) -> Result<ExactLaw> {
    match model {
        ModelKind::IsingPlus => {
            let domain = Arc::new(IsingDomain::new(disc)?);
            ising_interface_law(&domain)
        }
        ModelKind::HtExpansion => sourceless_law(&Arc::new(disc.graph().clone()), &TanhWeight::default()),
        ModelKind::CurrentTrace { n_max } => current_trace_law(&Arc::new(disc.graph().clone()), n_max),
    }
}

/// Every state of the `+` boundary Ising model on `domain` at `β_c` with its
/// probability, in the order of the free spins read as a binary number
/// (bit `i` set means free site `i` is `−`).
pub fn enumerate_ising_plus(domain: &Arc<IsingDomain>) -> Result<Vec<(IsingState, f64)>> {
    let nf = domain.num_free();
    if nf as u64 > MAX_STATES.trailing_zeros() as u64 {
        return Err(Error::TooLarge(format!("{nf} free spins")));
    }
    let beta = critical_constants().beta_c;
    let mut states = Vec::with_capacity(1 << nf);
    let mut energies = Vec::with_capacity(1 << nf);
    for mask in 0u64..(1 << nf) {
        let spins: Vec<i8> = (0..nf).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let s = IsingState::from_free_spins(Arc::clone(domain), &spins)?;
        energies.push(s.interaction());
        states.push(s);
    }
    let top = *energies.iter().max().unwrap();
    let weights: Vec<f64> = energies.iter().map(|&h| (beta * (h - top) as f64).exp()).collect();
    let z = pairwise_sum(&weights);
    Ok(states.into_iter().zip(weights).map(|(s, w)| (s, w / z)).collect())
}

/// The pushforward of the Ising law under [`interface_of`].
pub fn ising_interface_law(domain: &Arc<IsingDomain>) -> Result<ExactLaw> {
    let mut out: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    for (s, p) in enumerate_ising_plus(domain)? {
        *out.entry(law_key(&interface_of(&s))).or_default() += p;
    }
    ExactLaw::from_weights(Arc::clone(&domain.support), out)
}

/// Edge indices of the boundaries of the bounded unit faces of `g`. For a
/// graph whose bounded faces are all unit squares these boundaries form a
/// basis of the sourceless configurations.
fn face_basis(g: &Subgraph) -> Result<Vec<[usize; 4]>> {
    let faces: BTreeSet<Point> = g.vertices().iter().flat_map(|v| v.corners()).collect();
    let mut basis = Vec::new();
    for f in faces {
        let edges = Dir::ALL.map(|d| Edge::new(f, f.step(d)).map(|e| g.edge_index(e.dual())));
        if edges.iter().all(|e| matches!(e, Ok(Some(_)))) {
            basis.push(edges.map(|e| e.unwrap().unwrap()));
        }
    }
    let components = g.components().len();
    let rank = g.num_edges() + components - g.num_vertices();
    if basis.len() != rank {
        return Err(Error::Invalid(format!(
            "the graph has cycle rank {rank} but {} unit faces; only graphs without holes are supported",
            basis.len()
        )));
    }
    Ok(basis)
}

/// The law `P(κ) ∝ w(κ)` on the sourceless configurations of `support`.
pub fn sourceless_law(support: &Arc<Subgraph>, weight: &dyn ConfigWeight) -> Result<ExactLaw> {
    let basis = face_basis(support)?;
    if basis.len() as u32 >= MAX_STATES.trailing_zeros() + 1 {
        return Err(Error::TooLarge(format!("{} independent cycles", basis.len())));
    }
    let mut k = Config::empty(Arc::clone(support));
    let mut out = BTreeMap::new();
    // Gray-code walk over subsets of faces: one face toggles per step.
    for step in 0u64..(1 << basis.len()) {
        if step > 0 {
            for &i in &basis[step.trailing_zeros() as usize] {
                let b = k.bit(i);
                k.set_bit(i, !b);
            }
        }
        debug_assert!(k.is_sourceless());
        out.insert(law_key(&k), weight.weight(&k));
    }
    ExactLaw::from_weights(Arc::clone(support), out)
}

/// `Σ_{m > n_max} β^m / m!`, the mass a truncation at `n_max` drops from
/// the per-edge series.
pub fn truncation_tail(beta: f64, n_max: u32) -> f64 {
    let mut term = 1.0;
    let mut tail = 0.0;
    for m in 1..=(n_max + 60) {
        term *= beta / m as f64;
        if m > n_max {
            tail += term;
        }
    }
    tail
}

/// The law of the trace of the sourceless current at `β_c` with values
/// truncated at `n_max`. Each edge is in one of three classes: zero, a
/// positive even value (weight `Σ_{0 < 2j ≤ n_max} β^{2j}/(2j)!`) or an odd
/// value (weight `Σ_{2j+1 ≤ n_max} β^{2j+1}/(2j+1)!`); the source constraint
/// only sees the parities.
pub fn current_trace_law(support: &Arc<Subgraph>, n_max: u32) -> Result<ExactLaw> {
    let m = support.num_edges();
    if (m as f64) * 3f64.log2() > MAX_STATES.trailing_zeros() as f64 {
        return Err(Error::TooLarge(format!("3^{m} current classes")));
    }
    let beta = critical_constants().beta_c;
    let (mut even, mut odd) = (0.0, 0.0);
    let mut term = 1.0;
    for j in 1..=n_max {
        term *= beta / j as f64;
        if j % 2 == 0 {
            even += term;
        } else {
            odd += term;
        }
    }
    let verts = support.vertices();
    let ends: Vec<(usize, usize)> = support
        .edges()
        .iter()
        .map(|e| (verts.binary_search(&e.a()).unwrap(), verts.binary_search(&e.b()).unwrap()))
        .collect();
    let mut out: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    let mut class = vec![0u8; m];
    let mut parity = vec![false; verts.len()];
    let mut k = Config::empty(Arc::clone(support));
    loop {
        if parity.iter().all(|&p| !p) {
            let w: f64 = class.iter().map(|&c| [1.0, even, odd][c as usize]).product();
            *out.entry(law_key(&k)).or_default() += w;
        }
        // Base-3 increment; parities flip when an edge enters or leaves
        // the odd class.
        let mut i = 0;
        while i < m && class[i] == 2 {
            class[i] = 0;
            k.set_bit(i, false);
            parity[ends[i].0] ^= true;
            parity[ends[i].1] ^= true;
            i += 1;
        }
        if i == m {
            break;
        }
        class[i] += 1;
        k.set_bit(i, true);
        if class[i] == 2 {
            parity[ends[i].0] ^= true;
            parity[ends[i].1] ^= true;
        }
    }
    let mut law = ExactLaw::from_weights(Arc::clone(support), out)?;
    law.truncation_bound = Some(truncation_tail(beta, n_max));
    Ok(law)
}

// ---------------------------------------------------------------------------
// Sampling

/// Seed of the pilot chain that calibrates the sweep length.
const PILOT_SEED: u64 = 0x7069_6c6f_74;

/// Mixing control for the cluster sampler, in sweeps. A sweep is a fixed
/// number of cluster updates which on average visit as many sites as there
/// are free spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSchedule {
    pub burn_in: u64,
    pub thinning: u64,
}

impl Default for SweepSchedule {
    fn default() -> Self {
        SweepSchedule { burn_in: 20, thinning: 1 }
    }
}

/// Wolff single-cluster dynamics at `β_c` with the frozen `+` sites merged
/// into one ghost site. A cluster that reaches the ghost is not flipped, so
/// boundary spins never change.
pub struct WolffChain {
    state: IsingState,
    rng: ChaCha8Rng,
    p_add: f64,
    mark: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
    cluster: Vec<u32>,
}

impl WolffChain {
    /// A chain started from the all-plus state, driven by the
    /// `(seed, Ising, replica)` stream.
    pub fn new(domain: Arc<IsingDomain>, seed: u64, replica: u64) -> Self {
        let n = domain.sites.len();
        let beta = critical_constants().beta_c;
        WolffChain {
            state: IsingState::all_plus(domain),
            rng: stream(seed, Purpose::Ising, replica),
            p_add: 1.0 - (-2.0 * beta).exp(),
            mark: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
            cluster: Vec::new(),
        }
    }

    pub fn state(&self) -> &IsingState {
        &self.state
    }

    /// One cluster update; returns the number of sites added to the
    /// cluster, whether or not it was flipped.
    pub fn update(&mut self) -> usize {
        let d = Arc::clone(&self.state.domain);
        if d.free_sites.is_empty() {
            return 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let seed = d.free_sites[self.rng.gen_range(0..d.free_sites.len())];
        let spin = self.state.spins[seed as usize];
        self.stack.clear();
        self.cluster.clear();
        self.stack.push(seed);
        self.cluster.push(seed);
        self.mark[seed as usize] = self.epoch;
        let mut ghost = false;
        'grow: while let Some(x) = self.stack.pop() {
            for &y in &d.neighbors[x as usize] {
                if y == NONE || self.mark[y as usize] == self.epoch || self.state.spins[y as usize] != spin {
                    continue;
                }
                if self.rng.gen::<f64>() >= self.p_add {
                    continue;
                }
                if !d.free[y as usize] {
                    ghost = true;
                    break 'grow;
                }
                self.mark[y as usize] = self.epoch;
                self.stack.push(y);
                self.cluster.push(y);
            }
        }
        if !ghost {
            for &x in &self.cluster {
                self.state.spins[x as usize] = -spin;
            }
        }
        self.cluster.len()
    }

    /// A fixed number of cluster updates, [`IsingDomain::updates_per_sweep`].
    /// The count never depends on the current state: stopping a chain at a
    /// state-dependent time would bias the sample.
    pub fn sweep(&mut self) {
        let count = self.state.domain.updates_per_sweep();
        for _ in 0..count {
            self.update();
        }
    }

    pub fn sweeps(&mut self, count: u64) {
        for _ in 0..count {
            self.sweep();
        }
    }
}

/// A sample of the `+` boundary Ising model at `β_c`: the state of a
/// [`WolffChain`] after `schedule.burn_in` sweeps.
pub fn sample_ising_plus(domain: &Arc<IsingDomain>, seed: u64, replica: u64, schedule: SweepSchedule) -> IsingState {
    let mut chain = WolffChain::new(Arc::clone(domain), seed, replica);
    chain.sweeps(schedule.burn_in);
    chain.state
}

/// A sample of the coupled pair `(η, η ∨ b^{t_c})`: the Ising interface and
/// its overlay with an independent Bernoulli(`t_c`) configuration, drawn
/// from the `(seed, Bernoulli, replica)` stream.
pub fn sample_current_trace(
    domain: &Arc<IsingDomain>,
    seed: u64,
    replica: u64,
    schedule: SweepSchedule,
) -> (Config, Config) {
    let eta = interface_of(&sample_ising_plus(domain, seed, replica, schedule));
    let field = BernoulliField::constant(Arc::clone(&domain.support), critical_constants().t_c)
        .expect("t_c lies in [0, 1]");
    let b = sample_bernoulli(&field, seed, replica);
    let trace = overlay(&eta, &b).expect("both configurations live on the domain's edges");
    (eta, trace)
}

// ---------------------------------------------------------------------------
// Ising loops

/// Upper bound on the number of Ising loops [`ising_loop_levels`] will
/// enumerate.
pub const MAX_ISING_LOOPS: usize = 200_000;

/// Ising loops by level, with the side-most loops of each level.
#[derive(Clone, Debug, Default)]
pub struct IsingLoopLevels {
    /// `levels[i]` holds the level-`(i + 1)` Ising loops.
    pub levels: Vec<Vec<DiscreteLoop>>,
    /// `most[i]` holds the loops of `levels[i]` that follow a strong loop of
    /// `+` spins on their left (odd levels) or of `−` spins on their right
    /// (even levels).
    pub most: Vec<Vec<DiscreteLoop>>,
}

/// The spin schedule: `+` after odd levels, `−` after even ones (and for
/// the boundary, level 0).
fn level_spin(i: u32) -> i8 {
    if i % 2 == 1 {
        1
    } else {
        -1
    }
}

/// The Ising loops of a state, by level. An Ising loop is a loop on the
/// edges of `D` using no edge twice, with a `+` spin on the left and a `−`
/// spin on the right of every edge. Level-`(i + 1)` loops are the remaining
/// loops inside some level-`i` loop `l'` (the boundary of `D` for `i = 0`)
/// such that no weak (eight-connected) loop of `s(i)` spins separates them
/// from `l'`. Loops are listed once per edge set.
pub fn ising_loop_levels(s: &IsingState) -> Result<IsingLoopLevels> {
    let d = &s.domain;
    let spin_at = |f: Point| s.spin(f);
    let interface: BTreeSet<Edge> = interface_of(s).open_edges().collect();

    // Every edge has a forced direction: `+` on the left.
    let directed = |e: Edge| -> (Point, Point) {
        let m = e.midpoint();
        let (a, b) = (e.a(), e.b());
        let left = Point::new(m.x - (b.y - a.y) / 2, m.y + (b.x - a.x) / 2);
        if spin_at(left) == Some(1) {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut out_edges: BTreeMap<Point, Vec<Edge>> = BTreeMap::new();
    for &e in &interface {
        out_edges.entry(directed(e).0).or_default().push(e);
    }

    // Enumerate edge-distinct closed walks, each from its smallest edge.
    let mut found: BTreeMap<Vec<Edge>, DiscreteLoop> = BTreeMap::new();
    for &e0 in &interface {
        let (start, first) = directed(e0);
        let mut path = vec![start, first];
        let mut used: BTreeSet<Edge> = [e0].into_iter().collect();
        let mut cursors: Vec<usize> = vec![0];
        let mut trail: Vec<Edge> = vec![e0];
        while let Some(c) = cursors.last_mut() {
            let cur = *path.last().unwrap();
            let choices = out_edges.get(&cur).map(Vec::as_slice).unwrap_or(&[]);
            if *c >= choices.len() {
                cursors.pop();
                if let Some(e) = trail.pop() {
                    used.remove(&e);
                }
                path.pop();
                continue;
            }
            let e = choices[*c];
            *c += 1;
            if e == e0 {
                let l = DiscreteLoop::new(path.clone())?;
                found.entry(l.edge_set().into_iter().collect()).or_insert(l);
                if found.len() > MAX_ISING_LOOPS {
                    return Err(Error::TooLarge(format!("more than {MAX_ISING_LOOPS} Ising loops")));
                }
                continue;
            }
            if e < e0 || used.contains(&e) {
                continue;
            }
            used.insert(e);
            trail.push(e);
            path.push(e.other(cur));
            cursors.push(0);
        }
    }
    let loops: Vec<DiscreteLoop> = found.into_values().collect();
    for l in &loops {
        if !l.class().at_least(LoopClass::WeaklySimple) {
            return Err(Error::Invariant(format!("Ising loop through {:?} is not weakly simple", l.vertices()[0])));
        }
    }

    let separation = SeparationFrame::new(s);
    let boundary = d.disc.boundary_loop().clone();
    let mut level: Vec<Option<u32>> = vec![None; loops.len()];
    let mut previous: Vec<DiscreteLoop> = vec![boundary];
    let mut i = 0u32;
    while !previous.is_empty() {
        let blocked = separation.blocked(level_spin(i));
        let mut next = Vec::new();
        for (j, l) in loops.iter().enumerate() {
            if level[j].is_some() {
                continue;
            }
            let joined = previous
                .iter()
                .any(|lp| (i == 0 || l.is_inside(lp)) && separation.connected(&blocked, l, lp));
            if joined {
                level[j] = Some(i + 1);
                next.push(l.clone());
            }
        }
        previous = next;
        i += 1;
    }

    let mut out = IsingLoopLevels::default();
    for (l, lv) in loops.into_iter().zip(level) {
        let Some(lv) = lv else { continue };
        if l.orientation() != level_orientation(lv) {
            return Err(Error::Invariant(format!(
                "level-{lv} Ising loop through {:?} has orientation {:?}",
                l.vertices()[0],
                l.orientation()
            )));
        }
        let idx = lv as usize - 1;
        while out.levels.len() <= idx {
            out.levels.push(Vec::new());
            out.most.push(Vec::new());
        }
        if follows_strong_loop(s, &l, level_spin(lv)) {
            out.most[idx].push(l.clone());
        }
        out.levels[idx].push(l);
    }
    Ok(out)
}

/// Whether the faces along one side of `l` (the left for `spin = +`, the
/// right for `spin = −`), including the outer corner faces where `l` turns
/// away from that side, all carry `spin`. Those faces form a strong loop
/// following `l`.
fn follows_strong_loop(s: &IsingState, l: &DiscreteLoop, spin: i8) -> bool {
    let v = l.vertices();
    let n = v.len();
    let left = spin == 1;
    for k in 0..n {
        let (a, b, c) = (v[(k + n - 1) % n], v[k], v[(k + 1) % n]);
        let din = Dir::between(a, b).unwrap();
        let dout = Dir::between(b, c).unwrap();
        let side = |p: Point, d: Dir| {
            let (dx, dy) = d.vector();
            let m = Point::new(p.x + dx / 2, p.y + dy / 2);
            let n = if left { d.left() } else { d.right() };
            let (nx, ny) = n.vector();
            Point::new(m.x + nx / 2, m.y + ny / 2)
        };
        if s.spin(side(b, dout)) != Some(spin) {
            return false;
        }
        let away = if left { dout == din.right() } else { dout == din.left() };
        if away {
            // The corner face diagonal to the inner corner, on the side.
            let (ix, iy) = din.vector();
            let (ox, oy) = dout.vector();
            let corner = Point::new(b.x + (ix - ox) / 2, b.y + (iy - oy) / 2);
            if s.spin(corner) != Some(spin) {
                return false;
            }
        }
    }
    true
}

/// Planar connectivity on the doubled grid after removing the segments of
/// all weak loops of one spin: sites of that spin, the edge midpoints
/// between two of them, and the vertices crossed by a diagonal pair.
struct SeparationFrame<'a> {
    state: &'a IsingState,
    index: PointIndex,
}

impl<'a> SeparationFrame<'a> {
    fn new(state: &'a IsingState) -> Self {
        let sites = state.domain.sites();
        let lo = *sites.iter().min_by_key(|p| (p.x, p.y)).unwrap();
        let (mut lo, mut hi) = (lo, lo);
        for p in sites {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        SeparationFrame { state, index: PointIndex::covering(lo, hi, 2) }
    }

    fn blocked(&self, spin: i8) -> Vec<bool> {
        let is = |p: Point| self.state.spin(p) == Some(spin);
        (0..self.index.len())
            .map(|i| {
                let p = self.index.point(i);
                match (p.x.rem_euclid(2), p.y.rem_euclid(2)) {
                    (1, 1) => is(p),
                    (0, 0) => {
                        (is(Point::new(p.x + 1, p.y + 1)) && is(Point::new(p.x - 1, p.y - 1)))
                            || (is(Point::new(p.x - 1, p.y + 1)) && is(Point::new(p.x + 1, p.y - 1)))
                    }
                    (1, 0) => is(Point::new(p.x, p.y + 1)) && is(Point::new(p.x, p.y - 1)),
                    _ => is(Point::new(p.x + 1, p.y)) && is(Point::new(p.x - 1, p.y)),
                }
            })
            .collect()
    }

    /// Whether `a` and `b` (as point sets: vertices and edge midpoints) are
    /// joined by a path avoiding the blocked points. A weak loop passing
    /// through a vertex of `a` and otherwise enclosing it separates it.
    fn connected(&self, blocked: &[bool], a: &DiscreteLoop, b: &DiscreteLoop) -> bool {
        let points = |l: &DiscreteLoop| -> Vec<usize> {
            let mut v: Vec<usize> = l.vertices().iter().filter_map(|&p| self.index.index(p)).collect();
            v.extend(l.edges().iter().filter_map(|e| self.index.index(e.midpoint())));
            v
        };
        let mut target = vec![false; self.index.len()];
        for i in points(b) {
            target[i] = !blocked[i];
        }
        let mut seen = vec![false; self.index.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for i in points(a).into_iter().filter(|&i| !blocked[i]) {
            if target[i] {
                return true;
            }
            seen[i] = true;
            queue.push_back(i);
        }
        while let Some(i) = queue.pop_front() {
            let p = self.index.point(i);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let Some(j) = self.index.index(Point::new(p.x + dx, p.y + dy)) else { continue };
                if seen[j] || blocked[j] {
                    continue;
                }
                if target[j] {
                    return true;
                }
                seen[j] = true;
                queue.push_back(j);
            }
        }
        false
    }
}

/// Orientation-aware comparison key for loop collections.
pub fn loop_keys(loops: &[DiscreteLoop]) -> BTreeSet<(Vec<Edge>, Orientation)> {
    loops.iter().map(|l| (l.edge_set().into_iter().collect(), l.orientation())).collect()
}
