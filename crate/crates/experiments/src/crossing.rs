//! Crossing probabilities, the stability gap and the symmetric-difference
//! quantity for the coupled pair `(η, ω = η ∨ b^t)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crossloop_core::annuli::{crosses, crosses_thickened, PointSet, PolyAnnulus};
use crossloop_core::error::{Error, Result};
use crossloop_core::lattice::{discretize_domain, DiscreteDisc, DomainSpec};
use crossloop_core::models::{critical_constants, interface_of, sample_ising_plus, IsingDomain, SweepSchedule};
use crossloop_core::percolation::{overlay, sample_bernoulli, BernoulliField, Config};
use crossloop_core::polygon::DyadicPolygon;

use crate::estimate::{replicate, transpose_estimates, Estimate, Ladder, Rung};

/// Settings shared by every Monte Carlo experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Setup {
    pub domain: DomainSpec,
    /// Mesh parameter: the lattice spacing is `1/n`.
    pub n: u32,
    pub replicas: u64,
    pub seed: u64,
    pub schedule: SweepSchedule,
}

impl Default for Setup {
    fn default() -> Self {
        Setup { domain: DomainSpec::unit_square(), n: 32, replicas: 10_000, seed: 0, schedule: SweepSchedule::default() }
    }
}

impl Setup {
    /// The same setup at another mesh parameter.
    pub fn with_n(&self, n: u32) -> Self {
        Setup { n, ..self.clone() }
    }
}

/// The percolation models whose crossing probabilities can be estimated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CrossingModel {
    /// Independent Bernoulli(`t`) percolation on the disc.
    Bernoulli { t: f64 },
    /// The `+` boundary Ising interface `η`.
    Interface,
    /// The coupled configuration `ω = η ∨ b^t`.
    Coupled { t: f64 },
}

/// Draws the coupled pair `(η, ω = η ∨ b^t)` for any replica. The interface
/// uses the `(seed, Ising, replica)` stream and the perturbation the
/// `(seed, Bernoulli, replica)` stream, so for `t = t_c` this is the
/// current-trace coupling.
pub struct CoupledSampler {
    domain: Arc<IsingDomain>,
    field: BernoulliField,
    seed: u64,
    schedule: SweepSchedule,
}

impl CoupledSampler {
    pub fn new(disc: &DiscreteDisc, t: f64, seed: u64, schedule: SweepSchedule) -> Result<Self> {
        let domain = Arc::new(IsingDomain::new(disc)?);
        let field = BernoulliField::constant(Arc::clone(domain.support()), t)?;
        // Calibrate the sweep length once, outside the parallel section.
        domain.updates_per_sweep();
        Ok(CoupledSampler { domain, field, seed, schedule })
    }

    pub fn domain(&self) -> &Arc<IsingDomain> {
        &self.domain
    }

    /// The interface alone.
    pub fn eta(&self, replica: u64) -> Config {
        interface_of(&sample_ising_plus(&self.domain, self.seed, replica, self.schedule))
    }

    /// The coupled pair; `η ⊆ ω` is checked.
    pub fn pair(&self, replica: u64) -> Result<(Config, Config)> {
        let eta = self.eta(replica);
        let omega = overlay(&eta, &sample_bernoulli(&self.field, self.seed, replica))?;
        if !eta.is_subset_of(&omega) {
            return Err(Error::Invariant(format!("replica {replica}: η is not contained in ω")));
        }
        Ok((eta, omega))
    }
}

/// Checks that `t` is a perturbation intensity in `[0, t*]`.
pub fn check_intensity(t: f64) -> Result<()> {
    let t_star = critical_constants().t_star;
    if !(0.0..=t_star).contains(&t) {
        return Err(Error::Invalid(format!("perturbation intensity {t} outside [0, t* = {t_star}]")));
    }
    Ok(())
}

/// The disc for `setup`, after checking that `annulus` lies in the domain.
pub fn disc_for(annulus: &PolyAnnulus, setup: &Setup) -> Result<DiscreteDisc> {
    let domain = setup.domain.polygon()?;
    if !domain.contains_polygon(annulus.outer()) {
        return Err(Error::Invalid(format!("annulus {annulus} is not inside the domain")));
    }
    discretize_domain(&setup.domain, setup.n)
}

/// The smallest sup-norm distance between the two boundaries of `a`.
pub fn boundary_gap(a: &PolyAnnulus) -> f64 {
    let segs = |p: &DyadicPolygon| -> Vec<[[f64; 2]; 2]> {
        let c = p.corners_f64();
        (0..c.len()).map(|i| [c[i], c[(i + 1) % c.len()]]).collect()
    };
    let gap = |a0: f64, a1: f64, b0: f64, b1: f64| (a0.min(a1) - b0.max(b1)).max(b0.min(b1) - a0.max(a1)).max(0.0);
    let mut best = f64::INFINITY;
    for s in segs(a.inner()) {
        for t in segs(a.outer()) {
            let d = gap(s[0][0], s[1][0], t[0][0], t[1][0]).max(gap(s[0][1], s[1][1], t[0][1], t[1][1]));
            best = best.min(d);
        }
    }
    best
}

/// The fraction of replicas whose sample of `model` crosses `annulus`.
pub fn estimate_crossing_prob(model: CrossingModel, annulus: &PolyAnnulus, setup: &Setup) -> Result<Estimate> {
    let disc = disc_for(annulus, setup)?;
    let hit = |k: &Config| if crosses(&PointSet::from_config(k), annulus) { 1.0 } else { 0.0 };
    let samples = match model {
        CrossingModel::Bernoulli { t } => {
            let field = BernoulliField::constant(Arc::new(disc.graph().clone()), t)?;
            replicate(setup.replicas, |r| Ok(hit(&sample_bernoulli(&field, setup.seed, r))))?
        }
        CrossingModel::Interface => {
            let sampler = CoupledSampler::new(&disc, 0.0, setup.seed, setup.schedule)?;
            replicate(setup.replicas, |r| Ok(hit(&sampler.eta(r))))?
        }
        CrossingModel::Coupled { t } => {
            check_intensity(t)?;
            let sampler = CoupledSampler::new(&disc, t, setup.seed, setup.schedule)?;
            replicate(setup.replicas, |r| Ok(hit(&sampler.pair(r)?.1)))?
        }
    };
    Ok(Estimate::from_samples(&samples, setup.seed))
}

/// The stability gap for each thickening in `rs`, all on the same samples:
/// the probability that `ω ∩ A` joins the `r`-thickenings of the two
/// boundaries while `η` does not cross `A`.
pub fn stability_gap_ladder(annulus: &PolyAnnulus, rs: &[f64], t: f64, setup: &Setup) -> Result<Vec<Estimate>> {
    check_intensity(t)?;
    let gap = boundary_gap(annulus);
    if let Some(r) = rs.iter().find(|&&r| !(0.0..gap).contains(&r)) {
        return Err(Error::Invalid(format!("thickening {r} outside [0, {gap}) for {annulus}")));
    }
    let disc = disc_for(annulus, setup)?;
    let sampler = CoupledSampler::new(&disc, t, setup.seed, setup.schedule)?;
    let rows = replicate(setup.replicas, |rep| {
        let (eta, omega) = sampler.pair(rep)?;
        if crosses(&PointSet::from_config(&eta), annulus) {
            return Ok(vec![0.0; rs.len()]);
        }
        let w = PointSet::from_config(&omega);
        rs.iter().map(|&r| Ok(if crosses_thickened(&w, annulus, r)? { 1.0 } else { 0.0 })).collect()
    })?;
    Ok(transpose_estimates(&rows, rs.len(), setup.seed))
}

/// The stability gap at a single thickening `r`.
pub fn stability_gap(annulus: &PolyAnnulus, r: f64, t: f64, setup: &Setup) -> Result<Estimate> {
    Ok(stability_gap_ladder(annulus, &[r], t, setup)?[0])
}

/// The probability that exactly one of `ω` and `η` crosses `annulus`. The
/// coupling is monotone, so this is `P(ω crosses, η does not)`; a sample in
/// which `η` crosses and `ω` does not is an invariant violation.
pub fn symdiff_crossing(annulus: &PolyAnnulus, t: f64, setup: &Setup) -> Result<Estimate> {
    check_intensity(t)?;
    let disc = disc_for(annulus, setup)?;
    let sampler = CoupledSampler::new(&disc, t, setup.seed, setup.schedule)?;
    let samples = replicate(setup.replicas, |r| {
        let (eta, omega) = sampler.pair(r)?;
        let (ce, cw) = (crosses(&PointSet::from_config(&eta), annulus), crosses(&PointSet::from_config(&omega), annulus));
        if ce && !cw {
            return Err(Error::Invariant(format!("replica {r}: η crosses {annulus} but ω does not")));
        }
        Ok(if cw && !ce { 1.0 } else { 0.0 })
    })?;
    Ok(Estimate::from_samples(&samples, setup.seed))
}

/// [`symdiff_crossing`] over a ladder of mesh parameters.
pub fn symdiff_ladder(annulus: &PolyAnnulus, t: f64, ns: &[u32], setup: &Setup) -> Result<Ladder> {
    let rungs = ns
        .iter()
        .map(|&n| Ok(Rung { param: n as f64, estimate: symdiff_crossing(annulus, t, &setup.with_n(n))? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ladder::new(rungs))
}
