//! Static exploration of a sourceless configuration from outside a loop γ:
//! the explored region `R`, its admissible states, and the unexplored discs
//! left inside γ.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{DiscreteDisc, DiscreteLoop, Edge, LoopClass, Subgraph};
use crate::loopdecomp::{decompose, LevelledLoop};
use crate::percolation::Config;

/// The outcome of exploring a configuration from outside `gamma`.
#[derive(Clone, Debug)]
pub struct Exploration {
    /// The loop explored from outside.
    pub gamma: DiscreteLoop,
    /// The disc `[γ]` bounded by `gamma`.
    pub gamma_disc: Subgraph,
    /// The explored region `R`.
    pub region: Arc<Subgraph>,
    /// The configuration revealed on `R`.
    pub state: Config,
    /// The loops of the decomposition that reach outside `[γ]`.
    pub loops: Vec<LevelledLoop>,
}

/// `l⁺`: the vertices of `l` and every edge of the ambient disc with an
/// endpoint on `l`.
pub fn l_plus(l: &DiscreteLoop, ambient: &Subgraph) -> Subgraph {
    let vertices = l.vertex_set();
    let edges = vertices.iter().flat_map(|&v| ambient.incident_edges(v)).collect::<Vec<Edge>>();
    Subgraph::new(ambient.geometry(), vertices, edges)
}

/// `[γ]`: the vertices in the closed region bounded by `gamma` and the
/// edges of the ambient disc whose midpoint lies in that region.
pub fn enclosed_disc(gamma: &DiscreteLoop, ambient: &Subgraph) -> Result<Subgraph> {
    if !gamma.is_primal() || !gamma.class().at_least(LoopClass::NonSelfCrossing) {
        return Err(Error::LoopClass("γ must be a non-self-crossing primal loop".into()));
    }
    let vertices = gamma.closed_region();
    if let Some(v) = vertices.iter().find(|v| !ambient.contains_vertex(**v)) {
        return Err(Error::NotSubgraph(format!("γ encloses {v:?}, which is outside the disc")));
    }
    let on_gamma: BTreeSet<Edge> = gamma.edge_set();
    let set: BTreeSet<_> = vertices.iter().copied().collect();
    let mut edges = Vec::new();
    for &v in &vertices {
        for e in ambient.incident_edges(v) {
            if e.a() == v && set.contains(&e.b()) && (on_gamma.contains(&e) || gamma.strictly_encloses(e.midpoint())) {
                edges.push(e);
            }
        }
    }
    Ok(Subgraph::new(ambient.geometry(), vertices, edges))
}

/// Whether `l` meets `D∖[γ]`: it has a vertex or an edge there.
fn meets(l: &DiscreteLoop, outside: &Subgraph) -> bool {
    l.vertices().iter().any(|&v| outside.contains_vertex(v)) || l.edges().iter().any(|&e| outside.contains_edge(e))
}

/// `U(L) = (D∖[γ]) ∪ ⋃ { l⁺ : l ∈ L meets D∖[γ] }`.
fn explored_union<'a>(
    loops: impl IntoIterator<Item = &'a DiscreteLoop>,
    outside: &Subgraph,
    ambient: &Subgraph,
) -> (Subgraph, Vec<usize>) {
    let mut region = outside.clone();
    let mut used = Vec::new();
    for (i, l) in loops.into_iter().enumerate() {
        if meets(l, outside) {
            region = region.union(&l_plus(l, ambient));
            used.push(i);
        }
    }
    (region, used)
}

/// Explores `k` from outside `gamma`: `R` is the outside of `[γ]` together
/// with `l⁺` for every decomposition loop that meets it, and the state is
/// `k` restricted to `R`.
pub fn explore_outside(k: &Config, gamma: &DiscreteLoop, disc: &DiscreteDisc) -> Result<Exploration> {
    let ambient = disc.graph();
    let gamma_disc = enclosed_disc(gamma, ambient)?;
    let outside = ambient.difference(&gamma_disc);
    let dec = decompose(k, disc)?;
    let (region, used) = explored_union(dec.loops.iter().map(|l| &l.cycle), &outside, ambient);
    let region = Arc::new(region);
    let state = dec.source_config.restrict_arc(&region)?;
    let loops = used.into_iter().map(|i| dec.loops[i].clone()).collect();
    Ok(Exploration { gamma: gamma.clone(), gamma_disc, region, state, loops })
}

/// Whether `state` (a configuration on `region`) is admissible: sourceless
/// relative to `region`, and `region` equals the explored union built from
/// the decomposition of its trivial extension to the disc.
pub fn is_admissible(region: &Subgraph, state: &Config, gamma: &DiscreteLoop, disc: &DiscreteDisc) -> Result<bool> {
    if state.support() != region {
        return Err(Error::SupportMismatch);
    }
    if !state.source_set(region).is_empty() {
        return Ok(false);
    }
    let ambient = disc.graph();
    let gamma_disc = enclosed_disc(gamma, ambient)?;
    let outside = ambient.difference(&gamma_disc);
    let extended = state.extend_to(&Arc::new(ambient.clone()));
    let dec = match decompose(&extended, disc) {
        Ok(d) => d,
        Err(Error::HasSources(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let (union, _) = explored_union(dec.loops.iter().map(|l| &l.cycle), &outside, ambient);
    Ok(&union == region)
}

impl Exploration {
    /// Whether the revealed state is admissible for the explored region.
    pub fn is_admissible(&self, disc: &DiscreteDisc) -> Result<bool> {
        is_admissible(&self.region, &self.state, &self.gamma, disc)
    }
}

/// The connected pieces of `D∖R`, each certified as a disc.
pub fn unexplored_discs(x: &Exploration, disc: &DiscreteDisc) -> Result<Vec<DiscreteDisc>> {
    let rest = disc.graph().difference(&x.region);
    if !rest.is_closed() {
        return Err(Error::Invariant("the unexplored part has an edge leaving it".into()));
    }
    rest.components()
        .into_iter()
        .map(|piece| {
            DiscreteDisc::from_subgraph(piece)
                .map_err(|e| Error::Invariant(format!("an unexplored piece is not a disc: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GridGeometry, Point};

    fn grid(w: i32, h: i32) -> DiscreteDisc {
        DiscreteDisc::from_subgraph(Subgraph::block(GridGeometry::new(8).unwrap(), 0, 0, w, h)).unwrap()
    }

    fn rect(x0: i32, y0: i32, x1: i32, y1: i32) -> DiscreteLoop {
        let mut v = Vec::new();
        for i in x0..x1 {
            v.push(Point::primal(i, y0));
        }
        for j in y0..y1 {
            v.push(Point::primal(x1, j));
        }
        for i in (x0 + 1..=x1).rev() {
            v.push(Point::primal(i, y1));
        }
        for j in (y0 + 1..=y1).rev() {
            v.push(Point::primal(x0, j));
        }
        DiscreteLoop::new(v).unwrap()
    }

    fn config(d: &DiscreteDisc, edges: impl IntoIterator<Item = Edge>) -> Config {
        Config::from_open_edges(Arc::new(d.graph().clone()), edges).unwrap()
    }

    #[test]
    fn l_plus_examples() {
        let d = grid(4, 4);
        let sq = rect(1, 1, 2, 2);
        let lp = l_plus(&sq, d.graph());
        assert_eq!(lp.num_vertices(), 4);
        assert_eq!(lp.num_edges(), 12);
        let corner = rect(0, 0, 1, 1);
        let lp = l_plus(&corner, d.graph());
        assert_eq!(lp.num_edges(), 8);
        assert!(lp.edges().iter().all(|e| d.graph().contains_edge(*e)));
    }

    #[test]
    fn empty_config_explores_exactly_the_outside() {
        let d = grid(7, 7);
        let gamma = rect(2, 2, 5, 5);
        let x = explore_outside(&config(&d, []), &gamma, &d).unwrap();
        let gd = enclosed_disc(&gamma, d.graph()).unwrap();
        assert_eq!(gd.num_vertices(), 16);
        assert_eq!(gd.num_edges(), 24);
        assert_eq!(*x.region, d.graph().difference(&gd));
        assert_eq!(x.state.num_open(), 0);
        assert!(x.is_admissible(&d).unwrap());
        let pieces = unexplored_discs(&x, &d).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].graph(), &gd);
    }

    #[test]
    fn loop_inside_gamma_is_not_explored() {
        let d = grid(5, 5);
        let gamma = rect(1, 1, 4, 4);
        let k = config(&d, rect(2, 2, 3, 3).edges());
        let x = explore_outside(&k, &gamma, &d).unwrap();
        let gd = enclosed_disc(&gamma, d.graph()).unwrap();
        assert_eq!(*x.region, d.graph().difference(&gd));
        assert_eq!(x.state.num_open(), 0);
        assert!(x.loops.is_empty());
        assert!(x.is_admissible(&d).unwrap());
    }

    #[test]
    fn straddling_loop_adds_its_neighbourhood() {
        let d = grid(5, 5);
        let gamma = rect(1, 1, 4, 4);
        let l = rect(0, 2, 2, 3);
        let k = config(&d, l.edges());
        let x = explore_outside(&k, &gamma, &d).unwrap();
        let gd = enclosed_disc(&gamma, d.graph()).unwrap();
        let expected = d.graph().difference(&gd).union(&l_plus(&l, d.graph()));
        assert_eq!(*x.region, expected);
        let open: BTreeSet<Edge> = x.state.open_edges().collect();
        assert_eq!(open, l.edge_set());
        assert!(x.is_admissible(&d).unwrap());
        for piece in unexplored_discs(&x, &d).unwrap() {
            assert!(piece.graph().vertices().iter().all(|v| !l.vertex_set().contains(v)));
        }
    }

    #[test]
    fn straddling_loop_can_split_the_inside() {
        // A loop crossing γ horizontally cuts [γ] into a top and a bottom
        // piece.
        let d = grid(8, 8);
        let gamma = rect(1, 1, 7, 7);
        let l = rect(0, 4, 8, 5);
        let x = explore_outside(&config(&d, l.edges()), &gamma, &d).unwrap();
        let pieces = unexplored_discs(&x, &d).unwrap();
        assert_eq!(pieces.len(), 2);
        let a = pieces[0].graph().vertices().iter().copied().collect::<BTreeSet<_>>();
        assert!(pieces[1].graph().vertices().iter().all(|v| !a.contains(v)));
    }

    #[test]
    fn whole_disc_explored_leaves_nothing() {
        let d = grid(3, 3);
        let gamma = rect(1, 1, 2, 2);
        let x = explore_outside(&config(&d, []), &gamma, &d).unwrap();
        let full = Arc::new(d.graph().clone());
        let x = Exploration { state: x.state.extend_to(&full), region: full, ..x };
        assert!(unexplored_discs(&x, &d).unwrap().is_empty());
    }

    #[test]
    fn admissibility_rejects_perturbed_states() {
        let d = grid(5, 5);
        let gamma = rect(1, 1, 4, 4);
        let l = rect(0, 2, 2, 3);
        let x = explore_outside(&config(&d, l.edges()), &gamma, &d).unwrap();
        // One extra square opened inside R but away from l.
        let extra = rect(4, 0, 5, 1);
        let mut state = x.state.clone();
        for e in extra.edges() {
            state.set(e, true).unwrap();
        }
        assert!(!is_admissible(&x.region, &state, &gamma, &d).unwrap());
        // R missing one edge of l⁺.
        let dropped = l_plus(&l, d.graph()).edges().iter().copied().find(|e| !l.edge_set().contains(e) && !d.graph().difference(&enclosed_disc(&gamma, d.graph()).unwrap()).contains_edge(*e)).unwrap();
        let smaller = Arc::new(Subgraph::new(
            d.geometry(),
            x.region.vertices().to_vec(),
            x.region.edges().iter().copied().filter(|&e| e != dropped),
        ));
        let st = x.state.restrict_arc(&smaller).unwrap();
        assert!(!is_admissible(&smaller, &st, &gamma, &d).unwrap());
    }

    #[test]
    fn sourced_input_is_rejected() {
        let d = grid(3, 3);
        let k = config(&d, [Edge::new(Point::primal(0, 0), Point::primal(1, 0)).unwrap()]);
        assert!(matches!(explore_outside(&k, &rect(1, 1, 2, 2), &d), Err(Error::HasSources(_))));
    }
}
