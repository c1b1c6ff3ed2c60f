//! Percolation configurations: one bit per edge of a support subgraph,
//! restriction, trivial extension, source sets, overlay and Bernoulli fields.

use std::sync::Arc;

use bitvec::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Edge, GridGeometry, Point, Subgraph};
use crate::rng::{stream, Purpose};

/// A percolation configuration on the edges of its support.
///
/// Bit `i` refers to the `i`-th edge of the support in canonical order.
/// Equality compares the support as well as the bits; configurations on
/// different supports are compared through [`Config::extend_to`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    support: Arc<Subgraph>,
    open: BitVec<u64, Lsb0>,
}

impl Config {
    /// The all-closed configuration.
    pub fn empty(support: Arc<Subgraph>) -> Self {
        let open = bitvec![u64, Lsb0; 0; support.num_edges()];
        Config { support, open }
    }

    /// The all-open configuration.
    pub fn full(support: Arc<Subgraph>) -> Self {
        let open = bitvec![u64, Lsb0; 1; support.num_edges()];
        Config { support, open }
    }

    /// The configuration opening exactly the given edges.
    pub fn from_open_edges(support: Arc<Subgraph>, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut c = Config::empty(support);
        for e in edges {
            c.set(e, true)?;
        }
        Ok(c)
    }

    /// Builds a configuration from one bit per support edge.
    pub fn from_bits(support: Arc<Subgraph>, bits: BitVec<u64, Lsb0>) -> Result<Self> {
        if bits.len() != support.num_edges() {
            return Err(Error::Invalid(format!(
                "{} bits given for {} edges",
                bits.len(),
                support.num_edges()
            )));
        }
        Ok(Config { support, open: bits })
    }

    /// Builds a configuration from the low bits of `mask` (edge `i` open
    /// when bit `i` is set); used by exhaustive enumeration.
    pub fn from_mask(support: Arc<Subgraph>, mask: u64) -> Self {
        let mut c = Config::empty(support);
        for i in 0..c.open.len().min(64) {
            c.open.set(i, mask >> i & 1 == 1);
        }
        c
    }

    pub fn support(&self) -> &Subgraph {
        &self.support
    }

    pub fn support_arc(&self) -> &Arc<Subgraph> {
        &self.support
    }

    pub fn geometry(&self) -> GridGeometry {
        self.support.geometry()
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.open
    }

    /// Whether `e` is open; edges outside the support are closed.
    pub fn is_open(&self, e: Edge) -> bool {
        self.support.edge_index(e).is_some_and(|i| self.open[i])
    }

    pub fn bit(&self, i: usize) -> bool {
        self.open[i]
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        self.open.set(i, value);
    }

    pub fn set(&mut self, e: Edge, value: bool) -> Result<()> {
        let i = self
            .support
            .edge_index(e)
            .ok_or_else(|| Error::NotSubgraph(format!("edge {e:?} is not in the support")))?;
        self.open.set(i, value);
        Ok(())
    }

    pub fn num_open(&self) -> usize {
        self.open.count_ones()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.open.iter_ones().map(move |i| self.support.edges()[i])
    }

    /// The subgraph formed by the open edges and their endpoints.
    pub fn open_subgraph(&self) -> Subgraph {
        let edges: Vec<Edge> = self.open_edges().collect();
        Subgraph::new(self.geometry(), edges.iter().flat_map(|e| [e.a(), e.b()]), edges.iter().copied())
    }

    /// The restriction `(κ_e)_{e ∈ E(r)}`.
    pub fn restrict(&self, r: &Subgraph) -> Result<Config> {
        let mut bits = BitVec::with_capacity(r.num_edges());
        for &e in r.edges() {
            let i = self
                .support
                .edge_index(e)
                .ok_or_else(|| Error::NotSubgraph(format!("edge {e:?} of the restriction target is not in the support")))?;
            bits.push(self.open[i]);
        }
        Ok(Config { support: Arc::new(r.clone()), open: bits })
    }

    /// The restriction to a subgraph shared by reference.
    pub fn restrict_arc(&self, r: &Arc<Subgraph>) -> Result<Config> {
        let mut c = self.restrict(r)?;
        c.support = Arc::clone(r);
        Ok(c)
    }

    /// The trivial extension to `window`: an edge of the window is open
    /// exactly when it is an open edge of this configuration.
    pub fn extend_to(&self, window: &Arc<Subgraph>) -> Config {
        let mut c = Config::empty(Arc::clone(window));
        for e in self.open_edges() {
            if let Some(i) = window.edge_index(e) {
                c.open.set(i, true);
            }
        }
        c
    }

    /// The source set relative to `r`: vertices with an odd number of open
    /// edges of `r` (open in the trivial extension) incident to them.
    pub fn source_set(&self, r: &Subgraph) -> Vec<Point> {
        let mut odd: std::collections::BTreeSet<Point> = std::collections::BTreeSet::new();
        for &e in r.edges() {
            if self.is_open(e) {
                for p in [e.a(), e.b()] {
                    if !odd.remove(&p) {
                        odd.insert(p);
                    }
                }
            }
        }
        odd.into_iter().collect()
    }

    /// Whether the source set relative to `r` is empty.
    pub fn is_sourceless_on(&self, r: &Subgraph) -> bool {
        self.source_set(r).is_empty()
    }

    /// Whether the source set relative to the support is empty.
    pub fn is_sourceless(&self) -> bool {
        self.source_set(&self.support).is_empty()
    }

    /// Edgewise maximum of two configurations on the same support.
    pub fn overlay(&self, other: &Config) -> Result<Config> {
        if !Arc::ptr_eq(&self.support, &other.support) && self.support != other.support {
            return Err(Error::SupportMismatch);
        }
        let mut open = self.open.clone();
        open |= other.open.as_bitslice();
        Ok(Config { support: Arc::clone(&self.support), open })
    }

    /// Whether every open edge of `self` is open in `other`.
    pub fn is_subset_of(&self, other: &Config) -> bool {
        self.open_edges().all(|e| other.is_open(e))
    }
}

/// Trivial extension of `k` to the window; see [`Config::extend_to`].
pub fn extend_trivially(k: &Config, window: &Arc<Subgraph>) -> Config {
    k.extend_to(window)
}

/// Restriction of `k` to `r`; see [`Config::restrict`].
pub fn restrict(k: &Config, r: &Subgraph) -> Result<Config> {
    k.restrict(r)
}

/// Source set of `k` relative to `r`; see [`Config::source_set`].
pub fn source_set(k: &Config, r: &Subgraph) -> Vec<Point> {
    k.source_set(r)
}

/// Edgewise maximum `a ∨ b`; see [`Config::overlay`].
pub fn overlay(a: &Config, b: &Config) -> Result<Config> {
    a.overlay(b)
}

/// Edge probabilities of a Bernoulli field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldValues {
    Constant(f64),
    PerEdge(Vec<f64>),
}

/// Independent Bernoulli variables on the edges of a support.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliField {
    support: Arc<Subgraph>,
    values: FieldValues,
}

impl BernoulliField {
    pub fn constant(support: Arc<Subgraph>, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid(format!("probability {t} outside [0,1]")));
        }
        Ok(BernoulliField { support, values: FieldValues::Constant(t) })
    }

    pub fn per_edge(support: Arc<Subgraph>, t: Vec<f64>) -> Result<Self> {
        if t.len() != support.num_edges() {
            return Err(Error::Invalid("one probability per support edge is required".into()));
        }
        if let Some(bad) = t.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("probability {bad} outside [0,1]")));
        }
        Ok(BernoulliField { support, values: FieldValues::PerEdge(t) })
    }

    pub fn support(&self) -> &Arc<Subgraph> {
        &self.support
    }

    pub fn probability(&self, i: usize) -> f64 {
        match &self.values {
            FieldValues::Constant(t) => *t,
            FieldValues::PerEdge(v) => v[i],
        }
    }
}

/// Samples the field for one replica. Edge `i` uses the `i`-th uniform draw
/// of the `(seed, Bernoulli, replica)` stream and is open when that draw is
/// below its probability, so `t = 0` is never and `t = 1` always open.
pub fn sample_bernoulli(field: &BernoulliField, seed: u64, replica: u64) -> Config {
    let mut rng = stream(seed, Purpose::Bernoulli, replica);
    let mut c = Config::empty(Arc::clone(&field.support));
    for i in 0..field.support.num_edges() {
        let u: f64 = rng.gen();
        if u < field.probability(i) {
            c.open.set(i, true);
        }
    }
    c
}

const MAGIC: &[u8; 4] = b"XLCF";
const FORMAT_VERSION: u8 = 1;

impl Config {
    /// Serializes the configuration: geometry header, support, then the bits
    /// as alternating run lengths starting with a (possibly empty) closed
    /// run. The layout is documented in `docs/formats.md`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&self.geometry().n().to_le_bytes());
        let put_point = |out: &mut Vec<u8>, p: Point| {
            out.extend_from_slice(&p.x.to_le_bytes());
            out.extend_from_slice(&p.y.to_le_bytes());
        };
        out.extend_from_slice(&(self.support.num_vertices() as u32).to_le_bytes());
        for &v in self.support.vertices() {
            put_point(&mut out, v);
        }
        out.extend_from_slice(&(self.support.num_edges() as u32).to_le_bytes());
        for &e in self.support.edges() {
            put_point(&mut out, e.a());
            put_point(&mut out, e.b());
        }
        let mut runs: Vec<u32> = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for b in self.open.iter().by_vals() {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        out.extend_from_slice(&(runs.len() as u32).to_le_bytes());
        for r in runs {
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    /// Inverse of [`Config::to_bytes`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Config> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let version = r.take(1)?[0];
        if version != FORMAT_VERSION {
            return Err(Error::Decode(format!("unsupported version {version}")));
        }
        let geometry = GridGeometry::new(r.u32()?).map_err(|e| Error::Decode(e.to_string()))?;
        let nv = r.u32()? as usize;
        let mut vertices = Vec::with_capacity(nv.min(1 << 20));
        for _ in 0..nv {
            vertices.push(r.point()?);
        }
        let ne = r.u32()? as usize;
        let mut edges = Vec::with_capacity(ne.min(1 << 20));
        for _ in 0..ne {
            let (a, b) = (r.point()?, r.point()?);
            edges.push(Edge::new(a, b).map_err(|e| Error::Decode(e.to_string()))?);
        }
        let support = Subgraph::new(geometry, vertices, edges);
        if support.num_vertices() != nv || support.num_edges() != ne {
            return Err(Error::Decode("duplicate vertices or edges in the support".into()));
        }
        let nr = r.u32()? as usize;
        let mut bits: BitVec<u64, Lsb0> = BitVec::with_capacity(ne);
        let mut value = false;
        for _ in 0..nr {
            let len = r.u32()? as usize;
            if bits.len() + len > ne {
                return Err(Error::Decode("run lengths exceed the edge count".into()));
            }
            bits.extend(std::iter::repeat(value).take(len));
            value = !value;
        }
        if bits.len() != ne || r.pos != bytes.len() {
            return Err(Error::Decode("run lengths do not match the edge count".into()));
        }
        Ok(Config { support: Arc::new(support), open: bits })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Decode("unexpected end of data".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn point(&mut self) -> Result<Point> {
        let x = i32::from_le_bytes(self.take(4)?.try_into().unwrap());
        let y = i32::from_le_bytes(self.take(4)?.try_into().unwrap());
        Ok(Point::new(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Dir;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(n: u32, w: i32, h: i32) -> Arc<Subgraph> {
        Arc::new(Subgraph::block(GridGeometry::new(n).unwrap(), 0, 0, w, h))
    }

    fn e(a: (i32, i32), b: (i32, i32)) -> Edge {
        Edge::new(Point::primal(a.0, a.1), Point::primal(b.0, b.1)).unwrap()
    }

    fn square() -> [Edge; 4] {
        [e((0, 0), (1, 0)), e((1, 0), (1, 1)), e((0, 1), (1, 1)), e((0, 0), (0, 1))]
    }

    fn random_config(support: &Arc<Subgraph>, rng: &mut ChaCha8Rng) -> Config {
        let mut c = Config::empty(Arc::clone(support));
        for i in 0..support.num_edges() {
            c.set_bit(i, rng.gen_bool(0.5));
        }
        c
    }

    #[test]
    fn restrict_examples() {
        let s = block(4, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_config(&s, &mut rng);
        assert_eq!(k.restrict(&s).unwrap(), k);
        let empty = Subgraph::empty(s.geometry());
        assert_eq!(k.restrict(&empty).unwrap().bits().len(), 0);
        let sq = Config::from_open_edges(Arc::clone(&s), square()).unwrap();
        let one = Subgraph::new(s.geometry(), [], [square()[0]]);
        let r = sq.restrict(&one).unwrap();
        assert_eq!(r.bits().len(), 1);
        assert!(r.bit(0));
        let outside = Subgraph::new(s.geometry(), [], [e((10, 10), (11, 10))]);
        assert!(k.restrict(&outside).is_err());
    }

    #[test]
    fn extension_examples() {
        let s = block(4, 2, 2);
        let window = block(4, 4, 4);
        let empty = Config::empty(Arc::clone(&s));
        assert_eq!(empty.extend_to(&window).num_open(), 0);
        let one = Config::from_open_edges(Arc::clone(&s), [square()[1]]).unwrap();
        let ext = extend_trivially(&one, &window);
        assert_eq!(ext.num_open(), 1);
        assert!(ext.is_open(square()[1]));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let k = random_config(&s, &mut rng);
            assert_eq!(k.extend_to(&window).restrict(&s).unwrap().bits(), k.bits());
        }
    }

    #[test]
    fn source_set_examples() {
        let s = block(4, 2, 2);
        let single = Config::from_open_edges(Arc::clone(&s), [square()[0]]).unwrap();
        assert_eq!(single.source_set(&s), vec![Point::primal(0, 0), Point::primal(1, 0)]);
        let sq = Config::from_open_edges(Arc::clone(&s), square()).unwrap();
        assert!(sq.source_set(&s).is_empty());
        let l = Config::from_open_edges(Arc::clone(&s), [e((0, 0), (1, 0)), e((1, 0), (1, 1))]).unwrap();
        assert_eq!(l.source_set(&s), vec![Point::primal(0, 0), Point::primal(1, 1)]);
        // Relative to a subgraph that only contains one of the square's
        // edges, that edge's endpoints are sources.
        let part = Subgraph::new(s.geometry(), [], [square()[2]]);
        assert_eq!(sq.source_set(&part), vec![Point::primal(0, 1), Point::primal(1, 1)]);
    }

    #[test]
    fn source_set_matches_brute_force_degrees() {
        let s = block(4, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = random_config(&s, &mut rng);
            let brute: Vec<Point> = s
                .vertices()
                .iter()
                .copied()
                .filter(|&v| Dir::ALL.iter().filter(|&&d| k.is_open(Edge::from_dir(v, d))).count() % 2 == 1)
                .collect();
            assert_eq!(k.source_set(&s), brute);
            for v in k.source_set(&s) {
                assert!(s.incident_edges(v).next().is_some());
            }
        }
    }

    #[test]
    fn overlay_examples() {
        let s = block(4, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let a = random_config(&s, &mut rng);
            let b = random_config(&s, &mut rng);
            assert_eq!(overlay(&a, &Config::empty(Arc::clone(&s))).unwrap(), a);
            assert_eq!(a.overlay(&a).unwrap(), a);
            let o = a.overlay(&b).unwrap();
            for &edge in s.edges() {
                assert_eq!(o.is_open(edge), a.is_open(edge) || b.is_open(edge));
            }
            assert!(a.is_subset_of(&o));
        }
        let other = Config::empty(block(4, 2, 2));
        assert_eq!(Config::empty(s).overlay(&other), Err(Error::SupportMismatch));
    }

    #[test]
    fn bernoulli_examples() {
        let s = block(4, 4, 4);
        let zero = BernoulliField::constant(Arc::clone(&s), 0.0).unwrap();
        let one = BernoulliField::constant(Arc::clone(&s), 1.0).unwrap();
        for seed in 0..20 {
            assert_eq!(sample_bernoulli(&zero, seed, 0).num_open(), 0);
            assert_eq!(sample_bernoulli(&one, seed, 0).num_open(), s.num_edges());
        }
        // 10^4 edges at t = 1/2: the open fraction is within 0.02 of 1/2,
        // which is four binomial standard deviations (0.005 each).
        let big = block(64, 70, 72);
        assert!(big.num_edges() >= 10_000);
        let half = BernoulliField::constant(Arc::clone(&big), 0.5).unwrap();
        let c = sample_bernoulli(&half, 2024, 0);
        let frac = c.num_open() as f64 / big.num_edges() as f64;
        assert!((frac - 0.5).abs() < 0.02, "fraction {frac}");
        assert_eq!(sample_bernoulli(&half, 2024, 0), c);
        assert_ne!(sample_bernoulli(&half, 2024, 1), c);
        assert!(BernoulliField::constant(s, 1.5).is_err());
    }

    #[test]
    fn byte_round_trip() {
        let s = block(4, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let k = random_config(&s, &mut rng);
            let bytes = k.to_bytes();
            assert_eq!(Config::from_bytes(&bytes).unwrap(), k);
        }
        let full = Config::full(Arc::clone(&s));
        assert_eq!(Config::from_bytes(&full.to_bytes()).unwrap(), full);
        let mut bytes = full.to_bytes();
        bytes.truncate(bytes.len() - 1);
        assert!(Config::from_bytes(&bytes).is_err());
        assert!(Config::from_bytes(b"nope").is_err());
    }
}
