//! The commands. Each one computes its artifacts in memory; nothing is
//! written until every artifact of the run is ready.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crossloop_core::exploration::{explore_outside, unexplored_discs};
use crossloop_core::lattice::{discretize_domain, DiscreteDisc, DiscreteLoop, DomainSpec, Edge, GridGeometry, Point, Subgraph};
use crossloop_core::loopdecomp::decompose;
use crossloop_core::models::{
    critical_constants, enumerate_law, interface_of, sample_ising_plus, IsingDomain, ModelKind,
};
use crossloop_core::percolation::{overlay, sample_bernoulli, BernoulliField, Config};
use crossloop_core::VERSION;
use crossloop_experiments::conditions::rectangle_loop;
use crossloop_experiments::crossing::{stability_gap_ladder, symdiff_crossing};
use crossloop_experiments::csv::{self, Row};
use crossloop_experiments::svg::Svg;
use crossloop_experiments::{condition_suite, estimate_crossing_prob, Estimate, Ladder, Rung, Setup};

use crate::config::*;
use crate::CliError;

/// A file to be written into the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, text: String) -> Self {
        Artifact { name: name.into(), bytes: text.into_bytes() }
    }
}

/// What every artifact echoes: the tool version and the resolved config.
/// Execution settings that cannot change results (threads, output
/// directory) are left out, so artifacts compare equal across them.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub params: Value,
}

impl Header {
    pub fn new(command: Command, seed: u64, params: &impl Serialize) -> Self {
        Header {
            tool: "crossloop",
            version: VERSION,
            command: command.name(),
            seed,
            params: serde_json::to_value(params).expect("parameter structs serialize"),
        }
    }

    fn json(&self) -> String {
        serde_json::to_string(self).expect("headers serialize")
    }

    fn csv_lines(&self) -> Vec<String> {
        vec![format!("{} {}", self.tool, self.version), format!("config {}", self.json())]
    }

    fn svg(&self, disc: &DiscreteDisc) -> Svg {
        let mut s = Svg::for_disc(disc);
        s.comment(&format!("{} {} config {}", self.tool, self.version, self.json()));
        s
    }

    /// A JSON document `{ "header": …, ...body }`.
    fn document(&self, body: Value) -> String {
        let mut doc = serde_json::Map::new();
        doc.insert("header".into(), serde_json::to_value(self).expect("headers serialize"));
        if let Value::Object(m) = body {
            doc.extend(m);
        }
        crate::json::pretty(&Value::Object(doc))
    }
}

/// `{n, bounds}` for a domain at mesh `1/n`.
fn geometry_json(domain: &DomainSpec, n: u32) -> Result<Value, CliError> {
    let poly = domain.polygon().map_err(CliError::from_core)?;
    let c = poly.corners_f64();
    let fold = |i: usize, f: fn(f64, f64) -> f64, init: f64| c.iter().map(|p| p[i]).fold(init, f);
    let bounds = [
        fold(0, f64::min, f64::INFINITY),
        fold(1, f64::min, f64::INFINITY),
        fold(0, f64::max, f64::NEG_INFINITY),
        fold(1, f64::max, f64::NEG_INFINITY),
    ];
    Ok(json!({ "n": n, "bounds": bounds }))
}

/// Lattice units of a primal point.
fn ij(p: Point) -> [i32; 2] {
    [p.x.div_euclid(2), p.y.div_euclid(2)]
}

fn edge_json(e: Edge) -> [i32; 4] {
    let (a, b) = (ij(e.a()), ij(e.b()));
    [a[0], a[1], b[0], b[1]]
}

fn loop_json(l: &DiscreteLoop) -> Vec<[i32; 2]> {
    l.vertices().iter().map(|&p| ij(p)).collect()
}

fn config_from_edges(disc: &DiscreteDisc, edges: &[[i32; 4]]) -> Result<Config, CliError> {
    let support = Arc::new(disc.graph().clone());
    let edges = edges
        .iter()
        .map(|e| Edge::new(Point::primal(e[0], e[1]), Point::primal(e[2], e[3])))
        .collect::<crossloop_core::Result<Vec<_>>>()
        .map_err(CliError::from_core)?;
    Config::from_open_edges(support, edges).map_err(CliError::from_core)
}

fn setup(domain: &DomainSpec, n: u32, replicas: u64, seed: u64, schedule: crossloop_core::models::SweepSchedule) -> Setup {
    Setup { domain: domain.clone(), n, replicas, seed, schedule }
}

pub fn sample(p: &SampleParams, seed: u64, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let disc = discretize_domain(&p.domain, p.n).map_err(CliError::from_core)?;
    let domain = Arc::new(IsingDomain::new(&disc).map_err(CliError::from_core)?);
    let field =
        BernoulliField::constant(Arc::clone(domain.support()), critical_constants().t_c).map_err(CliError::from_core)?;
    let mut out = Vec::new();
    let mut samples = Vec::new();
    for r in 0..p.samples {
        let s = sample_ising_plus(&domain, seed, r, p.schedule);
        let eta = interface_of(&s);
        let dec = decompose(&eta, &disc).map_err(CliError::from_core)?;
        let mut entry = json!({
            "replica": r,
            "magnetization": s.magnetization(),
            "eta": eta.open_edges().map(edge_json).collect::<Vec<_>>(),
            "loops": dec.loops.len(),
        });
        let mut svg = h.svg(&disc);
        svg.grid(&disc);
        if p.model == SampleModel::CurrentTrace {
            let trace = overlay(&eta, &sample_bernoulli(&field, seed, r)).map_err(CliError::from_core)?;
            entry["trace"] = json!(trace.open_edges().map(edge_json).collect::<Vec<_>>());
            svg.config(&trace, "#aaaaaa");
        }
        samples.push(entry);
        if p.svg {
            svg.loops(&dec.loops).label(&format!("replica {r}"));
            out.push(Artifact::new(format!("sample-{r}.svg"), svg.finish()));
        }
    }
    let doc = h.document(json!({ "geometry": geometry_json(&p.domain, p.n)?, "samples": samples }));
    out.insert(0, Artifact::new("sample.json", doc));
    Ok(out)
}

pub fn decompose_cmd(p: &DecomposeParams, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let disc = discretize_domain(&p.domain, p.n).map_err(CliError::from_core)?;
    let k = config_from_edges(&disc, &p.edges)?;
    let dec = decompose(&k, &disc).map_err(CliError::from_core)?;
    let loops: Vec<Value> = dec
        .loops
        .iter()
        .map(|l| {
            json!({
                "level": l.level,
                "orientation": l.orientation,
                "seed_outmost": l.seed_outmost,
                "vertices": loop_json(&l.cycle),
            })
        })
        .collect();
    let doc = h.document(json!({
        "geometry": geometry_json(&p.domain, p.n)?,
        "max_level": dec.max_level,
        "loops": loops,
    }));
    let mut out = vec![Artifact::new("decompose.json", doc)];
    if p.svg {
        let mut svg = h.svg(&disc);
        svg.grid(&disc).loops(&dec.loops);
        out.push(Artifact::new("decompose.svg", svg.finish()));
    }
    Ok(out)
}

pub fn explore(p: &ExploreParams, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let disc = discretize_domain(&p.domain, p.n).map_err(CliError::from_core)?;
    let k = config_from_edges(&disc, &p.edges)?;
    let [x0, y0, x1, y1] = p.gamma;
    let gamma = rectangle_loop(x0, y0, x1, y1).map_err(CliError::from_core)?;
    let x = explore_outside(&k, &gamma, &disc).map_err(CliError::from_core)?;
    let admissible = x.is_admissible(&disc).map_err(CliError::from_core)?;
    if !admissible {
        return Err(CliError::Invariant("the revealed state is not admissible".into()));
    }
    let pieces = unexplored_discs(&x, &disc).map_err(CliError::from_core)?;
    let doc = h.document(json!({
        "geometry": geometry_json(&p.domain, p.n)?,
        "gamma": loop_json(&gamma),
        "region": {
            "vertices": x.region.vertices().iter().map(|&v| ij(v)).collect::<Vec<_>>(),
            "edges": x.region.edges().iter().map(|&e| edge_json(e)).collect::<Vec<_>>(),
        },
        "state": x.state.open_edges().map(edge_json).collect::<Vec<_>>(),
        "admissible": admissible,
        "unexplored": pieces.iter().map(|d| loop_json(d.boundary_loop())).collect::<Vec<_>>(),
    }));
    let mut out = vec![Artifact::new("explore.json", doc)];
    if p.svg {
        let mut svg = h.svg(&disc);
        svg.grid(&disc).config(&k, "#aaaaaa").loops(&x.loops).discrete_loop(&gamma, "#000000");
        out.push(Artifact::new("explore.svg", svg.finish()));
    }
    Ok(out)
}

pub fn cross(p: &CrossParams, seed: u64, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let a = p.annulus.build()?;
    let mut rows = Vec::new();
    for &n in &p.ns {
        let e = estimate_crossing_prob(p.model, &a, &setup(&p.domain, n, p.replicas, seed, p.schedule))
            .map_err(CliError::from_core)?;
        let param = match p.model {
            crossloop_experiments::CrossingModel::Bernoulli { t } => format!("bernoulli;t={t}"),
            crossloop_experiments::CrossingModel::Interface => "interface".to_string(),
            crossloop_experiments::CrossingModel::Coupled { t } => format!("coupled;t={t}"),
        };
        rows.push(Row::new("crossing", n, &a, param, &e));
    }
    Ok(vec![Artifact::new("cross.csv", csv::render(&h.csv_lines(), &rows))])
}

/// The face block `w × h` with lower-left corner at the origin.
fn block_disc(w: i32, h: i32) -> Result<DiscreteDisc, CliError> {
    let g = GridGeometry::new(w.max(h).max(1) as u32).map_err(CliError::from_core)?;
    DiscreteDisc::from_subgraph(Subgraph::block(g, 0, 0, w, h)).map_err(CliError::from_core)
}

pub fn couple_test(p: &CoupleTestParams, seed: u64, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let t_c = critical_constants().t_c;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &[w, hh] in &p.blocks {
        let disc = block_disc(w, hh)?;
        let coupled = enumerate_law(ModelKind::IsingPlus, &disc)
            .and_then(|l| l.overlay_bernoulli(t_c))
            .map_err(CliError::from_core)?;
        let trace = enumerate_law(ModelKind::CurrentTrace { n_max: p.n_max }, &disc).map_err(CliError::from_core)?;
        let tv = coupled.tv(&trace).map_err(CliError::from_core)?;
        let bound = trace.truncation_bound.unwrap_or(0.0) * disc.graph().num_edges() as f64;
        let param = format!("block={w}x{hh};n_max={}", p.n_max);
        let exact = |v: f64| Estimate { value: v, stderr: 0.0, replicas: 0, seed };
        rows.push(Row::new("couple-tv", 0, "", &param, &exact(tv)));
        rows.push(Row::new("couple-bound", 0, "", &param, &exact(bound)));
        if tv >= bound.max(f64::EPSILON) {
            failures.push(format!("{param}: TV {tv} exceeds the truncation bound {bound}"));
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Invariant(failures.join("; ")));
    }
    Ok(vec![Artifact::new("couple-test.csv", csv::render(&h.csv_lines(), &rows))])
}

pub fn stability(p: &StabilityParams, seed: u64, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let a = p.annulus.build()?;
    let mut rows = Vec::new();
    let mut gap_rungs: Vec<Vec<Rung>> = vec![Vec::new(); p.r.len()];
    let mut sym_rungs = Vec::new();
    for &n in &p.ns {
        let s = setup(&p.domain, n, p.replicas, seed, p.schedule);
        let gaps = stability_gap_ladder(&a, &p.r, p.t, &s).map_err(CliError::from_core)?;
        for (i, (r, e)) in p.r.iter().zip(gaps).enumerate() {
            rows.push(Row::new("stability-gap", n, &a, format!("t={};r={r}", p.t), &e));
            gap_rungs[i].push(Rung { param: n as f64, estimate: e });
        }
        if p.symdiff {
            let e = symdiff_crossing(&a, p.t, &s).map_err(CliError::from_core)?;
            rows.push(Row::new("symdiff", n, &a, format!("t={}", p.t), &e));
            sym_rungs.push(Rung { param: n as f64, estimate: e });
        }
    }
    let ladder_json = |name: String, rungs: Vec<Rung>| {
        let l = Ladder::new(rungs);
        json!({
            "name": name,
            "non_monotone": l.non_monotone,
            "rungs": l.rungs.iter().map(|r| json!({
                "n": r.param,
                "value": r.estimate.value,
                "stderr": r.estimate.stderr,
                "joint_stderr_to_first": r.estimate.joint_stderr(&l.rungs[0].estimate),
            })).collect::<Vec<_>>(),
        })
    };
    let mut ladders: Vec<Value> =
        p.r.iter().zip(gap_rungs).map(|(r, g)| ladder_json(format!("stability-gap;r={r}"), g)).collect();
    if p.symdiff {
        ladders.push(ladder_json("symdiff".into(), sym_rungs));
    }
    Ok(vec![
        Artifact::new("stability.csv", csv::render(&h.csv_lines(), &rows)),
        Artifact::new("stability-ladders.json", h.document(json!({ "ladders": ladders }))),
    ])
}

pub fn conditions(p: &ConditionsParams, seed: u64, h: &Header) -> Result<Vec<Artifact>, CliError> {
    let s = setup(&p.domain, p.n, p.replicas, seed, p.schedule);
    let suite = p.suite.build()?;
    let report = condition_suite(&suite, &s).map_err(CliError::from_core)?;
    let mut rows = Vec::new();
    for m in &report.markov {
        let c = m.case;
        let param = format!("block={}x{};gamma={:?};outcomes={}", c.w, c.h, c.gamma, m.outcomes);
        rows.push(Row::new("h0-max-tv", 0, "", param, &Estimate { value: m.max_tv, stderr: 0.0, replicas: 0, seed }));
    }
    let annulus = &suite.annulus;
    for d in &report.crossing_defect {
        rows.push(Row::new("h1-crossing-defect", p.n, annulus, format!("eps={}", d.eps), &d.estimate));
    }
    for b in &report.boundary_connection {
        let k = serde_json::to_string(&b.disc).expect("domains serialize");
        rows.push(Row::new("h2-boundary-connection", p.n, "", format!("disc={k};r={}", b.r), &b.estimate));
    }
    Ok(vec![Artifact::new("conditions.csv", csv::render(&h.csv_lines(), &rows))])
}
