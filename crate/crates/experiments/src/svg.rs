//! Plain SVG renderings of discs, configurations and loops. Output carries
//! no timestamps or other run metadata, so it is reproducible byte for
//! byte.

use std::fmt::Write;

use crossloop_core::annuli::PolyAnnulus;
use crossloop_core::lattice::{DiscreteDisc, DiscreteLoop, Edge, GridGeometry};
use crossloop_core::loopdecomp::LevelledLoop;
use crossloop_core::percolation::Config;

/// Pixels per unit length.
const SCALE: f64 = 512.0;
const MARGIN: f64 = 16.0;

/// Colours cycled through by loop level.
const LEVEL_COLOURS: [&str; 4] = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98"];

/// An SVG document in physical coordinates, with `y` pointing up.
pub struct Svg {
    geometry: GridGeometry,
    bounds: [f64; 4],
    body: String,
}

impl Svg {
    /// A canvas covering the bounding box of `disc`.
    pub fn for_disc(disc: &DiscreteDisc) -> Self {
        let g = disc.geometry();
        let pts: Vec<[f64; 2]> = disc.graph().vertices().iter().map(|&p| g.to_physical(p)).collect();
        let fold = |f: fn(f64, f64) -> f64, i: usize, init: f64| pts.iter().map(|p| p[i]).fold(init, f);
        let bounds = [
            fold(f64::min, 0, f64::INFINITY),
            fold(f64::min, 1, f64::INFINITY),
            fold(f64::max, 0, f64::NEG_INFINITY),
            fold(f64::max, 1, f64::NEG_INFINITY),
        ];
        Svg { geometry: g, bounds, body: String::new() }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (MARGIN + (p[0] - self.bounds[0]) * SCALE, MARGIN + (self.bounds[3] - p[1]) * SCALE)
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str, width: f64) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{stroke}" stroke-width="{width}"/>"#
        )
        .unwrap();
    }

    fn edge(&mut self, e: Edge, stroke: &str, width: f64) {
        let (a, b) = (self.geometry.to_physical(e.a()), self.geometry.to_physical(e.b()));
        self.line(a, b, stroke, width);
    }

    /// Every edge of the disc, in light grey.
    pub fn grid(&mut self, disc: &DiscreteDisc) -> &mut Self {
        for &e in disc.graph().edges() {
            self.edge(e, "#dddddd", 0.5);
        }
        self
    }

    /// The open edges of `k`.
    pub fn config(&mut self, k: &Config, stroke: &str) -> &mut Self {
        for e in k.open_edges() {
            self.edge(e, stroke, 1.5);
        }
        self
    }

    /// One loop as a closed path.
    pub fn discrete_loop(&mut self, l: &DiscreteLoop, stroke: &str) -> &mut Self {
        let pts: Vec<String> = l
            .vertices()
            .iter()
            .map(|&p| {
                let (x, y) = self.map(self.geometry.to_physical(p));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(self.body, r#"<polygon points="{}" fill="none" stroke="{stroke}" stroke-width="2"/>"#, pts.join(" "))
            .unwrap();
        self
    }

    /// Decomposition loops, coloured by level.
    pub fn loops(&mut self, loops: &[LevelledLoop]) -> &mut Self {
        for l in loops {
            let colour = LEVEL_COLOURS[(l.level.max(1) as usize - 1) % LEVEL_COLOURS.len()];
            self.discrete_loop(&l.cycle, colour);
        }
        self
    }

    /// Both boundaries of an annulus, dashed.
    pub fn annulus(&mut self, a: &PolyAnnulus) -> &mut Self {
        for p in [a.inner(), a.outer()] {
            let pts: Vec<String> = p
                .corners_f64()
                .iter()
                .map(|&c| {
                    let (x, y) = self.map(c);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            writeln!(
                self.body,
                r##"<polygon points="{}" fill="none" stroke="#555555" stroke-dasharray="4 3" stroke-width="1"/>"##,
                pts.join(" ")
            )
            .unwrap();
        }
        self
    }

    /// An XML comment, e.g. run metadata. `--` is split so the comment
    /// stays well formed.
    pub fn comment(&mut self, text: &str) -> &mut Self {
        writeln!(self.body, "<!-- {} -->", text.replace("--", "- -")).unwrap();
        self
    }

    /// A text label in the top margin.
    pub fn label(&mut self, text: &str) -> &mut Self {
        let escaped = text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        writeln!(self.body, r#"<text x="{MARGIN}" y="{:.3}" font-size="11" font-family="monospace">{escaped}</text>"#, MARGIN - 4.0)
            .unwrap();
        self
    }

    /// The finished document.
    pub fn finish(&self) -> String {
        let w = 2.0 * MARGIN + (self.bounds[2] - self.bounds[0]) * SCALE;
        let h = 2.0 * MARGIN + (self.bounds[3] - self.bounds[1]) * SCALE;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}
