//! The run-config schema. Every object rejects unknown keys; omitted keys
//! take the defaults below.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crossloop_core::annuli::PolyAnnulus;
use crossloop_core::lattice::DomainSpec;
use crossloop_core::models::{critical_constants, SweepSchedule};
use crossloop_experiments::{ConditionSettings, CrossingModel, MarkovCase};

use crate::CliError;

/// The commands understood by the driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    Decompose,
    Explore,
    Cross,
    CoupleTest,
    Stability,
    Conditions,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Decompose => "decompose",
            Command::Explore => "explore",
            Command::Cross => "cross",
            Command::CoupleTest => "couple-test",
            Command::Stability => "stability",
            Command::Conditions => "conditions",
        }
    }
}

/// The top-level config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    /// Worker threads; `0` or absent means one per available core.
    pub threads: Option<usize>,
    /// Output directory.
    pub out: Option<String>,
    /// Command-specific parameters, validated against the command's schema.
    #[serde(default)]
    pub params: Option<Value>,
}

/// Parses a command's parameters, filling in defaults.
pub fn parse_params<T: serde::de::DeserializeOwned>(params: &Option<Value>) -> Result<T, CliError> {
    let v = params.clone().unwrap_or_else(|| Value::Object(Default::default()));
    serde_json::from_value(v).map_err(|e| CliError::Schema(format!("params: {e}")))
}

/// An annulus between two squares or two rectangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnnulusSpec {
    /// Concentric squares of sup-norm radii `r0 < r1`.
    Square { center: [f64; 2], r0: f64, r1: f64 },
    /// Nested rectangles given as `[x0, y0, x1, y1]`.
    Rectangles { inner: [f64; 4], outer: [f64; 4] },
}

impl Default for AnnulusSpec {
    fn default() -> Self {
        AnnulusSpec::Square { center: [0.5, 0.5], r0: 0.125, r1: 0.25 }
    }
}

impl AnnulusSpec {
    pub fn build(&self) -> Result<PolyAnnulus, CliError> {
        use crossloop_core::polygon::DyadicPolygon;
        let a = match self {
            AnnulusSpec::Square { center, r0, r1 } => PolyAnnulus::square(center[0], center[1], *r0, *r1),
            AnnulusSpec::Rectangles { inner: i, outer: o } => DyadicPolygon::rectangle(i[0], i[1], i[2], i[3])
                .and_then(|inner| Ok((inner, DyadicPolygon::rectangle(o[0], o[1], o[2], o[3])?)))
                .and_then(|(inner, outer)| PolyAnnulus::new(inner, outer)),
        };
        a.map_err(|e| CliError::Schema(format!("annulus: {e}")))
    }
}

/// Models that `sample` can draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleModel {
    /// The `+` boundary Ising state and its interface.
    IsingPlus,
    /// The interface together with the current trace `η ∨ b^{t_c}`.
    CurrentTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    pub model: SampleModel,
    pub domain: DomainSpec,
    pub n: u32,
    /// Number of replicas to draw, numbered from 0.
    pub samples: u64,
    pub schedule: SweepSchedule,
    pub svg: bool,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams {
            model: SampleModel::IsingPlus,
            domain: DomainSpec::unit_square(),
            n: 16,
            samples: 1,
            schedule: SweepSchedule::default(),
            svg: true,
        }
    }
}

/// A configuration given by its open edges `[i0, j0, i1, j1]` in lattice
/// units (the point `(i, j)` sits at `(i/n, j/n)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeParams {
    pub domain: DomainSpec,
    pub n: u32,
    pub edges: Vec<[i32; 4]>,
    pub svg: bool,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        DecomposeParams { domain: DomainSpec::unit_square(), n: 4, edges: Vec::new(), svg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreParams {
    pub domain: DomainSpec,
    pub n: u32,
    pub edges: Vec<[i32; 4]>,
    /// The explored loop γ: the rectangle with lattice corners
    /// `[i0, j0, i1, j1]`.
    pub gamma: [i32; 4],
    pub svg: bool,
}

impl Default for ExploreParams {
    fn default() -> Self {
        ExploreParams { domain: DomainSpec::unit_square(), n: 4, edges: Vec::new(), gamma: [1, 1, 3, 3], svg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossParams {
    pub model: CrossingModel,
    pub annulus: AnnulusSpec,
    pub domain: DomainSpec,
    pub ns: Vec<u32>,
    pub replicas: u64,
    pub schedule: SweepSchedule,
}

impl Default for CrossParams {
    fn default() -> Self {
        CrossParams {
            model: CrossingModel::Interface,
            annulus: AnnulusSpec::default(),
            domain: DomainSpec::unit_square(),
            ns: vec![16, 32, 64],
            replicas: 10_000,
            schedule: SweepSchedule::default(),
        }
    }
}

/// Exact coupling test on face blocks `[w, h]`; `[1, 0]` is a single edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleTestParams {
    pub blocks: Vec<[i32; 2]>,
    pub n_max: u32,
}

impl Default for CoupleTestParams {
    fn default() -> Self {
        CoupleTestParams { blocks: vec![[1, 0], [1, 1]], n_max: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityParams {
    pub annulus: AnnulusSpec,
    pub domain: DomainSpec,
    /// Perturbation intensity, in `[0, t*]`.
    pub t: f64,
    pub ns: Vec<u32>,
    /// Thickenings for the stability gap.
    pub r: Vec<f64>,
    pub replicas: u64,
    pub schedule: SweepSchedule,
    /// Whether to also run the symmetric-difference ladder.
    pub symdiff: bool,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            annulus: AnnulusSpec::default(),
            domain: DomainSpec::unit_square(),
            t: critical_constants().t_c,
            ns: vec![16, 32, 64],
            r: vec![0.0, 0.03125, 0.0625],
            replicas: 10_000,
            schedule: SweepSchedule::default(),
            symdiff: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsParams {
    pub domain: DomainSpec,
    pub n: u32,
    pub replicas: u64,
    pub schedule: SweepSchedule,
    pub suite: SuiteParams,
}

impl Default for ConditionsParams {
    fn default() -> Self {
        ConditionsParams {
            domain: DomainSpec::unit_square(),
            n: 32,
            replicas: 2_000,
            schedule: SweepSchedule::default(),
            suite: SuiteParams::default(),
        }
    }
}

/// Settings of the conditions suite; see [`ConditionSettings`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub markov_cases: Vec<MarkovCase>,
    pub annulus: AnnulusSpec,
    pub eps_ladder: Vec<f64>,
    pub box_radius: f64,
    pub box_center: [f64; 2],
    pub discs: Vec<DomainSpec>,
    pub r_ladder: Vec<f64>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        let d = ConditionSettings::default();
        SuiteParams {
            markov_cases: d.markov_cases,
            annulus: AnnulusSpec::default(),
            eps_ladder: d.eps_ladder,
            box_radius: d.box_radius,
            box_center: d.box_center,
            discs: d.discs,
            r_ladder: d.r_ladder,
        }
    }
}

impl SuiteParams {
    pub fn build(&self) -> Result<ConditionSettings, CliError> {
        Ok(ConditionSettings {
            markov_cases: self.markov_cases.clone(),
            annulus: self.annulus.build()?,
            eps_ladder: self.eps_ladder.clone(),
            box_radius: self.box_radius,
            box_center: self.box_center,
            discs: self.discs.clone(),
            r_ladder: self.r_ladder.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"command": "cross", "bogus": 1}"#).is_err());
        let p = Some(serde_json::json!({"replicas": 10, "extra": true}));
        assert!(parse_params::<CrossParams>(&p).is_err());
        let p = Some(serde_json::json!({"annulus": {"kind": "square", "center": [0.5, 0.5], "r0": 0.1, "r1": 0.2, "x": 0}}));
        assert!(parse_params::<CrossParams>(&p).is_err());
        let p = Some(serde_json::json!({"schedule": {"burn_in": 1, "thinning": 1, "sweeps": 2}}));
        assert!(parse_params::<StabilityParams>(&p).is_err());
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let c: RunConfig = serde_json::from_str(r#"{"command": "couple-test"}"#).unwrap();
        assert_eq!(c.command, Some(Command::CoupleTest));
        let p: CoupleTestParams = parse_params(&c.params).unwrap();
        assert_eq!(p, CoupleTestParams::default());
        let p: CrossParams = parse_params(&Some(serde_json::json!({"model": {"kind": "coupled", "t": 0.05}}))).unwrap();
        assert_eq!(p.model, CrossingModel::Coupled { t: 0.05 });
        assert_eq!(p.ns, vec![16, 32, 64]);
    }

    #[test]
    fn suite_defaults_match_the_library() {
        let built = SuiteParams::default().build().unwrap();
        assert_eq!(built, ConditionSettings::default());
    }
}
