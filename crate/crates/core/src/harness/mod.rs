//! Seeded experiment runner: scenarios in, reports out.
//!
//! A scenario is one JSON document:
//!
//! ```json
//! {"space": {"kind": "euclidean", "dim": 2}, "experiment": "solve", "params": {"n": 5}, "seed": 1}
//! ```
//!
//! Every experiment draws its randomness from [`crate::rng::stream`] keyed by
//! the scenario seed, so a scenario always produces the same report.

mod calculus;
mod geometry;
pub mod instances;
mod transport;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Space, SpaceDescriptor};

/// Environment variable capping the worker threads of [`run_batch`].
pub const THREADS_ENV: &str = "CAT0OT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Monotonicity,
    Twist,
    Fermat,
    Eilenberg,
    TransportIdentity,
    Polar,
    GeometrySuite,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Solve,
        Experiment::Monotonicity,
        Experiment::Twist,
        Experiment::Fermat,
        Experiment::Eilenberg,
        Experiment::TransportIdentity,
        Experiment::Polar,
        Experiment::GeometrySuite,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Monotonicity => "monotonicity",
            Experiment::Twist => "twist",
            Experiment::Fermat => "fermat",
            Experiment::Eilenberg => "eilenberg",
            Experiment::TransportIdentity => "transport-identity",
            Experiment::Polar => "polar",
            Experiment::GeometrySuite => "geometry-suite",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.tag() == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub space: SpaceDescriptor,
    pub experiment: Experiment,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
    pub seed: u64,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

impl Scenario {
    /// Parses a scenario document; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::ConfigInvalid { path: if path == "." { String::new() } else { path }, reason: e.into_inner().to_string() }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub metrics: Vec<Metric>,
    pub pass: bool,
    /// Wall-clock time; kept out of the emitted document so reports are
    /// byte-identical across runs.
    #[serde(skip)]
    pub runtime_ms: u64,
}

impl Report {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `metric,value,sigma` rows; a missing sigma is an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value,sigma\n");
        for m in &self.metrics {
            let sigma = m.sigma.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", m.name, m.value, sigma));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Writes the report to `path`.
pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Metrics plus the acceptance verdict of one experiment run.
pub(crate) struct Outcome {
    metrics: Vec<Metric>,
    pass: bool,
}

impl Outcome {
    fn new() -> Self {
        Self { metrics: Vec::new(), pass: true }
    }

    fn push(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric { name: name.to_string(), value, sigma: None });
    }

    fn push_sigma(&mut self, name: &str, value: f64, sigma: f64) {
        self.metrics.push(Metric { name: name.to_string(), value, sigma: Some(sigma) });
    }

    fn require(&mut self, ok: bool) {
        self.pass &= ok;
    }
}

/// Deserializes `params` into an experiment's parameter struct.
pub(crate) fn params<T: DeserializeOwned>(value: &serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::ConfigInvalid {
        path: format!("params.{}", e.path()).trim_end_matches('.').to_string(),
        reason: e.into_inner().to_string(),
    })
}

pub(crate) fn invalid(path: &str, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid { path: path.to_string(), reason: reason.into() }
}

/// Runs one scenario.
pub fn run_scenario(config: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let space = config.space.build().map_err(|e| invalid("space", e.to_string()))?;
    let outcome = dispatch(&space, config)?;
    if outcome.metrics.is_empty() {
        return Err(invalid("experiment", "experiment produced no metrics"));
    }
    Ok(Report {
        scenario: config.clone(),
        metrics: outcome.metrics,
        pass: outcome.pass,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn dispatch(space: &Space, config: &Scenario) -> Result<Outcome> {
    let (p, seed) = (&config.params, config.seed);
    match config.experiment {
        Experiment::Solve => transport::solve(space, params(p)?, seed),
        Experiment::Monotonicity => transport::monotonicity(space, params(p)?, seed),
        Experiment::TransportIdentity => transport::identity(space, params(p)?),
        Experiment::Polar => transport::polar(space, params(p)?, seed),
        Experiment::Twist => calculus::twist(space, params(p)?, seed),
        Experiment::Fermat => calculus::fermat(space, params(p)?, seed),
        Experiment::Eilenberg => calculus::eilenberg(space, params(p)?, seed),
        Experiment::GeometrySuite => geometry::suite(space, params(p)?, seed),
    }
}

/// Runs scenarios concurrently, at most `CAT0OT_THREADS` at a time, and
/// returns their results in input order.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<Report>> {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    let run = || scenarios.par_iter().map(run_scenario).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => scenarios.iter().map(run_scenario).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_errors_carry_paths() {
        let bad_space = r#"{"space": {"kind": "euclidean", "dims": 2}, "experiment": "solve", "seed": 1}"#;
        match Scenario::from_json(bad_space) {
            Err(Error::ConfigInvalid { path, .. }) => assert!(path.starts_with("space"), "{path}"),
            other => panic!("{other:?}"),
        }
        let no_seed = r#"{"space": {"kind": "euclidean", "dim": 2}, "experiment": "solve"}"#;
        assert!(matches!(Scenario::from_json(no_seed), Err(Error::ConfigInvalid { .. })));
        let bad_tag = r#"{"space": {"kind": "euclidean", "dim": 2}, "experiment": "nope", "seed": 1}"#;
        match Scenario::from_json(bad_tag) {
            Err(Error::ConfigInvalid { path, .. }) => assert_eq!(path, "experiment"),
            other => panic!("{other:?}"),
        }
        let bad_param = r#"{"space": {"kind": "euclidean", "dim": 2}, "experiment": "solve", "params": {"n": "x"}, "seed": 1}"#;
        match run_scenario(&Scenario::from_json(bad_param).unwrap()) {
            Err(Error::ConfigInvalid { path, .. }) => assert_eq!(path, "params.n"),
            other => panic!("{other:?}"),
        }
        let bad_build = r#"{"space": {"kind": "euclidean", "dim": 0}, "experiment": "solve", "seed": 1}"#;
        match run_scenario(&Scenario::from_json(bad_build).unwrap()) {
            Err(Error::ConfigInvalid { path, .. }) => assert_eq!(path, "space"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tags_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_tag(e.tag()), Some(e));
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{}\"", e.tag()));
        }
    }
}
