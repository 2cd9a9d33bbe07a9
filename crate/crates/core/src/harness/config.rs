use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::InitialState;
use crate::error::{Error, Result};
use crate::mitigation::ZneMethod;
use crate::models::{parse_label, Convention, GaugeModel, Geometry, Group};
use crate::sim::NoiseModel;

/// Evenly spaced times, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    #[serde(default = "default_points")]
    pub n: usize,
}

fn default_points() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Times {
    List(Vec<f64>),
    Range(Linspace),
}

impl Times {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Times::List(v) => v.clone(),
            Times::Range(Linspace { start, stop, n }) => match n {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64)
                    .collect(),
            },
        }
    }
}

fn default_shots() -> u64 {
    8192
}

fn default_repetitions() -> usize {
    5
}

/// Eight scale factors, `1, 2, ..., 8`.
pub fn default_scale_factors() -> Vec<f64> {
    (1..=8).map(f64::from).collect()
}

fn default_topology() -> String {
    "none".into()
}

/// One experiment: a model, a time grid, the noise and mitigation settings and
/// the observables to report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Group,
    pub geometry: Geometry,
    pub g: f64,
    #[serde(default)]
    pub convention: Convention,
    pub times: Times,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_scale_factors")]
    pub scale_factors: Vec<f64>,
    #[serde(default)]
    pub zne_method: ZneMethod,
    #[serde(default)]
    pub noise: NoiseModel,
    /// A built-in topology name, a JSON topology file, or `"none"`.
    #[serde(default = "default_topology")]
    pub topology: String,
    pub initial_state: InitialState,
    pub observables: Vec<String>,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Reads and validates a JSON config. Unreadable files are config errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn gauge_model(&self) -> GaugeModel {
        let m = match self.model {
            Group::Z2 => GaugeModel::z2(self.g),
            Group::U1 => GaugeModel::u1(self.g),
        };
        m.with_convention(self.convention)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let times = self.times.values();
        if times.is_empty() {
            return bad("at least one time is required".into());
        }
        if times.iter().any(|t| !t.is_finite()) {
            return bad("times must be finite".into());
        }
        if !self.g.is_finite() {
            return bad("g must be finite".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if let Some(&s) = self.scale_factors.iter().find(|s| !(s.is_finite() && **s >= 1.0)) {
            return bad(format!("scale factor {s} must be finite and >= 1"));
        }
        if !self.scale_factors.contains(&1.0) {
            return bad("scale factors must include 1".into());
        }
        let mut distinct = self.scale_factors.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() != self.scale_factors.len() {
            return bad("scale factors must be distinct".into());
        }
        let needed = match self.zne_method {
            ZneMethod::Quadratic => 3,
            ZneMethod::Richardson => 2,
        };
        if distinct.len() < needed {
            return bad(format!(
                "{:?} extrapolation needs at least {needed} scale factors",
                self.zne_method
            ));
        }
        self.noise.validate()?;
        parse_label(&self.initial_state.label, self.geometry.n_links())?;
        if self.observables.is_empty() {
            return bad("at least one observable is required".into());
        }
        for o in &self.observables {
            super::Observable::parse(o, self.model, self.geometry)?;
        }
        Ok(())
    }
}
