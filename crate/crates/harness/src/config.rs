use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use ultradeco_core::system::SpecDocument;
use ultradeco_core::ParticleStatistics;

use crate::error::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ReduceCheck,
    ChainStationary,
    ArrivalTimes,
    PersistentTimes,
    GrowthPhase,
    PhotonDemo,
    EquilibriumUniformity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::ReduceCheck,
        ExperimentKind::ChainStationary,
        ExperimentKind::ArrivalTimes,
        ExperimentKind::PersistentTimes,
        ExperimentKind::GrowthPhase,
        ExperimentKind::PhotonDemo,
        ExperimentKind::EquilibriumUniformity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ReduceCheck => "reduce-check",
            ExperimentKind::ChainStationary => "chain-stationary",
            ExperimentKind::ArrivalTimes => "arrival-times",
            ExperimentKind::PersistentTimes => "persistent-times",
            ExperimentKind::GrowthPhase => "growth-phase",
            ExperimentKind::PhotonDemo => "photon-demo",
            ExperimentKind::EquilibriumUniformity => "equilibrium-uniformity",
        }
    }

    /// Experiments that draw random numbers and therefore need a seed.
    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            ExperimentKind::ChainStationary
                | ExperimentKind::ArrivalTimes
                | ExperimentKind::PersistentTimes
                | ExperimentKind::EquilibriumUniformity
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                format!("unknown experiment `{s}`; expected one of {}", names.join(", "))
            })
    }
}

/// Chain parameters as written in a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc {
    /// Index of the last site; the chain has `last_site + 1` sites.
    #[serde(default = "default_last_site")]
    pub last_site: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub theta: f64,
    pub statistics: ParticleStatistics,
}

fn default_last_site() -> usize {
    9
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceCheckParams {
    pub system: SpecDocument,
    /// Initial occupation vector; defaults to one particle in mode 0 (or
    /// the whole fixed total in mode 0 for bosons).
    #[serde(default)]
    pub initial_state: Option<Vec<u32>>,
    #[serde(default = "fifty")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Largest allowed absolute population difference.
    #[serde(default = "default_max_deviation")]
    pub max_deviation: f64,
}

fn fifty() -> f64 {
    50.0
}

fn default_points() -> usize {
    501
}

fn default_max_deviation() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainStationaryParams {
    pub chain: ChainDoc,
    #[serde(default = "default_trajectories")]
    pub n_trajectories: usize,
    /// Defaults to ten times the slowest channel time scale.
    #[serde(default)]
    pub burn_in: Option<f64>,
    #[serde(default = "default_observe")]
    pub observe: f64,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
}

fn default_trajectories() -> usize {
    20
}

fn default_observe() -> f64 {
    5000.0
}

fn default_event_cap() -> u64 {
    ultradeco_core::stochastic::DEFAULT_EVENT_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BinsDoc {
    FreedmanDiaconis,
    Count(usize),
    Edges(Vec<f64>),
}

impl Default for BinsDoc {
    fn default() -> Self {
        BinsDoc::FreedmanDiaconis
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalParams {
    /// Chain geometry; its `eta` and `statistics` are overridden by the sweep.
    #[serde(default = "default_arrival_chain")]
    pub chain: ChainDoc,
    #[serde(default = "default_gains")]
    pub gains: Vec<f64>,
    #[serde(default = "default_statistics")]
    pub statistics: Vec<ParticleStatistics>,
    #[serde(default = "default_arrival_samples")]
    pub n_samples: usize,
    #[serde(default = "default_time_cap")]
    pub time_cap: f64,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
    #[serde(default)]
    pub bins: BinsDoc,
}

fn default_arrival_chain() -> ChainDoc {
    ChainDoc {
        last_site: 9,
        gamma: 1.0,
        eta: 0.0,
        theta: 0.0,
        statistics: ParticleStatistics::Boson,
    }
}

fn default_gains() -> Vec<f64> {
    vec![0.01, 0.1, 0.5, 1.0, 2.0]
}

fn default_statistics() -> Vec<ParticleStatistics> {
    vec![ParticleStatistics::Boson, ParticleStatistics::Fermion]
}

fn default_arrival_samples() -> usize {
    1000
}

fn default_time_cap() -> f64 {
    1e7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistentParams {
    pub chain: ChainDoc,
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Number of most visited states to test.
    #[serde(default = "default_max_states")]
    pub max_states: usize,
    /// States with fewer completed holds are skipped.
    #[serde(default = "default_min_holds")]
    pub min_holds: usize,
}

fn default_duration() -> f64 {
    20_000.0
}

fn default_max_states() -> usize {
    6
}

fn default_min_holds() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    #[serde(default = "default_growth_sites")]
    pub n_sites: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_growth_theta")]
    pub theta: f64,
    #[serde(default = "default_growth_etas")]
    pub etas: Vec<f64>,
    #[serde(default = "default_growth_statistics")]
    pub statistics: ParticleStatistics,
    /// Initial mean occupations; defaults to a perturbed uniform profile.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    #[serde(default = "default_growth_t")]
    pub t_max: f64,
    #[serde(default = "default_growth_points")]
    pub points: usize,
}

fn default_growth_sites() -> usize {
    3
}

fn default_growth_theta() -> f64 {
    0.5
}

fn default_growth_etas() -> Vec<f64> {
    vec![2.0, 3.5, 5.0]
}

fn default_growth_statistics() -> ParticleStatistics {
    ParticleStatistics::Boson
}

fn default_growth_t() -> f64 {
    5.0
}

fn default_growth_points() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonParams {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "default_photon_eta")]
    pub eta: f64,
    #[serde(default = "default_photon_theta")]
    pub theta: f64,
    #[serde(default = "default_max_photons")]
    pub max_photons: usize,
    #[serde(default)]
    pub initial_photons: u32,
    #[serde(default = "default_photon_t")]
    pub t_max: f64,
    #[serde(default = "default_photon_points")]
    pub points: usize,
}

fn default_photon_eta() -> f64 {
    0.3
}

fn default_photon_theta() -> f64 {
    0.7
}

fn default_max_photons() -> usize {
    40
}

fn default_photon_t() -> f64 {
    20.0
}

fn default_photon_points() -> usize {
    201
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumParams {
    pub system: SpecDocument,
    #[serde(default)]
    pub initial_state: Option<Vec<u32>>,
    #[serde(default = "default_trajectories")]
    pub n_trajectories: usize,
    #[serde(default = "default_observe")]
    pub duration: f64,
    /// Allowed deviation of the time averages, in standard errors.
    #[serde(default = "three")]
    pub sigma: f64,
}

fn three() -> f64 {
    3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    ReduceCheck(ReduceCheckParams),
    ChainStationary(ChainStationaryParams),
    ArrivalTimes(ArrivalParams),
    PersistentTimes(PersistentParams),
    GrowthPhase(GrowthParams),
    PhotonDemo(PhotonParams),
    EquilibriumUniformity(EquilibriumParams),
}

/// Raw file layout; `params` is parsed once the experiment is known.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    experiment: Option<ExperimentKind>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    threads: Option<usize>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    params: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: Option<u64>,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub params: Params,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub n_samples: Option<usize>,
}

fn parse_params(kind: ExperimentKind, value: Value) -> Result<Params, HarnessError> {
    let wrap = |e: serde_json::Error| HarnessError::Config(format!("params: {e}"));
    Ok(match kind {
        ExperimentKind::ReduceCheck => Params::ReduceCheck(serde_json::from_value(value).map_err(wrap)?),
        ExperimentKind::ChainStationary => Params::ChainStationary(serde_json::from_value(value).map_err(wrap)?),
        ExperimentKind::ArrivalTimes => Params::ArrivalTimes(serde_json::from_value(value).map_err(wrap)?),
        ExperimentKind::PersistentTimes => Params::PersistentTimes(serde_json::from_value(value).map_err(wrap)?),
        ExperimentKind::GrowthPhase => Params::GrowthPhase(serde_json::from_value(value).map_err(wrap)?),
        ExperimentKind::PhotonDemo => Params::PhotonDemo(serde_json::from_value(value).map_err(wrap)?),
        ExperimentKind::EquilibriumUniformity => {
            Params::EquilibriumUniformity(serde_json::from_value(value).map_err(wrap)?)
        }
    })
}

/// Parses config text, applies overrides and validates the result.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        HarnessError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let experiment = match (raw.experiment, overrides.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(HarnessError::Config(format!(
                "config is for `{a}` but `{b}` was requested"
            )))
        }
        (a, b) => b.or(a).ok_or_else(|| HarnessError::Config("no experiment given".into()))?,
    };
    let mut params = parse_params(experiment, raw.params.unwrap_or_else(|| Value::Object(Default::default())))?;
    if let Some(n) = overrides.n_samples {
        match &mut params {
            Params::ChainStationary(p) => p.n_trajectories = n,
            Params::ArrivalTimes(p) => p.n_samples = n,
            Params::EquilibriumUniformity(p) => p.n_trajectories = n,
            _ => {
                return Err(HarnessError::Config(format!(
                    "--n-samples does not apply to `{experiment}`"
                )))
            }
        }
    }
    let config = ExperimentConfig {
        experiment,
        seed: overrides.seed.or(raw.seed),
        threads: raw.threads,
        output_dir: overrides
            .output_dir
            .clone()
            .or(raw.output_dir)
            .unwrap_or_else(|| PathBuf::from("out").join(experiment.name())),
        params,
    };
    config.validate()?;
    Ok(config)
}

/// Reads and validates the config at `path`.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

fn positive(name: &str, v: f64, problems: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        problems.push(format!("{name} must be positive and finite, got {v}"));
    }
}

fn nonzero(name: &str, v: usize, problems: &mut Vec<String>) {
    if v == 0 {
        problems.push(format!("{name} must be at least 1"));
    }
}

impl ExperimentConfig {
    /// Schema checks beyond the types; every problem is listed.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut problems = Vec::new();
        if self.experiment.is_randomized() && self.seed.is_none() {
            problems.push(format!("`{}` is randomized and needs an explicit seed", self.experiment));
        }
        if self.threads == Some(0) {
            problems.push("threads must be at least 1".into());
        }
        match &self.params {
            Params::ReduceCheck(p) => {
                positive("t_max", p.t_max, &mut problems);
                nonzero("points", p.points, &mut problems);
                positive("max_deviation", p.max_deviation, &mut problems);
            }
            Params::ChainStationary(p) => {
                nonzero("n_trajectories", p.n_trajectories, &mut problems);
                positive("observe", p.observe, &mut problems);
                if let Some(b) = p.burn_in {
                    if !(b >= 0.0 && b.is_finite()) {
                        problems.push(format!("burn_in must be non-negative, got {b}"));
                    }
                }
            }
            Params::ArrivalTimes(p) => {
                nonzero("n_samples", p.n_samples, &mut problems);
                positive("time_cap", p.time_cap, &mut problems);
                if p.gains.is_empty() {
                    problems.push("gains must not be empty".into());
                }
                for &g in &p.gains {
                    positive("gain", g, &mut problems);
                }
                if p.statistics.iter().any(|s| *s == ParticleStatistics::Single) {
                    problems.push("arrival sweeps need bosons or fermions".into());
                }
            }
            Params::PersistentTimes(p) => {
                positive("duration", p.duration, &mut problems);
                nonzero("max_states", p.max_states, &mut problems);
            }
            Params::GrowthPhase(p) => {
                nonzero("n_sites", p.n_sites, &mut problems);
                positive("t_max", p.t_max, &mut problems);
                nonzero("points", p.points, &mut problems);
                if let Some(m) = &p.initial {
                    if m.len() != p.n_sites {
                        problems.push(format!("initial has {} entries for {} sites", m.len(), p.n_sites));
                    }
                }
            }
            Params::PhotonDemo(p) => {
                positive("t_max", p.t_max, &mut problems);
                nonzero("points", p.points, &mut problems);
                if p.initial_photons as usize > p.max_photons {
                    problems.push("initial_photons exceeds max_photons".into());
                }
            }
            Params::EquilibriumUniformity(p) => {
                positive("duration", p.duration, &mut problems);
                positive("sigma", p.sigma, &mut problems);
                if p.n_trajectories < 2 {
                    problems.push("n_trajectories must be at least 2".into());
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(problems.join("; ")))
        }
    }

    /// Canonical JSON of the resolved config, defaults included.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
