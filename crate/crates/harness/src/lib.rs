//! Experiment runner behind the `ultradeco` binary.
//!
//! A run parses a JSON config, computes every artifact in memory and then
//! writes them to the output directory together with a `manifest.json`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;

use config::{ExperimentConfig, Params};
use error::HarnessError;
use experiments::Outcome;
use manifest::{finalize, now_millis, sha256_hex, Artifact, RunManifest};

pub use config::{load_config, parse_config, ExperimentKind, Overrides};

/// Runs the experiment without touching the filesystem.
pub fn compute(config: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    config.validate()?;
    let seed = config.seed.unwrap_or(0);
    let run = || match &config.params {
        Params::ReduceCheck(p) => experiments::reduce_check(p),
        Params::ChainStationary(p) => experiments::chain_stationary(p, seed),
        Params::ArrivalTimes(p) => experiments::arrival_times(p, seed),
        Params::PersistentTimes(p) => experiments::persistent_times(p, seed),
        Params::GrowthPhase(p) => experiments::growth_phase(p),
        Params::PhotonDemo(p) => experiments::photon_demo(p),
        Params::EquilibriumUniformity(p) => experiments::equilibrium_uniformity(p, seed),
    };
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("threads: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Runs the experiment and writes its outputs and manifest.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RunManifest, String), HarnessError> {
    let started_ms = now_millis();
    let outcome = compute(config)?;
    let resolved = config.to_json() + "\n";
    let mut artifacts = vec![Artifact::new("config.json", resolved.clone().into_bytes())];
    artifacts.extend(outcome.artifacts);
    let manifest = RunManifest {
        experiment: config.experiment.name().to_string(),
        config_sha256: sha256_hex(resolved.as_bytes()),
        seed: config.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_ms,
        finished_ms: started_ms,
        verdict: outcome.verdict,
        outputs: Vec::new(),
    };
    let manifest = finalize(&config.output_dir, &artifacts, manifest)?;
    Ok((manifest, outcome.summary))
}
