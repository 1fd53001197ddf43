use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::gillespie::{gillespie_step, run_trajectory, stream_rng, Observer, StopCondition, Termination};
use super::samples::{Binning, SampleSet};
use crate::error::{Error, Result};
use crate::fock::OccupationState;
use crate::reduction::ClassicalGenerator;

/// `n` independent waiting times out of `state`, drawn through the engine.
pub fn sample_persistent_times(
    model: &ClassicalGenerator<f64>,
    state: &OccupationState,
    n: usize,
    seed: u64,
    binning: &Binning,
) -> Result<SampleSet> {
    let mut rng = stream_rng(seed, 0);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(gillespie_step(model, state, &mut rng)?.dt);
    }
    SampleSet::new(values, binning)
}

/// First-arrival samples; trajectories that hit the time cap (or can never
/// arrive) are counted as censored.
#[derive(Clone, Debug, Serialize)]
pub struct ArrivalSamples {
    pub samples: SampleSet,
    pub censored: usize,
    pub requested: usize,
    pub seed: u64,
}

impl ArrivalSamples {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.requested as f64
    }

    /// Histogram mass plus censored fraction; one up to rounding.
    pub fn accounted_mass(&self) -> f64 {
        let counted: u64 = self.samples.histogram.counts.iter().sum();
        (counted as f64 + self.censored as f64) / self.requested as f64
    }
}

#[derive(Clone, Debug)]
pub struct ArrivalOptions {
    pub time_cap: f64,
    pub event_cap: u64,
    pub binning: Binning,
    /// Stream id of the first trajectory; trajectory `k` uses `first_stream + k`.
    pub first_stream: u64,
}

impl Default for ArrivalOptions {
    fn default() -> Self {
        Self {
            time_cap: 1e7,
            event_cap: super::DEFAULT_EVENT_CAP,
            binning: Binning::FreedmanDiaconis,
            first_stream: 0,
        }
    }
}

/// Times of the first event that occupies any of `targets`, over `n`
/// trajectories from `initial`.
pub fn sample_first_arrival(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    targets: &[usize],
    n: usize,
    seed: u64,
    options: &ArrivalOptions,
) -> Result<ArrivalSamples> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no arrival target".into()));
    }
    let stop = StopCondition::Arrival {
        sites: targets.to_vec(),
        time_cap: options.time_cap,
    };
    let outcomes: Vec<Result<Option<f64>>> = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, options.first_stream + k);
            let out = run_trajectory(model, initial, &stop, options.event_cap, &mut rng, &mut ())?;
            Ok(match out.termination {
                Termination::Arrival => Some(out.end_time),
                _ => None,
            })
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    let mut censored = 0;
    for o in outcomes {
        match o? {
            Some(t) => values.push(t),
            None => censored += 1,
        }
    }
    Ok(ArrivalSamples {
        samples: SampleSet::with_total(values, &options.binning, Some(n))?,
        censored,
        requested: n,
        seed,
    })
}

/// Completed holding times grouped by state, with the state's exit rate.
#[derive(Clone, Debug, Default)]
pub struct WaitingTimes {
    pub exit_rate: f64,
    pub samples: Vec<f64>,
}

struct HoldCollector<'a> {
    model: &'a ClassicalGenerator<f64>,
    pending: Option<(Vec<u32>, f64)>,
    by_state: BTreeMap<Vec<u32>, WaitingTimes>,
}

impl Observer for HoldCollector<'_> {
    fn on_hold(&mut self, t0: f64, t1: f64, state: &[u32]) {
        self.pending = Some((state.to_vec(), t1 - t0));
    }

    fn on_event(&mut self, _t: f64, _channel: usize, _state: &[u32]) {
        if let Some((state, dt)) = self.pending.take() {
            let model = self.model;
            let entry = self.by_state.entry(state).or_insert_with_key(|s| WaitingTimes {
                exit_rate: (0..model.channels().len()).map(|id| model.rate(id, s)).sum(),
                samples: Vec::new(),
            });
            entry.samples.push(dt);
        }
    }
}

/// Runs one trajectory to `duration` and pools the waiting time of every
/// completed visit by state. The final, truncated hold is discarded.
pub fn collect_waiting_times(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    duration: f64,
    seed: u64,
    stream: u64,
) -> Result<BTreeMap<Vec<u32>, WaitingTimes>> {
    let mut rng = stream_rng(seed, stream);
    let mut obs = HoldCollector {
        model,
        pending: None,
        by_state: BTreeMap::new(),
    };
    run_trajectory(
        model,
        initial,
        &StopCondition::Time(duration),
        super::DEFAULT_EVENT_CAP,
        &mut rng,
        &mut obs,
    )?;
    Ok(obs.by_state)
}

/// Fraction of `[0, duration)` spent in each state of one trajectory.
pub fn occupancy_fractions(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    duration: f64,
    seed: u64,
    stream: u64,
) -> Result<BTreeMap<Vec<u32>, f64>> {
    struct Occupancy(BTreeMap<Vec<u32>, f64>);
    impl Observer for Occupancy {
        fn on_hold(&mut self, t0: f64, t1: f64, state: &[u32]) {
            *self.0.entry(state.to_vec()).or_insert(0.0) += t1 - t0;
        }
    }
    let mut rng = stream_rng(seed, stream);
    let mut obs = Occupancy(BTreeMap::new());
    run_trajectory(
        model,
        initial,
        &StopCondition::Time(duration),
        super::DEFAULT_EVENT_CAP,
        &mut rng,
        &mut obs,
    )?;
    Ok(obs.0.into_iter().map(|(k, v)| (k, v / duration)).collect())
}
