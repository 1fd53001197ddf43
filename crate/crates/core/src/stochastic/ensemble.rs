use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::gillespie::{run_trajectory, stream_rng, Observer, StopCondition, Termination};
use crate::error::{Error, Result};
use crate::fock::OccupationState;
use crate::reduction::{ChannelKind, ClassicalGenerator};

/// `10 / (smallest positive channel coefficient)`.
pub fn default_burn_in(model: &ClassicalGenerator<f64>) -> f64 {
    let min = model
        .channels()
        .iter()
        .map(|c| c.coefficient)
        .filter(|&c| c > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min.is_finite() {
        10.0 / min
    } else {
        0.0
    }
}

/// Post-burn-in time integrals of one trajectory, split into two halves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub observed_time: f64,
    /// `integral m_k dt` over each half of the observation window.
    pub occupation_time: [Vec<f64>; 2],
    /// Loss events in each half.
    pub absorbed: [u64; 2],
    pub overflow: bool,
}

impl TrajectoryStats {
    pub fn means(&self) -> Vec<f64> {
        (0..self.occupation_time[0].len())
            .map(|k| (self.occupation_time[0][k] + self.occupation_time[1][k]) / self.observed_time)
            .collect()
    }

    pub fn current(&self) -> f64 {
        (self.absorbed[0] + self.absorbed[1]) as f64 / self.observed_time
    }
}

struct Integrator<'a> {
    model: &'a ClassicalGenerator<f64>,
    start: f64,
    mid: f64,
    /// Occupation of each site and the time it last changed.
    current: Vec<u32>,
    since: Vec<f64>,
    stats: TrajectoryStats,
}

impl Integrator<'_> {
    fn accumulate(&mut self, k: usize, t: f64) {
        let (t0, m) = (self.since[k], f64::from(self.current[k]));
        if m > 0.0 {
            let segments = [(t0.max(self.start), t.min(self.mid)), (t0.max(self.mid), t)];
            for (half, (a, b)) in segments.into_iter().enumerate() {
                if b > a {
                    self.stats.occupation_time[half][k] += m * (b - a);
                }
            }
        }
        self.since[k] = t;
    }

    fn finish(&mut self, t: f64) {
        for k in 0..self.current.len() {
            self.accumulate(k, t);
        }
    }
}

impl Observer for Integrator<'_> {
    fn on_event(&mut self, t: f64, channel: usize, state: &[u32]) {
        let (a, b) = self.model.affected_modes(channel);
        for k in std::iter::once(a).chain(b) {
            self.accumulate(k, t);
            self.current[k] = state[k];
        }
        if t >= self.start && matches!(self.model.channels()[channel].kind, ChannelKind::Loss(_)) {
            self.stats.absorbed[usize::from(t >= self.mid)] += 1;
        }
    }
}

/// Simulates one trajectory to `burn_in + observe` and integrates the
/// occupations after the burn-in.
pub fn stationary_trajectory(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    burn_in: f64,
    observe: f64,
    seed: u64,
    stream: u64,
    event_cap: u64,
) -> Result<TrajectoryStats> {
    if !(burn_in >= 0.0) || !(observe > 0.0) {
        return Err(Error::BurnIn {
            burn_in,
            length: burn_in + observe,
        });
    }
    let n = model.n_modes();
    let mut obs = Integrator {
        model,
        start: burn_in,
        mid: burn_in + observe / 2.0,
        current: initial.as_slice().to_vec(),
        since: vec![0.0; n],
        stats: TrajectoryStats {
            observed_time: observe,
            occupation_time: [vec![0.0; n], vec![0.0; n]],
            absorbed: [0, 0],
            overflow: false,
        },
    };
    let mut rng = stream_rng(seed, stream);
    let out = run_trajectory(
        model,
        initial,
        &StopCondition::Time(burn_in + observe),
        event_cap,
        &mut rng,
        &mut obs,
    )?;
    obs.finish(out.end_time);
    obs.stats.overflow = out.termination == Termination::EventCap;
    Ok(obs.stats)
}

/// Per-trajectory statistics keyed by stream id. Merging is a disjoint union,
/// so the summary does not depend on the order trajectories were added.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EnsembleAccumulator {
    trajectories: BTreeMap<u64, TrajectoryStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStatistics {
    pub n_trajectories: usize,
    pub observed_time: f64,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub current: f64,
    pub current_stderr: f64,
    pub half_means: [Vec<f64>; 2],
    /// Sites whose half-window means differ by more than three combined errors.
    pub drifting_sites: Vec<usize>,
    pub stationary: bool,
    pub overflowed: usize,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

impl EnsembleAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn insert(&mut self, stream: u64, stats: TrajectoryStats) -> Result<()> {
        if let Some(first) = self.trajectories.values().next() {
            if first.occupation_time[0].len() != stats.occupation_time[0].len() {
                return Err(Error::DimensionMismatch {
                    expected: first.occupation_time[0].len(),
                    got: stats.occupation_time[0].len(),
                });
            }
        }
        if self.trajectories.insert(stream, stats).is_some() {
            return Err(Error::InvalidArgument(format!("stream {stream} accumulated twice")));
        }
        Ok(())
    }

    pub fn merge(mut self, other: Self) -> Result<Self> {
        for (k, v) in other.trajectories {
            self.insert(k, v)?;
        }
        Ok(self)
    }

    pub fn statistics(&self) -> Result<EnsembleStatistics> {
        let Some(first) = self.trajectories.values().next() else {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        };
        let n_sites = first.occupation_time[0].len();
        let per: Vec<&TrajectoryStats> = self.trajectories.values().collect();
        let mut means = Vec::with_capacity(n_sites);
        let mut stderrs = Vec::with_capacity(n_sites);
        let mut half_means = [Vec::with_capacity(n_sites), Vec::with_capacity(n_sites)];
        let mut drifting_sites = Vec::new();
        for k in 0..n_sites {
            let whole: Vec<f64> = per.iter().map(|s| s.means()[k]).collect();
            let (m, e) = mean_and_stderr(&whole);
            means.push(m);
            stderrs.push(e);
            let mut halves = [(0.0, 0.0); 2];
            for (h, slot) in halves.iter_mut().enumerate() {
                let v: Vec<f64> = per
                    .iter()
                    .map(|s| 2.0 * s.occupation_time[h][k] / s.observed_time)
                    .collect();
                *slot = mean_and_stderr(&v);
                half_means[h].push(slot.0);
            }
            let spread = 3.0 * (halves[0].1.powi(2) + halves[1].1.powi(2)).sqrt();
            if (halves[0].0 - halves[1].0).abs() > spread + 1e-12 * (1.0 + m.abs()) {
                drifting_sites.push(k);
            }
        }
        let currents: Vec<f64> = per.iter().map(|s| s.current()).collect();
        let (current, current_stderr) = mean_and_stderr(&currents);
        Ok(EnsembleStatistics {
            n_trajectories: per.len(),
            observed_time: per.iter().map(|s| s.observed_time).sum(),
            means,
            stderrs,
            current,
            current_stderr,
            half_means,
            stationary: drifting_sites.is_empty(),
            drifting_sites,
            overflowed: per.iter().filter(|s| s.overflow).count(),
        })
    }
}

impl EnsembleStatistics {
    pub fn write_csv<W: Write>(&self, mut w: W, seed: Option<u64>) -> io::Result<()> {
        if let Some(seed) = seed {
            writeln!(w, "# seed={seed}")?;
        }
        writeln!(w, "site,mean,stderr")?;
        for (k, (m, e)) in self.means.iter().zip(&self.stderrs).enumerate() {
            writeln!(w, "{k},{m},{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StationaryRun {
    pub burn_in: f64,
    pub observe: f64,
    pub n_trajectories: usize,
    pub first_stream: u64,
    pub event_cap: u64,
}

/// Accumulates `n_trajectories` independent stationary trajectories.
pub fn ensemble_statistics(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    run: &StationaryRun,
    seed: u64,
) -> Result<EnsembleAccumulator> {
    let stats: Vec<Result<(u64, TrajectoryStats)>> = (0..run.n_trajectories as u64)
        .into_par_iter()
        .map(|k| {
            let stream = run.first_stream + k;
            stationary_trajectory(model, initial, run.burn_in, run.observe, seed, stream, run.event_cap)
                .map(|s| (stream, s))
        })
        .collect();
    let mut acc = EnsembleAccumulator::new();
    for s in stats {
        let (k, v) = s?;
        acc.insert(k, v)?;
    }
    Ok(acc)
}
