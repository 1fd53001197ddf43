use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::OccupationState;
use crate::reduction::{ChannelKind, ClassicalGenerator};

/// Safety cap on events per trajectory.
pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;

const RESUM_INTERVAL: u64 = 4096;

/// Generator for trajectory `stream` of a run with master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub dt: f64,
    pub channel: usize,
    pub next: OccupationState,
}

fn pick(rates: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (id, &r) in rates.iter().enumerate() {
        if r > 0.0 {
            acc += r;
            last_positive = id;
            if target < acc {
                return id;
            }
        }
    }
    last_positive
}

/// One direct-method step from `state`, computing every channel rate.
pub fn gillespie_step<R: Rng + ?Sized>(
    model: &ClassicalGenerator<f64>,
    state: &OccupationState,
    rng: &mut R,
) -> Result<Step> {
    let rates: Vec<f64> = (0..model.channels().len()).map(|id| model.rate(id, state)).collect();
    let total: f64 = rates.iter().sum();
    if total <= 0.0 {
        return Err(Error::Absorbing);
    }
    let dt = rng.sample::<f64, _>(Exp1) / total;
    let channel = pick(&rates, total, rng.random::<f64>());
    let mut next = state.clone().into_inner();
    model.apply_in_place(channel, &mut next);
    Ok(Step {
        dt,
        channel,
        next: OccupationState::new(next),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StopCondition {
    /// Run until time `T`.
    Time(f64),
    /// Run until one of `sites` becomes occupied, or until `time_cap`.
    Arrival { sites: Vec<usize>, time_cap: f64 },
    /// Run for a fixed number of events.
    Events(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    Arrival,
    EventCount,
    /// The safety cap was hit before the stop condition.
    EventCap,
    /// No channel can fire and the stop condition can never be met.
    Absorbed,
}

/// Callbacks from a running trajectory.
pub trait Observer {
    /// The trajectory stayed in `state` over `[t0, t1)`.
    fn on_hold(&mut self, _t0: f64, _t1: f64, _state: &[u32]) {}
    /// Channel fired at `t`; `state` is the state after the jump.
    fn on_event(&mut self, _t: f64, _channel: usize, _state: &[u32]) {}
}

impl Observer for () {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunOutcome {
    pub termination: Termination,
    pub end_time: f64,
    pub events: u64,
}

#[derive(Clone, Copy)]
enum Fast {
    Hop { to: usize, from: usize },
    Pump(usize),
    Loss(usize),
}

/// Kinetic Monte-Carlo state with incrementally maintained channel rates.
pub struct Simulator<'a> {
    model: &'a ClassicalGenerator<f64>,
    kinds: Vec<(Fast, f64)>,
    sign: f64,
    /// Channels to recompute after each channel fires.
    dependents: Vec<Vec<usize>>,
    state: Vec<u32>,
    rates: Vec<f64>,
    total: f64,
    time: f64,
    events: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a ClassicalGenerator<f64>, initial: &OccupationState) -> Result<Self> {
        if initial.len() != model.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: model.n_modes(),
                got: initial.len(),
            });
        }
        let kinds = model
            .channels()
            .iter()
            .map(|c| {
                let k = match c.kind {
                    ChannelKind::Hop { to, from } => Fast::Hop { to, from },
                    ChannelKind::Pump(m) => Fast::Pump(m),
                    ChannelKind::Loss(m) => Fast::Loss(m),
                };
                (k, c.coefficient)
            })
            .collect();
        let dependents = (0..model.channels().len())
            .map(|id| {
                let (a, b) = model.affected_modes(id);
                let mut ids: Vec<usize> = model.channels_touching(a).to_vec();
                if let Some(b) = b {
                    ids.extend_from_slice(model.channels_touching(b));
                }
                ids.sort_unstable();
                ids.dedup();
                ids
            })
            .collect();
        let mut sim = Self {
            model,
            kinds,
            sign: model.statistics().sign() as f64,
            dependents,
            state: initial.as_slice().to_vec(),
            rates: vec![0.0; model.channels().len()],
            total: 0.0,
            time: 0.0,
            events: 0,
        };
        sim.resum();
        Ok(sim)
    }

    #[inline]
    fn rate(&self, id: usize) -> f64 {
        let m = &self.state;
        let (kind, c) = self.kinds[id];
        match kind {
            Fast::Hop { to, from } => {
                let f = (1.0 + self.sign * f64::from(m[to])).max(0.0);
                c * f * f64::from(m[from])
            }
            Fast::Pump(mu) => c * (1.0 + self.sign * f64::from(m[mu])).max(0.0),
            Fast::Loss(mu) => c * f64::from(m[mu]),
        }
    }

    fn resum(&mut self) {
        for id in 0..self.rates.len() {
            self.rates[id] = self.rate(id);
        }
        self.total = self.rates.iter().sum();
    }

    fn refresh_after(&mut self, channel: usize) {
        for k in 0..self.dependents[channel].len() {
            let id = self.dependents[channel][k];
            let r = self.rate(id);
            self.total += r - self.rates[id];
            self.rates[id] = r;
        }
    }

    pub fn model(&self) -> &'a ClassicalGenerator<f64> {
        self.model
    }

    pub fn state(&self) -> &[u32] {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn total_rate(&self) -> f64 {
        self.total.max(0.0)
    }

    /// Draws the next waiting time, or `None` in an absorbing state.
    pub fn draw_wait<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        if self.total <= 0.0 {
            None
        } else {
            Some(rng.sample::<f64, _>(Exp1) / self.total)
        }
    }

    /// Advances the clock by `dt`, fires a channel, and returns its id.
    pub fn fire<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> usize {
        let channel = pick(&self.rates, self.total, rng.random::<f64>());
        self.time += dt;
        match self.kinds[channel].0 {
            Fast::Hop { to, from } => {
                self.state[from] -= 1;
                self.state[to] += 1;
            }
            Fast::Pump(mu) => self.state[mu] += 1,
            Fast::Loss(mu) => self.state[mu] -= 1,
        }
        self.events += 1;
        if self.events % RESUM_INTERVAL == 0 {
            self.resum();
        } else {
            self.refresh_after(channel);
            if self.total <= 1e-12 {
                self.resum();
            }
        }
        channel
    }
}

/// Runs one trajectory, reporting holds and jumps to `observer`.
pub fn run_trajectory<R: Rng + ?Sized, O: Observer>(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    stop: &StopCondition,
    event_cap: u64,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunOutcome> {
    let mut sim = Simulator::new(model, initial)?;
    let arrived = |s: &[u32], sites: &[usize]| sites.iter().any(|&k| s[k] > 0);
    if let StopCondition::Arrival { sites, .. } = stop {
        if let Some(&k) = sites.iter().find(|&&k| k >= model.n_modes()) {
            return Err(Error::InvalidArgument(format!("arrival site {k} out of range")));
        }
        if arrived(sim.state(), sites) {
            return Ok(RunOutcome {
                termination: Termination::Arrival,
                end_time: 0.0,
                events: 0,
            });
        }
    }
    let horizon = match stop {
        StopCondition::Time(t) => *t,
        StopCondition::Arrival { time_cap, .. } => *time_cap,
        StopCondition::Events(_) => f64::INFINITY,
    };
    loop {
        if let StopCondition::Events(k) = stop {
            if sim.events() >= *k {
                return Ok(RunOutcome {
                    termination: Termination::EventCount,
                    end_time: sim.time(),
                    events: sim.events(),
                });
            }
        }
        if sim.events() >= event_cap {
            return Ok(RunOutcome {
                termination: Termination::EventCap,
                end_time: sim.time(),
                events: sim.events(),
            });
        }
        let t0 = sim.time();
        let Some(dt) = sim.draw_wait(rng) else {
            let termination = if horizon.is_finite() {
                observer.on_hold(t0, horizon, sim.state());
                match stop {
                    StopCondition::Time(_) => Termination::TimeLimit,
                    _ => Termination::Absorbed,
                }
            } else {
                Termination::Absorbed
            };
            let end_time = if matches!(termination, Termination::TimeLimit) { horizon } else { t0 };
            return Ok(RunOutcome {
                termination,
                end_time,
                events: sim.events(),
            });
        };
        if t0 + dt > horizon {
            observer.on_hold(t0, horizon, sim.state());
            return Ok(RunOutcome {
                termination: Termination::TimeLimit,
                end_time: horizon,
                events: sim.events(),
            });
        }
        observer.on_hold(t0, t0 + dt, sim.state());
        let channel = sim.fire(dt, rng);
        observer.on_event(sim.time(), channel, sim.state());
        if let StopCondition::Arrival { sites, .. } = stop {
            if arrived(sim.state(), sites) {
                return Ok(RunOutcome {
                    termination: Termination::Arrival,
                    end_time: sim.time(),
                    events: sim.events(),
                });
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub channel: usize,
    pub state: Vec<u32>,
}

/// Complete event log of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub initial: Vec<u32>,
    pub events: Vec<Event>,
    pub termination: Termination,
    pub end_time: f64,
    /// The event cap was exceeded.
    pub overflow: bool,
}

struct Recorder(Vec<Event>);

impl Observer for Recorder {
    fn on_event(&mut self, t: f64, channel: usize, state: &[u32]) {
        self.0.push(Event {
            time: t,
            channel,
            state: state.to_vec(),
        });
    }
}

/// Simulates and records trajectory `stream` of master seed `seed`.
pub fn simulate_trajectory(
    model: &ClassicalGenerator<f64>,
    initial: &OccupationState,
    stop: &StopCondition,
    seed: u64,
    stream: u64,
    event_cap: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = stream_rng(seed, stream);
    let mut rec = Recorder(Vec::new());
    let outcome = run_trajectory(model, initial, stop, event_cap, &mut rng, &mut rec)?;
    Ok(TrajectoryRecord {
        seed,
        stream,
        initial: initial.as_slice().to_vec(),
        events: rec.0,
        termination: outcome.termination,
        end_time: outcome.end_time,
        overflow: outcome.termination == Termination::EventCap,
    })
}

impl TrajectoryRecord {
    /// CSV with columns `t`, `channel`, `m_0`...; the seed is in a header comment.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# seed={} stream={}", self.seed, self.stream)?;
        write!(w, "t,channel")?;
        for k in 0..self.initial.len() {
            write!(w, ",m_{k}")?;
        }
        writeln!(w)?;
        for e in &self.events {
            write!(w, "{},{}", e.time, e.channel)?;
            for m in &e.state {
                write!(w, ",{m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
