//! Classical dynamics on Fock space: the master equation, its stationary
//! law, and exact kinetic Monte-Carlo with waiting-time and first-arrival
//! instrumentation.

mod ensemble;
mod gillespie;
pub mod ks;
mod master;
mod samples;
mod sampling;

pub use ensemble::{
    default_burn_in, ensemble_statistics, stationary_trajectory, EnsembleAccumulator, EnsembleStatistics,
    StationaryRun, TrajectoryStats,
};
pub use gillespie::{
    gillespie_step, run_trajectory, simulate_trajectory, stream_rng, Event, Observer, RunOutcome, Simulator, Step,
    StopCondition, Termination, TrajectoryRecord, DEFAULT_EVENT_CAP,
};
pub use master::{solve_master, stationary_distribution, ClipDiagnostic, MasterSolution, CLIP_THRESHOLD};
pub use samples::{histogram, Binning, Histogram, SampleSet};
pub use sampling::{
    collect_waiting_times, occupancy_fractions, sample_first_arrival, sample_persistent_times, ArrivalOptions,
    ArrivalSamples, WaitingTimes,
};

#[cfg(test)]
mod tests;
