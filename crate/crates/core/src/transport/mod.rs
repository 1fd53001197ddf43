//! The one-dimensional injection/absorption chain and the all-to-all growth
//! model, with their analytic oracles.

mod arrival;
mod growth;
mod meanfield;
mod survival;

pub use arrival::{low_gain_arrival_cdf, low_gain_arrival_density, ArrivalOracle, DensitySource};
pub use growth::{classify_growth_phase, GrowthPhase, PhaseLabel};
pub use meanfield::{mean_field_evolve, MeanFieldModel, MeanFieldTrajectory};
pub use survival::{
    compare_survival, survival_function_oracle, survival_function_paper, SurvivalComparison, SurvivalOracle,
};

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduction::{Channel, ChannelKind, ClassicalGenerator};
use crate::scalar::Scalar;
use crate::system::ParticleStatistics;

/// Chain of sites `0..=last_site` with uniform hopping, injection at site 0
/// and absorption at the last site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainModel<T> {
    pub last_site: usize,
    pub gamma: T,
    pub eta: T,
    pub theta: T,
    pub statistics: ParticleStatistics,
}

impl<T: Scalar> ChainModel<T> {
    pub fn new(last_site: usize, gamma: T, eta: T, theta: T, statistics: ParticleStatistics) -> Result<Self> {
        let chain = Self {
            last_site,
            gamma,
            eta,
            theta,
            statistics,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.last_site == 0 {
            return Err(Error::InvalidChain("the chain needs at least two sites".into()));
        }
        if !(self.gamma > T::zero()) || !self.gamma.is_finite_value() {
            return Err(Error::InvalidChain("hop rate must be positive".into()));
        }
        for (field, v) in [("eta", &self.eta), ("theta", &self.theta)] {
            if !v.is_finite_value() {
                return Err(Error::NonFinite { field, index: 0 });
            }
            if *v < T::zero() {
                return Err(Error::NegativeRate { field, index: 0 });
            }
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.last_site + 1
    }

    fn sign(&self) -> T {
        T::from_int(self.statistics.sign())
    }
}

/// Channel model of the chain: hops in both directions between neighbours,
/// pump into site 0 and loss from the last site. Zero-rate channels are kept.
/// A single particle has no pump or loss channels.
pub fn make_chain<T: Scalar>(chain: &ChainModel<T>) -> Result<ClassicalGenerator<T>> {
    chain.validate()?;
    let mut channels = Vec::with_capacity(2 * chain.last_site + 2);
    for k in 1..=chain.last_site {
        channels.push(Channel {
            kind: ChannelKind::Hop { to: k, from: k - 1 },
            coefficient: chain.gamma.clone(),
        });
        channels.push(Channel {
            kind: ChannelKind::Hop { to: k - 1, from: k },
            coefficient: chain.gamma.clone(),
        });
    }
    if chain.statistics == ParticleStatistics::Single {
        if !chain.eta.is_zero() || !chain.theta.is_zero() {
            return Err(Error::PumpLossUnsupported("a single walker cannot be injected or absorbed".into()));
        }
    } else {
        channels.push(Channel {
            kind: ChannelKind::Pump(0),
            coefficient: chain.eta.clone(),
        });
        channels.push(Channel {
            kind: ChannelKind::Loss(chain.last_site),
            coefficient: chain.theta.clone(),
        });
    }
    ClassicalGenerator::new(chain.n_sites(), chain.statistics, channels)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryProfile<T> {
    pub occupations: Vec<T>,
    pub current: T,
}

impl StationaryProfile<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

/// Exact stationary mean occupations: `m_L = eta / (theta - s eta (1 + L theta / Gamma))`,
/// `m_0 = m_L (1 + L theta / Gamma)`, linear in between.
pub fn stationary_profile<T: Scalar>(chain: &ChainModel<T>) -> Result<StationaryProfile<T>> {
    chain.validate()?;
    let n = chain.n_sites();
    let l = T::from_int(chain.last_site as i64);
    if chain.eta.is_zero() {
        return Ok(StationaryProfile {
            occupations: vec![T::zero(); n],
            current: T::zero(),
        });
    }
    if chain.theta.is_zero() {
        return match chain.statistics {
            ParticleStatistics::Fermion => Ok(StationaryProfile {
                occupations: vec![T::one(); n],
                current: T::zero(),
            }),
            _ => Err(Error::NoStationaryState("particles accumulate without loss".into())),
        };
    }
    let stretch = T::one() + l * chain.theta.clone() / chain.gamma.clone();
    let denom = chain.theta.clone() - chain.sign() * chain.eta.clone() * stretch.clone();
    if !(denom > T::zero()) {
        return Err(Error::NoStationaryState(format!(
            "injection at or above the condensation threshold {:.6}",
            condensation_threshold(chain).map(|t| t.to_f64_lossy()).unwrap_or(f64::NAN)
        )));
    }
    let m_last = chain.eta.clone() / denom;
    let m_first = m_last.clone() * stretch;
    let current = chain.theta.clone() * m_last;
    let step = current.clone() / chain.gamma.clone();
    let occupations = (0..n)
        .map(|k| m_first.clone() - step.clone() * T::from_int(k as i64))
        .collect();
    Ok(StationaryProfile { occupations, current })
}

/// `J = [1/eta - s/theta - s L / Gamma]^{-1}`.
pub fn stationary_current<T: Scalar>(chain: &ChainModel<T>) -> Result<T> {
    stationary_profile(chain).map(|p| p.current)
}

/// Fermion current in the limit of infinite injection: `theta Gamma / (L theta + Gamma)`.
pub fn saturated_fermion_current<T: Scalar>(chain: &ChainModel<T>) -> Result<T> {
    chain.validate()?;
    if chain.statistics != ParticleStatistics::Fermion {
        return Err(Error::StatisticsMismatch("saturation is a fermion limit".into()));
    }
    let l = T::from_int(chain.last_site as i64);
    Ok(chain.theta.clone() * chain.gamma.clone() / (l * chain.theta.clone() + chain.gamma.clone()))
}

/// Boson injection rate at which the current diverges: `(1/theta + L/Gamma)^{-1}`.
pub fn condensation_threshold<T: Scalar>(chain: &ChainModel<T>) -> Result<T> {
    chain.validate()?;
    if chain.statistics != ParticleStatistics::Boson {
        return Err(Error::ThresholdUndefined(
            "only bosons condense; the fermion current stays finite".into(),
        ));
    }
    if chain.theta.is_zero() {
        return Ok(T::zero());
    }
    let l = T::from_int(chain.last_site as i64);
    Ok(T::one() / (T::one() / chain.theta.clone() + l / chain.gamma.clone()))
}

/// CSV `t,value`.
pub fn write_curve_csv<W: Write>(mut w: W, times: &[f64], values: &[f64]) -> io::Result<()> {
    writeln!(w, "t,value")?;
    for (t, v) in times.iter().zip(values) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}
