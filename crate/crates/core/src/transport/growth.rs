use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::ParticleStatistics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseLabel {
    FermionStationary,
    BosonStationary,
    BosonGrowingHomogenizing,
    BosonCritical,
    BosonGrowingAmplifying,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthPhase {
    pub label: PhaseLabel,
    /// `theta - s eta`: decay rate of the total particle number.
    pub total_decay: f64,
    /// `eta - (theta + N Gamma)`: growth rate of site-to-site differences.
    pub difference_growth: f64,
    /// Stationary occupation per site, when one exists.
    pub density: Option<f64>,
}

impl GrowthPhase {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("phase serializes")
    }
}

/// Phase of the all-to-all model with uniform pump `eta`, loss `theta` and
/// hop rate `gamma` between each pair of `n` sites.
pub fn classify_growth_phase(
    eta: f64,
    theta: f64,
    n: usize,
    gamma: f64,
    statistics: ParticleStatistics,
) -> Result<GrowthPhase> {
    for (field, v) in [("eta", eta), ("theta", theta), ("gamma", gamma)] {
        if !v.is_finite() {
            return Err(Error::NonFinite { field, index: 0 });
        }
        if v < 0.0 {
            return Err(Error::NegativeRate { field, index: 0 });
        }
    }
    if n == 0 {
        return Err(Error::NoModes);
    }
    let s = statistics.sign() as f64;
    let total_decay = theta - s * eta;
    let difference_growth = eta - (theta + n as f64 * gamma);
    let (label, density) = match statistics {
        ParticleStatistics::Single => {
            return Err(Error::StatisticsMismatch("growth phases need bosons or fermions".into()))
        }
        ParticleStatistics::Fermion => {
            let d = if eta + theta > 0.0 { eta / (eta + theta) } else { 0.0 };
            (PhaseLabel::FermionStationary, Some(d))
        }
        ParticleStatistics::Boson => {
            if total_decay > 0.0 {
                (PhaseLabel::BosonStationary, Some(eta / total_decay))
            } else if difference_growth < 0.0 {
                (PhaseLabel::BosonGrowingHomogenizing, None)
            } else if difference_growth == 0.0 {
                (PhaseLabel::BosonCritical, None)
            } else {
                (PhaseLabel::BosonGrowingAmplifying, None)
            }
        }
    };
    Ok(GrowthPhase {
        label,
        total_decay,
        difference_growth,
        density,
    })
}
