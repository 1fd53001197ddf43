use serde::{Deserialize, Serialize};

use super::survival::{paper_modes, SurvivalOracle};
use crate::error::{Error, Result};

/// Absolute error target of the convolution quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

const MAX_PANELS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySource {
    /// Numerical convolution of the injection clock with the passage density.
    Oracle,
    /// The printed closed form with start site 0 and `l` modes.
    Paper { l: usize },
}

/// First-arrival law at the end of a chain for a particle injected at rate
/// `eta` into site 0: an exponential injection time plus the passage time
/// of one walker.
#[derive(Clone, Debug)]
pub struct ArrivalOracle {
    survival: SurvivalOracle,
    eta: f64,
}

impl ArrivalOracle {
    /// `eta = +inf` means instantaneous injection.
    pub fn new(transient: usize, gamma: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::NegativeRate { field: "eta", index: 0 });
        }
        Ok(Self {
            survival: SurvivalOracle::new(transient, gamma)?,
            eta,
        })
    }

    pub fn survival(&self) -> &SurvivalOracle {
        &self.survival
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn instantaneous(&self) -> bool {
        self.eta.is_infinite()
    }

    /// `int_0^t eta e^{-eta s} e^{-mu (t - s)} ds`, stable at `mu = eta`.
    fn mode_convolution(&self, mu: f64, t: f64) -> f64 {
        let eta = self.eta;
        let diff = eta - mu;
        if (diff * t).abs() < 1e-8 {
            eta * t * (-eta * t).exp() * (1.0 - diff * t / 2.0)
        } else {
            eta * ((-mu * t).exp() - (-eta * t).exp()) / diff
        }
    }

    /// Density from the eigen-expansion of the convolution.
    pub fn density_closed(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if self.instantaneous() {
            return self.survival.passage_density(0, t);
        }
        let w = self.survival.weights(0);
        w.iter()
            .zip(self.survival.rates())
            .map(|(w, &mu)| w * mu * self.mode_convolution(mu, t))
            .sum()
    }

    /// Density by adaptive quadrature of the convolution integral on
    /// composite panels.
    pub fn density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.instantaneous() {
            return self.survival.passage_density(0, t);
        }
        let eta = self.eta;
        let integrand = |s: f64| eta * (-eta * s).exp() * self.survival.passage_density(0, t - s);
        integrate_panels(integrand, t, 10.0 / self.survival.gamma())
    }

    /// `P(T <= t)` from the eigen-expansion.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let w = self.survival.weights(0);
        if self.instantaneous() {
            return 1.0 - self.survival.survival(0, t);
        }
        let tail: f64 = w
            .iter()
            .zip(self.survival.rates())
            .map(|(w, &mu)| w * self.mode_convolution(mu, t))
            .sum();
        (1.0 - (-self.eta * t).exp() - tail).clamp(0.0, 1.0)
    }

    /// `int_0^t p(s) ds` by quadrature of [`Self::density_closed`].
    pub fn cdf_quadrature(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        integrate_panels(|s| self.density_closed(s), t, 10.0 / self.survival.gamma())
    }

    /// Time beyond which the arrival probability is below `eps`.
    pub fn tail_time(&self, eps: f64) -> f64 {
        let slowest = self
            .survival
            .rates()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
            .min(self.eta);
        let mut t = -eps.ln() / slowest;
        while 1.0 - self.cdf(t) > eps {
            t *= 1.5;
        }
        t
    }

    /// `int_0^inf p(t) dt` by quadrature of [`Self::density_closed`] up to
    /// [`Self::tail_time`], plus the remaining tail mass.
    pub fn total_mass(&self) -> f64 {
        let t_max = self.tail_time(1e-13);
        let body = integrate_panels(|s| self.density_closed(s), t_max, 10.0 / self.survival.gamma());
        body + (1.0 - self.cdf(t_max))
    }

    /// Mean arrival time `1/eta + sum_k w_k / mu_k`.
    pub fn mean(&self) -> f64 {
        let inject = if self.instantaneous() { 0.0 } else { 1.0 / self.eta };
        inject
            + self
                .survival
                .weights(0)
                .iter()
                .zip(self.survival.rates())
                .map(|(w, mu)| w / mu)
                .sum::<f64>()
    }
}

fn integrate_panels<F: Fn(f64) -> f64>(f: F, t: f64, width: f64) -> f64 {
    let panels = ((t / width).ceil() as usize).clamp(1, MAX_PANELS);
    let h = t / panels as f64;
    let tol = QUADRATURE_TOLERANCE / panels as f64;
    (0..panels)
        .map(|k| {
            let a = h * k as f64;
            let b = if k + 1 == panels { t } else { a + h };
            quadrature::integrate(&f, a, b, tol).integral
        })
        .sum()
}

/// Arrival density at `t` for a chain with `transient` sites before the target.
pub fn low_gain_arrival_density(t: f64, transient: usize, gamma: f64, eta: f64, source: DensitySource) -> Result<f64> {
    match source {
        DensitySource::Oracle => Ok(ArrivalOracle::new(transient, gamma, eta)?.density(t)),
        DensitySource::Paper { l } => paper_density(t, l, gamma, eta),
    }
}

/// Cumulative arrival probability from the oracle.
pub fn low_gain_arrival_cdf(t: f64, transient: usize, gamma: f64, eta: f64) -> Result<f64> {
    Ok(ArrivalOracle::new(transient, gamma, eta)?.cdf(t))
}

/// `sum_k c_k eta lambda_k / (eta - lambda_k) (e^{-lambda_k t} - e^{-eta t})`, start site 0.
fn paper_density(t: f64, l: usize, gamma: f64, eta: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidChain("need at least one mode".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::NegativeRate { field: "eta", index: 0 });
    }
    let mut sum = 0.0;
    for (k, (c, lambda)) in paper_modes(0, l, gamma).into_iter().enumerate() {
        let diff = eta - lambda;
        if diff.abs() <= 1e-12 * eta.max(lambda) {
            return Err(Error::DensityPole(k));
        }
        sum += c * eta * lambda / diff * ((-lambda * t).exp() - (-eta * t).exp());
    }
    Ok(sum)
}
