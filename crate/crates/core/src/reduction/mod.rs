//! Adiabatic elimination of coherences: transition rates, their limiting
//! forms, the validity diagnostic, reconstructed coherences and the classical
//! generators on Fock space.

mod classical;
mod coherence;

pub use classical::{build_classical_generator, Channel, ChannelKind, ClassicalGenerator, RateMatrix};
pub use coherence::{adiabatic_coherences, solve_coherences_fixed_point, Coherences, FixedPointSolution};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::system::ValidatedSpec;

/// Symmetric, non-negative transition rates `W_{mu nu}` with zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionRateMatrix<T> {
    n: usize,
    rates: Vec<T>,
}

impl<T: Scalar> TransitionRateMatrix<T> {
    /// Builds from a row-major `n x n` array; the diagonal is forced to zero.
    pub fn from_rows(n: usize, mut rates: Vec<T>) -> Result<Self> {
        if rates.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: rates.len(),
            });
        }
        for mu in 0..n {
            rates[mu * n + mu] = T::zero();
        }
        Ok(Self { n, rates })
    }

    /// Uniform rate between every pair of distinct modes.
    pub fn all_to_all(n: usize, rate: T) -> Self {
        let mut rates = vec![rate; n * n];
        for mu in 0..n {
            rates[mu * n + mu] = T::zero();
        }
        Self { n, rates }
    }

    /// Nearest-neighbour chain of `n` sites with uniform rate.
    pub fn chain(n: usize, rate: T) -> Self {
        let mut rates = vec![T::zero(); n * n];
        for mu in 1..n {
            rates[(mu - 1) * n + mu] = rate.clone();
            rates[mu * n + mu - 1] = rate.clone();
        }
        Self { n, rates }
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn get(&self, mu: usize, nu: usize) -> &T {
        &self.rates[mu * self.n + nu]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|mu| (0..self.n).all(|nu| self.get(mu, nu) == self.get(nu, mu)))
    }

    /// Total rate of leaving mode `mu`.
    pub fn exit_rate(&self, mu: usize) -> T {
        (0..self.n)
            .filter(|&nu| nu != mu)
            .fold(T::zero(), |acc, nu| acc + self.get(nu, mu).clone())
    }

    /// Smallest strictly positive rate, if any.
    pub fn min_positive(&self) -> Option<T> {
        self.rates
            .iter()
            .filter(|r| **r > T::zero())
            .fold(None, |acc: Option<T>, r| match acc {
                Some(a) if a <= *r => Some(a),
                _ => Some(r.clone()),
            })
    }
}

impl TransitionRateMatrix<f64> {
    pub fn to_json(&self) -> String {
        let rows: Vec<&[f64]> = self.rates.chunks(self.n).collect();
        serde_json::json!({ "n_modes": self.n, "w": rows }).to_string()
    }
}

/// `W_{mu nu} = 2 gamma_{mu nu} |V_{mu nu}|^2 / (gamma_{mu nu}^2 + Omega_{mu nu}^2)`.
pub fn pair_rate<T: Scalar>(spec: &ValidatedSpec<T>, mu: usize, nu: usize) -> Result<T> {
    if mu == nu {
        return Ok(T::zero());
    }
    let v2 = spec.coupling_norm_sqr(mu, nu);
    if v2.is_zero() {
        return Ok(T::zero());
    }
    let g = spec.gamma_pair(mu, nu).clone();
    let w = spec.omega_pair(mu, nu).clone();
    let denom = g.clone() * g.clone() + w.clone() * w;
    if denom.is_zero() {
        return Err(Error::UndefinedRate(mu, nu));
    }
    Ok((T::one() + T::one()) * g * v2 / denom)
}

/// Transition rates for every pair of modes.
pub fn transition_rates<T: Scalar>(spec: &ValidatedSpec<T>) -> Result<TransitionRateMatrix<T>> {
    let n = spec.n_modes();
    let mut rates = Vec::with_capacity(n * n);
    for mu in 0..n {
        for nu in 0..n {
            rates.push(pair_rate(spec, mu, nu)?);
        }
    }
    Ok(TransitionRateMatrix { n, rates })
}

/// Exact rate with its Zeno and Golden-Rule approximations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitRates<T> {
    pub exact: T,
    pub zeno: T,
    pub golden_rule_lorentzian: T,
    /// Lorentzian density of states `gamma / (pi (gamma^2 + Omega^2))` at the detuning.
    pub density_of_states: T,
    pub zeno_relative_error: T,
    pub golden_rule_relative_error: T,
}

fn relative_error<T: Real>(approx: T, exact: T) -> T {
    if exact.is_zero() {
        if approx.is_zero() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        ((approx - exact) / exact).abs()
    }
}

/// Zeno (`2|V|^2/gamma`) and Lorentzian Golden-Rule (`2 pi |V|^2 L(Omega)`)
/// forms of the rate for one pair. The optional `broadening` replaces
/// `gamma_{mu nu}` as the Lorentzian width.
pub fn limit_rates<T: Real>(spec: &ValidatedSpec<T>, mu: usize, nu: usize, broadening: Option<T>) -> Result<LimitRates<T>> {
    let exact = pair_rate(spec, mu, nu)?;
    let g = *spec.gamma_pair(mu, nu);
    if g.is_zero() {
        return Err(Error::ZenoUndefined(mu, nu));
    }
    let v2 = spec.coupling_norm_sqr(mu, nu);
    let two = T::one() + T::one();
    let zeno = two * v2 / g;
    let width = broadening.unwrap_or(g);
    let detuning = *spec.omega_pair(mu, nu);
    let pi = T::from_f64_lossy(std::f64::consts::PI);
    let density_of_states = width / (pi * (width * width + detuning * detuning));
    let golden_rule_lorentzian = two * pi * v2 * density_of_states;
    Ok(LimitRates {
        exact,
        zeno,
        golden_rule_lorentzian,
        density_of_states,
        zeno_relative_error: relative_error(zeno, exact),
        golden_rule_relative_error: relative_error(golden_rule_lorentzian, exact),
    })
}

/// Default bound on `|V|^2 / (gamma^2 + Omega^2)` for the elimination to apply.
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairValidity {
    pub mu: usize,
    pub nu: usize,
    pub ratio: f64,
    /// The pair passes only because the detuning is large; dephasing alone
    /// would not satisfy the bound.
    pub detuning_dominated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub pairs: Vec<PairValidity>,
    pub max_ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ValidityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Ratio `|V_{mu nu}|^2 / (gamma_{mu nu}^2 + Omega_{mu nu}^2)` for each
/// coupled pair `mu < nu`, and whether all stay at or below `threshold`.
pub fn check_validity<T: Scalar>(spec: &ValidatedSpec<T>, threshold: f64) -> ValidityReport {
    let n = spec.n_modes();
    let mut pairs = Vec::new();
    for mu in 0..n {
        for nu in mu + 1..n {
            let v2 = spec.coupling_norm_sqr(mu, nu).to_f64_lossy();
            if v2 == 0.0 {
                continue;
            }
            let g = spec.gamma_pair(mu, nu).to_f64_lossy();
            let w = spec.omega_pair(mu, nu).to_f64_lossy();
            let ratio = v2 / (g * g + w * w);
            let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
            let dephasing_only = v2 / (g * g);
            pairs.push(PairValidity {
                mu,
                nu,
                ratio,
                detuning_dominated: ratio <= threshold && !(dephasing_only <= threshold),
            });
        }
    }
    let max_ratio = pairs.iter().map(|p| p.ratio).fold(0.0, f64::max);
    ValidityReport {
        pass: max_ratio <= threshold,
        pairs,
        max_ratio,
        threshold,
    }
}
