use std::io::{self, Write};

use super::ChainModel;
use crate::error::{Error, Result};
use crate::ode::{integrate_observed, Tolerance};
use crate::reduction::{transition_rates, TransitionRateMatrix};
use crate::scalar::Real;
use crate::system::{ParticleStatistics, ValidatedSpec};

/// Linear equations for mean occupations:
/// `dm_mu/dt = sum_nu W_{mu nu} (m_nu - m_mu) + (1 + s m_mu) eta_mu - theta_mu m_mu`.
#[derive(Clone, Debug)]
pub struct MeanFieldModel<T> {
    pub rates: TransitionRateMatrix<T>,
    pub eta: Vec<T>,
    pub theta: Vec<T>,
    pub statistics: ParticleStatistics,
}

impl<T: Real> MeanFieldModel<T> {
    pub fn from_spec(spec: &ValidatedSpec<T>) -> Result<Self> {
        Ok(Self {
            rates: transition_rates(spec)?,
            eta: spec.spec().eta.clone(),
            theta: spec.spec().theta.clone(),
            statistics: spec.statistics(),
        })
    }

    pub fn from_chain(chain: &ChainModel<T>) -> Result<Self> {
        chain.validate()?;
        let n = chain.n_sites();
        let mut eta = vec![T::zero(); n];
        let mut theta = vec![T::zero(); n];
        eta[0] = chain.eta;
        theta[n - 1] = chain.theta;
        Ok(Self {
            rates: TransitionRateMatrix::chain(n, chain.gamma),
            eta,
            theta,
            statistics: chain.statistics,
        })
    }

    /// Every pair of the `n` sites coupled at `gamma`, uniform pump and loss.
    pub fn all_to_all(n: usize, gamma: T, eta: T, theta: T, statistics: ParticleStatistics) -> Self {
        Self {
            rates: TransitionRateMatrix::all_to_all(n, gamma),
            eta: vec![eta; n],
            theta: vec![theta; n],
            statistics,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.eta.len()
    }

    pub fn derivative(&self, m: &[T], dm: &mut [T]) {
        let n = self.n_modes();
        let s = T::from_i64(self.statistics.sign()).unwrap();
        for mu in 0..n {
            let mut acc = (T::one() + s * m[mu]) * self.eta[mu] - self.theta[mu] * m[mu];
            for nu in 0..n {
                if nu != mu {
                    acc = acc + *self.rates.get(mu, nu) * (m[nu] - m[mu]);
                }
            }
            dm[mu] = acc;
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeanFieldTrajectory<T> {
    pub times: Vec<T>,
    pub occupations: Vec<Vec<T>>,
}

impl<T: Real> MeanFieldTrajectory<T> {
    pub fn totals(&self) -> Vec<T> {
        self.occupations.iter().map(|m| m.iter().copied().sum()).collect()
    }

    /// `max_mu m_mu - min_mu m_mu` at each time.
    pub fn spreads(&self) -> Vec<T> {
        self.occupations
            .iter()
            .map(|m| {
                let hi = m.iter().copied().fold(T::neg_infinity(), T::max);
                let lo = m.iter().copied().fold(T::infinity(), T::min);
                hi - lo
            })
            .collect()
    }

    /// CSV `t,m_0,...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.occupations.first().map_or(0, Vec::len);
        write!(w, "t")?;
        for k in 0..n {
            write!(w, ",m_{k}")?;
        }
        writeln!(w)?;
        for (t, m) in self.times.iter().zip(&self.occupations) {
            write!(w, "{}", t.to_f64_lossy())?;
            for x in m {
                write!(w, ",{}", x.to_f64_lossy())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Tolerance on fermion occupations leaving `[0, 1]`.
const FERMION_SLACK: f64 = 1e-8;

/// Integrates the mean-occupation equations on `grid`.
pub fn mean_field_evolve<T: Real>(
    model: &MeanFieldModel<T>,
    initial: &[T],
    grid: &[T],
    tol: Tolerance<T>,
) -> Result<MeanFieldTrajectory<T>> {
    let n = model.n_modes();
    if initial.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: initial.len(),
        });
    }
    let fermion = model.statistics == ParticleStatistics::Fermion;
    let slack = T::from_f64_lossy(FERMION_SLACK);
    let check = |t: T, m: &[T]| -> Result<()> {
        for &x in m {
            let low = x < -slack;
            if low || (fermion && x > T::one() + slack) {
                return Err(Error::FermionBounds {
                    t: t.to_f64_lossy(),
                    value: x.to_f64_lossy(),
                });
            }
        }
        Ok(())
    };
    check(T::zero(), initial)?;
    let mut rhs = |_t: T, m: &[T], dm: &mut [T]| model.derivative(m, dm);
    let occupations = integrate_observed(&mut rhs, initial, grid, tol, |t, m| check(t, m))?;
    Ok(MeanFieldTrajectory {
        times: grid.to_vec(),
        occupations,
    })
}
