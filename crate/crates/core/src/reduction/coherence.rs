use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::lindblad::DensityMatrix;
use crate::scalar::Real;
use crate::system::{ParticleStatistics, ValidatedSpec};

/// Off-diagonal density-matrix elements keyed by `(rank_m, rank_n)`.
pub type Coherences<T> = BTreeMap<(usize, usize), Complex<T>>;

fn hop_weight<T: Real>(statistics: ParticleStatistics, m_from: u32, m_to: u32) -> T {
    let (f, t) = (i64::from(m_from), i64::from(m_to));
    match statistics {
        ParticleStatistics::Fermion => T::from_i64(f * (1 - t)).unwrap(),
        _ => T::from_i64(f * (t + 1)).unwrap().sqrt(),
    }
}

/// Coherences slaved to the populations `p`:
/// `rho_{m n} = -i V_{mu nu} A (P_n - P_m) / (gamma_{mu nu} + i Omega_{mu nu})`
/// for `n = m - e_mu + e_nu`, with `A` the hopping amplitude of the
/// statistics (one for a single particle).
pub fn adiabatic_coherences<T: Real>(spec: &ValidatedSpec<T>, space: &FockSpace, p: &[T]) -> Result<Coherences<T>> {
    if p.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: p.len(),
        });
    }
    if space.n_modes() != spec.n_modes() || space.statistics() != spec.statistics() {
        return Err(Error::StatisticsMismatch("space does not belong to spec".into()));
    }
    let n_modes = spec.n_modes();
    let i = Complex::new(T::zero(), T::one());
    let mut out = Coherences::new();
    for (a, m) in space.iter() {
        for mu in 0..n_modes {
            for nu in 0..n_modes {
                if mu == nu {
                    continue;
                }
                let v = *spec.coupling(mu, nu);
                if v.re.is_zero() && v.im.is_zero() {
                    continue;
                }
                let Some(n) = m.hopped(nu, mu) else { continue };
                let Some(b) = space.rank(&n) else { continue };
                let denom = Complex::new(*spec.gamma_pair(mu, nu), *spec.omega_pair(mu, nu));
                if denom.re.is_zero() && denom.im.is_zero() {
                    return Err(Error::UndefinedRate(mu, nu));
                }
                let amp = hop_weight::<T>(spec.statistics(), m[mu], m[nu]);
                let value = -i * v * (amp * (p[b] - p[a])) / denom;
                out.insert((a, b), value);
            }
        }
    }
    Ok(out)
}

/// Result of the self-consistent coherence iteration.
#[derive(Clone, Debug)]
pub struct FixedPointSolution<T> {
    pub rho: DensityMatrix<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Solves the stationarity condition for single-particle coherences at fixed
/// populations by Jacobi iteration:
/// `rho_{mu nu} = -i sum_l [V_{mu l} rho_{l nu} / (gamma_{mu nu} + i Omega_{mu l})
///  - rho_{mu l} V_{l nu} / (gamma_{mu nu} + i Omega_{l nu})]`.
pub fn solve_coherences_fixed_point<T: Real>(
    spec: &ValidatedSpec<T>,
    p: &[T],
    tol: T,
    max_iterations: usize,
) -> Result<FixedPointSolution<T>> {
    if spec.statistics() != ParticleStatistics::Single {
        return Err(Error::StatisticsMismatch(
            "fixed-point coherences are defined for a single particle".into(),
        ));
    }
    let n = spec.n_modes();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let i = Complex::new(T::zero(), T::one());
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = DensityMatrix::from_diagonal(p);
    let mut residual = T::infinity();
    for iteration in 1..=max_iterations {
        let mut next = rho.clone();
        residual = T::zero();
        for mu in 0..n {
            for nu in 0..n {
                if mu == nu {
                    continue;
                }
                let g = *spec.gamma_pair(mu, nu);
                let mut acc = zero;
                for l in 0..n {
                    let v_left = *spec.coupling(mu, l);
                    if !(v_left.re.is_zero() && v_left.im.is_zero()) {
                        let d = Complex::new(g, *spec.omega_pair(mu, l));
                        if d.norm_sqr().is_zero() {
                            return Err(Error::UndefinedRate(mu, l));
                        }
                        acc = acc + v_left * rho.get(l, nu) / d;
                    }
                    let v_right = *spec.coupling(l, nu);
                    if !(v_right.re.is_zero() && v_right.im.is_zero()) {
                        let d = Complex::new(g, *spec.omega_pair(l, nu));
                        if d.norm_sqr().is_zero() {
                            return Err(Error::UndefinedRate(l, nu));
                        }
                        acc = acc - rho.get(mu, l) * v_right / d;
                    }
                }
                let value = -i * acc;
                residual = residual.max((value - rho.get(mu, nu)).norm());
                if !value.re.is_finite() || !value.im.is_finite() {
                    return Err(Error::NoConvergence {
                        iterations: iteration,
                        residual: f64::INFINITY,
                    });
                }
                next.set(mu, nu, value);
            }
        }
        rho = next;
        if residual <= tol {
            return Ok(FixedPointSolution {
                rho,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        residual: residual.to_f64_lossy(),
    })
}
