use crate::error::{Error, Result};
use crate::linalg::{closed_classes, solve_dense};
use crate::ode::{integrate_observed, Tolerance};
use crate::reduction::RateMatrix;
use crate::scalar::{Real, Scalar};

/// Entries below this are reported; all negative entries are clipped to zero.
pub const CLIP_THRESHOLD: f64 = -1e-10;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClipDiagnostic {
    /// Entries that were below [`CLIP_THRESHOLD`] before clipping.
    pub below_threshold: usize,
    /// Most negative entry seen.
    pub min_value: f64,
}

#[derive(Clone, Debug)]
pub struct MasterSolution<T> {
    pub times: Vec<T>,
    pub probabilities: Vec<Vec<T>>,
    pub clipping: ClipDiagnostic,
}

impl<T: Real> MasterSolution<T> {
    /// Probability left in the space at each time.
    pub fn totals(&self) -> Vec<T> {
        self.probabilities.iter().map(|p| p.iter().copied().sum()).collect()
    }
}

/// Integrates `dP/dt = Q P` on `grid`.
pub fn solve_master<T: Real>(q: &RateMatrix<T>, p0: &[T], grid: &[T], tol: Tolerance<T>) -> Result<MasterSolution<T>> {
    if p0.len() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            got: p0.len(),
        });
    }
    if p0.iter().any(|p| *p < T::zero() || !p.is_finite()) {
        return Err(Error::InvalidState("initial probabilities must be finite and non-negative".into()));
    }
    let total: T = p0.iter().copied().sum();
    if (total - T::one()).abs() > T::from_f64_lossy(1e-9) {
        return Err(Error::InvalidState(format!("initial probabilities sum to {}", total.to_f64_lossy())));
    }
    let mut clipping = ClipDiagnostic::default();
    let threshold = T::from_f64_lossy(CLIP_THRESHOLD);
    let mut rhs = |_t: T, p: &[T], dp: &mut [T]| {
        dp.iter_mut().for_each(|x| *x = T::zero());
        for (k, d) in q.diagonal().iter().enumerate() {
            dp[k] = *d * p[k];
        }
        for (r, c, v) in q.off_diagonal() {
            dp[*r] = dp[*r] + *v * p[*c];
        }
    };
    let probabilities = integrate_observed(&mut rhs, p0, grid, tol, |_, p| {
        for x in p.iter_mut() {
            if *x < T::zero() {
                let v = x.to_f64_lossy();
                clipping.min_value = clipping.min_value.min(v);
                if *x < threshold {
                    clipping.below_threshold += 1;
                }
                *x = T::zero();
            }
        }
        Ok(())
    })?;
    Ok(MasterSolution {
        times: grid.to_vec(),
        probabilities,
        clipping,
    })
}

/// Unique stationary vector of `Q`, solved exactly for exact scalars.
///
/// Uniqueness requires a single closed communicating class; otherwise the
/// closed classes are returned in the error.
pub fn stationary_distribution<T: Scalar>(q: &RateMatrix<T>) -> Result<Vec<T>> {
    let d = q.dim();
    if d == 0 {
        return Err(Error::InvalidArgument("empty state space".into()));
    }
    let edges = q
        .off_diagonal()
        .iter()
        .filter(|(_, _, v)| *v > T::zero())
        .map(|(r, c, _)| (*c, *r));
    let closed = closed_classes(d, edges);
    if closed.len() != 1 {
        return Err(Error::NotUnique(closed));
    }
    let mut a = q.to_dense();
    for k in 0..d {
        a[k] = T::one();
    }
    let mut b = vec![T::zero(); d];
    b[0] = T::one();
    let mut p = solve_dense(a, b)?;
    for x in p.iter_mut() {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
    Ok(p)
}
