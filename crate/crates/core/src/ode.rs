//! Adaptive Dormand–Prince 5(4) integrator for linear and nonlinear systems.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// State component the integrator can combine and measure.
pub trait OdeValue<T>: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> T;
    fn is_nan_value(&self) -> bool;
}

impl<T: Real> OdeValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn magnitude(&self) -> T {
        self.abs()
    }
    fn is_nan_value(&self) -> bool {
        self.is_nan()
    }
}

impl<T: Real> OdeValue<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn magnitude(&self) -> T {
        self.norm()
    }
    fn is_nan_value(&self) -> bool {
        self.re.is_nan() || self.im.is_nan()
    }
}

/// Mixed absolute/relative local error target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs: T::from_f64_lossy(1e-10),
            rel: T::from_f64_lossy(1e-8),
        }
    }
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded fourth-order difference.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<T: Real, E: OdeValue<T>>(out: &mut [E], y: &[E], h: T, terms: &[(f64, &[E])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = E::zero();
        for (c, k) in terms {
            acc = acc + k[i] * T::from_f64_lossy(*c);
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `dy/dt = rhs(t, y)` and returns the state at each grid time.
///
/// The first grid entry is the initial time; the first output is `y0`.
pub fn integrate<T, E, F>(mut rhs: F, y0: &[E], grid: &[T], tol: Tolerance<T>) -> Result<Vec<Vec<E>>>
where
    T: Real,
    E: OdeValue<T>,
    F: FnMut(T, &[E], &mut [E]),
{
    integrate_observed(&mut rhs, y0, grid, tol, |_, _| Ok(()))
}

/// Like [`integrate`], calling `observe` on every output; an error aborts.
pub fn integrate_observed<T, E, F, O>(
    rhs: &mut F,
    y0: &[E],
    grid: &[T],
    tol: Tolerance<T>,
    mut observe: O,
) -> Result<Vec<Vec<E>>>
where
    T: Real,
    E: OdeValue<T>,
    F: FnMut(T, &[E], &mut [E]),
    O: FnMut(T, &mut Vec<E>) -> Result<()>,
{
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be ascending".into()));
    }
    let Some(&t_start) = grid.first() else {
        return Ok(Vec::new());
    };
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut first = y.clone();
    observe(t_start, &mut first)?;
    let mut out = vec![first];
    if grid.len() == 1 {
        return Ok(out);
    }

    let mut k: Vec<Vec<E>> = (0..7).map(|_| vec![E::zero(); n]).collect();
    let mut tmp = vec![E::zero(); n];
    let mut y_new = vec![E::zero(); n];
    let mut t = t_start;
    rhs(t, &y, &mut k[0]);

    let span = *grid.last().unwrap() - t_start;
    let mut h = initial_step(&y, &k[0], span, tol);
    let safety = T::from_f64_lossy(0.9);
    let min_factor = T::from_f64_lossy(0.2);
    let max_factor = T::from_f64_lossy(5.0);
    let fifth = T::from_f64_lossy(0.2);
    let tiny = T::from_f64_lossy(1e-14);

    for &target in &grid[1..] {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= tiny * t.abs().max(T::one()) && !last {
                return Err(Error::StepUnderflow(t.to_f64_lossy()));
            }

            let (k0, rest) = k.split_at_mut(1);
            let k0 = &k0[0];
            combine(&mut tmp, &y, step, &[(A21, k0)]);
            rhs(t + step * T::from_f64_lossy(C2), &tmp, &mut rest[0]);
            combine(&mut tmp, &y, step, &[(A31, k0), (A32, &rest[0])]);
            rhs(t + step * T::from_f64_lossy(C3), &tmp, &mut rest[1]);
            combine(&mut tmp, &y, step, &[(A41, k0), (A42, &rest[0]), (A43, &rest[1])]);
            rhs(t + step * T::from_f64_lossy(C4), &tmp, &mut rest[2]);
            combine(
                &mut tmp,
                &y,
                step,
                &[(A51, k0), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
            );
            rhs(t + step * T::from_f64_lossy(C5), &tmp, &mut rest[3]);
            combine(
                &mut tmp,
                &y,
                step,
                &[(A61, k0), (A62, &rest[0]), (A63, &rest[1]), (A64, &rest[2]), (A65, &rest[3])],
            );
            rhs(t + step, &tmp, &mut rest[4]);
            combine(
                &mut y_new,
                &y,
                step,
                &[(B1, k0), (B3, &rest[1]), (B4, &rest[2]), (B5, &rest[3]), (B6, &rest[4])],
            );
            rhs(t + step, &y_new, &mut rest[5]);

            let mut err_sq = T::zero();
            for i in 0..n {
                let e = (k0[i] * T::from_f64_lossy(E1)
                    + rest[1][i] * T::from_f64_lossy(E3)
                    + rest[2][i] * T::from_f64_lossy(E4)
                    + rest[3][i] * T::from_f64_lossy(E5)
                    + rest[4][i] * T::from_f64_lossy(E6)
                    + rest[5][i] * T::from_f64_lossy(E7))
                    * step;
                let scale = tol.abs + tol.rel * y[i].magnitude().max(y_new[i].magnitude());
                let r = e.magnitude() / scale;
                err_sq = err_sq + r * r;
            }
            let err = if n == 0 { T::zero() } else { (err_sq / T::from_usize(n).unwrap()).sqrt() };
            if err.is_nan() || y_new.iter().any(|v| v.is_nan_value()) {
                return Err(Error::NotANumber(t.to_f64_lossy()));
            }

            if err <= T::one() {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let factor = if err.is_zero() {
                    max_factor
                } else {
                    (safety * err.powf(-fifth)).min(max_factor).max(min_factor)
                };
                if !last {
                    h = step * factor;
                } else {
                    h = h.max(step * factor);
                }
            } else {
                h = step * (safety * err.powf(-fifth)).max(min_factor);
                if h <= tiny * t.abs().max(T::one()) {
                    return Err(Error::StepUnderflow(t.to_f64_lossy()));
                }
            }
        }
        let mut snapshot = y.clone();
        observe(target, &mut snapshot)?;
        out.push(snapshot);
    }
    Ok(out)
}

fn initial_step<T: Real, E: OdeValue<T>>(y: &[E], f: &[E], span: T, tol: Tolerance<T>) -> T {
    let n = T::from_usize(y.len().max(1)).unwrap();
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for (yi, fi) in y.iter().zip(f) {
        let scale = tol.abs + tol.rel * yi.magnitude();
        d0 = d0 + (yi.magnitude() / scale).powi(2);
        d1 = d1 + (fi.magnitude() / scale).powi(2);
    }
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let small = T::from_f64_lossy(1e-5);
    let h = if d0 < small || d1 < small {
        T::from_f64_lossy(1e-6)
    } else {
        T::from_f64_lossy(0.01) * d0 / d1
    };
    if span > T::zero() {
        h.min(span)
    } else {
        h
    }
}

/// `n + 1` evenly spaced points from `start` to `end`.
pub fn linspace<T: Real>(start: T, end: T, n: usize) -> Vec<T> {
    let steps = T::from_usize(n.max(1)).unwrap();
    (0..=n)
        .map(|i| start + (end - start) * T::from_usize(i).unwrap() / steps)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid = linspace(0.0, 5.0, 10);
        let out = integrate(|_, y: &[f64], dy: &mut [f64]| dy[0] = -2.0 * y[0], &[1.0], &grid, Tolerance::new(1e-12, 1e-10)).unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn complex_rotation() {
        let grid = linspace(0.0, 10.0, 20);
        let i = Complex::new(0.0, 1.0);
        let out = integrate(
            |_, y: &[Complex<f64>], dy: &mut [Complex<f64>]| dy[0] = -i * y[0],
            &[Complex::new(1.0, 0.0)],
            &grid,
            Tolerance::new(1e-12, 1e-10),
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert!((y[0] - Complex::new(t.cos(), -t.sin())).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let grid = [0.0, 1.0, 100.0];
        let out = integrate(|_, _: &[f64], dy: &mut [f64]| dy.fill(0.0), &[0.3, 0.7], &grid, Tolerance::default()).unwrap();
        assert!(out.iter().all(|y| y == &[0.3, 0.7]));
    }

    #[test]
    fn nan_detected() {
        let r = integrate(|_, _: &[f64], dy: &mut [f64]| dy[0] = f64::NAN, &[1.0], &[0.0, 1.0], Tolerance::default());
        assert!(matches!(r, Err(Error::NotANumber(_))));
    }

    #[test]
    fn descending_grid_rejected() {
        let r = integrate(|_, _: &[f64], dy: &mut [f64]| dy[0] = 0.0, &[1.0], &[1.0, 0.0], Tolerance::default());
        assert!(r.is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let out = integrate(|_, y: &[f32], dy: &mut [f32]| dy[0] = -y[0], &[1.0f32], &[0.0, 1.0], Tolerance::new(1e-6, 1e-5)).unwrap();
        assert!((out[1][0] - (-1.0f32).exp()).abs() < 1e-4);
    }
}
