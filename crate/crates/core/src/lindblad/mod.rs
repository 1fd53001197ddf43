//! Full quantum master equations as sparse linear maps on vectorized density
//! matrices, for desk-scale bases.
//!
//! A density matrix of basis size `d` is vectorized row-major: element
//! `rho[a][b]` lives at index `a * d + b`.

mod density;
mod generator;

pub use density::{extract_diagonals, DensityMatrix};
pub use generator::{build_many_body_generator, build_single_particle_generator, Superoperator, MAX_DIM};

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::ode::{integrate_observed, Tolerance};
use crate::scalar::Real;

/// Leakage (probability lost through truncation) that aborts a run.
pub const LEAKAGE_LIMIT: f64 = 1e-3;

/// Density matrices on a time grid, plus the leaked probability at each time.
#[derive(Clone, Debug)]
pub struct DensityTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub leakage: Vec<T>,
}

impl<T: Real> DensityTrajectory<T> {
    /// Diagonal probabilities at every time.
    pub fn diagonals(&self) -> Vec<Vec<T>> {
        self.states.iter().map(extract_diagonals).collect()
    }

    /// CSV with columns `t`, `p_<rank>`..., `leakage`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.states.first().map_or(0, |r| r.dim());
        write!(w, "t")?;
        for rank in 0..dim {
            write!(w, ",p_{rank}")?;
        }
        writeln!(w, ",leakage")?;
        for ((t, rho), leak) in self.times.iter().zip(&self.states).zip(&self.leakage) {
            write!(w, "{}", t.to_f64_lossy())?;
            for p in extract_diagonals(rho) {
                write!(w, ",{}", p.to_f64_lossy())?;
            }
            writeln!(w, ",{}", leak.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Integrates `d rho / dt = L[rho]` and samples it on `grid`.
///
/// Each output is re-symmetrized to be exactly Hermitian. Runs whose leaked
/// probability exceeds [`LEAKAGE_LIMIT`] are aborted.
pub fn evolve_density<T: Real>(
    generator: &Superoperator<T>,
    rho0: &DensityMatrix<T>,
    grid: &[T],
    tol: Tolerance<T>,
) -> Result<DensityTrajectory<T>> {
    let dim = generator.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho0.dim(),
        });
    }
    let herm_tol = T::from_f64_lossy(1e-12);
    if !rho0.is_hermitian(herm_tol) {
        return Err(Error::InvalidState("initial density matrix is not Hermitian".into()));
    }
    let trace0 = rho0.trace().re;
    if (trace0 - T::one()).abs() > T::from_f64_lossy(1e-9) {
        return Err(Error::InvalidState(format!(
            "initial trace {} is not 1",
            trace0.to_f64_lossy()
        )));
    }

    let limit = T::from_f64_lossy(LEAKAGE_LIMIT);
    let mut leakage = Vec::with_capacity(grid.len());
    let mut rhs = |_t: T, y: &[_], dy: &mut [_]| generator.apply_into(y, dy);
    let vectors = integrate_observed(&mut rhs, rho0.as_slice(), grid, tol, |t, y| {
        DensityMatrix::hermitize_slice(dim, y);
        let trace: T = (0..dim).map(|i| y[i * dim + i].re).sum();
        let leak = trace0 - trace;
        if leak > limit {
            return Err(Error::Leakage {
                t: t.to_f64_lossy(),
                leakage: leak.to_f64_lossy(),
                limit: LEAKAGE_LIMIT,
            });
        }
        leakage.push(leak.max(T::zero()));
        Ok(())
    })?;
    Ok(DensityTrajectory {
        times: grid.to_vec(),
        states: vectors
            .into_iter()
            .map(|v| DensityMatrix::from_vec(dim, v))
            .collect(),
        leakage,
    })
}
