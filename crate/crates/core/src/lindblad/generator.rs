use std::collections::BTreeMap;

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{enumerate_fock, FockSpace, OccupationState};
use crate::ode::OdeValue;
use crate::scalar::Real;
use crate::system::{ParticleStatistics, Truncation, ValidatedSpec};

/// Largest basis size accepted by the dense quantum path.
pub const MAX_DIM: usize = 64;

/// Linear generator acting on vectorized density matrices, stored as CSR.
#[derive(Clone, Debug)]
pub struct Superoperator<T> {
    dim: usize,
    basis: FockSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex<T>>,
    leakage_rates: Vec<T>,
}

struct Assembler<T> {
    dim: usize,
    rows: Vec<BTreeMap<usize, Complex<T>>>,
}

impl<T: Real> Assembler<T> {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![BTreeMap::new(); dim * dim],
        }
    }

    fn add(&mut self, row: (usize, usize), col: (usize, usize), value: Complex<T>) {
        if value.re.is_zero() && value.im.is_zero() {
            return;
        }
        let entry = self.rows[row.0 * self.dim + row.1]
            .entry(col.0 * self.dim + col.1)
            .or_insert_with(|| Complex::new(T::zero(), T::zero()));
        *entry = *entry + value;
    }

    fn finish(self, basis: FockSpace, leakage_rates: Vec<T>) -> Superoperator<T> {
        let mut row_ptr = Vec::with_capacity(self.rows.len() + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in self.rows {
            for (c, v) in row {
                if !(v.re.is_zero() && v.im.is_zero()) {
                    cols.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Superoperator {
            dim: self.dim,
            basis,
            row_ptr,
            cols,
            values,
            leakage_rates,
        }
    }
}

fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

fn int<T: Real>(n: i64) -> T {
    T::from_i64(n).unwrap()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        Err(Error::DimensionTooLarge { dim, limit: MAX_DIM })
    } else {
        Ok(())
    }
}

/// Generator of the single-particle dephasing master equation in the mode
/// basis: `d rho_mn/dt = -i sum_l (V_ml rho_ln - rho_ml V_ln) - (i Omega_mn + gamma_mn) rho_mn`.
pub fn build_single_particle_generator<T: Real>(spec: &ValidatedSpec<T>) -> Result<Superoperator<T>> {
    if spec.statistics() != ParticleStatistics::Single {
        return Err(Error::StatisticsMismatch(
            "single-particle generator needs single-particle statistics".into(),
        ));
    }
    if spec.spec().has_pump_or_loss() {
        return Err(Error::PumpLossUnsupported(
            "the single-particle sector has no pump or loss".into(),
        ));
    }
    let n = spec.n_modes();
    check_dim(n)?;
    let i = c(T::zero(), T::one());
    let mut asm = Assembler::new(n);
    for mu in 0..n {
        for nu in 0..n {
            for lambda in 0..n {
                asm.add((mu, nu), (lambda, nu), -i * *spec.coupling(mu, lambda));
                asm.add((mu, nu), (mu, lambda), i * *spec.coupling(lambda, nu));
            }
            asm.add(
                (mu, nu),
                (mu, nu),
                -(i * *spec.omega_pair(mu, nu) + c(*spec.gamma_pair(mu, nu), T::zero())),
            );
        }
    }
    let basis = enumerate_fock(n, ParticleStatistics::Single, Truncation::None)?;
    Ok(asm.finish(basis, vec![T::zero(); n]))
}

/// Matrix element of `a_to^dagger a_from` between `state` and the state with
/// one particle moved from `from` to `to`: boson `sqrt(m_from (m_to + 1))`,
/// fermion `m_from (1 - m_to)`.
fn hop_amplitude<T: Real>(statistics: ParticleStatistics, state: &OccupationState, to: usize, from: usize) -> T {
    let (m_to, m_from) = (i64::from(state[to]), i64::from(state[from]));
    match statistics {
        ParticleStatistics::Fermion => int(m_from * (1 - m_to)),
        _ => int::<T>(m_from * (m_to + 1)).sqrt(),
    }
}

/// `<m + e_mode| a^dagger |m> <n + e_mode| a^dagger |n>^*`. Taken as the root
/// of the integer product so population entries stay exact.
fn raise_pair_amplitude<T: Real>(statistics: ParticleStatistics, m: u32, n: u32) -> T {
    let (m, n) = (i64::from(m), i64::from(n));
    match statistics {
        ParticleStatistics::Fermion => int((1 - m) * (1 - n)),
        _ => int::<T>((m + 1) * (n + 1)).sqrt(),
    }
}

/// Generator of the many-body dephasing master equation with pump and loss on
/// an enumerated Fock space.
///
/// Pump processes whose target lies beyond the truncation keep their outflow
/// on the diagonal but have no destination; the per-state rate of that
/// outflow is reported by [`Superoperator::leakage_rates`].
pub fn build_many_body_generator<T: Real>(spec: &ValidatedSpec<T>, space: &FockSpace) -> Result<Superoperator<T>> {
    let statistics = spec.statistics();
    if statistics == ParticleStatistics::Single {
        return Err(Error::StatisticsMismatch(
            "use the single-particle generator for a single particle".into(),
        ));
    }
    if space.statistics() != statistics {
        return Err(Error::StatisticsMismatch(format!(
            "spec is {:?} but space is {:?}",
            statistics,
            space.statistics()
        )));
    }
    if space.n_modes() != spec.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_modes(),
            got: space.n_modes(),
        });
    }
    let dim = space.len();
    check_dim(dim)?;

    let s = spec.spec();
    let n_modes = spec.n_modes();
    let i = c(T::zero(), T::one());
    let half = T::from_f64_lossy(0.5);
    let sign = statistics.sign();
    let mut asm = Assembler::new(dim);

    for (a, m) in space.iter() {
        for (b, n) in space.iter() {
            let row = (a, b);
            let mut diag = c(T::zero(), T::zero());
            for mode in 0..n_modes {
                let dm = int::<T>(i64::from(m[mode]) - i64::from(n[mode]));
                diag = diag - i * s.omega[mode] * dm;
                diag = diag - c(half * s.gamma[mode] * dm * dm, T::zero());
                let occ_sum = int::<T>(i64::from(m[mode]) + i64::from(n[mode]));
                diag = diag - c(half * s.theta[mode] * occ_sum, T::zero());
                let blocked = int::<T>(2 + sign * (i64::from(m[mode]) + i64::from(n[mode])));
                diag = diag - c(half * s.eta[mode] * blocked, T::zero());
            }
            asm.add(row, row, diag);

            for mu in 0..n_modes {
                for nu in 0..n_modes {
                    if mu == nu {
                        continue;
                    }
                    let v = *spec.coupling(mu, nu);
                    if v.re.is_zero() && v.im.is_zero() {
                        continue;
                    }
                    // H rho: <m| a_mu^dag a_nu |k> with k = m - e_mu + e_nu.
                    if let Some(k) = m.hopped(nu, mu) {
                        if let Some(kr) = space.rank(&k) {
                            let amp = hop_amplitude::<T>(statistics, &k, mu, nu);
                            asm.add(row, (kr, b), -i * v * amp);
                        }
                    }
                    // rho H: <k| a_mu^dag a_nu |n> with k = n + e_mu - e_nu.
                    if let Some(k) = n.hopped(mu, nu) {
                        if let Some(kr) = space.rank(&k) {
                            let amp = hop_amplitude::<T>(statistics, n, mu, nu);
                            asm.add(row, (a, kr), i * v * amp);
                        }
                    }
                }
            }

            for mode in 0..n_modes {
                let theta = s.theta[mode];
                if !theta.is_zero() {
                    let (mu, nu) = (m.added(mode), n.added(mode));
                    if let (Some(ra), Some(rb)) = (space.rank(&mu), space.rank(&nu)) {
                        let amp = raise_pair_amplitude::<T>(statistics, m[mode], n[mode]);
                        asm.add(row, (ra, rb), c(theta * amp, T::zero()));
                    }
                }
                let eta = s.eta[mode];
                if !eta.is_zero() {
                    if let (Some(mu), Some(nu)) = (m.removed(mode), n.removed(mode)) {
                        if let (Some(ra), Some(rb)) = (space.rank(&mu), space.rank(&nu)) {
                            let amp = raise_pair_amplitude::<T>(statistics, mu[mode], nu[mode]);
                            asm.add(row, (ra, rb), c(eta * amp, T::zero()));
                        }
                    }
                }
            }
        }
    }

    let leakage_rates = space
        .states()
        .iter()
        .map(|m| {
            (0..n_modes)
                .filter(|&mode| space.rank(&m.added(mode)).is_none())
                .map(|mode| s.eta[mode] * int::<T>(statistics.exchange_factor(m[mode])))
                .fold(T::zero(), |acc, r| acc + r)
        })
        .collect();
    Ok(asm.finish(space.clone(), leakage_rates))
}

impl<T: Real> Superoperator<T> {
    /// Basis size `d`; the superoperator is `d^2 x d^2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &FockSpace {
        &self.basis
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Rate at which probability in each basis state leaves the truncated space.
    pub fn leakage_rates(&self) -> &[T] {
        &self.leakage_rates
    }

    /// Entry of the superoperator between vectorized indices.
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Nonzero entries of one row as `(col, value)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn apply_into(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = <Complex<T> as OdeValue<T>>::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc = acc + self.values[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut y = vec![Complex::new(T::zero(), T::zero()); x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// Largest `|tr L[E_ab]|` over matrix units; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> T {
        let d = self.dim;
        let mut column_trace = vec![Complex::new(T::zero(), T::zero()); d * d];
        for i in 0..d {
            for (col, v) in self.row(i * d + i) {
                column_trace[col] = column_trace[col] + v;
            }
        }
        column_trace.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// Block coupling populations to populations: `out[a][b]` is the rate
    /// coefficient of `rho_bb` in `d rho_aa / dt`.
    pub fn population_block(&self) -> Vec<Vec<Complex<T>>> {
        let d = self.dim;
        (0..d)
            .map(|a| (0..d).map(|b| self.entry(a * d + a, b * d + b)).collect())
            .collect()
    }

    /// Largest coefficient linking a population row to any coherence.
    pub fn population_to_coherence_coupling(&self) -> T {
        let d = self.dim;
        (0..d)
            .flat_map(|a| self.row(a * d + a).filter(move |(col, _)| col / d != col % d))
            .map(|(_, v)| v.norm())
            .fold(T::zero(), T::max)
    }

    /// Number of nonzero entries in rows of coherences (`rho_ab`, `a != b`).
    pub fn coherence_row_nnz(&self) -> usize {
        let d = self.dim;
        (0..d * d)
            .filter(|r| r / d != r % d)
            .map(|r| self.row_ptr[r + 1] - self.row_ptr[r])
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>>
    where
        T: RealField,
    {
        let n = self.dim * self.dim;
        let mut m = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
        for r in 0..n {
            for (col, v) in self.row(r) {
                m[(r, col)] = v;
            }
        }
        m
    }

    /// `exp(t L) vec(rho0)` by dense matrix exponential; the reference
    /// solution for checking the integrator.
    pub fn exp_apply(&self, rho0: &[Complex<T>], t: T) -> Vec<Complex<T>>
    where
        T: RealField,
    {
        let n = self.dim * self.dim;
        let scaled = self.to_dense() * Complex::new(t, T::zero());
        let propagator = scaled.exp();
        let x = nalgebra::DVector::from_column_slice(rho0);
        let y = propagator * x;
        (0..n).map(|k| y[k]).collect()
    }
}
