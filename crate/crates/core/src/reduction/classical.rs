use std::io::{self, Write};

use serde::Serialize;

use super::transition_rates;
use crate::error::{Error, Result};
use crate::fock::{FockSpace, OccupationState};
use crate::scalar::Scalar;
use crate::system::{ParticleStatistics, ValidatedSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// One particle moves from `from` to `to`.
    Hop { to: usize, from: usize },
    Pump(usize),
    Loss(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Channel<T> {
    pub kind: ChannelKind,
    /// `W_{to from}`, `eta` or `theta`.
    pub coefficient: T,
}

/// Jump channels of the classical process on occupation vectors.
///
/// Hop `mu <- nu` fires at `W_{mu nu} (1 + s m_mu) m_nu`, pumping into `mu`
/// at `eta_mu (1 + s m_mu)`, loss from `mu` at `theta_mu m_mu`, where `s` is
/// `+1` for bosons, `-1` for fermions and `0` for a single particle.
#[derive(Clone, Debug)]
pub struct ClassicalGenerator<T> {
    n_modes: usize,
    statistics: ParticleStatistics,
    channels: Vec<Channel<T>>,
    by_mode: Vec<Vec<usize>>,
}

impl<T: Scalar> ClassicalGenerator<T> {
    pub fn new(n_modes: usize, statistics: ParticleStatistics, channels: Vec<Channel<T>>) -> Result<Self> {
        let mut by_mode = vec![Vec::new(); n_modes];
        for (id, ch) in channels.iter().enumerate() {
            if ch.coefficient < T::zero() || !ch.coefficient.is_finite_value() {
                return Err(Error::NegativeRate {
                    field: "channel",
                    index: id,
                });
            }
            let modes: Vec<usize> = match ch.kind {
                ChannelKind::Hop { to, from } => {
                    if to == from {
                        return Err(Error::DiagonalCoupling(to));
                    }
                    vec![to, from]
                }
                ChannelKind::Pump(m) | ChannelKind::Loss(m) => vec![m],
            };
            for m in modes {
                if m >= n_modes {
                    return Err(Error::InvalidArgument(format!("channel {id} names mode {m}")));
                }
                by_mode[m].push(id);
            }
        }
        if statistics == ParticleStatistics::Single
            && channels.iter().any(|c| !matches!(c.kind, ChannelKind::Hop { .. }))
        {
            return Err(Error::PumpLossUnsupported(
                "a single particle cannot be pumped or lost".into(),
            ));
        }
        Ok(Self {
            n_modes,
            statistics,
            channels,
            by_mode,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn statistics(&self) -> ParticleStatistics {
        self.statistics
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    /// Channels whose rate depends on the occupation of `mode`.
    pub fn channels_touching(&self, mode: usize) -> &[usize] {
        &self.by_mode[mode]
    }

    fn factor(&self, occupation: u32) -> T {
        T::from_int(self.statistics.exchange_factor(occupation).max(0))
    }

    /// Rate of channel `id` in state `m`.
    pub fn rate(&self, id: usize, m: &[u32]) -> T {
        let ch = &self.channels[id];
        match ch.kind {
            ChannelKind::Hop { to, from } => {
                if m[from] == 0 {
                    return T::zero();
                }
                ch.coefficient.clone() * self.factor(m[to]) * T::from_int(i64::from(m[from]))
            }
            ChannelKind::Pump(mu) => ch.coefficient.clone() * self.factor(m[mu]),
            ChannelKind::Loss(mu) => ch.coefficient.clone() * T::from_int(i64::from(m[mu])),
        }
    }

    /// Fires channel `id` in place; callers only fire channels with positive rate.
    pub fn apply_in_place(&self, id: usize, m: &mut [u32]) {
        match self.channels[id].kind {
            ChannelKind::Hop { to, from } => {
                m[from] -= 1;
                m[to] += 1;
            }
            ChannelKind::Pump(mu) => m[mu] += 1,
            ChannelKind::Loss(mu) => m[mu] -= 1,
        }
    }

    /// Successor state, or `None` if the channel cannot fire.
    pub fn apply(&self, id: usize, m: &OccupationState) -> Option<OccupationState> {
        if self.rate(id, m) <= T::zero() {
            return None;
        }
        let mut next = m.clone().into_inner();
        self.apply_in_place(id, &mut next);
        Some(OccupationState::new(next))
    }

    /// Modes whose occupation changes when channel `id` fires.
    pub fn affected_modes(&self, id: usize) -> (usize, Option<usize>) {
        match self.channels[id].kind {
            ChannelKind::Hop { to, from } => (to, Some(from)),
            ChannelKind::Pump(mu) | ChannelKind::Loss(mu) => (mu, None),
        }
    }

    /// Assembles the rate matrix on `space` (column convention, `dP/dt = Q P`).
    /// Transitions leaving the space are dropped and reported as leakage.
    pub fn rate_matrix(&self, space: &FockSpace) -> Result<RateMatrix<T>> {
        if space.n_modes() != self.n_modes || space.statistics() != self.statistics {
            return Err(Error::StatisticsMismatch("space does not match the generator".into()));
        }
        let dim = space.len();
        let mut entries = Vec::new();
        let mut diagonal = vec![T::zero(); dim];
        let mut leakage = vec![T::zero(); dim];
        for (col, m) in space.iter() {
            for id in 0..self.channels.len() {
                let r = self.rate(id, m);
                if r <= T::zero() {
                    continue;
                }
                let mut next = m.clone().into_inner();
                self.apply_in_place(id, &mut next);
                match space.rank(&OccupationState::new(next)) {
                    Some(row) => {
                        diagonal[col] = diagonal[col].clone() - r.clone();
                        entries.push((row, col, r));
                    }
                    None => leakage[col] = leakage[col].clone() + r,
                }
            }
        }
        Ok(RateMatrix {
            dim,
            entries,
            diagonal,
            leakage,
        })
    }
}

/// Channels from the eliminated transition rates plus pump and loss.
pub fn build_classical_generator<T: Scalar>(spec: &ValidatedSpec<T>) -> Result<ClassicalGenerator<T>> {
    let w = transition_rates(spec)?;
    let n = spec.n_modes();
    let s = spec.spec();
    let mut channels = Vec::new();
    for nu in 0..n {
        for mu in 0..n {
            if mu != nu && *w.get(mu, nu) > T::zero() {
                channels.push(Channel {
                    kind: ChannelKind::Hop { to: mu, from: nu },
                    coefficient: w.get(mu, nu).clone(),
                });
            }
        }
    }
    for mu in 0..n {
        if s.eta[mu] > T::zero() {
            channels.push(Channel {
                kind: ChannelKind::Pump(mu),
                coefficient: s.eta[mu].clone(),
            });
        }
    }
    for mu in 0..n {
        if s.theta[mu] > T::zero() {
            channels.push(Channel {
                kind: ChannelKind::Loss(mu),
                coefficient: s.theta[mu].clone(),
            });
        }
    }
    ClassicalGenerator::new(n, spec.statistics(), channels)
}

/// Sparse rate matrix: off-diagonal `(row, col, rate)` triplets; each column's
/// diagonal is minus its retained outflow.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix<T> {
    dim: usize,
    entries: Vec<(usize, usize, T)>,
    diagonal: Vec<T>,
    leakage: Vec<T>,
}

impl<T: Scalar> RateMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn off_diagonal(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    /// Outflow rate of each state to states outside the space.
    pub fn leakage(&self) -> &[T] {
        &self.leakage
    }

    pub fn apply(&self, p: &[T]) -> Vec<T> {
        let mut out: Vec<T> = p
            .iter()
            .zip(&self.diagonal)
            .map(|(x, d)| x.clone() * d.clone())
            .collect();
        for (r, c, v) in &self.entries {
            out[*r] = out[*r].clone() + v.clone() * p[*c].clone();
        }
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<T> {
        let mut q = vec![T::zero(); self.dim * self.dim];
        for (k, d) in self.diagonal.iter().enumerate() {
            q[k * self.dim + k] = d.clone();
        }
        for (r, c, v) in &self.entries {
            q[r * self.dim + c] = q[r * self.dim + c].clone() + v.clone();
        }
        q
    }

    /// `sum_row Q[row][col]` per column; zero without leakage.
    pub fn column_sums(&self) -> Vec<T> {
        let mut sums = self.diagonal.clone();
        for (_, c, v) in &self.entries {
            sums[*c] = sums[*c].clone() + v.clone();
        }
        sums
    }

    /// Triplet CSV `row,col,rate` including the diagonal.
    pub fn write_triplet_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,rate")?;
        let mut all: Vec<(usize, usize, f64)> = self
            .entries
            .iter()
            .map(|(r, c, v)| (*r, *c, v.to_f64_lossy()))
            .chain(self.diagonal.iter().enumerate().map(|(k, d)| (k, k, d.to_f64_lossy())))
            .collect();
        all.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (r, c, v) in all {
            writeln!(w, "{r},{c},{v}")?;
        }
        Ok(())
    }
}
