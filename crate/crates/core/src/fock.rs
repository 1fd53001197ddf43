//! Occupation-number states and enumerated Fock spaces.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::system::{ParticleStatistics, Truncation};

/// Occupation numbers `m_mu`, one per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState(Vec<u32>);

impl OccupationState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self(vec![0; n_modes])
    }

    /// One particle in `mode`; the basis vector `e_mode`.
    pub fn unit(n_modes: usize, mode: usize) -> Self {
        let mut m = vec![0; n_modes];
        m[mode] = 1;
        Self(m)
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&m| m as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }

    /// Moves one particle from `from` to `to` (adds `e_to - e_from`).
    pub fn hopped(&self, to: usize, from: usize) -> Option<Self> {
        if self.0[from] == 0 {
            return None;
        }
        let mut m = self.0.clone();
        m[from] -= 1;
        m[to] += 1;
        Some(Self(m))
    }

    pub fn added(&self, mode: usize) -> Self {
        let mut m = self.0.clone();
        m[mode] += 1;
        Self(m)
    }

    pub fn removed(&self, mode: usize) -> Option<Self> {
        if self.0[mode] == 0 {
            return None;
        }
        let mut m = self.0.clone();
        m[mode] -= 1;
        Some(Self(m))
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&m| m <= 1)
    }
}

impl Deref for OccupationState {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.0 {
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Enumerated basis with a dense rank for every admissible state.
#[derive(Clone, Debug)]
pub struct FockSpace {
    n_modes: usize,
    statistics: ParticleStatistics,
    truncation: Truncation,
    states: Vec<OccupationState>,
    index: HashMap<OccupationState, usize>,
}

impl PartialEq for FockSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n_modes == other.n_modes
            && self.statistics == other.statistics
            && self.states == other.states
    }
}

impl FockSpace {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn statistics(&self) -> ParticleStatistics {
        self.statistics
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn rank(&self, state: &OccupationState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn unrank(&self, rank: usize) -> Option<&OccupationState> {
        self.states.get(rank)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &OccupationState)> {
        self.states.iter().enumerate()
    }

    /// The states with exactly `total` particles, in the same relative order.
    pub fn shell(&self, total: usize) -> FockSpace {
        let states: Vec<OccupationState> = self.states.iter().filter(|s| s.total() == total).cloned().collect();
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        FockSpace {
            n_modes: self.n_modes,
            statistics: self.statistics,
            truncation: Truncation::FixedTotal(total),
            states,
            index,
        }
    }

    /// Mean occupation of every mode under the distribution `p` over ranks.
    pub fn mean_occupations(&self, p: &[f64]) -> Vec<f64> {
        let mut mean = vec![0.0; self.n_modes];
        for (state, &w) in self.states.iter().zip(p) {
            for (acc, &m) in mean.iter_mut().zip(state.iter()) {
                *acc += w * f64::from(m);
            }
        }
        mean
    }
}

/// Pushes every composition of `total` into `modes` parts, in ascending
/// lexicographic order, with entries capped at `cap`.
fn compositions(modes: usize, total: usize, cap: usize, prefix: &mut Vec<u32>, out: &mut Vec<OccupationState>) {
    if prefix.len() + 1 == modes {
        if total <= cap {
            prefix.push(total as u32);
            out.push(OccupationState(prefix.clone()));
            prefix.pop();
        }
        return;
    }
    for first in 0..=total.min(cap) {
        prefix.push(first as u32);
        compositions(modes, total - first, cap, prefix, out);
        prefix.pop();
    }
}

/// Enumerates the admissible occupation vectors.
///
/// Shells of equal particle number appear in ascending order and each shell
/// is lexicographically ascending. A single particle is the exception: its
/// rank is the mode index. Fermions ignore the truncation.
pub fn enumerate_fock(n_modes: usize, statistics: ParticleStatistics, truncation: Truncation) -> Result<FockSpace> {
    if n_modes == 0 {
        return Err(Error::NoModes);
    }
    let mut states = Vec::new();
    match statistics {
        ParticleStatistics::Single => {
            states.extend((0..n_modes).map(|mu| OccupationState::unit(n_modes, mu)));
        }
        ParticleStatistics::Fermion => {
            for shell in 0..=n_modes {
                compositions(n_modes, shell, 1, &mut Vec::new(), &mut states);
            }
        }
        ParticleStatistics::Boson => {
            let shells = match truncation {
                Truncation::None => {
                    return Err(Error::Truncation(
                        "bosonic Fock space needs a fixed or maximum particle number".into(),
                    ))
                }
                Truncation::FixedTotal(m) => m..=m,
                Truncation::MaxTotal(m) => 0..=m,
            };
            for shell in shells {
                compositions(n_modes, shell, shell, &mut Vec::new(), &mut states);
            }
        }
    }
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let truncation = match statistics {
        ParticleStatistics::Boson => truncation,
        _ => Truncation::None,
    };
    Ok(FockSpace {
        n_modes,
        statistics,
        truncation,
        states,
        index,
    })
}
