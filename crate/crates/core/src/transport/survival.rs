use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Survival of a walker on transient sites `0..L`, reflecting at 0 and
/// absorbed on reaching `L`, by eigen-decomposition of the symmetric
/// `L x L` generator `dS_n/dt = Gamma (S_{n+1} + S_{n-1} - 2 S_n)`,
/// `S_{-1} = S_0`, `S_L = 0`.
#[derive(Clone, Debug)]
pub struct SurvivalOracle {
    transient: usize,
    gamma: f64,
    /// Decay rates `mu_k > 0` (negated generator eigenvalues).
    rates: Vec<f64>,
    /// `weights[k][n] = v_k[n] (v_k . 1)`, so `S_n(t) = sum_k weights[k][n] e^{-mu_k t}`.
    weights: Vec<Vec<f64>>,
}

impl SurvivalOracle {
    pub fn new(transient: usize, gamma: f64) -> Result<Self> {
        if transient == 0 {
            return Err(Error::InvalidChain("need at least one transient site".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidChain("hop rate must be positive".into()));
        }
        let l = transient;
        let mut a = DMatrix::<f64>::zeros(l, l);
        for n in 0..l {
            a[(n, n)] = if n == 0 { -gamma } else { -2.0 * gamma };
            if n + 1 < l {
                a[(n, n + 1)] = gamma;
                a[(n + 1, n)] = gamma;
            }
        }
        let eig = SymmetricEigen::new(a);
        let mut rates = Vec::with_capacity(l);
        let mut weights = Vec::with_capacity(l);
        for k in 0..l {
            let v = eig.eigenvectors.column(k);
            let overlap: f64 = v.iter().sum();
            rates.push(-eig.eigenvalues[k]);
            weights.push(v.iter().map(|x| x * overlap).collect());
        }
        Ok(Self {
            transient,
            gamma,
            rates,
            weights,
        })
    }

    pub fn transient(&self) -> usize {
        self.transient
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Decay rates of the modes, in the order of `weights`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn weights(&self, n: usize) -> Vec<f64> {
        self.weights.iter().map(|w| w[n]).collect()
    }

    /// `S_n(t)`.
    pub fn survival(&self, n: usize, t: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.rates)
            .map(|(w, mu)| w[n] * (-mu * t).exp())
            .sum()
    }

    /// First-passage density `-dS_n/dt`.
    pub fn passage_density(&self, n: usize, t: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.rates)
            .map(|(w, mu)| w[n] * mu * (-mu * t).exp())
            .sum()
    }
}

/// `S_n(t)` from the transient generator.
pub fn survival_function_oracle(n: usize, t: f64, transient: usize, gamma: f64) -> Result<f64> {
    if n >= transient {
        return Err(Error::InvalidArgument(format!("start site {n} is not transient")));
    }
    Ok(SurvivalOracle::new(transient, gamma)?.survival(n, t))
}

/// Mode data of the printed closed form: `q_k = (k + 1/2) pi / L`,
/// `lambda_k = 2 Gamma (1 - cos q_k)` and the coefficient
/// `(1/L) (-1)^k cos(q_k (n + 1/2)) / sin(q_k / 2)`.
pub(crate) fn paper_modes(n: usize, l: usize, gamma: f64) -> Vec<(f64, f64)> {
    let lf = l as f64;
    (0..l)
        .map(|k| {
            let q = (k as f64 + 0.5) * std::f64::consts::PI / lf;
            let lambda = 2.0 * gamma * (1.0 - q.cos());
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let coeff = sign * (q * (n as f64 + 0.5)).cos() / (q / 2.0).sin() / lf;
            (coeff, lambda)
        })
        .collect()
}

/// `S_n(t)` evaluated literally from the printed closed form.
pub fn survival_function_paper(n: usize, t: f64, l: usize, gamma: f64) -> f64 {
    paper_modes(n, l, gamma)
        .into_iter()
        .map(|(c, lambda)| c * (-lambda * t).exp())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalComparison {
    pub transient: usize,
    pub gamma: f64,
    pub t_max: f64,
    /// `S_n(0) - 1` of the printed form, per start site.
    pub initial_deviation: Vec<f64>,
    /// Largest `|printed - oracle|` over the time grid, per start site.
    pub max_deviation: Vec<f64>,
    /// Time at which the largest deviation occurs, per start site.
    pub argmax: Vec<f64>,
}

impl SurvivalComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }
}

/// Compares the printed closed form against the oracle on `points + 1`
/// uniform times in `[0, t_max]`.
pub fn compare_survival(transient: usize, gamma: f64, t_max: f64, points: usize) -> Result<SurvivalComparison> {
    let oracle = SurvivalOracle::new(transient, gamma)?;
    let grid: Vec<f64> = (0..=points).map(|k| t_max * k as f64 / points.max(1) as f64).collect();
    let mut initial_deviation = Vec::with_capacity(transient);
    let mut max_deviation = Vec::with_capacity(transient);
    let mut argmax = Vec::with_capacity(transient);
    for n in 0..transient {
        initial_deviation.push(survival_function_paper(n, 0.0, transient, gamma) - 1.0);
        let (mut worst, mut at) = (0.0f64, 0.0);
        for &t in &grid {
            let d = (survival_function_paper(n, t, transient, gamma) - oracle.survival(n, t)).abs();
            if d > worst {
                worst = d;
                at = t;
            }
        }
        max_deviation.push(worst);
        argmax.push(at);
    }
    Ok(SurvivalComparison {
        transient,
        gamma,
        t_max,
        initial_deviation,
        max_deviation,
        argmax,
    })
}
