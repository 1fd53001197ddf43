//! Kolmogorov–Smirnov statistics with asymptotic critical values.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
}

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`; 1.6276 at 1%.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Asymptotic tail `P(K > lambda)` of the Kolmogorov distribution.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn result(statistic: f64, n_eff: f64, alpha: f64) -> KsResult {
    let sq = n_eff.sqrt();
    let critical = ks_coefficient(alpha) / sq;
    KsResult {
        statistic,
        critical,
        p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * statistic),
        alpha,
        pass: statistic < critical,
    }
}

/// Supremum distance between the empirical CDF of `values` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

pub fn ks_one_sample<F: Fn(f64) -> f64>(values: &[f64], cdf: F, alpha: f64) -> KsResult {
    result(ks_statistic(values, cdf), values.len() as f64, alpha)
}

/// Two-sample statistic; the critical value is `c(alpha) sqrt((n + m) / (n m))`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    result(d, n * m / (n + m), alpha)
}
