use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    #[default]
    FreedmanDiaconis,
    Bins(usize),
    Edges(Vec<f64>),
}

const MAX_BINS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `counts / total`, where `total` may include censored samples.
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W, seed: Option<u64>) -> io::Result<()> {
        if let Some(seed) = seed {
            writeln!(w, "# seed={seed}")?;
        }
        writeln!(w, "bin_lo,bin_hi,mass")?;
        for (k, m) in self.masses.iter().enumerate() {
            writeln!(w, "{},{},{}", self.edges[k], self.edges[k + 1], m)?;
        }
        Ok(())
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn edges_for(sorted: &[f64], binning: &Binning) -> Result<Vec<f64>> {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let bins = match binning {
        Binning::Edges(e) => {
            if e.len() < 2 || e.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidArgument("histogram edges must be strictly increasing".into()));
            }
            return Ok(e.clone());
        }
        Binning::Bins(0) => return Err(Error::InvalidArgument("need at least one bin".into())),
        Binning::Bins(n) => *n,
        Binning::FreedmanDiaconis => {
            let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
            let h = 2.0 * iqr / (sorted.len() as f64).cbrt();
            if h > 0.0 && hi > lo {
                (((hi - lo) / h).ceil() as usize).clamp(1, MAX_BINS)
            } else {
                1
            }
        }
    };
    if hi > lo {
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + w * k as f64).collect();
        edges.push(hi);
        Ok(edges)
    } else {
        Ok(vec![lo, lo + 1.0])
    }
}

/// Histogram of `sorted` normalized by `total` (at least `sorted.len()`).
/// Values outside explicit edges are not counted.
pub fn histogram(sorted: &[f64], binning: &Binning, total: usize) -> Result<Histogram> {
    if sorted.is_empty() {
        return Ok(Histogram {
            edges: Vec::new(),
            counts: Vec::new(),
            masses: Vec::new(),
        });
    }
    let edges = edges_for(sorted, binning)?;
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &v in sorted {
        if v < edges[0] || v > edges[bins] {
            continue;
        }
        let k = edges.partition_point(|e| *e <= v).saturating_sub(1).min(bins - 1);
        counts[k] += 1;
    }
    let masses = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Histogram { edges, counts, masses })
}

/// Non-negative samples with summary statistics and a histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    /// Samples in draw order.
    pub values: Vec<f64>,
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub histogram: Histogram,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, binning: &Binning) -> Result<Self> {
        Self::with_total(values, binning, None)
    }

    /// Histogram masses are normalized by `total` when given, so that
    /// censored samples account for the remaining probability.
    pub fn with_total(values: Vec<f64>, binning: &Binning, total: Option<usize>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("sample {v} is not a non-negative time")));
        }
        let count = values.len();
        let total = total.unwrap_or(count).max(count);
        let mean = if count > 0 { values.iter().sum::<f64>() / count as f64 } else { f64::NAN };
        let variance = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let histogram = histogram(&sorted, binning, total)?;
        Ok(Self {
            values,
            count,
            mean,
            variance,
            histogram,
        })
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut s = self.values.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Fraction of samples strictly greater than `t`.
    pub fn empirical_tail(&self, t: f64) -> f64 {
        self.values.iter().filter(|&&v| v > t).count() as f64 / self.count as f64
    }

    pub fn write_values_csv<W: Write>(&self, mut w: W, seed: Option<u64>) -> io::Result<()> {
        if let Some(seed) = seed {
            writeln!(w, "# seed={seed}")?;
        }
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}
