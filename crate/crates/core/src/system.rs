//! System description: mode energies, couplings, dephasing, pump and loss.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exchange statistics of the particles.
///
/// `Single` is one distinguishable particle: the basis is the set of modes
/// and no stimulation or blocking factor appears.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleStatistics {
    Boson,
    Fermion,
    Single,
}

impl ParticleStatistics {
    /// The exchange sign `s`: +1 bosons, -1 fermions, 0 for a single particle.
    pub fn sign(self) -> i64 {
        match self {
            ParticleStatistics::Boson => 1,
            ParticleStatistics::Fermion => -1,
            ParticleStatistics::Single => 0,
        }
    }

    /// `1 + s m`, the stimulation (bosons) or blocking (fermions) factor.
    pub fn exchange_factor(self, occupation: u32) -> i64 {
        1 + self.sign() * i64::from(occupation)
    }
}

/// How the bosonic Fock space is cut off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Truncation {
    /// No cutoff. Only meaningful for fermions and a single particle.
    None,
    /// Exactly this many particles.
    FixedTotal(usize),
    /// At most this many particles.
    MaxTotal(usize),
}

impl Truncation {
    pub fn admits(self, total: usize) -> bool {
        match self {
            Truncation::None => true,
            Truncation::FixedTotal(m) => total == m,
            Truncation::MaxTotal(m) => total <= m,
        }
    }
}

/// Quadratic Hamiltonian with dephasing, pump and loss on `n` modes.
///
/// The coupling is stored row-major; `coupling[mu * n + nu]` is `V_{mu nu}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec<T> {
    pub omega: Vec<T>,
    pub coupling: Vec<Complex<T>>,
    pub gamma: Vec<T>,
    pub eta: Vec<T>,
    pub theta: Vec<T>,
    pub statistics: ParticleStatistics,
    pub truncation: Truncation,
}

impl<T: Scalar> SystemSpec<T> {
    /// All-zero system on `n` modes.
    pub fn new(n: usize, statistics: ParticleStatistics) -> Self {
        let zero = || vec![T::zero(); n];
        Self {
            omega: zero(),
            coupling: vec![Complex::new(T::zero(), T::zero()); n * n],
            gamma: zero(),
            eta: zero(),
            theta: zero(),
            statistics,
            truncation: Truncation::None,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn coupling(&self, mu: usize, nu: usize) -> &Complex<T> {
        &self.coupling[mu * self.n_modes() + nu]
    }

    /// Sets `V_{mu nu} = v` and `V_{nu mu} = conj(v)`.
    pub fn with_coupling(mut self, mu: usize, nu: usize, v: Complex<T>) -> Self {
        let n = self.n_modes();
        self.coupling[nu * n + mu] = v.conj();
        self.coupling[mu * n + nu] = v;
        self
    }

    /// Real symmetric coupling between `mu` and `nu`.
    pub fn with_real_coupling(self, mu: usize, nu: usize, v: T) -> Self {
        self.with_coupling(mu, nu, Complex::new(v, T::zero()))
    }

    pub fn with_energies(mut self, omega: Vec<T>) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_dephasing(mut self, gamma: Vec<T>) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_uniform_dephasing(mut self, gamma: T) -> Self {
        self.gamma = vec![gamma; self.n_modes()];
        self
    }

    pub fn with_pump(mut self, eta: Vec<T>) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_loss(mut self, theta: Vec<T>) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn has_pump_or_loss(&self) -> bool {
        self.eta.iter().chain(&self.theta).any(|r| !r.is_zero())
    }
}

/// A spec that passed [`validate_spec`], with pair quantities precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedSpec<T> {
    spec: SystemSpec<T>,
    omega_pair: Vec<T>,
    gamma_pair: Vec<T>,
}

impl<T: Scalar> ValidatedSpec<T> {
    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn into_spec(self) -> SystemSpec<T> {
        self.spec
    }

    pub fn n_modes(&self) -> usize {
        self.spec.n_modes()
    }

    pub fn statistics(&self) -> ParticleStatistics {
        self.spec.statistics
    }

    /// `Omega_mu - Omega_nu`.
    pub fn omega_pair(&self, mu: usize, nu: usize) -> &T {
        &self.omega_pair[mu * self.n_modes() + nu]
    }

    /// `(gamma_mu + gamma_nu) / 2` off the diagonal, zero on it.
    pub fn gamma_pair(&self, mu: usize, nu: usize) -> &T {
        &self.gamma_pair[mu * self.n_modes() + nu]
    }

    pub fn coupling(&self, mu: usize, nu: usize) -> &Complex<T> {
        self.spec.coupling(mu, nu)
    }

    /// `|V_{mu nu}|^2`.
    pub fn coupling_norm_sqr(&self, mu: usize, nu: usize) -> T {
        self.coupling(mu, nu).norm_sqr()
    }

    pub fn revalidate(&self) -> Result<Self> {
        validate_spec(self.spec.clone())
    }
}

fn check_len(field: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape {
            field,
            expected,
            got,
        })
    }
}

fn check_rates<T: Scalar>(field: &'static str, rates: &[T]) -> Result<()> {
    for (index, r) in rates.iter().enumerate() {
        if !r.is_finite_value() {
            return Err(Error::NonFinite { field, index });
        }
        if *r < T::zero() {
            return Err(Error::NegativeRate { field, index });
        }
    }
    Ok(())
}

/// Checks shape, Hermiticity (exact), zero diagonal coupling, rate signs and
/// the truncation policy, then precomputes `Omega_{mu nu}` and `gamma_{mu nu}`.
pub fn validate_spec<T: Scalar>(spec: SystemSpec<T>) -> Result<ValidatedSpec<T>> {
    let n = spec.n_modes();
    if n == 0 {
        return Err(Error::NoModes);
    }
    check_len("coupling", n * n, spec.coupling.len())?;
    check_len("gamma", n, spec.gamma.len())?;
    check_len("eta", n, spec.eta.len())?;
    check_len("theta", n, spec.theta.len())?;

    for (index, w) in spec.omega.iter().enumerate() {
        if !w.is_finite_value() {
            return Err(Error::NonFinite {
                field: "omega",
                index,
            });
        }
    }
    for mu in 0..n {
        let d = spec.coupling(mu, mu);
        if !d.re.is_zero() || !d.im.is_zero() {
            return Err(Error::DiagonalCoupling(mu));
        }
        for nu in 0..n {
            let v = spec.coupling(mu, nu);
            if !v.re.is_finite_value() || !v.im.is_finite_value() {
                return Err(Error::NonFinite {
                    field: "coupling",
                    index: mu * n + nu,
                });
            }
            if *v != spec.coupling(nu, mu).conj() {
                return Err(Error::NonHermitian { row: mu, col: nu });
            }
        }
    }
    check_rates("gamma", &spec.gamma)?;
    check_rates("eta", &spec.eta)?;
    check_rates("theta", &spec.theta)?;

    match (spec.statistics, spec.truncation) {
        (ParticleStatistics::Boson, Truncation::None) => {
            return Err(Error::Truncation(
                "bosons require an explicit fixed or maximum particle number".into(),
            ))
        }
        (ParticleStatistics::Boson, Truncation::FixedTotal(_)) if spec.has_pump_or_loss() => {
            return Err(Error::Truncation(
                "pump and loss leave a fixed-number shell; use a maximum total".into(),
            ))
        }
        _ => {}
    }

    let half = T::one() / (T::one() + T::one());
    let mut omega_pair = Vec::with_capacity(n * n);
    let mut gamma_pair = Vec::with_capacity(n * n);
    for mu in 0..n {
        for nu in 0..n {
            omega_pair.push(spec.omega[mu].clone() - spec.omega[nu].clone());
            gamma_pair.push(if mu == nu {
                T::zero()
            } else {
                (spec.gamma[mu].clone() + spec.gamma[nu].clone()) * half.clone()
            });
        }
    }
    Ok(ValidatedSpec {
        spec,
        omega_pair,
        gamma_pair,
    })
}

/// Truncation as written in a spec document. Integers are signed so that a
/// negative value is reported as such rather than as a parse failure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TruncationDoc {
    FixedTotal(i64),
    MaxTotal(i64),
}

/// JSON form of a [`SystemSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub n_modes: usize,
    pub omega: Vec<f64>,
    pub v_re: Vec<Vec<f64>>,
    pub v_im: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    pub statistics: ParticleStatistics,
    #[serde(default)]
    pub truncation: Option<TruncationDoc>,
}

impl TryFrom<TruncationDoc> for Truncation {
    type Error = Error;

    fn try_from(doc: TruncationDoc) -> Result<Self> {
        let (value, make): (i64, fn(usize) -> Truncation) = match doc {
            TruncationDoc::FixedTotal(m) => (m, Truncation::FixedTotal),
            TruncationDoc::MaxTotal(m) => (m, Truncation::MaxTotal),
        };
        usize::try_from(value)
            .map(make)
            .map_err(|_| Error::NegativeTruncation(value))
    }
}

impl TryFrom<SpecDocument> for SystemSpec<f64> {
    type Error = Error;

    fn try_from(doc: SpecDocument) -> Result<Self> {
        let n = doc.n_modes;
        check_len("omega", n, doc.omega.len())?;
        check_len("v_re", n, doc.v_re.len())?;
        check_len("v_im", n, doc.v_im.len())?;
        let mut coupling = Vec::with_capacity(n * n);
        for (re_row, im_row) in doc.v_re.iter().zip(&doc.v_im) {
            check_len("v_re row", n, re_row.len())?;
            check_len("v_im row", n, im_row.len())?;
            coupling.extend(re_row.iter().zip(im_row).map(|(&re, &im)| Complex::new(re, im)));
        }
        Ok(SystemSpec {
            omega: doc.omega,
            coupling,
            gamma: doc.gamma,
            eta: doc.eta.unwrap_or_else(|| vec![0.0; n]),
            theta: doc.theta.unwrap_or_else(|| vec![0.0; n]),
            statistics: doc.statistics,
            truncation: doc
                .truncation
                .map(Truncation::try_from)
                .transpose()?
                .unwrap_or(Truncation::None),
        })
    }
}

impl From<&SystemSpec<f64>> for SpecDocument {
    fn from(spec: &SystemSpec<f64>) -> Self {
        let n = spec.n_modes();
        let rows = |f: fn(&Complex<f64>) -> f64| {
            (0..n)
                .map(|mu| (0..n).map(|nu| f(spec.coupling(mu, nu))).collect())
                .collect()
        };
        SpecDocument {
            n_modes: n,
            omega: spec.omega.clone(),
            v_re: rows(|v| v.re),
            v_im: rows(|v| v.im),
            gamma: spec.gamma.clone(),
            eta: Some(spec.eta.clone()),
            theta: Some(spec.theta.clone()),
            statistics: spec.statistics,
            truncation: match spec.truncation {
                Truncation::None => None,
                Truncation::FixedTotal(m) => Some(TruncationDoc::FixedTotal(m as i64)),
                Truncation::MaxTotal(m) => Some(TruncationDoc::MaxTotal(m as i64)),
            },
        }
    }
}

impl SystemSpec<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("spec document: {e}")))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecDocument::from(self)).expect("spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn two_mode() -> SystemSpec<f64> {
        SystemSpec::new(2, ParticleStatistics::Single)
            .with_real_coupling(0, 1, 1.0)
            .with_uniform_dephasing(2.0)
    }

    #[test]
    fn accepts_symmetric_two_mode() {
        let v = validate_spec(two_mode()).unwrap();
        assert_eq!(*v.gamma_pair(0, 1), 2.0);
        assert_eq!(*v.gamma_pair(0, 0), 0.0);
        assert_eq!(*v.omega_pair(0, 1), 0.0);
    }

    #[test]
    fn rejects_diagonal_coupling() {
        let mut spec = two_mode();
        spec.coupling[0] = Complex::new(0.5, 0.0);
        assert_eq!(validate_spec(spec), Err(Error::DiagonalCoupling(0)));
    }

    #[test]
    fn rejects_negative_rate() {
        let spec = two_mode().with_dephasing(vec![-1.0, 2.0]);
        assert!(matches!(
            validate_spec(spec),
            Err(Error::NegativeRate { field: "gamma", index: 0 })
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut spec = two_mode();
        spec.coupling[1] = Complex::new(1.0, 0.25);
        assert!(matches!(validate_spec(spec), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn rejects_empty_system() {
        let spec = SystemSpec::<f64>::new(0, ParticleStatistics::Fermion);
        assert_eq!(validate_spec(spec), Err(Error::NoModes));
    }

    #[test]
    fn bosons_need_truncation() {
        let spec = SystemSpec::<f64>::new(2, ParticleStatistics::Boson);
        assert!(matches!(validate_spec(spec.clone()), Err(Error::Truncation(_))));
        let spec = spec
            .with_truncation(Truncation::FixedTotal(2))
            .with_pump(vec![0.1, 0.0]);
        assert!(matches!(validate_spec(spec), Err(Error::Truncation(_))));
    }

    #[test]
    fn validation_is_idempotent() {
        let v = validate_spec(two_mode().with_energies(vec![0.5, -1.0])).unwrap();
        assert_eq!(v.revalidate().unwrap(), v);
    }

    #[test]
    fn exact_pair_quantities() {
        let r = |n, d| Ratio::<i64>::new(n, d);
        let spec = SystemSpec::new(2, ParticleStatistics::Single)
            .with_dephasing(vec![r(1, 3), r(1, 2)])
            .with_real_coupling(0, 1, r(1, 1));
        let v = validate_spec(spec).unwrap();
        assert_eq!(*v.gamma_pair(1, 0), r(5, 12));
    }

    #[test]
    fn json_roundtrip_and_negative_truncation() {
        let spec = SystemSpec::new(2, ParticleStatistics::Boson)
            .with_real_coupling(0, 1, 1.0)
            .with_uniform_dephasing(40.0)
            .with_truncation(Truncation::FixedTotal(2));
        let text = spec.to_json();
        for key in ["n_modes", "omega", "v_re", "v_im", "gamma", "eta", "theta", "statistics", "truncation"] {
            assert!(text.contains(&format!("\"{key}\"")), "{key}");
        }
        assert_eq!(SystemSpec::from_json(&text).unwrap(), spec);

        let bad = text.replace("\"fixed_total\": 2", "\"fixed_total\": -3");
        assert_eq!(SystemSpec::from_json(&bad), Err(Error::NegativeTruncation(-3)));
        let unknown = text.replacen('{', "{\"extra\": 1,", 1);
        assert!(SystemSpec::from_json(&unknown).is_err());
    }
}
