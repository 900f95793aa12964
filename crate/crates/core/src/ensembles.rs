//! Coefficient laws, moment and concentration diagnostics, and random polynomial assembly.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::onb::MonomialOnb;
use crate::stahltotik::RecurrenceOnb;

/// Deterministic random stream keyed by `(master seed, stream id)`.
///
/// Draws within a stream are sequential, so the `k`-th draw of a stream is fixed
/// regardless of how many draws follow it.
#[derive(Clone)]
pub struct RngStream {
    master: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(master: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master);
        rng.set_stream(stream);
        RngStream { master, stream, rng }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("master", &self.master)
            .field("stream", &self.stream)
            .finish()
    }
}

/// A complex number kept as `(log|a|, arg a)`; `log_abs = −∞` is an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub log_abs: f64,
    pub phase: f64,
}

impl Coefficient {
    pub const ZERO: Coefficient = Coefficient {
        log_abs: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            Self::ZERO
        } else {
            Coefficient {
                log_abs: z.norm().ln(),
                phase: z.arg(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    /// The unit-modulus factor `a/|a|`.
    pub fn unit(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    /// Plain complex value; overflows to infinity for huge magnitudes.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.log_abs.exp(), self.phase)
        }
    }

    /// `log(1 + |a|)` without overflow.
    pub fn log1p_abs(&self) -> f64 {
        if self.log_abs > 0.0 {
            self.log_abs + (-self.log_abs).exp().ln_1p()
        } else {
            self.log_abs.exp().ln_1p()
        }
    }
}

/// Distribution of the i.i.d. coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientLaw {
    /// Standard complex normal, `E|a|² = 1`.
    GaussianComplex,
    GaussianReal,
    /// `±1` with probability ½ each.
    Bernoulli,
    CauchyReal,
    /// `log|a| = U^{−1/α}` with `U` uniform on (0,1); uniform phase.
    LogFrechet { alpha: f64 },
}

impl CoefficientLaw {
    pub fn validate(&self) -> Result<()> {
        if let CoefficientLaw::LogFrechet { alpha } = self {
            if !(*alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidArgument(format!("log_frechet needs alpha > 0, got {alpha}")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoefficientLaw::GaussianComplex => "gaussian_complex",
            CoefficientLaw::GaussianReal => "gaussian_real",
            CoefficientLaw::Bernoulli => "bernoulli",
            CoefficientLaw::CauchyReal => "cauchy_real",
            CoefficientLaw::LogFrechet { .. } => "log_frechet",
        }
    }

    /// Every provided law puts mass below one on small balls.
    pub fn non_degenerate(&self) -> bool {
        true
    }

    pub fn is_real(&self) -> bool {
        matches!(
            self,
            CoefficientLaw::GaussianReal | CoefficientLaw::Bernoulli | CoefficientLaw::CauchyReal
        )
    }

    pub fn sample_one(&self, stream: &mut RngStream) -> Coefficient {
        let rng = stream.rng();
        match *self {
            CoefficientLaw::GaussianComplex => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Coefficient::from_complex(Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2)
            }
            CoefficientLaw::GaussianReal => {
                let x: f64 = rng.sample(StandardNormal);
                Coefficient::from_complex(Complex64::new(x, 0.0))
            }
            CoefficientLaw::Bernoulli => {
                let x = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Coefficient::from_complex(Complex64::new(x, 0.0))
            }
            CoefficientLaw::CauchyReal => {
                let x: f64 = Cauchy::new(0.0, 1.0).expect("unit scale").sample(rng);
                Coefficient::from_complex(Complex64::new(x, 0.0))
            }
            CoefficientLaw::LogFrechet { alpha } => {
                // open interval so that U^{−1/α} stays finite
                let u: f64 = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                let phase = rng.random::<f64>() * 2.0 * PI;
                Coefficient {
                    log_abs: u.powf(-1.0 / alpha),
                    phase,
                }
            }
        }
    }
}

/// `E[(log(1+|a|))^m] < ∞`, decided analytically.
pub fn log_moment_finite(law: &CoefficientLaw, order: u32) -> Result<bool> {
    if order == 0 {
        return Err(Error::InvalidArgument("moment order must be at least 1".into()));
    }
    law.validate()?;
    Ok(match law {
        CoefficientLaw::LogFrechet { alpha } => *alpha > order as f64,
        _ => true,
    })
}

/// `count` i.i.d. draws from `stream`.
pub fn sample_coefficients(law: &CoefficientLaw, count: usize, stream: &mut RngStream) -> Vec<Coefficient> {
    (0..count).map(|_| law.sample_one(stream)).collect()
}

/// Draws one coefficient per basis element in graded order (by `|J|`, then
/// lexicographic) and stores them in the basis order. The draw for a given `J`
/// depends only on `J` and the stream, so a degree ladder built from fresh
/// streams with the same id shares its low-degree coefficients.
pub fn sample_for_basis(law: &CoefficientLaw, basis: &Basis, stream: &mut RngStream) -> Vec<Coefficient> {
    match basis {
        Basis::Monomial(onb) if onb.dimension() > 1 => {
            let idx = onb.indices();
            let mut order: Vec<usize> = (0..idx.len()).collect();
            order.sort_by_key(|&i| (idx.get(i).iter().sum::<u32>(), i));
            let mut out = vec![Coefficient::ZERO; idx.len()];
            for i in order {
                out[i] = law.sample_one(stream);
            }
            out
        }
        _ => sample_coefficients(law, basis.len(), stream),
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub samples: usize,
}

/// Sample mean of `(log(1+|a|))^m`.
pub fn empirical_log_moment(law: &CoefficientLaw, order: u32, samples: usize, stream: &mut RngStream) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let xs: Vec<f64> = (0..samples)
        .map(|_| law.sample_one(stream).log1p_abs().powi(order as i32))
        .collect();
    Ok(mean_se(&xs))
}

pub(crate) fn mean_se(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        value: mean,
        se: (var / n).sqrt(),
        samples: xs.len(),
    }
}

/// Lower estimate of the concentration function `sup_z P[a ∈ B(z, r)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentration {
    pub value: f64,
    pub se: f64,
    /// Spacing of the candidate-center lattice.
    pub granularity: f64,
}

/// Largest empirical mass of a closed ball of radius `r`, over centers at the
/// first samples and on a lattice of spacing `r/2` around the origin.
pub fn concentration_from_samples(samples: &[Complex64], r: f64) -> Result<Concentration> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let finite: Vec<Complex64> = samples.iter().copied().filter(|z| z.re.is_finite() && z.im.is_finite()).collect();
    let mut centers: Vec<Complex64> = finite.iter().take(2000).copied().collect();
    let step = 0.5 * r;
    let half_width = 8usize;
    for a in 0..=2 * half_width {
        for b in 0..=2 * half_width {
            centers.push(Complex64::new(
                (a as f64 - half_width as f64) * step,
                (b as f64 - half_width as f64) * step,
            ));
        }
    }
    let r2 = r * r;
    let best = centers
        .iter()
        .map(|c| finite.iter().filter(|z| (**z - c).norm_sqr() <= r2).count())
        .max()
        .unwrap_or(0);
    let n = samples.len() as f64;
    let p = best as f64 / n;
    Ok(Concentration {
        value: p,
        se: (p * (1.0 - p) / n).sqrt(),
        granularity: step,
    })
}

/// [`concentration_from_samples`] on `samples` fresh draws.
pub fn concentration_estimate(law: &CoefficientLaw, r: f64, samples: usize, stream: &mut RngStream) -> Result<Concentration> {
    let xs: Vec<Complex64> = (0..samples).map(|_| law.sample_one(stream).to_complex()).collect();
    concentration_from_samples(&xs, r)
}

/// Growth diagnostics along one coefficient sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub j_max: usize,
    /// Number of `j` with `|a_j| ≥ exp((εj)^{1/m})`.
    pub violations: usize,
    pub last_violation: Option<usize>,
    /// `(threshold, first j where max_{i≤j} |a_i|^{m/i} exceeds it)`.
    pub crossings: Vec<(f64, Option<usize>)>,
    /// Final value of `max_{i≤J_max} (m/i) log|a_i|`.
    pub log_running_max: f64,
}

/// Draws `a_1..a_{J_max}` and records tail-bound violations and the running max of `|a_j|^{m/j}`.
pub fn tail_growth_diagnostic(
    law: &CoefficientLaw,
    order: u32,
    eps: f64,
    j_max: usize,
    stream: &mut RngStream,
) -> Result<TailReport> {
    if j_max == 0 || order == 0 || !(eps > 0.0) {
        return Err(Error::InvalidArgument("need J_max ≥ 1, m ≥ 1 and ε > 0".into()));
    }
    let thresholds = [10f64, 100.0, 1000.0];
    let mut crossings: Vec<(f64, Option<usize>)> = thresholds.iter().map(|&t| (t, None)).collect();
    let mut violations = 0;
    let mut last_violation = None;
    let mut running = f64::NEG_INFINITY;
    let m = order as f64;
    for j in 1..=j_max {
        let a = law.sample_one(stream);
        if a.log_abs >= (eps * j as f64).powf(1.0 / m) {
            violations += 1;
            last_violation = Some(j);
        }
        running = running.max(m * a.log_abs / j as f64);
        for c in crossings.iter_mut() {
            if c.1.is_none() && running > c.0.ln() {
                c.1 = Some(j);
            }
        }
    }
    Ok(TailReport {
        j_max,
        violations,
        last_violation,
        crossings,
        log_running_max: running,
    })
}

/// The basis a random polynomial is expanded in.
#[derive(Debug, Clone)]
pub enum Basis {
    Monomial(Arc<MonomialOnb>),
    Recurrence(Arc<RecurrenceOnb>),
}

impl Basis {
    pub fn len(&self) -> usize {
        match self {
            Basis::Monomial(b) => b.len(),
            Basis::Recurrence(b) => b.degree() + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self) -> usize {
        match self {
            Basis::Monomial(b) => b.degree(),
            Basis::Recurrence(b) => b.degree(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Basis::Monomial(b) => b.dimension(),
            Basis::Recurrence(_) => 1,
        }
    }
}

/// Where a polynomial's coefficients were drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub master: u64,
    pub stream: u64,
    pub trial: u64,
}

impl SeedProvenance {
    pub fn as_array(&self) -> [u64; 3] {
        [self.master, self.stream, self.trial]
    }
}

/// `f_n = Σ a_j P_j^n`.
#[derive(Debug, Clone)]
pub struct RandomPolynomial {
    basis: Basis,
    coeffs: Vec<Coefficient>,
    pub provenance: SeedProvenance,
}

/// Bundles a basis with coefficients, rejecting length mismatches and the zero polynomial.
pub fn assemble_polynomial(basis: Basis, coeffs: Vec<Coefficient>) -> Result<RandomPolynomial> {
    if coeffs.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: coeffs.len(),
        });
    }
    if coeffs.iter().all(Coefficient::is_zero) {
        return Err(Error::DegeneratePolynomial);
    }
    if coeffs.iter().any(|c| c.log_abs.is_nan() || c.log_abs == f64::INFINITY) {
        return Err(Error::InvalidArgument("coefficient magnitudes must be finite".into()));
    }
    Ok(RandomPolynomial {
        basis,
        coeffs,
        provenance: SeedProvenance::default(),
    })
}

impl RandomPolynomial {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn with_provenance(mut self, provenance: SeedProvenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Samples coefficients for `basis` from `stream`.
    pub fn sample(basis: Basis, law: &CoefficientLaw, stream: &mut RngStream, trial: u64) -> Result<Self> {
        let coeffs = sample_for_basis(law, &basis, stream);
        let provenance = SeedProvenance {
            master: stream.master(),
            stream: stream.stream(),
            trial,
        };
        Ok(assemble_polynomial(basis, coeffs)?.with_provenance(provenance))
    }

    /// Log-magnitudes `log|a_J| + log c_J` of the monomial coefficients (monomial bases only).
    pub fn monomial_log_terms(&self) -> Option<Vec<f64>> {
        match &self.basis {
            Basis::Monomial(onb) => Some(self.coeffs.iter().zip(onb.log_coeffs()).map(|(a, c)| a.log_abs + c).collect()),
            Basis::Recurrence(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onb::elliptic_onb;
    use crate::weights::{make_weight, WeightKind, WeightSpec};

    #[test]
    fn moment_classification() {
        assert!(log_moment_finite(&CoefficientLaw::GaussianComplex, 3).unwrap());
        assert!(!log_moment_finite(&CoefficientLaw::LogFrechet { alpha: 2.0 }, 3).unwrap());
        assert!(log_moment_finite(&CoefficientLaw::LogFrechet { alpha: 3.5 }, 3).unwrap());
        assert!(log_moment_finite(&CoefficientLaw::Bernoulli, 7).unwrap());
        assert!(log_moment_finite(&CoefficientLaw::Bernoulli, 0).is_err());
        assert!(log_moment_finite(&CoefficientLaw::LogFrechet { alpha: -1.0 }, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let law = CoefficientLaw::GaussianComplex;
        assert!(sample_coefficients(&law, 0, &mut RngStream::new(1, 0)).is_empty());
        let a = sample_coefficients(&law, 50, &mut RngStream::new(9, 4));
        let b = sample_coefficients(&law, 50, &mut RngStream::new(9, 4));
        assert_eq!(a, b);
        let c = sample_coefficients(&law, 50, &mut RngStream::new(9, 5));
        assert_ne!(a, c);
        // prefix property
        let d = sample_coefficients(&law, 20, &mut RngStream::new(9, 4));
        assert_eq!(&a[..20], &d[..]);
    }

    #[test]
    fn bernoulli_mean_is_small() {
        let xs = sample_coefficients(&CoefficientLaw::Bernoulli, 100_000, &mut RngStream::new(3, 0));
        let mean: f64 = xs.iter().map(|c| c.to_complex().re).sum::<f64>() / 1e5;
        assert!(mean.abs() < 3.0 / 1e5f64.sqrt());
        assert!(xs.iter().all(|c| c.log_abs == 0.0));
    }

    #[test]
    fn gaussian_complex_has_unit_second_moment() {
        let xs = sample_coefficients(&CoefficientLaw::GaussianComplex, 100_000, &mut RngStream::new(5, 0));
        let m2: f64 = xs.iter().map(|c| (2.0 * c.log_abs).exp()).sum::<f64>() / 1e5;
        assert!((m2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn log_frechet_tail_law() {
        let alpha = 0.7;
        let n = 100_000;
        let xs = sample_coefficients(&CoefficientLaw::LogFrechet { alpha }, n, &mut RngStream::new(11, 0));
        for r in [2f64, 4.0, 8.0] {
            let p = r.powf(-alpha);
            let hat = xs.iter().filter(|c| c.log_abs > r).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((hat - p).abs() < 3.0 * se, "R={r}: {hat} vs {p}");
        }
        assert!(xs.iter().all(|c| c.log_abs.is_finite() && c.log_abs >= 1.0));
    }

    #[test]
    fn empirical_moments() {
        let b = empirical_log_moment(&CoefficientLaw::Bernoulli, 1, 1000, &mut RngStream::new(1, 1)).unwrap();
        assert!((b.value - 2f64.ln()).abs() < 1e-12);
        // gaussian_real: E log(1+|x|) by quadrature of the half-normal density
        let (x, w) = crate::quadrature::gauss_legendre(80);
        let oracle: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let t = 6.0 * (xi + 1.0); // [0, 12]
                6.0 * wi * t.ln_1p() * (2.0 / PI).sqrt() * (-0.5 * t * t).exp()
            })
            .sum();
        let g = empirical_log_moment(&CoefficientLaw::GaussianReal, 1, 100_000, &mut RngStream::new(2, 0)).unwrap();
        // 4 s.e. keeps the false-alarm rate near 1e-4
        assert!((g.value - oracle).abs() < 4.0 * g.se, "{} vs {oracle}", g.value);
        // infinite mean: the running estimate keeps climbing by orders of magnitude
        let law = CoefficientLaw::LogFrechet { alpha: 0.5 };
        let small = empirical_log_moment(&law, 1, 1_000, &mut RngStream::new(4, 0)).unwrap();
        let large = empirical_log_moment(&law, 1, 100_000, &mut RngStream::new(4, 0)).unwrap();
        assert!(large.value > small.value);
        assert!(large.se > 0.1 * large.value);
    }

    #[test]
    fn concentration_examples() {
        let law = CoefficientLaw::Bernoulli;
        let c = concentration_estimate(&law, 0.5, 10_000, &mut RngStream::new(1, 0)).unwrap();
        assert!((c.value - 0.5).abs() < 3.0 * c.se + 1e-12);
        let c = concentration_estimate(&law, 2.0, 10_000, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(c.value, 1.0);
        // Lévy: Q(η+ξ, r) ≤ Q(η, r)
        let mut s = RngStream::new(2, 0);
        let sums: Vec<Complex64> = (0..10_000)
            .map(|_| law.sample_one(&mut s).to_complex() + law.sample_one(&mut s).to_complex())
            .collect();
        let q_sum = concentration_from_samples(&sums, 0.5).unwrap();
        let q_one = concentration_estimate(&law, 0.5, 10_000, &mut RngStream::new(3, 0)).unwrap();
        assert!(q_sum.value <= q_one.value + 2.0 * (q_sum.se + q_one.se));
        for law in [
            CoefficientLaw::GaussianComplex,
            CoefficientLaw::GaussianReal,
            CoefficientLaw::Bernoulli,
            CoefficientLaw::CauchyReal,
            CoefficientLaw::LogFrechet { alpha: 0.5 },
        ] {
            let c = concentration_estimate(&law, 0.01, 10_000, &mut RngStream::new(8, 0)).unwrap();
            assert!(c.value <= 0.9, "{law:?}");
        }
    }

    #[test]
    fn tail_diagnostics() {
        let r = tail_growth_diagnostic(&CoefficientLaw::Bernoulli, 1, 0.1, 10_000, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(r.violations, 0);
        let g = tail_growth_diagnostic(&CoefficientLaw::GaussianComplex, 1, 0.1, 100_000, &mut RngStream::new(1, 0)).unwrap();
        assert!(g.last_violation.unwrap_or(0) <= 1000);
        let h = tail_growth_diagnostic(&CoefficientLaw::LogFrechet { alpha: 0.5 }, 1, 0.1, 100_000, &mut RngStream::new(1, 0))
            .unwrap();
        assert!(h.crossings[0].1.is_some() && h.crossings[1].1.is_some());
    }

    #[test]
    fn assembly_rules() {
        let w = make_weight(WeightSpec::new(WeightKind::Weyl, 1)).unwrap();
        let onb = Arc::new(crate::onb::build_onb(3, &w).unwrap());
        let basis = Basis::Monomial(onb);
        assert!(matches!(
            assemble_polynomial(basis.clone(), vec![Coefficient::ZERO; 3]),
            Err(Error::LengthMismatch { expected: 4, got: 3 })
        ));
        assert!(matches!(
            assemble_polynomial(basis.clone(), vec![Coefficient::ZERO; 4]),
            Err(Error::DegeneratePolynomial)
        ));
        let one = Coefficient::from_complex(Complex64::new(1.0, 0.0));
        let p = assemble_polynomial(basis, vec![one, Coefficient::ZERO, Coefficient::ZERO, Coefficient::ZERO]).unwrap();
        assert!((p.monomial_log_terms().unwrap()[0] - 0.5 * (3.0 / PI).ln()).abs() < 1e-10);
    }

    #[test]
    fn graded_sampling_shares_low_degrees() {
        let law = CoefficientLaw::GaussianComplex;
        let small = Basis::Monomial(Arc::new(elliptic_onb(3, 2)));
        let large = Basis::Monomial(Arc::new(elliptic_onb(6, 2)));
        let a = sample_for_basis(&law, &small, &mut RngStream::new(1, 2));
        let b = sample_for_basis(&law, &large, &mut RngStream::new(1, 2));
        if let (Basis::Monomial(s), Basis::Monomial(l)) = (&small, &large) {
            for (i, j) in s.indices().iter().enumerate() {
                let k = l.indices().position(j).unwrap();
                assert_eq!(a[i], b[k]);
            }
        }
    }
}
