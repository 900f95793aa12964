//! Orthonormal polynomials of regular measures on the line and circle: three-term
//! recurrences, Green functions, capacities and equilibrium masses.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::Coefficient;
use crate::error::{Error, Result};
use crate::extremal::RegionSpec;

/// A probability measure given by its orthonormal recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularMeasureSpec {
    /// Arcsine law on `[−1, 1]`.
    Chebyshev,
    /// `(1−x)^α (1+x)^β` on `[−1, 1]`, normalized.
    Jacobi { alpha: f64, beta: f64 },
    /// Normalized arclength on the unit circle (the Kac ensemble).
    Circle,
    /// Custom coefficients: `a = [a_1, a_2, …]`, `b = [b_0, b_1, …]` on `[−1, 1]`.
    Recurrence { a: Vec<f64>, b: Vec<f64> },
}

/// Where the measure lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Interval,
    UnitCircle,
}

impl RegularMeasureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            RegularMeasureSpec::Jacobi { alpha, beta } => {
                if !(*alpha > -1.0 && *beta > -1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "jacobi parameters must exceed −1, got α = {alpha}, β = {beta}"
                    )));
                }
            }
            RegularMeasureSpec::Recurrence { a, b } => {
                if a.iter().any(|v| !(*v > 0.0 && v.is_finite())) || b.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "recurrence needs positive finite a_k and finite b_k".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn support(&self) -> Support {
        match self {
            RegularMeasureSpec::Circle => Support::UnitCircle,
            _ => Support::Interval,
        }
    }

    /// Whether the convex hull of the support has zero area. The circle does not;
    /// it is kept only to demonstrate the Kac ensemble.
    pub fn hull_has_zero_area(&self) -> bool {
        self.support() == Support::Interval
    }

    pub fn kac_demo(&self) -> bool {
        !self.hull_has_zero_area()
    }

    /// Logarithmic capacity of the support.
    pub fn capacity(&self) -> f64 {
        match self.support() {
            Support::Interval => 0.5,
            Support::UnitCircle => 1.0,
        }
    }

    /// `(a_k, b_k)` for `k = 0..=n` (`a_0` unused and set to 0).
    fn coefficients(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let mut a = vec![0.0; n + 2];
        let mut b = vec![0.0; n + 2];
        match self {
            RegularMeasureSpec::Chebyshev => {
                for (k, ak) in a.iter_mut().enumerate().skip(1) {
                    *ak = if k == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.5 };
                }
            }
            RegularMeasureSpec::Jacobi { alpha, beta } => {
                let (al, be) = (*alpha, *beta);
                let s = al + be;
                for (k, bk) in b.iter_mut().enumerate() {
                    let k = k as f64;
                    *bk = if k == 0.0 {
                        (be - al) / (s + 2.0)
                    } else {
                        (be * be - al * al) / ((2.0 * k + s) * (2.0 * k + s + 2.0))
                    };
                }
                for (k, ak) in a.iter_mut().enumerate().skip(1) {
                    let kf = k as f64;
                    let sq = if k == 1 {
                        4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
                    } else {
                        let t = 2.0 * kf + s;
                        4.0 * kf * (kf + al) * (kf + be) * (kf + s) / (t * t * (t + 1.0) * (t - 1.0))
                    };
                    *ak = sq.sqrt();
                }
            }
            RegularMeasureSpec::Circle => {
                for ak in a.iter_mut().skip(1) {
                    *ak = 1.0;
                }
            }
            RegularMeasureSpec::Recurrence { a: ca, b: cb } => {
                if ca.len() < n + 1 || cb.len() < n + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "recurrence for degree {n} needs {} values of a and b",
                        n + 1
                    )));
                }
                a[1..=n + 1].copy_from_slice(&ca[..=n]);
                b[..=n].copy_from_slice(&cb[..=n]);
            }
        }
        Ok((a, b))
    }
}

/// Orthonormal `p_0, …, p_n` for a [`RegularMeasureSpec`].
#[derive(Debug, Clone)]
pub struct RecurrenceOnb {
    spec: RegularMeasureSpec,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    log_gamma: Vec<f64>,
}

/// Builds `p_0..p_n`; `γ_{k+1} = γ_k / a_{k+1}` is kept in log space.
pub fn build_recurrence_onb(spec: &RegularMeasureSpec, n: usize) -> Result<RecurrenceOnb> {
    let (a, b) = spec.coefficients(n)?;
    let mut log_gamma = vec![0.0; n + 1];
    for k in 1..=n {
        log_gamma[k] = log_gamma[k - 1] - a[k].ln();
    }
    Ok(RecurrenceOnb {
        spec: spec.clone(),
        n,
        a,
        b,
        log_gamma,
    })
}

/// Rescale when values pass this magnitude.
const RESCALE_AT: f64 = 1e100;

impl RecurrenceOnb {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &RegularMeasureSpec {
        &self.spec
    }

    pub fn is_monomial(&self) -> bool {
        self.spec == RegularMeasureSpec::Circle
    }

    /// `log γ_k`.
    pub fn log_leading(&self, k: usize) -> f64 {
        self.log_gamma[k]
    }

    pub fn recurrence(&self) -> (&[f64], &[f64]) {
        (&self.a[..=self.n + 1], &self.b[..=self.n + 1])
    }

    /// `p_0(z), …, p_n(z)` without rescaling (fine for `|z|` of order one).
    pub fn eval_all(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n + 1);
        let mut prev = Complex64::new(0.0, 0.0);
        let mut cur = Complex64::new(1.0, 0.0);
        out.push(cur);
        for k in 0..self.n {
            let next = self.step(k, z, cur, prev);
            prev = cur;
            cur = next;
            out.push(cur);
        }
        out
    }

    #[inline]
    fn step(&self, k: usize, z: Complex64, cur: Complex64, prev: Complex64) -> Complex64 {
        if self.is_monomial() {
            z * cur
        } else {
            ((z - self.b[k]) * cur - self.a[k] * prev) / self.a[k + 1]
        }
    }

    /// `log|p_k(z)|` with running rescaling.
    pub fn log_abs_p(&self, k: usize, z: Complex64) -> f64 {
        let mut prev = Complex64::new(0.0, 0.0);
        let mut cur = Complex64::new(1.0, 0.0);
        let mut log_scale = 0.0;
        for i in 0..k {
            let next = self.step(i, z, cur, prev);
            prev = cur;
            cur = next;
            let mag = cur.norm();
            if mag > RESCALE_AT || (i % 32 == 31 && mag > 1.0) {
                prev /= mag;
                cur /= mag;
                log_scale += mag.ln();
            }
        }
        log_scale + cur.norm().ln()
    }

    /// `f(z) = Σ a_k p_k(z)` and `f'(z)`, both multiplied by `e^{−scale}`; also
    /// `log Σ |a_k||p_k(z)|` for residual normalization. Coefficients beyond the
    /// basis length are ignored.
    pub fn eval_combination(&self, coeffs: &[Coefficient], z: Complex64) -> CombinationValue {
        let top = coeffs.iter().map(|c| c.log_abs).fold(f64::NEG_INFINITY, f64::max);
        let mut prev = Complex64::new(0.0, 0.0);
        let mut cur = Complex64::new(1.0, 0.0);
        let mut dprev = Complex64::new(0.0, 0.0);
        let mut dcur = Complex64::new(0.0, 0.0);
        let mut log_scale = 0.0;
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let len = coeffs.len().min(self.n + 1);
        for k in 0..len {
            let c = &coeffs[k];
            if !c.is_zero() {
                let w = c.unit() * (c.log_abs - top).exp();
                f += w * cur;
                df += w * dcur;
                abs_sum += w.norm() * cur.norm();
            }
            if k + 1 == len {
                break;
            }
            let next = self.step(k, z, cur, prev);
            let dnext = if self.is_monomial() {
                z * dcur + cur
            } else {
                ((z - self.b[k]) * dcur + cur - self.a[k] * dprev) / self.a[k + 1]
            };
            prev = cur;
            cur = next;
            dprev = dcur;
            dcur = dnext;
            let mag = cur.norm().max(dcur.norm());
            if mag > RESCALE_AT {
                for v in [&mut prev, &mut cur, &mut dprev, &mut dcur, &mut f, &mut df] {
                    *v /= mag;
                }
                abs_sum /= mag;
                log_scale += mag.ln();
            }
        }
        CombinationValue {
            value: f,
            derivative: df,
            log_scale: log_scale + top,
            log_abs_sum: abs_sum.ln() + log_scale + top,
        }
    }
}

/// Output of [`RecurrenceOnb::eval_combination`]: true values are `value·e^{log_scale}`.
#[derive(Debug, Clone, Copy)]
pub struct CombinationValue {
    pub value: Complex64,
    pub derivative: Complex64,
    pub log_scale: f64,
    pub log_abs_sum: f64,
}

/// `γ_k^{1/k}` against `1/Cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    /// `(k, γ_k^{1/k})` for `k = 1..=n`.
    pub ratios: Vec<(usize, f64)>,
    pub target: f64,
    /// Largest `|γ_k^{1/k} − 1/Cap|` over `k ≥ n/2`.
    pub max_deviation_last_half: f64,
}

pub fn capacity_check(onb: &RecurrenceOnb) -> Result<CapacityReport> {
    let n = onb.degree();
    if n < 10 {
        return Err(Error::InvalidArgument(format!("capacity check needs n ≥ 10, got {n}")));
    }
    let target = 1.0 / onb.spec().capacity();
    let ratios: Vec<(usize, f64)> = (1..=n).map(|k| (k, (onb.log_leading(k) / k as f64).exp())).collect();
    let max_deviation_last_half = ratios
        .iter()
        .filter(|(k, _)| 2 * k >= n)
        .map(|(_, r)| (r - target).abs())
        .fold(0.0, f64::max);
    Ok(CapacityReport {
        ratios,
        target,
        max_deviation_last_half,
    })
}

/// Green function of the complement of the support with pole at infinity.
pub fn green_function(spec: &RegularMeasureSpec, z: Complex64) -> f64 {
    match spec.support() {
        Support::UnitCircle => z.norm().ln().max(0.0),
        Support::Interval => {
            if z.im == 0.0 && z.re.abs() <= 1.0 {
                return 0.0;
            }
            let root = (z * z - 1.0).sqrt();
            let w = z + root;
            let w = if w.norm() >= 1.0 { w } else { z - root };
            w.norm().ln().max(0.0)
        }
    }
}

/// A planar set for equilibrium masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarRegion {
    /// Real interval `[a, b]`.
    Interval([f64; 2]),
    /// `[a, b] × [c, d]`.
    Rectangle([[f64; 2]; 2]),
    Region(RegionSpec),
}

impl PlanarRegion {
    pub fn validate(&self) -> Result<()> {
        match self {
            PlanarRegion::Interval([a, b]) => {
                if !(a <= b) {
                    return Err(Error::InvalidRegion(format!("interval [{a}, {b}] is reversed")));
                }
            }
            PlanarRegion::Rectangle([[a, b], [c, d]]) => {
                if !(a <= b && c <= d) {
                    return Err(Error::InvalidRegion("rectangle sides must be ordered".into()));
                }
            }
            PlanarRegion::Region(r) => {
                r.validate()?;
                if r.dimension() != 1 {
                    return Err(Error::InvalidRegion("planar region must be one-dimensional".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            PlanarRegion::Interval([a, b]) => z.im == 0.0 && z.re >= *a && z.re <= *b,
            PlanarRegion::Rectangle([[a, b], [c, d]]) => z.re > *a && z.re < *b && z.im > *c && z.im < *d,
            PlanarRegion::Region(r) => r.contains(&[z]),
        }
    }

    /// Boundary proximity (for flagging counts).
    pub fn near_boundary(&self, z: Complex64, tol: f64) -> bool {
        match self {
            PlanarRegion::Interval(_) => false,
            PlanarRegion::Rectangle([[a, b], [c, d]]) => {
                let inside_x = z.re > a - tol && z.re < b + tol;
                let inside_y = z.im > c - tol && z.im < d + tol;
                inside_x
                    && inside_y
                    && ((z.re - a).abs() < tol || (z.re - b).abs() < tol || (z.im - c).abs() < tol || (z.im - d).abs() < tol)
            }
            PlanarRegion::Region(r) => r.place_coordinate(0, z, tol) == crate::extremal::Placement::Boundary,
        }
    }

    pub fn id(&self) -> String {
        match self {
            PlanarRegion::Interval([a, b]) => format!("[{a},{b}]"),
            PlanarRegion::Rectangle([[a, b], [c, d]]) => format!("[{a},{b}]x[{c},{d}]"),
            PlanarRegion::Region(r) => r.id(),
        }
    }
}

fn arcsine_mass(a: f64, b: f64) -> f64 {
    let lo = a.clamp(-1.0, 1.0);
    let hi = b.clamp(-1.0, 1.0);
    if hi <= lo {
        0.0
    } else {
        (hi.asin() - lo.asin()) / PI
    }
}

/// `ν_{S_μ}` of a region: arcsine law on the interval, angular fraction on the circle.
pub fn equilibrium_mass(spec: &RegularMeasureSpec, region: &PlanarRegion) -> Result<f64> {
    region.validate()?;
    Ok(match (spec.support(), region) {
        (Support::Interval, PlanarRegion::Interval([a, b])) => arcsine_mass(*a, *b),
        (Support::Interval, PlanarRegion::Rectangle([[a, b], [c, d]])) => {
            if *c < 0.0 && *d > 0.0 {
                arcsine_mass(*a, *b)
            } else {
                0.0
            }
        }
        (Support::Interval, PlanarRegion::Region(r)) => {
            // the real segment meets the annulus in up to two intervals, the sector selects sides
            let [lo, hi] = r.annuli[0];
            let [t0, t1] = r.sector(0);
            let frac_right = angle_in(t0, t1, 0.0);
            let frac_left = angle_in(t0, t1, PI);
            let right = if frac_right { arcsine_mass(lo, hi) } else { 0.0 };
            let left = if frac_left { arcsine_mass(-hi, -lo) } else { 0.0 };
            right + left
        }
        (Support::UnitCircle, PlanarRegion::Interval(_)) => 0.0,
        (Support::UnitCircle, PlanarRegion::Rectangle(_)) => {
            // fraction of the circle strictly inside the rectangle, on a fine angular grid
            let nodes = 1 << 16;
            let inside = (0..nodes)
                .filter(|&i| region.contains(Complex64::from_polar(1.0, (i as f64 + 0.5) * 2.0 * PI / nodes as f64)))
                .count();
            inside as f64 / nodes as f64
        }
        (Support::UnitCircle, PlanarRegion::Region(r)) => {
            let [lo, hi] = r.annuli[0];
            if lo < 1.0 && hi > 1.0 {
                r.sector_fraction(0)
            } else {
                0.0
            }
        }
    })
}

fn angle_in(t0: f64, t1: f64, theta: f64) -> bool {
    let width = t1 - t0;
    if width >= 2.0 * PI {
        return true;
    }
    let d = (theta - t0).rem_euclid(2.0 * PI);
    d < width
}

/// Per degree, `max_probe |(1/n) log|p_n(z)| − g(z)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct OnpReport {
    pub rows: Vec<(usize, f64)>,
    /// Set when some degree fails to improve on its predecessor.
    pub non_decrease_flag: bool,
}

/// Distance from `z` to the convex hull of the support.
fn hull_distance(spec: &RegularMeasureSpec, z: Complex64) -> f64 {
    match spec.support() {
        Support::Interval => {
            let x = z.re.clamp(-1.0, 1.0);
            (z - Complex64::new(x, 0.0)).norm()
        }
        Support::UnitCircle => (z.norm() - 1.0).max(0.0),
    }
}

pub fn onp_root_asymptotic_check(spec: &RegularMeasureSpec, degrees: &[usize], probes: &[Complex64]) -> Result<OnpReport> {
    if let Some(z) = probes.iter().find(|z| hull_distance(spec, **z) < 0.1) {
        return Err(Error::InvalidArgument(format!("probe {z} lies within 0.1 of the support hull")));
    }
    let top = degrees.iter().copied().max().unwrap_or(0);
    let onb = build_recurrence_onb(spec, top)?;
    let rows: Vec<(usize, f64)> = degrees
        .iter()
        .map(|&n| {
            let err = probes
                .iter()
                .map(|&z| (onb.log_abs_p(n, z) / n.max(1) as f64 - green_function(spec, z)).abs())
                .fold(0.0, f64::max);
            (n, err)
        })
        .collect();
    let non_decrease_flag = rows.len() > 1 && !rows.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(OnpReport {
        rows,
        non_decrease_flag,
    })
}

/// Gauss nodes and weights for the measure (`count` points), exact for degree `2·count − 1`.
///
/// Chebyshev uses the closed-form Gauss–Chebyshev rule and the circle an
/// equispaced trapezoid rule; other kinds use Golub–Welsch on the Jacobi matrix.
pub fn gauss_rule(spec: &RegularMeasureSpec, count: usize) -> Result<(Vec<Complex64>, Vec<f64>)> {
    match spec {
        RegularMeasureSpec::Chebyshev => Ok((
            (1..=count)
                .map(|i| Complex64::new(((2 * i - 1) as f64 * PI / (2 * count) as f64).cos(), 0.0))
                .collect(),
            vec![1.0 / count as f64; count],
        )),
        RegularMeasureSpec::Circle => Ok((
            (0..count).map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / count as f64)).collect(),
            vec![1.0 / count as f64; count],
        )),
        _ => {
            let (a, b) = spec.coefficients(count)?;
            let mut j = DMatrix::<f64>::zeros(count, count);
            for i in 0..count {
                j[(i, i)] = b[i];
                if i + 1 < count {
                    j[(i, i + 1)] = a[i + 1];
                    j[(i + 1, i)] = a[i + 1];
                }
            }
            let eig = SymmetricEigen::new(j);
            let mut pairs: Vec<(f64, f64)> = (0..count)
                .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
                .collect();
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            Ok((
                pairs.iter().map(|p| Complex64::new(p.0, 0.0)).collect(),
                pairs.iter().map(|p| p.1).collect(),
            ))
        }
    }
}

/// `⟨p_j, p_k⟩_μ` by the Gauss rule with `nodes` points.
pub fn gram_entry(onb: &RecurrenceOnb, j: usize, k: usize, nodes: usize) -> Result<f64> {
    let (xs, ws) = gauss_rule(onb.spec(), nodes)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in xs.iter().zip(&ws) {
        let p = onb.eval_all(*x);
        acc += w * p[j] * p[k].conj();
    }
    Ok(acc.re)
}

/// `∫ ((1+x)/2)^k dμ` for the normalized Jacobi weight: `(1+x)/2` is
/// Beta(β+1, α+1) distributed, whose moments are a plain product.
pub fn jacobi_shifted_moment(alpha: f64, beta: f64, k: usize) -> f64 {
    (0..k)
        .map(|i| (beta + 1.0 + i as f64) / (alpha + beta + 2.0 + i as f64))
        .product()
}
