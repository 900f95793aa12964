//! Zeros of random polynomials: root finding, counting in regions, log-modulus
//! fields, slice volumes of zero divisors and the zero-free certificate.

mod aberth;
mod certificate;
mod slice;
mod winding;

use std::io::Write;

use num_complex::Complex64;

pub use aberth::{
    aberth, find_roots_log, find_roots_recurrence, find_roots_univariate, newton_polygon_guesses, MonomialPoly,
    PointEval, RecurrencePoly, RootOptions, RootSet, Univariate,
};
pub use certificate::{dominance_certificate, CertificateReport};
pub use slice::{restriction_coefficients, slice_volume, SliceVolume};
pub use winding::{count_zeros_argument_principle, count_zeros_contour, winding_number, WindingCount};

use crate::ensembles::{Basis, RandomPolynomial};
use crate::error::{Error, Result};
use crate::extremal::{ExtremalEvaluator, Placement, RegionSpec};
use crate::stahltotik::PlanarRegion;

/// Log-magnitude spread above which counting switches from root finding to contours.
pub const HEAVY_TAIL_SPREAD: f64 = 600.0;

/// Absolute distance (relative to the outer radius) within which a root counts as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// `f(z) = sum · e^{log_scale}`, with `log Σ|terms|` for judging cancellation.
#[derive(Debug, Clone, Copy)]
pub struct ScaledValue {
    pub sum: Complex64,
    pub log_scale: f64,
    pub log_abs_sum: f64,
}

impl ScaledValue {
    pub fn log_abs(&self) -> f64 {
        let a = self.sum.norm();
        if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + a.ln()
        }
    }

    /// `log10(|f| / Σ|terms|)`.
    pub fn log10_rel(&self) -> f64 {
        (self.log_abs() - self.log_abs_sum) / std::f64::consts::LN_10
    }
}

/// Evaluates `f` at `z` through per-term exponents, never forming `c_J` itself.
pub fn evaluate(poly: &RandomPolynomial, z: &[Complex64]) -> ScaledValue {
    match poly.basis() {
        Basis::Monomial(onb) => {
            let coeffs = poly.coeffs();
            let logs = onb.log_coeffs();
            if onb.dimension() == 1 {
                let w = z[0];
                let s = w.norm().ln();
                let u = if w.norm() > 0.0 { w / w.norm() } else { Complex64::new(1.0, 0.0) };
                let mut e = Vec::with_capacity(coeffs.len());
                for (k, (a, c)) in coeffs.iter().zip(logs).enumerate() {
                    let t = if k == 0 { 0.0 } else { k as f64 * s };
                    e.push(a.log_abs + c + t);
                }
                let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = Complex64::new(0.0, 0.0);
                let mut abs = 0.0;
                let mut uk = Complex64::new(1.0, 0.0);
                for (k, a) in coeffs.iter().enumerate() {
                    if k > 0 {
                        uk *= u;
                    }
                    if e[k] > f64::NEG_INFINITY {
                        let mag = (e[k] - top).exp();
                        sum += a.unit() * uk * mag;
                        abs += mag;
                    }
                }
                ScaledValue {
                    sum,
                    log_scale: top,
                    log_abs_sum: top + abs.ln(),
                }
            } else {
                let s: Vec<f64> = z.iter().map(|w| w.norm().ln()).collect();
                let th: Vec<f64> = z.iter().map(|w| w.arg()).collect();
                let mut e = Vec::with_capacity(coeffs.len());
                let mut ph = Vec::with_capacity(coeffs.len());
                for ((j, a), c) in onb.indices().iter().zip(coeffs).zip(logs) {
                    let mut t = a.log_abs + c;
                    let mut p = a.phase;
                    for k in 0..j.len() {
                        if j[k] > 0 {
                            t += j[k] as f64 * s[k];
                            p += j[k] as f64 * th[k];
                        }
                    }
                    e.push(t);
                    ph.push(p);
                }
                let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = Complex64::new(0.0, 0.0);
                let mut abs = 0.0;
                for (t, p) in e.iter().zip(&ph) {
                    if *t > f64::NEG_INFINITY {
                        let mag = (t - top).exp();
                        sum += Complex64::from_polar(mag, *p);
                        abs += mag;
                    }
                }
                ScaledValue {
                    sum,
                    log_scale: top,
                    log_abs_sum: top + abs.ln(),
                }
            }
        }
        Basis::Recurrence(onb) => {
            let v = onb.eval_combination(poly.coeffs(), z[0]);
            ScaledValue {
                sum: v.value,
                log_scale: v.log_scale,
                log_abs_sum: v.log_abs_sum,
            }
        }
    }
}

/// `log|f(z)|`, or `−∞` where the rescaled sum is exactly zero.
pub fn log_modulus(poly: &RandomPolynomial, z: &[Complex64]) -> f64 {
    evaluate(poly, z).log_abs()
}

/// Spread `max − min` of the finite monomial log-magnitudes `log|a_J| + log c_J`.
pub fn log_spread(poly: &RandomPolynomial) -> f64 {
    match poly.monomial_log_terms() {
        Some(t) => {
            let f: Vec<f64> = t.into_iter().filter(|v| v.is_finite()).collect();
            let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
            if f.is_empty() {
                0.0
            } else {
                hi - lo
            }
        }
        None => 0.0,
    }
}

/// Roots of a univariate random polynomial in its own basis.
pub fn find_roots(poly: &RandomPolynomial, opts: &RootOptions) -> Result<RootSet> {
    match poly.basis() {
        Basis::Monomial(onb) => {
            if onb.dimension() != 1 {
                return Err(Error::InvalidArgument("root finding needs a univariate polynomial".into()));
            }
            let coeffs: Vec<_> = poly
                .coeffs()
                .iter()
                .zip(onb.log_coeffs())
                .map(|(a, c)| crate::ensembles::Coefficient {
                    log_abs: a.log_abs + c,
                    phase: a.phase,
                })
                .collect();
            find_roots_log(&coeffs, opts)
        }
        Basis::Recurrence(onb) => find_roots_recurrence(onb, poly.coeffs(), opts),
    }
}

/// Zeros strictly inside a region; those within tolerance of its boundary are tallied apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegionCount {
    pub count: usize,
    pub boundary: usize,
}

/// Counts roots in a one-dimensional [`RegionSpec`].
pub fn count_zeros_region(roots: &RootSet, region: &RegionSpec) -> Result<RegionCount> {
    region.validate()?;
    if region.dimension() != 1 {
        return Err(Error::InvalidRegion("zero counting needs a one-dimensional region".into()));
    }
    let tol = BOUNDARY_TOL * region.annuli[0][1].max(1.0);
    let mut out = RegionCount::default();
    for &z in &roots.roots {
        match region.place_coordinate(0, z, tol) {
            Placement::Inside => out.count += 1,
            Placement::Boundary => out.boundary += 1,
            Placement::Outside => {}
        }
    }
    Ok(out)
}

/// Counts roots in a planar region (rectangles, intervals or annular sectors).
pub fn count_zeros_planar(roots: &RootSet, region: &PlanarRegion) -> Result<RegionCount> {
    region.validate()?;
    let mut out = RegionCount::default();
    for &z in &roots.roots {
        if region.near_boundary(z, BOUNDARY_TOL) {
            out.boundary += 1;
        } else if region.contains(z) {
            out.count += 1;
        }
    }
    Ok(out)
}

/// A region count together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOutcome {
    pub count: RegionCount,
    /// Counted by contour winding because the coefficient spread was too wide for root finding.
    pub fallback: bool,
    pub converged: bool,
    pub max_log10_residual: f64,
    pub total_roots: usize,
}

/// Counts zeros of a univariate polynomial in a region, switching to contour
/// winding when the monomial log-magnitudes spread over more than [`HEAVY_TAIL_SPREAD`] nats.
pub fn count_zeros_polynomial(poly: &RandomPolynomial, region: &RegionSpec, opts: &RootOptions) -> Result<CountOutcome> {
    region.validate()?;
    if log_spread(poly) > HEAVY_TAIL_SPREAD {
        let w = count_zeros_contour(poly, region, 0)?;
        return Ok(CountOutcome {
            count: RegionCount {
                count: w.count.max(0) as usize,
                boundary: 0,
            },
            fallback: true,
            converged: true,
            max_log10_residual: f64::NAN,
            total_roots: poly.degree(),
        });
    }
    let roots = find_roots(poly, opts)?;
    Ok(CountOutcome {
        count: count_zeros_region(&roots, region)?,
        fallback: false,
        converged: roots.converged,
        max_log10_residual: roots.max_log10_residual(),
        total_roots: roots.len(),
    })
}

/// Writes roots as CSV with columns `re,im,log10_residual`.
pub fn write_roots_csv<W: Write>(roots: &RootSet, mut out: W) -> Result<()> {
    writeln!(out, "re,im,log10_residual")?;
    for (z, r) in roots.roots.iter().zip(&roots.log10_residuals) {
        writeln!(out, "{:?},{:?},{:?}", z.re, z.im, r)?;
    }
    Ok(())
}

/// Output of [`l1_distance_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct L1Field {
    pub distance: f64,
    /// Grid points where `log|f| = −∞`, left out of the mean.
    pub excluded: usize,
    pub points: usize,
    pub warning: Option<String>,
}

/// Cell-volume-weighted mean of `|(1/n) log|f(z)| − V(z)|` over a polar grid on the
/// region, `resolution` cells per radial and angular direction of every coordinate.
pub fn l1_distance_field(
    poly: &RandomPolynomial,
    ev: &ExtremalEvaluator,
    region: &RegionSpec,
    resolution: usize,
) -> Result<L1Field> {
    region.validate()?;
    let m = region.dimension();
    if m != poly.dimension() || m != ev.dimension() {
        return Err(Error::InvalidArgument(format!(
            "region dimension {m}, polynomial {}, evaluator {}",
            poly.dimension(),
            ev.dimension()
        )));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    if region.is_degenerate() {
        return Ok(L1Field {
            distance: 0.0,
            excluded: 0,
            points: 0,
            warning: Some(format!("region {} has zero volume", region.id())),
        });
    }
    // per-coordinate cells: (point, area weight)
    let axes: Vec<Vec<(Complex64, f64)>> = (0..m)
        .map(|k| {
            let [lo, hi] = region.annuli[k];
            let [a, b] = region.sector(k);
            let dr = (hi - lo) / resolution as f64;
            let dt = (b - a) / resolution as f64;
            let mut cells = Vec::with_capacity(resolution * resolution);
            for i in 0..resolution {
                let r = lo + (i as f64 + 0.5) * dr;
                for j in 0..resolution {
                    let t = a + (j as f64 + 0.5) * dt;
                    cells.push((Complex64::from_polar(r, t), r * dr * dt));
                }
            }
            cells
        })
        .collect();
    let n = poly.degree() as f64;
    let per_axis = resolution * resolution;
    let total: usize = per_axis.pow(m as u32);
    let mut acc = 0.0;
    let mut weight = 0.0;
    let mut excluded = 0;
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    for flat in 0..total {
        let mut rest = flat;
        let mut wgt = 1.0;
        for (k, axis) in axes.iter().enumerate() {
            let (p, w) = axis[rest % per_axis];
            rest /= per_axis;
            z[k] = p;
            wgt *= w;
        }
        let lm = log_modulus(poly, &z);
        if lm == f64::NEG_INFINITY {
            excluded += 1;
            continue;
        }
        acc += wgt * (lm / n - ev.value(&z)).abs();
        weight += wgt;
    }
    Ok(L1Field {
        distance: if weight > 0.0 { acc / weight } else { 0.0 },
        excluded,
        points: total,
        warning: None,
    })
}
