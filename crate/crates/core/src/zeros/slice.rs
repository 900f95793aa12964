//! `(2m−2)`-volume of a zero divisor inside a product region, estimated by
//! counting zeros on coordinate lines.

use num_complex::Complex64;

use super::aberth::{find_roots_log, RootOptions};
use crate::ensembles::{Basis, Coefficient, RandomPolynomial};
use crate::error::{Error, Result};
use crate::extremal::{Placement, RegionSpec};
use crate::lowdisc::halton;

const BATCHES: usize = 8;

/// Output of [`slice_volume`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceVolume {
    pub value: f64,
    /// Standard error from batch means.
    pub se: f64,
    /// Contribution of lines parallel to each coordinate axis.
    pub per_axis: Vec<f64>,
    /// Base points redrawn because the restriction vanished identically.
    pub resampled: usize,
}

/// Coefficients of `ζ ↦ f(w_1, …, ζ, …, w_m)` (`ζ` in slot `axis`), accumulated
/// in log space; `base[axis]` is ignored. Returns `None` if every coefficient vanishes.
pub fn restriction_coefficients(poly: &RandomPolynomial, axis: usize, base: &[Complex64]) -> Result<Option<Vec<Coefficient>>> {
    let onb = match poly.basis() {
        Basis::Monomial(onb) => onb,
        Basis::Recurrence(_) => return Err(Error::Unsupported("slices need a monomial basis".into())),
    };
    let m = onb.dimension();
    if base.len() != m || axis >= m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: base.len(),
        });
    }
    let s: Vec<f64> = base.iter().map(|w| w.norm().ln()).collect();
    let th: Vec<f64> = base.iter().map(|w| w.arg()).collect();
    let n = onb.degree();
    let mut terms: Vec<(usize, f64, f64)> = Vec::with_capacity(onb.len());
    let mut top = vec![f64::NEG_INFINITY; n + 1];
    for ((j, a), c) in onb.indices().iter().zip(poly.coeffs()).zip(onb.log_coeffs()) {
        if a.is_zero() {
            continue;
        }
        let mut e = a.log_abs + c;
        let mut p = a.phase;
        for l in 0..m {
            if l != axis && j[l] > 0 {
                e += j[l] as f64 * s[l];
                p += j[l] as f64 * th[l];
            }
        }
        if e == f64::NEG_INFINITY {
            continue;
        }
        let power = j[axis] as usize;
        top[power] = top[power].max(e);
        terms.push((power, e, p));
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
    for (power, e, p) in terms {
        sums[power] += Complex64::from_polar((e - top[power]).exp(), p);
    }
    let out: Vec<Coefficient> = sums
        .iter()
        .zip(&top)
        .map(|(v, t)| {
            let a = v.norm();
            if a == 0.0 {
                Coefficient::ZERO
            } else {
                Coefficient {
                    log_abs: t + a.ln(),
                    phase: v.arg(),
                }
            }
        })
        .collect();
    if out.iter().all(Coefficient::is_zero) {
        Ok(None)
    } else {
        Ok(Some(out))
    }
}

/// Point of the factor `k` of `region` from two uniforms, uniform in area.
fn factor_point(region: &RegionSpec, k: usize, u: f64, v: f64) -> Complex64 {
    let [lo, hi] = region.annuli[k];
    let [a, b] = region.sector(k);
    let r = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
    Complex64::from_polar(r, a + v * (b - a))
}

/// Estimates `Vol_{2m−2}(Z_f ∩ U)` by summing, over each axis `k`, the mean zero
/// count of `f` on `z_k`-lines through `base_samples` quasi-random base points
/// times the area of the remaining factors.
pub fn slice_volume(poly: &RandomPolynomial, region: &RegionSpec, base_samples: usize) -> Result<SliceVolume> {
    region.validate()?;
    let m = poly.dimension();
    if m < 2 {
        return Err(Error::InvalidArgument("slice volumes need m ≥ 2".into()));
    }
    if region.dimension() != m {
        return Err(Error::InvalidRegion(format!(
            "region has {} coordinates, polynomial {m}",
            region.dimension()
        )));
    }
    if base_samples == 0 {
        return Err(Error::InvalidArgument("need at least one base point".into()));
    }
    let opts = RootOptions::default();
    let mut per_axis = Vec::with_capacity(m);
    let mut var = 0.0;
    let mut resampled = 0;
    for k in 0..m {
        let area: f64 = (0..m).filter(|&l| l != k).map(|l| region.factor_area(l)).product();
        if area == 0.0 || region.factor_area(k) == 0.0 {
            per_axis.push(0.0);
            continue;
        }
        let tol = super::BOUNDARY_TOL * region.annuli[k][1].max(1.0);
        let mut counts = Vec::with_capacity(base_samples);
        let mut index = 0u64;
        let mut misses = 0usize;
        while counts.len() < base_samples {
            let h = halton(index, 2 * (m - 1));
            index += 1;
            let mut base = vec![Complex64::new(0.0, 0.0); m];
            let mut slot = 0;
            for l in 0..m {
                if l != k {
                    base[l] = factor_point(region, l, h[2 * slot], h[2 * slot + 1]);
                    slot += 1;
                }
            }
            let coeffs = match restriction_coefficients(poly, k, &base)? {
                Some(c) => c,
                None => {
                    misses += 1;
                    if misses > base_samples {
                        return Err(Error::VanishingSlice(format!(
                            "f vanishes on {misses} sampled lines along axis {}",
                            k + 1
                        )));
                    }
                    continue;
                }
            };
            let roots = find_roots_log(&coeffs, &opts)?;
            let c = roots
                .roots
                .iter()
                .filter(|&&z| region.place_coordinate(k, z, tol) == Placement::Inside)
                .count();
            counts.push(c as f64);
        }
        resampled += misses;
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        per_axis.push(mean * area);
        let batches = BATCHES.min(counts.len());
        if batches >= 2 {
            let size = counts.len() / batches;
            let means: Vec<f64> = (0..batches)
                .map(|b| counts[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
                .collect();
            let bm = means.iter().sum::<f64>() / batches as f64;
            let v = means.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (batches - 1) as f64 / batches as f64;
            var += v * area * area;
        }
    }
    Ok(SliceVolume {
        value: per_axis.iter().sum(),
        se: var.sqrt(),
        per_axis,
        resampled,
    })
}
