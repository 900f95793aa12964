//! A sufficient condition for `f` to have no zeros in a product of annuli: one
//! term dominates the Cauchy–Schwarz bound on all the others.

use crate::ensembles::RandomPolynomial;
use crate::error::{Error, Result};
use crate::extremal::RegionSpec;
use crate::onb::{bergman_diag_log_radii, dot_log, log_sum_exp, MonomialOnb};

/// Both sides of the dominance inequality, in logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    pub fires: bool,
    /// Position of the dominant index in the basis.
    pub dominant: usize,
    /// `log|a_{j*}| + log b_{j*}`.
    pub log_lower: f64,
    /// `log‖a′‖ + ½ log sup_U S_n`.
    pub log_upper: f64,
}

impl CertificateReport {
    /// `log_lower − log_upper`; positive exactly when the certificate fires.
    pub fn margin(&self) -> f64 {
        self.log_lower - self.log_upper
    }
}

/// Checks `‖a′‖ · sup_U S_n(z,z)^{1/2} < |a_{j*}| · inf_U |P_{j*}|`.
///
/// `inf_U |c_J z^J| = c_J Π (r_k⁻)^{j_k}` and `S_n` increases in every `|z_k|`, so its
/// supremum sits at the outer radii. The inequality implies `f ≠ 0` on `U`.
pub fn dominance_certificate(poly: &RandomPolynomial, region: &RegionSpec, onb: &MonomialOnb) -> Result<CertificateReport> {
    region.validate()?;
    if !region.avoids_axes() {
        return Err(Error::InvalidRegion("certificate needs positive inner radii".into()));
    }
    let m = onb.dimension();
    if region.dimension() != m || poly.dimension() != m || poly.coeffs().len() != onb.len() {
        return Err(Error::LengthMismatch {
            expected: onb.len(),
            got: poly.coeffs().len(),
        });
    }
    let inner: Vec<f64> = region.annuli.iter().map(|a| a[0].ln()).collect();
    let outer: Vec<f64> = region.annuli.iter().map(|a| a[1].ln()).collect();
    let coeffs = poly.coeffs();
    let mut best = (usize::MAX, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, (j, c)) in onb.indices().iter().zip(onb.log_coeffs()).enumerate() {
        let log_b = c + dot_log(j, &inner);
        let score = coeffs[i].log_abs + log_b;
        if score > best.1 {
            best = (i, score, log_b);
        }
    }
    let (dominant, log_lower, _) = best;
    if dominant == usize::MAX {
        return Err(Error::DegeneratePolynomial);
    }
    let rest: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != dominant)
        .map(|(_, a)| 2.0 * a.log_abs)
        .collect();
    let log_rest = 0.5 * log_sum_exp(&rest);
    let log_upper = log_rest + 0.5 * bergman_diag_log_radii(onb, &outer);
    Ok(CertificateReport {
        fires: log_lower > log_upper,
        dominant,
        log_lower,
        log_upper,
    })
}
