//! Simultaneous root finding (Aberth–Ehrlich) for polynomials given through an
//! evaluator, so that monomial and three-term-recurrence bases share one solver.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensembles::Coefficient;
use crate::error::{Error, Result};
use crate::stahltotik::RecurrenceOnb;

/// `a / b` without forming `|b|²`, which underflows for the tiny scaled values seen at high degree.
fn safe_div(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if s == 0.0 || !s.is_finite() {
        return a / b;
    }
    (a / s) / (b / s)
}

/// Value of a polynomial at one point, scaled so that only ratios are meaningful.
#[derive(Debug, Clone, Copy)]
pub struct PointEval {
    /// `f(z)/f'(z)`; infinite where `f' = 0`.
    pub newton: Complex64,
    /// `log|f(z)|`.
    pub log_abs: f64,
    /// `log Σ_k |c_k||b_k(z)|`, the scale rounding errors are measured against.
    pub log_abs_sum: f64,
}

impl PointEval {
    /// `log10(|f(z)| / Σ|c_k||b_k(z)|)`.
    pub fn log10_rel_residual(&self) -> f64 {
        (self.log_abs - self.log_abs_sum) / std::f64::consts::LN_10
    }
}

/// A univariate polynomial seen through value and derivative evaluations.
pub trait Univariate: Sync {
    fn degree(&self) -> usize;
    fn eval(&self, z: Complex64) -> PointEval;
    /// Starting points for the iteration; `rotation` perturbs them on restarts.
    fn initial_guesses(&self, rotation: f64, radial_jitter: &[f64]) -> Vec<Complex64>;
}

/// Power-basis polynomial `Σ c_k z^k` with coefficients scaled by their largest modulus.
#[derive(Debug, Clone)]
pub struct MonomialPoly {
    /// `c_k / max|c|`.
    coeffs: Vec<Complex64>,
    log_abs: Vec<f64>,
}

impl MonomialPoly {
    /// From log-magnitude coefficients; zero leading and trailing coefficients must be trimmed already.
    fn from_trimmed(c: &[Coefficient]) -> Self {
        let top = c.iter().map(|x| x.log_abs).fold(f64::NEG_INFINITY, f64::max);
        MonomialPoly {
            coeffs: c
                .iter()
                .map(|x| {
                    if x.is_zero() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        x.unit() * (x.log_abs - top).exp()
                    }
                })
                .collect(),
            log_abs: c.iter().map(|x| x.log_abs - top).collect(),
        }
    }

    fn horner(coeffs: &[Complex64], w: Complex64) -> (Complex64, Complex64, f64) {
        let aw = w.norm();
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        for c in coeffs.iter().rev() {
            dp = dp * w + p;
            p = p * w + c;
            abs_sum = abs_sum * aw + c.norm();
        }
        (p, dp, abs_sum)
    }
}

impl Univariate for MonomialPoly {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, z: Complex64) -> PointEval {
        let d = self.degree() as f64;
        if z.norm() <= 1.0 {
            let (p, dp, s) = Self::horner(&self.coeffs, z);
            PointEval {
                newton: safe_div(p, dp),
                log_abs: p.norm().ln(),
                log_abs_sum: s.ln(),
            }
        } else {
            // f(z) = z^d r(1/z) with r the reversed polynomial
            let w = z.inv();
            let rev: Vec<Complex64> = self.coeffs.iter().rev().copied().collect();
            let (r, dr, s) = Self::horner(&rev, w);
            let log_z = z.norm().ln();
            let denom = w * (d - w * safe_div(dr, r));
            PointEval {
                newton: safe_div(Complex64::new(1.0, 0.0), denom),
                log_abs: d * log_z + r.norm().ln(),
                log_abs_sum: d * log_z + s.ln(),
            }
        }
    }

    fn initial_guesses(&self, rotation: f64, radial_jitter: &[f64]) -> Vec<Complex64> {
        newton_polygon_guesses(&self.log_abs, rotation, radial_jitter)
    }
}

/// Bini's starting points: for each edge of the upper convex hull of `(k, log|c_k|)`,
/// a circle of radius `exp(slope)` carrying as many points as the edge is long.
pub fn newton_polygon_guesses(log_abs: &[f64], rotation: f64, radial_jitter: &[f64]) -> Vec<Complex64> {
    let pts: Vec<(usize, f64)> = log_abs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(k, v)| (k, *v))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the chord a–p
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let degree = log_abs.len() - 1;
    let mut out = Vec::with_capacity(degree);
    let sigma = 0.7;
    for edge in hull.windows(2) {
        let (i, ci) = edge[0];
        let (j, cj) = edge[1];
        let count = j - i;
        let radius = ((ci - cj) / count as f64).exp();
        for m in 0..count {
            let k = out.len();
            let jitter = radial_jitter.get(k).copied().unwrap_or(1.0);
            let angle = 2.0 * PI * m as f64 / count as f64 + 2.0 * PI * i as f64 / degree as f64 + sigma + rotation;
            out.push(Complex64::from_polar(radius * jitter, angle));
        }
    }
    out
}

/// `Σ c_k p_k` for an orthonormal recurrence basis.
pub struct RecurrencePoly<'a> {
    pub onb: &'a RecurrenceOnb,
    pub coeffs: &'a [Coefficient],
}

impl Univariate for RecurrencePoly<'_> {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, z: Complex64) -> PointEval {
        let v = self.onb.eval_combination(self.coeffs, z);
        PointEval {
            newton: safe_div(v.value, v.derivative),
            log_abs: v.value.norm().ln() + v.log_scale,
            log_abs_sum: v.log_abs_sum,
        }
    }

    fn initial_guesses(&self, rotation: f64, radial_jitter: &[f64]) -> Vec<Complex64> {
        // an ellipse around the interval, where zeros of such sums gather
        let d = self.degree();
        (0..d)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / d as f64 + 0.4 + rotation;
                let j = radial_jitter.get(k).copied().unwrap_or(1.0);
                Complex64::new(1.1 * j * t.cos(), 0.35 * j * t.sin())
            })
            .collect()
    }
}

/// Settings for [`find_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Relative step size at which a root is accepted.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-12,
            max_iter: 200,
            restarts: 3,
        }
    }
}

/// Roots with their diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// `log10(|f(z)| / Σ|c_k||b_k(z)|)` per root.
    pub log10_residuals: Vec<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_log10_residual(&self) -> f64 {
        self.log10_residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Aberth–Ehrlich iteration with Gauss–Seidel updates.
pub fn aberth<P: Univariate + ?Sized>(poly: &P, opts: &RootOptions) -> RootSet {
    let d = poly.degree();
    if d == 0 {
        return RootSet {
            roots: Vec::new(),
            log10_residuals: Vec::new(),
            iterations: 0,
            restarts: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ab);
    let mut best: Option<RootSet> = None;
    for attempt in 0..=opts.restarts {
        let (rotation, jitter): (f64, Vec<f64>) = if attempt == 0 {
            (0.0, Vec::new())
        } else {
            (
                rng.random::<f64>() * 2.0 * PI,
                (0..d).map(|_| 1.0 + 0.2 * (rng.random::<f64>() - 0.5)).collect(),
            )
        };
        let mut z = poly.initial_guesses(rotation, &jitter);
        let mut done = vec![false; d];
        let mut iterations = 0;
        for _ in 0..opts.max_iter {
            iterations += 1;
            let mut all = true;
            for i in 0..d {
                if done[i] {
                    continue;
                }
                let e = poly.eval(z[i]);
                if e.log_abs == f64::NEG_INFINITY {
                    done[i] = true;
                    continue;
                }
                let n = e.newton;
                let mut s = Complex64::new(0.0, 0.0);
                for (j, zj) in z.iter().enumerate() {
                    if j != i {
                        s += (z[i] - zj).inv();
                    }
                }
                let step = n / (Complex64::new(1.0, 0.0) - n * s);
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] -= step;
                }
                if step.norm() <= opts.tol * z[i].norm().max(f64::MIN_POSITIVE) || e.log10_rel_residual() < -15.5 {
                    done[i] = true;
                } else {
                    all = false;
                }
            }
            if all {
                break;
            }
        }
        let log10_residuals: Vec<f64> = z.iter().map(|&zi| poly.eval(zi).log10_rel_residual()).collect();
        let converged = done.iter().all(|&x| x) && z.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        let set = RootSet {
            roots: z,
            log10_residuals,
            iterations,
            restarts: attempt,
            converged,
        };
        if converged {
            return set;
        }
        let better = match &best {
            None => true,
            Some(b) => set.max_log10_residual() < b.max_log10_residual(),
        };
        if better {
            best = Some(set);
        }
    }
    best.expect("at least one attempt")
}

/// Splits off exact zero roots and trims leading zeros of a power-basis coefficient list.
fn trim(coeffs: &[Coefficient]) -> Result<(usize, &[Coefficient])> {
    let first = coeffs.iter().position(|c| !c.is_zero()).ok_or(Error::DegeneratePolynomial)?;
    let last = coeffs.iter().rposition(|c| !c.is_zero()).expect("some nonzero");
    Ok((first, &coeffs[first..=last]))
}

/// All roots of `Σ c_k z^k` given in log-magnitude form, with multiplicity.
pub fn find_roots_log(coeffs: &[Coefficient], opts: &RootOptions) -> Result<RootSet> {
    let (zeros_at_origin, core) = trim(coeffs)?;
    let poly = MonomialPoly::from_trimmed(core);
    let mut set = aberth(&poly, opts);
    set.roots.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros_at_origin));
    set.log10_residuals
        .extend(std::iter::repeat_n(f64::NEG_INFINITY, zeros_at_origin));
    Ok(set)
}

/// All roots of `Σ c_k z^k`.
pub fn find_roots_univariate(coeffs: &[Complex64], tol: f64, max_iter: usize) -> Result<RootSet> {
    let c: Vec<Coefficient> = coeffs.iter().map(|&z| Coefficient::from_complex(z)).collect();
    find_roots_log(
        &c,
        &RootOptions {
            tol,
            max_iter,
            ..RootOptions::default()
        },
    )
}

/// Roots of `Σ c_k p_k` in a recurrence basis, without converting to monomials.
pub fn find_roots_recurrence(onb: &RecurrenceOnb, coeffs: &[Coefficient], opts: &RootOptions) -> Result<RootSet> {
    if onb.is_monomial() {
        return find_roots_log(coeffs, opts);
    }
    let last = coeffs.iter().rposition(|c| !c.is_zero()).ok_or(Error::DegeneratePolynomial)?;
    let poly = RecurrencePoly {
        onb,
        coeffs: &coeffs[..=last],
    };
    Ok(aberth(&poly, opts))
}
