//! Zero counting by the argument principle along closed contours.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{evaluate, ScaledValue};
use crate::ensembles::RandomPolynomial;
use crate::error::{Error, Result};
use crate::extremal::RegionSpec;

/// Phase steps larger than this between neighbouring nodes trigger bisection.
const MAX_STEP: f64 = PI / 3.0;
const MAX_DEPTH: u32 = 40;
/// Relative residual (log10) below which the contour is judged to pass through a zero.
const DIP: f64 = -11.0;
const JITTERS: usize = 6;

/// Result of a contour count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingCount {
    pub count: i64,
    /// Function evaluations used, including refinements.
    pub nodes: usize,
    /// How many perturbed contours were tried before one stayed clear of zeros.
    pub jitters: usize,
}

fn wrap(d: f64) -> f64 {
    let mut d = d.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

fn phase(v: &ScaledValue) -> Result<f64> {
    if v.log10_rel() < DIP || !v.sum.re.is_finite() || !v.sum.im.is_finite() {
        return Err(Error::Winding("contour passes too close to a zero".into()));
    }
    Ok(v.sum.arg())
}

/// Winding number of `f ∘ γ` for a closed path `γ: [0, 1] → ℂ`, starting from
/// `nodes` equispaced parameters and bisecting wherever the phase jumps.
pub fn winding_number<F>(f: F, nodes: usize) -> Result<(i64, usize)>
where
    F: Fn(f64) -> ScaledValue,
{
    let nodes = nodes.max(8);
    let mut evals = 0usize;
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev_phase = phase(&f(0.0))?;
    evals += 1;
    for i in 1..=nodes {
        let t = i as f64 / nodes as f64;
        let ph = phase(&f(t))?;
        evals += 1;
        // explicit stack of pending subintervals
        let mut stack = vec![(prev_t, prev_phase, t, ph, 0u32)];
        while let Some((ta, pa, tb, pb, depth)) = stack.pop() {
            let d = wrap(pb - pa);
            if d.abs() <= MAX_STEP {
                total += d;
                continue;
            }
            if depth >= MAX_DEPTH {
                return Err(Error::Winding("phase refinement did not resolve".into()));
            }
            let tm = 0.5 * (ta + tb);
            let pm = phase(&f(tm))?;
            evals += 1;
            // right half first so the left half is accumulated first
            stack.push((tm, pm, tb, pb, depth + 1));
            stack.push((ta, pa, tm, pm, depth + 1));
        }
        prev_t = t;
        prev_phase = ph;
    }
    let turns = total / (2.0 * PI);
    let count = turns.round();
    if (turns - count).abs() > 0.1 {
        return Err(Error::Winding(format!("accumulated phase {turns} turns is not an integer")));
    }
    Ok((count as i64, evals))
}

fn default_nodes(poly: &RandomPolynomial, nodes: usize) -> usize {
    nodes.max(4 * (poly.degree() + 1)).max(64)
}

fn circle_count(poly: &RandomPolynomial, r: f64, nodes: usize) -> Result<(i64, usize)> {
    if r == 0.0 {
        return Ok((0, 0));
    }
    winding_number(|t| evaluate(poly, &[Complex64::from_polar(r, 2.0 * PI * t)]), nodes)
}

/// Number of zeros in `|z| < r` from the winding of `f` on the circle; the radius
/// is nudged if the circle runs through a zero.
pub fn count_zeros_argument_principle(poly: &RandomPolynomial, r: f64, nodes: usize) -> Result<WindingCount> {
    if poly.dimension() != 1 {
        return Err(Error::InvalidArgument("argument principle needs a univariate polynomial".into()));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius {r} must be finite and non-negative")));
    }
    let nodes = default_nodes(poly, nodes);
    let mut last = None;
    for k in 0..JITTERS {
        let rk = r * (1.0 + jitter(k));
        match circle_count(poly, rk, nodes) {
            Ok((count, evals)) => {
                return Ok(WindingCount {
                    count,
                    nodes: evals,
                    jitters: k,
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn jitter(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        s * 1e-7 * k as f64
    }
}

/// Number of zeros in a one-dimensional region by contour winding: a difference of
/// two circles for full annuli, the boundary of the annular sector otherwise.
pub fn count_zeros_contour(poly: &RandomPolynomial, region: &RegionSpec, nodes: usize) -> Result<WindingCount> {
    region.validate()?;
    if region.dimension() != 1 || poly.dimension() != 1 {
        return Err(Error::InvalidRegion("contour counting needs one-dimensional input".into()));
    }
    let [lo, hi] = region.annuli[0];
    let [a, b] = region.sector(0);
    if hi == lo || b == a {
        return Ok(WindingCount {
            count: 0,
            nodes: 0,
            jitters: 0,
        });
    }
    let nodes = default_nodes(poly, nodes);
    let full = b - a >= 2.0 * PI - 1e-12;
    let mut last = None;
    for k in 0..JITTERS {
        let d = jitter(k);
        let attempt = if full {
            circle_count(poly, hi * (1.0 + d), nodes).and_then(|(outer, e1)| {
                circle_count(poly, lo * (1.0 - d), nodes).map(|(inner, e2)| (outer - inner, e1 + e2))
            })
        } else {
            let (r1, r0) = (hi * (1.0 + d), lo * (1.0 - d));
            let (t0, t1) = (a - d, b + d);
            let path = |t: f64| -> Complex64 {
                let u = 4.0 * t;
                let piece = (u.floor() as usize).min(3);
                let s = u - piece as f64;
                match piece {
                    0 => Complex64::from_polar(r1, t0 + s * (t1 - t0)),
                    1 => Complex64::from_polar(r1 + s * (r0 - r1), t1),
                    2 => Complex64::from_polar(r0, t1 + s * (t0 - t1)),
                    _ => Complex64::from_polar(r0 + s * (r1 - r0), t0),
                }
            };
            winding_number(|t| evaluate(poly, &[path(t)]), 4 * nodes)
        };
        match attempt {
            Ok((count, evals)) => {
                return Ok(WindingCount {
                    count,
                    nodes: evals,
                    jitters: k,
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
