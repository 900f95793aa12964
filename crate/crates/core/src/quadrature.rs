//! Adaptive Gauss–Legendre quadrature, including a log-domain driver for
//! integrands that only fit in floating point after subtracting their peak.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gl15();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * x
        .iter()
        .zip(w)
        .map(|(xi, wi)| wi * f(mid + half * xi))
        .sum::<f64>()
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive 15-point Gauss–Legendre on `[a, b]` with bisection until each
/// panel agrees with its two halves to `rel_tol` (relative to the running total).
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    let coarse = panel(f, a, b);
    let scale = coarse.abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, coarse)];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(f, lo, mid);
        let right = panel(f, mid, hi);
        let diff = (left + right - whole).abs();
        panels += 1;
        if panels > max_panels {
            return Err(Error::Quadrature(format!(
                "more than {max_panels} panels on [{a}, {b}]"
            )));
        }
        let width_frac = (hi - lo) / (b - a);
        if diff <= rel_tol * scale * width_frac.max(1e-3) || (hi - lo) < 1e-12 * (b - a) {
            value += left + right;
            error += diff;
        } else {
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
    }
    Ok(QuadResult {
        value,
        error,
        panels,
    })
}

/// Log of a positive integral, with its log-integrand given.
#[derive(Debug, Clone, Copy)]
pub struct LogQuad {
    pub log_value: f64,
    pub rel_error: f64,
    pub panels: usize,
    /// Integration interval after truncation.
    pub lo: f64,
    pub hi: f64,
}

/// Settings for [`log_integral`].
#[derive(Debug, Clone, Copy)]
pub struct LogQuadOptions {
    /// Range scanned for the peak of the log-integrand.
    pub scan: (f64, f64),
    pub scan_step: f64,
    /// Truncate where the log-integrand falls this many nats below its peak.
    pub drop_nats: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for LogQuadOptions {
    fn default() -> Self {
        LogQuadOptions {
            scan: (-60.0, 60.0),
            scan_step: 0.05,
            drop_nats: 40.0,
            rel_tol: 1e-14,
            max_panels: 20_000,
        }
    }
}

/// `log ∫ exp(g(s)) ds` over the real line.
pub fn log_integral<G: Fn(f64) -> f64>(g: &G, opts: &LogQuadOptions) -> Result<LogQuad> {
    let (lo, hi) = opts.scan;
    let steps = ((hi - lo) / opts.scan_step).ceil() as usize;
    let mut best_s = lo;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        let s = lo + i as f64 * opts.scan_step;
        let v = g(s);
        if v > best {
            best = v;
            best_s = s;
        }
    }
    if !best.is_finite() {
        return Err(Error::Quadrature("log-integrand has no finite peak".into()));
    }
    // golden-section refinement around the scanned peak
    let (mut a, mut b) = (best_s - opts.scan_step, best_s + opts.scan_step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    let peak_s = 0.5 * (a + b);
    let peak = g(peak_s).max(best);

    let cutoff = peak - opts.drop_nats;
    let left = walk_to_cutoff(g, peak_s, -1.0, cutoff, opts)?;
    let right = walk_to_cutoff(g, peak_s, 1.0, cutoff, opts)?;
    let shifted = |s: f64| {
        let v = g(s) - peak;
        if v.is_finite() {
            v.exp()
        } else {
            0.0
        }
    };
    // split at the peak so panels resolve sharp maxima
    let q1 = adaptive(&shifted, left, peak_s, opts.rel_tol, opts.max_panels)?;
    let q2 = adaptive(&shifted, peak_s, right, opts.rel_tol, opts.max_panels)?;
    let total = q1.value + q2.value;
    if !(total > 0.0) {
        return Err(Error::Quadrature("integral evaluated to zero".into()));
    }
    Ok(LogQuad {
        log_value: peak + total.ln(),
        rel_error: (q1.error + q2.error) / total,
        panels: q1.panels + q2.panels,
        lo: left,
        hi: right,
    })
}

fn walk_to_cutoff<G: Fn(f64) -> f64>(
    g: &G,
    start: f64,
    dir: f64,
    cutoff: f64,
    opts: &LogQuadOptions,
) -> Result<f64> {
    let mut step = opts.scan_step.max(1e-3);
    let mut s = start;
    for _ in 0..200 {
        let next = s + dir * step;
        if !(g(next) > cutoff) {
            // bisect the crossing
            let (mut inside, mut outside) = (s, next);
            for _ in 0..60 {
                let mid = 0.5 * (inside + outside);
                if g(mid) > cutoff {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            return Ok(outside);
        }
        s = next;
        step *= 1.5;
    }
    Err(Error::Quadrature(format!(
        "log-integrand does not decay {} nats below its peak",
        opts.drop_nats
    )))
}
