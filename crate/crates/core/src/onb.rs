//! Orthonormal monomial bases for circular weights, the elliptic basis, and
//! the Bergman kernel diagonal.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::extremal::ExtremalEvaluator;
use crate::quadrature::{adaptive, log_integral, LogQuadOptions};
use crate::weights::{WeightHandle, WeightKind};

/// All `J ∈ ℕ^m` with `|J| ≤ n` (or `|J| = n`), in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    n: usize,
    m: usize,
    homogeneous: bool,
    flat: Vec<u32>,
}

impl MultiIndexSet {
    pub fn new(n: usize, m: usize) -> Self {
        Self::build(n, m, false)
    }

    /// Only the indices with `|J| = n`.
    pub fn homogeneous(n: usize, m: usize) -> Self {
        Self::build(n, m, true)
    }

    fn build(n: usize, m: usize, homogeneous: bool) -> Self {
        assert!(m >= 1, "dimension must be positive");
        let mut flat = Vec::new();
        let mut cur = vec![0u32; m];
        fill(&mut flat, &mut cur, 0, n as u32, homogeneous);
        MultiIndexSet {
            n,
            m,
            homogeneous,
            flat,
        }
    }

    fn from_flat(n: usize, m: usize, flat: Vec<u32>) -> Self {
        let homogeneous = flat.chunks(m).all(|j| j.iter().sum::<u32>() as usize == n);
        MultiIndexSet {
            n,
            m,
            homogeneous: homogeneous && flat.len() / m != binomial_count(n, m),
            flat,
        }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.flat[i * self.m..(i + 1) * self.m]
    }

    pub fn iter(&self) -> std::slice::Chunks<'_, u32> {
        self.flat.chunks(self.m)
    }

    /// Position of `j` in the ordering.
    pub fn position(&self, j: &[u32]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(j) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

fn fill(out: &mut Vec<u32>, cur: &mut [u32], k: usize, left: u32, homogeneous: bool) {
    if k + 1 == cur.len() {
        let lo = if homogeneous { left } else { 0 };
        for v in lo..=left {
            cur[k] = v;
            out.extend_from_slice(cur);
        }
        return;
    }
    for v in 0..=left {
        cur[k] = v;
        fill(out, cur, k + 1, left - v, homogeneous);
    }
    cur[k] = 0;
}

/// `binomial(n + m, m)`, the number of monomials of degree at most `n`.
pub fn binomial_count(n: usize, m: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=m as u128 {
        c = c * (n as u128 + i) / i;
    }
    c as usize
}

/// Where the coefficients of a monomial basis came from.
#[derive(Debug, Clone)]
pub enum OnbFamily {
    /// Unit norms in `L²(e^{−2nQ} dV)`.
    Weighted {
        weight: WeightHandle,
        quadrature: QuadratureMeta,
    },
    /// `binomial(n; J)^{1/2} z^J`, orthonormal for `(1+‖z‖²)^{−(n+m+1)}` up to a global constant.
    Elliptic,
    /// Read back from CSV.
    Imported,
    /// Plain powers `z^J`, for exact test polynomials.
    Unit,
}

/// Summary of the radial integrals behind a weighted basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMeta {
    /// Gauss–Legendre panels over all distinct integrals.
    pub panels: usize,
    /// Number of distinct one-dimensional (or iterated) integrals.
    pub integrals: usize,
    /// Largest estimated relative error.
    pub max_rel_error: f64,
    /// Nats below the peak at which integrands are truncated.
    pub truncation_nats: f64,
    /// Whether the weight's closed-form moments were used.
    pub closed_form: bool,
}

/// A basis `P_J = c_J z^J` indexed by a [`MultiIndexSet`], with `log c_J` stored.
#[derive(Debug, Clone)]
pub struct MonomialOnb {
    indices: MultiIndexSet,
    log_coeffs: Vec<f64>,
    family: OnbFamily,
}

impl MonomialOnb {
    pub fn degree(&self) -> usize {
        self.indices.degree()
    }

    pub fn dimension(&self) -> usize {
        self.indices.dimension()
    }

    pub fn len(&self) -> usize {
        self.log_coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_coeffs.is_empty()
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.indices
    }

    pub fn log_coeffs(&self) -> &[f64] {
        &self.log_coeffs
    }

    pub fn family(&self) -> &OnbFamily {
        &self.family
    }

    /// `log c_J` for `J` in the basis.
    pub fn log_coeff(&self, j: &[u32]) -> Option<f64> {
        self.indices.position(j).map(|i| self.log_coeffs[i])
    }

    /// Same basis with every coefficient multiplied by `e^shift`.
    pub fn scaled(&self, shift: f64) -> MonomialOnb {
        MonomialOnb {
            indices: self.indices.clone(),
            log_coeffs: self.log_coeffs.iter().map(|c| c + shift).collect(),
            family: self.family.clone(),
        }
    }

    /// CSV with columns `j_1..j_m, log_c`; floats written in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = self.dimension();
        let header: Vec<String> = (1..=m).map(|k| format!("j_{k}")).chain(["log_c".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for (j, c) in self.indices.iter().zip(&self.log_coeffs) {
            for v in j {
                write!(out, "{v},")?;
            }
            writeln!(out, "{c:?}")?;
        }
        Ok(())
    }

    /// Reads a table written by [`MonomialOnb::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<MonomialOnb> {
        let mut lines = input.lines().enumerate();
        let m = match lines.next() {
            Some((_, header)) => {
                let header = header?;
                let cols: Vec<&str> = header.trim().split(',').collect();
                let m = cols.len().saturating_sub(1);
                let expected = (1..=m).map(|k| format!("j_{k}")).chain(["log_c".to_string()]);
                if m == 0 || !cols.iter().map(|c| c.to_string()).eq(expected) {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("expected header j_1..j_m,log_c, got {header:?}"),
                    });
                }
                m
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        let mut flat = Vec::new();
        let mut log_coeffs = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.trim().split(',').collect();
            let bad = |message: String| Error::Parse { line: i + 1, message };
            if cols.len() != m + 1 {
                return Err(bad(format!("expected {} fields, got {}", m + 1, cols.len())));
            }
            for c in &cols[..m] {
                flat.push(c.parse::<u32>().map_err(|e| bad(format!("index {c:?}: {e}")))?);
            }
            let v: f64 = cols[m].parse().map_err(|e| bad(format!("log_c {:?}: {e}", cols[m])))?;
            if !v.is_finite() {
                return Err(bad("log_c must be finite".into()));
            }
            log_coeffs.push(v);
        }
        let n = flat.chunks(m).map(|j| j.iter().sum::<u32>() as usize).max().unwrap_or(0);
        let indices = MultiIndexSet::from_flat(n, m, flat);
        if indices.iter().zip(indices.iter().skip(1)).any(|(a, b)| a >= b) {
            return Err(Error::Parse {
                line: 0,
                message: "indices are not in strictly increasing lexicographic order".into(),
            });
        }
        Ok(MonomialOnb {
            indices,
            log_coeffs,
            family: OnbFamily::Imported,
        })
    }
}

fn quad_options() -> LogQuadOptions {
    LogQuadOptions::default()
}

/// `log ∫ Π r_k^{2j_k+1} e^{−2nQ(r)} dr` over `ℝ₊^m` (without the `(2π)^m`), by iterated
/// log-domain quadrature in `s = log r`.
fn iterated_log_integral(w: &WeightHandle, j: &[u32], n: usize, opts: &LogQuadOptions) -> Result<(f64, usize, f64)> {
    let m = j.len();
    let mut s = vec![0.0; m];
    let mut panels = 0usize;
    let mut err: f64 = 0.0;
    // outer levels integrate quadrature output, so they cannot ask for the inner accuracy
    let opts = LogQuadOptions {
        scan_step: opts.scan_step.max(0.25),
        ..*opts
    };
    let v = nested(w, j, n, 0, &mut s, &opts, &mut panels, &mut err)?;
    Ok((v, panels, err))
}

#[allow(clippy::too_many_arguments)]
fn nested(
    w: &WeightHandle,
    j: &[u32],
    n: usize,
    k: usize,
    s: &mut Vec<f64>,
    opts: &LogQuadOptions,
    panels: &mut usize,
    err: &mut f64,
) -> Result<f64> {
    let m = j.len();
    if k == m {
        let radii: Vec<f64> = s.iter().map(|x| x.exp()).collect();
        let lin: f64 = j.iter().zip(s.iter()).map(|(&jk, &sk)| (2.0 * jk as f64 + 2.0) * sk).sum();
        return Ok(lin - 2.0 * n as f64 * w.eval(&radii));
    }
    // inner failures far out in the tails (where e^{−2nQ} underflows and the
    // integrand loses all precision) are harmless once truncation drops them
    let failures = std::cell::RefCell::new(Vec::new());
    let inner_panels = std::cell::Cell::new(0usize);
    let inner_err = std::cell::Cell::new(0f64);
    let g = |x: f64| {
        let mut local = s.clone();
        local[k] = x;
        let mut p = 0;
        let mut e = 0.0;
        match nested(w, j, n, k + 1, &mut local, opts, &mut p, &mut e) {
            Ok(v) => {
                inner_panels.set(inner_panels.get() + p);
                inner_err.set(inner_err.get().max(e));
                v
            }
            Err(e) => {
                failures.borrow_mut().push((x, e));
                f64::NEG_INFINITY
            }
        }
    };
    let level = LogQuadOptions {
        rel_tol: (opts.rel_tol * 1e3f64.powi((m - k - 1) as i32)).min(1e-9),
        ..*opts
    };
    let q = log_integral(&g, &level)?;
    if let Some((_, e)) = failures.into_inner().into_iter().find(|(x, _)| *x >= q.lo && *x <= q.hi) {
        return Err(e);
    }
    *panels += q.panels + inner_panels.get();
    *err = err.max(q.rel_error + inner_err.get());
    Ok(q.log_value)
}

/// `log ∫ r^{2j+1} e^{−2n q(r)} dr` for one axis of a separable weight.
fn axis_log_integral(w: &WeightHandle, axis: usize, j: u32, n: usize, opts: &LogQuadOptions) -> Result<(f64, usize, f64)> {
    let two_n = 2.0 * n as f64;
    let a = 2.0 * j as f64 + 2.0;
    let g = |s: f64| {
        let q = w.axis_term(axis, s.exp()).expect("separable weight");
        a * s - two_n * q
    };
    let q = log_integral(&g, opts)?;
    Ok((q.log_value, q.panels, q.rel_error))
}

/// Closed-form Fubini–Study moment `log(π^m J! (n−|J|)! / (n+m)!)`; the weight is
/// growth-exempt, so the elliptic measure `(1+‖z‖²)^{−(n+m+1)}` is used in place of
/// `e^{−2nQ}`.
fn fubini_study_moment(j: &[u32], n: usize) -> f64 {
    let m = j.len();
    let total: u32 = j.iter().sum();
    let pi = std::f64::consts::PI;
    m as f64 * pi.ln() + j.iter().map(|&v| ln_factorial(v as usize)).sum::<f64>()
        + ln_factorial(n - total as usize)
        - ln_factorial(n + m)
}

fn ln_factorial(k: usize) -> f64 {
    if k <= 1 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// `log ∫_{ℂ^m} |z^J|² e^{−2nQ} dV_m`.
pub fn radial_moment(j: &[u32], n: usize, w: &WeightHandle) -> Result<f64> {
    check_index(j, n, w.dimension())?;
    if let WeightKind::FubiniStudy = w.kind() {
        return Ok(fubini_study_moment(j, n));
    }
    let opts = quad_options();
    let two_pi_ln = (2.0 * std::f64::consts::PI).ln();
    let m = j.len();
    let core = if w.is_separable() {
        let mut acc = 0.0;
        for (axis, &jk) in j.iter().enumerate() {
            acc += axis_log_integral(w, axis, jk, n, &opts)?.0;
        }
        acc
    } else {
        iterated_log_integral(w, j, n, &opts)?.0
    };
    Ok(m as f64 * two_pi_ln + core)
}

fn check_index(j: &[u32], n: usize, m: usize) -> Result<()> {
    if j.len() != m {
        return Err(Error::InvalidArgument(format!("multi-index has {} entries, weight has m = {m}", j.len())));
    }
    if j.iter().map(|&v| v as usize).sum::<usize>() > n {
        return Err(Error::InvalidArgument(format!("|J| exceeds degree {n}")));
    }
    Ok(())
}

/// Orthonormal basis of degree `n` for `e^{−2nQ} dV`: `log c_J = −½ radial_moment(J)`.
pub fn build_onb(n: usize, w: &WeightHandle) -> Result<MonomialOnb> {
    build_onb_indexed(MultiIndexSet::new(n, w.dimension()), w)
}

/// As [`build_onb`] for the homogeneous part `|J| = n` only.
pub fn build_homogeneous_onb(n: usize, w: &WeightHandle) -> Result<MonomialOnb> {
    build_onb_indexed(MultiIndexSet::homogeneous(n, w.dimension()), w)
}

fn build_onb_indexed(indices: MultiIndexSet, w: &WeightHandle) -> Result<MonomialOnb> {
    let n = indices.degree();
    let m = indices.dimension();
    let opts = quad_options();
    let two_pi_ln = (2.0 * std::f64::consts::PI).ln();

    if let WeightKind::FubiniStudy = w.kind() {
        let log_coeffs = indices.iter().map(|j| -0.5 * fubini_study_moment(j, n)).collect();
        return Ok(MonomialOnb {
            indices,
            log_coeffs,
            family: OnbFamily::Weighted {
                weight: w.clone(),
                quadrature: QuadratureMeta {
                    panels: 0,
                    integrals: 0,
                    max_rel_error: 0.0,
                    truncation_nats: opts.drop_nats,
                    closed_form: true,
                },
            },
        });
    }

    let (log_coeffs, meta) = if w.is_separable() {
        // distinct (axis, j) integrals only
        let keys: Vec<(usize, u32)> = (0..m).flat_map(|axis| (0..=n as u32).map(move |j| (axis, j))).collect();
        let results: Vec<Result<(f64, usize, f64)>> =
            keys.par_iter().map(|&(axis, j)| axis_log_integral(w, axis, j, n, &opts)).collect();
        let mut table = HashMap::with_capacity(keys.len());
        let mut meta = QuadratureMeta {
            panels: 0,
            integrals: keys.len(),
            max_rel_error: 0.0,
            truncation_nats: opts.drop_nats,
            closed_form: false,
        };
        for (key, r) in keys.into_iter().zip(results) {
            let (v, p, e) = r?;
            meta.panels += p;
            meta.max_rel_error = meta.max_rel_error.max(e);
            table.insert(key, v);
        }
        let coeffs = indices
            .iter()
            .map(|j| {
                let core: f64 = j.iter().enumerate().map(|(axis, &jk)| table[&(axis, jk)]).sum();
                -0.5 * (m as f64 * two_pi_ln + core)
            })
            .collect();
        (coeffs, meta)
    } else {
        let results: Vec<Result<(f64, usize, f64)>> =
            indices.iter().collect::<Vec<_>>().par_iter().map(|j| iterated_log_integral(w, j, n, &opts)).collect();
        let mut meta = QuadratureMeta {
            panels: 0,
            integrals: indices.len(),
            max_rel_error: 0.0,
            truncation_nats: opts.drop_nats,
            closed_form: false,
        };
        let mut coeffs = Vec::with_capacity(indices.len());
        for r in results {
            let (v, p, e) = r?;
            meta.panels += p;
            meta.max_rel_error = meta.max_rel_error.max(e);
            coeffs.push(-0.5 * (m as f64 * two_pi_ln + v));
        }
        (coeffs, meta)
    };
    Ok(MonomialOnb {
        indices,
        log_coeffs,
        family: OnbFamily::Weighted {
            weight: w.clone(),
            quadrature: meta,
        },
    })
}

/// `½ log(n! / ((n−|J|)! j_1! ⋯ j_m!))` for every `|J| ≤ n`.
pub fn elliptic_onb(n: usize, m: usize) -> MonomialOnb {
    let indices = MultiIndexSet::new(n, m);
    let log_coeffs = indices
        .iter()
        .map(|j| {
            let total: usize = j.iter().map(|&v| v as usize).sum();
            0.5 * (ln_factorial(n) - ln_factorial(n - total) - j.iter().map(|&v| ln_factorial(v as usize)).sum::<f64>())
        })
        .collect();
    MonomialOnb {
        indices,
        log_coeffs,
        family: OnbFamily::Elliptic,
    }
}

/// Plain powers `z^J` for `|J| ≤ n` (all `c_J = 1`).
pub fn unit_basis(n: usize, m: usize) -> MonomialOnb {
    let indices = MultiIndexSet::new(n, m);
    let log_coeffs = vec![0.0; indices.len()];
    MonomialOnb {
        indices,
        log_coeffs,
        family: OnbFamily::Unit,
    }
}

/// `log S_n(z, z) = log Σ_J c_J² |z^J|²`.
pub fn bergman_diag(onb: &MonomialOnb, z: &[Complex64]) -> f64 {
    let s: Vec<f64> = z.iter().map(|w| w.norm().ln()).collect();
    bergman_diag_log_radii(onb, &s)
}

/// [`bergman_diag`] at log-radii `S` (`−∞` for a zero coordinate).
pub fn bergman_diag_log_radii(onb: &MonomialOnb, s: &[f64]) -> f64 {
    let exps: Vec<f64> = onb
        .indices
        .iter()
        .zip(&onb.log_coeffs)
        .map(|(j, c)| 2.0 * (c + dot_log(j, s)))
        .collect();
    log_sum_exp(&exps)
}

/// `⟨J, S⟩` with `0 · (−∞) = 0`.
pub(crate) fn dot_log(j: &[u32], s: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&jk, &sk) in j.iter().zip(s) {
        if jk > 0 {
            acc += jk as f64 * sk;
        }
    }
    acc
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

/// Which basis family a convergence report builds at each degree.
#[derive(Debug, Clone)]
pub enum BasisSource {
    Weighted(WeightHandle),
    Elliptic { dimension: usize },
}

impl BasisSource {
    pub fn build(&self, n: usize) -> Result<MonomialOnb> {
        match self {
            BasisSource::Weighted(w) => build_onb(n, w),
            BasisSource::Elliptic { dimension } => Ok(elliptic_onb(n, *dimension)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BergmanRow {
    pub degree: usize,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BergmanReport {
    pub rows: Vec<BergmanRow>,
    /// Set when some degree fails to improve on its predecessor.
    pub non_increase_flag: bool,
}

impl BergmanReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }
}

/// Per degree, `sup_grid |(1/2n) log S_n − V|`.
pub fn bergman_convergence_report(
    source: &BasisSource,
    degrees: &[usize],
    grid: &[Vec<Complex64>],
    ev: &ExtremalEvaluator,
) -> Result<BergmanReport> {
    if degrees.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("degrees must be strictly increasing".into()));
    }
    let targets: Vec<f64> = grid.iter().map(|z| ev.value(z)).collect();
    let mut rows = Vec::with_capacity(degrees.len());
    for &n in degrees {
        let onb = source.build(n)?;
        let sup = grid
            .par_iter()
            .zip(&targets)
            .map(|(z, v)| (bergman_diag(&onb, z) / (2.0 * n as f64) - v).abs())
            .reduce(|| 0.0, f64::max);
        rows.push(BergmanRow {
            degree: n,
            sup_error: sup,
        });
    }
    let non_increase_flag = rows.len() > 1 && !rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    Ok(BergmanReport {
        rows,
        non_increase_flag,
    })
}

/// `⟨P_J, P_K⟩` for a weighted basis by a route independent of construction: angular
/// trapezoid rule on each circle and plain Gauss–Legendre panels in `r` (not `log r`).
/// Separable weights only, or `m = 1`.
pub fn gram_entry(onb: &MonomialOnb, a: usize, b: usize) -> Result<f64> {
    let w = match &onb.family {
        OnbFamily::Weighted { weight, .. } => weight,
        _ => return Err(Error::Unsupported("gram check needs a weighted basis".into())),
    };
    let n = onb.degree();
    let ja = onb.indices.get(a);
    let jb = onb.indices.get(b);
    let m = onb.dimension();
    if !(w.is_separable() || m == 1) || matches!(w.kind(), WeightKind::FubiniStudy) && m > 1 {
        return Err(Error::Unsupported("gram check needs a separable weight".into()));
    }
    // angular factor: (1/N) Σ_θ e^{i(j_a − j_b)θ} on N equispaced nodes, times 2π
    let mut angular = 1.0;
    for (&x, &y) in ja.iter().zip(jb) {
        let d = x as i64 - y as i64;
        let nodes = 2 * (x.max(y) as usize + 1);
        let sum: Complex64 = (0..nodes)
            .map(|k| Complex64::from_polar(1.0, d as f64 * 2.0 * std::f64::consts::PI * k as f64 / nodes as f64))
            .sum();
        angular *= 2.0 * std::f64::consts::PI * sum.re / nodes as f64;
    }
    if angular.abs() < 1e-300 {
        return Ok(0.0);
    }
    let mut log_radial = 0.0;
    for axis in 0..m {
        let p = ja[axis] as f64 + jb[axis] as f64 + 1.0;
        let q = |r: f64| -> f64 {
            match w.kind() {
                WeightKind::FubiniStudy => (n as f64 + 2.0) * 0.5 * (r * r).ln_1p(),
                _ => n as f64 * w.axis_term(axis, r).unwrap_or_else(|| w.eval(&[r])),
            }
        };
        let h = |r: f64| if r > 0.0 { p * r.ln() - 2.0 * q(r) } else { f64::NEG_INFINITY };
        // locate the peak on a geometric scan, then integrate exp(h − peak) in r
        let mut peak = f64::NEG_INFINITY;
        let mut r_peak = 1.0;
        let mut r = 1e-8;
        while r < 1e8 {
            let v = h(r);
            if v > peak {
                peak = v;
                r_peak = r;
            }
            r *= 1.01;
        }
        let f = |r: f64| (h(r) - peak).exp();
        // geometric panels away from the peak so algebraic tails stay cheap
        let mut total = 0.0;
        let mut a = r_peak;
        while h(a) > peak - 45.0 {
            total += adaptive(&f, a, 2.0 * a, 1e-13, 2_000)?.value;
            a *= 2.0;
        }
        let mut b = r_peak;
        while h(b) > peak - 45.0 && b > 1e-300 {
            total += adaptive(&f, 0.5 * b, b, 1e-13, 2_000)?.value;
            b *= 0.5;
        }
        total += adaptive(&f, 0.0, b, 1e-13, 2_000)?.value;
        log_radial += peak + total.ln();
    }
    let ca = onb.log_coeffs[a];
    let cb = onb.log_coeffs[b];
    Ok(angular * (ca + cb + log_radial).exp())
}
