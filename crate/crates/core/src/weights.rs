//! Multi-circular weight functions `Q(|z_1|, ..., |z_m|)`.
//!
//! A weight is evaluated on coordinate moduli only, so invariance under the
//! torus action holds by construction. The log-radial profile
//! `Φ(S) = Q(e^{s_1}, ..., e^{s_m})` is what conjugation consumes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lowdisc::radical_inverse;

/// Radius-domain callable backing a custom weight.
pub type ProfileFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum WeightKind {
    /// `Q = ‖z‖²/2`.
    Weyl,
    /// `Q = ½ log(1 + ‖z‖²)`; violates super-logarithmic growth and is admitted as growth-exempt.
    FubiniStudy,
    /// `Q = Σ_k |z_k|^{p_k} / p_k`.
    Power(Vec<f64>),
    /// User profile evaluated on radii.
    Custom(Arc<ProfileFn>),
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Weyl => write!(f, "Weyl"),
            WeightKind::FubiniStudy => write!(f, "FubiniStudy"),
            WeightKind::Power(p) => write!(f, "Power({p:?})"),
            WeightKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub dimension: usize,
    /// ε in `Q(z) ≥ (1+ε) log‖z‖`.
    pub growth_margin: f64,
    /// Radius `R₀` beyond which the growth bound is claimed.
    pub growth_radius: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, dimension: usize) -> Self {
        WeightSpec {
            kind,
            dimension,
            growth_margin: 1.0,
            growth_radius: 3.0,
        }
    }

    pub fn with_growth(mut self, margin: f64, radius: f64) -> Self {
        self.growth_margin = margin;
        self.growth_radius = radius;
        self
    }
}

/// Immutable weight; share it through [`WeightHandle`].
#[derive(Debug)]
pub struct Weight {
    spec: WeightSpec,
}

pub type WeightHandle = Arc<Weight>;

/// Validates a spec and returns a shareable handle.
pub fn make_weight(spec: WeightSpec) -> Result<WeightHandle> {
    if spec.dimension == 0 {
        return Err(Error::InvalidWeight("dimension must be at least 1".into()));
    }
    if !(spec.growth_margin > 0.0) {
        return Err(Error::InvalidWeight("growth margin must be positive".into()));
    }
    if !(spec.growth_radius > 0.0) {
        return Err(Error::InvalidWeight("growth radius must be positive".into()));
    }
    match &spec.kind {
        WeightKind::Power(p) => {
            if p.len() != spec.dimension {
                return Err(Error::InvalidWeight(format!(
                    "power weight needs {} exponents, got {}",
                    spec.dimension,
                    p.len()
                )));
            }
            if let Some(bad) = p.iter().find(|&&x| !(x >= 1.0) || !x.is_finite()) {
                return Err(Error::InvalidWeight(format!("exponent {bad} < 1")));
            }
        }
        WeightKind::Custom(f) => {
            for probe in probe_radii(spec.dimension) {
                let v = f(&probe);
                if !v.is_finite() {
                    return Err(Error::InvalidWeight(format!(
                        "custom profile not finite at radii {probe:?}"
                    )));
                }
                if v < 0.0 {
                    return Err(Error::InvalidWeight(format!(
                        "custom profile negative ({v}) at radii {probe:?}"
                    )));
                }
            }
        }
        WeightKind::Weyl | WeightKind::FubiniStudy => {}
    }
    Ok(Arc::new(Weight { spec }))
}

fn probe_radii(m: usize) -> Vec<Vec<f64>> {
    const LEVELS: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0];
    let mut out = Vec::new();
    for &r in &LEVELS {
        out.push(vec![r; m]);
    }
    for i in 0..64u64 {
        out.push(
            (0..m)
                .map(|k| 20.0 * radical_inverse(i + 1, k))
                .collect(),
        );
    }
    out
}

impl Weight {
    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn kind(&self) -> &WeightKind {
        &self.spec.kind
    }

    /// Fubini–Study is let through without the growth bound; conjugation
    /// still uses the unit simplex as slope domain.
    pub fn growth_exempt(&self) -> bool {
        matches!(self.spec.kind, WeightKind::FubiniStudy)
    }

    /// `Q` as a sum of per-axis terms, when it is one.
    pub fn is_separable(&self) -> bool {
        matches!(self.spec.kind, WeightKind::Weyl | WeightKind::Power(_))
    }

    /// Per-axis term of a separable weight at modulus `r`.
    pub fn axis_term(&self, axis: usize, r: f64) -> Option<f64> {
        match &self.spec.kind {
            WeightKind::Weyl => Some(0.5 * r * r),
            WeightKind::Power(p) => Some(r.powf(p[axis]) / p[axis]),
            _ => None,
        }
    }

    /// `Q` at the point with coordinate moduli `radii`.
    pub fn eval(&self, radii: &[f64]) -> f64 {
        debug_assert_eq!(radii.len(), self.spec.dimension);
        match &self.spec.kind {
            WeightKind::Weyl => 0.5 * radii.iter().map(|r| r * r).sum::<f64>(),
            WeightKind::FubiniStudy => 0.5 * radii.iter().map(|r| r * r).sum::<f64>().ln_1p(),
            WeightKind::Power(p) => radii
                .iter()
                .zip(p)
                .map(|(r, p)| r.abs().powf(*p) / p)
                .sum(),
            WeightKind::Custom(f) => f(radii),
        }
    }

    pub fn log_profile(self: &Arc<Self>) -> LogRadialProfile {
        LogRadialProfile {
            weight: Arc::clone(self),
        }
    }
}

/// `Φ(S) = Q(e^{s_1}, ..., e^{s_m})`.
#[derive(Debug, Clone)]
pub struct LogRadialProfile {
    weight: WeightHandle,
}

impl LogRadialProfile {
    pub fn dimension(&self) -> usize {
        self.weight.dimension()
    }

    pub fn weight(&self) -> &WeightHandle {
        &self.weight
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        match self.weight.kind() {
            // log-sum-exp keeps large s finite
            WeightKind::FubiniStudy => {
                let mx = s.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(2.0 * b));
                if mx > 0.0 {
                    let tail: f64 = (-mx).exp() + s.iter().map(|&x| (2.0 * x - mx).exp()).sum::<f64>();
                    0.5 * (mx + tail.ln())
                } else {
                    0.5 * s.iter().map(|&x| (2.0 * x).exp()).sum::<f64>().ln_1p()
                }
            }
            _ => {
                let radii: Vec<f64> = s.iter().map(|x| x.exp()).collect();
                self.weight.eval(&radii)
            }
        }
    }
}

/// One sampled margin `Q(z) − (1+ε) log‖z‖`.
#[derive(Debug, Clone)]
pub struct MarginSample {
    pub ray: usize,
    pub norm: f64,
    pub margin: f64,
    /// Whether `‖z‖ ≥ R₀`, i.e. whether the sample counts toward the verdict.
    pub checked: bool,
}

#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub directions: Vec<Vec<f64>>,
    pub samples: Vec<MarginSample>,
    pub pass: bool,
    pub min_checked_margin: f64,
}

impl AdmissibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &MarginSample> {
        self.samples.iter().filter(|s| s.checked && s.margin < 0.0)
    }
}

const RADII_PER_RAY: usize = 64;

/// Samples the growth bound along `ray_count` directions of the positive orthant.
pub fn check_admissibility(
    w: &WeightHandle,
    ray_count: usize,
    radius_range: (f64, f64),
) -> Result<AdmissibilityReport> {
    let (lo, hi) = radius_range;
    if ray_count == 0 {
        return Err(Error::InvalidArgument("ray_count must be at least 1".into()));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius range ({lo}, {hi}) must lie in (0, ∞)"
        )));
    }
    let m = w.dimension();
    let eps = w.spec().growth_margin;
    let r0 = w.spec().growth_radius;
    let directions = ray_directions(m, ray_count);
    let mut samples = Vec::with_capacity(ray_count * RADII_PER_RAY);
    let mut min_checked = f64::INFINITY;
    for (ray, dir) in directions.iter().enumerate() {
        for i in 0..RADII_PER_RAY {
            let frac = i as f64 / (RADII_PER_RAY - 1) as f64;
            let norm = (lo.ln() + frac * (hi.ln() - lo.ln())).exp();
            let radii: Vec<f64> = dir.iter().map(|d| d * norm).collect();
            let margin = w.eval(&radii) - (1.0 + eps) * norm.ln();
            let checked = norm >= r0;
            if checked {
                min_checked = min_checked.min(margin);
            }
            samples.push(MarginSample {
                ray,
                norm,
                margin,
                checked,
            });
        }
    }
    Ok(AdmissibilityReport {
        directions,
        pass: samples.iter().all(|s| !s.checked || s.margin >= 0.0),
        samples,
        min_checked_margin: min_checked,
    })
}

/// Unit vectors with nonnegative entries: axes and diagonal first, then quasi-random.
fn ray_directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(count);
    if m == 1 {
        dirs.push(vec![1.0]);
    } else {
        dirs.push(vec![1.0 / (m as f64).sqrt(); m]);
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            dirs.push(e);
        }
        let mut i = 1u64;
        while dirs.len() < count {
            let v: Vec<f64> = (0..m).map(|k| radical_inverse(i, k) + 1e-3).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            dirs.push(v.into_iter().map(|x| x / n).collect());
            i += 1;
        }
    }
    dirs.truncate(count.max(1));
    dirs
}
