//! Seeded multi-trial experiments: zero counts, slice volumes, log-modulus tails
//! and zero-free certificates, paired with their deterministic limits.
//!
//! Trials run in parallel; each owns the substream `(seed, trial)`, and results
//! are gathered in `(degree, trial)` order so output never depends on threading.

mod config;
mod records;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

pub use config::{Caps, EnsembleConfig, ExperimentConfig, ExperimentKind, RegionConfig, WeightConfig};
pub use records::{
    load_records, load_summary, persist_records, persist_summary, read_records, read_summary, summarize, write_records,
    write_summary, Manifest, SummaryRow, SummaryStats, TrialRecord, SCHEMA,
};

use crate::ensembles::{Basis, CoefficientLaw, RandomPolynomial, RngStream, SeedProvenance};
use crate::error::{Error, Result};
use crate::extremal::{reference_mass, ExtremalEvaluator, MassKind};
use crate::onb::{bergman_convergence_report, build_onb, elliptic_onb, BasisSource};
use crate::stahltotik::{build_recurrence_onb, capacity_check, equilibrium_mass, onp_root_asymptotic_check, RegularMeasureSpec};
use crate::weights::{WeightHandle, WeightKind, WeightSpec};
use crate::zeros::{
    count_zeros_planar, count_zeros_polynomial, count_zeros_region, dominance_certificate, find_roots, l1_distance_field,
    log_modulus, log_spread, slice_volume, RootOptions, RootSet, HEAVY_TAIL_SPREAD,
};

/// Record kinds.
pub mod kinds {
    pub const COUNT_FRACTION: &str = "count_fraction";
    pub const VOLUME_FRACTION: &str = "volume_fraction";
    pub const L1_DISTANCE: &str = "l1_distance";
    pub const ANGLE_KS: &str = "angle_ks";
    pub const LOG_MODULUS: &str = "log_modulus";
    pub const CERTIFICATE: &str = "certificate";
    pub const BERGMAN: &str = "bergman_sup_error";
    pub const ONP: &str = "onp_root_error";
    pub const CAPACITY: &str = "capacity_ratio";
    /// Prefix marking records of a necessity control run.
    pub const CONTROL: &str = "control:";
}

/// Flags attached to records.
pub mod flags {
    pub const FALLBACK: &str = "argument_principle_fallback";
    pub const NONCONVERGED: &str = "root_nonconvergence";
    pub const NEG_INFINITY: &str = "neg_infinity";
    pub const KAC_DEMO: &str = "kac_demo";
    pub const CONTROL: &str = "control";
}

/// Everything a run needs that does not depend on the trial.
pub struct Model {
    ensemble: EnsembleConfig,
    weight: Option<WeightHandle>,
    ev: Option<ExtremalEvaluator>,
}

impl Model {
    pub fn new(ensemble: &EnsembleConfig) -> Result<Self> {
        let (weight, ev) = match ensemble {
            EnsembleConfig::Weighted { weight, dimension } => {
                let w = weight.build(*dimension)?;
                let ev = ExtremalEvaluator::new(&w)?;
                (Some(w), Some(ev))
            }
            EnsembleConfig::Elliptic { dimension } => {
                let fs = crate::weights::make_weight(WeightSpec::new(WeightKind::FubiniStudy, *dimension))?;
                let ev = ExtremalEvaluator::new(&fs)?;
                (None, Some(ev))
            }
            EnsembleConfig::Regular { .. } => (None, None),
        };
        Ok(Model {
            ensemble: ensemble.clone(),
            weight,
            ev,
        })
    }

    pub fn weight(&self) -> Option<&WeightHandle> {
        self.weight.as_ref()
    }

    pub fn evaluator(&self) -> Option<&ExtremalEvaluator> {
        self.ev.as_ref()
    }

    fn measure(&self) -> Option<&RegularMeasureSpec> {
        match &self.ensemble {
            EnsembleConfig::Regular { measure } => Some(measure),
            _ => None,
        }
    }

    pub fn basis(&self, n: usize) -> Result<Basis> {
        Ok(match &self.ensemble {
            EnsembleConfig::Weighted { .. } => Basis::Monomial(Arc::new(build_onb(n, self.weight.as_ref().expect("weighted"))?)),
            EnsembleConfig::Elliptic { dimension } => Basis::Monomial(Arc::new(elliptic_onb(n, *dimension))),
            EnsembleConfig::Regular { measure } => Basis::Recurrence(Arc::new(build_recurrence_onb(measure, n)?)),
        })
    }

    /// Limiting mass of a region: `μ_Q` / `𝒱_U` for weighted ensembles, `ℳ_U`
    /// for the elliptic one, equilibrium measure of the support for regular measures.
    pub fn reference(&self, region: &RegionConfig) -> Result<f64> {
        match &self.ensemble {
            EnsembleConfig::Regular { measure } => equilibrium_mass(measure, &region.as_planar()),
            EnsembleConfig::Weighted { dimension, .. } | EnsembleConfig::Elliptic { dimension } => {
                let r = region
                    .as_product()
                    .ok_or_else(|| Error::InvalidRegion(format!("{} is not an annulus product", region.id())))?;
                let kind = match (&self.ensemble, *dimension) {
                    (_, 1) => MassKind::MuQ,
                    (EnsembleConfig::Weighted { .. }, _) => MassKind::VU,
                    _ => MassKind::MU,
                };
                Ok(reference_mass(self.ev.as_ref().expect("evaluator"), r, kind)?.value)
            }
        }
    }
}

fn provenance(seed: u64, trial: usize) -> SeedProvenance {
    SeedProvenance {
        master: seed,
        stream: trial as u64,
        trial: trial as u64,
    }
}

/// The polynomial of trial `trial`: coefficients from substream `(seed, trial)`.
pub fn sample(basis: &Basis, law: &CoefficientLaw, seed: u64, trial: usize) -> Result<RandomPolynomial> {
    RandomPolynomial::sample(basis.clone(), law, &mut RngStream::new(seed, trial as u64), trial as u64)
}

/// Kolmogorov–Smirnov distance of root arguments from the uniform law on the circle.
pub fn angular_ks(roots: &[Complex64]) -> f64 {
    let mut u: Vec<f64> = roots
        .iter()
        .map(|z| {
            let t = z.arg() / (2.0 * PI);
            if t < 0.0 {
                t + 1.0
            } else {
                t
            }
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

struct TrialOutput {
    records: Vec<TrialRecord>,
    roots: Option<RootSet>,
}

fn finite_stat(v: f64, flags: &mut Vec<String>) -> f64 {
    if v == f64::NEG_INFINITY {
        flags.push(flags::NEG_INFINITY.into());
        f64::MIN
    } else {
        v
    }
}

fn equidistribution_trial(
    cfg: &ExperimentConfig,
    model: &Model,
    basis: &Basis,
    refs: &[f64],
    n: usize,
    trial: usize,
) -> Result<TrialOutput> {
    let poly = sample(basis, &cfg.coefficients, cfg.seed, trial)?;
    let seed = provenance(cfg.seed, trial).as_array();
    let record = |region: String, stat: f64, reference: f64, kind: &str, flags: Vec<String>| TrialRecord {
        schema: SCHEMA,
        n,
        trial,
        region,
        stat,
        reference,
        kind: kind.to_string(),
        seed,
        flags,
    };
    let mut out = Vec::new();
    let opts = RootOptions::default();
    let mut roots_kept = None;
    if poly.dimension() == 1 {
        let kac = model.measure().is_some_and(RegularMeasureSpec::kac_demo);
        let spread_heavy = log_spread(&poly) > HEAVY_TAIL_SPREAD;
        // one root solve per trial unless the coefficients force contour counting
        let roots = if spread_heavy { None } else { Some(find_roots(&poly, &opts)?) };
        for (region, &reference) in cfg.regions.iter().zip(refs) {
            let mut fl = Vec::new();
            if kac {
                fl.push(flags::KAC_DEMO.to_string());
            }
            if roots.as_ref().is_some_and(|rs| !rs.converged) {
                fl.push(flags::NONCONVERGED.into());
            }
            let count = match (&roots, region.as_product()) {
                (Some(rs), Some(r)) => count_zeros_region(rs, r)?.count,
                (Some(rs), None) => count_zeros_planar(rs, &region.as_planar())?.count,
                (None, Some(r)) => {
                    let c = count_zeros_polynomial(&poly, r, &opts)?;
                    if c.fallback {
                        fl.push(flags::FALLBACK.into());
                    }
                    c.count.count
                }
                (None, None) => {
                    return Err(Error::Unsupported(format!(
                        "contour counting in {} is not available",
                        region.id()
                    )))
                }
            };
            out.push(record(region.id(), count as f64 / n as f64, reference, kinds::COUNT_FRACTION, fl));
        }
        if let Some(rs) = &roots {
            if kac {
                out.push(record("angles".into(), angular_ks(&rs.roots), 0.0, kinds::ANGLE_KS, vec![flags::KAC_DEMO.into()]));
            }
        }
        if let (Some(res), Some(ev)) = (cfg.caps.l1_resolution, model.evaluator()) {
            for region in &cfg.regions {
                if let Some(r) = region.as_product() {
                    let d = l1_distance_field(&poly, ev, r, res)?;
                    out.push(record(region.id(), d.distance, 0.0, kinds::L1_DISTANCE, Vec::new()));
                }
            }
        }
        if cfg.caps.root_dump {
            roots_kept = roots;
        }
    } else {
        for (region, &reference) in cfg.regions.iter().zip(refs) {
            let r = region.as_product().expect("validated");
            let v = slice_volume(&poly, r, cfg.caps.base_samples)?;
            let mut fl = Vec::new();
            if v.resampled > 0 {
                fl.push(format!("resampled={}", v.resampled));
            }
            out.push(record(region.id(), v.value / n as f64, reference, kinds::VOLUME_FRACTION, fl));
        }
        if let (Some(res), Some(ev)) = (cfg.caps.l1_resolution, model.evaluator()) {
            for region in &cfg.regions {
                let d = l1_distance_field(&poly, ev, region.as_product().expect("validated"), res)?;
                out.push(record(region.id(), d.distance, 0.0, kinds::L1_DISTANCE, Vec::new()));
            }
        }
    }
    Ok(TrialOutput {
        records: out,
        roots: roots_kept,
    })
}

/// Roots kept for dumping: `(degree, trial, roots)`.
pub type RootDump = Vec<(usize, usize, RootSet)>;

fn equidistribution_impl(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, RootDump)> {
    if cfg.trials == 0 || cfg.degrees.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    cfg.validate()?;
    let model = Model::new(&cfg.ensemble)?;
    let refs: Vec<f64> = cfg.regions.iter().map(|r| model.reference(r)).collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut dump = Vec::new();
    for &n in &cfg.degrees {
        let basis = model.basis(n)?;
        let outs: Vec<Result<TrialOutput>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| equidistribution_trial(cfg, &model, &basis, &refs, n, t))
            .collect();
        for (t, o) in outs.into_iter().enumerate() {
            let o = o?;
            records.extend(o.records);
            if let Some(r) = o.roots {
                dump.push((n, t, r));
            }
        }
    }
    Ok((records, dump))
}

/// For each degree, trial and region: sample, count zeros (`m = 1`) or estimate
/// the slice volume (`m ≥ 2`), normalize by `n`, and pair with the limiting mass.
pub fn run_equidistribution(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    Ok(equidistribution_impl(cfg)?.0)
}

/// Same as [`run_equidistribution`], also returning root sets when `caps.root_dump` is set.
pub fn run_equidistribution_with_roots(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, RootDump)> {
    equidistribution_impl(cfg)
}

/// Exceedance frequencies across degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
    /// `(region, ε, non-increasing over degrees)`; empty for a single degree.
    pub monotone: Vec<(String, f64, bool)>,
    /// Set when some frequency series increases somewhere.
    pub increase_flag: bool,
}

pub fn run_probability_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let records = run_equidistribution(cfg)?;
    let summary = summarize(&records, &cfg.epsilons);
    let mut monotone = Vec::new();
    if cfg.degrees.len() > 1 {
        for region in &cfg.regions {
            let id = region.id();
            let kind = if cfg.dimension() == 1 {
                kinds::COUNT_FRACTION
            } else {
                kinds::VOLUME_FRACTION
            };
            let series = summary.series(&id, kind);
            for (k, eps) in cfg.epsilons.iter().enumerate() {
                let ok = series.windows(2).all(|w| w[1].exceed[k] <= w[0].exceed[k]);
                monotone.push((id.clone(), *eps, ok));
            }
        }
    }
    let increase_flag = monotone.iter().any(|m| !m.2);
    Ok(ConvergenceReport {
        records,
        summary,
        monotone,
        increase_flag,
    })
}

/// One row of a pointwise tail scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub degree: usize,
    pub probe: usize,
    pub epsilon: f64,
    /// `P̂[(1/n) log|f_n(z)| < V(z) − ε]`.
    pub frequency: f64,
    /// `c/√(n^m)` with `c` fitted at the smallest degree.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    /// Frequencies for one probe and ε, by degree.
    pub fn frequencies(&self, probe: usize, epsilon: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.probe == probe && (r.epsilon - epsilon).abs() < 1e-12)
            .map(|r| r.frequency)
            .collect()
    }
}

fn probe_id(p: &[Complex64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
    format!("z=({})", parts.join(","))
}

/// Lower-tail frequencies of `(1/n) log|f_n(z)|` at each probe.
pub fn run_pointwise_tail(cfg: &ExperimentConfig) -> Result<TailReport> {
    if cfg.trials == 0 || cfg.degrees.is_empty() {
        return Ok(TailReport {
            records: Vec::new(),
            rows: Vec::new(),
        });
    }
    cfg.validate()?;
    let model = Model::new(&cfg.ensemble)?;
    let probes = cfg.probe_points();
    let targets: Vec<f64> = match &cfg.ensemble {
        EnsembleConfig::Regular { measure } => probes.iter().map(|p| crate::stahltotik::green_function(measure, p[0])).collect(),
        _ => probes.iter().map(|p| model.evaluator().expect("evaluator").value(p)).collect(),
    };
    let mut records = Vec::new();
    for &n in &cfg.degrees {
        let basis = model.basis(n)?;
        let outs: Vec<Result<Vec<TrialRecord>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let poly = sample(&basis, &cfg.coefficients, cfg.seed, t)?;
                Ok(probes
                    .iter()
                    .zip(&targets)
                    .map(|(p, &v)| {
                        let mut fl = Vec::new();
                        let stat = finite_stat(log_modulus(&poly, p) / n as f64, &mut fl);
                        TrialRecord {
                            schema: SCHEMA,
                            n,
                            trial: t,
                            region: probe_id(p),
                            stat,
                            reference: v,
                            kind: kinds::LOG_MODULUS.into(),
                            seed: provenance(cfg.seed, t).as_array(),
                            flags: fl,
                        }
                    })
                    .collect())
            })
            .collect();
        for o in outs {
            records.extend(o?);
        }
    }
    let rows = tail_rows(&records, &cfg.degrees, &probes, &cfg.epsilons, cfg.dimension());
    Ok(TailReport { records, rows })
}

fn tail_rows(records: &[TrialRecord], degrees: &[usize], probes: &[Vec<Complex64>], epsilons: &[f64], m: usize) -> Vec<TailRow> {
    let mut rows = Vec::new();
    for (pi, p) in probes.iter().enumerate() {
        let id = probe_id(p);
        for &eps in epsilons {
            let mut c = None;
            for &n in degrees {
                let recs: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n && r.region == id).collect();
                let below = recs.iter().filter(|r| r.stat < r.reference - eps).count();
                let frequency = below as f64 / recs.len().max(1) as f64;
                let root = (n as f64).powi(m as i32).sqrt();
                let c0 = *c.get_or_insert(frequency * root);
                rows.push(TailRow {
                    degree: n,
                    probe: pi,
                    epsilon: eps,
                    frequency,
                    envelope: c0 / root,
                });
            }
        }
    }
    rows
}

/// Certificate firings and deviations along a degree scan, with a control law.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessityReport {
    pub records: Vec<TrialRecord>,
    pub firings: usize,
    pub max_deviation: f64,
    pub control_firings: usize,
    /// `(degree, deviation)` of the control run's count records.
    pub control_deviations: Vec<(usize, f64)>,
}

impl NecessityReport {
    pub fn control_max_deviation_from(&self, degree: usize) -> f64 {
        self.control_deviations
            .iter()
            .filter(|(n, _)| *n >= degree)
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    }
}

fn necessity_records(
    cfg: &ExperimentConfig,
    model: &Model,
    law: &CoefficientLaw,
    control: bool,
    refs: &[f64],
) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::new();
    let opts = RootOptions::default();
    for &n in &cfg.degrees {
        let basis = model.basis(n)?;
        let onb = match &basis {
            Basis::Monomial(b) => b.clone(),
            Basis::Recurrence(_) => return Err(Error::Unsupported("necessity needs a monomial basis".into())),
        };
        let outs: Vec<Result<Vec<TrialRecord>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let poly = sample(&basis, law, cfg.seed, t)?;
                let seed = provenance(cfg.seed, t).as_array();
                let mut out = Vec::new();
                for (region, &reference) in cfg.regions.iter().zip(refs) {
                    let r = region.as_product().expect("validated");
                    let cert = dominance_certificate(&poly, r, &onb)?;
                    let count = count_zeros_polynomial(&poly, r, &opts)?;
                    let mut fl = Vec::new();
                    if control {
                        fl.push(flags::CONTROL.to_string());
                    }
                    if count.fallback {
                        fl.push(flags::FALLBACK.into());
                    }
                    if !count.converged {
                        fl.push(flags::NONCONVERGED.into());
                    }
                    let prefix = if control { kinds::CONTROL } else { "" };
                    out.push(TrialRecord {
                        schema: SCHEMA,
                        n,
                        trial: t,
                        region: region.id(),
                        stat: if cert.fires { 1.0 } else { 0.0 },
                        reference: 0.0,
                        kind: format!("{prefix}{}", kinds::CERTIFICATE),
                        seed,
                        flags: fl.clone(),
                    });
                    out.push(TrialRecord {
                        schema: SCHEMA,
                        n,
                        trial: t,
                        region: region.id(),
                        stat: count.count.count as f64 / n as f64,
                        reference,
                        kind: format!("{prefix}{}", kinds::COUNT_FRACTION),
                        seed,
                        flags: fl,
                    });
                }
                Ok(out)
            })
            .collect();
        for o in outs {
            records.extend(o?);
        }
    }
    Ok(records)
}

/// Scans degrees with a heavy-tailed law, recording certificate firings and count
/// deviations, then repeats the scan under the same seeds with the control law.
pub fn run_necessity(cfg: &ExperimentConfig) -> Result<NecessityReport> {
    if cfg.degrees.is_empty() || cfg.trials == 0 {
        return Ok(NecessityReport {
            records: Vec::new(),
            firings: 0,
            max_deviation: 0.0,
            control_firings: 0,
            control_deviations: Vec::new(),
        });
    }
    cfg.validate()?;
    let model = Model::new(&cfg.ensemble)?;
    let refs: Vec<f64> = cfg.regions.iter().map(|r| model.reference(r)).collect::<Result<_>>()?;
    let mut records = necessity_records(cfg, &model, &cfg.coefficients, false, &refs)?;
    if let Some(control) = &cfg.caps.control {
        records.extend(necessity_records(cfg, &model, control, true, &refs)?);
    }
    let cert = |control: bool| {
        records
            .iter()
            .filter(|r| r.kind.ends_with(kinds::CERTIFICATE) && r.has_flag(flags::CONTROL) == control && r.stat == 1.0)
            .count()
    };
    let max_deviation = records
        .iter()
        .filter(|r| r.kind == kinds::COUNT_FRACTION)
        .map(TrialRecord::deviation)
        .fold(0.0, f64::max);
    let control_deviations = records
        .iter()
        .filter(|r| r.kind == format!("{}{}", kinds::CONTROL, kinds::COUNT_FRACTION))
        .map(|r| (r.n, r.deviation()))
        .collect();
    Ok(NecessityReport {
        firings: cert(false),
        control_firings: cert(true),
        max_deviation,
        control_deviations,
        records,
    })
}

/// Grid for Bergman comparisons: 64 radii across each region's annuli, on the positive axes.
fn bergman_grid(cfg: &ExperimentConfig) -> Vec<Vec<Complex64>> {
    let mut grid = Vec::new();
    for region in &cfg.regions {
        let r = region.as_product().expect("validated");
        for i in 0..64 {
            let point = r
                .annuli
                .iter()
                .map(|[lo, hi]| Complex64::new(lo + (hi - lo) * i as f64 / 63.0, 0.0))
                .collect();
            grid.push(point);
        }
    }
    grid
}

/// `sup_grid |(1/2n) log S_n − V|` per degree.
pub fn run_bergman(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    if cfg.degrees.is_empty() {
        return Ok(Vec::new());
    }
    cfg.validate()?;
    let model = Model::new(&cfg.ensemble)?;
    let source = match &cfg.ensemble {
        EnsembleConfig::Weighted { .. } => BasisSource::Weighted(model.weight.clone().expect("weighted")),
        EnsembleConfig::Elliptic { dimension } => BasisSource::Elliptic { dimension: *dimension },
        EnsembleConfig::Regular { .. } => unreachable!("rejected by validation"),
    };
    let grid = bergman_grid(cfg);
    let report = bergman_convergence_report(&source, &cfg.degrees, &grid, model.evaluator().expect("evaluator"))?;
    let region = cfg.regions.iter().map(RegionConfig::id).collect::<Vec<_>>().join("+");
    Ok(report
        .rows
        .iter()
        .map(|row| TrialRecord {
            schema: SCHEMA,
            n: row.degree,
            trial: 0,
            region: region.clone(),
            stat: row.sup_error,
            reference: 0.0,
            kind: kinds::BERGMAN.into(),
            seed: [cfg.seed, 0, 0],
            flags: if report.non_increase_flag {
                vec!["non_increase".into()]
            } else {
                Vec::new()
            },
        })
        .collect())
}

/// `|(1/n) log|p_n(z)| − g(z)|` at probes off the support, plus `γ_k^{1/k}` against `1/Cap`.
pub fn run_onp_check(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    if cfg.degrees.is_empty() {
        return Ok(Vec::new());
    }
    cfg.validate()?;
    let measure = match &cfg.ensemble {
        EnsembleConfig::Regular { measure } => measure,
        _ => unreachable!("rejected by validation"),
    };
    let probes: Vec<Complex64> = cfg.probe_points().into_iter().map(|p| p[0]).collect();
    let report = onp_root_asymptotic_check(measure, &cfg.degrees, &probes)?;
    let probe_ids = probes.iter().map(|z| probe_id(&[*z])).collect::<Vec<_>>().join("+");
    let mut out: Vec<TrialRecord> = report
        .rows
        .iter()
        .map(|(n, err)| TrialRecord {
            schema: SCHEMA,
            n: *n,
            trial: 0,
            region: probe_ids.clone(),
            stat: *err,
            reference: 0.0,
            kind: kinds::ONP.into(),
            seed: [cfg.seed, 0, 0],
            flags: Vec::new(),
        })
        .collect();
    let top = *cfg.degrees.last().expect("non-empty");
    if top >= 10 {
        let onb = build_recurrence_onb(measure, top)?;
        let cap = capacity_check(&onb)?;
        for &n in &cfg.degrees {
            let (_, ratio) = cap.ratios[n - 1];
            out.push(TrialRecord {
                schema: SCHEMA,
                n,
                trial: 0,
                region: "support".into(),
                stat: ratio,
                reference: cap.target,
                kind: kinds::CAPACITY.into(),
                seed: [cfg.seed, 0, 0],
                flags: Vec::new(),
            });
        }
    }
    Ok(out)
}

/// Records, summary and kind-specific notes of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
    pub roots: RootDump,
    /// Kind-specific findings (firings, monotonicity, tail rows) as JSON.
    pub notes: serde_json::Value,
}

/// Dispatches on `experiment_kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut roots = Vec::new();
    let (records, notes) = match cfg.experiment_kind {
        ExperimentKind::Equidistribution => {
            let (r, d) = run_equidistribution_with_roots(cfg)?;
            roots = d;
            (r, serde_json::json!({}))
        }
        ExperimentKind::ProbabilityConvergence => {
            let rep = run_probability_convergence(cfg)?;
            let mono: Vec<_> = rep
                .monotone
                .iter()
                .map(|(r, e, ok)| serde_json::json!({"region": r, "epsilon": e, "non_increasing": ok}))
                .collect();
            (rep.records, serde_json::json!({"monotone": mono, "increase_flag": rep.increase_flag}))
        }
        ExperimentKind::PointwiseTail => {
            let rep = run_pointwise_tail(cfg)?;
            let rows: Vec<_> = rep
                .rows
                .iter()
                .map(|r| {
                    serde_json::json!({"degree": r.degree, "probe": r.probe, "epsilon": r.epsilon,
                        "frequency": r.frequency, "envelope": r.envelope})
                })
                .collect();
            (rep.records, serde_json::json!({"tail": rows}))
        }
        ExperimentKind::Necessity => {
            let rep = run_necessity(cfg)?;
            let notes = serde_json::json!({
                "firings": rep.firings,
                "max_deviation": rep.max_deviation,
                "control_firings": rep.control_firings,
                "control_max_deviation": rep.control_max_deviation_from(0),
            });
            (rep.records, notes)
        }
        ExperimentKind::Bergman => (run_bergman(cfg)?, serde_json::json!({})),
        ExperimentKind::OnpCheck => (run_onp_check(cfg)?, serde_json::json!({})),
    };
    let summary = summarize(&records, &cfg.epsilons);
    Ok(RunOutput {
        records,
        summary,
        roots,
        notes,
    })
}

/// Recomputes every record's reference from `cfg` and compares.
pub fn check_references(records: &[TrialRecord], cfg: &ExperimentConfig) -> Result<()> {
    let model = Model::new(&cfg.ensemble)?;
    for region in &cfg.regions {
        let id = region.id();
        let expected = model.reference(region)?;
        let paired = |r: &&TrialRecord| {
            r.region == id && (r.kind.ends_with(kinds::COUNT_FRACTION) || r.kind == kinds::VOLUME_FRACTION)
        };
        for r in records.iter().filter(paired) {
            if (r.reference - expected).abs() > 1e-12 {
                return Err(Error::ReferenceMismatch(format!(
                    "record n={} trial={} region {id}: stored {} but recomputed {expected}",
                    r.n, r.trial, r.reference
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
