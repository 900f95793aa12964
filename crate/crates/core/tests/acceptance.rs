//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//! Runs as a plain binary (`harness = false`) so the lines always print in order.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use zerolab::ensembles::{
    assemble_polynomial, sample_coefficients, tail_growth_diagnostic, Basis, Coefficient, CoefficientLaw, RandomPolynomial,
    RngStream,
};
use zerolab::experiments::{self, kinds, write_records, ExperimentConfig, RunOutput, TrialRecord};
use zerolab::extremal::{ExtremalEvaluator, RegionSpec};
use zerolab::onb::{build_onb, gram_entry, unit_basis};
use zerolab::weights::{make_weight, WeightKind, WeightSpec};
use zerolab::zeros::{count_zeros_argument_principle, count_zeros_region, find_roots, slice_volume, RootOptions};

const EXTREMAL_TOL: f64 = 1e-3;
const EXTREMAL_SECONDS: f64 = 5.0;
const ONB_TOL: f64 = 1e-8;
const BERGMAN_MAX_AT_200: f64 = 0.1;
const ELLIPTIC_BERGMAN_TOL: f64 = 1e-10;
const EQUI_TOL: f64 = 0.05;
const KAC_INSIDE: f64 = 0.95;
const KAC_KS: f64 = 0.05;
const CHEB_TOL: f64 = 0.05;
const CAPACITY_TOL: f64 = 0.05;
const CONV_EPS: f64 = 0.1;
const CONV_FINAL: f64 = 0.1;
const TAIL_EPS: f64 = 0.2;
const NECESSITY_DEV: f64 = 0.3;
const CONTROL_DEV: f64 = 0.1;
const CONTROL_FROM: usize = 400;
const TAIL_J0_MAX: usize = 1000;
const TAIL_J_MAX: usize = 100_000;
const FRECHET_RUNNING_MAX: f64 = 100.0;
const SLICE_REL_TOL: f64 = 0.02;
const RESIDUAL_LOG10: f64 = -10.0;
const M3_SECONDS: f64 = 1800.0;

/// Seed of the seeded library diagnostics (criteria 12 and 13).
const DIAGNOSTIC_SEED: u64 = 20240611;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    let path = configs_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::from_json(&text).unwrap()
}

fn record_bytes(records: &[TrialRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_records(records, &mut out).unwrap();
    out
}

struct Suite {
    passed: Vec<bool>,
    /// Serialized outputs of every seeded run, for the rerun comparison.
    outputs: BTreeMap<String, Vec<u8>>,
    quiet: bool,
}

impl Suite {
    fn new(quiet: bool) -> Self {
        Suite {
            passed: Vec::new(),
            outputs: BTreeMap::new(),
            quiet,
        }
    }

    fn report(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if !self.quiet {
            println!("criterion {id:>2} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        }
        self.passed.push(ok);
    }

    fn run(&mut self, name: &str) -> RunOutput {
        let cfg = load(name);
        let out = experiments::run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        self.outputs.insert(name.to_string(), record_bytes(&out.records));
        out
    }
}

fn weyl(m: usize) -> zerolab::weights::WeightHandle {
    make_weight(WeightSpec::new(WeightKind::Weyl, m)).unwrap()
}

fn of_kind<'a>(out: &'a RunOutput, kind: &str) -> Vec<&'a TrialRecord> {
    out.records.iter().filter(|r| r.kind == kind).collect()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, c) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    s / c.max(1) as f64
}

fn extremal_oracle(s: &mut Suite) {
    let start = Instant::now();
    let ev = ExtremalEvaluator::new(&weyl(1)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let t = -2.0 + 4.0 * i as f64 / 1999.0;
        let exact = if t <= 0.0 { (2.0 * t).exp() / 2.0 } else { t + 0.5 };
        worst = worst.max((ev.value_at_log_radii(&[t]) - exact).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    s.report(
        1,
        "extremal oracle",
        worst <= EXTREMAL_TOL && secs < EXTREMAL_SECONDS,
        format!("max |V − closed form| = {worst:.2e} (≤ {EXTREMAL_TOL:e}), {secs:.2} s (< {EXTREMAL_SECONDS} s)"),
    );
}

fn onb_oracle(s: &mut Suite) {
    let w = weyl(1);
    let mut worst: f64 = 0.0;
    for n in 1..=200usize {
        let onb = build_onb(n, &w).unwrap();
        for j in 0..=n {
            let exact = 0.5 * ((j as f64 + 1.0) * (n as f64).ln() - PI.ln() - ln_gamma(j as f64 + 1.0));
            worst = worst.max((onb.log_coeffs()[j] - exact).abs());
        }
    }
    let mut gram: f64 = 0.0;
    for n in [10usize, 50, 200] {
        let onb = build_onb(n, &w).unwrap();
        for j in 0..onb.len() {
            gram = gram.max((gram_entry(&onb, j, j).unwrap() - 1.0).abs());
        }
    }
    s.report(
        2,
        "ONB oracle",
        worst <= ONB_TOL && gram <= ONB_TOL,
        format!("max |log c − Gamma oracle| = {worst:.2e}, max |Gram_jj − 1| = {gram:.2e} (≤ {ONB_TOL:e})"),
    );
}

fn bergman(s: &mut Suite) {
    let out = s.run("bergman.json");
    let errs: Vec<(usize, f64)> = of_kind(&out, kinds::BERGMAN).iter().map(|r| (r.n, r.stat)).collect();
    let decreasing = errs.windows(2).all(|w| w[1].1 < w[0].1);
    let last = errs.last().map_or(f64::INFINITY, |e| e.1);
    let ell = s.run("bergman_elliptic.json");
    let ell_max = of_kind(&ell, kinds::BERGMAN).iter().map(|r| r.stat).fold(0.0, f64::max);
    let degrees: Vec<usize> = errs.iter().map(|e| e.0).collect();
    s.report(
        3,
        "Bergman",
        degrees == [50, 100, 200] && decreasing && last <= BERGMAN_MAX_AT_200 && ell_max <= ELLIPTIC_BERGMAN_TOL,
        format!(
            "Weyl sup errors {:?} strictly decreasing = {decreasing}, at 200: {last:.4} (≤ {BERGMAN_MAX_AT_200}); elliptic max {ell_max:.1e} (≤ {ELLIPTIC_BERGMAN_TOL:e})",
            errs.iter().map(|e| format!("{:.4}", e.1)).collect::<Vec<_>>()
        ),
    );
}

/// Mean `|count/n − (r₊² − r₋²)|` per annulus, against the closed form.
fn weyl_annulus_deviations(out: &RunOutput, cfg: &ExperimentConfig) -> Vec<(String, f64)> {
    cfg.regions
        .iter()
        .map(|region| {
            let [lo, hi] = region.as_product().unwrap().annuli[0];
            let exact = hi.min(1.0).powi(2) - lo.min(1.0).powi(2);
            let id = region.id();
            let dev = mean(
                of_kind(out, kinds::COUNT_FRACTION)
                    .iter()
                    .filter(|r| r.region == id)
                    .map(|r| (r.stat - exact).abs()),
            );
            (id, dev)
        })
        .collect()
}

fn format_devs(devs: &[(String, f64)]) -> String {
    devs.iter().map(|(id, d)| format!("{id}: {d:.4}")).collect::<Vec<_>>().join(", ")
}

fn equidistribution_weyl(s: &mut Suite) {
    let out = s.run("weyl_gauss.json");
    let devs = weyl_annulus_deviations(&out, &load("weyl_gauss.json"));
    let ok = devs.len() == 3 && devs.iter().all(|d| d.1 <= EQUI_TOL);
    s.report(4, "equidistribution (Weyl, Gaussian, n=300)", ok, format!("{} (≤ {EQUI_TOL})", format_devs(&devs)));
}

fn law_invariance(s: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, label) in [("weyl_bernoulli.json", "Bernoulli"), ("weyl_cauchy.json", "Cauchy")] {
        let out = s.run(name);
        let devs = weyl_annulus_deviations(&out, &load(name));
        ok &= devs.len() == 3 && devs.iter().all(|d| d.1 <= EQUI_TOL);
        parts.push(format!("{label} [{}]", format_devs(&devs)));
    }
    s.report(5, "law invariance", ok, format!("{} (≤ {EQUI_TOL})", parts.join("; ")));
}

fn elliptic(s: &mut Suite) {
    let cfg = load("elliptic.json");
    let out = s.run("elliptic.json");
    let devs: Vec<(String, f64)> = cfg
        .regions
        .iter()
        .map(|region| {
            let r = region.as_product().unwrap().annuli[0][1];
            let exact = r * r / (1.0 + r * r);
            let id = region.id();
            let dev = mean(out.records.iter().filter(|x| x.region == id).map(|x| (x.stat - exact).abs()));
            (id, dev)
        })
        .collect();
    let ok = devs.len() == 3 && devs.iter().all(|d| d.1 <= EQUI_TOL);
    s.report(6, "elliptic disks", ok, format!("{} (≤ {EQUI_TOL})", format_devs(&devs)));
}

fn kac(s: &mut Suite) {
    let out = s.run("kac.json");
    let counts = of_kind(&out, kinds::COUNT_FRACTION);
    // equal degree in every trial, so the mean fraction is the pooled fraction
    let inside = mean(counts.iter().map(|r| r.stat));
    let ks = mean(of_kind(&out, kinds::ANGLE_KS).iter().map(|r| r.stat));
    let ok = counts.len() == 20 && inside >= KAC_INSIDE && ks <= KAC_KS;
    s.report(
        7,
        "Kac circle",
        ok,
        format!("fraction in 0.9<|z|<1.1 = {inside:.4} (≥ {KAC_INSIDE}), mean angular KS = {ks:.4} (≤ {KAC_KS})"),
    );
}

fn stahl_totik(s: &mut Suite) {
    let cfg = load("chebyshev.json");
    let out = s.run("chebyshev.json");
    let mut ok = true;
    let mut parts = Vec::new();
    for (region, (a, b)) in cfg.regions.iter().zip([(-0.5f64, 0.5f64), (0.0, 1.0)]) {
        let arcsine = (b.asin() - a.asin()) / PI;
        let id = region.id();
        let worst = out
            .records
            .iter()
            .filter(|r| r.region == id)
            .map(|r| (r.stat - arcsine).abs())
            .fold(0.0, f64::max);
        ok &= worst <= CHEB_TOL;
        parts.push(format!("{id}: max |count/n − {arcsine:.4}| = {worst:.4}"));
    }
    let onp = s.run("onp.json");
    let cap = of_kind(&onp, kinds::CAPACITY).into_iter().find(|r| r.n == 50).map(|r| r.stat);
    let cap = cap.unwrap_or(f64::NAN);
    // orthonormal Chebyshev leading coefficient √2·2^{k−1}
    let exact = 2f64.powf(49.5 / 50.0);
    ok &= (cap - 2.0).abs() <= CAPACITY_TOL && (cap - exact).abs() < 1e-8;
    parts.push(format!("γ_50^(1/50) = {cap:.4} (closed form {exact:.4}, |· − 2| ≤ {CAPACITY_TOL})"));
    s.report(8, "Stahl–Totik", ok, format!("{} (≤ {CHEB_TOL})", parts.join("; ")));
}

fn exceedance_by_degree(records: &[TrialRecord], eps: f64) -> Vec<(usize, f64)> {
    let mut by: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = by.entry(r.n).or_default();
        e.0 += usize::from((r.stat - r.reference).abs() >= eps);
        e.1 += 1;
    }
    by.into_iter().map(|(n, (k, c))| (n, k as f64 / c as f64)).collect()
}

fn in_probability(s: &mut Suite) {
    let out = s.run("convergence.json");
    let freq = exceedance_by_degree(&out.records, CONV_EPS);
    let non_increasing = freq.windows(2).all(|w| w[1].1 <= w[0].1);
    let last = freq.last().map_or(1.0, |f| f.1);
    let ok = freq.iter().map(|f| f.0).eq([50, 100, 200, 400]) && non_increasing && last <= CONV_FINAL;
    s.report(
        9,
        "in-probability decay",
        ok,
        format!("P̂[|dev| ≥ {CONV_EPS}] by degree {freq:?}, non-increasing = {non_increasing}, final ≤ {CONV_FINAL}"),
    );
}

fn pointwise_tail(s: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, label) in [("tail_gauss.json", "Gaussian"), ("tail_bernoulli.json", "Bernoulli")] {
        let out = s.run(name);
        let v2 = 2f64.ln() + 0.5;
        let mut by: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for r in &out.records {
            assert!((r.reference - v2).abs() < 1e-3);
            let e = by.entry(r.n).or_default();
            e.0 += usize::from(r.stat < v2 - TAIL_EPS);
            e.1 += 1;
        }
        let freq: Vec<(usize, f64)> = by.into_iter().map(|(n, (k, c))| (n, k as f64 / c as f64)).collect();
        let dec = freq.windows(2).all(|w| w[1].1 <= w[0].1);
        ok &= dec && freq.iter().map(|f| f.0).eq([25, 50, 100, 200]) && freq.iter().all(|f| f.1.is_finite());
        parts.push(format!("{label} {freq:?}"));
    }
    s.report(
        10,
        "pointwise tail",
        ok,
        format!("P̂[(1/n)log|f(2)| < V(2) − {TAIL_EPS}] by degree, non-increasing: {}", parts.join("; ")),
    );
}

fn necessity(s: &mut Suite) {
    let out = s.run("necessity.json");
    let fired = of_kind(&out, kinds::CERTIFICATE).iter().filter(|r| r.stat == 1.0).count();
    let heavy_dev = of_kind(&out, kinds::COUNT_FRACTION).iter().map(|r| r.deviation()).fold(0.0, f64::max);
    let control_kind = format!("{}{}", kinds::CONTROL, kinds::CERTIFICATE);
    let control_fired = of_kind(&out, &control_kind).iter().filter(|r| r.stat == 1.0).count();
    let control_count = format!("{}{}", kinds::CONTROL, kinds::COUNT_FRACTION);
    let control_dev = of_kind(&out, &control_count)
        .iter()
        .filter(|r| r.n >= CONTROL_FROM)
        .map(|r| r.deviation())
        .fold(0.0, f64::max);
    let degrees: Vec<usize> = load("necessity.json").degrees;
    let ok = (fired > 0 || heavy_dev > NECESSITY_DEV) && control_fired == 0 && control_dev <= CONTROL_DEV;
    s.report(
        11,
        "necessity",
        ok,
        format!(
            "log-Fréchet α=0.5 over n {degrees:?}: {fired} firings, max deviation {heavy_dev:.3} (> {NECESSITY_DEV} or firing); Gaussian control: {control_fired} firings, max deviation at n ≥ {CONTROL_FROM} = {control_dev:.4} (≤ {CONTROL_DEV})"
        ),
    );
}

fn tail_diagnostics(s: &mut Suite) {
    let gauss = tail_growth_diagnostic(
        &CoefficientLaw::GaussianComplex,
        1,
        0.1,
        TAIL_J_MAX,
        &mut RngStream::new(DIAGNOSTIC_SEED, 0),
    )
    .unwrap();
    let heavy = tail_growth_diagnostic(
        &CoefficientLaw::LogFrechet { alpha: 0.5 },
        1,
        0.1,
        TAIL_J_MAX,
        &mut RngStream::new(DIAGNOSTIC_SEED, 1),
    )
    .unwrap();
    s.outputs.insert("tail_diagnostics".into(), format!("{gauss:?}\n{heavy:?}").into_bytes());
    let j0 = gauss.last_violation.unwrap_or(0);
    let crossing = heavy.crossings.iter().find(|c| c.0 == FRECHET_RUNNING_MAX).and_then(|c| c.1);
    let exceeds = heavy.log_running_max > FRECHET_RUNNING_MAX.ln();
    let ok = j0 <= TAIL_J0_MAX && exceeds && crossing.is_some();
    s.report(
        12,
        "coefficient tail diagnostics",
        ok,
        format!(
            "Gaussian: {} violations, last at j₀ = {j0} (≤ {TAIL_J0_MAX}) of {TAIL_J_MAX}; log-Fréchet: running max |a_j|^(1/j) = e^{:.1}, passes {FRECHET_RUNNING_MAX} at j = {crossing:?}",
            gauss.violations, heavy.log_running_max
        ),
    );
}

fn unit_poly(n: usize, m: usize, entries: &[(&[u32], Complex64)]) -> RandomPolynomial {
    let onb = unit_basis(n, m);
    let mut coeffs = vec![Coefficient::ZERO; onb.len()];
    for (j, v) in entries {
        coeffs[onb.indices().position(j).unwrap()] = Coefficient::from_complex(*v);
    }
    assemble_polynomial(Basis::Monomial(Arc::new(onb)), coeffs).unwrap()
}

fn geometry(s: &mut Suite) {
    let c = Complex64::new(0.3, 0.2);
    let one = Complex64::new(1.0, 0.0);
    let p2 = unit_poly(1, 2, &[(&[1, 0], one), (&[0, 0], -c)]);
    let r2 = RegionSpec::product(vec![[0.1, 0.8], [0.0, 1.0]]);
    let v2 = slice_volume(&p2, &r2, 64).unwrap().value;
    let p3 = unit_poly(1, 3, &[(&[1, 0, 0], one), (&[0, 0, 0], -c)]);
    let r3 = RegionSpec::product(vec![[0.1, 0.8], [0.0, 1.0], [0.2, 0.9]]);
    let v3 = slice_volume(&p3, &r3, 64).unwrap().value;
    // {z_1 = c} ∩ U is a copy of the remaining factors
    let e2 = PI;
    let e3 = PI * PI * (0.81 - 0.04);
    let rel2 = (v2 - e2).abs() / e2;
    let rel3 = (v3 - e3).abs() / e3;

    let onb = Arc::new(unit_basis(50, 1));
    let mut mismatches = 0;
    let mut worst_res = f64::NEG_INFINITY;
    let mut listing = String::new();
    for i in 0..100u64 {
        let coeffs = sample_coefficients(&CoefficientLaw::GaussianComplex, 51, &mut RngStream::new(DIAGNOSTIC_SEED, 100 + i));
        let poly = assemble_polynomial(Basis::Monomial(onb.clone()), coeffs.clone()).unwrap();
        let roots = find_roots(&poly, &RootOptions::default()).unwrap();
        // residual recomputed here by plain Horner, relative to Σ|a_k||z|^k
        for z in &roots.roots {
            let (mut v, mut scale) = (Complex64::new(0.0, 0.0), 0.0);
            for a in coeffs.iter().rev() {
                v = v * z + a.to_complex();
                scale = scale * z.norm() + a.to_complex().norm();
            }
            worst_res = worst_res.max((v.norm() / scale).log10());
        }
        for r in [0.5, 0.9, 1.0 + 1e-3, 1.3] {
            let ap = count_zeros_argument_principle(&poly, r, 0).unwrap().count;
            let rf = count_zeros_region(&roots, &RegionSpec::disk(r)).unwrap().count;
            if ap != rf as i64 {
                mismatches += 1;
            }
            listing.push_str(&format!("{i} {r} {ap}\n"));
        }
    }
    s.outputs.insert("geometry".into(), format!("{v2:?} {v3:?}\n{listing}").into_bytes());
    let ok = rel2 <= SLICE_REL_TOL && rel3 <= SLICE_REL_TOL && mismatches == 0 && worst_res <= RESIDUAL_LOG10;
    s.report(
        13,
        "geometry oracles",
        ok,
        format!(
            "slice volume rel. error m=2 {rel2:.1e}, m=3 {rel3:.1e} (≤ {SLICE_REL_TOL}); argument principle vs roots: {mismatches} mismatches in 400; worst residual 1e{worst_res:.1} (≤ 1e{RESIDUAL_LOG10})"
        ),
    );
}

fn smoke_m3(s: &mut Suite) {
    let start = Instant::now();
    let out = s.run("weyl_m3.json");
    let secs = start.elapsed().as_secs_f64();
    let mut by: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in of_kind(&out, kinds::VOLUME_FRACTION) {
        by.entry(r.n).or_default().push(r.deviation());
    }
    let devs: Vec<(usize, f64)> = by.into_iter().map(|(n, d)| (n, mean(d))).collect();
    let non_increasing = devs.windows(2).all(|w| w[1].1 <= w[0].1);
    let reference = out.records.first().map_or(f64::NAN, |r| r.reference);
    let ok = devs.iter().map(|d| d.0).eq([10, 20, 30]) && non_increasing && secs <= M3_SECONDS;
    s.report(
        14,
        "m=3 smoke test",
        ok,
        format!(
            "𝒱_U = {reference:.4}; mean |sliceVol/n − 𝒱_U| by degree {:?} non-increasing = {non_increasing}; {secs:.1} s (≤ {M3_SECONDS} s)",
            devs.iter().map(|(n, d)| format!("{n}: {d:.4}")).collect::<Vec<_>>()
        ),
    );
}

fn reproducibility(s: &mut Suite) {
    let first = std::mem::take(&mut s.outputs);
    for name in first.keys().filter(|k| k.ends_with(".json")) {
        s.run(name);
    }
    let mut quiet = Suite::new(true);
    tail_diagnostics(&mut quiet);
    geometry(&mut quiet);
    s.outputs.extend(quiet.outputs);
    let differing: Vec<&String> = first.keys().filter(|k| first.get(*k) != s.outputs.get(*k)).collect();
    let bytes: usize = first.values().map(Vec::len).sum();
    s.report(
        15,
        "reproducibility",
        differing.is_empty() && first.len() == s.outputs.len(),
        format!("{} outputs ({bytes} bytes) rerun with the same seeds; differing: {differing:?}", first.len()),
    );
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters pass arguments; the suite has a single entry
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let mut s = Suite::new(false);
    let start = Instant::now();
    extremal_oracle(&mut s);
    onb_oracle(&mut s);
    bergman(&mut s);
    equidistribution_weyl(&mut s);
    law_invariance(&mut s);
    elliptic(&mut s);
    kac(&mut s);
    stahl_totik(&mut s);
    in_probability(&mut s);
    pointwise_tail(&mut s);
    necessity(&mut s);
    tail_diagnostics(&mut s);
    geometry(&mut s);
    smoke_m3(&mut s);
    reproducibility(&mut s);
    let passed = s.passed.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1} s", s.passed.len(), start.elapsed().as_secs_f64());
    if passed == s.passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
