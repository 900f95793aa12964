use super::*;
use crate::extremal::RegionSpec;

fn weyl_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        ensemble: EnsembleConfig::Weighted {
            weight: WeightConfig::Weyl,
            dimension: 1,
        },
        coefficients: CoefficientLaw::GaussianComplex,
        degrees: vec![40, 80],
        trials: 6,
        regions: vec![
            RegionConfig::Product(RegionSpec::annulus(0.2, 0.8)),
            RegionConfig::Product(RegionSpec::annulus(0.0, 0.5)),
        ],
        probes: vec![vec![[2.0, 0.0]]],
        epsilons: vec![0.05, 0.1, 0.2],
        experiment_kind: kind,
        seed: 7,
        caps: Caps::default(),
    }
}

#[test]
fn config_round_trip_and_validation() {
    let cfg = weyl_config(ExperimentKind::Equidistribution);
    let text = cfg.to_json();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    assert_eq!(cfg.hash(), ExperimentConfig::from_json(&text).unwrap().hash());
    cfg.validate().unwrap();

    let mut bad = cfg.clone();
    bad.degrees = vec![80, 40];
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
    let mut bad = cfg.clone();
    bad.regions = vec![RegionConfig::Product(RegionSpec::annulus(0.9, 0.1))];
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
    let mut bad = cfg.clone();
    bad.trials = 0;
    assert!(bad.validate().is_err());
    let mut heavy = cfg.clone();
    heavy.experiment_kind = ExperimentKind::Necessity;
    assert!(heavy.validate().is_err(), "finite-moment law needs an override");
    heavy.caps.allow_finite_moment = true;
    heavy.regions = vec![RegionConfig::Product(RegionSpec::annulus(0.5, 2.0))];
    heavy.validate().unwrap();
    let mut m3 = cfg.clone();
    m3.ensemble = EnsembleConfig::Weighted {
        weight: WeightConfig::Weyl,
        dimension: 3,
    };
    m3.regions = vec![RegionConfig::Product(RegionSpec::product(vec![[0.2, 0.5]; 3]))];
    m3.probes.clear();
    m3.degrees = vec![10, 40];
    assert!(m3.validate().is_err());
    assert!(ExperimentConfig::from_json("{\"ensemble\": 3}").is_err());
}

#[test]
fn planar_regions_parse() {
    let text = r#"{
        "ensemble": {"kind": "regular", "measure": "chebyshev"},
        "coefficients": {"kind": "gaussian_real"},
        "degrees": [50], "trials": 2,
        "regions": [{"rectangle": [[-0.5, 0.5], [-0.1, 0.1]]}, {"annuli": [[0.9, 1.1]]}],
        "experiment_kind": "equidistribution", "seed": 1
    }"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    assert!(matches!(cfg.regions[0], RegionConfig::Planar(_)));
    assert!(matches!(cfg.regions[1], RegionConfig::Product(_)));
    assert_eq!(cfg.epsilons, vec![0.05, 0.1, 0.2]);
    cfg.validate().unwrap();
}

#[test]
fn equidistribution_is_deterministic_and_ordered() {
    let cfg = weyl_config(ExperimentKind::Equidistribution);
    let a = run_equidistribution(&cfg).unwrap();
    let b = run_equidistribution(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 2 * 6 * 2);
    let keys: Vec<(usize, usize)> = a.iter().map(|r| (r.n, r.trial)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &a {
        assert_eq!(r.seed, [7, r.trial as u64, r.trial as u64]);
        assert!((0.0..=1.0).contains(&r.stat));
    }
    let refs: Vec<f64> = a.iter().take(2).map(|r| r.reference).collect();
    assert!((refs[0] - 0.60).abs() < 2e-3 && (refs[1] - 0.25).abs() < 2e-3);
    check_references(&a, &cfg).unwrap();
    let mut tampered = a.clone();
    tampered[0].reference += 0.01;
    assert!(matches!(check_references(&tampered, &cfg), Err(Error::ReferenceMismatch(_))));

    let mut empty = cfg.clone();
    empty.trials = 0;
    assert!(run_equidistribution(&empty).unwrap().is_empty());
}

#[test]
fn single_thread_matches_parallel() {
    let cfg = weyl_config(ExperimentKind::Equidistribution);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| run_equidistribution(&cfg).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_equidistribution(&cfg).unwrap());
    assert_eq!(one, many);
}

#[test]
fn conservation_over_annulus_partition() {
    let mut cfg = weyl_config(ExperimentKind::Equidistribution);
    cfg.regions = [[0.0, 0.4], [0.4, 0.7], [0.7, 1.3], [0.0, 1.3]]
        .iter()
        .map(|&[a, b]| RegionConfig::Product(RegionSpec::annulus(a, b)))
        .collect();
    let recs = run_equidistribution(&cfg).unwrap();
    for chunk in recs.chunks(4) {
        let parts: f64 = chunk[..3].iter().map(|r| r.stat).sum();
        assert!((parts - chunk[3].stat).abs() < 1e-12);
    }
}

#[test]
fn summary_matches_hand_computation() {
    let cfg = weyl_config(ExperimentKind::Equidistribution);
    let recs = run_equidistribution(&cfg).unwrap();
    let s = summarize(&recs, &cfg.epsilons);
    assert_eq!(s.rows.len(), 4);
    let row = &s.rows[0];
    let mine: Vec<&TrialRecord> = recs.iter().filter(|r| r.n == row.degree && r.region == row.region).collect();
    let mad = mine.iter().map(|r| (r.stat - r.reference).abs()).sum::<f64>() / mine.len() as f64;
    assert!((row.mean_abs_dev - mad).abs() < 1e-15);
    let ex = mine.iter().filter(|r| (r.stat - r.reference).abs() >= 0.05).count() as f64 / mine.len() as f64;
    assert_eq!(row.exceed[0], ex);
    assert!(row.exceed.iter().all(|f| (0.0..=1.0).contains(f)));
    // input order does not matter
    let mut rev = recs.clone();
    rev.reverse();
    assert_eq!(summarize(&rev, &cfg.epsilons), s);
    assert!(summarize(&[], &cfg.epsilons).is_empty());
}

#[test]
fn records_and_summary_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = weyl_config(ExperimentKind::Equidistribution);
    let mut recs = run_equidistribution(&cfg).unwrap();
    recs[0].flags.push("extra".into());
    recs[1].stat = 0.1 + 0.2;
    let path = dir.path().join("records.jsonl");
    persist_records(&recs, &path).unwrap();
    assert_eq!(load_records(&path).unwrap(), recs);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().next().unwrap().starts_with("{\"schema\":1,"));

    let s = summarize(&recs, &cfg.epsilons);
    let spath = dir.path().join("summary.csv");
    persist_summary(&s, &spath).unwrap();
    assert_eq!(load_summary(&spath).unwrap(), s);

    std::fs::write(&path, format!("{}\nnot json\n", text.lines().next().unwrap())).unwrap();
    match load_records(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
    std::fs::write(&spath, "degree,region\n").unwrap();
    assert!(matches!(load_summary(&spath), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn pointwise_tail_frequencies_are_probabilities() {
    let mut cfg = weyl_config(ExperimentKind::PointwiseTail);
    cfg.degrees = vec![10, 20];
    cfg.trials = 30;
    let rep = run_pointwise_tail(&cfg).unwrap();
    assert_eq!(rep.records.len(), 60);
    assert_eq!(rep.rows.len(), 2 * 3);
    assert!(rep.rows.iter().all(|r| (0.0..=1.0).contains(&r.frequency)));
    let v2 = 2f64.ln() + 0.5;
    assert!((rep.records[0].reference - v2).abs() < 1e-3);
}

#[test]
fn necessity_scan_with_control() {
    let mut cfg = weyl_config(ExperimentKind::Necessity);
    cfg.coefficients = CoefficientLaw::LogFrechet { alpha: 0.5 };
    cfg.degrees = vec![30, 60];
    cfg.trials = 3;
    cfg.regions = vec![RegionConfig::Product(RegionSpec::annulus(0.5, 2.0))];
    let rep = run_necessity(&cfg).unwrap();
    assert_eq!(rep.records.len(), 2 * 3 * 2 * 2);
    assert!(rep.firings > 0);
    assert_eq!(rep.control_firings, 0);
    // the control uses the same streams
    let heavy: Vec<_> = rep.records.iter().filter(|r| !r.has_flag(flags::CONTROL)).map(|r| r.seed).collect();
    let control: Vec<_> = rep.records.iter().filter(|r| r.has_flag(flags::CONTROL)).map(|r| r.seed).collect();
    assert_eq!(heavy, control);
    let mut none = cfg.clone();
    none.degrees.clear();
    assert!(run_necessity(&none).unwrap().records.is_empty());
}

#[test]
fn bergman_and_onp_runs() {
    let mut cfg = weyl_config(ExperimentKind::Bergman);
    cfg.degrees = vec![20, 40, 80];
    cfg.regions = vec![RegionConfig::Product(RegionSpec::annulus(0.1, 3.0))];
    let recs = run_bergman(&cfg).unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs.windows(2).all(|w| w[1].stat < w[0].stat));

    let onp = ExperimentConfig {
        ensemble: EnsembleConfig::Regular {
            measure: RegularMeasureSpec::Chebyshev,
        },
        coefficients: CoefficientLaw::GaussianReal,
        degrees: vec![20, 50],
        trials: 1,
        regions: Vec::new(),
        probes: vec![vec![[0.0, 1.0]], vec![[2.0, 0.5]]],
        epsilons: vec![0.1],
        experiment_kind: ExperimentKind::OnpCheck,
        seed: 3,
        caps: Caps::default(),
    };
    let recs = run_onp_check(&onp).unwrap();
    let cap: Vec<_> = recs.iter().filter(|r| r.kind == kinds::CAPACITY).collect();
    assert_eq!(cap.len(), 2);
    assert!((cap[1].stat - 2.0).abs() < 0.05);
    assert!(run(&onp).unwrap().summary.rows.len() >= 2);
}

#[test]
fn kac_demo_records_angles() {
    let cfg = ExperimentConfig {
        ensemble: EnsembleConfig::Regular {
            measure: RegularMeasureSpec::Circle,
        },
        coefficients: CoefficientLaw::GaussianComplex,
        degrees: vec![100],
        trials: 2,
        regions: vec![RegionConfig::Product(RegionSpec::annulus(0.9, 1.1))],
        probes: Vec::new(),
        epsilons: vec![0.05],
        experiment_kind: ExperimentKind::Equidistribution,
        seed: 5,
        caps: Caps::default(),
    };
    let recs = run_equidistribution(&cfg).unwrap();
    let ks: Vec<_> = recs.iter().filter(|r| r.kind == kinds::ANGLE_KS).collect();
    assert_eq!(ks.len(), 2);
    assert!(ks.iter().all(|r| r.stat < 0.2 && r.has_flag(flags::KAC_DEMO)));
    let counts: Vec<_> = recs.iter().filter(|r| r.kind == kinds::COUNT_FRACTION).collect();
    assert!(counts.iter().all(|r| r.reference == 1.0 && r.stat > 0.8));
}

#[test]
fn angular_ks_of_uniform_angles() {
    let z: Vec<Complex64> = (0..100).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / 100.0)).collect();
    assert!((angular_ks(&z) - 0.005).abs() < 1e-12);
    let lumped = vec![Complex64::new(1.0, 0.0); 10];
    assert!((angular_ks(&lumped) - 1.0).abs() < 1e-12);
}
