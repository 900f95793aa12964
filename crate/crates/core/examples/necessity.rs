//! Infinite logarithmic moment breaks equidistribution: with log-Fréchet
//! coefficients one term dominates the annulus and certifies it zero-free,
//! while Gaussian coefficients under the same seeds behave.

use zerolab::experiments::{run_necessity, Caps, EnsembleConfig, ExperimentConfig, ExperimentKind, RegionConfig, WeightConfig};
use zerolab::ensembles::CoefficientLaw;
use zerolab::extremal::RegionSpec;

fn main() -> zerolab::Result<()> {
    let cfg = ExperimentConfig {
        ensemble: EnsembleConfig::Weighted {
            weight: WeightConfig::Weyl,
            dimension: 1,
        },
        coefficients: CoefficientLaw::LogFrechet { alpha: 0.5 },
        degrees: vec![50, 100, 200, 400],
        trials: 8,
        regions: vec![RegionConfig::Product(RegionSpec::annulus(0.5, 0.9))],
        probes: Vec::new(),
        epsilons: vec![0.1],
        experiment_kind: ExperimentKind::Necessity,
        seed: 5,
        caps: Caps::default(),
    };
    let rep = run_necessity(&cfg)?;
    println!("heavy-tailed: {} certificate firings, max |count/n - mu_Q| = {:.3}", rep.firings, rep.max_deviation);
    println!(
        "Gaussian control: {} firings, max deviation from n = 200 on: {:.3}",
        rep.control_firings,
        rep.control_max_deviation_from(200)
    );
    for r in rep.records.iter().filter(|r| r.trial == 0 && r.kind.ends_with("count_fraction")) {
        println!("  n = {:>3} {:<22} count/n {:.3}  ref {:.3}", r.n, r.kind, r.stat, r.reference);
    }
    Ok(())
}
