//! A seeded multi-trial experiment from a config written in code: records,
//! a summary table and the decay of exceedance frequencies with the degree.

use zerolab::experiments::{run, write_summary, ExperimentConfig};

const CONFIG: &str = r#"{
  "ensemble": {"kind": "weighted", "weight": "weyl", "dimension": 1},
  "coefficients": {"kind": "bernoulli"},
  "degrees": [50, 100, 200],
  "trials": 40,
  "regions": [{"annuli": [[0.2, 0.8]]}, {"annuli": [[0.5, 0.9]], "sectors": [[0.0, 1.5707963267948966]]}],
  "experiment_kind": "probability_convergence",
  "seed": 2024
}"#;

fn main() -> zerolab::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    cfg.validate()?;
    let out = run(&cfg)?;
    println!("{} records, config sha256 {}", out.records.len(), cfg.hash());
    println!("first: {}", serde_json::to_string(&out.records[0]).unwrap());
    write_summary(&out.summary, std::io::stdout().lock())?;
    println!("{}", serde_json::to_string_pretty(&out.notes).unwrap());
    Ok(())
}
