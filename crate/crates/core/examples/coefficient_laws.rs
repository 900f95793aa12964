//! Coefficient laws, their logarithmic moments and the growth of `|a_j|^{1/j}`.

use zerolab::ensembles::{concentration_estimate, empirical_log_moment, log_moment_finite, tail_growth_diagnostic, CoefficientLaw, RngStream};

fn main() -> zerolab::Result<()> {
    let laws = [
        CoefficientLaw::GaussianComplex,
        CoefficientLaw::Bernoulli,
        CoefficientLaw::CauchyReal,
        CoefficientLaw::LogFrechet { alpha: 0.5 },
        CoefficientLaw::LogFrechet { alpha: 3.0 },
    ];
    for (i, law) in laws.iter().enumerate() {
        let mut stream = RngStream::new(7, i as u64);
        let finite = log_moment_finite(law, 1)?;
        let moment = empirical_log_moment(law, 1, 20_000, &mut stream)?;
        let conc = concentration_estimate(law, 0.1, 4000, &mut stream)?;
        let tail = tail_growth_diagnostic(law, 1, 0.1, 100_000, &mut stream)?;
        println!(
            "{:<12} E log(1+|a|) finite: {finite:<5} estimate {:>10.3} ± {:<8.3} conc(0.1) {:.3}  violations {:>6}  log max|a_j|^(1/j) {:.2}",
            law.name(),
            moment.value,
            moment.se,
            conc.value,
            tail.violations,
            tail.log_running_max
        );
    }
    Ok(())
}
