//! Roots of a degree-300 Weyl polynomial, counted in annuli three ways:
//! from the root set, by the argument principle, and against `μ_Q`.

use zerolab::ensembles::{Basis, CoefficientLaw, RandomPolynomial, RngStream};
use zerolab::extremal::{reference_mass, ExtremalEvaluator, MassKind, RegionSpec};
use zerolab::onb::build_onb;
use zerolab::weights::{make_weight, WeightKind, WeightSpec};
use zerolab::zeros::{count_zeros_argument_principle, count_zeros_region, find_roots, log_modulus, RootOptions};

fn main() -> zerolab::Result<()> {
    let n = 300;
    let w = make_weight(WeightSpec::new(WeightKind::Weyl, 1))?;
    let ev = ExtremalEvaluator::new(&w)?;
    let basis = Basis::Monomial(build_onb(n, &w)?.into());
    let f = RandomPolynomial::sample(basis, &CoefficientLaw::GaussianComplex, &mut RngStream::new(42, 0), 0)?;

    let roots = find_roots(&f, &RootOptions::default())?;
    println!(
        "{} roots, converged: {}, worst log10 residual {:.1}, {} restarts",
        roots.len(),
        roots.converged,
        roots.max_log10_residual(),
        roots.restarts
    );

    for (lo, hi) in [(0.0, 0.5), (0.2, 0.8), (0.5, 0.9), (0.9, 1.5)] {
        let region = RegionSpec::annulus(lo, hi);
        let from_roots = count_zeros_region(&roots, &region)?;
        let inner = if lo > 0.0 { count_zeros_argument_principle(&f, lo, 0)?.count } else { 0 };
        let outer = count_zeros_argument_principle(&f, hi, 0)?.count;
        let mu = reference_mass(&ev, &region, MassKind::MuQ)?.value;
        println!(
            "{:<14} roots {:>4}  winding {:>4}  count/n {:.4}  mu_Q {:.4}",
            region.id(),
            from_roots.count,
            outer - inner,
            from_roots.count as f64 / n as f64,
            mu
        );
    }

    let z = [num_complex::Complex64::new(2.0, 0.0)];
    println!("(1/n) log|f(2)| = {:.4}, V_Q(2) = {:.4}", log_modulus(&f, &z) / n as f64, ev.value(&z));
    Ok(())
}
