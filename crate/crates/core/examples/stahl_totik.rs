//! Random combinations of Chebyshev orthonormal polynomials: zeros gather on
//! `[−1, 1]` with the arcsine law, and `γ_k^{1/k}` approaches `1/Cap = 2`.

use num_complex::Complex64;
use zerolab::ensembles::{Basis, CoefficientLaw, RandomPolynomial, RngStream};
use zerolab::stahltotik::{build_recurrence_onb, capacity_check, equilibrium_mass, onp_root_asymptotic_check, PlanarRegion, RegularMeasureSpec};
use zerolab::zeros::{count_zeros_planar, find_roots, RootOptions};

fn main() -> zerolab::Result<()> {
    let spec = RegularMeasureSpec::Chebyshev;
    let n = 400;
    let onb = build_recurrence_onb(&spec, n)?;
    let cap = capacity_check(&onb)?;
    for k in [10, 50, 100, 400] {
        println!("gamma_{k}^(1/{k}) = {:.5} (target {})", cap.ratios[k - 1].1, cap.target);
    }

    let f = RandomPolynomial::sample(Basis::Recurrence(onb.into()), &CoefficientLaw::GaussianReal, &mut RngStream::new(11, 0), 0)?;
    let roots = find_roots(&f, &RootOptions::default())?;
    for rect in [[[-0.5, 0.5], [-0.1, 0.1]], [[0.0, 1.0], [-0.1, 0.1]], [[-1.1, 1.1], [-0.05, 0.05]]] {
        let region = PlanarRegion::Rectangle(rect);
        let count = count_zeros_planar(&roots, &region)?;
        println!(
            "{:<26} count/n {:.4}  equilibrium mass {:.4}",
            region.id(),
            count.count as f64 / n as f64,
            equilibrium_mass(&spec, &region)?
        );
    }

    let probes = [Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.5)];
    let report = onp_root_asymptotic_check(&spec, &[25, 50, 100, 200], &probes)?;
    for (n, err) in &report.rows {
        println!("n = {n:>3}: max |(1/n) log|p_n| - g| = {err:.5}");
    }
    Ok(())
}
