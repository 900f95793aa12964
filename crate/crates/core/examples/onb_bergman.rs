//! Orthonormal monomial bases and the Bergman function: `(1/2n) log S_n` tends to `V_Q`.

use num_complex::Complex64;
use zerolab::extremal::ExtremalEvaluator;
use zerolab::onb::{bergman_convergence_report, build_onb, elliptic_onb, BasisSource};
use zerolab::weights::{make_weight, WeightKind, WeightSpec};

fn main() -> zerolab::Result<()> {
    let w = make_weight(WeightSpec::new(WeightKind::Weyl, 1))?;
    let onb = build_onb(10, &w)?;
    println!("Weyl n = 10, log c_j:");
    for (j, c) in onb.log_coeffs().iter().enumerate() {
        println!("  j = {j:>2}  {c:>10.6}");
    }
    onb.write_csv(std::io::stdout().lock())?;

    let ev = ExtremalEvaluator::new(&w)?;
    let grid: Vec<Vec<Complex64>> = (0..60).map(|i| vec![Complex64::new(0.1 + 2.9 * i as f64 / 59.0, 0.0)]).collect();
    let report = bergman_convergence_report(&BasisSource::Weighted(w.clone()), &[25, 50, 100, 200], &grid, &ev)?;
    for row in &report.rows {
        println!("n = {:>3}: sup |(1/2n) log S_n - V_Q| = {:.5}", row.degree, row.sup_error);
    }

    // the elliptic basis reproduces (1 + |z|²)^n exactly
    let ell = elliptic_onb(40, 1);
    println!("elliptic n = 40 has {} basis functions, log c_20 = {:.6}", ell.len(), ell.log_coeffs()[20]);
    Ok(())
}
