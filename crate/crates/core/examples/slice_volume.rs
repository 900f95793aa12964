//! Zero sets in several variables: the slice estimator of `Vol(Z_f ∩ U)` on a
//! hyperplane with known area, then on random Weyl polynomials against `𝒱_U`.

use std::sync::Arc;

use num_complex::Complex64;
use zerolab::ensembles::{assemble_polynomial, Basis, Coefficient, CoefficientLaw, RandomPolynomial, RngStream};
use zerolab::extremal::{reference_mass, ExtremalEvaluator, MassKind, RegionSpec};
use zerolab::onb::{build_onb, unit_basis};
use zerolab::weights::{make_weight, WeightKind, WeightSpec};
use zerolab::zeros::slice_volume;

fn main() -> zerolab::Result<()> {
    // z_1 = c cuts the bidisk in a disk of area π
    let onb = unit_basis(1, 2);
    let mut coeffs = vec![Coefficient::ZERO; onb.len()];
    coeffs[onb.indices().position(&[1, 0]).unwrap()] = Coefficient::from_complex(Complex64::new(1.0, 0.0));
    coeffs[onb.indices().position(&[0, 0]).unwrap()] = Coefficient::from_complex(Complex64::new(-0.3, -0.2));
    let plane = assemble_polynomial(Basis::Monomial(Arc::new(onb)), coeffs)?;
    let v = slice_volume(&plane, &RegionSpec::product(vec![[0.1, 0.8], [0.0, 1.0]]), 32)?;
    println!("hyperplane: {:.6} (exact {:.6})", v.value, std::f64::consts::PI);

    let m = 2;
    let w = make_weight(WeightSpec::new(WeightKind::Weyl, m))?;
    let ev = ExtremalEvaluator::new(&w)?;
    let region = RegionSpec::product(vec![[0.2, 0.6], [0.2, 0.6]]);
    let vu = reference_mass(&ev, &region, MassKind::VU)?.value;
    for n in [10, 20, 40] {
        let basis = Basis::Monomial(Arc::new(build_onb(n, &w)?));
        let f = RandomPolynomial::sample(basis, &CoefficientLaw::GaussianComplex, &mut RngStream::new(3, 0), 0)?;
        let s = slice_volume(&f, &region, 64)?;
        println!("n = {n:>2}: sliceVol/n = {:.4} ± {:.4}, V_U = {vu:.4}", s.value / n as f64, s.se / n as f64);
    }
    Ok(())
}
