use std::f64::consts::PI;

use super::*;
use crate::weights::{make_weight, WeightKind, WeightSpec};

fn weight(kind: WeightKind, m: usize) -> WeightHandle {
    make_weight(WeightSpec::new(kind, m)).unwrap()
}

/// Closed form `V_Q` for `Q = |z|²/2`: `|z|²/2` inside the unit disk, `log|z| + ½` outside.
fn weyl_v(r: f64) -> f64 {
    if r <= 1.0 {
        0.5 * r * r
    } else {
        r.ln() + 0.5
    }
}

#[test]
fn weyl_conjugate_matches_calculus() {
    let w = weight(WeightKind::Weyl, 1);
    let table = conjugate_profile(&w.log_profile(), ConjugationGrid::default_for(1)).unwrap();
    // stationary point s = ½ log t gives Φ*(t) = (t/2) log t − t/2
    for (i, &t) in table.t_axis().iter().enumerate() {
        let exact = if t == 0.0 { 0.0 } else { 0.5 * t * t.ln() - 0.5 * t };
        assert!((table.at(&[i]) - exact).abs() < 1e-4, "t={t}");
    }
    assert!((table.at(&[table.t_axis().len() - 1]) + 0.5).abs() < 1e-4);
    assert!(table.at(&[0]) <= 0.0);
}

#[test]
fn power_one_conjugate() {
    let w = weight(WeightKind::Power(vec![1.0]), 1);
    let table = conjugate_profile(&w.log_profile(), ConjugationGrid::default_for(1)).unwrap();
    for (i, &t) in table.t_axis().iter().enumerate().skip(1) {
        let exact = t * t.ln() - t;
        assert!((table.at(&[i]) - exact).abs() < 1e-4, "t={t}");
    }
    // the left face of [−8, 8] loses at most e^{−8}
    assert!(table.left_truncation <= (-8f64).exp() * 1.0001);
}

#[test]
fn small_box_is_rejected() {
    let w = weight(WeightKind::Weyl, 1);
    let grid = ConjugationGrid {
        s_lo: -8.0,
        s_hi: -1.0,
        s_points: 512,
        t_points: 64,
    };
    assert!(matches!(conjugate_profile(&w.log_profile(), grid), Err(Error::SBoxTooSmall(_))));
    let grid = ConjugationGrid {
        s_lo: -1.0,
        s_hi: 8.0,
        s_points: 512,
        t_points: 64,
    };
    assert!(matches!(conjugate_profile(&w.log_profile(), grid), Err(Error::SBoxTooSmall(_))));
}

#[test]
fn weyl_extremal_examples() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 1)).unwrap();
    assert!((ev.value_at_radii(&[1.0]) - 0.5).abs() < 1e-4);
    assert!((ev.value_at_radii(&[2.0]) - (2f64.ln() + 0.5)).abs() < 1e-4);
    // V(0) = −Φ*(0) = Φ(s_lo), which is the left truncation
    let at_zero = ev.value(&[Complex64::new(0.0, 0.0)]);
    assert!(at_zero >= 0.0 && at_zero <= ev.table().unwrap().left_truncation + 1e-15);
    assert!(ev.value_at_radii(&[1e-9]).abs() < 1e-6);
    let (_, bound) = ev.value_with_bound(&[Complex64::new(2.0, 0.0)]);
    assert!(bound > 0.0 && bound < 0.05);
}

#[test]
fn weyl_closed_form_on_log_radius_grid() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 1)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let s = -2.0 + 4.0 * i as f64 / 1999.0;
        worst = worst.max((ev.value_at_log_radii(&[s]) - weyl_v(s.exp())).abs());
    }
    assert!(worst <= 1e-3, "max error {worst}");
}

#[test]
fn fubini_study_closed_form_and_conjugation_agree() {
    for m in [1usize, 2] {
        let w = weight(WeightKind::FubiniStudy, m);
        let ev = ExtremalEvaluator::new(&w).unwrap();
        let mut z = vec![Complex64::new(0.0, 0.0); m];
        z[0] = Complex64::new(1.0, 0.0);
        assert!((ev.value(&z) - 0.5 * 2f64.ln()).abs() < 1e-15);
        let conj = ExtremalEvaluator::conjugated(&w, ConjugationGrid::default_for(m)).unwrap();
        for r in [0.3, 1.0, 2.5] {
            let radii = vec![r; m];
            let exact = 0.5 * (m as f64 * r * r).ln_1p();
            assert!((conj.value_at_radii(&radii) - exact).abs() < 5e-3, "m={m} r={r}");
        }
    }
}

#[test]
fn envelope_and_lelong_bound_on_probes() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for kind in [WeightKind::Weyl, WeightKind::Power(vec![3.0])] {
        let w = weight(kind, 1);
        let ev = ExtremalEvaluator::new(&w).unwrap();
        let h = ev.table().unwrap().grid().s_spacing();
        let mut lelong: f64 = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let r = (rng.random::<f64>() * 8.0 - 4.0).exp();
            let v = ev.value_at_radii(&[r]);
            // between S nodes the grid envelope is the chord of Φ
            assert!(v <= w.eval(&[r]) + h * h, "r={r} v={v} q={}", w.eval(&[r]));
            lelong = lelong.max(v - r.ln().max(0.0));
        }
        assert!(lelong < 2.0);
    }
}

#[test]
fn two_dimensional_envelope() {
    use rand::{Rng, SeedableRng};
    let w = weight(WeightKind::Weyl, 2);
    let ev = ExtremalEvaluator::new(&w).unwrap();
    let h = ev.table().unwrap().grid().s_spacing();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let radii = [(rng.random::<f64>() * 6.0 - 3.0).exp(), (rng.random::<f64>() * 6.0 - 3.0).exp()];
        let v = ev.value_at_radii(&radii);
        assert!(v <= w.eval(&radii) + h * h, "{radii:?} v={v} q={}", w.eval(&radii));
        // Weyl weight is radial: V = ‖z‖²/2 or log‖z‖ + ½
        let norm = (radii[0] * radii[0] + radii[1] * radii[1]).sqrt();
        assert!((v - weyl_v(norm)).abs() < 2e-2, "{radii:?}");
    }
}

#[test]
fn zero_coordinates_pin_slopes() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 2)).unwrap();
    let z = [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
    assert!((ev.value(&z) - weyl_v(2.0)).abs() < 1e-2);
}

#[test]
fn table_invariants() {
    let w = weight(WeightKind::Weyl, 1);
    let grid = ConjugationGrid {
        s_lo: -8.0,
        s_hi: 8.0,
        s_points: 1025,
        t_points: 257,
    };
    let table = conjugate_profile(&w.log_profile(), grid).unwrap();
    let n = table.t_axis().len();
    // midpoint convexity on grid triples
    for i in 0..n {
        for j in (i..n).step_by(2) {
            let mid = (i + j) / 2;
            assert!(table.at(&[mid]) <= 0.5 * (table.at(&[i]) + table.at(&[j])) + 1e-12);
        }
    }
    // enlarging the box with the same spacing can only raise Φ*
    let wider = ConjugationGrid {
        s_lo: -12.0,
        s_hi: 12.0,
        s_points: 1537,
        t_points: 257,
    };
    let big = conjugate_profile(&w.log_profile(), wider).unwrap();
    for i in 0..n {
        assert!(big.at(&[i]) >= table.at(&[i]) - 1e-15);
    }
}

#[test]
fn double_conjugate_reproduces_table() {
    let w = weight(WeightKind::Weyl, 1);
    let grid = ConjugationGrid::default_for(1);
    let ev = ExtremalEvaluator::new(&w).unwrap();
    let table = ev.table().unwrap();
    let s_axis = grid.s_axis();
    let psi = ev.psi_grid(&[s_axis.clone()]);
    let again = conjugate_1d(&s_axis, &psi.values, table.t_axis());
    let tol = 2.0 * grid.s_spacing() * grid.t_spacing() + 1e-9;
    for (i, v) in again.iter().enumerate() {
        assert!((v - table.at(&[i])).abs() <= tol.max(2e-5), "i={i} {v} {}", table.at(&[i]));
    }
}

#[test]
fn psi_grid_agrees_with_pointwise_sup() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 2)).unwrap();
    let axis: Vec<f64> = (0..9).map(|i| -1.5 + 0.35 * i as f64).collect();
    let g = ev.psi_grid(&[axis.clone(), axis.clone()]);
    for (a, &s) in axis.iter().enumerate() {
        for (b, &u) in axis.iter().enumerate() {
            let direct = ev.value_at_log_radii(&[s, u]);
            assert!((g.values[a * axis.len() + b] - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn radial_cdf_weyl() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 1)).unwrap();
    assert!((ev.radial_equilibrium_cdf(0.5).unwrap() - 0.25).abs() < 2e-3);
    // the support edge is a kink of Ψ; the symmetric difference sees half a cell of it
    let h = ev.table().unwrap().grid().s_spacing();
    assert!((ev.radial_equilibrium_cdf(1.0).unwrap() - 1.0).abs() < h);
    assert!((ev.radial_equilibrium_cdf(2.0).unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(ev.radial_equilibrium_cdf(0.0).unwrap(), 0.0);
    let mut prev = 0.0;
    for i in 1..400 {
        let c = ev.radial_equilibrium_cdf(i as f64 * 0.01).unwrap();
        assert!(c >= prev - 1e-12 && c <= 1.0);
        prev = c;
    }
    assert!(ExtremalEvaluator::new(&weight(WeightKind::Weyl, 2))
        .unwrap()
        .radial_equilibrium_cdf(1.0)
        .is_err());
}

#[test]
fn radial_cdf_power_one_matches_profile_difference() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Power(vec![1.0]), 1)).unwrap();
    // Ψ(s) = e^s for s ≤ 0, so μ_Q(D_r) = r there
    for r in [0.05f64, 0.2, 0.6] {
        let fd = {
            let h = 1e-2;
            (ev.value_at_log_radii(&[r.ln() + h]) - ev.value_at_log_radii(&[r.ln() - h])) / (2.0 * h)
        };
        let cdf = ev.radial_equilibrium_cdf(r).unwrap();
        assert!((cdf - fd).abs() < 2e-3);
        assert!((cdf - r).abs() < 2e-3);
    }
}

#[test]
fn one_variable_reference_masses() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 1)).unwrap();
    let m = reference_mass(&ev, &RegionSpec::annulus(0.2, 0.8), MassKind::MuQ).unwrap();
    assert!((m.value - 0.60).abs() < 2e-3, "{}", m.value);
    assert_eq!(m.method, MassMethod::RadialDerivative);
    let half = reference_mass(
        &ev,
        &RegionSpec::annulus(0.2, 0.8).with_sectors(vec![[0.0, PI]]),
        MassKind::VU,
    )
    .unwrap();
    assert!((half.value - 0.30).abs() < 1e-3);
    let empty = reference_mass(
        &ev,
        &RegionSpec::annulus(0.2, 0.8).with_sectors(vec![[1.0, 1.0]]),
        MassKind::MuQ,
    )
    .unwrap();
    assert_eq!(empty.value, 0.0);

    let fs = ExtremalEvaluator::new(&weight(WeightKind::FubiniStudy, 1)).unwrap();
    let d = reference_mass(&fs, &RegionSpec::disk(1.0), MassKind::MU).unwrap();
    assert!((d.value - 0.5).abs() < 1e-15);
    assert!(reference_mass(&ev, &RegionSpec::disk(1.0), MassKind::MU).is_err());
}

#[test]
fn laplacian_route_matches_radial_route_in_one_variable() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, 1)).unwrap();
    let region = RegionSpec::annulus(0.3, 1.7);
    let fd = laplacian_mass(&ev, &region, 64);
    let radial = reference_mass(&ev, &region, MassKind::MuQ).unwrap().value;
    assert!((fd - radial).abs() < 3e-3, "{fd} vs {radial}");
    assert!((fd - (1.0 - 0.09)).abs() < 3e-3);
}

/// Volume oracle: inside the unit ball `(1/2π)ΔV = m/π` for the Weyl weight.
#[test]
fn weyl_multivariate_mass_matches_volume_oracle() {
    for m in [2usize, 3] {
        let ev = ExtremalEvaluator::new(&weight(WeightKind::Weyl, m)).unwrap();
        let region = RegionSpec::product(vec![[0.2, 0.5]; m]);
        let mass = reference_mass(&ev, &region, MassKind::VU).unwrap();
        let exact = m as f64 / PI * region.volume();
        let rel = (mass.value - exact).abs() / exact;
        assert!(rel < 0.02, "m={m}: {} vs {exact} (rel {rel})", mass.value);
        assert_eq!(mass.method, MassMethod::FiniteDifferenceLaplacian);
        assert!(mass.richardson_delta.unwrap() < 0.02 * exact);
    }
}

/// Fubini–Study density `(1/π)(m + (m−1)ρ²)/(1+ρ²)²` integrated by tensor Gauss–Legendre.
#[test]
fn fubini_study_two_variable_mass() {
    let ev = ExtremalEvaluator::new(&weight(WeightKind::FubiniStudy, 2)).unwrap();
    let region = RegionSpec::product(vec![[0.3, 1.1], [0.5, 2.0]]);
    let (x, w) = crate::quadrature::gauss_legendre(40);
    let map = |lo: f64, hi: f64, xi: f64| 0.5 * (hi - lo) * xi + 0.5 * (hi + lo);
    let mut oracle = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let r1 = map(0.3, 1.1, *xi);
        for (xj, wj) in x.iter().zip(&w) {
            let r2 = map(0.5, 2.0, *xj);
            let rho2 = r1 * r1 + r2 * r2;
            let density = (2.0 + rho2) / (PI * (1.0 + rho2).powi(2));
            oracle += wi * wj * 0.4 * 0.75 * density * r1 * r2 * (2.0 * PI).powi(2);
        }
    }
    let mass = reference_mass(&ev, &region, MassKind::MU).unwrap();
    assert!((mass.value - oracle).abs() < 1e-3 * oracle, "{} vs {oracle}", mass.value);
}
