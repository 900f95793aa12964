//! The weighted extremal function of the Weyl weight `Q = |z|²/2`, computed by
//! discrete conjugation, next to its closed form and the equilibrium masses it induces.

use zerolab::extremal::{reference_mass, ExtremalEvaluator, MassKind, RegionSpec};
use zerolab::weights::{make_weight, WeightKind, WeightSpec};

fn main() -> zerolab::Result<()> {
    let w = make_weight(WeightSpec::new(WeightKind::Weyl, 1))?;
    let ev = ExtremalEvaluator::new(&w)?;

    println!("{:>8} {:>12} {:>12} {:>10}", "log r", "V_Q", "closed form", "mu_Q(D_r)");
    for i in 0..=8 {
        let s = -2.0 + 0.5 * i as f64;
        let exact = if s <= 0.0 { (2.0 * s).exp() / 2.0 } else { s + 0.5 };
        let v = ev.value_at_log_radii(&[s]);
        println!("{s:>8.2} {v:>12.6} {exact:>12.6} {:>10.4}", ev.radial_equilibrium_cdf(s.exp())?);
    }

    for (lo, hi) in [(0.2, 0.8), (0.5, 0.9), (0.5, 3.0)] {
        let mass = reference_mass(&ev, &RegionSpec::annulus(lo, hi), MassKind::MuQ)?;
        println!("mu_Q({lo} < |z| < {hi}) = {:.4}", mass.value);
    }

    // two variables: the zero-current mass of a bidisk product
    let w2 = make_weight(WeightSpec::new(WeightKind::Weyl, 2))?;
    let ev2 = ExtremalEvaluator::new(&w2)?;
    let region = RegionSpec::product(vec![[0.2, 0.5], [0.2, 0.5]]);
    let vu = reference_mass(&ev2, &region, MassKind::VU)?;
    println!("V_U for {} = {:.5} (Richardson delta {:.1e})", region.id(), vu.value, vu.richardson_delta.unwrap_or(0.0));
    Ok(())
}
