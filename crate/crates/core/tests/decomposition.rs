use lksmult::multipliers::riesz_mu;
use lksmult::singular::*;
use lksmult::{MultiplierSpec, C64};
use std::f64::consts::PI;

fn two_point(delta: f64) -> MultiplierSpec {
    MultiplierSpec::PowerRotation { delta, theta: PI / 2.0 }
}

fn params() -> Theorem53Params {
    Theorem53Params::new(0.3, 0.7, PI / 2.0)
}

fn cut() -> CutoffSpec {
    CutoffSpec::new(PI / 8.0).unwrap()
}

#[test]
fn decay_between_thresholds_passes() {
    let r = theorem53_check(&two_point(0.25), &cut(), &params()).unwrap();
    assert!(r.generic);
    assert!((r.gamma - 0.4).abs() < 1e-15);
    assert!(r.cond4.bounded && r.cond5.bounded);
    assert!(r.cond6.as_ref().unwrap().bounded);
    assert!(r.passes);
}

#[test]
fn slow_decay_fails_on_the_gamma_condition() {
    let r = theorem53_check(&two_point(0.15), &cut(), &params()).unwrap();
    assert!(!r.passes);
    let c6 = r.cond6.unwrap();
    assert!(!c6.bounded);
    assert!(c6.growth_per_octave > 1.0);
    let last = *c6.ratios.last().unwrap();
    let mid = c6.ratios[c6.ratios.len() / 2];
    assert!(last > mid);
}

#[test]
fn verdict_is_reach_independent() {
    let mut p = params();
    let a = theorem53_check(&two_point(0.25), &cut(), &p).unwrap();
    p.reach = 1 << 16;
    let b = theorem53_check(&two_point(0.25), &cut(), &p).unwrap();
    for (x, y) in a.constants.iter().zip(&b.constants) {
        assert!((x - y).abs() <= 0.02 * x.max(*y), "{x} vs {y}");
    }
    assert_eq!(a.passes, b.passes);
}

#[test]
fn constant_multiplier_splits_into_constant_and_leakage() {
    let lam = MultiplierSpec::constant(1.5);
    let (l1, l2) = decomposition_specs(&lam, &cut(), -64, 64).unwrap();
    for j in [-1000, -64, 0, 13, 64, 1000] {
        assert!((l1.value(j) - C64::new(1.5, 0.0)).norm() < 1e-10);
        assert!(l2.value(j).norm() < 1e-10);
    }
    let mut p = params();
    p.k_max = 8;
    let r = theorem53_check(&lam, &cut(), &p).unwrap();
    assert!(r.passes, "{:?} {:?} {:?}", r.cond4, r.cond5, r.cond6);
    assert!(r.constants.iter().all(|c| c.is_finite()));
}

#[test]
fn slp_inverse_passes_the_same_conditions() {
    let p = params();
    let pr = MultiplierSpec::PowerRotation { delta: 0.25, theta: PI / 2.0 };
    let lam = MultiplierSpec::Sum { terms: vec![MultiplierSpec::constant(2.0), pr.clone()] };
    let r = (p.reach as i64) + 8;
    let (lo, hi) = (-r, (1i64 << p.k_max) + r);
    let delta = lam.inf_abs(lo, hi);
    assert!(delta >= 1.0 - 1e-12);

    let forward = theorem53_check(&lam, &cut(), &p).unwrap();
    assert!(forward.passes);

    let (l1, l2) = decomposition_specs(&lam, &cut(), lo, hi).unwrap();
    let adj = theorem59_adjust(&l1.realize(lo, hi), &l2.realize(lo, hi), delta).unwrap();
    assert!(adj.inf_lambda3 >= delta / 2.0);
    assert!(adj.reconstruction_error <= 1e-14);

    let inv1 = MultiplierSpec::Patched {
        seq: adj.inverse1.clone(),
        far: Box::new(MultiplierSpec::constant(0.5)),
    };
    let inv2 = MultiplierSpec::Patched {
        seq: adj.inverse2.clone(),
        far: Box::new(MultiplierSpec::Scaled { factor: C64::new(-0.25, 0.0), inner: Box::new(pr) }),
    };
    let back = theorem53_conditions(&inv1, &inv2, &p).unwrap();
    assert!(back.passes, "{:?}", back.constants);
}

#[test]
fn pair_reconstructs_lambda_on_the_window() {
    let lam = two_point(0.25);
    let (l1, l2) = decomposition_specs(&lam, &cut(), -300, 300).unwrap();
    for j in -300..=300 {
        assert!((l1.value(j) + l2.value(j) - lam.value(j)).norm() < 1e-14);
    }
}

#[test]
fn far_part_is_followed_past_the_window() {
    let lam = two_point(0.25);
    let (l1, l2) = decomposition_specs(&lam, &cut(), -50, 50).unwrap();
    let j = 5000;
    assert!(l1.value(j).norm() == 0.0);
    assert!((l2.value(j) - lam.value(j)).norm() < 1e-15);
    // the μ of the far part sees the power profile
    let a = riesz_mu(&l2, 0.3, 0, 8, 1 << 12).unwrap();
    let b = riesz_mu(&l2, 0.3, 0, 8, 1 << 14).unwrap();
    for k in 0..=8 {
        let (x, y) = (a.nu.get(k), b.nu.get(k));
        assert!((x - y).abs() <= 1e-3 * y, "{x} vs {y}");
    }
}
