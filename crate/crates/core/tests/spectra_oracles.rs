use lksmult::spectra::*;
use lksmult::{MultiplierSpec, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Roots of `Σ a_m w^m` from the Schur form of the companion matrix.
fn roots(a: &[C64]) -> Vec<C64> {
    let n = a.len() - 1;
    let lead = a[n];
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -a[i] / lead;
    }
    let (_, t) = m.schur().unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

fn count_inside(phi: &[C64], z: C64) -> Option<i64> {
    let mut p = phi.to_vec();
    p[0] -= z;
    let r = roots(&p);
    if r.iter().any(|w| (w.norm() - 1.0).abs() < 1e-6) {
        return None;
    }
    Some(r.iter().filter(|w| w.norm() < 1.0).count() as i64)
}

#[test]
fn companion_oracle_finds_known_roots() {
    let r = roots(&[c(-0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let mut m: Vec<f64> = r.iter().map(|w| w.re).collect();
    m.sort_by(f64::total_cmp);
    assert!((m[0] + 0.5f64.sqrt()).abs() < 1e-12 && (m[1] - 0.5f64.sqrt()).abs() < 1e-12);
}

fn index_consistency(coeffs: &[C64], seed: u64, probes: usize) {
    let phi = SymbolSpec::new(coeffs.to_vec()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < probes {
        let w = C64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
        let z = phi.eval(w) + c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        let Some(expected) = count_inside(coeffs, z) else { continue };
        match winding_number(&phi, z) {
            Ok(k) => assert_eq!(k, expected, "z = {z}"),
            Err(e) => panic!("z = {z}: {e}"),
        }
        checked += 1;
    }
}

#[test]
fn winding_matches_root_count_quadratic() {
    index_consistency(&[c(-0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1, 20);
}

#[test]
fn winding_matches_root_count_cubic() {
    index_consistency(&[c(0.1, 0.2), c(0.6, 0.0), c(0.0, -0.3), c(0.5, 0.1)], 2, 20);
}

#[test]
fn winding_examples_against_oracle() {
    let q = [c(-0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    assert_eq!(count_inside(&q, c(-0.5, 0.0)), Some(2));
    let phi = SymbolSpec::new(q.to_vec()).unwrap();
    assert_eq!(winding_number(&phi, c(-0.5, 0.0)).unwrap(), 2);
    assert_eq!(winding_number(&phi, c(2.0, 0.0)).unwrap(), 0);
    assert!(winding_number(&phi, c(0.5, 0.0)).is_err());
}

fn default_c(k_max: usize) -> Vec<f64> {
    (0..=k_max).map(|k| ((k + 1) as f64).powi(-2)).collect()
}

#[test]
fn eigen_residual_is_below_oracle_tail() {
    let cs = default_c(400);
    let cases = [
        (SymbolSpec::from_real(&[0.0, 1.0]).unwrap(), c(0.5, 0.0)),
        (SymbolSpec::from_real(&[0.0, 0.0, 1.0]).unwrap(), c(0.3, 0.4)),
        (SymbolSpec::new(vec![c(0.2, 0.0), c(0.0, 1.0), c(-0.5, 0.1)]).unwrap(), c(-0.2, 0.6)),
    ];
    for (phi, z) in &cases {
        let r = eigen_residual(phi, &cs, *z, 200).unwrap();
        // independent tail: the only defect sits on the last `deg` entries
        let f: Vec<C64> = (0..=200).map(|k| z.powu(k as u32)).collect();
        let norm: f64 = (0..=200).map(|k| cs[k] * f[k].norm_sqr()).sum::<f64>().sqrt();
        let deg = phi.degree();
        let tail: f64 = (201 - deg..=200).map(|k| cs[k]).sum::<f64>().sqrt();
        let oracle = phi.abs_sum() * z.norm().powi(201) * tail / norm;
        assert!(r.residual <= oracle + 1e-14, "{} > {oracle}", r.residual);
        assert!(r.residual <= 1e-10);
        assert!((r.eigenvalue - phi.eval(*z)).norm() < 1e-15);
        assert!(r.truncation_ok);
    }
}

#[test]
fn eigen_residual_tracks_truncation() {
    let cs = default_c(400);
    let phi = SymbolSpec::from_real(&[0.0, 1.0]).unwrap();
    let z = c(0.8, 0.0);
    let rs: Vec<f64> = [20, 40, 80].iter().map(|&k| eigen_residual(&phi, &cs, z, k).unwrap().residual).collect();
    assert!(rs[0] > rs[1] && rs[1] > rs[2]);
    assert!(matches!(eigen_residual(&phi, &cs, c(1.0, 0.0), 50), Err(lksmult::Error::OutsideSpace(_))));
}

#[test]
fn resolvent_is_monotone_inside_and_stable_outside() {
    let nu = NuMeasure::golden(1 << 15).unwrap();
    let id = SymbolSpec::from_real(&[0.0, 1.0]).unwrap();
    let ns = [8, 16, 32, 64];
    for z in [c(0.0, 0.0), c(0.3, -0.2), c(-0.5, 0.5)] {
        let rows = resolvent_probe(&id, &nu, z, &ns).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].value <= w[0].value + 1e-10, "z = {z}: {:?}", rows);
        }
        assert!(rows[3].value < 0.5 * rows[0].value);
    }
    let out = resolvent_probe(&id, &nu, c(3.0, 0.0), &ns).unwrap();
    for w in out.windows(2) {
        assert!(w[1].value <= w[0].value + 1e-10);
    }
    assert!(out.iter().all(|r| r.value >= 1.0 - 1e-9));
}

#[test]
fn inverse_rotation_grows_forward_stays_bounded() {
    let nu = NuMeasure::golden(1 << 15).unwrap();
    let ns = [16, 32, 64];
    let s = slp_failure_demo(&nu, &ns).unwrap();
    assert!(s.strictly_increasing);
    assert!(s.growth > 3.0);
    assert!(s.forward.iter().all(|r| r.value <= 2.0 + 1e-9));
    let unit = compression_norms(&MultiplierSpec::Constant { re: 0.6, im: 0.8 }, &nu, &ns).unwrap();
    assert!(unit.iter().all(|r| (r.value - 1.0).abs() < 1e-9));
}

#[test]
fn visible_spectrum_is_dense_on_the_curve() {
    let phi = SymbolSpec::from_real(&[-0.5, 0.0, 1.0]).unwrap();
    assert!(visible_density(&phi, golden_angle(), 10_000, 4096) <= 1e-2);
}
