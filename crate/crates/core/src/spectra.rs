//! Multipliers of `L²(ν)` for the discrete measure `ν = Σ c_k δ_{ζ^k}`:
//! symbol multipliers `λ_n = φ(ζⁿ)`, eigenvector residuals, finite-section
//! resolvent probes, winding numbers and the growth of inverse multipliers.
//!
//! `f ↦ (f(ζ^k))_k` identifies `L²(ν)` with `l²(c)`; there `T_{(ζⁿ)}` is the
//! backward shift and `T_λ = Σ_m φ̂(m) S*^m`.

use crate::error::{invalid, Error, Result};
use crate::linalg::{compression_singular_values, factor, Factor};
use crate::multipliers::MultiplierSpec;
use crate::seqcore::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Default number of atoms `ζ^0, ..., ζ^K`.
pub const DEFAULT_ATOMS: usize = 1 << 17;

/// Orders up to which a rotation must not be periodic.
const ROOT_ORDER_LIMIT: u64 = 1_000_000;

/// Golden-ratio rotation angle `2π(√5 − 1)/2`.
pub fn golden_angle() -> f64 {
    TAU * (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuMeasure {
    /// `ζ = e^{i·angle}`
    pub angle: f64,
    /// `c_0, ..., c_K`
    pub c: Vec<f64>,
    /// `sup c_k / c_{k+1}`
    pub ratio_sup: f64,
    /// `(sup_k c_k/c_{k+m})^{1/2m}` with `m = K/2`, a proxy for the spectral
    /// radius of the backward shift on `l²(c)`
    pub radius_proxy: f64,
}

impl NuMeasure {
    /// Golden-ratio `ζ` with `c_k = (k+1)^{−2}`.
    pub fn golden(atoms: usize) -> Result<Self> {
        Self::build(golden_angle(), (0..atoms).map(|k| ((k + 1) as f64).powi(-2)).collect(), false)
    }

    /// Any angle; rejected when `ζ^k = 1` for some `k ≤ 10⁶`.
    pub fn new(angle: f64, c: Vec<f64>) -> Result<Self> {
        Self::build(angle, c, true)
    }

    fn build(angle: f64, c: Vec<f64>, check_root: bool) -> Result<Self> {
        if c.len() < 4 {
            return Err(invalid("need at least 4 atoms"));
        }
        if c.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("c_k must be positive"));
        }
        if !angle.is_finite() {
            return Err(invalid("angle must be finite"));
        }
        if check_root {
            let turn = (angle / TAU).rem_euclid(1.0);
            for k in 1..=ROOT_ORDER_LIMIT {
                let x = (turn * k as f64).rem_euclid(1.0);
                if x.min(1.0 - x) < 64.0 * f64::EPSILON * k as f64 {
                    return Err(Error::Precondition(format!("ζ is a root of unity of order {k}")));
                }
            }
        }
        let ratio_sup = c.windows(2).map(|w| w[0] / w[1]).fold(0.0, f64::max);
        let m = c.len() / 2;
        let radius_proxy =
            (0..c.len() - m).map(|k| c[k] / c[k + m]).fold(0.0, f64::max).powf(1.0 / (2.0 * m as f64));
        if radius_proxy > 1.01 {
            log::warn!("backward-shift spectral radius proxy {radius_proxy:.4} exceeds 1; the spectrum disc is rescaled");
        }
        Ok(Self { angle, c, ratio_sup, radius_proxy })
    }

    pub fn zeta(&self) -> C64 {
        C64::from_polar(1.0, self.angle)
    }

    /// `ζⁿ` with the phase reduced before exponentiation.
    pub fn zeta_pow(&self, n: i64) -> C64 {
        let turn = (self.angle / TAU).rem_euclid(1.0);
        C64::from_polar(1.0, TAU * (turn * n as f64).rem_euclid(1.0))
    }

    /// `ν̂(d) = Σ_k c_k ζ^{kd}` for `d = 0..=d_max`.
    pub fn moments(&self, d_max: usize) -> Vec<C64> {
        (0..=d_max as i64)
            .into_par_iter()
            .map(|d| {
                let w = self.zeta_pow(d);
                let mut p = C64::new(1.0, 0.0);
                let mut s = C64::new(0.0, 0.0);
                for (k, ck) in self.c.iter().enumerate() {
                    s += p * ck;
                    p *= w;
                    if k % 1024 == 1023 {
                        p = self.zeta_pow(d * (k as i64 + 1));
                    }
                }
                s
            })
            .collect()
    }

    /// Gram matrix `V_{ab} = ⟨e_{n_b}, e_{n_a}⟩ = ν̂(n_b − n_a)` on `|n| ≤ N`.
    pub fn gram(&self, n: usize) -> DMatrix<C64> {
        let mom = self.moments(2 * n);
        let dim = 2 * n + 1;
        DMatrix::from_fn(dim, dim, |a, b| if b >= a { mom[b - a] } else { mom[a - b].conj() })
    }
}

/// Polynomial `φ(z) = Σ_m φ̂(m) z^m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolSpec {
    pub coeffs: Vec<C64>,
}

impl SymbolSpec {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("symbol needs finite coefficients"));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// `Σ |φ̂(m)|`.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// `λ_n = φ(ζⁿ)`.
pub fn symbol_multiplier(phi: &SymbolSpec, angle: f64) -> MultiplierSpec {
    MultiplierSpec::Symbol { coeffs: phi.coeffs.clone(), angle }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResidual {
    /// `φ(z)`
    pub eigenvalue: C64,
    /// `‖(T_λ − φ(z)) f_z‖ / ‖f_z‖` on the truncation
    pub residual: f64,
    /// `Σ|φ̂| |z|^{K+1} (Σ_{K−deg<k≤K} c_k)^{1/2} / ‖f_z‖`
    pub tail_bound: f64,
    /// `|z|^{2K} c_K < 10^{−16} ‖f_z‖²`
    pub truncation_ok: bool,
}

/// Residual of `T_λ f_z = φ(z) f_z`, `f_z = (z^k)_{k≤K}`, in `l²(c)` with
/// `T_λ = Σ_m φ̂(m) S*^m` applied to the truncated vector.
pub fn eigen_residual(phi: &SymbolSpec, c: &[f64], z: C64, k_max: usize) -> Result<EigenResidual> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideSpace(z.norm()));
    }
    if c.len() <= k_max {
        return Err(invalid(format!("need c_k up to k = {k_max}")));
    }
    let f: Vec<C64> = (0..=k_max).scan(C64::new(1.0, 0.0), |p, _| {
        let v = *p;
        *p *= z;
        Some(v)
    }).collect();
    let lam = phi.eval(z);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..=k_max {
        let tf: C64 = phi
            .coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| k + m <= k_max)
            .map(|(m, a)| a * f[k + m])
            .sum();
        num += c[k] * (tf - lam * f[k]).norm_sqr();
        den += c[k] * f[k].norm_sqr();
    }
    let deg = phi.degree();
    let edge: f64 = c[(k_max + 1).saturating_sub(deg).min(k_max + 1)..=k_max].iter().sum();
    let norm = den.sqrt();
    Ok(EigenResidual {
        eigenvalue: lam,
        residual: num.sqrt() / norm,
        tail_bound: phi.abs_sum() * z.norm().powi(k_max as i32 + 1) * edge.sqrt() / norm,
        truncation_ok: z.norm().powi(2 * k_max as i32) * c[k_max] < 1e-16 * den,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    /// window half-width actually used after conditioning reduction
    pub effective_n: usize,
    pub value: f64,
}

/// Factor of the Gram matrix on `|n| ≤ N`, shrinking `N` while Cholesky
/// needs regularization.
fn window_factor(nu: &NuMeasure, n: usize) -> Result<(usize, Factor<C64>)> {
    let mut m = n;
    loop {
        let f = factor(&nu.gram(m))?;
        if f.jitter == 0.0 || m <= 4 {
            if m < n {
                log::warn!("Gram ill-conditioned at N = {n}; window reduced to N = {m}");
            }
            return Ok((m, f));
        }
        m = m * 3 / 4;
    }
}

fn diag(lambda: &MultiplierSpec, n: usize, shift: C64) -> Vec<C64> {
    let ni = n as i64;
    (-ni..=ni).map(|j| lambda.value(j) - shift).collect()
}

/// Smallest singular value of `V^{1/2}(Λ − z)V^{−1/2}` on `|n| ≤ N`.
pub fn resolvent_probe(phi: &SymbolSpec, nu: &NuMeasure, z: C64, ns: &[usize]) -> Result<Vec<ProbeRow>> {
    let lam = symbol_multiplier(phi, nu.angle);
    ns.iter()
        .map(|&n| {
            let (m, f) = window_factor(nu, n)?;
            let (_, lo) = compression_singular_values(&f, &diag(&lam, m, z));
            Ok(ProbeRow { n, effective_n: m, value: lo })
        })
        .collect()
}

/// Compression norms `‖V^{1/2}ΛV^{−1/2}‖` of `T_λ` on `|n| ≤ N`.
pub fn compression_norms(lambda: &MultiplierSpec, nu: &NuMeasure, ns: &[usize]) -> Result<Vec<ProbeRow>> {
    ns.iter()
        .map(|&n| {
            let (m, f) = window_factor(nu, n)?;
            let (hi, _) = compression_singular_values(&f, &diag(lambda, m, C64::new(0.0, 0.0)));
            Ok(ProbeRow { n, effective_n: m, value: hi })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlpFailure {
    /// norms for `λ_n = ζⁿ`
    pub forward: Vec<ProbeRow>,
    /// norms for `λ_n = ζ^{−n}`
    pub inverse: Vec<ProbeRow>,
    /// last/first inverse norm
    pub growth: f64,
    pub strictly_increasing: bool,
}

/// Bounded forward multiplier `(ζⁿ)` against its unbounded inverse `(ζ^{−n})`.
pub fn slp_failure_demo(nu: &NuMeasure, ns: &[usize]) -> Result<SlpFailure> {
    if ns.is_empty() {
        return Err(invalid("empty window list"));
    }
    let forward = compression_norms(&MultiplierSpec::Rotation { angle: nu.angle }, nu, ns)?;
    let inverse = compression_norms(&MultiplierSpec::Rotation { angle: -nu.angle }, nu, ns)?;
    let growth = inverse.last().expect("nonempty").value / inverse[0].value;
    let strictly_increasing = inverse.windows(2).all(|w| w[1].value > w[0].value);
    Ok(SlpFailure { forward, inverse, growth, strictly_increasing })
}

/// Grid size of the argument-principle sum.
pub const WINDING_POINTS: usize = 1 << 16;

/// `wind(φ − z)` over the unit circle.
pub fn winding_number(phi: &SymbolSpec, z: C64) -> Result<i64> {
    let vals: Vec<C64> =
        (0..WINDING_POINTS).map(|m| phi.eval(C64::from_polar(1.0, TAU * m as f64 / WINDING_POINTS as f64)) - z).collect();
    let dist = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if dist < 1e-8 {
        return Err(Error::OnCurve(dist));
    }
    let total: f64 = (0..WINDING_POINTS).map(|m| (vals[(m + 1) % WINDING_POINTS] / vals[m]).arg()).sum::<f64>() / TAU;
    let w = total.round();
    if (total - w).abs() >= 0.1 {
        return Err(Error::Resolution(format!("argument sum {total:.4} is not near an integer")));
    }
    Ok(w as i64)
}

/// `max_t min_{|n|≤n_max} |φ(e^{it}) − φ(ζⁿ)|` over `points` nodes of the circle.
pub fn visible_density(phi: &SymbolSpec, angle: f64, n_max: i64, points: usize) -> f64 {
    let turn = (angle / TAU).rem_euclid(1.0);
    let orbit: Vec<C64> = (-n_max..=n_max)
        .map(|n| phi.eval(C64::from_polar(1.0, TAU * (turn * n as f64).rem_euclid(1.0))))
        .collect();
    (0..points)
        .into_par_iter()
        .map(|m| {
            let p = phi.eval(C64::from_polar(1.0, TAU * m as f64 / points as f64));
            orbit.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn symbol_examples() {
        let ang = golden_angle();
        let one = symbol_multiplier(&SymbolSpec::from_real(&[1.0]).unwrap(), ang);
        assert_eq!(one.value(17), c(1.0, 0.0));
        let id = symbol_multiplier(&SymbolSpec::from_real(&[0.0, 1.0]).unwrap(), ang);
        assert!((id.value(5) - C64::from_polar(1.0, 5.0 * ang)).norm() < 1e-12);
        let q = symbol_multiplier(&SymbolSpec::from_real(&[-0.5, 0.0, 1.0]).unwrap(), ang);
        assert!((-200..=200).all(|n| q.value(n).norm() <= 1.5 + 1e-12));
    }

    #[test]
    fn constant_symbol_has_zero_residual() {
        let cs: Vec<f64> = (0..300).map(|k| ((k + 1) as f64).powi(-2)).collect();
        let r = eigen_residual(&SymbolSpec::new(vec![c(0.3, -2.0)]).unwrap(), &cs, c(0.7, 0.1), 200).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(matches!(
            eigen_residual(&SymbolSpec::from_real(&[0.0, 1.0]).unwrap(), &cs, c(1.0, 0.0), 200),
            Err(Error::OutsideSpace(_))
        ));
    }

    #[test]
    fn residual_obeys_tail_bound() {
        let cs: Vec<f64> = (0..300).map(|k| ((k + 1) as f64).powi(-2)).collect();
        for (phi, z) in [(vec![0.0, 1.0], c(0.5, 0.0)), (vec![0.0, 0.0, 1.0], c(0.3, 0.4))] {
            let r = eigen_residual(&SymbolSpec::from_real(&phi).unwrap(), &cs, z, 200).unwrap();
            // rounding in f_{k+m} − φ(z) f_k sits near 1e-16
            assert!(r.residual <= r.tail_bound + 1e-14 && r.residual <= 1e-10, "{r:?}");
            assert!(r.truncation_ok);
        }
    }

    #[test]
    fn winding_examples() {
        let id = SymbolSpec::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(winding_number(&id, c(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number(&id, c(2.0, 0.0)).unwrap(), 0);
        let sq = SymbolSpec::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(winding_number(&sq, c(0.1, 0.0)).unwrap(), 2);
        let q = SymbolSpec::from_real(&[-0.5, 0.0, 1.0]).unwrap();
        assert_eq!(winding_number(&q, c(-0.5, 0.0)).unwrap(), 2);
        assert!(matches!(winding_number(&id, c(1.0, 0.0)), Err(Error::OnCurve(_))));
    }

    #[test]
    fn measure_checks() {
        assert!(NuMeasure::new(TAU / 7.0, vec![1.0; 8]).is_err());
        let nu = NuMeasure::golden(1 << 14).unwrap();
        assert!(nu.ratio_sup <= 4.0 + 1e-12 && nu.radius_proxy < 1.01);
        let g = nu.gram(3);
        assert!((g[(0, 0)].re - nu.c.iter().sum::<f64>()).abs() < 1e-12);
        assert!((g[(1, 0)] - g[(0, 1)].conj()).norm() < 1e-15);
        let direct: C64 = nu.c.iter().enumerate().map(|(k, ck)| nu.zeta_pow(3 * k as i64) * ck).sum();
        assert!((nu.moments(3)[3] - direct).norm() < 1e-12);
    }

    #[test]
    fn unimodular_constant_has_unit_norm() {
        let nu = NuMeasure::golden(4096).unwrap();
        let rows = compression_norms(&MultiplierSpec::Constant { re: 0.6, im: 0.8 }, &nu, &[4, 16]).unwrap();
        assert!(rows.iter().all(|r| (r.value - 1.0).abs() < 1e-8), "{rows:?}");
    }

    #[test]
    fn far_resolvent_is_bounded_below() {
        let nu = NuMeasure::golden(4096).unwrap();
        let id = SymbolSpec::from_real(&[0.0, 1.0]).unwrap();
        // ‖S*‖ = sup (c_k/c_{k+1})^{1/2} = 2, so |z| = 3 is diagonally dominant
        let rows = resolvent_probe(&id, &nu, c(3.0, 0.0), &[4, 16]).unwrap();
        assert!(rows.iter().all(|r| r.value >= 1.0 - 1e-8), "{rows:?}");
    }

    #[test]
    fn density_of_visible_spectrum() {
        let id = SymbolSpec::from_real(&[0.0, 1.0]).unwrap();
        assert!(visible_density(&id, golden_angle(), 2000, 512) < 1e-2);
    }
}
