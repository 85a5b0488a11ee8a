//! Weights with finitely many power-like singularities: polygon symmetry of
//! the singular set, the composite weight `W`, the modulus-restricted
//! capacitary test, the cut-off decomposition `λ = λ⁽¹⁾ + λ⁽²⁾` and its
//! adjustment for inversion.

use crate::error::{invalid, Error, Result};
use crate::multipliers::{
    dyadic_intervals, interval_scan, mu_weights_reach, riesz_kernel, riesz_mu, FarField, IntervalScan,
    MultiplierSpec, NuWeight,
};
use crate::seqcore::{convolve, node, WeightGrid, WindowSeq, C64};
use crate::weights::{gauss_legendre_panel, ser_ratios, CoeffSeq};
use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

type Turn = Ratio<i64>;

fn reduce_turn(r: Turn) -> Turn {
    r - r.floor()
}

/// Singular points `e^{iθ_j}` with `θ_j/2π` exact rationals, and their orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularitySet {
    #[serde(serialize_with = "ser_ratios")]
    angles: Vec<Turn>,
    orders: Vec<f64>,
}

impl SingularitySet {
    /// Points `θ_j/2π = p_j/q_j`, one order per point.
    pub fn new(turns: &[(i64, i64)], orders: &[f64]) -> Result<Self> {
        if turns.is_empty() {
            return Err(invalid("empty singularity set"));
        }
        if orders.len() != turns.len() {
            return Err(invalid(format!("{} orders for {} points", orders.len(), turns.len())));
        }
        if let Some(a) = orders.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(invalid(format!("order {a} outside (0, 1)")));
        }
        let mut angles = Vec::with_capacity(turns.len());
        for &(p, q) in turns {
            if q == 0 {
                return Err(invalid("zero denominator"));
            }
            angles.push(reduce_turn(Ratio::new(p, q)));
        }
        let mut sorted = angles.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("angles must be distinct mod 2π"));
        }
        Ok(Self { angles, orders: orders.to_vec() })
    }

    /// All points with the same order `α`.
    pub fn same_order(turns: &[(i64, i64)], alpha: f64) -> Result<Self> {
        Self::new(turns, &vec![alpha; turns.len()])
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Angles as fractions of a full turn, in `[0, 1)`.
    pub fn turns(&self) -> &[Turn] {
        &self.angles
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    /// Common order, if all points share it.
    pub fn common_order(&self) -> Option<f64> {
        let a = self.orders[0];
        self.orders.iter().all(|b| *b == a).then_some(a)
    }

    /// Angles in radians.
    pub fn radians(&self) -> Vec<f64> {
        self.angles.iter().map(|r| TAU * *r.numer() as f64 / *r.denom() as f64).collect()
    }

    /// The set rotated by `shift` turns.
    pub fn rotated(&self, shift: Turn) -> Self {
        Self { angles: self.angles.iter().map(|a| reduce_turn(a + shift)).collect(), orders: self.orders.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolygonDecomposition {
    pub d: usize,
    /// divisors of `d`, descending
    pub divisors: Vec<usize>,
    pub d_s: usize,
    pub n_s: usize,
    /// point indices of each regular `d_s`-gon, each listed along the rotation
    pub orbits: Vec<Vec<usize>>,
    /// false for the floating-point detector
    pub exact: bool,
}

fn divisors_desc(d: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=d).filter(|k| d % k == 0).collect();
    v.reverse();
    v
}

fn orbits_of(d_s: usize, n: usize, step: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut orb = Vec::with_capacity(d_s);
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            orb.push(i);
            i = step(i);
        }
        out.push(orb);
    }
    out
}

/// Largest divisor `d′ > 1` of `d` such that rotation by `1/d′` turn maps the
/// set onto itself (`1` if none), with the orbits of that rotation.
pub fn polygon_structure(set: &SingularitySet) -> PolygonDecomposition {
    let d = set.len();
    let divisors = divisors_desc(d);
    let index: BTreeMap<Turn, usize> = set.angles.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let invariant = |k: usize| {
        let s = Ratio::new(1, k as i64);
        set.angles.iter().all(|a| index.contains_key(&reduce_turn(a + s)))
    };
    let d_s = divisors.iter().copied().find(|&k| k > 1 && invariant(k)).unwrap_or(1);
    let shift = Ratio::new(1, d_s as i64);
    let orbits = orbits_of(d_s, d, |i| index[&reduce_turn(set.angles[i] + shift)]);
    PolygonDecomposition { d, n_s: d / d_s, divisors, d_s, orbits, exact: true }
}

/// Heuristic detector for angles given as floating turns, matching points up
/// to `tol` turns on the circle.
pub fn polygon_structure_approx(turns: &[f64], tol: f64) -> Result<PolygonDecomposition> {
    if turns.is_empty() {
        return Err(invalid("empty singularity set"));
    }
    let t: Vec<f64> = turns.iter().map(|x| x.rem_euclid(1.0)).collect();
    let circ = |a: f64, b: f64| {
        let x = (a - b).rem_euclid(1.0);
        x.min(1.0 - x)
    };
    for i in 0..t.len() {
        for j in 0..i {
            if circ(t[i], t[j]) <= tol {
                return Err(invalid("angles must be distinct beyond the tolerance"));
            }
        }
    }
    let find = |x: f64| (0..t.len()).find(|&j| circ(t[j], x) <= tol);
    let d = t.len();
    let divisors = divisors_desc(d);
    let d_s = divisors
        .iter()
        .copied()
        .find(|&k| k > 1 && t.iter().all(|a| find(a + 1.0 / k as f64).is_some()))
        .unwrap_or(1);
    let orbits = orbits_of(d_s, d, |i| find(t[i] + 1.0 / d_s as f64).expect("invariant set"));
    Ok(PolygonDecomposition { d, n_s: d / d_s, divisors, d_s, orbits, exact: false })
}

/// `|e^{ia} − e^{ib}| = 2|sin((a−b)/2)|`, accurate near coincidence.
fn chord(a: f64, b: f64) -> f64 {
    2.0 * ((a - b) / 2.0).sin().abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositeWeight {
    #[serde(skip)]
    pub grid: WeightGrid,
    pub d_s: usize,
    /// extremes of `W(t) / |1 − e^{i d_s t}|^α` over the grid
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// `A = max(ratio_max, 1/ratio_min)`
    pub bracket: f64,
    /// `min W` over the two nodes adjacent to `t = 0`
    pub min_near_zero: f64,
}

/// `W(t) = Σ_j Π_m |e^{it} − e^{i(θ_m−θ_j)}|^{α_m}` on the midpoint grid of
/// size `M`, compared with `|1 − e^{i d_s t}|^α`, `α = max α_m`.
pub fn composite_weight(set: &SingularitySet, size: usize) -> Result<CompositeWeight> {
    if size < 4 || !size.is_power_of_two() {
        return Err(invalid(format!("grid size {size} must be a power of two >= 4")));
    }
    let poly = polygon_structure(set);
    let th = set.radians();
    let orders = set.orders();
    let alpha = orders.iter().copied().fold(0.0, f64::max);
    let ds = poly.d_s as f64;
    let common = set.common_order();
    let block = 4096.min(size);
    let rows: Vec<(Vec<f64>, f64, f64)> = (0..size / block)
        .into_par_iter()
        .map(|b| {
            let mut w = Vec::with_capacity(block);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for m in b * block..(b + 1) * block {
                let t = node(m, size);
                let v: f64 = th
                    .iter()
                    .map(|tj| match common {
                        Some(a) => th.iter().map(|tm| chord(t, tm - tj)).product::<f64>().powf(a),
                        None => th.iter().zip(orders).map(|(tm, a)| chord(t, tm - tj).powf(*a)).product(),
                    })
                    .sum();
                let r = v / chord(ds * t, 0.0).powf(alpha);
                lo = lo.min(r);
                hi = hi.max(r);
                w.push(v);
            }
            (w, lo, hi)
        })
        .collect();
    let ratio_min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let ratio_max = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let samples: Vec<f64> = rows.into_iter().flat_map(|r| r.0).collect();
    let min_near_zero = samples[size / 2 - 1].min(samples[size / 2]);
    Ok(CompositeWeight {
        grid: WeightGrid::new(samples)?,
        d_s: poly.d_s,
        ratio_min,
        ratio_max,
        bracket: ratio_max.max(1.0 / ratio_min),
        min_near_zero,
    })
}

/// Scan ratios below this multiple of `‖λ‖²_∞` are rounding or cut-off
/// leakage and count as zero.
const NEGLIGIBLE_RATIO: f64 = 1e-16;

/// A scan of negligible ratios is replaced by the all-zero scan.
fn denoise(scan: IntervalScan, scale: f64) -> IntervalScan {
    if scan.ratios.iter().all(|r| *r <= NEGLIGIBLE_RATIO * scale * scale) {
        crate::multipliers::trend(&scan.intervals, &vec![0.0; scan.intervals.len()])
    } else {
        scan
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem51Report {
    pub d_s: usize,
    pub alpha: f64,
    /// `max_k μ_k²` restricted to `d_s | j − k`
    pub restricted_max: f64,
    /// `max_k μ_k²` over all differences
    pub unrestricted_max: f64,
    /// `Σ_J μ² / Cap_α(J)` over `J = [0, 2^k]`
    pub scan: IntervalScan,
    pub passes: bool,
}

/// Capacitary test with `μ_k² = Σ_{d_s | j−k} |λ_j − λ_k|² (|j−k|+1)^{−(1+α)}`
/// against `Cap_α` over dyadic intervals.
pub fn theorem51_check(
    lambda: &MultiplierSpec,
    set: &SingularitySet,
    k_max: u32,
    size: usize,
    reach: usize,
) -> Result<Theorem51Report> {
    let alpha = set
        .common_order()
        .ok_or_else(|| Error::Precondition("the restricted test needs a common order".into()))?;
    let poly = polygon_structure(set);
    let hi = 1i64 << k_max;
    let c = CoeffSeq::riesz(alpha)?;
    let restricted = mu_weights_reach(lambda, &c, 0, hi, Some(poly.d_s), reach)?.nu.scaled(2.0);
    let full = riesz_mu(lambda, alpha, 0, hi, reach)?.nu;
    let g = riesz_kernel(alpha, size)?;
    let intervals = dyadic_intervals(0, k_max);
    let scan = denoise(interval_scan(&restricted, &g, &intervals)?, lambda.sup_norm(0, hi));
    Ok(Theorem51Report {
        d_s: poly.d_s,
        alpha,
        restricted_max: restricted.max(),
        unrestricted_max: full.max(),
        passes: scan.bounded,
        scan,
    })
}

/// Default number of cut-off Fourier coefficients on each side.
pub const CUTOFF_RANGE: usize = 16384;

/// Raised-cosine cut-off: `η = 1` on `|t| ≤ a`, `η = 0` on `|t| ≥ 2a`,
/// `η = (1 + cos(π(|t| − a)/a))/2` between. `a ≥ π` means `η ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub a: f64,
    pub range: usize,
}

impl CutoffSpec {
    pub fn new(a: f64) -> Result<Self> {
        Self::with_range(a, CUTOFF_RANGE)
    }

    pub fn with_range(a: f64, range: usize) -> Result<Self> {
        if !(a > 0.0 && a < PI / 4.0 || a >= PI) {
            return Err(Error::Cutoff(format!("half-width {a} outside (0, π/4) and below π")));
        }
        if range < 8 {
            return Err(Error::Cutoff("coefficient range below 8".into()));
        }
        Ok(Self { a, range })
    }

    pub fn is_identity(&self) -> bool {
        self.a >= PI
    }

    pub fn eta(&self, t: f64) -> f64 {
        if self.is_identity() {
            return 1.0;
        }
        let t = (t + PI).rem_euclid(TAU) - PI;
        let x = t.abs();
        if x <= self.a {
            1.0
        } else if x >= 2.0 * self.a {
            0.0
        } else {
            0.5 * (1.0 + (PI * (x - self.a) / self.a).cos())
        }
    }

    /// `η̂(n) = s ω² / (2π n (ω² − n²))`, `s = sin 2na + sin na`, `ω = π/a`.
    pub fn hat(&self, n: i64) -> f64 {
        if self.is_identity() {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let a = self.a;
        if n == 0 {
            return 1.5 * a / PI;
        }
        let x = n.unsigned_abs() as f64;
        let w = PI / a;
        if (x - w).abs() < 1e-9 {
            return -a / (4.0 * PI);
        }
        let s = (2.0 * x * a).sin() + (x * a).sin();
        s * w * w / (2.0 * PI * x * (w * w - x * x))
    }

    /// `η̂(n)` by Gauss–Legendre quadrature, for cross-checking [`CutoffSpec::hat`].
    pub fn hat_quadrature(&self, n: i64) -> f64 {
        if self.is_identity() {
            return self.hat(n);
        }
        let f = |t: f64| self.eta(t) * (n as f64 * t).cos();
        let panels = (8.0 * (1.0 + n.unsigned_abs() as f64 * self.a)).ceil() as usize;
        let mut total = 0.0;
        for (lo, hi) in [(0.0, self.a), (self.a, 2.0 * self.a)] {
            let h = (hi - lo) / panels as f64;
            for p in 0..panels {
                total += gauss_legendre_panel(&f, lo + p as f64 * h, lo + (p + 1) as f64 * h);
            }
        }
        total / PI
    }

    /// `η̂` on `[−range, range]`.
    pub fn table(&self) -> WindowSeq {
        let r = if self.is_identity() { 0 } else { self.range as i64 };
        WindowSeq::from_fn(-r, r, |n| C64::new(self.hat(n), 0.0)).expect("window contains 0")
    }

    /// `Σ_{|n| ≤ range} |η̂(n)|`.
    pub fn abs_sum(&self) -> f64 {
        self.table().values().iter().map(|v| v.norm()).sum()
    }

    /// `max n²|η̂(n)|` over `[range/2, range]` and over `[range/8, range/4]`;
    /// summability is certified when the first does not exceed the second.
    pub fn decay_profile(&self) -> (f64, f64) {
        let r = self.range as i64;
        let peak = |lo: i64, hi: i64| (lo..=hi).map(|n| (n * n) as f64 * self.hat(n).abs()).fold(0.0, f64::max);
        (peak(r / 2, r), peak(r / 8, r / 4))
    }

    fn certify(&self) -> Result<()> {
        if self.is_identity() {
            return Ok(());
        }
        let (late, early) = self.decay_profile();
        if late > early * (1.0 + 1e-9) {
            return Err(Error::Cutoff(format!("n²|η̂(n)| grows in the tail: {late:.3e} > {early:.3e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffDecomposition {
    /// `λ⁽¹⁾ = η̂ ⋆ λ` on the window
    pub lambda1: WindowSeq,
    /// `λ⁽²⁾ = λ − λ⁽¹⁾` on the window
    pub lambda2: WindowSeq,
    pub abs_sum: f64,
    /// `‖λ⁽¹⁾‖_∞ ≤ Σ|η̂| ‖λ‖_∞` on the window
    pub bound_holds: bool,
}

/// Split `λ` by the cut-off on `[lo, hi]` (widened to contain 0).
pub fn cutoff_decompose(lambda: &MultiplierSpec, cut: &CutoffSpec, lo: i64, hi: i64) -> Result<CutoffDecomposition> {
    cut.certify()?;
    let (lo, hi) = (lo.min(0), hi.max(0));
    let eta = cut.table();
    let r = eta.hi();
    let src = lambda.realize(lo - r, hi + r);
    let conv = convolve(&eta, &src);
    let lambda1 = conv.rewindow(lo, hi)?;
    let lambda2 = WindowSeq::from_fn(lo, hi, |j| src.get(j) - lambda1.get(j))?;
    let abs_sum = eta.values().iter().map(|v| v.norm()).sum::<f64>();
    let bound_holds = lambda1.sup_norm() <= abs_sum * src.sup_norm() * (1.0 + 1e-12) + 1e-15;
    Ok(CutoffDecomposition { lambda1, lambda2, abs_sum, bound_holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem53Params {
    pub alpha: f64,
    pub beta: f64,
    /// position of the second singularity, radians
    pub theta: f64,
    /// intervals `[0, 2^k]`, `k ≤ k_max`
    pub k_max: u32,
    /// grid size for the Riesz Green kernels
    pub size: usize,
    /// summation reach for `μ`
    pub reach: usize,
}

impl Theorem53Params {
    pub fn new(alpha: f64, beta: f64, theta: f64) -> Self {
        Self { alpha, beta, theta, k_max: 10, size: 1 << 14, reach: 1 << 15 }
    }

    pub fn gamma(&self) -> f64 {
        self.alpha.max(self.beta - self.alpha)
    }

    /// `θ ∉ πℤ`.
    pub fn generic(&self) -> bool {
        let x = (self.theta / PI).rem_euclid(1.0);
        x.min(1.0 - x) > 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem53Report {
    pub params: Theorem53Params,
    pub gamma: f64,
    pub generic: bool,
    /// `Σ_J μ^β(λ⁽¹⁾)² / Cap_β(J)`
    pub cond4: IntervalScan,
    /// `Σ_J μ^α(e^{ijθ}λ⁽²⁾_j)² / Cap_β(J)`
    pub cond5: IntervalScan,
    /// `Σ_J |λ⁽²⁾|² / Cap_γ(J)`, generic branch only
    pub cond6: Option<IntervalScan>,
    /// largest ratio of each scan
    pub constants: [f64; 3],
    pub sup_lambda1: f64,
    pub sup_lambda2: f64,
    pub passes: bool,
}

fn scan_max(s: &IntervalScan) -> f64 {
    s.ratios.iter().copied().fold(0.0, f64::max)
}

/// The capacitary conditions for a given pair `(λ⁽¹⁾, λ⁽²⁾)`.
pub fn theorem53_conditions(
    lambda1: &MultiplierSpec,
    lambda2: &MultiplierSpec,
    p: &Theorem53Params,
) -> Result<Theorem53Report> {
    let (alpha, beta) = (p.alpha, p.beta);
    if !(alpha > 0.0 && alpha < beta && beta < 1.0) {
        return Err(Error::Precondition(format!("need 0 < α < β < 1, got α = {alpha}, β = {beta}")));
    }
    let hi = 1i64 << p.k_max;
    let gamma = p.gamma();
    let generic = p.generic();
    let intervals = dyadic_intervals(0, p.k_max);
    let g_beta = riesz_kernel(beta, p.size)?;
    let mu1 = riesz_mu(lambda1, beta, 0, hi, p.reach)?;
    let scale = lambda1.sup_norm(0, hi).max(lambda2.sup_norm(0, hi));
    let cond4 = denoise(interval_scan(&mu1.nu, &g_beta, &intervals)?, scale);
    let rot = MultiplierSpec::Modulated { angle: p.theta, inner: Box::new(lambda2.clone()) };
    let mu2 = riesz_mu(&rot, alpha, 0, hi, p.reach)?;
    let cond5 = denoise(interval_scan(&mu2.nu, &g_beta, &intervals)?, scale);
    let cond6 = if generic {
        let g_gamma = riesz_kernel(gamma, p.size)?;
        let nu = NuWeight::new(0, (0..=hi).map(|j| lambda2.value(j).norm_sqr()).collect())?;
        Some(denoise(interval_scan(&nu, &g_gamma, &intervals)?, scale))
    } else {
        None
    };
    let passes = cond4.bounded && cond5.bounded && cond6.as_ref().is_none_or(|s| s.bounded);
    Ok(Theorem53Report {
        params: *p,
        gamma,
        generic,
        constants: [scan_max(&cond4), scan_max(&cond5), cond6.as_ref().map_or(0.0, scan_max)],
        cond4,
        cond5,
        cond6,
        sup_lambda1: lambda1.sup_norm(0, hi),
        sup_lambda2: lambda2.sup_norm(0, hi),
        passes,
    })
}

/// The cut-off pair as multiplier sequences: the computed values on
/// `[lo, hi]` and, outside it, the far field of `λ` split between the parts.
/// The constant part of the far field has its symbol at `t = 0`, where
/// `η = 1`, and goes to `λ⁽¹⁾`. A power part `e^{−ijθ}(|j|+1)^{−δ}` is
/// singular at `t = θ` and goes to `λ⁽¹⁾` when `η(θ) > 0`, else to `λ⁽²⁾`.
/// Without a far field both parts are zero outside.
pub fn decomposition_specs(
    lambda: &MultiplierSpec,
    cut: &CutoffSpec,
    lo: i64,
    hi: i64,
) -> Result<(MultiplierSpec, MultiplierSpec)> {
    let dec = cutoff_decompose(lambda, cut, lo, hi)?;
    let zero = C64::new(0.0, 0.0);
    let constant = |v: C64| MultiplierSpec::Constant { re: v.re, im: v.im };
    let power = |f: &FarField| MultiplierSpec::Scaled {
        factor: f.amp,
        inner: Box::new(MultiplierSpec::PowerRotation { delta: f.delta, theta: f.theta }),
    };
    let (far1, far2) = match lambda.far_field() {
        Some(f) if f.amp != zero && cut.eta(f.theta) > 0.0 => {
            (MultiplierSpec::Sum { terms: vec![constant(f.offset), power(&f)] }, constant(zero))
        }
        Some(f) if f.amp != zero => (constant(f.offset), power(&f)),
        Some(f) => (constant(f.offset), constant(zero)),
        None => (constant(zero), constant(zero)),
    };
    Ok((
        MultiplierSpec::Patched { seq: dec.lambda1, far: Box::new(far1) },
        MultiplierSpec::Patched { seq: dec.lambda2, far: Box::new(far2) },
    ))
}

/// Cut-off decomposition of `λ` followed by [`theorem53_conditions`].
pub fn theorem53_check(lambda: &MultiplierSpec, cut: &CutoffSpec, p: &Theorem53Params) -> Result<Theorem53Report> {
    let r = p.reach as i64;
    let (l1, l2) = decomposition_specs(lambda, cut, -r, (1i64 << p.k_max) + r)?;
    theorem53_conditions(&l1, &l2, p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedPair {
    /// `Z₂ = {j: |λ⁽¹⁾_j| < δ/2}` on the window
    pub z2: Vec<i64>,
    /// `λ⁽³⁾ = λ⁽¹⁾ + λ⁽²⁾χ_{Z₂}`
    pub lambda3: WindowSeq,
    /// `λ⁽⁴⁾ = λ⁽²⁾ − λ⁽²⁾χ_{Z₂}`
    pub lambda4: WindowSeq,
    /// `1/λ⁽³⁾`
    pub inverse1: WindowSeq,
    /// `−λ⁽⁴⁾/(λλ⁽³⁾)`
    pub inverse2: WindowSeq,
    pub inf_lambda3: f64,
    /// `max_j |(inverse1_j + inverse2_j) λ_j − 1|`
    pub reconstruction_error: f64,
}

/// Rearrange `λ = λ⁽¹⁾ + λ⁽²⁾` with `inf |λ| ≥ δ` so that the first part is
/// bounded below by `δ/2`, and split `1/λ` accordingly.
pub fn theorem59_adjust(lambda1: &WindowSeq, lambda2: &WindowSeq, delta: f64) -> Result<AdjustedPair> {
    if lambda1.lo() != lambda2.lo() || lambda1.hi() != lambda2.hi() {
        return Err(invalid("λ⁽¹⁾ and λ⁽²⁾ must share a window"));
    }
    let (lo, hi) = (lambda1.lo(), lambda1.hi());
    let lam = |j: i64| lambda1.get(j) + lambda2.get(j);
    let inf = (lo..=hi).map(|j| lam(j).norm()).fold(f64::INFINITY, f64::min);
    if !(delta > 0.0) || inf == 0.0 {
        return Err(Error::NotInvertible(format!("δ = {delta}, inf |λ| = {inf:.3e}")));
    }
    if inf < delta * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("inf |λ| = {inf:.6e} is below δ = {delta}")));
    }
    let in_z2 = |j: i64| lambda1.get(j).norm() < delta / 2.0;
    let z2: Vec<i64> = (lo..=hi).filter(|&j| in_z2(j)).collect();
    let lambda3 = WindowSeq::from_fn(lo, hi, |j| if in_z2(j) { lam(j) } else { lambda1.get(j) })?;
    let lambda4 = WindowSeq::from_fn(lo, hi, |j| if in_z2(j) { C64::new(0.0, 0.0) } else { lambda2.get(j) })?;
    let inverse1 = lambda3.map(|_, v| v.inv())?;
    let inverse2 = WindowSeq::from_fn(lo, hi, |j| -lambda4.get(j) / (lam(j) * lambda3.get(j)))?;
    let reconstruction_error = (lo..=hi)
        .map(|j| ((inverse1.get(j) + inverse2.get(j)) * lam(j) - 1.0).norm())
        .fold(0.0, f64::max);
    Ok(AdjustedPair {
        z2,
        inf_lambda3: lambda3.values().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min),
        lambda3,
        lambda4,
        inverse1,
        inverse2,
        reconstruction_error,
    })
}

/// Least common denominator of the angles (in turns).
pub fn common_denominator(set: &SingularitySet) -> i64 {
    set.angles.iter().fold(1i64, |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_squares() -> SingularitySet {
        let mut t = Vec::new();
        for i in 0..3 {
            for k in 0..4 {
                // k/4 + i/17
                t.push((17 * k + 4 * i, 68));
            }
        }
        SingularitySet::same_order(&t, 0.5).unwrap()
    }

    fn roots(d: i64) -> SingularitySet {
        SingularitySet::same_order(&(0..d).map(|j| (j, d)).collect::<Vec<_>>(), 0.5).unwrap()
    }

    #[test]
    fn polygon_examples() {
        let p = polygon_structure(&roots(12));
        assert_eq!((p.d_s, p.n_s, p.orbits.len()), (12, 1, 1));
        let p = polygon_structure(&three_squares());
        assert_eq!((p.d_s, p.n_s), (4, 3));
        assert!(p.orbits.iter().all(|o| o.len() == 4));
        let s = SingularitySet::same_order(&[(0, 1), (1, 3)], 0.5).unwrap();
        assert_eq!(polygon_structure(&s).d_s, 1);
        let s = SingularitySet::same_order(&[(0, 1), (1, 2)], 0.5).unwrap();
        assert_eq!(polygon_structure(&s).d_s, 2);
        assert_eq!(common_denominator(&three_squares()), 68);
    }

    #[test]
    fn orbits_are_rotated_polygons() {
        let s = three_squares();
        let p = polygon_structure(&s);
        for orb in &p.orbits {
            let base = s.turns()[orb[0]];
            for (k, &i) in orb.iter().enumerate() {
                assert_eq!(s.turns()[i], reduce_turn(base + Ratio::new(k as i64, 4)));
            }
        }
    }

    #[test]
    fn float_detector_agrees_on_examples() {
        let t: Vec<f64> = three_squares().turns().iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
        assert_eq!(polygon_structure_approx(&t, 1e-9).unwrap().d_s, 4);
        let t: Vec<f64> = (0..12).map(|j| j as f64 / 12.0 + 1e-12).collect();
        assert_eq!(polygon_structure_approx(&t, 1e-9).unwrap().d_s, 12);
    }

    #[test]
    fn rejects_repeated_angles() {
        assert!(SingularitySet::same_order(&[(1, 3), (4, 3)], 0.5).is_err());
        assert!(SingularitySet::same_order(&[(1, 3)], 1.5).is_err());
    }

    #[test]
    fn composite_weight_brackets() {
        let anti = SingularitySet::same_order(&[(0, 1), (1, 2)], 0.5).unwrap();
        let w = composite_weight(&anti, 1 << 14).unwrap();
        assert_eq!(w.d_s, 2);
        assert!(w.bracket < 10.0, "{w:?}");
        let generic = SingularitySet::same_order(&[(0, 1), (1, 5)], 0.5).unwrap();
        let w = composite_weight(&generic, 1 << 14).unwrap();
        assert_eq!(w.d_s, 1);
        assert!(w.bracket < 10.0 && w.min_near_zero < 0.05, "{w:?}");
    }

    #[test]
    fn cutoff_hat_matches_quadrature() {
        let cut = CutoffSpec::new(PI / 8.0).unwrap();
        for n in [0, 1, 3, 7, 8, 9, 40, 333] {
            assert!((cut.hat(n) - cut.hat_quadrature(n)).abs() < 1e-13, "n = {n}");
        }
        let sum: f64 = cut.table().values().iter().map(|v| v.re).sum();
        assert!((sum - 1.0).abs() < 1e-10);
        let (late, early) = cut.decay_profile();
        assert!(late <= early);
    }

    #[test]
    fn cutoff_rejects_bad_width() {
        assert!(CutoffSpec::new(1.0).is_err());
        assert!(CutoffSpec::new(PI).unwrap().is_identity());
    }

    #[test]
    fn identity_cutoff_and_delta() {
        let lam = MultiplierSpec::PowerRotation { delta: 0.3, theta: 1.0 };
        let d = cutoff_decompose(&lam, &CutoffSpec::new(4.0).unwrap(), -5, 5).unwrap();
        assert!(d.lambda2.sup_norm() == 0.0);
        let cut = CutoffSpec::with_range(0.5, 64).unwrap();
        let d = cutoff_decompose(&MultiplierSpec::Basis { n: 0 }, &cut, -10, 10).unwrap();
        for j in -10..=10 {
            assert!((d.lambda1.get(j).re - cut.hat(j)).abs() < 1e-15);
        }
        assert!(d.bound_holds);
    }

    #[test]
    fn constant_leaks_little() {
        let d = cutoff_decompose(&MultiplierSpec::constant(1.0), &CutoffSpec::new(PI / 8.0).unwrap(), -4, 4).unwrap();
        assert!(d.lambda2.sup_norm() < 1e-10, "{}", d.lambda2.sup_norm());
    }

    #[test]
    fn modulus_test_separates_root_rotation_from_generic() {
        let set = SingularitySet::same_order(&[(0, 1), (1, 4), (1, 2), (3, 4)], 0.5).unwrap();
        let root = MultiplierSpec::Rotation { angle: PI / 2.0 };
        let r = theorem51_check(&root, &set, 7, 1 << 14, 4096).unwrap();
        assert!(r.passes && r.restricted_max < 1e-20 && r.unrestricted_max > 0.1, "{r:?}");
        let gen = MultiplierSpec::Rotation { angle: 1.0 };
        let r = theorem51_check(&gen, &set, 7, 1 << 14, 4096).unwrap();
        assert!(!r.passes, "{r:?}");
        let r = theorem51_check(&MultiplierSpec::constant(2.0), &set, 7, 1 << 14, 4096).unwrap();
        assert!(r.passes);
    }

    #[test]
    fn adjust_examples() {
        let l1 = WindowSeq::from_real(-2, &[1.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let l2 = WindowSeq::from_real(-2, &[0.0, 0.8, 0.9, 0.0, 0.0]).unwrap();
        let a = theorem59_adjust(&l1, &l2, 0.8).unwrap();
        assert_eq!(a.z2, vec![-1, 0]);
        assert_eq!(a.lambda3.get(0).re, 0.9);
        assert!(a.inf_lambda3 >= 0.4 && a.reconstruction_error < 1e-14);
        let z = WindowSeq::zeros(-2, 2).unwrap();
        let a = theorem59_adjust(&l1.map(|_, _| C64::new(2.0, 0.0)).unwrap(), &z, 2.0).unwrap();
        assert!(a.z2.is_empty() && a.inverse1.get(1).re == 0.5);
        assert!(matches!(theorem59_adjust(&l1, &z, 0.0), Err(Error::NotInvertible(_))));
    }

    proptest! {
        #[test]
        fn polygon_is_rotation_invariant(p in -50i64..50, q in 1i64..50, pick in 0usize..3) {
            let s = [roots(12), three_squares(), SingularitySet::same_order(&[(0, 1), (1, 3), (1, 7)], 0.5).unwrap()];
            let base = polygon_structure(&s[pick]).d_s;
            prop_assert_eq!(polygon_structure(&s[pick].rotated(Ratio::new(p, q))).d_s, base);
        }

        #[test]
        fn polygon_is_relabeling_invariant(perm in Just((0..12usize).collect::<Vec<_>>()).prop_shuffle()) {
            let s = three_squares();
            let t: Vec<(i64, i64)> = perm.iter().map(|&i| (*s.turns()[i].numer(), *s.turns()[i].denom())).collect();
            prop_assert_eq!(polygon_structure(&SingularitySet::same_order(&t, 0.5).unwrap()).d_s, 4);
        }

        #[test]
        fn adjust_reconstructs(vals in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -1.0f64..1.0), 1..40)) {
            let l1 = WindowSeq::new(0, vals.iter().map(|v| C64::new(v.0, v.1)).collect()).unwrap();
            let l2 = WindowSeq::new(0, vals.iter().map(|v| C64::new(v.2, 0.0)).collect()).unwrap();
            let inf = (0..vals.len() as i64).map(|j| (l1.get(j) + l2.get(j)).norm()).fold(f64::INFINITY, f64::min);
            prop_assume!(inf > 1e-3);
            let a = theorem59_adjust(&l1, &l2, inf).unwrap();
            prop_assert!(a.reconstruction_error < 1e-14 * (1.0 / inf).max(1.0));
            prop_assert!(a.inf_lambda3 >= inf / 2.0 * (1.0 - 1e-15));
            for j in 0..vals.len() as i64 {
                prop_assert_eq!(a.lambda3.get(j) + a.lambda4.get(j), l1.get(j) + l2.get(j));
            }
        }

        #[test]
        fn decomposition_reconstructs(delta in 0.0f64..0.5, theta in 0.3f64..3.0) {
            let lam = MultiplierSpec::PowerRotation { delta, theta };
            let d = cutoff_decompose(&lam, &CutoffSpec::with_range(0.5, 256).unwrap(), -20, 20).unwrap();
            for j in -20..=20 {
                prop_assert!((d.lambda1.get(j) + d.lambda2.get(j) - lam.value(j)).norm() <= 1e-15);
            }
        }
    }
}
