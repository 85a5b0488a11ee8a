//! Multiplier membership for one LKS weight and for pairs of fractional
//! weights: μ-weights, embedding constants, capacitary and energy tests,
//! window compressions and the SLP bounds.
//!
//! `mu_weights` uses the Toeplitz convention `c_{j,k} = c_{|j−k|}/2`; the
//! fractional `μ^α` sums the full Riesz weights `(|j−m|+1)^{−(1+α)}`.

use crate::dirichlet::{seminorm, DirichletMatrix};
use crate::error::{invalid, Error, Result};
use crate::linalg::{compression_singular_values, factor, hermitian_eigenvalues};
use crate::potentials::{capacity_value, green_kernel, CapacityMethod, KernelRole, KernelSeq};
use crate::seqcore::{gram, CoeffTable, WeightGrid, WindowSeq, C64};
use crate::weights::{alternating_tail, smooth_tail, ClosedForm, CoeffSeq};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// A sequence `λ = (λ_j)_{j∈ℤ}`, realized on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum MultiplierSpec {
    Constant { re: f64, im: f64 },
    /// `e_n`
    Basis { n: i64 },
    /// `λ_j = ζ^j`, `ζ = e^{i·angle}`
    Rotation { angle: f64 },
    /// `λ_j = e^{−ijθ} (|j|+1)^{−δ}`
    PowerRotation { delta: f64, theta: f64 },
    /// `λ_n = φ(ζⁿ)` for the polynomial `φ(z) = Σ coeffs[m] z^m`
    Symbol { coeffs: Vec<C64>, angle: f64 },
    /// explicit values, zero outside the window
    Table { seq: WindowSeq },
    /// explicit values on the window of `seq`, `far` outside it
    Patched { seq: WindowSeq, far: Box<MultiplierSpec> },
    /// `λ_j = e^{ij·angle} inner_j`
    Modulated { angle: f64, inner: Box<MultiplierSpec> },
    /// `λ_j = factor · inner_j`
    Scaled { factor: C64, inner: Box<MultiplierSpec> },
    /// `λ_j = Σ terms_j`
    Sum { terms: Vec<MultiplierSpec> },
}

/// Model `λ_m ≈ offset + amp e^{−imθ}(|m|+1)^{−δ}` for large `|m|`, used past
/// the summation reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub offset: C64,
    pub amp: C64,
    pub delta: f64,
    pub theta: f64,
}

impl FarField {
    pub fn constant(offset: C64) -> Self {
        Self { offset, amp: C64::new(0.0, 0.0), delta: 0.0, theta: 0.0 }
    }

    fn has_power(&self) -> bool {
        self.amp != C64::new(0.0, 0.0)
    }

    fn add(self, o: Self) -> Option<Self> {
        let offset = self.offset + o.offset;
        match (self.has_power(), o.has_power()) {
            (false, false) => Some(Self::constant(offset)),
            (true, false) => Some(Self { offset, ..self }),
            (false, true) => Some(Self { offset, ..o }),
            (true, true) if self.delta == o.delta && self.theta == o.theta => {
                Some(Self { offset, amp: self.amp + o.amp, ..self })
            }
            _ => None,
        }
    }
}

impl MultiplierSpec {
    pub fn constant(a: f64) -> Self {
        Self::Constant { re: a, im: 0.0 }
    }

    pub fn value(&self, j: i64) -> C64 {
        match self {
            Self::Constant { re, im } => C64::new(*re, *im),
            Self::Basis { n } => C64::new(if j == *n { 1.0 } else { 0.0 }, 0.0),
            Self::Rotation { angle } => rotation(*angle, j),
            Self::PowerRotation { delta, theta } => {
                rotation(-theta, j) * ((j.unsigned_abs() + 1) as f64).powf(-delta)
            }
            Self::Symbol { coeffs, angle } => {
                let z = rotation(*angle, j);
                coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
            }
            Self::Table { seq } => seq.get(j),
            Self::Patched { seq, far } => {
                if j >= seq.lo() && j <= seq.hi() {
                    seq.get(j)
                } else {
                    far.value(j)
                }
            }
            Self::Modulated { angle, inner } => rotation(*angle, j) * inner.value(j),
            Self::Scaled { factor, inner } => factor * inner.value(j),
            Self::Sum { terms } => terms.iter().map(|t| t.value(j)).sum(),
        }
    }

    /// Far-field model, when `λ` settles to a constant plus a power profile.
    pub fn far_field(&self) -> Option<FarField> {
        let zero = C64::new(0.0, 0.0);
        match self {
            Self::Constant { re, im } => Some(FarField::constant(C64::new(*re, *im))),
            Self::Basis { .. } | Self::Table { .. } => Some(FarField::constant(zero)),
            Self::PowerRotation { delta, theta } if *delta > 0.0 => {
                Some(FarField { offset: zero, amp: C64::new(1.0, 0.0), delta: *delta, theta: *theta })
            }
            Self::Patched { far, .. } => far.far_field(),
            Self::Modulated { angle, inner } => inner
                .far_field()
                .filter(|f| f.offset == zero)
                .map(|f| FarField { theta: f.theta - angle, ..f }),
            Self::Scaled { factor, inner } => {
                inner.far_field().map(|f| FarField { offset: f.offset * factor, amp: f.amp * factor, ..f })
            }
            Self::Sum { terms } => {
                terms.iter().try_fold(FarField::constant(zero), |acc, t| acc.add(t.far_field()?))
            }
            _ => None,
        }
    }

    /// Values on `[lo, hi]`, the window widened to contain 0.
    pub fn realize(&self, lo: i64, hi: i64) -> WindowSeq {
        WindowSeq::from_fn(lo.min(0), hi.max(0), |j| self.value(j)).expect("finite multiplier values")
    }

    /// Whether `λ_j → 0` as `|j| → ∞`.
    pub fn decays(&self) -> bool {
        self.far_field().is_some_and(|f| f.offset == C64::new(0.0, 0.0))
    }

    pub fn sup_norm(&self, lo: i64, hi: i64) -> f64 {
        (lo..=hi).map(|j| self.value(j).norm()).fold(0.0, f64::max)
    }

    pub fn inf_abs(&self, lo: i64, hi: i64) -> f64 {
        (lo..=hi).map(|j| self.value(j).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// `e^{i·j·angle}`.
fn rotation(angle: f64, j: i64) -> C64 {
    let t = (angle * j as f64).rem_euclid(std::f64::consts::TAU);
    C64::from_polar(1.0, t)
}

/// Nonnegative weight on a window of `ℤ`, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuWeight {
    lo: i64,
    values: Vec<f64>,
}

impl NuWeight {
    pub fn new(lo: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("empty weight"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("ν must be finite and nonnegative"));
        }
        Ok(Self { lo, values })
    }

    pub fn zeros(lo: i64, hi: i64) -> Self {
        Self { lo, values: vec![0.0; (hi - lo + 1).max(1) as usize] }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, j: i64) -> f64 {
        let off = j - self.lo;
        if off < 0 || off >= self.values.len() as i64 {
            0.0
        } else {
            self.values[off as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.lo + i as i64, v))
    }

    pub fn support(&self) -> Vec<i64> {
        self.iter().filter(|p| p.1 > 0.0).map(|p| p.0).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        Self { lo, values: (lo..=hi).map(|j| self.get(j)).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { lo: self.lo, values: self.values.iter().map(|v| v * s).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuWeights {
    /// `μ_k²` on the window
    pub nu: NuWeight,
    /// summation reach `R`: differences `|j − k| ≤ R` are summed explicitly
    pub reach: usize,
    /// coefficients beyond the reach were added as `|λ_k|² Σ_{d>R} c_d`
    pub tail_corrected: bool,
    /// bound `2‖λ‖²_∞ Σ_{d>R} c_d` on the omitted part when not corrected
    pub tail_bound: f64,
}

/// `μ_k² = Σ_{j≠k} (c_{|j−k|}/2) |λ_j − λ_k|²` on `[lo, hi]`, optionally only
/// over `modulus | j − k`.
pub fn mu_weights(
    lambda: &MultiplierSpec,
    c: &CoeffSeq,
    lo: i64,
    hi: i64,
    modulus: Option<usize>,
) -> Result<MuWeights> {
    mu_weights_reach(lambda, c, lo, hi, modulus, c.len())
}

/// As [`mu_weights`] with an explicit summation reach.
pub fn mu_weights_reach(
    lambda: &MultiplierSpec,
    c: &CoeffSeq,
    lo: i64,
    hi: i64,
    modulus: Option<usize>,
    reach: usize,
) -> Result<MuWeights> {
    if lo > hi {
        return Err(invalid("empty window"));
    }
    let m = modulus.unwrap_or(1).max(1);
    let reach = match c.support_end() {
        Some(k) => reach.min(k),
        None => reach,
    };
    let r = reach as i64;
    let pad = lambda.realize(lo - r, hi + r);
    let coeffs: Vec<f64> = (0..=reach).map(|d| c.coeff(d) / 2.0).collect();
    let tail = c.tail_sum(reach);
    let far = if m == 1 { lambda.far_field() } else { None };
    let decays = far.is_some();
    let offset = far.map_or(C64::new(0.0, 0.0), |f| f.offset);
    let profile = match (far, c.closed_form()) {
        (Some(f), Some(form)) if f.has_power() && reach as i64 > lo.abs().max(hi.abs()) => Some((f, form)),
        _ => None,
    };
    let values: Vec<f64> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let lk = pad.get(k);
            let mut s = 0.0;
            let mut d = m;
            while d <= reach {
                let di = d as i64;
                s += coeffs[d] * ((pad.get(k + di) - lk).norm_sqr() + (pad.get(k - di) - lk).norm_sqr());
                d += m;
            }
            if decays {
                s += (lk - offset).norm_sqr() * tail;
            }
            if let Some((f, form)) = profile {
                s += power_far_field(lk - offset, k, &f, form, reach);
            }
            s
        })
        .collect();
    let sup = pad.sup_norm();
    Ok(MuWeights {
        nu: NuWeight::new(lo, values)?,
        reach,
        tail_corrected: decays && tail > 0.0,
        tail_bound: if decays { 0.0 } else { 2.0 * sup * sup * tail },
    })
}

/// `Σ_{d>R} (c_d/2)(|p_{k±d}|² − 2 Re(ȳ p_{k±d}))` for the power part
/// `p_m = amp e^{−imθ}(|m|+1)^{−δ}` of the far field, `y = λ_k − offset`.
/// The cross term is kept only when `θ ∈ 2πℤ`; otherwise it oscillates and is
/// bounded by `|y| |amp| c_R R^{−δ} / |sin(θ/2)|`.
fn power_far_field(y: C64, k: i64, f: &FarField, form: &ClosedForm, reach: usize) -> f64 {
    let x = k as f64;
    let prof = |m: f64| (m.abs() + 1.0).powf(-f.delta);
    let sq = |d: f64| 0.5 * form.eval(d) * (prof(x + d).powi(2) + prof(x - d).powi(2));
    let mut s = f.amp.norm_sqr() * smooth_tail(&sq, reach);
    let turns = (f.theta / std::f64::consts::TAU).rem_euclid(1.0);
    if turns.min(1.0 - turns) < 1e-12 {
        let cross = |d: f64| 0.5 * form.eval(d) * (prof(x + d) + prof(x - d));
        s -= 2.0 * (y.conj() * f.amp).re * smooth_tail(&cross, reach);
    }
    s
}

/// The fractional `μ^α(λ)_k² = Σ_m |λ_k − λ_m|² (|k−m|+1)^{−(1+α)}`.
pub fn riesz_mu(lambda: &MultiplierSpec, alpha: f64, lo: i64, hi: i64, reach: usize) -> Result<MuWeights> {
    let c = CoeffSeq::riesz(alpha)?;
    let mut mw = mu_weights_reach(lambda, &c, lo, hi, None, reach)?;
    mw.nu = mw.nu.scaled(2.0);
    mw.tail_bound *= 2.0;
    Ok(mw)
}

/// Matrix of `‖x‖²_D` on `[−N, N]`: the Gram matrix of the weight.
pub fn dirichlet_form(c: &CoeffSeq, n: usize) -> Result<DMatrix<f64>> {
    Ok(gram(&c.weight_table(2 * n), n)?.real())
}

/// Route for the embedding constant `C_N²`.
#[derive(Debug, Clone, Copy)]
pub enum EmbeddingRoute<'a> {
    /// `sup Σν|x|² / ‖x‖²_D` over `x` supported in `[−N, N]`
    WindowGram { c: &'a CoeffSeq, n: usize },
    /// `sup` over all `x ∈ D` for `ν` supported in the kernel window:
    /// `λ_max(ν^{1/2} G ν^{1/2})`
    Green { g: &'a KernelSeq },
}

/// `C_N²` for `D ⊂ l²(ν)`.
pub fn embedding_constant(nu: &NuWeight, route: EmbeddingRoute) -> Result<f64> {
    match route {
        EmbeddingRoute::WindowGram { c, n } => {
            let ni = n as i64;
            let v: Vec<f64> = (-ni..=ni).map(|j| nu.get(j)).collect();
            if v.iter().all(|x| *x == 0.0) {
                return Ok(0.0);
            }
            let q = dirichlet_form(c, n)?;
            crate::linalg::diagonal_generalized_max_eig(&v, &q)
        }
        EmbeddingRoute::Green { g } => {
            let s = nu.support();
            if s.is_empty() {
                return Ok(0.0);
            }
            let n = g.half_width() as i64;
            if s.iter().any(|j| j.abs() > n) {
                return Err(Error::Precondition("ν extends past the kernel window".into()));
            }
            let r: Vec<f64> = s.iter().map(|&j| nu.get(j).sqrt()).collect();
            let m = DMatrix::from_fn(s.len(), s.len(), |a, b| r[a] * g.get(s[a] - s[b]) * r[b]);
            Ok(*hermitian_eigenvalues(&m).last().expect("nonempty support"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    /// every nonempty subset of `supp ν ∩ [lo, hi]`, at most 14 points
    AllSubsets { lo: i64, hi: i64 },
    /// every interval inside `[lo, hi]`
    Intervals { lo: i64, hi: i64 },
    /// explicit intervals
    IntervalList { intervals: Vec<(i64, i64)> },
    /// random subsets of `[lo, hi]`
    Random { lo: i64, hi: i64, count: usize, seed: u64 },
}

const ENUMERATION_LIMIT: usize = 14;

fn candidate_sets(nu: &NuWeight, strategy: &Strategy) -> Result<Vec<Vec<i64>>> {
    Ok(match strategy {
        Strategy::AllSubsets { lo, hi } => {
            let pts: Vec<i64> = nu.support().into_iter().filter(|j| j >= lo && j <= hi).collect();
            if hi - lo + 1 > ENUMERATION_LIMIT as i64 {
                return Err(Error::Precondition(format!("full enumeration needs a window of at most {ENUMERATION_LIMIT}")));
            }
            (1u32..(1 << pts.len()))
                .map(|mask| (0..pts.len()).filter(|i| mask >> i & 1 == 1).map(|i| pts[i]).collect())
                .collect()
        }
        Strategy::Intervals { lo, hi } => {
            let mut out = Vec::new();
            for a in *lo..=*hi {
                for b in a..=*hi {
                    out.push((a..=b).collect());
                }
            }
            out
        }
        Strategy::IntervalList { intervals } => intervals.iter().map(|&(a, b)| (a..=b).collect()).collect(),
        Strategy::Random { lo, hi, count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*count);
            while out.len() < *count {
                let s: Vec<i64> = (*lo..=*hi).filter(|_| rng.random_bool(0.5)).collect();
                if !s.is_empty() {
                    out.push(s);
                }
            }
            out
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantReport {
    pub value: f64,
    pub witness: Vec<i64>,
    pub evaluated: usize,
    /// quotient per candidate set, in enumeration order
    pub quotients: Vec<f64>,
}

fn best(quotients: Vec<f64>, sets: &[Vec<i64>]) -> ConstantReport {
    let (i, v) = quotients
        .iter()
        .enumerate()
        .fold((0, 0.0), |m, (i, &q)| if q > m.1 { (i, q) } else { m });
    ConstantReport {
        value: v,
        witness: if v > 0.0 { sets[i].clone() } else { Vec::new() },
        evaluated: sets.len(),
        quotients,
    }
}

/// `C₁ = max_J Σ_J ν / Cap(J)` over the strategy's sets.
pub fn capacitary_constant(nu: &NuWeight, g: &KernelSeq, strategy: &Strategy) -> Result<ConstantReport> {
    let sets = candidate_sets(nu, strategy)?;
    let quotients: Vec<f64> = sets
        .par_iter()
        .map(|s| {
            let mass: f64 = s.iter().map(|&j| nu.get(j)).sum();
            if mass == 0.0 {
                return Ok(0.0);
            }
            Ok(mass / capacity_value(s, g, CapacityMethod::ActiveSet, None)?.value)
        })
        .collect::<Result<_>>()?;
    Ok(best(quotients, &sets))
}

fn energy_quotient(nu: &NuWeight, g: &KernelSeq, s: &[i64]) -> f64 {
    let mass: f64 = s.iter().map(|&j| nu.get(j)).sum();
    if mass == 0.0 {
        return 0.0;
    }
    let mut e = 0.0;
    for &j in s {
        let nj = nu.get(j);
        if nj == 0.0 {
            continue;
        }
        for &m in s {
            e += g.get(m - j) * nj * nu.get(m);
        }
    }
    e / mass
}

/// `C_E = max_J Σ_{j,m∈J} g_{m−j} ν_j ν_m / Σ_J ν`.
pub fn energy_constant(nu: &NuWeight, g: &KernelSeq, strategy: &Strategy) -> Result<ConstantReport> {
    let sets = candidate_sets(nu, strategy)?;
    let quotients: Vec<f64> = sets.par_iter().map(|s| energy_quotient(nu, g, s)).collect();
    Ok(best(quotients, &sets))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasimetricReport {
    pub kappa_best: Option<f64>,
    pub interval_constant: f64,
    pub subset_constant: f64,
    /// subset / interval
    pub ratio: f64,
}

/// Interval-only versus all-subset energy constants on `[lo, hi]`.
pub fn quasimetric_report(g: &KernelSeq, nu: &NuWeight, lo: i64, hi: i64) -> Result<QuasimetricReport> {
    let kappa_best = match g.clone().with_quasimetric((hi - lo).unsigned_abs() as usize) {
        Ok(k) => k.quasimetric_kappa,
        Err(Error::DegenerateMatrix(msg)) => {
            log::warn!("kernel is not quasi-metric: {msg}");
            None
        }
        Err(e) => return Err(e),
    };
    let nu = nu.restrict(lo, hi);
    let interval_constant = energy_constant(&nu, g, &Strategy::Intervals { lo, hi })?.value;
    let full = NuWeight::new(lo, nu.values().iter().map(|v| if *v > 0.0 { *v } else { 0.0 }).collect())?;
    let subset_constant = energy_constant(&full, g, &Strategy::AllSubsets { lo, hi })?.value;
    let ratio = if interval_constant > 0.0 { subset_constant / interval_constant } else { 1.0 };
    Ok(QuasimetricReport { kappa_best, interval_constant, subset_constant, ratio })
}

/// Weight Gram matrix on `[−N, N]` from a coefficient table of range `≥ 2N`.
pub fn weight_gram(table: &CoeffTable, n: usize) -> Result<DMatrix<C64>> {
    let gm = gram(table, n)?;
    if !gm.is_hermitian() {
        return Err(Error::ConjugateSymmetry(table.hermitian_defect()));
    }
    Ok(gm.into_matrix())
}

/// Extreme singular values of the compression `W^{1/2} Λ W^{−1/2}` on `[−N, N]`.
pub fn compression_extremes(lambda: &MultiplierSpec, table: &CoeffTable, n: usize) -> Result<(f64, f64)> {
    let w = weight_gram(table, n)?;
    let f = factor(&w).map_err(|e| Error::Resolution(format!("Gram factorization: {e}")))?;
    let ni = n as i64;
    let d: Vec<C64> = (-ni..=ni).map(|j| lambda.value(j)).collect();
    Ok(compression_singular_values(&f, &d))
}

/// Compression norm `‖T_λ‖_N`.
pub fn multiplier_norm(lambda: &MultiplierSpec, table: &CoeffTable, n: usize) -> Result<f64> {
    Ok(compression_extremes(lambda, table, n)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlpBounds {
    pub window: usize,
    pub delta: f64,
    pub sup_norm: f64,
    /// `max_k μ_k(1/λ) − μ_k(λ)/δ²`, nonpositive up to roundoff
    pub pointwise_excess: f64,
    pub pointwise_ok: bool,
    pub norm: f64,
    pub inverse_norm: f64,
    /// `δ^{−2}(‖T_λ‖_N + ‖λ‖_∞) + δ^{−1}`
    pub bound: f64,
    /// `2δ^{−1}‖λ‖_∞ + δ^{−2}‖T_λ‖_N`
    pub refined_bound: f64,
    pub bound_holds: bool,
    pub refined_bound_holds: bool,
    /// compressions are lower bounds for the operator norms
    pub caveat: String,
}

/// SLP checks on `[−N, N]`; `δ` and `‖λ‖_∞` are taken over the window padded
/// by the coefficient length.
pub fn slp_bounds(lambda: &MultiplierSpec, c: &CoeffSeq, n: usize) -> Result<SlpBounds> {
    let r = c.len() as i64;
    let ni = n as i64;
    let (plo, phi) = (-ni - r, ni + r);
    let delta = lambda.inf_abs(plo, phi);
    if !(delta > 0.0) {
        return Err(Error::NotInvertible(format!("inf |λ_j| = {delta} on [{plo}, {phi}]")));
    }
    let sup_norm = lambda.sup_norm(plo, phi);
    let inv = MultiplierSpec::Table { seq: lambda.realize(plo, phi).map(|_, v| 1.0 / v)? };
    let mu = mu_weights_reach(lambda, c, -ni, ni, None, c.len())?;
    let mu_inv = mu_weights_reach(&inv, c, -ni, ni, None, c.len())?;
    let mut excess = f64::NEG_INFINITY;
    for ((_, a), (_, b)) in mu_inv.nu.iter().zip(mu.nu.iter()) {
        excess = excess.max(a.sqrt() - b.sqrt() / (delta * delta));
    }
    let table = c.weight_table(2 * n);
    let norm = multiplier_norm(lambda, &table, n)?;
    let inverse_norm = multiplier_norm(&inv, &table, n)?;
    let bound = (norm + sup_norm) / (delta * delta) + 1.0 / delta;
    let refined_bound = 2.0 * sup_norm / delta + norm / (delta * delta);
    Ok(SlpBounds {
        window: n,
        delta,
        sup_norm,
        pointwise_excess: excess,
        pointwise_ok: excess <= 1e-12,
        norm,
        inverse_norm,
        bound,
        refined_bound,
        bound_holds: inverse_norm <= bound * (1.0 + 1e-12),
        refined_bound_holds: inverse_norm <= refined_bound * (1.0 + 1e-12),
        caveat: "norms are window compressions, i.e. lower bounds of the operator norms".into(),
    })
}

/// `(C_N, ‖T_λ‖_N, ‖λ‖_∞)` for the finite sandwich `|‖T_λ‖_N − C_N| ≤ ‖λ‖_∞`.
pub fn sandwich(lambda: &MultiplierSpec, c: &CoeffSeq, n: usize) -> Result<(f64, f64, f64)> {
    let ni = n as i64;
    let r = c.len() as i64;
    let mu = mu_weights_reach(lambda, c, -ni, ni, None, c.len())?;
    let cn = embedding_constant(&mu.nu, EmbeddingRoute::WindowGram { c, n })?.sqrt();
    let norm = multiplier_norm(lambda, &c.weight_table(2 * n), n)?;
    Ok((cn, norm, lambda.sup_norm(-ni - r, ni + r)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalScan {
    pub intervals: Vec<(i64, i64)>,
    pub ratios: Vec<f64>,
    /// slope of `log₂ ratio` against `log₂ |J|`, fitted over the larger half
    /// of the intervals
    pub slope: f64,
    /// ratio growth per doubling of the interval, `2^slope`
    pub growth_per_octave: f64,
    pub bounded: bool,
}

/// Log-log slope below which an interval scan counts as bounded.
pub const TREND_SLOPE: f64 = 0.05;

/// Fit `log ratio` against `log |J|` by least squares over the larger half
/// of the intervals, where the scan is closest to its asymptotic regime.
pub fn trend(intervals: &[(i64, i64)], ratios: &[f64]) -> IntervalScan {
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by_key(|&i| intervals[i].1 - intervals[i].0);
    let upper = &order[order.len() / 2..];
    let pts: Vec<(f64, f64)> = upper
        .iter()
        .map(|&i| (&intervals[i], &ratios[i]))
        .filter(|(_, r)| **r > 0.0)
        .map(|(&(a, b), &r)| (((b - a + 1) as f64).log2(), r.log2()))
        .collect();
    let slope = if pts.len() < 2 {
        0.0
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    IntervalScan {
        intervals: intervals.to_vec(),
        ratios: ratios.to_vec(),
        slope,
        growth_per_octave: slope.exp2(),
        bounded: slope < TREND_SLOPE,
    }
}

/// Dyadic intervals `[start, start + 2^k]`, `k = 0..=k_max`.
pub fn dyadic_intervals(start: i64, k_max: u32) -> Vec<(i64, i64)> {
    (0..=k_max).map(|k| (start, start + (1i64 << k))).collect()
}

/// `Σ_J ν / Cap(J)` over the given intervals, with the growth trend.
pub fn interval_scan(nu: &NuWeight, g: &KernelSeq, intervals: &[(i64, i64)]) -> Result<IntervalScan> {
    let rep = capacitary_constant(nu, g, &Strategy::IntervalList { intervals: intervals.to_vec() })?;
    Ok(trend(intervals, &rep.quotients))
}

/// Leading constant `A` of the Riesz Green kernel, `g_j ~ A |j|^{α−1}`.
pub fn riesz_green_constant(alpha: f64) -> f64 {
    alpha * (std::f64::consts::FRAC_PI_2 * alpha).tan() / std::f64::consts::TAU
}

/// Riesz Green kernel of order `α` on `|j| < M/2`. The midpoint grid folds
/// `g` as `Σ_p (−1)^p g_{j+pM}`; the images `p ≠ 0` are removed using the
/// power-law asymptotic, whose next term is smaller by `O(M^{−1})`.
pub fn riesz_kernel(alpha: f64, size: usize) -> Result<KernelSeq> {
    let raw = riesz_kernel_periodic(alpha, size)?;
    let a = riesz_green_constant(alpha);
    let m = size as f64;
    let e = alpha - 1.0;
    let one_sided: Vec<f64> = (0..=raw.half_width() as i64)
        .map(|j| {
            let x = j as f64;
            let images = alternating_tail(|l| {
                let p = (l + 1) as f64 * m;
                (p + x).powf(e) + (p - x).powf(e)
            });
            raw.get(j) + a * images
        })
        .collect();
    KernelSeq::from_one_sided(KernelRole::Green, &one_sided)
}

/// Riesz Green kernel as sampled on the periodic grid of size `M`.
pub fn riesz_kernel_periodic(alpha: f64, size: usize) -> Result<KernelSeq> {
    Ok(green_kernel(&CoeffSeq::riesz(alpha)?, size, size / 2 - 1)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub alpha: f64,
    pub beta: f64,
    /// `Σ_J μ^α(λ)² / Cap_β(J)`
    pub mu_scan: IntervalScan,
    /// `Σ_J |λ|² / Cap_{β−α}(J)`, only when `α < β`
    pub lambda_scan: Option<IntervalScan>,
    pub sup_norm: f64,
    pub passes: bool,
}

/// Capacitary conditions for `λ ∈ Mult(D_{β/2} → D_{α/2})` over `[0, 2^k]`.
pub fn pair_multiplier_check(
    lambda: &MultiplierSpec,
    alpha: f64,
    beta: f64,
    k_max: u32,
    size: usize,
    reach: usize,
) -> Result<PairCheck> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(invalid("orders must lie in (0, 1)"));
    }
    let intervals = dyadic_intervals(0, k_max);
    let hi = 1i64 << k_max;
    let g_beta = riesz_kernel(beta, size)?;
    let mu = riesz_mu(lambda, alpha, 0, hi, reach)?;
    let mu_scan = interval_scan(&mu.nu, &g_beta, &intervals)?;
    let lambda_scan = if alpha < beta {
        let g = riesz_kernel(beta - alpha, size)?;
        let nu = NuWeight::new(0, (0..=hi).map(|j| lambda.value(j).norm_sqr()).collect())?;
        Some(interval_scan(&nu, &g, &intervals)?)
    } else {
        None
    };
    let passes = mu_scan.bounded && lambda_scan.as_ref().is_none_or(|s| s.bounded);
    Ok(PairCheck { alpha, beta, mu_scan, lambda_scan, sup_norm: lambda.sup_norm(0, hi), passes })
}

/// `μ^α(x)_j²` for finitely supported `x`, exact over `ℤ`, on `[lo, hi]`.
pub fn riesz_mu_of_seq(x: &WindowSeq, alpha: f64, lo: i64, hi: i64) -> Result<Vec<f64>> {
    let c = CoeffSeq::riesz(alpha)?;
    let (xl, xh) = (x.lo(), x.hi());
    Ok((lo..=hi)
        .into_par_iter()
        .map(|j| {
            let xj = x.get(j);
            let mut s = 0.0;
            for (m, xm) in x.iter() {
                if m != j {
                    s += (xj - xm).norm_sqr() * c.coeff((j - m).unsigned_abs() as usize);
                }
            }
            if xj != C64::new(0.0, 0.0) {
                // m outside the window of x, where x_m = 0
                s += xj.norm_sqr() * (c.tail_sum((j - xl) as usize) + c.tail_sum((xh - j) as usize));
            }
            s
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorRatio {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub padding: usize,
}

/// `‖μ^{β−α}[μ^α(x)]‖_{l²} / ‖μ^β(x)‖_{l²}`; `μ^α(x)` is kept on the window
/// of `x` padded by `padding`.
pub fn commutator_inequality_ratio(x: &WindowSeq, alpha: f64, beta: f64, padding: usize) -> Result<CommutatorRatio> {
    if !(alpha > 0.0 && alpha < beta && beta < 1.0) {
        return Err(invalid("need 0 < α < β < 1"));
    }
    let p = padding as i64;
    let (lo, hi) = (x.lo() - p, x.hi() + p);
    let mu_a = riesz_mu_of_seq(x, alpha, lo, hi)?;
    let y = WindowSeq::new(lo, mu_a.iter().map(|v| C64::new(v.sqrt(), 0.0)).collect())?;
    let n = lo.abs().max(hi) as usize;
    let num = 2.0 * seminorm(&DirichletMatrix::toeplitz(n, CoeffSeq::riesz(beta - alpha)?), &y, 2.0)?;
    let nx = x.lo().abs().max(x.hi()) as usize;
    let den = 2.0 * seminorm(&DirichletMatrix::toeplitz(nx, CoeffSeq::riesz(beta)?), x, 2.0)?;
    let (numerator, denominator) = (num.sqrt(), den.sqrt());
    let ratio = if denominator == 0.0 { 0.0 } else { numerator / denominator };
    Ok(CommutatorRatio { numerator, denominator, ratio, padding })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqTransforms {
    pub conjugate: WindowSeq,
    /// `λ̃_j = λ_{−j}`
    pub reflection: WindowSeq,
}

pub fn duality_transforms(lambda: &MultiplierSpec, n: usize) -> SeqTransforms {
    let ni = n as i64;
    let seq = lambda.realize(-ni, ni);
    SeqTransforms {
        conjugate: seq.map(|_, v| v.conj()).expect("finite values"),
        reflection: WindowSeq::from_fn(-ni, ni, |j| seq.get(-j)).expect("window contains 0"),
    }
}

#[derive(Debug, Clone)]
pub struct WeightTransforms {
    pub reciprocal: WeightGrid,
    /// `w̃(e^{it}) = w(e^{−it})`
    pub reflection: WeightGrid,
}

pub fn weight_transforms(w: &WeightGrid) -> Result<WeightTransforms> {
    Ok(WeightTransforms { reciprocal: w.reciprocal()?, reflection: w.reflect() })
}

/// Random `ν` on `[lo, hi]` with independent uniform entries in `[0, 1)`.
pub fn random_nu(lo: i64, hi: i64, rng: &mut impl Rng) -> NuWeight {
    NuWeight { lo, values: (lo..=hi).map(|_| rng.random::<f64>()).collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierReport {
    pub window: usize,
    pub mu: MuWeights,
    /// `C_N²` on the window
    pub embedding_constant: f64,
    pub capacitary: Option<ConstantReport>,
    pub energy: Option<ConstantReport>,
    pub norm: f64,
    pub sup_norm: f64,
    /// `|‖T_λ‖_N − C_N| ≤ ‖λ‖_∞`
    pub sandwich_ok: bool,
}

/// Window-level summary for `λ` on `L²(w)` with the LKS weight of `c`.
/// Capacitary and energy constants are computed when `kernel` is given,
/// over `strategy`.
pub fn multiplier_report(
    lambda: &MultiplierSpec,
    c: &CoeffSeq,
    n: usize,
    kernel: Option<(&KernelSeq, &Strategy)>,
) -> Result<MultiplierReport> {
    let ni = n as i64;
    let mu = mu_weights(lambda, c, -ni, ni, None)?;
    let embedding_constant = embedding_constant(&mu.nu, EmbeddingRoute::WindowGram { c, n })?;
    let norm = multiplier_norm(lambda, &c.weight_table(2 * n), n)?;
    let r = c.len() as i64;
    let sup_norm = lambda.sup_norm(-ni - r, ni + r);
    let (capacitary, energy) = match kernel {
        Some((g, s)) => (Some(capacitary_constant(&mu.nu, g, s)?), Some(energy_constant(&mu.nu, g, s)?)),
        None => (None, None),
    };
    let sandwich_ok = (norm - embedding_constant.sqrt()).abs() <= sup_norm * (1.0 + 1e-9) + 1e-9;
    Ok(MultiplierReport { window: n, mu, embedding_constant, capacitary, energy, norm, sup_norm, sandwich_ok })
}
