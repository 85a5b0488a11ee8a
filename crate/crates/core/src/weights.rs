//! LKS weights `w(e^{it}) = 4 Σ_{k≥1} c_k sin²(kt/2)` and the analytic
//! criteria attached to a single weight.

use crate::error::{invalid, Error, Result};
use crate::seqcore::{analyze, trig_values, CoeffTable, WeightGrid, C64};
use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type CoeffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Asymptotic class `c(x) ~ x^{-exponent} (ln x)^{log_power}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotic {
    pub exponent: f64,
    pub log_power: f64,
}

#[derive(Clone)]
pub struct CustomForm {
    pub label: String,
    f: CoeffFn,
    asymptotic: Option<Asymptotic>,
}

impl fmt::Debug for CustomForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomForm")
            .field("label", &self.label)
            .field("asymptotic", &self.asymptotic)
            .finish()
    }
}

/// Closed-form tag of a coefficient sequence.
#[derive(Debug, Clone)]
pub enum ClosedForm {
    /// `c_k = (k+1)^{-(1+α)}`; the weight behaves like `|t|^α`.
    Power { alpha: f64 },
    /// `c_k = k^{-2} (log(e k))^β`.
    PowerLog { beta: f64 },
    Custom(CustomForm),
}

impl ClosedForm {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ClosedForm::Power { alpha } => (x + 1.0).powf(-(1.0 + alpha)),
            ClosedForm::PowerLog { beta } => (1.0 + x.ln()).powf(*beta) / (x * x),
            ClosedForm::Custom(c) => (c.f)(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ClosedForm::Power { alpha } => format!("power(alpha={alpha})"),
            ClosedForm::PowerLog { beta } => format!("power_log(beta={beta})"),
            ClosedForm::Custom(c) => format!("custom({})", c.label),
        }
    }

    /// Known or estimated asymptotic class; `None` when the estimate is unreliable.
    pub fn asymptotic(&self) -> Option<Asymptotic> {
        match self {
            ClosedForm::Power { alpha } => Some(Asymptotic { exponent: 1.0 + alpha, log_power: 0.0 }),
            ClosedForm::PowerLog { beta } => Some(Asymptotic { exponent: 2.0, log_power: *beta }),
            ClosedForm::Custom(c) => c.asymptotic.or_else(|| {
                let (a, b) = (1e5, 1e6);
                let (ca, cb) = ((c.f)(a), (c.f)(b));
                if ca > 0.0 && cb > 0.0 {
                    let s = -(cb / ca).ln() / (b / a).ln();
                    s.is_finite().then_some(Asymptotic { exponent: s, log_power: 0.0 })
                } else {
                    None
                }
            }),
        }
    }

    /// Whether the asymptotic class is exact rather than a numerical slope estimate.
    fn class_is_exact(&self) -> bool {
        !matches!(self, ClosedForm::Custom(CustomForm { asymptotic: None, .. }))
    }
}

/// Nonnegative summable sequence `(c_k)_{k≥1}`.
///
/// `len` explicit terms are stored. With `tail` set the sequence continues
/// past `len` by its closed form and all sums include the analytic remainder.
#[derive(Debug, Clone)]
pub struct CoeffSeq {
    values: Arc<Vec<f64>>,
    suffix: Arc<Vec<f64>>,
    form: Option<ClosedForm>,
    tail: bool,
    tail_beyond: f64,
}

impl CoeffSeq {
    /// Table `c_1, ..., c_K`.
    pub fn from_table(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("coefficients must be finite and nonnegative"));
        }
        if !values.iter().any(|v| *v > 0.0) {
            return Err(invalid("at least one coefficient must be positive"));
        }
        Ok(Self::assemble(values, None))
    }

    /// Sparse table from `(k, c_k)` pairs.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        let k_max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        if pairs.iter().any(|p| p.0 == 0) {
            return Err(invalid("indices start at 1"));
        }
        let mut v = vec![0.0; k_max];
        for &(k, c) in pairs {
            v[k - 1] += c;
        }
        Self::from_table(v)
    }

    fn assemble(values: Vec<f64>, form: Option<ClosedForm>) -> Self {
        let mut suffix = vec![0.0; values.len() + 1];
        for k in (0..values.len()).rev() {
            suffix[k] = suffix[k + 1] + values[k];
        }
        Self { values: Arc::new(values), suffix: Arc::new(suffix), form, tail: false, tail_beyond: 0.0 }
    }

    fn from_form(form: ClosedForm, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("truncation length must be positive"));
        }
        let values: Vec<f64> = (1..=len).map(|k| form.eval(k as f64)).collect();
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid(format!("{} produced an invalid coefficient", form.label())));
        }
        if !values.iter().any(|v| *v > 0.0) {
            return Err(invalid("at least one coefficient must be positive"));
        }
        Ok(Self::assemble(values, Some(form)))
    }

    /// `c_k = (k+1)^{-(1+α)}`, `k ≤ K`.
    pub fn power(alpha: f64, len: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("power exponent alpha={alpha} must be positive")));
        }
        Self::from_form(ClosedForm::Power { alpha }, len)
    }

    /// `c_k = k^{-2}(log ek)^β`, `k ≤ K`.
    pub fn power_log(beta: f64, len: usize) -> Result<Self> {
        if !beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        Self::from_form(ClosedForm::PowerLog { beta }, len)
    }

    pub fn custom(label: &str, f: CoeffFn, len: usize) -> Result<Self> {
        Self::from_form(ClosedForm::Custom(CustomForm { label: label.into(), f, asymptotic: None }), len)
    }

    /// Declare the asymptotic class of a custom form.
    pub fn with_asymptotic(mut self, exponent: f64, log_power: f64) -> Result<Self> {
        match &mut self.form {
            Some(ClosedForm::Custom(c)) => c.asymptotic = Some(Asymptotic { exponent, log_power }),
            _ => return Err(invalid("asymptotics can only be declared for custom forms")),
        }
        Ok(self)
    }

    /// Infinite power sequence (`α` Riesz coefficients) with the analytic tail.
    pub fn riesz(alpha: f64) -> Result<Self> {
        Self::power(alpha, 1 << 16)?.with_tail()
    }

    /// Continue the sequence past `K` by its closed form.
    pub fn with_tail(mut self) -> Result<Self> {
        let form = self
            .form
            .clone()
            .ok_or_else(|| Error::Precondition("an infinite tail needs a closed form".into()))?;
        if let Some(a) = form.asymptotic() {
            if a.exponent <= 1.0 {
                return Err(invalid(format!("{} is not summable", form.label())));
            }
        }
        let t = tail_sum_form(&form, self.len());
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("tail of {} is not summable", form.label())));
        }
        self.tail = true;
        self.tail_beyond = t;
        Ok(self)
    }

    /// Number of stored terms `K`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_tail(&self) -> bool {
        self.tail
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.form.as_ref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `c_k`; beyond `K` this is the closed form when a tail is attached and zero otherwise.
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else if k <= self.len() {
            self.values[k - 1]
        } else if self.tail {
            self.form.as_ref().map_or(0.0, |f| f.eval(k as f64))
        } else {
            0.0
        }
    }

    /// Largest index with a nonzero coefficient, `None` for infinite support.
    pub fn support_end(&self) -> Option<usize> {
        if self.tail {
            None
        } else {
            self.values.iter().rposition(|v| *v > 0.0).map(|i| i + 1)
        }
    }

    /// `Σ_k c_k`.
    pub fn sum(&self) -> f64 {
        self.suffix[0] + self.tail_beyond
    }

    /// `Σ_{k>n} c_k`.
    pub fn tail_sum(&self, n: usize) -> f64 {
        if n < self.len() {
            self.suffix[n] + self.tail_beyond
        } else if self.tail {
            self.form.as_ref().map_or(0.0, |f| tail_sum_form(f, n))
        } else {
            0.0
        }
    }

    pub fn label(&self) -> String {
        let base = match &self.form {
            Some(f) => f.label(),
            None => "table".into(),
        };
        if self.tail {
            format!("{base}, K={} + analytic tail", self.len())
        } else {
            format!("{base}, K={}", self.len())
        }
    }

    /// `c'_k = c_{kd}`, the sequence of the reduced weight `w = w₁(e^{idt})`.
    pub fn reduced(&self, d: usize) -> Result<Self> {
        if d <= 1 {
            return Ok(self.clone());
        }
        let n = self.len() / d;
        Self::from_table((1..=n).map(|k| self.coeff(k * d)).collect())
    }

    /// Exact coefficient table of the weight, `ŵ(0) = 2Σc_k`, `ŵ(±k) = −c_k`.
    pub fn weight_table(&self, range: usize) -> CoeffTable {
        let s2 = 2.0 * self.sum();
        CoeffTable::from_fn(range, |n| {
            if n == 0 {
                C64::new(s2, 0.0)
            } else {
                C64::new(-self.coeff(n.unsigned_abs() as usize), 0.0)
            }
        })
    }
}

pub(crate) fn gauss_legendre_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    X.iter().zip(W.iter()).map(|(x, w)| w * f(m + h * x)).sum::<f64>() * h
}

/// `∫_n^∞ f(x) dx` via `x = n e^u`.
fn tail_integral(f: &dyn Fn(f64) -> f64, n: f64) -> f64 {
    let g = |u: f64| {
        let x = n * u.exp();
        f(x) * x
    };
    let mut total = 0.0;
    let mut u = 0.0;
    let h = 0.25;
    while u < 690.0 {
        let p = gauss_legendre_panel(&g, u, u + h);
        total += p;
        u += h;
        if p.abs() <= 1e-18 * total.abs() && u > 4.0 {
            break;
        }
    }
    total
}

/// `Σ_{k>n} c(k)` for a closed form: exact terms up to 2000 then Euler–Maclaurin.
pub(crate) fn tail_sum_form(form: &ClosedForm, n: usize) -> f64 {
    let n0 = n.max(2000);
    let head: f64 = ((n + 1)..=n0).map(|k| form.eval(k as f64)).sum();
    let x = n0 as f64;
    let f = |t: f64| form.eval(t);
    let (integral, d1, d3) = match form {
        ClosedForm::Power { alpha } => {
            let a = *alpha;
            let y = x + 1.0;
            (
                y.powf(-a) / a,
                -(1.0 + a) * y.powf(-(2.0 + a)),
                -(1.0 + a) * (2.0 + a) * (3.0 + a) * y.powf(-(4.0 + a)),
            )
        }
        _ => return head + smooth_tail(&f, n0),
    };
    head + integral - f(x) / 2.0 - d1 / 12.0 + d3 / 720.0
}

/// `Σ_{k>n} f(k)` for `f` smooth and slowly varying on `[n, ∞)`, by
/// Euler–Maclaurin with numerical derivatives.
pub(crate) fn smooth_tail(f: &dyn Fn(f64) -> f64, n: usize) -> f64 {
    let x = n as f64;
    let h = x * 1e-3;
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let h3 = x * 1e-2;
    let d3 = (f(x + 2.0 * h3) - 2.0 * f(x + h3) + 2.0 * f(x - h3) - f(x - 2.0 * h3)) / (2.0 * h3.powi(3));
    tail_integral(f, x) - f(x) / 2.0 - d1 / 12.0 + d3 / 720.0
}

/// `Σ_{l≥0} (−1)^l f(l)` for smooth slowly varying `f` (Euler transform).
pub(crate) fn alternating_tail(f: impl Fn(usize) -> f64) -> f64 {
    const DIRECT: usize = 16;
    const TERMS: usize = 16;
    let head: f64 = (0..DIRECT).map(|l| if l % 2 == 0 { f(l) } else { -f(l) }).sum();
    let mut d: Vec<f64> = (DIRECT..DIRECT + TERMS).map(&f).collect();
    let mut sum = 0.0;
    let mut scale = 0.5;
    for j in 0..TERMS {
        let term = d[0] * scale;
        sum += if j % 2 == 0 { term } else { -term };
        for i in 0..d.len() - 1 {
            d[i] = d[i + 1] - d[i];
        }
        d.pop();
        scale *= 0.5;
    }
    head + sum
}

/// Explicit terms folded onto a grid of size `M` before the analytic remainder.
fn fold_length(c: &CoeffSeq, size: usize) -> usize {
    if c.tail {
        c.len().max(8 * size)
    } else {
        c.len()
    }
}

/// Sample `w(e^{it_m})` on the midpoint grid and return the exact table
/// over `|n| ≤ min(K, M/2 − 1)`.
pub fn lks_weight(c: &CoeffSeq, size: usize) -> Result<(WeightGrid, CoeffTable)> {
    if size < 4 || !size.is_power_of_two() {
        return Err(invalid(format!("grid size {size} must be a power of two")));
    }
    let kf = fold_length(c, size);
    let mut folded = vec![0.0f64; size];
    for k in 1..=kf {
        let ck = c.coeff(k);
        if ck != 0.0 {
            let (l, r) = k.div_rem(&size);
            folded[r] += if l % 2 == 0 { ck } else { -ck };
        }
    }
    if c.tail {
        let form = c.form.as_ref().expect("tail implies closed form");
        for rp in 1..=size {
            let k0 = kf + rp;
            let (l0, r) = k0.div_rem(&size);
            let s = alternating_tail(|l| form.eval((k0 + l * size) as f64));
            folded[r] += if l0 % 2 == 0 { s } else { -s };
        }
    }
    let vals = trig_values(
        folded.iter().enumerate().map(|(r, &v)| (r as i64, C64::new(v, 0.0))),
        size,
    );
    let s2 = 2.0 * c.sum();
    let samples: Vec<f64> = vals.iter().map(|v| (s2 - 2.0 * v.re).max(0.0)).collect();
    let range = c.len().min(size / 2 - 1);
    Ok((WeightGrid::new(samples)?, c.weight_table(range)))
}

/// Zero set of an LKS weight: the `d`-th roots of unity with `d = gcd{k: c_k > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub d: usize,
    /// zeros as fractions `j/d` of a full turn
    #[serde(serialize_with = "ser_ratios")]
    pub zeros: Vec<Ratio<i64>>,
}

pub(crate) fn ser_ratios<S: serde::Serializer>(v: &[Ratio<i64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| format!("{}/{}", r.numer(), r.denom())))
}

impl ZeroSet {
    pub fn angles(&self) -> Vec<f64> {
        self.zeros
            .iter()
            .map(|r| 2.0 * std::f64::consts::PI * *r.numer() as f64 / *r.denom() as f64)
            .collect()
    }
}

pub fn zero_set(c: &CoeffSeq) -> ZeroSet {
    let mut d = 0usize;
    for (i, v) in c.values().iter().enumerate() {
        if *v > 0.0 {
            d = d.gcd(&(i + 1));
        }
    }
    if c.has_tail() {
        let k = c.len();
        for j in 1..=2 {
            if c.coeff(k + j) > 0.0 {
                d = d.gcd(&(k + j));
            }
        }
    }
    let d = d.max(1);
    let zeros = (0..d as i64).map(|j| Ratio::new(j, d as i64)).collect();
    ZeroSet { d, zeros }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Integrable,
    NotIntegrable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// two-sided integral bounds by the partial-sum series
    TwoSidedSeries,
    /// regular decay: upper series is sharp
    RegularDecay,
    /// `Σ 1/(k³ c_k)`
    CubicReciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub verdict: Verdict,
    /// `Σ_{n≤n_max} 1/(S_n + n² T_n)`, `S_n = Σ_{k≤n} c_k k²`, `T_n = Σ_{k>n} c_k`
    pub lower_bound: f64,
    /// `Σ_{n≤n_max} 1/S_n`
    pub upper_bound: f64,
    pub criterion_used: Criterion,
    pub d: usize,
    pub terms: usize,
    pub asymptotic: Option<Asymptotic>,
}

/// Convergence of `Σ n^{-p} (ln n)^{-q}`.
pub(crate) fn log_series_converges(p: f64, q: f64) -> bool {
    if (p - 1.0).abs() < 1e-12 {
        q > 1.0 + 1e-12
    } else {
        p > 1.0
    }
}

/// Verdict of `Σ 1/S_n` for `c ~ x^{-s}(ln x)^b`; `S_n ~ n^{3-s}(ln n)^b` when `s < 3`
/// and grows at most logarithmically otherwise. The lower series has the same class.
pub(crate) fn class_verdict(a: Asymptotic) -> bool {
    let p = 3.0 - a.exponent;
    if p <= 0.0 {
        return false;
    }
    log_series_converges(p, a.log_power)
}

/// The two partial-sum series, started at the first `n` with `S_n > 0`.
pub(crate) fn partial_series(c: &CoeffSeq, n_max: usize) -> (f64, f64, usize) {
    let mut s = 0.0;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut terms = 0;
    for n in 1..=n_max {
        let ck = c.coeff(n);
        s += ck * (n as f64) * (n as f64);
        if s <= 0.0 {
            continue;
        }
        let t = c.tail_sum(n);
        lower += 1.0 / (s + (n as f64) * (n as f64) * t);
        upper += 1.0 / s;
        terms += 1;
    }
    (lower, upper, terms)
}

/// Three-valued decision on `1/w ∈ L¹`.
pub fn reciprocal_integrable(c: &CoeffSeq, n_max: usize) -> Result<IntegrabilityReport> {
    let zs = zero_set(c);
    let red = c.reduced(zs.d)?;
    let (lower_bound, upper_bound, terms) = partial_series(&red, n_max);
    let (verdict, asymptotic) = match red.closed_form().filter(|_| zs.d == 1) {
        Some(form) => {
            let a = form.asymptotic();
            let v = match a {
                Some(a) if form.class_is_exact() || (a.exponent - 2.0).abs() >= 0.05 => {
                    if class_verdict(a) {
                        Verdict::Integrable
                    } else {
                        Verdict::NotIntegrable
                    }
                }
                _ => Verdict::Inconclusive,
            };
            (v, a)
        }
        None => {
            // A finite reduced sequence: past its last index the lower-series
            // terms are the constant 1/S_K, so the series diverges.
            if red.support_end().is_some() {
                (Verdict::NotIntegrable, None)
            } else {
                (Verdict::Inconclusive, None)
            }
        }
    };
    Ok(IntegrabilityReport {
        verdict,
        lower_bound,
        upper_bound,
        criterion_used: Criterion::TwoSidedSeries,
        d: zs.d,
        terms,
        asymptotic,
    })
}

/// Quadrature value of `∫ dm/w` for the weight of `c` on a grid of size `M`.
pub fn reciprocal_quadrature(c: &CoeffSeq, size: usize) -> Result<f64> {
    let (g, _) = lks_weight(c, size)?;
    Ok(g.reciprocal()?.mean())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegularCriterion {
    /// `x^γ c(x)` eventually decreasing for some `γ ∈ (1, 3)`.
    Decay { gamma: f64 },
    /// `c(t)t²` nondecreasing; decides by `Σ 1/(k³ c_k)`.
    CubicReciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularVerdict {
    pub verdict: Verdict,
    pub criterion_used: Criterion,
    pub hypothesis_checked_on: (f64, f64),
    pub hypothesis_ok: bool,
    /// partial sum of the deciding series up to `10⁴`
    pub partial_sum: f64,
}

const HYPOTHESIS_START: f64 = 16.0;
const HYPOTHESIS_END: f64 = 1e6;

fn geometric_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| a * (r * i as f64).exp()).collect()
}

/// Decide `1/w ∈ L¹` from a closed form under a regularity hypothesis.
pub fn regular_criterion(c: &CoeffSeq, criterion: RegularCriterion) -> Result<RegularVerdict> {
    let form = c
        .closed_form()
        .ok_or_else(|| Error::Precondition("a closed-form tag is required".into()))?;
    let xs = geometric_points(HYPOTHESIS_START, HYPOTHESIS_END, 400);
    let (ok, which) = match criterion {
        RegularCriterion::Decay { gamma } => {
            if !(gamma > 1.0 && gamma < 3.0) {
                return Err(invalid(format!("gamma={gamma} must lie in (1, 3)")));
            }
            let g: Vec<f64> = xs.iter().map(|&x| x.powf(gamma) * form.eval(x)).collect();
            (g.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), Criterion::RegularDecay)
        }
        RegularCriterion::CubicReciprocal => {
            let g: Vec<f64> = xs.iter().map(|&x| x * x * form.eval(x)).collect();
            (g.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)), Criterion::CubicReciprocal)
        }
    };
    if !ok {
        return Err(Error::HypothesisViolation(format!(
            "monotonicity hypothesis of {which:?} fails for {} on [{HYPOTHESIS_START}, {HYPOTHESIS_END:e}]",
            form.label()
        )));
    }
    let partial_sum = match which {
        Criterion::CubicReciprocal => (1..=10_000).map(|k| 1.0 / ((k as f64).powi(3) * form.eval(k as f64))).sum(),
        _ => {
            let mut s = 0.0;
            let mut acc = 0.0;
            for n in 1..=10_000usize {
                s += form.eval(n as f64) * (n * n) as f64;
                if s > 0.0 {
                    acc += 1.0 / s;
                }
            }
            acc
        }
    };
    let verdict = match form.asymptotic() {
        Some(a) if form.class_is_exact() || (a.exponent - 2.0).abs() >= 0.05 => {
            // Both deciding series share the class n^{s-3} (ln n)^{-b}.
            if class_verdict(a) {
                Verdict::Integrable
            } else {
                Verdict::NotIntegrable
            }
        }
        _ => Verdict::Inconclusive,
    };
    Ok(RegularVerdict {
        verdict,
        criterion_used: which,
        hypothesis_checked_on: (HYPOTHESIS_START, HYPOTHESIS_END),
        hypothesis_ok: true,
        partial_sum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A2Report {
    pub sup_product: f64,
    /// maximum over arcs of length `2π/2^ℓ` at every node offset, `ℓ = 0..=max_level`
    pub per_level: Vec<f64>,
}

/// Products of arc means of `w` and `1/w` over dyadic arcs at all offsets.
pub fn a2_report(grid: &WeightGrid, max_level: u32) -> Result<A2Report> {
    let size = grid.size();
    let log2 = size.trailing_zeros();
    if max_level > log2 {
        return Err(invalid(format!("level {max_level} exceeds grid resolution 2^{log2}")));
    }
    if grid.min() <= 0.0 {
        return Err(Error::Precondition("A2 test needs a strictly positive grid".into()));
    }
    let mut pw = vec![0.0; 2 * size + 1];
    let mut pr = vec![0.0; 2 * size + 1];
    for i in 0..2 * size {
        let s = grid.samples()[i % size];
        pw[i + 1] = pw[i] + s;
        pr[i + 1] = pr[i] + 1.0 / s;
    }
    let mut per_level = Vec::with_capacity(max_level as usize + 1);
    for level in 0..=max_level {
        let len = size >> level;
        let inv = 1.0 / len as f64;
        let offsets = if level == 0 { 1 } else { size };
        let mut best: f64 = 0.0;
        for m in 0..offsets {
            let a = (pw[m + len] - pw[m]) * inv;
            let b = (pr[m + len] - pr[m]) * inv;
            best = best.max(a * b);
        }
        per_level.push(best);
    }
    let sup_product = per_level.iter().copied().fold(0.0, f64::max);
    Ok(A2Report { sup_product, per_level })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchoenbergRow {
    pub eps: f64,
    pub e0: f64,
    pub min_coeff: f64,
}

/// Minimum real Fourier coefficient of `exp(−εw)` over `|n| < M/4`, per `ε`.
pub fn schoenberg_pd_check(grid: &WeightGrid, eps: &[f64]) -> Result<Vec<SchoenbergRow>> {
    let range = grid.size() / 4 - 1;
    eps.iter()
        .map(|&e| {
            let g = grid.map(|w| (-e * w).exp())?;
            let t = analyze(&g, range)?;
            let min_coeff = t.iter().map(|(_, v)| v.re).fold(f64::INFINITY, f64::min);
            Ok(SchoenbergRow { eps: e, e0: t.get(0).re, min_coeff })
        })
        .collect()
}

/// Increasing profile `u` with optional derivative.
#[derive(Clone)]
pub struct Profile {
    pub label: String,
    pub u: CoeffFn,
    pub du: Option<CoeffFn>,
}

impl Profile {
    pub fn new(label: &str, u: CoeffFn) -> Self {
        Self { label: label.into(), u, du: None }
    }

    pub fn with_derivative(mut self, du: CoeffFn) -> Self {
        self.du = Some(du);
        self
    }

    fn derivative(&self, s: f64) -> f64 {
        match &self.du {
            Some(d) => d(s),
            None => {
                let h = 1e-5 * s.max(1.0);
                ((self.u)(s + h) - (self.u)(s - h)) / (2.0 * h)
            }
        }
    }
}

/// Coefficients `c(x) = u′(x/π)/x²` whose weight behaves like `t² u(1/t)`.
pub fn synthesize_from_profile(profile: &Profile, alpha: f64, len: usize) -> Result<CoeffSeq> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(invalid(format!("monotonicity exponent {alpha} must lie in (-1, 1)")));
    }
    let ss = geometric_points(1.0, HYPOTHESIS_END, 400);
    let us: Vec<f64> = ss.iter().map(|&s| (profile.u)(s)).collect();
    if !us.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::HypothesisViolation(format!("profile {} is not increasing", profile.label)));
    }
    let g: Vec<f64> = ss.iter().map(|&s| s.powf(alpha) * profile.derivative(s)).collect();
    if !g.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)) {
        return Err(Error::HypothesisViolation(format!(
            "s^{alpha} u'(s) is not decreasing for profile {}",
            profile.label
        )));
    }
    let p = profile.clone();
    let f: CoeffFn = Arc::new(move |x: f64| p.derivative(x / std::f64::consts::PI) / (x * x));
    CoeffSeq::custom(&format!("profile {}", profile.label), f, len)?.with_tail()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_coefficient_weight() {
        let c = CoeffSeq::from_table(vec![1.0]).unwrap();
        let (g, t) = lks_weight(&c, 1024).unwrap();
        assert_eq!(t.get(0).re, 2.0);
        assert_eq!(t.get(1).re, -1.0);
        assert_eq!(t.get(-1).re, -1.0);
        assert_eq!(t.range(), 1);
        // node closest to π
        let m = 1023;
        let x = (g.node(m) / 2.0).sin();
        assert!((g.samples()[m] - 4.0 * x * x).abs() < 1e-12);
        assert!((g.samples()[m] - 4.0).abs() < 1e-4);
    }

    #[test]
    fn inverse_square_closed_form() {
        let c = CoeffSeq::from_table((1..=100_000).map(|k| 1.0 / (k as f64).powi(2)).collect()).unwrap();
        let (g, _) = lks_weight(&c, 1 << 14).unwrap();
        let mut dev: f64 = 0.0;
        for m in 0..g.size() {
            let t = g.node(m).abs();
            let exact = 2.0 * PI * PI * (t / (2.0 * PI)) * (1.0 - t / (2.0 * PI));
            dev = dev.max((g.samples()[m] - exact).abs());
        }
        assert!(dev < 1e-4, "{dev}");
    }

    #[test]
    fn tail_sum_matches_direct() {
        for form in [ClosedForm::Power { alpha: 0.5 }, ClosedForm::PowerLog { beta: 2.0 }] {
            let direct: f64 = (101..=2_000_000).map(|k| form.eval(k as f64)).sum::<f64>()
                + tail_sum_form(&form, 2_000_000);
            let t = tail_sum_form(&form, 100);
            assert!((t - direct).abs() < 1e-12 * direct, "{} {t} {direct}", form.label());
        }
        let custom = ClosedForm::Custom(CustomForm {
            label: "x^-1.7".into(),
            f: Arc::new(|x: f64| x.powf(-1.7)),
            asymptotic: None,
        });
        let t = tail_sum_form(&custom, 5000);
        let exact = {
            let x = 5000.0f64;
            x.powf(-0.7) / 0.7 - x.powf(-1.7) / 2.0 + 1.7 * x.powf(-2.7) / 12.0
        };
        assert!((t - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn alternating_tail_matches_direct() {
        let f = |l: usize| (1000.0 + 64.0 * l as f64).powf(-1.5);
        let n = 2_000_000usize;
        // the remainder past an even cut is about half the next term
        let direct: f64 = (0..n).map(|l| if l % 2 == 0 { f(l) } else { -f(l) }).sum::<f64>() + f(n) / 2.0;
        let err = (alternating_tail(f) - direct).abs() / f(0);
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn infinite_power_grid_hits_table_and_tail() {
        // The analytic tail makes the grid match a much longer explicit fold.
        let alpha = 0.5;
        let size = 1 << 10;
        let inf = CoeffSeq::power(alpha, 64).unwrap().with_tail().unwrap();
        let long = CoeffSeq::power(alpha, 1 << 23).unwrap();
        let (gi, _) = lks_weight(&inf, size).unwrap();
        let (gl, _) = lks_weight(&long, size).unwrap();
        let rest = 2.0 * long.tail_sum(0) - 2.0 * inf.sum();
        for m in 0..size {
            let err = gi.samples()[m] - (gl.samples()[m] - rest);
            assert!(err.abs() < 3e-4 * gi.samples()[m], "{m} {err}");
        }
    }

    #[test]
    fn zero_sets() {
        let z = zero_set(&CoeffSeq::from_table(vec![1.0]).unwrap());
        assert_eq!(z.d, 1);
        assert_eq!(z.zeros, vec![Ratio::new(0, 1)]);
        let z = zero_set(&CoeffSeq::from_pairs(&[(2, 1.0), (4, 1.0)]).unwrap());
        assert_eq!(z.d, 2);
        assert_eq!(z.zeros, vec![Ratio::new(0, 1), Ratio::new(1, 2)]);
        assert!((z.angles()[1] - PI).abs() < 1e-15);
        let z = zero_set(&CoeffSeq::from_pairs(&[(3, 1.0), (5, 1.0)]).unwrap());
        assert_eq!(z.d, 1);
        assert_eq!(zero_set(&CoeffSeq::riesz(0.5).unwrap()).d, 1);
    }

    #[test]
    fn integrability_examples() {
        let r = reciprocal_integrable(&CoeffSeq::from_table(vec![1.0]).unwrap(), 1000).unwrap();
        assert_eq!(r.verdict, Verdict::NotIntegrable);
        let r = reciprocal_integrable(&CoeffSeq::riesz(0.5).unwrap(), 1000).unwrap();
        assert_eq!(r.verdict, Verdict::Integrable);
        assert!(r.lower_bound <= r.upper_bound);
        let r = reciprocal_integrable(&CoeffSeq::power_log(0.0, 1000).unwrap().with_tail().unwrap(), 1000)
            .unwrap();
        assert_eq!(r.verdict, Verdict::NotIntegrable);
        let r = reciprocal_integrable(&CoeffSeq::power(1.0, 1000).unwrap().with_tail().unwrap(), 100).unwrap();
        assert_eq!(r.verdict, Verdict::NotIntegrable);
        let r = reciprocal_integrable(&CoeffSeq::from_pairs(&[(2, 1.0), (4, 1.0)]).unwrap(), 100).unwrap();
        assert_eq!((r.d, r.verdict), (2, Verdict::NotIntegrable));
    }

    #[test]
    fn regular_criteria() {
        let x15 = CoeffSeq::custom("x^-1.5", Arc::new(|x: f64| x.powf(-1.5)), 100).unwrap();
        let v = regular_criterion(&x15, RegularCriterion::CubicReciprocal).unwrap();
        assert_eq!(v.verdict, Verdict::Integrable);
        let v = regular_criterion(&x15, RegularCriterion::Decay { gamma: 1.2 }).unwrap();
        assert_eq!(v.verdict, Verdict::Integrable);
        let x2 = CoeffSeq::power_log(0.0, 100).unwrap();
        assert_eq!(
            regular_criterion(&x2, RegularCriterion::CubicReciprocal).unwrap().verdict,
            Verdict::NotIntegrable
        );
        let xl = CoeffSeq::power_log(2.0, 100).unwrap();
        assert_eq!(
            regular_criterion(&xl, RegularCriterion::Decay { gamma: 1.2 }).unwrap().verdict,
            Verdict::Integrable
        );
        let steep = CoeffSeq::custom("x^-2.5", Arc::new(|x: f64| x.powf(-2.5)), 100).unwrap();
        assert!(matches!(
            regular_criterion(&steep, RegularCriterion::CubicReciprocal),
            Err(Error::HypothesisViolation(_))
        ));
        assert!(matches!(
            regular_criterion(&x15, RegularCriterion::Decay { gamma: 2.0 }),
            Err(Error::HypothesisViolation(_))
        ));
        let table = CoeffSeq::from_table(vec![1.0]).unwrap();
        assert!(matches!(regular_criterion(&table, RegularCriterion::CubicReciprocal), Err(Error::Precondition(_))));
    }

    #[test]
    fn a2_constant_weight() {
        let g = WeightGrid::from_fn(1 << 10, |_| 1.0).unwrap();
        let r = a2_report(&g, 8).unwrap();
        assert!((r.sup_product - 1.0).abs() < 1e-12);
        assert_eq!(r.per_level.len(), 9);
    }

    #[test]
    fn schoenberg_zero_weight() {
        let g = WeightGrid::from_fn(64, |_| 0.0).unwrap();
        let r = schoenberg_pd_check(&g, &[1.0]).unwrap();
        assert!((r[0].e0 - 1.0).abs() < 1e-15);
        assert!(r[0].min_coeff.abs() < 1e-15);
    }

    #[test]
    fn profile_rejects_non_monotone() {
        let p = Profile::new("s", Arc::new(|s: f64| s));
        assert!(matches!(synthesize_from_profile(&p, 0.5, 100), Err(Error::HypothesisViolation(_))));
        let q = Profile::new("-s", Arc::new(|s: f64| -s));
        assert!(matches!(synthesize_from_profile(&q, -0.5, 100), Err(Error::HypothesisViolation(_))));
        assert!(synthesize_from_profile(&p, -0.5, 100).is_ok());
    }
}
