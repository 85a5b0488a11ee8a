//! Windowed sequences on the integers, midpoint grids on the circle, the
//! Fourier bridge between the two, Gram matrices and convolution.

use crate::error::{invalid, Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

pub type C64 = Complex64;

/// Default grid size for weight grids.
pub const DEFAULT_GRID_LOG2: u32 = 20;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Finitely supported sequence `x_j`, stored on `[lo, hi]` with `lo <= 0 <= hi`.
/// Values outside the window are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSeq {
    lo: i64,
    values: Vec<C64>,
}

impl WindowSeq {
    pub fn new(lo: i64, values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("empty window"));
        }
        let hi = lo + values.len() as i64 - 1;
        if lo > 0 || hi < 0 {
            return Err(invalid(format!("window [{lo}, {hi}] must contain 0")));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("non-finite value in sequence"));
        }
        Ok(Self { lo, values })
    }

    pub fn from_real(lo: i64, values: &[f64]) -> Result<Self> {
        Self::new(lo, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(lo: i64, hi: i64, f: impl Fn(i64) -> C64) -> Result<Self> {
        if lo > hi {
            return Err(invalid(format!("window [{lo}, {hi}] is empty")));
        }
        Self::new(lo, (lo..=hi).map(f).collect())
    }

    pub fn zeros(lo: i64, hi: i64) -> Result<Self> {
        Self::from_fn(lo, hi, |_| ZERO)
    }

    /// The unit vector `e_n`.
    pub fn delta(n: i64) -> Self {
        let lo = n.min(0);
        let hi = n.max(0);
        let mut values = vec![ZERO; (hi - lo + 1) as usize];
        values[(n - lo) as usize] = C64::new(1.0, 0.0);
        Self { lo, values }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Value at index `j`, zero outside the window.
    pub fn get(&self, j: i64) -> C64 {
        let off = j - self.lo;
        if off < 0 || off >= self.values.len() as i64 {
            ZERO
        } else {
            self.values[off as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.lo + i as i64, v))
    }

    /// Same sequence on the window `[lo, hi]` (zero padding or truncation).
    pub fn rewindow(&self, lo: i64, hi: i64) -> Result<Self> {
        Self::from_fn(lo, hi, |j| self.get(j))
    }

    pub fn map(&self, f: impl Fn(i64, C64) -> C64) -> Result<Self> {
        Self::new(self.lo, self.iter().map(|(j, v)| f(j, v)).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Indices with nonzero value.
    pub fn support(&self) -> Vec<i64> {
        self.iter().filter(|(_, v)| *v != ZERO).map(|(j, _)| j).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Fourier coefficient table `h(n)` for `|n| <= range`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffTable {
    range: usize,
    values: Vec<C64>,
}

impl CoeffTable {
    pub fn new(range: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != 2 * range + 1 {
            return Err(invalid(format!(
                "table of range {range} needs {} values, got {}",
                2 * range + 1,
                values.len()
            )));
        }
        Ok(Self { range, values })
    }

    pub fn from_fn(range: usize, f: impl Fn(i64) -> C64) -> Self {
        let r = range as i64;
        Self { range, values: (-r..=r).map(f).collect() }
    }

    /// Real even table from `h(0), h(1), ...`.
    pub fn from_even(one_sided: &[f64]) -> Result<Self> {
        if one_sided.is_empty() {
            return Err(invalid("empty coefficient list"));
        }
        let range = one_sided.len() - 1;
        Ok(Self::from_fn(range, |n| C64::new(one_sided[n.unsigned_abs() as usize], 0.0)))
    }

    pub fn range(&self) -> usize {
        self.range
    }

    /// Coefficient at `n`; zero beyond the stored range.
    pub fn get(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.range {
            ZERO
        } else {
            self.values[(n + self.range as i64) as usize]
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let r = self.range as i64;
        self.values.iter().enumerate().map(move |(i, &v)| (i as i64 - r, v))
    }

    /// `max |h(-n) - conj h(n)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let r = self.range as i64;
        (0..=r).map(|n| (self.get(-n) - self.get(n).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn restrict(&self, range: usize) -> Result<Self> {
        if range > self.range {
            return Err(Error::InsufficientRange { have: self.range, need: range });
        }
        Ok(Self::from_fn(range, |n| self.get(n)))
    }

    pub fn to_window(&self) -> WindowSeq {
        WindowSeq { lo: -(self.range as i64), values: self.values.clone() }
    }
}

/// Midpoint node `t_m = 2π(m + 1/2)/M − π`.
pub fn node(m: usize, size: usize) -> f64 {
    2.0 * PI * (m as f64 + 0.5) / size as f64 - PI
}

/// `exp(i n (π/M − π))`, the phase that moves a DFT onto midpoint nodes.
pub(crate) fn node_phase(n: i64, size: usize) -> C64 {
    let two_m = 2 * size as i64;
    let r = n.rem_euclid(two_m);
    let ang = PI * (r as f64 / size as f64);
    let (s, c) = ang.sin_cos();
    let z = C64::new(c, s);
    if n.rem_euclid(2) == 0 {
        z
    } else {
        -z
    }
}

/// Nonnegative weight sampled at midpoint nodes of a power-of-two grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightGrid {
    samples: Vec<f64>,
    #[serde(skip)]
    coeff_cache: Option<CoeffTable>,
}

impl WeightGrid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let m = samples.len();
        if m < 4 || !m.is_power_of_two() {
            return Err(invalid(format!("grid size {m} must be a power of two >= 4")));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(invalid(format!("grid sample {bad} is not a nonnegative number")));
        }
        Ok(Self { samples, coeff_cache: None })
    }

    pub fn from_fn(size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..size).map(|m| f(node(m, size))).collect())
    }

    pub fn size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn node(&self, m: usize) -> f64 {
        node(m, self.size())
    }

    /// Quadrature of the weight against normalized Lebesgue measure.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.size() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    /// Attach an analyzed coefficient table of the given range.
    pub fn with_coeff_cache(mut self, range: usize) -> Result<Self> {
        self.coeff_cache = Some(analyze(&self, range)?);
        Ok(self)
    }

    pub fn coeff_cache(&self) -> Option<&CoeffTable> {
        self.coeff_cache.as_ref()
    }

    /// `w(-t)`; the midpoint grid is symmetric, `t_{M-1-m} = -t_m`.
    pub fn reflect(&self) -> Self {
        Self { samples: self.samples.iter().rev().copied().collect(), coeff_cache: None }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|&s| f(s)).collect())
    }

    /// `1/w`; requires strictly positive samples.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.min() <= 0.0 {
            return Err(Error::Precondition("weight vanishes on a grid node".into()));
        }
        self.map(|s| 1.0 / s)
    }
}

fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

/// Signed frequency stored at DFT slot `r`.
fn slot_frequency(r: usize, size: usize) -> i64 {
    if r < size / 2 {
        r as i64
    } else {
        r as i64 - size as i64
    }
}

/// All `M` quadrature coefficients of a real grid function, slot `r` holding
/// frequency `r` for `r < M/2` and `r − M` otherwise.
pub fn spectrum(samples: &[f64]) -> Vec<C64> {
    let size = samples.len();
    let mut buf: Vec<C64> = samples.iter().map(|&s| C64::new(s, 0.0)).collect();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / size as f64;
    for (r, v) in buf.iter_mut().enumerate() {
        let n = slot_frequency(r, size);
        *v = *v * node_phase(n, size).conj() * scale;
    }
    buf
}

fn table_from_spectrum(spec: &[C64], range: usize) -> CoeffTable {
    let size = spec.len();
    CoeffTable::from_fn(range, |n| spec[n.rem_euclid(size as i64) as usize])
}

/// Quadrature Fourier coefficients `h(n) = (1/M) Σ h(t_m) e^{−i n t_m}`, `|n| <= range`.
pub fn analyze(grid: &WeightGrid, range: usize) -> Result<CoeffTable> {
    if 4 * range >= grid.size() {
        return Err(Error::Resolution(format!(
            "range {range} needs a grid larger than {} (range < M/4)",
            grid.size()
        )));
    }
    Ok(analyze_samples(grid.samples(), range))
}

/// As [`analyze`] but allowing any `range < M/2`. Entries above `M/4` carry
/// the aliasing of the grid and are used where the full period matters.
pub fn analyze_samples(samples: &[f64], range: usize) -> CoeffTable {
    assert!(2 * range < samples.len(), "range must stay below M/2");
    table_from_spectrum(&spectrum(samples), range)
}

/// Values `Σ_n a_n e^{i n t_m}` of a coefficient sequence on the midpoint grid.
/// Exact for any support length: frequencies are folded onto the grid.
pub fn trig_values(coeffs: impl IntoIterator<Item = (i64, C64)>, size: usize) -> Vec<C64> {
    assert!(size.is_power_of_two(), "grid size must be a power of two");
    let mut buf = vec![ZERO; size];
    for (n, a) in coeffs {
        if a != ZERO {
            buf[n.rem_euclid(size as i64) as usize] += a * node_phase(n, size);
        }
    }
    fft_in_place(&mut buf, true);
    buf
}

/// Trigonometric polynomial `Σ x_n e^{i n t}` of a window sequence on the grid.
pub fn seq_values(x: &WindowSeq, size: usize) -> Vec<C64> {
    trig_values(x.iter(), size)
}

/// Grid function with the given coefficients. The table must be Hermitian so
/// the function is real; tiny negative roundoff is clamped to zero.
pub fn synthesize(table: &CoeffTable, size: usize) -> Result<WeightGrid> {
    let defect = table.hermitian_defect();
    if defect > 1e-12 * table.max_abs().max(1e-300) {
        return Err(Error::ConjugateSymmetry(defect));
    }
    let vals = trig_values(table.iter(), size);
    let scale = table.max_abs() * (2 * table.range() + 1) as f64;
    let mut samples = Vec::with_capacity(size);
    for v in vals {
        if v.re < -1e-12 * scale {
            return Err(invalid(format!("table synthesizes a negative value {:.3e}", v.re)));
        }
        samples.push(v.re.max(0.0));
    }
    WeightGrid::new(samples)
}

/// Toeplitz Gram matrix `G[n][m] = h(n − m)` on `[−N, N]`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    half_width: usize,
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl GramMatrix {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Real part, for real even weights.
    pub fn real(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }
}

pub fn gram(table: &CoeffTable, half_width: usize) -> Result<GramMatrix> {
    if table.range() < 2 * half_width {
        return Err(Error::InsufficientRange { have: table.range(), need: 2 * half_width });
    }
    let d = 2 * half_width + 1;
    let matrix = DMatrix::from_fn(d, d, |i, j| table.get(i as i64 - j as i64));
    let hermitian = table.restrict(2 * half_width)?.hermitian_defect() <= 1e-14 * table.max_abs();
    Ok(GramMatrix { half_width, matrix, hermitian })
}

const DIRECT_CONVOLVE_LIMIT: usize = 1 << 14;

/// Full linear convolution `(a ⋆ b)_n = Σ_j a_j b_{n−j}`.
pub fn convolve(a: &WindowSeq, b: &WindowSeq) -> WindowSeq {
    let (la, lb) = (a.len(), b.len());
    let len = la + lb - 1;
    let lo = a.lo() + b.lo();
    let values = if la * lb <= DIRECT_CONVOLVE_LIMIT {
        let mut out = vec![ZERO; len];
        for (i, &x) in a.values().iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (j, &y) in b.values().iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    } else {
        let size = len.next_power_of_two();
        let mut fa = vec![ZERO; size];
        let mut fb = vec![ZERO; size];
        fa[..la].copy_from_slice(a.values());
        fb[..lb].copy_from_slice(b.values());
        fft_in_place(&mut fa, false);
        fft_in_place(&mut fb, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= *y;
        }
        fft_in_place(&mut fa, true);
        let scale = 1.0 / size as f64;
        fa.truncate(len);
        fa.iter_mut().for_each(|v| *v *= scale);
        fa
    };
    WindowSeq { lo, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn constant_grid_analyzes_to_delta() {
        let g = WeightGrid::from_fn(64, |_| 1.0).unwrap();
        let t = analyze(&g, 15).unwrap();
        assert!(close(t.get(0), C64::new(1.0, 0.0), 1e-14));
        for n in 1..=15 {
            assert!(t.get(n).norm() < 1e-14 && t.get(-n).norm() < 1e-14);
        }
    }

    #[test]
    fn one_minus_exp_squared() {
        let g = WeightGrid::from_fn(256, |t| (C64::new(1.0, 0.0) - C64::new(0.0, t).exp()).norm_sqr())
            .unwrap();
        let t = analyze(&g, 10).unwrap();
        assert!(close(t.get(0), C64::new(2.0, 0.0), 1e-13));
        assert!(close(t.get(1), C64::new(-1.0, 0.0), 1e-13));
        assert!(close(t.get(-1), C64::new(-1.0, 0.0), 1e-13));
        for n in 2..=10 {
            assert!(t.get(n).norm() < 1e-13);
        }
    }

    #[test]
    fn analyze_rejects_large_range() {
        let g = WeightGrid::from_fn(64, |_| 1.0).unwrap();
        assert!(matches!(analyze(&g, 16), Err(Error::Resolution(_))));
    }

    #[test]
    fn synthesize_sin_squared() {
        let t = CoeffTable::from_even(&[2.0, -1.0]).unwrap();
        let g = synthesize(&t, 1024).unwrap();
        for m in 0..1024 {
            let x = (g.node(m) / 2.0).sin();
            assert!((g.samples()[m] - 4.0 * x * x).abs() < 1e-12);
        }
        let one = synthesize(&CoeffTable::from_even(&[1.0]).unwrap(), 16).unwrap();
        assert!(one.samples().iter().all(|&s| (s - 1.0).abs() < 1e-15));
    }

    #[test]
    fn synthesize_rejects_non_hermitian() {
        let t = CoeffTable::new(1, vec![C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(0.5, 0.0)])
            .unwrap();
        assert!(matches!(synthesize(&t, 64), Err(Error::ConjugateSymmetry(_))));
    }

    #[test]
    fn midpoint_nodes_avoid_zero() {
        for m in 0..1024 {
            assert!(node(m, 1024).abs() > 1e-6);
        }
        assert!((node(0, 8) + node(7, 8)).abs() < 1e-15);
    }

    #[test]
    fn gram_identity_and_lks() {
        let id = gram(&CoeffTable::from_even(&[1.0, 0.0, 0.0]).unwrap(), 1).unwrap();
        assert_eq!(id.real(), DMatrix::<f64>::identity(3, 3));
        let t = CoeffTable::from_even(&[3.0, -1.0, -0.5, 0.0, 0.0]).unwrap();
        let g = gram(&t, 2).unwrap();
        assert!(g.is_hermitian());
        assert_eq!(g.real()[(0, 0)], 3.0);
        assert_eq!(g.real()[(0, 2)], -0.5);
        assert!(gram(&t, 3).is_err());
    }

    #[test]
    fn delta_convolutions() {
        let x = WindowSeq::from_real(-2, &[1.0, -2.0, 3.0, 0.5]).unwrap();
        let y = convolve(&WindowSeq::delta(0), &x);
        for j in -3..4 {
            assert!(close(y.get(j), x.get(j), 1e-15));
        }
        let e3 = convolve(&WindowSeq::delta(1), &WindowSeq::delta(2));
        assert!(close(e3.get(3), C64::new(1.0, 0.0), 1e-15));
        assert_eq!(e3.support(), vec![3]);
    }

    #[test]
    fn fft_convolution_matches_direct() {
        let a = WindowSeq::from_fn(-150, 140, |j| C64::new((j as f64 * 0.37).sin(), (j as f64).cos()))
            .unwrap();
        let b = WindowSeq::from_fn(-90, 100, |j| C64::new((j as f64 * 0.11).cos(), 0.3)).unwrap();
        let fast = convolve(&a, &b);
        let ba = convolve(&b, &a);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for n in fast.lo()..=fast.hi() {
            let mut s = ZERO;
            for j in a.lo()..=a.hi() {
                s += a.get(j) * b.get(n - j);
            }
            err = err.max((s - fast.get(n)).norm());
            scale = scale.max(s.norm());
            assert!((fast.get(n) - ba.get(n)).norm() <= 1e-13 * scale.max(1.0));
        }
        assert!(err <= 1e-12 * scale);
    }
}
