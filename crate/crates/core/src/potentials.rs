//! Green kernel `g = ℱ(1/w)`, potential kernel `κ = ℱ(1/√w)`, discrete
//! capacities and equilibrium triples.
//!
//! Kernels are computed over the full grid period `|j| ≤ M/2 − 1`, so that
//! `κ ⋆ κ = g` and the isometry `‖Kx‖_D = ‖x‖` hold up to the grid's own
//! wrap-around rather than up to a kernel cut.

use crate::dirichlet::{seminorm, weighted_quadrature, DirichletMatrix};
use crate::error::{invalid, Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::seqcore::{analyze_samples, convolve, WeightGrid, WindowSeq, C64};
use crate::weights::{lks_weight, reciprocal_integrable, CoeffSeq, Verdict};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRole {
    Green,
    Potential,
}

/// The weight a kernel was computed from.
#[derive(Debug, Clone)]
pub struct KernelSource {
    pub grid: WeightGrid,
    pub coeffs: Option<CoeffSeq>,
}

/// Symmetric nonnegative kernel on `[−N_g, N_g]`, zero outside.
#[derive(Debug, Clone)]
pub struct KernelSeq {
    half_width: usize,
    values: Vec<f64>,
    role: KernelRole,
    pub quasimetric_kappa: Option<f64>,
    source: Option<Arc<KernelSource>>,
    potential: Option<Arc<KernelSeq>>,
}

impl KernelSeq {
    /// Kernel from one-sided values `g_0, g_1, ..., g_N`.
    pub fn from_one_sided(role: KernelRole, one_sided: &[f64]) -> Result<Self> {
        if one_sided.is_empty() {
            return Err(invalid("empty kernel"));
        }
        if one_sided.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("kernel values must be finite and nonnegative"));
        }
        let n = one_sided.len() - 1;
        let values = (0..=2 * n).map(|i| one_sided[i.abs_diff(n)]).collect();
        Ok(Self { half_width: n, values, role, quasimetric_kappa: None, source: None, potential: None })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn role(&self) -> KernelRole {
        self.role
    }

    pub fn get(&self, j: i64) -> f64 {
        let a = j.unsigned_abs() as usize;
        if a > self.half_width {
            0.0
        } else {
            self.values[self.half_width + a]
        }
    }

    /// Values on `[−N_g, N_g]`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_window(&self) -> WindowSeq {
        WindowSeq::new(-(self.half_width as i64), self.values.iter().map(|&v| C64::new(v, 0.0)).collect())
            .expect("kernel window contains 0")
    }

    pub fn source(&self) -> Option<&KernelSource> {
        self.source.as_deref()
    }

    /// The potential kernel `κ` paired with a Green kernel.
    pub fn potential(&self) -> Option<&KernelSeq> {
        self.potential.as_deref()
    }

    /// `‖x‖²_D` for the source weight: the exact double sum when the
    /// coefficients are known, grid quadrature otherwise.
    pub fn dirichlet_norm_sq(&self, x: &WindowSeq) -> Result<f64> {
        let src = self.source().ok_or_else(|| Error::Precondition("kernel has no source weight".into()))?;
        match &src.coeffs {
            Some(c) if x.len() <= 4096 => {
                let n = x.lo().abs().max(x.hi()) as usize;
                seminorm(&DirichletMatrix::toeplitz(n, c.clone()), x, 2.0)
            }
            _ => {
                if x.len() > src.grid.size() {
                    return Err(Error::Resolution(format!("window of {} points exceeds the grid", x.len())));
                }
                Ok(weighted_quadrature(src.grid.samples(), x))
            }
        }
    }

    /// Best quasi-metric constant of `d = 1/g` over differences up to `radius`:
    /// `sup d(a+b) / (d(a) + d(b))`.
    pub fn with_quasimetric(mut self, radius: usize) -> Result<Self> {
        let r = radius.min(self.half_width / 2) as i64;
        if r == 0 {
            return Err(invalid("quasimetric radius must be positive"));
        }
        let d = |j: i64| if j == 0 { 0.0 } else { 1.0 / self.get(j) };
        let mut best: f64 = 1.0;
        for a in -r..=r {
            for b in -r..=r {
                if a == 0 || b == 0 || a + b == 0 {
                    continue;
                }
                let lhs = d(a + b);
                if !lhs.is_finite() {
                    return Err(Error::DegenerateMatrix(format!("kernel vanishes at {}", a + b)));
                }
                best = best.max(lhs / (d(a) + d(b)));
            }
        }
        self.quasimetric_kappa = Some(best);
        Ok(self)
    }
}

const NEGATIVE_TOLERANCE: f64 = 1e-8;

fn kernel_from_samples(samples: &[f64], half_width: usize, role: KernelRole) -> Result<KernelSeq> {
    let table = analyze_samples(samples, half_width);
    let g0 = table.get(0).re;
    let mut one_sided = Vec::with_capacity(half_width + 1);
    let mut clamped = 0usize;
    for j in 0..=half_width as i64 {
        let v = table.get(j).re;
        if v < 0.0 {
            if v < -NEGATIVE_TOLERANCE * g0 {
                return Err(Error::QuadratureResolution(format!(
                    "{role:?} kernel coefficient {j} is {v:.3e} (g0 = {g0:.3e}); retry with a larger grid"
                )));
            }
            clamped += 1;
            one_sided.push(0.0);
        } else {
            one_sided.push(v);
        }
    }
    if clamped > 0 {
        log::info!("{clamped} slightly negative {role:?} kernel entries clamped to 0");
    }
    KernelSeq::from_one_sided(role, &one_sided)
}

/// Kernels `g` and `κ` from a positive weight grid, `N_g ≤ M/2 − 1`.
pub fn kernels_from_grid(grid: &WeightGrid, half_width: usize) -> Result<(KernelSeq, KernelSeq)> {
    kernels_with_source(KernelSource { grid: grid.clone(), coeffs: None }, half_width)
}

fn kernels_with_source(src: KernelSource, half_width: usize) -> Result<(KernelSeq, KernelSeq)> {
    let size = src.grid.size();
    if 2 * half_width >= size {
        return Err(Error::Resolution(format!("kernel half-width {half_width} needs N_g < M/2 = {}", size / 2)));
    }
    if src.grid.min() <= 0.0 {
        return Err(Error::Precondition("weight vanishes on the grid".into()));
    }
    let rec: Vec<f64> = src.grid.samples().iter().map(|w| 1.0 / w).collect();
    let root: Vec<f64> = src.grid.samples().iter().map(|w| 1.0 / w.sqrt()).collect();
    let src = Arc::new(src);
    let mut kappa = kernel_from_samples(&root, half_width, KernelRole::Potential)?;
    kappa.source = Some(src.clone());
    let mut g = kernel_from_samples(&rec, half_width, KernelRole::Green)?;
    g.source = Some(src);
    g.potential = Some(Arc::new(kappa.clone()));
    Ok((g, kappa))
}

/// Green and potential kernels of the LKS weight of `c` on a grid of size `M`.
pub fn green_kernel(c: &CoeffSeq, size: usize, half_width: usize) -> Result<(KernelSeq, KernelSeq)> {
    let r = reciprocal_integrable(c, 10_000)?;
    if r.verdict != Verdict::Integrable {
        return Err(Error::Precondition(format!(
            "1/w must be integrable for {} (verdict {:?})",
            c.label(),
            r.verdict
        )));
    }
    let (grid, _) = lks_weight(c, size)?;
    kernels_with_source(KernelSource { grid, coeffs: Some(c.clone()) }, half_width)
}

const SPARSE_APPLY_LIMIT: usize = 64;

/// `(k ⋆ x)_m = Σ_j k_{m−j} x_j` on the full convolution window.
pub fn apply_potential(k: &KernelSeq, x: &WindowSeq) -> WindowSeq {
    let support = x.support();
    if support.len() > SPARSE_APPLY_LIMIT {
        return convolve(&k.to_window(), x);
    }
    let n = k.half_width as i64;
    apply_sparse(k, x, -n + x.lo(), n + x.hi())
}

/// `k ⋆ x` restricted to `[lo, hi]`, summing only over the support of `x`.
pub fn apply_sparse(k: &KernelSeq, x: &WindowSeq, lo: i64, hi: i64) -> WindowSeq {
    let lo = lo.min(0);
    let hi = hi.max(0);
    let mut out = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for (j, v) in x.iter().filter(|(_, v)| *v != C64::new(0.0, 0.0)) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += v * k.get(lo + i as i64 - j);
        }
    }
    WindowSeq::new(lo, out).expect("window contains 0")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    ActiveSet,
    ProjectedGradient,
    DualLp,
}

/// Dual solution `z ≥ 0` on `J` with `Cap(J) = Σ z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacitySolution {
    pub j_set: Vec<i64>,
    pub z: Vec<f64>,
    pub value: f64,
    pub active_set: Vec<i64>,
    pub method: CapacityMethod,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub j_set: Vec<i64>,
    pub value: f64,
    pub x: WindowSeq,
    pub y: Option<WindowSeq>,
    pub z: WindowSeq,
    pub active_set: Vec<i64>,
    /// `‖x^J‖²_D`
    pub x_energy: f64,
    /// `‖y^J‖²_{l²}`
    pub y_energy: Option<f64>,
    /// relative primal-dual discrepancy `|‖x^J‖²_D − Σz| / Σz`
    pub gap: f64,
    /// `J` lies within `N_g/4` of the kernel window boundary
    pub truncated: bool,
    pub method: CapacityMethod,
    pub iterations: usize,
}

impl CapacityResult {
    /// Violated equilibrium invariants, empty when all hold. `tol` bounds the
    /// relative value identities; pointwise bounds use `1e-8`.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        const PT: f64 = 1e-8;
        let mut out = Vec::new();
        for (j, v) in self.x.iter() {
            if v.re < -PT || v.re > 1.0 + PT {
                out.push(format!("x^J_{j} = {:.3e} outside [0, 1]", v.re));
                break;
            }
        }
        for &j in &self.j_set {
            if (self.x.get(j).re - 1.0).abs() > PT {
                out.push(format!("x^J_{j} = {:.12} is not 1 on J", self.x.get(j).re));
            }
        }
        for (j, v) in self.z.iter() {
            if v.re < -PT {
                out.push(format!("z^J_{j} = {:.3e} negative", v.re));
            }
            if v.re != 0.0 && !self.j_set.contains(&j) {
                out.push(format!("z^J_{j} supported off J"));
            }
        }
        let scale = self.value.abs().max(f64::MIN_POSITIVE);
        if (self.x_energy - self.value).abs() > tol * scale {
            out.push(format!("‖x‖²_D = {:.12e} vs Cap = {:.12e}", self.x_energy, self.value));
        }
        if let Some(e) = self.y_energy {
            if (e - self.value).abs() > tol * scale {
                out.push(format!("‖y‖² = {e:.12e} vs Cap = {:.12e}", self.value));
            }
        }
        let zsum: f64 = self.z.iter().map(|(_, v)| v.re).sum();
        if (zsum - self.value).abs() > tol * scale {
            out.push(format!("Σz = {zsum:.12e} vs Cap = {:.12e}", self.value));
        }
        out
    }
}

fn validate_set(j_set: &[i64], g: &KernelSeq) -> Result<Vec<i64>> {
    let set: BTreeSet<i64> = j_set.iter().copied().collect();
    if set.is_empty() {
        return Err(invalid("capacity of the empty set"));
    }
    let n = g.half_width as i64;
    if let Some(j) = set.iter().find(|j| j.abs() > n) {
        return Err(Error::Precondition(format!("index {j} outside the kernel window")));
    }
    Ok(set.into_iter().collect())
}

fn restricted_gram(g: &KernelSeq, idx: &[i64]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| g.get(idx[a] - idx[b]))
}

fn solve_ones(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let ones = DVector::from_element(m.nrows(), 1.0);
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.solve(&ones));
    }
    m.clone()
        .lu()
        .solve(&ones)
        .ok_or_else(|| Error::DegenerateMatrix("restricted Green matrix is singular".into()))
}

const KKT_TOL: f64 = 1e-12;

/// Active-set solve; `None` on a cycle.
fn active_set(g: &KernelSeq, set: &[i64], warm: Option<&[i64]>) -> Result<Option<(Vec<f64>, Vec<bool>, usize)>> {
    let n = set.len();
    let gm = restricted_gram(g, set);
    let mut active: Vec<bool> = match warm {
        Some(w) => set.iter().map(|j| w.contains(j)).collect(),
        None => vec![true; n],
    };
    if !active.iter().any(|a| *a) {
        active = vec![true; n];
    }
    let mut seen = BTreeSet::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        if !seen.insert(active.clone()) {
            return Ok(None);
        }
        let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        let mut z = vec![0.0; n];
        if !idx.is_empty() {
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| gm[(idx[a], idx[b])]);
            let za = solve_ones(&sub)?;
            for (a, &i) in idx.iter().enumerate() {
                z[i] = za[a];
            }
            let (amin, zmin) = idx.iter().map(|&i| (i, z[i])).fold((usize::MAX, 0.0), |m, p| if p.1 < m.1 { p } else { m });
            if zmin < 0.0 {
                active[amin] = false;
                continue;
            }
        }
        // potential on the inactive part of J must reach 1
        let gz = &gm * DVector::from_vec(z.clone());
        let worst = (0..n).filter(|&i| !active[i]).map(|i| (i, gz[i])).fold((usize::MAX, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m });
        if worst.0 != usize::MAX && worst.1 < 1.0 - KKT_TOL {
            active[worst.0] = true;
            continue;
        }
        return Ok(Some((z, active, iterations)));
    }
}

const PG_MAX_ITER: usize = 1_000_000;

/// Projected gradient on the dual energy `½ zᵀ G_J z − Σ z` over `z ≥ 0`,
/// step `1/L` with `L = λ_max(G_J)`.
fn projected_gradient(g: &KernelSeq, set: &[i64], warm: Option<&[f64]>) -> Result<(Vec<f64>, usize)> {
    let n = set.len();
    let gm = restricted_gram(g, set);
    let l = *hermitian_eigenvalues(&gm).last().expect("nonempty set");
    let mut z = DVector::from_vec(match warm {
        Some(w) => w.iter().map(|v| v.max(0.0)).collect(),
        None => (0..n).map(|i| 1.0 / (n as f64 * gm[(i, i)])).collect(),
    });
    let objective = |z: &DVector<f64>| 0.5 * z.dot(&(&gm * z)) - z.sum();
    let mut f = objective(&z);
    for it in 1..=PG_MAX_ITER {
        let grad = &gm * &z - DVector::from_element(n, 1.0);
        z = (&z - grad / l).map(|v| v.max(0.0));
        let fnew = objective(&z);
        let change = (f - fnew).abs() / fnew.abs().max(f64::MIN_POSITIVE);
        f = fnew;
        if change <= 1e-10 {
            let grad = &gm * &z - DVector::from_element(n, 1.0);
            let kkt = (0..n).map(|i| z[i].min(grad[i]).abs()).fold(0.0, f64::max);
            if kkt <= 1e-11 {
                return Ok((z.iter().copied().collect(), it));
            }
        }
    }
    Err(Error::SolverFailure(format!("projected gradient did not converge in {PG_MAX_ITER} iterations")))
}

const DUAL_LP_LIMIT: usize = 8;

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Vertex enumeration of `max Σz` subject to `z ≥ 0`, `(G_J z) ≤ 1`.
fn dual_lp(g: &KernelSeq, set: &[i64]) -> Result<(Vec<f64>, usize)> {
    let n = set.len();
    if n > DUAL_LP_LIMIT {
        return Err(Error::Precondition(format!("dual_lp enumerates vertices only for |J| ≤ {DUAL_LP_LIMIT}")));
    }
    let gm = restricted_gram(g, set);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut vertices = 0;
    for k in 1..=n {
        let all = subsets(n, k);
        for s in &all {
            for t in &all {
                let sub = DMatrix::from_fn(k, k, |a, b| gm[(t[a], s[b])]);
                let lu = sub.lu();
                if lu.determinant().abs() < 1e-300 {
                    continue;
                }
                let Some(zs) = lu.solve(&DVector::from_element(k, 1.0)) else { continue };
                if zs.iter().any(|v| *v < -1e-12) {
                    continue;
                }
                let mut z = vec![0.0; n];
                for (a, &i) in s.iter().enumerate() {
                    z[i] = zs[a].max(0.0);
                }
                let gz = &gm * DVector::from_vec(z.clone());
                if gz.iter().any(|v| *v > 1.0 + 1e-10) {
                    continue;
                }
                vertices += 1;
                let v: f64 = z.iter().sum();
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, z));
                }
            }
        }
    }
    let (_, z) = best.ok_or_else(|| Error::SolverFailure("no feasible vertex".into()))?;
    Ok((z, vertices))
}

/// Solve for the dual measure of `J` without assembling potentials.
pub fn capacity_value(
    j_set: &[i64],
    g: &KernelSeq,
    method: CapacityMethod,
    warm: Option<&[i64]>,
) -> Result<CapacitySolution> {
    let set = validate_set(j_set, g)?;
    let (z, iterations, method) = match method {
        CapacityMethod::ActiveSet => match active_set(g, &set, warm)? {
            Some((z, _, it)) => (z, it, CapacityMethod::ActiveSet),
            None => {
                log::warn!("active set cycled on |J| = {}; falling back to projected gradient", set.len());
                let (z, it) = projected_gradient(g, &set, None)?;
                (z, it, CapacityMethod::ProjectedGradient)
            }
        },
        CapacityMethod::ProjectedGradient => {
            let (z, it) = projected_gradient(g, &set, None)?;
            (z, it, method)
        }
        CapacityMethod::DualLp => {
            let (z, it) = dual_lp(g, &set)?;
            (z, it, method)
        }
    };
    let value = z.iter().sum();
    let active_set = set.iter().zip(&z).filter(|(_, v)| **v > 0.0).map(|(j, _)| *j).collect();
    Ok(CapacitySolution { j_set: set, z, value, active_set, method, iterations })
}

/// `Cap(J)` with its equilibrium triple `x^J = Gz`, `y^J = Kz`, `z^J`, on the
/// kernel window.
pub fn capacity(j_set: &[i64], g: &KernelSeq, method: CapacityMethod) -> Result<CapacityResult> {
    let sol = capacity_value(j_set, g, method, None)?;
    assemble(&sol, g, g.half_width as i64)
}

/// Equilibrium triple on `[−n, n]`.
pub fn assemble(sol: &CapacitySolution, g: &KernelSeq, n: i64) -> Result<CapacityResult> {
    let lo = *sol.j_set.first().expect("nonempty set");
    let hi = *sol.j_set.last().expect("nonempty set");
    let zw = WindowSeq::from_fn(lo.min(0), hi.max(0), |j| match sol.j_set.binary_search(&j) {
        Ok(i) => C64::new(sol.z[i], 0.0),
        Err(_) => C64::new(0.0, 0.0),
    })?;
    let x = apply_sparse(g, &zw, -n, n);
    let x_energy = match g.source() {
        Some(src) if x.len() <= src.grid.size() => weighted_quadrature(src.grid.samples(), &x),
        _ => x.iter().map(|(j, v)| v.re * zw.get(j).re).sum(),
    };
    let (y, y_energy) = match g.potential() {
        Some(k) => {
            let y = apply_sparse(k, &zw, -n, n);
            let e = y.norm_sq();
            (Some(y), Some(e))
        }
        None => (None, None),
    };
    let edge = (g.half_width as i64 - lo.abs().max(hi.abs())) as f64;
    Ok(CapacityResult {
        j_set: sol.j_set.clone(),
        value: sol.value,
        gap: (x_energy - sol.value).abs() / sol.value.abs().max(f64::MIN_POSITIVE),
        x,
        y,
        z: zw,
        active_set: sol.active_set.clone(),
        x_energy,
        y_energy,
        truncated: edge < g.half_width as f64 / 4.0,
        method: sol.method,
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongCapacitary {
    /// `∫₀^∞ Cap(N_t) t dt`
    pub integral: f64,
    pub norm_sq: f64,
    pub ratio: f64,
    /// `(level a_i, Cap({|x| ≥ a_i}))`, descending in level
    pub levels: Vec<(f64, f64)>,
}

/// `(∫₀^∞ Cap(N_t) t dt) / ‖x‖²_D` with `N_t = {j: |x_j| ≥ t}`, summed exactly
/// over the distinct values of `|x|`.
pub fn strong_capacitary_ratio(x: &WindowSeq, g: &KernelSeq) -> Result<StrongCapacitary> {
    let mut mags: Vec<(f64, i64)> = x.iter().map(|(j, v)| (v.norm(), j)).filter(|p| p.0 > 0.0).collect();
    if mags.is_empty() {
        return Err(invalid("x must be nonzero"));
    }
    mags.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut levels = Vec::new();
    let mut integral = 0.0;
    let mut set: Vec<i64> = Vec::new();
    let mut warm: Option<Vec<i64>> = None;
    let mut i = 0;
    while i < mags.len() {
        let a = mags[i].0;
        while i < mags.len() && mags[i].0 == a {
            set.push(mags[i].1);
            i += 1;
        }
        let next = if i < mags.len() { mags[i].0 } else { 0.0 };
        let sol = match capacity_value(&set, g, CapacityMethod::ActiveSet, warm.as_deref()) {
            Ok(s) => s,
            Err(e) => return Err(e),
        };
        integral += sol.value * (a * a - next * next) / 2.0;
        levels.push((a, sol.value));
        let mut w = sol.active_set.clone();
        w.extend(mags[i..].iter().take_while(|m| m.0 == next).map(|m| m.1));
        warm = Some(w);
    }
    let norm_sq = g.dirichlet_norm_sq(x)?;
    Ok(StrongCapacitary { integral, norm_sq, ratio: integral / norm_sq, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riesz_kernels(alpha: f64, log2m: u32) -> (KernelSeq, KernelSeq) {
        let m = 1usize << log2m;
        green_kernel(&CoeffSeq::riesz(alpha).unwrap(), m, m / 2 - 1).unwrap()
    }

    #[test]
    fn non_integrable_rejected() {
        let c = CoeffSeq::from_table(vec![1.0]).unwrap();
        assert!(matches!(green_kernel(&c, 1 << 10, 100), Err(Error::Precondition(_))));
    }

    #[test]
    fn kernel_basics() {
        let (g, k) = riesz_kernels(0.5, 14);
        assert!(g.values().iter().all(|v| *v >= 0.0));
        assert_eq!(g.get(7), g.get(-7));
        let g0 = g.source().unwrap().grid.reciprocal().unwrap().mean();
        assert!((g.get(0) - g0).abs() < 1e-12 * g0);
        let e0 = apply_potential(&k, &WindowSeq::delta(0));
        for j in [-40i64, 0, 3, 900] {
            assert!((e0.get(j).re - k.get(j)).abs() < 1e-15);
        }
    }

    #[test]
    fn square_of_potential_is_green() {
        let (g, k) = riesz_kernels(0.5, 16);
        let x = WindowSeq::from_real(-2, &[0.3, -1.0, 2.0, 0.5, 0.1]).unwrap();
        let gx = apply_potential(&g, &x);
        let kkx = apply_potential(&k, &apply_potential(&k, &x));
        for j in -50..=50 {
            assert!((gx.get(j) - kkx.get(j)).norm() < 1e-8 * g.get(0), "{j}");
        }
    }

    #[test]
    fn single_point_capacity() {
        let (g, _) = riesz_kernels(0.5, 14);
        let r = capacity(&[0], &g, CapacityMethod::ActiveSet).unwrap();
        assert!((r.value * g.get(0) - 1.0).abs() < 1e-12);
        assert!(r.violations(1e-6).is_empty(), "{:?}", r.violations(1e-6));
    }

    #[test]
    fn methods_agree_and_invariants_hold() {
        let (g, _) = riesz_kernels(0.3, 14);
        for set in [vec![0, 1], vec![-3, 0, 1, 4], vec![-2, -1, 0, 1, 2, 5]] {
            let a = capacity(&set, &g, CapacityMethod::ActiveSet).unwrap();
            let p = capacity(&set, &g, CapacityMethod::ProjectedGradient).unwrap();
            let d = capacity(&set, &g, CapacityMethod::DualLp).unwrap();
            for r in [&a, &p, &d] {
                assert!((r.value - a.value).abs() < 1e-6 * a.value);
                assert!(r.violations(1e-6).is_empty(), "{set:?} {:?}", r.violations(1e-6));
            }
        }
    }

    #[test]
    fn monotone_in_the_set() {
        let (g, _) = riesz_kernels(0.5, 12);
        let a = capacity_value(&[0, 3], &g, CapacityMethod::ActiveSet, None).unwrap().value;
        let b = capacity_value(&[0, 3, 9], &g, CapacityMethod::ActiveSet, None).unwrap().value;
        assert!(a <= b);
    }

    #[test]
    fn strong_ratio_scale_invariant() {
        let (g, _) = riesz_kernels(0.5, 12);
        let r1 = strong_capacitary_ratio(&WindowSeq::delta(0), &g).unwrap();
        let r2 = strong_capacitary_ratio(&WindowSeq::from_real(0, &[3.5]).unwrap(), &g).unwrap();
        assert!((r1.ratio - r2.ratio).abs() < 1e-12 * r1.ratio);
        let cap0 = 1.0 / g.get(0);
        assert!((r1.ratio - cap0 / (2.0 * r1.norm_sq)).abs() < 1e-12);
    }

    #[test]
    fn quasimetric_of_riesz_kernel() {
        let (g, _) = riesz_kernels(0.5, 12);
        let g = g.with_quasimetric(32).unwrap();
        let k = g.quasimetric_kappa.unwrap();
        assert!((1.0..10.0).contains(&k), "{k}");
    }
}
