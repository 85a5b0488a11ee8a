//! Discrete Besov-Dirichlet seminorms `‖x‖^p = Σ_{j,k} c_{j,k} |x_j − x_k|^p`.
//!
//! Toeplitz matrices use `c_{j,k} = c_{|j−k|}/2`, so that the squared seminorm
//! equals `∫ |Σ x_n e^{int}|² w dm` for the LKS weight of `(c_k)`. Sequences
//! are finitely supported and zero-extended; pairs with one index outside the
//! support are part of the sum.

use crate::error::{invalid, Error, Result};
use crate::seqcore::{seq_values, WindowSeq, C64};
use crate::weights::{lks_weight, reciprocal_integrable, zero_set, CoeffSeq, Verdict};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone)]
pub enum MatrixKind {
    /// dense symmetric matrix on the window `[−N, N]`
    General(DMatrix<f64>),
    Toeplitz(CoeffSeq),
}

/// The matrix `(c_{j,k})` on the window `[−N, N]`. Toeplitz matrices extend
/// to all of `ℤ`; general matrices vanish outside the window.
#[derive(Debug, Clone)]
pub struct DirichletMatrix {
    half_width: i64,
    kind: MatrixKind,
}

impl DirichletMatrix {
    pub fn toeplitz(half_width: usize, c: CoeffSeq) -> Self {
        Self { half_width: half_width as i64, kind: MatrixKind::Toeplitz(c) }
    }

    pub fn general(half_width: usize, m: DMatrix<f64>) -> Result<Self> {
        let d = 2 * half_width + 1;
        if m.nrows() != d || m.ncols() != d {
            return Err(invalid(format!("matrix must be {d}x{d} for window half-width {half_width}")));
        }
        for i in 0..d {
            if m[(i, i)] != 0.0 {
                return Err(invalid("diagonal entries must vanish"));
            }
            for j in 0..d {
                let v = m[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(invalid("entries must be finite and nonnegative"));
                }
                if v != m[(j, i)] {
                    return Err(invalid("matrix must be symmetric"));
                }
            }
        }
        Ok(Self { half_width: half_width as i64, kind: MatrixKind::General(m) })
    }

    /// General matrix from `(j, k, value)` triples, symmetrized.
    pub fn general_from_entries(half_width: usize, entries: &[(i64, i64, f64)]) -> Result<Self> {
        let d = 2 * half_width + 1;
        let n = half_width as i64;
        let mut m = DMatrix::zeros(d, d);
        for &(j, k, v) in entries {
            if j.abs() > n || k.abs() > n {
                return Err(invalid(format!("entry ({j}, {k}) outside window")));
            }
            m[((j + n) as usize, (k + n) as usize)] = v;
            m[((k + n) as usize, (j + n) as usize)] = v;
        }
        Self::general(half_width, m)
    }

    /// Dense copy of a Toeplitz matrix on its window.
    pub fn materialize(&self) -> DMatrix<f64> {
        let d = (2 * self.half_width + 1) as usize;
        let n = self.half_width;
        DMatrix::from_fn(d, d, |i, j| self.entry(i as i64 - n, j as i64 - n))
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn kind(&self) -> &MatrixKind {
        &self.kind
    }

    pub fn entry(&self, j: i64, k: i64) -> f64 {
        if j == k {
            return 0.0;
        }
        match &self.kind {
            MatrixKind::Toeplitz(c) => c.coeff((j - k).unsigned_abs() as usize) / 2.0,
            MatrixKind::General(m) => {
                let n = self.half_width;
                if j.abs() > n || k.abs() > n {
                    0.0
                } else {
                    m[((j + n) as usize, (k + n) as usize)]
                }
            }
        }
    }

    /// Largest `|j − k|` with a nonzero entry (`None` for infinite Toeplitz support).
    pub fn bandwidth(&self) -> Option<usize> {
        match &self.kind {
            MatrixKind::Toeplitz(c) => c.support_end(),
            MatrixKind::General(m) => {
                let d = m.nrows();
                let mut b = 0;
                for i in 0..d {
                    for j in 0..d {
                        if m[(i, j)] > 0.0 {
                            b = b.max(i.abs_diff(j));
                        }
                    }
                }
                Some(b)
            }
        }
    }
}

fn check_inside(c: &DirichletMatrix, x: &WindowSeq) -> Result<()> {
    let n = c.half_width;
    match x.support().iter().find(|j| j.abs() > n) {
        Some(j) => Err(Error::Precondition(format!("x_{j} ≠ 0 lies outside the window [−{n}, {n}]"))),
        None => Ok(()),
    }
}

/// `Σ_{j,k∈ℤ} c_{j,k} |x_j − x_k|^p` for zero-extended `x`.
pub fn seminorm(c: &DirichletMatrix, x: &WindowSeq, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("exponent p={p} must be at least 1")));
    }
    check_inside(c, x)?;
    let pw = |z: C64| if p == 2.0 { z.norm_sqr() } else { z.norm().powf(p) };
    Ok(match &c.kind {
        MatrixKind::Toeplitz(cs) => {
            let (lo, hi) = (x.lo(), x.hi());
            let vals = x.values();
            let len = vals.len();
            let reach = cs.support_end().map_or(len - 1, |k| k.min(len - 1));
            let mut inner = 0.0;
            for d in 1..=reach {
                let cd = cs.coeff(d);
                if cd == 0.0 {
                    continue;
                }
                let s: f64 = (0..len - d).map(|i| pw(vals[i] - vals[i + d])).sum();
                // pairs (j, j+d) and (j+d, j), each with weight c_d/2
                inner += cd * s;
            }
            let mut outer = 0.0;
            for (j, v) in x.iter() {
                if v != C64::new(0.0, 0.0) {
                    let left = cs.tail_sum((j - lo) as usize);
                    let right = cs.tail_sum((hi - j) as usize);
                    outer += pw(v) * (left + right);
                }
            }
            inner + outer
        }
        MatrixKind::General(m) => {
            let n = c.half_width;
            let d = m.nrows();
            let mut s = 0.0;
            for i in 0..d {
                let xi = x.get(i as i64 - n);
                for k in 0..d {
                    let v = m[(i, k)];
                    if v > 0.0 {
                        s += v * pw(xi - x.get(k as i64 - n));
                    }
                }
            }
            s
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentInfo {
    pub non_splitting: bool,
    /// gcd of the Toeplitz support
    pub d: Option<usize>,
    /// connected components intersected with the window, each sorted
    pub cosets: Vec<Vec<i64>>,
    /// path `0 = n_0, ..., n_k = n` with nonzero links, per reachable window index
    pub chains: BTreeMap<i64, Vec<i64>>,
    /// union-find on a padded range reproduces the gcd cosets on the window
    pub union_find_agrees: bool,
}

impl ComponentInfo {
    pub fn chain(&self, n: i64) -> Option<&[i64]> {
        self.chains.get(&n).map(|v| v.as_slice())
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            let next = self.0[i];
            self.0[i] = r;
            i = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of the link graph on `[lo, hi]` restricted to `[−n, n]`.
fn link_components(lo: i64, hi: i64, n: i64, link: &dyn Fn(i64, i64) -> bool, steps: &[i64]) -> Vec<Vec<i64>> {
    let size = (hi - lo + 1) as usize;
    let mut uf = UnionFind::new(size);
    for j in lo..=hi {
        for &s in steps {
            let k = j + s;
            if k <= hi && link(j, k) {
                uf.union((j - lo) as usize, (k - lo) as usize);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for j in -n..=n {
        let r = uf.find((j - lo) as usize);
        groups.entry(r).or_default().push(j);
    }
    let mut out: Vec<Vec<i64>> = groups.into_values().collect();
    out.sort();
    out
}

fn bfs_chains(lo: i64, hi: i64, n: i64, link: &dyn Fn(i64, i64) -> bool, steps: &[i64]) -> BTreeMap<i64, Vec<i64>> {
    let size = (hi - lo + 1) as usize;
    let mut prev: Vec<Option<i64>> = vec![None; size];
    let mut seen = vec![false; size];
    let mut queue = VecDeque::new();
    seen[(0 - lo) as usize] = true;
    queue.push_back(0i64);
    while let Some(j) = queue.pop_front() {
        for &s in steps {
            for k in [j + s, j - s] {
                if k < lo || k > hi || seen[(k - lo) as usize] || !link(j, k) {
                    continue;
                }
                seen[(k - lo) as usize] = true;
                prev[(k - lo) as usize] = Some(j);
                queue.push_back(k);
            }
        }
    }
    let mut chains = BTreeMap::new();
    for t in -n..=n {
        if !seen[(t - lo) as usize] {
            continue;
        }
        let mut path = vec![t];
        let mut cur = t;
        while let Some(p) = prev[(cur - lo) as usize] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        chains.insert(t, path);
    }
    chains
}

/// Connectivity of the link graph `{(j, k): c_{j,k} > 0}`.
pub fn components(c: &DirichletMatrix) -> Result<ComponentInfo> {
    let n = c.half_width;
    match &c.kind {
        MatrixKind::General(m) => {
            if m.iter().all(|v| *v == 0.0) {
                return Err(Error::DegenerateMatrix("all entries vanish".into()));
            }
            let steps: Vec<i64> = (1..=2 * n).collect();
            let link = |j: i64, k: i64| c.entry(j, k) > 0.0;
            let cosets = link_components(-n, n, n, &link, &steps);
            let chains = bfs_chains(-n, n, n, &link, &steps);
            Ok(ComponentInfo { non_splitting: cosets.len() == 1, d: None, cosets, chains, union_find_agrees: true })
        }
        MatrixKind::Toeplitz(cs) => {
            let d = zero_set(cs).d;
            let max_step = cs.support_end().unwrap_or(2 * n as usize).min(2 * n as usize).max(1);
            let steps: Vec<i64> =
                (1..=max_step as i64).filter(|&k| cs.coeff(k as usize) > 0.0).collect();
            let pad = (max_step * max_step).min(1 << 12) as i64 + max_step as i64;
            let (lo, hi) = (-n - pad, n + pad);
            let link = |j: i64, k: i64| cs.coeff((j - k).unsigned_abs() as usize) > 0.0;
            let uf = link_components(lo, hi, n, &link, &steps);
            let di = d as i64;
            let cosets: Vec<Vec<i64>> = (0..di)
                .map(|r| (-n..=n).filter(|j| j.rem_euclid(di) == r).collect::<Vec<_>>())
                .filter(|v| !v.is_empty())
                .collect();
            let mut sorted = cosets.clone();
            sorted.sort();
            let chains = bfs_chains(lo, hi, n, &link, &steps);
            Ok(ComponentInfo { non_splitting: d == 1, d: Some(d), union_find_agrees: uf == sorted, cosets, chains })
        }
    }
}

/// `Σ_links c_{link}^{−1/p}` along a chain; bounds `|x_n − x_0| / ‖x‖`.
pub fn chain_constant(c: &DirichletMatrix, chain: &[i64], p: f64) -> f64 {
    chain.windows(2).map(|w| c.entry(w[0], w[1]).powf(-1.0 / p)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Minimality {
    Minimal,
    NotMinimal,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub necessary_series: f64,
    pub sufficient_series: f64,
    pub terms: usize,
    pub verdict: Minimality,
}

/// Minimality of `(e_n)`: the sufficient series converging gives minimal,
/// the necessary series diverging gives not minimal.
pub fn minimality_report(c: &CoeffSeq, n_max: usize) -> Result<MinimalityReport> {
    let r = reciprocal_integrable(c, n_max)?;
    let verdict = match r.verdict {
        Verdict::Integrable => Minimality::Minimal,
        Verdict::NotIntegrable => Minimality::NotMinimal,
        Verdict::Inconclusive => Minimality::Inconclusive,
    };
    Ok(MinimalityReport { necessary_series: r.lower_bound, sufficient_series: r.upper_bound, terms: r.terms, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Grid quadrature of `∫|Σ x_n e^{int}|² w dm` against the Toeplitz double sum.
pub fn parseval_check(c: &CoeffSeq, x: &WindowSeq, size: usize) -> Result<ParsevalCheck> {
    if 4 * x.len() > size {
        return Err(Error::Resolution(format!("window of {} points needs a grid above {size}", x.len())));
    }
    let (grid, _) = lks_weight(c, size)?;
    let lhs = weighted_quadrature(grid.samples(), x);
    let n = x.lo().abs().max(x.hi()) as usize;
    let rhs = seminorm(&DirichletMatrix::toeplitz(n, c.clone()), x, 2.0)?;
    let gap = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
    Ok(ParsevalCheck { lhs, rhs, gap })
}

/// `(1/M) Σ_m w(t_m) |Σ x_n e^{int_m}|²`.
pub fn weighted_quadrature(samples: &[f64], x: &WindowSeq) -> f64 {
    let vals = seq_values(x, samples.len());
    vals.iter().zip(samples).map(|(v, w)| w * v.norm_sqr()).sum::<f64>() / samples.len() as f64
}

fn shifted(x: &WindowSeq) -> WindowSeq {
    WindowSeq::from_fn(x.lo().min(0), x.hi() + 1, |j| x.get(j - 1)).expect("window contains 0")
}

/// Whether the shift preserves the seminorm on `trials` random vectors
/// supported away from the window edge by the bandwidth.
pub fn shift_isometry_check(c: &DirichletMatrix, trials: usize, seed: u64) -> Result<bool> {
    let n = c.half_width;
    let band = c.bandwidth().map_or(0, |b| b as i64);
    let (mut lo, mut hi) = (-n + band, n - 1 - band);
    if lo > hi {
        lo = -n;
        hi = n - 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let vals: Vec<C64> = (-n..=n)
            .map(|j| {
                if j >= lo && j <= hi {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let x = WindowSeq::new(-n, vals)?;
        let sx = shifted(&x).rewindow(-n, n)?;
        let a = seminorm(c, &x, 2.0)?;
        let b = seminorm(c, &sx, 2.0)?;
        if (a - b).abs() > 1e-10 * a.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(‖x̄‖, ‖x‖)` for the unit clamp `x̄ = min(max(Re x, 0), 1)`, `p = 2`.
pub fn contraction_check(c: &DirichletMatrix, x: &WindowSeq) -> Result<(f64, f64)> {
    let clamped = x.map(|_, v| C64::new(v.re.clamp(0.0, 1.0), 0.0))?;
    Ok((seminorm(c, &clamped, 2.0)?.sqrt(), seminorm(c, x, 2.0)?.sqrt()))
}

/// Mean of `‖(e^{ijθ} x_j)‖²` over `θ = 2πl/L`.
pub fn rotation_average(c: &DirichletMatrix, x: &WindowSeq, points: usize) -> Result<f64> {
    let mut s = 0.0;
    for l in 0..points {
        let th = 2.0 * std::f64::consts::PI * l as f64 / points as f64;
        let xt = x.map(|j, v| v * C64::from_polar(1.0, j as f64 * th))?;
        s += seminorm(c, &xt, 2.0)?;
    }
    Ok(s / points as f64)
}

/// `Σ_{j,k} c_{j,k} (|x_j|² + |x_k|²)`.
pub fn diagonal_mass(c: &DirichletMatrix, x: &WindowSeq) -> Result<f64> {
    check_inside(c, x)?;
    Ok(match &c.kind {
        MatrixKind::Toeplitz(cs) => 2.0 * cs.sum() * x.norm_sq(),
        MatrixKind::General(_) => {
            let n = c.half_width;
            let mut s = 0.0;
            for j in -n..=n {
                let row: f64 = (-n..=n).map(|k| c.entry(j, k)).sum();
                s += 2.0 * row * x.get(j).norm_sqr();
            }
            s
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> CoeffSeq {
        CoeffSeq::from_table(vec![1.0]).unwrap()
    }

    fn nearest_neighbour(n: usize) -> DirichletMatrix {
        let ni = n as i64;
        let e: Vec<_> = (-ni..ni).map(|k| (k, k + 1, 1.0)).collect();
        DirichletMatrix::general_from_entries(n, &e).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let t = DirichletMatrix::toeplitz(4, c1());
        let x = WindowSeq::from_real(-2, &[3.0; 5]).unwrap();
        assert!(seminorm(&t, &x.rewindow(-2, 2).unwrap(), 2.0).unwrap() > 0.0);
        let flat = WindowSeq::from_real(-4, &[1.5; 9]).unwrap();
        let g = nearest_neighbour(4);
        assert_eq!(seminorm(&g, &flat, 2.0).unwrap(), 0.0);
        assert_eq!(seminorm(&t, &WindowSeq::delta(0), 2.0).unwrap(), 2.0);
        assert_eq!(seminorm(&g, &WindowSeq::delta(0), 1.0).unwrap(), 4.0);
        assert!(seminorm(&t, &WindowSeq::delta(7), 2.0).is_err());
    }

    #[test]
    fn toeplitz_matches_materialized_double_sum() {
        let cs = CoeffSeq::power(0.5, 6).unwrap();
        let t = DirichletMatrix::toeplitz(20, cs);
        let g = DirichletMatrix::general(20, t.materialize()).unwrap();
        let x = WindowSeq::from_fn(-3, 4, |j| C64::new((j as f64).sin(), 0.5 * j as f64)).unwrap();
        let a = seminorm(&t, &x, 2.0).unwrap();
        let b = seminorm(&g, &x, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let a3 = seminorm(&t, &x, 3.0).unwrap();
        let b3 = seminorm(&g, &x, 3.0).unwrap();
        assert!((a3 - b3).abs() < 1e-12 * a3);
    }

    #[test]
    fn component_examples() {
        let i = components(&DirichletMatrix::toeplitz(6, c1())).unwrap();
        assert!(i.non_splitting && i.d == Some(1) && i.union_find_agrees);
        let c24 = CoeffSeq::from_pairs(&[(2, 1.0), (4, 1.0)]).unwrap();
        let i = components(&DirichletMatrix::toeplitz(6, c24)).unwrap();
        assert_eq!(i.d, Some(2));
        assert!(!i.non_splitting && i.union_find_agrees);
        assert_eq!(i.cosets.len(), 2);
        assert!(i.cosets.iter().any(|c| c.contains(&0) && c.iter().all(|j| j % 2 == 0)));
        let g = DirichletMatrix::general_from_entries(5, &[(0, 5, 1.0)]).unwrap();
        let i = components(&g).unwrap();
        assert!(!i.non_splitting);
        assert!(i.cosets.contains(&vec![0, 5]));
        assert_eq!(i.cosets.len(), 10);
        let z = DirichletMatrix::general(1, DMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(components(&z), Err(Error::DegenerateMatrix(_))));
    }

    #[test]
    fn bezout_chain() {
        let c35 = CoeffSeq::from_pairs(&[(3, 1.0), (5, 1.0)]).unwrap();
        let t = DirichletMatrix::toeplitz(8, c35);
        let i = components(&t).unwrap();
        assert!(i.non_splitting && i.union_find_agrees);
        let ch = i.chain(1).unwrap();
        assert_eq!((ch[0], *ch.last().unwrap()), (0, 1));
        assert!(ch.windows(2).all(|w| t.entry(w[0], w[1]) > 0.0));
    }

    #[test]
    fn minimality_examples() {
        let r = minimality_report(&CoeffSeq::riesz(0.5).unwrap(), 1000).unwrap();
        assert_eq!(r.verdict, Minimality::Minimal);
        let r = minimality_report(&CoeffSeq::riesz(1.5).unwrap(), 1000).unwrap();
        assert_eq!(r.verdict, Minimality::NotMinimal);
        let r = minimality_report(&c1(), 1000).unwrap();
        assert_eq!(r.verdict, Minimality::NotMinimal);
    }

    #[test]
    fn parseval_delta() {
        let r = parseval_check(&c1(), &WindowSeq::delta(0), 64).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-13 && (r.rhs - 2.0).abs() < 1e-13);
    }

    #[test]
    fn shift_isometry_examples() {
        let t = DirichletMatrix::toeplitz(10, CoeffSeq::power(0.5, 40).unwrap());
        assert!(shift_isometry_check(&t, 5, 1).unwrap());
        assert!(shift_isometry_check(&nearest_neighbour(10), 5, 2).unwrap());
        let mut m = t.materialize();
        m[(10, 11)] += 0.1;
        m[(11, 10)] += 0.1;
        let p = DirichletMatrix::general(10, m).unwrap();
        assert!(!shift_isometry_check(&p, 5, 3).unwrap());
    }

    #[test]
    fn contraction_examples() {
        let t = DirichletMatrix::toeplitz(4, CoeffSeq::power(0.5, 10).unwrap());
        let x = WindowSeq::from_real(-1, &[0.2, 0.9, 0.4]).unwrap();
        let (a, b) = contraction_check(&t, &x).unwrap();
        assert_eq!(a, b);
        let two = WindowSeq::from_real(0, &[2.0]).unwrap();
        let (a, b) = contraction_check(&t, &two).unwrap();
        assert!((2.0 * a - b).abs() < 1e-14);
    }

    #[test]
    fn rotation_identity() {
        let t = DirichletMatrix::toeplitz(5, CoeffSeq::power(0.3, 50).unwrap().with_tail().unwrap());
        let x = WindowSeq::from_fn(-2, 3, |j| C64::new(1.0 + j as f64, -0.5)).unwrap();
        let avg = rotation_average(&t, &x, 16).unwrap();
        let mass = diagonal_mass(&t, &x).unwrap();
        assert!((avg - mass).abs() < 1e-10 * mass);
    }
}
