//! The audit suite: one check per acceptance criterion, each seeded from the
//! run seed so that a fixed seed gives a fixed report.
//!
//! Criteria with a time budget fold the budget into the verdict; elapsed
//! times are logged, never reported, to keep reports byte-identical.

use crate::config::RunConfig;
use crate::report::{Report, Series};
use crate::CliError;
use lksmult::multipliers::{
    capacitary_constant, embedding_constant, quasimetric_report, random_nu, riesz_kernel, slp_bounds,
    EmbeddingRoute, Strategy,
};
use lksmult::potentials::{capacity, green_kernel, strong_capacitary_ratio, CapacityMethod, KernelSeq};
use lksmult::seqcore::{analyze, convolve};
use lksmult::singular::{
    composite_weight, polygon_structure, theorem53_check, theorem59_adjust, Theorem53Params,
};
use lksmult::spectra::{
    eigen_residual, resolvent_probe, slp_failure_demo, winding_number, NuMeasure, SymbolSpec, DEFAULT_ATOMS,
};
use lksmult::weights::{lks_weight, reciprocal_quadrature};
use lksmult::{CoeffSeq, CutoffSpec, MultiplierSpec, SingularitySet, WindowSeq, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

/// Identifiers and titles of the audited criteria.
pub const CRITERIA: [(u32, &str); 14] = [
    (1, "closed-form Fourier table"),
    (2, "closed-form weight for c_k = 1/k^2"),
    (3, "Parseval identity"),
    (4, "kernel identities"),
    (5, "capacity solver cross-validation"),
    (6, "single-point capacity"),
    (7, "strong capacitary inequality"),
    (8, "embedding sandwich"),
    (9, "quasi-metric reduction"),
    (10, "pointwise inverse inequality"),
    (11, "two-singularity thresholds"),
    (12, "polygon structure"),
    (13, "composite weight"),
    (14, "hidden spectrum"),
];

/// Criteria whose stated threshold the converged numerics cannot meet; they
/// are computed faithfully and reported as failures.
pub const KNOWN_UNATTAINABLE: [u32; 2] = [4, 11];

/// Frozen subset/interval energy-constant ratio `c(κ)` for the Riesz kernel
/// `α = 1/2` on `[−6, 6]`, from the brute-force oracle at seed 0.
pub const QUASI_C_REC: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub known_unattainable: bool,
    pub metrics: BTreeMap<&'static str, f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub passed: usize,
    pub failed: usize,
}

struct Outcome {
    passed: bool,
    metrics: BTreeMap<&'static str, f64>,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, metrics: BTreeMap::new(), detail: detail.into() }
    }

    fn metric(mut self, name: &'static str, v: f64) -> Self {
        self.metrics.insert(name, v);
        self
    }
}

type Res = Result<Outcome, CliError>;

fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(id as u64))
}

fn within(t0: Instant, budget: Duration, id: u32) -> bool {
    let e = t0.elapsed();
    log::info!("criterion {id}: {:.2} s", e.as_secs_f64());
    e <= budget
}

fn riesz_green(alpha: f64, log2m: u32) -> Result<(KernelSeq, KernelSeq), CliError> {
    let m = 1usize << log2m;
    Ok(green_kernel(&CoeffSeq::riesz(alpha)?, m, m / 2 - 1)?)
}

/// Run one criterion.
pub fn run_criterion(id: u32, seed: u64) -> Result<CriterionOutcome, CliError> {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .ok_or_else(|| CliError::Config(format!("no criterion {id}; the audit covers 1..=14")))?;
    let mut rng = rng_for(seed, id);
    let o = match id {
        1 => c1_fourier_table(&mut rng)?,
        2 => c2_closed_form()?,
        3 => c3_parseval(&mut rng)?,
        4 => c4_kernels()?,
        5 => c5_capacity()?,
        6 => c6_single_point()?,
        7 => c7_strong_capacitary(&mut rng)?,
        8 => c8_sandwich(&mut rng)?,
        9 => c9_quasimetric(&mut rng)?,
        10 => c10_slp(&mut rng)?,
        11 => c11_thresholds()?,
        12 => c12_polygon()?,
        13 => c13_composite()?,
        _ => c14_spectrum(&mut rng)?,
    };
    Ok(CriterionOutcome {
        id,
        title,
        passed: o.passed,
        known_unattainable: KNOWN_UNATTAINABLE.contains(&id),
        metrics: o.metrics,
        detail: o.detail,
    })
}

pub fn run_audit(ids: &[u32], seed: u64) -> Result<AuditReport, CliError> {
    let ids: Vec<u32> = if ids.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { ids.to_vec() };
    let criteria = ids.iter().map(|&id| run_criterion(id, seed)).collect::<Result<Vec<_>, _>>()?;
    let passed = criteria.iter().filter(|c| c.passed).count();
    Ok(AuditReport { seed, failed: criteria.len() - passed, passed, criteria })
}

pub fn cmd_audit(cfg: &RunConfig) -> Result<Report, CliError> {
    let rep = run_audit(&cfg.audit.criteria, cfg.seed)?;
    for c in &rep.criteria {
        eprintln!("{}", summary_line(c));
    }
    let mut series = Series::new(&["id", "title", "passed", "known_unattainable"]);
    for c in &rep.criteria {
        series.push(vec![c.id.to_string(), c.title.into(), c.passed.to_string(), c.known_unattainable.to_string()]);
    }
    Ok(Report::new(cfg, &rep)?.with_series(series))
}

/// `criterion 7 PASS  strong capacitary inequality  max_ratio=...`
pub fn summary_line(c: &CriterionOutcome) -> String {
    let verdict = match (c.passed, c.known_unattainable) {
        (true, _) => "PASS",
        (false, true) => "FAIL (known unattainable)",
        (false, false) => "FAIL",
    };
    let metrics: Vec<String> = c.metrics.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
    format!("criterion {:>2} {verdict}  {}  {}  [{}]", c.id, c.title, metrics.join(" "), c.detail)
}

fn c1_fourier_table(rng: &mut ChaCha8Rng) -> Res {
    let t0 = Instant::now();
    let size = 1 << 20;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let k = rng.random_range(1..=1000usize);
        let vals: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = vals.iter().sum();
        let c = CoeffSeq::from_table(vals.clone())?;
        let (grid, _) = lks_weight(&c, size)?;
        let quad = analyze(&grid, k)?;
        for n in -(k as i64)..=k as i64 {
            let exact = if n == 0 { 2.0 * total } else { -vals[n.unsigned_abs() as usize - 1] };
            worst = worst.max((quad.get(n).re - exact).abs().max(quad.get(n).im.abs()) / exact.abs());
        }
    }
    let fast = within(t0, Duration::from_secs(30), 1);
    Ok(Outcome::new(worst <= 1e-10 && fast, "50 tables, M = 2^20, budget 30 s").metric("max_rel_error", worst))
}

fn c2_closed_form() -> Res {
    let k = 100_000usize;
    let c = CoeffSeq::from_table((1..=k).map(|j| 1.0 / (j as f64).powi(2)).collect())?;
    let (grid, _) = lks_weight(&c, 1 << 16)?;
    let dev = (0..grid.size())
        .map(|m| {
            let x = grid.node(m).abs() / (2.0 * PI);
            (grid.samples()[m] - 2.0 * PI * PI * x * (1.0 - x)).abs()
        })
        .fold(0.0, f64::max);
    let at_pi: f64 = (1..=k).map(|j| 4.0 * c.coeff(j) * (j as f64 * PI / 2.0).sin().powi(2)).sum();
    let pi_err = (at_pi - PI * PI / 2.0).abs();
    Ok(Outcome::new(dev <= 1e-4 && pi_err <= 1e-4, "K = 10^5, M = 2^16")
        .metric("max_deviation", dev)
        .metric("error_at_pi", pi_err))
}

fn c3_parseval(rng: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let alpha = [0.3, 0.5, 0.7][i % 3];
        let c = CoeffSeq::power(alpha, 2048)?;
        let len = rng.random_range(1..=64usize);
        let lo = rng.random_range(1 - len as i64..=0);
        let vals: Vec<C64> =
            (0..len).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let x = WindowSeq::new(lo, vals)?;
        let r = lksmult::dirichlet::parseval_check(&c, &x, 1 << 14)?;
        worst = worst.max(r.gap);
    }
    Ok(Outcome::new(worst <= 1e-6, "100 windows of at most 64 entries, K = 2048, M = 2^14").metric("max_gap", worst))
}

fn c4_kernels() -> Res {
    let (g, kappa) = riesz_green(0.5, 20)?;
    let kk = convolve(&kappa.to_window(), &kappa.to_window());
    let g0 = g.get(0);
    let conv_err = (-256..=256i64).map(|j| (kk.get(j).re - g.get(j)).abs()).fold(0.0, f64::max) / g0;
    let gr = riesz_kernel(0.5, 1 << 20)?;
    let scaled: Vec<f64> = (0..=512i64).map(|j| gr.get(j) * ((j + 1) as f64).sqrt()).collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let bracket_ok = lo >= 0.1 && hi <= 10.0;
    Ok(Outcome::new(
        conv_err <= 1e-6 && bracket_ok,
        format!(
            "kappa*kappa = g holds; bracket [{lo:.4}, {hi:.4}] vs [0.1, 10]: the lower end is the asymptotic constant of the kernel"
        ),
    )
    .metric("conv_error_rel_g0", conv_err)
    .metric("bracket_min", lo)
    .metric("bracket_max", hi))
}

fn subsets_upto(lo: i64, hi: i64, max: usize) -> Vec<Vec<i64>> {
    let n = (hi - lo + 1) as u32;
    (1u32..(1 << n))
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| lo + i as i64).collect())
        .collect()
}

fn c5_capacity() -> Res {
    let t0 = Instant::now();
    let (g, _) = riesz_green(0.5, 12)?;
    let sets = subsets_upto(-4, 4, 4);
    let mut disagreement: f64 = 0.0;
    let mut violations = 0usize;
    let mut first = String::new();
    for s in &sets {
        let vals: Vec<f64> = [CapacityMethod::ActiveSet, CapacityMethod::ProjectedGradient, CapacityMethod::DualLp]
            .iter()
            .map(|&m| {
                let r = capacity(s, &g, m)?;
                let v = r.violations(1e-6);
                if !v.is_empty() {
                    violations += 1;
                    if first.is_empty() {
                        first = format!("J = {s:?}: {}", v[0]);
                    }
                }
                Ok(r.value)
            })
            .collect::<Result<_, lksmult::Error>>()?;
        for a in &vals {
            for b in &vals {
                disagreement = disagreement.max((a - b).abs() / a.max(*b));
            }
        }
    }
    let fast = within(t0, Duration::from_secs(300), 5);
    let detail = if first.is_empty() { format!("{} sets, three solvers", sets.len()) } else { first };
    Ok(Outcome::new(disagreement <= 1e-6 && violations == 0 && fast, detail)
        .metric("sets", sets.len() as f64)
        .metric("max_disagreement", disagreement)
        .metric("violations", violations as f64))
}

fn c6_single_point() -> Res {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.7] {
        let (g, _) = riesz_green(alpha, 16)?;
        let cap = lksmult::potentials::capacity_value(&[0], &g, CapacityMethod::ActiveSet, None)?.value;
        let p = cap * reciprocal_quadrature(&CoeffSeq::riesz(alpha)?, 1 << 18)?;
        lo = lo.min(p);
        hi = hi.max(p);
    }
    Ok(Outcome::new(lo >= 0.98 && hi <= 1.02, "alpha in {0.3, 0.5, 0.7}; kernel M = 2^16, quadrature M = 2^18")
        .metric("product_min", lo)
        .metric("product_max", hi))
}

fn c7_strong_capacitary(rng: &mut ChaCha8Rng) -> Res {
    let (g, _) = riesz_green(0.5, 12)?;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = rng.random_range(1..=10usize);
        let mut vals = vec![C64::new(0.0, 0.0); 128];
        for _ in 0..s {
            let i = rng.random_range(0..128usize);
            let mag = rng.random_range(0.05..1.0);
            vals[i] = C64::new(if rng.random_bool(0.5) { mag } else { -mag }, 0.0);
        }
        let x = WindowSeq::new(-64, vals)?;
        worst = worst.max(strong_capacitary_ratio(&x, &g)?.ratio);
    }
    Ok(Outcome::new(worst <= 4.0 + 1e-6, "1000 sparse x on a window of 128, bound 4").metric("max_ratio", worst))
}

fn c8_sandwich(rng: &mut ChaCha8Rng) -> Res {
    let (g, _) = riesz_green(0.5, 12)?;
    let (mut low, mut up) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let nu = random_nu(-6, 6, rng);
        let c1 = capacitary_constant(&nu, &g, &Strategy::AllSubsets { lo: -6, hi: 6 })?.value;
        let cn2 = embedding_constant(&nu, EmbeddingRoute::Green { g: &g })?;
        low = low.max(c1 - cn2);
        up = up.max(cn2 - 4.0 * c1);
    }
    Ok(Outcome::new(low <= 1e-6 && up <= 1e-6, "20 random nu on [-6, 6], all 8191 subsets")
        .metric("max_c1_minus_cn2", low)
        .metric("max_cn2_minus_4c1", up))
}

fn c9_quasimetric(rng: &mut ChaCha8Rng) -> Res {
    let g = riesz_kernel(0.5, 1 << 12)?;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..20 {
        let nu = random_nu(-6, 6, rng);
        let r = quasimetric_report(&g, &nu, -6, 6)?.ratio;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let ok = lo >= 1.0 - 1e-12 && hi <= 1.2 * QUASI_C_REC && hi >= QUASI_C_REC / 1.2;
    Ok(Outcome::new(ok, format!("20 random nu on [-6, 6]; recorded c = {QUASI_C_REC}"))
        .metric("ratio_min", lo)
        .metric("ratio_max", hi))
}

fn c10_slp(rng: &mut ChaCha8Rng) -> Res {
    let c = CoeffSeq::power(0.5, 64)?;
    let n = 16i64;
    let pad = n + 64;
    let mut excess = f64::NEG_INFINITY;
    let mut recon: f64 = 0.0;
    let mut min_delta = f64::INFINITY;
    for _ in 0..100 {
        let vals: Vec<C64> = (-pad..=pad)
            .map(|_| C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI)))
            .collect();
        let seq = WindowSeq::new(-pad, vals)?;
        let lam = MultiplierSpec::Patched { seq: seq.clone(), far: Box::new(MultiplierSpec::constant(1.0)) };
        let b = slp_bounds(&lam, &c, n as usize)?;
        excess = excess.max(b.pointwise_excess);
        min_delta = min_delta.min(b.delta);
        let split: Vec<C64> =
            (-pad..=pad).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let l1 = WindowSeq::new(-pad, split)?;
        let l2 = WindowSeq::from_fn(-pad, pad, |j| seq.get(j) - l1.get(j))?;
        let inf = (-pad..=pad).map(|j| (l1.get(j) + l2.get(j)).norm()).fold(f64::INFINITY, f64::min);
        recon = recon.max(theorem59_adjust(&l1, &l2, inf)?.reconstruction_error);
    }
    Ok(Outcome::new(excess <= 1e-12 && recon <= 1e-14 && min_delta >= 0.5, "100 random lambda, delta >= 0.5")
        .metric("max_pointwise_excess", excess)
        .metric("max_reconstruction_error", recon)
        .metric("min_delta", min_delta))
}

fn c11_thresholds() -> Res {
    let p = Theorem53Params::new(0.3, 0.7, PI / 2.0);
    let cut = CutoffSpec::new(PI / 8.0)?;
    let lam = |delta| MultiplierSpec::PowerRotation { delta, theta: PI / 2.0 };
    let above = theorem53_check(&lam(0.25), &cut, &p)?;
    let below = theorem53_check(&lam(0.15), &cut, &p)?;
    let growth = [Some(&below.cond4), Some(&below.cond5), below.cond6.as_ref()]
        .into_iter()
        .flatten()
        .filter(|s| !s.bounded)
        .map(|s| s.growth_per_octave)
        .fold(0.0, f64::max);
    let ok = above.passes && !below.passes && growth >= 1.5;
    Ok(Outcome::new(
        ok,
        format!(
            "delta = 0.25 passes: {}; delta = 0.15 fails: {}; growth {growth:.3} per octave vs 1.5",
            above.passes, !below.passes
        ),
    )
    .metric("above_passes", above.passes as u8 as f64)
    .metric("below_fails", !below.passes as u8 as f64)
    .metric("below_growth_per_octave", growth)
    .metric("above_cond5_slope", above.cond5.slope))
}

/// The three 12-point configurations: three squares, 12th roots of unity and
/// a set without rotational symmetry.
pub fn polygon_cases() -> Result<[(SingularitySet, usize); 3], CliError> {
    let squares: Vec<(i64, i64)> = (0..3).flat_map(|i| (0..4).map(move |k| (17 * k + 4 * i, 68))).collect();
    let roots: Vec<(i64, i64)> = (0..12).map(|j| (j, 12)).collect();
    let generic: Vec<(i64, i64)> = [0, 1, 3, 7, 12, 20, 30, 44, 65, 80, 96, 100].iter().map(|&p| (p, 101)).collect();
    Ok([
        (SingularitySet::same_order(&squares, 0.5)?, 4),
        (SingularitySet::same_order(&roots, 0.5)?, 12),
        (SingularitySet::same_order(&generic, 0.5)?, 1),
    ])
}

fn c12_polygon() -> Res {
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    let mut found = Vec::new();
    for (set, want) in polygon_cases()? {
        let t0 = Instant::now();
        let p = polygon_structure(&set);
        slowest = slowest.max(t0.elapsed());
        ok &= p.d_s == want && p.exact;
        found.push(p.d_s.to_string());
    }
    log::info!("criterion 12: slowest {:?}", slowest);
    let fast = slowest < Duration::from_millis(1);
    Ok(Outcome::new(ok && fast, format!("d_s = {} (expected 4, 12, 1), exact, under 1 ms", found.join(", "))))
}

fn c13_composite() -> Res {
    let mut ok = true;
    let mut drift: f64 = 0.0;
    let mut parts = Vec::new();
    for (set, _) in polygon_cases()? {
        let a = composite_weight(&set, 1 << 18)?;
        let b = composite_weight(&set, 1 << 20)?;
        let d = ((b.ratio_min / a.ratio_min - 1.0).abs()).max((b.ratio_max / a.ratio_max - 1.0).abs());
        drift = drift.max(d);
        ok &= a.ratio_min > 0.0 && a.ratio_max.is_finite() && d <= 0.1;
        parts.push(format!("d_s {}: [{:.4}, {:.4}]", b.d_s, b.ratio_min, b.ratio_max));
    }
    Ok(Outcome::new(ok, parts.join("; ")).metric("max_relative_drift", drift))
}

fn c14_spectrum(rng: &mut ChaCha8Rng) -> Res {
    let nu = NuMeasure::golden(DEFAULT_ATOMS)?;
    let id = SymbolSpec::from_real(&[0.0, 1.0])?;
    let ns = [32, 128, 512];
    let res = eigen_residual(&id, &nu.c, C64::new(0.5, 0.0), 200)?.residual;
    let rows = resolvent_probe(&id, &nu, C64::new(0.0, 0.0), &ns)?;
    let decrease = rows[0].value / rows[2].value;
    let slp = slp_failure_demo(&nu, &ns)?;
    let q = SymbolSpec::from_real(&[-0.5, 0.0, 1.0])?;
    let mut mismatches = 0;
    let mut probes = 0;
    while probes < 20 {
        let w = C64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI));
        let z = q.eval(w) + C64::new(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25));
        // φ(u) = z has the roots ±(z + 1/2)^{1/2}
        let r = (z + 0.5).sqrt();
        if (r.norm() - 1.0).abs() < 1e-6 {
            continue;
        }
        let inside = if r.norm() < 1.0 { 2 } else { 0 };
        probes += 1;
        if winding_number(&q, z).ok() != Some(inside) {
            mismatches += 1;
        }
    }
    let ok = res <= 1e-10 && decrease >= 4.0 && slp.growth >= 5.0 && mismatches == 0;
    Ok(Outcome::new(ok, "golden rotation, c_k = (k+1)^-2, N = 32, 128, 512")
        .metric("eigen_residual", res)
        .metric("sigma_min_decrease", decrease)
        .metric("inverse_norm_growth", slp.growth)
        .metric("forward_norm_last", slp.forward[2].value)
        .metric("winding_mismatches", mismatches as f64))
}
