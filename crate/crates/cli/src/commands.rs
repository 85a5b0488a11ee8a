//! One function per subcommand: configuration in, [`Report`] out.

use crate::config::{CommandKind, RunConfig, StrategyKind};
use crate::report::{num, Report, Series};
use crate::CliError;
use lksmult::dirichlet::{components, minimality_report, parseval_check, seminorm};
use lksmult::multipliers::{
    dyadic_intervals, interval_scan, multiplier_report, pair_multiplier_check, IntervalScan, Strategy, TREND_SLOPE,
};
use lksmult::potentials::{capacity, green_kernel, CapacityMethod};
use lksmult::seqcore::analyze;
use lksmult::singular::{
    composite_weight, polygon_structure, theorem53_check, CompositeWeight, PolygonDecomposition, Theorem53Params,
    Theorem53Report,
};
use lksmult::spectra::{eigen_residual, golden_angle, resolvent_probe, winding_number, NuMeasure, SymbolSpec};
use lksmult::weights::{a2_report, lks_weight, reciprocal_integrable, schoenberg_pd_check, zero_set, Verdict};
use lksmult::{CoeffSeq, CutoffSpec, DirichletMatrix, SingularitySet, WindowSeq, C64};
use serde::Serialize;

/// Run the command named in the configuration.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match cfg.command {
        CommandKind::Weight => cmd_weight(cfg),
        CommandKind::Dirichlet => cmd_dirichlet(cfg),
        CommandKind::Capacity => cmd_capacity(cfg),
        CommandKind::Mult => cmd_mult(cfg),
        CommandKind::Pair => cmd_pair(cfg),
        CommandKind::Polygon => cmd_polygon(cfg),
        CommandKind::Decompose => cmd_decompose(cfg),
        CommandKind::Spectra => cmd_spectra(cfg),
        CommandKind::Audit => crate::audit::cmd_audit(cfg),
    }
}

const TABLE_EXCERPT: usize = 8;
const INTEGRABILITY_TERMS: usize = 10_000;
const A2_LEVELS: u32 = 10;
const SCHOENBERG_EPS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

#[derive(Debug, Serialize)]
struct TableRow {
    n: i64,
    quadrature: f64,
    exact: f64,
}

#[derive(Debug, Serialize)]
struct WeightReport {
    label: String,
    grid_size: usize,
    table: Vec<TableRow>,
    max_table_error: f64,
    zero_set: lksmult::weights::ZeroSet,
    integrable: bool,
    integrability: lksmult::weights::IntegrabilityReport,
    a2: Option<lksmult::weights::A2Report>,
    schoenberg: Vec<lksmult::weights::SchoenbergRow>,
    schoenberg_min: f64,
    note: Option<String>,
}

pub fn cmd_weight(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = cfg.weight.coeffs()?;
    let (grid, exact) = lks_weight(&c, cfg.grid_size())?;
    let range = exact.range().min(TABLE_EXCERPT);
    let quad = analyze(&grid, range)?;
    let table: Vec<TableRow> = (0..=range as i64)
        .map(|n| TableRow { n, quadrature: quad.get(n).re, exact: exact.get(n).re })
        .collect();
    let max_table_error = table.iter().map(|r| (r.quadrature - r.exact).abs()).fold(0.0, f64::max);
    let integrability = reciprocal_integrable(&c, INTEGRABILITY_TERMS)?;
    let integrable = integrability.verdict == Verdict::Integrable;
    let a2 = if grid.min() > 0.0 { Some(a2_report(&grid, A2_LEVELS.min(cfg.grid_log2))?) } else { None };
    let schoenberg = schoenberg_pd_check(&grid, &SCHOENBERG_EPS)?;
    let schoenberg_min = schoenberg.iter().map(|r| r.min_coeff).fold(f64::INFINITY, f64::min);
    let note = match integrability.verdict {
        Verdict::NotIntegrable => Some("1/w is not integrable: the multiplier algebra consists of constants only".into()),
        Verdict::Inconclusive => Some("integrability of 1/w is undecided at this truncation".into()),
        Verdict::Integrable => None,
    };
    let mut series = Series::new(&["n", "quadrature", "exact"]);
    for r in &table {
        series.push(vec![r.n.to_string(), num(r.quadrature), num(r.exact)]);
    }
    let rep = WeightReport {
        label: c.label(),
        grid_size: grid.size(),
        table,
        max_table_error,
        zero_set: zero_set(&c),
        integrable,
        integrability,
        a2,
        schoenberg,
        schoenberg_min,
        note,
    };
    Ok(Report::new(cfg, rep)?.tolerance("integrability_terms", INTEGRABILITY_TERMS as f64).with_series(series))
}

#[derive(Debug, Serialize)]
struct DirichletReport {
    label: String,
    seminorm_sq: f64,
    parseval: Option<lksmult::dirichlet::ParsevalCheck>,
    minimality: lksmult::dirichlet::MinimalityReport,
    components: lksmult::dirichlet::ComponentInfo,
}

pub fn cmd_dirichlet(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = cfg.weight.coeffs()?;
    let x = if cfg.dirichlet.x.is_empty() {
        WindowSeq::delta(0)
    } else {
        WindowSeq::from_real(cfg.dirichlet.lo, &cfg.dirichlet.x)?
    };
    let n = cfg.window.max(x.lo().unsigned_abs() as usize).max(x.hi().unsigned_abs() as usize);
    let d = DirichletMatrix::toeplitz(n, c.clone());
    let seminorm_sq = seminorm(&d, &x, 2.0)?;
    let parseval = if 4 * x.len() <= cfg.grid_size() { Some(parseval_check(&c, &x, cfg.grid_size())?) } else { None };
    let rep = DirichletReport {
        label: c.label(),
        seminorm_sq,
        parseval,
        minimality: minimality_report(&c, INTEGRABILITY_TERMS)?,
        components: components(&DirichletMatrix::toeplitz(cfg.window, c.clone()))?,
    };
    Ok(Report::new(cfg, rep)?)
}

/// Green kernel on the full grid range; sets and windows of the command live
/// in `[−window, window]`.
fn kernel_for(c: &CoeffSeq, cfg: &RunConfig) -> Result<(lksmult::KernelSeq, lksmult::KernelSeq), CliError> {
    let m = cfg.grid_size();
    if 2 * cfg.window >= m {
        return Err(CliError::Config(format!("window {} needs a grid above 2^{}", cfg.window, cfg.grid_log2)));
    }
    Ok(green_kernel(c, m, m / 2 - 1)?)
}

#[derive(Debug, Serialize)]
struct MethodValue {
    method: CapacityMethod,
    value: f64,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct CapacityReport {
    j_set: Vec<i64>,
    value: f64,
    z: Vec<f64>,
    active_set: Vec<i64>,
    x_energy: f64,
    y_energy: Option<f64>,
    gap: f64,
    /// largest relative disagreement between the solvers
    solver_gap: f64,
    methods: Vec<MethodValue>,
    truncated: bool,
    violations: Vec<String>,
}

const DUAL_LP_LIMIT: usize = 8;
const CAPACITY_TOL: f64 = 1e-6;

pub fn cmd_capacity(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.capacity.set.is_empty() {
        return Err(CliError::Config("capacity needs a nonempty set J (--set)".into()));
    }
    let n = cfg.window as i64;
    if let Some(j) = cfg.capacity.set.iter().find(|j| j.abs() > n) {
        return Err(CliError::Config(format!("J contains {j}, outside the window [-{n}, {n}]")));
    }
    let c = cfg.weight.coeffs()?;
    let (g, _) = kernel_for(&c, cfg)?;
    let main = capacity(&cfg.capacity.set, &g, CapacityMethod::ActiveSet)?;
    let reach = cfg.capacity.set.iter().map(|j| j.abs()).max().unwrap_or(0);
    let truncated = main.truncated || 4 * (n - reach) < n;
    let mut methods = vec![MethodValue { method: main.method, value: main.value, iterations: main.iterations }];
    let mut others = vec![CapacityMethod::ProjectedGradient];
    if main.j_set.len() <= DUAL_LP_LIMIT {
        others.push(CapacityMethod::DualLp);
    }
    for m in others {
        let r = lksmult::potentials::capacity_value(&main.j_set, &g, m, None)?;
        methods.push(MethodValue { method: r.method, value: r.value, iterations: r.iterations });
    }
    let solver_gap = methods.iter().map(|m| (m.value - main.value).abs() / main.value).fold(0.0, f64::max);
    let mut series = Series::new(&["j", "x"]);
    for (j, v) in main.x.iter().filter(|(j, _)| j.abs() <= n) {
        series.push(vec![j.to_string(), num(v.re)]);
    }
    if truncated {
        log::warn!("J lies near the window boundary; the capacity is truncation-limited");
    }
    let rep = CapacityReport {
        z: main.j_set.iter().map(|&j| main.z.get(j).re).collect(),
        j_set: main.j_set.clone(),
        value: main.value,
        active_set: main.active_set.clone(),
        x_energy: main.x_energy,
        y_energy: main.y_energy,
        gap: main.gap,
        solver_gap,
        methods,
        truncated,
        violations: main.violations(CAPACITY_TOL),
    };
    Ok(Report::new(cfg, rep)?.tolerance("identity", CAPACITY_TOL).with_series(series))
}

#[derive(Debug, Serialize)]
struct MultReport {
    window: lksmult::multipliers::MultiplierReport,
    scan: IntervalScan,
    /// interval with the largest ratio when the scan grows
    witness: Option<(i64, i64)>,
    passes: bool,
}

const RANDOM_SETS: usize = 256;
/// largest dyadic interval `[0, 2^k]` of the multiplier scan
const MULT_K_MAX: u32 = 10;

fn strategy(cfg: &RunConfig) -> Strategy {
    let n = cfg.window as i64;
    match cfg.strategy {
        StrategyKind::Intervals => Strategy::Intervals { lo: -n, hi: n },
        StrategyKind::AllSubsets => Strategy::AllSubsets { lo: -n, hi: n },
        StrategyKind::Random => Strategy::Random { lo: -n, hi: n, count: RANDOM_SETS, seed: cfg.seed },
    }
}

fn scan_series(scans: &[(&str, &IntervalScan)]) -> Series {
    let mut s = Series::new(&["scan", "lo", "hi", "ratio"]);
    for (name, sc) in scans {
        for (&(a, b), r) in sc.intervals.iter().zip(&sc.ratios) {
            s.push(vec![name.to_string(), a.to_string(), b.to_string(), num(*r)]);
        }
    }
    s
}

/// `μ²/Cap` over `[0, 2^k]` with `2^k` at most a quarter of the kernel window.
pub fn cmd_mult(cfg: &RunConfig) -> Result<Report, CliError> {
    let c = cfg.weight.coeffs()?;
    let lambda = cfg.multiplier.spec()?;
    let m = cfg.grid_size();
    let (g, _) = kernel_for(&c, cfg)?;
    let k_max = ((m / 8).max(2).ilog2()).min(MULT_K_MAX);
    let hi = 1i64 << k_max;
    let mu = lksmult::multipliers::mu_weights(&lambda, &c, 0, hi, None)?;
    let scan = interval_scan(&mu.nu, &g, &dyadic_intervals(0, k_max))?;
    let st = strategy(cfg);
    let window = multiplier_report(&lambda, &c, cfg.window, Some((&g, &st)))?;
    let witness = (!scan.bounded).then(|| {
        let i = scan.ratios.iter().enumerate().fold(0, |b, (i, r)| if *r > scan.ratios[b] { i } else { b });
        scan.intervals[i]
    });
    let passes = scan.bounded;
    let series = scan_series(&[("mu", &scan)]);
    let rep = MultReport { window, scan, witness, passes };
    Ok(Report::new(cfg, rep)?.tolerance("trend_slope", TREND_SLOPE).with_series(series))
}

const PAIR_GRID: usize = 1 << 14;

pub fn cmd_pair(cfg: &RunConfig) -> Result<Report, CliError> {
    let lambda = cfg.multiplier.spec()?;
    let o = &cfg.orders;
    let r = pair_multiplier_check(&lambda, o.alpha, o.beta, o.k_max, PAIR_GRID, o.reach)?;
    let mut scans = vec![("mu", &r.mu_scan)];
    if let Some(s) = &r.lambda_scan {
        scans.push(("lambda", s));
    }
    let series = scan_series(&scans);
    Ok(Report::new(cfg, &r)?.tolerance("trend_slope", TREND_SLOPE).with_series(series))
}

#[derive(Debug, Serialize)]
struct PolygonReport {
    angles: Vec<String>,
    structure: PolygonDecomposition,
    composite: Option<CompositeWeight>,
}

pub fn cmd_polygon(cfg: &RunConfig) -> Result<Report, CliError> {
    let turns = cfg.polygon.turns()?;
    if turns.is_empty() {
        return Err(CliError::Config("polygon needs angles (--angles p/q,...)".into()));
    }
    let set = SingularitySet::same_order(&turns, cfg.polygon.alpha)?;
    let structure = polygon_structure(&set);
    let composite = if cfg.polygon.composite { Some(composite_weight(&set, cfg.grid_size())?) } else { None };
    let angles = set.turns().iter().map(|r| format!("{}/{}", r.numer(), r.denom())).collect();
    Ok(Report::new(cfg, PolygonReport { angles, structure, composite })?)
}

pub fn cmd_decompose(cfg: &RunConfig) -> Result<Report, CliError> {
    let lambda = cfg.multiplier.spec()?;
    let o = &cfg.orders;
    let cut = CutoffSpec::new(o.cutoff)?;
    let mut p = Theorem53Params::new(o.alpha, o.beta, o.theta);
    p.k_max = o.k_max;
    p.reach = o.reach;
    let r: Theorem53Report = theorem53_check(&lambda, &cut, &p)?;
    let mut scans = vec![("cond4", &r.cond4), ("cond5", &r.cond5)];
    if let Some(s) = &r.cond6 {
        scans.push(("cond6", s));
    }
    let series = scan_series(&scans);
    Ok(Report::new(cfg, &r)?.tolerance("trend_slope", TREND_SLOPE).with_series(series))
}

#[derive(Debug, Serialize)]
struct ProbeReport {
    z: [f64; 2],
    winding: Option<i64>,
    on_curve: bool,
    eigen_residual: Option<lksmult::spectra::EigenResidual>,
    rows: Vec<lksmult::spectra::ProbeRow>,
}

#[derive(Debug, Serialize)]
struct SpectraReport {
    angle: f64,
    atoms: usize,
    radius_proxy: f64,
    probes: Vec<ProbeReport>,
}

pub fn cmd_spectra(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = &cfg.spectra;
    let angle = s.angle.unwrap_or_else(golden_angle);
    let c: Vec<f64> = (0..s.atoms).map(|k| ((k + 1) as f64).powi(-2)).collect();
    let nu = match s.angle {
        Some(a) => NuMeasure::new(a, c.clone())?,
        None => NuMeasure::golden(s.atoms)?,
    };
    let phi = SymbolSpec::from_real(&s.phi)?;
    let mut series = Series::new(&["z_re", "z_im", "n", "effective_n", "sigma_min", "winding"]);
    let mut probes = Vec::new();
    for &[re, im] in &s.z {
        let z = C64::new(re, im);
        let (winding, on_curve) = match winding_number(&phi, z) {
            Ok(w) => (Some(w), false),
            Err(lksmult::Error::OnCurve(_)) => (None, true),
            Err(e) => return Err(e.into()),
        };
        let eigen = if z.norm() < 1.0 && s.k_max < c.len() {
            Some(eigen_residual(&phi, &c, z, s.k_max)?)
        } else {
            None
        };
        let rows = resolvent_probe(&phi, &nu, z, &s.ns)?;
        for r in &rows {
            let w = winding.map_or(String::new(), |w| w.to_string());
            series.push(vec![num(re), num(im), r.n.to_string(), r.effective_n.to_string(), num(r.value), w]);
        }
        probes.push(ProbeReport { z: [re, im], winding, on_curve, eigen_residual: eigen, rows });
    }
    let rep = SpectraReport { angle, atoms: s.atoms, radius_proxy: nu.radius_proxy, probes };
    Ok(Report::new(cfg, rep)?.with_series(series))
}
