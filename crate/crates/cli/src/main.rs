use clap::{Args, Parser, Subcommand};
use lksmult_cli::config::{CommandKind, Family, StrategyKind, WeightKind};
use lksmult_cli::{commands, CliError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lksmult", version = lksmult_cli::VERSION, about = "Fourier multipliers on L2 with LKS weights")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// window half-width N
    #[arg(long, global = true)]
    window: Option<usize>,
    /// quadrature grid size 2^m
    #[arg(long = "grid-log2", global = true)]
    grid_log2: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON report path (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV path for the numeric series
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    strategy: Option<StrategyKind>,
}

#[derive(Args, Default)]
struct WeightArgs {
    #[arg(long, value_enum)]
    kind: Option<WeightKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// coefficients c_1, c_2, ...
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Option<Vec<f64>>,
    #[arg(long)]
    len: Option<usize>,
}

#[derive(Args, Default)]
struct MultiplierArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    angle: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<i64>,
}

#[derive(Args, Default)]
struct OrdersArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "k-max")]
    k_max: Option<u32>,
    #[arg(long)]
    reach: Option<usize>,
    /// angle of the second singularity, radians
    #[arg(long = "singularity", allow_hyphen_values = true)]
    singularity: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// weight table, zero set, integrability of 1/w, A2
    Weight(WeightArgs),
    /// Besov-Dirichlet seminorm of a finite sequence
    Dirichlet {
        #[command(flatten)]
        weight: WeightArgs,
        /// sequence values from index --lo
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<i64>,
    },
    /// capacity of a finite set with its equilibrium triple
    Capacity {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        set: Option<Vec<i64>>,
    },
    /// multiplier test on the weighted space
    Mult {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        multiplier: MultiplierArgs,
    },
    /// pair multiplier test for two fractional orders
    Pair {
        #[command(flatten)]
        orders: OrdersArgs,
        #[command(flatten)]
        multiplier: MultiplierArgs,
    },
    /// polygon structure of a singularity set
    Polygon {
        /// angles in turns, "p/q"
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<String>>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        composite: bool,
    },
    /// two-singularity decomposition test
    Decompose {
        #[command(flatten)]
        orders: OrdersArgs,
        #[command(flatten)]
        multiplier: MultiplierArgs,
    },
    /// hidden spectrum probes
    Spectra {
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
        #[arg(long)]
        atoms: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phi: Option<Vec<f64>>,
        /// probe points "re:im"
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        #[arg(long = "k-max")]
        k_max: Option<usize>,
    },
    /// the acceptance suite
    Audit {
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u32>>,
    },
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

fn apply_weight(cfg: &mut RunConfig, a: WeightArgs) {
    let w = &mut cfg.weight;
    set(&mut w.kind, a.kind);
    set(&mut w.alpha, a.alpha);
    set(&mut w.beta, a.beta);
    set(&mut w.c, a.c);
    set(&mut w.len, a.len);
}

fn apply_multiplier(cfg: &mut RunConfig, a: MultiplierArgs) {
    let m = &mut cfg.multiplier;
    set(&mut m.family, a.family);
    set(&mut m.re, a.re);
    set(&mut m.im, a.im);
    set(&mut m.n, a.n);
    set(&mut m.angle, a.angle);
    set(&mut m.delta, a.delta);
    set(&mut m.theta, a.theta);
    set(&mut m.coeffs, a.coeffs);
    set(&mut m.values, a.values);
    set(&mut m.lo, a.lo);
}

fn apply_orders(cfg: &mut RunConfig, a: OrdersArgs) {
    let o = &mut cfg.orders;
    set(&mut o.alpha, a.alpha);
    set(&mut o.beta, a.beta);
    set(&mut o.k_max, a.k_max);
    set(&mut o.reach, a.reach);
    set(&mut o.theta, a.singularity);
    set(&mut o.cutoff, a.cutoff);
}

fn parse_point(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::Config(format!("point {s:?} is not of the form re:im"));
    let (re, im) = s.split_once(':').unwrap_or((s, "0"));
    Ok([re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?])
}

fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.window, g.window);
    set(&mut cfg.grid_log2, g.grid_log2);
    set(&mut cfg.seed, g.seed);
    set(&mut cfg.strategy, g.strategy);
    cfg.out = g.out.or(cfg.out);
    cfg.csv = g.csv.or(cfg.csv);
    cfg.command = match cli.command {
        Command::Weight(w) => {
            apply_weight(&mut cfg, w);
            CommandKind::Weight
        }
        Command::Dirichlet { weight, x, lo } => {
            apply_weight(&mut cfg, weight);
            set(&mut cfg.dirichlet.x, x);
            set(&mut cfg.dirichlet.lo, lo);
            CommandKind::Dirichlet
        }
        Command::Capacity { weight, set: s } => {
            apply_weight(&mut cfg, weight);
            set(&mut cfg.capacity.set, s);
            CommandKind::Capacity
        }
        Command::Mult { weight, multiplier } => {
            apply_weight(&mut cfg, weight);
            apply_multiplier(&mut cfg, multiplier);
            CommandKind::Mult
        }
        Command::Pair { orders, multiplier } => {
            apply_orders(&mut cfg, orders);
            apply_multiplier(&mut cfg, multiplier);
            CommandKind::Pair
        }
        Command::Polygon { angles, alpha, composite } => {
            set(&mut cfg.polygon.angles, angles);
            set(&mut cfg.polygon.alpha, alpha);
            cfg.polygon.composite |= composite;
            CommandKind::Polygon
        }
        Command::Decompose { orders, multiplier } => {
            apply_orders(&mut cfg, orders);
            apply_multiplier(&mut cfg, multiplier);
            CommandKind::Decompose
        }
        Command::Spectra { angle, atoms, phi, z, ns, k_max } => {
            let s = &mut cfg.spectra;
            if angle.is_some() {
                s.angle = angle;
            }
            set(&mut s.atoms, atoms);
            set(&mut s.phi, phi);
            if let Some(z) = z {
                s.z = z.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?;
            }
            set(&mut s.ns, ns);
            set(&mut s.k_max, k_max);
            CommandKind::Spectra
        }
        Command::Audit { criteria } => {
            set(&mut cfg.audit.criteria, criteria);
            CommandKind::Audit
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    lksmult_cli::init_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match build_config(cli).and_then(|cfg| commands::run(&cfg)).and_then(|r| r.emit()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lksmult: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
