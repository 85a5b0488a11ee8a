//! Run configuration: TOML file sections plus flag overrides.

use crate::CliError;
use lksmult::{CoeffSeq, MultiplierSpec, WindowSeq, C64};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    #[default]
    Weight,
    Dirichlet,
    Capacity,
    Mult,
    Pair,
    Polygon,
    Decompose,
    Spectra,
    Audit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    Intervals,
    AllSubsets,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `c_k = (k+1)^{-(1+α)}`, `k ≤ len`
    #[default]
    LksPower,
    /// explicit `c_1, c_2, ...`
    LksTable,
    /// infinite power sequence with analytic tail
    Riesz,
    /// `c_k = k^{-2}(log ek)^β`, `k ≤ len`
    PowerLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightInput {
    pub kind: WeightKind,
    pub alpha: f64,
    pub beta: f64,
    pub c: Vec<f64>,
    pub len: usize,
}

impl Default for WeightInput {
    fn default() -> Self {
        Self { kind: WeightKind::LksPower, alpha: 0.5, beta: 0.0, c: Vec::new(), len: 4096 }
    }
}

impl WeightInput {
    pub fn coeffs(&self) -> Result<CoeffSeq, CliError> {
        Ok(match self.kind {
            WeightKind::LksPower => CoeffSeq::power(self.alpha, self.len)?,
            WeightKind::LksTable => {
                if self.c.is_empty() {
                    return Err(CliError::Config("lks_table needs coefficients (--c)".into()));
                }
                CoeffSeq::from_table(self.c.clone())?
            }
            WeightKind::Riesz => CoeffSeq::riesz(self.alpha)?,
            WeightKind::PowerLog => CoeffSeq::power_log(self.beta, self.len)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Constant,
    Basis,
    Rotation,
    PowerRotation,
    Symbol,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiplierInput {
    pub family: Family,
    /// constant value `re + i·im`
    pub re: f64,
    pub im: f64,
    /// basis index
    pub n: i64,
    /// rotation or symbol angle, radians
    pub angle: f64,
    pub delta: f64,
    pub theta: f64,
    /// real symbol coefficients `φ̂(0), φ̂(1), ...`
    pub coeffs: Vec<f64>,
    /// table values from index `lo`
    pub values: Vec<f64>,
    pub lo: i64,
}

impl Default for MultiplierInput {
    fn default() -> Self {
        Self {
            family: Family::Constant,
            re: 1.0,
            im: 0.0,
            n: 0,
            angle: 1.0,
            delta: 0.25,
            theta: std::f64::consts::FRAC_PI_2,
            coeffs: Vec::new(),
            values: Vec::new(),
            lo: 0,
        }
    }
}

impl MultiplierInput {
    pub fn spec(&self) -> Result<MultiplierSpec, CliError> {
        Ok(match self.family {
            Family::Constant => MultiplierSpec::Constant { re: self.re, im: self.im },
            Family::Basis => MultiplierSpec::Basis { n: self.n },
            Family::Rotation => MultiplierSpec::Rotation { angle: self.angle },
            Family::PowerRotation => MultiplierSpec::PowerRotation { delta: self.delta, theta: self.theta },
            Family::Symbol => {
                if self.coeffs.is_empty() {
                    return Err(CliError::Config("symbol needs coefficients (--coeffs)".into()));
                }
                MultiplierSpec::Symbol {
                    coeffs: self.coeffs.iter().map(|a| C64::new(*a, 0.0)).collect(),
                    angle: self.angle,
                }
            }
            Family::Table => {
                if self.values.is_empty() {
                    return Err(CliError::Config("table needs values (--values)".into()));
                }
                MultiplierSpec::Table { seq: WindowSeq::from_real(self.lo, &self.values)? }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DirichletInput {
    /// real sequence values from index `lo`
    pub x: Vec<f64>,
    pub lo: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityInput {
    pub set: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrdersInput {
    pub alpha: f64,
    pub beta: f64,
    /// intervals `[0, 2^k]`, `k ≤ k_max`
    pub k_max: u32,
    /// summation reach for `μ`
    pub reach: usize,
    /// second singularity, radians
    pub theta: f64,
    /// cut-off half-width, radians
    pub cutoff: f64,
}

impl Default for OrdersInput {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            beta: 0.7,
            k_max: 10,
            reach: 1 << 15,
            theta: std::f64::consts::FRAC_PI_2,
            cutoff: std::f64::consts::PI / 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolygonInput {
    /// angles as turns `"p/q"`
    pub angles: Vec<String>,
    pub alpha: f64,
    /// also evaluate the composite weight on the grid
    pub composite: bool,
}

impl Default for PolygonInput {
    fn default() -> Self {
        Self { angles: Vec::new(), alpha: 0.5, composite: false }
    }
}

impl PolygonInput {
    pub fn turns(&self) -> Result<Vec<(i64, i64)>, CliError> {
        self.angles.iter().map(|s| parse_turn(s)).collect()
    }
}

pub fn parse_turn(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Config(format!("angle {s:?} is not of the form p/q"));
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
        None => (s.parse().map_err(|_| bad())?, 1),
    };
    if q == 0 {
        return Err(bad());
    }
    Ok((p, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraInput {
    /// rotation angle of `ζ`, radians; golden angle when absent
    pub angle: Option<f64>,
    pub atoms: usize,
    /// real coefficients of `φ`
    pub phi: Vec<f64>,
    /// probe points `[re, im]`
    pub z: Vec<[f64; 2]>,
    pub ns: Vec<usize>,
    /// truncation of the eigen-residual check
    pub k_max: usize,
}

impl Default for SpectraInput {
    fn default() -> Self {
        Self {
            angle: None,
            atoms: lksmult::spectra::DEFAULT_ATOMS,
            phi: vec![0.0, 1.0],
            z: vec![[0.0, 0.0], [3.0, 0.0]],
            ns: vec![32, 64, 128],
            k_max: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AuditInput {
    /// criteria to run, all when empty
    pub criteria: Vec<u32>,
}

/// Everything a command reads. Output paths are not part of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub window: usize,
    pub grid_log2: u32,
    pub strategy: StrategyKind,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub csv: Option<PathBuf>,
    pub weight: WeightInput,
    pub multiplier: MultiplierInput,
    pub dirichlet: DirichletInput,
    pub capacity: CapacityInput,
    pub orders: OrdersInput,
    pub polygon: PolygonInput,
    pub spectra: SpectraInput,
    pub audit: AuditInput,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::Weight,
            window: 32,
            grid_log2: 16,
            strategy: StrategyKind::Intervals,
            seed: 0,
            out: None,
            csv: None,
            weight: WeightInput::default(),
            multiplier: MultiplierInput::default(),
            dirichlet: DirichletInput::default(),
            capacity: CapacityInput::default(),
            orders: OrdersInput::default(),
            polygon: PolygonInput::default(),
            spectra: SpectraInput::default(),
            audit: AuditInput::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn grid_size(&self) -> usize {
        1usize << self.grid_log2
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.window == 0 {
            return Err(CliError::Config("window must be positive".into()));
        }
        if !(2..=24).contains(&self.grid_log2) {
            return Err(CliError::Config(format!("grid_log2 = {} must lie in 2..=24", self.grid_log2)));
        }
        if self.weight.len == 0 {
            return Err(CliError::Config("weight length must be positive".into()));
        }
        if self.spectra.atoms == 0 || self.spectra.ns.contains(&0) {
            return Err(CliError::Config("spectra sizes must be positive".into()));
        }
        Ok(())
    }
}
