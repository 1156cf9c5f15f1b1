//! Run configuration: a TOML file with one section per suite. Every command
//! line flag overrides the matching key.

use std::path::{Path, PathBuf};

use contact_limit_core::kernels::KernelClass;
use contact_limit_core::potentials::{CouplingSchedule, Potential, Shape};
use serde::{Deserialize, Serialize};

/// Output directory used when neither the flag, the config nor
/// `CONTACT_LIMIT_OUT` names one.
pub const DEFAULT_OUT: &str = "contact-limit-out";
pub const OUT_ENV: &str = "CONTACT_LIMIT_OUT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Box {
        #[serde(default = "one")]
        height: f64,
        #[serde(default = "half")]
        half_width: f64,
    },
    Triangle {
        #[serde(default = "one")]
        height: f64,
        #[serde(default = "one")]
        half_width: f64,
    },
    Exponential {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        rate: f64,
    },
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    CosineBox {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        half_width: f64,
    },
    HeavyTail {
        #[serde(default = "one")]
        amplitude: f64,
        power: f64,
    },
    /// Two-column file `r V(r)`, separated by whitespace or commas.
    Table { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Box {
            height: 1.0,
            half_width: 0.5,
        }
    }
}

impl PotentialSpec {
    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Box { .. } => "box".into(),
            PotentialSpec::Triangle { .. } => "triangle".into(),
            PotentialSpec::Exponential { .. } => "exponential".into(),
            PotentialSpec::Gaussian { .. } => "gaussian".into(),
            PotentialSpec::CosineBox { .. } => "cosine-box".into(),
            PotentialSpec::HeavyTail { power, .. } => format!("heavy-tail-{power}"),
            PotentialSpec::Table { path } => format!("table:{}", path.display()),
        }
    }

    pub fn build(&self) -> Result<Potential, ConfigError> {
        let shape = match self {
            PotentialSpec::Box { height, half_width } => Shape::Box {
                height: *height,
                half_width: *half_width,
            },
            PotentialSpec::Triangle { height, half_width } => Shape::Triangle {
                height: *height,
                half_width: *half_width,
            },
            PotentialSpec::Exponential { amplitude, rate } => Shape::Exponential {
                amplitude: *amplitude,
                rate: *rate,
            },
            PotentialSpec::Gaussian { amplitude, width } => Shape::Gaussian {
                amplitude: *amplitude,
                width: *width,
            },
            PotentialSpec::CosineBox { amplitude, half_width } => Shape::CosineBox {
                amplitude: *amplitude,
                half_width: *half_width,
            },
            PotentialSpec::HeavyTail { amplitude, power } => Shape::HeavyTail {
                amplitude: *amplitude,
                power: *power,
            },
            PotentialSpec::Table { path } => {
                let (r, v) = read_table(path)?;
                Shape::Table { r, v }
            }
        };
        Potential::new(shape).map_err(|e| invalid(format!("potential {}: {e}", self.label())))
    }
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| invalid(format!("{}:{}: not a number: {s}", path.display(), n + 1)))
        };
        match cols.as_slice() {
            [a, b] => {
                r.push(parse(a)?);
                v.push(parse(b)?);
            }
            _ => return Err(invalid(format!("{}:{}: expected two columns", path.display(), n + 1))),
        }
    }
    Ok((r, v))
}

/// Coupling of the potential. `alpha` fixes `g = α/∫V`; otherwise `g` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSpec {
    pub g: f64,
    pub alpha: Option<f64>,
    /// Rate `s` of the perturbed schedule `g_ε = g + ε^s`.
    pub perturbation_rate: Option<f64>,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            g: 1.0,
            alpha: None,
            perturbation_rate: None,
        }
    }
}

impl ScheduleSpec {
    pub fn build(&self, v: &Potential) -> Result<CouplingSchedule, ConfigError> {
        let g = match self.alpha {
            Some(a) => contact_limit_core::potentials::coupling_for_alpha(v, a).map_err(|e| invalid(e.to_string()))?,
            None => self.g,
        };
        match self.perturbation_rate {
            Some(s) => CouplingSchedule::perturbed(g, s).map_err(|e| invalid(e.to_string())),
            None => Ok(CouplingSchedule::constant(g)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreensConfig {
    pub samples: usize,
    pub tolerance: f64,
    pub marginal_tolerance: f64,
}

impl Default for GreensConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            tolerance: 1e-10,
            marginal_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KreinConfig {
    pub trials: usize,
    pub max_dim: usize,
    pub tolerance: f64,
}

impl Default for KreinConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            max_dim: 60,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub eps: Vec<f64>,
    pub z: Vec<f64>,
    pub classes: Vec<String>,
    pub potentials: Vec<PotentialSpec>,
    pub factor: f64,
    /// Write every table as a binary dump (and CSV when small).
    pub export: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.0, 0.1, 1.0],
            z: vec![1.0, 4.0],
            classes: ["T", "phi12", "phi1j-fiber", "phiij-fiber"].map(String::from).to_vec(),
            potentials: vec![
                PotentialSpec::default(),
                PotentialSpec::Exponential {
                    amplitude: 1.0,
                    rate: 1.0,
                },
                PotentialSpec::CosineBox {
                    amplitude: 1.0,
                    half_width: 1.0,
                },
            ],
            factor: 1.05,
            export: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchurConfig {
    pub z: Vec<f64>,
    pub factor: f64,
    pub three_variable_cells: usize,
    pub three_variable_half_width: f64,
    pub four_variable_cells: usize,
    pub four_variable_half_width: f64,
}

impl Default for SchurConfig {
    fn default() -> Self {
        Self {
            z: vec![1.0, 4.0],
            factor: 1.05,
            three_variable_cells: 160,
            three_variable_half_width: 8.0,
            four_variable_cells: 32,
            four_variable_half_width: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub targets: Vec<String>,
    /// Exponents `(first, last)` of `ε = 2^{−k}`; class default when absent.
    pub eps_exponents: Option<(i32, i32)>,
    pub z: Vec<f64>,
    pub op_norm: bool,
    /// Allowed shortfall of `ŝ` below `0.9·s`; class default when absent.
    pub slack: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            targets: ["T", "phi12", "phi1j-fiber", "phiij-fiber"].map(String::from).to_vec(),
            eps_exponents: None,
            z: vec![2.0],
            op_norm: false,
            slack: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventConfig {
    pub alpha: f64,
    pub z: Vec<f64>,
    pub eps_exponents: (i32, i32),
    pub perturbation_rate: f64,
    pub min_slope: f64,
    pub perturbed_band: (f64, f64),
    pub half_width: f64,
    pub coarse_spacing: f64,
    pub independence_tolerance: f64,
    /// Potential compared against the main one in the independence check.
    pub comparison: PotentialSpec,
    /// Zero-mean potential whose limit must be the free resolvent.
    pub zero_mean: PotentialSpec,
    pub table_nodes: usize,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            z: vec![4.0],
            eps_exponents: (3, 9),
            perturbation_rate: 0.5,
            min_slope: 0.8,
            perturbed_band: (0.4, 0.65),
            half_width: 10.0,
            coarse_spacing: 0.002,
            independence_tolerance: 1e-8,
            comparison: PotentialSpec::Exponential {
                amplitude: 0.5,
                rate: 1.0,
            },
            zero_mean: PotentialSpec::CosineBox {
                amplitude: 1.0,
                half_width: 1.0,
            },
            table_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    pub alpha: f64,
    pub half_width: f64,
    pub cells: usize,
    pub eps_exponents: (i32, i32),
    pub tolerance: f64,
    pub levels: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            half_width: 10.0,
            cells: 2048,
            eps_exponents: (3, 8),
            tolerance: 5e-3,
            levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormsConfig {
    pub potentials: Vec<PotentialSpec>,
    pub mu: Vec<f64>,
    pub eps_exponents: (i32, i32),
    pub min_slope: f64,
    pub sandwich_a: f64,
    pub tolerance: f64,
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self {
            potentials: vec![
                PotentialSpec::default(),
                PotentialSpec::Exponential {
                    amplitude: 1.0,
                    rate: 1.0,
                },
                PotentialSpec::HeavyTail {
                    amplitude: 1.0,
                    power: 2.2,
                },
            ],
            mu: vec![0.25, 0.5, 1.0, 2.0],
            eps_exponents: (1, 10),
            min_slope: 0.45,
            sandwich_a: 0.5,
            tolerance: 1e-9,
        }
    }
}

/// Everything a run needs, after defaults and flag overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub jobs: usize,
    pub tolerance_scale: f64,
    pub potential: PotentialSpec,
    pub schedule: ScheduleSpec,
    pub greens: GreensConfig,
    pub krein: KreinConfig,
    pub bounds: BoundsConfig,
    pub schur: SchurConfig,
    pub sweep: SweepConfig,
    pub resolvent: ResolventConfig,
    pub eigen: EigenConfig,
    pub forms: FormsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: None,
            seed: 7,
            jobs: 1,
            tolerance_scale: 1.0,
            potential: PotentialSpec::default(),
            schedule: ScheduleSpec::default(),
            greens: GreensConfig::default(),
            krein: KreinConfig::default(),
            bounds: BoundsConfig::default(),
            schur: SchurConfig::default(),
            sweep: SweepConfig::default(),
            resolvent: ResolventConfig::default(),
            eigen: EigenConfig::default(),
            forms: FormsConfig::default(),
        }
    }
}

/// Flag values that override config keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub tolerance_scale: Option<f64>,
    pub targets: Option<Vec<String>>,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        if let Some(t) = o.tolerance_scale {
            self.tolerance_scale = t;
        }
        if let Some(t) = &o.targets {
            self.sweep.targets = t.clone();
        }
    }

    /// Flag, then config, then `CONTACT_LIMIT_OUT`, then [`DEFAULT_OUT`].
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// A tolerance after `--tolerance-scale`.
    pub fn tol(&self, base: f64) -> f64 {
        base * self.tolerance_scale
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.jobs == 0 {
            return Err(invalid("jobs must be at least 1"));
        }
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return Err(invalid("tolerance_scale must be positive"));
        }
        let v = self.potential.build()?;
        self.schedule.build(&v)?;
        let positive = |xs: &[f64], what: &str| {
            if xs.is_empty() || xs.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
                Err(invalid(format!("{what} must be a non-empty list of positive numbers")))
            } else {
                Ok(())
            }
        };
        let exponents = |(a, b): (i32, i32), what: &str| {
            if a >= b || a < 0 || b > 40 {
                Err(invalid(format!("{what}: need 0 ≤ first < last ≤ 40, got ({a}, {b})")))
            } else {
                Ok(())
            }
        };
        let g = &self.greens;
        if g.samples == 0 || !(g.tolerance > 0.0) || !(g.marginal_tolerance > 0.0) {
            return Err(invalid("greens: samples and tolerances must be positive"));
        }
        let k = &self.krein;
        if k.trials == 0 || k.max_dim < 2 || !(k.tolerance > 0.0) {
            return Err(invalid("krein: need trials ≥ 1, max_dim ≥ 2, tolerance > 0"));
        }
        let b = &self.bounds;
        positive(&b.z, "bounds.z")?;
        if b.eps.is_empty() || b.eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(invalid("bounds.eps must be non-negative"));
        }
        for c in &b.classes {
            parse_class(c)?;
        }
        for p in &b.potentials {
            p.build()?;
        }
        if !(b.factor >= 1.0) {
            return Err(invalid("bounds.factor must be at least 1"));
        }
        let s = &self.schur;
        positive(&s.z, "schur.z")?;
        if s.three_variable_cells < 8 || s.four_variable_cells < 4 || !(s.factor >= 1.0) {
            return Err(invalid("schur: grid too small or factor below 1"));
        }
        positive(&[s.three_variable_half_width, s.four_variable_half_width], "schur half widths")?;
        let sw = &self.sweep;
        if sw.targets.is_empty() {
            return Err(invalid("sweep.targets is empty"));
        }
        for t in &sw.targets {
            parse_class(t)?;
        }
        if let Some(e) = sw.eps_exponents {
            exponents(e, "sweep.eps_exponents")?;
            if e.1 - e.0 < 3 {
                return Err(invalid("sweep.eps_exponents must give at least 4 values"));
            }
        }
        positive(&sw.z, "sweep.z")?;
        let r = &self.resolvent;
        positive(&r.z, "resolvent.z")?;
        exponents(r.eps_exponents, "resolvent.eps_exponents")?;
        positive(
            &[r.half_width, r.coarse_spacing, r.independence_tolerance, r.perturbation_rate],
            "resolvent grid and tolerances",
        )?;
        if r.perturbed_band.0 > r.perturbed_band.1 || r.table_nodes < 2 {
            return Err(invalid("resolvent: empty slope band or fewer than two table nodes"));
        }
        r.comparison.build()?;
        r.zero_mean.build()?;
        let e = &self.eigen;
        exponents(e.eps_exponents, "eigen.eps_exponents")?;
        if e.cells < 4 || !e.cells.is_multiple_of(2) || !(e.half_width > 0.0) || !(e.tolerance > 0.0) {
            return Err(invalid("eigen: need an even cell count ≥ 4 and positive half width and tolerance"));
        }
        let f = &self.forms;
        positive(&f.mu, "forms.mu")?;
        exponents(f.eps_exponents, "forms.eps_exponents")?;
        if !(f.sandwich_a > 0.0 && f.sandwich_a < 1.0) || !(f.tolerance >= 0.0) {
            return Err(invalid("forms: sandwich_a must lie in (0, 1)"));
        }
        for p in &f.potentials {
            p.build()?;
        }
        Ok(())
    }
}

/// Kernel class from its name.
pub fn parse_class(name: &str) -> Result<KernelClass, ConfigError> {
    use KernelClass::*;
    let all = [
        T, Phi12, Phi1j, Phi2j, Phiij, Phi1jFiber, Phi2jFiber, PhiijFiber, SchurF, SchurFFiber, SchurB, SchurBFiber,
    ];
    all.into_iter()
        .find(|c| c.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| invalid(format!("unknown kernel class {name}")))
}
