use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use padic_stable::analytic::{AnalyticError, CoefficientFunction, StableSpec};
use padic_stable::driver::DriverError;
use padic_stable::occupation::OccupationError;
use padic_stable::padic::check_prime;
use padic_stable::pathfile::PathFileError;
use padic_stable::sde::SdeError;
use padic_stable::{Ball, PAdic, PAdicError, Window};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0} is not a prime below 256")]
    InvalidPrime(u32),
    #[error("alpha must exceed 1 for this subcommand, got {0}")]
    AlphaTooSmall(f64),
    #[error("{0}")]
    WindowTooSmall(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::InvalidPrime(_) => 2,
            CliError::AlphaTooSmall(_) => 3,
            CliError::WindowTooSmall(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Other(_) => 1,
        }
    }
}

impl From<PAdicError> for CliError {
    fn from(e: PAdicError) -> Self {
        match e {
            PAdicError::InvalidPrime(p) => CliError::InvalidPrime(p),
            e => CliError::Other(e.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::PAdic(e) => e.into(),
            AnalyticError::Divergent(a) => CliError::AlphaTooSmall(a),
            e => CliError::Other(e.to_string()),
        }
    }
}

impl From<DriverError> for CliError {
    fn from(e: DriverError) -> Self {
        match e {
            DriverError::PAdic(e) => e.into(),
            e @ DriverError::WindowTooSmall { .. } => CliError::WindowTooSmall(e.to_string()),
            e => CliError::Other(e.to_string()),
        }
    }
}

impl From<OccupationError> for CliError {
    fn from(e: OccupationError) -> Self {
        match e {
            OccupationError::Driver(e) => e.into(),
            e @ OccupationError::Window { .. } => CliError::WindowTooSmall(e.to_string()),
            e => CliError::Other(e.to_string()),
        }
    }
}

impl From<SdeError> for CliError {
    fn from(e: SdeError) -> Self {
        match e {
            SdeError::PAdic(e) => e.into(),
            SdeError::Driver(e) => e.into(),
            e => CliError::Other(e.to_string()),
        }
    }
}

impl From<PathFileError> for CliError {
    fn from(e: PathFileError) -> Self {
        match e {
            PathFileError::PAdic(e) => e.into(),
            PathFileError::Analytic(e) => e.into(),
            PathFileError::Driver(e) => e.into(),
            e => CliError::Other(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Law {
    /// Prime p.
    #[arg(short, long, default_value_t = 2)]
    pub p: u32,
    /// Stability index alpha.
    #[arg(short, long, default_value_t = 2.0)]
    pub alpha: f64,
}

impl Law {
    pub fn spec(&self, needs_alpha_above_one: bool) -> Result<StableSpec, CliError> {
        check_prime(self.p)?;
        if needs_alpha_above_one && !(self.alpha > 1.0) {
            return Err(CliError::AlphaTooSmall(self.alpha));
        }
        Ok(StableSpec::new(self.p, self.alpha)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sim {
    /// Time horizon T.
    #[arg(short = 'T', long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Resolution M: jumps of norm at most p^-M are dropped.
    #[arg(short = 'M', long, default_value_t = 4)]
    pub resolution: i32,
    /// Lowest digit exponent kept.
    #[arg(long, default_value_t = -32, allow_hyphen_values = true)]
    pub window_lo: i32,
    /// One past the highest digit exponent kept.
    #[arg(long, default_value_t = 32, allow_hyphen_values = true)]
    pub window_hi: i32,
    /// Number of sample paths.
    #[arg(short = 'N', long, default_value_t = 1000)]
    pub paths: u64,
}

impl Sim {
    pub fn window(&self) -> Result<Window, CliError> {
        Window::new(self.window_lo, self.window_hi)
            .map_err(|_| CliError::WindowTooSmall(format!("invalid window [{}, {})", self.window_lo, self.window_hi)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Direct,
    TimeChange,
    Both,
}

/// Integer such as `-3`, or a literal `p^v * (d0.d1...)`.
pub fn parse_padic(s: &str, p: u32, w: Window) -> Result<PAdic, CliError> {
    match s.trim().parse::<i64>() {
        Ok(n) => Ok(PAdic::from_i64(p, w, n)?),
        Err(_) => Ok(PAdic::parse(s, p, w)?),
    }
}

/// Coefficient descriptions:
///
/// ```text
/// const:C
/// radial:SCALE,CENTER,DELTA            SCALE·‖y - CENTER‖^DELTA
/// piecewise:C1@R1=V1;C2@R2=V2;default=V   V_i on B(C_i, p^R_i)
/// ```
pub fn parse_coefficient(s: &str, p: u32, w: Window) -> Result<CoefficientFunction, CliError> {
    let bad = |why: &str| CliError::Other(format!("bad coefficient '{s}': {why}"));
    let (kind, body) = s.split_once(':').ok_or_else(|| bad("missing kind"))?;
    match kind.trim() {
        "const" => Ok(CoefficientFunction::constant(parse_padic(body, p, w)?)),
        "radial" => {
            let parts: Vec<&str> = body.split(',').collect();
            let [scale, center, delta] = parts[..] else { return Err(bad("expected SCALE,CENTER,DELTA")) };
            let delta: f64 = delta.trim().parse().map_err(|_| bad("delta"))?;
            Ok(CoefficientFunction::radial_power(parse_padic(scale, p, w)?, parse_padic(center, p, w)?, delta)?)
        }
        "piecewise" => {
            let mut pieces = Vec::new();
            let mut default = PAdic::zero(p, w)?;
            for item in body.split(';').map(str::trim).filter(|i| !i.is_empty()) {
                let (lhs, value) = item.split_once('=').ok_or_else(|| bad("expected BALL=VALUE"))?;
                let value = parse_padic(value, p, w)?;
                if lhs.trim() == "default" {
                    default = value;
                    continue;
                }
                let (center, r) = lhs.split_once('@').ok_or_else(|| bad("expected CENTER@RADIUS"))?;
                let r: i32 = r.trim().parse().map_err(|_| bad("radius exponent"))?;
                pieces.push((Ball::new(&parse_padic(center, p, w)?, r), value));
            }
            Ok(CoefficientFunction::locally_constant(pieces, default)?)
        }
        _ => Err(bad("unknown kind")),
    }
}

/// Hex SHA-256 of the canonical JSON form of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configurations serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Output, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
        }
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        Ok(path)
    }

    /// Writes `{ command, config, config_hash, truncation, result }` as pretty JSON.
    pub fn report<C: Serialize, T: Serialize, R: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: &C,
        truncation: &T,
        result: &R,
    ) -> Result<PathBuf, CliError> {
        let doc = serde_json::json!({
            "command": command,
            "config": config,
            "config_hash": config_hash(config),
            "truncation": truncation,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("reports serialize");
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
