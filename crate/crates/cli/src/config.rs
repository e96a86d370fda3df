use std::fmt;
use std::path::{Path, PathBuf};

use bergman_lab::atomic::DEFAULT_RIDGE;
use bergman_lab::diagnostics::{equally_spaced_rays, m_threshold};
use bergman_lab::{DiskPoint, GridPolicy, Lattice, OperatorSpec, SpaceParams};
use num_complex::Complex64;
use serde::Serialize;

/// A failed run: `Usage` maps to exit code 2, `Failure` to 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<bergman_lab::Error> for CliError {
    fn from(e: bergman_lab::Error) -> Self {
        use bergman_lab::Error::*;
        match e {
            InvalidParameter { .. } | OutsideDisk { .. } | Parse { .. } | LatticeTooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }

    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeParams {
    pub r: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanParams {
    pub rays: Vec<f64>,
    pub radii: Vec<f64>,
}

/// Test function for the decomposition command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionSel {
    One,
    Monomial(i32),
    Kernel(Complex64),
}

impl FunctionSel {
    pub fn parse(s: &str) -> CliResult<Self> {
        let bad = || {
            CliError::Usage(format!(
                "unknown function '{s}' (one, w, monomial:<n>, kernel:<re>[,<im>])"
            ))
        };
        match s.split_once(':') {
            None if s == "one" || s == "1" => Ok(FunctionSel::One),
            None if s == "w" => Ok(FunctionSel::Monomial(1)),
            Some(("monomial", n)) => {
                let n: i32 = n.parse().map_err(|_| bad())?;
                if !(0..=64).contains(&n) {
                    return Err(bad());
                }
                Ok(FunctionSel::Monomial(n))
            }
            Some(("kernel", a)) => {
                let parts: Vec<f64> = a
                    .split(',')
                    .map(|x| x.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                let z = match parts[..] {
                    [re] => Complex64::new(re, 0.0),
                    [re, im] => Complex64::new(re, im),
                    _ => return Err(bad()),
                };
                Ok(FunctionSel::Kernel(DiskPoint::from_complex(z)?.value()))
            }
            _ => Err(bad()),
        }
    }

    pub fn eval(self, w: Complex64, alpha: f64) -> Complex64 {
        match self {
            FunctionSel::One => Complex64::new(1.0, 0.0),
            FunctionSel::Monomial(n) => w.powi(n),
            FunctionSel::Kernel(a) => bergman_lab::kernels::kernel_c(a, w, alpha),
        }
    }
}

/// Everything a run depends on, validated before any computation starts.
/// The worker count is deliberately absent: outputs do not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub params: SpaceParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeParams>,
    pub grid: GridPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanParams>,
    pub ridge: f64,
    pub output: PathBuf,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    pub fn operator_spec(&self) -> CliResult<OperatorSpec> {
        let sel = self
            .operator
            .as_deref()
            .ok_or_else(|| CliError::Usage("no operator given".into()))?;
        Ok(sel.parse()?)
    }

    pub fn function_sel(&self) -> CliResult<FunctionSel> {
        FunctionSel::parse(self.function.as_deref().unwrap_or("one"))
    }

    /// `<output>.<ext>`, keeping any directory part of the output stem.
    pub fn output_path(&self, ext: &str) -> PathBuf {
        with_extension(&self.output, ext)
    }
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn grid_policy(n_rad: Option<usize>, n_ang: Option<usize>) -> CliResult<GridPolicy> {
    match (n_rad, n_ang) {
        (None, None) => Ok(GridPolicy::Focused),
        (Some(n_rad), Some(n_ang)) if n_rad > 0 && n_ang > 0 => Ok(GridPolicy::Fixed { n_rad, n_ang }),
        _ => Err(CliError::Usage(
            "--n-rad and --n-ang must be given together and be positive".into(),
        )),
    }
}

pub struct ScanArgs<'a> {
    pub op: &'a str,
    pub p: f64,
    pub alpha: f64,
    pub m: Option<f64>,
    pub rays: usize,
    pub radii: Option<&'a [f64]>,
    pub depth: usize,
    pub n_rad: Option<usize>,
    pub n_ang: Option<usize>,
    pub output: &'a Path,
    pub format: Format,
}

impl RunConfig {
    pub fn scan(a: ScanArgs<'_>) -> CliResult<Self> {
        let threshold = m_threshold(a.p, a.alpha)?;
        // smallest integer strictly above the threshold
        let m = a.m.unwrap_or(threshold.floor() + 1.0);
        let params = SpaceParams::new(a.alpha, a.p, Some(m))?;
        if a.rays == 0 {
            return Err(CliError::Usage("--rays must be positive".into()));
        }
        let radii = match a.radii {
            Some(r) => r.to_vec(),
            None => (1..=a.depth as i32).map(|j| 1.0 - 0.5f64.powi(j)).collect(),
        };
        if radii.len() < 2 || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Usage(
                "radii must be at least two strictly increasing values".into(),
            ));
        }
        if radii.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(CliError::Usage("radii must lie in [0, 1)".into()));
        }
        let cfg = RunConfig {
            command: "scan",
            params,
            operator: Some(a.op.to_string()),
            function: None,
            lattice: None,
            grid: grid_policy(a.n_rad, a.n_ang)?,
            scan: Some(ScanParams {
                rays: equally_spaced_rays(a.rays),
                radii,
            }),
            ridge: DEFAULT_RIDGE,
            output: a.output.to_path_buf(),
            format: a.format,
            seed: 0,
        };
        cfg.operator_spec()?;
        Ok(cfg)
    }

    pub fn atomic(f: &str, p: f64, alpha: f64, r: f64, r_max: f64, ridge: f64, output: &Path) -> CliResult<Self> {
        let params = SpaceParams::new(alpha, p, None)?;
        if !(p > 1.0) {
            return Err(CliError::Usage(format!("p = {p}: the decomposition needs p > 1")));
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(CliError::Usage(format!(
                "ridge = {ridge} must be a finite non-negative number"
            )));
        }
        FunctionSel::parse(f)?;
        // validates r and r_max
        Lattice::build(r, r_max)?;
        Ok(RunConfig {
            command: "atomic",
            params,
            operator: None,
            function: Some(f.to_string()),
            lattice: Some(LatticeParams { r, r_max }),
            grid: GridPolicy::Focused,
            scan: None,
            ridge,
            output: output.to_path_buf(),
            format: Format::Csv,
            seed: 0,
        })
    }
}
