//! JSON run configuration.
//!
//! ```json
//! {
//!   "potential": { "name": "step", "params": [[0, 2], 1.5707963267948966] },
//!   "n": 40,
//!   "alpha": 1.0,
//!   "tol": 1e-10,
//!   "grid_density": 1.0,
//!   "range": [1, 40],
//!   "mean_zero": false,
//!   "checks": ["gram_residual"],
//!   "out": "out"
//! }
//! ```
//!
//! A parameter is a real number or a `[re, im]` pair. Instead of `name` the
//! potential may be `{ "samples": "u.csv" }`, resolved against the config's
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use distsl::{Catalogue, Complex64, PotentialPrimitive};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Param> for Complex64 {
    fn from(p: Param) -> Self {
        match p {
            Param::Real(re) => Complex64::new(re, 0.0),
            Param::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Catalogue {
        name: String,
        #[serde(default)]
        params: Vec<Param>,
    },
    Samples {
        samples: PathBuf,
    },
}

/// The file as written; everything optional is filled in by [`RunConfig::resolve`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: PotentialSpec,
    n: Option<usize>,
    alpha: Option<f64>,
    tol: Option<f64>,
    grid_density: Option<f64>,
    range: Option<[usize; 2]>,
    #[serde(default)]
    mean_zero: bool,
    checks: Option<Vec<String>>,
    out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub mean_zero: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub n: usize,
    pub alpha: f64,
    pub tol: f64,
    pub grid_density: f64,
    /// Indices written by the eigenfunction report.
    pub range: (usize, usize),
    pub mean_zero: bool,
    pub checks: Option<Vec<String>>,
    pub out: PathBuf,
}

fn invalid(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {why}"))
}

impl RunConfig {
    pub fn load(path: &Path, over: &Overrides) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, over).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates; relative sample paths are taken against `base`.
    pub fn parse(text: &str, base: &Path, over: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::resolve(raw, base, over)
    }

    fn resolve(raw: RawConfig, base: &Path, over: &Overrides) -> Result<Self, CliError> {
        let n = over.n.or(raw.n).ok_or_else(|| CliError::Config("missing field `n`".into()))?;
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        let alpha = raw.alpha.unwrap_or(1.0);
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        let tol = raw.tol.unwrap_or(1e-10);
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(invalid("tol", format!("must lie in (0, 1e-4], got {tol}")));
        }
        let grid_density = raw.grid_density.unwrap_or(1.0);
        if !(grid_density > 0.0 && grid_density.is_finite()) {
            return Err(invalid("grid_density", format!("must be positive, got {grid_density}")));
        }
        let range = match raw.range {
            None => (1, n),
            Some([lo, hi]) if 1 <= lo && lo <= hi && hi <= n => (lo, hi),
            Some([lo, hi]) => return Err(invalid("range", format!("[{lo}, {hi}] is not inside [1, {n}]"))),
        };
        let mut potential = match raw.potential {
            PotentialSpec::Samples { samples } => {
                let path = base.join(samples);
                if !path.is_file() {
                    return Err(invalid("potential.samples", format!("{} not found", path.display())));
                }
                PotentialSpec::Samples { samples: path }
            }
            other => other,
        };
        if let Some(seed) = over.seed {
            match &mut potential {
                PotentialSpec::Catalogue { name, params } if name == "rough_fourier" && params.len() == 3 => {
                    params[2] = Param::Real(seed as f64);
                }
                _ => return Err(CliError::Config("--seed applies only to rough_fourier".into())),
            }
        }
        Ok(Self {
            potential,
            n,
            alpha,
            tol,
            grid_density,
            range,
            mean_zero: raw.mean_zero || over.mean_zero,
            checks: raw.checks,
            out: over.out.clone().or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    pub fn build_potential(&self) -> Result<PotentialPrimitive, CliError> {
        let p = match &self.potential {
            PotentialSpec::Catalogue { name, params } => {
                let params: Vec<Complex64> = params.iter().map(|&p| p.into()).collect();
                Catalogue::parse(name, &params).and_then(|c| c.build())
            }
            PotentialSpec::Samples { samples } => PotentialPrimitive::from_csv_path(samples),
        }
        .map_err(|e| invalid("potential", e))?;
        Ok(if self.mean_zero { p.mean_zero() } else { p })
    }
}
