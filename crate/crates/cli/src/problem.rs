//! TOML problem files.
//!
//! ```toml
//! name = "ex61"
//! matrix = [["6", "3/4"], ["0", "6"]]
//! digits = [[0, 0], [1, 0], [0, 1]]
//! p = 3
//!
//! [options]
//! kmax = 3
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spectral_core::model::{DigitSet, ExpandingMatrix, MeasureInstance};
use spectral_core::numerics::Window;
use spectral_core::scalar::parse::parse_scalar_expr;
use spectral_core::zeros::ScanConfig;
use spectral_core::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    /// Row-major scalar expressions; the lower-left entry must be 0.
    pub matrix: [[String; 2]; 2],
    pub digits: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Torus scan resolution for the p ≥ 5 zero-structure check.
    pub resolution: usize,
    pub refinements: u32,
    pub tol: f64,
    /// Truncation budget for μ̂.
    pub eps: f64,
    pub kmax: u64,
    pub radius: i64,
    pub grid: usize,
    pub window: [f64; 4],
    pub heat_window: [f64; 4],
    pub output_dir: PathBuf,
}

impl Default for Options {
    fn default() -> Self {
        let scan = ScanConfig::default();
        Options {
            resolution: scan.resolution,
            refinements: scan.refinements,
            tol: scan.tol,
            eps: 1e-10,
            kmax: 3,
            radius: 2,
            grid: 32,
            window: [0.0, 1.0, 0.0, 1.0],
            heat_window: [-5.0, 5.0, -5.0, 5.0],
            output_dir: PathBuf::from("."),
        }
    }
}

impl Options {
    pub fn scan(&self) -> ScanConfig {
        ScanConfig {
            resolution: self.resolution,
            refinements: self.refinements,
            tol: self.tol,
        }
    }
}

pub fn window(w: [f64; 4]) -> Window {
    Window {
        x0: w[0],
        x1: w[1],
        y0: w[2],
        y1: w[3],
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse {
        pos: 0,
        msg: msg.into(),
    }
}

impl ProblemFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let pos = e.span().map_or(0, |s| s.start);
            Error::Parse {
                pos,
                msg: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| parse_err(e.to_string()))
    }

    pub fn instance(&self) -> Result<MeasureInstance> {
        let [[a, b], [c, d]] = &self.matrix;
        let lower = parse_scalar_expr(c)?;
        if !lower.is_zero() {
            return Err(parse_err(format!("lower-left entry must be 0, got {c}")));
        }
        let m = ExpandingMatrix::new(
            parse_scalar_expr(a)?,
            parse_scalar_expr(b)?,
            parse_scalar_expr(d)?,
        )?;
        let digits: Vec<(i64, i64)> = self.digits.iter().map(|d| (d[0], d[1])).collect();
        let d = match self.p {
            Some(p) => DigitSet::with_prime(p, digits)?,
            None => DigitSet::new(digits)?,
        };
        Ok(MeasureInstance::new(m, d))
    }

    /// A problem file describing an existing instance.
    pub fn from_instance(name: &str, inst: &MeasureInstance) -> Self {
        let m = &inst.m;
        ProblemFile {
            name: name.to_string(),
            matrix: [
                [m.rho1_inv().to_string(), m.c().to_string()],
                ["0".into(), m.rho2_inv().to_string()],
            ],
            digits: inst.d.digits().iter().map(|&(x, y)| [x, y]).collect(),
            p: Some(inst.p()),
            options: Options::default(),
        }
    }
}
