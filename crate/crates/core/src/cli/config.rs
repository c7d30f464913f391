use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{DEFAULT_RESOLUTION, MIN_RESOLUTION};
use crate::error::{Error, Result};
use crate::fmap::{analyze_unitary_pair, eigenphase_pair, TradeoffCurve};
use crate::numerics::{ComplexMatrix, C64};

/// Smallest Monte Carlo run accepted by `simulate`.
pub const MIN_TRIALS: u64 = 1000;
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

/// A pair of unitaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarySpec {
    pub u0: MatrixSpec,
    pub u1: MatrixSpec,
}

/// Tabulated curve: a CSV file with columns `p,f`, or inline knots.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    /// CSV path, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<[f64; 2]>>,
    /// Defaults to the last knot's `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bar: Option<f64>,
    #[serde(default)]
    pub invert: bool,
}

/// Exactly one of the fields must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<UnitarySpec>,
    /// Qubit pair `(I, diag(1, e^{iπx}))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_over_pi: Option<f64>,
    /// Pure-state overlap `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
}

/// One run of the command-line tool.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Inclusive `[first, last]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<[usize; 2]>,
    /// Grid resolution of the upper-bound search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Change point to simulate; all of `0…N` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Ancilla dimension of the tester; `N + 2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// A problem resolved to a curve, with the unitaries when there are any.
#[derive(Clone, Debug)]
pub struct Problem {
    pub curve: Option<TradeoffCurve>,
    pub unitaries: Option<(ComplexMatrix, ComplexMatrix)>,
    /// Polygon distance for unitary specs.
    pub t: Option<f64>,
    pub label: &'static str,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn resolution(&self) -> Result<usize> {
        let grid = self.grid.unwrap_or(DEFAULT_RESOLUTION);
        if grid < MIN_RESOLUTION {
            return Err(Error::validation(format!(
                "grid {grid} below minimum {MIN_RESOLUTION}"
            )));
        }
        Ok(grid)
    }

    /// The single `N` of `bounds`, `certify` and `simulate`.
    pub fn single_n(&self) -> Result<usize> {
        match (self.n, self.n_range) {
            (Some(n), None) if n >= 1 => Ok(n),
            (Some(_), None) => Err(Error::validation("N must be at least 1")),
            (None, Some([a, b])) if a == b && a >= 1 => Ok(a),
            (None, Some(_)) => Err(Error::validation("this command takes a single N, not a range")),
            (Some(_), Some(_)) => Err(Error::validation("set either n or n_range, not both")),
            (None, None) => Err(Error::validation("N is required (--n or `n` in the config)")),
        }
    }

    /// The range of `sweep`; a single `N` is a range of length one.
    pub fn range(&self) -> Result<std::ops::RangeInclusive<usize>> {
        match (self.n, self.n_range) {
            (Some(_), Some(_)) => Err(Error::validation("set either n or n_range, not both")),
            (Some(n), None) if n >= 1 => Ok(n..=n),
            (None, Some([a, b])) if a >= 1 && a <= b => Ok(a..=b),
            (None, None) => Err(Error::validation("N range is required (--n-range A:B)")),
            _ => Err(Error::validation("N range must satisfy 1 ≤ A ≤ B")),
        }
    }

    pub fn trials(&self) -> Result<u64> {
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials < MIN_TRIALS {
            return Err(Error::validation(format!(
                "trials {trials} below minimum {MIN_TRIALS}"
            )));
        }
        Ok(trials)
    }

    pub fn problem(&self) -> Result<Problem> {
        let p = &self.problem;
        let set = [
            p.unitary.is_some(),
            p.omega_over_pi.is_some(),
            p.overlap.is_some(),
            p.curve.is_some(),
        ];
        match set.iter().filter(|&&b| b).count() {
            1 => {}
            0 => {
                return Err(Error::validation(
                    "no problem given: set one of problem.unitary, problem.omega_over_pi, \
                     problem.overlap, problem.curve",
                ))
            }
            _ => return Err(Error::validation("exactly one problem spec may be set")),
        }
        if let Some(spec) = &p.unitary {
            let u0 = parse_matrix("u0", &spec.u0)?;
            let u1 = parse_matrix("u1", &spec.u1)?;
            return unitary_problem(u0, u1, "unitary");
        }
        if let Some(x) = p.omega_over_pi {
            if !x.is_finite() {
                return Err(Error::validation("omega_over_pi must be finite"));
            }
            let (u0, u1) = eigenphase_pair(x);
            return unitary_problem(u0, u1, "eigenphase");
        }
        if let Some(s) = p.overlap {
            return Ok(Problem {
                curve: Some(TradeoffCurve::pure_state(s)?),
                unitaries: None,
                t: None,
                label: "pure_state",
            });
        }
        let spec = p.curve.as_ref().expect("one spec is set");
        let knots = match (&spec.file, &spec.knots) {
            (Some(file), None) => {
                let path = match &self.base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                read_curve_csv(&path)?
            }
            (None, Some(k)) => k.iter().map(|&[p, f]| (p, f)).collect(),
            _ => return Err(Error::validation("curve needs exactly one of `file` or `knots`")),
        };
        if knots.is_empty() {
            return Err(Error::validation("curve has no knots"));
        }
        let p_bar = spec.p_bar.unwrap_or(knots[knots.len() - 1].0);
        Ok(Problem {
            curve: Some(TradeoffCurve::tabulated(&knots, p_bar, spec.invert)?),
            unitaries: None,
            t: None,
            label: "tabulated",
        })
    }
}

fn unitary_problem(u0: ComplexMatrix, u1: ComplexMatrix, label: &'static str) -> Result<Problem> {
    let t = analyze_unitary_pair(&u0, &u1)?.t.clamp(0.0, 1.0);
    // t = 0 and t = 1 have no curve; callers short-circuit
    let curve = if t > 0.0 && t < 1.0 {
        Some(TradeoffCurve::unitary(t)?)
    } else {
        None
    };
    Ok(Problem {
        curve,
        unitaries: Some((u0, u1)),
        t: Some(t),
        label,
    })
}

fn parse_matrix(name: &str, rows: &MatrixSpec) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::validation(format!("{name}: {e}")))
}

/// Read `p,f` rows; a non-numeric first line is taken as a header.
pub fn read_curve_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut knots = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [p, f] => p.parse::<f64>().ok().zip(f.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(k) => knots.push(k),
            None if i == 0 => continue,
            None => {
                return Err(Error::Config(format!(
                    "{}:{}: expected `p,f`, got `{line}`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(knots)
}
