//! Experiment configuration: line-oriented `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and repeated
//! keys are errors. Every solver precondition is checked by
//! [`ExperimentConfig::validate`] before any replication starts.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solvers::{rain_schedule, EpochSegParams, ceil_log2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Scsc,
    Bilinear,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Seg,
    EpochSeg,
    Rain,
    RainCc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionPolicy {
    Uniform,
    Last,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Scsc => "scsc",
            Family::Bilinear => "bilinear",
            Family::File => "file",
        }
    }
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Seg => "seg",
            SolverKind::EpochSeg => "epoch_seg",
            SolverKind::Rain => "rain",
            SolverKind::RainCc => "rain_cc",
        }
    }
}

impl SelectionPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionPolicy::Uniform => "uniform",
            SelectionPolicy::Last => "last",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scsc" => Ok(Family::Scsc),
            "bilinear" => Ok(Family::Bilinear),
            "file" => Ok(Family::File),
            _ => Err(format!("unknown family `{s}` (expected scsc, bilinear or file)")),
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "seg" => Ok(SolverKind::Seg),
            "epoch_seg" => Ok(SolverKind::EpochSeg),
            "rain" => Ok(SolverKind::Rain),
            "rain_cc" => Ok(SolverKind::RainCc),
            _ => Err(format!(
                "unknown solver `{s}` (expected seg, epoch_seg, rain or rain_cc)"
            )),
        }
    }
}

impl FromStr for SelectionPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(SelectionPolicy::Uniform),
            "last" => Ok(SelectionPolicy::Last),
            _ => Err(format!("unknown selection `{s}` (expected uniform or last)")),
        }
    }
}

/// Recognised keys, in the order they are echoed into CSV metadata.
pub const KEYS: &[&str] = &[
    "run_id",
    "family",
    "d_x",
    "d_y",
    "mu",
    "lipschitz",
    "problem_seed",
    "problem_file",
    "solver",
    "eta",
    "iterations",
    "n_epochs",
    "k_epochs",
    "eps",
    "sigma",
    "replications",
    "master_seed",
    "z0_radius",
    "distance_bound",
    "selection",
    "validate",
    "wall_clock",
    "output",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub family: Family,
    pub d_x: Option<usize>,
    pub d_y: Option<usize>,
    pub mu: Option<f64>,
    pub lipschitz: Option<f64>,
    pub problem_seed: u64,
    pub problem_file: Option<PathBuf>,
    pub solver: SolverKind,
    pub eta: Option<f64>,
    pub iterations: Option<u64>,
    pub n_epochs: Option<u32>,
    pub k_epochs: Option<u32>,
    pub eps: Option<f64>,
    pub sigma: f64,
    pub replications: u64,
    pub master_seed: u64,
    /// `‖z0 − z*‖`; z0 is placed on the sphere of this radius around z*.
    pub z0_radius: f64,
    /// Replaces the true distance as the `D` given to rain / rain_cc.
    pub distance_bound: Option<f64>,
    pub selection: SelectionPolicy,
    /// Emit verdict lines checking the expectation bound of the chosen solver.
    pub validate: bool,
    /// Record real elapsed time; when false `wall_ms` is written as 0.
    pub wall_clock: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            run_id: "run".to_string(),
            family: Family::Scsc,
            d_x: None,
            d_y: None,
            mu: None,
            lipschitz: None,
            problem_seed: 0,
            problem_file: None,
            solver: SolverKind::EpochSeg,
            eta: None,
            iterations: None,
            n_epochs: None,
            k_epochs: None,
            eps: None,
            sigma: 0.0,
            replications: 1,
            master_seed: 0,
            z0_radius: 1.0,
            distance_bound: None,
            selection: SelectionPolicy::Uniform,
            validate: false,
            wall_clock: false,
            output: None,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| parse_err(line, format!("bad value for `{key}`: {e}")))
}

fn real(line: usize, key: &str, raw: &str) -> Result<f64> {
    let x: f64 = value(line, key, raw)?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("`{key}` must be finite, got {raw}")));
    }
    Ok(x)
}

fn boolean(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_err(line, format!("`{key}` must be true or false, got `{raw}`"))),
    }
}

/// Violated precondition, named after the offending key.
fn bad(key: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: key,
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates a config.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, raw) = trimmed
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{trimmed}`")))?;
            let (key, raw) = (key.trim(), raw.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(parse_err(line, format!("unknown key `{key}`")));
            };
            if seen.contains(&known) {
                return Err(parse_err(line, format!("duplicate key `{key}`")));
            }
            seen.push(known);
            match known {
                "run_id" => {
                    if raw.is_empty() || raw.contains(',') || raw.contains('"') {
                        return Err(parse_err(line, "run_id must be non-empty without commas or quotes"));
                    }
                    cfg.run_id = raw.to_string();
                }
                "family" => cfg.family = value(line, key, raw)?,
                "d_x" => cfg.d_x = Some(value(line, key, raw)?),
                "d_y" => cfg.d_y = Some(value(line, key, raw)?),
                "mu" => cfg.mu = Some(real(line, key, raw)?),
                "lipschitz" => cfg.lipschitz = Some(real(line, key, raw)?),
                "problem_seed" => cfg.problem_seed = value(line, key, raw)?,
                "problem_file" => cfg.problem_file = Some(PathBuf::from(raw)),
                "solver" => cfg.solver = value(line, key, raw)?,
                "eta" => cfg.eta = Some(real(line, key, raw)?),
                "iterations" => cfg.iterations = Some(value(line, key, raw)?),
                "n_epochs" => cfg.n_epochs = Some(value(line, key, raw)?),
                "k_epochs" => cfg.k_epochs = Some(value(line, key, raw)?),
                "eps" => cfg.eps = Some(real(line, key, raw)?),
                "sigma" => cfg.sigma = real(line, key, raw)?,
                "replications" => cfg.replications = value(line, key, raw)?,
                "master_seed" => cfg.master_seed = value(line, key, raw)?,
                "z0_radius" => cfg.z0_radius = real(line, key, raw)?,
                "distance_bound" => cfg.distance_bound = Some(real(line, key, raw)?),
                "selection" => cfg.selection = value(line, key, raw)?,
                "validate" => cfg.validate = boolean(line, key, raw)?,
                "wall_clock" => cfg.wall_clock = boolean(line, key, raw)?,
                "output" => cfg.output = Some(PathBuf::from(raw)),
                _ => unreachable!("key table and match arms disagree"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need the generated problem.
    ///
    /// Constraints that depend on the problem's constants (file family) are
    /// re-checked by [`ExperimentConfig::validate_constants`] once it is loaded.
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(bad("replications", "must be at least 1"));
        }
        if self.sigma < 0.0 || !self.sigma.is_finite() {
            return Err(bad("sigma", format!("must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.z0_radius >= 0.0 && self.z0_radius.is_finite()) {
            return Err(bad("z0_radius", format!("must be finite and >= 0, got {}", self.z0_radius)));
        }
        match self.family {
            Family::File => {
                if self.problem_file.is_none() {
                    return Err(bad("problem_file", "required when family = file"));
                }
                for (key, given) in [
                    ("d_x", self.d_x.is_some()),
                    ("d_y", self.d_y.is_some()),
                    ("mu", self.mu.is_some()),
                    ("lipschitz", self.lipschitz.is_some()),
                ] {
                    if given {
                        return Err(Error::InvalidParameter {
                            name: "family",
                            reason: format!("`{key}` is read from the problem file and must not be set"),
                        });
                    }
                }
            }
            Family::Scsc | Family::Bilinear => {
                if self.problem_file.is_some() {
                    return Err(bad("problem_file", "only allowed when family = file"));
                }
                let d_x = self.d_x.ok_or_else(|| bad("d_x", "required"))?;
                let d_y = self.d_y.ok_or_else(|| bad("d_y", "required"))?;
                if d_x < 1 || d_y < 1 {
                    return Err(bad("d_x", "dimensions must be at least 1"));
                }
                let lipschitz = self.lipschitz.ok_or_else(|| bad("lipschitz", "required"))?;
                if !(lipschitz > 0.0) {
                    return Err(bad("lipschitz", format!("must be > 0, got {lipschitz}")));
                }
                let mu = match self.family {
                    Family::Scsc => {
                        let mu = self.mu.ok_or_else(|| bad("mu", "required for family = scsc"))?;
                        if !(mu > 0.0 && mu <= lipschitz) {
                            return Err(bad("mu", format!("need 0 < mu <= lipschitz, got {mu}")));
                        }
                        mu
                    }
                    _ => {
                        if d_x != d_y {
                            return Err(bad("d_y", "bilinear problems need d_x = d_y"));
                        }
                        match self.mu {
                            Some(mu) if mu != 0.0 => {
                                return Err(bad("mu", "bilinear problems have mu = 0"));
                            }
                            _ => 0.0,
                        }
                    }
                };
                self.validate_constants(mu, lipschitz)?;
            }
        }
        Ok(())
    }

    /// Solver preconditions that depend on the problem's `μ` and `L`.
    pub fn validate_constants(&self, mu: f64, lipschitz: f64) -> Result<()> {
        let unused = |keys: &[(&'static str, bool)]| -> Result<()> {
            for &(key, given) in keys {
                if given {
                    return Err(bad(key, format!("not used by solver {}", self.solver)));
                }
            }
            Ok(())
        };
        match self.solver {
            SolverKind::Seg => {
                unused(&[
                    ("n_epochs", self.n_epochs.is_some()),
                    ("k_epochs", self.k_epochs.is_some()),
                    ("eps", self.eps.is_some()),
                    ("distance_bound", self.distance_bound.is_some()),
                ])?;
                let eta = self.eta.ok_or_else(|| bad("eta", "required for solver seg"))?;
                let cap = 1.0 / (4.0 * lipschitz);
                if !(eta > 0.0 && eta <= cap * (1.0 + 1e-12)) {
                    return Err(bad("eta", format!("need 0 < eta <= 1/(4L) = {cap}, got {eta}")));
                }
                match self.iterations {
                    Some(t) if t >= 1 => {}
                    _ => return Err(bad("iterations", "required for solver seg and must be >= 1")),
                }
            }
            SolverKind::EpochSeg => {
                unused(&[
                    ("eta", self.eta.is_some()),
                    ("iterations", self.iterations.is_some()),
                    ("eps", self.eps.is_some()),
                    ("distance_bound", self.distance_bound.is_some()),
                ])?;
                if !(mu > 0.0) {
                    return Err(bad("mu", "epoch_seg needs a strongly monotone problem (mu > 0)"));
                }
                let n = self.n_epochs.ok_or_else(|| bad("n_epochs", "required for solver epoch_seg"))?;
                let k = self.k_epochs.ok_or_else(|| bad("k_epochs", "required for solver epoch_seg"))?;
                EpochSegParams { mu, lipschitz, n, k }.validate()?;
            }
            SolverKind::Rain | SolverKind::RainCc => {
                unused(&[
                    ("eta", self.eta.is_some()),
                    ("iterations", self.iterations.is_some()),
                    ("n_epochs", self.n_epochs.is_some()),
                    ("k_epochs", self.k_epochs.is_some()),
                ])?;
                let eps = self.eps.ok_or_else(|| bad("eps", "required for rain and rain_cc"))?;
                if !(eps > 0.0) {
                    return Err(bad("eps", format!("must be > 0, got {eps}")));
                }
                if let Some(d) = self.distance_bound {
                    if !(d > 0.0) {
                        return Err(bad("distance_bound", format!("must be > 0, got {d}")));
                    }
                }
                if self.solver == SolverKind::Rain {
                    if !(mu > 0.0) {
                        return Err(bad("mu", "rain needs a strongly monotone problem (mu > 0); use rain_cc"));
                    }
                    // the schedule only depends on D through N_0; probe with a unit distance
                    rain_schedule(mu, lipschitz, eps, self.distance_bound.unwrap_or(1.0), self.sigma)?;
                } else if ceil_log2(lipschitz).is_none() {
                    return Err(bad("lipschitz", "out of range"));
                }
                if self.distance_bound.is_none() && self.z0_radius == 0.0 {
                    return Err(bad(
                        "z0_radius",
                        "true distance is 0; set distance_bound to give the solver a positive D",
                    ));
                }
            }
        }
        Ok(())
    }

    /// `(key, value)` pairs of every set field, in [`KEYS`] order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("run_id", self.run_id.clone()),
            ("family", self.family.as_str().to_string()),
        ];
        let opt_usize = |v: Option<usize>| v.map(|x| x.to_string());
        let opt_real = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        let mut push = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        push("d_x", opt_usize(self.d_x));
        push("d_y", opt_usize(self.d_y));
        push("mu", opt_real(self.mu));
        push("lipschitz", opt_real(self.lipschitz));
        push("problem_seed", Some(self.problem_seed.to_string()));
        push("problem_file", self.problem_file.as_ref().map(|p| p.display().to_string()));
        push("solver", Some(self.solver.as_str().to_string()));
        push("eta", opt_real(self.eta));
        push("iterations", self.iterations.map(|x| x.to_string()));
        push("n_epochs", self.n_epochs.map(|x| x.to_string()));
        push("k_epochs", self.k_epochs.map(|x| x.to_string()));
        push("eps", opt_real(self.eps));
        push("sigma", Some(format!("{:?}", self.sigma)));
        push("replications", Some(self.replications.to_string()));
        push("master_seed", Some(self.master_seed.to_string()));
        push("z0_radius", Some(format!("{:?}", self.z0_radius)));
        push("distance_bound", opt_real(self.distance_bound));
        push("selection", Some(self.selection.as_str().to_string()));
        push("validate", Some(self.validate.to_string()));
        push("wall_clock", Some(self.wall_clock.to_string()));
        push("output", self.output.as_ref().map(|p| p.display().to_string()));
        out
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.echo()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
