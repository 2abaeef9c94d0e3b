//! Monte-Carlo replication of one solver configuration.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Family, SelectionPolicy, SolverKind};
use crate::error::{Error, Result};
use crate::oracle::{split_stream, split_stream_for, NoiseModel, StochasticOracle, StreamRole};
use crate::problems::io::read_problem;
use crate::problems::{gen_bilinear, gen_scsc_quadratic, AffineMinimaxProblem, Anchor, MinimaxProblem, Point};
use crate::reference::{collapse, exact_saddle, verify_recursive_bound};
use crate::solvers::{
    epoch_seg, rain, rain_cc, seg, CcParams, EpochSegParams, HalfPointSelection, RainParams, RunTrace,
    SegParams,
};

/// Environment variable holding the replication worker count.
pub const WORKERS_ENV: &str = "MINIMAX_WORKERS";

/// Sampling slack on Monte-Carlo expectation bounds.
pub const MC_SLACK: f64 = 1.2;

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationRow {
    pub rep_id: u64,
    pub sfo_total: u64,
    pub grad_norm_final: f64,
    pub dist2_final: f64,
    pub wall_ms: f64,
    /// Recursive-bound verdict, when validation applies to the solver.
    pub recursive_bound: Option<bool>,
}

/// Mean, standard error, min and max of one column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnSummary {
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

impl ColumnSummary {
    /// Standard error uses the `n − 1` sample variance; it is 0 for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, stderr, min, max }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub sfo_total: ColumnSummary,
    pub grad_norm_final: ColumnSummary,
    pub dist2_final: ColumnSummary,
    pub wall_ms: ColumnSummary,
}

impl Summary {
    pub fn of(rows: &[ReplicationRow]) -> Self {
        let col = |f: fn(&ReplicationRow) -> f64| ColumnSummary::of(&rows.iter().map(f).collect::<Vec<_>>());
        Self {
            sfo_total: col(|r| r.sfo_total as f64),
            grad_norm_final: col(|r| r.grad_norm_final),
            dist2_final: col(|r| r.dist2_final),
            wall_ms: col(|r| r.wall_ms),
        }
    }
}

/// Outcome of one acceptance check on the aggregated run.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateResult {
    pub config: ExperimentConfig,
    pub mu: f64,
    pub lipschitz: f64,
    pub z_star: Point,
    pub z0: Point,
    /// `D` handed to the solver.
    pub distance: f64,
    /// Rows ordered by `rep_id`.
    pub rows: Vec<ReplicationRow>,
    pub summary: Summary,
    pub verdicts: Vec<Verdict>,
}

impl AggregateResult {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Builds the configured problem.
pub fn load_problem(config: &ExperimentConfig) -> Result<AffineMinimaxProblem> {
    let need = |v: Option<usize>, name: &'static str| {
        v.ok_or(Error::InvalidParameter {
            name,
            reason: "required".into(),
        })
    };
    match config.family {
        Family::Scsc => gen_scsc_quadratic(
            need(config.d_x, "d_x")?,
            need(config.d_y, "d_y")?,
            config.mu.unwrap_or(0.0),
            config.lipschitz.unwrap_or(0.0),
            config.problem_seed,
        ),
        Family::Bilinear => gen_bilinear(
            need(config.d_x, "d_x")?,
            need(config.d_y, "d_y")?,
            config.lipschitz.unwrap_or(0.0),
            config.problem_seed,
        ),
        Family::File => {
            let path = config.problem_file.as_ref().ok_or(Error::InvalidParameter {
                name: "problem_file",
                reason: "required when family = file".into(),
            })?;
            read_problem(BufReader::new(File::open(path)?))
        }
    }
}

/// Starting point at distance `radius` from `z_star`, direction drawn from the
/// setup stream so every replication starts from the same point.
pub fn start_point(z_star: &Point, radius: f64, master_seed: u64) -> Point {
    let mut rng = split_stream_for(master_seed, 0, StreamRole::Setup);
    let dir: Vec<f64> = (0..z_star.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let data = z_star
        .as_slice()
        .iter()
        .zip(&dir)
        .map(|(z, u)| z + radius * u / len)
        .collect();
    Point::new(data, z_star.d_x()).expect("finite start point")
}

/// Worker count from [`WORKERS_ENV`]; `None` means rayon's default.
pub fn worker_count() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidParameter {
                name: "MINIMAX_WORKERS",
                reason: format!("must be a positive integer, got `{raw}`"),
            }),
        },
    }
}

struct Setup<'a> {
    config: &'a ExperimentConfig,
    problem: &'a AffineMinimaxProblem,
    z_star: &'a Point,
    z0: &'a Point,
    distance: f64,
    mu: f64,
    lipschitz: f64,
}

impl Setup<'_> {
    fn solve(&self, oracle: &mut StochasticOracle, selection: &mut HalfPointSelection) -> Result<(Point, RunTrace)> {
        let cfg = self.config;
        match cfg.solver {
            SolverKind::Seg => seg(
                oracle,
                self.problem,
                self.z0,
                SegParams {
                    eta: cfg.eta.unwrap_or(0.0),
                    iterations: cfg.iterations.unwrap_or(0),
                },
                selection,
            ),
            SolverKind::EpochSeg => epoch_seg(
                oracle,
                self.problem,
                self.z0,
                EpochSegParams {
                    mu: self.mu,
                    lipschitz: self.lipschitz,
                    n: cfg.n_epochs.unwrap_or(0),
                    k: cfg.k_epochs.unwrap_or(0),
                },
                selection,
            ),
            SolverKind::Rain => rain(
                oracle,
                self.problem,
                self.z0,
                RainParams {
                    mu: self.mu,
                    lipschitz: self.lipschitz,
                    eps: cfg.eps.unwrap_or(0.0),
                    distance: self.distance,
                    sigma: cfg.sigma,
                },
                selection,
            ),
            SolverKind::RainCc => rain_cc(
                oracle,
                self.problem,
                self.z0,
                CcParams {
                    lipschitz: self.lipschitz,
                    eps: cfg.eps.unwrap_or(0.0),
                    distance: self.distance,
                    sigma: cfg.sigma,
                },
                selection,
            ),
        }
    }

    fn recursive_check(&self, trace: &RunTrace) -> Result<Option<bool>> {
        if trace.level_outputs.is_empty() {
            return Ok(None);
        }
        match (self.config.solver, trace.regularization) {
            (SolverKind::Rain, _) => Ok(Some(verify_recursive_bound(trace, self.problem, self.mu)?)),
            (SolverKind::RainCc, Some(lambda)) => {
                let anchored = collapse(
                    self.problem,
                    &[Anchor {
                        weight: lambda,
                        point: self.z0.clone(),
                    }],
                )?;
                Ok(Some(verify_recursive_bound(trace, &anchored, lambda)?))
            }
            _ => Ok(None),
        }
    }

    fn replicate(&self, rep_id: u64) -> Result<ReplicationRow> {
        let cfg = self.config;
        let started = Instant::now();
        let mut oracle = StochasticOracle::new(NoiseModel::gaussian(cfg.sigma)?, split_stream(cfg.master_seed, rep_id));
        let mut selection = match cfg.selection {
            SelectionPolicy::Uniform => HalfPointSelection::uniform(cfg.master_seed, rep_id),
            SelectionPolicy::Last => HalfPointSelection::Last,
        };
        let (point, trace) = self.solve(&mut oracle, &mut selection)?;
        let recursive_bound = if cfg.validate { self.recursive_check(&trace)? } else { None };
        let wall_ms = if cfg.wall_clock {
            started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        Ok(ReplicationRow {
            rep_id,
            sfo_total: oracle.sfo_count(),
            grad_norm_final: self.problem.grad_norm(&point)?,
            dist2_final: point.dist2(self.z_star),
            wall_ms,
            recursive_bound,
        })
    }

    fn verdicts(&self, rows: &[ReplicationRow], summary: &Summary) -> Vec<Verdict> {
        let cfg = self.config;
        let mut out = Vec::new();
        let eps = cfg.eps.unwrap_or(0.0);
        match cfg.solver {
            SolverKind::Seg => {}
            SolverKind::EpochSeg => {
                let (n, k) = (cfg.n_epochs.unwrap_or(0), cfg.k_epochs.unwrap_or(0));
                let d2 = self.z0.dist2(self.z_star);
                let bound = d2 / 2f64.powi((n + 2 * k) as i32)
                    + 8.0 * cfg.sigma * cfg.sigma / (2f64.powi(k as i32) * self.mu * self.lipschitz);
                let threshold = MC_SLACK * bound;
                out.push(Verdict {
                    name: "epoch_seg_distance",
                    passed: summary.dist2_final.mean <= threshold,
                    value: summary.dist2_final.mean,
                    threshold,
                });
            }
            SolverKind::Rain => {
                let threshold = MC_SLACK * eps;
                out.push(Verdict {
                    name: "rain_grad_norm",
                    passed: summary.grad_norm_final.mean <= threshold,
                    value: summary.grad_norm_final.mean,
                    threshold,
                });
            }
            SolverKind::RainCc => {
                let threshold = 3.0 * eps;
                out.push(Verdict {
                    name: "rain_cc_grad_norm",
                    passed: summary.grad_norm_final.mean <= threshold,
                    value: summary.grad_norm_final.mean,
                    threshold,
                });
            }
        }
        let checked: Vec<bool> = rows.iter().filter_map(|r| r.recursive_bound).collect();
        if !checked.is_empty() {
            let held = checked.iter().filter(|&&b| b).count();
            out.push(Verdict {
                name: "recursive_bound",
                passed: held == checked.len(),
                value: held as f64,
                threshold: checked.len() as f64,
            });
        }
        out
    }
}

/// Runs every replication of `config` and aggregates the rows.
///
/// Replication `r` draws oracle noise from `split_stream(master_seed, r)` and
/// half-point choices from the matching selection stream, so each row
/// depends only on `(config, r)` and the output is independent of the worker
/// count and completion order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult> {
    config.validate()?;
    let problem = load_problem(config)?;
    let (mu, lipschitz) = (problem.modulus(), problem.smoothness());
    config.validate_constants(mu, lipschitz)?;
    let z_star = exact_saddle(&problem)?;
    let z0 = start_point(&z_star, config.z0_radius, config.master_seed);
    let distance = config.distance_bound.unwrap_or_else(|| z0.distance(&z_star));
    let setup = Setup {
        config,
        problem: &problem,
        z_star: &z_star,
        z0: &z0,
        distance,
        mu,
        lipschitz,
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::InvalidParameter {
        name: "MINIMAX_WORKERS",
        reason: e.to_string(),
    })?;
    let rows = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| setup.replicate(rep))
            .collect::<Result<Vec<_>>>()
    })?;

    let summary = Summary::of(&rows);
    let verdicts = if config.validate { setup.verdicts(&rows, &summary) } else { Vec::new() };
    Ok(AggregateResult {
        config: config.clone(),
        mu,
        lipschitz,
        z_star,
        z0,
        distance,
        rows,
        summary,
        verdicts,
    })
}
