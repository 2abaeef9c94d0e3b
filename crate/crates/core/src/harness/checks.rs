//! Validator sweeps behind `minimax check`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::Result;
use crate::oracle::{noise_statistics, split_stream, stream_correlation, StochasticOracle};
use crate::problems::{gen_bilinear, gen_scsc_quadratic, AffineMinimaxProblem, Anchor, MinimaxProblem, Point};
use crate::reference::{
    anchored_exact, exact_saddle, verify_anchoring_bound, verify_monotonicity, verify_nonexpansiveness,
    verify_recursive_bound, verify_smoothness,
};
use crate::solvers::{
    epoch_seg, epoch_seg_sfo, rain, rain_schedule, seg, EpochSegParams, HalfPointSelection, RainParams,
    RainSchedule, SegParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Oracle,
    Schedule,
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "oracle" => Ok(Suite::Oracle),
            "schedule" => Ok(Suite::Schedule),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite `{s}` (expected lemmas, oracle, schedule or all)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub seed: u64,
    /// Noise level of the oracle suite.
    pub sigma: f64,
    /// Oracle draws of the oracle suite.
    pub samples: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            sigma: 1.0,
            samples: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}/{}: {}", self.suite, self.name, self.detail)
    }
}

fn line(suite: &'static str, name: &'static str, passed: bool, detail: String) -> CheckLine {
    CheckLine {
        suite,
        name,
        passed,
        detail,
    }
}

pub fn run_checks(suite: Suite, options: &CheckOptions) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        out.extend(lemma_checks(options.seed)?);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        out.extend(oracle_checks(options)?);
    }
    if matches!(suite, Suite::Schedule | Suite::All) {
        out.extend(schedule_checks()?);
    }
    Ok(out)
}

pub const LEMMA_DRAWS: usize = 50;
pub const RECURSIVE_TRACES: usize = 20;

fn log_uniform(rng: &mut Xoshiro256PlusPlus, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn gaussian_point(rng: &mut Xoshiro256PlusPlus, d_x: usize, d_y: usize, scale: f64) -> Point {
    let v = (0..d_x + d_y).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    Point::new(v, d_x).expect("finite sample")
}

/// A random problem with `μ ∈ [0, 2]`: bilinear for `μ = 0`, otherwise SCSC.
fn monotone_draw(rng: &mut Xoshiro256PlusPlus, allow_zero: bool) -> Result<(AffineMinimaxProblem, f64)> {
    let d_x = rng.gen_range(1..=4);
    let seed = rng.next_u64();
    if allow_zero && rng.gen_bool(0.3) {
        let lipschitz = rng.gen_range(0.5..10.0);
        return Ok((gen_bilinear(d_x, d_x, lipschitz, seed)?, 0.0));
    }
    let d_y = rng.gen_range(1..=4);
    let mu = rng.gen_range(0.05..2.0);
    let lipschitz = mu * log_uniform(rng, 1.0, 64.0);
    Ok((gen_scsc_quadratic(d_x, d_y, mu, lipschitz, seed)?, mu))
}

/// The five lemma sweeps: monotonicity, strong monotonicity (with
/// smoothness), non-expansiveness, the anchoring bound and the recursive bound.
pub fn lemma_checks(seed: u64) -> Result<Vec<CheckLine>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut held = 0;
    for _ in 0..LEMMA_DRAWS {
        let (p, _) = monotone_draw(&mut rng, true)?;
        held += usize::from(verify_monotonicity(&p, 0.0, 100, rng.next_u64()));
    }
    out.push(line(
        "lemmas",
        "monotonicity",
        held == LEMMA_DRAWS,
        format!("{held}/{LEMMA_DRAWS} convex-concave problems monotone on 100 pairs"),
    ));

    let mut held = 0;
    for _ in 0..LEMMA_DRAWS {
        let (p, mu) = monotone_draw(&mut rng, false)?;
        let s = rng.next_u64();
        held += usize::from(verify_monotonicity(&p, mu, 100, s) && verify_smoothness(&p, p.smoothness(), 100, s));
    }
    out.push(line(
        "lemmas",
        "strong_monotonicity",
        held == LEMMA_DRAWS,
        format!("{held}/{LEMMA_DRAWS} problems mu-strongly monotone and L-smooth on 100 pairs"),
    ));

    let mut held = 0;
    for _ in 0..LEMMA_DRAWS {
        let (p, _) = monotone_draw(&mut rng, true)?;
        let lambda = log_uniform(&mut rng, 1e-2, 1e2);
        let z0 = gaussian_point(&mut rng, p.d_x(), p.d_y(), 2.0);
        held += usize::from(verify_nonexpansiveness(&p, lambda, &z0)?);
    }
    out.push(line(
        "lemmas",
        "nonexpansiveness",
        held == LEMMA_DRAWS,
        format!("{held}/{LEMMA_DRAWS} anchored solutions within ||z* - z0||"),
    ));

    let mut held = 0;
    for _ in 0..LEMMA_DRAWS {
        let (p, _) = monotone_draw(&mut rng, true)?;
        let lambda = log_uniform(&mut rng, 1e-2, 1e2);
        let (d_x, d_y) = (p.d_x(), p.d_y());
        let z0 = gaussian_point(&mut rng, d_x, d_y, 2.0);
        let w_star = anchored_exact(
            &p,
            &[Anchor {
                weight: lambda,
                point: z0.clone(),
            }],
        )?;
        let mut samples = vec![w_star, z0.clone(), exact_saddle(&p)?];
        samples.extend((0..20).map(|_| gaussian_point(&mut rng, d_x, d_y, 3.0)));
        held += usize::from(verify_anchoring_bound(&p, lambda, &z0, &samples)?);
    }
    out.push(line(
        "lemmas",
        "anchoring",
        held == LEMMA_DRAWS,
        format!("{held}/{LEMMA_DRAWS} draws satisfy ||F(w)|| <= 2||G(w)|| + lambda||z0 - z*|| on 23 points"),
    ));

    let mut held = 0;
    let mut worst: f64 = 0.0;
    for i in 0..RECURSIVE_TRACES {
        let sigma = if i % 2 == 0 { 0.0 } else { 0.5 };
        let lipschitz = [4.0, 8.0, 16.0][rng.gen_range(0..3)];
        let eps = rng.gen_range(1.0..3.0);
        let d = rng.gen_range(1..=3);
        let p = gen_scsc_quadratic(d, d, 1.0, lipschitz, rng.next_u64())?;
        let z_star = exact_saddle(&p)?;
        let z0 = Point::new(
            z_star
                .as_slice()
                .iter()
                .map(|z| z + rng.sample::<f64, _>(StandardNormal))
                .collect(),
            d,
        )?;
        let rep = i as u64;
        let mut oracle = StochasticOracle::seeded(sigma, seed, rep)?;
        let (_, trace) = rain(
            &mut oracle,
            &p,
            &z0,
            RainParams {
                mu: 1.0,
                lipschitz,
                eps,
                distance: z0.distance(&z_star),
                sigma,
            },
            &mut HalfPointSelection::uniform(seed, rep),
        )?;
        let bound = crate::reference::recursive_bound(&trace, &p, 1.0)?;
        worst = worst.max(bound.lhs / bound.rhs.max(f64::MIN_POSITIVE));
        held += usize::from(verify_recursive_bound(&trace, &p, 1.0)?);
    }
    out.push(line(
        "lemmas",
        "recursive",
        held == RECURSIVE_TRACES,
        format!("{held}/{RECURSIVE_TRACES} RAIN traces (sigma in {{0, 0.5}}) satisfy the recursive bound, max lhs/rhs = {worst:.3e}"),
    ));
    Ok(out)
}

/// Unbiasedness and variance at `options.samples` draws in `d = 4`, stream
/// independence, and the oracle-call counts of SEG and Epoch-SEG.
pub fn oracle_checks(options: &CheckOptions) -> Result<Vec<CheckLine>> {
    let sigma = options.sigma;
    let p = gen_scsc_quadratic(2, 2, 1.0, 4.0, options.seed)?;
    let z = Point::new(vec![0.3, -1.2, 2.0, 0.7], 2)?;
    let stats = noise_statistics(&p, &z, sigma, options.samples, options.seed)?;
    let mut out = vec![
        line(
            "oracle",
            "unbiasedness",
            stats.unbiased(),
            format!(
                "max |mean error| = {:.3e} <= {:.3e} (4 standard errors, n = {})",
                stats.max_mean_error(),
                stats.mean_tolerance(),
                stats.draws
            ),
        ),
        line(
            "oracle",
            "variance",
            stats.variance_within(0.01),
            if sigma == 0.0 {
                format!("mean ||noise||^2 = {} (exact zero expected)", stats.mean_sq_norm)
            } else {
                format!("mean ||noise||^2 = {:.6} vs sigma^2 = {:.6} +- 1%", stats.mean_sq_norm, sigma * sigma)
            },
        ),
    ];

    let r = stream_correlation(split_stream(options.seed, 0), split_stream(options.seed, 1), 100_000);
    out.push(line(
        "oracle",
        "stream_independence",
        r.abs() < 0.01,
        format!("corr(rep 0, rep 1) over 1e5 normals = {r:.3e}, need |r| < 0.01"),
    ));

    let z0 = Point::new(vec![1.0, 1.0, 1.0, 1.0], 2)?;
    let mut oracle = StochasticOracle::seeded(sigma, options.seed, 0)?;
    seg(
        &mut oracle,
        &p,
        &z0,
        SegParams {
            eta: 1.0 / 16.0,
            iterations: 5,
        },
        &mut HalfPointSelection::Last,
    )?;
    let seg_calls = oracle.sfo_count();
    let params = EpochSegParams {
        mu: 2.0,
        lipschitz: 4.0,
        n: 1,
        k: 1,
    };
    let mut oracle = StochasticOracle::seeded(sigma, options.seed, 1)?;
    epoch_seg(&mut oracle, &p, &z0, params, &mut HalfPointSelection::Last)?;
    let epoch_calls = oracle.sfo_count();
    out.push(line(
        "oracle",
        "sfo_count",
        seg_calls == 10 && epoch_calls == 160 && epoch_seg_sfo(&params)? == 160,
        format!("seg T=5 used {seg_calls} calls (10), epoch_seg kappa=2 N=1 K=1 used {epoch_calls} (160)"),
    ));
    Ok(out)
}

/// Straight-line evaluation of the RAIN parameter formulas.
pub fn schedule_by_formula(mu: f64, lipschitz: f64, eps: f64, distance: f64, sigma: f64) -> RainSchedule {
    let levels = (lipschitz / mu).log2().floor() as usize;
    let s = levels.max(1) as f64;
    let mut lambdas = Vec::new();
    let mut n_epochs = Vec::new();
    let mut k_epochs = Vec::new();
    for i in 0..levels.max(1) {
        let lambda = mu * 2f64.powi(i as i32);
        lambdas.push(lambda);
        n_epochs.push(if i == 0 {
            ((512.0 * mu * mu * s * s * distance * distance / (eps * eps)).log2().ceil()).max(0.0) as u32
        } else {
            3
        });
        let k = (2048.0 * lambda * s * s * sigma * sigma / (lipschitz * eps * eps)).log2().ceil();
        k_epochs.push(if k.is_nan() { 1 } else { k.max(1.0) as u32 });
    }
    RainSchedule {
        levels,
        lambdas,
        n_epochs,
        k_epochs,
        eps,
        distance,
        sigma,
        mu,
        lipschitz,
    }
}

/// The 100-point grid: μ ∈ {0.5, 1}, κ ∈ {1.5, 2, 8, 37, 256},
/// ε ∈ {0.01, 0.3, 1, 5, 50}, (D, σ) ∈ {(1, 0), (3, 1)}.
pub fn schedule_grid() -> Vec<(f64, f64, f64, f64, f64)> {
    let mut grid = Vec::new();
    for mu in [0.5, 1.0] {
        for kappa in [1.5, 2.0, 8.0, 37.0, 256.0] {
            for eps in [0.01, 0.3, 1.0, 5.0, 50.0] {
                for (distance, sigma) in [(1.0, 0.0), (3.0, 1.0)] {
                    grid.push((mu, mu * kappa, eps, distance, sigma));
                }
            }
        }
    }
    grid
}

pub fn schedule_checks() -> Result<Vec<CheckLine>> {
    let grid = schedule_grid();
    let mut mismatches = Vec::new();
    for &(mu, lipschitz, eps, distance, sigma) in &grid {
        let got = rain_schedule(mu, lipschitz, eps, distance, sigma)?;
        if got != schedule_by_formula(mu, lipschitz, eps, distance, sigma) {
            mismatches.push(format!("(mu={mu}, L={lipschitz}, eps={eps}, D={distance}, sigma={sigma})"));
        }
    }
    let example = rain_schedule(1.0, 8.0, 0.3, 1.0, 1.0)?;
    Ok(vec![
        line(
            "schedule",
            "grid",
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{}/{} grid points match the direct formulas", grid.len(), grid.len())
            } else {
                format!("mismatch at {}", mismatches.join(", "))
            },
        ),
        line(
            "schedule",
            "first_level_epochs",
            example.n_epochs[0] == 16 && example.levels == 3,
            format!(
                "mu=1 L=8 D=1 eps=0.3: S = {}, N_0 = {} (expected S = 3, N_0 = 16)",
                example.levels, example.n_epochs[0]
            ),
        ),
    ])
}
