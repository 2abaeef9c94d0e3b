//! Ground truth for affine problems and numerical checks of the anchoring
//! inequalities.
//!
//! Everything here is pure: no oracle calls and no counters. Solutions come
//! from dense LU solves, and [`reference_seg`] is a deliberately plain
//! re-implementation of the extragradient recursion used to cross-check the
//! production solver draw for draw.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::StandardNormal;

use crate::error::{invalid, require_positive, Error, Result};
use crate::problems::{norm, AffineMinimaxProblem, Anchor, MinimaxProblem, Point};
use crate::solvers::RunTrace;

/// Additive slack on every validator inequality.
pub const SLACK: f64 = 1e-9;

fn residual_ok(residual: f64, rhs_norm: f64) -> bool {
    residual <= SLACK * (1.0 + rhs_norm)
}

fn solve(matrix: DMatrix<f64>, rhs: DVector<f64>, d_x: usize) -> Result<Point> {
    let lu = matrix.clone().lu();
    let solution = lu.solve(&rhs).ok_or(Error::NoUniqueSolution {
        residual: f64::INFINITY,
    })?;
    let residual = (&matrix * &solution - &rhs).norm();
    if !residual_ok(residual, rhs.norm()) || solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoUniqueSolution { residual });
    }
    Point::new(solution.as_slice().to_vec(), d_x)
}

/// `z* = −M⁻¹q`.
pub fn exact_saddle(problem: &AffineMinimaxProblem) -> Result<Point> {
    let rhs = -DVector::from_column_slice(problem.offset());
    solve(problem.matrix().clone(), rhs, problem.d_x())
}

fn check_anchors(problem: &AffineMinimaxProblem, anchors: &[Anchor]) -> Result<()> {
    for a in anchors {
        require_positive("weight", a.weight)?;
        problem.check_point(&a.point)?;
    }
    Ok(())
}

/// Folds anchors into one affine operator: `M + (Σwᵢ)I`, `q − Σ wᵢaᵢ`.
pub fn collapse(problem: &AffineMinimaxProblem, anchors: &[Anchor]) -> Result<AffineMinimaxProblem> {
    check_anchors(problem, anchors)?;
    let d = problem.dim();
    let total: f64 = anchors.iter().map(|a| a.weight).sum();
    let matrix = problem.matrix() + DMatrix::<f64>::identity(d, d) * total;
    let mut offset = problem.offset().to_vec();
    for a in anchors {
        for (o, &p) in offset.iter_mut().zip(a.point.as_slice()) {
            *o -= a.weight * p;
        }
    }
    AffineMinimaxProblem::new(
        matrix,
        offset,
        problem.d_x(),
        problem.modulus() + total,
        problem.smoothness() + total,
    )
}

/// Solution of `(M + (Σwᵢ)I) w = Σ wᵢaᵢ − q`.
pub fn anchored_exact(problem: &AffineMinimaxProblem, anchors: &[Anchor]) -> Result<Point> {
    exact_saddle(&collapse(problem, anchors)?)
}

fn single_anchor(lambda: f64, z0: &Point) -> [Anchor; 1] {
    [Anchor {
        weight: lambda,
        point: z0.clone(),
    }]
}

/// With `w*` the solution anchored at `(λ, z0)`: `‖w* − z0‖ ≤ ‖z* − z0‖`
/// and `‖w* − z*‖ ≤ ‖z* − z0‖`.
pub fn verify_nonexpansiveness(problem: &AffineMinimaxProblem, lambda: f64, z0: &Point) -> Result<bool> {
    require_positive("lambda", lambda)?;
    let z_star = exact_saddle(problem)?;
    let w_star = anchored_exact(problem, &single_anchor(lambda, z0))?;
    let r = z_star.distance(z0);
    Ok(w_star.distance(z0) <= r + SLACK && w_star.distance(&z_star) <= r + SLACK)
}

/// `‖F(w)‖ ≤ 2‖G(w)‖ + λ‖z0 − z*‖` with `G(w) = F(w) + λ(w − z0)`, for every sample.
pub fn verify_anchoring_bound(
    problem: &AffineMinimaxProblem,
    lambda: f64,
    z0: &Point,
    samples: &[Point],
) -> Result<bool> {
    require_positive("lambda", lambda)?;
    problem.check_point(z0)?;
    let z_star = exact_saddle(problem)?;
    let offset = lambda * z0.distance(&z_star);
    for w in samples {
        let f = problem.eval(w)?;
        let g: Vec<f64> = f
            .iter()
            .zip(w.as_slice().iter().zip(z0.as_slice()))
            .map(|(fi, (wi, ai))| fi + lambda * (wi - ai))
            .collect();
        if norm(&f) > 2.0 * norm(&g) + offset + SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact per-level solutions for a recursive run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub z_star: Point,
    /// `w*_s` for `s = 0..S−1`: the solution of level `s`, anchored at
    /// `z_1..z_s` with weights `μ·2¹..μ·2^s`. `w*_0 = z*`.
    pub anchored_solutions: Vec<Point>,
    /// Operator residual at each stored solution, `z*` first.
    pub residuals: Vec<f64>,
}

impl ReferenceSolution {
    pub fn for_trace(problem: &AffineMinimaxProblem, mu: f64, trace: &RunTrace) -> Result<Self> {
        require_positive("mu", mu)?;
        let z_star = exact_saddle(problem)?;
        let mut anchors = Vec::new();
        let mut anchored_solutions = Vec::new();
        let mut residuals = vec![problem.grad_norm(&z_star)?];
        let levels = trace.level_outputs.len();
        for s in 0..levels {
            if s > 0 {
                anchors.push(Anchor {
                    weight: mu * 2f64.powi(s as i32),
                    point: trace.level_outputs[s - 1].clone(),
                });
            }
            let collapsed = collapse(problem, &anchors)?;
            let w = exact_saddle(&collapsed)?;
            residuals.push(collapsed.grad_norm(&w)?);
            anchored_solutions.push(w);
        }
        Ok(Self {
            z_star,
            anchored_solutions,
            residuals,
        })
    }
}

/// Both sides of `‖F(z_S)‖ ≤ 16μ Σ_{s=1}^{S} 2^{s−1} ‖w*_{s−1} − z_s‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursiveBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl RecursiveBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + SLACK * (1.0 + self.rhs)
    }
}

pub fn recursive_bound(trace: &RunTrace, problem: &AffineMinimaxProblem, mu: f64) -> Result<RecursiveBound> {
    let outputs = &trace.level_outputs;
    if outputs.is_empty() {
        return Err(invalid("trace", "needs at least one completed recursion level"));
    }
    for z in outputs {
        problem.check_point(z)?;
    }
    if outputs.last() != Some(&trace.final_point) {
        return Err(invalid("trace", "final point is not the last level output"));
    }
    let reference = ReferenceSolution::for_trace(problem, mu, trace)?;
    let rhs = 16.0
        * mu
        * reference
            .anchored_solutions
            .iter()
            .zip(outputs)
            .enumerate()
            .map(|(i, (w, z))| 2f64.powi(i as i32) * w.distance(z))
            .sum::<f64>();
    Ok(RecursiveBound {
        lhs: problem.grad_norm(&trace.final_point)?,
        rhs,
    })
}

pub fn verify_recursive_bound(trace: &RunTrace, problem: &AffineMinimaxProblem, mu: f64) -> Result<bool> {
    Ok(recursive_bound(trace, problem, mu)?.holds())
}

/// Straight-line SEG on `M z + q` with injected noise `noise[2t]`, `noise[2t+1]`.
/// Returns every half-point.
pub fn reference_seg(
    problem: &AffineMinimaxProblem,
    z0: &Point,
    eta: f64,
    iterations: usize,
    noise: &[Vec<f64>],
) -> Result<Vec<Point>> {
    problem.check_point(z0)?;
    if noise.len() != 2 * iterations {
        return Err(invalid(
            "noise",
            format!("need {} vectors, got {}", 2 * iterations, noise.len()),
        ));
    }
    let m = problem.matrix();
    let q = DVector::from_column_slice(problem.offset());
    let mut z = DVector::from_column_slice(z0.as_slice());
    let mut halves = Vec::with_capacity(iterations);
    for t in 0..iterations {
        let xi = DVector::from_column_slice(&noise[2 * t]);
        let xj = DVector::from_column_slice(&noise[2 * t + 1]);
        if xi.len() != z.len() || xj.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: z.len(),
                found: xi.len().min(xj.len()),
            });
        }
        let half = &z - (m * &z + &q + xi) * eta;
        let next = &z - (m * &half + &q + xj) * eta;
        halves.push(Point::from_parts(half.as_slice().to_vec(), z0.d_x()));
        z = next;
    }
    Ok(halves)
}

fn random_point(rng: &mut Xoshiro256PlusPlus, d_x: usize, dim: usize, scale: f64) -> Point {
    let v = (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    Point::from_parts(v, d_x)
}

/// `(F(z) − F(z'))ᵀ(z − z') ≥ μ‖z − z'‖²` on `n_pairs` random pairs.
pub fn verify_monotonicity<P: MinimaxProblem + ?Sized>(problem: &P, mu: f64, n_pairs: usize, seed: u64) -> bool {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let (d_x, d) = (problem.d_x(), problem.dim());
    let mut fa = vec![0.0; d];
    let mut fb = vec![0.0; d];
    (0..n_pairs.max(1)).all(|_| {
        let a = random_point(&mut rng, d_x, d, 3.0);
        let b = random_point(&mut rng, d_x, d, 3.0);
        problem.apply(a.as_slice(), &mut fa);
        problem.apply(b.as_slice(), &mut fb);
        let inner: f64 = (0..d)
            .map(|i| (fa[i] - fb[i]) * (a.as_slice()[i] - b.as_slice()[i]))
            .sum();
        inner >= mu * a.dist2(&b) - SLACK
    })
}

/// `‖F(z) − F(z')‖ ≤ L‖z − z'‖` on `n_pairs` random pairs.
pub fn verify_smoothness<P: MinimaxProblem + ?Sized>(problem: &P, lipschitz: f64, n_pairs: usize, seed: u64) -> bool {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let (d_x, d) = (problem.d_x(), problem.dim());
    let mut fa = vec![0.0; d];
    let mut fb = vec![0.0; d];
    (0..n_pairs.max(1)).all(|_| {
        let a = random_point(&mut rng, d_x, d, 3.0);
        let b = random_point(&mut rng, d_x, d, 3.0);
        problem.apply(a.as_slice(), &mut fa);
        problem.apply(b.as_slice(), &mut fb);
        let diff: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        diff <= lipschitz * a.distance(&b) + SLACK
    })
}
