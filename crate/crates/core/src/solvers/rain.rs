use super::epoch::{epoch_seg_impl, Monitor};
use super::schedule::rain_schedule;
use super::{HalfPointSelection, LevelSummary, RunTrace, REL_TOL};
use crate::error::{invalid, require_positive, Result};
use crate::oracle::StochasticOracle;
use crate::problems::{anchor_push, check_finite, AnchoredProblem, MinimaxProblem, Point};

/// Inputs of a recursive anchored run on a μ-strongly monotone, L-smooth problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RainParams {
    pub mu: f64,
    pub lipschitz: f64,
    /// Target `E‖F(z_S)‖ ≤ eps`.
    pub eps: f64,
    /// Bound `D ≥ ‖z0 − z*‖`.
    pub distance: f64,
    /// Noise level used to size the schedule.
    pub sigma: f64,
}

/// Inputs of the convex-concave reduction on a monotone, L-smooth problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcParams {
    pub lipschitz: f64,
    pub eps: f64,
    pub distance: f64,
    pub sigma: f64,
}

pub(crate) fn rain_impl<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &Point,
    params: RainParams,
    selection: &mut HalfPointSelection,
    metric: &dyn MinimaxProblem,
) -> Result<RunTrace> {
    problem.check_point(z0)?;
    check_finite(z0.as_slice())?;
    let schedule = rain_schedule(params.mu, params.lipschitz, params.eps, params.distance, params.sigma)?;
    if problem.smoothness() > params.lipschitz * (1.0 + REL_TOL) {
        return Err(invalid(
            "L",
            format!("problem smoothness {} exceeds L = {}", problem.smoothness(), params.lipschitz),
        ));
    }
    if problem.modulus() < params.mu * (1.0 - REL_TOL) {
        return Err(invalid(
            "mu",
            format!("problem modulus {} is below mu = {}", problem.modulus(), params.mu),
        ));
    }

    let d_x = z0.d_x();
    let mut records = Vec::new();
    let mut levels = Vec::new();
    let mut level_outputs = Vec::new();
    let mut current = AnchoredProblem::new(problem);
    let mut z = z0.as_slice().to_vec();
    let runs = schedule.levels.max(1);

    for s in 0..runs {
        let epoch = schedule.epoch_params(s);
        // each sub-problem is at least λ_s-strongly monotone and at most 2L-smooth
        assert!(current.modulus() >= epoch.mu * (1.0 - REL_TOL), "level {s} modulus");
        assert!(current.smoothness() <= epoch.lipschitz * (1.0 + REL_TOL), "level {s} smoothness");
        let before = oracle.sfo_count();
        let mut monitor = Monitor {
            metric,
            level: s,
            records: &mut records,
        };
        z = epoch_seg_impl(oracle, &current, &z, &epoch, selection, &mut monitor)?;
        levels.push(LevelSummary {
            level: s,
            modulus: epoch.mu,
            smoothness: epoch.lipschitz,
            problem_modulus: current.modulus(),
            problem_smoothness: current.smoothness(),
            anchors: current.anchors().len(),
            n_epochs: epoch.n,
            k_epochs: epoch.k,
            sfo_calls: oracle.sfo_count() - before,
        });
        let output = Point::from_parts(z.clone(), d_x);
        if schedule.levels > 0 {
            level_outputs.push(output.clone());
        }
        if s + 1 < runs {
            // f_{s+1} = f_s + (λ_{s+1}/2)‖x − x_{s+1}‖² − (λ_{s+1}/2)‖y − y_{s+1}‖²
            current = current.push(schedule.lambdas[s + 1], output)?;
        }
    }

    let mut trace = RunTrace::new(Point::from_parts(z, d_x));
    trace.records = records;
    trace.levels = levels;
    trace.level_outputs = level_outputs;
    Ok(trace)
}

/// Recursive anchored iteration for a μ-strongly monotone, L-smooth problem.
///
/// Level `s = 0..S−1` runs `epoch_seg` with modulus `λ_s = μ·2^s`,
/// smoothness `2L` and the scheduled `(N_s, K_s)` on
/// `G_s(z) = F(z) + Σ_{i=1}^{s} λ_i (z − z_i)`, starting at `z_s`; its output
/// `z_{s+1}` becomes the next anchor. Returns `z_S`. When `L < 2μ` there are
/// no levels and a single `epoch_seg` runs on the base problem.
pub fn rain<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &Point,
    params: RainParams,
    selection: &mut HalfPointSelection,
) -> Result<(Point, RunTrace)> {
    let trace = rain_impl(oracle, problem, z0, params, selection, &problem)?;
    Ok((trace.final_point.clone(), trace))
}

/// Anchor weight `λ = min(ε/D, L)` of the convex-concave reduction.
pub fn cc_anchor_weight(eps: f64, distance: f64, lipschitz: f64) -> f64 {
    (eps / distance).min(lipschitz)
}

/// Convex-concave reduction: anchors once at `z0` with `λ = min(ε/D, L)` and
/// runs [`rain`] on `G(z) = F(z) + λ(z − z0)` with modulus λ and smoothness
/// `L + λ`. Trace records measure `‖F‖` of the original problem.
pub fn rain_cc<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &Point,
    params: CcParams,
    selection: &mut HalfPointSelection,
) -> Result<(Point, RunTrace)> {
    require_positive("eps", params.eps)?;
    require_positive("D", params.distance)?;
    require_positive("L", params.lipschitz)?;
    if problem.smoothness() > params.lipschitz * (1.0 + REL_TOL) {
        return Err(invalid(
            "L",
            format!("problem smoothness {} exceeds L = {}", problem.smoothness(), params.lipschitz),
        ));
    }
    let lambda = cc_anchor_weight(params.eps, params.distance, params.lipschitz);
    let regularized = anchor_push(problem, lambda, z0.clone())?;
    let inner = RainParams {
        mu: lambda,
        lipschitz: params.lipschitz + lambda,
        eps: params.eps,
        distance: params.distance,
        sigma: params.sigma,
    };
    let mut trace = rain_impl(oracle, &regularized, z0, inner, selection, &problem)?;
    trace.regularization = Some(lambda);
    Ok((trace.final_point.clone(), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_bilinear, gen_scsc_quadratic};
    use crate::reference::exact_saddle;

    fn params(sigma: f64) -> RainParams {
        RainParams { mu: 1.0, lipschitz: 8.0, eps: 0.5, distance: 1.0, sigma }
    }

    #[test]
    fn stays_at_solution_without_noise() {
        let p = gen_scsc_quadratic(2, 2, 1.0, 8.0, 1).unwrap();
        let star = exact_saddle(&p).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let (z, trace) =
            rain(&mut oracle, &p, &star, params(0.0), &mut HalfPointSelection::uniform(0, 0)).unwrap();
        assert_eq!(trace.level_outputs.len(), 3);
        for out in &trace.level_outputs {
            assert!(out.distance(&star) < 1e-12);
        }
        assert!(p.grad_norm(&z).unwrap() < 1e-12);
    }

    #[test]
    fn level_structure() {
        let p = gen_scsc_quadratic(2, 2, 1.0, 8.0, 1).unwrap();
        let z0 = Point::zeros(2, 2).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let (_, trace) =
            rain(&mut oracle, &p, &z0, params(0.0), &mut HalfPointSelection::Last).unwrap();
        let moduli: Vec<f64> = trace.levels.iter().map(|l| l.modulus).collect();
        assert_eq!(moduli, vec![1.0, 2.0, 4.0]);
        assert!(trace.levels.iter().all(|l| l.smoothness == 16.0));
        let anchors: Vec<usize> = trace.levels.iter().map(|l| l.anchors).collect();
        assert_eq!(anchors, vec![0, 1, 2]);
        // 1, 1+2, 1+2+4
        let reported: Vec<f64> = trace.levels.iter().map(|l| l.problem_modulus).collect();
        assert_eq!(reported, vec![1.0, 3.0, 7.0]);
        assert!(trace.levels.iter().all(|l| l.problem_smoothness <= 16.0));
        assert_eq!(trace.level_sfo_total(), oracle.sfo_count());
        assert!(trace.records.windows(2).all(|w| w[0].sfo_count < w[1].sfo_count));
    }

    #[test]
    fn degenerate_single_epoch_run() {
        let p = gen_scsc_quadratic(1, 1, 1.0, 1.5, 1).unwrap();
        let z0 = Point::new(vec![1.0, -1.0], 1).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let rp = RainParams { mu: 1.0, lipschitz: 1.5, eps: 0.1, distance: 3.0, sigma: 0.0 };
        let (_, trace) = rain(&mut oracle, &p, &z0, rp, &mut HalfPointSelection::Last).unwrap();
        assert!(trace.level_outputs.is_empty());
        assert_eq!(trace.levels.len(), 1);
        assert_eq!(trace.levels[0].smoothness, 3.0);
    }

    #[test]
    fn rejects_inconsistent_constants() {
        let p = gen_scsc_quadratic(1, 1, 1.0, 8.0, 1).unwrap();
        let z0 = Point::zeros(1, 1).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let mut sel = HalfPointSelection::Last;
        let loose_l = RainParams { lipschitz: 4.0, ..params(0.0) };
        assert!(rain(&mut oracle, &p, &z0, loose_l, &mut sel).is_err());
        let big_mu = RainParams { mu: 2.0, ..params(0.0) };
        assert!(rain(&mut oracle, &p, &z0, big_mu, &mut sel).is_err());
    }

    #[test]
    fn cc_weight_and_structure() {
        assert_eq!(cc_anchor_weight(0.1, 10.0, 5.0), 0.01);
        assert_eq!(cc_anchor_weight(100.0, 1.0, 5.0), 5.0);
        let p = gen_bilinear(1, 1, 5.0, 2).unwrap();
        let z0 = Point::new(vec![0.5, 0.5], 1).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let cc = CcParams { lipschitz: 5.0, eps: 0.1, distance: 10.0, sigma: 0.0 };
        let (_, trace) = rain_cc(&mut oracle, &p, &z0, cc, &mut HalfPointSelection::Last).unwrap();
        assert_eq!(trace.regularization, Some(0.01));
        let first = &trace.levels[0];
        assert!((first.problem_modulus - 0.01).abs() < 1e-15);
        assert!((first.smoothness - 2.0 * 5.01).abs() < 1e-12);
        // ⌊log₂(5.01/0.01)⌋ = 8 levels
        assert_eq!(trace.levels.len(), 8);
    }

    #[test]
    fn cc_at_solution() {
        let p = gen_bilinear(2, 2, 2.0, 3).unwrap();
        let z0 = Point::zeros(2, 2).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let cc = CcParams { lipschitz: 2.0, eps: 0.3, distance: 1.0, sigma: 0.0 };
        let (w, _) = rain_cc(&mut oracle, &p, &z0, cc, &mut HalfPointSelection::uniform(0, 0)).unwrap();
        assert_eq!(p.grad_norm(&w).unwrap(), 0.0);
    }
}
