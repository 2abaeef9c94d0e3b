use super::{HalfPointSelection, RunTrace, TraceRecord, REL_TOL};
use crate::error::{invalid, require_positive, Result};
use crate::oracle::StochasticOracle;
use crate::problems::{check_finite, norm, MinimaxProblem, Point};

/// Step size and iteration count of one SEG run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegParams {
    pub eta: f64,
    pub iterations: u64,
}

impl SegParams {
    /// Rejects `eta ∉ (0, 1/(4L)]` and `iterations < 1`.
    pub fn validate(&self, smoothness: f64) -> Result<()> {
        require_positive("eta", self.eta)?;
        let cap = 1.0 / (4.0 * smoothness);
        if self.eta > cap * (1.0 + REL_TOL) {
            return Err(invalid(
                "eta",
                format!("step {} exceeds 1/(4L) = {cap} for L = {smoothness}", self.eta),
            ));
        }
        if self.iterations < 1 {
            return Err(invalid("iterations", "need at least one iteration"));
        }
        Ok(())
    }
}

/// The extragradient recursion; `visit(t, z_{t+1/2})` sees every half-point.
/// Leaves `z_T` in `z`.
pub(crate) fn extragradient<P, F>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z: &mut [f64],
    params: SegParams,
    mut visit: F,
) -> Result<()>
where
    P: MinimaxProblem + ?Sized,
    F: FnMut(u64, &[f64]),
{
    let eta = params.eta;
    let mut half = vec![0.0; z.len()];
    let mut g = vec![0.0; z.len()];
    for t in 0..params.iterations {
        oracle.eval_into(problem, z, &mut g)?;
        for ((h, &zi), &gi) in half.iter_mut().zip(z.iter()).zip(&g) {
            *h = zi - eta * gi;
        }
        visit(t, &half);
        oracle.eval_into(problem, &half, &mut g)?;
        for (zi, &gi) in z.iter_mut().zip(&g) {
            *zi -= eta * gi;
        }
    }
    Ok(())
}

/// One SEG run, returning the selected half-point in place of trace bookkeeping.
pub(crate) fn seg_point<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &[f64],
    params: SegParams,
    selection: &mut HalfPointSelection,
) -> Result<Vec<f64>> {
    params.validate(problem.smoothness())?;
    let chosen_index = selection.pick(params.iterations);
    let mut z = z0.to_vec();
    let mut chosen = vec![0.0; z0.len()];
    extragradient(oracle, problem, &mut z, params, |t, half| {
        if t == chosen_index {
            chosen.copy_from_slice(half);
        }
    })?;
    Ok(chosen)
}

/// Stochastic extragradient: `T` iterations of
///
/// ```text
/// z_{t+1/2} = z_t − η F(z_t; ξ)
/// z_{t+1}   = z_t − η F(z_{t+1/2}; ξ')
/// ```
///
/// with two independent oracle calls per iteration. Returns one half-point
/// picked by `selection` (uniform by default) and a single-record trace.
pub fn seg<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &Point,
    params: SegParams,
    selection: &mut HalfPointSelection,
) -> Result<(Point, RunTrace)> {
    problem.check_point(z0)?;
    check_finite(z0.as_slice())?;
    let out = seg_point(oracle, problem, z0.as_slice(), params, selection)?;
    let mut g = vec![0.0; out.len()];
    problem.apply(&out, &mut g);
    let point = Point::from_parts(out, z0.d_x());
    let mut trace = RunTrace::new(point.clone());
    trace.records.push(TraceRecord {
        sfo_count: oracle.sfo_count(),
        grad_norm: norm(&g),
        level: 0,
        epoch: 0,
    });
    Ok((point, trace))
}

/// Runs SEG and returns every half-point `z_{1/2}, …, z_{T−1/2}` in order.
pub fn seg_half_points<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &Point,
    params: SegParams,
) -> Result<Vec<Point>> {
    problem.check_point(z0)?;
    check_finite(z0.as_slice())?;
    params.validate(problem.smoothness())?;
    let mut z = z0.as_slice().to_vec();
    let mut halves = Vec::with_capacity(params.iterations as usize);
    extragradient(oracle, problem, &mut z, params, |_, half| {
        halves.push(Point::from_parts(half.to_vec(), z0.d_x()));
    })?;
    Ok(halves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_scsc_quadratic, AffineMinimaxProblem};
    use crate::reference::exact_saddle;
    use nalgebra::dmatrix;

    fn homogeneous_spiral() -> AffineMinimaxProblem {
        AffineMinimaxProblem::new(dmatrix![1.0, 2.0; -2.0, 1.0], vec![0.0, 0.0], 1, 1.0, 5f64.sqrt())
            .unwrap()
    }

    #[test]
    fn single_half_step_by_hand() {
        let p = homogeneous_spiral();
        let z0 = Point::new(vec![1.0, 1.0], 1).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let params = SegParams { eta: 1.0 / 16.0, iterations: 1 };
        let (z, _) = seg(&mut oracle, &p, &z0, params, &mut HalfPointSelection::uniform(0, 0)).unwrap();
        assert_eq!(z.as_slice(), &[0.8125, 1.0625]);
        assert_eq!(oracle.sfo_count(), 2);
    }

    #[test]
    fn fixed_point_at_solution() {
        let p = gen_scsc_quadratic(2, 2, 1.0, 4.0, 8).unwrap();
        let star = exact_saddle(&p).unwrap();
        let mut oracle = StochasticOracle::seeded(0.0, 0, 0).unwrap();
        let params = SegParams { eta: 1.0 / 16.0, iterations: 20 };
        for half in seg_half_points(&mut oracle, &p, &star, params).unwrap() {
            assert!(half.distance(&star) < 1e-12);
        }
    }

    #[test]
    fn consumes_two_calls_per_iteration() {
        let p = gen_scsc_quadratic(2, 1, 1.0, 2.0, 1).unwrap();
        let z0 = Point::zeros(2, 1).unwrap();
        let mut oracle = StochasticOracle::seeded(1.0, 4, 0).unwrap();
        let params = SegParams { eta: 0.125, iterations: 5 };
        let (_, trace) = seg(&mut oracle, &p, &z0, params, &mut HalfPointSelection::Last).unwrap();
        assert_eq!(oracle.sfo_count(), 10);
        assert_eq!(trace.records[0].sfo_count, 10);
    }

    #[test]
    fn rejects_large_step_and_zero_iterations() {
        let p = gen_scsc_quadratic(1, 1, 1.0, 2.0, 1).unwrap();
        let z0 = Point::zeros(1, 1).unwrap();
        let mut oracle = StochasticOracle::seeded(1.0, 4, 0).unwrap();
        let mut sel = HalfPointSelection::Last;
        let too_big = SegParams { eta: 0.126, iterations: 3 };
        assert!(seg(&mut oracle, &p, &z0, too_big, &mut sel).is_err());
        let none = SegParams { eta: 0.1, iterations: 0 };
        assert!(seg(&mut oracle, &p, &z0, none, &mut sel).is_err());
        let negative = SegParams { eta: -0.1, iterations: 3 };
        assert!(seg(&mut oracle, &p, &z0, negative, &mut sel).is_err());
        assert_eq!(oracle.sfo_count(), 0);
    }

    #[test]
    fn selection_does_not_change_noise() {
        // the half-point choice draws from its own stream
        let p = gen_scsc_quadratic(2, 2, 1.0, 4.0, 2).unwrap();
        let z0 = Point::new(vec![1.0, 0.0, -1.0, 2.0], 2).unwrap();
        let params = SegParams { eta: 1.0 / 16.0, iterations: 30 };
        let mut a = StochasticOracle::seeded(0.5, 11, 3).unwrap();
        let mut b = StochasticOracle::seeded(0.5, 11, 3).unwrap();
        let all = seg_half_points(&mut a, &p, &z0, params).unwrap();
        let (last, _) = seg(&mut b, &p, &z0, params, &mut HalfPointSelection::Last).unwrap();
        assert_eq!(&last, all.last().unwrap());
        let mut c = StochasticOracle::seeded(0.5, 11, 3).unwrap();
        let (u, _) = seg(&mut c, &p, &z0, params, &mut HalfPointSelection::uniform(1, 1)).unwrap();
        assert!(all.contains(&u));
    }
}
