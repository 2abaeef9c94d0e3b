//! Shared fixtures for the criterion benchmarks.

use minimax_core::reference::exact_saddle;
use minimax_core::{gen_scsc_quadratic, AffineMinimaxProblem, Point};

/// SCSC quadratic with `d_x = d_y = half`, μ = 1, L = 8, and a start point
/// at unit distance from its saddle.
pub fn fixture(half: usize) -> (AffineMinimaxProblem, Point) {
    let problem = gen_scsc_quadratic(half, half, 1.0, 8.0, 1).expect("valid constants");
    let z_star = exact_saddle(&problem).expect("unique saddle");
    let z0 = minimax_core::harness::start_point(&z_star, 1.0, 0);
    (problem, z0)
}
