use crate::problems::Point;

/// Snapshot taken at the end of each SEG epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    /// Oracle counter after the epoch.
    pub sfo_count: u64,
    /// `‖F(z)‖` of the top-level problem at the epoch output.
    pub grad_norm: f64,
    pub level: usize,
    pub epoch: usize,
}

/// Bookkeeping for one `epoch_seg` call inside a recursive run.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSummary {
    pub level: usize,
    /// Strong-monotonicity modulus handed to `epoch_seg` (λ_s).
    pub modulus: f64,
    /// Smoothness handed to `epoch_seg` (2L).
    pub smoothness: f64,
    /// Modulus the anchored sub-problem reports for itself.
    pub problem_modulus: f64,
    /// Smoothness the anchored sub-problem reports for itself.
    pub problem_smoothness: f64,
    pub anchors: usize,
    pub n_epochs: u32,
    pub k_epochs: u32,
    pub sfo_calls: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    /// `z_{s+1}` for every completed recursion level.
    pub level_outputs: Vec<Point>,
    pub levels: Vec<LevelSummary>,
    /// Weight of the single anchor at `z0` used by the convex-concave reduction.
    pub regularization: Option<f64>,
    pub final_point: Point,
}

impl RunTrace {
    pub(crate) fn new(final_point: Point) -> Self {
        Self {
            records: Vec::new(),
            level_outputs: Vec::new(),
            levels: Vec::new(),
            regularization: None,
            final_point,
        }
    }

    /// Sum of the per-level oracle calls.
    pub fn level_sfo_total(&self) -> u64 {
        self.levels.iter().map(|l| l.sfo_calls).sum()
    }
}
