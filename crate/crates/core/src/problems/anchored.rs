use super::{MinimaxProblem, Point};
use crate::error::{require_positive, Result};

/// One regularization term `weight · (z − point)` of an anchored operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Anchor {
    pub weight: f64,
    pub point: Point,
}

/// Base operator plus an ordered list of anchoring terms:
/// `G(z) = F(z) + Σᵢ wᵢ (z − aᵢ)`.
///
/// This is the operator of `f(x, y) + Σᵢ (wᵢ/2)‖x − aᵢₓ‖² − (wᵢ/2)‖y − aᵢᵧ‖²`.
/// The anchors are kept as a list so that each level of a recursive run stays
/// visible; `reference::collapse` folds them into a single affine operator.
#[derive(Clone, Debug)]
pub struct AnchoredProblem<'a, P: ?Sized> {
    base: &'a P,
    anchors: Vec<Anchor>,
    total_weight: f64,
    // Σ wᵢ aᵢ, so evaluation costs one pass however many anchors there are
    weighted_sum: Vec<f64>,
}

impl<'a, P: MinimaxProblem + ?Sized> AnchoredProblem<'a, P> {
    /// An anchored problem with no anchors yet; operator equals the base.
    pub fn new(base: &'a P) -> Self {
        Self {
            base,
            anchors: Vec::new(),
            total_weight: 0.0,
            weighted_sum: vec![0.0; base.dim()],
        }
    }

    /// Returns a copy with one more anchor; `self` is left unchanged.
    pub fn push(&self, weight: f64, anchor: Point) -> Result<Self> {
        require_positive("weight", weight)?;
        self.base.check_point(&anchor)?;
        super::check_finite(anchor.as_slice())?;
        let mut weighted_sum = self.weighted_sum.clone();
        for (s, &a) in weighted_sum.iter_mut().zip(anchor.as_slice()) {
            *s += weight * a;
        }
        let mut anchors = self.anchors.clone();
        anchors.push(Anchor {
            weight,
            point: anchor,
        });
        Ok(Self {
            base: self.base,
            anchors,
            total_weight: self.total_weight + weight,
            weighted_sum,
        })
    }

    pub fn base(&self) -> &'a P {
        self.base
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

/// `anchor_push` on a bare problem: the base plus a single anchor.
pub fn anchor_push<P: MinimaxProblem + ?Sized>(
    base: &P,
    weight: f64,
    anchor: Point,
) -> Result<AnchoredProblem<'_, P>> {
    AnchoredProblem::new(base).push(weight, anchor)
}

impl<P: MinimaxProblem + ?Sized> MinimaxProblem for AnchoredProblem<'_, P> {
    fn d_x(&self) -> usize {
        self.base.d_x()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn modulus(&self) -> f64 {
        self.base.modulus() + self.total_weight
    }

    fn smoothness(&self) -> f64 {
        self.base.smoothness() + self.total_weight
    }

    #[inline]
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        self.base.apply(z, out);
        if self.anchors.is_empty() {
            return;
        }
        let w = self.total_weight;
        for ((o, &zi), &s) in out.iter_mut().zip(z).zip(&self.weighted_sum) {
            *o += w * zi - s;
        }
    }
}
