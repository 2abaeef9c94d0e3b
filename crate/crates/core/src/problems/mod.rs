//! Minimax problems described through their gradient operator.
//!
//! For `min_x max_y f(x, y)` the operator is `F(z) = (∇ₓf(z), −∇ᵧf(z))` with
//! `z = (x, y)` stored as one flat vector. A point is stationary iff `F(z) = 0`.

mod affine;
mod anchored;
pub mod io;

pub use affine::{gen_bilinear, gen_scsc_quadratic, AffineMinimaxProblem};
pub use anchored::{anchor_push, Anchor, AnchoredProblem};

use crate::error::{invalid, Error, Result};

/// A joint iterate `z = (x, y)`; the first `d_x` entries are the x block.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    data: Vec<f64>,
    d_x: usize,
}

impl Point {
    /// Builds a point, rejecting an empty y block and non-finite entries.
    pub fn new(data: Vec<f64>, d_x: usize) -> Result<Self> {
        if d_x == 0 || d_x >= data.len() {
            return Err(invalid(
                "d_x",
                format!("need 1 <= d_x < {}, got {d_x}", data.len()),
            ));
        }
        check_finite(&data)?;
        Ok(Self { data, d_x })
    }

    pub fn zeros(d_x: usize, d_y: usize) -> Result<Self> {
        Self::new(vec![0.0; d_x + d_y], d_x)
    }

    /// Crate-internal constructor for solver iterates, which may legitimately
    /// leave the finite range if a caller diverges.
    pub(crate) fn from_parts(data: Vec<f64>, d_x: usize) -> Self {
        debug_assert!(d_x >= 1 && d_x < data.len());
        Self { data, d_x }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn x(&self) -> &[f64] {
        &self.data[..self.d_x]
    }

    pub fn y(&self) -> &[f64] {
        &self.data[self.d_x..]
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_y(&self) -> usize {
        self.data.len() - self.d_x
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Squared Euclidean distance; panics if the dimensions differ.
    pub fn dist2(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim(), "point dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub(crate) fn same_shape(&self, d_x: usize, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        if self.d_x != d_x {
            return Err(Error::DimensionMismatch {
                expected: d_x,
                found: self.d_x,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A smooth minimax problem, known through its gradient operator.
///
/// `modulus` is a strong-monotonicity constant μ ≥ 0 and `smoothness` a
/// Lipschitz constant L > 0 of the operator; both are bounds the problem
/// vouches for, not computed spectra.
pub trait MinimaxProblem: Sync {
    fn d_x(&self) -> usize;

    fn dim(&self) -> usize;

    fn modulus(&self) -> f64;

    fn smoothness(&self) -> f64;

    /// Writes `F(z)` into `out`. Both slices have length `dim()`; no checks.
    fn apply(&self, z: &[f64], out: &mut [f64]);

    fn d_y(&self) -> usize {
        self.dim() - self.d_x()
    }

    /// Exact, noise-free operator value. Never touches an oracle counter.
    fn eval(&self, z: &Point) -> Result<Vec<f64>> {
        self.check_point(z)?;
        check_finite(z.as_slice())?;
        let mut out = vec![0.0; self.dim()];
        self.apply(z.as_slice(), &mut out);
        Ok(out)
    }

    /// `‖F(z)‖`, the stationarity measure.
    fn grad_norm(&self, z: &Point) -> Result<f64> {
        Ok(norm(&self.eval(z)?))
    }

    fn check_point(&self, z: &Point) -> Result<()> {
        z.same_shape(self.d_x(), self.dim())
    }
}

impl<P: MinimaxProblem + ?Sized> MinimaxProblem for &P {
    fn d_x(&self) -> usize {
        (**self).d_x()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn modulus(&self) -> f64 {
        (**self).modulus()
    }
    fn smoothness(&self) -> f64 {
        (**self).smoothness()
    }
    #[inline]
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        (**self).apply(z, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rejects_bad_split() {
        assert!(Point::new(vec![1.0, 2.0], 0).is_err());
        assert!(Point::new(vec![1.0, 2.0], 2).is_err());
        assert!(Point::new(vec![1.0, 2.0], 1).is_ok());
    }

    #[test]
    fn point_rejects_nan() {
        let err = Point::new(vec![1.0, f64::NAN, 0.0], 1).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 1 }));
    }

    #[test]
    fn blocks() {
        let p = Point::new(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(p.x(), &[1.0, 2.0]);
        assert_eq!(p.y(), &[3.0]);
        assert_eq!(p.d_y(), 1);
        assert_eq!(p.dist2(&Point::zeros(2, 1).unwrap()), 14.0);
    }
}
