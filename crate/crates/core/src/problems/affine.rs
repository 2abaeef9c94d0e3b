use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::StandardNormal;

use super::{check_finite, MinimaxProblem};
use crate::error::{invalid, require_finite, require_positive, Error, Result};

/// Affine gradient operator `F(z) = M z + q` of a quadratic game.
///
/// `M = [[P, A], [−Aᵀ, Q]]` with `P`, `Q` symmetric, which is exactly the
/// operator of `f(x, y) = ½xᵀPx + xᵀAy − ½yᵀQy + bₓᵀx − bᵧᵀy`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMinimaxProblem {
    matrix: DMatrix<f64>,
    offset: Vec<f64>,
    d_x: usize,
    modulus: f64,
    smoothness: f64,
}

impl AffineMinimaxProblem {
    /// Validates shapes and the saddle block structure. The claimed constants
    /// are taken on trust; see [`verify_constants`](Self::verify_constants).
    pub fn new(
        matrix: DMatrix<f64>,
        offset: Vec<f64>,
        d_x: usize,
        modulus: f64,
        smoothness: f64,
    ) -> Result<Self> {
        let d = offset.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if d_x == 0 || d_x >= d {
            return Err(invalid("d_x", format!("need 1 <= d_x < {d}, got {d_x}")));
        }
        check_finite(matrix.as_slice())?;
        check_finite(&offset)?;
        require_finite("mu", modulus)?;
        if modulus < 0.0 {
            return Err(invalid("mu", format!("must be >= 0, got {modulus}")));
        }
        require_positive("L", smoothness)?;
        if modulus > smoothness {
            return Err(invalid("mu", format!("mu = {modulus} exceeds L = {smoothness}")));
        }
        check_block_structure(&matrix, d_x)?;
        Ok(Self {
            matrix,
            offset,
            d_x,
            modulus,
            smoothness,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Smallest eigenvalue of `(M + Mᵀ)/2`, the tightest strong-monotonicity modulus.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    /// `‖M‖₂`, the tightest Lipschitz constant of the operator.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    /// True iff the claimed μ and L hold for the actual matrix up to `tol`.
    pub fn verify_constants(&self, tol: f64) -> bool {
        self.min_symmetric_eigenvalue() >= self.modulus - tol
            && self.spectral_norm() <= self.smoothness + tol
    }
}

fn check_block_structure(m: &DMatrix<f64>, d_x: usize) -> Result<()> {
    let d = m.nrows();
    let scale = 1.0 + m.amax();
    let tol = 1e-12 * scale;
    for i in 0..d {
        for j in 0..d {
            let same_block = (i < d_x) == (j < d_x);
            let mirror = if same_block { m[(j, i)] } else { -m[(j, i)] };
            if (m[(i, j)] - mirror).abs() > tol {
                return Err(invalid(
                    "matrix",
                    format!("entry ({i}, {j}) breaks the [[P, A], [-A^T, Q]] structure"),
                ));
            }
        }
    }
    Ok(())
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

impl MinimaxProblem for AffineMinimaxProblem {
    fn d_x(&self) -> usize {
        self.d_x
    }

    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn modulus(&self) -> f64 {
        self.modulus
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    #[inline]
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let d = self.offset.len();
        out.copy_from_slice(&self.offset);
        // column-major storage: accumulate one column at a time
        for (col, &zj) in self.matrix.as_slice().chunks_exact(d).zip(z) {
            axpy(zj, col, out);
        }
    }
}

// Fixed-width blocks so the inner update vectorizes regardless of inlining context.
#[inline(always)]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    let mut yb = y.chunks_exact_mut(4);
    let mut xb = x.chunks_exact(4);
    for (y4, x4) in (&mut yb).zip(&mut xb) {
        let y4: &mut [f64; 4] = y4.try_into().expect("block width");
        let x4: &[f64; 4] = x4.try_into().expect("block width");
        for k in 0..4 {
            y4[k] += a * x4[k];
        }
    }
    for (yi, &xi) in yb.into_remainder().iter_mut().zip(xb.remainder()) {
        *yi += a * xi;
    }
}

fn gaussian_matrix(rng: &mut Xoshiro256PlusPlus, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(rng: &mut Xoshiro256PlusPlus, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    // sign fix so the distribution is Haar
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Symmetric matrix with spectrum in `[lo, hi]`, pinning `pinned` as one eigenvalue.
fn random_symmetric(rng: &mut Xoshiro256PlusPlus, n: usize, lo: f64, hi: f64, pinned: f64) -> DMatrix<f64> {
    let u = random_orthogonal(rng, n);
    let spectrum = DVector::from_fn(n, |i, _| {
        if i == 0 {
            pinned
        } else {
            lo + (hi - lo) * rng.gen::<f64>()
        }
    });
    let m = &u * DMatrix::from_diagonal(&spectrum) * u.transpose();
    (&m + m.transpose()) * 0.5
}

fn assemble(p: &DMatrix<f64>, q: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let (dx, dy) = (p.nrows(), q.nrows());
    let mut m = DMatrix::zeros(dx + dy, dx + dy);
    m.view_mut((0, 0), (dx, dx)).copy_from(p);
    m.view_mut((dx, dx), (dy, dy)).copy_from(q);
    m.view_mut((0, dx), (dx, dy)).copy_from(a);
    m.view_mut((dx, 0), (dy, dx)).copy_from(&(-a.transpose()));
    m
}

fn check_dims(d_x: usize, d_y: usize) -> Result<()> {
    if d_x == 0 || d_y == 0 {
        return Err(invalid("d_x/d_y", "both blocks must be non-empty"));
    }
    Ok(())
}

/// Random μ-strongly-monotone, L-smooth affine game with a random offset.
///
/// `P` carries the eigenvalue μ and `Q` the eigenvalue `max(μ, L/2)`, every
/// other eigenvalue lies between them, and `A` is scaled to
/// `‖A‖₂ = L − max(μ, L/2)` so that `‖M‖₂ ≤ ‖sym M‖₂ + ‖A‖₂ ≤ L`.
pub fn gen_scsc_quadratic(
    d_x: usize,
    d_y: usize,
    mu: f64,
    lipschitz: f64,
    seed: u64,
) -> Result<AffineMinimaxProblem> {
    check_dims(d_x, d_y)?;
    require_positive("mu", mu)?;
    require_positive("L", lipschitz)?;
    if mu > lipschitz {
        return Err(invalid("mu", format!("mu = {mu} exceeds L = {lipschitz}")));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let hi = mu.max(lipschitz / 2.0);
    let p = random_symmetric(&mut rng, d_x, mu, hi, mu);
    let q = random_symmetric(&mut rng, d_y, mu, hi, hi);
    let mut a = gaussian_matrix(&mut rng, d_x, d_y);
    let a_budget = lipschitz - hi;
    let a_norm = spectral_norm(&a);
    if a_budget <= 0.0 || a_norm == 0.0 {
        a.fill(0.0);
    } else {
        a *= a_budget / a_norm;
    }
    let mut m = assemble(&p, &q, &a);
    // rounding can push the norm a few ulps past L
    while spectral_norm(&m) > lipschitz {
        a *= 1.0 - 1e-12;
        m = assemble(&p, &q, &a);
    }
    let offset = (0..d_x + d_y).map(|_| rng.sample(StandardNormal)).collect();
    AffineMinimaxProblem::new(m, offset, d_x, mu, lipschitz)
}

/// Random bilinear game `f(x, y) = xᵀAy` with square invertible `A`, `‖A‖₂ = L`.
///
/// Singular values of `A` lie in `[L/4, L]`, so the unique stationary point is 0.
pub fn gen_bilinear(d_x: usize, d_y: usize, lipschitz: f64, seed: u64) -> Result<AffineMinimaxProblem> {
    check_dims(d_x, d_y)?;
    if d_x != d_y {
        return Err(invalid(
            "d_y",
            format!("bilinear coupling must be square, got {d_x} x {d_y}"),
        ));
    }
    require_positive("L", lipschitz)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let u = random_orthogonal(&mut rng, d_x);
    let v = random_orthogonal(&mut rng, d_y);
    let singular = DVector::from_fn(d_x, |i, _| {
        if i == 0 {
            lipschitz
        } else {
            lipschitz * (0.25 + 0.75 * rng.gen::<f64>())
        }
    });
    let mut a = &u * DMatrix::from_diagonal(&singular) * v.transpose();
    let zeros_x = DMatrix::zeros(d_x, d_x);
    let zeros_y = DMatrix::zeros(d_y, d_y);
    let mut m = assemble(&zeros_x, &zeros_y, &a);
    while spectral_norm(&m) > lipschitz {
        a *= 1.0 - 1e-12;
        m = assemble(&zeros_x, &zeros_y, &a);
    }
    AffineMinimaxProblem::new(m, vec![0.0; d_x + d_y], d_x, 0.0, lipschitz)
}
