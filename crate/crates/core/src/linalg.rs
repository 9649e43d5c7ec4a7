//! Dense complex matrix kernel.
//!
//! Everything in the crate is expressed with [`CMatrix`], a dynamically sized
//! complex matrix. This module supplies the few spectral primitives the rest of
//! the crate needs (operator norms, Hermitian functional calculus, kernels) and
//! the [`Tolerance`] policy shared by every residual check.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical tolerance policy.
///
/// `abs_tol` is the base residual tolerance (scaled by dimension where a check
/// says so); `margin` is the distance kept from the boundary of the unit ball,
/// so "strictly inside the disc" means `‖γ*‖ ≤ 1 − margin`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub margin: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-10,
            margin: 0.05,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, margin: f64) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::InvalidTolerance(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if !(margin > 0.0 && margin < 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "margin must lie in (0, 1), got {margin}"
            )));
        }
        Ok(Tolerance { abs_tol, margin })
    }

    /// Largest norm accepted for a disc point used as a Möbius parameter.
    pub fn radius(&self) -> f64 {
        1.0 - self.margin
    }

    /// `abs_tol` scaled by a dimension (at least 1).
    pub fn scaled(&self, dim: usize) -> f64 {
        self.abs_tol * dim.max(1) as f64
    }
}

/// Errors with [`Error::NonFinite`] if any entry is NaN or infinite.
pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Largest singular value. Empty matrices have norm 0.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator-norm distance `‖a − b‖`.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    operator_norm(&(a - b))
}

/// `‖m − m*‖`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    operator_norm(&(m - m.adjoint()))
}

/// `‖m*m − I‖ + ‖mm* − I‖` for a square matrix.
pub fn unitary_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let id = identity(n);
    operator_norm(&(m.adjoint() * m - &id)) + operator_norm(&(m * m.adjoint() - &id))
}

/// Applies a real function to the spectrum of a Hermitian matrix.
///
/// The input is symmetrised first, so tiny anti-Hermitian noise is discarded.
pub fn hermitian_function<F>(p: &CMatrix, f: F) -> CMatrix
where
    F: Fn(f64) -> f64,
{
    let n = p.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let sym = (p + p.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fj = c64(f(lambda), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(p: &CMatrix) -> Vec<f64> {
    if p.nrows() == 0 {
        return Vec::new();
    }
    let sym = (p + p.adjoint()) * c64(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn check_hermitian(p: &CMatrix, tol: &Tolerance) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::ShapeMismatch {
            expected: (p.nrows(), p.nrows()),
            found: (p.nrows(), p.ncols()),
        });
    }
    check_finite(p)?;
    let defect = hermitian_defect(p);
    if defect > tol.abs_tol {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Positive square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues are clamped at 0 before the square root.
pub fn hermitian_sqrt(p: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    check_hermitian(p, tol)?;
    Ok(hermitian_function(p, |x| x.max(0.0).sqrt()))
}

/// `P^{-1/2}` for Hermitian positive definite `P`.
///
/// Fails with [`Error::NotPositiveDefinite`] when the smallest eigenvalue does
/// not exceed `abs_tol`; for `P = I − γ*γ` that means `γ` has left the open
/// unit ball.
pub fn hermitian_inv_sqrt(p: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    check_hermitian(p, tol)?;
    let min_eig = hermitian_eigenvalues(p).first().cloned().unwrap_or(1.0);
    if min_eig <= tol.abs_tol {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eig });
    }
    Ok(hermitian_function(p, |x| 1.0 / x.sqrt()))
}

/// Orthonormal basis (as column vectors) of the numerical kernel of `l`:
/// right singular vectors whose singular value is at most
/// `abs_tol · ‖l‖`.
pub fn nullspace_basis(l: &CMatrix, tol: &Tolerance) -> Vec<CMatrix> {
    let n = l.ncols();
    if n == 0 {
        return Vec::new();
    }
    if l.nrows() == 0 {
        return (0..n).map(|i| unit_vector(n, i)).collect();
    }
    // Pad to at least square so the SVD returns a full set of right vectors.
    let padded = if l.nrows() < n {
        let mut p = zeros(n, n);
        p.view_mut((0, 0), (l.nrows(), n)).copy_from(l);
        p
    } else {
        l.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol.abs_tol * smax;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(i, _)| v_t.row(i).adjoint())
        .map(|c| CMatrix::from_iterator(c.nrows(), 1, c.iter().cloned()))
        .collect()
}

/// Numerical rank of a list of matrices viewed as vectors.
pub fn span_rank(vectors: &[CMatrix], tol: &Tolerance) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let len = vectors[0].len();
    let mut stacked = zeros(len, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for (i, z) in v.iter().enumerate() {
            stacked[(i, j)] = *z;
        }
    }
    let svd = stacked.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .filter(|&&s| s > tol.abs_tol * smax.max(1.0))
        .count()
}

/// Least-squares solution of `a x = b` (minimal norm).
pub fn least_squares(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, tol.abs_tol * smax.max(1.0))
        .map_err(|e| Error::Numerical(e.to_string()))
}

/// Inverse via LU; `None` when numerically singular.
pub fn try_inverse(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 0 {
        return Some(zeros(0, 0));
    }
    m.clone().try_inverse()
}

/// Unitary polar factor `UV*` of `m = UΣV*`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    if m.is_empty() {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

fn unit_vector(n: usize, i: usize) -> CMatrix {
    let mut v = zeros(n, 1);
    v[(i, 0)] = c64(1.0, 0.0);
    v
}

/// Matrix as a column vector (column-major order).
pub fn vectorize(m: &CMatrix) -> CMatrix {
    CMatrix::from_iterator(m.len(), 1, m.iter().cloned())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_iterator(rows, cols, v.iter().cloned())
}

/// Frobenius inner product `tr(a* b)`.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Assembles a matrix from a 2×2 grid of blocks.
pub fn block2x2(a11: &CMatrix, a12: &CMatrix, a21: &CMatrix, a22: &CMatrix) -> CMatrix {
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    debug_assert_eq!(a12.shape(), (r1, c2));
    debug_assert_eq!(a21.shape(), (r2, c1));
    let mut out = zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a11);
    out.view_mut((0, c1), (r1, c2)).copy_from(a12);
    out.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    out.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    out
}
