//! Dense complex matrix kernels.
//!
//! Everything here is a pure function of its inputs. Matrices are small
//! (at most a few hundred rows), so the routines favour robustness and
//! determinism over speed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::{CMatrix, CVector, C64};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `‖v‖₂ − 1` accepted by [`complete_unitary`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M^H| = {defect:e})")]
    NonHermitian { defect: f64 },
    #[error("vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigendecomposition did not converge")]
    NoConvergence,
}

/// Eigen-pairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q · diag(f(λ)) · Q†`.
    pub fn map_spectrum<F>(&self, f: F) -> CMatrix
    where
        F: Fn(f64) -> C64,
    {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= fj;
            }
        }
        scaled * q.adjoint()
    }

    /// `e^{itH}` from the stored eigen-pairs.
    pub fn phase_exponential(&self, t: f64) -> CMatrix {
        self.map_spectrum(|lambda| C64::from_polar(1.0, t * lambda))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|lambda| C64::new(lambda, 0.0))
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |M − M†|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U†U − I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let gram = u.adjoint() * u;
    max_abs(&(gram - identity(u.nrows())))
}

pub fn ensure_square(m: &CMatrix) -> Result<usize, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub fn ensure_hermitian(m: &CMatrix) -> Result<(), LinalgError> {
    ensure_square(m)?;
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(LinalgError::NonHermitian { defect });
    }
    Ok(())
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Householder tridiagonalisation followed by implicit-shift QR; the input is
/// symmetrised before factorisation so only a Hermitian-within-tolerance
/// matrix is required.
pub fn eigh_hermitian(h: &CMatrix) -> Result<EigenDecomposition, LinalgError> {
    ensure_hermitian(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: DVector::zeros(0), eigenvectors: CMatrix::zeros(0, 0) });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(LinalgError::NoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// `e^{itH}` for Hermitian `H`.
pub fn phase_exponential(h: &CMatrix, t: f64) -> Result<CMatrix, LinalgError> {
    Ok(eigh_hermitian(h)?.phase_exponential(t))
}

/// General matrix exponential `e^{M}` (scaling and squaring with Padé
/// approximants).
pub fn expm_general(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    Ok(m.exp())
}

/// `‖M‖₂`, the largest singular value, from the spectrum of `M†M`.
pub fn spectral_norm(m: &CMatrix) -> Result<f64, LinalgError> {
    ensure_square(m)?;
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let gram = m.adjoint() * m;
    let eig = eigh_hermitian(&gram)?;
    Ok(eig.eigenvalues.max().max(0.0).sqrt())
}

/// Unitary whose column 0 is `first_column`.
///
/// The remaining columns come from the Householder reflector that maps `e₀`
/// onto the column, with the reflector sign taken from `arg(v₀)` so the
/// update never cancels.
pub fn complete_unitary(first_column: &CVector, dim: usize) -> Result<CMatrix, LinalgError> {
    if first_column.len() != dim {
        return Err(LinalgError::DimensionMismatch { expected: dim, got: first_column.len() });
    }
    let norm = first_column.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(LinalgError::NotNormalized { norm });
    }
    let x0 = first_column[0];
    let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };

    // v = x + e^{iθ}‖x‖e₀ and P = I − 2vv†/(v†v) sends x to −e^{iθ}e₀, so
    // column 0 of P is −e^{−iθ}x and the other columns are orthogonal to x.
    let mut v = first_column.clone();
    v[0] += phase * norm;
    let vnorm2 = v.norm_squared();
    let mut u = identity(dim);
    if vnorm2 > 0.0 {
        let scale = C64::new(2.0 / vnorm2, 0.0);
        u -= (&v * v.adjoint()) * scale;
    }
    u.set_column(0, first_column);
    Ok(u)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Real matrix lifted to complex entries.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}
