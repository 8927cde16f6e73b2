//! Fourier-extension linear combination of unitaries.
//!
//! The identity map `f(τ) = τ` is approximated on `[−π/η, π/η]` by a sine
//! series that is smooth and periodic on `[−π, π]`. Evaluating the series on
//! the Hermitian parts of an operator `A = H₁ + iH₂` yields a linear
//! combination of `4m` unitaries whose error decays exponentially in `m`.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex kernels (Hermitian eigendecomposition, matrix
//!   exponentials, spectral norms, unitary completion).
//! - [`quadrature`]: Gauss-Legendre rules.
//! - [`extension`]: least-squares sine-series coefficients (normal equations
//!   in extended precision), the extension factor `η`, errors and
//!   subnormalisation.
//! - [`regularized`]: L1-regularised coefficients, Pareto fronts and error
//!   budgets.
//! - [`lcu`]: the LCU decomposition, the explicit block-encoding unitary and
//!   finite-difference baselines.
//! - [`lindblad`]: vectorised Lindblad dynamics and the driven dephasing qubit
//!   demonstration.
//! - [`records`]: serialised coefficient, Pareto, matrix and demo records.
//!
//! ```
//! use fourier_lcu::extension::{eta_for_m, solve_least_squares, ExtensionProblem};
//!
//! let problem = ExtensionProblem::new(4, eta_for_m(4)).unwrap();
//! let coeffs = solve_least_squares(&problem).unwrap();
//! assert!((coeffs.coefficients[0] - 1.6867069657827318).abs() < 1e-10);
//! ```

pub mod extension;
pub mod lcu;
pub mod linalg;
pub mod lindblad;
mod multiprecision;
pub mod quadrature;
pub mod records;
pub mod regularized;
pub mod roots;
pub mod tables;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
