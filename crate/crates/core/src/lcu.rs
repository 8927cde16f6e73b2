//! Fourier LCU decompositions and their block encodings.
//!
//! With `A = H₁ + iH₂` and `τ = π/(η·max‖H_i‖₂)`, a sine series
//! `Σ a_k sin(kτ)` fitted to the identity on `[−π/η, π/η]` gives
//!
//! ```text
//! A ≈ Σ_k (a_k/2τ)(i e^{−ikτH₁} − e^{−ikτH₂} − i e^{ikτH₁} + e^{ikτH₂})
//! ```
//!
//! a combination of `4m` unitaries. The four terms of each `k` are stored in
//! that order, so `κ_{4(k−1)+j} = (a_k/2τ)·(i, −1, −i, 1)_j`.
//!
//! The block encoding is `U = (W†⊗I)·SELECT·(V⊗I)` with the ancilla register
//! as the most significant index; SELECT applies `U_j` on branch `j < 4m` and
//! the identity on padding branches.

use std::f64::consts::PI;
use thiserror::Error;

use crate::extension::{series_at, CoefficientSet};
use crate::linalg::{complete_unitary, eigh_hermitian, ensure_square, spectral_norm, EigenDecomposition, LinalgError};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcuError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("operator is zero, so τ is undefined")]
    ZeroOperator,
    #[error("all κ weights vanish; the coefficient set is zero")]
    ZeroKappa,
    #[error("finite-difference order {0} is not one of 2, 4, 6, 8")]
    UnsupportedOrder(usize),
    #[error("input state is zero")]
    ZeroState,
    #[error("operator annihilates the input state")]
    AnnihilatedState,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient set is empty")]
    EmptyCoefficients,
}

/// `A = H₁ + iH₂` with both parts Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSplit {
    pub h1: CMatrix,
    pub h2: CMatrix,
    /// `max(‖H₁‖₂, ‖H₂‖₂)`.
    pub scale: f64,
}

impl HermitianSplit {
    pub fn dim(&self) -> usize {
        self.h1.nrows()
    }

    pub fn reconstruct(&self) -> CMatrix {
        &self.h1 + &self.h2 * C64::i()
    }
}

/// `H₁ = (A + A†)/2`, `H₂ = (A − A†)/(2i)`.
///
/// A zero operator is split normally with `scale = 0`; it is [`choose_tau`]
/// that rejects it.
pub fn hermitian_split(a: &CMatrix) -> Result<HermitianSplit, LcuError> {
    ensure_square(a)?;
    let adj = a.adjoint();
    let h1 = (a + &adj).scale(0.5);
    let h2 = (a - &adj) * C64::new(0.0, -0.5);
    let scale = spectral_norm(&h1)?.max(spectral_norm(&h2)?);
    Ok(HermitianSplit { h1, h2, scale })
}

/// `τ = π/(η·scale)`, which puts both spectra of `τH_i` inside `[−π/η, π/η]`.
pub fn choose_tau(split: &HermitianSplit, eta: f64) -> Result<f64, LcuError> {
    if !(split.scale > 0.0) {
        return Err(LcuError::ZeroOperator);
    }
    Ok(PI / (eta * split.scale))
}

/// The `4m`-term decomposition of one operator.
#[derive(Debug, Clone)]
pub struct LcuDecomposition {
    pub coefficients: CoefficientSet,
    pub split: HermitianSplit,
    pub tau: f64,
    pub kappas: Vec<C64>,
    /// `Σ|κ_j| = (2/τ) Σ|a_k|`.
    pub alpha: f64,
    eig1: EigenDecomposition,
    eig2: EigenDecomposition,
}

/// Phase of term `j` (0-based) within each `k`: `i, −1, −i, 1`.
const TERM_PHASES: [C64; 4] = [C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)];

/// Decomposition with `τ` from [`choose_tau`].
pub fn build_decomposition(coeffs: &CoefficientSet, a: &CMatrix) -> Result<LcuDecomposition, LcuError> {
    let split = hermitian_split(a)?;
    let tau = choose_tau(&split, coeffs.eta)?;
    decomposition_with_split(coeffs, split, tau)
}

/// Decomposition at an explicit `τ`, as used by finite-difference formulas
/// whose step is not tied to `η`.
pub fn build_decomposition_with_tau(
    coeffs: &CoefficientSet,
    a: &CMatrix,
    tau: f64,
) -> Result<LcuDecomposition, LcuError> {
    decomposition_with_split(coeffs, hermitian_split(a)?, tau)
}

fn decomposition_with_split(
    coeffs: &CoefficientSet,
    split: HermitianSplit,
    tau: f64,
) -> Result<LcuDecomposition, LcuError> {
    if coeffs.coefficients.is_empty() {
        return Err(LcuError::EmptyCoefficients);
    }
    let kappas: Vec<C64> =
        coeffs.coefficients.iter().flat_map(|&a| TERM_PHASES.iter().map(move |&p| p * (a / (2.0 * tau)))).collect();
    let alpha = kappas.iter().map(|k| k.norm()).sum();
    let eig1 = eigh_hermitian(&split.h1)?;
    let eig2 = eigh_hermitian(&split.h2)?;
    Ok(LcuDecomposition { coefficients: coeffs.clone(), split, tau, kappas, alpha, eig1, eig2 })
}

impl LcuDecomposition {
    pub fn term_count(&self) -> usize {
        self.kappas.len()
    }

    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    /// `n_a = ⌈log₂ 4m⌉`.
    pub fn ancilla_count(&self) -> usize {
        ancilla_count(self.coefficients.m)
    }

    /// Unitary of term `j` (0-based).
    pub fn unitary(&self, j: usize) -> CMatrix {
        let k = (j / 4 + 1) as f64;
        let t = k * self.tau;
        match j % 4 {
            0 => self.eig1.phase_exponential(-t),
            1 => self.eig2.phase_exponential(-t),
            2 => self.eig1.phase_exponential(t),
            _ => self.eig2.phase_exponential(t),
        }
    }

    pub fn unitaries(&self) -> Vec<CMatrix> {
        (0..self.term_count()).map(|j| self.unitary(j)).collect()
    }

    /// Rigorous bound on `‖A − Σκ_jU_j‖₂` from the scalar series error on
    /// each spectrum: `Σ_i max_λ∈spec(H_i) |λ − Σ a_k sin(kτλ)/τ|`.
    pub fn eigenvalue_transfer_bound(&self) -> f64 {
        let a = &self.coefficients.coefficients;
        let part = |eig: &EigenDecomposition| {
            eig.eigenvalues.iter().map(|&l| (l - series_at(a, self.tau * l) / self.tau).abs()).fold(0.0, f64::max)
        };
        part(&self.eig1) + part(&self.eig2)
    }
}

/// `⌈log₂ 4m⌉`.
pub fn ancilla_count(m: usize) -> usize {
    (4 * m).next_power_of_two().trailing_zeros() as usize
}

/// `Σ_j κ_j U_j`.
pub fn apply_lcu_sum(decomp: &LcuDecomposition) -> CMatrix {
    let d = decomp.dim();
    let mut out = CMatrix::zeros(d, d);
    for (j, &kappa) in decomp.kappas.iter().enumerate() {
        if kappa != C64::new(0.0, 0.0) {
            out += decomp.unitary(j) * kappa;
        }
    }
    out
}

/// State-preparation unitaries: column 0 of `V` holds `sqrt(|κ_j|/α)`, column
/// 0 of `W` holds `(κ_j*/|κ_j|)·sqrt(|κ_j|/α)`, with phase 1 where `κ_j = 0`.
pub fn prepare_v_w(decomp: &LcuDecomposition) -> Result<(CMatrix, CMatrix), LcuError> {
    if !(decomp.alpha > 0.0) {
        return Err(LcuError::ZeroKappa);
    }
    let n = 1usize << decomp.ancilla_count();
    let mut v0 = CVector::zeros(n);
    let mut w0 = CVector::zeros(n);
    for (j, kappa) in decomp.kappas.iter().enumerate() {
        let amp = (kappa.norm() / decomp.alpha).sqrt();
        let phase = if kappa.norm() > 0.0 { kappa.conj() / kappa.norm() } else { C64::new(1.0, 0.0) };
        v0[j] = C64::new(amp, 0.0);
        w0[j] = phase * amp;
    }
    // rounding in the amplitudes can leave ‖v₀‖ a few ulps away from 1
    let (vn, wn) = (v0.norm(), w0.norm());
    v0.unscale_mut(vn);
    w0.unscale_mut(wn);
    Ok((complete_unitary(&v0, n)?, complete_unitary(&w0, n)?))
}

/// Dense block-encoding unitary.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    pub unitary: CMatrix,
    pub ancilla_count: usize,
    pub alpha: f64,
    pub encoded_dim: usize,
}

impl BlockEncoding {
    /// `(⟨0|^{⊗n_a} ⊗ I) U (|0⟩^{⊗n_a} ⊗ I)`.
    pub fn top_left_block(&self) -> CMatrix {
        let d = self.encoded_dim;
        self.unitary.view((0, 0), (d, d)).into_owned()
    }
}

/// `U = (W†⊗I)·SELECT·(V⊗I)`, formed blockwise:
/// block `(i, c)` is `Σ_j conj(W_ji)·V_jc·U_j` over all branches `j`.
pub fn assemble_block_encoding(decomp: &LcuDecomposition) -> Result<BlockEncoding, LcuError> {
    let (v, w) = prepare_v_w(decomp)?;
    let n = v.nrows();
    let d = decomp.dim();
    let mut branches = decomp.unitaries();
    branches.resize(n, CMatrix::identity(d, d));
    let mut u = CMatrix::zeros(n * d, n * d);
    for i in 0..n {
        for c in 0..n {
            let mut block = CMatrix::zeros(d, d);
            for (j, uj) in branches.iter().enumerate() {
                let coef = w[(j, i)].conj() * v[(j, c)];
                if coef != C64::new(0.0, 0.0) {
                    block += uj * coef;
                }
            }
            u.view_mut((i * d, c * d), (d, d)).copy_from(&block);
        }
    }
    Ok(BlockEncoding { unitary: u, ancilla_count: decomp.ancilla_count(), alpha: decomp.alpha, encoded_dim: d })
}

/// Encoding error `‖A − α·block‖₂`.
pub fn verify_encoding(enc: &BlockEncoding, a: &CMatrix) -> Result<f64, LcuError> {
    let d = ensure_square(a)?;
    if d != enc.encoded_dim {
        return Err(LcuError::DimensionMismatch { expected: enc.encoded_dim, got: d });
    }
    let diff = a - enc.top_left_block() * C64::new(enc.alpha, 0.0);
    Ok(spectral_norm(&diff)?)
}

/// Result of running the encoding circuit on `|0⟩^{⊗n_a} ⊗ ψ`.
#[derive(Debug, Clone)]
pub struct CircuitOutcome {
    /// Full output state, ancilla index most significant.
    pub state: CVector,
    /// Unnormalised system state on the all-zero ancilla outcome.
    pub postselected: CVector,
    /// `‖postselected‖² / ‖ψ‖²`.
    pub success_probability: f64,
}

/// Statevector simulation of `U(|0⟩ ⊗ ψ)` stage by stage (state preparation,
/// select, unpreparation) without forming `U`.
pub fn simulate_circuit(decomp: &LcuDecomposition, psi: &CVector) -> Result<CircuitOutcome, LcuError> {
    let d = decomp.dim();
    if psi.len() != d {
        return Err(LcuError::DimensionMismatch { expected: d, got: psi.len() });
    }
    let (v, w) = prepare_v_w(decomp)?;
    let n = v.nrows();
    // V⊗I then SELECT: branch j carries V_j0 · U_j ψ
    let branches: Vec<CVector> = (0..n)
        .map(|j| {
            let amp = v[(j, 0)];
            if j < decomp.term_count() {
                decomp.unitary(j) * psi * amp
            } else {
                psi * amp
            }
        })
        .collect();
    let mut state = CVector::zeros(n * d);
    for i in 0..n {
        let mut out = CVector::zeros(d);
        for (j, b) in branches.iter().enumerate() {
            let coef = w[(j, i)].conj();
            if coef != C64::new(0.0, 0.0) {
                out += b * coef;
            }
        }
        state.rows_mut(i * d, d).copy_from(&out);
    }
    let postselected = state.rows(0, d).into_owned();
    let norm2 = psi.norm_squared();
    if norm2 == 0.0 {
        return Err(LcuError::ZeroState);
    }
    let success_probability = postselected.norm_squared() / norm2;
    Ok(CircuitOutcome { state, postselected, success_probability })
}

/// `Q = ‖ψ₀‖/‖Aψ₀‖` and the postselection probability `1/(αQ)²`.
pub fn success_metrics(decomp: &LcuDecomposition, psi0: &CVector) -> Result<(f64, f64), LcuError> {
    let d = decomp.dim();
    if psi0.len() != d {
        return Err(LcuError::DimensionMismatch { expected: d, got: psi0.len() });
    }
    let n0 = psi0.norm();
    if n0 == 0.0 {
        return Err(LcuError::ZeroState);
    }
    let n1 = (decomp.split.reconstruct() * psi0).norm();
    if n1 == 0.0 {
        return Err(LcuError::AnnihilatedState);
    }
    let q = n0 / n1;
    Ok((q, 1.0 / (decomp.alpha * q).powi(2)))
}

/// Central-difference weights `b_k` for orders 2, 4, 6, 8.
pub fn fd_coefficients(p: usize) -> Result<Vec<f64>, LcuError> {
    Ok(match p {
        2 => vec![0.5],
        4 => vec![2.0 / 3.0, -1.0 / 12.0],
        6 => vec![3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        8 => vec![4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        other => return Err(LcuError::UnsupportedOrder(other)),
    })
}

/// Finite-difference LCU
/// `Σ_k b_k (i e^{−ikτH₁} − i e^{ikτH₁} + e^{ikτH₂} − e^{−ikτH₂})/τ`.
pub fn finite_difference_lcu(a: &CMatrix, tau: f64, p: usize) -> Result<CMatrix, LcuError> {
    let b = fd_coefficients(p)?;
    let split = hermitian_split(a)?;
    let e1 = eigh_hermitian(&split.h1)?;
    let e2 = eigh_hermitian(&split.h2)?;
    let d = split.dim();
    let i = C64::i();
    let mut out = CMatrix::zeros(d, d);
    for (k, bk) in b.iter().enumerate() {
        let t = (k + 1) as f64 * tau;
        let term = e1.phase_exponential(-t) * i - e1.phase_exponential(t) * i + e2.phase_exponential(t)
            - e2.phase_exponential(-t);
        out += term * C64::new(bk / tau, 0.0);
    }
    Ok(out)
}
