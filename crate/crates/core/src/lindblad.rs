//! Vectorised Lindblad dynamics and the driven-dephasing qubit demo.
//!
//! Density matrices are vectorised by stacking columns, so
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)` and the master equation
//! `ρ' = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ})` becomes `vec(ρ)' = M vec(ρ)` with
//!
//! ```text
//! M = −i(I⊗H − Hᵀ⊗I) + Σ [L̄⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I].
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::{eta_for_m, solve_least_squares, CoefficientSet, ExtensionError, ExtensionProblem};
use crate::lcu::{build_decomposition, simulate_circuit, LcuError};
use crate::linalg::{ensure_hermitian, expm_general, identity, kron, spectral_norm, LinalgError};
use crate::regularized::{lambda_path_limit, RegularizedError};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("operator {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("invalid demo parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Regularized(#[from] RegularizedError),
    #[error(transparent)]
    Lcu(#[from] LcuError),
}

/// `H` in rad/s, jump operators in s^{−1/2}, evolution time in s.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSystem {
    pub hamiltonian: CMatrix,
    pub lindblad_ops: Vec<CMatrix>,
    pub time: f64,
}

impl LindbladSystem {
    pub fn new(hamiltonian: CMatrix, lindblad_ops: Vec<CMatrix>, time: f64) -> Result<Self, LindbladError> {
        ensure_hermitian(&hamiltonian)?;
        let d = hamiltonian.nrows();
        for (index, l) in lindblad_ops.iter().enumerate() {
            if l.nrows() != d || l.ncols() != d {
                return Err(LindbladError::DimensionMismatch { index, expected: d, got: l.nrows().max(l.ncols()) });
            }
        }
        Ok(Self { hamiltonian, lindblad_ops, time })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

/// Parameters of the driven-dephasing qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoParams {
    /// Ω in Hz.
    pub rabi_frequency: f64,
    /// Drive axis angle in the xy plane.
    pub phase: f64,
    /// T_φ in s.
    pub dephasing_time: f64,
    /// Evolution time in Rabi periods.
    pub cycles: f64,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self { rabi_frequency: 1e5, phase: PI / 4.0, dephasing_time: 1.0, cycles: 500.0 }
    }
}

impl DemoParams {
    pub fn validate(&self) -> Result<(), LindbladError> {
        let positive =
            [("rabi_frequency", self.rabi_frequency), ("dephasing_time", self.dephasing_time), ("cycles", self.cycles)];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(LindbladError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.phase.is_finite() {
            return Err(LindbladError::InvalidParams(format!("phase must be finite, got {}", self.phase)));
        }
        Ok(())
    }

    /// `ω = 2πΩ`.
    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.rabi_frequency
    }

    /// `t = cycles/Ω`.
    pub fn time(&self) -> f64 {
        self.cycles / self.rabi_frequency
    }
}

/// How the sine-series coefficients are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    LeastSquares,
    Regularized,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::LeastSquares => "least_squares",
            Strategy::Regularized => "regularized",
        }
    }
}

/// One demo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub m: usize,
    pub strategy: Strategy,
    pub statevector_error: f64,
    pub alpha: f64,
    /// `α·m`.
    pub cost: f64,
    pub unitarity_defect: f64,
}

pub fn build_liouvillian(sys: &LindbladSystem) -> Result<CMatrix, LindbladError> {
    let d = sys.dim();
    let h = &sys.hamiltonian;
    let id = identity(d);
    let mut m = (kron(&id, h) - kron(&h.transpose(), &id)) * C64::new(0.0, -1.0);
    for (index, l) in sys.lindblad_ops.iter().enumerate() {
        if l.nrows() != d || l.ncols() != d {
            return Err(LindbladError::DimensionMismatch { index, expected: d, got: l.nrows().max(l.ncols()) });
        }
        let ldl = l.adjoint() * l;
        m += kron(&l.conjugate(), l);
        m -= (kron(&id, &ldl) + kron(&ldl.transpose(), &id)).scale(0.5);
    }
    Ok(m)
}

/// `e^{Mt}`.
pub fn propagator(m: &CMatrix, t: f64) -> Result<CMatrix, LindbladError> {
    Ok(expm_general(&(m * C64::new(t, 0.0)))?)
}

/// `H = (ω/2)(σ_x sinφ + σ_y cosφ)` and `L = sqrt(1/(2T_φ)) σ_z`.
pub fn demo_system(params: &DemoParams) -> Result<LindbladSystem, LindbladError> {
    params.validate()?;
    let half = params.angular_frequency() / 2.0;
    let (s, c) = params.phase.sin_cos();
    let z = C64::new(0.0, 0.0);
    // σ_x sinφ + σ_y cosφ has off-diagonal entries sinφ ∓ i cosφ
    let h = CMatrix::from_row_slice(2, 2, &[z, C64::new(s, -c) * half, C64::new(s, c) * half, z]);
    let g = (1.0 / (2.0 * params.dephasing_time)).sqrt();
    let l = CMatrix::from_row_slice(2, 2, &[C64::new(g, 0.0), z, z, C64::new(-g, 0.0)]);
    LindbladSystem::new(h, vec![l], params.time())
}

/// `‖A†A − I‖₂`.
pub fn unitarity_defect(a: &CMatrix) -> Result<f64, LindbladError> {
    let d = a.nrows();
    Ok(spectral_norm(&(a.adjoint() * a - identity(d)))?)
}

/// `vec(|+⟩⟨+|)`, which is also `|+⟩⊗|+⟩`.
pub fn plus_state() -> CVector {
    CVector::from_element(4, C64::new(0.5, 0.0))
}

/// Coefficients for one strategy at `η = eta_for_m(m)`.
///
/// Least squares falls back to the QR solution when the normal equations
/// break down; the regularised strategy takes the `λ → 0` end of the path.
pub fn strategy_coefficients(strategy: Strategy, m: usize) -> Result<CoefficientSet, LindbladError> {
    let eta = eta_for_m(m);
    match strategy {
        Strategy::LeastSquares => match solve_least_squares(&ExtensionProblem::new(m, eta)?) {
            Ok(c) => Ok(c),
            Err(ExtensionError::IllConditioned { fallback, .. }) => Ok(fallback),
            Err(e) => Err(e.into()),
        },
        Strategy::Regularized => Ok(lambda_path_limit(m, eta)?.coefficients),
    }
}

/// Run the demo with a given coefficient set.
///
/// The block encoding is applied to `|0⟩ ⊗ ψ₀` by statevector simulation,
/// the ancilla-zero branch is renormalised and compared with `Aψ₀/‖Aψ₀‖`.
pub fn run_demo_with(
    params: &DemoParams,
    strategy: Strategy,
    coeffs: &CoefficientSet,
) -> Result<DemoReport, LindbladError> {
    let sys = demo_system(params)?;
    let a = propagator(&build_liouvillian(&sys)?, sys.time)?;
    let psi = plus_state();
    let psi = &psi / C64::new(psi.norm(), 0.0);
    let decomp = build_decomposition(coeffs, &a)?;
    let out = simulate_circuit(&decomp, &psi)?;
    let exact = &a * &psi;
    let exact = &exact / C64::new(exact.norm(), 0.0);
    let got = &out.postselected / C64::new(out.postselected.norm(), 0.0);
    let m = coeffs.m;
    Ok(DemoReport {
        m,
        strategy,
        statevector_error: (got - exact).norm(),
        alpha: decomp.alpha,
        cost: decomp.alpha * m as f64,
        unitarity_defect: unitarity_defect(&a)?,
    })
}

pub fn run_demo(params: &DemoParams, strategy: Strategy, m: usize) -> Result<DemoReport, LindbladError> {
    if !(1..=64).contains(&m) {
        return Err(LindbladError::InvalidParams(format!("m must be in 1..=64, got {m}")));
    }
    params.validate()?;
    run_demo_with(params, strategy, &strategy_coefficients(strategy, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, max_abs, unitarity_error};
    use crate::tables::ls_reference_set;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sz() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    fn vec_of(rho: &CMatrix) -> CVector {
        CVector::from_iterator(rho.len(), rho.iter().cloned())
    }

    fn unvec(v: &CVector, d: usize) -> CMatrix {
        CMatrix::from_column_slice(d, d, v.as_slice())
    }

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
        CMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
        let a = random_matrix(rng, d);
        (&a + a.adjoint()).scale(0.5)
    }

    fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
        let a = random_matrix(rng, d);
        let r = &a * a.adjoint();
        let tr = r.trace();
        r / tr
    }

    fn master_rhs(sys: &LindbladSystem, rho: &CMatrix) -> CMatrix {
        let h = &sys.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        for l in &sys.lindblad_ops {
            let ldl = l.adjoint() * l;
            out += l * rho * l.adjoint() - (&ldl * rho + rho * &ldl).scale(0.5);
        }
        out
    }

    #[test]
    fn liouvillian_examples() {
        let zero = LindbladSystem::new(CMatrix::zeros(2, 2), vec![], 1.0).unwrap();
        assert_eq!(max_abs(&build_liouvillian(&zero).unwrap()), 0.0);

        let h = sz().scale(0.5);
        let m = build_liouvillian(&LindbladSystem::new(h, vec![], 1.0).unwrap()).unwrap();
        // entry 1 is ρ₁₀, which evolves as e^{it}
        let diag = [c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)];
        assert!(max_abs(&(m - CMatrix::from_diagonal(&CVector::from_vec(diag.to_vec())))) < 1e-15);

        let gamma: f64 = 0.3;
        let l = sz().scale(gamma.sqrt());
        let m = build_liouvillian(&LindbladSystem::new(CMatrix::zeros(2, 2), vec![l], 1.0).unwrap()).unwrap();
        let diag = [0.0, -2.0 * gamma, -2.0 * gamma, 0.0].map(|x| c(x, 0.0));
        assert!(max_abs(&(&m - CMatrix::from_diagonal(&CVector::from_vec(diag.to_vec())))) < 1e-15);

        let t = 1.7;
        let a = propagator(&m, t).unwrap();
        let e = (-2.0 * gamma * t).exp();
        let diag = [1.0, e, e, 1.0].map(|x| c(x, 0.0));
        assert!(max_abs(&(a - CMatrix::from_diagonal(&CVector::from_vec(diag.to_vec())))) < 1e-14);
        assert!(max_abs(&(propagator(&m, 0.0).unwrap() - identity(4))) < 1e-15);
    }

    #[test]
    fn mismatched_operators_rejected() {
        let err = LindbladSystem::new(CMatrix::zeros(2, 2), vec![CMatrix::zeros(3, 3)], 1.0).unwrap_err();
        assert!(matches!(err, LindbladError::DimensionMismatch { index: 0, expected: 2, got: 3 }));
        let bad =
            LindbladSystem { hamiltonian: CMatrix::zeros(2, 2), lindblad_ops: vec![CMatrix::zeros(3, 3)], time: 1.0 };
        assert!(build_liouvillian(&bad).is_err());
        let nonherm = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(LindbladSystem::new(nonherm, vec![], 1.0).is_err());
    }

    #[test]
    fn action_matches_matrix_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2, 3] {
            for _ in 0..10 {
                let sys = LindbladSystem::new(
                    random_hermitian(&mut rng, d),
                    vec![random_matrix(&mut rng, d), random_matrix(&mut rng, d)],
                    1.0,
                )
                .unwrap();
                let m = build_liouvillian(&sys).unwrap();
                let rho = random_matrix(&mut rng, d);
                let got = unvec(&(&m * vec_of(&rho)), d);
                assert!(max_abs(&(got - master_rhs(&sys, &rho))) < 1e-12);
                // vec(I)† M = 0
                let left = vec_of(&identity(d)).adjoint() * &m;
                assert!(left.iter().all(|x| x.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn propagator_matches_rk4() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = LindbladSystem::new(random_hermitian(&mut rng, 2), vec![random_matrix(&mut rng, 2).scale(0.5)], 1.3)
            .unwrap();
        let m = build_liouvillian(&sys).unwrap();
        let rho0 = random_density(&mut rng, 2);
        let expected = unvec(&(propagator(&m, sys.time).unwrap() * vec_of(&rho0)), 2);

        let steps = 4000;
        let h = sys.time / steps as f64;
        let f = |r: &CMatrix| master_rhs(&sys, r);
        let mut rho = rho0.clone();
        for _ in 0..steps {
            let k1 = f(&rho);
            let k2 = f(&(&rho + k1.scale(h / 2.0)));
            let k3 = f(&(&rho + k2.scale(h / 2.0)));
            let k4 = f(&(&rho + k3.scale(h)));
            rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        }
        assert!(max_abs(&(rho - expected)) < 1e-8);
    }

    #[test]
    fn propagator_preserves_trace_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = propagator(&build_liouvillian(&demo_system(&DemoParams::default()).unwrap()).unwrap(), 5e-3).unwrap();
        let tr = vec_of(&identity(2)).adjoint();
        for _ in 0..5 {
            let rho = random_density(&mut rng, 2);
            let out = &a * vec_of(&rho);
            assert!(((&tr * &out)[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
            assert!(hermitian_defect(&unvec(&out, 2)) < 1e-10);
        }
    }

    #[test]
    fn closed_system_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 2);
        let sys = LindbladSystem::new(h.clone(), vec![], 2.0).unwrap();
        let a = propagator(&build_liouvillian(&sys).unwrap(), sys.time).unwrap();
        assert!(unitarity_defect(&a).unwrap() < 1e-10);
        // A = ē^{−iHt} ⊗ e^{−iHt}
        let u = crate::linalg::phase_exponential(&h, -sys.time).unwrap();
        assert!(max_abs(&(a - kron(&u.conjugate(), &u))) < 1e-12);
    }

    #[test]
    fn demo_system_shape() {
        let p = DemoParams::default();
        assert!((p.time() - 5e-3).abs() < 1e-18);
        let sys = demo_system(&DemoParams { phase: 0.0, ..p }).unwrap();
        let w2 = p.angular_frequency() / 2.0;
        let sy = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -w2), c(0.0, w2), c(0.0, 0.0)]);
        assert!(max_abs(&(&sys.hamiltonian - sy)) < 1e-9);
        assert!((sys.lindblad_ops[0][(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(demo_system(&DemoParams { cycles: 0.0, ..p }).is_err());
        assert!(demo_system(&DemoParams { phase: f64::NAN, ..p }).is_err());
    }

    #[test]
    fn unitarity_defect_examples() {
        assert!(unitarity_defect(&identity(3)).unwrap() < 1e-15);
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.9, 0.0)]));
        assert!((unitarity_defect(&a).unwrap() - 0.19).abs() < 1e-14);
        let closed = DemoParams { dephasing_time: 1e12, ..DemoParams::default() };
        let a = propagator(&build_liouvillian(&demo_system(&closed).unwrap()).unwrap(), closed.time()).unwrap();
        assert!(unitarity_error(&a) < 1e-8);
    }

    #[test]
    fn demo_defect_and_accuracy() {
        let p = DemoParams::default();
        let coeffs = ls_reference_set(8).unwrap();
        let r = run_demo_with(&p, Strategy::LeastSquares, &coeffs).unwrap();
        assert!((3e-3..=3e-2).contains(&r.unitarity_defect), "{}", r.unitarity_defect);
        assert_eq!(r.cost, r.alpha * 8.0);
        assert!(r.statevector_error < 1e-4, "{}", r.statevector_error);
    }

    #[test]
    fn demo_rejects_bad_m() {
        assert!(run_demo(&DemoParams::default(), Strategy::LeastSquares, 0).is_err());
        assert!(run_demo(&DemoParams::default(), Strategy::LeastSquares, 65).is_err());
    }
}
