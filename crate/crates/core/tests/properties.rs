use fourier_lcu::extension::{CoefficientSet, Provenance};
use fourier_lcu::lcu::{assemble_block_encoding, build_decomposition, hermitian_split, verify_encoding};
use fourier_lcu::linalg::{complete_unitary, unitarity_error};
use fourier_lcu::lindblad::{build_liouvillian, LindbladSystem};
use fourier_lcu::records::CoefficientRecord;
use fourier_lcu::tables::ls_reference_set;
use fourier_lcu::{CMatrix, CVector, C64};
use proptest::prelude::*;

fn matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
        .prop_map(move |v| CMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| C64::new(re, im))))
}

fn hermitian(d: usize) -> impl Strategy<Value = CMatrix> {
    matrix(d).prop_map(|x| (&x + x.adjoint()) * C64::new(0.5, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_reconstructs(a in (1usize..5).prop_flat_map(matrix)) {
        let split = hermitian_split(&a).unwrap();
        prop_assert!((split.reconstruct() - &a).norm() <= 1e-14 * (1.0 + a.norm()));
    }

    #[test]
    fn completion_is_unitary(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9)) {
        let v = CVector::from_iterator(v.len(), v.into_iter().map(|(re, im)| C64::new(re, im)));
        prop_assume!(v.norm() > 1e-3);
        let v = v.normalize();
        let u = complete_unitary(&v, v.len()).unwrap();
        prop_assert!(unitarity_error(&u) < 1e-13);
        prop_assert!((u.column(0) - &v).norm() < 1e-13);
    }

    #[test]
    fn block_encoding_is_unitary_and_accurate(a in matrix(2)) {
        prop_assume!(a.norm() > 1e-3);
        let decomp = build_decomposition(&ls_reference_set(4).unwrap(), &a).unwrap();
        let enc = assemble_block_encoding(&decomp).unwrap();
        prop_assert!(unitarity_error(&enc.unitary) < 1e-12);
        let err = verify_encoding(&enc, &a).unwrap();
        prop_assert!(err <= decomp.eigenvalue_transfer_bound() + 1e-12);
    }

    #[test]
    fn liouvillian_preserves_trace(h in hermitian(2), l1 in matrix(2), l2 in matrix(2)) {
        let sys = LindbladSystem::new(h, vec![l1, l2], 1.0).unwrap();
        let m = build_liouvillian(&sys).unwrap();
        // vec(I)ᵀ M = 0 under column stacking
        let trace_row = CVector::from_fn(4, |k, _| if k % 3 == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        prop_assert!((trace_row.transpose() * &m).norm() < 1e-13 * (1.0 + m.norm()));
    }

    #[test]
    fn record_round_trip(coeffs in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..20), eta in 1.01f64..4.0) {
        let set = CoefficientSet::new(eta, coeffs, Provenance::LeastSquares);
        let rec = CoefficientRecord::new(&set, 1.0, 0.0);
        let back = CoefficientRecord::from_json(&rec.to_json().unwrap()).unwrap().coefficient_set().unwrap();
        for (x, y) in back.coefficients.iter().zip(&set.coefficients) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
