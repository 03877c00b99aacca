use num_complex::Complex64;
use proptest::prelude::*;
use tunnelsplit::model::{Model, NORMAL_FORM_ENERGY};
use tunnelsplit::qref::*;
use tunnelsplit::Error;

fn dw() -> Model {
    Model::double_well([-2.0, -1.0, 1.0, 2.0])
}

#[test]
fn harmonic_levels_from_the_oscillator_basis() {
    for (omega, hbar) in [(1.0, 1.0), (1.7, 0.3)] {
        let s = diagonalize(&Model::Harmonic { omega }, hbar, 64).unwrap();
        assert_eq!(s.basis, BasisKind::Oscillator);
        for (k, e) in s.levels().iter().take(40).enumerate() {
            assert!((e.0 - hbar * omega * (k as f64 + 0.5)).abs() < 1e-10);
            assert_eq!(e.1, if k % 2 == 0 { 1 } else { -1 });
        }
    }
}

#[test]
fn harmonic_oscillator_has_no_doublets() {
    let s = diagonalize(&Model::Harmonic { omega: 1.0 }, 1.0, 64).unwrap();
    assert!(matches!(splitting_at_energy(&s, 3.0), Err(Error::NoDoubletNearTarget(_))));
}

#[test]
fn small_basis_is_rejected() {
    assert!(diagonalize(&dw(), 0.1, 32).is_err());
}

#[test]
fn asymmetric_model_is_rejected() {
    let m = Model::double_well([-2.0, -1.0, 1.0, 3.0]);
    assert!(matches!(diagonalize(&m, 0.1, 256), Err(Error::NonSymmetricModel)));
    assert!(matches!(exact_splitting(&m, 0.1, 0.0), Err(Error::NonSymmetricModel)));
}

#[test]
fn double_well_ground_doublet_converges() {
    let a = diagonalize(&dw(), 0.1, 2048).unwrap();
    let b = diagonalize(&dw(), 0.1, 4096).unwrap();
    let pa = splitting_at_energy(&a, a.energies_plus[0]).unwrap();
    let pb = splitting_at_energy(&b, b.energies_plus[0]).unwrap();
    assert!(pa.delta_e > 0.0 && pa.sign_flag == 1);
    assert!(((pa.delta_e - pb.delta_e) / pb.delta_e).abs() < 1e-3);
    assert!((a.energies_plus[0] - b.energies_plus[0]).abs() < 1e-6);
    assert!(a.convergence_estimate.is_finite() && a.convergence_estimate < 1e-3, "{}", a.convergence_estimate);
}

#[test]
fn ground_splitting_shrinks_with_hbar() {
    let mut last = f64::INFINITY;
    for hbar in [0.3, 0.2, 0.1, 0.05] {
        let s = diagonalize(&dw(), hbar, 1024).unwrap();
        let p = splitting_at_energy(&s, s.energies_plus[0]).unwrap();
        assert!(p.delta_e < last);
        last = p.delta_e;
    }
}

#[test]
fn grid_solver_matches_dense_fourth_order_difference() {
    // two discretizations of the same operator at large ħ
    let hbar = 0.5;
    let exact = exact_splitting(&dw(), hbar, -1.5).unwrap();
    let tr = trace_ratio_splitting(&dw(), hbar, 0, Complex64::new(0.0, -1.0)).unwrap();
    assert!(((exact.delta_e - tr.direct) / tr.direct).abs() < 1e-2, "{} {}", exact.delta_e, tr.direct);
}

#[test]
fn normal_form_doublets_exist_over_a_range_of_hbar() {
    for inv_hbar in [100.0, 130.0, 160.0] {
        let p = exact_splitting(&Model::NormalForm, 1.0 / inv_hbar, NORMAL_FORM_ENERGY).unwrap();
        assert!(p.delta_e > 0.0 && p.delta_e < 1e-3);
        assert!((p.energy - NORMAL_FORM_ENERGY).abs() < 5e-3);
    }
}

#[test]
fn weyl_ordering_of_squared_oscillator() {
    // Weyl((p² + q²)²) = K² + ħ² with K = ħ(2n + 1), from the Moyal product
    let m = Model::Custom { terms: vec![(4, 0, 1.0), (2, 2, 2.0), (0, 4, 1.0)] };
    let hbar = 0.3;
    let s = diagonalize(&m, hbar, 128).unwrap();
    for (k, e) in s.levels().iter().take(60).enumerate() {
        let n = k as f64;
        let want = hbar * hbar * ((2.0 * n + 1.0).powi(2) + 1.0);
        assert!((e.0 - want).abs() < 1e-10 * want.max(1.0), "{k}: {} vs {want}", e.0);
    }
}

#[test]
fn normal_form_matrix_has_no_parity_mixing() {
    let h = fock_hamiltonian(&Model::NormalForm, 0.01, 1.0, 200).unwrap();
    assert!(parity_mixing(&h) < 1e-12);
    assert!((h.clone() - h.transpose()).amax() < 1e-12);
}

#[test]
fn trace_ratio_matches_the_doublet() {
    let hbar = 0.5;
    let guess = trace_ratio_splitting(&dw(), hbar, 0, Complex64::new(0.0, -1.0)).unwrap().direct;
    let t = Complex64::new(0.0, -50.0 * hbar / guess * 1e-3);
    let r = trace_ratio_splitting(&dw(), hbar, 0, t).unwrap();
    assert!(r.validity < 0.1);
    assert!(((r.estimate.re - r.direct) / r.direct).abs() < 1e-2);
    assert!(r.estimate.im.abs() < 1e-6 * r.direct);
}

#[test]
fn trace_ratio_is_t_independent_within_the_linearization() {
    let hbar = 0.5;
    let de = trace_ratio_splitting(&dw(), hbar, 0, Complex64::new(0.0, -1.0)).unwrap().direct;
    let t1 = 0.02 * 2.0 * hbar / de;
    let t2 = 0.08 * 2.0 * hbar / de;
    let a = trace_ratio_splitting(&dw(), hbar, 0, Complex64::new(0.0, -t1)).unwrap().estimate.re;
    let b = trace_ratio_splitting(&dw(), hbar, 0, Complex64::new(0.0, -t2)).unwrap().estimate.re;
    // tanh(x)/x = 1 − x²/3 + …
    let bound = de * (0.08f64.powi(2) - 0.02f64.powi(2)) / 3.0 * 1.01;
    assert!((a - b).abs() <= bound, "{} > {bound}", (a - b).abs());
}

#[test]
fn trace_ratio_validity_is_enforced() {
    let hbar = 0.5;
    let de = trace_ratio_splitting(&dw(), hbar, 0, Complex64::new(0.0, -1.0)).unwrap().direct;
    let t = Complex64::new(0.0, -2.0 * hbar / de);
    assert!(matches!(trace_ratio_splitting(&dw(), hbar, 0, t), Err(Error::ValidityViolation(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oscillator_levels_interlace_under_truncation(a in 0.2f64..2.0, b in 0.05f64..1.0, hbar in 0.05f64..0.5) {
        let m = Model::Custom { terms: vec![(2, 0, 0.5), (0, 2, a), (0, 4, b)] };
        let small = diagonalize(&m, hbar, 64).unwrap();
        let large = diagonalize(&m, hbar, 128).unwrap();
        for (x, y) in small.energies_plus.iter().zip(&large.energies_plus).take(20) {
            prop_assert!(*y <= *x + 1e-10);
        }
        for (x, y) in small.energies_minus.iter().zip(&large.energies_minus).take(20) {
            prop_assert!(*y <= *x + 1e-10);
        }
    }
}
