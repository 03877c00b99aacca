use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use tunnelsplit::contour::PathSpec;
use tunnelsplit::homology::*;
use tunnelsplit::model::{Model, NORMAL_FORM_ENERGY};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn symmetric_dw() -> Model {
    Model::double_well([-2.0, -1.0, 1.0, 2.0])
}

fn asymmetric_dw() -> Model {
    Model::double_well([-2.0, -1.0, 1.0, 3.0])
}

fn symmetric_tw() -> Model {
    Model::triple_well([-2.2, -1.4, -0.5, 0.5, 1.4, 2.2])
}

#[test]
fn double_well_periods_match_complete_elliptic_integral() {
    // ∫ dq/√(2|V|) over [q1, q2] for V = Π(q − q_i) is K(k)·2/√(2 (q3 − q1)(q4 − q2)),
    // k² = (q2 − q1)(q4 − q3)/((q3 − q1)(q4 − q2)); value frozen from an
    // arithmetic-geometric-mean evaluation.
    let cat = evaluate_catalog(&asymmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
    let t = cat.period("T_L").unwrap();
    assert!((t.re - 1.341_664_838_8).abs() < 1e-9, "{t}");
    assert!((cat.period("T_R").unwrap().re - t.re).abs() < 1e-9);
}

#[test]
fn double_well_relations_hold() {
    for m in [symmetric_dw(), asymmetric_dw()] {
        let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
        for r in verify_relations(&cat) {
            assert!(r.passed, "{}: {:e}", r.name, r.residual);
        }
        assert!(cat.gamma_branch_max < 1e-9);
    }
}

#[test]
fn symmetric_double_well_has_no_residue_at_infinity() {
    let cat = evaluate_catalog(&symmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
    assert!(cat.action("S_inf+").unwrap().norm() < 1e-9);
    let sb = cat.action("S_beta").unwrap();
    assert!(sb.re.abs() < 1e-12 && sb.im > 0.0);
}

#[test]
fn asymmetric_double_well_actions() {
    let cat = evaluate_catalog(&asymmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
    let sl = cat.action("S_L").unwrap();
    let sr = cat.action("S_R").unwrap();
    assert!((sl.re - 3.724_539_181_07).abs() < 1e-8);
    assert!((sr.re - 15.387_106_893_75).abs() < 1e-8);
    assert!((cat.action("S_inf+").unwrap().re - (sr.re - sl.re)).abs() < 1e-8);
}

#[test]
fn triple_well_relations_and_periods() {
    let cat = evaluate_catalog(&symmetric_tw(), 0.0, DEFAULT_TOL).unwrap();
    for r in verify_relations(&cat) {
        assert!(r.passed, "{}: {:e}", r.name, r.residual);
    }
    // AGM oracles for the outer and central wells
    assert!((cat.period("T_L").unwrap().re - 0.756_153_735_20).abs() < 1e-9);
    assert!((cat.period("T_C").unwrap().re - 1.512_307_470_41).abs() < 1e-9);
    let b1 = cat.action("S_beta1").unwrap();
    let b2 = cat.action("S_beta2").unwrap();
    assert!((b1 - b2).norm() < 1e-9 && b1.re.abs() < 1e-10);
}

#[test]
fn asymmetric_triple_well_relations() {
    let m = Model::triple_well([-2.4, -1.5, -0.6, 0.4, 1.3, 2.0]);
    let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
    for r in verify_relations(&cat) {
        assert!(r.passed, "{}: {:e}", r.name, r.residual);
    }
    assert!(cat.action("S_inf+").unwrap().norm() > 1e-3);
}

#[test]
fn normal_form_catalog() {
    let cat = evaluate_catalog(&Model::NormalForm, NORMAL_FORM_ENERGY, DEFAULT_TOL).unwrap();
    for r in verify_relations(&cat) {
        assert!(r.passed, "{}: {:e}", r.name, r.residual);
    }
    let s_io = cat.action("S_in_out").unwrap();
    let s_oo = cat.action("S_out_out").unwrap();
    assert!((s_io.im - 0.117_691_976).abs() < 1e-7);
    assert!((s_oo.im - 0.012_397_441_8).abs() < 1e-8);
    assert!((cat.action("S_in").unwrap().re - 0.019_846_069_4).abs() < 1e-8);
    assert!(cat.gamma_branch_max < 1e-9);
    assert_eq!(cat.puncture_residues.len(), 4);
    assert!(cat.puncture_residues.iter().all(|r| r.norm() < 1e-9));
}

#[test]
fn bases_have_expected_shape() {
    let (_, _, b) = basis_at(&asymmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
    assert_eq!((b.genus, b.period_rank), (1, 2));
    assert_eq!(b.count(LoopClass::Alpha), 1);
    assert_eq!(b.count(LoopClass::Beta), 1);
    assert_eq!(b.count(LoopClass::GammaBranch), 4);
    assert_eq!(b.loops.iter().filter(|l| l.dependent).count(), 1);

    let (_, _, b) = basis_at(&symmetric_tw(), 0.0, DEFAULT_TOL).unwrap();
    assert_eq!((b.genus, b.period_rank), (2, 4));

    let (_, _, b) = basis_at(&Model::NormalForm, NORMAL_FORM_ENERGY, DEFAULT_TOL).unwrap();
    assert_eq!((b.genus, b.period_rank), (9, 18));
    assert_eq!(b.count(LoopClass::Alpha), 9);
    assert_eq!(b.count(LoopClass::Beta), 9);
    assert_eq!(b.count(LoopClass::GammaBranch), 24);
    assert_eq!(b.count(LoopClass::GammaPuncture), 4);
}

#[test]
fn basis_loop_actions_match_catalog() {
    let m = asymmetric_dw();
    let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
    let (_, _, b) = basis_at(&m, 0.0, DEFAULT_TOL).unwrap();
    let alpha = b.get("alpha").unwrap().action;
    let beta = b.get("beta").unwrap().action;
    let inf = b.get("gamma_inf+").unwrap().action;
    assert!(alpha.re > 0.0 && beta.im > 0.0);
    assert!((inf - cat.action("S_inf+").unwrap()).norm() < 1e-8);
    assert!((beta - cat.action("S_beta").unwrap()).norm() < 1e-8);
    for l in b.loops.iter().filter(|l| l.class == LoopClass::GammaBranch) {
        assert!(l.action.norm() < 1e-9, "{} {}", l.name, l.action);
    }
}

#[test]
fn unknown_and_dependent_loops_are_rejected() {
    let (_, _, b) = basis_at(&asymmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
    let mut w = BTreeMap::new();
    w.insert("delta".to_string(), 1);
    assert!(compose(&b, c(0.0, 0.0), &w).is_err());
    let dep = b.loops.iter().find(|l| l.dependent).unwrap().name.clone();
    let mut w = BTreeMap::new();
    w.insert(dep, 1);
    assert!(compose(&b, c(0.0, 0.0), &w).is_err());
}

#[test]
fn maslov_counts() {
    let (_, _, b) = basis_at(&symmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
    let mut w = BTreeMap::new();
    w.insert("alpha".to_string(), 3);
    assert_eq!(compose(&b, c(0.0, 0.0), &w).unwrap().maslov, Some(7));
    let (_, _, b) = basis_at(&symmetric_tw(), 0.0, DEFAULT_TOL).unwrap();
    let mut w = BTreeMap::new();
    w.insert("alpha1".to_string(), 2);
    w.insert("gamma_inf+".to_string(), 1);
    // n_C = 1, n_L = 2 − 2 = 0
    assert_eq!(compose(&b, c(0.0, 0.0), &w).unwrap().maslov, Some(5));
}

fn composition_paths(base: Complex64) -> (PathSpec, PathSpec) {
    let a = c(-1.5, 0.8);
    let z = c(1.5, 0.8);
    (PathSpec::polygon(&[a, c(0.0, 1.4), base], 0, false), PathSpec::polygon(&[base, c(2.6, 1.2), z], 0, false))
}

#[test]
fn composition_matches_direct_integration() {
    let m = asymmetric_dw();
    let (curve, _, b) = basis_at(&m, 0.0, DEFAULT_TOL).unwrap();
    let (pin, pout) = composition_paths(b.base);
    let mut w = BTreeMap::new();
    w.insert("alpha".to_string(), 2);
    w.insert("beta".to_string(), -1);
    w.insert("gamma_inf+".to_string(), 1);
    let (direct, s0) = compose_direct(&curve, &b, &pin, &pout, &w, DEFAULT_TOL).unwrap();
    let linear = compose(&b, s0, &w).unwrap().action;
    assert!((direct - linear).norm() < 1e-7, "{direct} vs {linear}");
}

#[test]
fn quantization_forces_infinity_loop() {
    let m = asymmetric_dw();
    let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
    let sl = cat.action("S_L").unwrap().re;
    let sr = cat.action("S_R").unwrap().re;
    // ħ quantizing the left well; the right well is quantized as well only
    // when S^(+∞) is an integer multiple of 2πħ
    let hbar = sl / (2.0 * PI * 3.5);
    let r = simultaneous_quantization_check(&cat, hbar).unwrap();
    assert!(r.left_quantized);
    assert_eq!(r.right_quantized, r.infinity_quantized);
    let m_r = sr / (2.0 * PI * hbar) - 0.5;
    assert!((r.m_right - m_r).abs() < 1e-12);

    let cat = evaluate_catalog(&symmetric_tw(), 0.0, DEFAULT_TOL).unwrap();
    let r = simultaneous_quantization_check(&cat, 0.05).unwrap();
    assert_eq!(r.symmetric_forces_equal, Some(true));
    assert_eq!(r.left_quantized, r.right_quantized);
}

#[test]
fn normal_form_energy_outside_window_is_rejected() {
    assert!(evaluate_catalog(&Model::NormalForm, 0.2, DEFAULT_TOL).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn relations_hold_for_random_double_wells(a in 0.2f64..0.9, b in 1.4f64..2.5, c2 in 1.4f64..3.0) {
        let m = Model::double_well([-b, -a, a, c2]);
        let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
        for r in verify_relations(&cat) {
            prop_assert!(r.passed, "{}: {:e}", r.name, r.residual);
        }
    }

    #[test]
    fn composition_is_linear_in_windings(na in -3i64..4, nb in -3i64..4, ni in -2i64..3) {
        let (_, _, b) = basis_at(&asymmetric_dw(), 0.0, DEFAULT_TOL).unwrap();
        let mut w = BTreeMap::new();
        w.insert("alpha".to_string(), na);
        w.insert("beta".to_string(), nb);
        w.insert("gamma_inf+".to_string(), ni);
        let s0 = c(0.3, -0.1);
        let got = compose(&b, s0, &w).unwrap();
        let want = s0 + b.get("alpha").unwrap().action * na as f64
            + b.get("beta").unwrap().action * nb as f64
            + b.get("gamma_inf+").unwrap().action * ni as f64;
        prop_assert!((got.action - want).norm() < 1e-12);
        // flipping μ by 2 leaves (−1)^{μ+1} unchanged
        prop_assert_eq!(got.maslov.unwrap().rem_euclid(2), 1);
    }
}
