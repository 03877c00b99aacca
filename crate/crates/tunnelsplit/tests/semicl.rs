use proptest::prelude::*;
use std::f64::consts::PI;
use tunnelsplit::homology::{evaluate_catalog, DEFAULT_TOL};
use tunnelsplit::model::{Model, NORMAL_FORM_ENERGY};
use tunnelsplit::semicl::*;
use tunnelsplit::Error;

fn dw() -> Model {
    Model::double_well([-2.0, -1.0, 1.0, 2.0])
}

fn tw() -> Model {
    Model::triple_well([-2.2, -1.4, -0.5, 0.5, 1.4, 2.2])
}

#[test]
fn wells_of_the_triple_well() {
    let w = wells(&tw()).unwrap();
    assert_eq!(w.len(), 3);
    assert!((w[0].x_min + w[2].x_min).abs() < 1e-12);
    assert!(w[1].x_min.abs() < 1e-12);
    assert!((w[1].v_min - (-0.25 * 1.96 * 4.84)).abs() < 1e-12);
}

#[test]
fn quantized_level_satisfies_bohr_sommerfeld() {
    let m = dw();
    let q = quantize_well(&m, 0, 4, 0.05).unwrap();
    assert!((q.action - 4.5 * 2.0 * PI * 0.05).abs() < 1e-10);
    assert!(q.period > 0.0);
    // the mirror well gives the same level
    let r = quantize_well(&m, 1, 4, 0.05).unwrap();
    assert!((q.energy - r.energy).abs() < 1e-10);
}

#[test]
fn no_bound_state_above_the_barrier() {
    assert!(matches!(quantize_well(&dw(), 0, 40, 0.1), Err(Error::NoBoundState(40))));
}

#[test]
fn double_well_prediction_is_the_instanton_formula() {
    let m = dw();
    let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
    let sb = cat.action("S_beta").unwrap().norm();
    let ta = cat.period("T_alpha").unwrap().re;
    let hbar = 0.07;
    let p = split_double_well(&m, EnergySpec::Energy(0.0), hbar, None).unwrap();
    let want = 2.0 * hbar / ta * (-sb / (2.0 * hbar)).exp();
    assert!(((p.point.delta_e - want) / want).abs() < 1e-12);
    assert!((p.t - ta / 4.0).abs() < 1e-15);
    assert!((p.d_delta_e_dt + p.point.delta_e / p.t).abs() < 1e-12 * p.point.delta_e / p.t);
}

#[test]
fn halving_hbar_shifts_the_log_by_the_barrier_action() {
    let m = dw();
    let (h1, h2) = (0.1, 0.05);
    let a = split_double_well(&m, EnergySpec::Energy(0.0), h1, Some(0.3)).unwrap();
    let b = split_double_well(&m, EnergySpec::Energy(0.0), h2, Some(0.3)).unwrap();
    let sb = a.s_beta;
    let want = -0.5 * sb * (1.0 / h2 - 1.0 / h1) + (h2 / h1).ln();
    assert!((b.point.ln_delta_e - a.point.ln_delta_e - want).abs() < 1e-12);
}

#[test]
fn winding_sum_leaves_the_zero_winding_term() {
    let m = dw();
    let q = quantize_well(&m, 0, 3, 0.08).unwrap();
    let p = split_double_well(&m, EnergySpec::Level(3), 0.08, None).unwrap();
    assert!((p.point.energy - q.energy).abs() < 1e-14);
    assert!((p.winding_sum.re - 1.0).abs() < 1e-8 && p.winding_sum.im.abs() < 1e-8);
    for k in [2usize, 4, 10] {
        let s = winding_sum_symmetric(q.action, 0.08, k);
        assert!((s.re - 1.0).abs() < 1e-8);
    }
}

#[test]
fn triple_well_partial_sums_converge() {
    let m = tw();
    let p = split_triple_well(&m, EnergySpec::Level(2), 0.2, None, 200).unwrap();
    assert!((p.sum_c_partial - p.sum_c_damped_closed).norm() < 1e-10);
    assert!(!p.point.resonance);
    let cat = evaluate_catalog(&m, p.point.energy, DEFAULT_TOL).unwrap();
    let sc = cat.action("S_C").unwrap().re;
    assert!((p.resonance_factor - (sc / 0.4).cos()).abs() < 1e-12);
    // (ħ/T_L) e^{−S_β1/ħ} / |cos(S_C/2ħ)| with T = T_L/4
    let tl = cat.period("T_L").unwrap().re;
    let sb = cat.action("S_beta1").unwrap().norm();
    let want = 0.2 / tl * (-sb / 0.2).exp() / p.resonance_factor.abs() * p.sum_l.norm();
    assert!(((p.point.delta_e - want) / want).abs() < 1e-10);
}

#[test]
fn triple_well_resonance_is_flagged() {
    let m = tw();
    let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
    let sc = cat.action("S_C").unwrap().re;
    // S_C/2ħ = π/2 + 3π, nudged off the exact zero
    let hbar = sc / (2.0 * (3.5 * PI + 1e-4));
    let p = split_triple_well_from(&cat, hbar, None, 200).unwrap();
    assert!(p.point.resonance);
    let off = split_triple_well_from(&cat, sc / (2.0 * 3.0 * PI), None, 200).unwrap();
    assert!(!off.point.resonance);
    assert!(p.resonance_factor.abs() < 1e-3);
    let exact = sc / (2.0 * 3.5 * PI);
    match split_triple_well_from(&cat, exact, None, 200) {
        Err(Error::DivergentSum) => {}
        other => assert!(other.unwrap().point.resonance),
    }
}

#[test]
fn normal_form_variants() {
    let cat = evaluate_catalog(&Model::NormalForm, NORMAL_FORM_ENERGY, DEFAULT_TOL).unwrap();
    let hbar = 1.0 / 130.0;
    let b = split_normal_form_from(&cat, hbar, Variant::Blue).unwrap();
    let r = split_normal_form_from(&cat, hbar, Variant::Red).unwrap();
    assert!(r.point.slope.unwrap() < b.point.slope.unwrap());
    let s_io = cat.action("S_in_out").unwrap().norm();
    let s_oo = cat.action("S_out_out").unwrap().norm();
    assert!((b.point.slope.unwrap() + s_io + 0.5 * s_oo).abs() < 1e-14);
    assert!((r.point.slope.unwrap() + s_io + s_oo).abs() < 1e-14);
    assert!((r.point.ln_delta_e - b.point.ln_delta_e + 0.5 * s_oo / hbar).abs() < 1e-10);
    assert_eq!(b.point.variant, Some(Variant::Blue));
}

#[test]
fn normal_form_sine_factor_extremes() {
    let cat = evaluate_catalog(&Model::NormalForm, NORMAL_FORM_ENERGY, DEFAULT_TOL).unwrap();
    let probe = split_normal_form_from(&cat, 0.01, Variant::Blue).unwrap();
    let psi = 2.0 * probe.sin_argument * 0.01;
    // argument = π/2 + 20π: the prefactor is at its minimum
    let top = split_normal_form_from(&cat, psi / (2.0 * 20.5 * PI), Variant::Blue).unwrap();
    assert!((top.sin_factor.abs() - 1.0).abs() < 1e-12);
    assert!(top.point.delta_e.is_finite());
    // argument = 20π: singular
    let bad = split_normal_form_from(&cat, psi / (2.0 * 20.0 * PI), Variant::Blue);
    assert!(matches!(bad, Err(Error::ResonanceSingularity(_))));
}

#[test]
fn normal_form_double_sum_resums() {
    let cat = evaluate_catalog(&Model::NormalForm, NORMAL_FORM_ENERGY, DEFAULT_TOL).unwrap();
    for ih in [100.0, 133.0, 160.0] {
        let s = normal_form_series(&cat, 1.0 / ih, 500).unwrap();
        assert!(((s.partial - s.resummed) / s.resummed).norm() < 1e-10, "{ih}");
        assert!(s.magnitude.is_finite() && s.closed_form.is_finite());
    }
}

#[test]
fn sweep_rows_and_ordering() {
    let grid = HbarGrid::geometric(20.0, 200.0, 40);
    let opts = SweepOptions {
        spec: EnergySpec::Energy(0.0),
        sources: vec![Source::Semiclassical],
        variants: vec![],
        t: None,
        cutoff: 200,
        tol: DEFAULT_TOL,
    };
    let rows = sweep(&dw(), &grid, &opts).unwrap();
    assert_eq!(rows.len(), 40);
    assert!(rows.windows(2).all(|w| w[0].inv_hbar < w[1].inv_hbar));
    assert!(rows.iter().all(|r| r.error.is_none()));
    let again = sweep(&dw(), &grid, &opts).unwrap();
    assert!(rows.iter().zip(&again).all(|(a, b)| a.ln_delta_e == b.ln_delta_e));
}

#[test]
fn sweep_with_exact_source_pairs_rows() {
    let grid = HbarGrid::linear(20.0, 30.0, 6);
    let opts = SweepOptions {
        spec: EnergySpec::Level(2),
        sources: vec![Source::Semiclassical, Source::Exact],
        variants: vec![],
        t: None,
        cutoff: 200,
        tol: DEFAULT_TOL,
    };
    let rows = sweep(&dw(), &grid, &opts).unwrap();
    assert_eq!(rows.len(), 12);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].source, Source::Semiclassical);
        assert_eq!(pair[1].source, Source::Exact);
        let ratio = pair[1].delta_e / pair[0].delta_e;
        assert!((0.5..2.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn sweep_records_errors_in_row() {
    // level 3 of the triple well leaves the central-well window as ħ shrinks
    let grid = HbarGrid::linear(7.0, 9.0, 5);
    let opts = SweepOptions {
        spec: EnergySpec::Level(3),
        sources: vec![Source::Semiclassical],
        variants: vec![],
        t: None,
        cutoff: 200,
        tol: DEFAULT_TOL,
    };
    let rows = sweep(&tw(), &grid, &opts).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].error.is_none());
    assert_eq!(rows[4].error.as_deref(), Some("EnergyOutOfRange"));
    let bad = HbarGrid { inv_hbar: vec![3.0, 2.0] };
    assert!(sweep(&tw(), &bad, &opts).is_err());
}

#[test]
fn finite_difference_slope_matches_analytic() {
    let m = dw();
    let cat = evaluate_catalog(&m, 0.0, DEFAULT_TOL).unwrap();
    for ih in [20.0, 60.0, 110.0] {
        let a = split_double_well_from(&cat, 1.0 / ih, None).unwrap();
        let b = split_double_well_from(&cat, 1.0 / (ih + 0.02), None).unwrap();
        let fd = (b.point.ln_delta_e - a.point.ln_delta_e) / 0.02;
        let an = a.point.slope.unwrap();
        assert!(((fd - an) / an).abs() < 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn harmonic_quantization(omega in 0.3f64..3.0, inv_hbar in 1.0f64..60.0, n in 0usize..12) {
        let hbar = 1.0 / inv_hbar;
        let q = quantize_well(&Model::Harmonic { omega }, 0, n, hbar).unwrap();
        prop_assert!((q.energy - hbar * omega * (n as f64 + 0.5)).abs() < 1e-10);
    }

    #[test]
    fn symmetric_winding_sum_is_one_at_quantized_action(m in 0u32..30, inv_hbar in 2.0f64..80.0, k in 1usize..40) {
        let hbar = 1.0 / inv_hbar;
        let s = (m as f64 + 0.5) * 2.0 * PI * hbar;
        let w = winding_sum_symmetric(s, hbar, 2 * k);
        prop_assert!((w.re - 1.0).abs() < 1e-9 && w.im.abs() < 1e-9);
    }
}
