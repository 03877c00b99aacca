use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tunnelsplit::curve::{monodromy_at, topology, BranchKind, Curve, Permutation};
use tunnelsplit::model::{Model, NORMAL_FORM_ENERGY};
use tunnelsplit::polyalg::BivariatePoly;

#[test]
fn double_well_is_a_torus() {
    let t = topology(&Model::double_well([-2.0, -1.0, 1.0, 2.0]).curve(0.0).unwrap()).unwrap();
    assert_eq!((t.sheet_count, t.ramification_index, t.genus), (2, 4, 1));
    assert_eq!(t.genus_riemann_hurwitz, 1);
    assert_eq!(t.branch_points.len(), 4);
    for b in &t.branch_points {
        assert!(b.location.im.abs() < 1e-10);
        assert_eq!(b.ramification, 2);
    }
    // two unramified points above infinity where p ~ ±i√2 q²
    assert_eq!(t.punctures.len(), 2);
    assert!(t.monodromy_product().is_identity());
    assert!(t.transitive);
}

#[test]
fn triple_well_has_genus_two() {
    let m = Model::triple_well([-2.0, -1.3, -0.6, 0.6, 1.3, 2.0]);
    let t = topology(&m.curve(0.0).unwrap()).unwrap();
    assert_eq!((t.sheet_count, t.ramification_index, t.genus), (2, 6, 2));
    assert_eq!(t.genus_riemann_hurwitz, 2);
    assert!(t.monodromy_product().is_identity());
}

#[test]
fn normal_form_surface() {
    let curve = Model::NormalForm.curve(NORMAL_FORM_ENERGY).unwrap();
    let t = topology(&curve).unwrap();
    assert_eq!(t.sheet_count, 4);
    assert_eq!(t.branch_points.len(), 24);
    assert!(t.branch_points.iter().all(|b| b.ramification == 2 && b.kind == BranchKind::Finite));
    assert_eq!((t.ramification_index, t.genus, t.genus_riemann_hurwitz), (24, 9, 9));
    assert_eq!(t.punctures.len(), 4);
    assert_eq!(t.holes(), 28);
    assert!(t.monodromy_product().is_identity());
    // every branch point is a single transposition when circled alone
    for b in &t.branch_points {
        assert_eq!(b.monodromy.cycles().iter().filter(|c| c.len() > 1).count(), 1);
    }
}

#[test]
fn symmetric_branch_points_pair_up() {
    for m in [
        Model::double_well([-2.0, -1.0, 1.0, 2.0]),
        Model::triple_well([-2.2, -1.4, -0.5, 0.5, 1.4, 2.2]),
        Model::NormalForm,
    ] {
        let curve = m.curve(m.reference_energy()).unwrap();
        let pts: Vec<Complex64> = curve.discriminant_roots().iter().map(|r| r.value).collect();
        for &z in &pts {
            let d = pts.iter().map(|&w| (w + z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-10, "{z} has no mirror partner ({d:e})");
        }
    }
}

#[test]
fn local_monodromy_of_normal_form_points() {
    let curve = Model::NormalForm.curve(NORMAL_FORM_ENERGY).unwrap();
    for r in curve.discriminant_roots() {
        let m = monodromy_at(&curve, r.value, curve.monodromy_radius(r.value)).unwrap();
        assert!(!m.is_identity());
        let nontrivial: Vec<_> = m.cycles().into_iter().filter(|c| c.len() > 1).collect();
        assert!(nontrivial.iter().all(|c| c.len() == 2));
    }
}

fn random_curve(rng: &mut ChaCha8Rng, deg_q: usize, deg_p: usize) -> BivariatePoly {
    let mut terms = vec![(deg_p, 0, 1.0)];
    for j in 0..=deg_q {
        terms.push((0, j, rng.gen_range(-1.0..1.0) + if j == deg_q { 2.0 } else { 0.0 }));
    }
    if deg_p > 2 {
        for j in 0..=2 {
            terms.push((1, j, rng.gen_range(-1.0..1.0)));
        }
    }
    BivariatePoly::from_real_terms(&terms)
}

#[test]
fn monodromy_product_is_identity_for_random_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..20 {
        let deg_q = if k % 2 == 0 { 4 } else { 6 };
        let deg_p = if k % 5 == 4 { 3 } else { 2 };
        let f = random_curve(&mut rng, deg_q, deg_p);
        let t = topology(&Curve::new(f).unwrap()).unwrap();
        let prod: Permutation = t.monodromy_product();
        assert!(prod.is_identity(), "curve {k}: product {prod}");
        assert_eq!(t.genus, t.genus_riemann_hurwitz, "curve {k}");
    }
}

