use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use cornerfem::problem::{
    alpha0, alpha1, build_correction, build_correction_auto, presets, s_boundary_dt, s_eval, BoundarySignal,
    CorrectionLevel, CornerExpansion, EquationKind, ProblemSpec, ReactionPolynomial, Side, SmoothProfile,
};
use cornerfem::special::{s0, s1, Diffusivity, SpaceTimePoint};
use cornerfem::timestep::apply_boundary;
use cornerfem::Error;
use proptest::prelude::*;

fn nu() -> Diffusivity {
    Diffusivity::new(0.2).unwrap()
}

fn at(x: f64, t: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(x, t).unwrap()
}

#[test]
fn defects_against_hand_derivatives() {
    // Burgers: h = -sin(5 pi x / 4 + 3 pi / 4)
    let k = 5.0 * PI / 4.0;
    let (h0, h1, h2) = (-(0.75 * PI).sin(), -k * (0.75 * PI).cos(), k * k * (0.75 * PI).sin());
    let b = presets::burgers_paper();
    assert!((alpha0(&b) - FRAC_1_SQRT_2).abs() <= 1e-12);
    assert!((alpha1(&b) - (h0 * h1 - 0.2 * h2)).abs() <= 1e-12);
    assert!((alpha1(&b) + 4.1444).abs() <= 1e-3);

    // RD: h = sin(7 pi x / 4 + pi / 4), p = u^3
    let k = 7.0 * PI / 4.0;
    let (h0, h2) = ((0.25 * PI).sin(), -k * k * (0.25 * PI).sin());
    let r = presets::rd_cubic_paper();
    assert!((alpha0(&r) + FRAC_1_SQRT_2).abs() <= 1e-12);
    assert!((alpha1(&r) - (-0.2 * h2 + h0.powi(3))).abs() <= 1e-12);
    assert!((alpha1(&r) - 4.62715).abs() <= 1e-3);
}

#[test]
fn compatible_data_has_no_defects() {
    let spec = ProblemSpec::new(
        EquationKind::Burgers,
        nu(),
        BoundarySignal::polynomial(&[0.3]),
        BoundarySignal::polynomial(&[0.3]),
        SmoothProfile::constant(0.3),
        None,
        0.1,
    )
    .unwrap();
    assert_eq!(alpha0(&spec), 0.0);
    assert_eq!(alpha1(&spec), 0.0);
    let zero = ProblemSpec::new(
        EquationKind::Burgers,
        nu(),
        BoundarySignal::zero(),
        BoundarySignal::zero(),
        SmoothProfile::constant(0.0),
        None,
        0.1,
    )
    .unwrap();
    assert_eq!(alpha1(&zero), 0.0);
    let heat = presets::heat_sine();
    assert!(alpha0(&heat).abs() <= 1e-15 && alpha1(&heat).abs() <= 1e-12);
    assert!(alpha0(&heat.mirrored()).abs() <= 1e-15 && alpha1(&heat.mirrored()).abs() <= 1e-12);
}

#[test]
fn right_corners_of_presets_are_compatible() {
    for spec in [presets::burgers_paper(), presets::rd_cubic_paper()] {
        let m = spec.mirrored();
        assert!(alpha0(&m).abs() <= 1e-10);
        assert!(alpha1(&m).abs() <= 1e-10);
    }
}

#[test]
fn correction_levels_populate_defects() {
    let spec = presets::burgers_paper();
    let none = build_correction(&spec, CorrectionLevel::None, Side::Left);
    assert_eq!((none.alpha0, none.alpha1), (0.0, 0.0));
    let c1 = build_correction(&spec, CorrectionLevel::C1, Side::Left);
    assert_eq!((c1.alpha0, c1.alpha1), (alpha0(&spec), 0.0));
    let c2 = build_correction(&spec, CorrectionLevel::C2, Side::Left);
    assert_eq!((c2.alpha0, c2.alpha1), (alpha0(&spec), alpha1(&spec)));
}

#[test]
fn zeroth_order_removal() {
    for spec in [presets::burgers_paper(), presets::rd_cubic_paper()] {
        for level in [CorrectionLevel::C1, CorrectionLevel::C2] {
            let c = build_correction(&spec, level, Side::Left);
            let b = apply_boundary(&spec, &c, 0.0).unwrap();
            assert!((b.v0 - spec.h().value(0.0)).abs() <= 1e-12);
            // and the limit from positive time
            let s = s_eval(&c, at(0.0, 1e-14), spec.nu()).unwrap();
            assert!((spec.g1().value(0.0) - s - spec.h().value(0.0)).abs() <= 1e-12);
        }
    }
}

#[test]
fn first_order_removal() {
    let b = presets::burgers_paper();
    let c = build_correction(&b, CorrectionLevel::C2, Side::Left);
    let h = b.h();
    let lhs = b.g1().d1(0.0) - c.alpha1;
    assert!((lhs - (-h.value(0.0) * h.d1(0.0) + 0.2 * h.d2(0.0))).abs() <= 1e-9);

    let r = presets::rd_cubic_paper();
    let c = build_correction(&r, CorrectionLevel::C2, Side::Left);
    let h = r.h();
    let p = r.reaction().unwrap();
    let lhs = r.g1().d1(0.0) - c.alpha1;
    assert!((lhs - (0.2 * h.d2(0.0) - p.eval(h.value(0.0)))).abs() <= 1e-9);

    // the lifted boundary derivative at t = 0+ equals u_t from the equation
    let b_dt = apply_boundary(&r, &c, 1e-9).unwrap().v0_dt;
    assert!((b_dt - (0.2 * h.d2(0.0) - p.eval(h.value(0.0)))).abs() <= 1e-9);
}

fn sine_spec(kind: EquationKind, a: f64, b: f64, c: f64, g1: &[f64], g2: &[f64]) -> ProblemSpec {
    let reaction = (kind == EquationKind::ReactionDiffusion).then(|| ReactionPolynomial::new(&[0.5, 1.0, 0.0, 2.0]).unwrap());
    ProblemSpec::new(
        kind,
        nu(),
        BoundarySignal::polynomial(g1),
        BoundarySignal::polynomial(g2),
        SmoothProfile::sine(a, b, c).unwrap(),
        reaction,
        0.1,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn mirror_involution(a in -2.0f64..2.0, b in 0.1f64..2.0, c in -1.0f64..1.0,
                         g10 in -1.0f64..1.0, g11 in -2.0f64..2.0, g20 in -1.0f64..1.0, g21 in -2.0f64..2.0,
                         burgers in any::<bool>()) {
        let kind = if burgers { EquationKind::Burgers } else { EquationKind::ReactionDiffusion };
        let spec = sine_spec(kind, a, b, c, &[g10, g11], &[g20, g21]);
        for level in CorrectionLevel::ALL {
            let right = build_correction(&spec, level, Side::Right);
            let left_of_mirror = build_correction(&spec.mirrored(), level, Side::Left);
            prop_assert_eq!((right.alpha0, right.alpha1), (left_of_mirror.alpha0, left_of_mirror.alpha1));
        }
        let twice = spec.mirrored().mirrored();
        prop_assert_eq!(alpha0(&twice), alpha0(&spec));
        prop_assert_eq!(alpha1(&twice), alpha1(&spec));
        prop_assert_eq!(twice.convection_sign(), spec.convection_sign());
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            prop_assert_eq!(twice.h().value(x), spec.h().value(x));
        }
    }

    #[test]
    fn c2_without_first_order_defect_is_c1(alpha0 in -2.0f64..2.0, x in 0.0f64..1.0, t in 1e-4f64..0.1, left in any::<bool>()) {
        let side = if left { Side::Left } else { Side::Right };
        let c1 = CornerExpansion { level: CorrectionLevel::C1, alpha0, alpha1: 0.0, side };
        let c2 = CornerExpansion { level: CorrectionLevel::C2, alpha0, alpha1: 0.0, side };
        prop_assert_eq!(s_eval(&c1, at(x, t), nu()).unwrap(), s_eval(&c2, at(x, t), nu()).unwrap());
    }
}

#[test]
fn right_corner_defects_match_the_physical_formula() {
    // Burgers with incompatible right corner: alpha1_R = g2' + h(1) h'(1) - nu h''(1)
    let spec = sine_spec(EquationKind::Burgers, 1.0, 0.6, 0.1, &[0.0], &[0.2, 1.5]);
    let h = spec.h();
    let c = build_correction(&spec, CorrectionLevel::C2, Side::Right);
    assert!((c.alpha0 - (0.2 - h.value(1.0))).abs() <= 1e-12);
    let expected = 1.5 + h.value(1.0) * h.d1(1.0) - 0.2 * h.d2(1.0);
    assert!((c.alpha1 - expected).abs() <= 1e-9, "{} vs {expected}", c.alpha1);
}

#[test]
fn s_eval_examples() {
    let spec = presets::burgers_paper();
    let none = CornerExpansion::NONE;
    assert_eq!(s_eval(&none, at(0.0, 0.0), nu()).unwrap(), 0.0);
    let c1 = build_correction(&spec, CorrectionLevel::C1, Side::Left);
    let v = s_eval(&c1, at(0.1, 0.05), nu()).unwrap();
    assert!((v - std::f64::consts::FRAC_1_SQRT_2 * 0.4795001222).abs() <= 1e-8);
    assert!(matches!(s_eval(&c1, at(0.0, 0.0), nu()), Err(Error::CornerPoint { .. })));
    let c2 = build_correction(&spec, CorrectionLevel::C2, Side::Left);
    for t in [1e-3, 0.01, 0.05] {
        let v = s_eval(&c2, at(0.0, t), nu()).unwrap();
        assert!((v - (c2.alpha0 + c2.alpha1 * t)).abs() <= 1e-12);
        let direct = c2.alpha0 * s0(at(0.3, t), nu()).unwrap() + c2.alpha1 * s1(at(0.3, t), nu()).unwrap();
        assert!((s_eval(&c2, at(0.3, t), nu()).unwrap() - direct).abs() <= 1e-15);
    }
    // a right-side expansion evaluates in the reflected coordinate
    let cr = CornerExpansion { side: Side::Right, ..c2 };
    assert_eq!(s_eval(&cr, at(0.7, 0.02), nu()).unwrap(), s_eval(&c2, at(1.0 - 0.7, 0.02), nu()).unwrap());
}

#[test]
fn s_boundary_dt_examples() {
    let spec = presets::burgers_paper();
    let c1 = build_correction(&spec, CorrectionLevel::C1, Side::Left);
    let c2 = build_correction(&spec, CorrectionLevel::C2, Side::Left);
    assert_eq!(s_boundary_dt(&c1, 0.0, 0.02, nu()).unwrap(), 0.0);
    assert_eq!(s_boundary_dt(&c2, 0.0, 0.02, nu()).unwrap(), c2.alpha1);
    assert!(s_boundary_dt(&c2, 0.0, 0.0, nu()).is_err());
    assert!(s_boundary_dt(&c2, 0.5, 0.02, nu()).is_err());
    // far corner of a large-time expansion, where the value is not negligible
    for t in [0.05, 0.5, 2.0] {
        let d = 1e-6 * t;
        let fd = (s_eval(&c2, at(1.0, t + d), nu()).unwrap() - s_eval(&c2, at(1.0, t - d), nu()).unwrap()) / (2.0 * d);
        let exact = s_boundary_dt(&c2, 1.0, t, nu()).unwrap();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-300) + 1e-13, "t = {t}: {fd} vs {exact}");
    }
}

#[test]
fn two_incompatible_corners_are_rejected() {
    let spec = sine_spec(EquationKind::Burgers, 1.0, 1.0, 0.25, &[0.0], &[0.0]);
    assert!(alpha0(&spec).abs() > 1e-3 && alpha0(&spec.mirrored()).abs() > 1e-3);
    assert!(matches!(build_correction_auto(&spec, CorrectionLevel::C1), Err(Error::Unsupported(_))));
    assert_eq!(build_correction_auto(&spec, CorrectionLevel::None).unwrap(), CornerExpansion::NONE);
}

#[test]
fn data_validation() {
    let bad: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|x: f64| x * x);
    let wrong_d1: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|x: f64| x);
    let d2: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|_| 2.0);
    assert!(SmoothProfile::new(bad, wrong_d1, d2, "x^2").is_err());
    assert!(ReactionPolynomial::new(&[0.0, 0.0, 1.0]).is_err());
    assert!(ReactionPolynomial::new(&[0.0, -1.0]).is_err());
    assert!(ReactionPolynomial::new(&[1.0, 2.0, 0.0, 3.0, 0.0]).is_ok());
    let spec = presets::burgers_paper();
    assert!(ProblemSpec::new(
        EquationKind::Burgers,
        nu(),
        BoundarySignal::zero(),
        BoundarySignal::zero(),
        spec.h().clone(),
        Some(ReactionPolynomial::zero()),
        0.05
    )
    .is_err());
    assert!(spec.with_t_final(0.0).is_err());
}
