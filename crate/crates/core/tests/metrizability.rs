mod common;

use common::*;
use finsler_metrize::catalog::{MetricSpec, OneFormSpec};
use finsler_metrize::finsler::{
    horizontal_derivative, AlphaBetaCase, Cone, FinslerLagrangian, FreeFunction, GeneralizedCase, Margins,
};
use finsler_metrize::geometry::{Point, TangentVector};
use finsler_metrize::metrizability::*;
use finsler_metrize::profile::ProfileIntegral;
use finsler_metrize::sampling::{admissible_pairs, rng, Domain};
use finsler_metrize::Error;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn opts(domain: Domain) -> MetrizabilityOptions {
    MetrizabilityOptions::new(domain, 7)
}

#[test]
fn case1_null_weyl_fits_lambda_minus_one() {
    let c = weyl_null();
    let f = fit_theorem1_case1(&c, &sample(&unit_box(), 50, 1), &tol()).unwrap();
    assert!(f.is_satisfied(), "{:?}", f.reason);
    assert!((f.lambda.unwrap() + 1.0).abs() < 1e-8);
    assert!(f.residual_max.unwrap() < 1e-10);
    assert!(f.closedness.unwrap() < 1e-12);
}

#[test]
fn case1_spacelike_constant_b_is_violated() {
    let f = fit_theorem1_case1(&negative_control(), &sample(&unit_box(), 50, 1), &tol()).unwrap();
    assert_eq!(f.verdict, FitVerdict::Violated);
    assert!(f.residual_max.unwrap() > 0.1);
}

#[test]
fn case1_rejects_nonzero_c2_immediately() {
    let c = conn(MetricSpec::Euclidean, OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] }, (2.0, -1.0, 0.0));
    let f = fit_theorem1_case1(&c, &sample(&unit_box(), 5, 1), &tol()).unwrap();
    assert_eq!(f.verdict, FitVerdict::Violated);
    assert_eq!(f.reason.as_deref(), Some("c2 ≠ 0"));
}

#[test]
fn case1_all_zero_oneform_is_an_error() {
    let c = conn(MetricSpec::Euclidean, OneFormSpec::Constant { components: [0.0; 4] }, (2.0, 0.0, 0.0));
    assert!(matches!(fit_theorem1_case1(&c, &sample(&unit_box(), 5, 1), &tol()), Err(Error::NoUsableSamples(_))));
}

#[test]
fn case2_constant_null_b_gives_tau_zero_and_no_subcase_when_c1_vanishes() {
    let c = conn(MetricSpec::Minkowski, OneFormSpec::Constant { components: [1.0, 1.0, 0.0, 0.0] }, (0.0, 0.0, 1.0));
    let f = fit_theorem1_case2(&c, &sample(&unit_box(), 30, 2), &tol()).unwrap();
    assert!(f.is_satisfied());
    assert_eq!(f.tau, Some(0.0));
    assert_eq!(f.subcase, None);
    let e = construct_theorem1(&c, &f, 1.0, &opts(unit_box())).unwrap_err();
    assert!(matches!(e, Error::NoSubcase(_)));
}

#[test]
fn case2_tau_inconsistency_is_violated() {
    use finsler_metrize::catalog::Profile;
    let c = conn(
        MetricSpec::Euclidean,
        OneFormSpec::ExactExponential { profile: Profile::Poly { coefficients: vec![0.0, 1.0] } },
        (0.0, 0.0, 1.0),
    );
    let d = Domain { min: [0.2, -1.0, -1.0, -1.0], max: [1.0, 1.0, 1.0, 1.0] };
    let f = fit_theorem1_case2(&c, &sample(&d, 40, 3), &tol()).unwrap();
    assert_eq!(f.verdict, FitVerdict::Violated);
    assert!(f.constancy.unwrap() > 1e-3);
}

#[test]
fn theorem1_constructions_match_closed_forms() {
    let o = opts(unit_box());
    let c = weyl_null();
    let f = fit_theorem1_case1(&c, &sample(&unit_box(), 20, 1), &tol()).unwrap();
    let l = construct_theorem1(&c, &f, 1.0, &o).unwrap();
    let v = [0.3, 1.1, -0.4, 0.2];
    let (a, b) = (-0.09 + 1.21 + 0.16 + 0.04, 1.4);
    assert!((l.eval(&[0.0; 4], &v) - a * a / (b * b)).abs() < 1e-12);

    // case 2(ii): c1 = 0, τ = 2, κ = 3 → 3(2A + B²)
    let mut fit = f.clone();
    fit.branch = FitBranch::Theorem1Case2;
    fit.tau = Some(2.0);
    fit.subcase = Some("ii".into());
    let c2 = conn(MetricSpec::Euclidean, OneFormSpec::Constant { components: [1.0, 2.0, 0.0, 0.0] }, (0.0, 0.0, 1.0));
    let l = construct_theorem1(&c2, &fit, 3.0, &o).unwrap();
    assert_eq!(l.case, AlphaBetaCase::Riemannian { tau: 2.0 });
    let v = [0.5, -1.0, 2.0, 0.1];
    let (a, b) = (0.25 + 1.0 + 4.0 + 0.01, 0.5 - 2.0);
    assert!((l.eval(&[0.0; 4], &v) - 3.0 * (2.0 * a + b * b)).abs() < 1e-12);

    // case 2(iii): c1 = 1, c3 = 2 → B² e^{−A/(2B²)}
    fit.subcase = Some("iii".into());
    let c3 = conn(MetricSpec::Euclidean, OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] }, (1.0, 0.0, 2.0));
    let l = construct_theorem1(&c3, &fit, 1.0, &o).unwrap();
    let v = [0.5, 1.0, 0.0, 0.0];
    assert!((l.eval(&[0.0; 4], &v) - 0.25 * (-1.25f64 / 0.5).exp()).abs() < 1e-14);

    fit.verdict = FitVerdict::Violated;
    assert!(matches!(construct_theorem1(&c3, &fit, 1.0, &o), Err(Error::FitNotSatisfied(_))));
}

#[test]
fn lemma1_residual_vanishes_on_theorem1_instance_and_not_for_quadratic_l() {
    let c = weyl_null();
    let f = fit_theorem1_case1(&c, &sample(&unit_box(), 20, 1), &tol()).unwrap();
    let l = construct_theorem1(&c, &f, 1.0, &opts(unit_box())).unwrap();
    let pairs = admissible_pairs(&l, &unit_box(), 200, &mut rng(4));
    for (x, v) in &pairs {
        let r = alpha_beta_pde_residual(&l, &c, x, v).unwrap();
        assert!(r.relative() < 1e-8);
        // the Lemma residual is (A/2)·δL
        let h = horizontal_derivative(&l, &c, x, v).unwrap();
        let a = -v.components[0].powi(2) + v.components[1..].iter().map(|t| t * t).sum::<f64>();
        for m in 0..4 {
            assert!((r.components[m] - 0.5 * a * h.delta[m]).abs() < 1e-9 * (1.0 + r.scale));
        }
    }
    // Φ ≡ 1: residual = −A D^ν_μ v_ν
    let one = finsler_metrize::finsler::AlphaBetaMetric {
        metric: MetricSpec::Minkowski,
        oneform: OneFormSpec::Constant { components: [1.0, 1.0, 0.0, 0.0] },
        kappa: 1.0,
        case: AlphaBetaCase::PowerLaw { lambda: 0.0 },
        cone: Cone::Any,
        margins: Margins::default(),
    };
    let x = Point::new([0.0; 4]);
    let v = TangentVector::new([0.2, 1.0, 0.5, 0.0]);
    let r = alpha_beta_pde_residual(&one, &c, &x, &v).unwrap();
    assert!(r.relative() > 1e-2);
    // s is 0-homogeneous, so the residual is 4-homogeneous in v
    let r2 = alpha_beta_pde_residual(&l, &c, &x, &TangentVector::new(v.components.map(|t| 2.0 * t))).unwrap();
    let r1 = alpha_beta_pde_residual(&l, &c, &x, &v).unwrap();
    assert!((r2.scale - 16.0 * r1.scale).abs() < 1e-9 * r2.scale);
}

#[test]
fn theorem2_translational_fit() {
    let c = translational();
    let f = fit_theorem2(&c, &sample(&translational_box(), 400, 5), &tol(), 64, Some(0.0)).unwrap();
    assert!(f.is_satisfied(), "{:?}", f.reason);
    assert_eq!(f.epsilon, Some(1.0));
    assert_eq!(f.subcase.as_deref(), Some("i"));
    let lp = f.lambda_profile.as_ref().unwrap();
    let tp = f.tau_profile.as_ref().unwrap();
    for t in [0.4, 0.8, 1.2, 1.6] {
        assert!((lp.eval(t) - t).abs() < 1e-9);
        assert!(tp.eval(t).abs() < 1e-12);
    }
}

#[test]
fn theorem2_schrodinger_fit() {
    let c = schrodinger_radial();
    let f = fit_theorem2(&c, &sample(&radial_box(), 400, 6), &tol(), 64, None).unwrap();
    assert!(f.is_satisfied(), "{:?}", f.reason);
    assert_eq!(f.subcase.as_deref(), Some("ii-b"));
    assert_eq!(f.big_c1, Some(0.0));
    assert!(f.tau_formula_residual.unwrap() < 1e-6);
    let (lo, hi) = f.norm_range.unwrap();
    let lp = f.lambda_profile.as_ref().unwrap();
    let tp = f.tau_profile.as_ref().unwrap();
    for k in 0..=10 {
        let t = lo + (hi - lo) * k as f64 / 10.0;
        assert!((lp.eval(t) + t * t).abs() < 1e-8, "λ({t})");
        assert!((tp.eval(t) - t).abs() < 1e-8, "τ({t})");
    }
}

#[test]
fn theorem2_condition1_and_null_b() {
    let c = conn(MetricSpec::Euclidean, OneFormSpec::Constant { components: [1.0, 0.0, 0.0, 0.0] }, (1.0, 0.0, 1.0));
    let f = fit_theorem2(&c, &sample(&unit_box(), 5, 1), &tol(), 64, None).unwrap();
    assert_eq!(f.verdict, FitVerdict::Violated);
    assert!(f.reason.unwrap().contains("condition 1"));
    assert!(matches!(
        fit_theorem2(&weyl_null(), &sample(&unit_box(), 5, 1), &tol(), 64, None),
        Err(Error::NullOneForm { .. })
    ));
}

#[test]
fn theorem2_negative_control_has_large_tau_formula_residual() {
    let f = fit_theorem2(&negative_control(), &sample(&unit_box(), 100, 1), &tol(), 64, None).unwrap();
    assert_eq!(f.verdict, FitVerdict::Violated);
    assert!(f.residual_max.unwrap() > 1e-2);
}

#[test]
fn translational_construction_is_the_riemannian_metric() {
    let c = translational();
    let mut o = opts(translational_box());
    o.free_function = Some(FreeFunction::Affine { f0: 1.0, f1: 1.0 });
    let f = fit_theorem2(&c, &sample(&translational_box(), 400, 5), &tol(), 64, Some(0.0)).unwrap();
    let l = construct_theorem2(&c, &f, 1.0, &o).unwrap();
    let pairs = admissible_pairs(&l, &translational_box(), 100, &mut rng(9));
    for (x, v) in &pairs {
        let a: f64 = v.components.iter().map(|t| t * t).sum();
        let nb = x.coords[0].exp();
        let expect = a + ((nb.powi(3) / 3.0).exp() - 1.0) * v.components[0].powi(2);
        let got = l.eval(&x.coords, &v.components);
        assert!((got - expect).abs() < 1e-8 * expect.abs(), "{got} vs {expect}");
        let r = generalized_pde_residual(&l, &c, x, v).unwrap();
        assert!(r.relative() < 1e-7);
    }
    // missing F, and a constant F is degenerate
    o.free_function = None;
    assert!(matches!(construct_theorem2(&c, &f, 1.0, &o), Err(Error::MissingFreeFunction)));
    o.free_function = Some(FreeFunction::Affine { f0: 1.0, f1: 0.0 });
    assert!(matches!(construct_theorem2(&c, &f, 1.0, &o), Err(Error::DegenerateResult(_))));
}

#[test]
fn schrodinger_case_iib_closed_form_and_residuals() {
    let c = schrodinger_radial();
    let f = fit_theorem2(&c, &sample(&radial_box(), 400, 6), &tol(), 64, Some(1.0)).unwrap();
    let l = construct_theorem2(&c, &f, 1.0, &opts(radial_box())).unwrap();
    assert_eq!(l.case, GeneralizedCase::CaseIIb { c1: -2.0, c2: 1.0, big_c3: 0.0 });
    // ρ = −ln|b| with anchor 1: Φ = exp(−½(p² − 4p − 4 ln|b|))
    for (nb, p) in [(0.5, 0.3), (0.8, 0.9), (1.1, 0.1)] {
        let expect = (-0.5 * (p * p - 4.0 * p - 4.0 * f64::ln(nb))).exp();
        assert!((l.phi(nb, p) - expect).abs() < 1e-9 * expect);
    }
    // Lemma 4 residual is (A/2) δL at matched points
    let pairs = admissible_pairs(&l, &radial_box(), 50, &mut rng(11));
    for (x, v) in &pairs {
        let r = generalized_pde_residual(&l, &c, x, v).unwrap();
        let h = horizontal_derivative(&l, &c, x, v).unwrap();
        let a: f64 = v.components.iter().map(|t| t * t).sum();
        for m in 0..4 {
            assert!((r.components[m] - 0.5 * a * h.delta[m]).abs() < 1e-9 * (1.0 + r.scale));
        }
    }
}

#[test]
fn reduced_system_is_kappa_invariant_and_detects_rho_sign_flip() {
    let c = schrodinger_radial();
    let f = fit_theorem2(&c, &sample(&radial_box(), 400, 6), &tol(), 64, Some(1.0)).unwrap();
    let l = construct_theorem2(&c, &f, 1.0, &opts(radial_box())).unwrap();
    let l5 = construct_theorem2(&c, &f, 5.0, &opts(radial_box())).unwrap();
    let r1 = reduced_system_residual(&l, &f, 0.5, 1.0).unwrap();
    let r5 = reduced_system_residual(&l5, &f, 0.5, 1.0).unwrap();
    assert_eq!(r1, r5);
    // ρ → −ρ, via the integral of |b|/(−λ)
    let mut neg = f.lambda_profile.clone().unwrap();
    neg.coeffs.iter_mut().for_each(|q| q.iter_mut().for_each(|t| *t = -*t));
    let mut flipped = l.clone();
    flipped.rho = ProfileIntegral::new(neg, 1, l.rho.anchor);
    let bad = reduced_system_residual(&flipped, &f, 0.5, 1.0).unwrap();
    eprintln!("reduced residual {r1:?}, flipped {bad:?}");
    assert!(bad[0].abs() > 1e-2);
}
