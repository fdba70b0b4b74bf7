mod common;

use common::*;
use finsler_metrize::connection::SubfamilyTag;
use finsler_metrize::finsler::FreeFunction;
use finsler_metrize::metrizability::*;

#[test]
fn weyl_null_candidate_is_degenerate() {
    let c = weyl_null();
    let o = MetrizabilityOptions::new(unit_box(), 7);
    let out = decide(&c, &sample(&unit_box(), 100, 1), &o).unwrap();
    let r = &out.report;
    assert_eq!(r.subfamilies, vec![SubfamilyTag::Weyl]);
    let fit = r.alpha_beta.fit.as_ref().unwrap();
    assert!(fit.is_satisfied());
    assert!((fit.lambda.unwrap() + 1.0).abs() < 1e-8);
    assert_eq!(r.alpha_beta.status, BranchStatus::Rejected);
    let cand = &r.rejected_candidates[0];
    let s = cand.soundness.as_ref().unwrap();
    assert!(s.max_relative_delta_l.unwrap() < 1e-8);
    assert!(!s.nondegeneracy.is_nondegenerate());
    assert!(r.generalized.reason.as_ref().unwrap().contains("null b"));
    assert_eq!(r.verdict, Verdict::NotMetrizableByTheseFamilies);
    assert!(out.lagrangian.is_none());
}

#[test]
fn translational_is_generalized_metrizable() {
    let c = translational();
    let mut o = MetrizabilityOptions::new(translational_box(), 7);
    o.free_function = Some(FreeFunction::Affine { f0: 1.0, f1: 1.0 });
    o.integral_anchor = Some(0.0);
    let out = decide(&c, &sample(&translational_box(), 400, 1), &o).unwrap();
    let r = &out.report;
    assert_eq!(r.verdict, Verdict::GeneralizedMetrizable, "{r:#?}");
    assert_eq!(r.alpha_beta.status, BranchStatus::Violated);
    let d = r.lagrangian.as_ref().unwrap();
    assert_eq!(d.case_tag, "i");
    let s = r.soundness.as_ref().unwrap();
    assert!(s.max_relative_delta_l.unwrap() < 1e-7);
    assert!(s.berwald_gamma_deviation.unwrap() < 1e-5);
    assert!(s.spray_vs_connection.unwrap() < 1e-7);
}

#[test]
fn schrodinger_radial_fit_passes_but_candidate_is_rejected() {
    let c = schrodinger_radial();
    let mut o = MetrizabilityOptions::new(radial_box(), 7);
    o.integral_anchor = Some(1.0);
    let out = decide(&c, &sample(&radial_box(), 400, 1), &o).unwrap();
    let r = &out.report;
    assert_eq!(r.alpha_beta.status, BranchStatus::Violated);
    assert_eq!(r.alpha_beta.reason.as_deref(), Some("c2 ≠ 0"));
    let g = r.generalized.fit.as_ref().unwrap();
    assert!(g.is_satisfied());
    assert_eq!(r.generalized.status, BranchStatus::Rejected);
    let s = r.rejected_candidates[0].soundness.as_ref().unwrap();
    assert!(s.max_relative_delta_l.unwrap() > 1e-2);
    assert_eq!(r.verdict, Verdict::NotMetrizableByTheseFamilies);
}

#[test]
fn negative_control_is_not_metrizable() {
    let c = negative_control();
    let o = MetrizabilityOptions::new(unit_box(), 7);
    let out = decide(&c, &sample(&unit_box(), 100, 1), &o).unwrap();
    let r = &out.report;
    assert_eq!(r.verdict, Verdict::NotMetrizableByTheseFamilies);
    assert!(r.alpha_beta.fit.as_ref().unwrap().residual_max.unwrap() > 1e-2);
    assert!(r.generalized.fit.as_ref().unwrap().residual_max.unwrap() > 1e-2);
    assert!(r.lagrangian.is_none());
}

#[test]
fn verdict_and_constants_are_kappa_invariant() {
    let c = translational();
    let pts = sample(&translational_box(), 300, 2);
    let run = |kappa: f64| {
        let mut o = MetrizabilityOptions::new(translational_box(), 7);
        o.free_function = Some(FreeFunction::Affine { f0: 1.0, f1: 1.0 });
        o.kappa = kappa;
        decide(&c, &pts, &o).unwrap().report
    };
    let (a, b) = (run(1.0), run(5.0));
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.generalized.fit, b.generalized.fit);
    assert_eq!(a.alpha_beta.fit, b.alpha_beta.fit);
}
