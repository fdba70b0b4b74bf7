mod common;

use common::invariants::*;
use common::*;
use finsler_metrize::catalog::{DiagEntry, MetricSpec, OneFormSpec, Profile};
use finsler_metrize::finsler::{AlphaBetaCase, AlphaBetaMetric, Cone, FreeFunction, Margins, QuadraticLagrangian};
use finsler_metrize::metrizability::{decide, MetrizabilityOptions};
use finsler_metrize::sampling::{admissible_pairs, rng, Domain};

#[test]
fn catalog_connections_are_torsion_free_and_recover_q() {
    for (c, d) in [
        (weyl_null(), unit_box()),
        (translational(), translational_box()),
        (schrodinger_radial(), radial_box()),
        (negative_control(), unit_box()),
    ] {
        let r = connection_invariants(&c, &sample(&d, 300, 4));
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn curved_metrics_are_levi_civita_compatible() {
    let m = MetricSpec::DiagPower {
        entries: [
            DiagEntry::constant(1.0),
            DiagEntry { coefficient: 1.0, axis: 0, power: 2.0 },
            DiagEntry { coefficient: 2.0, axis: 0, power: 2.0 },
            DiagEntry::constant(3.0),
        ],
    };
    let c = conn(m, OneFormSpec::Radial { profile: Profile::Exp { scale: 1.0, rate: 0.5 } }, (1.0, 2.0, 3.0));
    let d = Domain { min: [0.5, -1.0, -1.0, -1.0], max: [1.5, 1.0, 1.0, 1.0] };
    let r = connection_invariants(&c, &sample(&d, 200, 5));
    assert!(r.passed(), "{r:?}");
}

#[test]
fn alpha_beta_families_are_homogeneous_with_symmetric_hessians() {
    let metric = MetricSpec::Euclidean;
    let oneform = OneFormSpec::Constant { components: [1.0, 0.3, 0.0, 0.2] };
    for case in [
        AlphaBetaCase::PowerLaw { lambda: -0.5 },
        AlphaBetaCase::MKropina { c1: 1.0, c3: 2.0, tau: 0.5 },
        AlphaBetaCase::Riemannian { tau: 1.5 },
        AlphaBetaCase::Exponential { c1: 1.0, c3: 2.0 },
    ] {
        let l = AlphaBetaMetric {
            metric: metric.clone(),
            oneform: oneform.clone(),
            kappa: 2.0,
            case,
            cone: Cone::Positive,
            margins: Margins::default(),
        };
        // the exponential family is ill-conditioned as s = B²/A → 0
        let pairs: Vec<_> = admissible_pairs(&l, &unit_box(), 600, &mut rng(8))
            .into_iter()
            .filter(|(x, v)| l.invariants(x, v).2 > 0.05)
            .collect();
        assert!(pairs.len() > 200);
        let r = lagrangian_invariants(&l, &pairs);
        assert!(r.passed(), "{case:?}: {r:?}");
    }
}

#[test]
fn constructed_lagrangians_pass_the_invariant_suite() {
    let mut o = MetrizabilityOptions::new(translational_box(), 7);
    o.free_function = Some(FreeFunction::Affine { f0: 1.0, f1: 1.0 });
    let out = decide(&translational(), &sample(&translational_box(), 400, 1), &o).unwrap();
    let l = out.lagrangian.unwrap();
    let r = lagrangian_invariants(&l, &admissible_pairs(&l, &translational_box(), 300, &mut rng(8)));
    assert!(r.passed() && r.spray_homogeneity.is_some(), "{r:?}");

    let q = QuadraticLagrangian::new(MetricSpec::Euclidean, Cone::Positive);
    let r = lagrangian_invariants(&q, &admissible_pairs(&q, &unit_box(), 300, &mut rng(8)));
    assert!(r.passed(), "{r:?}");
}

#[test]
fn degenerate_candidate_reports_no_spray() {
    let out = decide(&weyl_null(), &sample(&unit_box(), 50, 1), &MetrizabilityOptions::new(unit_box(), 7)).unwrap();
    let l = &out.rejected[0];
    let r = lagrangian_invariants(l, &admissible_pairs(l, &unit_box(), 300, &mut rng(8)));
    assert!(r.spray_homogeneity.is_none());
    assert!(r.spray_error.as_deref().unwrap().contains("degenerate"));
    assert!(r.homogeneity < HOMOGENEITY_TOL && r.euler < EULER_TOL);
}
