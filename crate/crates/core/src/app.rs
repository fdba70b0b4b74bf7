//! Command implementations shared by the CLI and the C interface.

use std::path::{Path, PathBuf};

use crate::catalog::{MetricSpec, OneFormSpec};
use crate::config::{InlineLagrangian, IntegrateKind, ScenarioConfig};
use crate::connection::{classify_subfamily, NonmetricityCoefficients, VectorialConnection};
use crate::error::{Error, Result};
use crate::finsler::{AlphaBetaMetric, Margins, QuadraticLagrangian};
use crate::geometry::{Point, TangentVector};
use crate::metrizability::{decide, ConstructedLagrangian, DecideOutcome, MetrizabilityOptions};
use crate::report::{
    Command, IntegrateSection, Outcome, Report, TagReport, TrajectorySummary, VerifySection, TOOL, VERSION,
};
use crate::sampling::{admissible_pairs, points, rng};
use crate::verification::{integrate_autoparallel, integrate_geodesic, measure_order, verify_bundle, VerifyOptions};

pub type Connection = VectorialConnection<MetricSpec, OneFormSpec>;
pub type Lagrangian = ConstructedLagrangian<MetricSpec, OneFormSpec>;

pub fn build_connection(cfg: &ScenarioConfig) -> Result<Connection> {
    let c = cfg.coefficients;
    Ok(VectorialConnection::new(
        cfg.metric.clone(),
        cfg.oneform.clone(),
        NonmetricityCoefficients::new(c.c1, c.c2, c.c3)?,
    ))
}

fn margins(cfg: &ScenarioConfig) -> Margins {
    Margins { delta_a: cfg.sampling.delta_a, delta_b: cfg.sampling.delta_b }
}

pub fn metrizability_options(cfg: &ScenarioConfig) -> MetrizabilityOptions {
    let d = &cfg.decide;
    MetrizabilityOptions {
        tolerances: cfg.tolerances,
        kappa: d.kappa,
        cone: d.cone,
        margins: margins(cfg),
        constants: d.constants,
        free_function: d.free_function,
        bins: d.bins,
        integral_anchor: d.integral_anchor,
        domain: cfg.domain,
        seed: cfg.sampling.seed,
        soundness_samples: d.soundness_samples,
        berwald_points: d.berwald_points,
    }
}

/// The points constraint fits are evaluated at.
pub fn fit_points(cfg: &ScenarioConfig) -> Vec<Point> {
    points(&cfg.domain, cfg.sampling.count, &mut rng(cfg.sampling.seed))
}

fn base_report(cfg: &ScenarioConfig, command: Command) -> Result<Report> {
    let c = build_connection(cfg)?.coeffs;
    Ok(Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        command,
        seed: cfg.sampling.seed,
        scenario: cfg.clone(),
        subfamilies: classify_subfamily(&c)
            .into_iter()
            .map(|t| TagReport { tag: t, constraint: t.constraint().into() })
            .collect(),
        decide: None,
        verify: None,
        integrate: None,
        outcome: Outcome::Success,
        notes: Vec::new(),
    })
}

pub fn run_classify(cfg: &ScenarioConfig) -> Result<Report> {
    base_report(cfg, Command::Classify)
}

pub fn run_decide_full(cfg: &ScenarioConfig) -> Result<(Report, DecideOutcome<MetricSpec, OneFormSpec>)> {
    let conn = build_connection(cfg)?;
    let out = decide(&conn, &fit_points(cfg), &metrizability_options(cfg))?;
    let mut report = base_report(cfg, Command::Decide)?;
    report.outcome = if out.report.verdict.is_metrizable() { Outcome::Success } else { Outcome::Negative };
    report.decide = Some(out.report.clone());
    Ok((report, out))
}

pub fn run_decide(cfg: &ScenarioConfig) -> Result<Report> {
    run_decide_full(cfg).map(|r| r.0)
}

fn inline(cfg: &ScenarioConfig, spec: &InlineLagrangian) -> Lagrangian {
    match spec {
        InlineLagrangian::Quadratic => {
            ConstructedLagrangian::Quadratic(QuadraticLagrangian::new(cfg.metric.clone(), cfg.decide.cone))
        }
        InlineLagrangian::AlphaBeta { kappa, case } => ConstructedLagrangian::AlphaBeta(AlphaBetaMetric {
            metric: cfg.metric.clone(),
            oneform: cfg.oneform.clone(),
            kappa: *kappa,
            case: *case,
            cone: cfg.decide.cone,
            margins: margins(cfg),
        }),
    }
}

/// The Lagrangian to verify or integrate: inline if given, else the one
/// `decide` emitted, else its first rejected candidate.
fn target(
    cfg: &ScenarioConfig,
    spec: Option<&InlineLagrangian>,
    notes: &mut Vec<String>,
) -> Result<Option<(Lagrangian, String)>> {
    if let Some(s) = spec {
        return Ok(Some((inline(cfg, s), "inline".into())));
    }
    let (_, out) = run_decide_full(cfg)?;
    if let Some(l) = out.lagrangian {
        return Ok(Some((l, "decide".into())));
    }
    if let Some(l) = out.rejected.into_iter().next() {
        notes.push("decide emitted no Lagrangian; checking its rejected candidate".into());
        return Ok(Some((l, "decide-rejected".into())));
    }
    notes.push(format!("decide verdict {:?}: no Lagrangian to check", out.report.verdict));
    Ok(None)
}

pub fn run_verify(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = base_report(cfg, Command::Verify)?;
    let Some((l, source)) = target(cfg, cfg.verify.lagrangian.as_ref(), &mut report.notes)? else {
        report.outcome = Outcome::Negative;
        return Ok(report);
    };
    let mut conn = build_connection(cfg)?;
    conn.coeffs.c1 += cfg.verify.perturb_c1;
    let v = &cfg.verify;
    let opts = VerifyOptions {
        domain: cfg.domain,
        samples: v.samples,
        initial_conditions: v.initial_conditions,
        step: v.step,
        steps: v.steps,
        order_step: v.order_step,
        seed: cfg.sampling.seed,
        tolerances: v.tolerances,
    };
    let out = verify_bundle(&l, &conn, &opts)?;
    report.outcome = if out.report.passed { Outcome::Success } else { Outcome::Negative };
    report.verify = Some(VerifySection { lagrangian: l.descriptor(), source, c1: conn.coeffs.c1, result: out.report });
    Ok(report)
}

/// Integrates from the configured initial conditions and writes one CSV per
/// trajectory into `csv_dir` (config value, or the override) when set.
pub fn run_integrate(cfg: &ScenarioConfig, csv_dir: Option<&Path>) -> Result<Report> {
    let mut report = base_report(cfg, Command::Integrate)?;
    let ic = &cfg.integrate;
    let conn = build_connection(cfg)?;
    let need_l = ic.kind != IntegrateKind::Autoparallel;
    let l = if need_l { target(cfg, ic.lagrangian.as_ref(), &mut report.notes)?.map(|t| t.0) } else { None };
    let starts: Vec<(Point, TangentVector)> = if !ic.initial_conditions.is_empty() {
        ic.initial_conditions.iter().map(|c| (Point::new(c.x), TangentVector::new(c.v))).collect()
    } else if let Some(l) = &l {
        admissible_pairs(l, &cfg.domain, ic.count, &mut rng(cfg.sampling.seed))
    } else {
        let q = QuadraticLagrangian::new(cfg.metric.clone(), cfg.decide.cone);
        admissible_pairs(&q, &cfg.domain, ic.count, &mut rng(cfg.sampling.seed))
    };
    let dir: Option<PathBuf> = csv_dir.map(Path::to_path_buf).or_else(|| ic.csv_dir.as_ref().map(PathBuf::from));
    if let Some(d) = &dir {
        std::fs::create_dir_all(d).map_err(|e| Error::Io(format!("{}: {e}", d.display())))?;
    }
    let stem = if cfg.name.is_empty() { "trajectory".to_string() } else { cfg.name.clone() };
    let mut summaries = Vec::new();
    let mut failed = false;
    for (k, (x, v)) in starts.iter().enumerate() {
        let mut kinds = Vec::new();
        if ic.kind != IntegrateKind::Geodesic {
            kinds.push("autoparallel");
        }
        if need_l {
            kinds.push("geodesic");
        }
        for kind in kinds {
            let traj = match kind {
                "autoparallel" => integrate_autoparallel(&conn, x, v, ic.step, ic.steps, None),
                _ => match &l {
                    Some(l) => integrate_geodesic(l, x, v, ic.step, ic.steps),
                    None => Err(Error::NoUsableSamples("no Lagrangian for geodesics".into())),
                },
            };
            let mut s = TrajectorySummary {
                index: k,
                kind: kind.into(),
                x0: x.coords,
                v0: v.components,
                states: 0,
                final_s: 0.0,
                final_x: x.coords,
                final_v: v.components,
                truncated: None,
                csv: None,
                error: None,
            };
            match traj {
                Ok(t) => {
                    let e = t.last();
                    s.states = t.states.len();
                    s.final_s = e.s;
                    s.final_x = e.x;
                    s.final_v = e.v;
                    s.truncated = t.truncated.clone();
                    if let Some(d) = &dir {
                        let name = format!("{stem}-{k}-{kind}.csv");
                        let path = d.join(&name);
                        let f =
                            std::fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                        t.write_csv(std::io::BufWriter::new(f)).map_err(|e| Error::Io(e.to_string()))?;
                        s.csv = Some(name);
                    }
                }
                Err(e) => {
                    failed = true;
                    s.error = Some(e.to_string());
                }
            }
            summaries.push(s);
        }
    }
    let order = match starts.first() {
        Some((x, v)) => measure_order(&conn, x, v, cfg.verify.order_step, 1.0).ok(),
        None => None,
    };
    report.integrate = Some(IntegrateSection {
        step: ic.step,
        steps: ic.steps,
        lagrangian: l.as_ref().map(|l| l.descriptor()),
        trajectories: summaries,
        order,
    });
    report.outcome = if failed || (need_l && l.is_none()) { Outcome::Negative } else { Outcome::Success };
    Ok(report)
}
