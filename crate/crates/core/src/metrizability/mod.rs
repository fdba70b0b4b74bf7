//! Theorem-level decisions: fit the one-form constraints, build the
//! metrizing Lagrangian, and gate it on independent residuals.

mod construct;
mod fit;
mod residual;

pub use construct::{
    construct_theorem1, construct_theorem2, CaseConstants, ConstructedLagrangian, LagrangianDescriptor,
    LagrangianFamily,
};
pub use fit::{
    fit_theorem1_case1, fit_theorem1_case2, fit_theorem2, normalized_oneform, tau_formula_exponent, ConstraintFit,
    FitBranch, FitVerdict, NormalizedOneForm,
};
pub use residual::{alpha_beta_pde_residual, generalized_pde_residual, reduced_system_residual, PdeResidual};

use serde::{Deserialize, Serialize};

use crate::connection::{classify_subfamily, connection_coefficients, SubfamilyTag, VectorialConnection};
use crate::error::{Error, Result};
use crate::finsler::{
    berwald_quadraticity, horizontal_derivative, nondegeneracy_scan, Cone, FreeFunction, Margins, NondegeneracyScan,
    BERWALD_DIRECTIONS,
};
use crate::geometry::{MetricField, OneFormField, Point};
use crate::sampling::{admissible_pairs, points, rng, Domain};
use crate::verification::spray_vs_connection;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Per-sample constraint residual, relative to (1 + local scale).
    pub fit_residual: f64,
    /// Cross-sample spread of Theorem 1 constants.
    pub constancy: f64,
    /// Within-bin spread of Theorem 2 profiles.
    pub profile_spread: f64,
    pub tau_formula: f64,
    /// Soundness gate on max |δ_μL| / scale.
    pub delta_l: f64,
    pub berwald: f64,
    /// Fitted Berwald Γ vs the input connection, relative.
    pub berwald_gamma: f64,
    /// |b| below this counts as null.
    pub min_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fit_residual: 1e-7,
            constancy: 1e-6,
            profile_spread: 1e-5,
            tau_formula: 1e-6,
            delta_l: 1e-7,
            berwald: 1e-6,
            berwald_gamma: 1e-5,
            min_norm: 1e-8,
        }
    }
}

impl Tolerances {
    /// Set one field by name, for `--tolerance key=value`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "fit_residual" => &mut self.fit_residual,
            "constancy" => &mut self.constancy,
            "profile_spread" => &mut self.profile_spread,
            "tau_formula" => &mut self.tau_formula,
            "delta_l" => &mut self.delta_l,
            "berwald" => &mut self.berwald,
            "berwald_gamma" => &mut self.berwald_gamma,
            "min_norm" => &mut self.min_norm,
            _ => return Err(Error::Config(vec![format!("tolerances.{key}: unknown tolerance")])),
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetrizabilityOptions {
    pub tolerances: Tolerances,
    pub kappa: f64,
    pub cone: Cone,
    pub margins: Margins,
    pub constants: CaseConstants,
    pub free_function: Option<FreeFunction>,
    pub bins: usize,
    pub integral_anchor: Option<f64>,
    /// Fresh soundness samples are drawn here.
    pub domain: Domain,
    pub seed: u64,
    pub soundness_samples: usize,
    pub berwald_points: usize,
}

impl MetrizabilityOptions {
    pub fn new(domain: Domain, seed: u64) -> Self {
        Self {
            tolerances: Tolerances::default(),
            kappa: 1.0,
            cone: Cone::Any,
            margins: Margins::default(),
            constants: CaseConstants::default(),
            free_function: None,
            bins: 64,
            integral_anchor: None,
            domain,
            seed,
            soundness_samples: 1000,
            berwald_points: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    AlphaBetaMetrizable,
    GeneralizedMetrizable,
    NotMetrizableByTheseFamilies,
}

impl Verdict {
    pub fn is_metrizable(&self) -> bool {
        !matches!(self, Verdict::NotMetrizableByTheseFamilies)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchStatus {
    /// Fit satisfied and the candidate passed the soundness gate.
    Emitted,
    /// Fit satisfied but the candidate failed construction or the gate.
    Rejected,
    Violated,
    /// Not attempted because an earlier branch emitted a Lagrangian.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub status: BranchStatus,
    pub reason: Option<String>,
    pub fit: Option<ConstraintFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessStats {
    pub samples: usize,
    pub max_relative_delta_l: Option<f64>,
    pub nondegeneracy: NondegeneracyScan,
    pub berwald_max_residual: Option<f64>,
    pub berwald_gamma_deviation: Option<f64>,
    pub spray_vs_connection: Option<f64>,
    pub failures: Vec<String>,
}

impl SoundnessStats {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub branch: FitBranch,
    pub lagrangian: Option<LagrangianDescriptor>,
    pub reason: String,
    pub soundness: Option<SoundnessStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetrizabilityReport {
    pub subfamilies: Vec<SubfamilyTag>,
    /// The branch whose Lagrangian was emitted.
    pub branch: Option<FitBranch>,
    pub verdict: Verdict,
    pub alpha_beta: BranchReport,
    pub generalized: BranchReport,
    pub lagrangian: Option<LagrangianDescriptor>,
    pub soundness: Option<SoundnessStats>,
    pub rejected_candidates: Vec<RejectedCandidate>,
    pub notes: Vec<String>,
}

pub struct DecideOutcome<M, B> {
    pub report: MetrizabilityReport,
    pub lagrangian: Option<ConstructedLagrangian<M, B>>,
    /// Candidates that failed the gate, in branch order.
    pub rejected: Vec<ConstructedLagrangian<M, B>>,
}

/// Independent checks an emitted Lagrangian must pass: nondegeneracy and
/// δ_μL on fresh samples, and a Berwald fit that reproduces Γ.
pub fn soundness_gate<M: MetricField, B: OneFormField>(
    l: &ConstructedLagrangian<M, B>,
    conn: &VectorialConnection<M, B>,
    opts: &MetrizabilityOptions,
) -> SoundnessStats {
    let tol = &opts.tolerances;
    let mut r = rng(opts.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let pairs = admissible_pairs(l, &opts.domain, opts.soundness_samples, &mut r);
    let scan = nondegeneracy_scan(l, &pairs);
    let mut failures = Vec::new();
    if pairs.len() < opts.soundness_samples / 2 {
        failures.push(format!(
            "only {} of {} admissible samples found in the domain",
            pairs.len(),
            opts.soundness_samples
        ));
    }
    if !scan.is_nondegenerate() {
        failures.push(format!(
            "degenerate Hessian at {} of {} samples (min Hadamard ratio {:e})",
            scan.degenerate, scan.samples, scan.min_hadamard_ratio
        ));
    }
    let mut dl: Option<f64> = Some(0.0);
    for (x, v) in &pairs {
        match horizontal_derivative(l, conn, x, v) {
            Ok(h) => dl = dl.map(|m| m.max(h.relative())),
            Err(e) => {
                failures.push(format!("δL undefined: {e}"));
                dl = None;
                break;
            }
        }
    }
    if let Some(d) = dl {
        if !(d < tol.delta_l) {
            failures.push(format!("max |δL|/scale = {d:e} exceeds {:e}", tol.delta_l));
        }
    }

    let (mut bw, mut bg, mut sv) = (None, None, None);
    if scan.is_nondegenerate() {
        let base: Vec<Point> = points(&opts.domain, opts.berwald_points, &mut r);
        match berwald_quadraticity(l, &base, BERWALD_DIRECTIONS, &mut r) {
            Ok(fit) => {
                bw = Some(fit.max_residual);
                if !(fit.max_residual < tol.berwald) {
                    failures.push(format!("Berwald residual {:e} exceeds {:e}", fit.max_residual, tol.berwald));
                }
                let mut dev = 0.0f64;
                for p in &fit.points {
                    match connection_coefficients(conn, &p.x) {
                        Ok(g) => {
                            let mut num = 0.0f64;
                            let mut den = 0.0f64;
                            for (a, b) in g.iter().flatten().flatten().zip(p.gamma.iter().flatten().flatten()) {
                                num = num.max((a - b).abs());
                                den = den.max(a.abs());
                            }
                            dev = dev.max(num / (1.0 + den));
                        }
                        Err(e) => failures.push(e.to_string()),
                    }
                }
                bg = Some(dev);
                if !(dev < tol.berwald_gamma) {
                    failures.push(format!("Berwald Γ deviates from the connection by {dev:e}"));
                }
            }
            Err(e) => failures.push(format!("Berwald fit failed: {e}")),
        }
        let k = pairs.len().min(200);
        match spray_vs_connection(l, conn, &pairs[..k]) {
            Ok(s) => sv = Some(s.max_relative),
            Err(e) => failures.push(format!("spray undefined: {e}")),
        }
    } else {
        failures.push("spray checks skipped: no spray for a degenerate Lagrangian".into());
    }
    SoundnessStats {
        samples: pairs.len(),
        max_relative_delta_l: dl,
        nondegeneracy: scan,
        berwald_max_residual: bw,
        berwald_gamma_deviation: bg,
        spray_vs_connection: sv,
        failures,
    }
}

fn skipped() -> BranchReport {
    BranchReport { status: BranchStatus::Skipped, reason: None, fit: None }
}

/// Runs both theorem branches in order and emits the first Lagrangian that
/// passes the soundness gate.
pub fn decide<M: MetricField + Clone, B: OneFormField + Clone>(
    conn: &VectorialConnection<M, B>,
    samples: &[Point],
    opts: &MetrizabilityOptions,
) -> Result<DecideOutcome<M, B>> {
    let c = conn.coeffs;
    let tol = &opts.tolerances;
    let mut report = MetrizabilityReport {
        subfamilies: classify_subfamily(&c),
        branch: None,
        verdict: Verdict::NotMetrizableByTheseFamilies,
        alpha_beta: skipped(),
        generalized: skipped(),
        lagrangian: None,
        soundness: None,
        rejected_candidates: Vec::new(),
        notes: vec!["torse-forming condition read as ∇̊u = τ(a − ε u⊗u)".into()],
    };
    let mut rejected = Vec::new();

    // (α,β) branch
    let ab_fit =
        if c.c3 == 0.0 { fit_theorem1_case1(conn, samples, tol)? } else { fit_theorem1_case2(conn, samples, tol)? };
    let mut ab = BranchReport { status: BranchStatus::Violated, reason: ab_fit.reason.clone(), fit: None };
    if ab_fit.is_satisfied() {
        match construct_theorem1(conn, &ab_fit, opts.kappa, opts) {
            Ok(l) => {
                let l = ConstructedLagrangian::AlphaBeta(l);
                let stats = soundness_gate(&l, conn, opts);
                if stats.passed() {
                    ab.status = BranchStatus::Emitted;
                    report.branch = Some(ab_fit.branch);
                    report.verdict = Verdict::AlphaBetaMetrizable;
                    report.lagrangian = Some(l.descriptor());
                    report.soundness = Some(stats);
                    ab.fit = Some(ab_fit);
                    report.alpha_beta = ab;
                    return Ok(DecideOutcome { report, lagrangian: Some(l), rejected });
                }
                ab.status = BranchStatus::Rejected;
                ab.reason = Some(stats.failures.join("; "));
                report.rejected_candidates.push(RejectedCandidate {
                    branch: ab_fit.branch,
                    lagrangian: Some(l.descriptor()),
                    reason: "candidate failed the soundness gate".into(),
                    soundness: Some(stats),
                });
                rejected.push(l);
            }
            Err(Error::NoSubcase(why)) => {
                ab.reason = Some(format!("no subcase applies: {why}"));
            }
            Err(e) => {
                ab.status = BranchStatus::Rejected;
                ab.reason = Some(e.to_string());
                report.rejected_candidates.push(RejectedCandidate {
                    branch: ab_fit.branch,
                    lagrangian: None,
                    reason: e.to_string(),
                    soundness: None,
                });
            }
        }
    }
    ab.fit = Some(ab_fit);
    report.alpha_beta = ab;

    // generalized branch
    let gen_fit = match fit_theorem2(conn, samples, tol, opts.bins, opts.integral_anchor) {
        Ok(f) => Some(f),
        Err(Error::NullOneForm { at, norm }) => {
            report.generalized = BranchReport {
                status: BranchStatus::Violated,
                reason: Some(format!("null b: ⟨b,b⟩ = {norm:e} at {at:?} is outside the generalized theorem")),
                fit: None,
            };
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(gf) = gen_fit {
        let mut gb = BranchReport { status: BranchStatus::Violated, reason: gf.reason.clone(), fit: None };
        if gf.is_satisfied() {
            match construct_theorem2(conn, &gf, opts.kappa, opts) {
                Ok(l) => {
                    let l = ConstructedLagrangian::Generalized(l);
                    let stats = soundness_gate(&l, conn, opts);
                    if stats.passed() {
                        gb.status = BranchStatus::Emitted;
                        report.branch = Some(FitBranch::Theorem2);
                        report.verdict = Verdict::GeneralizedMetrizable;
                        report.lagrangian = Some(l.descriptor());
                        report.soundness = Some(stats);
                        gb.fit = Some(gf);
                        report.generalized = gb;
                        return Ok(DecideOutcome { report, lagrangian: Some(l), rejected });
                    }
                    gb.status = BranchStatus::Rejected;
                    gb.reason = Some(stats.failures.join("; "));
                    report.rejected_candidates.push(RejectedCandidate {
                        branch: FitBranch::Theorem2,
                        lagrangian: Some(l.descriptor()),
                        reason: "candidate failed the soundness gate".into(),
                        soundness: Some(stats),
                    });
                    rejected.push(l);
                }
                Err(e) => {
                    gb.status = BranchStatus::Rejected;
                    gb.reason = Some(e.to_string());
                    report.rejected_candidates.push(RejectedCandidate {
                        branch: FitBranch::Theorem2,
                        lagrangian: None,
                        reason: e.to_string(),
                        soundness: None,
                    });
                }
            }
        }
        gb.fit = Some(gf);
        report.generalized = gb;
    }
    Ok(DecideOutcome { report, lagrangian: None, rejected })
}
