//! RK4 integration of autoparallels and geodesics, and the checks built on it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::connection::{autoparallel_rhs, gamma_vv, AffineConnection};
use crate::error::{Error, Result};
use crate::finsler::{horizontal_derivative, spray_coefficients, FinslerLagrangian};
use crate::geometry::{Point, TangentVector};
use crate::linalg::{norm, Vec4};
use crate::sampling::{admissible_pairs, rng, Domain};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_STEPS: usize = 1000;
const BLOW_UP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub s: f64,
    pub x: Vec4,
    pub v: Vec4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub step: f64,
    pub steps_requested: usize,
    pub method: String,
    /// Set when integration stopped early at the edge of the admissible cone.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has the initial state")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,x0,x1,x2,x3,v0,v1,v2,v3")?;
        for st in &self.states {
            let cols: Vec<String> = std::iter::once(st.s).chain(st.x).chain(st.v).map(|c| format!("{c}")).collect();
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Why a right-hand side could not be evaluated.
enum Stop {
    Truncate(String),
    Fail(Error),
}

fn add(a: &Vec4, b: &Vec4, h: f64) -> Vec4 {
    std::array::from_fn(|i| a[i] + h * b[i])
}

fn rk4<F>(rhs: F, x0: Vec4, v0: Vec4, step: f64, n: usize, domain: Option<&Domain>) -> Result<Trajectory>
where
    F: Fn(&Vec4, &Vec4) -> std::result::Result<Vec4, Stop>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(vec![format!("step: must be positive, got {step}")]));
    }
    let mut states = Vec::with_capacity(n + 1);
    states.push(State { s: 0.0, x: x0, v: v0 });
    let mut truncated = None;
    let (mut x, mut v) = (x0, v0);
    for k in 0..n {
        let stage = || -> std::result::Result<(Vec4, Vec4), Stop> {
            let a1 = rhs(&x, &v)?;
            let (x2, v2) = (add(&x, &v, 0.5 * step), add(&v, &a1, 0.5 * step));
            let a2 = rhs(&x2, &v2)?;
            let (x3, v3) = (add(&x, &v2, 0.5 * step), add(&v, &a2, 0.5 * step));
            let a3 = rhs(&x3, &v3)?;
            let (x4, v4) = (add(&x, &v3, step), add(&v, &a3, step));
            let a4 = rhs(&x4, &v4)?;
            let nx = std::array::from_fn(|i| x[i] + step / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]));
            let nv = std::array::from_fn(|i| v[i] + step / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]));
            Ok((nx, nv))
        };
        match stage() {
            Ok((nx, nv)) => {
                if nx.iter().chain(nv.iter()).any(|c| !c.is_finite() || c.abs() > BLOW_UP) {
                    return Err(Error::BlowUp { step: k + 1 });
                }
                if let Some(d) = domain {
                    if !d.contains(&Point::new(nx)) {
                        return Err(Error::LeftDomain { step: k + 1, x: nx });
                    }
                }
                x = nx;
                v = nv;
                states.push(State { s: (k + 1) as f64 * step, x, v });
            }
            Err(Stop::Truncate(why)) => {
                truncated = Some(format!("stopped after {k} steps: {why}"));
                break;
            }
            Err(Stop::Fail(e)) => return Err(e),
        }
    }
    Ok(Trajectory { states, step, steps_requested: n, method: "rk4".into(), truncated })
}

/// ẍ^μ + Γ^μ_{νρ} ẋ^ν ẋ^ρ = 0
pub fn integrate_autoparallel<C: AffineConnection>(
    conn: &C,
    x0: &Point,
    v0: &TangentVector,
    step: f64,
    n: usize,
    domain: Option<&Domain>,
) -> Result<Trajectory> {
    let rhs = |x: &Vec4, v: &Vec4| {
        autoparallel_rhs(conn, &Point::new(*x), &TangentVector::new(*v)).map(|a| a.components).map_err(Stop::Fail)
    };
    rk4(rhs, x0.coords, v0.components, step, n, domain)
}

/// ẍ^μ + 2G^μ(x, ẋ) = 0, stopping at the edge of the admissible cone.
pub fn integrate_geodesic<L: FinslerLagrangian>(
    l: &L,
    x0: &Point,
    v0: &TangentVector,
    step: f64,
    n: usize,
) -> Result<Trajectory> {
    if !l.admissible(x0, v0) {
        return Err(Error::Inadmissible { x: x0.coords, v: v0.components });
    }
    let rhs = |x: &Vec4, v: &Vec4| {
        let (p, t) = (Point::new(*x), TangentVector::new(*v));
        if !l.admissible(&p, &t) {
            return Err(Stop::Truncate(format!("left the admissible cone at x = {x:?}")));
        }
        spray_coefficients(l, &p, &t).map(|g| g.map(|c| -2.0 * c)).map_err(Stop::Fail)
    };
    rk4(rhs, x0.coords, v0.components, step, n, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub max_coordinate_deviation: f64,
    pub max_velocity_deviation: f64,
    pub span: f64,
    pub compared_states: usize,
}

/// State-by-state comparison over the common prefix of two trajectories.
pub fn compare(a: &Trajectory, b: &Trajectory) -> ComparisonResult {
    let n = a.states.len().min(b.states.len());
    let mut out = ComparisonResult {
        max_coordinate_deviation: 0.0,
        max_velocity_deviation: 0.0,
        span: a.states[n - 1].s,
        compared_states: n,
    };
    for (p, q) in a.states.iter().zip(&b.states).take(n) {
        for i in 0..4 {
            out.max_coordinate_deviation = out.max_coordinate_deviation.max((p.x[i] - q.x[i]).abs());
            out.max_velocity_deviation = out.max_velocity_deviation.max((p.v[i] - q.v[i]).abs());
        }
    }
    out
}

/// Central-difference check of v̇ = rhs(x, v) at interior states.
pub fn ode_residual<F: Fn(&Vec4, &Vec4) -> Result<Vec4>>(t: &Trajectory, rhs: F) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in t.states.windows(3) {
        let acc = rhs(&w[1].x, &w[1].v)?;
        let h = w[2].s - w[0].s;
        for i in 0..4 {
            let fd = (w[2].v[i] - w[0].v[i]) / h;
            worst = worst.max((fd - acc[i]).abs() / (1.0 + acc[i].abs()));
        }
    }
    Ok(worst)
}

/// max_k |L(x_k, v_k) − L(x_0, v_0)| / |L(x_0, v_0)|
pub fn conservation<L: FinslerLagrangian>(l: &L, t: &Trajectory) -> f64 {
    let l0 = l.eval(&t.states[0].x, &t.states[0].v);
    t.states.iter().map(|st| (l.eval(&st.x, &st.v) - l0).abs() / l0.abs().max(f64::MIN_POSITIVE)).fold(0.0f64, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub steps: [f64; 3],
    pub span: f64,
    /// |y_h − y_{h/2}| and |y_{h/2} − y_{h/4}| at the end point.
    pub differences: [f64; 2],
    pub order: f64,
}

/// Convergence order from three step sizes h, h/2, h/4 over a fixed span.
pub fn measure_order<C: AffineConnection>(
    conn: &C,
    x0: &Point,
    v0: &TangentVector,
    h: f64,
    span: f64,
) -> Result<OrderEstimate> {
    let steps = [h, h / 2.0, h / 4.0];
    let mut ends = Vec::with_capacity(3);
    for s in steps {
        let n = (span / s).round() as usize;
        let t = integrate_autoparallel(conn, x0, v0, s, n, None)?;
        let e = t.last();
        ends.push([e.x, e.v].concat());
    }
    let diff = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let d1 = diff(&ends[0], &ends[1]);
    let d2 = diff(&ends[1], &ends[2]);
    Ok(OrderEstimate { steps, span, differences: [d1, d2], order: (d1 / d2).log2() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprayComparison {
    pub max_relative: f64,
    pub samples: usize,
}

/// max over samples and μ of |2G^μ − Γ^μ_{νρ} v^ν v^ρ| / (1 + ‖Γvv‖)
pub fn spray_vs_connection<L: FinslerLagrangian, C: AffineConnection>(
    l: &L,
    conn: &C,
    samples: &[(Point, TangentVector)],
) -> Result<SprayComparison> {
    let mut worst = 0.0f64;
    for (x, v) in samples {
        let g = spray_coefficients(l, x, v)?;
        let gvv = gamma_vv(&conn.coefficients(x)?, &v.components);
        let scale = 1.0 + norm(&gvv);
        for m in 0..4 {
            worst = worst.max((2.0 * g[m] - gvv[m]).abs() / scale);
        }
    }
    Ok(SprayComparison { max_relative: worst, samples: samples.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    pub delta_l: f64,
    pub spray: f64,
    pub deviation: f64,
    pub conservation: f64,
    pub min_order: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self { delta_l: 1e-7, spray: 1e-7, deviation: 1e-6, conservation: 1e-8, min_order: 3.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub domain: Domain,
    pub samples: usize,
    pub initial_conditions: usize,
    pub step: f64,
    pub steps: usize,
    /// Base step for the order measurement (h, h/2, h/4 over a unit span).
    pub order_step: f64,
    pub seed: u64,
    pub tolerances: VerifyTolerances,
}

impl VerifyOptions {
    pub fn new(domain: Domain, seed: u64) -> Self {
        Self {
            domain,
            samples: 1000,
            initial_conditions: 10,
            step: DEFAULT_STEP,
            steps: DEFAULT_STEPS,
            order_step: 0.1,
            seed,
            tolerances: VerifyTolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    /// "max" checks pass when value < tolerance, "min" checks when value ≥ tolerance.
    pub kind: String,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn below(name: &str, value: Result<f64>, tolerance: f64) -> Self {
        match value {
            Ok(v) => Check {
                name: name.into(),
                value: Some(v),
                tolerance,
                kind: "max".into(),
                passed: v < tolerance,
                note: None,
            },
            Err(e) => Check {
                name: name.into(),
                value: None,
                tolerance,
                kind: "max".into(),
                passed: false,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub comparison: Option<ComparisonResult>,
    pub order: Option<OrderEstimate>,
    pub truncated_geodesics: usize,
    pub passed: bool,
}

pub struct VerifyOutput {
    pub report: VerifyReport,
    /// (autoparallel, geodesic) per initial condition, when both integrated.
    pub trajectories: Vec<(Trajectory, Trajectory)>,
}

fn worst<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    let mut m = 0.0f64;
    for r in it {
        m = m.max(r?);
    }
    Ok(m)
}

/// δ_μL sampling, spray-vs-connection, and paired integration from shared
/// initial conditions.
pub fn verify_bundle<L: FinslerLagrangian, C: AffineConnection>(
    l: &L,
    conn: &C,
    opts: &VerifyOptions,
) -> Result<VerifyOutput> {
    if opts.samples == 0 || opts.initial_conditions == 0 {
        return Err(Error::Config(vec!["verify: samples and initial_conditions must be positive".into()]));
    }
    if opts.steps == 0 {
        return Err(Error::Config(vec!["verify: steps must be positive".into()]));
    }
    let tol = &opts.tolerances;
    let mut r = rng(opts.seed);
    let pairs = admissible_pairs(l, &opts.domain, opts.samples, &mut r);
    if pairs.is_empty() {
        return Err(Error::NoUsableSamples("no admissible (x, v) in the domain".into()));
    }
    let mut checks = Vec::new();
    let dl = worst(pairs.iter().map(|(x, v)| horizontal_derivative(l, conn, x, v).map(|h| h.relative())));
    checks.push(Check::below("delta_l_relative", dl, tol.delta_l));
    let sv = spray_vs_connection(l, conn, &pairs).map(|s| s.max_relative);
    checks.push(Check::below("spray_vs_connection", sv, tol.spray));

    let mut trajectories = Vec::new();
    let mut truncated = 0;
    let mut cmp: Option<ComparisonResult> = None;
    let mut geo_err: Option<Error> = None;
    let mut cons = 0.0f64;
    for (x, v) in pairs.iter().take(opts.initial_conditions) {
        let auto = integrate_autoparallel(conn, x, v, opts.step, opts.steps, None);
        let geo = integrate_geodesic(l, x, v, opts.step, opts.steps);
        match (auto, geo) {
            (Ok(a), Ok(g)) => {
                if g.truncated.is_some() {
                    truncated += 1;
                }
                let c = compare(&a, &g);
                cons = cons.max(conservation(l, &g));
                cmp = Some(match cmp {
                    None => c,
                    Some(p) => ComparisonResult {
                        max_coordinate_deviation: p.max_coordinate_deviation.max(c.max_coordinate_deviation),
                        max_velocity_deviation: p.max_velocity_deviation.max(c.max_velocity_deviation),
                        span: p.span.min(c.span),
                        compared_states: p.compared_states.min(c.compared_states),
                    },
                });
                trajectories.push((a, g));
            }
            (Err(e), _) | (_, Err(e)) => {
                geo_err.get_or_insert(e);
            }
        }
    }
    let dev = match (&geo_err, &cmp) {
        (Some(e), _) => Err(e.clone()),
        (None, Some(c)) => Ok(c.max_coordinate_deviation),
        (None, None) => Err(Error::NoUsableSamples("no initial conditions".into())),
    };
    checks.push(Check::below("autoparallel_geodesic_deviation", dev, tol.deviation));
    let cons_r = match &geo_err {
        Some(e) => Err(e.clone()),
        None => Ok(cons),
    };
    checks.push(Check::below("l_conservation", cons_r, tol.conservation));

    let (x, v) = &pairs[0];
    let order = measure_order(conn, x, v, opts.order_step, 1.0);
    checks.push(match &order {
        Ok(o) => Check {
            name: "rk4_order".into(),
            value: Some(o.order),
            tolerance: tol.min_order,
            kind: "min".into(),
            passed: o.order >= tol.min_order,
            note: None,
        },
        Err(e) => Check {
            name: "rk4_order".into(),
            value: None,
            tolerance: tol.min_order,
            kind: "min".into(),
            passed: false,
            note: Some(e.to_string()),
        },
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyOutput {
        report: VerifyReport { checks, comparison: cmp, order: order.ok(), truncated_geodesics: truncated, passed },
        trajectories,
    })
}
