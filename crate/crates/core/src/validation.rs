//! Named verification suites. Each suite evaluates one group of properties
//! on fixed grids and reports the worst observed error against its bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_ode::{
    exactness_defect, potential, raw_form, scaled_form, solve_for_xy, DEFECT_STEP,
};
use crate::geometry::{classify, intersections, is_parabola, ConicVerdict};
use crate::model::{
    ode_c_residual, ode_o_residual, ode_o_scale, orthogonal_foot, LineFamily, Point, Slope,
    TrajectoryCurve,
};
use crate::plot::{render_figure, PlotSpec};
use crate::tol::central_diff;
use crate::tracer::{
    sample_residual, trace_classic, trace_orthogonal, ClassicKind, TraceConfig, TraceResult,
};

pub const SUITES: [&str; 10] = [
    "exactness",
    "potential",
    "ode",
    "orthogonality",
    "intersections",
    "conic",
    "cusps",
    "tracer",
    "classic",
    "figure",
];

/// Curve constants used by the grid-based suites.
pub const C_GRID: [f64; 7] = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];
/// Finite-difference step for derivative checks.
pub const FD_STEP: f64 = 1e-6;
/// Seed for the random `(m, C)` draws.
pub const SEED: u64 = 0x5eed_0fe7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("unknown suite `{0}`; expected one of {SUITES:?} or `all`")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    /// Bound it must not exceed (or, for `at_least` checks, must reach).
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold,
            pass: observed <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold,
            pass: observed >= threshold,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            observed: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_suite(name: &str) -> Result<Vec<SuiteReport>, ValidationError> {
    let one = |r: SuiteReport| Ok(vec![r]);
    match name {
        "all" => Ok(SUITES
            .iter()
            .flat_map(|s| run_suite(s).expect("known suite"))
            .collect()),
        "exactness" => one(exactness_suite()),
        "potential" => one(potential_suite()),
        "ode" => one(ode_suite()),
        "orthogonality" => one(orthogonality_suite()),
        "intersections" => one(intersections_suite()),
        "conic" => one(conic_suite()),
        "cusps" => one(cusp_suite()),
        "tracer" => one(tracer_suite()),
        "classic" => one(classic_suite()),
        "figure" => one(figure_suite()),
        other => Err(ValidationError::UnknownSuite(other.to_string())),
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if n == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    })
}

/// `p` values in `+-[0.1, 10]`, `n` per sign.
pub fn p_grid(n: usize) -> Vec<f64> {
    linspace(0.1, 10.0, n).flat_map(|p| [-p, p]).collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter()
        .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Raw-form defect against `2p^2 + 1`, scaled-form defect, and the
/// gradient of the potential against the scaled form.
pub fn exactness_suite() -> SuiteReport {
    let (raw, scaled) = (raw_form(), scaled_form());
    let ys: Vec<f64> = linspace(-10.0, 10.0, 21).collect();
    let ps = p_grid(25);
    let mut raw_err: f64 = 0.0;
    let mut scaled_err: f64 = 0.0;
    let mut grad_err: f64 = 0.0;
    for &y in &ys {
        for &p in &ps {
            let d = exactness_defect(&raw, y, p, DEFECT_STEP).unwrap_or(f64::NAN);
            raw_err = raw_err.max((d - (2.0 * p * p + 1.0)).abs());
            let d = exactness_defect(&scaled, y, p, DEFECT_STEP).unwrap_or(f64::NAN);
            scaled_err = scaled_err.max(d.abs());

            let fy = central_diff(|y| potential(y, p).map_or(f64::NAN, |v| v.0), y, FD_STEP);
            let fp = central_diff(|p| potential(y, p).map_or(f64::NAN, |v| v.0), p, FD_STEP);
            let m = scaled.m(y, p).unwrap_or(f64::NAN);
            let n = scaled.n(y, p).unwrap_or(f64::NAN);
            grad_err = grad_err.max((fy - m).abs()).max((fp - n).abs());
        }
    }
    SuiteReport {
        suite: "exactness".into(),
        checks: vec![
            Check::at_most("raw defect = 2p^2+1", raw_err, 1e-8),
            Check::at_most("scaled defect", scaled_err, 1e-8),
            Check::at_most("grad F = (M~, N~)", grad_err, 1e-6),
        ],
    }
}

pub fn potential_suite() -> SuiteReport {
    let cs: Vec<f64> = (-4..=4).map(f64::from).collect();
    let ps = p_grid(50);
    let mut level_err: f64 = 0.0;
    let mut param_err: f64 = 0.0;
    let mut sign_err: f64 = 0.0;
    for &c in &cs {
        let curve = TrajectoryCurve::new(c).expect("finite C");
        for &p in &ps {
            let pt = solve_for_xy(p, c).expect("p != 0");
            let f = potential(pt.y, p).expect("p != 0").0;
            level_err = level_err.max((f - c).abs());
            let t = 1.0 / p;
            let on = curve.point(t).expect("finite t");
            if p > 0.0 {
                param_err = param_err.max(pt.dist(on));
            } else {
                let f = potential(on.y, p).expect("p != 0").0;
                sign_err = sign_err.max((f + c).abs());
            }
        }
    }
    SuiteReport {
        suite: "potential".into(),
        checks: vec![
            Check::at_most("F(solve_for_xy(p, C)) = C", level_err, 1e-9),
            Check::at_most("solve_for_xy = curve_point (p > 0)", param_err, 1e-12),
            Check::at_most("F = -C on t < 0", sign_err, 1e-9),
        ],
    }
}

/// Grid of `t` avoiding `|t| < 1e-3`.
pub fn t_grid() -> Vec<f64> {
    linspace(-5.0, 5.0, 401)
        .filter(|t| t.abs() >= 1e-3)
        .collect()
}

pub fn ode_suite() -> SuiteReport {
    let fam = LineFamily::cubic();
    let mut line_err: f64 = 0.0;
    for m in linspace(-3.0, 3.0, 121) {
        let line = fam.line_at(m).expect("finite m");
        for x in linspace(-10.0, 10.0, 81) {
            let y = line.y_at(x);
            let scale = y.abs().max((m * x).abs()).max(m.powi(3).abs()).max(1.0);
            line_err = line_err.max(ode_c_residual(x, y, m).abs() / scale);
        }
    }
    let mut ode_err: f64 = 0.0;
    let mut slope_err: f64 = 0.0;
    let mut fd_slope_err: f64 = 0.0;
    let mut mirror_ok = true;
    for &c in &C_GRID {
        let curve = TrajectoryCurve::new(c).expect("finite C");
        for t in t_grid() {
            let pt = curve.point(t).expect("finite t");
            let p = 1.0 / t;
            ode_err = ode_err.max(ode_o_residual(pt.x, pt.y, p).abs() / ode_o_scale(pt.x, pt.y, p));
            if let Ok(Slope::Finite(s)) = curve.slope(t) {
                slope_err = slope_err.max((s - 1.0 / t).abs());
            }
            // The chord error grows like h^2 / g next to a cusp.
            if curve.speed_factor(t).abs() > 1e-2 {
                let a = curve.point(t + FD_STEP).expect("finite");
                let b = curve.point(t - FD_STEP).expect("finite");
                let fd = (a.y - b.y) / (a.x - b.x);
                fd_slope_err = fd_slope_err.max((fd - 1.0 / t).abs() / (1.0 / t).abs().max(1.0));
            }
            let q = curve.point(-t).expect("finite t");
            mirror_ok &= q.x == pt.x && q.y == -pt.y;
        }
    }
    SuiteReport {
        suite: "ode".into(),
        checks: vec![
            Check::at_most("line residual (relative)", line_err, 1e-12),
            Check::at_most("on-curve slope equation (relative)", ode_err, 1e-9),
            Check::at_most("curve slope = 1/t", slope_err, 1e-9),
            Check::at_most(
                "finite-difference slope = 1/t (relative)",
                fd_slope_err,
                1e-6,
            ),
            Check::holds("mirror symmetry about the x-axis", mirror_ok),
        ],
    }
}

/// Random `(m, C)` pairs with `m` in `[-3, 3]`, `C` in `[-4, 4]`.
pub fn random_pairs(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.gen_range(-3.0..=3.0), rng.gen_range(-4.0..=4.0)))
        .collect()
}

pub fn orthogonality_suite() -> SuiteReport {
    let fam = LineFamily::cubic();
    let mut incidence: f64 = 0.0;
    let mut product: f64 = 0.0;
    let mut unique_ok = true;
    let mut used = 0usize;
    for (m, c) in random_pairs(1000, SEED) {
        let curve = TrajectoryCurve::new(c).expect("finite C");
        let Ok(foot) = orthogonal_foot(&fam, m, curve) else {
            continue;
        };
        used += 1;
        let line = fam.line_at(m).expect("finite m");
        incidence = incidence.max(line.vertical_offset(foot.point).abs());
        if m != 0.0 {
            if let Ok(Slope::Finite(s)) = curve.slope(foot.t) {
                product = product.max((m * s + 1.0).abs());
            }
        }
        let recs = intersections(m, curve, -10.0, 10.0).unwrap_or_default();
        let orth: Vec<_> = recs.iter().filter(|r| r.orthogonal).collect();
        unique_ok &= orth.len() == 1 && (orth[0].t + m).abs() <= 1e-8;
    }
    SuiteReport {
        suite: "orthogonality".into(),
        checks: vec![
            Check::at_least("non-degenerate random pairs", used as f64, 900.0),
            Check::at_most("foot incidence", incidence, 1e-9),
            Check::at_most("|m * slope + 1| at foot", product, 1e-9),
            Check::holds("exactly one orthogonal crossing at t = -m", unique_ok),
        ],
    }
}

pub fn intersections_suite() -> SuiteReport {
    let curve = TrajectoryCurve::new(0.0).expect("finite C");
    let recs = intersections(1.0, curve, -5.0, 5.0).unwrap_or_default();
    let mut checks = vec![Check::holds(
        "two crossings for m = 1, C = 0",
        recs.len() == 2,
    )];
    if recs.len() == 2 {
        checks.push(Check::at_most(
            "orthogonal crossing at t = -1",
            (recs[0].t + 1.0).abs(),
            1e-8,
        ));
        checks.push(Check::holds(
            "t = -1 flagged orthogonal",
            recs[0].orthogonal,
        ));
        checks.push(Check::at_most(
            "second crossing at t = 3",
            (recs[1].t - 3.0).abs(),
            1e-8,
        ));
        checks.push(Check::at_most(
            "second crossing at (9, 6)",
            recs[1].point.dist(Point::new(9.0, 6.0)),
            1e-8,
        ));
        let sp = match recs[1].slope_product {
            crate::geometry::SlopeProduct::Finite(v) => (v - 1.0 / 3.0).abs(),
            _ => f64::INFINITY,
        };
        checks.push(Check::at_most("slope product 1/3", sp, 1e-8));
        checks.push(Check::holds("t = 3 not orthogonal", !recs[1].orthogonal));
    }
    let mut unique = true;
    for m in [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0] {
        for c in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            let curve = TrajectoryCurve::new(c).expect("finite C");
            if orthogonal_foot(&LineFamily::cubic(), m, curve).is_err() {
                continue;
            }
            let recs = intersections(m, curve, -10.0, 10.0).unwrap_or_default();
            let orth: Vec<_> = recs.iter().filter(|r| r.orthogonal).collect();
            unique &= orth.len() == 1 && (orth[0].t + m).abs() <= 1e-8;
        }
    }
    checks.push(Check::holds(
        "unique orthogonal crossing on the fixed grid",
        unique,
    ));
    SuiteReport {
        suite: "intersections".into(),
        checks,
    }
}

pub fn conic_suite() -> SuiteReport {
    let mut checks = Vec::new();
    for &c in &C_GRID {
        let curve = TrajectoryCurve::new(c).expect("finite C");
        let parab = is_parabola(curve);
        checks.push(Check::holds(
            format!("is_parabola(C = {c}) == (C == 0)"),
            parab == (c == 0.0),
        ));
        if let Ok(cl) = classify(curve) {
            if c == 0.0 {
                checks.push(Check::at_most("C = 0 residual", cl.fit.residual_rms, 1e-8));
            } else {
                checks.push(Check::at_least(
                    format!("C = {c} residual"),
                    cl.fit.residual_rms,
                    1e-3,
                ));
                checks.push(Check::holds(
                    format!("C = {c} verdict not-conic"),
                    cl.verdict == ConicVerdict::NotConic,
                ));
            }
        } else {
            checks.push(Check::holds(format!("C = {c} fit succeeded"), false));
        }
    }
    SuiteReport {
        suite: "conic".into(),
        checks,
    }
}

pub fn cusp_suite() -> SuiteReport {
    let count = |c: f64| {
        TrajectoryCurve::new(c)
            .expect("finite")
            .cusp_parameters()
            .len()
    };
    let mut checks = vec![
        Check::holds(
            "no cusps for C = 0, 1, -1",
            count(0.0) + count(1.0) + count(-1.0) == 0,
        ),
        Check::holds("one cusp for C = -2", count(-2.0) == 1),
    ];
    let cusps = TrajectoryCurve::new(-4.0)
        .expect("finite")
        .cusp_parameters();
    let want = (4f64.cbrt() - 1.0).sqrt();
    let err = if cusps.len() == 2 {
        (cusps[0] + want).abs().max((cusps[1] - want).abs())
    } else {
        f64::INFINITY
    };
    checks.push(Check::at_most("C = -4 cusps at +-0.766421", err, 1e-6));

    let mut sign_change = true;
    for c in [-2.5, -4.0, -8.0] {
        let curve = TrajectoryCurve::new(c).expect("finite");
        for t in curve.cusp_parameters() {
            let (ax, ay) = curve.velocity(t - 1e-4).expect("finite");
            let (bx, by) = curve.velocity(t + 1e-4).expect("finite");
            sign_change &= ax * bx < 0.0 && ay * by < 0.0;
        }
    }
    checks.push(Check::holds("velocity reverses across cusps", sign_change));
    let mut forward = true;
    for c in [-1.99, -1.0, 0.0, 3.0] {
        let curve = TrajectoryCurve::new(c).expect("finite");
        forward &= t_grid()
            .into_iter()
            .all(|t| curve.velocity(t).expect("finite").1 > 0.0);
    }
    checks.push(Check::holds("dy/dt > 0 for C > -2", forward));
    SuiteReport {
        suite: "cusps".into(),
        checks,
    }
}

/// Largest distance from any of `points` to `curve`, searching `t` in
/// `[-t_max, t_max]`.
///
/// Each point starts from the previous point's parameter (traces are ordered)
/// and falls back to a full scan when the local search misses.
pub fn closed_form_deviation(curve: TrajectoryCurve, points: &[Point], t_max: f64) -> f64 {
    let dist2 = |t: f64, p: Point| {
        let q = curve.point(t).expect("finite t");
        (q.x - p.x).powi(2) + (q.y - p.y).powi(2)
    };
    let scan = |p: Point, lo: f64, hi: f64, n: usize| {
        let mut best = (lo, f64::INFINITY);
        for t in linspace(lo, hi, n) {
            let d = dist2(t, p);
            if d < best.1 {
                best = (t, d);
            }
        }
        (best.0, (hi - lo) / (n - 1) as f64)
    };
    let golden = |p: Point, mut a: f64, mut b: f64| {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        for _ in 0..100 {
            if dist2(c, p) < dist2(d, p) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
            if b - a < 1e-13 {
                break;
            }
        }
        let t = 0.5 * (a + b);
        (t, dist2(t, p).sqrt())
    };

    let mut worst: f64 = 0.0;
    let mut last_t: Option<f64> = None;
    for &p in points {
        let mut found = None;
        if let Some(t0) = last_t {
            let (t, h) = scan(p, t0 - 0.05, t0 + 0.05, 201);
            let (t, d) = golden(p, t - h, t + h);
            if d < 1e-4 {
                found = Some((t, d));
            }
        }
        let (t, d) = found.unwrap_or_else(|| {
            let (t, h) = scan(p, -t_max, t_max, 200_001);
            golden(p, t - h, t + h)
        });
        last_t = Some(t);
        worst = worst.max(d);
    }
    worst
}

/// Two-sided trace of curve `C` from its point at `t0`.
pub fn trace_curve(c: f64, t0: f64, tol: f64, max_arc: f64) -> TraceResult {
    let curve = TrajectoryCurve::new(c).expect("finite C");
    let start = curve.point(t0).expect("finite t");
    let cfg = TraceConfig {
        tol,
        max_arc,
        ..TraceConfig::new(start).with_hint(1.0 / t0)
    };
    trace_orthogonal(&cfg).expect("start lies on a regular branch")
}

pub fn tracer_suite() -> SuiteReport {
    let mut checks = Vec::new();
    for c in [-1.0, 0.0, 1.0, 3.0] {
        let tol = 1e-8;
        let res = trace_curve(c, 1.0, tol, 30.0);
        let pts: Vec<Point> = res.samples.iter().map(|s| s.point).collect();
        let curve = TrajectoryCurve::new(c).expect("finite C");
        checks.push(Check::at_most(
            format!("C = {c} closed-form deviation"),
            closed_form_deviation(curve, &pts, 15.0),
            1e-5,
        ));
        checks.push(Check::at_most(
            format!("C = {c} potential drift"),
            res.potential_drift,
            10.0 * tol,
        ));
        checks.push(Check::at_most(
            format!("C = {c} slope-equation residual"),
            max_of(res.samples.iter().map(sample_residual)),
            1e-6,
        ));
        checks.push(Check::at_most(
            format!("C = {c} level recovered"),
            (res.initial_level - c).abs(),
            1e-9,
        ));
    }
    SuiteReport {
        suite: "tracer".into(),
        checks,
    }
}

pub fn classic_suite() -> SuiteReport {
    let fixtures = [
        (ClassicKind::HyperbolaPair, Point::new(1.0, 1.0), 1.0),
        (ClassicKind::Monopole, Point::new(3.0, 4.0), 25.0),
        (ClassicKind::ShiftedMonopole, Point::new(0.0, 1.0), 2.0),
    ];
    let checks = fixtures
        .into_iter()
        .map(|(kind, start, want)| {
            let cfg = TraceConfig::new(start);
            let drift = match trace_classic(kind, start, &cfg) {
                Ok(res) => {
                    let level = max_of(
                        res.samples
                            .iter()
                            .map(|s| (kind.conserved(s.point) - want).abs()),
                    );
                    level.max(res.potential_drift)
                }
                Err(_) => f64::INFINITY,
            };
            Check::at_most(
                format!("{} conserved quantity drift", kind.name()),
                drift,
                1e-6,
            )
        })
        .collect();
    SuiteReport {
        suite: "classic".into(),
        checks,
    }
}

pub fn figure_suite() -> SuiteReport {
    let mut checks = Vec::new();
    let mut curves = 0;
    let mut dashed = Vec::new();
    for preset in ["fig1a", "fig1b"] {
        let spec = PlotSpec::preset(preset).expect("known preset");
        let (a, b) = (render_figure(&spec), render_figure(&spec));
        checks.push(Check::holds(
            format!("{preset} deterministic"),
            matches!((&a, &b), (Ok(a), Ok(b)) if a == b),
        ));
        let Ok(svg) = a else { continue };
        checks.push(Check::holds(
            format!("{preset} has 3 family lines"),
            svg.matches("class=\"family-line\"").count() == 3,
        ));
        for line in svg.lines().filter(|l| l.contains("class=\"curve\"")) {
            curves += 1;
            if line.contains("stroke-dasharray") {
                dashed.push(
                    line.split("data-c=\"")
                        .nth(1)
                        .and_then(|r| r.split('"').next())
                        .unwrap_or("")
                        .to_string(),
                );
            }
        }
    }
    checks.push(Check::holds("8 curve paths across presets", curves == 8));
    checks.push(Check::holds(
        "only the C = 0 curve is dashed",
        !dashed.is_empty() && dashed.iter().all(|c| c == "0"),
    ));
    SuiteReport {
        suite: "figure".into(),
        checks,
    }
}
