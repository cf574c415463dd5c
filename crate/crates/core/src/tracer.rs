//! Numerical tracing of orthogonal trajectories straight from the implicit
//! slope equation `y p^3 = p^2 (2 - x) + 1`, plus the textbook pairs
//! (hyperbolas, circles about the origin and about `(-1, 0)`).
//!
//! Curves are integrated in arc length with an embedded Dormand-Prince 5(4)
//! pair. At every stage the admissible tangent lines at the stage point are
//! enumerated and the one closest in angle to the direction at the start of
//! the step is followed. Working with unit tangents instead of `dy/dx` lets
//! the integrator pass through vertical tangents, where `p` changes sign
//! through infinity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_ode::trajectory_level;
use crate::model::{ode_o_residual, ode_o_scale, Point};
use crate::roots::{slopes_at, CubicCoeffs, DEGREE_REDUCTION_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("no real orthogonal slope at ({x}, {y})")]
    NoBranch { x: f64, y: f64 },
    #[error("no slope within {tol} of hint {hint} at ({x}, {y}); slopes are {slopes:?}")]
    NoMatchingHint {
        x: f64,
        y: f64,
        hint: f64,
        tol: f64,
        slopes: Vec<f64>,
    },
    #[error("start ({x}, {y}) is a singular point of the direction field")]
    SingularStart { x: f64, y: f64 },
    #[error("invalid trace configuration: {0}")]
    InvalidConfig(String),
}

/// Largest admissible mismatch between a slope hint and the chosen root.
pub const HINT_TOL: f64 = 0.1;
/// Largest turn (radians) between the step's reference tangent and any stage
/// tangent before the step is rejected.
pub const MAX_TURN: f64 = 0.5;
/// Angular gap below which two tangent lines count as merging.
pub const MERGE_GAP: f64 = 1e-2;
/// Coordinates beyond this magnitude end a trace.
pub const DOMAIN_LIMIT: f64 = 1e6;
const MIN_STEP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Leave the start point towards increasing `x` (or `y` on a vertical
    /// tangent).
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub start: Point,
    pub initial_slope_hint: Option<f64>,
    /// Initial arc-length step; accepted steps never exceed twice this.
    pub step: f64,
    /// Arc length per traced direction.
    pub max_arc: f64,
    pub tol: f64,
    pub direction: Direction,
}

impl TraceConfig {
    pub fn new(start: Point) -> Self {
        Self {
            start,
            initial_slope_hint: None,
            step: 1e-2,
            max_arc: 50.0,
            tol: 1e-8,
            direction: Direction::Both,
        }
    }

    pub fn with_hint(mut self, hint: f64) -> Self {
        self.initial_slope_hint = Some(hint);
        self
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let bad = |what: &str, v: f64| Err(TraceError::InvalidConfig(format!("{what} = {v}")));
        if !self.start.is_finite() {
            return Err(TraceError::InvalidConfig(format!(
                "start = {:?}",
                self.start
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step", self.step);
        }
        if !(self.max_arc > 0.0 && self.max_arc.is_finite()) {
            return bad("max_arc", self.max_arc);
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", self.tol);
        }
        if let Some(h) = self.initial_slope_hint {
            if !h.is_finite() {
                return bad("initial_slope_hint", h);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ArcLimit,
    BranchLoss,
    Singularity,
    DomainExit,
}

/// A traced point and the slope `dy/dx` there (infinite on a vertical
/// tangent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub point: Point,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    /// Ordered along the curve; a two-sided trace runs from the backward end
    /// through the start to the forward end.
    pub samples: Vec<TraceSample>,
    /// How the forward leg ended (or the only leg, for one-sided traces).
    pub terminated_by: Termination,
    /// How the backward leg ended, for two-sided traces.
    pub terminated_backward: Option<Termination>,
    /// Max `|F - F0|` of the first integral over the samples.
    pub potential_drift: f64,
    /// First-integral value at the start.
    pub initial_level: f64,
    pub arc_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicKind {
    /// Trajectories of `x^2 - y^2 = C1`: `y' = -y/x`, conserving `xy`.
    HyperbolaPair,
    /// Trajectories of `y = m x`: `y' = -x/y`, conserving `x^2 + y^2`.
    Monopole,
    /// Trajectories of `y = m (x + 1)`: `y' = -(x+1)/y`, conserving
    /// `(x+1)^2 + y^2`.
    ShiftedMonopole,
}

impl ClassicKind {
    pub const ALL: [ClassicKind; 3] = [
        ClassicKind::HyperbolaPair,
        ClassicKind::Monopole,
        ClassicKind::ShiftedMonopole,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassicKind::HyperbolaPair => "hyperbola-pair",
            ClassicKind::Monopole => "monopole",
            ClassicKind::ShiftedMonopole => "shifted-monopole",
        }
    }

    pub fn conserved(self, p: Point) -> f64 {
        match self {
            ClassicKind::HyperbolaPair => p.x * p.y,
            ClassicKind::Monopole => p.x * p.x + p.y * p.y,
            ClassicKind::ShiftedMonopole => (p.x + 1.0).powi(2) + p.y * p.y,
        }
    }

    fn tangent(self, p: Point) -> (f64, f64) {
        match self {
            ClassicKind::HyperbolaPair => (p.x, -p.y),
            ClassicKind::Monopole => (p.y, -p.x),
            ClassicKind::ShiftedMonopole => (p.y, -(p.x + 1.0)),
        }
    }
}

/// An admissible tangent line at a point.
#[derive(Debug, Clone, Copy)]
struct Tangent {
    dir: (f64, f64),
    p: f64,
    multiplicity: u32,
}

trait TangentField {
    fn tangents(&self, at: Point) -> Vec<Tangent>;
    /// First integral evaluated at a point with the given tangent.
    fn level(&self, at: Point, tangent: &Tangent) -> Option<f64>;
}

fn unit_from_slope(p: f64) -> (f64, f64) {
    let n = p.hypot(1.0);
    (1.0 / n, p / n)
}

struct OrthogonalField;

impl TangentField for OrthogonalField {
    fn tangents(&self, at: Point) -> Vec<Tangent> {
        let Ok(set) = slopes_at(at.x, at.y) else {
            return Vec::new();
        };
        let mut out: Vec<Tangent> = set
            .iter()
            .map(|(p, k)| Tangent {
                dir: unit_from_slope(p),
                p,
                multiplicity: k,
            })
            .collect();
        // The cubic lost its leading term: the dropped root is p = +-infinity.
        let poly = CubicCoeffs::slope_cubic(at.x, at.y);
        if poly.a3.abs() <= DEGREE_REDUCTION_TOL * poly.max_abs() {
            out.push(Tangent {
                dir: (0.0, 1.0),
                p: f64::INFINITY,
                multiplicity: 1,
            });
        }
        out
    }

    fn level(&self, at: Point, tangent: &Tangent) -> Option<f64> {
        if !tangent.p.is_finite() {
            return None;
        }
        trajectory_level(at.y, tangent.p).ok()
    }
}

struct ClassicField(ClassicKind);

impl TangentField for ClassicField {
    fn tangents(&self, at: Point) -> Vec<Tangent> {
        let (u, v) = self.0.tangent(at);
        let n = u.hypot(v);
        if !(n > 0.0) || !n.is_finite() {
            return Vec::new();
        }
        let dir = (u / n, v / n);
        vec![Tangent {
            dir,
            p: if dir.0 == 0.0 {
                f64::INFINITY
            } else {
                dir.1 / dir.0
            },
            multiplicity: 1,
        }]
    }

    fn level(&self, at: Point, _tangent: &Tangent) -> Option<f64> {
        Some(self.0.conserved(at))
    }
}

/// The tangent closest in angle to `reference`, oriented along it, with its
/// turn angle and the angular gap to the next-closest line.
#[derive(Debug, Clone, Copy)]
struct Choice {
    tangent: Tangent,
    dir: (f64, f64),
    turn: f64,
    gap: f64,
}

fn line_angle(a: (f64, f64), b: (f64, f64)) -> f64 {
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    cross.abs().atan2(dot.abs())
}

fn choose(field: &dyn TangentField, at: Point, reference: (f64, f64)) -> Option<Choice> {
    let tangents = field.tangents(at);
    let (best, turn) = tangents
        .iter()
        .map(|t| (t, line_angle(t.dir, reference)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let gap = if best.multiplicity > 1 {
        0.0
    } else {
        tangents
            .iter()
            .filter(|t| !std::ptr::eq(*t, best))
            .map(|t| line_angle(t.dir, best.dir))
            .fold(f64::INFINITY, f64::min)
    };
    let dot = best.dir.0 * reference.0 + best.dir.1 * reference.1;
    let dir = if dot < 0.0 {
        (-best.dir.0, -best.dir.1)
    } else {
        best.dir
    };
    Some(Choice {
        tangent: *best,
        dir,
        turn,
        gap,
    })
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Leg {
    samples: Vec<(Point, Tangent)>,
    termination: Termination,
    arc: f64,
}

enum StepOutcome {
    Accepted { end: Point, next: Choice, err: f64 },
    Rejected { ambiguous: bool },
}

fn dp_step(field: &dyn TangentField, z: Point, d0: (f64, f64), h: f64, tol: f64) -> StepOutcome {
    let mut k = [(0.0, 0.0); 7];
    k[0] = d0;
    let mut ambiguous = false;
    for i in 1..7 {
        let (mut dx, mut dy) = (0.0, 0.0);
        for (j, kj) in k.iter().enumerate().take(i) {
            dx += A[i][j] * kj.0;
            dy += A[i][j] * kj.1;
        }
        let at = Point::new(z.x + h * dx, z.y + h * dy);
        match choose(field, at, d0) {
            Some(c) if c.turn <= MAX_TURN => {
                ambiguous |= c.gap < MERGE_GAP;
                k[i] = c.dir;
            }
            Some(c) => {
                return StepOutcome::Rejected {
                    ambiguous: ambiguous || c.gap < MERGE_GAP,
                }
            }
            None => return StepOutcome::Rejected { ambiguous: true },
        }
    }
    // Row 6 of A holds the fifth-order weights, so the last stage sits on
    // the new point.
    let mut end = z;
    for (j, kj) in k.iter().enumerate().take(6) {
        end.x += h * A[6][j] * kj.0;
        end.y += h * A[6][j] * kj.1;
    }
    let (mut ex, mut ey) = (0.0, 0.0);
    for (e, kj) in E.iter().zip(k.iter()) {
        ex += h * e * kj.0;
        ey += h * e * kj.1;
    }
    let scale = tol * end.x.abs().max(end.y.abs()).max(1.0);
    let err = ex.abs().max(ey.abs()) / scale;
    match choose(field, end, d0) {
        Some(next) if next.turn <= MAX_TURN => StepOutcome::Accepted { end, next, err },
        _ => StepOutcome::Rejected { ambiguous: true },
    }
}

fn integrate_leg(field: &dyn TangentField, start: Choice, z0: Point, cfg: &TraceConfig) -> Leg {
    let h_max = 2.0 * cfg.step;
    let mut h = cfg.step;
    let mut z = z0;
    let mut cur = start;
    let mut arc = 0.0;
    let mut samples = Vec::new();
    loop {
        if arc >= cfg.max_arc * (1.0 - 1e-14) {
            return Leg {
                samples,
                termination: Termination::ArcLimit,
                arc,
            };
        }
        let h_try = h.min(cfg.max_arc - arc).min(h_max);
        match dp_step(field, z, cur.dir, h_try, cfg.tol) {
            StepOutcome::Accepted { end, next, err } if err <= 1.0 => {
                if !end.is_finite() || end.x.abs() > DOMAIN_LIMIT || end.y.abs() > DOMAIN_LIMIT {
                    return Leg {
                        samples,
                        termination: Termination::DomainExit,
                        arc,
                    };
                }
                z = end;
                arc += h_try;
                cur = next;
                samples.push((z, cur.tangent));
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h_try * factor).min(h_max);
            }
            StepOutcome::Accepted { err, .. } => {
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            StepOutcome::Rejected { .. } => {
                h = 0.5 * h_try;
            }
        }
        if h < MIN_STEP {
            let termination = if cur.gap < MERGE_GAP || cur.tangent.multiplicity > 1 {
                Termination::Singularity
            } else {
                match dp_step(field, z, cur.dir, MIN_STEP, cfg.tol) {
                    StepOutcome::Rejected { ambiguous: true } => Termination::Singularity,
                    _ => Termination::BranchLoss,
                }
            };
            return Leg {
                samples,
                termination,
                arc,
            };
        }
    }
}

fn initial_choice(
    field: &dyn TangentField,
    start: Point,
    hint: Option<f64>,
) -> Result<Choice, TraceError> {
    let tangents = field.tangents(start);
    let finite: Vec<&Tangent> = tangents.iter().filter(|t| t.p.is_finite()).collect();
    let picked = match hint {
        Some(h) => {
            let best = finite
                .iter()
                .min_by(|a, b| (a.p - h).abs().total_cmp(&(b.p - h).abs()))
                .copied();
            match best {
                Some(t) if (t.p - h).abs() <= HINT_TOL => *t,
                _ => {
                    return Err(TraceError::NoMatchingHint {
                        x: start.x,
                        y: start.y,
                        hint: h,
                        tol: HINT_TOL,
                        slopes: finite.iter().map(|t| t.p).collect(),
                    })
                }
            }
        }
        None => *tangents.first().ok_or(TraceError::NoBranch {
            x: start.x,
            y: start.y,
        })?,
    };
    let dir = if picked.dir.0 < 0.0 || (picked.dir.0 == 0.0 && picked.dir.1 < 0.0) {
        (-picked.dir.0, -picked.dir.1)
    } else {
        picked.dir
    };
    let gap = tangents
        .iter()
        .filter(|t| t.p != picked.p)
        .map(|t| line_angle(t.dir, picked.dir))
        .fold(f64::INFINITY, f64::min);
    Ok(Choice {
        tangent: picked,
        dir,
        turn: 0.0,
        gap,
    })
}

fn run_trace(field: &dyn TangentField, cfg: &TraceConfig) -> Result<TraceResult, TraceError> {
    cfg.validate()?;
    let start = cfg.start;
    let first = initial_choice(field, start, cfg.initial_slope_hint)?;
    let reversed = Choice {
        dir: (-first.dir.0, -first.dir.1),
        ..first
    };

    let forward = matches!(cfg.direction, Direction::Forward | Direction::Both)
        .then(|| integrate_leg(field, first, start, cfg));
    let backward = matches!(cfg.direction, Direction::Backward | Direction::Both)
        .then(|| integrate_leg(field, reversed, start, cfg));

    let mut samples: Vec<(Point, Tangent)> = Vec::new();
    let mut arc_length = 0.0;
    if let Some(b) = &backward {
        samples.extend(b.samples.iter().rev().copied());
        arc_length += b.arc;
    }
    samples.push((start, first.tangent));
    if let Some(f) = &forward {
        samples.extend(f.samples.iter().copied());
        arc_length += f.arc;
    }

    let initial_level = field.level(start, &first.tangent).unwrap_or(f64::NAN);
    let potential_drift = samples
        .iter()
        .filter_map(|(pt, t)| field.level(*pt, t))
        .map(|l| (l - initial_level).abs())
        .fold(0.0, f64::max);

    let (terminated_by, terminated_backward) = match (&forward, &backward) {
        (Some(f), Some(b)) => (f.termination, Some(b.termination)),
        (Some(f), None) => (f.termination, None),
        (None, Some(b)) => (b.termination, None),
        (None, None) => unreachable!(),
    };

    Ok(TraceResult {
        samples: samples
            .into_iter()
            .map(|(point, t)| TraceSample { point, p: t.p })
            .collect(),
        terminated_by,
        terminated_backward,
        potential_drift,
        initial_level,
        arc_length,
    })
}

/// Traces the orthogonal trajectory through `cfg.start`.
///
/// The starting branch is the root of the slope cubic nearest
/// `cfg.initial_slope_hint`, or the smallest root when no hint is given.
pub fn trace_orthogonal(cfg: &TraceConfig) -> Result<TraceResult, TraceError> {
    cfg.validate()?;
    let start = cfg.start;
    let slopes = slopes_at(start.x, start.y).map_err(|_| TraceError::NoBranch {
        x: start.x,
        y: start.y,
    })?;
    if slopes.is_empty() {
        return Err(TraceError::NoBranch {
            x: start.x,
            y: start.y,
        });
    }
    run_trace(&OrthogonalField, cfg)
}

/// Traces one of the textbook orthogonal pairs from `start`; `cfg.start` is
/// ignored.
pub fn trace_classic(
    kind: ClassicKind,
    start: Point,
    cfg: &TraceConfig,
) -> Result<TraceResult, TraceError> {
    let (u, v) = kind.tangent(start);
    if u.hypot(v) <= 1e-12 {
        return Err(TraceError::SingularStart {
            x: start.x,
            y: start.y,
        });
    }
    let cfg = TraceConfig { start, ..*cfg };
    run_trace(&ClassicField(kind), &cfg)
}

/// `|ode_o_residual| / scale` at a traced sample; zero for vertical samples
/// on the x-axis, where the slope equation degenerates.
pub fn sample_residual(s: &TraceSample) -> f64 {
    if !s.p.is_finite() {
        return 0.0;
    }
    let (x, y) = (s.point.x, s.point.y);
    ode_o_residual(x, y, s.p).abs() / ode_o_scale(x, y, s.p)
}
