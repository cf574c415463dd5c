//! Static SVG figures of trajectory curves together with lines of the cubic
//! family.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LineFamily, TrajectoryCurve};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlotError {
    #[error("invalid plot spec field `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("unknown preset `{0}` (expected fig1a or fig1b)")]
    UnknownPreset(String),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> PlotError {
    PlotError::InvalidSpec {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(rename = "C")]
    pub c: f64,
    pub t_range: [f64; 2],
    #[serde(default)]
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    #[serde(default)]
    pub curves: Vec<CurveSpec>,
    /// Slopes `m` of the family lines to draw.
    #[serde(default)]
    pub lines: Vec<f64>,
    pub x_window: [f64; 2],
    pub y_window: [f64; 2],
    pub samples_per_curve: usize,
    pub width_px: u32,
    pub height_px: u32,
}

pub const DEFAULT_T_RANGE: [f64; 2] = [-3.5, 3.5];
pub const DEFAULT_X_WINDOW: [f64; 2] = [-6.0, 10.0];
pub const DEFAULT_Y_WINDOW: [f64; 2] = [-9.0, 9.0];
pub const DEFAULT_SAMPLES: usize = 400;
pub const FIGURE_LINES: [f64; 3] = [1.0, 2.0, -3.0];

impl PlotSpec {
    fn with_curves(cs: &[f64]) -> Self {
        Self {
            curves: cs
                .iter()
                .map(|&c| CurveSpec {
                    c,
                    t_range: DEFAULT_T_RANGE,
                    dashed: c == 0.0,
                })
                .collect(),
            lines: FIGURE_LINES.to_vec(),
            x_window: DEFAULT_X_WINDOW,
            y_window: DEFAULT_Y_WINDOW,
            samples_per_curve: DEFAULT_SAMPLES,
            width_px: 640,
            height_px: 720,
        }
    }

    /// Panel (a): the parabola and three outer curves.
    pub fn fig1a() -> Self {
        Self::with_curves(&[0.0, 1.0, 2.0, 3.0])
    }

    /// Panel (b): the parabola and three inner curves, the innermost cusped.
    pub fn fig1b() -> Self {
        Self::with_curves(&[0.0, -1.0, -2.0, -4.0])
    }

    pub fn preset(name: &str) -> Result<Self, PlotError> {
        match name {
            "fig1a" => Ok(Self::fig1a()),
            "fig1b" => Ok(Self::fig1b()),
            other => Err(PlotError::UnknownPreset(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), PlotError> {
        let window = |name: &str, w: [f64; 2]| {
            if !(w[0].is_finite() && w[1].is_finite()) {
                Err(invalid(name, "bounds must be finite"))
            } else if !(w[0] < w[1]) {
                Err(invalid(name, format!("empty window [{}, {}]", w[0], w[1])))
            } else {
                Ok(())
            }
        };
        window("x_window", self.x_window)?;
        window("y_window", self.y_window)?;
        if self.samples_per_curve < 2 {
            return Err(invalid("samples_per_curve", "must be at least 2"));
        }
        if self.width_px == 0 {
            return Err(invalid("width_px", "must be positive"));
        }
        if self.height_px == 0 {
            return Err(invalid("height_px", "must be positive"));
        }
        for (i, c) in self.curves.iter().enumerate() {
            if !c.c.is_finite() {
                return Err(invalid(format!("curves[{i}].C"), "must be finite"));
            }
            let [a, b] = c.t_range;
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(
                    format!("curves[{i}].t_range"),
                    format!("need finite t0 < t1, got [{a}, {b}]"),
                ));
            }
        }
        for (i, m) in self.lines.iter().enumerate() {
            if !m.is_finite() {
                return Err(invalid(format!("lines[{i}]"), "must be finite"));
            }
        }
        Ok(())
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
const MARGIN: f64 = 40.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + (self.y1 - y) / (self.y1 - self.y0) * (self.h - 2.0 * MARGIN)
    }
}

/// Clips `y = slope x + intercept` to the window (Liang-Barsky on a long
/// segment spanning the x range).
fn clip_line(slope: f64, intercept: f64, f: &Frame) -> Option<((f64, f64), (f64, f64))> {
    let (ax, ay) = (f.x0, slope * f.x0 + intercept);
    let (bx, by) = (f.x1, slope * f.x1 + intercept);
    let (dx, dy) = (bx - ax, by - ay);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (p, q) in [
        (-dx, ax - f.x0),
        (dx, f.x1 - ax),
        (-dy, ay - f.y0),
        (dy, f.y1 - ay),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
    }
    if lo > hi {
        return None;
    }
    Some(((ax + lo * dx, ay + lo * dy), (ax + hi * dx, ay + hi * dy)))
}

fn fmt_c(c: f64) -> String {
    if c == c.trunc() && c.abs() < 1e6 {
        format!("{}", c as i64)
    } else {
        format!("{c}")
    }
}

/// Renders the spec as an SVG 1.1 document. Output depends only on the spec.
///
/// Every curve and every family line becomes exactly one `<path>`; axes and
/// legend swatches use `<line>`.
pub fn render_figure(spec: &PlotSpec) -> Result<String, PlotError> {
    spec.validate()?;
    let f = Frame {
        x0: spec.x_window[0],
        x1: spec.x_window[1],
        y0: spec.y_window[0],
        y1: spec.y_window[1],
        w: spec.width_px as f64,
        h: spec.height_px as f64,
    };
    let mut s = String::new();
    let w = &mut s;
    // Writing to a String cannot fail.
    let _ = writeln!(
        w,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width_px, spec.height_px, spec.width_px, spec.height_px
    );
    let _ = writeln!(
        w,
        r#"<defs><clipPath id="plot-area"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
        MARGIN,
        MARGIN,
        f.w - 2.0 * MARGIN,
        f.h - 2.0 * MARGIN
    );
    let _ = writeln!(
        w,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
        spec.width_px, spec.height_px
    );

    let _ = writeln!(w, r##"<g id="axes" stroke="#555555" stroke-width="1">"##);
    let _ = writeln!(
        w,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none"/>"#,
        MARGIN,
        MARGIN,
        f.w - 2.0 * MARGIN,
        f.h - 2.0 * MARGIN
    );
    if f.y0 <= 0.0 && 0.0 <= f.y1 {
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            f.px(f.x0),
            f.py(0.0),
            f.px(f.x1),
            f.py(0.0)
        );
    }
    if f.x0 <= 0.0 && 0.0 <= f.x1 {
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            f.px(0.0),
            f.py(f.y0),
            f.px(0.0),
            f.py(f.y1)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" stroke="none">x</text>"#,
        f.w - MARGIN + 6.0,
        f.py(0.0_f64.clamp(f.y0, f.y1)) + 4.0
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" stroke="none">y</text>"#,
        f.px(0.0_f64.clamp(f.x0, f.x1)) - 4.0,
        MARGIN - 8.0
    );
    let _ = writeln!(w, "</g>");

    let _ = writeln!(
        w,
        r#"<g id="curves" fill="none" clip-path="url(#plot-area)">"#
    );
    for (i, cs) in spec.curves.iter().enumerate() {
        let curve = TrajectoryCurve::new(cs.c)
            .map_err(|e| invalid(format!("curves[{i}].C"), e.to_string()))?;
        let n = spec.samples_per_curve;
        let mut d = String::new();
        for k in 0..n {
            let t = cs.t_range[0] + (cs.t_range[1] - cs.t_range[0]) * k as f64 / (n - 1) as f64;
            let p = curve
                .point(t)
                .map_err(|e| invalid(format!("curves[{i}].t_range"), e.to_string()))?;
            let _ = write!(
                d,
                "{}{:.3},{:.3}",
                if k == 0 { "M" } else { " L" },
                f.px(p.x),
                f.py(p.y)
            );
        }
        let dash = if cs.dashed {
            r#" stroke-dasharray="8,5""#
        } else {
            ""
        };
        let _ = writeln!(
            w,
            r#"<path class="curve" data-c="{}" stroke="{}" stroke-width="1.6"{} d="{}"/>"#,
            cs.c,
            PALETTE[i % PALETTE.len()],
            dash,
            d
        );
    }
    let _ = writeln!(w, "</g>");

    let family = LineFamily::cubic();
    let _ = writeln!(
        w,
        r##"<g id="lines" fill="none" stroke="#000000" stroke-width="1.2" clip-path="url(#plot-area)">"##
    );
    for &m in &spec.lines {
        let line = family
            .line_at(m)
            .map_err(|e| invalid("lines", e.to_string()))?;
        let d = match clip_line(line.slope, line.intercept, &f) {
            Some((a, b)) => format!(
                "M{:.3},{:.3} L{:.3},{:.3}",
                f.px(a.0),
                f.py(a.1),
                f.px(b.0),
                f.py(b.1)
            ),
            None => String::new(),
        };
        let _ = writeln!(w, r#"<path class="family-line" data-m="{m}" d="{d}"/>"#);
    }
    let _ = writeln!(w, "</g>");

    let _ = writeln!(
        w,
        r#"<g id="legend" font-size="12" font-family="sans-serif">"#
    );
    let mut row = 0usize;
    for (i, cs) in spec.curves.iter().enumerate() {
        let y = MARGIN + 16.0 + 16.0 * row as f64;
        let x = MARGIN + 10.0;
        let dash = if cs.dashed {
            r#" stroke-dasharray="8,5""#
        } else {
            ""
        };
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.6"{}/>"#,
            x,
            y - 4.0,
            x + 24.0,
            y - 4.0,
            PALETTE[i % PALETTE.len()],
            dash
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">C = {}</text>"#,
            x + 30.0,
            y,
            fmt_c(cs.c)
        );
        row += 1;
    }
    if !spec.lines.is_empty() {
        let y = MARGIN + 16.0 + 16.0 * row as f64;
        let ms: Vec<String> = spec.lines.iter().map(|&m| fmt_c(m)).collect();
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">lines y = mx - 2m - m^3, m = {}</text>"#,
            MARGIN + 10.0,
            y,
            ms.join(", ")
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(s)
}
