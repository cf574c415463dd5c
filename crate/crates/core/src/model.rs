//! Line family, orthogonal curve family and the residual forms of both ODEs.
//!
//! The line family is `y = m x + f(m)`; the family studied here uses
//! `f(m) = -2m - m^3`. Its orthogonal trajectories are
//!
//! ```text
//! x(t) = t^2 - C / sqrt(1 + t^2)
//! y(t) = 2t + C t / sqrt(1 + t^2)
//! ```
//!
//! where `t` is the reciprocal of the curve slope and `C` labels the member.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol::approx_eq;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-finite input: {name} = {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("empty coefficient list for line family")]
    EmptyFamily,
    #[error("operation only supports the family f(m) = -2m - m^3, got coefficients {0:?}")]
    UnsupportedFamily(Vec<f64>),
    #[error("curve C = {c} has a singular point at t = {t}")]
    DegeneratePoint { c: f64, t: f64 },
    #[error("orthogonal foot of line m = {m} on curve C = {c} is a cusp")]
    DegenerateFoot { m: f64, c: f64 },
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::Domain { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A straight line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn y_at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Signed vertical offset of `p` from the line.
    pub fn vertical_offset(&self, p: Point) -> f64 {
        p.y - self.y_at(p.x)
    }
}

/// One-parameter family `y = m x + f(m)` with polynomial `f`, coefficients in
/// ascending powers of `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFamily {
    coeffs: Vec<f64>,
}

impl LineFamily {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, ModelError> {
        for &c in &coeffs {
            finite("f coefficient", c)?;
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(ModelError::EmptyFamily);
        }
        Ok(Self { coeffs })
    }

    /// `y = m x - 2m - m^3`.
    pub fn cubic() -> Self {
        Self {
            coeffs: vec![0.0, -2.0, 0.0, -1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_cubic_family(&self) -> bool {
        self.coeffs == [0.0, -2.0, 0.0, -1.0]
    }

    pub(crate) fn require_cubic_family(&self) -> Result<(), ModelError> {
        if self.is_cubic_family() {
            Ok(())
        } else {
            Err(ModelError::UnsupportedFamily(self.coeffs.clone()))
        }
    }

    /// `f(m)` by Horner's rule.
    pub fn intercept(&self, m: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * m + c)
    }

    pub fn line_at(&self, m: f64) -> Result<Line, ModelError> {
        let m = finite("m", m)?;
        Ok(Line {
            slope: m,
            intercept: self.intercept(m),
        })
    }
}

/// Slope of a curve at a sample; the vertical case is tagged rather than
/// encoded as an infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    Finite(f64),
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub point: Point,
    pub velocity: (f64, f64),
    pub regular: bool,
}

/// Member `C` of the orthogonal family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCurve {
    c: f64,
}

impl TrajectoryCurve {
    pub fn new(c: f64) -> Result<Self, ModelError> {
        Ok(Self { c: finite("C", c)? })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn point(&self, t: f64) -> Result<Point, ModelError> {
        let t = finite("t", t)?;
        let s = (1.0 + t * t).sqrt();
        Ok(Point {
            x: t * t - self.c / s,
            y: 2.0 * t + self.c * t / s,
        })
    }

    /// Common factor `2 + C (1 + t^2)^(-3/2)` of both velocity components.
    pub fn speed_factor(&self, t: f64) -> f64 {
        let q = 1.0 + t * t;
        2.0 + self.c / (q * q.sqrt())
    }

    /// `(dx/dt, dy/dt) = (t g(t), g(t))` with `g` from [`Self::speed_factor`].
    pub fn velocity(&self, t: f64) -> Result<(f64, f64), ModelError> {
        let t = finite("t", t)?;
        let g = self.speed_factor(t);
        Ok((t * g, g))
    }

    pub fn sample(&self, t: f64) -> Result<CurveSample, ModelError> {
        let point = self.point(t)?;
        let velocity = self.velocity(t)?;
        Ok(CurveSample {
            t,
            point,
            velocity,
            regular: velocity.0.abs().max(velocity.1.abs()) > 0.0,
        })
    }

    /// `dy/dx` along the curve. Equals `1/t` wherever it is defined.
    pub fn slope(&self, t: f64) -> Result<Slope, ModelError> {
        let (dx, dy) = self.velocity(t)?;
        if dx == 0.0 && dy == 0.0 {
            return Err(ModelError::DegeneratePoint { c: self.c, t });
        }
        if dx == 0.0 {
            return Ok(Slope::Vertical);
        }
        Ok(Slope::Finite(dy / dx))
    }

    /// Parameters where both velocity components vanish, ascending.
    ///
    /// `g(t) = 0` needs `(1 + t^2)^(3/2) = -C/2`, so cusps exist only for
    /// `C <= -2`.
    pub fn cusp_parameters(&self) -> Vec<f64> {
        let c = self.c;
        if c > -2.0 {
            return Vec::new();
        }
        if c == -2.0 {
            return vec![0.0];
        }
        let t2 = (c * c / 4.0).cbrt() - 1.0;
        let t = t2.sqrt();
        vec![-t, t]
    }
}

pub fn line_at(family: &LineFamily, m: f64) -> Result<Line, ModelError> {
    family.line_at(m)
}

pub fn curve_point(curve: TrajectoryCurve, t: f64) -> Result<Point, ModelError> {
    curve.point(t)
}

pub fn curve_velocity(curve: TrajectoryCurve, t: f64) -> Result<(f64, f64), ModelError> {
    curve.velocity(t)
}

pub fn curve_slope(curve: TrajectoryCurve, t: f64) -> Result<Slope, ModelError> {
    curve.slope(t)
}

pub fn cusp_parameters(curve: TrajectoryCurve) -> Vec<f64> {
    curve.cusp_parameters()
}

/// `y - (p x - 2p - p^3)`: zero iff `(x, y, p)` lies on a line of the family
/// with slope `p`.
pub fn ode_c_residual(x: f64, y: f64, p: f64) -> f64 {
    y - (p * x - 2.0 * p - p * p * p)
}

/// `y p^3 - p^2 (2 - x) - 1`: zero iff `p` is an orthogonal-trajectory slope
/// through `(x, y)`.
pub fn ode_o_residual(x: f64, y: f64, p: f64) -> f64 {
    let p2 = p * p;
    y * p2 * p - p2 * (2.0 - x) - 1.0
}

/// Magnitude of the largest term in [`ode_o_residual`], for relative checks.
pub fn ode_o_scale(x: f64, y: f64, p: f64) -> f64 {
    let p2 = p * p;
    (y * p2 * p).abs().max((p2 * (2.0 - x)).abs()).max(1.0)
}

/// Sample at `t = -m`, where the curve crosses line `m` at a right angle.
///
/// A cusp landing exactly (to rounding) on `t = -m` is reported as
/// [`ModelError::DegenerateFoot`].
pub fn orthogonal_foot(
    family: &LineFamily,
    m: f64,
    curve: TrajectoryCurve,
) -> Result<CurveSample, ModelError> {
    family.require_cubic_family()?;
    let m = finite("m", m)?;
    let sample = curve.sample(-m)?;
    let g = curve.speed_factor(-m);
    if !sample.regular || approx_eq(g, 0.0, 0.0, FOOT_SINGULAR_TOL * (2.0 + curve.c.abs())) {
        return Err(ModelError::DegenerateFoot { m, c: curve.c });
    }
    Ok(sample)
}

const FOOT_SINGULAR_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(c: f64) -> TrajectoryCurve {
        TrajectoryCurve::new(c).unwrap()
    }

    #[test]
    fn line_examples() {
        let fam = LineFamily::cubic();
        let l = fam.line_at(0.0).unwrap();
        assert_eq!((l.slope, l.intercept), (0.0, 0.0));
        let l = fam.line_at(1.0).unwrap();
        assert_eq!((l.slope, l.intercept), (1.0, -3.0));
        let l = fam.line_at(-2.0).unwrap();
        assert_eq!((l.slope, l.intercept), (-2.0, 12.0));
        assert!(matches!(
            fam.line_at(f64::NAN),
            Err(ModelError::Domain { .. })
        ));
    }

    #[test]
    fn family_normalizes_trailing_zeros() {
        let fam = LineFamily::new(vec![0.0, -2.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
        assert!(fam.is_cubic_family());
        assert_eq!(LineFamily::new(vec![]), Err(ModelError::EmptyFamily));
        let lin = LineFamily::new(vec![0.0, 2.0]).unwrap();
        assert_eq!(lin.intercept(3.0), 6.0);
    }

    #[test]
    fn curve_point_examples() {
        let p = curve(0.0).point(1.0).unwrap();
        assert_eq!((p.x, p.y), (1.0, 2.0));
        assert_eq!(p.y * p.y, 4.0 * p.x);
        let p = curve(3.0).point(0.0).unwrap();
        assert_eq!((p.x, p.y), (-3.0, 0.0));
        let p = curve(-4.0).point(0.0).unwrap();
        assert_eq!((p.x, p.y), (4.0, 0.0));
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(curve(0.0).velocity(1.0).unwrap(), (2.0, 2.0));
        assert_eq!(curve(0.0).velocity(0.0).unwrap(), (0.0, 2.0));
        let s = curve(-2.0).sample(0.0).unwrap();
        assert_eq!(s.velocity, (0.0, 0.0));
        assert!(!s.regular);
    }

    #[test]
    fn slope_examples() {
        assert_eq!(curve(0.0).slope(2.0).unwrap(), Slope::Finite(0.5));
        match curve(7.0).slope(2.0).unwrap() {
            Slope::Finite(s) => assert!((s - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            curve(-2.0).slope(0.0),
            Err(ModelError::DegeneratePoint { .. })
        ));
        assert_eq!(curve(5.0).slope(0.0).unwrap(), Slope::Vertical);
    }

    #[test]
    fn residual_examples() {
        assert_eq!(ode_c_residual(5.0, 2.0, 1.0), 0.0);
        assert_eq!(ode_c_residual(0.0, 0.0, 0.0), 0.0);
        assert_eq!(ode_c_residual(1.0, 2.0, 1.0), 4.0);
        assert_eq!(ode_o_residual(1.0, 2.0, 1.0), 0.0);
        assert_eq!(ode_o_residual(3.0, 0.0, 1.0), 0.0);
        let p = curve(2.0).point(1.5).unwrap();
        let r = ode_o_residual(p.x, p.y, 1.0 / 1.5);
        assert!(r.abs() <= 1e-12 * ode_o_scale(p.x, p.y, 1.0 / 1.5), "{r}");
    }

    #[test]
    fn foot_examples() {
        let fam = LineFamily::cubic();
        let s = orthogonal_foot(&fam, 1.0, curve(0.0)).unwrap();
        assert_eq!(s.t, -1.0);
        assert_eq!((s.point.x, s.point.y), (1.0, -2.0));
        assert_eq!(fam.line_at(1.0).unwrap().vertical_offset(s.point), 0.0);

        let s = orthogonal_foot(&fam, -2.0, curve(0.0)).unwrap();
        assert_eq!((s.point.x, s.point.y), (4.0, 4.0));
        assert_eq!(fam.line_at(-2.0).unwrap().y_at(4.0), 4.0);

        let s = orthogonal_foot(&fam, 0.0, curve(5.0)).unwrap();
        assert_eq!((s.point.x, s.point.y), (-5.0, 0.0));
        assert_eq!(curve(5.0).slope(s.t).unwrap(), Slope::Vertical);
    }

    #[test]
    fn foot_errors() {
        let fam = LineFamily::cubic();
        assert!(matches!(
            orthogonal_foot(&fam, 0.0, curve(-2.0)),
            Err(ModelError::DegenerateFoot { .. })
        ));
        let m = curve(-4.0).cusp_parameters()[1];
        assert!(matches!(
            orthogonal_foot(&fam, m, curve(-4.0)),
            Err(ModelError::DegenerateFoot { .. })
        ));
        let other = LineFamily::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            orthogonal_foot(&other, 1.0, curve(0.0)),
            Err(ModelError::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn cusp_examples() {
        assert!(curve(0.0).cusp_parameters().is_empty());
        assert!(curve(-1.999).cusp_parameters().is_empty());
        assert_eq!(curve(-2.0).cusp_parameters(), vec![0.0]);
        let cusps = curve(-4.0).cusp_parameters();
        assert_eq!(cusps.len(), 2);
        // root of 2 - 4 (1 + t^2)^(-3/2), found by Brent's method to 1e-15
        assert!((cusps[1] - 0.766_420_936_540_88).abs() < 1e-12);
        assert_eq!(cusps[0], -cusps[1]);
    }

    #[test]
    fn velocity_matches_central_differences() {
        let h = 1e-6;
        for &c in &[-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let cv = curve(c);
            for i in -30..=30 {
                let t = i as f64 * 0.1;
                let (vx, vy) = cv.velocity(t).unwrap();
                let a = cv.point(t + h).unwrap();
                let b = cv.point(t - h).unwrap();
                let fx = (a.x - b.x) / (2.0 * h);
                let fy = (a.y - b.y) / (2.0 * h);
                assert!((vx - fx).abs() <= 1e-6, "C={c} t={t}: {vx} vs {fx}");
                assert!((vy - fy).abs() <= 1e-6, "C={c} t={t}: {vy} vs {fy}");
            }
        }
    }
}
