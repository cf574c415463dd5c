//! Line/curve intersections and the conic test for trajectory curves.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LineFamily, ModelError, Point, Slope, TrajectoryCurve};
use crate::roots::bracketed_root;

/// Grid size of the sign scan in [`intersections`].
pub const SCAN_POINTS: usize = 10_000;
/// `|slope product + 1|` below which a crossing counts as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-6;
const ROOT_TOL: f64 = 1e-13;
const DEDUP_TOL: f64 = 1e-8;

/// Residual at or below which samples are accepted as lying on a conic.
pub const CONIC_ACCEPT: f64 = 1e-8;
/// Residual at or above which samples are rejected as non-conic.
pub const CONIC_REJECT: f64 = 1e-3;
/// `|b^2 - 4ac|` bound (unit-norm coefficients) for a parabola.
pub const PARABOLA_DISCRIMINANT_TOL: f64 = 1e-6;
pub const MIN_FIT_POINTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("points do not determine a unique conic (null space dimension > 1)")]
    DegenerateInput,
    #[error("non-finite sample point {0:?}")]
    NonFinite(Point),
    #[error("invalid parameter window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Product of the line slope and the curve slope at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum SlopeProduct {
    Finite(f64),
    /// The curve tangent is vertical.
    Infinite,
    /// The crossing sits on a cusp; no tangent slope exists.
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRecord {
    pub t: f64,
    pub point: Point,
    pub slope_product: SlopeProduct,
    pub orthogonal: bool,
}

/// Crossings of line `m` of the cubic family with curve `C` for
/// `t` in `[t_min, t_max]`, sorted by `t`.
///
/// Roots are located by a sign scan over [`SCAN_POINTS`] grid points, so
/// tangential contacts and root pairs closer than the grid spacing are not
/// reported.
pub fn intersections(
    m: f64,
    curve: TrajectoryCurve,
    t_min: f64,
    t_max: f64,
) -> Result<Vec<IntersectionRecord>, GeometryError> {
    if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(GeometryError::InvalidWindow(t_min, t_max));
    }
    let line = LineFamily::cubic().line_at(m)?;
    let gap = |t: f64| {
        let c = curve.c();
        let s = (1.0 + t * t).sqrt();
        let (x, y) = (t * t - c / s, 2.0 * t + c * t / s);
        y - line.y_at(x)
    };

    let n = SCAN_POINTS;
    let grid = |i: usize| t_min + (t_max - t_min) * (i as f64) / ((n - 1) as f64);
    let mut ts: Vec<f64> = Vec::new();
    let mut prev_t = grid(0);
    let mut prev_g = gap(prev_t);
    if prev_g == 0.0 {
        ts.push(prev_t);
    }
    for i in 1..n {
        let t = grid(i);
        let g = gap(t);
        if g == 0.0 {
            ts.push(t);
        } else if prev_g != 0.0 && prev_g.signum() != g.signum() {
            if let Ok(r) = bracketed_root(gap, prev_t, t, ROOT_TOL) {
                ts.push(r);
            }
        }
        prev_t = t;
        prev_g = g;
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_TOL);

    ts.into_iter()
        .map(|t| {
            let point = curve.point(t)?;
            let (slope_product, orthogonal) = match curve.slope(t) {
                Ok(Slope::Finite(s)) => {
                    let prod = m * s;
                    (
                        SlopeProduct::Finite(prod),
                        (prod + 1.0).abs() <= ORTHOGONAL_TOL,
                    )
                }
                // Vertical tangent meets a horizontal line at a right angle.
                Ok(Slope::Vertical) => (SlopeProduct::Infinite, m == 0.0),
                Err(_) => (SlopeProduct::Singular, false),
            };
            Ok(IntersectionRecord {
                t,
                point,
                slope_product,
                orthogonal,
            })
        })
        .collect()
}

/// Best-fit conic `a x^2 + b xy + c y^2 + d x + e y + f = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicFit {
    /// Unit-norm coefficients in the caller's coordinates.
    pub coeffs: [f64; 6],
    /// Unit-norm coefficients in the normalized (zero-mean, unit-RMS)
    /// coordinates the fit was computed in.
    pub scaled_coeffs: [f64; 6],
    /// RMS of the normalized quadratic form over the normalized points.
    pub residual_rms: f64,
}

impl ConicFit {
    /// `b^2 - 4ac` of the normalized conic.
    pub fn discriminant(&self) -> f64 {
        let [a, b, c, ..] = self.scaled_coeffs;
        b * b - 4.0 * a * c
    }
}

fn unit(v: [f64; 6]) -> [f64; 6] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = v.map(|x| x / n);
    // Sign convention: largest-magnitude entry positive.
    let lead = out
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    if lead < 0.0 {
        out = out.map(|x| -x);
    }
    out
}

/// Least-squares conic through `points`: the right singular vector of the
/// smallest singular value of the design matrix `[x^2, xy, y^2, x, y, 1]`.
///
/// Points are shifted to zero mean and scaled to unit RMS radius before
/// fitting; the residual is reported in those coordinates.
pub fn fit_conic(points: &[Point]) -> Result<ConicFit, GeometryError> {
    if points.len() < MIN_FIT_POINTS {
        return Err(GeometryError::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: points.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(*p));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y).sum::<f64>() / n;
    let rms = (points
        .iter()
        .map(|p| (p.x - mx).powi(2) + (p.y - my).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    if !(rms > 0.0) {
        return Err(GeometryError::DegenerateInput);
    }

    let design = DMatrix::from_fn(points.len(), 6, |i, j| {
        let u = (points[i].x - mx) / rms;
        let v = (points[i].y - my) / rms;
        match j {
            0 => u * u,
            1 => u * v,
            2 => v * v,
            3 => u,
            4 => v,
            _ => 1.0,
        }
    });
    let svd = design.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let second = svd.singular_values[order[1]];
    let largest = svd.singular_values[order[order.len() - 1]];
    if second <= 1e-10 * largest {
        return Err(GeometryError::DegenerateInput);
    }
    let row = v_t.row(order[0]);
    let scaled = unit([row[0], row[1], row[2], row[3], row[4], row[5]]);

    // Back to caller coordinates: u = (x - mx)/s, v = (y - my)/s.
    let [a, b, c, d, e, f] = scaled;
    let s2 = rms * rms;
    let orig = [
        a / s2,
        b / s2,
        c / s2,
        (-2.0 * a * mx - b * my + d * rms) / s2,
        (-2.0 * c * my - b * mx + e * rms) / s2,
        (a * mx * mx + b * mx * my + c * my * my - d * mx * rms - e * my * rms + f * s2) / s2,
    ];

    let residual_rms = {
        let r = &design * nalgebra::DVector::from_column_slice(&scaled);
        (r.norm_squared() / n).sqrt()
    };
    Ok(ConicFit {
        coeffs: unit(orig),
        scaled_coeffs: scaled,
        residual_rms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConicVerdict {
    Parabola,
    /// On a conic, but not a parabola.
    OtherConic,
    NotConic,
    /// Residual between the accept and reject thresholds.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveClassification {
    pub c: f64,
    pub fit: ConicFit,
    pub verdict: ConicVerdict,
    pub cusps: Vec<f64>,
}

pub const DEFAULT_CLASSIFY_SAMPLES: usize = 200;
pub const DEFAULT_CLASSIFY_RANGE: (f64, f64) = (-3.0, 3.0);

/// `n` points of `curve` at uniformly spaced `t` in `[t0, t1]`.
pub fn sample_curve(
    curve: TrajectoryCurve,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<Vec<Point>, ModelError> {
    (0..n)
        .map(|i| {
            let t = if n == 1 {
                t0
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            };
            curve.point(t)
        })
        .collect()
}

pub fn classify(curve: TrajectoryCurve) -> Result<CurveClassification, GeometryError> {
    let (t0, t1) = DEFAULT_CLASSIFY_RANGE;
    let pts = sample_curve(curve, t0, t1, DEFAULT_CLASSIFY_SAMPLES)?;
    let fit = fit_conic(&pts)?;
    let verdict = if fit.residual_rms <= CONIC_ACCEPT {
        if fit.discriminant().abs() <= PARABOLA_DISCRIMINANT_TOL {
            ConicVerdict::Parabola
        } else {
            ConicVerdict::OtherConic
        }
    } else if fit.residual_rms >= CONIC_REJECT {
        ConicVerdict::NotConic
    } else {
        ConicVerdict::Inconclusive
    };
    Ok(CurveClassification {
        c: curve.c(),
        fit,
        verdict,
        cusps: curve.cusp_parameters(),
    })
}

/// True iff 200 samples over `t` in `[-3, 3]` lie on a conic with vanishing
/// discriminant.
pub fn is_parabola(curve: TrajectoryCurve) -> bool {
    matches!(classify(curve), Ok(c) if c.verdict == ConicVerdict::Parabola)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(c: f64) -> TrajectoryCurve {
        TrajectoryCurve::new(c).unwrap()
    }

    #[test]
    fn parabola_line_one() {
        let recs = intersections(1.0, curve(0.0), -5.0, 5.0).unwrap();
        assert_eq!(recs.len(), 2);
        assert!((recs[0].t + 1.0).abs() < 1e-10);
        assert!(recs[0].orthogonal);
        assert!((recs[1].t - 3.0).abs() < 1e-10);
        assert!(!recs[1].orthogonal);
        match recs[1].slope_product {
            SlopeProduct::Finite(v) => assert!((v - 1.0 / 3.0).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
        assert!(recs[1].point.dist(Point::new(9.0, 6.0)) < 1e-9);
    }

    #[test]
    fn horizontal_line_meets_vertex() {
        let recs = intersections(0.0, curve(0.0), -5.0, 5.0).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].t.abs() < 1e-12);
        assert!(recs[0].orthogonal);
        assert!(recs[0].point.dist(Point::new(0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn empty_window() {
        // g(0) = 3 and g(2) = 3 for line m = 1 on the parabola
        assert!(intersections(1.0, curve(0.0), 0.0, 2.0).unwrap().is_empty());
        assert!(intersections(1.0, curve(0.0), 2.0, 0.0).is_err());
    }

    #[test]
    fn conic_fits() {
        let pts = sample_curve(curve(0.0), -3.0, 3.0, 50).unwrap();
        let fit = fit_conic(&pts).unwrap();
        assert!(fit.residual_rms <= 1e-10);
        let want = unit([0.0, 0.0, 1.0, -4.0, 0.0, 0.0]);
        let cos: f64 = fit.coeffs.iter().zip(want).map(|(a, b)| a * b).sum();
        assert!(cos.abs() >= 1.0 - 1e-8, "{:?}", fit.coeffs);

        let circle: Vec<Point> = (0..50)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 50.0;
                Point::new(2.0 * a.cos(), 2.0 * a.sin())
            })
            .collect();
        let fit = fit_conic(&circle).unwrap();
        assert!(fit.residual_rms <= 1e-10);
        assert!(fit.discriminant() < -0.1);

        let pts = sample_curve(curve(4.0), -3.0, 3.0, 50).unwrap();
        let fit = fit_conic(&pts).unwrap();
        // numpy SVD of the same normalized design matrix: 5.5803e-3
        assert!((fit.residual_rms - 5.580_253e-3).abs() < 1e-8);
        assert!(fit.residual_rms >= CONIC_REJECT);
    }

    #[test]
    fn fit_errors() {
        let line: Vec<Point> = (0..20)
            .map(|i| Point::new(i as f64, 2.0 * i as f64))
            .collect();
        assert_eq!(fit_conic(&line), Err(GeometryError::DegenerateInput));
        assert!(matches!(
            fit_conic(&line[..5]),
            Err(GeometryError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn parabola_classification() {
        assert!(is_parabola(curve(0.0)));
        assert!(!is_parabola(curve(4.0)));
        assert!(!is_parabola(curve(-4.0)));
        let c = classify(curve(-4.0)).unwrap();
        assert_eq!(c.verdict, ConicVerdict::NotConic);
        assert_eq!(c.cusps.len(), 2);
    }
}
