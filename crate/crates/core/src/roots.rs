//! Real roots of cubics (closed form plus Newton polish) and a bracketing
//! bisection/secant hybrid for general scalar functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("non-finite polynomial coefficient")]
    NonFinite,
    #[error("all polynomial coefficients vanish")]
    Indeterminate,
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("function returned non-finite value {fx} at {x}")]
    NotFinite { x: f64, fx: f64 },
}

/// Relative size below which a leading coefficient is dropped.
pub const DEGREE_REDUCTION_TOL: f64 = 1e-12;
/// Relative discriminant size treated as a repeated root.
pub const DISCRIMINANT_TOL: f64 = 1e-10;
/// Roots closer than this (relative to `max(1, |r|)`) are merged.
pub const CLUSTER_TOL: f64 = 1e-8;

/// `a3 p^3 + a2 p^2 + a1 p + a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl CubicCoeffs {
    pub const fn new(a3: f64, a2: f64, a1: f64, a0: f64) -> Self {
        Self { a3, a2, a1, a0 }
    }

    /// The slope cubic `y p^3 + (x - 2) p^2 - 1` at `(x, y)`.
    pub fn slope_cubic(x: f64, y: f64) -> Self {
        Self::new(y, x - 2.0, 0.0, -1.0)
    }

    pub fn eval(&self, p: f64) -> f64 {
        ((self.a3 * p + self.a2) * p + self.a1) * p + self.a0
    }

    pub fn deriv(&self, p: f64) -> f64 {
        (3.0 * self.a3 * p + 2.0 * self.a2) * p + self.a1
    }

    pub fn max_abs(&self) -> f64 {
        self.a3
            .abs()
            .max(self.a2.abs())
            .max(self.a1.abs())
            .max(self.a0.abs())
    }

    /// Residual bound used by the [`RootSet`] invariant.
    pub fn residual_scale(&self, r: f64) -> f64 {
        self.max_abs() * r.abs().max(1.0).powi(3)
    }
}

/// Distinct real roots in ascending order with multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    roots: Vec<f64>,
    multiplicities: Vec<u32>,
}

impl RootSet {
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Total count including multiplicity.
    pub fn degree_count(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.roots
            .iter()
            .copied()
            .zip(self.multiplicities.iter().copied())
    }

    fn from_raw(poly: &CubicCoeffs, raw: Vec<(f64, u32)>) -> Self {
        let mut raw: Vec<(f64, u32)> = raw
            .into_iter()
            .map(|(r, k)| (if k == 1 { polish(poly, r) } else { r }, k))
            .collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut set = RootSet::default();
        for (r, k) in raw {
            if let Some(last) = set.roots.last_mut() {
                if (r - *last).abs() <= CLUSTER_TOL * r.abs().max(1.0) {
                    if poly.eval(r).abs() < poly.eval(*last).abs() {
                        *last = r;
                    }
                    *set.multiplicities.last_mut().unwrap() += k;
                    continue;
                }
            }
            set.roots.push(r);
            set.multiplicities.push(k);
        }
        set
    }
}

/// Newton steps from `r`, kept only while the residual decreases.
fn polish(poly: &CubicCoeffs, mut r: f64) -> f64 {
    let mut fr = poly.eval(r).abs();
    for _ in 0..8 {
        if fr == 0.0 {
            break;
        }
        let d = poly.deriv(r);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = r - poly.eval(r) / d;
        let fnext = poly.eval(next).abs();
        if !(fnext < fr) {
            break;
        }
        r = next;
        fr = fnext;
    }
    r
}

/// All real roots of `c`, with multiplicity.
///
/// Leading coefficients below [`DEGREE_REDUCTION_TOL`] relative to the largest
/// one are dropped first, so the cubic may be solved as a quadratic or a
/// linear equation.
pub fn real_roots_cubic(c: CubicCoeffs) -> Result<RootSet, RootError> {
    if ![c.a3, c.a2, c.a1, c.a0].iter().all(|v| v.is_finite()) {
        return Err(RootError::NonFinite);
    }
    let scale = c.max_abs();
    if scale <= f64::MIN_POSITIVE {
        return Err(RootError::Indeterminate);
    }
    let negligible = |a: f64| a.abs() <= DEGREE_REDUCTION_TOL * scale;

    let raw = if !negligible(c.a3) {
        cubic_raw(c.a3, c.a2, c.a1, c.a0)
    } else if !negligible(c.a2) {
        quadratic_raw(c.a2, c.a1, c.a0)
    } else if !negligible(c.a1) {
        vec![(-c.a0 / c.a1, 1)]
    } else {
        Vec::new()
    };
    let reduced = if negligible(c.a3) {
        CubicCoeffs::new(0.0, if negligible(c.a2) { 0.0 } else { c.a2 }, c.a1, c.a0)
    } else {
        c
    };
    Ok(RootSet::from_raw(&reduced, raw))
}

fn quadratic_raw(a: f64, b: f64, c: f64) -> Vec<(f64, u32)> {
    let disc = b * b - 4.0 * a * c;
    let mag = (b * b).max((4.0 * a * c).abs());
    if disc.abs() <= DISCRIMINANT_TOL * mag {
        return vec![(-b / (2.0 * a), 2)];
    }
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    if q == 0.0 {
        return vec![(0.0, 2)];
    }
    vec![(q / a, 1), (c / q, 1)]
}

fn cubic_raw(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<(f64, u32)> {
    let poly = CubicCoeffs::new(a3, a2, a1, a0);
    if a0 == 0.0 {
        // p = 0 is exact; forward deflation is exact too.
        let mut out = vec![(0.0, 1)];
        out.extend(quadratic_raw(a3, a2, a1));
        return out;
    }
    // Largest-magnitude real root, then backward deflation, which is stable
    // for that root even when the cubic is badly scaled.
    let r = polish(&poly, largest_root_closed_form(a3, a2, a1, a0));
    let q0 = -a0 / r;
    let q1 = (q0 - a1) / r;
    let mut out = vec![(r, 1)];
    out.extend(quadratic_raw(a3, q1, q0));
    out
}

/// Closed-form real root of largest magnitude (Cardano when one real root,
/// trigonometric form when three).
fn largest_root_closed_form(a3: f64, a2: f64, a1: f64, a0: f64) -> f64 {
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    // p = x - b/3 gives x^3 + P x + Q = 0.
    let shift = b / 3.0;
    let pp = c - b * shift;
    let qq = (2.0 * b * b * b - 9.0 * b * c) / 27.0 + d;
    if pp == 0.0 && qq == 0.0 {
        return -shift;
    }
    let disc = 4.0 * pp * pp * pp + 27.0 * qq * qq;
    let x = if disc >= 0.0 {
        let a = -(qq.abs() / 2.0 + (qq * qq / 4.0 + pp * pp * pp / 27.0).max(0.0).sqrt())
            .cbrt()
            .copysign(qq);
        if a == 0.0 {
            0.0
        } else {
            a - pp / (3.0 * a)
        }
    } else {
        let r = 2.0 * (-pp / 3.0).sqrt();
        let arg = ((3.0 * qq) / (pp * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .max_by(|u, v| u.abs().total_cmp(&v.abs()))
            .expect("three candidates")
            + shift
    };
    x - shift
}

/// Real slopes `p` of orthogonal trajectories through `(x, y)`: roots of
/// `y p^3 + (x - 2) p^2 - 1`. On the x-axis the cubic collapses to a
/// quadratic.
pub fn slopes_at(x: f64, y: f64) -> Result<RootSet, RootError> {
    real_roots_cubic(CubicCoeffs::slope_cubic(x, y))
}

const MAX_BRACKET_ITER: usize = 400;

/// Root of `f` inside `[lo, hi]` by Illinois false position, falling back to
/// bisection whenever an iteration fails to halve the bracket.
///
/// Stops once the bracket is no wider than `tol` and returns whichever end
/// has the smaller `|f|`.
pub fn bracketed_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(RootError::InvalidBracket { lo, hi });
    }
    let eval = |x: f64| {
        let fx = f(x);
        if fx.is_finite() {
            Ok(fx)
        } else {
            Err(RootError::NotFinite { x, fx })
        }
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    // -1: last update moved b, +1: moved a.
    let mut side = 0i8;
    for _ in 0..MAX_BRACKET_ITER {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = eval(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = eval(m)?;
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    // fa/fb may carry Illinois scaling, so compare fresh values.
    Ok(if f(a).abs() <= f(b).abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_complex_pair() {
        let set = real_roots_cubic(CubicCoeffs::new(2.0, -1.0, 0.0, -1.0)).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.roots()[0] - 1.0).abs() < 1e-14);
        assert_eq!(set.multiplicities(), &[1]);
    }

    #[test]
    fn reduces_to_quadratic() {
        let set = real_roots_cubic(CubicCoeffs::new(0.0, 1.0, 0.0, -1.0)).unwrap();
        assert_eq!(set.roots(), &[-1.0, 1.0]);
    }

    #[test]
    fn triple_root_at_zero() {
        let set = real_roots_cubic(CubicCoeffs::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(set.roots(), &[0.0]);
        assert_eq!(set.multiplicities(), &[3]);
    }

    #[test]
    fn shifted_triple_and_double_roots() {
        // (p - 1)^3
        let set = real_roots_cubic(CubicCoeffs::new(1.0, -3.0, 3.0, -1.0)).unwrap();
        assert_eq!(set.degree_count(), 3);
        assert_eq!(set.len(), 1);
        assert!((set.roots()[0] - 1.0).abs() < 1e-12);
        // (p - 1)^2 (p + 2) = p^3 - 3p + 2
        let set = real_roots_cubic(CubicCoeffs::new(1.0, 0.0, -3.0, 2.0)).unwrap();
        assert_eq!(set.multiplicities(), &[1, 2]);
        assert!((set.roots()[0] + 2.0).abs() < 1e-12);
        assert!((set.roots()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_distinct_roots() {
        // (p + 1)(p - 2)(p - 5)
        let set = real_roots_cubic(CubicCoeffs::new(1.0, -6.0, 3.0, 10.0)).unwrap();
        let want = [-1.0, 2.0, 5.0];
        assert_eq!(set.len(), 3);
        for (r, w) in set.roots().iter().zip(want) {
            assert!((r - w).abs() < 1e-12, "{r} vs {w}");
        }
    }

    #[test]
    fn indeterminate_and_constant() {
        assert_eq!(
            real_roots_cubic(CubicCoeffs::new(0.0, 0.0, 0.0, 0.0)),
            Err(RootError::Indeterminate)
        );
        assert!(real_roots_cubic(CubicCoeffs::new(0.0, 0.0, 0.0, 3.0))
            .unwrap()
            .is_empty());
        assert_eq!(
            real_roots_cubic(CubicCoeffs::new(f64::NAN, 0.0, 0.0, 1.0)),
            Err(RootError::NonFinite)
        );
    }

    #[test]
    fn slopes_at_examples() {
        let s = slopes_at(1.0, 2.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.roots()[0] - 1.0).abs() < 1e-14);
        assert_eq!(slopes_at(3.0, 0.0).unwrap().roots(), &[-1.0, 1.0]);
        assert!(slopes_at(1.0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn near_axis_keeps_small_roots_accurate() {
        let y = 1e-9;
        let set = slopes_at(6.0, y).unwrap();
        assert_eq!(set.len(), 3);
        let poly = CubicCoeffs::slope_cubic(6.0, y);
        for r in set.roots() {
            assert!(poly.eval(*r).abs() <= 1e-9 * poly.residual_scale(*r));
        }
        assert!((set.roots()[1] + 0.5).abs() < 1e-8);
        assert!((set.roots()[2] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn bracket_examples() {
        let r = bracketed_root(|t| t * t - 2.0 * t - 3.0, 2.0, 4.0, 1e-12).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        assert!(matches!(
            bracketed_root(|t| t - 5.0, 0.0, 1.0, 1e-12),
            Err(RootError::NoBracket { .. })
        ));
        let r = bracketed_root(|t| 2.0 - 4.0 * (1.0 + t * t).powf(-1.5), 0.5, 1.0, 1e-14).unwrap();
        // Brent's method to 1e-15 on the same function
        assert!((r - 0.766_420_936_540_88).abs() < 1e-12);
        assert!(matches!(
            bracketed_root(|t| t, 1.0, 1.0, 1e-12),
            Err(RootError::InvalidBracket { .. })
        ));
    }

    #[test]
    fn bracket_on_flat_sided_function() {
        let r = bracketed_root(|t: f64| t.powi(9) - 1e-9, -1.0, 3.0, 1e-13).unwrap();
        assert!((r - 1e-1).abs() < 1e-12);
    }
}
