//! Shared floating-point comparison helpers.

/// Default relative tolerance for value comparisons.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor paired with [`REL_TOL`].
pub const ABS_FLOOR: f64 = 1e-12;

/// `|a - b| <= max(rel * max(|a|, |b|), abs)`.
pub fn approx_eq(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    let diff = (a - b).abs();
    diff <= (rel * a.abs().max(b.abs())).max(abs)
}

/// [`approx_eq`] with the crate defaults.
pub fn close(a: f64, b: f64) -> bool {
    approx_eq(a, b, REL_TOL, ABS_FLOOR)
}

/// Central-difference derivative of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
