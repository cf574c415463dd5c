//! The first-order form `M dy + N dp = 0` obtained by differentiating the
//! slope equation with respect to `y`, its integrating factor `mu(p)`, and
//! the resulting first integral.
//!
//! ```text
//! raw:     (p^3 + p) dy + (y p^2 + 2/p) dp = 0
//! mu(p):   1 / (p sqrt(1 + p^2))
//! scaled:  sqrt(1 + p^2) dy + (p y + 2/p^2) / sqrt(1 + p^2) dp = 0
//! F(y, p): (y - 2/p) sqrt(1 + p^2)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("{what} is singular at p = {p}")]
    Singular { what: &'static str, p: f64 },
    #[error("non-finite input ({y}, {p})")]
    NonFinite { y: f64, p: f64 },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("difference stencil [{lo}, {hi}] crosses p = 0")]
    StencilCrossesPole { lo: f64, hi: f64 },
}

/// Central-difference step for [`exactness_defect`] checks. A power of two
/// keeps `p +- h` exact; at `|N| ~ 200` (p = 0.1) rounding limits a 1e-6
/// step to about 2e-8, while this step stays below 4e-9 on `+-[0.1, 10]`.
pub const DEFECT_STEP: f64 = 1.0 / 32768.0;

type Component = fn(f64, f64) -> f64;

/// `M(y, p) dy + N(y, p) dp`, defined for `p != 0`.
#[derive(Clone)]
pub struct DifferentialForm {
    m: Component,
    n: Component,
    label: String,
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentialForm")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

fn check(y: f64, p: f64, what: &'static str) -> Result<(), FormError> {
    if !y.is_finite() || !p.is_finite() {
        return Err(FormError::NonFinite { y, p });
    }
    if p == 0.0 {
        return Err(FormError::Singular { what, p });
    }
    Ok(())
}

impl DifferentialForm {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn m(&self, y: f64, p: f64) -> Result<f64, FormError> {
        check(y, p, "M")?;
        Ok((self.m)(y, p))
    }

    pub fn n(&self, y: f64, p: f64) -> Result<f64, FormError> {
        check(y, p, "N")?;
        Ok((self.n)(y, p))
    }
}

/// `(p^3 + p) dy + (y p^2 + 2/p) dp`.
pub fn raw_form() -> DifferentialForm {
    DifferentialForm {
        m: |_, p| p * p * p + p,
        n: |y, p| y * p * p + 2.0 / p,
        label: "raw: (p^3+p) dy + (y p^2 + 2/p) dp".into(),
    }
}

/// The raw form multiplied by [`integrating_factor`].
pub fn scaled_form() -> DifferentialForm {
    DifferentialForm {
        m: |_, p| (1.0 + p * p).sqrt(),
        n: |y, p| (p * y + 2.0 / (p * p)) / (1.0 + p * p).sqrt(),
        label: "scaled: sqrt(1+p^2) dy + (p y + 2/p^2)/sqrt(1+p^2) dp".into(),
    }
}

/// `dM/dp - dN/dy` by central differences with step `h`. Zero for an exact
/// form.
pub fn exactness_defect(form: &DifferentialForm, y: f64, p: f64, h: f64) -> Result<f64, FormError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(FormError::BadStep(h));
    }
    check(y, p, "exactness defect")?;
    let (lo, hi) = (p - h, p + h);
    if lo <= 0.0 && hi >= 0.0 {
        return Err(FormError::StencilCrossesPole { lo, hi });
    }
    let dm_dp = (form.m(y, hi)? - form.m(y, lo)?) / (2.0 * h);
    let dn_dy = (form.n(y + h, p)? - form.n(y - h, p)?) / (2.0 * h);
    Ok(dm_dp - dn_dy)
}

/// `mu(p) = 1 / (p sqrt(1 + p^2))`.
pub fn integrating_factor(p: f64) -> Result<f64, FormError> {
    check(0.0, p, "integrating factor")?;
    Ok(1.0 / (p * (1.0 + p * p).sqrt()))
}

/// Value of the first integral `F(y, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue(pub f64);

impl PotentialValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `F(y, p) = (y - 2/p) sqrt(1 + p^2)`, constant along every solution.
pub fn potential(y: f64, p: f64) -> Result<PotentialValue, FormError> {
    check(y, p, "potential")?;
    Ok(PotentialValue((y - 2.0 / p) * (1.0 + p * p).sqrt()))
}

/// Member constant `C` of the trajectory through `(y, p)`.
///
/// The parametrized family takes `t = 1/p` over both signs, which maps the
/// level of `F` to `C sign(t)`; this undoes that sign.
pub fn trajectory_level(y: f64, p: f64) -> Result<f64, FormError> {
    Ok(potential(y, p)?.0 * p.signum())
}

/// Point of the level set `F = C` at slope `p`:
/// `y = 2/p + C/sqrt(1+p^2)`, `x = 1/p^2 - C p/sqrt(1+p^2)`.
pub fn solve_for_xy(p: f64, c: f64) -> Result<Point, FormError> {
    check(c, p, "level-set solution")?;
    let s = (1.0 + p * p).sqrt();
    Ok(Point {
        x: 1.0 / (p * p) - c * p / s,
        y: 2.0 / p + c / s,
    })
}
