//! Orthogonal trajectories of the line family `y = m x - 2m - m^3`.
//!
//! * [`model`]: line family, closed-form trajectory curves, ODE residuals.
//! * [`roots`]: real roots of the slope cubic and a bracketing solver.
//! * [`exact_ode`]: the integrating-factor construction and its potential.
//! * [`tracer`]: arc-length integration of the implicit slope equation.
//! * [`geometry`]: line/curve intersections and conic fitting.
//! * [`plot`], [`cli`]: SVG figures and the `ortho-traj` command line.
//! * [`validation`]: named verification suites shared by the CLI.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod exact_ode;
pub mod geometry;
pub mod model;
pub mod plot;
pub mod roots;
pub mod tol;
pub mod tracer;
pub mod validation;

pub use model::{
    curve_point, curve_slope, curve_velocity, cusp_parameters, line_at, ode_c_residual,
    ode_o_residual, orthogonal_foot, CurveSample, Line, LineFamily, ModelError, Point, Slope,
    TrajectoryCurve,
};
