//! Numerical laboratory for nonlocal equations of fractional p-Laplace type.
//!
//! The crate evaluates the principal-value operator
//!
//! ```text
//! Lu(x) = PV ∫ |u(x) − u(x+y)|^{p(x)−2} (u(x) − u(x+y)) K(x,y) dy
//! ```
//!
//! on grid functions and analytic profiles, solves Dirichlet problems by
//! nonlinear Gauss–Seidel relaxation, certifies the quantitative constants
//! of the oscillation lemma and measures Hölder decay of solutions.
//!
//! Dimensions 1 and 2 are supported. Positions are stored as `[f64; 2]`;
//! in one dimension the second coordinate is ignored and kept at zero.

pub mod certificates;
pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod inequalities;
pub mod kernel;
pub mod operator;
pub mod quadrature;
pub mod regularity;
pub mod solver;

pub use error::{Error, Result};

/// A position or offset. For `dim == 1` only the first coordinate is used.
pub type Point = [f64; 2];

/// Euclidean norm of `z` restricted to the first `dim` coordinates.
#[inline]
pub fn norm(z: Point, dim: usize) -> f64 {
    if dim == 1 {
        z[0].abs()
    } else {
        z[0].hypot(z[1])
    }
}

#[inline]
pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Surface measure of the unit sphere in dimension `dim` (2 for n = 1, 2π for n = 2).
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * std::f64::consts::PI
    }
}

/// Lebesgue measure of the unit ball.
pub fn unit_ball_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        std::f64::consts::PI
    }
}

/// Signed power `|t|^{q-1} t`, written as `sign(t) |t|^q` so that `t = 0` maps to 0
/// for every exponent.
#[inline]
pub fn signed_pow(t: f64, q: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(q)
    }
}

/// `|t|^{p-2} t`, the p-power map.
#[inline]
pub fn ppow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t
    } else if p == 3.0 {
        t * t.abs()
    } else {
        signed_pow(t, p - 1.0)
    }
}

/// Derivative of [`ppow`]: `(p-1)|t|^{p-2}` (infinite at `t = 0` when `p < 2`).
#[inline]
pub fn ppow_derivative(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if p == 3.0 {
        2.0 * t.abs()
    } else {
        (p - 1.0) * t.abs().powf(p - 2.0)
    }
}
