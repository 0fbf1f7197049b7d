//! The operator `Lu(x)` evaluated through the symmetrized integrand
//! `δ(u,x,y) = ½ φ_p(u(x) − u(x+y)) + ½ φ_p(u(x) − u(x−y))`.
//!
//! The annulus `ρ < |y| < R_max` is integrated along rays; the ball `|y| < ρ` and
//! the far field `|y| > R_max` are bounded analytically and reported as error.

use rayon::prelude::*;

use crate::field::{AnalyticProfile, Field, GridFunction};
use crate::kernel::{ExponentField, KernelSpec};
use crate::quadrature::{gauss_legendre, ray_points, QuadratureConfig, RayPoint};
use crate::{add, norm, ppow, sphere_measure, sub, Error, Point, Result};

/// An axis-aligned box `[-L, L]^n` or a ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ball { center: Point, radius: f64 },
    Box { half_width: f64 },
}

impl Region {
    pub fn contains(&self, x: Point, dim: usize) -> bool {
        match *self {
            Region::Ball { center, radius } => norm(sub(x, center), dim) < radius,
            Region::Box { half_width } => {
                x[0].abs() < half_width && (dim == 1 || x[1].abs() < half_width)
            }
        }
    }
}

/// `δ(u, x, y)`; even in `y` by construction.
pub fn delta_sym<F: Field + ?Sized>(u: &F, x: Point, y: Point, p: f64) -> f64 {
    let ux = u.value(x);
    let a = ux - u.value(add(x, y));
    let b = ux - u.value(sub(x, y));
    0.5 * (ppow(a, p) + ppow(b, p))
}

/// A value of `Lu(x)` with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorValue {
    pub value: f64,
    pub error_bound: f64,
    /// Bound for the omitted ball `|y| < ρ`.
    pub inner_bound: f64,
    /// Bound for the omitted far field `|y| > R_max`.
    pub tail_bound: f64,
    /// `|Q - Q_coarse|`, zero unless error reporting is on.
    pub quadrature_estimate: f64,
}

/// Quadrature points `(y, w·K(x,y))` for the annulus at `x`, split at the kinks of `u`.
pub fn weighted_points(
    u: &GridFunction,
    x: Point,
    spec: &KernelSpec,
    quad: &QuadratureConfig,
) -> Vec<(Point, f64)> {
    let k = spec.at(x);
    let pts = ray_points(x, spec.dim, quad, |x, d, lo, hi, out| {
        u.ray_kinks(x, d, lo, hi, out);
        // support edge of the truncated family
        out.push(2.0 / spec.frame.scale);
    });
    pts.into_iter()
        .map(|RayPoint { y, r, w }| (y, w * k.eval_radius(r)))
        .collect()
}

fn annulus_value(u: &GridFunction, x: Point, spec: &KernelSpec, quad: &QuadratureConfig) -> f64 {
    let p = spec.p_at(x);
    let ux = u.value(x);
    weighted_points(u, x, spec, quad)
        .iter()
        .map(|&(y, w)| w * ppow(ux - u.value(add(x, y)), p))
        .sum()
}

/// Bounds on `|∇u|` and `|D²u|` from first and second differences at nodes within `radius` of `x`.
pub fn local_derivative_bounds(u: &GridFunction, x: Point, radius: f64) -> (f64, f64) {
    let g = &u.grid;
    let n = g.nodes_per_axis as isize;
    let h = g.spacing;
    let idx_range = |c: f64| -> (isize, isize) {
        let lo = ((c - radius + g.half_width) / h).floor() as isize;
        let hi = ((c + radius + g.half_width) / h).ceil() as isize;
        (lo.max(1), hi.min(n - 2))
    };
    let at = |i: isize, j: isize| u.values[(i + j * n) as usize];
    let (ilo, ihi) = idx_range(x[0]);
    if g.dim == 1 {
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for i in ilo..=ihi {
            let (l, c, r) = (at(i - 1, 0), at(i, 0), at(i + 1, 0));
            d1 = d1.max((r - c).abs()).max((c - l).abs());
            d2 = d2.max((r - 2.0 * c + l).abs());
        }
        return (d1 / h, d2 / (h * h));
    }
    let (jlo, jhi) = idx_range(x[1]);
    let (mut dx, mut dy, mut dxx, mut dyy, mut dxy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in jlo..=jhi {
        for i in ilo..=ihi {
            let c = at(i, j);
            dx = dx.max((at(i + 1, j) - c).abs()).max((c - at(i - 1, j)).abs());
            dy = dy.max((at(i, j + 1) - c).abs()).max((c - at(i, j - 1)).abs());
            dxx = dxx.max((at(i + 1, j) - 2.0 * c + at(i - 1, j)).abs());
            dyy = dyy.max((at(i, j + 1) - 2.0 * c + at(i, j - 1)).abs());
            dxy = dxy.max(
                (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)).abs() / 4.0,
            );
        }
    }
    let d1 = dx.hypot(dy) / h;
    let d2 = (dxx * dxx + dyy * dyy + 2.0 * dxy * dxy).sqrt() / (h * h);
    (d1, d2)
}

/// Bound for `|∫_{B_ρ} δ K|` given `|∇u| <= d1` and `|D²u| <= d2` near `x`.
pub fn inner_ball_bound(d1: f64, d2: f64, rho: f64, s: f64, p: f64, lambda_upper: f64, dim: usize) -> f64 {
    let omega = sphere_measure(dim);
    if p >= 2.0 {
        let e = p * (1.0 - s);
        0.5 * (p - 1.0) * d2 * (d1 + 2.0 * d2 * rho).powf(p - 2.0) * lambda_upper * omega * rho.powf(e) / e
    } else {
        let e = 2.0 * p - 2.0 - s * p;
        let c = 3f64.powf(p - 1.0) + 2f64.powf(p - 1.0);
        0.5 * c * d2.powf(p - 1.0) * lambda_upper * omega * rho.powf(e) / e
    }
}

/// Tail constants `(M', γ)` valid for `|y| >= r_far` in the kernel's frame.
fn frame_tail(spec: &KernelSpec, x: Point, r_far: f64) -> Result<f64> {
    let scale = spec.frame.scale;
    if scale * r_far < 0.25 {
        return Err(Error::domain(format!(
            "far radius {r_far} is inside the tail region of the rescaled kernel (scale {scale})"
        )));
    }
    let order = spec.s_at(x) * spec.p_at(x);
    // r^{n+sp} M (r|y|)^{-n-γ} = M r^{sp-γ} |y|^{-n-γ}
    Ok(spec.tail_m * scale.powf(order - spec.gamma))
}

/// Bound for `|∫_{|y|>r_far} φ_p(u(x) − u(x+y)) K|` from the growth model of `u`.
pub fn far_tail_bound(u: &GridFunction, x: Point, spec: &KernelSpec, r_far: f64) -> Result<f64> {
    let p = spec.p_at(x);
    let gamma = spec.gamma;
    let m = frame_tail(spec, x, r_far)?;
    let omega = sphere_measure(spec.dim);
    let g = u.growth();
    let a = u.value(x).abs() + g.base;
    if g.coef == 0.0 {
        return Ok(a.powf(p - 1.0) * m * omega * r_far.powf(-gamma) / gamma);
    }
    let e = g.exponent * (p - 1.0);
    if e >= gamma {
        return Err(Error::domain(format!(
            "exterior growth |y|^{} is not integrable against the kernel tail (gamma = {gamma})",
            g.exponent
        )));
    }
    let b = g.coef * 2f64.powf(g.exponent);
    let c = 1f64.max(2f64.powf(p - 2.0));
    Ok(c * m * omega
        * (a.powf(p - 1.0) * r_far.powf(-gamma) / gamma + b.powf(p - 1.0) * r_far.powf(e - gamma) / (gamma - e)))
}

fn check_point(u: &GridFunction, x: Point, spec: &KernelSpec, quad: &QuadratureConfig) -> Result<()> {
    if u.dim() != spec.dim {
        return Err(Error::domain("grid function and kernel dimensions differ"));
    }
    if !spec.singular_branch_ok(x) {
        return Err(Error::Hypothesis(format!(
            "p(x)(1 - s(x)) > 1 is required where p(x) < 2; at x = ({}, {}) p = {}, s = {}",
            x[0],
            x[1],
            spec.p_at(x),
            spec.s_at(x)
        )));
    }
    if u.grid.margin(x) < quad.rho * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "x = ({}, {}) is closer than rho = {} to the box boundary",
            x[0], x[1], quad.rho
        )));
    }
    Ok(())
}

/// `Lu(x)` with value and error bound.
pub fn evaluate_operator(
    u: &GridFunction,
    x: Point,
    spec: &KernelSpec,
    quad: &QuadratureConfig,
) -> Result<OperatorValue> {
    quad.validate()?;
    check_point(u, x, spec, quad)?;
    let value = annulus_value(u, x, spec, quad);
    let (d1, d2) = local_derivative_bounds(u, x, quad.rho + 2.0 * u.grid.spacing);
    let inner_bound = inner_ball_bound(
        d1,
        d2,
        quad.rho,
        spec.s_at(x),
        spec.p_at(x),
        spec.lambda_upper,
        spec.dim,
    );
    let tail_bound = far_tail_bound(u, x, spec, quad.r_far)?;
    let quadrature_estimate = if quad.report_error_bounds {
        (value - annulus_value(u, x, spec, &quad.coarsened())).abs()
    } else {
        0.0
    };
    Ok(OperatorValue {
        value,
        error_bound: inner_bound + tail_bound + quadrature_estimate,
        inner_bound,
        tail_bound,
        quadrature_estimate,
    })
}

/// Evaluates at many points; the result does not depend on the worker count.
pub fn evaluate_many(
    u: &GridFunction,
    points: &[Point],
    spec: &KernelSpec,
    quad: &QuadratureConfig,
) -> Result<Vec<OperatorValue>> {
    points
        .par_iter()
        .map(|&x| evaluate_operator(u, x, spec, quad))
        .collect()
}

/// `max |Lu(x) − f(x)|` over grid nodes in `region`.
pub fn residual_sup(
    u: &GridFunction,
    f: &GridFunction,
    region: Region,
    spec: &KernelSpec,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let quad = QuadratureConfig {
        report_error_bounds: false,
        ..*quad
    };
    let nodes: Vec<usize> = (0..u.grid.node_count())
        .filter(|&i| region.contains(u.grid.position(i), u.dim()))
        .collect();
    let res: Vec<f64> = nodes
        .par_iter()
        .map(|&i| {
            let x = u.grid.position(i);
            evaluate_operator(u, x, spec, &quad).map(|v| (v.value - f.value(x)).abs())
        })
        .collect::<Result<_>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// One cell of the s → 1 table.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCell {
    pub s: f64,
    pub x: Point,
    pub value: f64,
    /// `-Δ_p φ(x) = -(p−1)|φ'|^{p−2} φ''`
    pub comparator: f64,
    /// `(1−s) Lφ(x) / (−Δ_p φ(x))`, undefined where the comparator vanishes.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable {
    pub p: f64,
    pub cells: Vec<LimitCell>,
    /// `(s, (max − min)/|mean|)` of the defined ratios at each `s`.
    pub spreads: Vec<(f64, Option<f64>)>,
}

/// Inner cutoff of the analytic one-dimensional evaluation.
const LIMIT_INNER_RADIUS: f64 = 1e-6;
/// Far cutoff of the analytic one-dimensional evaluation.
const LIMIT_FAR_RADIUS: f64 = 1e8;

fn support_radius(profile: &AnalyticProfile) -> Option<f64> {
    match profile {
        AnalyticProfile::Power { .. } => None,
        AnalyticProfile::Dilated { inner, scale } => support_radius(inner).map(|r| r / scale),
        _ => Some(1.0),
    }
}

/// `Lφ(x)` in one dimension for a compactly supported profile, by graded
/// Gauss–Legendre quadrature with a second-order Taylor model on `|y| < 1e-6`.
pub fn analytic_operator_1d(profile: &AnalyticProfile, x: f64, spec: &KernelSpec) -> Result<f64> {
    if spec.dim != 1 {
        return Err(Error::domain("analytic evaluation is one-dimensional"));
    }
    let support = support_radius(profile)
        .ok_or_else(|| Error::domain(format!("profile {profile} is not compactly supported")))?;
    let (d1, d2) = profile
        .derivatives_1d(x)
        .ok_or_else(|| Error::domain(format!("profile {profile} is not smooth at {x}")))?;
    let xp = [x, 0.0];
    let k = spec.at(xp);
    let (s, p) = (k.s, k.p);
    let phi = |t: f64| profile.value([t, 0.0]);
    let fx = phi(x);
    let rho = LIMIT_INNER_RADIUS;
    let kscale = k.eval_radius(rho) * rho.powf(k.order);
    let inner = if d1 != 0.0 {
        let e = p * (1.0 - s);
        -(p - 1.0) * d1.abs().powf(p - 2.0) * d2 * rho.powf(e) / e
    } else {
        let e = 2.0 * p - 2.0 - s * p;
        -2.0 * ppow(0.5 * d2, p) * rho.powf(e) / e
    } * kscale;

    let (gx, gw) = gauss_legendre(8);
    let exit = support + x.abs();
    let mut breaks = Vec::new();
    let q = 2f64.powf(0.125);
    let mut r = rho;
    while r < exit {
        breaks.push(r);
        r *= q;
    }
    for kink in [support - x, support + x] {
        if kink > rho && kink < exit {
            breaks.push(kink);
        }
    }
    breaks.push(exit);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut middle = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, wt) in gx.iter().zip(&gw) {
            let r = mid + half * t;
            let delta = 0.5 * (ppow(fx - phi(x + r), p) + ppow(fx - phi(x - r), p));
            middle += half * wt * 2.0 * delta * k.eval_radius(r);
        }
    }
    // beyond the support both differences equal φ(x)
    let mut far = 0.0;
    let mut a = exit;
    while a < LIMIT_FAR_RADIUS {
        let b = (a * 2f64.powf(0.25)).min(LIMIT_FAR_RADIUS);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, wt) in gx.iter().zip(&gw) {
            far += half * wt * k.eval_radius(mid + half * t);
        }
        a = b;
    }
    let big = LIMIT_FAR_RADIUS;
    far += k.eval_radius(big) * big / (s * p);
    Ok(inner + middle + 2.0 * ppow(fx, p) * far)
}

/// Ratio table `(1−s)Lφ(x)/(−Δ_pφ(x))` over an s-ladder (one dimension, constant exponents).
pub fn plimit_ratio(
    profile: &AnalyticProfile,
    spec: &KernelSpec,
    s_list: &[f64],
    points: &[Point],
) -> Result<LimitTable> {
    if !spec.exponents.is_constant() {
        return Err(Error::domain("the s-limit study needs constant exponents"));
    }
    if spec.dim != 1 {
        return Err(Error::domain("the s-limit study is one-dimensional"));
    }
    let p = spec.exponents.p_at([0.0, 0.0]);
    let mut cells = Vec::new();
    let mut spreads = Vec::new();
    for &s in s_list {
        let mut sspec = spec.clone();
        sspec.exponents = ExponentField::constant(s, p)?;
        let row: Vec<LimitCell> = points
            .par_iter()
            .map(|&x| {
                let (d1, d2) = profile
                    .derivatives_1d(x[0])
                    .ok_or_else(|| Error::domain(format!("profile not smooth at {}", x[0])))?;
                let lap = if d1 == 0.0 && p != 2.0 {
                    if p > 2.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (p - 1.0) * d1.abs().powf(p - 2.0) * d2
                };
                let value = analytic_operator_1d(profile, x[0], &sspec)?;
                let comparator = -lap;
                let ratio = if lap.is_finite() && lap.abs() > 1e-14 {
                    Some((1.0 - s) * value / comparator)
                } else {
                    None
                };
                Ok(LimitCell { s, x, value, comparator, ratio })
            })
            .collect::<Result<_>>()?;
        let defined: Vec<f64> = row.iter().filter_map(|c| c.ratio).collect();
        let spread = if defined.len() >= 2 {
            let mean = defined.iter().sum::<f64>() / defined.len() as f64;
            let max = defined.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = defined.iter().cloned().fold(f64::INFINITY, f64::min);
            Some((max - min) / mean.abs())
        } else {
            None
        };
        spreads.push((s, spread));
        cells.extend(row);
    }
    Ok(LimitTable { p, cells, spreads })
}
