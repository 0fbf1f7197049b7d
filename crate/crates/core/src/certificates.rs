//! Certificates for the constants `(k, η, θ)` of the oscillation lemma.
//!
//! For a fixed `x` in `B_{3/4}` the left-hand side is a short sum of integrals of
//! the barrier `β(x) = ((1 − |x|²)^+)²` and of `(|8y|^η − 1)^{p−1}` against the
//! kernel; the right-hand side is the closed-form lower bound
//! `2^{1−p} λ δ / 2^{n+sp}` for `2^{1−p} inf_{|A|>δ} ∫_A K`.

use std::fmt;

use rayon::prelude::*;

use crate::field::sphere_crossings;
use crate::kernel::KernelSpec;
use crate::operator::inner_ball_bound;
use crate::quadrature::{directions, radial_rule, QuadratureConfig};
use crate::{add, norm, ppow, sphere_measure, unit_ball_measure, Error, Point, Result};

pub const BETA_HALF: f64 = 9.0 / 16.0;
pub const BETA_THREE_QUARTERS: f64 = 49.0 / 256.0;

/// `sup |∇β| = 8 / (3√3)`, attained at `|x| = 1/√3`.
pub const BETA_LIPSCHITZ: f64 = 1.539_600_717_839_002;
/// `sup ‖D²β‖ = 8`, attained at `|x| = 1`.
pub const BETA_HESSIAN: f64 = 8.0;

/// Inner radius below which the `β` integrals are bounded instead of integrated.
const INNER_RADIUS: f64 = 1e-12;

/// Inner cutoff: `1e-12` on the degenerate branch; on the singular branch the
/// remainder decays only like `r^{p−1−sp}`, so the cutoff shrinks until that factor is `1e-12`.
fn inner_radius(spec: &KernelSpec, x: Point, branch: Branch) -> f64 {
    match branch {
        Branch::Degenerate => INNER_RADIUS,
        Branch::Singular => {
            let e = spec.p_at(x) - 1.0 - spec.s_at(x) * spec.p_at(x);
            10f64.powf(-12.0 / e).clamp(1e-300, INNER_RADIUS)
        }
    }
}
/// Outer radius beyond which the tail is bounded through `(M, γ)`.
const FAR_RADIUS: f64 = 1e8;

/// Default number of sample points per ring (2D) or along the segment (1D).
pub const DEFAULT_SAMPLE_DENSITY: usize = 13;

const SEARCH_DEPTH: i32 = 40;

pub fn beta(x: Point) -> f64 {
    let t = 1.0 - (x[0] * x[0] + x[1] * x[1]);
    if t > 0.0 {
        t * t
    } else {
        0.0
    }
}

/// `β(x) − β(x+y)` without cancellation for small `y`: with `a = 1 − |x|²`,
/// `b = 1 − |x+y|²` the difference is `(2x·y + |y|²)(a + b)` while both are positive.
pub fn beta_difference(x: Point, y: Point) -> f64 {
    let a = 1.0 - (x[0] * x[0] + x[1] * x[1]);
    let z = add(x, y);
    let b = 1.0 - (z[0] * z[0] + z[1] * z[1]);
    if a <= 0.0 || b <= 0.0 {
        return beta(x) - beta(z);
    }
    let gap = 2.0 * (x[0] * y[0] + x[1] * y[1]) + (y[0] * y[0] + y[1] * y[1]);
    gap * (a + b)
}

/// `|β(x) − β(x+y)|^{p−2} (β(x) − β(x+y))`.
pub fn beta_pdiff(x: Point, y: Point, p: f64) -> f64 {
    ppow(beta_difference(x, y), p)
}

/// `θ = k (β(1/2) − β(3/4)) = 95 k / 256`.
pub fn theta_of_k(k: f64) -> Result<f64> {
    if !(k > 0.0 && k <= 0.5) {
        return Err(Error::domain(format!("k must lie in (0, 1/2], got {k}")));
    }
    Ok(k * 95.0 / 256.0)
}

/// `2^{1−p(x)} λ δ / 2^{n + s(x)p(x)}`.
pub fn rhs_lower_bound(spec: &KernelSpec, x: Point, delta_measure: f64) -> Result<f64> {
    if !(delta_measure > 0.0) {
        return Err(Error::domain(format!("measure threshold must be positive, got {delta_measure}")));
    }
    let p = spec.p_at(x);
    let s = spec.s_at(x);
    Ok(2f64.powf(1.0 - p) * spec.lambda * delta_measure / 2f64.powf(spec.dim as f64 + s * p))
}

/// Which form of the inequality applies at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `p(x) >= 2`: three terms with the principal-value barrier integral.
    Degenerate,
    /// `p(x) < 2`: two terms, requires `p(x)(1 − s(x)) > 1`.
    Singular,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Degenerate => "p>=2",
            Branch::Singular => "p<2",
        })
    }
}

/// One left-hand-side term with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
    pub error: f64,
}

fn branch_at(spec: &KernelSpec, x: Point) -> Result<Branch> {
    let p = spec.p_at(x);
    if p >= 2.0 {
        return Ok(Branch::Degenerate);
    }
    let s = spec.s_at(x);
    if p * (1.0 - s) <= 1.0 {
        return Err(Error::Hypothesis(format!(
            "p(x)(1 - s(x)) > 1 is required where p(x) < 2; at x = ({}, {}) p = {p}, s = {s}",
            x[0], x[1]
        )));
    }
    Ok(Branch::Singular)
}

fn tail_constant(spec: &KernelSpec, x: Point) -> f64 {
    let scale = spec.frame.scale;
    spec.tail_m * scale.powf((spec.s_at(x) * spec.p_at(x) - spec.gamma).min(0.0))
}

/// The barrier integral at one resolution (without prefactors).
/// Degenerate branch: `PV ∫_{x+y∈B_1} φ_p(β(x) − β(x+y)) K`;
/// singular branch: `∫ |β(x) − β(x+y)|^{p−1} K`.
fn barrier_integral(spec: &KernelSpec, x: Point, branch: Branch, n_radial: usize, n_angular: usize) -> f64 {
    let k = spec.at(x);
    let p = k.p;
    let bx = beta(x);
    let r_in = inner_radius(spec, x, branch);
    let dirs = directions(spec.dim, n_angular);
    let mut total = 0.0;
    let mut radial = Vec::new();
    let mut kinks = Vec::new();
    for dir in &dirs {
        let d = dir.d;
        let mut acc = 0.0;
        // inner ring: symmetrized so that the odd part cancels pointwise.
        // β is radial, so β(x ± y) = β(x) on |x ± y| = |x|: the integrand has a cusp there.
        let level = norm(x, spec.dim);
        kinks.clear();
        sphere_crossings(x, d, level, r_in, 0.25, &mut kinks);
        sphere_crossings(x, [-d[0], -d[1]], level, r_in, 0.25, &mut kinks);
        radial.clear();
        radial_rule(r_in, 0.25, 0.25, n_radial, &kinks, &mut radial);
        for &(r, w) in &radial {
            let y = [r * d[0], r * d[1]];
            let a = beta_difference(x, y);
            let b = beta_difference(x, [-y[0], -y[1]]);
            let g = match branch {
                Branch::Degenerate => 0.5 * (ppow(a, p) + ppow(b, p)),
                Branch::Singular => 0.5 * (a.abs().powf(p - 1.0) + b.abs().powf(p - 1.0)),
            };
            acc += w * jac(spec.dim, r) * g * k.eval_radius(r);
        }
        kinks.clear();
        sphere_crossings(x, d, 1.0, 0.25, FAR_RADIUS, &mut kinks);
        let exit = kinks.iter().cloned().fold(f64::INFINITY, f64::min);
        let exit = if exit.is_finite() { exit } else { 0.25 };
        if exit > 0.25 {
            let mut cusps = vec![2.0 / spec.frame.scale];
            sphere_crossings(x, d, level, 0.25, exit, &mut cusps);
            radial.clear();
            radial_rule(0.25, exit, exit, n_radial, &cusps, &mut radial);
            for &(r, w) in &radial {
                let diff = beta_difference(x, [r * d[0], r * d[1]]);
                let g = match branch {
                    Branch::Degenerate => ppow(diff, p),
                    Branch::Singular => diff.abs().powf(p - 1.0),
                };
                acc += w * jac(spec.dim, r) * g * k.eval_radius(r);
            }
        }
        if branch == Branch::Singular {
            // outside B_1: the difference is β(x)
            radial.clear();
            radial_rule(exit, FAR_RADIUS, FAR_RADIUS, n_radial, &[2.0 / spec.frame.scale], &mut radial);
            let c = bx.powf(p - 1.0);
            for &(r, w) in &radial {
                acc += w * jac(spec.dim, r) * c * k.eval_radius(r);
            }
        }
        total += dir.weight * acc;
    }
    total
}

#[inline]
fn jac(dim: usize, r: f64) -> f64 {
    if dim == 1 {
        1.0
    } else {
        r
    }
}

/// Analytic bound for the parts of the barrier integral not integrated.
fn barrier_remainder(spec: &KernelSpec, x: Point, branch: Branch) -> f64 {
    let k = spec.at(x);
    let (s, p) = (k.s, k.p);
    let omega = sphere_measure(spec.dim);
    match branch {
        Branch::Degenerate => inner_ball_bound(
            BETA_LIPSCHITZ,
            BETA_HESSIAN,
            inner_radius(spec, x, branch),
            s,
            p,
            spec.lambda_upper,
            spec.dim,
        ),
        Branch::Singular => {
            let e = p - 1.0 - s * p;
            let inner = omega * spec.lambda_upper * BETA_LIPSCHITZ.powf(p - 1.0) * inner_radius(spec, x, branch).powf(e) / e;
            let far = beta(x).powf(p - 1.0) * tail_constant(spec, x) * omega * FAR_RADIUS.powf(-spec.gamma)
                / spec.gamma;
            inner + far
        }
    }
}

/// `∫_{|y|>=1/4} g(|y|) K(x, y) dy` for a radial `g`, at one resolution.
fn radial_tail_integral(spec: &KernelSpec, x: Point, n_radial: usize, g: impl Fn(f64) -> f64) -> f64 {
    let k = spec.at(x);
    let mut radial = Vec::new();
    radial_rule(0.25, FAR_RADIUS, FAR_RADIUS, n_radial, &[2.0 / spec.frame.scale], &mut radial);
    let sum: f64 = radial
        .iter()
        .map(|&(r, w)| w * jac(spec.dim, r) * g(r) * k.eval_radius(r))
        .sum();
    sphere_measure(spec.dim) * sum
}

fn check_eta(spec: &KernelSpec, x: Point, eta: f64) -> Result<()> {
    let p = spec.p_at(x);
    if !(eta > 0.0) {
        return Err(Error::domain(format!("eta must be positive, got {eta}")));
    }
    if p > 1.0 && eta * (p - 1.0) >= spec.gamma {
        return Err(Error::domain(format!(
            "eta = {eta} must be below gamma/(p(x)-1) = {} for the tail integral to converge",
            spec.gamma / (p - 1.0)
        )));
    }
    Ok(())
}

/// `∫_{|y|>=1/4} (|8y|^η − 1)^{p−1} K` with its error bound.
fn barrier_growth_integral(spec: &KernelSpec, x: Point, eta: f64, quad: &QuadratureConfig) -> (f64, f64) {
    let p = spec.p_at(x);
    let g = |r: f64| ((8.0 * r).powf(eta) - 1.0).powf(p - 1.0);
    let fine = radial_tail_integral(spec, x, quad.n_radial, g);
    let coarse = radial_tail_integral(spec, x, quad.coarsened().n_radial, g);
    let e = eta * (p - 1.0);
    let tail = sphere_measure(spec.dim) * tail_constant(spec, x) * 8f64.powf(e) * FAR_RADIUS.powf(e - spec.gamma)
        / (spec.gamma - e);
    (fine, (fine - coarse).abs() + tail)
}

/// `∫_{|y|>=1/4} |kβ(x) + 2(|8y|^η − 1)|^{p−1} K` with its error bound.
fn shifted_growth_integral(spec: &KernelSpec, x: Point, k: f64, eta: f64, quad: &QuadratureConfig) -> (f64, f64) {
    let p = spec.p_at(x);
    let kb = k * beta(x);
    let g = |r: f64| (kb + 2.0 * ((8.0 * r).powf(eta) - 1.0)).abs().powf(p - 1.0);
    let fine = radial_tail_integral(spec, x, quad.n_radial, g);
    let coarse = radial_tail_integral(spec, x, quad.coarsened().n_radial, g);
    let e = eta * (p - 1.0);
    let c = 1f64.max(2f64.powf(p - 2.0));
    let m = sphere_measure(spec.dim) * tail_constant(spec, x);
    let tail = c * m
        * (k.powf(p - 1.0) * FAR_RADIUS.powf(-spec.gamma) / spec.gamma
            + (2.0 * 8f64.powf(eta)).powf(p - 1.0) * FAR_RADIUS.powf(e - spec.gamma) / (spec.gamma - e));
    (fine, (fine - coarse).abs() + tail)
}

/// Prefactor of the pure growth term: `2^{p−1}` for constant exponents, `2^{p(x)}` otherwise.
fn growth_prefactor(spec: &KernelSpec, p: f64) -> f64 {
    if spec.exponents.is_constant() {
        2f64.powf(p - 1.0)
    } else {
        2f64.powf(p)
    }
}

/// Barrier integral with its error, independent of `(k, η)`.
#[derive(Debug, Clone, Copy)]
struct BarrierPart {
    branch: Branch,
    value: f64,
    error: f64,
}

fn barrier_part(spec: &KernelSpec, x: Point, quad: &QuadratureConfig) -> Result<BarrierPart> {
    let branch = branch_at(spec, x)?;
    let fine = barrier_integral(spec, x, branch, quad.n_radial, quad.n_angular);
    let c = quad.coarsened();
    let coarse = barrier_integral(spec, x, branch, c.n_radial, c.n_angular);
    Ok(BarrierPart {
        branch,
        value: fine,
        error: (fine - coarse).abs() + barrier_remainder(spec, x, branch),
    })
}

fn assemble_terms(
    spec: &KernelSpec,
    x: Point,
    k: f64,
    eta: f64,
    barrier: &BarrierPart,
    quad: &QuadratureConfig,
) -> Result<Vec<Term>> {
    check_eta(spec, x, eta)?;
    let p = spec.p_at(x);
    let kp = k.powf(p - 1.0);
    let (g, ge) = barrier_growth_integral(spec, x, eta, quad);
    let c3 = growth_prefactor(spec, p);
    Ok(match barrier.branch {
        Branch::Degenerate => {
            let c = 2f64.powf(p - 2.0);
            let (sg, sge) = shifted_growth_integral(spec, x, k, eta, quad);
            vec![
                Term {
                    name: "barrier_pv",
                    value: c * kp * barrier.value,
                    error: c * kp * barrier.error,
                },
                Term {
                    name: "shifted_growth",
                    value: c * sg,
                    error: c * sge,
                },
                Term {
                    name: "growth",
                    value: c3 * g,
                    error: c3 * ge,
                },
            ]
        }
        Branch::Singular => {
            let c = 3f64.powf(p - 1.0) + 2f64.powf(p - 1.0);
            vec![
                Term {
                    name: "barrier_abs",
                    value: c * kp * barrier.value,
                    error: c * kp * barrier.error,
                },
                Term {
                    name: "growth",
                    value: c3 * g,
                    error: c3 * ge,
                },
            ]
        }
    })
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k <= 0.5) {
        return Err(Error::domain(format!("k must lie in (0, 1/2], got {k}")));
    }
    Ok(())
}

/// The left-hand-side terms at `x` for the branch selected by `p(x)`.
pub fn lhs_terms(spec: &KernelSpec, x: Point, k: f64, eta: f64, quad: &QuadratureConfig) -> Result<Vec<Term>> {
    check_k(k)?;
    let barrier = barrier_part(spec, x, quad)?;
    assemble_terms(spec, x, k, eta, &barrier, quad)
}

/// Like [`lhs_terms`], but errors unless `p(x)` selects `expected`.
pub fn lhs_terms_for_branch(
    spec: &KernelSpec,
    x: Point,
    k: f64,
    eta: f64,
    expected: Branch,
    quad: &QuadratureConfig,
) -> Result<Vec<Term>> {
    let got = branch_at(spec, x)?;
    if got != expected {
        return Err(Error::domain(format!("p(x) = {} selects the {got} branch, not {expected}", spec.p_at(x))));
    }
    lhs_terms(spec, x, k, eta, quad)
}

/// `ε(x) = min(2, 2^{p(x)−1}) ∫_{|y|>=1/4} (|8y|^η − 1)^{p(x)−1} K(x, y) dy`.
pub fn epsilon_threshold(spec: &KernelSpec, x: Point, eta: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_eta(spec, x, eta)?;
    let p = spec.p_at(x);
    Ok(2f64.min(2f64.powf(p - 1.0)) * barrier_growth_integral(spec, x, eta, quad).0)
}

/// Margin record at one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMargin {
    pub x: Point,
    pub branch: Branch,
    pub terms: Vec<Term>,
    pub rhs: f64,
    /// `rhs − Σ (value + error)`
    pub margin: f64,
    /// Conservative `ε(x)` (integral reduced by its error bound).
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantCertificate {
    pub k: f64,
    pub eta: f64,
    pub delta_measure: f64,
    pub theta: f64,
    /// Terms at `x_worst`.
    pub lhs_terms: Vec<Term>,
    /// Right-hand side at `x_worst`.
    pub rhs_bound: f64,
    /// Smallest certified margin over the sample.
    pub margin: f64,
    pub branch: Branch,
    pub x_worst: Point,
    /// Smallest conservative `ε(x)` over the sample.
    pub epsilon: f64,
    pub points: Vec<PointMargin>,
}

/// Deterministic sample of `B_{3/4}` including the `|x| = 3/4` shell.
pub fn sample_points(dim: usize, density: usize) -> Vec<Point> {
    let density = density.max(3);
    if dim == 1 {
        return (0..density)
            .map(|i| [-0.75 + 1.5 * i as f64 / (density - 1) as f64, 0.0])
            .collect();
    }
    let mut pts = vec![[0.0, 0.0]];
    for &r in &[0.25, 0.5, 0.75] {
        for j in 0..density {
            let t = std::f64::consts::TAU * j as f64 / density as f64;
            pts.push([r * t.cos(), r * t.sin()]);
        }
    }
    pts
}

fn point_margin(
    spec: &KernelSpec,
    x: Point,
    k: f64,
    eta: f64,
    delta: f64,
    barrier: &BarrierPart,
    quad: &QuadratureConfig,
) -> Result<PointMargin> {
    let terms = assemble_terms(spec, x, k, eta, barrier, quad)?;
    let rhs = rhs_lower_bound(spec, x, delta)?;
    let lhs: f64 = terms.iter().map(|t| t.value + t.error).sum();
    let p = spec.p_at(x);
    let (g, ge) = barrier_growth_integral(spec, x, eta, quad);
    Ok(PointMargin {
        x,
        branch: barrier.branch,
        terms,
        rhs,
        margin: rhs - lhs,
        epsilon: 2f64.min(2f64.powf(p - 1.0)) * (g - ge).max(0.0),
    })
}

fn check_search_inputs(spec: &KernelSpec, delta: f64, quad: &QuadratureConfig) -> Result<()> {
    let ball2 = unit_ball_measure(spec.dim) * 2f64.powi(spec.dim as i32);
    if !(delta > 0.0 && delta < ball2) {
        return Err(Error::domain(format!("measure threshold must lie in (0, |B_2|) = (0, {ball2}), got {delta}")));
    }
    if quad.n_radial < 8 || quad.n_angular < 8 {
        return Err(Error::config("quadrature", "resolutions must be at least 8"));
    }
    Ok(())
}

/// Evaluation context for a fixed sample: barrier integrals are computed once.
struct Sample {
    xs: Vec<Point>,
    barriers: Vec<BarrierPart>,
}

impl Sample {
    fn new(spec: &KernelSpec, density: usize, quad: &QuadratureConfig) -> Result<Self> {
        let xs = sample_points(spec.dim, density);
        let barriers = xs
            .par_iter()
            .map(|&x| barrier_part(spec, x, quad))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample { xs, barriers })
    }

    fn margins(&self, spec: &KernelSpec, k: f64, eta: f64, delta: f64, quad: &QuadratureConfig) -> Result<Vec<PointMargin>> {
        self.xs
            .par_iter()
            .zip(self.barriers.par_iter())
            .map(|(&x, b)| point_margin(spec, x, k, eta, delta, b, quad))
            .collect()
    }
}

fn worst(points: &[PointMargin]) -> usize {
    let mut best = 0;
    for (i, pm) in points.iter().enumerate() {
        if pm.margin < points[best].margin {
            best = i;
        }
    }
    best
}

fn certificate_from(k: f64, eta: f64, delta: f64, points: Vec<PointMargin>) -> Result<ConstantCertificate> {
    let w = worst(&points);
    let epsilon = points.iter().map(|p| p.epsilon).fold(f64::INFINITY, f64::min);
    Ok(ConstantCertificate {
        k,
        eta,
        delta_measure: delta,
        theta: theta_of_k(k)?,
        lhs_terms: points[w].terms.clone(),
        rhs_bound: points[w].rhs,
        margin: points[w].margin,
        branch: points[w].branch,
        x_worst: points[w].x,
        epsilon,
        points,
    })
}

/// Largest `η` on the search ladder: `½ γ / (p_1 − 1)`.
pub fn eta_ceiling(spec: &KernelSpec) -> f64 {
    0.5 * spec.gamma / (spec.exponents.p1 - 1.0)
}

/// Certificate data at a fixed `(k, η)`, whether or not the margin is positive.
pub fn certificate_at(
    spec: &KernelSpec,
    delta: f64,
    k: f64,
    eta: f64,
    density: usize,
    quad: &QuadratureConfig,
) -> Result<ConstantCertificate> {
    check_search_inputs(spec, delta, quad)?;
    check_k(k)?;
    let sample = Sample::new(spec, density, quad)?;
    certificate_from(k, eta, delta, sample.margins(spec, k, eta, delta, quad)?)
}

/// Descends `k = 2^{-i}` and, for each `k`, `η = η_0 2^{-j}` until every sample
/// point has a positive certified margin; returns the first admissible pair.
pub fn find_admissible_constants(
    spec: &KernelSpec,
    delta: f64,
    density: usize,
    quad: &QuadratureConfig,
) -> Result<ConstantCertificate> {
    check_search_inputs(spec, delta, quad)?;
    let sample = Sample::new(spec, density, quad)?;
    let eta0 = eta_ceiling(spec);
    let eta_min = eta0 * 2f64.powi(-SEARCH_DEPTH);
    let positive = |pts: &[PointMargin]| pts.iter().all(|p| p.margin > 0.0);
    let mut last = None;
    for i in 1..=SEARCH_DEPTH {
        let k = 2f64.powi(-i);
        let floor = sample.margins(spec, k, eta_min, delta, quad)?;
        if !positive(&floor) {
            last = Some(floor);
            continue;
        }
        for j in 0..=SEARCH_DEPTH {
            let eta = eta0 * 2f64.powi(-j);
            let pts = if j == SEARCH_DEPTH {
                floor.clone()
            } else {
                sample.margins(spec, k, eta, delta, quad)?
            };
            if positive(&pts) {
                log::info!("admissible pair k = 2^-{i}, eta = {eta}");
                return certificate_from(k, eta, delta, pts);
            }
        }
    }
    let pts = last.expect("search ran at least once");
    let w = &pts[worst(&pts)];
    let dominant = w
        .terms
        .iter()
        .max_by(|a, b| (a.value + a.error).partial_cmp(&(b.value + b.error)).unwrap())
        .map(|t| format!("{} = {:.3e} (error {:.1e})", t.name, t.value, t.error))
        .unwrap_or_default();
    Err(Error::SearchExhausted(format!(
        "no admissible (k, eta) down to 2^-{SEARCH_DEPTH}; at x = ({}, {}) rhs = {:.3e}, dominant term {dominant}",
        w.x[0], w.x[1], w.rhs
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad() -> QuadratureConfig {
        QuadratureConfig {
            rho: 0.01,
            r_outer: 4.0,
            r_far: 64.0,
            n_radial: 16,
            n_angular: 16,
            report_error_bounds: true,
        }
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta([0.0, 0.0]), 1.0);
        assert_eq!(beta([1.0, 0.0]), 0.0);
        assert_eq!(beta([0.0, 1.5]), 0.0);
        assert_eq!(beta([0.5, 0.0]), BETA_HALF);
        assert_eq!(beta([0.75, 0.0]), BETA_THREE_QUARTERS);
        assert_eq!(beta_pdiff([0.3, 0.1], [0.0, 0.0], 2.5), 0.0);
    }

    #[test]
    fn theta_examples() {
        assert_relative_eq!(theta_of_k(0.5).unwrap(), 95.0 / 512.0);
        assert_relative_eq!(theta_of_k(0.5).unwrap(), 0.18555, epsilon = 1e-5);
        assert_eq!(theta_of_k(0.25).unwrap() * 2.0, theta_of_k(0.5).unwrap());
        assert!(theta_of_k(0.0).is_err());
        assert!(theta_of_k(0.6).is_err());
    }

    #[test]
    fn rhs_examples() {
        let spec = KernelSpec::model(1, 0.5, 3.0).unwrap();
        let r = rhs_lower_bound(&spec, [0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(r, 2f64.powf(-4.5), max_relative = 1e-15);
        assert_relative_eq!(r, 0.04419, epsilon = 1e-5);
        assert_relative_eq!(rhs_lower_bound(&spec, [0.0, 0.0], 2.0).unwrap(), 2.0 * r, max_relative = 1e-15);
        assert!(rhs_lower_bound(&spec, [0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn lipschitz_constant_of_beta() {
        let t = 1.0 / 3f64.sqrt();
        assert_relative_eq!(4.0 * t * (1.0 - t * t), BETA_LIPSCHITZ, max_relative = 1e-15);
    }

    #[test]
    fn eta_cap_is_enforced() {
        let spec = KernelSpec::model(1, 0.5, 3.0).unwrap();
        assert!(epsilon_threshold(&spec, [0.0, 0.0], 0.75, &quad()).is_err());
        assert!(epsilon_threshold(&spec, [0.0, 0.0], 0.7, &quad()).unwrap() > 0.0);
    }

    #[test]
    fn singular_branch_refusal() {
        let spec = KernelSpec::model(1, 0.5, 1.3).unwrap();
        assert!(matches!(
            find_admissible_constants(&spec, 1.0, 5, &quad()),
            Err(Error::Hypothesis(_))
        ));
        let ok = KernelSpec::model(1, 0.5, 3.0).unwrap();
        assert!(lhs_terms_for_branch(&ok, [0.0, 0.0], 0.1, 0.05, Branch::Singular, &quad()).is_err());
    }
}
