//! Ray-based quadrature on `{ρ < |y| < R_max}`: a symmetric direction set times
//! geometrically graded radial Gauss–Legendre panels, split at caller-supplied kinks.

use std::sync::OnceLock;

use crate::field::Grid;
use crate::{sphere_measure, Error, Point, Result};

/// Gauss–Legendre points per radial panel.
pub const PANEL_ORDER: usize = 4;

/// Default far truncation radius; beyond it the tail is bounded analytically.
pub const DEFAULT_FAR_RADIUS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Inner cutoff `ρ`; the ball `|y| < ρ` is bounded, not integrated.
    pub rho: f64,
    /// Outer radius `R` of the finely graded middle region.
    pub r_outer: f64,
    /// Far radius `R_max`; `[R, R_max]` is integrated on a coarser grading.
    pub r_far: f64,
    /// Radial panels per factor-16 range of radii.
    pub n_radial: usize,
    /// Directions on the full circle (2D only; even).
    pub n_angular: usize,
    /// Add the coarse-vs-fine quadrature difference to the error bound.
    pub report_error_bounds: bool,
}

impl QuadratureConfig {
    /// `ρ = 2h`, `R = max(4, 2L)`, `R_max = 64`, 16 radial panels, 64 directions.
    pub fn for_grid(grid: &Grid) -> Self {
        let r_outer = (2.0 * grid.half_width).max(4.0);
        QuadratureConfig {
            rho: 2.0 * grid.spacing,
            r_outer,
            r_far: DEFAULT_FAR_RADIUS.max(r_outer),
            n_radial: 16,
            n_angular: 64,
            report_error_bounds: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < self.r_outer && self.r_far >= self.r_outer) {
            return Err(Error::config(
                "quadrature",
                format!(
                    "need 0 < rho < R <= R_max, got rho={}, R={}, R_max={}",
                    self.rho, self.r_outer, self.r_far
                ),
            ));
        }
        if self.n_radial < 8 || self.n_angular < 8 {
            return Err(Error::config("quadrature", "resolutions must be at least 8"));
        }
        if !self.n_angular.is_multiple_of(2) {
            return Err(Error::config("quadrature", "n_angular must be even"));
        }
        Ok(())
    }

    /// Both resolutions doubled.
    pub fn refined(&self) -> Self {
        QuadratureConfig {
            n_radial: self.n_radial * 2,
            n_angular: self.n_angular * 2,
            ..*self
        }
    }

    /// Both resolutions halved; used for the internal error estimate only.
    pub(crate) fn coarsened(&self) -> Self {
        QuadratureConfig {
            n_radial: (self.n_radial / 2).max(2),
            n_angular: ((self.n_angular / 2).max(2) + 1) & !1,
            ..*self
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// A unit direction with its share of the sphere measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub d: Point,
    pub weight: f64,
}

/// A direction set closed under `d ↦ -d`: `±1` in 1D, `n_angular` midpoint angles in 2D.
pub fn directions(dim: usize, n_angular: usize) -> Vec<Direction> {
    if dim == 1 {
        return vec![
            Direction { d: [1.0, 0.0], weight: 1.0 },
            Direction { d: [-1.0, 0.0], weight: 1.0 },
        ];
    }
    let m = n_angular;
    let w = sphere_measure(2) / m as f64;
    (0..m)
        .map(|j| {
            let t = (j as f64 + 0.5) * std::f64::consts::TAU / m as f64;
            Direction { d: [t.cos(), t.sin()], weight: w }
        })
        .collect()
}

/// Geometric breakpoints from `a` to `b` with ratio at most `ratio`.
fn geometric_breaks(a: f64, b: f64, ratio: f64, out: &mut Vec<f64>) {
    let count = ((b / a).ln() / ratio.ln()).ceil().max(1.0) as usize;
    let q = (b / a).powf(1.0 / count as f64);
    let mut r = a;
    for _ in 0..count {
        out.push(r);
        r *= q;
    }
}

/// Radial Gauss–Legendre nodes `(r, w)` on `[rho, r_far]`, graded with ratio
/// `16^{1/n_radial}` up to `r_outer` and its square beyond, split at `kinks`.
pub fn radial_rule(
    rho: f64,
    r_outer: f64,
    r_far: f64,
    n_radial: usize,
    kinks: &[f64],
    out: &mut Vec<(f64, f64)>,
) {
    let q = 16f64.powf(1.0 / n_radial as f64);
    let mut breaks = Vec::with_capacity(4 * n_radial + kinks.len() + 2);
    geometric_breaks(rho, r_outer, q, &mut breaks);
    if r_far > r_outer {
        geometric_breaks(r_outer, r_far, q * q, &mut breaks);
    }
    breaks.push(r_far);
    breaks.extend(kinks.iter().copied().filter(|&r| r > rho && r < r_far));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (nodes, weights) = panel_rule();
    let mut prev = breaks[0];
    for &b in &breaks[1..] {
        if b - prev <= 1e-13 * b {
            continue;
        }
        let half = 0.5 * (b - prev);
        let mid = 0.5 * (b + prev);
        for (t, w) in nodes.iter().zip(weights) {
            out.push((mid + half * t, half * w));
        }
        prev = b;
    }
}

/// One quadrature point `y` with weight `w` (direction weight · radial weight · `r^{n-1}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPoint {
    pub y: Point,
    pub r: f64,
    pub w: f64,
}

/// All quadrature points of `{ρ < |y| < R_max}` for base point `x`. `kinks(x, d, lo, hi, out)`
/// reports radii where the integrand is not smooth along the ray `x + r d`.
pub fn ray_points(
    x: Point,
    dim: usize,
    quad: &QuadratureConfig,
    mut kinks: impl FnMut(Point, Point, f64, f64, &mut Vec<f64>),
) -> Vec<RayPoint> {
    let dirs = directions(dim, quad.n_angular);
    let mut pts = Vec::new();
    let mut ks = Vec::new();
    let mut radial = Vec::new();
    for dir in &dirs {
        ks.clear();
        radial.clear();
        kinks(x, dir.d, quad.rho, quad.r_far, &mut ks);
        radial_rule(quad.rho, quad.r_outer, quad.r_far, quad.n_radial, &ks, &mut radial);
        for &(r, w) in &radial {
            let jac = if dim == 1 { 1.0 } else { r };
            pts.push(RayPoint {
                y: [r * dir.d[0], r * dir.d[1]],
                r,
                w: dir.weight * w * jac,
            });
        }
    }
    pts
}
