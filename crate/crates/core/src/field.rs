//! Grid functions on `[-L, L]^n`, analytic profiles and exterior rules.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::{norm, Error, Point, Result};

/// Closed-form profiles used as test functions, exterior data and barriers.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticProfile {
    /// `((1 - |z|^2)^+)^2`
    Beta,
    /// `((1 - |z|^2)^+)^a`
    Getoor { exponent: f64 },
    /// `|z|^a`
    Power { exponent: f64 },
    /// `exp(1 - 1/(1 - |z|^2))` inside the unit ball, zero outside.
    Bump,
    /// `z_1 ((1 - |z|^2)^+)^2`, odd about the origin.
    Dipole,
    /// `inner(scale · z)`
    Dilated { inner: Box<AnalyticProfile>, scale: f64 },
}

#[inline]
fn r2(z: Point) -> f64 {
    z[0] * z[0] + z[1] * z[1]
}

impl AnalyticProfile {
    pub fn value(&self, z: Point) -> f64 {
        match self {
            AnalyticProfile::Beta => {
                let t = 1.0 - r2(z);
                if t > 0.0 {
                    t * t
                } else {
                    0.0
                }
            }
            AnalyticProfile::Getoor { exponent } => {
                let t = 1.0 - r2(z);
                if t > 0.0 {
                    t.powf(*exponent)
                } else {
                    0.0
                }
            }
            AnalyticProfile::Power { exponent } => r2(z).sqrt().powf(*exponent),
            AnalyticProfile::Bump => {
                let t = 1.0 - r2(z);
                if t > 0.0 {
                    (1.0 - 1.0 / t).exp()
                } else {
                    0.0
                }
            }
            AnalyticProfile::Dipole => z[0] * AnalyticProfile::Beta.value(z),
            AnalyticProfile::Dilated { inner, scale } => inner.value([scale * z[0], scale * z[1]]),
        }
    }

    /// `sup |profile|` over all positions.
    pub fn sup_abs(&self) -> f64 {
        match self {
            AnalyticProfile::Beta | AnalyticProfile::Getoor { .. } | AnalyticProfile::Bump => 1.0,
            AnalyticProfile::Power { .. } => f64::INFINITY,
            // max of t (1 - t^2)^2 on [0, 1] is attained at t = 1/sqrt(5)
            AnalyticProfile::Dipole => {
                let t = 1.0 / 5f64.sqrt();
                t * (1.0 - t * t).powi(2)
            }
            AnalyticProfile::Dilated { inner, .. } => inner.sup_abs(),
        }
    }

    /// First and second derivative in one dimension, where they exist.
    pub fn derivatives_1d(&self, x: f64) -> Option<(f64, f64)> {
        match self {
            AnalyticProfile::Beta => {
                if x.abs() >= 1.0 {
                    return Some((0.0, 0.0));
                }
                let t = 1.0 - x * x;
                Some((-4.0 * x * t, -4.0 + 12.0 * x * x))
            }
            AnalyticProfile::Getoor { exponent: a } => {
                if x.abs() >= 1.0 {
                    return None;
                }
                let t = 1.0 - x * x;
                let d1 = -2.0 * a * x * t.powf(a - 1.0);
                let d2 = -2.0 * a * t.powf(a - 1.0) + 4.0 * a * (a - 1.0) * x * x * t.powf(a - 2.0);
                Some((d1, d2))
            }
            AnalyticProfile::Power { exponent: a } => {
                if x == 0.0 {
                    return None;
                }
                let ax = x.abs();
                Some((a * ax.powf(a - 1.0) * x.signum(), a * (a - 1.0) * ax.powf(a - 2.0)))
            }
            AnalyticProfile::Bump => {
                if x.abs() >= 1.0 {
                    return Some((0.0, 0.0));
                }
                let t = 1.0 - x * x;
                let v = (1.0 - 1.0 / t).exp();
                // g = 1 - 1/t, g' = -2x/t^2, g'' = -2/t^2 - 8x^2/t^3
                let g1 = -2.0 * x / (t * t);
                let g2 = -2.0 / (t * t) - 8.0 * x * x / (t * t * t);
                Some((v * g1, v * (g2 + g1 * g1)))
            }
            AnalyticProfile::Dipole => {
                let (b1, b2) = AnalyticProfile::Beta.derivatives_1d(x)?;
                let b = AnalyticProfile::Beta.value([x, 0.0]);
                Some((b + x * b1, 2.0 * b1 + x * b2))
            }
            AnalyticProfile::Dilated { inner, scale } => {
                let (d1, d2) = inner.derivatives_1d(scale * x)?;
                Some((scale * d1, scale * scale * d2))
            }
        }
    }

    /// Radii along the ray `x + r d` where the profile is not smooth.
    pub fn ray_kinks(&self, x: Point, d: Point, r_lo: f64, r_hi: f64, out: &mut Vec<f64>) {
        match self {
            AnalyticProfile::Beta
            | AnalyticProfile::Getoor { .. }
            | AnalyticProfile::Bump
            | AnalyticProfile::Dipole => sphere_crossings(x, d, 1.0, r_lo, r_hi, out),
            AnalyticProfile::Power { .. } => sphere_crossings(x, d, 0.0, r_lo, r_hi, out),
            AnalyticProfile::Dilated { inner, scale } => {
                let mut tmp = Vec::new();
                inner.ray_kinks(
                    [scale * x[0], scale * x[1]],
                    d,
                    r_lo * scale,
                    r_hi * scale,
                    &mut tmp,
                );
                out.extend(tmp.into_iter().map(|r| r / scale));
            }
        }
    }
}

impl fmt::Display for AnalyticProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticProfile::Beta => write!(f, "beta"),
            AnalyticProfile::Getoor { exponent } => write!(f, "getoor({exponent})"),
            AnalyticProfile::Power { exponent } => write!(f, "power({exponent})"),
            AnalyticProfile::Bump => write!(f, "bump"),
            AnalyticProfile::Dipole => write!(f, "dipole"),
            AnalyticProfile::Dilated { inner, scale } => write!(f, "dilated({inner}, {scale})"),
        }
    }
}

/// Radii `r` in `(r_lo, r_hi)` with `|x + r d| = radius`, for a unit vector `d`.
pub fn sphere_crossings(x: Point, d: Point, radius: f64, r_lo: f64, r_hi: f64, out: &mut Vec<f64>) {
    let b = x[0] * d[0] + x[1] * d[1];
    let c = r2(x) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for r in [-b - sq, -b + sq] {
        if r > r_lo && r < r_hi {
            out.push(r);
        }
    }
}

/// How a grid function continues outside its box.
#[derive(Debug, Clone)]
pub enum ExteriorRule {
    Zero,
    Constant(f64),
    /// `left` where `z_1 < at`, `right` otherwise.
    Step { at: f64, left: f64, right: f64 },
    /// `2|2z|^η - 1`, the growth barrier of the oscillation lemma.
    GrowthBarrier { eta: f64 },
    Profile(AnalyticProfile),
    /// Continue by the value at the nearest box point.
    Clamp,
    /// `gain · (source(scale · z + origin) - offset)`; produced by rescaling.
    Source {
        source: Arc<GridFunction>,
        scale: f64,
        origin: Point,
        gain: f64,
        offset: f64,
    },
}

/// Growth model `|u(z)| <= base + coef |z|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub base: f64,
    pub coef: f64,
    pub exponent: f64,
}

impl Growth {
    fn bounded(base: f64) -> Self {
        Growth {
            base,
            coef: 0.0,
            exponent: 0.0,
        }
    }
}

impl ExteriorRule {
    /// Value outside the box. `Clamp` is resolved by [`GridFunction::value`].
    pub(crate) fn value(&self, z: Point) -> f64 {
        match self {
            ExteriorRule::Zero => 0.0,
            ExteriorRule::Constant(c) => *c,
            ExteriorRule::Step { at, left, right } => {
                if z[0] < *at {
                    *left
                } else {
                    *right
                }
            }
            ExteriorRule::GrowthBarrier { eta } => barrier_profile(z, *eta),
            ExteriorRule::Profile(p) => p.value(z),
            ExteriorRule::Clamp => unreachable!("clamp is resolved by the grid function"),
            ExteriorRule::Source {
                source,
                scale,
                origin,
                gain,
                offset,
            } => {
                let w = [scale * z[0] + origin[0], scale * z[1] + origin[1]];
                gain * (source.value(w) - offset)
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            ExteriorRule::Zero => 0.0,
            ExteriorRule::Constant(c) => c.abs(),
            ExteriorRule::Step { left, right, .. } => left.abs().max(right.abs()),
            ExteriorRule::GrowthBarrier { .. } => f64::INFINITY,
            ExteriorRule::Profile(p) => p.sup_abs(),
            ExteriorRule::Clamp => 0.0,
            ExteriorRule::Source {
                source,
                gain,
                offset,
                ..
            } => gain.abs() * (source.sup_bound + offset.abs()),
        }
    }

    fn growth(&self) -> Growth {
        match self {
            ExteriorRule::GrowthBarrier { eta } => Growth {
                base: 1.0,
                coef: 2f64.powf(1.0 + eta),
                exponent: *eta,
            },
            ExteriorRule::Profile(AnalyticProfile::Power { exponent }) => Growth {
                base: 0.0,
                coef: 1.0,
                exponent: *exponent,
            },
            ExteriorRule::Source {
                source,
                scale,
                origin,
                gain,
                offset,
            } => {
                let g = source.growth();
                if g.coef == 0.0 {
                    return Growth::bounded(gain.abs() * (g.base + offset.abs()));
                }
                let e = g.exponent;
                let c = 1f64.max(2f64.powf(e - 1.0));
                let o = norm(*origin, 2);
                Growth {
                    base: gain.abs() * (g.base + g.coef * c * o.powf(e) + offset.abs()),
                    coef: gain.abs() * g.coef * c * scale.powf(e),
                    exponent: e,
                }
            }
            other => Growth::bounded(other.sup_abs()),
        }
    }

    fn ray_kinks(&self, x: Point, d: Point, r_lo: f64, r_hi: f64, out: &mut Vec<f64>) {
        match self {
            ExteriorRule::Step { at, .. } => {
                if d[0] != 0.0 {
                    let r = (at - x[0]) / d[0];
                    if r > r_lo && r < r_hi {
                        out.push(r);
                    }
                }
            }
            ExteriorRule::GrowthBarrier { .. } => sphere_crossings(x, d, 0.0, r_lo, r_hi, out),
            ExteriorRule::Profile(p) => p.ray_kinks(x, d, r_lo, r_hi, out),
            ExteriorRule::Source {
                source,
                scale,
                origin,
                ..
            } => {
                let w = [scale * x[0] + origin[0], scale * x[1] + origin[1]];
                let mut tmp = Vec::new();
                source.ray_kinks(w, d, r_lo * scale, r_hi * scale, &mut tmp);
                out.extend(tmp.into_iter().map(|r| r / scale));
            }
            _ => {}
        }
    }
}

impl fmt::Display for ExteriorRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExteriorRule::Zero => write!(f, "zero"),
            ExteriorRule::Constant(c) => write!(f, "constant({c})"),
            ExteriorRule::Step { at, left, right } => write!(f, "step({at}, {left}, {right})"),
            ExteriorRule::GrowthBarrier { eta } => write!(f, "barrier({eta})"),
            ExteriorRule::Profile(p) => write!(f, "{p}"),
            ExteriorRule::Clamp => write!(f, "clamp"),
            ExteriorRule::Source { scale, origin, gain, offset, .. } => write!(
                f,
                "source(scale={scale}, origin=({}, {}), gain={gain}, offset={offset})",
                origin[0], origin[1]
            ),
        }
    }
}

/// `2|2z|^η - 1`.
#[inline]
pub fn barrier_profile(z: Point, eta: f64) -> f64 {
    2.0 * (2.0 * r2(z).sqrt()).powf(eta) - 1.0
}

/// Uniform Cartesian grid on `[-L, L]^n` with spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub nodes_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, spacing: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::domain(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0 && spacing > 0.0) {
            return Err(Error::domain("grid needs L > 0 and h > 0"));
        }
        let cells = 2.0 * half_width / spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 2.0 {
            return Err(Error::domain(format!(
                "2L/h must be an integer >= 2, got {cells}"
            )));
        }
        Ok(Grid {
            dim,
            half_width,
            spacing,
            nodes_per_axis: rounded as usize + 1,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    /// Multi-index `(i, j)` of a flat node index (`j = 0` in 1D).
    #[inline]
    pub fn multi_index(&self, idx: usize) -> (usize, usize) {
        if self.dim == 1 {
            (idx, 0)
        } else {
            (idx % self.nodes_per_axis, idx / self.nodes_per_axis)
        }
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        i + j * self.nodes_per_axis
    }

    pub fn position(&self, idx: usize) -> Point {
        let (i, j) = self.multi_index(idx);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    /// Flat index of the node at `z`, if `z` is a node.
    pub fn node_at(&self, z: Point) -> Option<usize> {
        let snap = |c: f64| -> Option<usize> {
            let t = (c + self.half_width) / self.spacing;
            let r = t.round();
            if (t - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.nodes_per_axis {
                Some(r as usize)
            } else {
                None
            }
        };
        let i = snap(z[0])?;
        let j = if self.dim == 2 { snap(z[1])? } else { 0 };
        Some(self.flat_index(i, j))
    }

    pub fn contains(&self, z: Point) -> bool {
        let l = self.half_width * (1.0 + 1e-12);
        z[0].abs() <= l && (self.dim == 1 || z[1].abs() <= l)
    }

    /// Distance from `z` to the box boundary (negative outside).
    pub fn margin(&self, z: Point) -> f64 {
        let m = self.half_width - z[0].abs();
        if self.dim == 1 {
            m
        } else {
            m.min(self.half_width - z[1].abs())
        }
    }

    fn axis_cell(&self, c: f64) -> (usize, f64) {
        let t = (c + self.half_width) / self.spacing;
        let r = t.round();
        if (t - r).abs() < 1e-9 {
            let i = (r.max(0.0) as usize).min(self.nodes_per_axis - 1);
            return if i == self.nodes_per_axis - 1 {
                (i - 1, 1.0)
            } else {
                (i, 0.0)
            };
        }
        let i = (t.floor().max(0.0) as usize).min(self.nodes_per_axis - 2);
        (i, (t - i as f64).clamp(0.0, 1.0))
    }
}

/// Node values on a [`Grid`] with an exterior rule and a global sup bound.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub exterior: ExteriorRule,
    /// An upper bound for `sup |u|` over all of `R^n`.
    pub sup_bound: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>, exterior: ExteriorRule) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::domain(format!(
                "expected {} node values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("grid values must be finite"));
        }
        let node_sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sup_bound = node_sup.max(exterior.sup_abs());
        Ok(GridFunction {
            grid,
            values,
            exterior,
            sup_bound,
        })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: Grid, exterior: ExteriorRule, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values, exterior)
    }

    /// Samples an analytic profile and uses it as its own exterior.
    pub fn from_profile(grid: Grid, profile: AnalyticProfile) -> Result<Self> {
        let p = profile.clone();
        Self::from_fn(grid, ExteriorRule::Profile(profile), |z| p.value(z))
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.node_count()], ExteriorRule::Constant(c))
    }

    /// Overrides the sup bound; it may not be smaller than the node maximum.
    pub fn with_sup_bound(mut self, bound: f64) -> Result<Self> {
        let node_sup = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if bound < node_sup {
            return Err(Error::domain(format!(
                "sup bound {bound} below node maximum {node_sup}"
            )));
        }
        self.sup_bound = bound;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn max_abs_nodes(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[inline]
    fn interpolate(&self, z: Point) -> f64 {
        let g = &self.grid;
        let (i, fx) = g.axis_cell(z[0]);
        if g.dim == 1 {
            let a = self.values[i];
            if fx == 0.0 {
                return a;
            }
            let b = self.values[i + 1];
            if fx == 1.0 {
                return b;
            }
            return a + fx * (b - a);
        }
        let (j, fy) = g.axis_cell(z[1]);
        let n = g.nodes_per_axis;
        let v00 = self.values[i + j * n];
        let v10 = self.values[i + 1 + j * n];
        let v01 = self.values[i + (j + 1) * n];
        let v11 = self.values[i + 1 + (j + 1) * n];
        let lo = v00 + fx * (v10 - v00);
        let hi = v01 + fx * (v11 - v01);
        lo + fy * (hi - lo)
    }

    /// Interpolation weights `(node, weight)` of a point inside the box, or of its
    /// clamped image; `None` outside the box unless the exterior rule is `Clamp`.
    pub fn stencil(&self, z: Point) -> Option<Vec<(usize, f64)>> {
        let g = &self.grid;
        let z = if g.contains(z) {
            z
        } else if matches!(self.exterior, ExteriorRule::Clamp) {
            let l = g.half_width;
            [z[0].clamp(-l, l), z[1].clamp(-l, l)]
        } else {
            return None;
        };
        let (i, fx) = g.axis_cell(z[0]);
        let mut out = Vec::with_capacity(4);
        let mut push = |idx: usize, w: f64| {
            if w != 0.0 {
                out.push((idx, w));
            }
        };
        if g.dim == 1 {
            push(i, 1.0 - fx);
            push(i + 1, fx);
        } else {
            let (j, fy) = g.axis_cell(z[1]);
            let n = g.nodes_per_axis;
            push(i + j * n, (1.0 - fx) * (1.0 - fy));
            push(i + 1 + j * n, fx * (1.0 - fy));
            push(i + (j + 1) * n, (1.0 - fx) * fy);
            push(i + 1 + (j + 1) * n, fx * fy);
        }
        Some(out)
    }

    /// `u(z)`: multilinear interpolation inside the box, the exterior rule outside.
    pub fn value(&self, z: Point) -> f64 {
        if self.grid.contains(z) {
            return self.interpolate(z);
        }
        match &self.exterior {
            ExteriorRule::Clamp => {
                let l = self.grid.half_width;
                self.interpolate([z[0].clamp(-l, l), z[1].clamp(-l, l)])
            }
            rule => rule.value(z),
        }
    }

    pub fn growth(&self) -> Growth {
        let mut g = self.exterior.growth();
        g.base = g.base.max(self.max_abs_nodes());
        g
    }

    /// Radii where `r ↦ u(x + r d)` may fail to be smooth: grid-line crossings,
    /// the box boundary and kinks of the exterior rule.
    pub fn ray_kinks(&self, x: Point, d: Point, r_lo: f64, r_hi: f64, out: &mut Vec<f64>) {
        let g = &self.grid;
        for axis in 0..g.dim {
            if d[axis].abs() < 1e-15 {
                continue;
            }
            // lines c_k = -L + k h with r = (c_k - x_a) / d_a in (r_lo, r_hi)
            let (a, b) = {
                let c1 = x[axis] + r_lo * d[axis];
                let c2 = x[axis] + r_hi * d[axis];
                (c1.min(c2), c1.max(c2))
            };
            let k_lo = (((a + g.half_width) / g.spacing).floor().max(0.0)) as usize;
            let k_hi = (((b + g.half_width) / g.spacing).ceil().max(0.0) as usize)
                .min(g.nodes_per_axis - 1);
            for k in k_lo..=k_hi {
                let r = (g.coord(k) - x[axis]) / d[axis];
                if r > r_lo && r < r_hi {
                    out.push(r);
                }
            }
        }
        self.exterior.ray_kinks(x, d, r_lo, r_hi, out);
    }

    /// Rows `x,value` (1D) or `x,y,value` (2D) in node order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.grid.dim == 1 {
            writeln!(w, "x,value")?;
        } else {
            writeln!(w, "x,y,value")?;
        }
        for (idx, v) in self.values.iter().enumerate() {
            let z = self.grid.position(idx);
            if self.grid.dim == 1 {
                writeln!(w, "{},{}", z[0], v)?;
            } else {
                writeln!(w, "{},{},{}", z[0], z[1], v)?;
            }
        }
        Ok(())
    }

    /// Reads a CSV written by [`GridFunction::write_csv`]; the exterior becomes [`ExteriorRule::Clamp`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::config("csv", "empty file"))??;
        let dim = match header.trim() {
            "x,value" => 1,
            "x,y,value" => 2,
            other => return Err(Error::config("csv", format!("unexpected header `{other}`"))),
        };
        let mut coords: Vec<Point> = Vec::new();
        let mut vals = Vec::new();
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::config("csv", format!("line {}: {e}", ln + 2)))?;
            if parts.len() != dim + 1 {
                return Err(Error::config("csv", format!("line {}: wrong column count", ln + 2)));
            }
            coords.push(if dim == 1 { [parts[0], 0.0] } else { [parts[0], parts[1]] });
            vals.push(parts[dim]);
        }
        let n = vals.len();
        let per_axis = if dim == 1 {
            n
        } else {
            (n as f64).sqrt().round() as usize
        };
        if per_axis < 3 || per_axis.pow(dim as u32) != n {
            return Err(Error::config("csv", "node count does not form a square grid"));
        }
        let l = -coords[0][0];
        let h = 2.0 * l / (per_axis - 1) as f64;
        let grid = Grid::new(dim, l, h)?;
        for (idx, z) in coords.iter().enumerate() {
            let want = grid.position(idx);
            if (want[0] - z[0]).abs() > 1e-9 || (want[1] - z[1]).abs() > 1e-9 {
                return Err(Error::config("csv", "nodes are not in grid order"));
            }
        }
        GridFunction::new(grid, vals, ExteriorRule::Clamp)
    }
}

/// Anything that can be integrated against a kernel along rays.
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn value(&self, z: Point) -> f64;
    fn ray_kinks(&self, x: Point, d: Point, r_lo: f64, r_hi: f64, out: &mut Vec<f64>);
}

impl Field for GridFunction {
    fn dim(&self) -> usize {
        self.grid.dim
    }
    fn value(&self, z: Point) -> f64 {
        GridFunction::value(self, z)
    }
    fn ray_kinks(&self, x: Point, d: Point, r_lo: f64, r_hi: f64, out: &mut Vec<f64>) {
        GridFunction::ray_kinks(self, x, d, r_lo, r_hi, out)
    }
}

/// An analytic profile viewed as a field on `R^n`.
#[derive(Debug, Clone)]
pub struct ProfileField {
    pub dim: usize,
    pub profile: AnalyticProfile,
}

impl Field for ProfileField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: Point) -> f64 {
        self.profile.value(z)
    }
    fn ray_kinks(&self, x: Point, d: Point, r_lo: f64, r_hi: f64, out: &mut Vec<f64>) {
        self.profile.ray_kinks(x, d, r_lo, r_hi, out)
    }
}
