//! Dirichlet problems `Lu = f` in a ball or box with exterior data, solved by
//! nonlinear Gauss–Seidel relaxation with a safeguarded per-node root find.
//! Also the rescaling maps of the dyadic argument.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::field::{ExteriorRule, Grid, GridFunction};
use crate::kernel::KernelSpec;
use crate::operator::{residual_sup, weighted_points, Region};
use crate::quadrature::QuadratureConfig;
use crate::{add, ppow, ppow_derivative, Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Lexicographic,
    /// Checkerboard colouring; each colour is updated in parallel from a snapshot.
    RedBlack,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Target for `max |Lu − f|` over the free nodes.
    pub tolerance: f64,
    /// Target for the largest node change in one sweep.
    pub change_tolerance: f64,
    pub max_sweeps: usize,
    pub sweep_order: SweepOrder,
    /// Per-node root tolerance.
    pub root_tolerance: f64,
}

impl SolveConfig {
    pub fn new(tolerance: f64) -> Self {
        SolveConfig {
            tolerance,
            change_tolerance: tolerance,
            max_sweeps: 20_000,
            sweep_order: SweepOrder::Lexicographic,
            root_tolerance: tolerance * 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.change_tolerance > 0.0) {
            return Err(Error::config("solve", "tolerances must be positive"));
        }
        if !(self.root_tolerance > 0.0 && self.root_tolerance < self.tolerance) {
            return Err(Error::config("solve", "root_tolerance must lie in (0, tolerance)"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::config("solve", "max_sweeps must be positive"));
        }
        Ok(())
    }
}

/// `Lu = f` on the free nodes (grid nodes inside `domain`); every other node
/// of `data` and its exterior rule are the prescribed exterior values.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub spec: KernelSpec,
    pub domain: Region,
    pub rhs: GridFunction,
    /// Initial guess on the free nodes, exterior data elsewhere.
    pub data: GridFunction,
}

impl DirichletProblem {
    pub fn free_nodes(&self) -> Vec<usize> {
        let g = &self.data.grid;
        (0..g.node_count())
            .filter(|&i| self.domain.contains(g.position(i), g.dim))
            .collect()
    }

    pub fn validate(&self, quad: &QuadratureConfig) -> Result<()> {
        quad.validate()?;
        let g = &self.data.grid;
        if g.dim != self.spec.dim || self.rhs.grid.dim != g.dim {
            return Err(Error::domain("problem dimensions differ"));
        }
        let free = self.free_nodes();
        if free.is_empty() {
            return Err(Error::domain("the domain contains no grid nodes"));
        }
        if quad.rho < (g.dim as f64).sqrt() * g.spacing {
            return Err(Error::config(
                "quadrature",
                format!("rho = {} must be at least sqrt(n) h = {}", quad.rho, (g.dim as f64).sqrt() * g.spacing),
            ));
        }
        for &i in &free {
            let x = g.position(i);
            if g.margin(x) < quad.rho {
                return Err(Error::domain("the domain must stay rho away from the box boundary"));
            }
            if !self.spec.singular_branch_ok(x) {
                return Err(Error::Hypothesis(format!(
                    "p(x)(1 - s(x)) > 1 is required where p(x) < 2; violated at x = ({}, {})",
                    x[0], x[1]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub sweeps: usize,
    pub last_change: f64,
    /// `max |Lu − f|` over the free nodes, recomputed by the operator module.
    pub residual_sup: f64,
    pub free_nodes: usize,
    pub runtime_secs: f64,
}

/// A quadrature point whose value depends on free nodes.
#[derive(Debug, Clone)]
struct DynamicPoint {
    w: f64,
    offset: f64,
    terms: Vec<(usize, f64)>,
}

/// Frozen-neighbour representation of the equation at one free node:
/// `Σ W φ_p(t − v) = f` with `v` either fixed or an affine function of free values.
#[derive(Debug, Clone)]
struct NodeEquation {
    node: usize,
    p: f64,
    f: f64,
    fixed: Vec<(f64, f64)>,
    dynamic: Vec<DynamicPoint>,
}

impl NodeEquation {
    fn build(problem: &DirichletProblem, is_free: &[bool], node: usize, quad: &QuadratureConfig) -> Self {
        let u = &problem.data;
        let x = u.grid.position(node);
        let mut fixed = Vec::new();
        let mut dynamic = Vec::new();
        for (y, w) in weighted_points(u, x, &problem.spec, quad) {
            if w == 0.0 {
                continue;
            }
            let z = add(x, y);
            match u.stencil(z) {
                None => fixed.push((u.value(z), w)),
                Some(st) => {
                    let mut offset = 0.0;
                    let mut terms = Vec::new();
                    for (i, c) in st {
                        if is_free[i] {
                            terms.push((i, c));
                        } else {
                            offset += c * u.values[i];
                        }
                    }
                    if terms.is_empty() {
                        fixed.push((offset, w));
                    } else {
                        dynamic.push(DynamicPoint { w, offset, terms });
                    }
                }
            }
        }
        // merge equal fixed values
        fixed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(fixed.len());
        for (v, w) in fixed {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        NodeEquation {
            node,
            p: problem.spec.p_at(x),
            f: problem.rhs.value(x),
            fixed: merged,
            dynamic,
        }
    }

    /// Current `(v, W)` pairs given the free values in `values`.
    fn pairs(&self, values: &[f64], out: &mut Vec<(f64, f64)>) {
        out.clear();
        out.extend_from_slice(&self.fixed);
        for d in &self.dynamic {
            let v = d.offset + d.terms.iter().map(|&(i, c)| c * values[i]).sum::<f64>();
            out.push((v, d.w));
        }
    }
}

fn eval_sum(pairs: &[(f64, f64)], p: f64, t: f64) -> (f64, f64) {
    let mut g = 0.0;
    let mut dg = 0.0;
    for &(v, w) in pairs {
        g += w * ppow(t - v, p);
        dg += w * ppow_derivative(t - v, p);
    }
    (g, dg)
}

/// Root of `t ↦ Σ W φ_p(t − v) − f` (strictly increasing, onto ℝ) by bisection
/// accelerated with Newton steps that stay inside the bracket.
pub fn node_root(pairs: &[(f64, f64)], p: f64, f: f64, root_tolerance: f64, guess: Option<f64>) -> f64 {
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(v, _) in pairs {
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if pairs.is_empty() {
        return guess.unwrap_or(0.0);
    }
    let g = |t: f64| eval_sum(pairs, p, t).0 - f;
    let mut delta = (1.0 + f.abs()).powf(1.0 / (p - 1.0));
    let (mut lo, mut hi) = (vmin - delta, vmax + delta);
    while g(lo) > 0.0 {
        delta *= 2.0;
        lo = vmin - delta;
    }
    while g(hi) < 0.0 {
        delta *= 2.0;
        hi = vmax + delta;
    }
    // with f = 0 the root lies in [min v, max v]
    if f == 0.0 {
        lo = lo.max(vmin);
        hi = hi.min(vmax);
        if lo == hi {
            return lo;
        }
    }
    let mut t = guess.map(|g| g.clamp(lo, hi)).unwrap_or(0.5 * (lo + hi));
    let mut last_step = hi - lo;
    for _ in 0..400 {
        let (gv, dg) = eval_sum(pairs, p, t);
        let gv = gv - f;
        if gv == 0.0 {
            return t;
        }
        if gv < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= root_tolerance {
            break;
        }
        let newton = t - gv / dg;
        let step = (newton - t).abs();
        if dg.is_finite() && dg > 0.0 && newton > lo && newton < hi && step <= 0.5 * last_step {
            last_step = step;
            t = newton;
            if step <= 0.25 * root_tolerance {
                return t;
            }
        } else {
            last_step = hi - lo;
            t = 0.5 * (lo + hi);
        }
    }
    0.5 * (lo + hi)
}

struct System {
    equations: Vec<NodeEquation>,
}

impl System {
    fn new(problem: &DirichletProblem, quad: &QuadratureConfig) -> Self {
        let free = problem.free_nodes();
        let mut is_free = vec![false; problem.data.grid.node_count()];
        for &i in &free {
            is_free[i] = true;
        }
        let equations = free
            .par_iter()
            .map(|&i| NodeEquation::build(problem, &is_free, i, quad))
            .collect();
        System { equations }
    }

    fn update(&self, eq: &NodeEquation, values: &[f64], tol: f64, buf: &mut Vec<(f64, f64)>) -> f64 {
        eq.pairs(values, buf);
        node_root(buf, eq.p, eq.f, tol, Some(values[eq.node]))
    }

    fn sweep(&self, values: &mut [f64], order: SweepOrder, tol: f64, grid: &Grid) -> f64 {
        let mut change = 0.0f64;
        match order {
            SweepOrder::Lexicographic => {
                let mut buf = Vec::new();
                for eq in &self.equations {
                    let t = self.update(eq, values, tol, &mut buf);
                    change = change.max((t - values[eq.node]).abs());
                    values[eq.node] = t;
                }
            }
            SweepOrder::RedBlack => {
                for colour in 0..2 {
                    let snapshot = values.to_vec();
                    let updates: Vec<(usize, f64)> = self
                        .equations
                        .par_iter()
                        .filter(|eq| {
                            let (i, j) = grid.multi_index(eq.node);
                            (i + j) % 2 == colour
                        })
                        .map_init(Vec::new, |buf, eq| (eq.node, self.update(eq, &snapshot, tol, buf)))
                        .collect();
                    for (node, t) in updates {
                        change = change.max((t - values[node]).abs());
                        values[node] = t;
                    }
                }
            }
        }
        change
    }

    fn residual(&self, values: &[f64]) -> f64 {
        self.equations
            .par_iter()
            .map_init(Vec::new, |buf, eq| {
                eq.pairs(values, buf);
                (eval_sum(buf, eq.p, values[eq.node]).0 - eq.f).abs()
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Relaxes until the sweep change and the residual both meet their targets.
pub fn solve_dirichlet(
    problem: &DirichletProblem,
    config: &SolveConfig,
    quad: &QuadratureConfig,
) -> Result<(GridFunction, SolveReport)> {
    config.validate()?;
    problem.validate(quad)?;
    let start = Instant::now();
    let system = System::new(problem, quad);
    let mut values = problem.data.values.clone();
    let grid = problem.data.grid;
    let mut change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for sweep in 1..=config.max_sweeps {
        change = system.sweep(&mut values, config.sweep_order, config.root_tolerance, &grid);
        if change < config.change_tolerance {
            residual = system.residual(&values);
            if residual <= config.tolerance {
                let u = GridFunction::new(grid, values, problem.data.exterior.clone())?;
                let region = problem.domain;
                let checked = residual_sup(&u, &problem.rhs, region, &problem.spec, quad)?;
                log::info!("converged after {sweep} sweeps, residual {checked:.3e}");
                return Ok((
                    u,
                    SolveReport {
                        sweeps: sweep,
                        last_change: change,
                        residual_sup: checked,
                        free_nodes: system.equations.len(),
                        runtime_secs: start.elapsed().as_secs_f64(),
                    },
                ));
            }
        }
        if sweep % 500 == 0 {
            log::debug!("sweep {sweep}: change {change:.3e}");
        }
    }
    if !residual.is_finite() {
        residual = system.residual(&values);
    }
    let last = GridFunction::new(grid, values, problem.data.exterior.clone())?;
    Err(Error::NonConvergence {
        sweeps: config.max_sweeps,
        last_change: change,
        residual,
        last_iterate: Box::new(last),
    })
}

/// Grid of `v(x) = g(u(r x + x_0))`: spacing `h / r`, nodes mapping onto nodes of `u`.
pub fn rescaled_grid(grid: &Grid, x0: Point, r: f64) -> Result<Grid> {
    let reach = grid.half_width - x0[0].abs().max(if grid.dim == 2 { x0[1].abs() } else { 0.0 });
    let m = ((reach / grid.spacing) + 1e-9).floor();
    if m < 1.0 {
        return Err(Error::domain("rescaling centre is too close to the box boundary"));
    }
    let h = grid.spacing / r;
    Grid::new(grid.dim, m * h, h)
}

fn check_level(u: &GridFunction, x0: Point, k_level: i32) -> Result<f64> {
    if k_level < 0 {
        return Err(Error::domain(format!("k_level must be non-negative, got {k_level}")));
    }
    let r = 2f64.powi(-k_level);
    if u.grid.margin(x0) < r * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "B_{r}(x0) is not inside the grid box"
        )));
    }
    Ok(r)
}

/// `v(x) = 2^{αk+1}(u(2^{−k} x + x_0) − m)` with `u` as exterior source. When
/// global bounds `b_0 <= u <= a_0` are given, the sup bound of `v` follows from them.
pub fn apply_rescaling(
    u: &GridFunction,
    x0: Point,
    k_level: i32,
    alpha: f64,
    m: f64,
    bounds: Option<(f64, f64)>,
) -> Result<GridFunction> {
    let r = check_level(u, x0, k_level)?;
    let gain = 2f64.powf(alpha * k_level as f64 + 1.0);
    let grid = rescaled_grid(&u.grid, x0, r)?;
    let exterior = ExteriorRule::Source {
        source: Arc::new(u.clone()),
        scale: r,
        origin: x0,
        gain,
        offset: m,
    };
    let v = GridFunction::from_fn(grid, exterior, |x| {
        gain * (u.value([r * x[0] + x0[0], r * x[1] + x0[1]]) - m)
    })?;
    match bounds {
        Some((a0, b0)) => v.with_sup_bound(gain * (a0 - m).abs().max((b0 - m).abs())),
        None => Ok(v),
    }
}

/// `f̃(x) = 2^{(αk+1)(p(z)−1) − k s(z)p(z)} f(z)` with `z = 2^{−k} x + x_0`, on the grid of
/// [`apply_rescaling`].
pub fn rescale_rhs(
    f: &GridFunction,
    spec: &KernelSpec,
    x0: Point,
    k_level: i32,
    alpha: f64,
) -> Result<GridFunction> {
    let r = check_level(f, x0, k_level)?;
    let grid = rescaled_grid(&f.grid, x0, r)?;
    let k = k_level as f64;
    GridFunction::from_fn(grid, ExteriorRule::Zero, |x| {
        let z = [r * x[0] + x0[0], r * x[1] + x0[1]];
        let p = spec.p_at(z);
        let s = spec.s_at(z);
        2f64.powf((alpha * k + 1.0) * (p - 1.0) - k * s * p) * f.value(z)
    })
}

/// `(2‖u‖ + 2^{(p₁−1)/(p₀−1)} max{(‖f‖/ε)^{1/(p₀−1)}, (‖f‖/ε)^{1/(p₁−1)}})^{−1}`, or 1 when both sups vanish.
pub fn normalization_factor(u_sup: f64, f_sup: f64, p0: f64, p1: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain("eps must be positive"));
    }
    if u_sup < 0.0 || f_sup < 0.0 {
        return Err(Error::domain("sup norms must be non-negative"));
    }
    if !(p0 > 1.0 && p1 >= p0) {
        return Err(Error::domain("need 1 < p0 <= p1"));
    }
    if u_sup == 0.0 && f_sup == 0.0 {
        return Ok(1.0);
    }
    let q = f_sup / eps;
    let fpart = q.powf(1.0 / (p0 - 1.0)).max(q.powf(1.0 / (p1 - 1.0)));
    Ok(1.0 / (2.0 * u_sup + 2f64.powf((p1 - 1.0) / (p0 - 1.0)) * fpart))
}
