//! Plain-text run configuration: `section.key = value` lines, `#` comments.
//!
//! Every key must be known; typed accessors build the module-level types and
//! report the offending key on failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::field::{AnalyticProfile, ExteriorRule, Grid, GridFunction};
use crate::kernel::{ExponentField, ExponentProfile, KernelFamily, KernelSpec};
use crate::operator::Region;
use crate::quadrature::QuadratureConfig;
use crate::solver::{SolveConfig, SweepOrder};
use crate::{Error, Point, Result};

const KNOWN_KEYS: &[&str] = &[
    "kernel.dim",
    "kernel.family",
    "kernel.lambda",
    "kernel.Lambda",
    "kernel.M",
    "kernel.gamma",
    "kernel.s",
    "kernel.p",
    "kernel.tau",
    "kernel.s0",
    "kernel.s1",
    "kernel.p0",
    "kernel.p1",
    "grid.L",
    "grid.h",
    "problem.domain",
    "problem.exterior",
    "problem.initial",
    "problem.f",
    "field.profile",
    "quadrature.rho",
    "quadrature.R",
    "quadrature.R_max",
    "quadrature.n_radial",
    "quadrature.n_angular",
    "quadrature.report_error_bounds",
    "solve.tolerance",
    "solve.change_tolerance",
    "solve.max_sweeps",
    "solve.sweep_order",
    "solve.root_tolerance",
    "analysis.delta",
    "analysis.sample_density",
    "limit.s_list",
    "limit.points",
    "limit.profile",
];

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

/// A call `name(arg, ...)` or a bare word / number.
fn parse_call(text: &str) -> (String, Vec<String>) {
    let t = text.trim();
    if let (Some(open), true) = (t.find('('), t.ends_with(')')) {
        let name = t[..open].trim().to_string();
        let inner = &t[open + 1..t.len() - 1];
        let args = if inner.trim().is_empty() {
            vec![]
        } else {
            inner.split(',').map(|a| a.trim().to_string()).collect()
        };
        (name, args)
    } else {
        (t.to_string(), vec![])
    }
}

fn num<T: FromStr>(key: &str, text: &str) -> Result<T>
where
    T::Err: Display,
{
    text.trim()
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{text}`: {e}")))
}

fn args_f64(key: &str, args: &[String], count: usize, form: &str) -> Result<Vec<f64>> {
    if args.len() != count {
        return Err(Error::config(key, format!("expected {form}")));
    }
    args.iter().map(|a| num::<f64>(key, a)).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", ln + 1), "expected `section.key = value`"))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::config(key, "unknown key"));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::config(key, "duplicate key"));
            }
        }
        Ok(RunConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::config(key, "missing key"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |v| num(key, v))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64> {
        num(key, self.required(key)?)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.get(key).map_or(Ok(default), |v| num(key, v))
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| v.split(',').map(|t| num::<f64>(key, t)).collect())
            .transpose()
    }

    /// Points separated by `;`, coordinates by whitespace.
    pub fn point_list(&self, key: &str, dim: usize) -> Result<Option<Vec<Point>>> {
        self.get(key)
            .map(|v| v.split(';').map(|t| parse_point(key, t, dim)).collect())
            .transpose()
    }

    fn exponent_profile(&self, key: &str) -> Result<ExponentProfile> {
        let (name, args) = parse_call(self.required(key)?);
        match name.as_str() {
            "piecewise" => {
                let a = args_f64(key, &args, 3, "piecewise(split, left, right)")?;
                Ok(ExponentProfile::Piecewise { split: a[0], left: a[1], right: a[2] })
            }
            "smooth" => {
                let a = args_f64(key, &args, 3, "smooth(mean, amplitude, frequency)")?;
                Ok(ExponentProfile::Smooth { mean: a[0], amplitude: a[1], frequency: a[2] })
            }
            other => Ok(ExponentProfile::Constant(num(key, other)?)),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        let d = self.usize_or("kernel.dim", 1)?;
        if d != 1 && d != 2 {
            return Err(Error::config("kernel.dim", format!("must be 1 or 2, got {d}")));
        }
        Ok(d)
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        let dim = self.dim()?;
        let s = self.exponent_profile("kernel.s")?;
        let p = self.exponent_profile("kernel.p")?;
        let tau = self.f64_or("kernel.tau", 0.0)?;
        let mut field = ExponentField::from_profiles(s, p, tau).map_err(|e| Error::config("kernel.s", e.to_string()))?;
        let declared = ["kernel.s0", "kernel.s1", "kernel.p0", "kernel.p1"];
        if declared.iter().any(|k| self.get(k).is_some()) {
            field = field
                .clone()
                .with_bounds(
                    self.f64_or("kernel.s0", field.s0)?,
                    self.f64_or("kernel.s1", field.s1)?,
                    self.f64_or("kernel.p0", field.p0)?,
                    self.f64_or("kernel.p1", field.p1)?,
                )
                .map_err(|e| Error::config("kernel.s0", e.to_string()))?;
        }
        let (fname, fargs) = parse_call(self.get("kernel.family").unwrap_or("model"));
        let family = match fname.as_str() {
            "model" => KernelFamily::Model,
            "truncated" => KernelFamily::Truncated,
            "perturbed" => {
                let a = args_f64("kernel.family", &fargs, 3, "perturbed(center, amplitude, frequency)")?;
                KernelFamily::Perturbed { center: a[0], amplitude: a[1], frequency: a[2] }
            }
            other => return Err(Error::config("kernel.family", format!("unknown family `{other}`"))),
        };
        let (_, s_hi) = field.s.range();
        let (_, p_hi) = field.p.range();
        let default_gamma = {
            let (s_lo, _) = field.s.range();
            let (p_lo, _) = field.p.range();
            (s_lo * p_lo).min(s_hi * p_hi)
        };
        let spec = KernelSpec::new(
            dim,
            field,
            self.f64_or("kernel.lambda", 1.0)?,
            self.f64_or("kernel.Lambda", 1.0)?,
            self.f64_or("kernel.M", 1.0)?,
            self.f64_or("kernel.gamma", default_gamma)?,
            family,
        )
        .map_err(|e| Error::config("kernel", e.to_string()))?;
        // the singular branch needs p(1-s) > 1 + tau wherever p < 2
        for x in probe_points(dim) {
            let p = spec.p_at(x);
            let s = spec.s_at(x);
            if p < 2.0 && p * (1.0 - s) - 1.0 <= spec.exponents.tau {
                return Err(Error::Hypothesis(format!(
                    "kernel.p: p(x)(1 - s(x)) > 1 + tau is required where p(x) < 2; at x = ({}, {}) p = {p}, s = {s}, p(1-s) = {}",
                    x[0],
                    x[1],
                    p * (1.0 - s)
                )));
            }
        }
        Ok(spec)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim()?, self.f64_required("grid.L")?, self.f64_required("grid.h")?)
            .map_err(|e| Error::config("grid.h", e.to_string()))
    }

    pub fn quadrature(&self, grid: &Grid) -> Result<QuadratureConfig> {
        let base = QuadratureConfig::for_grid(grid);
        let q = QuadratureConfig {
            rho: self.f64_or("quadrature.rho", base.rho)?,
            r_outer: self.f64_or("quadrature.R", base.r_outer)?,
            r_far: self.f64_or("quadrature.R_max", base.r_far)?,
            n_radial: self.usize_or("quadrature.n_radial", base.n_radial)?,
            n_angular: self.usize_or("quadrature.n_angular", base.n_angular)?,
            report_error_bounds: self
                .get("quadrature.report_error_bounds")
                .map_or(Ok(true), |v| num("quadrature.report_error_bounds", v))?,
        };
        q.validate()?;
        Ok(q)
    }

    /// Quadrature for grid-free computations (certificates).
    pub fn quadrature_free(&self) -> Result<QuadratureConfig> {
        let q = QuadratureConfig {
            rho: self.f64_or("quadrature.rho", 0.01)?,
            r_outer: self.f64_or("quadrature.R", 4.0)?,
            r_far: self.f64_or("quadrature.R_max", 64.0)?,
            n_radial: self.usize_or("quadrature.n_radial", 16)?,
            n_angular: self.usize_or("quadrature.n_angular", 32)?,
            report_error_bounds: true,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let tol = self.f64_or("solve.tolerance", 1e-4)?;
        let mut c = SolveConfig::new(tol);
        c.change_tolerance = self.f64_or("solve.change_tolerance", c.change_tolerance)?;
        c.root_tolerance = self.f64_or("solve.root_tolerance", c.root_tolerance)?;
        c.max_sweeps = self.usize_or("solve.max_sweeps", c.max_sweeps)?;
        c.sweep_order = match self.get("solve.sweep_order").unwrap_or("lexicographic") {
            "lexicographic" => SweepOrder::Lexicographic,
            "red-black" | "redblack" => SweepOrder::RedBlack,
            other => return Err(Error::config("solve.sweep_order", format!("unknown order `{other}`"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn domain(&self) -> Result<Region> {
        let (name, args) = parse_call(self.get("problem.domain").unwrap_or("ball(1)"));
        match name.as_str() {
            "ball" => {
                let a = args_f64("problem.domain", &args, 1, "ball(radius)")?;
                Ok(Region::Ball { center: [0.0, 0.0], radius: a[0] })
            }
            "box" => {
                let a = args_f64("problem.domain", &args, 1, "box(half_width)")?;
                Ok(Region::Box { half_width: a[0] })
            }
            other => Err(Error::config("problem.domain", format!("unknown domain `{other}`"))),
        }
    }

    pub fn exterior(&self, key: &str) -> Result<ExteriorRule> {
        parse_exterior(key, self.get(key).unwrap_or("zero"))
    }

    pub fn profile(&self, key: &str) -> Result<AnalyticProfile> {
        parse_profile(key, self.required(key)?)
    }

    /// Initial data: the exterior rule on nodes outside `domain`, `problem.initial` inside.
    pub fn problem_data(&self, grid: Grid, domain: Region) -> Result<GridFunction> {
        let exterior = self.exterior("problem.exterior")?;
        let initial = parse_exterior("problem.initial", self.get("problem.initial").unwrap_or("zero"))?;
        GridFunction::from_fn(grid, exterior.clone(), |z| {
            if domain.contains(z, grid.dim) {
                exterior_value(&initial, z)
            } else {
                exterior_value(&exterior, z)
            }
        })
    }

    pub fn rhs(&self, grid: Grid) -> Result<GridFunction> {
        let rule = parse_exterior("problem.f", self.get("problem.f").unwrap_or("zero"))?;
        GridFunction::from_fn(grid, rule.clone(), |z| exterior_value(&rule, z))
    }
}

/// The value an exterior rule prescribes at `z`, wherever `z` lies; `Clamp` reads as 0.
pub fn exterior_value(rule: &ExteriorRule, z: Point) -> f64 {
    match rule {
        ExteriorRule::Clamp => 0.0,
        _ => rule.value(z),
    }
}

fn probe_points(dim: usize) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..=40 {
        let t = -2.0 + 4.0 * i as f64 / 40.0;
        pts.push([t, 0.0]);
        if dim == 2 {
            pts.push([0.0, t]);
            pts.push([t / 2f64.sqrt(), t / 2f64.sqrt()]);
        }
    }
    pts
}

pub fn parse_point(key: &str, text: &str, dim: usize) -> Result<Point> {
    let coords: Vec<f64> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| num::<f64>(key, t))
        .collect::<Result<_>>()?;
    match (dim, coords.len()) {
        (1, 1) => Ok([coords[0], 0.0]),
        (2, 2) => Ok([coords[0], coords[1]]),
        _ => Err(Error::config(key, format!("expected {dim} coordinate(s) in `{}`", text.trim()))),
    }
}

pub fn parse_profile(key: &str, text: &str) -> Result<AnalyticProfile> {
    let (name, args) = parse_call(text);
    match name.as_str() {
        "beta" => Ok(AnalyticProfile::Beta),
        "bump" => Ok(AnalyticProfile::Bump),
        "dipole" => Ok(AnalyticProfile::Dipole),
        "getoor" => Ok(AnalyticProfile::Getoor { exponent: args_f64(key, &args, 1, "getoor(a)")?[0] }),
        "power" => Ok(AnalyticProfile::Power { exponent: args_f64(key, &args, 1, "power(a)")?[0] }),
        "dilated" => {
            if args.len() != 2 {
                return Err(Error::config(key, "expected dilated(profile, scale)"));
            }
            Ok(AnalyticProfile::Dilated {
                inner: Box::new(parse_profile(key, &args[0])?),
                scale: num(key, &args[1])?,
            })
        }
        other => Err(Error::config(key, format!("unknown profile `{other}`"))),
    }
}

pub fn parse_exterior(key: &str, text: &str) -> Result<ExteriorRule> {
    let (name, args) = parse_call(text);
    match name.as_str() {
        "zero" => Ok(ExteriorRule::Zero),
        "clamp" => Ok(ExteriorRule::Clamp),
        "constant" => Ok(ExteriorRule::Constant(args_f64(key, &args, 1, "constant(c)")?[0])),
        "step" => {
            let a = args_f64(key, &args, 3, "step(at, left, right)")?;
            Ok(ExteriorRule::Step { at: a[0], left: a[1], right: a[2] })
        }
        "barrier" => Ok(ExteriorRule::GrowthBarrier { eta: args_f64(key, &args, 1, "barrier(eta)")?[0] }),
        _ => match num::<f64>(key, &name) {
            Ok(c) if args.is_empty() => Ok(ExteriorRule::Constant(c)),
            _ => parse_profile(key, text).map(ExteriorRule::Profile),
        },
    }
}
