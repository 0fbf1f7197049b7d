//! Oscillation decay on dyadic balls, Hölder-exponent fits and the hypothesis /
//! conclusion checks of the oscillation lemma.

use crate::certificates::ConstantCertificate;
use crate::field::{barrier_profile, GridFunction};
use crate::{norm, sub, Error, Point, Result};

/// Boundary samples per dyadic sphere in two dimensions.
const SPHERE_SAMPLES: usize = 256;

/// Sample points of the closed ball `B_r(x0)`: grid nodes inside plus the boundary.
fn ball_samples(u: &GridFunction, x0: Point, r: f64) -> Vec<Point> {
    let g = &u.grid;
    let mut pts: Vec<Point> = (0..g.node_count())
        .map(|i| g.position(i))
        .filter(|&z| norm(sub(z, x0), g.dim) <= r * (1.0 + 1e-12))
        .collect();
    if g.dim == 1 {
        pts.push([x0[0] - r, 0.0]);
        pts.push([x0[0] + r, 0.0]);
    } else {
        for j in 0..SPHERE_SAMPLES {
            let t = std::f64::consts::TAU * j as f64 / SPHERE_SAMPLES as f64;
            pts.push([x0[0] + r * t.cos(), x0[1] + r * t.sin()]);
        }
    }
    pts
}

/// `osc_j = max − min` of `u` over `B_{2^{-j}}(x0)` for `j = 0..=j_max`, truncated
/// (with a warning) where the ball is narrower than four cells. Samples are
/// accumulated from the inside out, so the list is non-increasing in `j`.
pub fn oscillation(u: &GridFunction, x0: Point, j_max: usize) -> Vec<f64> {
    let h = u.grid.spacing;
    let mut levels = j_max;
    while levels > 0 && 2.0 * 2f64.powi(-(levels as i32)) < 4.0 * h {
        levels -= 1;
    }
    if levels < j_max {
        log::warn!("oscillation: j_max {j_max} too deep for h = {h}, truncated to {levels}");
    }
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    let mut out = vec![0.0; levels + 1];
    for j in (0..=levels).rev() {
        for z in ball_samples(u, x0, 2f64.powi(-(j as i32))) {
            let v = u.value(z);
            hi = hi.max(v);
            lo = lo.min(v);
        }
        out[j] = hi - lo;
    }
    out
}

/// Dyadic radii `2^{-j}` for `j = 0..count`.
pub fn dyadic_radii(count: usize) -> Vec<f64> {
    (0..count).map(|j| 2f64.powi(-(j as i32))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub alpha_hat: f64,
    /// Coefficient of determination of the log-log fit.
    pub fit_quality: f64,
}

/// Least-squares slope of `log osc` against `log r` over the positive values.
pub fn fit_holder_exponent(osc_values: &[f64], radii: &[f64]) -> Result<HolderFit> {
    if osc_values.len() != radii.len() {
        return Err(Error::UndefinedFit("oscillation and radius lists differ in length".into()));
    }
    let pts: Vec<(f64, f64)> = osc_values
        .iter()
        .zip(radii)
        .filter(|(o, r)| **o > 0.0 && **r > 0.0)
        .map(|(o, r)| (r.ln(), o.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::UndefinedFit(format!(
            "need at least two positive oscillation values, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedFit("all radii are equal".into()));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
        .sum();
    let fit_quality = if syy <= 1e-30 * n { 1.0 } else { 1.0 - ss_res / syy };
    Ok(HolderFit {
        alpha_hat: slope.max(0.0),
        fit_quality,
    })
}

/// `sup_{|y|>1} v(y) − (2|2y|^η − 1)` over grid nodes outside `B_1` and radial probes out to `|y| = 64`.
pub fn check_growth_barrier(v: &GridFunction, eta: f64) -> f64 {
    let g = &v.grid;
    let mut worst = f64::NEG_INFINITY;
    let mut probe = |z: Point| {
        if norm(z, g.dim) > 1.0 {
            worst = worst.max(v.value(z) - barrier_profile(z, eta));
        }
    };
    for i in 0..g.node_count() {
        probe(g.position(i));
    }
    let dirs: Vec<Point> = if g.dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..64)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / 64.0;
                [t.cos(), t.sin()]
            })
            .collect()
    };
    for d in dirs {
        let mut r = 1.0 + 1e-9;
        while r <= 64.0 {
            probe([r * d[0], r * d[1]]);
            r *= 1.05;
        }
    }
    worst
}

/// Lower estimate of `|{u <= 0} ∩ B_1|`: cells whose interpolant maximum is `<= 0`
/// (1D: clipped to the ball; 2D: cells entirely inside the ball).
pub fn nonpositive_measure(u: &GridFunction) -> f64 {
    let g = &u.grid;
    let n = g.nodes_per_axis;
    let h = g.spacing;
    let mut total = 0.0;
    if g.dim == 1 {
        for i in 0..n - 1 {
            if u.values[i] <= 0.0 && u.values[i + 1] <= 0.0 {
                let a = g.coord(i).max(-1.0);
                let b = g.coord(i + 1).min(1.0);
                total += (b - a).max(0.0);
            }
        }
        return total;
    }
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            let inside = corners
                .iter()
                .all(|&(a, b)| g.coord(a).hypot(g.coord(b)) <= 1.0);
            let nonpos = corners.iter().all(|&(a, b)| u.values[g.flat_index(a, b)] <= 0.0);
            if inside && nonpos {
                total += h * h;
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LemmaVerdict {
    Holds,
    Violated,
    /// Some hypothesis failed; the conclusion was not tested.
    Inapplicable { failures: Vec<&'static str> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub hypotheses: Vec<HypothesisCheck>,
    /// `max u` over nodes of `B_{1/2}`.
    pub max_half_ball: Option<f64>,
    /// `1 − θ + slack`.
    pub bound: f64,
    pub verdict: LemmaVerdict,
}

/// Default grid slack `2 h^{1/2}` for comparing discrete maxima with the continuum bound.
pub fn default_slack(h: f64) -> f64 {
    2.0 * h.sqrt()
}

/// Checks the hypotheses of the oscillation lemma for `u` (right-hand side bounded by
/// `f_bound`, `u <= 1` in `B_1`, growth barrier outside `B_1`, `|{u <= 0} ∩ B_1| > δ`)
/// and, when all hold, its conclusion `max_{B_{1/2}} u <= 1 − θ + slack`.
pub fn check_oscillation_lemma(
    u: &GridFunction,
    cert: &ConstantCertificate,
    f_bound: f64,
    slack: f64,
) -> LemmaCheck {
    let g = &u.grid;
    let mut hyps = Vec::new();
    hyps.push(HypothesisCheck {
        name: "rhs_bound",
        holds: f_bound <= 0.0 || f_bound <= cert.epsilon,
        detail: format!("f_bound = {f_bound:.3e}, epsilon = {:.3e}", cert.epsilon),
    });
    let max_ball = (0..g.node_count())
        .map(|i| (g.position(i), u.values[i]))
        .filter(|(z, _)| norm(*z, g.dim) < 1.0)
        .map(|(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    hyps.push(HypothesisCheck {
        name: "bounded_above",
        holds: max_ball <= 1.0 + 1e-12,
        detail: format!("max over B_1 = {max_ball:.6}"),
    });
    let barrier = check_growth_barrier(u, cert.eta);
    hyps.push(HypothesisCheck {
        name: "growth_barrier",
        holds: barrier <= 1e-12,
        detail: format!("worst violation = {barrier:.3e}"),
    });
    let measure = nonpositive_measure(u);
    hyps.push(HypothesisCheck {
        name: "measure",
        holds: measure > cert.delta_measure,
        detail: format!("|{{u <= 0}} ∩ B_1| >= {measure:.4}, delta = {}", cert.delta_measure),
    });
    let bound = 1.0 - cert.theta + slack;
    let failures: Vec<&'static str> = hyps.iter().filter(|h| !h.holds).map(|h| h.name).collect();
    if !failures.is_empty() {
        return LemmaCheck {
            hypotheses: hyps,
            max_half_ball: None,
            bound,
            verdict: LemmaVerdict::Inapplicable { failures },
        };
    }
    let max_half = (0..g.node_count())
        .map(|i| (g.position(i), u.values[i]))
        .filter(|(z, _)| norm(*z, g.dim) < 0.5)
        .map(|(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    LemmaCheck {
        hypotheses: hyps,
        max_half_ball: Some(max_half),
        bound,
        verdict: if max_half <= bound {
            LemmaVerdict::Holds
        } else {
            LemmaVerdict::Violated
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub alpha: f64,
    pub slack: f64,
    pub osc_values: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub first_failure: Option<usize>,
    pub passed: bool,
    /// Largest `α` passing the scan; infinite when every `osc_j <= slack`,
    /// `None` when even `α = 0` fails.
    pub max_alpha: Option<f64>,
}

fn scan_passes(osc: &[f64], alpha: f64, slack: f64) -> Option<usize> {
    osc.iter()
        .enumerate()
        .find(|&(j, &o)| o > 2f64.powf(-(j as f64) * alpha) + slack)
        .map(|(j, _)| j)
}

/// Checks `osc_j <= 2^{-jα} + slack` for `j = 0..=j_max`.
pub fn dyadic_scan(u: &GridFunction, x0: Point, alpha: f64, j_max: usize, slack: f64) -> ScanReport {
    let osc = oscillation(u, x0, j_max);
    scan_from_oscillation(osc, alpha, slack)
}

/// [`dyadic_scan`] on precomputed oscillation values.
pub fn scan_from_oscillation(osc: Vec<f64>, alpha: f64, slack: f64) -> ScanReport {
    let first_failure = scan_passes(&osc, alpha, slack);
    let thresholds = (0..osc.len())
        .map(|j| 2f64.powf(-(j as f64) * alpha) + slack)
        .collect();
    let max_alpha = if osc.iter().all(|&o| o <= slack) {
        Some(f64::INFINITY)
    } else if scan_passes(&osc, 0.0, slack).is_some() {
        None
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while scan_passes(&osc, hi, slack).is_none() && hi < 1e6 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if scan_passes(&osc, mid, slack).is_none() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    };
    ScanReport {
        alpha,
        slack,
        osc_values: osc,
        thresholds,
        passed: first_failure.is_none(),
        first_failure,
        max_alpha,
    }
}

/// `min(−log₂(1 − θ/2), η)`, the decay exponent predicted by a certificate.
pub fn predicted_alpha(cert: &ConstantCertificate) -> f64 {
    (-(1.0 - cert.theta / 2.0).log2()).min(cert.eta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    pub center: Point,
    pub radii: Vec<f64>,
    pub osc_values: Vec<f64>,
    pub alpha_hat: Option<f64>,
    pub fit_quality: Option<f64>,
    pub target_alpha: Option<f64>,
    pub scan: Option<ScanReport>,
}

impl OscillationReport {
    pub fn passed(&self) -> bool {
        self.scan.as_ref().is_none_or(|s| s.passed)
    }
}

pub fn oscillation_report(
    u: &GridFunction,
    center: Point,
    j_max: usize,
    target_alpha: Option<f64>,
    slack: f64,
) -> OscillationReport {
    let osc = oscillation(u, center, j_max);
    let radii = dyadic_radii(osc.len());
    let fit = fit_holder_exponent(&osc, &radii).ok();
    let scan = target_alpha.map(|a| scan_from_oscillation(osc.clone(), a, slack));
    OscillationReport {
        center,
        radii,
        osc_values: osc,
        alpha_hat: fit.map(|f| f.alpha_hat),
        fit_quality: fit.map(|f| f.fit_quality),
        target_alpha,
        scan,
    }
}
