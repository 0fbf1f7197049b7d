//! Independent oracles: adaptive Simpson in a logarithmic variable, no shared code
//! with the crate's quadrature.

#![allow(dead_code)]

fn phi(t: f64, p: f64) -> f64 {
    t.signum() * t.abs().powf(p - 1.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol.max(1e-14 * whole.abs()) {
        return left + right + diff / 15.0;
    }
    let t = (tol / 2.0).max(1e-15);
    simpson(f, a, m, fa, flm, fm, left, t, depth - 1) + simpson(f, m, b, fm, frm, fb, right, t, depth - 1)
}

/// Adaptive Simpson on `[a, b]`, pre-split into `pieces` equal parts.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, pieces: usize) -> f64 {
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * w;
            let hi = lo + w;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = w / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, (tol / pieces as f64).max(1e-15), 30)
        })
        .sum()
}

/// One-dimensional `PV ∫ φ_p(u(x) − u(x+y)) |y|^{-1-sp} dy` for a profile `u` that is
/// constant (`far`) for `|z| >= support`. Integrates the symmetrized integrand in
/// `t = ln y` over `[1e-5, 4 support]` and adds the far tail exactly; the omitted
/// inner piece is `O(1e-5^{p(1-s)})` for smooth `u`.
pub fn pv_1d(u: &dyn Fn(f64) -> f64, x: f64, s: f64, p: f64, support: f64, far: f64) -> f64 {
    let ux = u(x);
    let sp = s * p;
    let g = |t: f64| {
        let y = t.exp();
        let d = phi(ux - u(x + y), p) + phi(ux - u(x - y), p);
        d * y.powf(-sp)
    };
    let big = 4.0 * support + x.abs();
    let body = integrate(&g, 1e-5f64.ln(), big.ln(), 1e-10, 400);
    body + 2.0 * phi(ux - far, p) * big.powf(-sp) / sp
}

/// `∫_{1/4}^{∞} g(r) r^{-1-sp} dr` for the growth integrands, by the same log substitution.
pub fn radial_tail_1d(g: &dyn Fn(f64) -> f64, sp: f64, r_max: f64) -> f64 {
    let h = |t: f64| {
        let r = t.exp();
        g(r) * r.powf(-sp)
    };
    integrate(&h, 0.25f64.ln(), r_max.ln(), 1e-12, 200)
}

/// Dense Newton solve of `F(u) = 0` with a forward-difference Jacobian.
pub fn newton_fd(f: &dyn Fn(&[f64]) -> Vec<f64>, mut u: Vec<f64>, tol: f64) -> Vec<f64> {
    let n = u.len();
    for _ in 0..100 {
        let r = f(&u);
        if r.iter().all(|v| v.abs() < tol) {
            return u;
        }
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let step = 1e-7 * (1.0 + u[j].abs());
            let mut up = u.clone();
            up[j] += step;
            let rp = f(&up);
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / step;
            }
        }
        let rhs = nalgebra::DVector::from_vec(r.iter().map(|v| -v).collect());
        let du = jac.lu().solve(&rhs).expect("nonsingular Jacobian");
        for j in 0..n {
            u[j] += du[j];
        }
    }
    panic!("Newton did not converge");
}

use fraclab::field::{ExteriorRule, Grid, GridFunction};
use fraclab::kernel::KernelSpec;
use fraclab::operator::Region;
use fraclab::quadrature::QuadratureConfig;
use fraclab::solver::{solve_dirichlet, DirichletProblem, SolveConfig, SolveReport};

pub const UNIT_BALL: Region = Region::Ball {
    center: [0.0, 0.0],
    radius: 1.0,
};

/// `Lu = 0` in `B_1` (n = 1, s = 1/2, p = 3, h = 1/80) with exterior data `left` on
/// `x < 0` and `right` on `x > 0`.
pub fn step_solution(left: f64, right: f64, tolerance: f64) -> (DirichletProblem, GridFunction, SolveReport) {
    let grid = Grid::new(1, 1.25, 1.0 / 80.0).unwrap();
    let rule = ExteriorRule::Step { at: 0.0, left, right };
    let data = GridFunction::from_fn(grid, rule, |z| {
        if UNIT_BALL.contains(z, 1) {
            0.0
        } else if z[0] < 0.0 {
            left
        } else {
            right
        }
    })
    .unwrap();
    let problem = DirichletProblem {
        spec: KernelSpec::model(1, 0.5, 3.0).unwrap(),
        domain: UNIT_BALL,
        rhs: GridFunction::constant(grid, 0.0).unwrap(),
        data,
    };
    let (u, report) = solve_dirichlet(&problem, &SolveConfig::new(tolerance), &QuadratureConfig::for_grid(&grid)).unwrap();
    (problem, u, report)
}
