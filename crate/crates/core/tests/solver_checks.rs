mod common;

use fraclab::field::{ExteriorRule, Grid, GridFunction};
use fraclab::kernel::KernelSpec;
use fraclab::operator::{evaluate_operator, residual_sup, Region};
use fraclab::quadrature::QuadratureConfig;
use fraclab::solver::{solve_dirichlet, DirichletProblem, SolveConfig, SweepOrder};
use fraclab::Error;

const UNIT_BALL: Region = Region::Ball {
    center: [0.0, 0.0],
    radius: 1.0,
};

fn step_problem(spec: KernelSpec, grid: Grid, rule: ExteriorRule) -> DirichletProblem {
    let data = GridFunction::from_fn(grid, rule.clone(), |z| {
        if UNIT_BALL.contains(z, grid.dim) {
            0.0
        } else {
            exterior(&rule, z[0])
        }
    })
    .unwrap();
    DirichletProblem {
        spec,
        domain: UNIT_BALL,
        rhs: GridFunction::constant(grid, 0.0).unwrap(),
        data,
    }
}

fn exterior(rule: &ExteriorRule, x: f64) -> f64 {
    match rule {
        ExteriorRule::Step { at, left, right } => {
            if x < *at {
                *left
            } else {
                *right
            }
        }
        _ => unreachable!(),
    }
}

#[test]
fn homogeneous_step_problem_reaches_tolerance() {
    let grid = Grid::new(1, 1.25, 1.0 / 80.0).unwrap();
    let problem = step_problem(
        KernelSpec::model(1, 0.5, 3.0).unwrap(),
        grid,
        ExteriorRule::Step { at: 0.0, left: -1.0, right: 1.0 },
    );
    let quad = QuadratureConfig::for_grid(&grid);
    let (u, report) = solve_dirichlet(&problem, &SolveConfig::new(1e-3), &quad).unwrap();
    assert!(report.residual_sup <= 1e-3);
    let again = residual_sup(&u, &problem.rhs, UNIT_BALL, &problem.spec, &quad).unwrap();
    assert_eq!(again, report.residual_sup);
    // odd data, odd solution, and the maximum principle
    for i in 0..grid.node_count() {
        let x = grid.position(i);
        let mirror = grid.node_at([-x[0], 0.0]).unwrap();
        assert!((u.values[i] + u.values[mirror]).abs() < 1e-3);
        assert!(u.values[i].abs() <= 1.0);
    }
}

#[test]
fn relaxation_agrees_with_dense_newton() {
    let grid = Grid::new(1, 1.2, 0.2).unwrap();
    let spec = KernelSpec::model(1, 0.5, 3.0).unwrap();
    let problem = step_problem(spec.clone(), grid, ExteriorRule::Step { at: 0.1, left: -1.0, right: 0.5 });
    let mut quad = QuadratureConfig::for_grid(&grid);
    quad.rho = 0.2;
    let free = problem.free_nodes();
    assert_eq!(free.len(), 9);
    let root_tolerance = 1e-12;
    let config = SolveConfig {
        tolerance: 1e-9,
        change_tolerance: 2e-12,
        max_sweeps: 20_000,
        sweep_order: SweepOrder::Lexicographic,
        root_tolerance,
    };
    let (u, _) = solve_dirichlet(&problem, &config, &quad).unwrap();

    let mut plain = quad;
    plain.report_error_bounds = false;
    let residual = |w: &[f64]| -> Vec<f64> {
        let mut values = problem.data.values.clone();
        for (k, &i) in free.iter().enumerate() {
            values[i] = w[k];
        }
        let field = GridFunction::new(grid, values, problem.data.exterior.clone()).unwrap();
        free.iter()
            .map(|&i| evaluate_operator(&field, grid.position(i), &spec, &plain).unwrap().value)
            .collect()
    };
    let start = vec![0.0; free.len()];
    let newton = common::newton_fd(&residual, start, 1e-13);
    for (k, &i) in free.iter().enumerate() {
        assert!(
            (u.values[i] - newton[k]).abs() <= 10.0 * root_tolerance,
            "node {i}: {} vs {}",
            u.values[i],
            newton[k]
        );
    }
}

#[test]
fn raising_exterior_data_never_lowers_the_solution() {
    let grid = Grid::new(1, 1.25, 1.0 / 80.0).unwrap();
    let spec = KernelSpec::model(1, 0.5, 3.0).unwrap();
    let quad = QuadratureConfig::for_grid(&grid);
    let config = SolveConfig::new(1e-4);
    let low = step_problem(spec.clone(), grid, ExteriorRule::Step { at: 0.0, left: -1.0, right: 1.0 });
    let high = step_problem(spec, grid, ExteriorRule::Step { at: -1.1, left: -1.0, right: 1.0 });
    for i in 0..grid.node_count() {
        assert!(low.data.values[i] <= high.data.values[i]);
    }
    let (u1, _) = solve_dirichlet(&low, &config, &quad).unwrap();
    let (u2, _) = solve_dirichlet(&high, &config, &quad).unwrap();
    let violations = (0..grid.node_count()).filter(|&i| u1.values[i] > u2.values[i]).count();
    assert_eq!(violations, 0);
}

#[test]
fn red_black_and_lexicographic_orders_agree() {
    let grid = Grid::new(1, 1.25, 1.0 / 40.0).unwrap();
    let problem = step_problem(
        KernelSpec::model(1, 0.4, 2.5).unwrap(),
        grid,
        ExteriorRule::Step { at: 0.2, left: -1.0, right: 1.0 },
    );
    let quad = QuadratureConfig::for_grid(&grid);
    let mut config = SolveConfig::new(1e-6);
    config.change_tolerance = 1e-10;
    let (a, _) = solve_dirichlet(&problem, &config, &quad).unwrap();
    config.sweep_order = SweepOrder::RedBlack;
    let (b, _) = solve_dirichlet(&problem, &config, &quad).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn sweep_budget_exhaustion_returns_last_iterate() {
    let grid = Grid::new(1, 1.25, 1.0 / 40.0).unwrap();
    let problem = step_problem(
        KernelSpec::model(1, 0.5, 3.0).unwrap(),
        grid,
        ExteriorRule::Step { at: 0.0, left: -1.0, right: 1.0 },
    );
    let mut config = SolveConfig::new(1e-12);
    config.max_sweeps = 2;
    match solve_dirichlet(&problem, &config, &QuadratureConfig::for_grid(&grid)) {
        Err(Error::NonConvergence { sweeps, last_iterate, .. }) => {
            assert_eq!(sweeps, 2);
            assert_eq!(last_iterate.values.len(), grid.node_count());
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn singular_branch_violation_is_refused() {
    let grid = Grid::new(1, 1.25, 1.0 / 40.0).unwrap();
    let problem = step_problem(
        KernelSpec::model(1, 0.5, 1.3).unwrap(),
        grid,
        ExteriorRule::Step { at: 0.0, left: -1.0, right: 1.0 },
    );
    let r = solve_dirichlet(&problem, &SolveConfig::new(1e-3), &QuadratureConfig::for_grid(&grid));
    assert!(matches!(r, Err(Error::Hypothesis(_))));
}
