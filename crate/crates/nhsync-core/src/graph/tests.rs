use super::*;
use crate::models::{poincare_polar, Forcing, PoincareParams};
use crate::TAU;

/// Skew system with a known invariant graph: theta' = 1, r' = -lambda (r - c
/// sin theta). The graph and its slope are explicit:
/// rho(theta) = c lambda (lambda sin theta - cos theta) / (1 + lambda^2).
fn linear_skew(lambda: f64, c: f64) -> PhaseNormalSystem {
    PhaseNormalSystem::new(
        1,
        1,
        vec![],
        |_th, _r, _phi, out| out[0] = 1.0,
        move |th, r, _phi, out| out[0] = -lambda * (r[0] - c * th[0].sin()),
    )
    .with_partials(
        |_th, _r, _phi, out| out[0] = 0.0,
        |_th, _r, _phi, out| out[0] = 0.0,
        move |th, _r, _phi, out| out[0] = lambda * c * th[0].cos(),
        move |_th, _r, _phi, out| out[0] = -lambda,
    )
}

fn linear_skew_graph(lambda: f64, c: f64, theta: f64) -> f64 {
    c * lambda * (lambda * theta.sin() - theta.cos()) / (1.0 + lambda * lambda)
}

fn linear_skew_slope(lambda: f64, c: f64, theta: f64) -> f64 {
    c * lambda * (lambda * theta.cos() + theta.sin()) / (1.0 + lambda * lambda)
}

fn polar(gamma: f64, forcing: Forcing) -> PhaseNormalSystem {
    poincare_polar(&PoincareParams {
        gamma,
        forcing,
        ..Default::default()
    })
    .unwrap()
}

/// Central differences of a scalar graph along the first (theta) axis.
fn theta_fd(rho: &TorusGraph) -> Vec<f64> {
    let dims = rho.dims().to_vec();
    let n0 = dims[0];
    let h = TAU / n0 as f64;
    let n = rho.node_count();
    let mut idx = vec![0usize; dims.len()];
    let mut out = vec![0.0; n];
    for node in 0..n {
        let mut rem = node;
        for d in (0..dims.len()).rev() {
            idx[d] = rem % dims[d];
            rem /= dims[d];
        }
        let mut up = idx.clone();
        up[0] = (idx[0] + 1) % n0;
        let mut dn = idx.clone();
        dn[0] = (idx[0] + n0 - 1) % n0;
        let flat = |ix: &[usize]| {
            let mut f = 0;
            for d in 0..dims.len() {
                f = f * dims[d] + ix[d];
            }
            f
        };
        out[node] = (rho.node_value(flat(&up))[0] - rho.node_value(flat(&dn))[0]) / (2.0 * h);
    }
    out
}

#[test]
fn linear_skew_solves_to_closed_form_graph_and_slope() {
    let (lambda, c) = (2.0, 0.3);
    let sys = linear_skew(lambda, c);
    let rho0 = TorusGraph::constant(vec![64], &[0.0]);
    let cfg = GraphConfig {
        tol: 1e-8,
        ..Default::default()
    };
    let sol = solve_graph(&rho0, &sys, &cfg).unwrap();
    assert!(sol.converged);
    let mut ang = vec![0.0];
    let mut worst: f64 = 0.0;
    for node in 0..sol.graph.node_count() {
        sol.graph.angles_of(node, &mut ang);
        worst =
            worst.max((sol.graph.node_value(node)[0] - linear_skew_graph(lambda, c, ang[0])).abs());
    }
    assert!(worst < 1e-6, "graph error {worst:.2e}");

    let sigma = slope_field(&sol.graph, &sys, sol.window, 1e-9).unwrap();
    let mut worst_s: f64 = 0.0;
    for node in 0..sigma.node_count() {
        sigma.angles_of(node, &mut ang);
        worst_s =
            worst_s.max((sigma.node_value(node)[0] - linear_skew_slope(lambda, c, ang[0])).abs());
    }
    assert!(worst_s < 1e-6, "slope error {worst_s:.2e}");
}

#[test]
fn unforced_cycle_is_a_fixed_point() {
    let sys = polar(0.0, Forcing::Zero);
    let rho = TorusGraph::constant(vec![64], &[1.0]);
    let step = graph_transform_step(&rho, &sys, 20.0, 1e-9).unwrap();
    assert!(step.sup_distance_to_const(&[1.0]) < 1e-9);

    let above = TorusGraph::constant(vec![64], &[1.1]);
    let step = graph_transform_step(&above, &sys, 20.0, 1e-9).unwrap();
    assert!(
        step.sup_distance_to_const(&[1.0]) <= 0.1 * (-20.0f64).exp() + 1e-6,
        "residual {:.2e}",
        step.sup_distance_to_const(&[1.0])
    );
}

#[test]
fn unforced_solve_converges_fast_from_inflated_guess() {
    let sys = polar(0.0, Forcing::Zero);
    let rho0 = TorusGraph::constant(vec![64], &[1.3]);
    let cfg = GraphConfig {
        window: Some(20.0),
        tol: 1e-8,
        ..Default::default()
    };
    let sol = solve_graph(&rho0, &sys, &cfg).unwrap();
    assert!(sol.converged);
    assert!(sol.iterations <= 5, "took {} iterations", sol.iterations);
    assert!(sol.graph.sup_distance_to_const(&[1.0]) < 1e-7);
}

#[test]
fn forced_transform_contracts_and_fixes() {
    let sys = polar(0.2, Forcing::SingleTone { omega: 2.0 });
    let rho0 = TorusGraph::constant(vec![32, 32], &[1.0]);
    let t1 = graph_transform_step(&rho0, &sys, 20.0, 1e-8).unwrap();
    let t2 = graph_transform_step(&t1, &sys, 20.0, 1e-8).unwrap();
    let d1 = t1.sup_distance(&rho0);
    let d2 = t2.sup_distance(&t1);
    assert!(d2 < d1, "no contraction: {d1:.3e} -> {d2:.3e}");

    let cfg = GraphConfig {
        window: Some(20.0),
        tol: 1e-6,
        ode_tol: 1e-8,
        ..Default::default()
    };
    let sol = solve_graph(&rho0, &sys, &cfg).unwrap();
    assert!(sol.converged);
    assert!(sol.contraction_factor.unwrap() < 1.0);

    // fixed-point property
    let once_more = graph_transform_step(&sol.graph, &sys, sol.window, 1e-8).unwrap();
    assert!(once_more.sup_distance(&sol.graph) <= 2.0 * cfg.tol);

    // empirical rates on the converged graph
    let rates = nh_rates(&sol.graph, &sys, 6, 15.0, 1e-8, 11).unwrap();
    assert!(rates.lambda_n > 0.8 && rates.lambda_n < 1.2, "{rates:?}");
    assert!(rates.lambda_t_max.abs() < 0.1, "{rates:?}");
    assert!(rates.ratio > 1.0, "{rates:?}");

    // slope against central differences of the graph itself
    let sigma = slope_field(&sol.graph, &sys, sol.window, 1e-8).unwrap();
    let fd = theta_fd(&sol.graph);
    let probe = interpolation_error_probe(&sol.graph, &sys, sol.window, 60, 1e-8, 5).unwrap();
    let tol_slope = (3.0 * probe).max(5e-3);
    let mut worst: f64 = 0.0;
    for node in 0..sigma.node_count() {
        worst = worst.max((sigma.node_value(node)[0] - fd[node]).abs());
    }
    assert!(
        worst <= tol_slope,
        "slope vs FD {worst:.2e} > {tol_slope:.2e}"
    );
}

#[test]
fn pullback_constant_case_recovers_cycle() {
    let sys = polar(0.0, Forcing::Zero);
    let (g, info) = pullback_graph(&sys, &[32], 15.0, 6, &[0.9], 1e-9, 1).unwrap();
    assert!(info.converged);
    assert!(info.empty_fraction == 0.0);
    assert!(g.sup_distance_to_const(&[1.0]) < 1e-6);
}

#[test]
fn pullback_zero_window_returns_seed_unconverged() {
    let sys = polar(0.0, Forcing::Zero);
    let (g, info) = pullback_graph(&sys, &[16], 0.0, 4, &[0.7], 1e-8, 1).unwrap();
    assert!(!info.converged);
    assert!(g.sup_distance_to_const(&[0.7]) == 0.0);
}

#[test]
fn pullback_agrees_with_graph_transform() {
    let sys = polar(0.3, Forcing::SingleTone { omega: 2.0 });
    let rho0 = TorusGraph::constant(vec![32, 32], &[1.0]);
    let cfg = GraphConfig {
        window: Some(20.0),
        tol: 1e-6,
        ode_tol: 1e-8,
        ..Default::default()
    };
    let sol = solve_graph(&rho0, &sys, &cfg).unwrap();
    let (pb, info) = pullback_graph(&sys, &[32, 32], 16.0, 8, &[1.0], 1e-8, 3).unwrap();
    assert!(info.empty_fraction <= 0.2);
    let probe = interpolation_error_probe(&sol.graph, &sys, sol.window, 60, 1e-8, 9).unwrap();
    let tol = (2.0 * probe).max(1e-4);
    let d = pb.sup_distance(&sol.graph);
    assert!(d <= tol, "pullback vs transform {d:.2e} > {tol:.2e}");
}

#[test]
fn rates_scale_with_contraction_strength() {
    for (alpha, a) in [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)] {
        let sys = poincare_polar(&PoincareParams {
            alpha,
            a,
            gamma: 0.0,
            forcing: Forcing::Zero,
            ..Default::default()
        })
        .unwrap();
        let rho = TorusGraph::constant(vec![48], &[a]);
        let rates = nh_rates(&rho, &sys, 4, 10.0, 1e-9, 7).unwrap();
        let expect = alpha * a;
        assert!(
            (rates.lambda_n - expect).abs() < 0.05 * expect,
            "alpha={alpha} a={a}: {rates:?}"
        );
        assert!(rates.lambda_t_max.abs() < 0.02, "{rates:?}");
    }
}

#[test]
fn instantaneous_tangential_rate_matches_bound() {
    let gamma = 0.4;
    let sys = polar(gamma, Forcing::SingleTone { omega: 2.0 });
    let rho = TorusGraph::constant(vec![48, 48], &[1.0]);
    let measured = max_instantaneous_tangential_rate(&rho, &sys);
    // on the constant graph the rate is -(gamma / a) f(phi) sin(theta); its
    // grid max approaches gamma * max|f| * max|sin|
    let mut expect: f64 = 0.0;
    for i in 0..48 {
        for j in 0..48 {
            let th = TAU * i as f64 / 48.0;
            let ph = TAU * j as f64 / 48.0;
            expect = expect.max(-gamma * ph.sin() * th.sin());
        }
    }
    assert!((measured - expect).abs() < 1e-12, "{measured} vs {expect}");
    assert!((measured - gamma).abs() < 0.02 * gamma);
}

#[test]
fn invariance_residual_flags_perturbations() {
    // exact constant graph: residual at machine level
    let unforced = polar(0.0, Forcing::Zero);
    let exact = TorusGraph::constant(vec![64], &[1.0]);
    assert!(invariance_residual(&exact, &unforced, 200, 1) < 1e-9);

    // converged forced graph: residual within 10x the solve tolerance
    let sys = polar(0.3, Forcing::SingleTone { omega: 2.0 });
    let tol = 3e-5;
    let cfg = GraphConfig {
        window: Some(20.0),
        tol,
        ode_tol: 1e-9,
        ..Default::default()
    };
    let rho0 = TorusGraph::constant(vec![96, 96], &[1.0]);
    let sol = solve_graph(&rho0, &sys, &cfg).unwrap();
    let res = invariance_residual(&sol.graph, &sys, 300, 2);
    assert!(res <= 10.0 * tol, "residual {res:.2e} > {:.2e}", 10.0 * tol);

    // a deliberate bump is visible
    let bumped = TorusGraph::from_fn(sol.graph.dims().to_vec(), 1, |ang, out| {
        let mut v = [0.0];
        sol.graph.eval(ang, &mut v);
        out[0] = v[0] + 0.05 * ang[0].sin();
    });
    assert!(invariance_residual(&bumped, &sys, 300, 3) >= 0.01);
}

#[test]
fn residual_decreases_with_grid_refinement() {
    let sys = polar(0.3, Forcing::SingleTone { omega: 2.0 });
    let mut residuals = Vec::new();
    for n in [24usize, 48] {
        let rho0 = TorusGraph::constant(vec![n, n], &[1.0]);
        let cfg = GraphConfig {
            window: Some(18.0),
            tol: 1e-6,
            ode_tol: 1e-9,
            ..Default::default()
        };
        let sol = solve_graph(&rho0, &sys, &cfg).unwrap();
        residuals.push(invariance_residual(&sol.graph, &sys, 200, 5));
    }
    assert!(residuals[1] < residuals[0], "no improvement: {residuals:?}");
}

#[test]
fn largest_converging_gamma_grows_with_alpha() {
    // For a fixed grid and window, the largest forcing amplitude the solver
    // still converges at should not decrease with contraction strength.
    let gammas = [0.9, 1.2, 1.5];
    let mut max_gamma = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let mut best = 0.0;
        for &gamma in &gammas {
            let sys = poincare_polar(&PoincareParams {
                alpha,
                gamma,
                forcing: Forcing::SingleTone { omega: 2.0 },
                ..Default::default()
            })
            .unwrap();
            let rho0 = TorusGraph::constant(vec![20, 20], &[1.0]);
            let cfg = GraphConfig {
                window: Some(20.0),
                tol: 1e-4,
                max_iter: 10,
                ode_tol: 1e-7,
            };
            if let Ok(sol) = solve_graph(&rho0, &sys, &cfg) {
                if sol.converged {
                    best = gamma;
                }
            }
        }
        max_gamma.push(best);
    }
    assert!(
        max_gamma.windows(2).all(|w| w[1] >= w[0]),
        "not monotone: {max_gamma:?}"
    );
    assert!(max_gamma[2] > max_gamma[0], "no spread: {max_gamma:?}");
}

#[test]
fn shape_mismatches_rejected() {
    let sys = polar(0.1, Forcing::SingleTone { omega: 2.0 });
    // wrong torus dimension
    let rho = TorusGraph::constant(vec![16], &[1.0]);
    assert!(matches!(
        graph_transform_step(&rho, &sys, 10.0, 1e-8),
        Err(GraphError::InvalidInput(_))
    ));
    // phase-only system has no normal direction to transform
    let phase_only = PhaseNormalSystem::phase_only(1, vec![], |_t, _r, _p, out| out[0] = 1.0);
    let rho = TorusGraph::constant(vec![16], &[]);
    assert!(graph_transform_step(&rho, &phase_only, 10.0, 1e-8).is_err());
}
