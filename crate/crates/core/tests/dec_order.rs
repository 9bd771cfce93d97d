//! Convergence of the Deferred Correction integrator on scalar ODEs.

use gfswe::dec::DecWorkspace;
use gfswe::{DecScheme, TimeNodes};

/// Integrates `y' = f(y)` on `[0, t_end]` with `steps` uniform steps.
fn integrate(
    dec: &DecScheme,
    y0: &[f64],
    t_end: f64,
    steps: usize,
    f: fn(&[f64], &mut [f64]),
) -> Vec<f64> {
    let dt = t_end / steps as f64;
    let mut y = y0.to_vec();
    let mut ws = DecWorkspace::default();
    for _ in 0..steps {
        dec.step(
            &mut y,
            dt,
            |y, out| {
                f(y, out);
                Ok(())
            },
            &mut ws,
        )
        .unwrap();
    }
    y
}

fn decay(y: &[f64], out: &mut [f64]) {
    out[0] = -y[0];
}

fn logistic(y: &[f64], out: &mut [f64]) {
    out[0] = y[0] * (1.0 - y[0]);
}

/// `u' = cos(t) u` written autonomously with `t` as a second unknown.
fn forced(y: &[f64], out: &mut [f64]) {
    out[0] = y[1].cos() * y[0];
    out[1] = 1.0;
}

struct Problem {
    name: &'static str,
    f: fn(&[f64], &mut [f64]),
    y0: Vec<f64>,
    t_end: f64,
    exact: f64,
}

fn problems() -> Vec<Problem> {
    vec![
        Problem {
            name: "decay",
            f: decay,
            y0: vec![1.0],
            t_end: 1.0,
            exact: (-1.0f64).exp(),
        },
        Problem {
            name: "logistic",
            f: logistic,
            y0: vec![0.1],
            t_end: 2.0,
            exact: 1.0 / (1.0 + 9.0 * (-2.0f64).exp()),
        },
        Problem {
            name: "forced",
            f: forced,
            y0: vec![1.0, 0.0],
            t_end: 2.0,
            exact: 2.0f64.sin().exp(),
        },
    ]
}

fn measured_order(dec: &DecScheme, p: &Problem, base: usize) -> f64 {
    let e = |steps: usize| (integrate(dec, &p.y0, p.t_end, steps, p.f)[0] - p.exact).abs();
    let (e1, e2) = (e(base), e(2 * base));
    (e1 / e2).log2()
}

#[test]
fn measured_order_matches_formula() {
    for nodes in [TimeNodes::Equispaced, TimeNodes::GaussLobatto] {
        for p in 2..=5 {
            let dec = DecScheme::for_order(p, nodes).unwrap();
            let expected = dec.order() as f64;
            assert_eq!(dec.order(), p);
            for prob in problems() {
                // coarse enough to stay clear of roundoff at order 5
                let got = measured_order(&dec, &prob, 8);
                assert!(
                    (got - expected).abs() <= 0.1 * expected,
                    "{nodes:?} p={p} {}: measured {got:.3}",
                    prob.name
                );
            }
        }
    }
}

#[test]
fn iteration_count_limits_the_order() {
    for (m, nodes, k) in [
        (4, TimeNodes::Equispaced, 2),
        (3, TimeNodes::GaussLobatto, 3),
    ] {
        let dec = DecScheme::new(m, nodes, k).unwrap();
        assert_eq!(dec.order(), k);
        let got = measured_order(&dec, &problems()[0], 8);
        assert!(
            (got - k as f64).abs() <= 0.1 * k as f64,
            "{nodes:?} M={m} K={k}: {got}"
        );
    }
}

#[test]
fn fifth_order_error_constant_on_decay() {
    // |y(0.1) - e^{-0.1}| <= C dt^6 for a single step of the order 5 scheme
    let dec = DecScheme::new(4, TimeNodes::Equispaced, 5).unwrap();
    let one = |dt: f64| (integrate(&dec, &[1.0], dt, 1, decay)[0] - (-dt).exp()).abs();
    let (e1, e2) = (one(0.1), one(0.05));
    assert!(e1 <= 1e-7, "{e1:e}");
    let ratio = (e1 / e2).log2();
    assert!((ratio - 6.0).abs() < 0.3, "local order {ratio}");
}
