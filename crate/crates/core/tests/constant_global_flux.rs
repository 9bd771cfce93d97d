//! States whose global flux averages are constant are exact steady states.

use gfswe::dec::DecWorkspace;
use gfswe::grid::PhysicalParams;
use gfswe::{catalog, DecScheme, SchemeKind, SpatialOperator, TimeNodes, WenoOrder};

const N: usize = 30;

fn operator(case: &gfswe::CaseSpec, kind: SchemeKind, order: WenoOrder) -> SpatialOperator {
    let params = PhysicalParams::new(case.g, case.n_manning).unwrap();
    SpatialOperator::new(
        kind,
        order,
        case.x_left,
        case.x_right,
        N,
        case.bathymetry.clone(),
        params,
        case.left,
        case.right,
    )
    .unwrap()
}

fn wavy_state(case: &gfswe::CaseSpec) -> Vec<f64> {
    let dx = (case.x_right - case.x_left) / N as f64;
    let x = |i: usize| case.x_left + (i as f64 + 0.5) * dx;
    let mut y: Vec<f64> = (0..N).map(|i| 1.5 + 0.3 * x(i).sin()).collect();
    y.extend((0..N).map(|i| 0.7 + 0.1 * x(i).cos()));
    y
}

#[test]
fn constant_averages_give_zero_residual_and_stationary_steps() {
    for case in catalog() {
        for kind in [SchemeKind::GfWb, SchemeKind::GfNonwb] {
            for order in [WenoOrder::Three, WenoOrder::Five] {
                let mut op = operator(&case, kind, order);
                let mut y = wavy_state(&case);
                let len = op.global_flux(&y).unwrap().averages.len();
                let avg = vec![[0.9, 40.0]; len];
                let mut out = vec![f64::NAN; y.len()];
                op.residual_with_global_averages(&y, &avg, &mut out)
                    .unwrap();
                assert!(
                    out.iter().all(|v| *v == 0.0),
                    "{} {kind} {order:?}",
                    case.name
                );

                let y0 = y.clone();
                let dec = DecScheme::for_order(order.order(), TimeNodes::Equispaced).unwrap();
                let mut ws = DecWorkspace::default();
                for _ in 0..5 {
                    dec.step(
                        &mut y,
                        0.01,
                        |y, out| op.residual_with_global_averages(y, &avg, out),
                        &mut ws,
                    )
                    .unwrap();
                }
                assert_eq!(y, y0, "{} {kind} {order:?}", case.name);
            }
        }
    }
}

#[test]
fn genuine_residual_of_wavy_state_is_nonzero() {
    let case = gfswe::find_case("subcritical").unwrap();
    let mut op = operator(&case, SchemeKind::GfWb, WenoOrder::Five);
    let y = wavy_state(&case);
    let mut out = vec![0.0; y.len()];
    op.residual(&y, &mut out).unwrap();
    assert!(out.iter().any(|v| v.abs() > 1e-3));
}
