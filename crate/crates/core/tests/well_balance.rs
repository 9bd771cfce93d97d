use gfswe::cases::{InitialCondition, Reference};
use gfswe::grid::{BathymetryProfile, Boundary};
use gfswe::{find_case, CaseSpec, SchemeKind, Simulation, SimulationConfig};

fn run(case: CaseSpec, scheme: SchemeKind, order: usize, n: usize) -> Simulation {
    let mut cfg = SimulationConfig::new(scheme, order, n);
    cfg.snapshots = Some(vec![]);
    let mut sim = Simulation::new(case, cfg).unwrap();
    sim.run(|_, _| Ok(())).unwrap();
    sim
}

#[test]
fn lake_at_rest_is_preserved_to_roundoff() {
    for order in [3, 5] {
        for n in [25, 100] {
            let mut sim = run(
                find_case("lake_at_rest").unwrap(),
                SchemeKind::GfWb,
                order,
                n,
            );
            let e = sim.errors().unwrap();
            let (lh, lq) = (e.l2_h.unwrap(), e.l2_q.unwrap());
            assert!(lh <= 5e-12 && lq <= 5e-13, "p={order} N={n}: {lh:e} {lq:e}");
        }
    }
}

#[test]
fn non_balanced_schemes_drift_from_lake_at_rest() {
    for scheme in [SchemeKind::GfNonwb, SchemeKind::Classical] {
        let mut sim = run(find_case("lake_at_rest").unwrap(), scheme, 5, 25);
        assert!(sim.errors().unwrap().l2_h.unwrap() > 1e-8, "{scheme}");
    }
}

#[test]
fn lake_at_rest_over_a_step_is_preserved() {
    let eta = 2.0;
    let case = CaseSpec {
        name: "step_lake".into(),
        bathymetry: BathymetryProfile::Step {
            start: 8.0,
            end: 12.0,
            height: 0.2,
        },
        initial: InitialCondition::LakeAtRest { eta },
        left: Boundary::LakeAtRest { eta },
        right: Boundary::LakeAtRest { eta },
        reference: Reference::LakeAtRest { eta },
        invariants: None,
        steady: false,
        t_end: 2.0,
        g: 9.812,
        ..find_case("step_subcritical").unwrap()
    };
    for order in [3, 5] {
        let mut sim = run(case.clone(), SchemeKind::GfWb, order, 50);
        let e = sim.errors().unwrap();
        assert!(
            e.l2_h.unwrap() <= 1e-12 && e.l2_q.unwrap() <= 1e-12,
            "p={order}: {e:?}"
        );
        let k = sim.k().unwrap().unwrap();
        let k0 = 9.812 * 0.5 * eta * eta;
        assert!(
            k.iter().all(|v| (v - k0).abs() <= 1e-12 * k0),
            "K not constant"
        );
    }
}

#[test]
fn uniform_flow_is_bitwise_stationary() {
    for scheme in [SchemeKind::GfWb, SchemeKind::GfNonwb, SchemeKind::Classical] {
        for order in [3, 5] {
            let mut cfg = SimulationConfig::new(scheme, order, 40);
            cfg.snapshots = Some(vec![]);
            let mut sim = Simulation::new(find_case("uniform_flow").unwrap(), cfg).unwrap();
            let y0 = sim.vector().to_vec();
            for _ in 0..10 {
                sim.step(f64::INFINITY).unwrap();
            }
            assert_eq!(sim.vector(), &y0[..], "{scheme} p={order}");
        }
    }
}

#[test]
fn short_supercritical_runs_stay_finite() {
    for scheme in [SchemeKind::GfWb, SchemeKind::Classical] {
        let mut cfg = SimulationConfig::new(scheme, 5, 50);
        cfg.snapshots = Some(vec![]);
        cfg.t_end = Some(0.5);
        let mut sim = Simulation::new(find_case("supercritical").unwrap(), cfg).unwrap();
        let s = sim.run(|_, _| Ok(())).unwrap();
        assert!(s.t_final == 0.5 && s.steps > 0);
        assert!(sim.h().iter().chain(sim.q()).all(|v| v.is_finite()));
        assert!(s.errors.q_drift.unwrap().is_finite());
    }
}
