use std::sync::Arc;

use chainstab::hybrid::simulate_closed_loop;
use chainstab::scenarios::{build_jet_engine, build_scalar};
use chainstab::stability::theta_breach;
use chainstab::{DisturbanceSignal, IntegratorConfig, SchedulePerturbation};
use proptest::prelude::*;

fn square() -> chainstab::scenarios::ScalarScenario {
    build_scalar(Arc::new(|x: f64| x * x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scalar_contracts_inside_theta(x0 in 0.01f64..1.99) {
        let sc = square();
        let traj = simulate_closed_loop(
            &sc.system, &sc.feedback(), &[x0], &DisturbanceSignal::none(),
            &SchedulePerturbation::Zero, 8.0, &IntegratorConfig::default(),
        ).unwrap();
        for p in traj.dense_points() {
            prop_assert!(p.x[0].abs() <= (-p.t).exp() * x0 + 1e-9, "t = {} x = {}", p.t, p.x[0]);
        }
    }

    #[test]
    fn scalar_outside_theta_pushes_down(x0 in 2.0f64..12.0, dt in 0.0f64..1.0) {
        let sc = square();
        let traj = simulate_closed_loop(
            &sc.system, &sc.feedback(), &[x0], &DisturbanceSignal::none(),
            &SchedulePerturbation::Constant { value: dt }, 20.0, &IntegratorConfig::default(),
        ).unwrap();
        prop_assert!(!traj.escaped());
        for i in 0..traj.cells.len() {
            let x = traj.instant_state(i)[0];
            if traj.cells[i] > 1 {
                prop_assert!(traj.control(i)[0] <= -1.0 - x * x + 1e-9);
            }
        }
        prop_assert!(traj.cells.contains(&1));
        prop_assert_eq!(theta_breach(&traj, &sc.chain()), None);
    }

    #[test]
    fn classify_is_first_region(x1 in -40.0f64..40.0, x2 in -40.0f64..40.0) {
        let sc = build_jet_engine(0.001).unwrap();
        let chain = sc.chain();
        let x = [x1, x2];
        let i = chain.classify(&x).unwrap();
        prop_assert!(chain.in_region(i, &x));
        prop_assert!(chain.in_cell(i, &x));
        for j in 1..i {
            prop_assert!(!chain.in_region(j, &x));
        }
    }
}

#[test]
fn jet_figures_stay_in_theta_after_entry() {
    let sc = build_jet_engine(0.001).unwrap();
    let chain = sc.chain();
    for n in 1..=3 {
        let fig = sc.figure(n).unwrap();
        let traj = simulate_closed_loop(
            &sc.system, &sc.figure_feedback(), &fig.x0, &fig.disturbance,
            &fig.schedule, 6.0, &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(traj.cells.contains(&1), "figure {n} never reached theta");
        assert_eq!(theta_breach(&traj, &chain), None, "figure {n}");
        assert!(traj.final_state().iter().all(|v| v.abs() < 1e-2), "figure {n}");
    }
}

#[test]
fn runs_are_reproducible() {
    let sc = build_jet_engine(0.001).unwrap();
    let fig = sc.figure(3).unwrap();
    let go = || {
        simulate_closed_loop(
            &sc.system, &sc.figure_feedback(), &fig.x0, &fig.disturbance,
            &fig.schedule, 2.0, &IntegratorConfig::default(),
        )
        .unwrap()
    };
    let (a, b) = (go(), go());
    let pa: Vec<_> = a.dense_points().map(|p| (p.t, p.x.to_vec(), p.u.to_vec(), p.cell)).collect();
    let pb: Vec<_> = b.dense_points().map(|p| (p.t, p.x.to_vec(), p.u.to_vec(), p.cell)).collect();
    assert_eq!(pa, pb);
}
