//! Shared fixtures for the criterion benches.

use chainstab::hybrid::{simulate_closed_loop, Trajectory};
use chainstab::scenarios::{build_jet_engine, build_scalar, JetEngineScenario, ScalarScenario};
use chainstab::IntegratorConfig;
use std::sync::Arc;

pub fn jet() -> JetEngineScenario {
    build_jet_engine(0.001).expect("default epsilon")
}

pub fn scalar() -> ScalarScenario {
    build_scalar(Arc::new(|x: f64| x * x)).expect("x^2 is a valid drift")
}

/// Figure run `index` of the jet engine over `[0, t_end]`.
pub fn jet_figure(sc: &JetEngineScenario, index: usize, t_end: f64) -> Trajectory {
    let fig = sc.figure(index).expect("figures 1..=3");
    simulate_closed_loop(
        &sc.system,
        &sc.figure_feedback(),
        &fig.x0,
        &fig.disturbance,
        &fig.schedule,
        t_end,
        &IntegratorConfig::default(),
    )
    .expect("figure runs are valid")
}
