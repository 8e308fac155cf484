//! Built-in systems: the perturbed jet engine with its four-cell chain, and
//! the scalar positive-drift system with its unbounded chain.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::certify::{
    reach_bounds, BallGrid, CertifyError, Envelope, GridSpec, LyapunovData, LyapunovKind,
    ReachabilityCertificate, SamplingBound,
};
use crate::dynamics::{
    AxisBound, BoxSet, ControlSet, ControlSystem, DisturbanceKind, DisturbanceSignal,
    SchedulePerturbation,
};
use crate::setchain::{ChainGenerator, InnerFeedback, PiecewiseFeedback, Region, RegionExpr, SetChain};
use crate::vecops::linspace;

pub const JET_ENGINE_LABEL: &str = "jet_engine_perturbed";
pub const SCALAR_LABEL: &str = "scalar_positive_drift";

#[derive(Debug, Clone, Error)]
pub enum ScenarioError {
    #[error("epsilon must be positive, got {0}")]
    NonpositiveEpsilon(f64),
    #[error("drift must vanish at 0 and be positive elsewhere; a({x}) = {value}")]
    NotPositiveDrift { x: f64, value: f64 },
    #[error("no figure scenario {0} (expected 1, 2 or 3)")]
    UnknownFigure(usize),
    #[error("no reachability example for cell {0} (expected 3 or 4)")]
    UnknownCell(usize),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

/// `ẋ₁ = d₁x₁ + (3/2)d₂x₁² − (1/2)x₁³ + x₂`, `ẋ₂ = u`, `d ∈ [−1, 1]²`.
pub fn jet_engine_system() -> ControlSystem {
    ControlSystem::new(
        JET_ENGINE_LABEL,
        2,
        1,
        BoxSet::symmetric(2, 1.0),
        ControlSet::unconstrained(1),
        |d, x, u, out| {
            let x1 = x[0];
            out[0] = d[0] * x1 + 1.5 * d[1] * x1 * x1 - 0.5 * x1 * x1 * x1 + x[1];
            out[1] = u[0];
        },
    )
}

pub type Drift = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `ẋ = a(x) + u`, `u ≤ 0`, no disturbance channel.
pub fn scalar_system(a: Drift) -> ControlSystem {
    ControlSystem::new(
        SCALAR_LABEL,
        1,
        1,
        BoxSet::empty_dim(),
        ControlSet {
            axes: vec![AxisBound {
                lower: None,
                upper: Some(0.0),
            }],
        },
        move |_d, x, u, out| out[0] = a(x[0]) + u[0],
    )
}

/// Disturbance/schedule setup for one of the three figure runs.
#[derive(Debug, Clone, Serialize)]
pub struct FigureScenario {
    pub index: usize,
    pub disturbance: DisturbanceSignal,
    pub schedule: SchedulePerturbation,
    pub x0: Vec<f64>,
    pub period: f64,
    pub t_end: f64,
}

/// Constants, chain and feedback for the jet engine.
#[derive(Clone)]
pub struct JetEngineScenario {
    pub epsilon: f64,
    /// `R = 457/2 + ε`.
    pub r_level: f64,
    /// `L = 7/2 + √(2R)`.
    pub l_const: f64,
    /// `γ = 9R/4 + (R² + 1)/2 + ½(5R − 332)²`.
    pub gamma: f64,
    /// `M = √((80/3)(421² + 225R²))`.
    pub m_const: f64,
    pub dwell: f64,
    pub system: ControlSystem,
    pub sampling: SamplingBound,
    theta: Region,
    chain: Arc<SetChain>,
}

impl fmt::Debug for JetEngineScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetEngineScenario")
            .field("epsilon", &self.epsilon)
            .field("r_level", &self.r_level)
            .field("l_const", &self.l_const)
            .field("gamma", &self.gamma)
            .field("m_const", &self.m_const)
            .field("sampling", &self.sampling)
            .finish()
    }
}

/// Closed-form constants of the jet-engine scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetEngineConstants {
    pub epsilon: f64,
    pub r_level: f64,
    pub l_const: f64,
    pub gamma: f64,
    pub m_const: f64,
}

pub fn jet_engine_constants(epsilon: f64) -> JetEngineConstants {
    let r = 457.0 / 2.0 + epsilon;
    JetEngineConstants {
        epsilon,
        r_level: r,
        l_const: 3.5 + (2.0 * r).sqrt(),
        gamma: 9.0 * r / 4.0 + (r * r + 1.0) / 2.0 + 0.5 * (5.0 * r - 332.0).powi(2),
        m_const: ((80.0 / 3.0) * (421.0f64.powi(2) + 225.0 * r * r)).sqrt(),
    }
}

/// `k̃(x) = −421x₁ − 89x₂ + (5/2)x₁³`.
pub fn jet_engine_inner(x: &[f64]) -> Vec<f64> {
    vec![-421.0 * x[0] - 89.0 * x[1] + 2.5 * x[0].powi(3)]
}

pub fn build_jet_engine(epsilon: f64) -> Result<JetEngineScenario, ScenarioError> {
    if !(epsilon > 0.0) {
        return Err(ScenarioError::NonpositiveEpsilon(epsilon));
    }
    let k = jet_engine_constants(epsilon);
    let r = k.r_level;
    let theta = Region::sublevel(LyapunovKind::JetEngine, r, true)
        .with_bounding_box(BoxSet::new(
            vec![-(2.0 * r).sqrt(), -(52.0 * r).sqrt()],
            vec![(2.0 * r).sqrt(), (52.0 * r).sqrt()],
        ))
        .with_label("theta");
    let chain = SetChain::finite(
        vec![
            theta.clone(),
            Region::band(1, 1.0).with_label("omega_2"),
            Region::axis_at_most(2, 1, -1.0, false).with_label("omega_3"),
            Region::axis_at_least(2, 1, 1.0, false).with_label("omega_4"),
        ],
        vec![vec![0.0], vec![1.0], vec![-1.0]],
    )
    .expect("four regions, three controls");
    let sampling = SamplingBound::new(
        k.l_const,
        k.gamma,
        k.m_const,
        r,
        Arc::new(|s| s),
        0.5,
    )?;
    Ok(JetEngineScenario {
        epsilon,
        r_level: r,
        l_const: k.l_const,
        gamma: k.gamma,
        m_const: k.m_const,
        dwell: 1.0,
        system: jet_engine_system(),
        sampling,
        theta,
        chain: Arc::new(chain),
    })
}

impl JetEngineScenario {
    pub fn constants(&self) -> JetEngineConstants {
        JetEngineConstants {
            epsilon: self.epsilon,
            r_level: self.r_level,
            l_const: self.l_const,
            gamma: self.gamma,
            m_const: self.m_const,
        }
    }

    pub fn theta(&self) -> &Region {
        &self.theta
    }

    pub fn chain(&self) -> Arc<SetChain> {
        Arc::clone(&self.chain)
    }

    pub fn lyapunov(&self) -> LyapunovData {
        LyapunovKind::JetEngine.into()
    }

    pub fn inner_feedback(&self) -> InnerFeedback {
        Arc::new(jet_engine_inner)
    }

    /// Feedback with the certified period `h = min{h̃, r}`.
    pub fn feedback(&self) -> PiecewiseFeedback {
        PiecewiseFeedback::synthesize(
            self.inner_feedback(),
            &self.theta,
            self.sampling.h_tilde,
            self.chain(),
            self.dwell,
            self.system.control_set.clone(),
        )
        .expect("built-in chain is consistent")
    }

    /// Feedback sampled with `h = ε`, as in the figure runs.
    pub fn figure_feedback(&self) -> PiecewiseFeedback {
        self.feedback().with_period(self.epsilon)
    }

    /// Grid on `Θ` in the coordinates `(x₁, x₂ + 5x₁)`, where `Θ` is a disk.
    pub fn theta_grid(&self, nodes: usize) -> GridSpec {
        let rad = (2.0 * self.r_level).sqrt();
        GridSpec::on_box(&BoxSet::symmetric(2, rad), &[nodes, nodes])
            .with_transform(vec![vec![1.0, 0.0], vec![-5.0, 1.0]])
    }

    pub fn figure(&self, index: usize) -> Result<FigureScenario, ScenarioError> {
        let dbox = self.system.disturbance_box.clone();
        let (disturbance, schedule) = match index {
            1 => (
                DisturbanceSignal::constant(vec![0.0, 1.0], dbox),
                SchedulePerturbation::Zero,
            ),
            2 => (
                DisturbanceSignal::new(
                    DisturbanceKind::Sinusoidal {
                        base: vec![1.0, 0.0],
                        axis: 1,
                        amplitude: 1.0,
                        frequency: 1.0,
                        offset: 0.0,
                    },
                    dbox,
                ),
                SchedulePerturbation::Zero,
            ),
            3 => (
                DisturbanceSignal::constant(vec![1.0, 1.0], dbox),
                SchedulePerturbation::SinusoidalAbs,
            ),
            other => return Err(ScenarioError::UnknownFigure(other)),
        };
        Ok(FigureScenario {
            index,
            disturbance: disturbance.expect("figure disturbances lie in D"),
            schedule,
            x0: vec![10.0, 2.0],
            period: self.epsilon,
            t_end: 20.0,
        })
    }

    /// Reachability certificates of cells 2, 3 and 4 toward lower cells.
    /// Cell 2 uses the decrease-based bounds, cells 3 and 4 the closed forms
    /// for the linear channel.
    pub fn descent_certificates(
        &self,
        ball: &BallGrid,
    ) -> Result<BTreeMap<usize, ReachabilityCertificate>, ScenarioError> {
        let mut out = BTreeMap::new();
        out.insert(2, band_example().certificate(ball)?);
        out.insert(3, linear_channel_example(3)?.certificate);
        out.insert(4, linear_channel_example(4)?.certificate);
        Ok(out)
    }
}

/// Reachability of `{|x₂| ≤ 1}` from `{x₂ ≥ 1}` (cell 4, `v = −1`) or from
/// `{x₂ ≤ −1}` (cell 3, `v = 1`).
#[derive(Debug, Clone)]
pub struct LinearChannelExample {
    pub source: Region,
    pub target: Region,
    pub certificate: ReachabilityCertificate,
}

pub fn linear_channel_example(cell: usize) -> Result<LinearChannelExample, ScenarioError> {
    let (source, v, t_bound): (Region, f64, fn(&[f64]) -> f64) = match cell {
        4 => (Region::axis_at_least(2, 1, 1.0, false), -1.0, |x| (x[1] - 1.0).max(0.0)),
        // The hitting time from x₂₀ ≤ −1 under v = 1 is −1 − x₂₀.
        3 => (Region::axis_at_most(2, 1, -1.0, false), 1.0, |x| (-1.0 - x[1]).max(0.0)),
        other => return Err(ScenarioError::UnknownCell(other)),
    };
    let certificate = ReachabilityCertificate::new(
        format!("cell {cell} -> band |x2| <= 1"),
        vec![v],
        1.0,
        0.0,
        Envelope::analytic("s", |s| s),
        Envelope::analytic("2s exp(4 + 4s)", |s| 2.0 * s * (4.0 + 4.0 * s).exp()),
        t_bound,
    );
    Ok(LinearChannelExample {
        source,
        target: Region::band(1, 1.0),
        certificate,
    })
}

/// Decrease data for reaching `{|x₂| ≤ 1, |x₁| ≤ 4}` from the band with
/// `v = 0`, `V = x₁²`.
#[derive(Debug, Clone)]
pub struct BandExample {
    pub omega: Region,
    pub target: Region,
    pub lyapunov: LyapunovData,
    pub control: Vec<f64>,
    pub r_level: f64,
    pub delta: f64,
    pub p: f64,
    pub dwell: f64,
}

pub fn band_example() -> BandExample {
    let v = LyapunovKind::AxisSquare { axis: 0 };
    BandExample {
        omega: Region::band(1, 1.0),
        target: Region::band(1, 1.0).intersect(&Region::sublevel(v, 16.0, false)),
        lyapunov: v.into(),
        control: vec![0.0],
        r_level: 16.0,
        delta: 7.0,
        p: 4.0,
        dwell: 1.0,
    }
}

impl BandExample {
    /// Bounds with `a₁(s) = s`, `a₂(s) = 2s`.
    pub fn certificate(&self, ball: &BallGrid) -> Result<ReachabilityCertificate, CertifyError> {
        reach_bounds(
            "band -> |x1| <= 4",
            &self.lyapunov,
            self.r_level,
            self.delta,
            self.p,
            &|s| s,
            &|s| 2.0 * s,
            self.dwell,
            self.control.clone(),
            ball,
        )
    }
}

const DRIFT_GRID_STEP: f64 = 1e-4;

fn grid_max(a: &Drift, lo: f64, hi: f64) -> f64 {
    let n = ((hi - lo) / DRIFT_GRID_STEP).round() as usize + 1;
    linspace(lo, hi, n.max(2))
        .into_iter()
        .map(|x| a(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

struct ScalarTail {
    drift: Drift,
}

impl ChainGenerator for ScalarTail {
    fn region(&self, j: usize) -> Region {
        let lo = (j - 1) as f64;
        let hi = j as f64;
        Region {
            expr: RegionExpr::Intersection {
                parts: vec![
                    RegionExpr::HalfSpace {
                        normal: vec![-1.0],
                        offset: -lo,
                        strict: true,
                    },
                    RegionExpr::HalfSpace {
                        normal: vec![1.0],
                        offset: hi,
                        strict: false,
                    },
                ],
            },
            bounding_box: Some(BoxSet::new(vec![lo], vec![hi])),
            label: Some(format!("omega_{j}")),
        }
    }

    fn control(&self, j: usize) -> Vec<f64> {
        vec![-1.0 - grid_max(&self.drift, (j - 1) as f64, j as f64)]
    }

    fn contains(&self, j: usize, x: &[f64]) -> bool {
        (j - 1) as f64 <= x[0] && x[0] <= j as f64 && x[0] != (j - 1) as f64
    }
}

/// The scalar system with `Θ = (−∞, 2)`, `Ω_j = (j−1, j]`.
#[derive(Clone)]
pub struct ScalarScenario {
    pub drift: Drift,
    /// Smallest integer `L` with `a(x) ≤ Lx` on the `[0, 2]` grid.
    pub l_const: f64,
    pub h_tilde: f64,
    pub dwell: f64,
    pub system: ControlSystem,
    theta: Region,
    chain: Arc<SetChain>,
}

impl fmt::Debug for ScalarScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarScenario")
            .field("l_const", &self.l_const)
            .field("h_tilde", &self.h_tilde)
            .field("dwell", &self.dwell)
            .finish()
    }
}

pub fn build_scalar(drift: Drift) -> Result<ScalarScenario, ScenarioError> {
    let a0 = drift(0.0);
    if a0 != 0.0 {
        return Err(ScenarioError::NotPositiveDrift { x: 0.0, value: a0 });
    }
    for k in 1..=1_000_000u32 {
        let x = k as f64 * DRIFT_GRID_STEP;
        for s in [x, -x] {
            let v = drift(s);
            if !(v > 0.0) {
                return Err(ScenarioError::NotPositiveDrift { x: s, value: v });
            }
        }
    }
    let grid = linspace(0.0, 2.0, (2.0 / DRIFT_GRID_STEP).round() as usize + 1);
    let mut l = 1.0;
    while grid.iter().any(|&x| drift(x) > l * x) {
        l += 1.0;
        if l > 1e9 {
            return Err(ScenarioError::NotPositiveDrift {
                x: 0.0,
                value: f64::INFINITY,
            });
        }
    }
    let theta = Region::axis_at_most(1, 0, 2.0, true).with_label("theta");
    let chain = SetChain::lazy(
        theta.clone(),
        Arc::new(ScalarTail {
            drift: Arc::clone(&drift),
        }),
    );
    Ok(ScalarScenario {
        system: scalar_system(Arc::clone(&drift)),
        drift,
        l_const: l,
        h_tilde: 1.0 / (l + 1.0),
        dwell: 1.0,
        theta,
        chain: Arc::new(chain),
    })
}

impl ScalarScenario {
    pub fn theta(&self) -> &Region {
        &self.theta
    }

    pub fn chain(&self) -> Arc<SetChain> {
        Arc::clone(&self.chain)
    }

    /// A fresh chain that refuses to grow past index `cap`.
    pub fn chain_with_cap(&self, cap: usize) -> SetChain {
        SetChain::lazy(
            self.theta.clone(),
            Arc::new(ScalarTail {
                drift: Arc::clone(&self.drift),
            }),
        )
        .with_cap(cap)
    }

    /// `k̃(x) = 0` for `x ≤ 0`, `−(L+1)x` for `x > 0`.
    pub fn inner_feedback(&self) -> InnerFeedback {
        let gain = self.l_const + 1.0;
        Arc::new(move |x: &[f64]| vec![if x[0] <= 0.0 { 0.0 } else { -gain * x[0] }])
    }

    pub fn feedback(&self) -> PiecewiseFeedback {
        PiecewiseFeedback::synthesize(
            self.inner_feedback(),
            &self.theta,
            self.h_tilde,
            self.chain(),
            self.dwell,
            self.system.control_set.clone(),
        )
        .expect("built-in chain is consistent")
    }
}
