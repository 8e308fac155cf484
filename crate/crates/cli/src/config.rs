use std::path::Path;
use std::sync::Arc;

use chainstab::scenarios::{build_jet_engine, build_scalar, JET_ENGINE_LABEL, SCALAR_LABEL};
use chainstab::stability::ScheduleModel;
use chainstab::{
    ControlSystem, DisturbanceKind, DisturbanceSignal, IntegratorConfig, PiecewiseFeedback,
    Region, SchedulePerturbation, SetChain,
};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Top-level run description shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub chain: ChainSpec,
    #[serde(default)]
    pub feedback: FeedbackSpec,
    /// Defaults to `d ≡ 0` (or no channel for the scalar system).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceKind>,
    #[serde(default)]
    pub schedule: SchedulePerturbation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteSpec>,
}

fn default_t_end() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SystemSpec {
    #[serde(rename = "jet_engine_perturbed")]
    JetEngine {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    /// `a(x) = Σ cₖ xᵏ`.
    #[serde(rename = "scalar_positive_drift")]
    Scalar {
        #[serde(default = "default_drift")]
        coefficients: Vec<f64>,
    },
}

fn default_epsilon() -> f64 {
    0.001
}

fn default_drift() -> Vec<f64> {
    vec![0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSpec {
    #[default]
    Builtin,
    /// Explicit regions `Ω₁ = Θ, Ω₂, …` and controls `v₂, …`.
    Custom {
        regions: Vec<Region>,
        controls: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackSpec {
    /// Base sampling period. Defaults to `ε` for the jet engine and to the
    /// certified `h̃` for the scalar system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Replaces the control of one chain cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<FaultSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub cell: usize,
    pub control: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecreaseSpec {
    pub delta: f64,
    pub r_level: f64,
    pub x1_max: f64,
    pub x1_nodes: usize,
    pub x2_nodes: usize,
    pub d_nodes: usize,
}

impl Default for DecreaseSpec {
    fn default() -> Self {
        Self {
            delta: 7.0,
            r_level: 16.0,
            x1_max: 20.0,
            x1_nodes: 201,
            x2_nodes: 41,
            d_nodes: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QExample {
    /// `{|x₂| ≤ 1}` toward `{|x₁| ≤ 4}` with `v = 0`.
    Band,
    /// `{x₂ ≤ −1}` toward the band with `v = 1`.
    Cell3,
    /// `{x₂ ≥ 1}` toward the band with `v = −1`.
    Cell4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropertyQSpec {
    pub example: QExample,
    pub trials: usize,
    pub mesh: f64,
    /// Starts are drawn from `[−w, w]²` inside the source.
    pub box_half_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Radius grid of the tabulated bounds.
    pub ball_radius: f64,
    pub ball_count: usize,
    pub ball_nodes: usize,
}

impl Default for PropertyQSpec {
    fn default() -> Self {
        Self {
            example: QExample::Band,
            trials: 200,
            mesh: 0.1,
            box_half_width: 14.0,
            radius: None,
            ball_radius: 30.0,
            ball_count: 61,
            ball_nodes: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalitySpec {
    pub nodes: usize,
    pub d_nodes: usize,
    /// Multiplies `L` (values below 1 inject a fault).
    pub l_scale: f64,
}

impl Default for InequalitySpec {
    fn default() -> Self {
        Self {
            nodes: 21,
            d_nodes: 3,
            l_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decrease: Option<DecreaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property_q: Option<PropertyQSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<InequalitySpec>,
    #[serde(default)]
    pub sampling_bound: bool,
}

/// Suite parameters; the seed comes from the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSpec {
    pub radii: Vec<f64>,
    pub eps_levels: Vec<f64>,
    pub delta_levels: Vec<f64>,
    pub trials: usize,
    pub disturbance_mesh: f64,
    pub schedule: ScheduleModel,
    pub envelope_tol: f64,
    /// Also check the cell-index descent (jet engine only).
    pub descent: bool,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        let r = chainstab::stability::SuiteRequest::default();
        Self {
            radii: r.radii,
            eps_levels: r.eps_levels,
            delta_levels: r.delta_levels,
            trials: r.trials,
            disturbance_mesh: r.disturbance_mesh,
            schedule: r.schedule,
            envelope_tol: r.envelope_tol,
            descent: false,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| format!("line {} column {}: {e}", e.line(), e.column()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.t_end > 0.0) {
            return Err(format!("t_end: must be positive, got {}", self.t_end));
        }
        self.integrator.validate().map_err(|e| format!("integrator: {e}"))?;
        self.schedule.validate().map_err(|e| format!("schedule: {e}"))?;
        if let Some(h) = self.feedback.period {
            if !(h > 0.0) {
                return Err(format!("feedback.period: must be positive, got {h}"));
            }
        }
        Ok(())
    }

    /// Replaces the seed everywhere randomness is configured.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let Some(DisturbanceKind::PiecewiseConstantRandom { seed: s, .. }) = &mut self.disturbance
        {
            *s = seed;
        }
    }

    pub fn label(&self) -> &'static str {
        match self.system {
            SystemSpec::JetEngine { .. } => JET_ENGINE_LABEL,
            SystemSpec::Scalar { .. } => SCALAR_LABEL,
        }
    }
}

/// Everything needed to run the closed loop.
pub struct Built {
    pub system: ControlSystem,
    pub feedback: PiecewiseFeedback,
    pub disturbance: DisturbanceSignal,
    pub x0: Vec<f64>,
    pub jet: Option<chainstab::scenarios::JetEngineScenario>,
}

pub fn build(cfg: &ScenarioConfig) -> Result<Built, Failure> {
    let err = |what: &str, e: &dyn std::fmt::Display| Failure::Config(format!("{what}: {e}"));
    let (system, mut feedback, jet) = match &cfg.system {
        SystemSpec::JetEngine { epsilon } => {
            let sc = build_jet_engine(*epsilon).map_err(|e| err("system.epsilon", &e))?;
            let fb = sc.figure_feedback();
            (sc.system.clone(), fb, Some(sc))
        }
        SystemSpec::Scalar { coefficients } => {
            let c = coefficients.clone();
            let a = Arc::new(move |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + k));
            let sc = build_scalar(a).map_err(|e| err("system.coefficients", &e))?;
            (sc.system.clone(), sc.feedback(), None)
        }
    };
    if let ChainSpec::Custom { regions, controls } = &cfg.chain {
        let chain = SetChain::finite(regions.clone(), controls.clone())
            .map_err(|e| err("chain", &e))?;
        feedback = PiecewiseFeedback::synthesize(
            {
                let inner = feedback.clone();
                Arc::new(move |x: &[f64]| inner.inner(x))
            },
            feedback.chain().theta(),
            feedback.h_tilde(),
            Arc::new(chain),
            feedback.dwell(),
            system.control_set.clone(),
        )
        .map_err(|e| err("chain", &e))?
        .with_period(feedback.period());
    }
    if let Some(h) = cfg.feedback.period {
        feedback = feedback.with_period(h);
    }
    if let Some(f) = &cfg.feedback.fault {
        feedback = feedback
            .with_cell_control(f.cell, f.control.clone())
            .map_err(|e| err("feedback.fault", &e))?;
    }
    let disturbance = match &cfg.disturbance {
        None if system.disturbance_dim() == 0 => DisturbanceSignal::none(),
        None => DisturbanceSignal::constant(
            vec![0.0; system.disturbance_dim()],
            system.disturbance_box.clone(),
        )
        .map_err(|e| err("disturbance", &e))?,
        Some(kind) => DisturbanceSignal::new(kind.clone(), system.disturbance_box.clone())
            .map_err(|e| err("disturbance", &e))?,
    };
    let x0 = cfg.x0.clone().unwrap_or_else(|| match cfg.system {
        SystemSpec::JetEngine { .. } => vec![10.0, 2.0],
        SystemSpec::Scalar { .. } => vec![1.0],
    });
    system.check_state(&x0).map_err(|e| err("x0", &e))?;
    Ok(Built {
        system,
        feedback,
        disturbance,
        x0,
        jet,
    })
}

/// The explicit configuration behind `reproduce-figure N`.
pub fn figure_config(index: usize, epsilon: f64) -> Result<ScenarioConfig, Failure> {
    let sc = build_jet_engine(epsilon).map_err(|e| Failure::Config(e.to_string()))?;
    let fig = sc.figure(index).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(ScenarioConfig {
        system: SystemSpec::JetEngine { epsilon },
        chain: ChainSpec::Builtin,
        feedback: FeedbackSpec {
            period: Some(fig.period),
            fault: None,
        },
        disturbance: Some(fig.disturbance.kind),
        schedule: fig.schedule,
        x0: Some(fig.x0),
        t_end: fig.t_end,
        integrator: IntegratorConfig::default(),
        seed: 0,
        certify: None,
        suite: None,
    })
}
