use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::BoxSet;
use crate::rng::stream_rng;

/// Built-in Lyapunov functions addressable from region descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LyapunovKind {
    /// `½x₁² + ½(x₂ + 5x₁)²`.
    JetEngine,
    /// `x_axis²`.
    AxisSquare { axis: usize },
    /// `½|x|²`.
    HalfNormSquared,
}

impl LyapunovKind {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            LyapunovKind::JetEngine => {
                let w = x[1] + 5.0 * x[0];
                0.5 * x[0] * x[0] + 0.5 * w * w
            }
            LyapunovKind::AxisSquare { axis } => x[axis] * x[axis],
            LyapunovKind::HalfNormSquared => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            LyapunovKind::JetEngine => vec![26.0 * x[0] + 5.0 * x[1], 5.0 * x[0] + x[1]],
            LyapunovKind::AxisSquare { axis } => {
                let mut g = vec![0.0; x.len()];
                g[axis] = 2.0 * x[axis];
                g
            }
            LyapunovKind::HalfNormSquared => x.to_vec(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LyapunovKind::JetEngine => "jet_engine".into(),
            LyapunovKind::AxisSquare { axis } => format!("x{}^2", axis + 1),
            LyapunovKind::HalfNormSquared => "half_norm_squared".into(),
        }
    }
}

type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// `V` and `∇V` as callables.
#[derive(Clone)]
pub struct LyapunovData {
    pub label: String,
    value: ScalarField,
    gradient: GradientField,
}

impl fmt::Debug for LyapunovData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LyapunovData").field("label", &self.label).finish()
    }
}

impl From<LyapunovKind> for LyapunovData {
    fn from(kind: LyapunovKind) -> Self {
        Self::new(
            kind.label(),
            move |x: &[f64]| kind.value(x),
            move |x: &[f64]| kind.gradient(x),
        )
    }
}

impl LyapunovData {
    pub fn new<V, G>(label: impl Into<String>, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// Largest ratio `|∇V − ∇_fd V| / max(1e−6, 1e−4·|∇V|)` over random
    /// probes; at most 1 means the gradient is consistent.
    pub fn gradient_consistency(&self, probe: &BoxSet, samples: usize, seed: u64) -> f64 {
        let mut rng = stream_rng(seed, 0);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x = probe.sample(&mut rng);
            let g = self.gradient(&x);
            let gnorm = crate::vecops::norm(&g);
            let mut err = 0.0;
            for k in 0..x.len() {
                let step = 1e-6 * x[k].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += step;
                xm[k] -= step;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * step);
                err += (fd - g[k]).powi(2);
            }
            worst = worst.max(err.sqrt() / (1e-4 * gnorm).max(1e-6));
        }
        worst
    }
}
