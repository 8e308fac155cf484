//! Grid-based certificates.
//!
//! Every verdict here is "holds on the grid within the margin", and carries
//! the grid resolution and truncation it was obtained on.

mod attractor;
mod decrease;
mod envelope;
mod inequalities;
mod lyapunov;
mod reach;
mod sampling;

pub use attractor::{estimate_attractor_reach, AttractorReport, AttractorRequest};
pub use decrease::{certify_decrease, refine_decrease_maximizer, DecreaseReport};
pub use envelope::{invert_increasing, Envelope, MonotoneTable, ScalarFn};
pub use inequalities::{check_emulation_inequalities, InequalityCheck, InequalityGrid, InequalityReport};
pub use lyapunov::{LyapunovData, LyapunovKind};
pub use reach::{
    check_property_q, reach_bounds, BallGrid, CertificateSummary, PropertyQReport, QRequest,
    ReachabilityCertificate, TrialRecord, Violation, ViolationKind,
};
pub use sampling::{max_sampling_period, SamplingBound};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::BoxSet;
use crate::vecops::{cartesian, linspace};

/// Default absolute tolerance on inequality margins.
pub const MARGIN_TOL: f64 = 1e-9;
/// Default tolerance on hitting-time comparisons.
pub const TIME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Error)]
pub enum CertifyError {
    #[error("grid has no node inside the region")]
    EmptyGrid,
    #[error("could not invert a1 at {target}")]
    InversionFailure { target: f64 },
    #[error("gamma must be positive, got {gamma}")]
    NonpositiveGamma { gamma: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("limit set did not stabilize: {0}")]
    NonConvergence(String),
}

/// Tensor grid on a box, optionally mapped through `x = T·z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Vec<Vec<f64>>>,
}

impl GridSpec {
    pub fn on_box(b: &BoxSet, nodes: &[usize]) -> Self {
        assert_eq!(b.dim(), nodes.len());
        Self {
            lower: b.lower.clone(),
            upper: b.upper.clone(),
            nodes: nodes.to_vec(),
            transform: None,
        }
    }

    pub fn with_transform(mut self, t: Vec<Vec<f64>>) -> Self {
        self.transform = Some(t);
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().product()
    }

    /// Node spacing per axis (in the untransformed coordinates).
    pub fn spacing(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .zip(&self.nodes)
            .map(|((lo, hi), n)| if *n > 1 { (hi - lo) / (*n - 1) as f64 } else { 0.0 })
            .collect()
    }

    /// Doubles the density (`n → 2n − 1` nodes per axis).
    pub fn doubled(&self) -> Self {
        Self {
            nodes: self.nodes.iter().map(|n| 2 * n - 1).collect(),
            ..self.clone()
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .zip(&self.nodes)
            .map(|((lo, hi), n)| linspace(*lo, *hi, *n))
            .collect();
        let pts = cartesian(&axes);
        match &self.transform {
            None => pts,
            Some(t) => pts
                .into_iter()
                .map(|z| t.iter().map(|row| crate::vecops::dot(row, &z)).collect())
                .collect(),
        }
    }
}

/// Grid over a disturbance box with `nodes` points per axis.
pub fn disturbance_grid(d: &BoxSet, nodes: usize) -> Vec<Vec<f64>> {
    GridSpec::on_box(d, &vec![nodes; d.dim()]).points()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_and_transform() {
        let g = GridSpec::on_box(&BoxSet::symmetric(2, 1.0), &[3, 3]);
        assert_eq!(g.points().len(), 9);
        assert_eq!(g.spacing(), vec![1.0, 1.0]);
        let t = g.clone().with_transform(vec![vec![1.0, 0.0], vec![-5.0, 1.0]]);
        let p = t.points();
        assert_eq!(p[8], vec![1.0, -4.0]);
        assert_eq!(g.doubled().node_count(), 25);
        assert_eq!(disturbance_grid(&BoxSet::empty_dim(), 9), vec![Vec::<f64>::new()]);
    }
}
