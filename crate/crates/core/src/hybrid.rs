//! Sample-and-hold closed loop with perturbed sampling instants.
//!
//! At each instant `τᵢ` the feedback is evaluated at `x(τᵢ)`, the next
//! instant is `τᵢ₊₁ = τᵢ + h·exp(−d̃(τᵢ))`, and the system is integrated on
//! `[τᵢ, τᵢ₊₁]` with the control held. The left limit at `τᵢ₊₁` is the
//! initial state of the next interval.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{ControlSystem, DisturbanceSignal, DynamicsError, SchedulePerturbation};
use crate::integrate::{DenseSegment, IntegrateError, Integrator, IntegratorConfig};
use crate::setchain::{ChainError, PiecewiseFeedback};
use crate::vecops::norm;

#[derive(Debug, Clone, Error)]
pub enum SimulationError {
    #[error("invalid simulation request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Integrate(IntegrateError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    FiniteEscape { time: f64, last_cell: usize },
    StepLimit { time: f64, last_cell: usize },
}

/// `τᵢ₊₁ = τᵢ + h·exp(−d̃(τᵢ))`.
pub fn next_instant(tau: f64, h: f64, sched: &SchedulePerturbation) -> f64 {
    tau + h * (-sched.value(tau)).exp()
}

/// Sampling instants `τ₀ = 0 < τ₁ < …` that lie in `[0, t_end]`.
pub fn realized_instants(h: f64, sched: &SchedulePerturbation, t_end: f64) -> Vec<f64> {
    assert!(h > 0.0, "sampling period must be positive");
    let mut out = vec![0.0];
    let mut tau = 0.0;
    loop {
        tau = next_instant(tau, h, sched);
        if tau > t_end {
            break;
        }
        out.push(tau);
    }
    out
}

/// One closed-loop run: a dense segment per sampling interval.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub state_dim: usize,
    pub control_dim: usize,
    /// `segments[i]` covers `[τᵢ, min(τᵢ₊₁, t_end)]` under `u = k(x(τᵢ))`.
    pub segments: Vec<DenseSegment>,
    /// Chain cell of `x(τᵢ)`.
    pub cells: Vec<usize>,
    /// Instant following the last interval (may exceed `t_end`).
    pub next_instant: f64,
    pub termination: Termination,
}

/// A row of the dense trajectory record.
#[derive(Debug, Clone, Copy)]
pub struct DensePoint<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub u: &'a [f64],
    pub is_sampling_instant: bool,
    pub cell: usize,
}

impl Trajectory {
    pub fn instants(&self) -> Vec<f64> {
        self.segments.iter().map(DenseSegment::start).collect()
    }

    pub fn instant_state(&self, i: usize) -> &[f64] {
        self.segments[i].initial_state()
    }

    pub fn control(&self, i: usize) -> &[f64] {
        self.segments[i].control()
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].start()
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().unwrap().end()
    }

    pub fn final_state(&self) -> &[f64] {
        self.segments.last().unwrap().final_state()
    }

    pub fn escaped(&self) -> bool {
        matches!(self.termination, Termination::FiniteEscape { .. })
    }

    /// Interval index whose segment covers `t` (left-closed).
    pub fn interval_at(&self, t: f64) -> usize {
        self.segments
            .partition_point(|s| s.start() <= t)
            .saturating_sub(1)
    }

    pub fn state_at(&self, t: f64) -> Vec<f64> {
        self.segments[self.interval_at(t)].state_at(t)
    }

    /// Every stored node. Interior interval endpoints appear once, as the
    /// sampling-instant row of the following interval.
    pub fn dense_points(&self) -> impl Iterator<Item = DensePoint<'_>> + '_ {
        let last = self.segments.len() - 1;
        self.segments.iter().enumerate().flat_map(move |(i, seg)| {
            let take = if i == last { seg.len() } else { seg.len() - 1 };
            let cell = self.cells[i];
            seg.nodes().take(take).enumerate().map(move |(k, (t, x))| DensePoint {
                t,
                x,
                u: seg.control(),
                is_sampling_instant: k == 0,
                cell,
            })
        })
    }

    /// `sup |x(t)|` over stored nodes.
    pub fn sup_norm(&self) -> f64 {
        self.segments
            .iter()
            .map(DenseSegment::max_norm)
            .fold(0.0, f64::max)
    }

    /// `sup |x(t)|` over stored nodes with `t ∈ [t0, t1]`, plus both
    /// interpolated endpoints.
    pub fn sup_norm_between(&self, t0: f64, t1: f64) -> f64 {
        let mut best = norm(&self.state_at(t0)).max(norm(&self.state_at(t1)));
        for seg in &self.segments[self.interval_at(t0)..=self.interval_at(t1)] {
            for (t, x) in seg.nodes() {
                if t >= t0 && t <= t1 {
                    best = best.max(norm(x));
                }
            }
        }
        best
    }

    /// Last time the stored record is outside the open ball `|x| < eps`, or
    /// `None` if it never is. Exits between nodes are resolved by bisection
    /// on the continuous extension.
    pub fn last_exit_time(&self, eps: f64) -> Option<f64> {
        let mut last: Option<(usize, usize)> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            for k in 0..seg.len() {
                if norm(seg.state(k)) >= eps {
                    last = Some((i, k));
                }
            }
        }
        let (i, k) = last?;
        let seg = &self.segments[i];
        if k + 1 >= seg.len() {
            return Some(seg.time(k));
        }
        let (mut lo, mut hi) = (seg.time(k), seg.time(k + 1));
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm(&seg.state_at(mid)) >= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

const END_SNAP: f64 = 1e-12;

/// Runs the closed loop from `x0` until the first sampling instant at or
/// after `t_end`. A finite escape ends the run early and is reported in
/// [`Trajectory::termination`] together with the partial record.
pub fn simulate_closed_loop(
    sys: &ControlSystem,
    fb: &PiecewiseFeedback,
    x0: &[f64],
    d_sig: &DisturbanceSignal,
    sched: &SchedulePerturbation,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, SimulationError> {
    if !(t_end > 0.0) {
        return Err(SimulationError::InvalidRequest(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    cfg.validate().map_err(SimulationError::InvalidRequest)?;
    sys.check_state(x0)?;
    if d_sig.domain.dim() != sys.disturbance_dim() {
        return Err(DynamicsError::DimensionMismatch {
            what: "disturbance signal",
            expected: sys.disturbance_dim(),
            got: d_sig.domain.dim(),
        }
        .into());
    }
    sched
        .validate()
        .map_err(|e| SimulationError::InvalidRequest(e.to_string()))?;

    let h = fb.period();
    let mut integrator = Integrator::new(sys, cfg);
    let mut segments = Vec::new();
    let mut cells = Vec::new();
    let mut tau = 0.0;
    let mut x = x0.to_vec();
    let termination = loop {
        let (u, cell) = fb.evaluate(&x)?;
        let next = next_instant(tau, h, sched);
        let stop = next.min(t_end);
        cells.push(cell);
        match integrator.segment(d_sig, &x, &u, tau, stop) {
            Ok(seg) => {
                x = seg.final_state().to_vec();
                segments.push(seg);
            }
            Err(IntegrateError::FiniteEscape { time, partial }) => {
                segments.push(*partial);
                break Termination::FiniteEscape {
                    time,
                    last_cell: cell,
                };
            }
            Err(IntegrateError::StepLimitExceeded { time, partial }) => {
                segments.push(*partial);
                break Termination::StepLimit {
                    time,
                    last_cell: cell,
                };
            }
            Err(e) => return Err(SimulationError::Integrate(e)),
        }
        tau = next;
        // Accumulated instants can fall a rounding error short of t_end.
        if tau >= t_end - END_SNAP * t_end.max(1.0) {
            break Termination::ReachedEnd;
        }
    };
    Ok(Trajectory {
        state_dim: sys.state_dim,
        control_dim: sys.control_dim,
        segments,
        cells,
        next_instant: tau,
        termination,
    })
}
