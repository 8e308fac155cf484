//! Disturbed control systems `ẋ = f(d, x, u)` with `d ∈ D`, `u ∈ U`, plus the
//! disturbance and sampling-schedule signals that drive them.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream_rng;
use crate::vecops::{dot, norm, sub};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("disturbance {value:?} outside the box D")]
    DisturbanceOutOfBox { value: Vec<f64> },
    #[error("control {value:?} outside the control set U")]
    ControlOutOfSet { value: Vec<f64> },
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
}

/// Closed axis-aligned box. Zero-dimensional boxes are allowed (no
/// disturbance channel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "box bounds of unequal length");
        Self { lower, upper }
    }

    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn empty_dim() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn intersect(&self, other: &BoxSet) -> BoxSet {
        BoxSet::new(
            self.lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.max(*b))
                .collect(),
            self.upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.min(*b))
                .collect(),
        )
    }

    /// Largest Euclidean norm attained in the box.
    pub fn max_norm(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| if lo < hi { rng.gen_range(*lo..=*hi) } else { *lo })
            .collect()
    }
}

/// One axis of the control set: `lower ≤ u_k ≤ upper`, either side optional.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBound {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl AxisBound {
    pub fn contains(&self, v: f64) -> bool {
        self.lower.is_none_or(|lo| lo <= v) && self.upper.is_none_or(|hi| v <= hi)
    }
}

/// Control constraint `U`: all of ℝᵐ, a box, or half-lines, axis by axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSet {
    pub axes: Vec<AxisBound>,
}

impl ControlSet {
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            axes: vec![AxisBound::default(); dim],
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.axes.len() && u.iter().zip(&self.axes).all(|(v, b)| b.contains(*v))
    }
}

/// `f(d, x, u)` writing into the last argument.
pub type VectorField = Arc<dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// A disturbed control system `ẋ = f(d, x, u)`.
#[derive(Clone)]
pub struct ControlSystem {
    pub label: String,
    pub state_dim: usize,
    pub control_dim: usize,
    pub disturbance_box: BoxSet,
    pub control_set: ControlSet,
    /// Declares `f(d, 0, 0) = 0` for every `d ∈ D`.
    pub origin_equilibrium: bool,
    rhs: VectorField,
}

impl fmt::Debug for ControlSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlSystem")
            .field("label", &self.label)
            .field("state_dim", &self.state_dim)
            .field("control_dim", &self.control_dim)
            .field("disturbance_box", &self.disturbance_box)
            .field("control_set", &self.control_set)
            .finish()
    }
}

impl ControlSystem {
    pub fn new<F>(
        label: impl Into<String>,
        state_dim: usize,
        control_dim: usize,
        disturbance_box: BoxSet,
        control_set: ControlSet,
        rhs: F,
    ) -> Self
    where
        F: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        assert!(state_dim > 0 && control_dim > 0);
        assert_eq!(control_set.axes.len(), control_dim);
        Self {
            label: label.into(),
            state_dim,
            control_dim,
            disturbance_box,
            control_set,
            origin_equilibrium: true,
            rhs: Arc::new(rhs),
        }
    }

    pub fn with_origin_equilibrium(mut self, flag: bool) -> Self {
        self.origin_equilibrium = flag;
        self
    }

    pub fn disturbance_dim(&self) -> usize {
        self.disturbance_box.dim()
    }

    pub fn check_state(&self, x: &[f64]) -> Result<(), DynamicsError> {
        if x.len() != self.state_dim {
            return Err(DynamicsError::DimensionMismatch {
                what: "state",
                expected: self.state_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn check_control(&self, u: &[f64]) -> Result<(), DynamicsError> {
        if u.len() != self.control_dim {
            return Err(DynamicsError::DimensionMismatch {
                what: "control",
                expected: self.control_dim,
                got: u.len(),
            });
        }
        if !self.control_set.contains(u) {
            return Err(DynamicsError::ControlOutOfSet { value: u.to_vec() });
        }
        Ok(())
    }

    pub fn check_disturbance(&self, d: &[f64]) -> Result<(), DynamicsError> {
        if d.len() != self.disturbance_dim() {
            return Err(DynamicsError::DimensionMismatch {
                what: "disturbance",
                expected: self.disturbance_dim(),
                got: d.len(),
            });
        }
        if !self.disturbance_box.contains(d) {
            return Err(DynamicsError::DisturbanceOutOfBox { value: d.to_vec() });
        }
        Ok(())
    }

    /// Evaluates `f(d, x, u)` after validating every argument.
    pub fn eval_rhs(&self, d: &[f64], x: &[f64], u: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        self.check_disturbance(d)?;
        self.check_state(x)?;
        self.check_control(u)?;
        let mut out = vec![0.0; self.state_dim];
        (self.rhs)(d, x, u, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation for inner loops whose arguments were validated
    /// upstream.
    #[inline]
    pub(crate) fn rhs_into(&self, d: &[f64], x: &[f64], u: &[f64], out: &mut [f64]) {
        (self.rhs)(d, x, u, out)
    }
}

/// Shapes of disturbance signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceKind {
    Constant {
        value: Vec<f64>,
    },
    /// `d_axis(t) = offset + amplitude·sin(frequency·t)`, other axes from
    /// `base`.
    Sinusoidal {
        base: Vec<f64>,
        axis: usize,
        amplitude: f64,
        frequency: f64,
        offset: f64,
    },
    /// Uniform draws per axis, held on each `[kΔt, (k+1)Δt)`.
    PiecewiseConstantRandom {
        mesh: f64,
        seed: u64,
        ranges: Vec<[f64; 2]>,
    },
    /// Zero-order hold through `(times[i], values[i])`, right-continuous.
    Tabulated {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

/// A disturbance realization `d: ℝ⁺ → D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSignal {
    pub kind: DisturbanceKind,
    pub domain: BoxSet,
    #[serde(default = "default_true")]
    pub clamp: bool,
}

fn default_true() -> bool {
    true
}

impl DisturbanceSignal {
    pub fn new(kind: DisturbanceKind, domain: BoxSet) -> Result<Self, DynamicsError> {
        let sig = Self {
            kind,
            domain,
            clamp: true,
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn constant(value: Vec<f64>, domain: BoxSet) -> Result<Self, DynamicsError> {
        Self::new(DisturbanceKind::Constant { value }, domain)
    }

    /// Signal for systems without a disturbance channel.
    pub fn none() -> Self {
        Self {
            kind: DisturbanceKind::Constant { value: Vec::new() },
            domain: BoxSet::empty_dim(),
            clamp: true,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let l = self.domain.dim();
        let bad = |msg: String| Err(DynamicsError::InvalidSignal(msg));
        match &self.kind {
            DisturbanceKind::Constant { value } if value.len() != l => {
                bad(format!("constant of length {} for l = {l}", value.len()))
            }
            DisturbanceKind::Sinusoidal { base, axis, .. } if base.len() != l || *axis >= l => {
                bad(format!("sinusoid axis {axis} / base length {} for l = {l}", base.len()))
            }
            DisturbanceKind::PiecewiseConstantRandom { mesh, ranges, .. }
                if !(*mesh > 0.0) || ranges.len() != l =>
            {
                bad(format!("random mesh {mesh} / {} ranges for l = {l}", ranges.len()))
            }
            DisturbanceKind::Tabulated { times, values }
                if times.is_empty()
                    || times.len() != values.len()
                    || values.iter().any(|v| v.len() != l)
                    || times.windows(2).any(|w| w[0] >= w[1]) =>
            {
                bad("tabulated disturbance needs increasing times and l-vectors".into())
            }
            _ => Ok(()),
        }
    }

    /// True for signals that are constant between breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(
            self.kind,
            DisturbanceKind::Constant { .. }
                | DisturbanceKind::PiecewiseConstantRandom { .. }
                | DisturbanceKind::Tabulated { .. }
        )
    }

    /// Whether the raw (unclamped) signal can leave `D`. Reported alongside
    /// runs so that clamping never happens silently.
    pub fn may_leave_domain(&self) -> bool {
        let d = &self.domain;
        match &self.kind {
            DisturbanceKind::Constant { value } => !d.contains(value),
            DisturbanceKind::Sinusoidal {
                base,
                axis,
                amplitude,
                offset,
                ..
            } => {
                let mut hi = base.clone();
                let mut lo = base.clone();
                hi[*axis] = offset + amplitude.abs();
                lo[*axis] = offset - amplitude.abs();
                !d.contains(&hi) || !d.contains(&lo)
            }
            DisturbanceKind::PiecewiseConstantRandom { ranges, .. } => {
                let lo: Vec<f64> = ranges.iter().map(|r| r[0]).collect();
                let hi: Vec<f64> = ranges.iter().map(|r| r[1]).collect();
                !d.contains(&lo) || !d.contains(&hi)
            }
            DisturbanceKind::Tabulated { values, .. } => values.iter().any(|v| !d.contains(v)),
        }
    }

    fn mesh_cell(t: f64, mesh: f64) -> u64 {
        let t = t.max(0.0);
        let mut k = (t / mesh).floor();
        // Breakpoints are generated as k·mesh; make the cell index agree.
        if (k + 1.0) * mesh <= t {
            k += 1.0;
        } else if k * mesh > t {
            k -= 1.0;
        }
        k.max(0.0) as u64
    }

    /// `d(t)`, clamped to `D` when the clamp flag is set.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let mut v = match &self.kind {
            DisturbanceKind::Constant { value } => value.clone(),
            DisturbanceKind::Sinusoidal {
                base,
                axis,
                amplitude,
                frequency,
                offset,
            } => {
                let mut v = base.clone();
                v[*axis] = offset + amplitude * (frequency * t).sin();
                v
            }
            DisturbanceKind::PiecewiseConstantRandom { mesh, seed, ranges } => {
                let mut rng = stream_rng(*seed, Self::mesh_cell(t, *mesh));
                ranges
                    .iter()
                    .map(|[lo, hi]| if lo < hi { rng.gen_range(*lo..*hi) } else { *lo })
                    .collect()
            }
            DisturbanceKind::Tabulated { times, values } => {
                let idx = times.partition_point(|&s| s <= t).saturating_sub(1);
                values[idx].clone()
            }
        };
        if self.clamp {
            self.domain.clamp(&mut v);
        }
        v
    }

    /// Discontinuity instants strictly inside `(t0, t1)`, increasing.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        match &self.kind {
            DisturbanceKind::PiecewiseConstantRandom { mesh, .. } => {
                let first = Self::mesh_cell(t0, *mesh) + 1;
                let mut out = Vec::new();
                let mut k = first;
                loop {
                    let t = k as f64 * mesh;
                    if t >= t1 {
                        break;
                    }
                    if t > t0 {
                        out.push(t);
                    }
                    k += 1;
                }
                out
            }
            DisturbanceKind::Tabulated { times, .. } => {
                times.iter().copied().filter(|&s| s > t0 && s < t1).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// The nonnegative sampling-schedule perturbation `d̃(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum SchedulePerturbation {
    #[default]
    Zero,
    /// `d̃(t) = |sin t|`.
    SinusoidalAbs,
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    Constant {
        value: f64,
    },
}


impl SchedulePerturbation {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        match self {
            SchedulePerturbation::Constant { value } if !(*value >= 0.0) => Err(
                DynamicsError::InvalidSignal(format!("schedule perturbation {value} < 0")),
            ),
            SchedulePerturbation::Tabulated { times, values }
                if times.is_empty()
                    || times.len() != values.len()
                    || values.iter().any(|v| !(*v >= 0.0))
                    || times.windows(2).any(|w| w[0] >= w[1]) =>
            {
                Err(DynamicsError::InvalidSignal(
                    "tabulated schedule perturbation needs increasing times and values >= 0"
                        .into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// `d̃(t) ≥ 0`; negative table entries are floored at zero.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            SchedulePerturbation::Zero => 0.0,
            SchedulePerturbation::SinusoidalAbs => t.sin().abs(),
            SchedulePerturbation::Tabulated { times, values } => {
                let idx = times.partition_point(|&s| s <= t).saturating_sub(1);
                values[idx].max(0.0)
            }
            SchedulePerturbation::Constant { value } => value.max(0.0),
        }
    }
}

/// Largest observed one-sided Lipschitz quotient
/// `(x−y)'(f(d,x,u) − f(d,y,u)) / |x−y|²` over random pairs.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzEstimate {
    pub quotient: f64,
    pub witness_x: Vec<f64>,
    pub witness_y: Vec<f64>,
    pub witness_d: Vec<f64>,
    pub witness_u: Vec<f64>,
    pub samples: usize,
}

pub fn estimate_one_sided_lipschitz(
    sys: &ControlSystem,
    state_box: &BoxSet,
    control_box: &BoxSet,
    samples: usize,
    seed: u64,
) -> LipschitzEstimate {
    let mut rng = stream_rng(seed, 0);
    let n = sys.state_dim;
    let mut best = LipschitzEstimate {
        quotient: f64::NEG_INFINITY,
        witness_x: vec![],
        witness_y: vec![],
        witness_d: vec![],
        witness_u: vec![],
        samples,
    };
    let (mut fx, mut fy) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..samples {
        let x = state_box.sample(&mut rng);
        let y = state_box.sample(&mut rng);
        let d = sys.disturbance_box.sample(&mut rng);
        let u = control_box.sample(&mut rng);
        let diff = sub(&x, &y);
        let gap = dot(&diff, &diff);
        if gap == 0.0 {
            continue;
        }
        sys.rhs_into(&d, &x, &u, &mut fx);
        sys.rhs_into(&d, &y, &u, &mut fy);
        let q = dot(&diff, &sub(&fx, &fy)) / gap;
        if q > best.quotient {
            best.quotient = q;
            best.witness_x = x;
            best.witness_y = y;
            best.witness_d = d;
            best.witness_u = u;
        }
    }
    best
}

/// Envelope `a_est(s) = gain·s·exp(rate·s)` with `|f(d,x,u)| ≤ a_est(|x|+|u|)`
/// on every sample. Report-only.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEnvelope {
    pub gain: f64,
    pub rate: f64,
    pub samples: usize,
    /// Samples with `|x| + |u| = 0` but `f ≠ 0` (no K∞ envelope can hold).
    pub origin_violations: usize,
}

impl GrowthEnvelope {
    pub fn eval(&self, s: f64) -> f64 {
        self.gain * s * (self.rate * s).exp()
    }
}

pub fn growth_envelope(
    sys: &ControlSystem,
    state_box: &BoxSet,
    control_box: &BoxSet,
    samples: usize,
    seed: u64,
) -> GrowthEnvelope {
    let mut rng = stream_rng(seed, 1);
    let mut pts = Vec::with_capacity(samples);
    let mut origin_violations = 0;
    let mut f = vec![0.0; sys.state_dim];
    for _ in 0..samples {
        let x = state_box.sample(&mut rng);
        let u = control_box.sample(&mut rng);
        let d = sys.disturbance_box.sample(&mut rng);
        sys.rhs_into(&d, &x, &u, &mut f);
        let s = norm(&x) + norm(&u);
        let mag = norm(&f);
        if s == 0.0 {
            if mag > 0.0 {
                origin_violations += 1;
            }
            continue;
        }
        pts.push((s, mag));
    }
    let s_max = state_box.max_norm() + control_box.max_norm();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for rate in [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0] {
        let gain = pts
            .iter()
            .map(|(s, m)| m / (s * (rate * s).exp()))
            .fold(0.0, f64::max);
        let top = gain * s_max * (rate * s_max).exp();
        if top < best.0 {
            best = (top, gain, rate);
        }
    }
    GrowthEnvelope {
        gain: best.1,
        rate: best.2,
        samples,
        origin_violations,
    }
}

/// Largest `|f(d, 0, 0)|` over a grid of `d ∈ D`.
pub fn origin_residual(sys: &ControlSystem, nodes_per_axis: usize) -> f64 {
    let axes: Vec<Vec<f64>> = sys
        .disturbance_box
        .lower
        .iter()
        .zip(&sys.disturbance_box.upper)
        .map(|(lo, hi)| crate::vecops::linspace(*lo, *hi, nodes_per_axis))
        .collect();
    let x = vec![0.0; sys.state_dim];
    let u = vec![0.0; sys.control_dim];
    let mut f = vec![0.0; sys.state_dim];
    crate::vecops::cartesian(&axes)
        .iter()
        .map(|d| {
            sys.rhs_into(d, &x, &u, &mut f);
            norm(&f)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::jet_engine_system;
    use std::f64::consts::PI;

    #[test]
    fn jet_engine_rhs_examples() {
        let sys = jet_engine_system();
        assert_eq!(
            sys.eval_rhs(&[0.0, 0.0], &[0.0, 0.0], &[0.0]).unwrap(),
            vec![0.0, 0.0]
        );
        // 3/2 - 1/2 = 1
        assert_eq!(
            sys.eval_rhs(&[0.0, 1.0], &[1.0, 0.0], &[0.0]).unwrap(),
            vec![1.0, 0.0]
        );
        // 1 + 3/2 - 1/2 + 1 = 3
        assert_eq!(
            sys.eval_rhs(&[1.0, 1.0], &[1.0, 1.0], &[-2.0]).unwrap(),
            vec![3.0, -2.0]
        );
    }

    #[test]
    fn rhs_rejects_bad_arguments() {
        let sys = jet_engine_system();
        assert!(matches!(
            sys.eval_rhs(&[1.5, 0.0], &[0.0, 0.0], &[0.0]),
            Err(DynamicsError::DisturbanceOutOfBox { .. })
        ));
        assert!(matches!(
            sys.eval_rhs(&[0.0, 0.0], &[0.0], &[0.0]),
            Err(DynamicsError::DimensionMismatch { what: "state", .. })
        ));
        let scalar = crate::scenarios::scalar_system(Arc::new(|x: f64| x * x));
        assert!(matches!(
            scalar.eval_rhs(&[], &[1.0], &[0.5]),
            Err(DynamicsError::ControlOutOfSet { .. })
        ));
    }

    #[test]
    fn random_draws_are_finite() {
        let sys = jet_engine_system();
        let mut rng = stream_rng(11, 0);
        let xb = BoxSet::symmetric(2, 50.0);
        let ub = BoxSet::symmetric(1, 50.0);
        for _ in 0..10_000 {
            let d = sys.disturbance_box.sample(&mut rng);
            let x = xb.sample(&mut rng);
            let u = ub.sample(&mut rng);
            let f = sys.eval_rhs(&d, &x, &u).unwrap();
            assert!(f.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn equilibrium_residual_is_zero() {
        assert!(origin_residual(&jet_engine_system(), 21) <= 1e-14);
    }

    #[test]
    fn growth_envelope_covers_samples() {
        let sys = jet_engine_system();
        let xb = BoxSet::symmetric(2, 10.0);
        let ub = BoxSet::symmetric(1, 10.0);
        let env = growth_envelope(&sys, &xb, &ub, 2000, 3);
        assert_eq!(env.origin_violations, 0);
        let mut rng = stream_rng(3, 1);
        let mut f = vec![0.0; 2];
        for _ in 0..2000 {
            let x = xb.sample(&mut rng);
            let u = ub.sample(&mut rng);
            let d = sys.disturbance_box.sample(&mut rng);
            sys.rhs_into(&d, &x, &u, &mut f);
            assert!(norm(&f) <= env.eval(norm(&x) + norm(&u)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn one_sided_lipschitz_is_finite_on_bounded_box() {
        let sys = jet_engine_system();
        let est = estimate_one_sided_lipschitz(
            &sys,
            &BoxSet::symmetric(2, 5.0),
            &BoxSet::symmetric(1, 5.0),
            5000,
            1,
        );
        assert!(est.quotient.is_finite());
        // -x1^3/2 dominates for large |x1|; the quotient is moderate.
        assert!(est.quotient < 50.0);
    }

    #[test]
    fn constant_and_sinusoidal_samples() {
        let dom = BoxSet::symmetric(2, 1.0);
        let c = DisturbanceSignal::constant(vec![0.0, 1.0], dom.clone()).unwrap();
        assert_eq!(c.sample(7.3), vec![0.0, 1.0]);
        let s = DisturbanceSignal::new(
            DisturbanceKind::Sinusoidal {
                base: vec![1.0, 0.0],
                axis: 1,
                amplitude: 1.0,
                frequency: 1.0,
                offset: 0.0,
            },
            dom,
        )
        .unwrap();
        assert_eq!(s.sample(PI / 2.0), vec![1.0, 1.0]);
    }

    #[test]
    fn random_signal_holds_and_replays() {
        let dom = BoxSet::symmetric(2, 1.0);
        let sig = DisturbanceSignal::new(
            DisturbanceKind::PiecewiseConstantRandom {
                mesh: 0.1,
                seed: 5,
                ranges: vec![[-1.0, 1.0], [-1.0, 1.0]],
            },
            dom.clone(),
        )
        .unwrap();
        assert_eq!(sig.sample(0.37), sig.sample(0.37));
        // Held on [0.3, 0.4), right-continuous at 0.3 (generated as 3·0.1).
        assert_eq!(sig.sample(3.0 * 0.1), sig.sample(0.35));
        assert_eq!(sig.sample(0.31), sig.sample(0.399));
        assert_ne!(sig.sample(0.31), sig.sample(0.41));
        for k in 0..500 {
            assert!(dom.contains(&sig.sample(k as f64 * 0.0137)));
        }
        let bps = sig.breakpoints(0.05, 0.35);
        assert_eq!(bps.len(), 3);
        assert!((bps[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn clamping_enforces_the_box() {
        let dom = BoxSet::symmetric(1, 1.0);
        let sig = DisturbanceSignal::new(
            DisturbanceKind::Sinusoidal {
                base: vec![0.0],
                axis: 0,
                amplitude: 3.0,
                frequency: 1.0,
                offset: 0.0,
            },
            dom.clone(),
        )
        .unwrap();
        assert!(sig.may_leave_domain());
        for k in 0..100 {
            assert!(dom.contains(&sig.sample(k as f64 * 0.1)));
        }
    }

    #[test]
    fn tabulated_is_right_continuous() {
        let sig = DisturbanceSignal::new(
            DisturbanceKind::Tabulated {
                times: vec![0.0, 1.0, 2.0],
                values: vec![vec![0.1], vec![0.2], vec![0.3]],
            },
            BoxSet::symmetric(1, 1.0),
        )
        .unwrap();
        assert_eq!(sig.sample(0.999), vec![0.1]);
        assert_eq!(sig.sample(1.0), vec![0.2]);
        assert_eq!(sig.sample(9.0), vec![0.3]);
        assert_eq!(sig.breakpoints(0.5, 2.0), vec![1.0]);
    }

    #[test]
    fn schedule_perturbation_is_nonnegative() {
        let p = SchedulePerturbation::SinusoidalAbs;
        for k in 0..1000 {
            assert!(p.value(k as f64 * 0.01 - 3.0) >= 0.0);
        }
        assert!(SchedulePerturbation::Constant { value: -1.0 }.validate().is_err());
    }
}
