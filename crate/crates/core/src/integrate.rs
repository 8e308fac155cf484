//! Adaptive Dormand-Prince 5(4) integration of `ẋ = f(d(t), x, u)` with `u`
//! held constant.
//!
//! Steps land exactly on the interval end and on every discontinuity of the
//! disturbance signal. Each accepted step keeps the coefficients of the
//! fourth-order continuous extension, so [`DenseSegment::state_at`] is
//! accurate to the integration tolerance anywhere in the segment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{ControlSystem, DisturbanceSignal, DynamicsError};
use crate::setchain::Region;
use crate::vecops::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    pub blowup_norm_threshold: f64,
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            initial_step: None,
            max_step: None,
            blowup_norm_threshold: 1e8,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err("integrator tolerances must be positive".into());
        }
        if !(self.blowup_norm_threshold > 0.0) {
            return Err("blowup_norm_threshold must be positive".into());
        }
        if self.max_step.is_some_and(|h| !(h > 0.0)) || self.initial_step.is_some_and(|h| !(h > 0.0))
        {
            return Err("step sizes must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error)]
pub enum IntegrateError {
    /// `|x|` exceeded the blow-up threshold, became non-finite, or the step
    /// size collapsed. `partial` ends at the last accepted step.
    #[error("finite escape at t = {time}")]
    FiniteEscape {
        time: f64,
        partial: Box<DenseSegment>,
    },
    #[error("step limit exceeded at t = {time}")]
    StepLimitExceeded {
        time: f64,
        partial: Box<DenseSegment>,
    },
    #[error("invalid integration request: {0}")]
    InvalidInterval(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Solution on `[start, end]` under a held control: accepted step nodes plus
/// the continuous extension between them.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment {
    dim: usize,
    control: Vec<f64>,
    times: Vec<f64>,
    states: Vec<f64>,
    /// Five coefficient vectors per step.
    dense: Vec<f64>,
}

impl DenseSegment {
    fn new(dim: usize, control: Vec<f64>, t0: f64, x0: &[f64]) -> Self {
        Self {
            dim,
            control,
            times: vec![t0],
            states: x0.to_vec(),
            dense: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn control(&self) -> &[f64] {
        &self.control
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Number of stored nodes.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn initial_state(&self) -> &[f64] {
        self.state(0)
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks_exact(self.dim))
    }

    /// Largest `|x|` over the stored nodes.
    pub fn max_norm(&self) -> f64 {
        self.states
            .chunks_exact(self.dim)
            .map(norm)
            .fold(0.0, f64::max)
    }

    /// Interpolated state at `t`, clamped into `[start, end]`.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(self.start(), self.end());
        if self.len() == 1 {
            return self.state(0).to_vec();
        }
        let k = self
            .times
            .partition_point(|&s| s <= t)
            .saturating_sub(1)
            .min(self.len() - 2);
        let (ta, tb) = (self.times[k], self.times[k + 1]);
        if t == tb {
            return self.state(k + 1).to_vec();
        }
        let theta = (t - ta) / (tb - ta);
        let theta1 = 1.0 - theta;
        let n = self.dim;
        let c = &self.dense[k * 5 * n..(k + 1) * 5 * n];
        (0..n)
            .map(|i| {
                c[i] + theta
                    * (c[n + i]
                        + theta1 * (c[2 * n + i] + theta * (c[3 * n + i] + theta1 * c[4 * n + i])))
            })
            .collect()
    }

    fn push_step(&mut self, t: f64, x: &[f64], coeffs: &[f64]) {
        self.times.push(t);
        self.states.extend_from_slice(x);
        self.dense.extend_from_slice(coeffs);
    }
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Nørsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Reusable integrator that carries the last accepted step size across
/// consecutive held-control intervals.
pub struct Integrator<'a> {
    sys: &'a ControlSystem,
    cfg: &'a IntegratorConfig,
    step_hint: Option<f64>,
    steps_taken: u64,
}

enum Disturbance<'s> {
    Frozen(Vec<f64>),
    Live(&'s DisturbanceSignal),
}

impl<'a> Integrator<'a> {
    pub fn new(sys: &'a ControlSystem, cfg: &'a IntegratorConfig) -> Self {
        Self {
            sys,
            cfg,
            step_hint: cfg.initial_step,
            steps_taken: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// Integrates on `[t0, t1]` with `u` held.
    pub fn segment(
        &mut self,
        d_sig: &DisturbanceSignal,
        x0: &[f64],
        u: &[f64],
        t0: f64,
        t1: f64,
    ) -> Result<DenseSegment, IntegrateError> {
        if !(t1 > t0) {
            return Err(IntegrateError::InvalidInterval(format!(
                "need t1 > t0, got [{t0}, {t1}]"
            )));
        }
        self.sys.check_state(x0)?;
        self.sys.check_control(u)?;
        let mut seg = DenseSegment::new(self.sys.state_dim, u.to_vec(), t0, x0);
        let mut bounds = vec![t0];
        bounds.extend(d_sig.breakpoints(t0, t1));
        bounds.push(t1);
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dist = if d_sig.is_piecewise_constant() {
                let d = d_sig.sample(0.5 * (a + b));
                self.sys.check_disturbance(&d)?;
                Disturbance::Frozen(d)
            } else {
                Disturbance::Live(d_sig)
            };
            self.piece(&dist, u, a, b, &mut seg)?;
        }
        Ok(seg)
    }

    fn eval(&self, dist: &Disturbance, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        match dist {
            Disturbance::Frozen(d) => self.sys.rhs_into(d, x, u, out),
            Disturbance::Live(sig) => {
                let d = sig.sample(t);
                self.sys.rhs_into(&d, x, u, out)
            }
        }
    }

    fn initial_step(&self, x: &[f64], f0: &[f64], span: f64) -> f64 {
        let cfg = self.cfg;
        let scaled = |v: &[f64]| {
            let s: f64 = v
                .iter()
                .zip(x)
                .map(|(vi, xi)| {
                    let sc = cfg.abs_tol + cfg.rel_tol * xi.abs();
                    (vi / sc).powi(2)
                })
                .sum();
            (s / x.len() as f64).sqrt()
        };
        let d0 = scaled(x);
        let d1 = scaled(f0);
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(span)
    }

    #[allow(clippy::too_many_lines)]
    fn piece(
        &mut self,
        dist: &Disturbance,
        u: &[f64],
        a: f64,
        b: f64,
        seg: &mut DenseSegment,
    ) -> Result<(), IntegrateError> {
        let n = self.sys.state_dim;
        let cfg = self.cfg;
        let max_step = cfg.max_step.unwrap_or(f64::INFINITY);
        let mut t = a;
        let mut y = seg.final_state().to_vec();
        let mut k1 = vec![0.0; n];
        let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        );
        let mut tmp = vec![0.0; n];
        let mut y5 = vec![0.0; n];
        let mut coeffs = vec![0.0; 5 * n];
        self.eval(dist, t, &y, u, &mut k1);
        let mut h = match self.step_hint {
            Some(h) => h,
            None => self.initial_step(&y, &k1, b - a),
        };
        let mut rejected_last = false;

        while t < b {
            if self.steps_taken >= cfg.max_steps {
                return Err(IntegrateError::StepLimitExceeded {
                    time: t,
                    partial: Box::new(seg.clone()),
                });
            }
            h = h.min(max_step);
            let unclipped = h;
            let last = t + h >= b || (b - (t + h)) < 1e-12 * b.abs().max(1.0);
            if last {
                h = b - t;
            }
            if !(h > 1e-14 * t.abs().max(1.0)) {
                // Step size collapse: the solution is blowing up.
                return Err(IntegrateError::FiniteEscape {
                    time: t,
                    partial: Box::new(seg.clone()),
                });
            }

            for i in 0..n {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            self.eval(dist, t + C2 * h, &tmp, u, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            self.eval(dist, t + C3 * h, &tmp, u, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            self.eval(dist, t + C4 * h, &tmp, u, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            self.eval(dist, t + C5 * h, &tmp, u, &mut k5);
            for i in 0..n {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_new = if last { b } else { t + h };
            self.eval(dist, t_new, &tmp, u, &mut k6);
            for i in 0..n {
                y5[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            self.eval(dist, t_new, &y5, u, &mut k7);

            let mut err = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
                err += (e / sc).powi(2);
            }
            let mut err = (err / n as f64).sqrt();
            if !err.is_finite() {
                err = f64::INFINITY;
            }
            self.steps_taken += 1;

            if err <= 1.0 {
                for i in 0..n {
                    let dy = y5[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    coeffs[i] = y[i];
                    coeffs[n + i] = dy;
                    coeffs[2 * n + i] = bspl;
                    coeffs[3 * n + i] = dy - h * k7[i] - bspl;
                    coeffs[4 * n + i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                seg.push_step(t_new, &y5, &coeffs);
                let nrm = norm(&y5);
                if !nrm.is_finite() || nrm > cfg.blowup_norm_threshold {
                    return Err(IntegrateError::FiniteEscape {
                        time: t_new,
                        partial: Box::new(seg.clone()),
                    });
                }
                std::mem::swap(&mut y, &mut y5);
                std::mem::swap(&mut k1, &mut k7);
                t = t_new;
                let mut fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                if rejected_last {
                    fac = fac.min(1.0);
                }
                rejected_last = false;
                let proposal = h * fac;
                h = if last { proposal.max(unclipped) } else { proposal };
                self.step_hint = Some(h);
            } else {
                let fac = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).max(FAC_MIN)
                } else {
                    FAC_MIN
                };
                h *= fac.min(1.0);
                rejected_last = true;
            }
        }
        Ok(())
    }
}

/// Integrates `ẋ = f(d(t), x, u)` on `[t0, t1]` with `u` held constant.
pub fn integrate_held(
    sys: &ControlSystem,
    d_sig: &DisturbanceSignal,
    x0: &[f64],
    u: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<DenseSegment, IntegrateError> {
    Integrator::new(sys, cfg).segment(d_sig, x0, u, t0, t1)
}

/// Time resolution of [`first_hitting_time`].
pub const HITTING_TIME_RESOLUTION: f64 = 1e-9;

/// Earliest time at which the segment is inside `region`, refined by
/// bisection on the continuous extension. Entries and exits that happen
/// entirely between two stored nodes are not seen.
pub fn first_hitting_time(seg: &DenseSegment, region: &Region) -> Option<f64> {
    if region.contains(seg.initial_state()) {
        return Some(seg.start());
    }
    let k = (1..seg.len()).find(|&k| region.contains(seg.state(k)))?;
    let (mut lo, mut hi) = (seg.time(k - 1), seg.time(k));
    while hi - lo > HITTING_TIME_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if region.contains(&seg.state_at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BoxSet, ControlSet, DisturbanceKind};
    use crate::scenarios::{jet_engine_system, scalar_system};
    use std::sync::Arc;

    fn decay() -> ControlSystem {
        ControlSystem::new(
            "decay",
            1,
            1,
            BoxSet::empty_dim(),
            ControlSet::unconstrained(1),
            |_d, x, _u, out| out[0] = -x[0],
        )
    }

    /// Classical RK4 with a fixed step, for `d` frozen.
    fn rk4(sys: &ControlSystem, d: &[f64], x0: &[f64], u: &[f64], t1: f64, h: f64) -> Vec<f64> {
        let n = x0.len();
        let steps = (t1 / h).round() as usize;
        let mut x = x0.to_vec();
        let f = |x: &[f64]| sys.eval_rhs(d, x, u).unwrap();
        for _ in 0..steps {
            let k1 = f(&x);
            let x2: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k1[i]).collect();
            let k2 = f(&x2);
            let x3: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k2[i]).collect();
            let k3 = f(&x3);
            let x4: Vec<f64> = (0..n).map(|i| x[i] + h * k3[i]).collect();
            let k4 = f(&x4);
            for i in 0..n {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        x
    }

    #[test]
    fn exponential_decay_accuracy() {
        let sys = decay();
        let seg = integrate_held(
            &sys,
            &DisturbanceSignal::none(),
            &[1.0],
            &[0.0],
            0.0,
            5.0,
            &IntegratorConfig::with_tolerances(1e-10, 1e-12),
        )
        .unwrap();
        let exact = (-5.0f64).exp();
        assert_eq!(seg.end(), 5.0);
        assert!((seg.final_state()[0] - exact).abs() / exact < 1e-9);
        let mid = seg.state_at(2.345)[0];
        assert!((mid - (-2.345f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn jet_engine_linear_channel_is_exact() {
        let sys = jet_engine_system();
        let sig = DisturbanceSignal::new(
            DisturbanceKind::PiecewiseConstantRandom {
                mesh: 0.05,
                seed: 17,
                ranges: vec![[-1.0, 1.0], [-1.0, 1.0]],
            },
            sys.disturbance_box.clone(),
        )
        .unwrap();
        let seg = integrate_held(
            &sys,
            &sig,
            &[0.0, 2.0],
            &[-1.0],
            0.0,
            1.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!((seg.final_state()[1] - 1.0).abs() < 1e-12);
        for (t, x) in seg.nodes() {
            assert!((x[1] - (2.0 - t)).abs() < 1e-11);
        }
        // Mesh points are step boundaries.
        for k in 1..20 {
            let bp = k as f64 * 0.05;
            assert!(seg.times().iter().any(|&t| t == bp), "missing breakpoint {bp}");
        }
    }

    #[test]
    fn equilibrium_stays_put() {
        let sys = jet_engine_system();
        let sig = DisturbanceSignal::constant(vec![0.3, -0.7], sys.disturbance_box.clone()).unwrap();
        let cfg = IntegratorConfig::default();
        let seg = integrate_held(&sys, &sig, &[0.0, 0.0], &[0.0], 0.0, 3.0, &cfg).unwrap();
        assert!(norm(seg.final_state()) <= cfg.abs_tol);
    }

    #[test]
    fn scalar_matches_rk4_reference() {
        let sys = scalar_system(Arc::new(|x: f64| x * x));
        let sig = DisturbanceSignal::none();
        let reference = rk4(&sys, &[], &[1.0], &[-5.0], 0.1, 1e-6)[0];
        let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-14);
        let seg = integrate_held(&sys, &sig, &[1.0], &[-5.0], 0.0, 0.1, &cfg).unwrap();
        assert!((seg.final_state()[0] - reference).abs() / reference.abs() < 1e-10);
        // Richardson: halving the reference step changes nothing at this level.
        let half = rk4(&sys, &[], &[1.0], &[-5.0], 0.1, 5e-7)[0];
        assert!((half - reference).abs() < 1e-13);
    }

    #[test]
    fn tighter_tolerance_never_hurts() {
        let sys = scalar_system(Arc::new(|x: f64| x * x));
        let reference = rk4(&sys, &[], &[1.0], &[-5.0], 0.1, 1e-6)[0];
        let mut prev = f64::INFINITY;
        let mut tol = 1e-4;
        for _ in 0..12 {
            let cfg = IntegratorConfig::with_tolerances(tol, tol * 1e-2);
            let seg =
                integrate_held(&sys, &DisturbanceSignal::none(), &[1.0], &[-5.0], 0.0, 0.1, &cfg)
                    .unwrap();
            let err = (seg.final_state()[0] - reference).abs();
            assert!(err <= prev.max(1e-13), "tol {tol}: {err} > {prev}");
            prev = err;
            tol *= 0.5;
        }
    }

    #[test]
    fn finite_escape_is_reported() {
        // ẋ = x², x(0) = 1 blows up at t = 1.
        let sys = scalar_system(Arc::new(|x: f64| x * x));
        let err = integrate_held(
            &sys,
            &DisturbanceSignal::none(),
            &[1.0],
            &[0.0],
            0.0,
            2.0,
            &IntegratorConfig::default(),
        )
        .unwrap_err();
        match err {
            IntegrateError::FiniteEscape { time, partial } => {
                assert!(time > 0.99 && time <= 1.0, "escape time {time}");
                assert!(partial.len() > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn step_limit_is_reported() {
        let cfg = IntegratorConfig {
            max_steps: 3,
            max_step: Some(0.01),
            ..IntegratorConfig::default()
        };
        let err = integrate_held(&decay(), &DisturbanceSignal::none(), &[1.0], &[0.0], 0.0, 1.0, &cfg)
            .unwrap_err();
        assert!(matches!(err, IntegrateError::StepLimitExceeded { .. }));
    }

    #[test]
    fn hitting_time_on_linear_channel() {
        let sys = jet_engine_system();
        let sig = DisturbanceSignal::constant(vec![1.0, -1.0], sys.disturbance_box.clone()).unwrap();
        let seg = integrate_held(
            &sys,
            &sig,
            &[0.5, 2.0],
            &[-1.0],
            0.0,
            2.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let band = Region::band(1, 1.0);
        let t = first_hitting_time(&seg, &band).unwrap();
        assert!((t - 1.0).abs() <= 1e-9, "{t}");
        let inside = Region::band(1, 5.0);
        assert_eq!(first_hitting_time(&seg, &inside), Some(0.0));
        let never = Region::band(1, 1e-3).intersect(&Region::band(0, 1e-6));
        assert_eq!(first_hitting_time(&seg, &never), None);
    }
}
