use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::envelope::{invert_increasing, Envelope, MonotoneTable};
use super::{CertifyError, LyapunovData, TIME_TOL};
use crate::dynamics::{BoxSet, ControlSystem, DisturbanceKind, DisturbanceSignal};
use crate::integrate::{first_hitting_time, integrate_held, DenseSegment, IntegrateError, IntegratorConfig};
use crate::rng::{derive_seed, stream_rng};
use crate::setchain::Region;
use crate::vecops::{cartesian, linspace, norm};

type TimeBound = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Robust reachability data `(v, c, b, a, T, r)` for a source/target pair.
#[derive(Clone)]
pub struct ReachabilityCertificate {
    pub label: String,
    pub control: Vec<f64>,
    pub dwell: f64,
    pub c: f64,
    pub b: Envelope,
    pub a: Envelope,
    t_bound: TimeBound,
    /// Ball-search resolution used to tabulate `b` (if tabulated).
    pub resolution: Option<f64>,
}

impl fmt::Debug for ReachabilityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReachabilityCertificate")
            .field("label", &self.label)
            .field("control", &self.control)
            .field("dwell", &self.dwell)
            .field("c", &self.c)
            .field("b", &self.b)
            .field("a", &self.a)
            .finish()
    }
}

/// Serializable view of a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub label: String,
    pub control: Vec<f64>,
    pub dwell: f64,
    pub c: f64,
    pub b: String,
    pub a: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_table: Option<MonotoneTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_table: Option<MonotoneTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl ReachabilityCertificate {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        control: Vec<f64>,
        dwell: f64,
        c: f64,
        b: Envelope,
        a: Envelope,
        t_bound: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(c >= 0.0 && dwell > 0.0);
        Self {
            label: label.into(),
            control,
            dwell,
            c,
            b,
            a,
            t_bound: Arc::new(t_bound),
            resolution: None,
        }
    }

    /// `T(x₀)`: the certified hitting-time bound for this start.
    pub fn t_bound(&self, x0: &[f64]) -> f64 {
        (self.t_bound)(x0)
    }

    /// `c + b(s)`.
    pub fn reach_time(&self, s: f64) -> f64 {
        self.c + self.b.eval(s)
    }

    /// `c + b(s) + r`.
    pub fn window(&self, s: f64) -> f64 {
        self.reach_time(s) + self.dwell
    }

    pub fn summary(&self) -> CertificateSummary {
        let table = |e: &Envelope| match e {
            Envelope::Table(t) => Some(t.clone()),
            _ => None,
        };
        CertificateSummary {
            label: self.label.clone(),
            control: self.control.clone(),
            dwell: self.dwell,
            c: self.c,
            b: self.b.describe(),
            a: self.a.describe(),
            b_table: table(&self.b),
            a_table: table(&self.a),
            resolution: self.resolution,
        }
    }
}

/// Radius table plus the tensor resolution used for `max_{|x|≤s}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallGrid {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub nodes_per_axis: usize,
}

impl BallGrid {
    pub fn uniform(dim: usize, max_radius: f64, radius_count: usize, nodes_per_axis: usize) -> Self {
        Self {
            dim,
            radii: linspace(0.0, max_radius, radius_count),
            nodes_per_axis,
        }
    }

    /// Spacing of the interior tensor grid.
    pub fn resolution(&self) -> f64 {
        2.0 * self.radii.last().copied().unwrap_or(0.0) / (self.nodes_per_axis.max(2) - 1) as f64
    }

    /// Unit directions: the boundary nodes of the tensor grid on `[−1, 1]ⁿ`,
    /// normalized.
    fn directions(&self) -> Vec<Vec<f64>> {
        let axis = linspace(-1.0, 1.0, self.nodes_per_axis.max(2));
        cartesian(&vec![axis; self.dim])
            .into_iter()
            .filter(|z| z.iter().any(|v| v.abs() == 1.0))
            .map(|z| {
                let n = norm(&z);
                z.into_iter().map(|v| v / n).collect()
            })
            .collect()
    }
}

/// `c`, `b`, `a` and `T` from a decrease certificate, via
/// `c = δ⁻¹max{0, V(0) − R}`,
/// `b(s) = δ⁻¹(max_{|x|≤s} max{0, V(x) − R} − max{0, V(0) − R})`,
/// `a(s) = a₁⁻¹(exp(p(c + r) + p·b(s))·a₂(s))`, `T(x₀) = δ⁻¹max{0, V(x₀) − R}`.
#[allow(clippy::too_many_arguments)]
pub fn reach_bounds(
    label: impl Into<String>,
    lyap: &LyapunovData,
    r_level: f64,
    delta: f64,
    p: f64,
    a1: &dyn Fn(f64) -> f64,
    a2: &dyn Fn(f64) -> f64,
    r: f64,
    control: Vec<f64>,
    ball: &BallGrid,
) -> Result<ReachabilityCertificate, CertifyError> {
    if !(delta > 0.0 && r > 0.0 && p >= 0.0) {
        return Err(CertifyError::InvalidArgument(
            "need delta > 0, r > 0 and p >= 0".into(),
        ));
    }
    if ball.radii.is_empty() || ball.radii.windows(2).any(|w| w[0] >= w[1]) || ball.radii[0] < 0.0
    {
        return Err(CertifyError::InvalidArgument(
            "radius grid must be nonnegative and strictly increasing".into(),
        ));
    }
    let excess = |x: &[f64]| (lyap.value(x) - r_level).max(0.0);
    let origin = vec![0.0; ball.dim];
    let base = excess(&origin);
    let c = base / delta;
    let s_max = *ball.radii.last().unwrap();

    // Interior nodes sorted by norm for prefix maxima.
    let axis = linspace(-s_max, s_max, ball.nodes_per_axis.max(2));
    let mut interior: Vec<(f64, f64)> = cartesian(&vec![axis; ball.dim])
        .into_par_iter()
        .filter_map(|x| {
            let nx = norm(&x);
            (nx <= s_max).then(|| (nx, excess(&x)))
        })
        .collect();
    interior.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dirs = ball.directions();
    let sphere_max: Vec<f64> = ball
        .radii
        .par_iter()
        .map(|&s| {
            dirs.iter()
                .map(|u| {
                    let x: Vec<f64> = u.iter().map(|v| v * s).collect();
                    excess(&x)
                })
                .fold(base, f64::max)
        })
        .collect();
    let mut b_vals = Vec::with_capacity(ball.radii.len());
    let mut k = 0;
    let mut run = base;
    for (j, &s) in ball.radii.iter().enumerate() {
        while k < interior.len() && interior[k].0 <= s {
            run = run.max(interior[k].1);
            k += 1;
        }
        b_vals.push((run.max(sphere_max[j]) - base) / delta);
    }
    let b = MonotoneTable::new(ball.radii.clone(), b_vals);
    let mut a_vals = Vec::with_capacity(ball.radii.len());
    for &s in &ball.radii {
        let target = (p * (c + r) + p * b.eval(s)).exp() * a2(s);
        a_vals.push(invert_increasing(a1, target)?);
    }
    let a = MonotoneTable::new(ball.radii.clone(), a_vals);
    let lyap_t = lyap.clone();
    let mut cert = ReachabilityCertificate::new(
        label,
        control,
        r,
        c,
        Envelope::Table(b),
        Envelope::Table(a),
        move |x0: &[f64]| (lyap_t.value(x0) - r_level).max(0.0) / delta,
    );
    cert.resolution = Some(ball.resolution());
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Integration blew up before the window closed.
    FiniteEscape,
    /// `|x(t)| > a(|x₀|)`.
    ExceedsEnvelope,
    /// Left the target during `[T, T + r]`.
    LeftTarget,
    /// Left the source before reaching the target.
    LeftSource,
    /// Reached the target after `c + b(|x₀|)`.
    Late,
    /// Did not reach the target within the simulated window.
    Missed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub kind: ViolationKind,
    pub time: f64,
    pub x0: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub x0: Vec<f64>,
    pub disturbance_seed: u64,
    pub t_hit: Option<f64>,
    pub t_bound: f64,
    pub reach_time: f64,
    pub sup_norm: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyQReport {
    pub certificate: CertificateSummary,
    pub trials: usize,
    pub seed: u64,
    pub disturbance_mesh: f64,
    pub violations: Vec<Violation>,
    pub worst_t_hit: f64,
    pub worst_sup_norm: f64,
    /// Largest `T_hit − (c + b(|x₀|))` (nonpositive when sound).
    pub worst_time_slack: f64,
    pub records: Vec<TrialRecord>,
}

impl PropertyQReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// How starts and disturbances are drawn in [`check_property_q`].
#[derive(Debug, Clone)]
pub struct QRequest {
    pub trials: usize,
    pub seed: u64,
    /// Starts are drawn uniformly from this box, restricted to the source.
    pub sampling_box: BoxSet,
    /// Optional extra restriction `|x₀| ≤ radius`.
    pub sampling_radius: Option<f64>,
    /// Piecewise-constant random disturbance mesh.
    pub mesh: f64,
}

fn sample_start(
    omega: &Region,
    req: &QRequest,
    trial: usize,
) -> Result<Vec<f64>, CertifyError> {
    let mut rng = stream_rng(req.seed, trial as u64);
    for _ in 0..1_000_000 {
        let x = req.sampling_box.sample(&mut rng);
        if omega.contains(&x) && req.sampling_radius.is_none_or(|r| norm(&x) <= r) {
            return Ok(x);
        }
    }
    Err(CertifyError::InvalidArgument(
        "could not sample a start inside the source region".into(),
    ))
}

/// Dense check points on `[t0, t1]`: stored nodes plus `extra` interpolated
/// points.
fn probe_times(seg: &DenseSegment, t0: f64, t1: f64, extra: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = seg
        .times()
        .iter()
        .copied()
        .filter(|&t| t >= t0 && t <= t1)
        .collect();
    if t1 > t0 {
        ts.extend(linspace(t0, t1, extra));
    }
    ts
}

/// Monte-Carlo check of property (Q): from starts in `omega`, under `u ≡ v`
/// and random disturbances, the target is reached by `c + b(|x₀|)`, held for
/// the dwell `r`, the source is not left before, and `|x| ≤ a(|x₀|)`.
pub fn check_property_q(
    sys: &ControlSystem,
    omega: &Region,
    target: &Region,
    cert: &ReachabilityCertificate,
    req: &QRequest,
    cfg: &IntegratorConfig,
) -> Result<PropertyQReport, CertifyError> {
    if req.trials == 0 {
        return Err(CertifyError::InvalidArgument("trials must be >= 1".into()));
    }
    sys.check_control(&cert.control)
        .map_err(|e| CertifyError::InvalidArgument(e.to_string()))?;
    let starts: Vec<Vec<f64>> = (0..req.trials)
        .map(|t| sample_start(omega, req, t))
        .collect::<Result<_, _>>()?;
    let ranges: Vec<[f64; 2]> = sys
        .disturbance_box
        .lower
        .iter()
        .zip(&sys.disturbance_box.upper)
        .map(|(lo, hi)| [*lo, *hi])
        .collect();

    let outcomes: Vec<(TrialRecord, Vec<Violation>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(trial, x0)| {
            let dseed = derive_seed(req.seed, trial as u64);
            let d_sig = DisturbanceSignal::new(
                DisturbanceKind::PiecewiseConstantRandom {
                    mesh: req.mesh,
                    seed: dseed,
                    ranges: ranges.clone(),
                },
                sys.disturbance_box.clone(),
            )
            .expect("disturbance ranges come from D");
            run_trial(sys, omega, target, cert, cfg, trial, x0, dseed, &d_sig)
        })
        .collect();

    let mut violations = Vec::new();
    let mut records = Vec::with_capacity(outcomes.len());
    let (mut worst_t, mut worst_sup, mut worst_slack) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (rec, v) in outcomes {
        if let Some(t) = rec.t_hit {
            worst_t = worst_t.max(t);
            worst_slack = worst_slack.max(t - rec.reach_time);
        }
        worst_sup = worst_sup.max(rec.sup_norm);
        violations.extend(v);
        records.push(rec);
    }
    Ok(PropertyQReport {
        certificate: cert.summary(),
        trials: req.trials,
        seed: req.seed,
        disturbance_mesh: req.mesh,
        violations,
        worst_t_hit: worst_t,
        worst_sup_norm: worst_sup,
        worst_time_slack: worst_slack,
        records,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    sys: &ControlSystem,
    omega: &Region,
    target: &Region,
    cert: &ReachabilityCertificate,
    cfg: &IntegratorConfig,
    trial: usize,
    x0: Vec<f64>,
    dseed: u64,
    d_sig: &DisturbanceSignal,
) -> (TrialRecord, Vec<Violation>) {
    let s0 = norm(&x0);
    let reach = cert.reach_time(s0);
    let envelope = cert.a.eval(s0);
    let mut rec = TrialRecord {
        x0: x0.clone(),
        disturbance_seed: dseed,
        t_hit: None,
        t_bound: cert.t_bound(&x0),
        reach_time: reach,
        sup_norm: s0,
        envelope,
    };
    let mut out = Vec::new();
    let mut flag = |kind, time, detail: String| {
        out.push(Violation {
            trial,
            kind,
            time,
            x0: x0.clone(),
            detail,
        })
    };
    if !reach.is_finite() {
        flag(
            ViolationKind::Missed,
            0.0,
            format!("|x0| = {s0} is beyond the certificate's radius table"),
        );
        return (rec, out);
    }
    let horizon = reach + cert.dwell + TIME_TOL;
    let seg = match integrate_held(sys, d_sig, &x0, &cert.control, 0.0, horizon, cfg) {
        Ok(seg) => seg,
        Err(IntegrateError::FiniteEscape { time, .. }) => {
            flag(ViolationKind::FiniteEscape, time, "finite escape".into());
            return (rec, out);
        }
        Err(e) => {
            flag(ViolationKind::FiniteEscape, 0.0, e.to_string());
            return (rec, out);
        }
    };
    rec.sup_norm = seg.max_norm();
    if rec.sup_norm > envelope * (1.0 + 1e-12) {
        flag(
            ViolationKind::ExceedsEnvelope,
            0.0,
            format!("sup |x| = {} > a(|x0|) = {envelope}", rec.sup_norm),
        );
    }
    let Some(t_hit) = first_hitting_time(&seg, target) else {
        flag(
            ViolationKind::Missed,
            horizon,
            format!("target not reached by {horizon}"),
        );
        return (rec, out);
    };
    rec.t_hit = Some(t_hit);
    if t_hit > reach + TIME_TOL {
        flag(
            ViolationKind::Late,
            t_hit,
            format!("T_hit = {t_hit} > c + b(|x0|) = {reach}"),
        );
    }
    let end = (t_hit + cert.dwell).min(seg.end());
    for t in probe_times(&seg, t_hit, end, 257) {
        if !target.contains(&seg.state_at(t)) {
            flag(ViolationKind::LeftTarget, t, format!("outside target at t = {t}"));
            break;
        }
    }
    for t in probe_times(&seg, 0.0, t_hit, 257) {
        if t < t_hit && !omega.contains(&seg.state_at(t)) {
            flag(ViolationKind::LeftSource, t, format!("outside source at t = {t}"));
            break;
        }
    }
    (rec, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{linear_channel_example, band_example, jet_engine_system};

    fn ex28_cert() -> ReachabilityCertificate {
        let ex = band_example();
        ex.certificate(&BallGrid::uniform(2, 20.0, 401, 401)).unwrap()
    }

    #[test]
    fn band_example_bounds() {
        let cert = ex28_cert();
        assert_eq!(cert.c, 0.0);
        assert!((cert.b.eval(5.0) - 9.0 / 7.0).abs() < 1e-12);
        assert_eq!(cert.b.eval(4.0), 0.0);
        assert!((cert.t_bound(&[5.0, 0.0]) - 9.0 / 7.0).abs() < 1e-15);
        assert_eq!(cert.t_bound(&[3.0, 0.5]), 0.0);
        let a4 = cert.a.eval(4.0);
        assert!((a4 - 8.0 * 4f64.exp()).abs() < 1e-9 * a4, "{a4}");
    }

    #[test]
    fn t_bound_never_exceeds_reach_time() {
        let cert = ex28_cert();
        let mut rng = stream_rng(3, 0);
        let probe = BoxSet::symmetric(2, 14.0);
        for _ in 0..5000 {
            let x = probe.sample(&mut rng);
            assert!(cert.t_bound(&x) <= cert.reach_time(norm(&x)) + 1e-12);
        }
    }

    #[test]
    fn inversion_failure_propagates() {
        let ex = band_example();
        let res = reach_bounds(
            "overflow",
            &ex.lyapunov,
            16.0,
            7.0,
            4.0,
            &|s| s,
            &|s| 2.0 * s,
            1.0,
            vec![0.0],
            &BallGrid::uniform(2, 60.0, 61, 61),
        );
        assert!(matches!(res, Err(CertifyError::InversionFailure { .. })));
    }

    #[test]
    fn band_example_property_q() {
        let ex = band_example();
        let cert = ex28_cert();
        let req = QRequest {
            trials: 100,
            seed: 21,
            sampling_box: BoxSet::new(vec![-14.0, -1.0], vec![14.0, 1.0]),
            sampling_radius: None,
            mesh: 0.05,
        };
        let rep = check_property_q(
            &jet_engine_system(),
            &ex.omega,
            &ex.target,
            &cert,
            &req,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(rep.pass(), "{:?}", rep.violations.first());
        assert!(rep.worst_time_slack <= TIME_TOL);
    }

    #[test]
    fn linear_channel_example_hitting_times() {
        let sys = jet_engine_system();
        for cell in [4usize, 3] {
            let ex = linear_channel_example(cell).unwrap();
            let req = QRequest {
                trials: 50,
                seed: 5 + cell as u64,
                sampling_box: BoxSet::symmetric(2, 10.0),
                sampling_radius: Some(10.0),
                mesh: 0.1,
            };
            let rep = check_property_q(
                &sys,
                &ex.source,
                &ex.target,
                &ex.certificate,
                &req,
                &IntegratorConfig::default(),
            )
            .unwrap();
            assert!(rep.pass(), "cell {cell}: {:?}", rep.violations.first());
            for r in &rep.records {
                let expected = (r.x0[1].abs() - 1.0).max(0.0);
                assert!((r.t_hit.unwrap() - expected).abs() <= 1e-6);
                assert!((ex.certificate.t_bound(&r.x0) - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn start_inside_target_hits_at_zero() {
        let sys = jet_engine_system();
        let ex = linear_channel_example(4).unwrap();
        let d = DisturbanceSignal::constant(vec![0.0, 0.0], sys.disturbance_box.clone()).unwrap();
        let rec = run_trial(
            &sys,
            &ex.target,
            &ex.target,
            &ex.certificate,
            &IntegratorConfig::default(),
            0,
            vec![0.5, 1.0],
            0,
            &d,
        );
        assert_eq!(rec.0.t_hit, Some(0.0));
        assert!(rec.1.is_empty());
    }

    #[test]
    fn target_set_is_positively_invariant() {
        let sys = jet_engine_system();
        let ex = band_example();
        let start_box = BoxSet::new(vec![-4.0, -1.0], vec![4.0, 1.0]);
        let ranges = vec![[-1.0, 1.0], [-1.0, 1.0]];
        let worst: Vec<f64> = (0..100u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(77, k + 1);
                let x0 = start_box.sample(&mut rng);
                let d = DisturbanceSignal::new(
                    DisturbanceKind::PiecewiseConstantRandom {
                        mesh: 0.05,
                        seed: k,
                        ranges: ranges.clone(),
                    },
                    sys.disturbance_box.clone(),
                )
                .unwrap();
                let seg =
                    integrate_held(&sys, &d, &x0, &[0.0], 0.0, 5.0, &IntegratorConfig::default())
                        .unwrap();
                seg.nodes().map(|(_, x)| x[0].abs()).fold(0.0, f64::max)
            })
            .collect();
        for w in worst {
            assert!(w <= 4.0 + 1e-9, "{w}");
        }
        assert!(ex.target.contains(&[4.0, 1.0]));
    }
}
