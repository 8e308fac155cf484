//! Monte-Carlo assessment of the closed loop: bounded trajectories from
//! bounded starts, small excursions from small starts, uniform settling, and
//! the cell-index descent along sampling instants.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::ReachabilityCertificate;
use crate::dynamics::{ControlSystem, DisturbanceKind, DisturbanceSignal, SchedulePerturbation};
use crate::hybrid::{simulate_closed_loop, SimulationError, Trajectory};
use crate::integrate::IntegratorConfig;
use crate::rng::{derive_seed, stream_rng};
use crate::setchain::{PiecewiseFeedback, SetChain};
use crate::vecops::norm;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("invalid suite request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

/// How each trial's sampling-schedule perturbation is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleModel {
    Fixed { schedule: SchedulePerturbation },
    /// Piecewise-constant `d̃` with values uniform in `[0, max]`.
    RandomTable { mesh: f64, max: f64 },
}

impl Default for ScheduleModel {
    fn default() -> Self {
        ScheduleModel::RandomTable { mesh: 0.5, max: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteRequest {
    pub radii: Vec<f64>,
    pub eps_levels: Vec<f64>,
    pub delta_levels: Vec<f64>,
    /// Trials per radius and per δ level.
    pub trials: usize,
    pub t_end: f64,
    pub seed: u64,
    /// Piece length of the random piecewise-constant disturbances.
    pub disturbance_mesh: f64,
    pub schedule: ScheduleModel,
    /// Relative slack for the monotone-envelope comparison.
    pub envelope_tol: f64,
}

impl Default for SuiteRequest {
    fn default() -> Self {
        Self {
            radii: vec![1.0, 5.0, 15.0],
            eps_levels: vec![0.1, 0.01],
            delta_levels: vec![0.001, 0.01, 0.1],
            trials: 100,
            t_end: 20.0,
            seed: 0,
            disturbance_mesh: 0.1,
            schedule: ScheduleModel::default(),
            envelope_tol: 1e-6,
        }
    }
}

impl SuiteRequest {
    fn validate(&self) -> Result<(), StabilityError> {
        let bad = |m: &str| Err(StabilityError::InvalidRequest(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.t_end > 0.0) {
            return bad("t_end must be positive");
        }
        if self.radii.iter().chain(&self.delta_levels).any(|r| !(*r >= 0.0)) {
            return bad("radii and delta levels must be nonnegative");
        }
        if self.eps_levels.is_empty() || self.eps_levels.iter().any(|e| !(*e > 0.0)) {
            return bad("eps levels must be positive and nonempty");
        }
        if !(self.disturbance_mesh > 0.0) {
            return bad("disturbance mesh must be positive");
        }
        if let ScheduleModel::RandomTable { mesh, max } = self.schedule {
            if !(mesh > 0.0) || !(max >= 0.0) {
                return bad("schedule table needs mesh > 0 and max >= 0");
            }
        }
        Ok(())
    }
}

/// Identifies the trial behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub radius: f64,
    pub x0: Vec<f64>,
    pub disturbance_seed: u64,
    pub schedule_seed: u64,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupRow {
    pub radius: f64,
    /// Running max over this and all smaller radii.
    pub sup_norm: f64,
    /// Largest sup over this level's own trials.
    pub level_sup: f64,
    pub worst: Witness,
}

#[derive(Debug, Clone, Serialize)]
pub struct SettlingRow {
    pub eps: f64,
    pub radius: f64,
    /// Running max over smaller radii and larger eps.
    pub time: f64,
    pub worst: Witness,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovChoice {
    pub eps: f64,
    /// Largest tested δ whose sup stays below `eps`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ingredient {
    pub pass: bool,
    pub worst: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentSummary {
    pub runs_checked: usize,
    pub violations: usize,
    pub unresolved: usize,
    pub first_violation: Option<(usize, DescentViolation)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub system: String,
    pub trials_per_level: usize,
    pub total_runs: usize,
    pub seed: u64,
    pub t_end: f64,
    pub request: SuiteRequest,
    pub lagrange_table: Vec<SupRow>,
    pub lyapunov_table: Vec<SupRow>,
    pub lyapunov_choices: Vec<LyapunovChoice>,
    pub settling_table: Vec<SettlingRow>,
    pub lagrange: Ingredient,
    pub lyapunov: Ingredient,
    pub attractivity: Ingredient,
    /// Dense points outside `Θ` after a sampling instant in `C₁`.
    pub theta_invariance: Ingredient,
    pub escape: Option<Witness>,
    pub descent: Option<DescentSummary>,
}

impl StabilityReport {
    pub fn pass(&self) -> bool {
        self.escape.is_none()
            && self.lagrange.pass
            && self.lyapunov.pass
            && self.attractivity.pass
            && self.theta_invariance.pass
            && self.descent.as_ref().is_none_or(|d| d.violations == 0)
    }
}

struct TrialSpec {
    index: usize,
    radius: f64,
    x0: Vec<f64>,
    disturbance_seed: u64,
    schedule_seed: u64,
}

struct TrialResult {
    sup: f64,
    escaped: Option<f64>,
    /// Last exit time from each eps-ball (suite order), `+∞` if not settled.
    settle: Vec<f64>,
    theta_breach: Option<f64>,
    descent: Option<DescentVerdict>,
}

fn sphere_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|c| c * radius / r).collect();
        }
    }
}

fn trial_disturbance(sys: &ControlSystem, mesh: f64, seed: u64) -> DisturbanceSignal {
    if sys.disturbance_dim() == 0 {
        return DisturbanceSignal::none();
    }
    let b = &sys.disturbance_box;
    let ranges = b.lower.iter().zip(&b.upper).map(|(&l, &u)| [l, u]).collect();
    DisturbanceSignal::new(
        DisturbanceKind::PiecewiseConstantRandom { mesh, seed, ranges },
        b.clone(),
    )
    .expect("ranges equal the disturbance box")
}

fn trial_schedule(model: &ScheduleModel, t_end: f64, seed: u64) -> SchedulePerturbation {
    match model {
        ScheduleModel::Fixed { schedule } => schedule.clone(),
        ScheduleModel::RandomTable { mesh, max } => {
            let mut rng = stream_rng(seed, 0);
            let count = (t_end / mesh).ceil() as usize + 1;
            let times = (0..count).map(|k| k as f64 * mesh).collect();
            let values = (0..count).map(|_| rng.gen::<f64>() * max).collect();
            SchedulePerturbation::Tabulated { times, values }
        }
    }
}

fn witness(spec: &TrialSpec, value: f64, note: impl Into<String>) -> Witness {
    Witness {
        trial: spec.index,
        radius: spec.radius,
        x0: spec.x0.clone(),
        disturbance_seed: spec.disturbance_seed,
        schedule_seed: spec.schedule_seed,
        value,
        note: note.into(),
    }
}

/// First time a dense point leaves `Θ` after a sampling instant in `C₁`.
pub fn theta_breach(traj: &Trajectory, chain: &SetChain) -> Option<f64> {
    let first = traj.cells.iter().position(|&c| c == 1)?;
    let t0 = traj.segments[first].start();
    traj.dense_points()
        .find(|p| p.t >= t0 && !chain.theta().contains(p.x))
        .map(|p| p.t)
}

fn run_trial(
    sys: &ControlSystem,
    fb: &PiecewiseFeedback,
    req: &SuiteRequest,
    eps_levels: &[f64],
    spec: &TrialSpec,
    certs: Option<&BTreeMap<usize, ReachabilityCertificate>>,
    cfg: &IntegratorConfig,
) -> Result<TrialResult, StabilityError> {
    let d = trial_disturbance(sys, req.disturbance_mesh, spec.disturbance_seed);
    let sched = trial_schedule(&req.schedule, req.t_end, spec.schedule_seed);
    let traj = simulate_closed_loop(sys, fb, &spec.x0, &d, &sched, req.t_end, cfg)?;
    let end = traj.end_time();
    let settle = eps_levels
        .iter()
        .map(|&eps| match traj.last_exit_time(eps) {
            None => 0.0,
            Some(_) if traj.escaped() => f64::INFINITY,
            Some(t) if t >= end => f64::INFINITY,
            Some(t) => t,
        })
        .collect();
    Ok(TrialResult {
        sup: traj.sup_norm(),
        escaped: match traj.termination {
            crate::hybrid::Termination::FiniteEscape { time, .. } => Some(time),
            _ => None,
        },
        settle,
        theta_breach: theta_breach(&traj, fb.chain()),
        descent: certs.map(|c| check_set_descent(&traj, fb.chain(), c)),
    })
}

/// Monte-Carlo over starts on spheres of the given radii (and of the δ
/// levels), with random disturbances and schedule perturbations per trial.
pub fn run_stability_suite(
    sys: &ControlSystem,
    fb: &PiecewiseFeedback,
    req: &SuiteRequest,
    certs: Option<&BTreeMap<usize, ReachabilityCertificate>>,
    cfg: &IntegratorConfig,
) -> Result<StabilityReport, StabilityError> {
    req.validate()?;
    let n = sys.state_dim;
    let mut radii = req.radii.clone();
    radii.sort_by(f64::total_cmp);
    let mut deltas = req.delta_levels.clone();
    deltas.sort_by(f64::total_cmp);
    let mut eps_levels = req.eps_levels.clone();
    eps_levels.sort_by(|a, b| b.total_cmp(a));

    let levels: Vec<f64> = radii.iter().chain(&deltas).copied().collect();
    let mut specs = Vec::new();
    for (li, &radius) in levels.iter().enumerate() {
        let mut rng = stream_rng(req.seed, li as u64);
        for _ in 0..req.trials {
            let index = specs.len();
            specs.push(TrialSpec {
                index,
                radius,
                x0: sphere_point(&mut rng, n, radius),
                disturbance_seed: derive_seed(req.seed, 2 * index as u64),
                schedule_seed: derive_seed(req.seed, 2 * index as u64 + 1),
            });
        }
    }
    let results: Vec<TrialResult> = specs
        .par_iter()
        .map(|s| run_trial(sys, fb, req, &eps_levels, s, certs, cfg))
        .collect::<Result<_, _>>()?;

    let escape = specs
        .iter()
        .zip(&results)
        .find_map(|(s, r)| r.escaped.map(|t| witness(s, t, "finite escape time")));

    let level_trials = |li: usize| li * req.trials..(li + 1) * req.trials;
    let sup_table = |offset: usize, rs: &[f64]| -> (Vec<SupRow>, Option<Witness>) {
        let mut rows: Vec<SupRow> = Vec::new();
        let mut breach = None;
        let mut running = 0.0f64;
        for (j, &radius) in rs.iter().enumerate() {
            let idx = level_trials(offset + j)
                .max_by(|&a, &b| results[a].sup.total_cmp(&results[b].sup))
                .expect("trials >= 1");
            let level_sup = results[idx].sup;
            // A smaller level must not exceed what a larger one reports.
            if let Some(prev) = rows.last() {
                if prev.level_sup > level_sup * (1.0 + req.envelope_tol) + req.envelope_tol
                    && breach.is_none()
                {
                    breach = Some(witness(
                        &specs[level_trials(offset + j - 1)
                            .max_by(|&a, &b| results[a].sup.total_cmp(&results[b].sup))
                            .unwrap()],
                        prev.level_sup,
                        format!("sup exceeds the radius-{radius} envelope {level_sup}"),
                    ));
                }
            }
            running = running.max(level_sup);
            rows.push(SupRow {
                radius,
                sup_norm: running,
                level_sup,
                worst: witness(&specs[idx], level_sup, "largest sup |x(t)|"),
            });
        }
        (rows, breach)
    };
    let (lagrange_table, lagrange_breach) = sup_table(0, &radii);
    let (lyapunov_table, lyapunov_breach) = sup_table(radii.len(), &deltas);

    let nonfinite = |rows: &[SupRow]| {
        rows.iter()
            .find(|r| !r.level_sup.is_finite())
            .map(|r| r.worst.clone())
    };
    let lagrange_fail = escape
        .clone()
        .or_else(|| nonfinite(&lagrange_table))
        .or(lagrange_breach);
    let lagrange = Ingredient {
        pass: lagrange_fail.is_none(),
        worst: lagrange_fail.or_else(|| lagrange_table.last().map(|r| r.worst.clone())),
    };

    let lyapunov_choices: Vec<LyapunovChoice> = eps_levels
        .iter()
        .map(|&eps| LyapunovChoice {
            eps,
            delta: lyapunov_table
                .iter()
                .filter(|r| r.sup_norm < eps)
                .map(|r| r.radius)
                .next_back(),
        })
        .collect();
    let lyapunov_fail = escape.clone().or(lyapunov_breach).or_else(|| {
        lyapunov_choices
            .iter()
            .find(|c| c.delta.is_none())
            .and_then(|c| {
                lyapunov_table.first().map(|r| Witness {
                    note: format!("no tested delta keeps sup below eps = {}", c.eps),
                    ..r.worst.clone()
                })
            })
    });
    let lyapunov = Ingredient {
        pass: lyapunov_fail.is_none() && !deltas.is_empty(),
        worst: lyapunov_fail.or_else(|| lyapunov_table.first().map(|r| r.worst.clone())),
    };

    let mut settling_table = Vec::new();
    let mut attractivity_fail = escape.clone();
    let mut prev_row = vec![0.0f64; radii.len()];
    for (ie, &eps) in eps_levels.iter().enumerate() {
        let mut running = 0.0f64;
        for (j, &radius) in radii.iter().enumerate() {
            let idx = level_trials(j)
                .max_by(|&a, &b| results[a].settle[ie].total_cmp(&results[b].settle[ie]))
                .expect("trials >= 1");
            let t = results[idx].settle[ie];
            if !t.is_finite() && attractivity_fail.is_none() {
                attractivity_fail = Some(witness(
                    &specs[idx],
                    t,
                    format!("not settled into the {eps}-ball by t_end"),
                ));
            }
            running = running.max(t).max(prev_row[j]);
            prev_row[j] = running;
            settling_table.push(SettlingRow {
                eps,
                radius,
                time: running,
                worst: witness(&specs[idx], t, "latest exit time"),
            });
        }
    }
    let attractivity = Ingredient {
        pass: attractivity_fail.is_none(),
        worst: attractivity_fail.or_else(|| settling_table.last().map(|r| r.worst.clone())),
    };

    let breach = specs
        .iter()
        .zip(&results)
        .find_map(|(s, r)| r.theta_breach.map(|t| witness(s, t, "left theta at t")));
    let theta_invariance = Ingredient {
        pass: breach.is_none(),
        worst: breach,
    };

    let descent = certs.map(|_| {
        let mut summary = DescentSummary {
            runs_checked: 0,
            violations: 0,
            unresolved: 0,
            first_violation: None,
        };
        for (s, r) in specs.iter().zip(&results) {
            let Some(v) = &r.descent else { continue };
            summary.runs_checked += 1;
            summary.violations += v.violations.len();
            summary.unresolved += v.unresolved;
            if summary.first_violation.is_none() {
                summary.first_violation = v.violations.first().map(|x| (s.index, x.clone()));
            }
        }
        summary
    });

    Ok(StabilityReport {
        system: sys.label.clone(),
        trials_per_level: req.trials,
        total_runs: specs.len(),
        seed: req.seed,
        t_end: req.t_end,
        request: req.clone(),
        lagrange_table,
        lyapunov_table,
        lyapunov_choices,
        settling_table,
        lagrange,
        lyapunov,
        attractivity,
        theta_invariance,
        escape,
        descent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentViolationKind {
    /// No lower cell within `c + b(|x(τ_i)|) + r`.
    Window,
    /// `|x(t)| > a(|x(τ_i)|)` before the descent.
    Envelope,
    /// `Θ` not entered by `N(c + b(a⁽ᴺ⁾(|x₀|)) + r)`.
    ThetaEntry,
    FiniteEscape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentViolation {
    pub kind: DescentViolationKind,
    pub instant: usize,
    pub time: f64,
    pub cell: usize,
    pub bound: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentVerdict {
    /// `(start time, cell)` for each run of equal indices.
    pub index_runs: Vec<(f64, usize)>,
    pub theta_entry: Option<f64>,
    pub theta_entry_bound: f64,
    pub instants_checked: usize,
    /// Instants whose window extends past the end of the record.
    pub unresolved: usize,
    /// Instants in cells without a certificate.
    pub uncertified: usize,
    pub violations: Vec<DescentViolation>,
}

impl DescentVerdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

const DESCENT_TOL: f64 = 1e-9;

/// Checks the cell-index descent along sampling instants against
/// certificates keyed by cell index.
pub fn check_set_descent(
    traj: &Trajectory,
    chain: &SetChain,
    certs: &BTreeMap<usize, ReachabilityCertificate>,
) -> DescentVerdict {
    let cells = &traj.cells;
    let times = traj.instants();
    let count = cells.len();
    let end = traj.end_time();

    let mut index_runs: Vec<(f64, usize)> = Vec::new();
    for (i, &c) in cells.iter().enumerate() {
        if index_runs.last().is_none_or(|r| r.1 != c) {
            index_runs.push((times[i], c));
        }
    }

    // Next instant with a strictly smaller index.
    let mut next_lower = vec![None; count];
    let mut stack: Vec<usize> = Vec::new();
    for i in (0..count).rev() {
        while stack.last().is_some_and(|&j| cells[j] >= cells[i]) {
            stack.pop();
        }
        next_lower[i] = stack.last().copied();
        stack.push(i);
    }

    let mut violations = Vec::new();
    let mut unresolved = 0;
    let mut uncertified = 0;
    let mut checked = 0;
    for i in 0..count {
        let k = cells[i];
        if k <= 1 {
            continue;
        }
        let Some(cert) = certs.get(&k) else {
            uncertified += 1;
            continue;
        };
        checked += 1;
        let s = norm(traj.instant_state(i));
        let window = cert.window(s);
        let tau = times[i];
        let (t_hit, observed) = match next_lower[i] {
            Some(j) => (times[j], times[j] - tau),
            None => {
                if tau + window > end && !traj.escaped() {
                    unresolved += 1;
                    continue;
                }
                (end, f64::INFINITY)
            }
        };
        if !(observed <= window + DESCENT_TOL) {
            violations.push(DescentViolation {
                kind: DescentViolationKind::Window,
                instant: i,
                time: tau,
                cell: k,
                bound: window,
                observed,
            });
        }
        let bound = cert.a.eval(s);
        let sup = traj.sup_norm_between(tau, t_hit.min(end));
        if !(sup <= bound * (1.0 + DESCENT_TOL) + DESCENT_TOL) {
            violations.push(DescentViolation {
                kind: DescentViolationKind::Envelope,
                instant: i,
                time: tau,
                cell: k,
                bound,
                observed: sup,
            });
        }
    }

    let theta_entry = cells.iter().position(|&c| c == 1).map(|i| times[i]);
    let theta_entry_bound = if cells.iter().all(|&c| c == 1) {
        0.0
    } else if certs.is_empty() {
        f64::INFINITY
    } else {
        let n = chain
            .len()
            .unwrap_or_else(|| cells.iter().copied().max().unwrap_or(1)) as f64;
        let c = certs.values().map(|z| z.c).fold(0.0, f64::max);
        let r = certs.values().map(|z| z.dwell).fold(0.0, f64::max);
        let a = |s: f64| certs.values().map(|z| z.a.eval(s)).fold(s, f64::max);
        let b = |s: f64| certs.values().map(|z| z.b.eval(s)).fold(0.0, f64::max);
        let mut s = norm(traj.instant_state(0));
        for _ in 0..n as usize {
            s = a(s);
        }
        let bound = n * (c + b(s) + r);
        if bound.is_nan() {
            f64::INFINITY
        } else {
            bound
        }
    };
    match theta_entry {
        Some(t) if t > theta_entry_bound + DESCENT_TOL => violations.push(DescentViolation {
            kind: DescentViolationKind::ThetaEntry,
            instant: 0,
            time: t,
            cell: cells[0],
            bound: theta_entry_bound,
            observed: t,
        }),
        None if end >= theta_entry_bound => violations.push(DescentViolation {
            kind: DescentViolationKind::ThetaEntry,
            instant: 0,
            time: end,
            cell: cells[0],
            bound: theta_entry_bound,
            observed: f64::INFINITY,
        }),
        _ => {}
    }
    if let crate::hybrid::Termination::FiniteEscape { time, last_cell } = traj.termination {
        violations.push(DescentViolation {
            kind: DescentViolationKind::FiniteEscape,
            instant: count - 1,
            time,
            cell: last_cell,
            bound: f64::INFINITY,
            observed: time,
        });
    }

    DescentVerdict {
        index_runs,
        theta_entry,
        theta_entry_bound,
        instants_checked: checked,
        unresolved,
        uncertified,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::BallGrid;
    use crate::scenarios::{build_jet_engine, build_scalar};
    use std::sync::Arc;

    fn small_request() -> SuiteRequest {
        SuiteRequest {
            radii: vec![0.5, 2.0],
            eps_levels: vec![0.1, 0.01],
            delta_levels: vec![0.001, 0.01],
            trials: 4,
            t_end: 10.0,
            seed: 11,
            ..SuiteRequest::default()
        }
    }

    #[test]
    fn scalar_suite_passes() {
        let sc = build_scalar(Arc::new(|x: f64| x * x)).unwrap();
        let rep = run_stability_suite(
            &sc.system,
            &sc.feedback(),
            &SuiteRequest {
                radii: vec![0.5, 1.5, 5.0],
                // Negative starts decay like 1/t under u = 0.
                eps_levels: vec![0.1, 0.05],
                t_end: 40.0,
                schedule: ScheduleModel::Fixed {
                    schedule: SchedulePerturbation::Zero,
                },
                ..small_request()
            },
            None,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(rep.pass(), "{rep:#?}");
        assert_eq!(rep.total_runs, 5 * 4);
        for w in rep.lagrange_table.windows(2) {
            assert!(w[1].sup_norm >= w[0].sup_norm);
        }
    }

    #[test]
    fn origin_trials_are_trivial() {
        let sc = build_jet_engine(0.001).unwrap();
        let rep = run_stability_suite(
            &sc.system,
            &sc.figure_feedback(),
            &SuiteRequest {
                radii: vec![0.0],
                delta_levels: vec![0.0],
                trials: 2,
                t_end: 0.05,
                ..small_request()
            },
            None,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.lagrange_table[0].sup_norm, 0.0);
        assert!(rep.settling_table.iter().all(|r| r.time == 0.0));
    }

    #[test]
    fn flipped_cell_four_control_breaks_attractivity() {
        let sc = build_jet_engine(0.001).unwrap();
        let fb = sc.figure_feedback().with_cell_control(4, vec![1.0]).unwrap();
        let rep = run_stability_suite(
            &sc.system,
            &fb,
            &SuiteRequest {
                radii: vec![15.0],
                delta_levels: vec![],
                trials: 8,
                t_end: 5.0,
                ..small_request()
            },
            None,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(!rep.attractivity.pass);
        let w = rep.attractivity.worst.as_ref().unwrap();
        assert!(w.value.is_infinite());
        assert!(!rep.pass());
    }

    #[test]
    fn reports_are_reproducible() {
        let sc = build_scalar(Arc::new(|x: f64| x * x)).unwrap();
        let run = || {
            let rep = run_stability_suite(
                &sc.system,
                &sc.feedback(),
                &small_request(),
                None,
                &IntegratorConfig::default(),
            )
            .unwrap();
            format!("{rep:?}")
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn descent_from_cell_four() {
        let sc = build_jet_engine(0.001).unwrap();
        let certs = sc
            .descent_certificates(&BallGrid::uniform(2, 30.0, 61, 41))
            .unwrap();
        let fig = sc.figure(1).unwrap();
        let traj = simulate_closed_loop(
            &sc.system,
            &sc.figure_feedback(),
            &fig.x0,
            &fig.disturbance,
            &fig.schedule,
            5.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let v = check_set_descent(&traj, &sc.chain(), &certs);
        assert!(v.pass(), "{:?}", v.violations);
        assert_eq!(v.index_runs.first().unwrap().1, 4);
        assert_eq!(v.index_runs.last().unwrap().1, 1);
        // Leaving cell 4 takes x₂₀ − 1 = 1 plus at most one gap.
        let left = v.index_runs[1].0;
        assert!(left <= 1.0 + 0.001 + 1e-9, "{left}");
    }

    #[test]
    fn descent_inside_theta_is_vacuous() {
        let sc = build_jet_engine(0.001).unwrap();
        let fig = sc.figure(1).unwrap();
        let traj = simulate_closed_loop(
            &sc.system,
            &sc.figure_feedback(),
            &[0.5, 0.5],
            &fig.disturbance,
            &fig.schedule,
            0.5,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let v = check_set_descent(&traj, &sc.chain(), &BTreeMap::new());
        assert!(v.pass());
        assert_eq!(v.instants_checked, 0);
        assert_eq!(v.theta_entry, Some(0.0));
    }

    #[test]
    fn late_descent_is_flagged() {
        let sc = build_jet_engine(0.001).unwrap();
        let mut certs = sc
            .descent_certificates(&BallGrid::uniform(2, 30.0, 61, 41))
            .unwrap();
        // Shrink the cell-4 window so that the true descent looks late.
        let c4 = certs.remove(&4).unwrap();
        certs.insert(
            4,
            ReachabilityCertificate::new(
                "tight",
                c4.control.clone(),
                1e-6,
                0.0,
                crate::certify::Envelope::zero(),
                c4.a.clone(),
                |_| 0.0,
            ),
        );
        let fig = sc.figure(1).unwrap();
        let traj = simulate_closed_loop(
            &sc.system,
            &sc.figure_feedback(),
            &fig.x0,
            &fig.disturbance,
            &fig.schedule,
            2.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let v = check_set_descent(&traj, &sc.chain(), &certs);
        assert!(v
            .violations
            .iter()
            .any(|x| x.kind == DescentViolationKind::Window && x.cell == 4));
    }
}
