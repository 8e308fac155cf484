use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::CertifyError;
use crate::dynamics::{ControlSystem, DisturbanceKind, DisturbanceSignal};
use crate::integrate::{integrate_held, DenseSegment, IntegratorConfig};
use crate::rng::stream_rng;
use crate::vecops::{dist, norm};

#[derive(Debug, Clone, Serialize)]
pub struct AttractorRequest {
    pub eps_levels: Vec<f64>,
    pub radius_levels: Vec<f64>,
    pub trials_per_level: usize,
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorRow {
    pub eps: f64,
    pub radius: f64,
    /// Empirical time after which every run from `|x₀| ≤ radius` stays in
    /// the `eps`-neighborhood of the attractor estimate.
    pub time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorReport {
    pub runs: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Largest norm among the limit-set sample points.
    pub attractor_radius: f64,
    pub attractor_points: usize,
    pub table: Vec<AttractorRow>,
    pub verdict: bool,
}

impl AttractorReport {
    pub fn time(&self, eps: f64, radius: f64) -> Option<f64> {
        self.table
            .iter()
            .find(|r| r.eps == eps && r.radius == radius)
            .map(|r| r.time)
    }
}

fn cloud_distance(cloud: &[Vec<f64>], x: &[f64]) -> f64 {
    cloud.iter().map(|a| dist(a, x)).fold(f64::INFINITY, f64::min)
}

/// Last time the run is at distance `≥ eps` from the cloud (0 if never).
fn last_exit(seg: &DenseSegment, cloud: &[Vec<f64>], eps: f64) -> f64 {
    let Some(k) = (0..seg.len())
        .rev()
        .find(|&k| cloud_distance(cloud, seg.state(k)) >= eps)
    else {
        return 0.0;
    };
    if k + 1 == seg.len() {
        return seg.time(k);
    }
    let (mut lo, mut hi) = (seg.time(k), seg.time(k + 1));
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cloud_distance(cloud, &seg.state_at(mid)) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Empirical reach time into neighborhoods of the attractor of
/// `ẋ = f(d, x, v)` with `d` frozen. The attractor is estimated as the cloud
/// of end states of all runs.
pub fn estimate_attractor_reach(
    sys: &ControlSystem,
    v: &[f64],
    d: &DisturbanceSignal,
    req: &AttractorRequest,
    cfg: &IntegratorConfig,
) -> Result<AttractorReport, CertifyError> {
    if sys.disturbance_dim() > 0 && !matches!(d.kind, DisturbanceKind::Constant { .. }) {
        return Err(CertifyError::InvalidArgument(
            "attractor estimation needs a disturbance-free or frozen system".into(),
        ));
    }
    if req.trials_per_level == 0 || req.eps_levels.is_empty() || req.radius_levels.is_empty() {
        return Err(CertifyError::InvalidArgument("empty request".into()));
    }
    sys.check_control(v)
        .map_err(|e| CertifyError::InvalidArgument(e.to_string()))?;
    let n = sys.state_dim;
    let mut radii = req.radius_levels.clone();
    radii.sort_by(f64::total_cmp);
    let mut starts = Vec::new();
    for (j, &radius) in radii.iter().enumerate() {
        let mut rng = stream_rng(req.seed, j as u64);
        for k in 0..req.trials_per_level {
            let mut dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nd = norm(&dir);
            if nd == 0.0 {
                dir[0] = 1.0;
            } else {
                dir.iter_mut().for_each(|c| *c /= nd);
            }
            // Even trials on the sphere, odd trials inside the ball.
            let scale = if k % 2 == 0 {
                radius
            } else {
                radius * rng.gen::<f64>().powf(1.0 / n as f64)
            };
            starts.push((j, dir.into_iter().map(|c| c * scale).collect::<Vec<f64>>()));
        }
    }
    let runs: Vec<(usize, DenseSegment)> = starts
        .into_par_iter()
        .map(|(j, x0)| {
            integrate_held(sys, d, &x0, v, 0.0, req.horizon, cfg)
                .map(|seg| (j, seg))
                .map_err(|e| CertifyError::NonConvergence(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let cloud: Vec<Vec<f64>> = runs.iter().map(|(_, s)| s.final_state().to_vec()).collect();
    let eps_min = req.eps_levels.iter().copied().fold(f64::INFINITY, f64::min);
    for (_, seg) in &runs {
        let tail_start = 0.75 * req.horizon;
        for (t, x) in seg.nodes() {
            if t >= tail_start && cloud_distance(&cloud, x) > 0.5 * eps_min {
                return Err(CertifyError::NonConvergence(format!(
                    "run still moving at t = {t} (distance {} to the limit set)",
                    cloud_distance(&cloud, x)
                )));
            }
        }
    }

    let mut eps_levels = req.eps_levels.clone();
    eps_levels.sort_by(|a, b| b.total_cmp(a));
    let exits: Vec<Vec<f64>> = runs
        .par_iter()
        .map(|(_, seg)| eps_levels.iter().map(|&e| last_exit(seg, &cloud, e)).collect())
        .collect();
    let mut table = Vec::new();
    let mut verdict = true;
    let mut prev_eps_row: Vec<f64> = vec![0.0; radii.len()];
    for (ie, &eps) in eps_levels.iter().enumerate() {
        let mut run_max = 0.0f64;
        for (j, &radius) in radii.iter().enumerate() {
            for (k, (lvl, _)) in runs.iter().enumerate() {
                if *lvl == j {
                    run_max = run_max.max(exits[k][ie]);
                }
            }
            // Nonincreasing in eps: smaller eps never reports a shorter time.
            let t = run_max.max(prev_eps_row[j]);
            prev_eps_row[j] = t;
            table.push(AttractorRow {
                eps,
                radius,
                time: t,
            });
        }
    }
    // Every run stays inside after its level's time, including between nodes.
    for (ie, &eps) in eps_levels.iter().enumerate() {
        for (k, (_, seg)) in runs.iter().enumerate() {
            let t0 = exits[k][ie];
            for w in seg.times().windows(2) {
                if w[1] <= t0 {
                    continue;
                }
                let mid = 0.5 * (w[0].max(t0) + w[1]);
                if cloud_distance(&cloud, &seg.state_at(mid)) >= eps {
                    verdict = false;
                }
            }
        }
    }
    Ok(AttractorReport {
        runs: runs.len(),
        horizon: req.horizon,
        seed: req.seed,
        attractor_radius: cloud.iter().map(|a| norm(a)).fold(0.0, f64::max),
        attractor_points: cloud.len(),
        table,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BoxSet, ControlSet};

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

    fn request() -> AttractorRequest {
        AttractorRequest {
            eps_levels: vec![0.1, 0.05],
            radius_levels: vec![0.5, 1.0, 2.0],
            trials_per_level: 4,
            horizon: 30.0,
            seed: 3,
        }
    }

    #[test]
    fn exponential_decay_reach_time() {
        let rep = estimate_attractor_reach(
            &decay(),
            &[0.0],
            &DisturbanceSignal::none(),
            &request(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(rep.verdict);
        let t = rep.time(0.1, 1.0).unwrap();
        assert!((t - 10f64.ln()).abs() <= 0.05 * 10f64.ln(), "{t}");
        let mut prev = 0.0;
        for r in [0.5, 1.0, 2.0] {
            let t = rep.time(0.1, r).unwrap();
            assert!(t >= prev);
            prev = t;
            assert!(rep.time(0.05, r).unwrap() >= t);
        }
    }

    #[test]
    fn start_inside_neighborhood_has_zero_time() {
        let req = AttractorRequest {
            radius_levels: vec![0.01],
            ..request()
        };
        let rep = estimate_attractor_reach(
            &decay(),
            &[0.0],
            &DisturbanceSignal::none(),
            &req,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.time(0.1, 0.01), Some(0.0));
    }

    #[test]
    fn short_horizon_does_not_converge() {
        let req = AttractorRequest {
            horizon: 0.5,
            ..request()
        };
        let err = estimate_attractor_reach(
            &decay(),
            &[0.0],
            &DisturbanceSignal::none(),
            &req,
            &IntegratorConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CertifyError::NonConvergence(_)));
    }
}
