use rayon::prelude::*;
use serde::Serialize;

use super::{disturbance_grid, CertifyError, GridSpec, LyapunovData, MARGIN_TOL};
use crate::dynamics::ControlSystem;
use crate::setchain::Region;
use crate::vecops::dot;

/// Outcome of the decrease check `sup_d ∇V(x)·f(d, x, v) ≤ −δ` on
/// `Ω ∩ {V ≥ R}`.
#[derive(Debug, Clone, Serialize)]
pub struct DecreaseReport {
    pub pass: bool,
    pub delta: f64,
    pub r_level: f64,
    /// Largest `∇V·f` found.
    pub worst_value: f64,
    /// `−δ − worst_value`; the check passes when this is `≥ −margin_tol`.
    pub margin: f64,
    pub margin_tol: f64,
    pub maximizer_x: Vec<f64>,
    pub maximizer_d: Vec<f64>,
    pub state_nodes_checked: usize,
    pub disturbance_nodes: usize,
    pub grid: GridSpec,
    pub resolution: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn worst_over(
    sys: &ControlSystem,
    omega: &Region,
    lyap: &LyapunovData,
    v: &[f64],
    r_level: f64,
    states: &[Vec<f64>],
    ds: &[Vec<f64>],
) -> Option<(f64, Vec<f64>, Vec<f64>, usize)> {
    let n = sys.state_dim;
    let kept: Vec<&Vec<f64>> = states
        .iter()
        .filter(|x| omega.contains(x) && lyap.value(x) >= r_level)
        .collect();
    if kept.is_empty() {
        return None;
    }
    let count = kept.len();
    let (val, x, d) = kept
        .par_iter()
        .map(|x| {
            let g = lyap.gradient(x);
            let mut f = vec![0.0; n];
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (k, d) in ds.iter().enumerate() {
                sys.rhs_into(d, x, v, &mut f);
                let s = dot(&g, &f);
                if s > best.0 {
                    best = (s, k);
                }
            }
            (best.0, (*x).clone(), ds[best.1].clone())
        })
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
        .unwrap();
    Some((val, x, d, count))
}

/// Evaluates `∇V(x)·f(d, x, v)` on the grid nodes of `Ω ∩ {V ≥ R}` times a
/// grid of `D` with `d_nodes` points per axis.
#[allow(clippy::too_many_arguments)]
pub fn certify_decrease(
    sys: &ControlSystem,
    omega: &Region,
    lyap: &LyapunovData,
    v: &[f64],
    r_level: f64,
    delta: f64,
    grid: &GridSpec,
    d_nodes: usize,
) -> Result<DecreaseReport, CertifyError> {
    if !(delta > 0.0) {
        return Err(CertifyError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if grid.dim() != sys.state_dim {
        return Err(CertifyError::InvalidArgument("grid dimension differs from n".into()));
    }
    sys.check_control(v)
        .map_err(|e| CertifyError::InvalidArgument(e.to_string()))?;
    let ds = disturbance_grid(&sys.disturbance_box, d_nodes);
    let states = grid.points();
    let (worst, x, d, count) =
        worst_over(sys, omega, lyap, v, r_level, &states, &ds).ok_or(CertifyError::EmptyGrid)?;
    let margin = -delta - worst;
    Ok(DecreaseReport {
        pass: margin >= -MARGIN_TOL,
        delta,
        r_level,
        worst_value: worst,
        margin,
        margin_tol: MARGIN_TOL,
        maximizer_x: x,
        maximizer_d: d,
        state_nodes_checked: count,
        disturbance_nodes: ds.len(),
        grid: grid.clone(),
        resolution: grid.spacing(),
    })
}

/// Re-evaluates the worst value on a `factor`-times finer local grid around
/// the reported maximizer (one coarse cell in each direction), with a
/// `factor`-times finer disturbance grid.
pub fn refine_decrease_maximizer(
    sys: &ControlSystem,
    omega: &Region,
    lyap: &LyapunovData,
    v: &[f64],
    report: &DecreaseReport,
    d_nodes: usize,
    factor: usize,
) -> f64 {
    let h = report.resolution.clone();
    let lower: Vec<f64> = report.maximizer_x.iter().zip(&h).map(|(c, s)| c - s).collect();
    let upper: Vec<f64> = report.maximizer_x.iter().zip(&h).map(|(c, s)| c + s).collect();
    let local = GridSpec {
        lower,
        upper,
        nodes: vec![2 * factor + 1; h.len()],
        transform: None,
    };
    let ds = disturbance_grid(&sys.disturbance_box, (d_nodes - 1) * factor + 1);
    worst_over(sys, omega, lyap, v, report.r_level, &local.points(), &ds)
        .map_or(report.worst_value, |(w, ..)| w.max(report.worst_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::BoxSet;
    use crate::scenarios::{band_example, jet_engine_system};

    fn setup() -> (ControlSystem, Region, LyapunovData, GridSpec) {
        let ex = band_example();
        let grid = GridSpec::on_box(&BoxSet::new(vec![-20.0, -1.0], vec![20.0, 1.0]), &[201, 41]);
        (jet_engine_system(), ex.omega, ex.lyapunov, grid)
    }

    #[test]
    fn band_example_passes() {
        let (sys, omega, lyap, grid) = setup();
        let rep = certify_decrease(&sys, &omega, &lyap, &[0.0], 16.0, 7.0, &grid, 3).unwrap();
        assert!(rep.pass);
        assert!(rep.worst_value <= -7.0 + 1e-9);
        // Worst case sits on V = R: |x₁| = 4, x₂ and d at extremes.
        assert!((rep.worst_value + 24.0).abs() < 1e-9, "{}", rep.worst_value);
        assert_eq!(rep.maximizer_x[0].abs(), 4.0);
        assert_eq!(rep.disturbance_nodes, 9);
    }

    #[test]
    fn unsatisfiable_delta_fails() {
        let (sys, omega, lyap, grid) = setup();
        let rep = certify_decrease(&sys, &omega, &lyap, &[0.0], 16.0, 1e6, &grid, 3).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn maximizer_survives_refinement() {
        let (sys, omega, lyap, grid) = setup();
        let rep = certify_decrease(&sys, &omega, &lyap, &[0.0], 16.0, 7.0, &grid, 3).unwrap();
        let refined = refine_decrease_maximizer(&sys, &omega, &lyap, &[0.0], &rep, 3, 10);
        assert!((refined - rep.worst_value).abs() <= 0.05 * rep.worst_value.abs());
    }

    #[test]
    fn doubling_density_keeps_the_verdict() {
        let (sys, omega, lyap, grid) = setup();
        let coarse = certify_decrease(&sys, &omega, &lyap, &[0.0], 16.0, 7.0, &grid, 3).unwrap();
        assert!(coarse.margin > 2.0 * MARGIN_TOL);
        let fine =
            certify_decrease(&sys, &omega, &lyap, &[0.0], 16.0, 7.0, &grid.doubled(), 5).unwrap();
        assert!(fine.pass);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let (sys, omega, lyap, _) = setup();
        let tiny = GridSpec::on_box(&BoxSet::symmetric(2, 1.0), &[5, 5]);
        assert!(matches!(
            certify_decrease(&sys, &omega, &lyap, &[0.0], 16.0, 7.0, &tiny, 3),
            Err(CertifyError::EmptyGrid)
        ));
    }
}
