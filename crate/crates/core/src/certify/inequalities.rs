use rayon::prelude::*;
use serde::Serialize;

use super::envelope::ScalarFn;
use super::{disturbance_grid, CertifyError, GridSpec, LyapunovData, MARGIN_TOL};
use crate::dynamics::ControlSystem;
use crate::setchain::{InnerFeedback, Region};
use crate::vecops::{dot, norm, sub};

/// Grids for the emulation inequalities on `Θ × Θ × D`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityGrid {
    /// Nodes for both `z` and `x` (kept when inside `Θ`).
    pub theta_grid: GridSpec,
    pub d_nodes: usize,
    /// Extra `x = z + s·(|z|/M)·e` probes for the second inequality, for
    /// `s` in `perturbation_scales` and `directions` unit vectors `e`.
    pub directions: usize,
    pub perturbation_scales: Vec<f64>,
}

impl InequalityGrid {
    pub fn new(theta_grid: GridSpec, d_nodes: usize) -> Self {
        Self {
            theta_grid,
            d_nodes,
            directions: 16,
            perturbation_scales: vec![0.25, 0.5, 1.0],
        }
    }

    fn unit_directions(&self, n: usize) -> Vec<Vec<f64>> {
        if n == 2 {
            (0..self.directions)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / self.directions as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect()
        } else {
            let mut out = Vec::new();
            for k in 0..n {
                for s in [-1.0, 1.0] {
                    let mut e = vec![0.0; n];
                    e[k] = s;
                    out.push(e);
                }
            }
            out
        }
    }
}

/// Worst node of one inequality: `lhs − rhs` maximized.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub pass: bool,
    /// Largest `lhs − rhs` (the check passes when `≤ margin_tol`).
    pub worst_excess: f64,
    pub witness_z: Vec<f64>,
    pub witness_x: Vec<f64>,
    pub witness_d: Vec<f64>,
    pub pairs_checked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub l: f64,
    pub gamma: f64,
    pub m: f64,
    pub margin_tol: f64,
    pub theta_nodes: usize,
    pub disturbance_nodes: usize,
    pub grid: InequalityGrid,
    /// `(z − x)'f(d, z, k̃(x)) ≤ L|z − x|² + γ|x|²`.
    pub one_sided: InequalityCheck,
    /// `∇V(z)·f(d, z, k̃(x)) ≤ −ρ(V(z))` when `M|z − x| ≤ |z|`.
    pub decrease: InequalityCheck,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.one_sided.pass && self.decrease.pass
    }
}

type Best = (f64, usize, usize, usize);

fn merge(a: Best, b: Best) -> Best {
    if b.0 > a.0 {
        b
    } else {
        a
    }
}

/// Evaluates both emulation inequalities on the grid.
#[allow(clippy::too_many_arguments)]
pub fn check_emulation_inequalities(
    sys: &ControlSystem,
    inner: &InnerFeedback,
    lyap: &LyapunovData,
    theta: &Region,
    l: f64,
    gamma: f64,
    m: f64,
    rho: &ScalarFn,
    grid: &InequalityGrid,
) -> Result<InequalityReport, CertifyError> {
    if grid.theta_grid.dim() != sys.state_dim {
        return Err(CertifyError::InvalidArgument("grid dimension differs from n".into()));
    }
    let n = sys.state_dim;
    let pts: Vec<Vec<f64>> = grid
        .theta_grid
        .points()
        .into_iter()
        .filter(|p| theta.contains(p))
        .collect();
    if pts.is_empty() {
        return Err(CertifyError::EmptyGrid);
    }
    let ds = disturbance_grid(&sys.disturbance_box, grid.d_nodes);
    let controls: Vec<Vec<f64>> = pts.iter().map(|x| inner(x)).collect();

    // One-sided growth bound over all grid pairs.
    let best1 = (0..pts.len())
        .into_par_iter()
        .map(|iz| {
            let z = &pts[iz];
            let mut f = vec![0.0; n];
            let mut best: Best = (f64::NEG_INFINITY, 0, 0, 0);
            for (ix, x) in pts.iter().enumerate() {
                let diff = sub(z, x);
                let rhs = l * dot(&diff, &diff) + gamma * dot(x, x);
                for (id, d) in ds.iter().enumerate() {
                    sys.rhs_into(d, z, &controls[ix], &mut f);
                    let excess = dot(&diff, &f) - rhs;
                    if excess > best.0 {
                        best = (excess, iz, ix, id);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, 0, 0, 0), merge);
    let one_sided = InequalityCheck {
        pass: best1.0 <= MARGIN_TOL,
        worst_excess: best1.0,
        witness_z: pts[best1.1].clone(),
        witness_x: pts[best1.2].clone(),
        witness_d: ds[best1.3].clone(),
        pairs_checked: pts.len() * pts.len(),
    };

    // Decrease under nearby held controls: grid pairs in the cone plus
    // perturbed probes around every z.
    let dirs = grid.unit_directions(n);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = pts
        .par_iter()
        .flat_map_iter(|z| {
            let nz = norm(z);
            let mut xs: Vec<Vec<f64>> = pts
                .iter()
                .filter(|x| m * norm(&sub(z, x)) <= nz)
                .cloned()
                .collect();
            if m > 0.0 && nz > 0.0 {
                for s in &grid.perturbation_scales {
                    for e in &dirs {
                        let x: Vec<f64> =
                            z.iter().zip(e).map(|(zi, ei)| zi + s * nz / m * ei).collect();
                        if theta.contains(&x) && m * norm(&sub(z, &x)) <= nz {
                            xs.push(x);
                        }
                    }
                }
            }
            xs.into_iter().map(move |x| (z.clone(), x))
        })
        .collect();
    let best2 = (0..pairs.len())
        .into_par_iter()
        .map(|ip| {
            let (z, x) = &pairs[ip];
            let u = inner(x);
            let g = lyap.gradient(z);
            let rhs = -rho(lyap.value(z));
            let mut f = vec![0.0; n];
            let mut best: Best = (f64::NEG_INFINITY, ip, ip, 0);
            for (id, d) in ds.iter().enumerate() {
                sys.rhs_into(d, z, &u, &mut f);
                let excess = dot(&g, &f) - rhs;
                if excess > best.0 {
                    best = (excess, ip, ip, id);
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, 0, 0, 0), merge);
    let decrease = InequalityCheck {
        pass: best2.0 <= MARGIN_TOL,
        worst_excess: best2.0,
        witness_z: pairs[best2.1].0.clone(),
        witness_x: pairs[best2.1].1.clone(),
        witness_d: ds[best2.3].clone(),
        pairs_checked: pairs.len(),
    };
    Ok(InequalityReport {
        l,
        gamma,
        m,
        margin_tol: MARGIN_TOL,
        theta_nodes: pts.len(),
        disturbance_nodes: ds.len(),
        grid: grid.clone(),
        one_sided,
        decrease,
    })
}
