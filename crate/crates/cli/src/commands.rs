use std::io::Write;

use chainstab::certify::{
    certify_decrease, check_emulation_inequalities, check_property_q, BallGrid, DecreaseReport, GridSpec,
    InequalityGrid, InequalityReport, PropertyQReport, QRequest, ScalarFn,
};
use chainstab::hybrid::{simulate_closed_loop, Termination, Trajectory};
use chainstab::scenarios::{linear_channel_example, band_example, jet_engine_constants, JetEngineConstants};
use chainstab::stability::{run_stability_suite, StabilityReport, SuiteRequest};
use chainstab::BoxSet;
use serde::Serialize;

use crate::config::{build, Built, QExample, ScenarioConfig};
use crate::Failure;

/// Header row of the trajectory CSV.
pub fn csv_header(n: usize, m: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x_{i}")));
    cols.extend((1..=m).map(|i| format!("u_{i}")));
    cols.push("is_sampling_instant".into());
    cols.push("cell_index".into());
    cols.join(",")
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv(traj: &Trajectory, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header(traj.state_dim, traj.control_dim))?;
    let mut line = String::new();
    for p in traj.dense_points() {
        line.clear();
        line.push_str(&fmt_num(p.t));
        for &v in p.x.iter().chain(p.u) {
            line.push(',');
            line.push_str(&fmt_num(v));
        }
        line.push_str(if p.is_sampling_instant { ",1," } else { ",0," });
        line.push_str(&p.cell.to_string());
        writeln!(out, "{line}")?;
    }
    if let Termination::FiniteEscape { time, .. } = traj.termination {
        writeln!(out, "# terminated: finite_escape t={time}")?;
    }
    Ok(())
}

fn write_output(out: Option<&std::path::Path>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(io)?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w).map_err(io)?;
            w.flush().map_err(io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w).map_err(io)
        }
    }
}

fn write_json<T: Serialize>(out: Option<&std::path::Path>, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    write_output(out, |w| writeln!(w, "{text}"))
}

pub fn simulate(cfg: &ScenarioConfig, out: Option<&std::path::Path>) -> Result<(), Failure> {
    let b = build(cfg)?;
    let traj = run(cfg, &b)?;
    write_output(out, |w| write_csv(&traj, w))?;
    match traj.termination {
        Termination::FiniteEscape { time, .. } => Err(Failure::Escape(time)),
        Termination::StepLimit { time, .. } => Err(Failure::Runtime(format!(
            "integrator step limit reached at t = {time}"
        ))),
        Termination::ReachedEnd => Ok(()),
    }
}

fn run(cfg: &ScenarioConfig, b: &Built) -> Result<Trajectory, Failure> {
    simulate_closed_loop(
        &b.system,
        &b.feedback,
        &b.x0,
        &b.disturbance,
        &cfg.schedule,
        cfg.t_end,
        &cfg.integrator,
    )
    .map_err(|e| Failure::Config(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct FigureSummary {
    pub figure: usize,
    pub certified_period: f64,
    pub certified_bound: f64,
    pub simulated_period: f64,
    pub theta_entry: Option<f64>,
    pub final_state: Vec<f64>,
}

pub fn reproduce_figure(
    cfg: &ScenarioConfig,
    index: usize,
    out: Option<&std::path::Path>,
) -> Result<FigureSummary, Failure> {
    let b = build(cfg)?;
    let traj = run(cfg, &b)?;
    write_output(out, |w| write_csv(&traj, w))?;
    let sc = b.jet.as_ref().expect("figures use the jet engine");
    let summary = FigureSummary {
        figure: index,
        certified_period: sc.sampling.h_tilde,
        certified_bound: sc.sampling.bound,
        simulated_period: b.feedback.period(),
        theta_entry: traj
            .cells
            .iter()
            .position(|&c| c == 1)
            .map(|i| traj.instants()[i]),
        final_state: traj.final_state().to_vec(),
    };
    if let Termination::FiniteEscape { time, .. } = traj.termination {
        return Err(Failure::Escape(time));
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SamplingReport {
    pub constants: JetEngineConstants,
    pub bound: f64,
    pub certified_period: f64,
    pub simulated_period: f64,
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub system: String,
    pub seed: u64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_bound: Option<SamplingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decrease: Option<DecreaseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property_q: Option<PropertyQReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<InequalityReport>,
}

pub fn certify(cfg: &ScenarioConfig, out: Option<&std::path::Path>) -> Result<(), Failure> {
    let spec = cfg
        .certify
        .clone()
        .ok_or_else(|| Failure::Config("certify: section missing".into()))?;
    let b = build(cfg)?;
    let need_jet = |what: &str| {
        b.jet
            .as_ref()
            .ok_or_else(|| Failure::Config(format!("certify.{what}: needs the jet engine system")))
    };
    let cert_err = |e: chainstab::certify::CertifyError| Failure::Config(e.to_string());
    let mut report = CertifyReport {
        system: cfg.label().into(),
        seed: cfg.seed,
        pass: true,
        sampling_bound: None,
        decrease: None,
        property_q: None,
        inequalities: None,
    };
    if spec.sampling_bound {
        let sc = need_jet("sampling_bound")?;
        report.sampling_bound = Some(SamplingReport {
            constants: jet_engine_constants(sc.epsilon),
            bound: sc.sampling.bound,
            certified_period: sc.sampling.h_tilde,
            simulated_period: b.feedback.period(),
        });
    }
    if let Some(d) = &spec.decrease {
        let sc = need_jet("decrease")?;
        let ex = band_example();
        let grid = GridSpec::on_box(
            &BoxSet::new(vec![-d.x1_max, -1.0], vec![d.x1_max, 1.0]),
            &[d.x1_nodes, d.x2_nodes],
        );
        let rep = certify_decrease(
            &sc.system,
            &ex.omega,
            &ex.lyapunov,
            &ex.control,
            d.r_level,
            d.delta,
            &grid,
            d.d_nodes,
        )
        .map_err(cert_err)?;
        report.pass &= rep.pass;
        report.decrease = Some(rep);
    }
    if let Some(q) = &spec.property_q {
        let sc = need_jet("property_q")?;
        let ball = BallGrid::uniform(2, q.ball_radius, q.ball_count, q.ball_nodes);
        let (omega, target, cert) = match q.example {
            QExample::Band => {
                let ex = band_example();
                let cert = ex.certificate(&ball).map_err(cert_err)?;
                (ex.omega, ex.target, cert)
            }
            QExample::Cell3 | QExample::Cell4 => {
                let cell = if q.example == QExample::Cell3 { 3 } else { 4 };
                let ex = linear_channel_example(cell).map_err(|e| Failure::Config(e.to_string()))?;
                (ex.source, ex.target, ex.certificate)
            }
        };
        let req = QRequest {
            trials: q.trials,
            seed: cfg.seed,
            sampling_box: BoxSet::symmetric(2, q.box_half_width),
            sampling_radius: q.radius,
            mesh: q.mesh,
        };
        let rep = check_property_q(&sc.system, &omega, &target, &cert, &req, &cfg.integrator)
            .map_err(cert_err)?;
        report.pass &= rep.pass();
        report.property_q = Some(rep);
    }
    if let Some(spec) = &spec.inequalities {
        let sc = need_jet("inequalities")?;
        let rho: ScalarFn = std::sync::Arc::new(|s| s);
        let rep = check_emulation_inequalities(
            &sc.system,
            &sc.inner_feedback(),
            &sc.lyapunov(),
            sc.theta(),
            sc.l_const * spec.l_scale,
            sc.gamma,
            sc.m_const,
            &rho,
            &InequalityGrid::new(sc.theta_grid(spec.nodes), spec.d_nodes),
        )
        .map_err(cert_err)?;
        report.pass &= rep.pass();
        report.inequalities = Some(rep);
    }
    write_json(out, &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check("at least one certification check failed".into()))
    }
}

/// `|x(t)| ≤ e^{−t}|x₀| + tol` from starts in `(0, 2)` with `d̃ ≡ 0`.
#[derive(Debug, Serialize)]
pub struct ContractionCheck {
    pub starts: Vec<f64>,
    pub tolerance: f64,
    /// Largest `|x(t)| − e^{−t}|x₀|` over all recorded points.
    pub worst_excess: f64,
    pub witness_x0: f64,
    pub witness_t: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SuiteDocument {
    pub pass: bool,
    pub report: StabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionCheck>,
}

fn scalar_contraction(cfg: &ScenarioConfig, b: &Built) -> Result<ContractionCheck, Failure> {
    let starts: Vec<f64> = (0..20).map(|k| (k as f64 + 0.5) / 10.0).collect();
    let tolerance = 1e-9;
    let mut check = ContractionCheck {
        starts: starts.clone(),
        tolerance,
        worst_excess: f64::NEG_INFINITY,
        witness_x0: starts[0],
        witness_t: 0.0,
        pass: true,
    };
    for &x0 in &starts {
        let traj = simulate_closed_loop(
            &b.system,
            &b.feedback,
            &[x0],
            &b.disturbance,
            &chainstab::SchedulePerturbation::Zero,
            cfg.t_end,
            &cfg.integrator,
        )
        .map_err(|e| Failure::Config(e.to_string()))?;
        for p in traj.dense_points() {
            let excess = p.x[0].abs() - (-p.t).exp() * x0;
            if excess > check.worst_excess {
                check.worst_excess = excess;
                check.witness_x0 = x0;
                check.witness_t = p.t;
            }
        }
    }
    check.pass = check.worst_excess <= tolerance;
    Ok(check)
}

pub fn suite(cfg: &ScenarioConfig, out: Option<&std::path::Path>) -> Result<(), Failure> {
    let spec = cfg.suite.clone().unwrap_or_default();
    let b = build(cfg)?;
    let req = SuiteRequest {
        radii: spec.radii,
        eps_levels: spec.eps_levels,
        delta_levels: spec.delta_levels,
        trials: spec.trials,
        t_end: cfg.t_end,
        seed: cfg.seed,
        disturbance_mesh: spec.disturbance_mesh,
        schedule: spec.schedule,
        envelope_tol: spec.envelope_tol,
    };
    let certs = match (&b.jet, spec.descent) {
        (Some(sc), true) => Some(
            sc.descent_certificates(&BallGrid::uniform(2, 30.0, 61, 41))
                .map_err(|e| Failure::Config(e.to_string()))?,
        ),
        (None, true) => {
            return Err(Failure::Config("suite.descent: needs the jet engine system".into()))
        }
        _ => None,
    };
    let report = run_stability_suite(&b.system, &b.feedback, &req, certs.as_ref(), &cfg.integrator)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let contraction = match b.jet {
        None => Some(scalar_contraction(cfg, &b)?),
        Some(_) => None,
    };
    let doc = SuiteDocument {
        pass: report.pass() && contraction.as_ref().is_none_or(|c| c.pass),
        report,
        contraction,
    };
    write_json(out, &doc)?;
    if let Some(w) = &doc.report.escape {
        return Err(Failure::Escape(w.value));
    }
    if !doc.pass {
        return Err(Failure::Check("stability ingredient failed".into()));
    }
    Ok(())
}

pub fn list_scenarios() -> String {
    let mut s = String::new();
    s.push_str("jet_engine_perturbed\tx1' = d1 x1 + 1.5 d2 x1^2 - 0.5 x1^3 + x2, x2' = u, d in [-1,1]^2; four-cell chain\n");
    s.push_str("scalar_positive_drift\tx' = a(x) + u, u <= 0, a polynomial (default x^2); unbounded chain (j-1, j]\n");
    s
}
