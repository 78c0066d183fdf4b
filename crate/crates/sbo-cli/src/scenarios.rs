//! Scenario execution: each sweep produces a header, data rows and the
//! solver statistics recorded in the run metadata.

use spinor_sbo::green::spectral::FixedPointOpts;
use spinor_sbo::misf::{self, Method, ScBoundaryOpts};
use spinor_sbo::mott_spin::{n1, n2, SpinExchangeParams};
use spinor_sbo::{KGrid, SiteBasis};

use crate::config::{RunConfig, Scenario};

pub struct SweepResult {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failed_points: usize,
    pub total_iterations: usize,
}

fn fmt(v: f64) -> String {
    format!("{v:.10e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "nan".into())
}

fn sanitize(text: &str) -> String {
    text.replace([',', '\n'], ";")
}

pub fn run_scenario(config: &RunConfig, method: Method) -> Result<SweepResult, String> {
    match config.scenario {
        Scenario::MisfAfm | Scenario::MisfFm | Scenario::MisfFieldT => run_misf(config, method),
        Scenario::Mott1Diagram => run_mott1(config),
        Scenario::Mott2Diagram => run_mott2(config, method),
        Scenario::QcCurve => run_qc(config, method),
    }
}

fn run_misf(config: &RunConfig, method: Method) -> Result<SweepResult, String> {
    let pb = config.params.as_ref().expect("validated");
    let params = pb.model(0.0);
    let basis = SiteBasis::build(pb.n_max);
    let grid = KGrid::new(pb.dim, config.grid.points_per_axis).map_err(|e| e.to_string())?;
    let mu_values = config.sweep.values();
    let opts = ScBoundaryOpts::for_params(&params);

    let records = misf::sweep_diagram(&basis, &params, &mu_values, method, &grid, &opts);
    let mut rows = Vec::with_capacity(records.len());
    let mut failed = 0;
    let mut iterations = 0;
    for r in &records {
        if r.error.is_some() {
            failed += 1;
        }
        iterations += r.iterations;
        rows.push(vec![
            fmt(r.mu / pb.u0),
            r.lobe_n.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
            fmt_opt(r.t_c.map(|t| t / pb.u0)),
            r.label.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            fmt_opt(r.classifier),
            r.converged.to_string(),
            r.iterations.to_string(),
            r.error.as_deref().map(sanitize).unwrap_or_default(),
        ]);
    }
    Ok(SweepResult {
        header: vec![
            "mu_over_U0",
            "lobe_n",
            "tc_over_U0",
            "phase_label",
            "classifier",
            "converged",
            "iterations",
            "error",
        ],
        rows,
        failed_points: failed,
        total_iterations: iterations,
    })
}

fn run_mott1(config: &RunConfig) -> Result<SweepResult, String> {
    let sb = config.spin.as_ref().expect("validated");
    let xp = SpinExchangeParams::new(sb.j1.unwrap(), sb.j2.unwrap(), sb.z);
    let zj = sb.z * xp.magnitude();
    let lambdas = config.sweep.values();
    let qs = config.sweep2.as_ref().expect("validated").values();
    let regions = n1::phase_diagram_n1(&xp, &lambdas, &qs, 256);

    let mut rows = Vec::new();
    for (l, row) in lambdas.iter().zip(&regions) {
        for (q, region) in qs.iter().zip(row) {
            rows.push(vec![
                fmt(*l),
                fmt(*q),
                fmt(*l / zj),
                fmt(*q / zj),
                region.to_string(),
            ]);
        }
    }
    Ok(SweepResult {
        header: vec!["lambda", "q", "lambda_over_zJ", "q_over_zJ", "region"],
        rows,
        failed_points: 0,
        total_iterations: 0,
    })
}

fn run_mott2(config: &RunConfig, method: Method) -> Result<SweepResult, String> {
    let pb = config.params.as_ref().expect("validated");
    let z = f64::from(2 * pb.dim);
    let grid = KGrid::new(pb.dim, config.grid.points_per_axis).map_err(|e| e.to_string())?;
    let t0 = n2::t0_scale(pb.u0, pb.u2, z);
    let opts = FixedPointOpts::default();

    let mut rows = Vec::new();
    let mut failed = 0;
    for lambda in config.sweep.values() {
        let tc = if lambda.abs() < 1.5 * pb.u2 {
            match method {
                Method::Analytic => n2::tc_singlet_frozen(lambda.abs(), pb.u0, pb.u2, z).ok(),
                Method::SelfConsistent => n2::tc_singlet_self_consistent(
                    lambda.abs(),
                    pb.u0,
                    pb.u2,
                    z,
                    &grid,
                    pb.temperature,
                    &opts,
                )
                .ok(),
            }
        } else {
            None
        };
        let fm_t = n2::fm_boundary_t2(lambda.abs(), pb.u0, pb.u2, z).map(f64::sqrt);
        let region = match n2::region_n2(lambda, 0.5 * t0, pb.u0, pb.u2, z, &grid) {
            Ok(r) => r.to_string(),
            Err(e) => {
                failed += 1;
                sanitize(&e.to_string())
            }
        };
        rows.push(vec![
            fmt(lambda),
            fmt(lambda / pb.u2),
            fmt_opt(tc.map(|t| t / t0)),
            fmt_opt(fm_t.map(|t| t / t0)),
            region,
        ]);
    }
    Ok(SweepResult {
        header: vec![
            "lambda",
            "lambda_over_U2",
            "tc_over_t0",
            "fm_boundary_t_over_t0",
            "region_at_half_t0",
        ],
        rows,
        failed_points: failed,
        total_iterations: 0,
    })
}

fn run_qc(config: &RunConfig, method: Method) -> Result<SweepResult, String> {
    let sb = config.spin.as_ref().expect("validated");
    let j = sb.j.unwrap();
    let grid = KGrid::new((sb.z / 2.0) as u32, config.grid.points_per_axis)
        .map_err(|e| e.to_string())?;
    let opts = FixedPointOpts::default();

    let mut rows = Vec::new();
    let mut failed = 0;
    for theta_over_pi in config.sweep.values() {
        let xp = SpinExchangeParams::from_theta(j, theta_over_pi * std::f64::consts::PI, sb.z);
        let fluctuations = method == Method::SelfConsistent;
        let result = n1::qc_self_consistent(&xp, &grid, 0.0, fluctuations, &opts);
        match result {
            Ok(r) => rows.push(vec![
                fmt(theta_over_pi),
                fmt(r.q_c),
                fmt(r.q_c / (sb.z * j)),
                fmt(r.d0),
                fmt(r.d1),
                r.iterations.to_string(),
                String::new(),
            ]),
            Err(e) => {
                failed += 1;
                rows.push(vec![
                    fmt(theta_over_pi),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "0".into(),
                    sanitize(&e.to_string()),
                ]);
            }
        }
    }
    Ok(SweepResult {
        header: vec!["theta_over_pi", "qc", "qc_over_zJ", "d0", "d1", "iterations", "error"],
        rows,
        failed_points: failed,
        total_iterations: 0,
    })
}
