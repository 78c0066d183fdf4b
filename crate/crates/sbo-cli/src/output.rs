//! Result tables, run metadata and plot scripts. Everything written here
//! is deterministic: fixed float formatting, fixed row order, no
//! timestamps.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{RunConfig, Scenario};
use crate::scenarios::SweepResult;

pub fn write_results(path: &Path, result: &SweepResult) -> std::io::Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{}", result.header.join(","))?;
    for row in &result.rows {
        writeln!(out, "{}", row.join(","))?;
    }
    fs::write(path, out)
}

#[derive(Serialize)]
struct RunSection<'a> {
    version: &'a str,
    method: String,
    workers: usize,
    seed: Option<u64>,
    failed_points: usize,
    total_iterations: usize,
    fixed_point_damping: f64,
    fixed_point_tol: f64,
    fixed_point_max_iter: usize,
    boundary_t_tol_rel: f64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    config: &'a RunConfig,
    run: RunSection<'a>,
}

#[allow(clippy::too_many_arguments)]
pub fn write_metadata(
    path: &Path,
    config: &RunConfig,
    method: &str,
    workers: usize,
    seed: Option<u64>,
    result: &SweepResult,
) -> std::io::Result<()> {
    let meta = Metadata {
        config,
        run: RunSection {
            version: env!("CARGO_PKG_VERSION"),
            method: method.to_string(),
            workers,
            seed,
            failed_points: result.failed_points,
            total_iterations: result.total_iterations,
            fixed_point_damping: 0.5,
            fixed_point_tol: 1e-8,
            fixed_point_max_iter: 10_000,
            boundary_t_tol_rel: 1e-6,
        },
    };
    let text = toml::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(path, text)
}

/// Plain-text plotting script for one scenario, referencing the results
/// file by relative path. Axes follow the usual normalized units.
pub fn plot_script(scenario: Scenario, results_file: &str) -> Result<String, String> {
    let (x, y, title, extra) = match scenario {
        Scenario::MisfAfm | Scenario::MisfFm | Scenario::MisfFieldT => (
            "mu_over_U0",
            "tc_over_U0",
            "Mott-insulator / superfluid boundary",
            "plt.ylabel('z t / U0')\nys = ys * Z_COORDINATION\n",
        ),
        Scenario::Mott1Diagram => (
            "lambda_over_zJ",
            "q_over_zJ",
            "n = 1 Mott-lobe magnetic phase diagram",
            "",
        ),
        Scenario::Mott2Diagram => (
            "lambda_over_U2",
            "tc_over_t0",
            "n = 2 Mott-lobe magnetic phase diagram",
            "",
        ),
        Scenario::QcCurve => ("theta_over_pi", "qc", "critical quadratic Zeeman strength", ""),
    };
    let mut script = String::new();
    script.push_str("#!/usr/bin/env python3\n");
    script.push_str("import csv\n\nimport matplotlib.pyplot as plt\n\n");
    script.push_str("Z_COORDINATION = 4  # 2 * dim; adjust for non-2D runs\n\n");
    script.push_str(&format!("rows = list(csv.DictReader(open('{results_file}')))\n"));
    if scenario == Scenario::Mott1Diagram {
        script.push_str(
            "colors = {'nematic': 'tab:blue', 'partially-magnetic': 'tab:orange',\n          'xy-ferromagnetic': 'tab:red', 'ferromagnetic': 'tab:green'}\n",
        );
        script.push_str(&format!(
            "for region in colors:\n    xs = [float(r['{x}']) for r in rows if r['region'] == region]\n    ys = [float(r['{y}']) for r in rows if r['region'] == region]\n    plt.scatter(xs, ys, s=6, color=colors[region], label=region)\nplt.legend()\n"
        ));
    } else {
        script.push_str(&format!(
            "pairs = [(float(r['{x}']), float(r['{y}'])) for r in rows\n         if r['{y}'] != 'nan']\nxs = [p[0] for p in pairs]\nys = [p[1] for p in pairs]\nplt.plot(xs, ys, '-')\n"
        ));
        if !extra.is_empty() {
            // The misf figures conventionally plot z t / U0.
            script.push_str("ys = [Z_COORDINATION * y for y in ys]\nplt.clf()\nplt.plot(xs, ys, '-')\n");
        }
    }
    script.push_str(&format!("plt.xlabel('{x}')\nplt.ylabel('{y}')\nplt.title('{title}')\n"));
    script.push_str("plt.tight_layout()\nplt.savefig('plot.png', dpi=160)\n");
    Ok(script)
}
