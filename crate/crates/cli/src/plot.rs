//! Emits a standalone matplotlib script that plots the traces of a summary.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::runner::ExperimentSummary;

pub const PLOT_FILE: &str = "plot.py";

const TEMPLATE: &str = r#"import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
NAME = __NAME__
COLUMN = __COLUMN__
RUNS = [
__RUNS__]


def load(path):
    ts, ys = [], []
    with open(os.path.join(HERE, path)) as f:
        for row in csv.DictReader(f):
            if row[COLUMN]:
                ts.append(int(row["t"]))
                ys.append(float(row[COLUMN]))
    return ts, ys


fig, ax = plt.subplots(figsize=(7, 4.5))
for label, path in RUNS:
    ts, ys = load(path)
    ax.plot(ts, ys, label=label, linewidth=0.8)
ax.set_xscale("log")
ax.set_yscale("symlog", linthresh=1e-8)
ax.set_xlabel("t")
ax.set_ylabel(COLUMN)
ax.set_title(NAME)
if RUNS:
    ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(os.path.join(HERE, NAME + ".png"), dpi=150)
"#;

/// Python string literal; JSON string syntax is valid Python.
fn py_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

/// Writes `plot.py` next to `summary_path`. Returns the script path and any warnings.
pub fn emit_plot_script(summary_path: &Path) -> Result<(PathBuf, Vec<String>)> {
    let text = std::fs::read_to_string(summary_path).map_err(|e| CliError::io(summary_path, e))?;
    let summary: ExperimentSummary =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", summary_path.display())))?;
    let dir = summary_path.parent().unwrap_or(Path::new("."));
    let mut warnings = Vec::new();
    let mut runs = String::new();
    for run in &summary.runs {
        let csv = dir.join(&run.csv);
        if !csv.is_file() {
            return Err(CliError::MissingTrace(csv));
        }
        let label = match run.alpha {
            Some(a) => format!("{} α={a} seed {}", run.optimizer, run.seed),
            None => format!("{} seed {}", run.optimizer, run.seed),
        };
        runs.push_str(&format!("    ({}, {}),\n", py_str(&label), py_str(&run.csv)));
    }
    if summary.runs.is_empty() {
        warnings.push(format!("{} lists no runs; the plot will be empty", summary_path.display()));
    }
    let column = match summary.experiment.as_str() {
        "regret" => "regret",
        "nonconvex_rate" => "grad_norm_sq",
        "estimator_variance" => "est_mse",
        _ => "loss",
    };
    let script = TEMPLATE
        .replace("__NAME__", &py_str(&summary.name))
        .replace("__COLUMN__", &py_str(column))
        .replace("__RUNS__", &runs);
    let path = dir.join(PLOT_FILE);
    std::fs::write(&path, script).map_err(|e| CliError::io(&path, e))?;
    Ok((path, warnings))
}
