//! Per-run CSV traces with a fixed schema and shortest round-trip floats.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CSV_HEADER: &str = "seed,t,alpha,loss,grad_norm_sq,mean_gain,est_mse,regret";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seed: u64,
    pub t: u64,
    pub alpha: Option<f64>,
    pub loss: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    pub mean_gain: Option<f64>,
    pub est_mse: Option<f64>,
    pub regret: Option<f64>,
}

fn push_float(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        let mut buf = ryu::Buffer::new();
        out.push_str(buf.format(v));
    }
}

/// Renders records as CSV; `t` must strictly increase.
pub fn render_csv(records: &[TraceRecord]) -> Result<String> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut prev = None;
    for r in records {
        if let Some(p) = prev {
            if r.t <= p {
                return Err(sgdf_core::Error::OutOfOrderStep { t: r.t, previous: p }.into());
            }
        }
        prev = Some(r.t);
        write!(out, "{},{}", r.seed, r.t).unwrap();
        for v in [r.alpha, r.loss, r.grad_norm_sq, r.mean_gain, r.est_mse, r.regret] {
            push_float(&mut out, v);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let text = render_csv(records)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn parse_field(field: &str) -> std::result::Result<Option<f64>, String> {
    if field.is_empty() {
        Ok(None)
    } else {
        field.parse::<f64>().map(Some).map_err(|e| format!("{field:?}: {e}"))
    }
}

/// Parses a trace written by [`render_csv`].
pub fn parse_csv(text: &str) -> std::result::Result<Vec<TraceRecord>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err("unexpected CSV header".into());
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(format!("expected 8 fields in {line:?}"));
            }
            Ok(TraceRecord {
                seed: f[0].parse().map_err(|e| format!("seed: {e}"))?,
                t: f[1].parse().map_err(|e| format!("t: {e}"))?,
                alpha: parse_field(f[2])?,
                loss: parse_field(f[3])?,
                grad_norm_sq: parse_field(f[4])?,
                mean_gain: parse_field(f[5])?,
                est_mse: parse_field(f[6])?,
                regret: parse_field(f[7])?,
            })
        })
        .collect()
}
