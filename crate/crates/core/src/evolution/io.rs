use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::evolution::blowup::BlowupEstimate;
use crate::evolution::simulate::{SimulationConfig, SimulationRecord};
use crate::fourier::PeriodicField;

pub const TIMESERIES_HEADER: &str = "t,min_ux,max_ux,sup_u,mass,q_drift,e_drift";

pub fn timeseries_csv(record: &SimulationRecord) -> String {
    let mut out = String::with_capacity(64 * record.len());
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for i in 0..record.len() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            record.times[i],
            record.min_ux[i],
            record.max_ux[i],
            record.sup_abs_u[i],
            record.mass_drift[i],
            record.q_drift[i],
            record.e_drift[i]
        )
        .unwrap();
    }
    out
}

/// Two-column `x,u` snapshot.
pub fn snapshot_csv(field: &PeriodicField) -> String {
    let mut out = String::from("x,u\n");
    for (x, u) in field.grid().abscissae().iter().zip(field.values()) {
        writeln!(out, "{x},{u}").unwrap();
    }
    out
}

/// `{config, terminated, blowup: {B, C, T, residual}}`, with `blowup`
/// null when no estimate is available.
pub fn run_summary(
    config: &SimulationConfig,
    record: &SimulationRecord,
    blowup: Option<&BlowupEstimate>,
) -> Value {
    let blowup = match blowup {
        Some(b) => json!({
            "B": b.b,
            "C": b.c,
            "T": b.t_zero(),
            "residual": b.residual,
            "window": [b.window.0, b.window.1],
        }),
        None => Value::Null,
    };
    let mut summary = json!({
        "config": config.describe(),
        "terminated": record.terminated.as_str(),
        "blowup": blowup,
    });
    if let Some(reason) = &record.failure {
        summary["failure"] = json!(reason);
    }
    summary
}
