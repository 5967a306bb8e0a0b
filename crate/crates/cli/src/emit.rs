//! Report serialization: JSON per the documented schema, CSV flattening
//! for partial-sum traces.

use markerlab::cobound::PartialSumReport;
use markerlab::verify::VerificationReport;
use std::io::Write;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub fn report_json(report: &VerificationReport) -> Result<String, EmitError> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn write_report(report: &VerificationReport, path: &Path) -> Result<(), EmitError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(report_json(report)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// CSV rows: one per resolved step of the trace.
pub fn trace_csv(ps: &PartialSumReport) -> String {
    let mut out = String::from("n,running_sum_p,running_sum_q,levels\n");
    if let Some(trace) = &ps.trace {
        for e in trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.step, e.numer, e.denom, e.levels
            ));
        }
    }
    out
}

pub fn write_trace_csv(ps: &PartialSumReport, path: &Path) -> Result<(), EmitError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(trace_csv(ps).as_bytes())?;
    Ok(())
}
