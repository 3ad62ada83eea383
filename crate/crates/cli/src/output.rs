use std::fs;
use std::path::Path;

use serde::Serialize;
use spectral_rg::kernels::KernelSequence;
use spectral_rg::rg::FlowTrace;

use crate::commands::CliError;

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

pub fn write_kernels(dir: &Path, name: &str, seq: &KernelSequence) -> Result<(), CliError> {
    write_json(&dir.join("kernels"), &format!("{name}.json"), &seq.snapshot())
}

const TRACE_HEADER: [&str; 9] = [
    "step",
    "alpha",
    "beta",
    "gamma",
    "w00_at_0_re",
    "w00_at_0_im",
    "interaction_norm",
    "discarded_norm",
    "ratio",
];

pub fn write_trace(dir: &Path, trace: &FlowTrace) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("flow.csv")).map_err(|e| CliError::Failed(e.to_string()))?;
    if trace.rows.is_empty() {
        w.write_record(TRACE_HEADER).map_err(|e| CliError::Failed(e.to_string()))?;
    }
    for row in &trace.rows {
        w.serialize(row).map_err(|e| CliError::Failed(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
