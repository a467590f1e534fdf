//! Result persistence: JSON for structured outputs, CSV for the iteration
//! trace and the standardized scores.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::result::{FitResult, TraceRecord};

/// Write any serializable report as pretty JSON.
pub fn write_json<T: serde::Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn load_fit_result(path: impl AsRef<Path>) -> Result<FitResult> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn opt_to_field<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

/// One row per engine iteration: `iter,phase,rho,L,accepted,g_norm`.
pub fn write_trace_csv(trace: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("iter,phase,rho,L,accepted,g_norm\n");
    for rec in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rec.iter,
            rec.phase,
            opt_to_field(&rec.rho),
            opt_to_field(&rec.fit_size),
            opt_to_field(&rec.accepted),
            opt_to_field(&rec.g_norm_sq),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One row per summary statistic: `stat_index,score`.
pub fn write_scores_csv(scores: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("stat_index,score\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{i},{s}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}
