//! Report files: `<check>.txt` (line oriented) and `<check>.json`.

use std::path::{Path, PathBuf};

use containment_core::{Measurement, VerificationReport};
use serde_json::json;

use crate::error::CliError;
use crate::trajectory_file::format_sig;

pub fn to_text(r: &VerificationReport) -> String {
    let mut out = format!(
        "check: {}\npassed: {}\ntolerance: {}\nnarrative: {}\n",
        r.name,
        r.passed,
        format_sig(r.tolerance),
        r.narrative
    );
    for m in &r.measured {
        out.push_str(&format!("{} = {}\n", m.label, format_sig(m.value)));
    }
    out
}

pub fn to_json(r: &VerificationReport) -> String {
    let measured: serde_json::Map<String, serde_json::Value> = r
        .measured
        .iter()
        .map(|m| (m.label.clone(), finite_or_null(m.value)))
        .collect();
    let doc = json!({
        "check": r.name,
        "passed": r.passed,
        "tolerance": finite_or_null(r.tolerance),
        "narrative": r.narrative,
        "measured": measured,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

/// Writes both files into `dir` and returns their paths.
pub fn write(r: &VerificationReport, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let txt = dir.join(format!("{}.txt", r.name));
    let js = dir.join(format!("{}.json", r.name));
    std::fs::write(&txt, to_text(r)).map_err(|e| CliError::io(&txt, e))?;
    std::fs::write(&js, to_json(r)).map_err(|e| CliError::io(&js, e))?;
    Ok((txt, js))
}

/// Merges per-item reports into one: passes iff every part passes, with each
/// part's measurements prefixed by its label. Only failing parts keep their
/// narrative.
pub fn combine(name: &str, parts: Vec<(String, VerificationReport)>) -> VerificationReport {
    let passed = parts.iter().all(|(_, r)| r.passed);
    let failed = parts.iter().filter(|(_, r)| !r.passed).count();
    let tolerance = parts.first().map_or(0.0, |(_, r)| r.tolerance);
    let mut measured = vec![
        Measurement {
            label: "items".into(),
            value: parts.len() as f64,
        },
        Measurement {
            label: "failed".into(),
            value: failed as f64,
        },
    ];
    let mut failures = Vec::new();
    for (label, r) in &parts {
        measured.extend(r.measured.iter().map(|m| Measurement {
            label: format!("{label}.{}", m.label),
            value: m.value,
        }));
        if !r.passed {
            failures.push(format!("{label}: {}", r.narrative));
        }
    }
    let narrative = match parts.as_slice() {
        [(_, only)] => only.narrative.clone(),
        _ if failures.is_empty() => format!("{} of {} passed", parts.len(), parts.len()),
        _ => format!(
            "{} of {} passed; {}",
            parts.len() - failed,
            parts.len(),
            failures.join("; ")
        ),
    };
    VerificationReport {
        name: name.to_string(),
        passed,
        measured,
        tolerance,
        narrative,
    }
}
