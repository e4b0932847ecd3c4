//! CSV trajectories: `t,a1_1,...,an_m,d_xi,topology`, one row per sample,
//! values with 9 significant digits and topology ids counted from 1.

use std::fmt::Write as _;
use std::path::Path;

use containment_core::dynamics::{Sample, Trajectory};

use crate::error::CliError;

/// Significant digits written for every real value.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats `x` like C's `%.9g`: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= p as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn header(n: usize, m: usize) -> String {
    let mut h = String::from("t");
    for i in 1..=n {
        for d in 1..=m {
            write!(h, ",a{i}_{d}").expect("writing to a String");
        }
    }
    h.push_str(",d_xi,topology");
    h
}

/// Renders the whole trajectory as CSV text.
pub fn to_csv(traj: &Trajectory) -> String {
    let mut out = header(traj.n, traj.m);
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&format_sig(s.t));
        for v in &s.state {
            out.push(',');
            out.push_str(&format_sig(*v));
        }
        out.push(',');
        out.push_str(&format_sig(s.d_xi));
        write!(out, ",{}", s.topology + 1).expect("writing to a String");
        out.push('\n');
    }
    out
}

pub fn write(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, to_csv(traj)).map_err(|e| CliError::io(path, e))
}

/// Parses CSV text produced by [`to_csv`].
pub fn parse(text: &str, origin: &str) -> Result<Trajectory, CliError> {
    let fail = |line: usize, message: String| CliError::Parse {
        origin: origin.to_string(),
        position: Some((line, 1)),
        message,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| fail(1, e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 2] != "d_xi" || cols[cols.len() - 1] != "topology" {
        return Err(fail(1, "expected header `t,a<i>_<d>...,d_xi,topology`".into()));
    }
    let state_cols = &cols[1..cols.len() - 2];
    let (n, m) =
        agent_layout(state_cols).ok_or_else(|| fail(1, "agent columns are not a full a<i>_<d> grid".into()))?;

    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| fail(line, e.to_string()))?;
        if record.len() != cols.len() {
            return Err(fail(
                line,
                format!("expected {} fields, got {}", cols.len(), record.len()),
            ));
        }
        let num = |i: usize| -> Result<f64, CliError> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| fail(line, format!("`{}` is not a number", &record[i])))
        };
        let t = num(0)?;
        let state = (1..=n * m).map(num).collect::<Result<Vec<_>, _>>()?;
        let d_xi = num(n * m + 1)?;
        let topology: usize = record[n * m + 2]
            .trim()
            .parse()
            .ok()
            .filter(|&p| p >= 1)
            .ok_or_else(|| fail(line, "topology id must be a positive integer".into()))?;
        samples.push(Sample {
            t,
            state,
            topology: topology - 1,
            d_xi,
        });
    }
    if samples.is_empty() {
        return Err(fail(2, "trajectory has no samples".into()));
    }
    if samples.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(fail(2, "samples are not in increasing time order".into()));
    }
    Ok(Trajectory { n, m, samples })
}

pub fn read(path: &Path) -> Result<Trajectory, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if text.trim().is_empty() {
        return Err(CliError::Parse {
            origin: path.display().to_string(),
            position: None,
            message: "trajectory file is empty".into(),
        });
    }
    parse(&text, &path.display().to_string())
}

/// Recovers `(n, m)` from columns `a1_1, a1_2, ..., an_m` in row-major order.
fn agent_layout(cols: &[&str]) -> Option<(usize, usize)> {
    let parsed: Vec<(usize, usize)> = cols
        .iter()
        .map(|c| {
            let (i, d) = c.strip_prefix('a')?.split_once('_')?;
            Some((i.parse().ok()?, d.parse().ok()?))
        })
        .collect::<Option<_>>()?;
    let m = parsed.iter().map(|p| p.1).max()?;
    let n = parsed.len() / m;
    if n * m != parsed.len() {
        return None;
    }
    let expected = (1..=n).flat_map(|i| (1..=m).map(move |d| (i, d)));
    parsed.iter().copied().eq(expected).then_some((n, m))
}
