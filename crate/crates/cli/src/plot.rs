//! Gnuplot-ready plot data.
//!
//! Blocks are separated by two blank lines so each one is addressable with
//! `index`. Order: one time series per agent (`t x_1 .. x_m`), then for planar
//! runs one overhead path per agent (`x y`), then the leader markers
//! (`id x_1 .. x_m`), then for planar runs the closed hull polygon.

use std::fmt::Write as _;
use std::path::Path;

use containment_core::dynamics::Trajectory;
use containment_core::LeaderSet;

use crate::error::CliError;
use crate::trajectory_file::format_sig;

/// What a plot file contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotSummary {
    pub time_series: usize,
    pub paths: usize,
    pub leader_markers: usize,
    pub hull_vertices: usize,
}

pub fn render(traj: &Trajectory, leaders: Option<&LeaderSet>) -> (String, PlotSummary) {
    let (n, m) = (traj.n, traj.m);
    let mut out = String::new();
    let mut index = 0usize;
    let mut summary = PlotSummary {
        time_series: n,
        paths: 0,
        leader_markers: 0,
        hull_vertices: 0,
    };
    writeln!(
        out,
        "# containment plot data: {n} agents in R^{m}, {} samples",
        traj.len()
    )
    .unwrap();

    for i in 0..n {
        separator(&mut out, index);
        writeln!(out, "# index {index}: agent {} time series (t x_1..x_{m})", i + 1).unwrap();
        for (s, sample) in traj.samples.iter().enumerate() {
            out.push_str(&format_sig(sample.t));
            for v in traj.agent(s, i) {
                out.push(' ');
                out.push_str(&format_sig(*v));
            }
            out.push('\n');
        }
        index += 1;
    }

    if m == 2 {
        for i in 0..n {
            separator(&mut out, index);
            writeln!(out, "# index {index}: agent {} path (x y)", i + 1).unwrap();
            for s in 0..traj.len() {
                let p = traj.agent(s, i);
                writeln!(out, "{} {}", format_sig(p[0]), format_sig(p[1])).unwrap();
            }
            index += 1;
        }
        summary.paths = n;
    }

    if let Some(leaders) = leaders {
        separator(&mut out, index);
        writeln!(out, "# index {index}: leaders (id x_1..x_{m})").unwrap();
        for (q, p) in leaders.positions().enumerate() {
            let coords: Vec<String> = p.iter().map(|v| format_sig(*v)).collect();
            writeln!(out, "{} {}", q + 1, coords.join(" ")).unwrap();
        }
        summary.leader_markers = leaders.k();
        index += 1;

        if m == 2 {
            let hull = convex_hull(leaders.positions().map(|p| [p[0], p[1]]).collect());
            separator(&mut out, index);
            writeln!(
                out,
                "# index {index}: leader hull, counter-clockwise, first vertex repeated (x y)"
            )
            .unwrap();
            for p in hull.iter().chain(hull.first()) {
                writeln!(out, "{} {}", format_sig(p[0]), format_sig(p[1])).unwrap();
            }
            summary.hull_vertices = hull.len();
        }
    }
    (out, summary)
}

fn separator(out: &mut String, index: usize) {
    if index > 0 {
        out.push_str("\n\n");
    }
}

pub fn write(traj: &Trajectory, leaders: Option<&LeaderSet>, path: &Path) -> Result<PlotSummary, CliError> {
    let (text, summary) = render(traj, leaders);
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    Ok(summary)
}

/// Hull vertices counter-clockwise, collinear points dropped (monotone chain).
pub fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
