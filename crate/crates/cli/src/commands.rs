//! Subcommand bodies. Each returns the process exit status on success
//! (0 verified, 1 verification failed) and a [`CliError`] otherwise.

use std::io::Write;
use std::path::{Path, PathBuf};

use containment_core::analysis::{self, AnalysisError};
use containment_core::dynamics::{equilibrium, simulate, Trajectory};
use containment_core::{LeaderSet, Scenario, Topology, VerificationReport};

use crate::builtin::{self, Builtin};
use crate::campaign::{self, CHECKS};
use crate::error::CliError;
use crate::scenario_file::{scenario_error, ScenarioFile};
use crate::trajectory_file::{self, format_sig};
use crate::{plot, report};

/// Distance to the hull tolerated when a claim says "inside".
pub const HULL_TOL: f64 = 1e-3;
/// Minimum decrease of the mean distance to leader 1 for `more-links`.
pub const PULL_MARGIN: f64 = 1e-3;
pub const COLLINEARITY_TOL: f64 = 1e-3;

/// Writes one line of console output. A closed pipe is not an error: the
/// files the command produced are already on disk.
fn say(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

fn overrides(s: &Scenario, dt: Option<f64>, t_final: Option<f64>) -> Result<Scenario, CliError> {
    if dt.is_none() && t_final.is_none() {
        return Ok(s.clone());
    }
    s.with_horizon(dt, t_final).map_err(|e| scenario_error(&e))
}

fn analysis_error(e: AnalysisError) -> CliError {
    CliError::InvalidScenario {
        key: "scenario".into(),
        message: e.to_string(),
    }
}

/// Largest Euclidean distance from an agent to the leader hull.
pub fn max_hull_distance(x: &[f64], leaders: &LeaderSet) -> f64 {
    x.chunks_exact(leaders.m())
        .map(|xi| (2.0 * leaders.project(xi).expect("dimensions agree").sq_dist).sqrt())
        .fold(0.0, f64::max)
}

fn print_final(out: &mut dyn Write, traj: &Trajectory) -> Result<(), CliError> {
    let last = traj.last();
    say(out, &format!("t_final = {}", format_sig(last.t)))?;
    say(out, &format!("final d_xi = {}", format_sig(last.d_xi)))?;
    for i in 0..traj.n {
        let coords: Vec<String> = traj.agent(traj.len() - 1, i).iter().map(|v| format_sig(*v)).collect();
        say(out, &format!("agent {}: {}", i + 1, coords.join(" ")))?;
    }
    Ok(())
}

pub fn cmd_simulate(
    scenario: &Path,
    output: &Path,
    dt: Option<f64>,
    t_final: Option<f64>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let s = overrides(&ScenarioFile::read(scenario)?.to_scenario()?, dt, t_final)?;
    let traj = simulate(&s);
    trajectory_file::write(&traj, output)?;
    print_final(out, &traj)?;
    Ok(0)
}

/// Measurements backing the claim of one example variant.
#[derive(Debug, Clone)]
pub struct ClaimOutcome {
    pub reproduced: bool,
    pub lines: Vec<String>,
    pub trajectory: Trajectory,
}

pub fn evaluate_claim(b: &Builtin) -> Result<ClaimOutcome, CliError> {
    let s = &b.scenario;
    let leaders = s.leaders();
    let traj = simulate(s);
    let x = traj.last().state.clone();
    let hull_dist = max_hull_distance(&x, leaders);
    let mut lines = vec![format!("max distance to leader hull = {}", format_sig(hull_dist))];
    let inside = hull_dist <= HULL_TOL;

    let reproduced = match (b.example, b.variant) {
        (2, _) => {
            let tail: Vec<[f64; 2]> = (1..s.n()).map(|i| [x[2 * i], x[2 * i + 1]]).collect();
            let residual = analysis::collinearity_residual(&tail);
            lines.push(format!(
                "collinearity residual of agents 2-5 = {}",
                format_sig(residual)
            ));
            inside && residual <= COLLINEARITY_TOL
        }
        (_, "leaderless-45") => {
            let r = analysis::check_theorem1(s).map_err(analysis_error)?;
            lines.push(r.narrative.clone());
            r.passed && !inside
        }
        (_, "more-links") => {
            let base = builtin::builtin(1, "base")?;
            let base_x = base.scenario.run().final_state();
            let before = analysis::mean_distance_to_leader(&base_x, leaders, 0);
            let after = analysis::mean_distance_to_leader(&x, leaders, 0);
            lines.push(format!("mean distance to leader 1: base = {}", format_sig(before)));
            lines.push(format!("mean distance to leader 1: more-links = {}", format_sig(after)));
            lines.push(format!("decrease = {}", format_sig(before - after)));
            inside && before - after >= PULL_MARGIN
        }
        (_, "isolated-2") => {
            let eq = equilibrium(&s.topologies()[0], leaders).map_err(|e| analysis_error(e.into()))?;
            let gap = (x[1] - eq.x_star[1]).abs();
            let to_leader = (x[1] - leaders.position(0)[0]).abs();
            lines.push(format!("agent 2 limit point = {}", format_sig(eq.x_star[1])));
            lines.push(format!("agent 2 distance to its limit = {}", format_sig(gap)));
            lines.push(format!("agent 2 distance to leader 1 = {}", format_sig(to_leader)));
            inside && gap <= HULL_TOL
        }
        (_, "switched") => {
            let r = analysis::check_theorem2(s).map_err(analysis_error)?;
            lines.push(r.narrative.clone());
            inside && r.passed
        }
        _ => {
            let mean = analysis::mean_distance_to_leader(&x, leaders, 0);
            lines.push(format!("mean distance to leader 1 = {}", format_sig(mean)));
            inside
        }
    };
    Ok(ClaimOutcome {
        reproduced,
        lines,
        trajectory: traj,
    })
}

pub fn cmd_paper(example: u8, variant: &str, dir: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let b = builtin::builtin(example, variant)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let stem = b.file_stem();
    let outcome = evaluate_claim(&b)?;

    b.to_file().write(&dir.join(format!("{stem}.toml")))?;
    trajectory_file::write(&outcome.trajectory, &dir.join(format!("{stem}.csv")))?;
    plot::write(
        &outcome.trajectory,
        Some(b.scenario.leaders()),
        &dir.join(format!("{stem}.dat")),
    )?;

    say(out, &format!("example {example}, variant {}", b.variant))?;
    say(out, &format!("claim: {}", b.claim))?;
    print_final(out, &outcome.trajectory)?;
    for line in &outcome.lines {
        say(out, line)?;
    }
    say(
        out,
        if outcome.reproduced {
            "claim reproduced"
        } else {
            "claim NOT reproduced"
        },
    )?;
    Ok(if outcome.reproduced { 0 } else { 1 })
}

/// Where `verify` takes its input from.
#[derive(Debug, Clone)]
pub enum VerifySource {
    Scenario(PathBuf),
    Random { trials: usize, seed: u64 },
    Builtin { example: u8, variant: String },
}

fn per_topology(
    name: &str,
    topologies: &[Topology],
    check: impl Fn(&Topology) -> Result<VerificationReport, AnalysisError>,
) -> Result<VerificationReport, CliError> {
    let parts = topologies
        .iter()
        .enumerate()
        .map(|(p, t)| check(t).map(|r| (format!("topology_{}", p + 1), r)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(analysis_error)?;
    Ok(report::combine(name, parts))
}

/// Compares `base` with `augmented`, which must add links to a single leader.
fn leader_pull(base: &Topology, augmented: &Topology, leaders: &LeaderSet) -> Result<VerificationReport, CliError> {
    let mut added = augmented
        .leaders()
        .triples()
        .filter(|&(i, q, _)| base.leaders().weight(i, q).is_none());
    let Some((_, q, _)) = added.next() else {
        return Err(CliError::InvalidScenario {
            key: "topologies[1].leader_links".into(),
            message: "adds no leader links to topology 1".into(),
        });
    };
    if let Some((_, other, _)) = added.find(|&(_, l, _)| l != q) {
        return Err(analysis_error(AnalysisError::MixedLeaders {
            expected: q,
            got: other,
        }));
    }
    analysis::leader_pull_between(base, augmented, leaders, q).map_err(analysis_error)
}

fn verify_scenario(check: &str, s: &Scenario, pull_base: Option<&Topology>) -> Result<VerificationReport, CliError> {
    let ts = s.topologies();
    match check {
        "lemma1" => per_topology(check, ts, |t| Ok(analysis::check_lemma1(t.graph()))),
        "lemma2" => per_topology(check, ts, |t| Ok(analysis::check_lemma2(t))),
        "row-stochastic" => per_topology(check, ts, analysis::check_row_stochastic),
        "theorem1" => analysis::check_theorem1(s).map_err(analysis_error),
        "theorem2" => analysis::check_theorem2(s).map_err(analysis_error),
        "leader-pull" => match (pull_base, ts) {
            (Some(base), [augmented, ..]) => leader_pull(base, augmented, s.leaders()),
            (None, [base, augmented, ..]) => leader_pull(base, augmented, s.leaders()),
            _ => Err(CliError::InvalidScenario {
                key: "topologies".into(),
                message: "leader-pull compares topology 1 with topology 2; only one is given".into(),
            }),
        },
        other => Err(campaign::unknown_check(other)),
    }
}

pub fn run_verify(
    check: &str,
    source: &VerifySource,
    dt: Option<f64>,
    t_final: Option<f64>,
) -> Result<VerificationReport, CliError> {
    if !CHECKS.contains(&check) {
        return Err(campaign::unknown_check(check));
    }
    match source {
        VerifySource::Random { trials, seed } => campaign::run(check, *trials, *seed),
        VerifySource::Scenario(path) => {
            let s = overrides(&ScenarioFile::read(path)?.to_scenario()?, dt, t_final)?;
            verify_scenario(check, &s, None)
        }
        VerifySource::Builtin { example, variant } => {
            let b = builtin::builtin(*example, variant)?;
            let s = overrides(&b.scenario, dt, t_final)?;
            let base = (*example == 1 && variant != "base").then(builtin::example1_base_topology);
            verify_scenario(check, &s, base.as_ref())
        }
    }
}

pub fn cmd_verify(
    check: &str,
    source: &VerifySource,
    dir: &Path,
    dt: Option<f64>,
    t_final: Option<f64>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let r = run_verify(check, source, dt, t_final)?;
    let (txt, _) = report::write(&r, dir)?;
    say(out, &format!("{}: {}", r.name, if r.passed { "PASS" } else { "FAIL" }))?;
    say(out, &r.narrative)?;
    say(out, &format!("report: {}", txt.display()))?;
    Ok(if r.passed { 0 } else { 1 })
}

pub fn cmd_plotdata(
    trajectory: &Path,
    output: &Path,
    scenario: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let traj = trajectory_file::read(trajectory)?;
    let leaders = match scenario {
        Some(p) => {
            let s = ScenarioFile::read(p)?.to_scenario()?;
            if s.n() != traj.n || s.m() != traj.m {
                return Err(CliError::Usage(format!(
                    "scenario has {} agents in R^{}, trajectory has {} in R^{}",
                    s.n(),
                    s.m(),
                    traj.n,
                    traj.m
                )));
            }
            Some(s.leaders().clone())
        }
        None => None,
    };
    let summary = plot::write(&traj, leaders.as_ref(), output)?;
    say(
        out,
        &format!(
            "{} time series, {} paths, {} leader markers, {} hull vertices",
            summary.time_series, summary.paths, summary.leader_markers, summary.hull_vertices
        ),
    )?;
    Ok(0)
}
