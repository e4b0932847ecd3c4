//! Random scenario generators and `--random N` verification campaigns.
//!
//! Trial `i` of a campaign with seed `s` draws from a ChaCha8 stream seeded
//! with `s` on stream `i`, so trials are independent of each other and of the
//! number of threads.

use containment_core::analysis::{self, lambda_min_h};
use containment_core::dynamics::ScenarioParts;
use containment_core::linalg::sym_eigenvalues;
use containment_core::{AgentGraph, LeaderLinks, LeaderSet, Scenario, SwitchingSchedule, Topology, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::report;

pub const MAX_AGENTS: usize = 12;
pub const MAX_LEADERS: usize = 4;
pub const MAX_DIM: usize = 3;
/// Horizon in units of the slowest time constant; `e^-20 ≈ 2e-9`.
pub const TIME_CONSTANTS: f64 = 20.0;
pub const DT: f64 = 0.01;
pub const SWITCHED_TOPOLOGIES: usize = 3;
pub const SWITCHED_DWELL: f64 = 1.0;
pub const SWITCHED_T_FINAL: f64 = 30.0;

pub const CHECKS: [&str; 6] = [
    "lemma1",
    "lemma2",
    "theorem1",
    "theorem2",
    "row-stochastic",
    "leader-pull",
];

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn weight(rng: &mut impl Rng) -> f64 {
    rng.random_range(0.5..=2.0)
}

fn points(rng: &mut impl Rng, count: usize, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count * m).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Erdős–Rényi graph on `n` agents with a random edge density.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> AgentGraph {
    let p: f64 = rng.random_range(0.0..0.6);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j, weight(rng)));
            }
        }
    }
    AgentGraph::new(n, edges).expect("generated edges are valid")
}

/// Random graph and links; the augmented graph may or may not be connected.
pub fn random_topology(rng: &mut impl Rng, n: usize, k: usize) -> Topology {
    let graph = random_graph(rng, n);
    let p: f64 = rng.random_range(0.0..0.5);
    let mut links = Vec::new();
    for i in 0..n {
        for q in 0..k {
            if rng.random_bool(p) {
                links.push((i, q, weight(rng)));
            }
        }
    }
    Topology::new(graph, LeaderLinks::new(n, k, links).expect("generated links are valid")).expect("sizes agree")
}

/// [`random_topology`] patched so every component reaches a leader.
pub fn random_connected_topology(rng: &mut impl Rng, n: usize, k: usize) -> Topology {
    let t = random_topology(rng, n, k);
    let extra: Vec<_> = t
        .leaderless_components()
        .into_iter()
        .map(|c| (c[rng.random_range(0..c.len())], rng.random_range(0..k), weight(rng)))
        .collect();
    let links = t
        .leaders()
        .with_links(extra)
        .expect("leaderless agents have no links yet");
    Topology::new(t.graph().clone(), links).expect("sizes agree")
}

fn dims(rng: &mut impl Rng) -> (usize, usize, usize) {
    (
        rng.random_range(1..=MAX_AGENTS),
        rng.random_range(1..=MAX_LEADERS),
        rng.random_range(1..=MAX_DIM),
    )
}

fn horizon(lambda: f64) -> f64 {
    (TIME_CONSTANTS / lambda).max(1.0)
}

/// Fixed connected topology, leaders in `[0, 2]^m`, agents in `[-10, 10]^m`,
/// horizon `20 / λ_min(H)`.
pub fn random_connected_scenario(rng: &mut impl Rng) -> Scenario {
    let (n, k, m) = dims(rng);
    let topology = random_connected_topology(rng, n, k);
    let leaders = LeaderSet::new(m, points(rng, k, m, 0.0, 2.0)).expect("finite leaders");
    let x_init = points(rng, n, m, -10.0, 10.0);
    let t_final = horizon(lambda_min_h(&topology));
    Scenario::new(ScenarioParts {
        x_init,
        leaders,
        topologies: vec![topology],
        schedule: SwitchingSchedule::fixed(0.0, 0),
        t0: 0.0,
        dt: DT,
        t_final,
    })
    .expect("generated scenario is valid")
}

/// A linked group and at least one leaderless agent, with no edge between the
/// two. Leaderless agents start in `[3, 10]^m`, at least 1 away from the
/// hull in every coordinate. Horizon is `20 /` smallest positive eigenvalue of
/// `H`.
pub fn random_disconnected_scenario(rng: &mut impl Rng) -> Scenario {
    let (n, k, m) = dims(rng);
    let n = n.max(2);
    let linked = rng.random_range(1..n);
    let stray = n - linked;
    let head = random_connected_topology(rng, linked, k);
    let tail = random_graph(rng, stray);

    let edges = head
        .graph()
        .triples()
        .chain(tail.triples().map(|(i, j, w)| (i + linked, j + linked, w)))
        .collect::<Vec<_>>();
    let graph = AgentGraph::new(n, edges).expect("shifted edges are valid");
    let links = LeaderLinks::new(n, k, head.leaders().triples()).expect("links stay in range");
    let topology = Topology::new(graph, links).expect("sizes agree");

    let leaders = LeaderSet::new(m, points(rng, k, m, 0.0, 2.0)).expect("finite leaders");
    let mut x_init = points(rng, linked, m, -10.0, 10.0);
    x_init.extend(points(rng, stray, m, 3.0, 10.0));

    let eig = sym_eigenvalues(&topology.composite_matrix()).expect("H is symmetric");
    let slowest = eig
        .into_iter()
        .find(|&v| v > analysis::ZERO_EIGENVALUE_TOL)
        .unwrap_or(1.0);
    Scenario::new(ScenarioParts {
        x_init,
        leaders,
        topologies: vec![topology],
        schedule: SwitchingSchedule::fixed(0.0, 0),
        t0: 0.0,
        dt: DT,
        t_final: horizon(slowest),
    })
    .expect("generated scenario is valid")
}

/// Three connected topologies cycled with dwell 1 over a horizon of 30.
pub fn random_switched_scenario(rng: &mut impl Rng) -> Scenario {
    let (n, k, m) = dims(rng);
    let topologies: Vec<_> = (0..SWITCHED_TOPOLOGIES)
        .map(|_| random_connected_topology(rng, n, k))
        .collect();
    let order: Vec<usize> = (0..SWITCHED_TOPOLOGIES).collect();
    let schedule = SwitchingSchedule::periodic(0.0, SWITCHED_DWELL, SWITCHED_T_FINAL, &order).expect("valid dwell");
    Scenario::new(ScenarioParts {
        x_init: points(rng, n, m, -10.0, 10.0),
        leaders: LeaderSet::new(m, points(rng, k, m, 0.0, 2.0)).expect("finite leaders"),
        topologies,
        schedule,
        t0: 0.0,
        dt: DT,
        t_final: SWITCHED_T_FINAL,
    })
    .expect("generated scenario is valid")
}

/// A connected topology with two leaders plus extra links to one of them.
pub fn random_leader_pull(rng: &mut impl Rng) -> (Topology, Vec<(usize, usize, f64)>, LeaderSet, usize) {
    let n = rng.random_range(1..=MAX_AGENTS);
    let m = rng.random_range(1..=MAX_DIM);
    let base = random_connected_topology(rng, n, 2);
    let q = rng.random_range(0..2);
    let free: Vec<usize> = (0..n).filter(|&i| base.leaders().weight(i, q).is_none()).collect();
    let mut extra = Vec::new();
    for &i in &free {
        if rng.random_bool(0.5) {
            extra.push((i, q, weight(rng)));
        }
    }
    if extra.is_empty() && !free.is_empty() {
        extra.push((free[rng.random_range(0..free.len())], q, weight(rng)));
    }
    let leaders = LeaderSet::new(m, points(rng, 2, m, 0.0, 2.0)).expect("finite leaders");
    (base, extra, leaders, q)
}

fn trial(check: &str, rng: &mut ChaCha8Rng, index: u64) -> Result<VerificationReport, CliError> {
    let analysis_err = |e: analysis::AnalysisError| CliError::InvalidScenario {
        key: format!("trial {index}"),
        message: e.to_string(),
    };
    Ok(match check {
        "lemma1" => {
            let n = rng.random_range(1..=MAX_AGENTS);
            analysis::check_lemma1(&random_graph(rng, n))
        }
        "lemma2" => {
            let (n, k, _) = dims(rng);
            analysis::check_lemma2(&random_topology(rng, n, k))
        }
        "theorem1" => {
            let s = if index.is_multiple_of(2) {
                random_connected_scenario(rng)
            } else {
                random_disconnected_scenario(rng)
            };
            analysis::check_theorem1(&s).map_err(analysis_err)?
        }
        "theorem2" => analysis::check_theorem2(&random_switched_scenario(rng)).map_err(analysis_err)?,
        "row-stochastic" => {
            let (n, k, _) = dims(rng);
            analysis::check_row_stochastic(&random_connected_topology(rng, n, k)).map_err(analysis_err)?
        }
        "leader-pull" => {
            let (base, extra, leaders, q) = random_leader_pull(rng);
            analysis::leader_pull_monotonicity(&base, &extra, &leaders, q).map_err(analysis_err)?
        }
        other => return Err(unknown_check(other)),
    })
}

pub fn unknown_check(name: &str) -> CliError {
    CliError::Usage(format!(
        "unknown check `{name}`; expected one of: {}",
        CHECKS.join(", ")
    ))
}

/// Runs `trials` random instances of `check` and merges the reports.
pub fn run(check: &str, trials: usize, seed: u64) -> Result<VerificationReport, CliError> {
    if !CHECKS.contains(&check) {
        return Err(unknown_check(check));
    }
    if trials == 0 {
        return Err(CliError::Usage("--random needs at least one trial".into()));
    }
    let parts = (0..trials as u64)
        .into_par_iter()
        .map(|i| trial(check, &mut trial_rng(seed, i), i).map(|r| (format!("trial_{}", i + 1), r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut combined = report::combine(check, parts);
    combined.narrative = format!("random campaign, seed {seed}: {}", combined.narrative);
    Ok(combined)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_respect_their_contracts() {
        for i in 0..40 {
            let rng = &mut trial_rng(3, i);
            let s = random_connected_scenario(rng);
            assert!(s.topologies()[0].is_bar_connected());
            assert!(s.n() <= MAX_AGENTS && s.k() <= MAX_LEADERS && s.m() <= MAX_DIM);

            let d = random_disconnected_scenario(rng);
            let t = &d.topologies()[0];
            assert!(!t.is_bar_connected());
            for c in t.leaderless_components() {
                for i in c {
                    assert!(d.x_init()[i * d.m()..(i + 1) * d.m()].iter().all(|&v| v >= 3.0));
                }
            }

            let w = random_switched_scenario(rng);
            assert_eq!(w.topologies().len(), 3);
            assert!(w.topologies().iter().all(Topology::is_bar_connected));
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let a = random_connected_scenario(&mut trial_rng(7, 5));
        let b = random_connected_scenario(&mut trial_rng(7, 5));
        let c = random_connected_scenario(&mut trial_rng(7, 6));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_check_is_usage() {
        assert_eq!(run("lemma3", 1, 0).unwrap_err().exit_code(), 2);
        assert_eq!(run("lemma1", 0, 0).unwrap_err().exit_code(), 2);
    }
}
