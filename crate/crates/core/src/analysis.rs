//! Numerical certificates for the containment results.
//!
//! Each check evaluates one claim on a concrete instance and returns a
//! [`VerificationReport`] whose `passed` flag is decided only from the
//! measured values and the tolerance it carries:
//!
//! * Laplacian spectrum: `λ₁ = 0`, and `λ₂ > 0` exactly when the graph is
//!   connected.
//! * `H = L + Σ B^q` is positive definite exactly when the augmented graph is
//!   connected.
//! * Fixed topology: agents converge into the leader hull iff the augmented
//!   graph is connected. Leaderless components instead settle at their own
//!   initial mean, since `L₂₂` preserves averages.
//! * Switched topology: `d_xi` stays under `d_xi(t0) e^{−λ₁(t−t0)}`, with `λ₁`
//!   the smallest eigenvalue over the scheduled `H_p`.
//! * The equilibrium weight matrix `W = H⁻¹ B (I_k ⊗ 1_n)` is row stochastic.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dynamics::{equilibrium, equilibrium_weights, simulate, DynamicsError, Scenario};
use crate::geometry::{d_xi, GeometryError, LeaderSet};
use crate::graph::{AgentGraph, GraphError, Topology};
use crate::linalg::{is_row_stochastic, sym_eigenvalues, Cholesky, LinalgError};

/// Eigenvalues at or below this magnitude count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

/// Convergence radius for the fixed-topology check (per agent, Euclidean).
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Allowed gap between a leaderless agent's final state and its component's
/// initial mean.
pub const MEAN_LIMIT_TOL: f64 = 1e-2;

/// Fraction of the predicted leaderless-limit distance that the final `d_xi`
/// must still exceed.
pub const NON_CONVERGENCE_FLOOR_FRACTION: f64 = 0.8;

/// Relative slack on the exponential envelope.
pub const ENVELOPE_SLACK: f64 = 1e-3;

/// Absolute slack on the exponential envelope, covering round-off when `d_xi`
/// starts at zero.
pub const ENVELOPE_ABS_SLACK: f64 = 1e-12;

/// Relative slack on sample-to-sample monotonicity of `d_xi`.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Tolerance for row-stochasticity of `W` and nonnegativity of `H⁻¹`.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Relative slack on the leader-pull comparison; links that cannot move the
/// equilibrium leave the two distances equal up to roundoff.
pub const PULL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    Dynamics(DynamicsError),
    /// The check needs a schedule with a single entry.
    NotFixedTopology {
        entries: usize,
    },
    /// Topology `index` does not connect every component to a leader.
    NotAllConnected {
        index: usize,
    },
    /// Extra links for the pull check must all target the same leader.
    MixedLeaders {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dynamics(e) => write!(f, "{e}"),
            Self::NotFixedTopology { entries } => {
                write!(f, "check needs a fixed topology, schedule has {entries} entries")
            }
            Self::NotAllConnected { index } => {
                write!(f, "topology {index} leaves a component without a leader")
            }
            Self::MixedLeaders { expected, got } => {
                write!(f, "extra link targets leader {got}, expected only leader {expected}")
            }
        }
    }
}

impl core::error::Error for AnalysisError {}

impl From<DynamicsError> for AnalysisError {
    fn from(e: DynamicsError) -> Self {
        Self::Dynamics(e)
    }
}

impl From<LinalgError> for AnalysisError {
    fn from(e: LinalgError) -> Self {
        Self::Dynamics(e.into())
    }
}

impl From<GeometryError> for AnalysisError {
    fn from(e: GeometryError) -> Self {
        Self::Dynamics(e.into())
    }
}

impl From<GraphError> for AnalysisError {
    fn from(e: GraphError) -> Self {
        Self::Dynamics(e.into())
    }
}

/// A named measured quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub passed: bool,
    pub measured: Vec<Measurement>,
    pub tolerance: f64,
    pub narrative: String,
}

impl VerificationReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            measured: Vec::new(),
            tolerance,
            narrative: String::new(),
        }
    }

    fn measure(&mut self, label: &str, value: f64) {
        self.measured.push(Measurement {
            label: label.to_string(),
            value,
        });
    }

    /// Value of the first measurement named `label`.
    pub fn get(&self, label: &str) -> Option<f64> {
        self.measured.iter().find(|m| m.label == label).map(|m| m.value)
    }
}

/// Laplacian spectrum: `λ₁ ≈ 0`, `L·1 ≈ 0`, zero multiplicity equals the
/// number of components, and `λ₂ > 0` when connected.
pub fn check_lemma1(g: &AgentGraph) -> VerificationReport {
    let mut r = VerificationReport::new("lemma1", ZERO_EIGENVALUE_TOL);
    let l = g.laplacian();
    let eig = sym_eigenvalues(&l).expect("a Laplacian is square and symmetric");
    let components = g.components().len();
    let row_sum = l.row_sums().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let zeros = eig.iter().filter(|v| v.abs() <= ZERO_EIGENVALUE_TOL).count();
    let lambda1 = eig.first().copied().unwrap_or(0.0);
    let lambda2 = eig.get(1).copied();

    r.measure("n", g.n() as f64);
    r.measure("components", components as f64);
    r.measure("lambda_1", lambda1);
    if let Some(l2) = lambda2 {
        r.measure("lambda_2", l2);
    }
    r.measure("zero_multiplicity", zeros as f64);
    r.measure("max_abs_row_sum", row_sum);

    let connected = components <= 1;
    let fiedler_ok = match lambda2 {
        Some(l2) if connected => l2 > ZERO_EIGENVALUE_TOL,
        Some(l2) => l2 <= ZERO_EIGENVALUE_TOL,
        None => true,
    };
    r.passed = lambda1.abs() <= ZERO_EIGENVALUE_TOL
        && row_sum <= 1e-12 * (1.0 + l.max_abs())
        && zeros == components
        && fiedler_ok;
    r.narrative = if connected {
        format!(
            "connected graph on {} agents: lambda_2 = {:.6e}",
            g.n(),
            lambda2.unwrap_or(0.0)
        )
    } else {
        format!("{components} components: {zeros} zero eigenvalues")
    };
    r
}

/// Smallest eigenvalue of `H`.
pub fn lambda_min_h(t: &Topology) -> f64 {
    let eig = sym_eigenvalues(&t.composite_matrix()).expect("H is square and symmetric");
    eig.first().copied().unwrap_or(0.0)
}

/// `H` is positive definite iff the augmented graph is connected.
pub fn check_lemma2(t: &Topology) -> VerificationReport {
    let mut r = VerificationReport::new("lemma2", ZERO_EIGENVALUE_TOL);
    let connected = t.is_bar_connected();
    let lmin = lambda_min_h(t);
    r.measure("bar_connected", f64::from(u8::from(connected)));
    r.measure("lambda_min_h", lmin);
    r.measure("leaderless_components", t.leaderless_components().len() as f64);
    r.passed = if connected {
        lmin > ZERO_EIGENVALUE_TOL
    } else {
        lmin <= ZERO_EIGENVALUE_TOL
    };
    r.narrative = if connected {
        format!("augmented graph connected, H positive definite with lambda_min = {lmin:.6e}")
    } else {
        format!("augmented graph not connected, H singular (lambda_min = {lmin:.3e})")
    };
    r
}

/// Convergence into the hull for a fixed topology, or the lack of it.
///
/// Connected: the final state must be within [`CONVERGENCE_TOL`] of `x*` and
/// `d_xi ≤ ½·tol²·n`. Disconnected: every leaderless agent must end within
/// [`MEAN_LIMIT_TOL`] of its component's initial mean, and `d_xi` must stay
/// above [`NON_CONVERGENCE_FLOOR_FRACTION`] of the distance those means predict.
/// When the predicted distance vanishes the initial condition is not generic
/// and only the mean limit is checked.
pub fn check_theorem1(s: &Scenario) -> Result<VerificationReport, AnalysisError> {
    let entries = s.schedule().entries();
    if entries.len() != 1 {
        return Err(AnalysisError::NotFixedTopology { entries: entries.len() });
    }
    let topology = &s.topologies()[entries[0].1];
    let leaders = s.leaders();
    let (n, m) = (s.n(), s.m());
    let final_state = s.run().final_state();
    let final_d = d_xi(&final_state, leaders)?;
    let mut r = VerificationReport::new("theorem1", CONVERGENCE_TOL);
    r.measure("t_final", s.time_at(s.steps()));
    r.measure("final_d_xi", final_d);

    if topology.is_bar_connected() {
        let eq = equilibrium(topology, leaders)?;
        let err = max_abs_diff(&final_state, &eq.x_star);
        let d_bound = 0.5 * CONVERGENCE_TOL * CONVERGENCE_TOL * n as f64;
        r.measure("bar_connected", 1.0);
        r.measure("max_error_to_equilibrium", err);
        r.measure("d_xi_bound", d_bound);
        r.passed = final_d <= d_bound && err <= CONVERGENCE_TOL;
        r.narrative = format!("connected: agents converge to x* (error {err:.3e}) inside the leader hull");
        return Ok(r);
    }

    let limits = leaderless_limits(topology, s.x_init(), m);
    let mut mean_err: f64 = 0.0;
    let mut predicted = 0.0;
    for c in &limits {
        for &i in &c.agents {
            mean_err = mean_err.max(max_abs_diff(&final_state[i * m..(i + 1) * m], &c.mean));
        }
        predicted += c.agents.len() as f64 * leaders.project(&c.mean)?.sq_dist;
    }
    let floor = NON_CONVERGENCE_FLOOR_FRACTION * predicted;
    let generic = predicted > 0.5 * CONVERGENCE_TOL * CONVERGENCE_TOL * n as f64;
    r.measure("bar_connected", 0.0);
    r.measure("leaderless_components", limits.len() as f64);
    r.measure(
        "leaderless_agents",
        limits.iter().map(|c| c.agents.len()).sum::<usize>() as f64,
    );
    r.measure("max_mean_limit_error", mean_err);
    r.measure("predicted_limit_d_xi", predicted);
    r.measure("d_xi_floor", floor);
    r.measure("generic_initial_condition", f64::from(u8::from(generic)));
    r.tolerance = MEAN_LIMIT_TOL;
    if generic {
        r.passed = mean_err <= MEAN_LIMIT_TOL && final_d >= floor;
        r.narrative = format!(
            "not connected: leaderless agents settle at their component means (error {mean_err:.3e}), \
             d_xi stays at {final_d:.6e} >= floor {floor:.6e}; they neither stay put nor diverge"
        );
    } else {
        r.passed = mean_err <= MEAN_LIMIT_TOL;
        r.narrative = format!(
            "not connected, but leaderless component means lie in the hull: non-generic initial \
             condition, not a counterexample (mean-limit error {mean_err:.3e})"
        );
    }
    Ok(r)
}

/// A leaderless component with the mean of its initial states.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderlessLimit {
    pub agents: Vec<usize>,
    pub mean: Vec<f64>,
}

/// Limits of the leaderless components: `ẏ₂ = −(L₂₂ ⊗ I_m) y₂` conserves the
/// per-component average, so each component settles at its initial mean.
pub fn leaderless_limits(t: &Topology, x_init: &[f64], m: usize) -> Vec<LeaderlessLimit> {
    t.leaderless_components()
        .into_iter()
        .map(|agents| {
            let mut mean = vec![0.0; m];
            for &i in &agents {
                for (acc, v) in mean.iter_mut().zip(&x_init[i * m..(i + 1) * m]) {
                    *acc += v;
                }
            }
            let len = agents.len() as f64;
            mean.iter_mut().for_each(|v| *v /= len);
            LeaderlessLimit { agents, mean }
        })
        .collect()
}

/// Exponential envelope and monotone decay of `d_xi` under switching.
pub fn check_theorem2(s: &Scenario) -> Result<VerificationReport, AnalysisError> {
    for (index, t) in s.topologies().iter().enumerate() {
        if !t.is_bar_connected() {
            return Err(AnalysisError::NotAllConnected { index });
        }
    }
    let lambda1 = s
        .schedule()
        .used_topologies()
        .into_iter()
        .map(|p| lambda_min_h(&s.topologies()[p]))
        .fold(f64::INFINITY, f64::min);
    let traj = simulate(s);
    let d0 = traj.first().d_xi;
    let t0 = s.t0();

    let mut envelope_violations = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut monotone_violations = 0usize;
    let mut worst_increase = f64::NEG_INFINITY;
    for (i, sample) in traj.samples.iter().enumerate() {
        let envelope = d0 * libm::exp(-lambda1 * (sample.t - t0));
        if sample.d_xi > envelope * (1.0 + ENVELOPE_SLACK) + ENVELOPE_ABS_SLACK {
            envelope_violations += 1;
        }
        if envelope > 0.0 {
            worst_ratio = worst_ratio.max(sample.d_xi / envelope);
        }
        if i > 0 {
            let prev = traj.samples[i - 1].d_xi;
            let increase = sample.d_xi - prev;
            worst_increase = worst_increase.max(increase);
            if increase > MONOTONE_SLACK * (1.0 + prev) {
                monotone_violations += 1;
            }
        }
    }

    let mut r = VerificationReport::new("theorem2", ENVELOPE_SLACK);
    r.measure("lambda_1", lambda1);
    r.measure("samples", traj.len() as f64);
    r.measure("switches", (s.schedule().entries().len() - 1) as f64);
    r.measure("d_xi_initial", d0);
    r.measure("d_xi_final", traj.last().d_xi);
    r.measure("max_ratio_to_envelope", worst_ratio);
    r.measure("envelope_violations", envelope_violations as f64);
    r.measure("max_step_increase", if traj.len() > 1 { worst_increase } else { 0.0 });
    r.measure("monotone_violations", monotone_violations as f64);
    r.passed = envelope_violations == 0 && monotone_violations == 0;
    r.narrative = format!(
        "{} samples under {} switches: d_xi within exp(-{lambda1:.4} t) envelope \
         (worst ratio {worst_ratio:.4}), non-increasing",
        traj.len(),
        s.schedule().entries().len() - 1
    );
    if d0 == 0.0 {
        r.narrative = format!("d_xi starts at zero and stays below {ENVELOPE_ABS_SLACK:e}");
    }
    Ok(r)
}

/// The equilibrium weight matrix is row stochastic and `H⁻¹` is entrywise
/// nonnegative.
pub fn check_row_stochastic(t: &Topology) -> Result<VerificationReport, AnalysisError> {
    let w = equilibrium_weights(t)?;
    let h_inv = Cholesky::factor(&t.composite_matrix())?.inverse();
    let row_dev = w.row_sums().iter().fold(0.0_f64, |m, s| m.max((s - 1.0).abs()));
    let min_w = w.min_entry();
    let min_h_inv = h_inv.min_entry();
    let mut r = VerificationReport::new("row-stochastic", STOCHASTIC_TOL);
    r.measure("n", t.n() as f64);
    r.measure("k", t.k() as f64);
    r.measure("min_weight", if min_w.is_finite() { min_w } else { 0.0 });
    r.measure("max_row_sum_deviation", row_dev);
    r.measure("min_h_inverse_entry", min_h_inv);
    r.passed = is_row_stochastic(&w, STOCHASTIC_TOL) && min_h_inv >= -STOCHASTIC_TOL;
    r.narrative = format!(
        "W = H^-1 B (I_k x 1_n): min entry {min_w:.3e}, max |row sum - 1| = {row_dev:.3e}; \
         min entry of H^-1 = {min_h_inv:.3e}"
    );
    Ok(r)
}

/// Mean Euclidean distance from the agents of `x` to leader `q`.
pub fn mean_distance_to_leader(x: &[f64], leaders: &LeaderSet, q: usize) -> f64 {
    let target = leaders.position(q);
    let m = leaders.m();
    let n = x.len() / m;
    let total: f64 = x
        .chunks_exact(m)
        .map(|xi| libm::sqrt(xi.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum()))
        .sum();
    total / n as f64
}

/// Adding links to leader `q` must not move the equilibrium away from it, on
/// average.
pub fn leader_pull_monotonicity(
    base: &Topology,
    extra: &[(usize, usize, f64)],
    leaders: &LeaderSet,
    q: usize,
) -> Result<VerificationReport, AnalysisError> {
    if let Some(&(_, got, _)) = extra.iter().find(|&&(_, l, _)| l != q) {
        return Err(AnalysisError::MixedLeaders { expected: q, got });
    }
    let augmented = Topology::new(base.graph().clone(), base.leaders().with_links(extra.iter().copied())?)?;
    leader_pull_between(base, &augmented, leaders, q)
}

/// [`leader_pull_monotonicity`] with the augmented topology given directly.
pub fn leader_pull_between(
    base: &Topology,
    augmented: &Topology,
    leaders: &LeaderSet,
    q: usize,
) -> Result<VerificationReport, AnalysisError> {
    let before = mean_distance_to_leader(&equilibrium(base, leaders)?.x_star, leaders, q);
    let after = mean_distance_to_leader(&equilibrium(augmented, leaders)?.x_star, leaders, q);
    let added = augmented.leaders().links().len() as f64 - base.leaders().links().len() as f64;
    let mut r = VerificationReport::new("leader-pull", PULL_SLACK);
    r.measure("leader", (q + 1) as f64);
    r.measure("links_added", added);
    r.measure("base_mean_distance", before);
    r.measure("augmented_mean_distance", after);
    r.measure("decrease", before - after);
    r.passed = after <= before + PULL_SLACK * (1.0 + before);
    r.narrative = format!(
        "mean distance to leader {}: {before:.6} -> {after:.6} after adding {added} link(s)",
        q + 1
    );
    Ok(r)
}

/// Largest distance from the planar points to their total-least-squares line.
///
/// Zero for fewer than three points or when all points coincide.
pub fn collinearity_residual(points: &[[f64; 2]]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let len = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / len;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / len;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx + syy == 0.0 {
        return 0.0;
    }
    // Principal direction of the 2x2 scatter matrix.
    let angle = 0.5 * libm::atan2(2.0 * sxy, sxx - syy);
    let (nx, ny) = (-libm::sin(angle), libm::cos(angle));
    points
        .iter()
        .map(|p| ((p[0] - cx) * nx + (p[1] - cy) * ny).abs())
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ScenarioParts, SwitchingSchedule};
    use crate::graph::LeaderLinks;
    use approx::assert_abs_diff_eq;

    fn topo(g: AgentGraph, k: usize, links: &[(usize, usize, f64)]) -> Topology {
        let n = g.n();
        Topology::new(g, LeaderLinks::new(n, k, links.iter().copied()).unwrap()).unwrap()
    }

    fn fixed(x_init: Vec<f64>, t: Topology, leaders: LeaderSet, t_final: f64) -> Scenario {
        Scenario::new(ScenarioParts {
            x_init,
            leaders,
            topologies: vec![t],
            schedule: SwitchingSchedule::fixed(0.0, 0),
            t0: 0.0,
            dt: 0.01,
            t_final,
        })
        .unwrap()
    }

    #[test]
    fn lemma1_examples() {
        let r = check_lemma1(&AgentGraph::path(3));
        assert!(r.passed);
        assert_abs_diff_eq!(r.get("lambda_2").unwrap(), 1.0, epsilon = 1e-9);

        let r = check_lemma1(&AgentGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap());
        assert!(r.passed);
        assert_eq!(r.get("components"), Some(2.0));
        assert!(r.get("lambda_2").unwrap() <= 1e-9);

        let r = check_lemma1(&AgentGraph::empty(1));
        assert!(r.passed);
        assert_eq!(r.get("lambda_2"), None);
        assert_eq!(r.get("lambda_1"), Some(0.0));
    }

    #[test]
    fn lemma2_examples() {
        let chain = topo(AgentGraph::path(2), 1, &[(0, 0, 1.0)]);
        let r = check_lemma2(&chain);
        assert!(r.passed);
        assert_abs_diff_eq!(
            r.get("lambda_min_h").unwrap(),
            (3.0 - libm::sqrt(5.0)) / 2.0,
            epsilon = 1e-9
        );

        let r = check_lemma2(&topo(AgentGraph::path(3), 1, &[]));
        assert!(r.passed);
        assert!(r.get("lambda_min_h").unwrap().abs() <= 1e-9);

        // Chain plus an isolated agent without a leader.
        let g = AgentGraph::new(3, [(0, 1, 1.0)]).unwrap();
        let r = check_lemma2(&topo(g, 1, &[(0, 0, 1.0)]));
        assert!(r.passed);
        assert_eq!(r.get("bar_connected"), Some(0.0));
    }

    fn example1_with(graph: AgentGraph, links: &[(usize, usize, f64)]) -> Scenario {
        fixed(
            vec![5.0, 5.5, 6.0, 7.0, 6.5],
            topo(graph, 2, links),
            LeaderSet::new(1, vec![1.0, 2.0]).unwrap(),
            50.0,
        )
    }

    #[test]
    fn theorem1_connected() {
        let s = example1_with(AgentGraph::path(5), &[(0, 0, 1.0), (2, 1, 1.0)]);
        let r = check_theorem1(&s).unwrap();
        assert!(r.passed, "{r:?}");
        let x = s.run().final_state();
        assert!(x.iter().all(|&v| (1.0 - 1e-3..=2.0 + 1e-3).contains(&v)));
    }

    #[test]
    fn theorem1_leaderless_pair_settles_at_mean() {
        // {3,4} (initial 7, 6.5) sees no leader: limit 6.75, d_xi → ½·2·4.75².
        let g = AgentGraph::path(5).without_edge(2, 3);
        let s = example1_with(g, &[(0, 0, 1.0), (2, 1, 1.0)]);
        let r = check_theorem1(&s).unwrap();
        assert!(r.passed, "{r:?}");
        assert_abs_diff_eq!(r.get("predicted_limit_d_xi").unwrap(), 22.5625, epsilon = 1e-12);
        assert_abs_diff_eq!(r.get("final_d_xi").unwrap(), 22.5625, epsilon = 1e-2);
        assert_eq!(r.get("generic_initial_condition"), Some(1.0));
    }

    #[test]
    fn theorem1_non_generic_start() {
        let g = AgentGraph::path(5).without_edge(2, 3);
        let mut s = example1_with(g, &[(0, 0, 1.0), (2, 1, 1.0)]);
        s = s.with_initial_state(vec![5.0, 5.5, 6.0, 1.2, 1.8]).unwrap();
        let r = check_theorem1(&s).unwrap();
        assert!(r.passed);
        assert_eq!(r.get("generic_initial_condition"), Some(0.0));
        assert!(r.narrative.contains("non-generic"));
    }

    #[test]
    fn theorem1_requires_fixed_schedule() {
        let s = example1_with(AgentGraph::path(5), &[(0, 0, 1.0)]);
        let mut parts = s.into_parts();
        parts.topologies.push(parts.topologies[0].clone());
        parts.schedule = SwitchingSchedule::new(vec![(0.0, 0), (1.0, 1)]).unwrap();
        let s = Scenario::new(parts).unwrap();
        assert_eq!(check_theorem1(&s), Err(AnalysisError::NotFixedTopology { entries: 2 }));
    }

    #[test]
    fn theorem2_fixed_and_switched() {
        let s = example1_with(AgentGraph::path(5), &[(0, 0, 1.0), (2, 1, 1.0)]);
        let r = check_theorem2(&s).unwrap();
        assert!(r.passed, "{r:?}");

        let inside = s.with_initial_state(vec![1.1, 1.2, 1.5, 1.9, 2.0]).unwrap();
        let r = check_theorem2(&inside).unwrap();
        assert!(r.passed);
        assert_eq!(r.get("d_xi_initial"), Some(0.0));
        assert!(r.get("d_xi_final").unwrap() <= 1e-9);

        let g = AgentGraph::path(5).without_edge(2, 3);
        let s = example1_with(g, &[(0, 0, 1.0), (2, 1, 1.0)]);
        assert_eq!(check_theorem2(&s), Err(AnalysisError::NotAllConnected { index: 0 }));
    }

    #[test]
    fn row_stochastic_examples() {
        let r = check_row_stochastic(&topo(AgentGraph::path(2), 1, &[(0, 0, 1.0)])).unwrap();
        assert!(r.passed);
        assert!(r.get("max_row_sum_deviation").unwrap() <= 1e-12);

        let r = check_row_stochastic(&topo(AgentGraph::empty(1), 2, &[(0, 0, 1.0), (0, 1, 1.0)])).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.get("min_weight").unwrap(), 0.5, epsilon = 1e-12);

        let disconnected = topo(AgentGraph::empty(2), 1, &[(0, 0, 1.0)]);
        assert!(matches!(
            check_row_stochastic(&disconnected),
            Err(AnalysisError::Dynamics(_))
        ));
    }

    #[test]
    fn leader_pull_examples() {
        let leaders = LeaderSet::new(1, vec![1.0, 2.0]).unwrap();
        let base = topo(AgentGraph::empty(1), 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        let r = leader_pull_monotonicity(&base, &[], &leaders, 0).unwrap();
        assert!(r.passed);
        assert_eq!(r.get("decrease"), Some(0.0));

        // Raising b¹ from 1 to 2 gives weight ⅔ on leader 1.
        let raised = topo(AgentGraph::empty(1), 2, &[(0, 0, 2.0), (0, 1, 1.0)]);
        let r = leader_pull_between(&base, &raised, &leaders, 0).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.get("base_mean_distance").unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.get("augmented_mean_distance").unwrap(), 1.0 / 3.0, epsilon = 1e-12);

        let chain = topo(AgentGraph::path(5), 2, &[(0, 0, 1.0), (2, 1, 1.0)]);
        let extra = [(1, 0, 1.0), (2, 0, 1.0), (3, 0, 1.0)];
        let r = leader_pull_monotonicity(&chain, &extra, &leaders, 0).unwrap();
        assert!(r.passed);
        assert!(r.get("decrease").unwrap() > 1e-3);

        assert_eq!(
            leader_pull_monotonicity(&chain, &[(1, 1, 1.0)], &leaders, 0),
            Err(AnalysisError::MixedLeaders { expected: 0, got: 1 })
        );
    }

    #[test]
    fn collinearity_examples() {
        assert_eq!(collinearity_residual(&[[0.0, 0.0], [1.0, 1.0]]), 0.0);
        let on_line = [[0.0, 1.0], [1.0, 3.0], [2.0, 5.0], [-1.0, -1.0]];
        assert!(collinearity_residual(&on_line) < 1e-12);
        let vertical = [[2.0, 0.0], [2.0, 1.0], [2.0, 5.0]];
        assert!(collinearity_residual(&vertical) < 1e-12);
        // Square corners: best line through the centre, residual ½√2·... at most 0.5 along an axis.
        let square = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        assert!(collinearity_residual(&square) >= 0.5 - 1e-12);
        assert_eq!(collinearity_residual(&[[1.0, 1.0]; 4]), 0.0);
    }
}
