//! Closed-loop dynamics under fixed or switched topologies.
//!
//! Every agent runs `ẋ_i = Σ_j a_ij (x_j − x_i) + Σ_q b_i^q (x0^q − x_i)`, which
//! stacks into `ẋ = −(H ⊗ I_m) x + [B (I_k ⊗ 1_n)] ⊗ I_m x0`. The topology is
//! piecewise constant in time and may only switch on the integration grid, so
//! each classical RK4 step sees a single linear system.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{d_xi, GeometryError, LeaderSet};
use crate::graph::{GraphError, Topology};
use crate::linalg::{solve_spd, DenseMatrix, LinalgError};

/// Relative slack allowed when matching a switching time to the grid.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Integration step used when a scenario does not name one.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    Graph(GraphError),
    Geometry(GeometryError),
    Linalg(LinalgError),
    NoAgents,
    /// Stacked state length differs from `n * m`.
    StateLength {
        expected: usize,
        got: usize,
    },
    NonFiniteState,
    InvalidStep {
        dt: f64,
    },
    InvalidHorizon {
        t0: f64,
        t_final: f64,
    },
    NoTopologies,
    TopologyAgentCount {
        index: usize,
        expected: usize,
        got: usize,
    },
    TopologyLeaderCount {
        index: usize,
        expected: usize,
        got: usize,
    },
    EmptySchedule,
    ScheduleStart {
        first: f64,
        t0: f64,
    },
    ScheduleNotIncreasing {
        index: usize,
    },
    UnknownTopology {
        index: usize,
        count: usize,
    },
    /// A switching time is not a whole number of steps after `t0`.
    SwitchOffGrid {
        time: f64,
        dt: f64,
    },
    SwitchAfterHorizon {
        time: f64,
        t_final: f64,
    },
    BeforeStart {
        t: f64,
        t0: f64,
    },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Graph(e) => write!(f, "{e}"),
            Self::Geometry(e) => write!(f, "{e}"),
            Self::Linalg(e) => write!(f, "{e}"),
            Self::NoAgents => f.write_str("scenario has no agents"),
            Self::StateLength { expected, got } => {
                write!(f, "stacked state has {got} entries, expected {expected}")
            }
            Self::NonFiniteState => f.write_str("initial state has a non-finite coordinate"),
            Self::InvalidStep { dt } => write!(f, "step size {dt} must be finite and positive"),
            Self::InvalidHorizon { t0, t_final } => {
                write!(f, "final time {t_final} must exceed start time {t0}")
            }
            Self::NoTopologies => f.write_str("scenario has no topologies"),
            Self::TopologyAgentCount { index, expected, got } => {
                write!(f, "topology {index} has {got} agents, expected {expected}")
            }
            Self::TopologyLeaderCount { index, expected, got } => {
                write!(f, "topology {index} has {got} leaders, expected {expected}")
            }
            Self::EmptySchedule => f.write_str("switching schedule is empty"),
            Self::ScheduleStart { first, t0 } => {
                write!(f, "schedule starts at {first} but the scenario starts at {t0}")
            }
            Self::ScheduleNotIncreasing { index } => {
                write!(
                    f,
                    "schedule entry {index} does not come strictly after the previous one"
                )
            }
            Self::UnknownTopology { index, count } => {
                write!(f, "schedule references topology {index} but only {count} exist")
            }
            Self::SwitchOffGrid { time, dt } => {
                write!(f, "switching time {time} is not on the integration grid (dt = {dt})")
            }
            Self::SwitchAfterHorizon { time, t_final } => {
                write!(f, "switching time {time} lies after the final time {t_final}")
            }
            Self::BeforeStart { t, t0 } => write!(f, "time {t} precedes the schedule start {t0}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<GraphError> for DynamicsError {
    fn from(e: GraphError) -> Self {
        Self::Graph(e)
    }
}

impl From<GeometryError> for DynamicsError {
    fn from(e: GeometryError) -> Self {
        Self::Geometry(e)
    }
}

impl From<LinalgError> for DynamicsError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}

/// Piecewise-constant switching signal: entry `(t_l, p_l)` is active on
/// `[t_l, t_{l+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    entries: Vec<(f64, usize)>,
}

impl SwitchingSchedule {
    pub fn new(entries: Vec<(f64, usize)>) -> Result<Self, DynamicsError> {
        if entries.is_empty() {
            return Err(DynamicsError::EmptySchedule);
        }
        if let Some(index) = entries.iter().position(|(t, _)| !t.is_finite()) {
            return Err(DynamicsError::ScheduleNotIncreasing { index });
        }
        for (index, w) in entries.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(DynamicsError::ScheduleNotIncreasing { index: index + 1 });
            }
        }
        Ok(Self { entries })
    }

    /// A constant signal.
    pub fn fixed(t0: f64, topology: usize) -> Self {
        Self {
            entries: vec![(t0, topology)],
        }
    }

    /// Round-robin over `topologies`, switching every `dwell` time units up to
    /// (but excluding) `t_final`.
    pub fn periodic(t0: f64, dwell: f64, t_final: f64, topologies: &[usize]) -> Result<Self, DynamicsError> {
        if !dwell.is_finite() || dwell <= 0.0 {
            return Err(DynamicsError::InvalidStep { dt: dwell });
        }
        if topologies.is_empty() {
            return Err(DynamicsError::EmptySchedule);
        }
        let mut entries = Vec::new();
        let mut l = 0usize;
        loop {
            let t = t0 + l as f64 * dwell;
            if l > 0 && t >= t_final {
                break;
            }
            entries.push((t, topologies[l % topologies.len()]));
            l += 1;
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn start(&self) -> f64 {
        self.entries[0].0
    }

    pub fn is_fixed(&self) -> bool {
        self.entries.len() == 1
    }

    /// Topology indices that appear in the schedule, ascending and deduplicated.
    pub fn used_topologies(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.entries.iter().map(|&(_, p)| p).collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Index of the last entry with `t_l <= t`.
    pub fn active_topology(&self, t: f64) -> Result<usize, DynamicsError> {
        let start = self.start();
        if t < start {
            return Err(DynamicsError::BeforeStart { t, t0: start });
        }
        let pos = self.entries.partition_point(|&(tl, _)| tl <= t);
        Ok(self.entries[pos - 1].1)
    }
}

/// Parts of a [`Scenario`], validated by [`Scenario::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParts {
    /// Stacked initial state, `n * m` values.
    pub x_init: Vec<f64>,
    pub leaders: LeaderSet,
    pub topologies: Vec<Topology>,
    pub schedule: SwitchingSchedule,
    pub t0: f64,
    pub dt: f64,
    pub t_final: f64,
}

/// A complete experiment: initial agent states, leaders, admissible
/// topologies, switching schedule and integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    parts: ScenarioParts,
    n: usize,
    /// Grid index of each schedule entry.
    switch_steps: Vec<usize>,
    steps: usize,
}

impl Scenario {
    pub fn new(parts: ScenarioParts) -> Result<Self, DynamicsError> {
        let m = parts.leaders.m();
        let k = parts.leaders.k();
        if !parts.x_init.len().is_multiple_of(m) {
            return Err(DynamicsError::StateLength {
                expected: parts.x_init.len().div_ceil(m) * m,
                got: parts.x_init.len(),
            });
        }
        let n = parts.x_init.len() / m;
        if n == 0 {
            return Err(DynamicsError::NoAgents);
        }
        if parts.x_init.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFiniteState);
        }
        if !parts.dt.is_finite() || parts.dt <= 0.0 {
            return Err(DynamicsError::InvalidStep { dt: parts.dt });
        }
        if !parts.t0.is_finite() || !parts.t_final.is_finite() || parts.t_final <= parts.t0 {
            return Err(DynamicsError::InvalidHorizon {
                t0: parts.t0,
                t_final: parts.t_final,
            });
        }
        if parts.topologies.is_empty() {
            return Err(DynamicsError::NoTopologies);
        }
        for (index, t) in parts.topologies.iter().enumerate() {
            if t.n() != n {
                return Err(DynamicsError::TopologyAgentCount {
                    index,
                    expected: n,
                    got: t.n(),
                });
            }
            if t.k() != k {
                return Err(DynamicsError::TopologyLeaderCount {
                    index,
                    expected: k,
                    got: t.k(),
                });
            }
        }
        let steps = grid_steps(parts.t0, parts.t_final, parts.dt);
        let mut switch_steps = Vec::with_capacity(parts.schedule.entries().len());
        for (l, &(t, p)) in parts.schedule.entries().iter().enumerate() {
            if p >= parts.topologies.len() {
                return Err(DynamicsError::UnknownTopology {
                    index: p,
                    count: parts.topologies.len(),
                });
            }
            let ratio = (t - parts.t0) / parts.dt;
            let step = libm::round(ratio);
            if (ratio - step).abs() > GRID_TOLERANCE * ratio.abs().max(1.0) {
                return Err(DynamicsError::SwitchOffGrid { time: t, dt: parts.dt });
            }
            if l == 0 && step != 0.0 {
                return Err(DynamicsError::ScheduleStart { first: t, t0: parts.t0 });
            }
            if step as usize > steps {
                return Err(DynamicsError::SwitchAfterHorizon {
                    time: t,
                    t_final: parts.t_final,
                });
            }
            switch_steps.push(step as usize);
        }
        Ok(Self {
            parts,
            n,
            switch_steps,
            steps,
        })
    }

    pub fn parts(&self) -> &ScenarioParts {
        &self.parts
    }

    pub fn into_parts(self) -> ScenarioParts {
        self.parts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.parts.leaders.m()
    }

    pub fn k(&self) -> usize {
        self.parts.leaders.k()
    }

    pub fn x_init(&self) -> &[f64] {
        &self.parts.x_init
    }

    pub fn leaders(&self) -> &LeaderSet {
        &self.parts.leaders
    }

    pub fn topologies(&self) -> &[Topology] {
        &self.parts.topologies
    }

    pub fn schedule(&self) -> &SwitchingSchedule {
        &self.parts.schedule
    }

    pub fn t0(&self) -> f64 {
        self.parts.t0
    }

    pub fn dt(&self) -> f64 {
        self.parts.dt
    }

    pub fn t_final(&self) -> f64 {
        self.parts.t_final
    }

    /// Number of integration steps; the last sample sits at `t0 + steps * dt`,
    /// the first grid point at or after `t_final`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Time of grid point `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.parts.t0 + i as f64 * self.parts.dt
    }

    /// Topology active on the step that starts at grid point `i`.
    pub fn topology_at_step(&self, i: usize) -> usize {
        let pos = self.switch_steps.partition_point(|&s| s <= i);
        self.parts.schedule.entries()[pos - 1].1
    }

    /// Same scenario with a different step size and/or horizon.
    pub fn with_horizon(&self, dt: Option<f64>, t_final: Option<f64>) -> Result<Self, DynamicsError> {
        let mut parts = self.parts.clone();
        if let Some(dt) = dt {
            parts.dt = dt;
        }
        if let Some(t_final) = t_final {
            parts.t_final = t_final;
        }
        Self::new(parts)
    }

    /// Same scenario started from another stacked state.
    pub fn with_initial_state(&self, x_init: Vec<f64>) -> Result<Self, DynamicsError> {
        let mut parts = self.parts.clone();
        parts.x_init = x_init;
        Self::new(parts)
    }

    /// Shifts every agent and leader by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self, DynamicsError> {
        let mut parts = self.parts.clone();
        parts.leaders = parts.leaders.translated(offset)?;
        for xi in parts.x_init.chunks_exact_mut(self.m()) {
            for (v, o) in xi.iter_mut().zip(offset) {
                *v += o;
            }
        }
        Self::new(parts)
    }

    /// Iterator over grid samples without the distance bookkeeping.
    pub fn run(&self) -> Simulation<'_> {
        Simulation::new(self)
    }
}

fn grid_steps(t0: f64, t_final: f64, dt: f64) -> usize {
    let ratio = (t_final - t0) / dt;
    let nearest = libm::round(ratio);
    if (ratio - nearest).abs() <= GRID_TOLERANCE * ratio.abs().max(1.0) {
        nearest as usize
    } else {
        libm::ceil(ratio) as usize
    }
}

/// `u_i = Σ_j a_ij (x_j − x_i) + Σ_q b_i^q (x0^q − x_i)` for every agent.
pub fn control(x: &[f64], topology: &Topology, leaders: &LeaderSet) -> Result<Vec<f64>, DynamicsError> {
    check_dims(x, topology, leaders)?;
    let mut u = vec![0.0; x.len()];
    control_into(x, topology, leaders, &mut u);
    Ok(u)
}

fn check_dims(x: &[f64], topology: &Topology, leaders: &LeaderSet) -> Result<(), DynamicsError> {
    let expected = topology.n() * leaders.m();
    if x.len() != expected {
        return Err(DynamicsError::StateLength { expected, got: x.len() });
    }
    if topology.k() != leaders.k() {
        return Err(DynamicsError::TopologyLeaderCount {
            index: 0,
            expected: leaders.k(),
            got: topology.k(),
        });
    }
    Ok(())
}

fn control_into(x: &[f64], topology: &Topology, leaders: &LeaderSet, u: &mut [f64]) {
    let m = leaders.m();
    u.fill(0.0);
    for e in topology.graph().edges() {
        for d in 0..m {
            let flow = e.weight * (x[e.j * m + d] - x[e.i * m + d]);
            u[e.i * m + d] += flow;
            u[e.j * m + d] -= flow;
        }
    }
    for l in topology.leaders().links() {
        let target = leaders.position(l.leader);
        for d in 0..m {
            u[l.agent * m + d] += l.weight * (target[d] - x[l.agent * m + d]);
        }
    }
}

/// Workspace for RK4 stages.
struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    fn step(&mut self, x: &mut [f64], topology: &Topology, leaders: &LeaderSet, dt: f64) {
        control_into(x, topology, leaders, &mut self.k1);
        axpy_into(&mut self.tmp, x, 0.5 * dt, &self.k1);
        control_into(&self.tmp, topology, leaders, &mut self.k2);
        axpy_into(&mut self.tmp, x, 0.5 * dt, &self.k2);
        control_into(&self.tmp, topology, leaders, &mut self.k3);
        axpy_into(&mut self.tmp, x, dt, &self.k3);
        control_into(&self.tmp, topology, leaders, &mut self.k4);
        let w = dt / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += w * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// One classical fourth-order Runge–Kutta step of the closed loop.
pub fn step(x: &[f64], topology: &Topology, leaders: &LeaderSet, dt: f64) -> Result<Vec<f64>, DynamicsError> {
    check_dims(x, topology, leaders)?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(DynamicsError::InvalidStep { dt });
    }
    let mut out = x.to_vec();
    Rk4::new(x.len()).step(&mut out, topology, leaders, dt);
    Ok(out)
}

/// State at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub step: usize,
    pub t: f64,
    pub state: Vec<f64>,
    /// Topology active from this sample onward.
    pub topology: usize,
}

/// Lazy integration of a scenario; yields one [`StateSample`] per grid point
/// from `t0` through the final time.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    state: Vec<f64>,
    next: usize,
    rk: Rk4,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let state = scenario.x_init().to_vec();
        let rk = Rk4::new(state.len());
        Self {
            scenario,
            state,
            next: 0,
            rk,
        }
    }

    /// Runs to the end and returns the final stacked state.
    pub fn final_state(mut self) -> Vec<f64> {
        while self.advance().is_some() {}
        self.state
    }

    /// Moves to the next grid point; returns its index.
    fn advance(&mut self) -> Option<usize> {
        let s = self.scenario;
        if self.next > s.steps() {
            return None;
        }
        let i = self.next;
        if i > 0 {
            let p = s.topology_at_step(i - 1);
            self.rk.step(&mut self.state, &s.topologies()[p], s.leaders(), s.dt());
        }
        self.next += 1;
        Some(i)
    }
}

impl Iterator for Simulation<'_> {
    type Item = StateSample;

    fn next(&mut self) -> Option<StateSample> {
        let i = self.advance()?;
        let s = self.scenario;
        Some(StateSample {
            step: i,
            t: s.time_at(i),
            state: self.state.clone(),
            topology: s.topology_at_step(i),
        })
    }
}

/// One row of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    pub topology: usize,
    pub d_xi: f64,
}

/// Grid-sampled solution with `d_xi` recorded at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub m: usize,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("a trajectory holds at least the initial sample")
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Coordinates of agent `i` at sample `s`.
    pub fn agent(&self, s: usize, i: usize) -> &[f64] {
        &self.samples[s].state[i * self.m..(i + 1) * self.m]
    }
}

/// Integrates the scenario over its horizon.
pub fn simulate(scenario: &Scenario) -> Trajectory {
    let leaders = scenario.leaders();
    let samples = scenario
        .run()
        .map(|s| {
            let d = d_xi(&s.state, leaders).expect("scenario dimensions were validated");
            Sample {
                t: s.t,
                state: s.state,
                topology: s.topology,
                d_xi: d,
            }
        })
        .collect();
    Trajectory {
        n: scenario.n(),
        m: scenario.m(),
        samples,
    }
}

/// `H = L + Σ_q B^q`.
pub fn build_h(topology: &Topology) -> DenseMatrix {
    topology.composite_matrix()
}

/// Closed-form limit of a fixed topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// `W = H⁻¹ [B¹1_n, ..., B^k 1_n]`, one row per agent.
    pub weights: DenseMatrix,
    /// Stacked limit state, `x*_i = Σ_q W_iq x0^q`.
    pub x_star: Vec<f64>,
}

/// Solves `H W = [B¹1_n, ..., B^k 1_n]` for the `n x k` weight matrix.
pub fn equilibrium_weights(topology: &Topology) -> Result<DenseMatrix, DynamicsError> {
    let mut rhs = DenseMatrix::zeros(topology.n(), topology.k());
    for l in topology.leaders().links() {
        rhs[(l.agent, l.leader)] = l.weight;
    }
    Ok(solve_spd(&build_h(topology), &rhs)?)
}

/// Equilibrium of the fixed-topology closed loop.
///
/// Fails with [`LinalgError::NotPositiveDefinite`] (wrapped) when the
/// augmented graph is not connected.
pub fn equilibrium(topology: &Topology, leaders: &LeaderSet) -> Result<Equilibrium, DynamicsError> {
    if topology.k() != leaders.k() {
        return Err(DynamicsError::TopologyLeaderCount {
            index: 0,
            expected: leaders.k(),
            got: topology.k(),
        });
    }
    let (n, k, m) = (topology.n(), leaders.k(), leaders.m());
    let weights = equilibrium_weights(topology)?;
    let mut x_star = vec![0.0; n * m];
    for i in 0..n {
        for q in 0..k {
            let w = weights[(i, q)];
            for (d, v) in leaders.position(q).iter().enumerate() {
                x_star[i * m + d] += w * v;
            }
        }
    }
    Ok(Equilibrium { weights, x_star })
}
