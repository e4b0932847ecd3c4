//! The two worked examples and their topology variants.
//!
//! Initial positions are exact. The interaction graphs are not known edge for
//! edge, so every topology here is a reconstruction from a short description
//! and is labelled as such in the generated scenario files.

use containment_core::dynamics::ScenarioParts;
use containment_core::{AgentGraph, LeaderLinks, LeaderSet, Scenario, SwitchingSchedule, Topology};

use crate::error::CliError;
use crate::scenario_file::ScenarioFile;

pub const EXAMPLE1_VARIANTS: [&str; 6] = [
    "base",
    "more-links",
    "isolated-2",
    "relay-5",
    "leaderless-45",
    "switched",
];
pub const EXAMPLE2_VARIANTS: [&str; 1] = ["base"];

pub const EXAMPLE1_T_FINAL: f64 = 50.0;
/// Long enough for the slowest mode of the example-2 chain (`λ_min ≈ 0.105`)
/// to fall below `1e-6`.
pub const EXAMPLE2_T_FINAL: f64 = 150.0;
pub const SWITCHED_DWELL: f64 = 1.0;
pub const SWITCHED_T_FINAL: f64 = 30.0;

const RECONSTRUCTED: &str = "reconstructed topology";

/// A ready-to-run example with the claim it is meant to exhibit.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub example: u8,
    pub variant: &'static str,
    pub claim: &'static str,
    pub scenario: Scenario,
    notes: Vec<String>,
}

impl Builtin {
    /// Scenario file with the reconstruction notes attached to each topology.
    pub fn to_file(&self) -> ScenarioFile {
        let description = format!("example {} variant {}: {}", self.example, self.variant, self.claim);
        let mut file = ScenarioFile::from_scenario(&self.scenario, Some(description));
        for (entry, note) in file.topologies.iter_mut().zip(&self.notes) {
            entry.note = Some(note.clone());
        }
        file
    }

    pub fn file_stem(&self) -> String {
        format!("example{}-{}", self.example, self.variant)
    }
}

pub fn variants(example: u8) -> &'static [&'static str] {
    match example {
        1 => &EXAMPLE1_VARIANTS,
        2 => &EXAMPLE2_VARIANTS,
        _ => &[],
    }
}

pub fn builtin(example: u8, variant: &str) -> Result<Builtin, CliError> {
    if !matches!(example, 1 | 2) {
        return Err(CliError::Usage(format!("unknown example {example}; expected 1 or 2")));
    }
    let Some(&variant) = variants(example).iter().find(|v| **v == variant) else {
        return Err(CliError::Usage(format!(
            "unknown variant `{variant}` for example {example}; expected one of: {}",
            variants(example).join(", ")
        )));
    };
    Ok(if example == 1 { example1(variant) } else { example2() })
}

fn example1_start() -> (Vec<f64>, LeaderSet) {
    let leaders = LeaderSet::new(1, vec![1.0, 2.0]).expect("two leaders on a line");
    (vec![5.0, 5.5, 6.0, 7.0, 6.5], leaders)
}

/// Chain 1-2-3-4-5, agent 1 listens to leader 1 and agent 3 to leader 2.
pub fn example1_base_topology() -> Topology {
    let links = LeaderLinks::new(5, 2, [(0, 0, 1.0), (2, 1, 1.0)]).expect("valid links");
    Topology::new(AgentGraph::path(5), links).expect("consistent sizes")
}

fn example1_topology(variant: &str) -> Option<(Topology, String)> {
    let base = example1_base_topology();
    let (t, note) = match variant {
        "base" => (
            base,
            "chain 1-2-3-4-5; agent 1 linked to leader 1, agent 3 linked to leader 2",
        ),
        "more-links" => (
            Topology::new(
                base.graph().clone(),
                base.leaders()
                    .with_links([(1, 0, 1.0), (2, 0, 1.0), (3, 0, 1.0)])
                    .ok()?,
            )
            .ok()?,
            "base plus links from agents 2, 3 and 4 to leader 1",
        ),
        "isolated-2" => (
            Topology::new(
                base.graph().without_agent_edges(1),
                base.leaders().with_links([(1, 0, 1.0)]).ok()?,
            )
            .ok()?,
            "base with every edge of agent 2 removed and agent 2 linked to leader 1",
        ),
        "relay-5" => (
            Topology::new(base.graph().with_edge(1, 4, 1.0).ok()?, base.leaders().clone()).ok()?,
            "base plus edge 2-5, so agents 2 and 4 both talk to agent 5",
        ),
        "leaderless-45" => (
            Topology::new(base.graph().without_edge(2, 3), base.leaders().clone()).ok()?,
            "base with edge 3-4 removed: agents 4 and 5 have no path to a leader",
        ),
        _ => return None,
    };
    Some((t, format!("{RECONSTRUCTED}: {note}")))
}

fn example1(variant: &'static str) -> Builtin {
    let (x_init, leaders) = example1_start();
    let claim = match variant {
        "base" => "agents approach the segment between the two leaders",
        "more-links" => "more links to leader 1 move the agents closer to leader 1 than in the base case",
        "isolated-2" => "agent 2, cut off from its neighbours but linked to leader 1, reaches the locality of leader 1",
        "relay-5" => "extra agent-agent links change the final formation but keep it inside the leader segment",
        "leaderless-45" => "agents without a path to any leader do not enter the leader segment",
        _ => "switching among connected topologies still drives every agent into the leader segment",
    };

    let (topologies, notes, schedule) = if variant == "switched" {
        let mut topologies = Vec::new();
        let mut notes = Vec::new();
        for v in ["base", "more-links", "relay-5"] {
            let (t, note) = example1_topology(v).expect("known variant");
            topologies.push(t);
            notes.push(note);
        }
        let schedule = SwitchingSchedule::periodic(0.0, SWITCHED_DWELL, SWITCHED_T_FINAL, &[0, 1, 2])
            .expect("dwell divides the horizon");
        (topologies, notes, schedule)
    } else {
        let (t, note) = example1_topology(variant).expect("known variant");
        (vec![t], vec![note], SwitchingSchedule::fixed(0.0, 0))
    };
    let t_final = if variant == "switched" {
        SWITCHED_T_FINAL
    } else {
        EXAMPLE1_T_FINAL
    };
    let scenario = Scenario::new(ScenarioParts {
        x_init,
        leaders,
        topologies,
        schedule,
        t0: 0.0,
        dt: 0.01,
        t_final,
    })
    .expect("example 1 is a valid scenario");
    Builtin {
        example: 1,
        variant,
        claim,
        scenario,
        notes,
    }
}

fn example2() -> Builtin {
    let x_init = vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 0.0];
    let leaders = LeaderSet::from_points(&[[1.0, 1.0], [2.0, 2.0], [1.0, 2.0]]).expect("three planar leaders");
    let links = LeaderLinks::new(5, 3, [(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)]).expect("valid links");
    let topology = Topology::new(AgentGraph::path(5), links).expect("consistent sizes");
    let note = format!("{RECONSTRUCTED}: chain 1-2-3-4-5; agent 1 linked to all three leaders");
    let scenario = Scenario::new(ScenarioParts {
        x_init,
        leaders,
        topologies: vec![topology],
        schedule: SwitchingSchedule::fixed(0.0, 0),
        t0: 0.0,
        dt: 0.01,
        t_final: EXAMPLE2_T_FINAL,
    })
    .expect("example 2 is a valid scenario");
    Builtin {
        example: 2,
        variant: "base",
        claim: "agents enter the triangle of the three leaders while agents 2-5 stay on a straight line",
        scenario,
        notes: vec![note],
    }
}
