//! TOML scenario files.
//!
//! Agents, leaders and topologies are numbered from 1 in the file and from 0
//! in memory. A minimal file:
//!
//! ```toml
//! m = 1
//! t0 = 0.0
//! t_final = 50.0
//! dt = 0.01
//!
//! [[agents]]
//! id = 1
//! x = [5.0]
//!
//! [[leaders]]
//! id = 1
//! x = [1.0]
//!
//! [[topologies]]
//! id = 1
//! edges = []
//! leader_links = [[1, 1, 1.0]]
//!
//! [[schedule]]
//! t = 0.0
//! topology = 1
//! ```
//!
//! Edge and link weights may be omitted (`[i, j]`), in which case they are 1.

use std::path::Path;

use containment_core::dynamics::{DynamicsError, ScenarioParts, DEFAULT_DT};
use containment_core::{AgentGraph, LeaderLinks, LeaderSet, Scenario, SwitchingSchedule, Topology};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub m: usize,
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub agents: Vec<PointEntry>,
    pub leaders: Vec<PointEntry>,
    pub topologies: Vec<TopologyEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduleEntry>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub id: usize,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyEntry {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default)]
    pub edges: Vec<Link>,
    #[serde(default)]
    pub leader_links: Vec<Link>,
}

/// `[a, b]` or `[a, b, weight]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Link {
    Weighted(usize, usize, f64),
    Unit(usize, usize),
}

impl Link {
    fn parts(self) -> (usize, usize, f64) {
        match self {
            Link::Weighted(a, b, w) => (a, b, w),
            Link::Unit(a, b) => (a, b, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub t: f64,
    pub topology: usize,
}

impl ScenarioFile {
    /// Parses TOML text; syntax, type and unknown-key problems are
    /// [`CliError::Parse`] with the position in the message.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let position = e.span().map(|span| line_col(text, span.start));
            CliError::Parse {
                origin: origin.to_string(),
                position,
                message: e.message().to_string(),
            }
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_toml()).map_err(|e| CliError::io(path, e))
    }

    /// Builds the validated scenario; inconsistencies are
    /// [`CliError::InvalidScenario`] naming the offending key.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let m = self.m;
        if m == 0 {
            return Err(invalid("m", "space dimension must be at least 1"));
        }
        let x_init = stacked_points("agents", &self.agents, m)?;
        let n = self.agents.len();
        if n == 0 {
            return Err(invalid("agents", "at least one agent is required"));
        }
        let leaders = LeaderSet::new(m, stacked_points("leaders", &self.leaders, m)?)
            .map_err(|e| invalid("leaders", &e.to_string()))?;
        let k = leaders.k();

        let mut topologies = Vec::with_capacity(self.topologies.len());
        for (idx, t) in self.topologies.iter().enumerate() {
            let key = format!("topologies[{idx}]");
            if t.id != idx + 1 {
                return Err(invalid(
                    &format!("{key}.id"),
                    &format!("expected id {}, got {}", idx + 1, t.id),
                ));
            }
            let edges = one_based(&t.edges, &format!("{key}.edges"))?;
            let graph = AgentGraph::new(n, edges).map_err(|e| invalid(&format!("{key}.edges"), &e.to_string()))?;
            let links = one_based(&t.leader_links, &format!("{key}.leader_links"))?;
            let links =
                LeaderLinks::new(n, k, links).map_err(|e| invalid(&format!("{key}.leader_links"), &e.to_string()))?;
            topologies.push(Topology::new(graph, links).map_err(|e| invalid(&key, &e.to_string()))?);
        }
        if topologies.is_empty() {
            return Err(invalid("topologies", "at least one topology is required"));
        }

        let schedule = if self.schedule.is_empty() {
            if topologies.len() > 1 {
                return Err(invalid("schedule", "required when more than one topology is given"));
            }
            SwitchingSchedule::fixed(self.t0, 0)
        } else {
            let mut entries = Vec::with_capacity(self.schedule.len());
            for (idx, e) in self.schedule.iter().enumerate() {
                if e.topology == 0 {
                    return Err(invalid(&format!("schedule[{idx}].topology"), "topology ids start at 1"));
                }
                entries.push((e.t, e.topology - 1));
            }
            SwitchingSchedule::new(entries).map_err(|e| invalid("schedule", &e.to_string()))?
        };

        Scenario::new(ScenarioParts {
            x_init,
            leaders,
            topologies,
            schedule,
            t0: self.t0,
            dt: self.dt,
            t_final: self.t_final,
        })
        .map_err(|e| scenario_error(&e))
    }

    pub fn from_scenario(s: &Scenario, description: Option<String>) -> Self {
        let m = s.m();
        let agents = s
            .x_init()
            .chunks_exact(m)
            .enumerate()
            .map(|(i, x)| PointEntry {
                id: i + 1,
                x: x.to_vec(),
            })
            .collect();
        let leaders = s
            .leaders()
            .positions()
            .enumerate()
            .map(|(q, x)| PointEntry {
                id: q + 1,
                x: x.to_vec(),
            })
            .collect();
        let topologies = s
            .topologies()
            .iter()
            .enumerate()
            .map(|(p, t)| TopologyEntry {
                id: p + 1,
                note: None,
                edges: t
                    .graph()
                    .triples()
                    .map(|(i, j, w)| Link::Weighted(i + 1, j + 1, w))
                    .collect(),
                leader_links: t
                    .leaders()
                    .triples()
                    .map(|(i, q, w)| Link::Weighted(i + 1, q + 1, w))
                    .collect(),
            })
            .collect();
        let schedule = s
            .schedule()
            .entries()
            .iter()
            .map(|&(t, p)| ScheduleEntry { t, topology: p + 1 })
            .collect();
        Self {
            description,
            m,
            t0: s.t0(),
            t_final: s.t_final(),
            dt: s.dt(),
            agents,
            leaders,
            topologies,
            schedule,
        }
    }
}

/// [`CliError::InvalidScenario`] keyed by the file entry the error is about.
pub fn scenario_error(e: &DynamicsError) -> CliError {
    use DynamicsError::*;
    let key = match e {
        NoAgents | StateLength { .. } | NonFiniteState => "agents",
        Geometry(_) => "leaders",
        InvalidStep { .. } => "dt",
        InvalidHorizon { .. } => "t_final",
        Graph(_) | Linalg(_) | NoTopologies | TopologyAgentCount { .. } | TopologyLeaderCount { .. } => "topologies",
        EmptySchedule
        | ScheduleStart { .. }
        | ScheduleNotIncreasing { .. }
        | UnknownTopology { .. }
        | SwitchOffGrid { .. }
        | SwitchAfterHorizon { .. }
        | BeforeStart { .. } => "schedule",
    };
    invalid(key, &e.to_string())
}

fn invalid(key: &str, message: &str) -> CliError {
    CliError::InvalidScenario {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn stacked_points(key: &str, entries: &[PointEntry], m: usize) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::with_capacity(entries.len() * m);
    for (idx, e) in entries.iter().enumerate() {
        if e.id != idx + 1 {
            return Err(invalid(
                &format!("{key}[{idx}].id"),
                &format!("expected id {}, got {}", idx + 1, e.id),
            ));
        }
        if e.x.len() != m {
            return Err(invalid(
                &format!("{key}[{idx}].x"),
                &format!("expected {m} coordinates, got {}", e.x.len()),
            ));
        }
        out.extend_from_slice(&e.x);
    }
    Ok(out)
}

fn one_based(links: &[Link], key: &str) -> Result<Vec<(usize, usize, f64)>, CliError> {
    links
        .iter()
        .enumerate()
        .map(|(idx, l)| {
            let (a, b, w) = l.parts();
            if a == 0 || b == 0 {
                Err(invalid(&format!("{key}[{idx}]"), "ids start at 1"))
            } else {
                Ok((a - 1, b - 1, w))
            }
        })
        .collect()
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}
