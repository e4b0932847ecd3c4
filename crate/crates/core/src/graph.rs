//! Weighted undirected agent graphs and leader links.
//!
//! Agents and leaders are indexed from zero. An agent graph together with the
//! links from agents to leaders forms a [`Topology`]; the leaders' polytope
//! acts as one virtual node, and the augmented graph is connected when every
//! component of the agent graph has at least one agent that sees a leader.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    SelfLoop {
        agent: usize,
    },
    AgentOutOfRange {
        agent: usize,
        n: usize,
    },
    LeaderOutOfRange {
        leader: usize,
        k: usize,
    },
    /// Weights must be finite and strictly positive.
    InvalidWeight {
        weight: f64,
    },
    DuplicateEdge {
        i: usize,
        j: usize,
    },
    DuplicateLink {
        agent: usize,
        leader: usize,
    },
    AgentCountMismatch {
        graph: usize,
        leaders: usize,
    },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SelfLoop { agent } => write!(f, "self-loop on agent {agent}"),
            Self::AgentOutOfRange { agent, n } => {
                write!(f, "agent index {agent} out of range for {n} agents")
            }
            Self::LeaderOutOfRange { leader, k } => {
                write!(f, "leader index {leader} out of range for {k} leaders")
            }
            Self::InvalidWeight { weight } => {
                write!(f, "weight {weight} is not a finite positive number")
            }
            Self::DuplicateEdge { i, j } => write!(f, "edge ({i}, {j}) given more than once"),
            Self::DuplicateLink { agent, leader } => {
                write!(f, "link from agent {agent} to leader {leader} given more than once")
            }
            Self::AgentCountMismatch { graph, leaders } => {
                write!(f, "agent graph has {graph} agents but leader links are for {leaders}")
            }
        }
    }
}

impl core::error::Error for GraphError {}

fn check_weight(weight: f64) -> Result<(), GraphError> {
    if weight.is_finite() && weight > 0.0 {
        Ok(())
    } else {
        Err(GraphError::InvalidWeight { weight })
    }
}

/// Undirected edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Weighted undirected graph on `n` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl AgentGraph {
    /// Builds a graph from `(i, j, weight)` triples; each unordered pair may
    /// appear once.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut map = BTreeMap::new();
        for (a, b, weight) in edges {
            for agent in [a, b] {
                if agent >= n {
                    return Err(GraphError::AgentOutOfRange { agent, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { agent: a });
            }
            check_weight(weight)?;
            let key = (a.min(b), a.max(b));
            if map.insert(key, weight).is_some() {
                return Err(GraphError::DuplicateEdge { i: key.0, j: key.1 });
            }
        }
        let edges = map.into_iter().map(|((i, j), weight)| Edge { i, j, weight }).collect();
        Ok(Self { n, edges })
    }

    /// Graph on `n` agents with no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// Unit-weight path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self {
            n,
            edges: (1..n)
                .map(|j| Edge {
                    i: j - 1,
                    j,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().find(|e| (e.i, e.j) == key).map(|e| e.weight)
    }

    /// Copy of the graph with one more edge.
    pub fn with_edge(&self, a: usize, b: usize, weight: f64) -> Result<Self, GraphError> {
        Self::new(self.n, self.triples().chain(core::iter::once((a, b, weight))))
    }

    /// Copy of the graph with every edge touching `agent` removed.
    pub fn without_agent_edges(&self, agent: usize) -> Self {
        let edges = self
            .edges
            .iter()
            .filter(|e| e.i != agent && e.j != agent)
            .copied()
            .collect();
        Self { n: self.n, edges }
    }

    /// Copy of the graph without the edge `{a, b}` (if present).
    pub fn without_edge(&self, a: usize, b: usize) -> Self {
        let key = (a.min(b), a.max(b));
        let edges = self.edges.iter().filter(|e| (e.i, e.j) != key).copied().collect();
        Self { n: self.n, edges }
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|e| (e.i, e.j, e.weight))
    }

    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.i, e.j)] = e.weight;
            a[(e.j, e.i)] = e.weight;
        }
        a
    }

    /// `L = D - A`, with `d_i` the weighted degree of agent `i`.
    pub fn laplacian(&self) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.i, e.j)] -= e.weight;
            l[(e.j, e.i)] -= e.weight;
            l[(e.i, e.i)] += e.weight;
            l[(e.j, e.j)] += e.weight;
        }
        l
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (ri, rj) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if ri != rj {
                // Keep the smaller index as root.
                let (lo, hi) = (ri.min(rj), ri.max(rj));
                parent[hi] = lo;
            }
        }
        let mut slot = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(v);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

/// Link from an agent to a leader, `b_i^q > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderLink {
    pub agent: usize,
    pub leader: usize,
    pub weight: f64,
}

/// Links from `n` agents to `k` static leaders.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderLinks {
    n: usize,
    k: usize,
    links: Vec<LeaderLink>,
}

impl LeaderLinks {
    /// Builds the link set from `(agent, leader, weight)` triples.
    pub fn new<I>(n: usize, k: usize, links: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut map = BTreeMap::new();
        for (agent, leader, weight) in links {
            if agent >= n {
                return Err(GraphError::AgentOutOfRange { agent, n });
            }
            if leader >= k {
                return Err(GraphError::LeaderOutOfRange { leader, k });
            }
            check_weight(weight)?;
            if map.insert((agent, leader), weight).is_some() {
                return Err(GraphError::DuplicateLink { agent, leader });
            }
        }
        let links = map
            .into_iter()
            .map(|((agent, leader), weight)| LeaderLink { agent, leader, weight })
            .collect();
        Ok(Self { n, k, links })
    }

    pub fn none(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            links: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Links sorted by `(agent, leader)`.
    pub fn links(&self) -> &[LeaderLink] {
        &self.links
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.links.iter().map(|l| (l.agent, l.leader, l.weight))
    }

    pub fn weight(&self, agent: usize, leader: usize) -> Option<f64> {
        self.links
            .iter()
            .find(|l| l.agent == agent && l.leader == leader)
            .map(|l| l.weight)
    }

    /// Copy with extra links added; existing pairs are rejected.
    pub fn with_links<I>(&self, extra: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::new(self.n, self.k, self.triples().chain(extra))
    }

    /// `b_i = sum_q b_i^q` for every agent.
    pub fn total_weights(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n];
        for l in &self.links {
            b[l.agent] += l.weight;
        }
        b
    }

    pub fn is_linked(&self, agent: usize) -> bool {
        self.links.iter().any(|l| l.agent == agent)
    }
}

/// One interconnection pattern: agent graph plus leader links.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    graph: AgentGraph,
    leaders: LeaderLinks,
}

impl Topology {
    pub fn new(graph: AgentGraph, leaders: LeaderLinks) -> Result<Self, GraphError> {
        if graph.n() != leaders.n() {
            return Err(GraphError::AgentCountMismatch {
                graph: graph.n(),
                leaders: leaders.n(),
            });
        }
        Ok(Self { graph, leaders })
    }

    pub fn graph(&self) -> &AgentGraph {
        &self.graph
    }

    pub fn leaders(&self) -> &LeaderLinks {
        &self.leaders
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.leaders.k()
    }

    /// True iff every component of the agent graph contains an agent linked to
    /// some leader.
    pub fn is_bar_connected(&self) -> bool {
        self.graph
            .components()
            .iter()
            .all(|c| c.iter().any(|&i| self.leaders.is_linked(i)))
    }

    /// Components of the agent graph that see no leader.
    pub fn leaderless_components(&self) -> Vec<Vec<usize>> {
        self.graph
            .components()
            .into_iter()
            .filter(|c| !c.iter().any(|&i| self.leaders.is_linked(i)))
            .collect()
    }

    /// Diagonal `B^q` with `b_i^q` on linked agents.
    pub fn leader_matrix(&self, q: usize) -> Result<DenseMatrix, GraphError> {
        if q >= self.k() {
            return Err(GraphError::LeaderOutOfRange { leader: q, k: self.k() });
        }
        let mut b = DenseMatrix::zeros(self.n(), self.n());
        for l in self.leaders.links().iter().filter(|l| l.leader == q) {
            b[(l.agent, l.agent)] = l.weight;
        }
        Ok(b)
    }

    /// `H = L + sum_q B^q`.
    pub fn composite_matrix(&self) -> DenseMatrix {
        let mut h = self.graph.laplacian();
        for (i, b) in self.leaders.total_weights().into_iter().enumerate() {
            h[(i, i)] += b;
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;

    fn path3() -> AgentGraph {
        AgentGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn topo(g: AgentGraph, k: usize, links: &[(usize, usize, f64)]) -> Topology {
        let n = g.n();
        Topology::new(g, LeaderLinks::new(n, k, links.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let l = path3().laplacian();
        let want = [1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0];
        assert_eq!(l.as_slice(), want);
        assert_eq!(AgentGraph::empty(3).laplacian(), DenseMatrix::zeros(3, 3));
        let g = AgentGraph::new(2, [(0, 1, 2.0)]).unwrap();
        assert_eq!(g.laplacian().as_slice(), [2.0, -2.0, -2.0, 2.0]);
    }

    #[test]
    fn components_examples() {
        assert_eq!(path3().components(), vec![vec![0, 1, 2]]);
        let g = AgentGraph::new(4, [(0, 1, 1.0)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2], vec![3]]);
        let triangles = AgentGraph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(triangles.components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn components_ordered_by_smallest_member() {
        let g = AgentGraph::new(5, [(4, 0, 1.0), (3, 1, 1.0)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 4], vec![1, 3], vec![2]]);
    }

    #[test]
    fn bar_connectivity_examples() {
        assert!(topo(path3(), 1, &[(0, 0, 1.0)]).is_bar_connected());
        let split = AgentGraph::new(3, [(0, 1, 1.0)]).unwrap();
        let t = topo(split, 1, &[(0, 0, 1.0)]);
        assert!(!t.is_bar_connected());
        assert_eq!(t.leaderless_components(), vec![vec![2]]);
        let t = topo(AgentGraph::empty(3), 2, &[(0, 0, 1.0), (1, 0, 1.0), (2, 1, 1.0)]);
        assert!(t.is_bar_connected());
    }

    #[test]
    fn leader_matrix_examples() {
        let t = topo(AgentGraph::empty(2), 2, &[(0, 0, 1.0)]);
        assert_eq!(t.leader_matrix(0).unwrap(), DenseMatrix::from_diagonal(&[1.0, 0.0]));
        assert_eq!(t.leader_matrix(1).unwrap(), DenseMatrix::zeros(2, 2));
        assert!(matches!(t.leader_matrix(2), Err(GraphError::LeaderOutOfRange { .. })));
        let t = topo(AgentGraph::empty(2), 1, &[(1, 0, 0.5)]);
        assert_eq!(t.leader_matrix(0).unwrap(), DenseMatrix::from_diagonal(&[0.0, 0.5]));
    }

    #[test]
    fn composite_matrix_is_laplacian_plus_leader_diagonals() {
        let t = topo(AgentGraph::new(2, [(0, 1, 1.0)]).unwrap(), 1, &[(0, 0, 1.0)]);
        assert_eq!(t.composite_matrix().as_slice(), [2.0, -1.0, -1.0, 1.0]);
        let t = topo(AgentGraph::empty(1), 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        assert_eq!(t.composite_matrix().as_slice(), [2.0]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            AgentGraph::new(2, [(1, 1, 1.0)]),
            Err(GraphError::SelfLoop { agent: 1 })
        );
        assert!(matches!(
            AgentGraph::new(2, [(0, 2, 1.0)]),
            Err(GraphError::AgentOutOfRange { agent: 2, n: 2 })
        ));
        assert!(matches!(
            AgentGraph::new(2, [(0, 1, 0.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            AgentGraph::new(2, [(0, 1, f64::NAN)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert_eq!(
            AgentGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateEdge { i: 0, j: 1 })
        );
        assert_eq!(
            LeaderLinks::new(2, 1, [(0, 0, 1.0), (0, 0, 1.0)]),
            Err(GraphError::DuplicateLink { agent: 0, leader: 0 })
        );
        assert!(matches!(
            LeaderLinks::new(2, 1, [(0, 1, 1.0)]),
            Err(GraphError::LeaderOutOfRange { .. })
        ));
        assert!(matches!(
            Topology::new(AgentGraph::empty(2), LeaderLinks::none(3, 1)),
            Err(GraphError::AgentCountMismatch { .. })
        ));
    }

    #[test]
    fn adjacency_is_symmetric_with_zero_diagonal() {
        let g = AgentGraph::new(4, [(0, 1, 0.5), (2, 1, 2.0), (3, 0, 1.5)]).unwrap();
        let a = g.adjacency();
        assert_eq!(a.max_asymmetry(), 0.0);
        assert!((0..4).all(|i| a[(i, i)] == 0.0));
    }

    #[test]
    fn single_node_spectrum() {
        assert_eq!(sym_eigenvalues(&AgentGraph::empty(1).laplacian()).unwrap(), [0.0]);
    }
}
