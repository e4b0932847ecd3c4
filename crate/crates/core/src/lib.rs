//! Containment control for single-integrator agents guided by several static
//! leaders.
//!
//! Each agent follows the neighbor rule
//!
//! ```text
//! u_i = sum_j a_ij (x_j - x_i) + sum_q b_i^q (x0^q - x_i)
//! ```
//!
//! and, when every component of the agent graph has at least one agent that
//! sees a leader, the group ends up inside the convex hull of the leader
//! positions. This crate holds the pure numerical part: weighted graphs and
//! their Laplacians, a small dense linear-algebra kernel, exact projection onto
//! the leader polytope, a fixed-step integrator for switched topologies, the
//! closed-form equilibrium, and checks that certify the convergence claims on
//! concrete instances.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command line
//! and random test campaigns live in the `containment` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
pub mod geometry;
pub mod graph;
pub mod linalg;

pub use analysis::{Measurement, VerificationReport};
pub use dynamics::{DynamicsError, Equilibrium, Scenario, ScenarioParts, Simulation, SwitchingSchedule, Trajectory};
pub use geometry::{GeometryError, LeaderSet, PolytopeProjection};
pub use graph::{AgentGraph, GraphError, LeaderLinks, Topology};
pub use linalg::{DenseMatrix, LinalgError};
