//! Stable marriage and stable roommates under control: adding agents,
//! deleting agents, or deleting acceptability so that an agent, a pair, or
//! a matching becomes part of a stable outcome.
//!
//! The crate provides
//! - instances, matchings, and a line-oriented file format ([`instance`]),
//! - blocking pairs and exhaustive enumeration ([`stability`]),
//! - Gale-Shapley, Irving, and stable partitions ([`classic`]),
//! - polynomial-time control solvers ([`poly`]) and an exhaustive solver
//!   for every action and goal ([`exact`]),
//! - hardness gadgets built from Clique and Independent Set
//!   ([`reductions`]) and seeded random inputs ([`generators`]).

pub mod classic;
pub mod control;
pub mod error;
pub mod exact;
pub mod generators;
pub mod instance;
pub mod poly;
pub mod reductions;
pub mod stability;

pub use control::{
    apply_actions, goal_holds, goal_holds_with, parse_query, serialize_query, ControlAction,
    ControlGoal, ControlOutcome, ControlQuery, GoalKind, GoalOracle, Problem, Witness,
};
pub use error::{Error, Result};
pub use instance::{AgentId, Kind, Matching, Pair, RoommatesInstance, Side};
