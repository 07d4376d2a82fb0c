//! Election control in liquid democracy by redirecting delegation arcs.
//!
//! Voters either cast approval ballots (active) or delegate to other voters
//! (passive, possibly to several delegates). Delegations resolve
//! transitively through an unraveling rule, approval scores decide the
//! winner, and a controller with a budget may redirect existing arcs at
//! per-arc costs to make a preferred candidate the unique winner.
//!
//! The crate provides the data model and JSON formats ([`model`]), the
//! three unraveling rules ([`unravel`]), scoring ([`tally`]),
//! approval-class preprocessing ([`preprocess`]), exact and approximate
//! solvers ([`solvers`]), hardness-construction generators
//! ([`reductions`]), and seeded instance generation plus a benchmark
//! harness ([`gen`], [`bench`]).

pub mod bench;
pub mod gen;
pub mod model;
pub mod preprocess;
pub mod reductions;
pub mod solvers;
pub mod tally;
pub mod unravel;

pub use model::{
    Arc, Ballot, CandidateId, Cost, Instance, InstanceStats, Redirection, Solution, UnravelRule,
    VoterId, INFINITE_COST,
};
pub use solvers::{solve, Algo, SolveError, SolveOptions, SolveOutcome};
