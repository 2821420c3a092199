//! Fair division of maximum flows in bipartite supply/demand networks.
//!
//! A problem is a bipartite network: suppliers with peak supplies, demanders
//! with peak demands, and capacitated edges between them. Among all maximum
//! flows, the mechanisms here pick distinguished ones: [`edgefair::edge_fair`]
//! computes the lexicographically optimal (max-min, recursively) edge flow,
//! [`egalitarian::egalitarian`] equalizes node allocations on the rationed
//! side. [`axioms`] and [`strategic`] audit mechanisms against fairness and
//! incentive properties.
//!
//! Every quantity is an exact rational ([`rational::Rat`]); nothing in this
//! crate rounds.

#![forbid(unsafe_code)]

pub mod axioms;
pub mod edgefair;
pub mod egalitarian;
mod engine;
pub mod fixtures;
pub mod flownet;
pub mod mechanism;
pub mod order;
mod parametric;
pub mod problem;
pub mod rational;
mod residual;
pub mod sampling;
pub mod strategic;

pub use problem::{parse_problem, Allocation, Capacity, Flow, Problem};
pub use rational::Rat;
