//! Adaptive greedy for stochastic set cover.
//!
//! Items have a cost and a random state (a subset of the ground set) drawn
//! independently from an explicit finite distribution. A policy evaluates
//! items one at a time, sees each revealed state, and stops once the union
//! of revealed states is guaranteed to cover everything any item could
//! cover. The crate provides:
//!
//! * [`instance`]: the model, marginals, realizations and cover checks,
//! * [`greedy`]: the adaptive greedy policy with a fully attributed trace,
//! * [`reduction`]: the edge-set reduction from imperfect to perfect coverage,
//! * [`oracle`]: exact optimal costs and exact greedy statistics,
//! * [`generators`]: random, point-mass and tight instance families,
//! * [`harness`]: seeded Monte Carlo trials,
//! * [`format`]: the JSON instance format.
//!
//! All probabilities and costs are exact [`Rational`]s.

pub mod format;
pub mod generators;
pub mod greedy;
pub mod harness;
pub mod instance;
pub mod oracle;
pub mod rational;
pub mod reduction;
pub mod subset;

pub use greedy::{greedy_cost, run_greedy, select_next, unitprice, Greedy, GreedyError, GreedyStep, GreedyTrace, ResidualSystem};
pub use instance::{
    enumerate_realizations, is_certified_cover, is_perfect_coverage, is_valid_cover, marginals, sample_realization,
    validate_instance, Instance, Item, ItemId, MarginalTable, Realization, StateDistribution, TooLarge,
    ValidationReport, Violation,
};
pub use oracle::{
    exact_greedy_report, exact_imperfect_report, harmonic, optimal_adaptive_cost, Caps, OracleError, OracleReport,
};
pub use rational::Rational;
pub use reduction::{induced_bipartite_graph, mu, reduce_instance, solve_imperfect, BipartiteGraph, Edge, ReducedInstance};
pub use subset::ElementSubset;
