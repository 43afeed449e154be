//! Solver for markets in which firms price a base good while its hidden
//! add-on charge (or perk) is anticipated differently by consumers with
//! different models of how prices relate to fundamentals.
//!
//! The crate builds belief transition matrices from coarse conditioning
//! sets, explicit state partitions, or perfect causal DAGs; solves the
//! induced fixed-point equation for the per-state expected add-on; and
//! derives prices, supply thresholds, welfare accounts, and a battery of
//! comparative-statics checks on top.

pub mod analysis;
pub mod belief;
pub mod error;
pub mod market;
pub mod random;
pub mod scenario;
pub mod solver;
pub mod state;

pub use belief::{
    belief_with_signal, coarse_to_beta, dag_to_beta, partition_to_beta, type_to_beta, BeliefModel,
    CausalDag, CognitiveType, DagNode, DagViolation, Joint, SignalBelief, StatePartition,
    TransitionMatrix,
};
pub use error::{Error, Result};
pub use market::{
    addon_support, check_conditions, mean_addon, pi_star, price_from_addon, ree_solution,
    ConditionReport, MarketSpec, Variant,
};
pub use solver::{
    bellman_operator, brute_force_oracle, compute_betas, policy_iteration, policy_value, solve,
    solve_default, value_iteration, value_iteration_from, EquilibriumSolution, SolveDiagnostics,
    Welfare,
};
pub use state::{StateSpace, Variable};
