//! Numerical engine for proportional cost sharing inside renewable-energy
//! aggregates.
//!
//! An aggregate of suppliers commits a joint forward contract, realizes
//! uncertain production, and is charged (or paid) by the system operator for
//! the net deviation. This crate provides:
//!
//! * the market primitives — imbalance prices, contract/supply/deviation
//!   profiles, the system cost function ([`market`]);
//! * discrete production models and exact expectation machinery ([`prob`]);
//! * two candidate cost functions for splitting the system charge
//!   proportionally among suppliers, plus machine checkers for the mechanism
//!   axioms: budget balance, ex-post individual rationality, no exploitation,
//!   fairness and monotonicity ([`mechanism`]);
//! * the contract game: per-supplier expected payoffs, best responses on a
//!   contract grid, pure-strategy ε-Nash enumeration and payoff-shape scans
//!   ([`game`]).
//!
//! Everything is pure `f64` arithmetic over owned buffers; the crate is
//! `no_std` (with `alloc`) and all operations are safe to call concurrently.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod game;
pub mod market;
pub mod mechanism;
pub mod prob;

pub use error::{Error, QuantityKind, Result};
pub use game::{
    BestResponse, Equilibrium, EquilibriumReport, GameSpec, ShapeClass, ShapeScan, DEFAULT_EPSILON,
    DEFAULT_PROFILE_CAP,
};
pub use market::{
    aggregate_expected_payoff, deviations, system_cost, ContractProfile, DeviationProfile,
    ImbalancePrices, SupplyProfile,
};
pub use mechanism::{
    check_all, check_budget_balance, check_expost_ir, check_fairness, check_monotonicity,
    check_no_exploitation, cost_star, cost_tilde, find_ir_violation, shares, Axiom, AxiomReport,
    AxiomWitness, DeviationSampler, IrViolation, MechanismKind, Scaling, ShareOutcome,
};
pub use prob::{
    DiscreteMarginal, DiscreteSupplyModel, JointModel, JointOutcome, Supplier,
    DEFAULT_ENUMERATION_CAP,
};
