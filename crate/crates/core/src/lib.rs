//! Partial-Kantian equilibria for mean-field games.
//!
//! Every player imagines a virtual group, described by a sub-probability
//! measure over the population, that is bound to follow the player's
//! strategy. The group picks that strategy by minimizing a risk-aggregated
//! (exponential certainty equivalent) cost of its members; an equilibrium is
//! reached when each player's prescribed own action matches the population
//! profile.
//!
//! * [`model`] and [`risk`] hold the finite-type data model and group cost.
//! * [`finite`] computes equilibria for finitely many types.
//! * [`continuum`] solves the linear-quadratic game with a continuum of types.
//! * [`oracle`] holds brute-force verifiers.
//! * [`scenarios`] builds the worked examples.

pub mod continuum;
pub mod error;
pub mod finite;
pub mod model;
pub mod oracle;
pub mod risk;
pub mod scenarios;

pub use error::{Error, Result};
pub use model::{
    aggregate_statistic, ActionBox, EquilibriumProfile, FiniteGame, FiniteTypeSpace, GameModel,
    GroupMeasure, QuadraticFishingModel, WeightKernel,
};
pub use risk::{risk_aggregate, RiskFactor};
