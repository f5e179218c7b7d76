//! Joint-liability group lending with individual ESE (environmental, social,
//! economic) scores.
//!
//! A borrower's score `E` in `[0, 100]` maps linearly to the probability of a
//! high harvest. The crate computes the lender's break-even repayment and
//! loan ceilings, the score a borrower would choose under risk-neutral and
//! mean-variance preferences, exact and simulated profit moments used to
//! cross-check the closed forms, and a composite score built from farmer
//! metric data.

pub mod cli;
pub mod error;
pub mod mean_variance;
pub mod model;
pub mod optimizer;
pub mod rng;
pub mod scoring;
pub mod sim;
pub mod sweep;
pub mod table;

pub use error::{Error, Result};
pub use mean_variance::{mv_utility, optimal_ese_mv, Moments, RepaymentMode, RiskPreference};
pub use model::{
    binding_repayment, expected_profit_group, expected_profit_pair, loan_ceiling_affordability,
    loan_ceiling_incentive, success_probability, CostModel, GroupSpec, MarketParams, RepaymentContract, ScoreLink,
};
pub use optimizer::{argmax_grid, de_dn, ese_limit, optimal_ese_group, optimal_ese_pair, Optimum, SolverConfig};
pub use scoring::{composite_score, ScoringScheme};
pub use sim::{enumerate_member_profit, simulate_member_profit, SimConfig, SimResult};
