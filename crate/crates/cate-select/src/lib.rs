//! Model-selection harness for heterogeneous treatment effect estimation.
//!
//! The crate covers the full pipeline for studying how CATE estimators,
//! base learners, hyperparameters and evaluation metrics interact:
//!
//! 1. **Data** ([`data`]) — benchmark CSV ingestion, synthetic generators,
//!    and persisted train/test/fold split plans.
//! 2. **Base learners** ([`learners`]) — in-repo L1/L2 linear models, kernel
//!    ridge, CART, random/extremely-randomized forests and gradient-boosted
//!    trees, each with its hyperparameter grid.
//! 3. **Estimators** ([`estimators`]) — S/T/X-Learner, Doubly Robust, DML
//!    and IPSW composed over any base-learner family.
//! 4. **Metrics** ([`metrics`]) — ground-truth test metrics (PEHE, ATE/ATT
//!    error, policy risk) and practical validation metrics (μ-risk, R²,
//!    plugin and matching τ-risk, R-score, validation policy risk).
//! 5. **Harness** ([`harness`]) — grid execution over a split plan,
//!    record aggregation, and the winner/oracle/regret/rank-correlation
//!    analysis queries.
//! 6. **Demo** ([`demo`]) — a compact study showing how observed-outcome
//!    MSE and effect-estimation PEHE can disagree about model ranking.
//!
//! Start with the `examples/` directory: each file is a runnable tour of
//! one capability (`cargo run --example pipeline` is the end-to-end one).

pub mod config;
pub mod data;
pub mod demo;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod numeric;

pub use error::{Error, Result};
