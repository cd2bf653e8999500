//! Multi-order game interactions of black-box scoring functions.
//!
//! The crate treats a model as a cooperative game over `n` players (input
//! regions) and measures how strongly pairs of players interact in contexts of
//! each size `m`. From those interactions it builds the relative strength
//! profile `J^(m)` and the AMRIS robustness proxy, and it provides synthetic
//! reward-table games for checking how augmentation-like transformations
//! reshape the profile.
//!
//! Layout:
//! - [`coalition`], [`game`], [`cache`]: players, coalitions and the evaluation contract.
//! - [`exact`]: enumerative Shapley values, interaction indices and the output decomposition.
//! - [`estimator`]: Monte Carlo estimates with counter-based random streams ([`rng`]).
//! - [`strength`], [`search`], [`stats`]: `J^(m)`, AMRIS and the parameter grid search.
//! - [`augment`]: reward-table games and augmentation checks.
//! - [`scorer`]: masking concrete inputs and talking to external scorers.

pub mod augment;
pub mod cache;
pub mod coalition;
pub mod combinatorics;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod game;
pub mod rng;
pub mod scorer;
pub mod search;
pub mod stats;
pub mod strength;

pub use coalition::{Coalition, GameSpec};
pub use error::{Error, Result};
pub use game::{delta_v, AdditiveGame, AndGame, FnGame, Game, SumGame, TableGame};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
