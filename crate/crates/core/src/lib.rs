//! Unmapped tent pitching (UTP) for the 1D wave equation
//! `u_tt = c(x)^2 u_xx` with a two-valued speed, plus the cost and pipeline
//! model used to compare subdomain sizing strategies.
//!
//! The numerical modules are generic over [`Real`]; the aliases below fix
//! the scalar to `f64`, which is what the command line tool uses.

pub mod cli;
pub mod config;
pub mod costmodel;
pub mod decomp;
pub mod error;
pub mod orchestrator;
pub mod scalar;
pub mod solver;
pub mod tents;

pub use config::{H2Rule, InitialData, ProblemConfig, Side};
pub use decomp::{build_decomposition, classify_strategy, m2_star, Color, StrategyTag};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Config = ProblemConfig<f64>;
pub type Decomposition = decomp::Decomposition<f64>;
pub type Front = tents::Front<f64>;
pub type Rect = tents::Rect<f64>;
pub type Grid = solver::Grid<f64>;
pub type GlobalField = solver::GlobalField<f64>;
