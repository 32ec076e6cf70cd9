//! Discovery of acquisition functions for grid-based Bayesian optimization.
//!
//! The crate is organised bottom-up:
//!
//! - [`gp`]: exact zero-mean Gaussian-process regression with an RBF/ARD kernel.
//! - [`sobol`] and [`objectives`]: evaluation grids, benchmark functions and presets.
//! - [`acquisition`]: builtin and discovered acquisition policies.
//! - [`afdsl`]: a small total expression language for candidate policies.
//! - [`bo`]: the evaluation loop, the fitness score and regret curves.
//! - [`programs_db`]: the island-model program population.
//! - [`mutation`]: prompt assembly plus remote and local candidate generators.
//! - [`search`]: the outer evolutionary loop.

pub mod acquisition;
pub mod afdsl;
pub mod bo;
pub mod gp;
pub mod linalg;
pub mod mutation;
pub mod objectives;
pub mod programs_db;
pub mod search;
pub mod seeds;
pub mod sobol;

mod stats;

pub use acquisition::{AfId, AfInput};
pub use afdsl::Program;
pub use bo::{AfProgram, BoRunResult, RegretCurve};
pub use gp::{Dataset, GpHyperparams, Posterior};
pub use linalg::Matrix;
pub use objectives::{ObjectiveInstance, ObjectiveSpec, Transform};
