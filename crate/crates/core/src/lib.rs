//! Partial optimality for MAP inference in discrete graphical models.
//!
//! A relaxation solution is iteratively pruned until the remaining committed
//! part is provably optimal: whatever the labels elsewhere, some global
//! minimizer agrees with it.

pub mod boundary;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod persistency;
pub mod polytope;
pub mod solvers;

pub use boundary::{build_augmented_model, AugmentedModel, BoundarySets, Mode};
pub use error::{Error, Result};
pub use model::{GraphicalModel, Labeling, ModelBuilder, PartialLabeling, Reparametrization};
pub use persistency::{prune, CriterionVerdict, PersistencyResult};
pub use solvers::{SolverConfig, SolverKind, SolverOutput};
