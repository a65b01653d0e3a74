//! Local epigraph certificates for the zero sublevel set of a locally Lipschitz
//! function: nondegeneracy tests via sampled generalized gradients, the local
//! graph function `λ`, and a randomized verifier for its properties.

pub mod catalog;
pub mod clarke;
pub mod config;
pub mod epirep;
pub mod error;
pub mod expr;
pub mod instance;
pub mod minnorm;
pub mod oracle;
pub mod signed_distance;
pub mod space;
pub mod verify;

pub use config::NumericConfig;
pub use error::{ConfigError, InstanceError, OracleError};
pub use instance::{Membership, ProblemInstance};
pub use oracle::{FnOracle, FunctionOracle, SharedOracle};
pub use space::{Direction, NormKind, NormedSpace, Point};
