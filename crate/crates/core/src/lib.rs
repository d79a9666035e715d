//! Planning engine for self-preserving agents.
//!
//! The library solves finite-horizon goal-reachability problems into
//! composable state-time feasibility functions, factorizes planning over
//! Cartesian products of state spaces (physiological chains, binary task
//! vectors, gridworlds) without materializing the product, and selects plans
//! by empowerment gain. A discounted value-iteration baseline and a set of
//! fully pinned example worlds round out the crate.

pub mod baseline;
pub mod empowerment;
pub mod error;
pub mod feasibility;
pub mod hierarchy;
pub mod lifelong;
pub mod model;
pub mod planning;
pub mod product;
pub mod random;
pub mod report;
pub mod scenario;
pub mod vbe;

pub use error::{Result, SpaError};
