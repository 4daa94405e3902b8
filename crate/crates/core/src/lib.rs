//! Two-line discrete car parking: rate table, kinetic Monte Carlo
//! simulator, closed density ODEs, and an exact small-ring oracle.
//!
//! Cars of length 2 arrive at rate one per site of a ring and park in one
//! of two lines subject to exclusion; the crate implements the two model
//! variants (with and without screening), solves their 9-dimensional
//! density ODE systems, simulates the underlying Markov jump process
//! exactly, and cross-validates the three routes against each other.

pub mod analysis;
pub mod error;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod simulator;

pub use error::Error;
pub use model::{
    attempt_outcome, transition_rate, ModelVariant, NeighborhoodTriple, SiteState, TransitionKind,
};
