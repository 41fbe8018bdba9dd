//! Simulation of NOON-state synthesis on two microwave resonators coupled to
//! a ladder-type (g, e, a) superconducting qutrit.
//!
//! The crate compiles the pulse/swap schedule ([`protocol`]), propagates the
//! joint state exactly segment by segment ([`dynamics`]), and checks every
//! boundary against closed-form ideal gates ([`oracle`]).

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod oracle;
pub mod pipeline;
pub mod protocol;
pub mod sweep;

pub use error::{Error, Result};
