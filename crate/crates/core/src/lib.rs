//! Localized quadripartite entanglement of four-qubit states: 3-tangles,
//! convex-roof searches, the `τ₄` monotone and the checks built on them.

pub mod convexroof;
pub mod error;
pub mod families;
pub mod measures;
pub mod monogamy;
pub mod qstate;
pub mod simplex;
pub mod suites;
pub mod tau4;

pub use error::{Error, Result};
