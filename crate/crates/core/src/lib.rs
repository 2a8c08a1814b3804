//! Poisson brackets on coordinate charts of elliptic zastava spaces.
//!
//! The crate evaluates theta and Weierstrass functions for a lattice
//! `Z + Z tau`, builds bracket matrices on rational, Coulomb and elliptic
//! charts over a simply-laced quiver, transports the Coulomb bracket along
//! the theta-product change of coordinates, and checks the resulting
//! identities on seeded random samples.

pub mod charts;
pub mod elliptic;
pub mod error;
pub mod local;
pub mod quiver;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
