//! Numerical laboratory for the balanced energy of Allen-Cahn broken phase
//! transitions on the circle.
//!
//! The crate is organised bottom-up: [`scalar_field`] and [`elliptic_oracle`]
//! hold closed forms, [`bvp_engine`] the generic grid machinery, [`solver_1d`]
//! the Dirichlet and periodic solutions, [`balanced_energy`] the variations and
//! index counts, [`profiles`] the half-line linearized profiles, and
//! [`nonexistence`] the absolute-minimizer constructions. [`experiments`] drives
//! the reproducible sweeps used by the `bel` binary.

pub mod balanced_energy;
pub mod bvp_engine;
pub mod elliptic_oracle;
pub mod error;
pub mod experiments;
pub mod nonexistence;
pub mod profiles;
pub mod scalar_field;
pub mod solver_1d;

pub use error::{Error, Result};
