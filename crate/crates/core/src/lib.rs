//! Deficiency indices of planar magnetic Schrödinger operators with finitely
//! many Aharonov-Bohm flux points, optionally dressed with Coulomb and
//! inverse-square potentials.
//!
//! * [`model`] parses and validates flux configurations.
//! * [`calculus`] evaluates the closed-form per-singularity indices and sums
//!   them with the background index.
//! * [`weyl`] recomputes every per-harmonic index numerically by counting
//!   square-integrable solutions of the radial equation at both endpoints.
//! * [`odeflow`] is the complex ODE integrator behind the oracle.
//! * [`sweep`] runs closed form and oracle side by side over parameter grids.
//! * [`cli`] is the command-line front end.

pub mod calculus;
pub mod cli;
pub mod model;
pub mod odeflow;
pub mod parallel;
pub mod sweep;
pub mod weyl;

pub use calculus::{singularity_index, total_index, DeficiencyReport, SingularityClass};
pub use model::{build_configuration, Configuration, IndexValue, Singularity};
pub use parallel::Execution;
pub use weyl::{numerical_singularity_index, OracleSettings, SpectralSign};
