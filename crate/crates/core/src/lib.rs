//! Linear quantum trajectories: closed-form evolution operators for three
//! continuously monitored systems, and the brute-force integrators used to
//! check them.
//!
//! * [`hilbert`]: truncated Fock space numerics.
//! * [`paths`]: Wiener paths, Ito sums and their Gaussian statistics.
//! * [`oracle`]: split-step integration of the linear stochastic
//!   Schrödinger equation and a Lindblad master-equation integrator.
//! * [`qnd`]: photon-number (QND) measurement of a cavity mode.
//! * [`momentum`]: momentum measurement of a particle in a linear potential.
//! * [`quadratic`]: quadrature measurement under a quadratic Hamiltonian,
//!   including position measurement of a harmonic oscillator.
//! * [`coherent`]: exponentials of linear and quadratic forms acting on
//!   coherent states.
//! * [`experiments`] and [`validation`]: curve generation and the
//!   acceptance checks driven by the `lqtraj` binary.

// `!(x > 0.0)` is how parameter checks reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherent;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod linalg;
pub mod momentum;
pub mod oracle;
pub mod paths;
pub mod qnd;
pub mod quadratic;
pub mod quadrature;
pub mod special;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
