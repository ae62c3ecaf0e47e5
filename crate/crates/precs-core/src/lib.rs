//! Coherent-state phase-space representation of a qubit coupled to a bosonic
//! mode, with the point-local Lindblad operators that follow from the
//! microscopic Hamiltonian, and integrators for both the exact joint dynamics
//! and the classical-limit GKSL master equations.
//!
//! Module map:
//! - [`operator`] — dense complex operator algebra (tensor products, partial
//!   trace, matrix exponentials, Hermitian spectra);
//! - [`bosonic`] — truncated Fock space, Glauber coherent states, displacement
//!   operators, and phase-space quadrature grids for ∫ d²α/π;
//! - [`precs`] — the decomposition of a joint pure state into the weighted
//!   ensemble {χ²(α), |φ(α)⟩} and its quadrature reconstruction;
//! - [`lindblad`] — Wirtinger/Poisson machinery and the α-local operators
//!   F_k(α), L_k(α) assembled into the GKSL-form dissipator;
//! - [`dynamics`] — exact joint propagation, coherent-label flow, and
//!   fixed-step RK4 master-equation integrators;
//! - [`models`] — the pure-dephasing and Jaynes-Cummings models with their
//!   closed-form classical-limit coefficients and rates;
//! - [`config`] / [`cli`] — JSON run configuration and the subcommand
//!   implementations behind the `precs` binary.

pub mod bosonic;
pub mod cli;
pub mod config;
pub mod dynamics;
mod eig;
pub mod error;
pub mod lindblad;
pub mod models;
pub mod operator;
pub mod precs;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
