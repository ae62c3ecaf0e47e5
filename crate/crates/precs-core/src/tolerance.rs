//! Numerical tolerances used throughout the crate.
//!
//! Defaults are sized for double precision surviving ~10^4 integration
//! steps; every field can be overridden from the run configuration.

use serde::{Deserialize, Serialize};

/// Tolerance bundle threaded through constructors and checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity residual for operators, max |A - A†|.
    pub hermiticity: f64,
    /// Trace deviation for density operators and state norms.
    pub trace: f64,
    /// Allowed negativity of density-operator eigenvalues.
    pub positivity: f64,
    /// Unitarity residual for propagators and displacement operators.
    pub unitarity: f64,
    /// Coherent-state tail mass permitted beyond the Fock truncation.
    pub truncation_tail: f64,
    /// Residual of the annihilator eigenvalue relation a|α⟩ = α|α⟩.
    pub coherent_residual: f64,
    /// χ² threshold below which a phase-space point is treated as null.
    pub null_chi2: f64,
    /// Allowed deviation of the discretized ∫ dμ χ² from 1.
    pub field_norm: f64,
    /// Allowed max-norm mismatch between the quadrature reconstruction and
    /// the partial trace.
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            trace: 1e-9,
            positivity: 1e-9,
            unitarity: 1e-10,
            truncation_tail: 1e-10,
            coherent_residual: 1e-8,
            null_chi2: 1e-12,
            field_norm: 1e-6,
            reconstruction: 1e-5,
        }
    }
}
