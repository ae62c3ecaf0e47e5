//! Decomposition of a joint qubit⊗boson pure state into the parametric
//! ensemble {χ²(α), |φ(α)⟩} over a phase-space grid, and its quadrature
//! reconstruction of the reduced qubit state.
//!
//! For |ψ⟩ = Σ_{kξ} c_{kξ}|k⟩⊗|ξ⟩ the per-point data are
//!
//! ```text
//! a_k(α) = Σ_ξ c_{kξ} ⟨α|ξ⟩,     χ²(α) = |a_+|² + |a_−|²,
//! |φ(α)⟩ = (a_+, a_−)/χ,         γ_k(α) = |a_k|²/χ²,
//! ```
//!
//! with Σ_j w_j χ²_j = 1 on a covering grid, and
//! ρ_Γ = Σ_j w_j χ²_j |φ_j⟩⟨φ_j| equal to the partial trace of |ψ⟩⟨ψ|.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bosonic::{bra_coefficients, PhaseSpaceGrid};
use crate::error::{Error, Result};
use crate::operator::{partial_trace_env, DensityChecks, DensityOperator, Operator, Signature};
use crate::tolerance::Tolerances;

/// Complex amplitude table c_{kξ} with k ∈ {+, −} and ξ a Fock index.
#[derive(Debug, Clone)]
pub struct JointState {
    amps: Array2<C64>,
}

impl JointState {
    /// Wrap an amplitude table of shape (2, n_max); must be normalized.
    pub fn new(amps: Array2<C64>, tol: &Tolerances) -> Result<Self> {
        if amps.nrows() != 2 || amps.ncols() == 0 {
            return Err(Error::Signature(format!(
                "joint state table must be 2 × n_max, got {} × {}",
                amps.nrows(),
                amps.ncols()
            )));
        }
        let n2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > tol.trace {
            return Err(Error::Contract(format!(
                "joint state norm² = {n2} deviates from 1 beyond {:.1e}",
                tol.trace
            )));
        }
        Ok(JointState { amps })
    }

    /// Product state (qubit amplitudes) ⊗ (environment vector), normalized.
    pub fn from_product(qubit: [C64; 2], env: &Array1<C64>, tol: &Tolerances) -> Result<Self> {
        let qn = qubit[0].norm_sqr() + qubit[1].norm_sqr();
        let en: f64 = env.iter().map(|z| z.norm_sqr()).sum();
        if qn <= 0.0 || en <= 0.0 {
            return Err(Error::Contract("product state with zero factor".to_string()));
        }
        let scale = C64::new(1.0 / (qn * en).sqrt(), 0.0);
        let mut amps = Array2::zeros((2, env.len()));
        for k in 0..2 {
            for (xi, e) in env.iter().enumerate() {
                amps[(k, xi)] = qubit[k] * e * scale;
            }
        }
        JointState::new(amps, tol)
    }

    pub fn n_max(&self) -> usize {
        self.amps.ncols()
    }

    pub fn amplitude(&self, k: usize, xi: usize) -> C64 {
        self.amps[(k, xi)]
    }

    pub fn amplitudes(&self) -> &Array2<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Flatten to the joint vector with row = k·n_max + ξ.
    pub fn as_vector(&self) -> Array1<C64> {
        let n = self.n_max();
        let mut v = Array1::zeros(2 * n);
        for k in 0..2 {
            for xi in 0..n {
                v[k * n + xi] = self.amps[(k, xi)];
            }
        }
        v
    }

    /// Rebuild from a joint vector (inverse of [`as_vector`](Self::as_vector)).
    pub fn from_vector(v: &Array1<C64>, tol: &Tolerances) -> Result<Self> {
        if !v.len().is_multiple_of(2) || v.is_empty() {
            return Err(Error::Signature(format!(
                "joint vector length {} is not 2·n_max",
                v.len()
            )));
        }
        let n = v.len() / 2;
        let mut amps = Array2::zeros((2, n));
        for k in 0..2 {
            for xi in 0..n {
                amps[(k, xi)] = v[k * n + xi];
            }
        }
        JointState::new(amps, tol)
    }

    /// |ψ⟩⟨ψ| as a joint operator.
    pub fn projector(&self) -> Operator {
        let v = self.as_vector();
        let d = v.len();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = v[i] * v[j].conj();
            }
        }
        Operator::new(mat, Signature::Joint(self.n_max())).expect("square joint matrix")
    }

    /// Reduced qubit state by partial trace over the mode.
    pub fn reduced_qubit(&self) -> Operator {
        partial_trace_env(&self.projector()).expect("projector is joint")
    }
}

/// Per-point record of the decomposition.
#[derive(Debug, Clone, Copy)]
pub struct ParametricPoint {
    pub alpha: C64,
    /// a_k(α) for k ∈ {+, −}.
    pub a: [C64; 2],
    /// χ²(α) = |a_+|² + |a_−|².
    pub chi2: f64,
    /// Normalized qubit state (a fixed reference below the null threshold,
    /// where it carries zero weight and is never used).
    pub phi: [C64; 2],
    /// γ_k = |a_k|²/χ²; γ_+ + γ_− = 1 wherever χ² is above the null threshold.
    pub gamma: [f64; 2],
}

impl ParametricPoint {
    /// χ²|φ⟩⟨φ| assembled directly from the a_k, with no renormalization
    /// drift: entries are a_i a_j*.
    pub fn weight_operator(&self) -> Operator {
        Operator::qubit([
            [self.a[0] * self.a[0].conj(), self.a[0] * self.a[1].conj()],
            [self.a[1] * self.a[0].conj(), self.a[1] * self.a[1].conj()],
        ])
    }
}

/// The decomposition sampled over a [`PhaseSpaceGrid`], in grid order.
#[derive(Debug, Clone)]
pub struct ParametricField {
    grid: Arc<PhaseSpaceGrid>,
    points: Vec<ParametricPoint>,
    null_chi2: f64,
}

impl ParametricField {
    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> Arc<PhaseSpaceGrid> {
        Arc::clone(&self.grid)
    }

    pub fn points(&self) -> &[ParametricPoint] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &ParametricPoint {
        &self.points[j]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// χ² threshold below which points were marked null at build time.
    pub fn null_threshold(&self) -> f64 {
        self.null_chi2
    }

    pub fn is_null(&self, j: usize) -> bool {
        self.points[j].chi2 < self.null_chi2
    }

    /// |Σ_j w_j χ²_j − 1|, the discretized normalization deviation.
    pub fn norm_deviation(&self) -> f64 {
        let w = self.grid.weight();
        let total: f64 = self.points.iter().map(|p| p.chi2).sum::<f64>() * w;
        (total - 1.0).abs()
    }

    /// The a_k values as a grid-aligned scalar field (for derivatives).
    pub fn a_field(&self, k: usize) -> Vec<C64> {
        self.points.iter().map(|p| p.a[k]).collect()
    }
}

/// Decompose a joint state over the grid.
///
/// Fails with a coverage error when the grid misses enough of the
/// environmental marginal that Σ w χ² deviates from 1 beyond
/// `tol.field_norm`.
pub fn decompose(
    psi: &JointState,
    grid: Arc<PhaseSpaceGrid>,
    tol: &Tolerances,
) -> Result<ParametricField> {
    let n = psi.n_max();
    let amps = psi.amplitudes();
    let null_chi2 = tol.null_chi2;
    let points: Vec<ParametricPoint> = grid
        .points()
        .par_iter()
        .map(|&alpha| {
            let kernel = bra_coefficients(alpha, n);
            let mut a = [C64::ZERO; 2];
            for (xi, k_xi) in kernel.iter().enumerate() {
                a[0] += amps[(0, xi)] * k_xi;
                a[1] += amps[(1, xi)] * k_xi;
            }
            let chi2 = a[0].norm_sqr() + a[1].norm_sqr();
            let (phi, gamma) = if chi2 >= null_chi2 && chi2 > 0.0 {
                let chi = chi2.sqrt();
                (
                    [a[0] / chi, a[1] / chi],
                    [a[0].norm_sqr() / chi2, a[1].norm_sqr() / chi2],
                )
            } else {
                ([C64::ONE, C64::ZERO], [0.5, 0.5])
            };
            ParametricPoint {
                alpha,
                a,
                chi2,
                phi,
                gamma,
            }
        })
        .collect();

    let field = ParametricField {
        grid,
        points,
        null_chi2,
    };
    let deficit = field.norm_deviation();
    if deficit > tol.field_norm {
        return Err(Error::Coverage { deficit });
    }
    Ok(field)
}

/// ρ_Γ = Σ_j w_j χ²_j |φ_j⟩⟨φ_j| by quadrature over the field.
pub fn reconstruct(field: &ParametricField, tol: &Tolerances) -> Result<DensityOperator> {
    let w = C64::new(field.grid().weight(), 0.0);
    let mut acc = Operator::zeros(Signature::Qubit);
    for p in field.points() {
        acc = acc + p.weight_operator().scale(w);
    }
    DensityOperator::new(
        acc,
        DensityChecks {
            // Trace inherits the quadrature's normalization deficit rather
            // than the exact-arithmetic trace tolerance.
            trace: 2.0 * tol.field_norm,
            hermiticity: tol.hermiticity,
            positivity: tol.positivity,
        },
    )
}

/// Mask of points with χ² < eps, where |φ⟩ and the point-local operators are
/// ill-defined and must carry zero dissipator weight.
pub fn null_region_mask(field: &ParametricField, eps: f64) -> Vec<bool> {
    field.points().iter().map(|p| p.chi2 < eps).collect()
}
