//! Point-local Lindblad structure on the phase-space grid.
//!
//! For a coupling Hamiltonian H = Σ_i g_i Ô_i ⊗ O_i with environmental
//! expectation values θ_i(α) = ⟨α|O_i|α⟩, the label flow turns the
//! decomposition amplitudes a_k(α) into the qubit operators
//!
//! ```text
//! F_k(α) = −i Σ_i b_i^{(k)}(α) Ô_i,     b_i^{(k)} = g_i {a_k, θ_i}_P,
//! L_k(α) = (1/a_k)(𝟙 − a_k* F_k),
//! ```
//!
//! where {f,g}_P = ∂f/∂α ∂g/∂α* − ∂f/∂α* ∂g/∂α is the Poisson bracket of
//! the plane. The assembled dissipator
//!
//! ```text
//! Σ_j w_j Σ_k γ_k,j (L_k,j R_j L_k,j† − ½{L_k,j† L_k,j, R_j})
//! ```
//!
//! with R = χ²|φ⟩⟨φ| is traceless by cyclicity, point by point.
//!
//! Derivatives of a_k are taken by central differences on the grid; the θ_i
//! are differentiated analytically (θ_a = α, θ_{a†} = α*, θ_n = |α|²). The
//! boundary ring, where a central stencil does not exist, and the null
//! region, where χ² is negligible, carry zero dissipator weight.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bosonic::PhaseSpaceGrid;
use crate::error::{Error, Result};
use crate::operator::{Operator, Signature};
use crate::precs::ParametricField;
use crate::tolerance::Tolerances;

/// The environmental factor of an interaction term, with closed-form
/// coherent-state expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvOpKind {
    /// a, with θ(α) = α.
    Annihilation,
    /// a†, with θ(α) = α*.
    Creation,
    /// a†a, with θ(α) = |α|².
    Number,
}

impl EnvOpKind {
    /// θ(α) = ⟨α|O|α⟩.
    pub fn theta(self, alpha: C64) -> C64 {
        match self {
            EnvOpKind::Annihilation => alpha,
            EnvOpKind::Creation => alpha.conj(),
            EnvOpKind::Number => C64::new(alpha.norm_sqr(), 0.0),
        }
    }

    /// (∂θ/∂α, ∂θ/∂α*), exact.
    pub fn theta_derivatives(self, alpha: C64) -> (C64, C64) {
        match self {
            EnvOpKind::Annihilation => (C64::ONE, C64::ZERO),
            EnvOpKind::Creation => (C64::ZERO, C64::ONE),
            EnvOpKind::Number => (alpha.conj(), alpha),
        }
    }
}

/// One term g·Ô ⊗ O of the interaction Hamiltonian.
#[derive(Debug, Clone)]
pub struct InteractionTerm {
    pub coupling: f64,
    pub qubit_op: Operator,
    pub env_op: EnvOpKind,
}

impl InteractionTerm {
    pub fn new(coupling: f64, qubit_op: Operator, env_op: EnvOpKind) -> Result<Self> {
        if qubit_op.signature() != Signature::Qubit {
            return Err(Error::Signature(format!(
                "interaction term needs a qubit operator, got {}",
                qubit_op.signature()
            )));
        }
        Ok(InteractionTerm {
            coupling,
            qubit_op,
            env_op,
        })
    }
}

fn wirtinger_from(
    grid: &PhaseSpaceGrid,
    get: impl Fn(usize) -> C64,
    j: usize,
) -> Option<(C64, C64)> {
    let [xp, xm, yp, ym] = grid.neighbors(j)?;
    let inv2h = 0.5 / grid.spacing();
    let dx = (get(xp) - get(xm)) * inv2h;
    let dy = (get(yp) - get(ym)) * inv2h;
    let half = C64::new(0.5, 0.0);
    let d_alpha = half * (dx - C64::I * dy);
    let d_alpha_star = half * (dx + C64::I * dy);
    Some((d_alpha, d_alpha_star))
}

/// Central-difference Wirtinger derivatives (∂f/∂α, ∂f/∂α*) of a scalar
/// field sampled in grid order. `None` on the boundary ring.
pub fn wirtinger(grid: &PhaseSpaceGrid, values: &[C64], j: usize) -> Option<(C64, C64)> {
    wirtinger_from(grid, |i| values[i], j)
}

/// Poisson bracket {f, g}_P of two sampled fields at an interior point.
pub fn poisson_bracket(grid: &PhaseSpaceGrid, f: &[C64], g: &[C64], j: usize) -> Option<C64> {
    let df = wirtinger(grid, f, j)?;
    let dg = wirtinger(grid, g, j)?;
    Some(df.0 * dg.1 - df.1 * dg.0)
}

/// {f, θ}_P with f differentiated numerically and θ analytically.
fn bracket_against_theta(df: (C64, C64), kind: EnvOpKind, alpha: C64) -> C64 {
    let (dg_alpha, dg_alpha_star) = kind.theta_derivatives(alpha);
    df.0 * dg_alpha_star - df.1 * dg_alpha
}

/// F_±(α) at grid point `j`: −i Σ_i g_i {a_k, θ_i}_P Ô_i.
///
/// Returns `None` on the boundary ring and in the null region, which carry
/// zero dissipator weight.
pub fn compute_f(
    field: &ParametricField,
    terms: &[InteractionTerm],
    j: usize,
) -> Option<[Operator; 2]> {
    if field.is_null(j) {
        return None;
    }
    let grid = field.grid();
    let alpha = field.point(j).alpha;
    let mut out: [Operator; 2] = [
        Operator::zeros(Signature::Qubit),
        Operator::zeros(Signature::Qubit),
    ];
    for (k, slot) in out.iter_mut().enumerate() {
        let da = wirtinger_from(grid, |i| field.point(i).a[k], j)?;
        let mut f = Operator::zeros(Signature::Qubit);
        for term in terms {
            let b = C64::new(term.coupling, 0.0) * bracket_against_theta(da, term.env_op, alpha);
            f = f + term.qubit_op.scale(-C64::I * b);
        }
        *slot = f;
    }
    Some(out)
}

/// L_k = (1/a_k)(𝟙 − a_k* F_k), or `None` when |a_k| is below `eps_null`
/// (there the dissipator weight γ_k|a_k|² is second-order small and the
/// channel is skipped).
pub fn compute_l(a_k: C64, f_k: &Operator, eps_null: f64) -> Option<Operator> {
    if a_k.norm() <= eps_null {
        return None;
    }
    let inv = C64::ONE / a_k;
    let one = Operator::identity(Signature::Qubit);
    Some((one - f_k.scale(a_k.conj())).scale(inv))
}

/// Assembled per-point operators at one grid point.
#[derive(Debug, Clone)]
pub struct PointRecord {
    pub alpha: C64,
    pub f_ops: [Operator; 2],
    /// Per-channel jump operators; `None` where |a_k| ≤ eps_null.
    pub l_ops: [Option<Operator>; 2],
    pub gamma: [f64; 2],
    /// R(α) = χ²|φ⟩⟨φ|, unnormalized (trace = χ²).
    pub r: Operator,
}

/// The field of point-local operators over the grid. Entries are `None` on
/// the boundary ring and in the null region.
#[derive(Debug, Clone)]
pub struct LindbladField {
    grid: Arc<PhaseSpaceGrid>,
    records: Vec<Option<PointRecord>>,
}

impl LindbladField {
    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn records(&self) -> &[Option<PointRecord>] {
        &self.records
    }

    pub fn assembled_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_some()).count()
    }
}

/// Build the Lindblad field from a decomposition, interior point by interior
/// point (parallel; the per-point work is pure).
pub fn assemble(
    field: &ParametricField,
    terms: &[InteractionTerm],
    tol: &Tolerances,
) -> LindbladField {
    let eps = tol.null_chi2;
    let records: Vec<Option<PointRecord>> = (0..field.len())
        .into_par_iter()
        .map(|j| {
            let f_ops = compute_f(field, terms, j)?;
            let p = field.point(j);
            let l_ops = [
                compute_l(p.a[0], &f_ops[0], eps),
                compute_l(p.a[1], &f_ops[1], eps),
            ];
            Some(PointRecord {
                alpha: p.alpha,
                f_ops,
                l_ops,
                gamma: p.gamma,
                r: p.weight_operator(),
            })
        })
        .collect();
    LindbladField {
        grid: field.grid_arc(),
        records,
    }
}

/// The dissipative part of the reduced-state derivative:
/// Σ_j w_j Σ_k γ_k,j (L_k R L_k† − ½{L_k†L_k, R}).
///
/// Hermitian and traceless up to rounding. The commutator part with the
/// effective Hamiltonian is model-supplied and not included here.
pub fn gksl_rhs(lf: &LindbladField) -> Operator {
    let w = C64::new(lf.grid().weight(), 0.0);
    let mut acc = Operator::zeros(Signature::Qubit);
    let half = C64::new(0.5, 0.0);
    for rec in lf.records().iter().flatten() {
        for k in 0..2 {
            let Some(l) = &rec.l_ops[k] else { continue };
            let gamma = C64::new(rec.gamma[k], 0.0);
            let ldag = l.adjoint();
            let sandwich = &(l * &rec.r) * &ldag;
            let ldl = &ldag * l;
            let term = sandwich - ldl.anticommutator(&rec.r).scale(half);
            acc = acc + term.scale(gamma * w);
        }
    }
    acc
}

/// Closed-form helpers for Gaussian-type amplitude fields
/// a(α) = c · e^{−|α|²/2} e^{α*β}, the shape the dephasing model produces.
/// These provide the analytic derivative path that the finite-difference
/// machinery is checked against.
pub mod gaussian {
    use super::*;

    /// a(α) evaluated at one point.
    pub fn value(c: C64, center: C64, alpha: C64) -> C64 {
        let expo = C64::new(-0.5 * alpha.norm_sqr(), 0.0) + alpha.conj() * center;
        c * expo.exp()
    }

    /// Samples over a grid, in grid order.
    pub fn field_values(grid: &PhaseSpaceGrid, c: C64, center: C64) -> Vec<C64> {
        grid.points()
            .iter()
            .map(|&alpha| value(c, center, alpha))
            .collect()
    }

    /// Exact Wirtinger derivatives: ∂a/∂α = −(α*/2)a, ∂a/∂α* = (β − α/2)a.
    pub fn wirtinger(c: C64, center: C64, alpha: C64) -> (C64, C64) {
        let a = value(c, center, alpha);
        let half = C64::new(0.5, 0.0);
        (-half * alpha.conj() * a, (center - half * alpha) * a)
    }

    /// Exact F_k contribution for Gaussian a_k:
    /// F = [i ω β α* 𝟙-term from a†a] + [(g(iβ) + g·Im α) σ_z-term from a±a†]
    /// specialized through the generic bracket formula.
    pub fn f_operator(terms: &[InteractionTerm], c: C64, center: C64, alpha: C64) -> Operator {
        let da = wirtinger(c, center, alpha);
        let mut f = Operator::zeros(Signature::Qubit);
        for term in terms {
            let b = C64::new(term.coupling, 0.0)
                * super::bracket_against_theta(da, term.env_op, alpha);
            f = f + term.qubit_op.scale(-C64::I * b);
        }
        f
    }
}
