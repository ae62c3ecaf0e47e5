//! Truncated Fock space, Glauber coherent states, displacement operators,
//! and the phase-space quadrature grid realizing dμ(α) = d²α/π.
//!
//! Coherent states are |α⟩ = e^{−|α|²/2} Σ_n α^n/√n! |n⟩ with a|α⟩ = α|α⟩
//! and overlap ⟨β|α⟩ = e^{−½(|α|²+|β|²)} e^{β*α}. Identities that involve the
//! truncation are only asserted on the faithful block n < n_max/2, where the
//! ladder artifacts cannot reach.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{expm, Operator, Signature};
use crate::tolerance::Tolerances;

/// Bosonic mode truncated to the Fock states |0⟩ .. |n_max − 1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Config("n_max must be positive".to_string()));
        }
        Ok(FockSpace { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Annihilation operator, a|n⟩ = √n |n−1⟩.
    pub fn annihilation(&self) -> Operator {
        let n = self.n_max;
        let mut mat = Array2::zeros((n, n));
        for k in 1..n {
            mat[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        Operator::new(mat, Signature::Boson(n)).expect("shape matches")
    }

    /// Creation operator a†.
    pub fn creation(&self) -> Operator {
        self.annihilation().adjoint()
    }

    /// Number operator a†a = diag(0, 1, ..., n_max−1).
    pub fn number(&self) -> Operator {
        let n = self.n_max;
        let mut mat = Array2::zeros((n, n));
        for k in 0..n {
            mat[(k, k)] = C64::new(k as f64, 0.0);
        }
        Operator::new(mat, Signature::Boson(n)).expect("shape matches")
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(Signature::Boson(self.n_max))
    }
}

/// A point α ∈ ℂ of the phase-space manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPoint {
    pub alpha: C64,
}

impl CoherentPoint {
    pub fn new(alpha: C64) -> Self {
        CoherentPoint { alpha }
    }

    /// Amplitude tail Σ_{n ≥ n_max} e^{−|α|²} |α|^{2n}/n! lost to truncation.
    pub fn tail_mass(&self, n_max: usize) -> f64 {
        let lambda = self.alpha.norm_sqr();
        let mut p = (-lambda).exp();
        let mut cum = 0.0;
        for n in 0..n_max {
            cum += p;
            p *= lambda / (n as f64 + 1.0);
        }
        (1.0 - cum).max(0.0)
    }

    /// Error unless the truncated ladder holds this state faithfully.
    pub fn check_truncation(&self, fs: &FockSpace, tol: &Tolerances) -> Result<()> {
        let tail = self.tail_mass(fs.n_max());
        if tail > tol.truncation_tail {
            return Err(Error::Truncation(format!(
                "|α|² = {:.3} too close to n_max = {} (tail mass {tail:.3e})",
                self.alpha.norm_sqr(),
                fs.n_max()
            )));
        }
        Ok(())
    }
}

/// The kernel row ⟨α|ξ⟩ = e^{−|α|²/2} (α*)^ξ/√ξ! for ξ < count.
///
/// Computed by the stable recurrence ⟨α|ξ+1⟩ = ⟨α|ξ⟩ · α*/√(ξ+1), which
/// avoids factorial overflow.
pub fn bra_coefficients(alpha: C64, count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    let mut cur = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let astar = alpha.conj();
    for xi in 0..count {
        out.push(cur);
        cur *= astar / C64::new(((xi + 1) as f64).sqrt(), 0.0);
    }
    out
}

/// Coherent state |α⟩ as a Fock-basis vector (raw truncated series, so the
/// norm is 1 − O(tail)).
pub fn coherent_vector(fs: &FockSpace, p: CoherentPoint, tol: &Tolerances) -> Result<Array1<C64>> {
    p.check_truncation(fs, tol)?;
    let coeffs = bra_coefficients(p.alpha, fs.n_max());
    Ok(coeffs.into_iter().map(|z| z.conj()).collect())
}

/// Closed-form overlap ⟨p|q⟩ = e^{−½(|p|²+|q|²)} e^{p*q}.
pub fn overlap(p: CoherentPoint, q: CoherentPoint) -> C64 {
    let expo = p.alpha.conj() * q.alpha
        - C64::new(0.5 * (p.alpha.norm_sqr() + q.alpha.norm_sqr()), 0.0);
    expo.exp()
}

/// Displacement operator D(α) = exp(α a† − α* a) on the truncated ladder.
pub fn displacement(fs: &FockSpace, p: CoherentPoint, tol: &Tolerances) -> Result<Operator> {
    p.check_truncation(fs, tol)?;
    let gen = fs.creation().scale(p.alpha) - fs.annihilation().scale(p.alpha.conj());
    expm(&gen, C64::ONE)
}

/// Uniform Cartesian midpoint grid over the disc |α| ≤ R with cell weight
/// h²/π, realizing the quadrature ∫ d²α/π ≈ Σ_j w_j.
///
/// Cell centers sit at ((ix+½)h, (iy+½)h) and are kept when the center lies
/// inside the disc. Points are stored in row-major scan order (Im ascending,
/// then Re ascending), which makes every derived output reproducible
/// byte-for-byte.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid {
    points: Vec<C64>,
    lattice: Vec<(i32, i32)>,
    index: Vec<u32>,
    offset: i32,
    side: usize,
    extent: f64,
    spacing: f64,
}

const NO_POINT: u32 = u32::MAX;

impl PhaseSpaceGrid {
    pub fn make(extent: f64, spacing: f64) -> Result<Self> {
        if extent.is_nan() || spacing.is_nan() || extent <= 0.0 || spacing <= 0.0 || spacing >= extent {
            return Err(Error::Config(format!(
                "grid needs 0 < h < R, got R = {extent}, h = {spacing}"
            )));
        }
        let b = (extent / spacing - 0.5).floor() as i32;
        let offset = b + 1;
        let side = (2 * b + 2) as usize;
        let mut points = Vec::new();
        let mut lattice = Vec::new();
        let mut index = vec![NO_POINT; side * side];
        let r2 = extent * extent;
        for iy in -offset..=b {
            let y = (iy as f64 + 0.5) * spacing;
            for ix in -offset..=b {
                let x = (ix as f64 + 0.5) * spacing;
                if x * x + y * y <= r2 {
                    let row = (iy + offset) as usize;
                    let col = (ix + offset) as usize;
                    index[row * side + col] = points.len() as u32;
                    points.push(C64::new(x, y));
                    lattice.push((ix, iy));
                }
            }
        }
        if points.is_empty() {
            return Err(Error::Config(
                "grid parameters produce no quadrature points".to_string(),
            ));
        }
        Ok(PhaseSpaceGrid {
            points,
            lattice,
            index,
            offset,
            side,
            extent,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn point(&self, j: usize) -> C64 {
        self.points[j]
    }

    /// Quadrature weight shared by every cell, h²/π.
    pub fn weight(&self) -> f64 {
        self.spacing * self.spacing / std::f64::consts::PI
    }

    /// Σ_j w_j, which approximates area(disc)/π = R².
    pub fn total_weight(&self) -> f64 {
        self.weight() * self.len() as f64
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn lookup(&self, ix: i32, iy: i32) -> Option<usize> {
        let row = iy + self.offset;
        let col = ix + self.offset;
        if row < 0 || col < 0 || row as usize >= self.side || col as usize >= self.side {
            return None;
        }
        match self.index[row as usize * self.side + col as usize] {
            NO_POINT => None,
            j => Some(j as usize),
        }
    }

    /// Axis neighbors [+x, −x, +y, −y] of point `j`, or None on the boundary
    /// ring where central differences are not available.
    pub fn neighbors(&self, j: usize) -> Option<[usize; 4]> {
        let (ix, iy) = self.lattice[j];
        Some([
            self.lookup(ix + 1, iy)?,
            self.lookup(ix - 1, iy)?,
            self.lookup(ix, iy + 1)?,
            self.lookup(ix, iy - 1)?,
        ])
    }

    pub fn is_interior(&self, j: usize) -> bool {
        self.neighbors(j).is_some()
    }
}

/// Max-norm of (Σ_j w_j |α_j⟩⟨α_j| − 𝟙) restricted to Fock indices
/// n, m < block.
pub fn identity_resolution_error(fs: &FockSpace, grid: &PhaseSpaceGrid, block: usize) -> f64 {
    assert!(
        2 * block <= fs.n_max(),
        "resolution check restricted to the faithful block (block ≤ n_max/2)"
    );
    let w = grid.weight();
    let mut acc = Array2::<C64>::zeros((block, block));
    for &alpha in grid.points() {
        // ⟨n|α⟩ = conj(⟨α|n⟩)
        let ket: Vec<C64> = bra_coefficients(alpha, block)
            .into_iter()
            .map(|z| z.conj())
            .collect();
        for n in 0..block {
            for m in 0..block {
                acc[(n, m)] += ket[n] * ket[m].conj() * w;
            }
        }
    }
    let mut err = 0.0_f64;
    for n in 0..block {
        for m in 0..block {
            let target = if n == m { C64::ONE } else { C64::ZERO };
            err = err.max((acc[(n, m)] - target).norm());
        }
    }
    err
}
