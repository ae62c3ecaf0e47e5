//! Dense complex operator algebra on the qubit, boson, and joint spaces.
//!
//! All operators are plain row-major complex matrices tagged with a
//! [`Signature`] declaring which subsystem they act on. The joint index
//! convention is qubit-major: row = k·n_max + ξ with k ∈ {0 ↔ |+⟩, 1 ↔ |−⟩}
//! and ξ the Fock index, matching 𝟙 ⊗ (ω a†a) ordering under the Kronecker
//! product.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::eig;
use crate::error::{Error, Result};

/// Which Hilbert space a matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// The two-level principal system.
    Qubit,
    /// The truncated bosonic mode with `n_max` Fock levels.
    Boson(usize),
    /// Qubit ⊗ boson with the given `n_max`.
    Joint(usize),
}

impl Signature {
    pub fn dim(self) -> usize {
        match self {
            Signature::Qubit => 2,
            Signature::Boson(n) => n,
            Signature::Joint(n) => 2 * n,
        }
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Signature::Qubit => write!(f, "qubit"),
            Signature::Boson(n) => write!(f, "boson({n})"),
            Signature::Joint(n) => write!(f, "joint({n})"),
        }
    }
}

/// Dense complex square matrix with a declared subsystem signature.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
    sig: Signature,
}

impl Operator {
    /// Wrap a matrix, checking that its shape matches the signature.
    pub fn new(mat: Array2<C64>, sig: Signature) -> Result<Self> {
        let d = sig.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Signature(format!(
                "matrix is {}x{} but signature {sig} needs {d}x{d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Operator { mat, sig })
    }

    pub fn zeros(sig: Signature) -> Self {
        let d = sig.dim();
        Operator {
            mat: Array2::zeros((d, d)),
            sig,
        }
    }

    pub fn identity(sig: Signature) -> Self {
        let d = sig.dim();
        Operator {
            mat: Array2::eye(d),
            sig,
        }
    }

    /// 2×2 qubit operator from rows in the {|+⟩, |−⟩} basis.
    pub fn qubit(rows: [[C64; 2]; 2]) -> Self {
        let mut mat = Array2::zeros((2, 2));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                mat[(i, j)] = *v;
            }
        }
        Operator {
            mat,
            sig: Signature::Qubit,
        }
    }

    pub fn sigma_x() -> Self {
        Operator::qubit([[C64::ZERO, C64::ONE], [C64::ONE, C64::ZERO]])
    }

    pub fn sigma_y() -> Self {
        Operator::qubit([[C64::ZERO, -C64::I], [C64::I, C64::ZERO]])
    }

    /// σ_z with σ_z|+⟩ = +|+⟩, σ_z|−⟩ = −|−⟩.
    pub fn sigma_z() -> Self {
        Operator::qubit([[C64::ONE, C64::ZERO], [C64::ZERO, -C64::ONE]])
    }

    /// Raising operator σ⁺|−⟩ = |+⟩, σ⁺|+⟩ = 0.
    pub fn sigma_plus() -> Self {
        Operator::qubit([[C64::ZERO, C64::ONE], [C64::ZERO, C64::ZERO]])
    }

    /// Lowering operator σ⁻ = (σ⁺)†.
    pub fn sigma_minus() -> Self {
        Operator::qubit([[C64::ZERO, C64::ZERO], [C64::ONE, C64::ZERO]])
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = self.mat[(j, i)].conj();
            }
        }
        Operator { mat, sig: self.sig }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator {
            mat: self.mat.mapv(|z| z * c),
            sig: self.sig,
        }
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// {A, B} = AB + BA.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self * other + other * self
    }

    /// Max |A − A†| over all entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut r = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                r = r.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Largest entry magnitude (max-norm).
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Maximum absolute row sum (induced ∞-norm); used for expm scaling.
    pub fn inf_norm(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.mat[(i, j)].norm()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    fn check_same(&self, other: &Self, what: &str) {
        assert!(
            self.sig == other.sig,
            "{what} on mismatched signatures {} vs {}",
            self.sig,
            other.sig
        );
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same(rhs, "add");
        Operator {
            mat: &self.mat + &rhs.mat,
            sig: self.sig,
        }
    }
}

impl std::ops::Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same(rhs, "sub");
        Operator {
            mat: &self.mat - &rhs.mat,
            sig: self.sig,
        }
    }
}

impl std::ops::Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same(rhs, "mul");
        Operator {
            mat: self.mat.dot(&rhs.mat),
            sig: self.sig,
        }
    }
}

impl std::ops::Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

/// Kronecker product of two matrices: (A⊗B)[(i·p+k),(j·q+l)] = A[i,j]·B[k,l].
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (m, n) = (a.nrows(), a.ncols());
    let (p, q) = (b.nrows(), b.ncols());
    let mut out = Array2::zeros((m * p, n * q));
    for i in 0..m {
        for j in 0..n {
            let aij = a[(i, j)];
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Tensor product of a qubit operator with a boson operator.
///
/// (A⊗B)[(k·n+m),(l·n+j)] = A[k,l]·B[m,j] in the qubit-major joint convention.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    match (a.signature(), b.signature()) {
        (Signature::Qubit, Signature::Boson(n)) => Ok(Operator {
            mat: kron(a.matrix(), b.matrix()),
            sig: Signature::Joint(n),
        }),
        (sa, sb) => Err(Error::Signature(format!(
            "tensor expects qubit ⊗ boson, got {sa} ⊗ {sb}"
        ))),
    }
}

/// Trace out the bosonic mode: result[k,l] = Σ_m M[(k,m),(l,m)].
pub fn partial_trace_env(m: &Operator) -> Result<Operator> {
    let n = match m.signature() {
        Signature::Joint(n) => n,
        sig => {
            return Err(Error::Signature(format!(
                "partial_trace_env needs a joint operator, got {sig}"
            )))
        }
    };
    let mut out = Array2::zeros((2, 2));
    for k in 0..2 {
        for l in 0..2 {
            let mut s = C64::ZERO;
            for j in 0..n {
                s += m.get(k * n + j, l * n + j);
            }
            out[(k, l)] = s;
        }
    }
    Ok(Operator {
        mat: out,
        sig: Signature::Qubit,
    })
}

/// exp(scale·A) by scaling-and-squaring with a Taylor kernel.
///
/// The scaled matrix is brought below norm 1/4, where ~20 Taylor terms reach
/// machine precision, then squared back up. Unitary to ~1e-13 for
/// anti-Hermitian exponents of moderate norm.
pub fn expm(a: &Operator, scale: C64) -> Result<Operator> {
    let d = a.dim();
    let b = a.scale(scale);
    let norm = b.inf_norm();
    if !norm.is_finite() {
        return Err(Error::Contract(
            "expm: non-finite norm estimate".to_string(),
        ));
    }
    let squarings = if norm > 0.25 {
        ((norm / 0.25).log2().ceil() as i32).min(60)
    } else {
        0
    };
    let c = b.scale(C64::new(2.0_f64.powi(-squarings), 0.0));

    let mut result = Array2::<C64>::eye(d);
    let mut term = Array2::<C64>::eye(d);
    for k in 1..=24_u32 {
        term = term.dot(c.matrix());
        term.mapv_inplace(|z| z / C64::new(k as f64, 0.0));
        result += &term;
        let tail = term.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if tail < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Contract("expm: overflow during squaring".to_string()));
    }
    Ok(Operator {
        mat: result,
        sig: a.signature(),
    })
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn spectral_floor(m: &Operator) -> Result<f64> {
    let eigs = hermitian_eigenvalues(m)?;
    Ok(eigs[0])
}

/// All eigenvalues (ascending) of a Hermitian operator.
pub fn hermitian_eigenvalues(m: &Operator) -> Result<Vec<f64>> {
    let res = m.hermiticity_residual();
    let scale = m.max_abs().max(1.0);
    if res > 1e-9 * scale {
        return Err(Error::Contract(format!(
            "eigenvalues requested for non-Hermitian operator (residual {res:.3e})"
        )));
    }
    Ok(eig::hermitian_eigenvalues(m.matrix()))
}

/// Per-instance tolerance record carried by a density operator.
#[derive(Debug, Clone, Copy)]
pub struct DensityChecks {
    pub trace: f64,
    pub hermiticity: f64,
    pub positivity: f64,
}

impl From<&crate::tolerance::Tolerances> for DensityChecks {
    fn from(t: &crate::tolerance::Tolerances) -> Self {
        DensityChecks {
            trace: t.trace,
            hermiticity: t.hermiticity,
            positivity: t.positivity,
        }
    }
}

/// A state: unit-trace, Hermitian, positive-semidefinite operator.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: Operator,
    checks: DensityChecks,
}

impl DensityOperator {
    /// Validate trace, Hermiticity, and positivity against `checks`.
    pub fn new(op: Operator, checks: DensityChecks) -> Result<Self> {
        let tr = op.trace();
        if (tr.re - 1.0).abs() > checks.trace || tr.im.abs() > checks.trace {
            return Err(Error::Contract(format!(
                "density operator trace {tr} deviates from 1 beyond {:.1e}",
                checks.trace
            )));
        }
        if !op.is_hermitian(checks.hermiticity) {
            return Err(Error::Contract(format!(
                "density operator not Hermitian (residual {:.3e})",
                op.hermiticity_residual()
            )));
        }
        let floor = spectral_floor(&op)?;
        if floor < -checks.positivity {
            return Err(Error::Contract(format!(
                "density operator indefinite (min eigenvalue {floor:.3e})"
            )));
        }
        Ok(DensityOperator { op, checks })
    }

    /// Pure qubit state |φ⟩⟨φ| from (not necessarily normalized) amplitudes.
    pub fn pure_qubit(amps: [C64; 2], checks: DensityChecks) -> Result<Self> {
        let n2 = amps[0].norm_sqr() + amps[1].norm_sqr();
        if n2 <= 0.0 {
            return Err(Error::Contract("pure_qubit: zero state".to_string()));
        }
        let s = 1.0 / n2;
        let mut mat = Array2::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                mat[(i, j)] = amps[i] * amps[j].conj() * s;
            }
        }
        DensityOperator::new(
            Operator {
                mat,
                sig: Signature::Qubit,
            },
            checks,
        )
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn checks(&self) -> DensityChecks {
        self.checks
    }

    pub fn min_eigenvalue(&self) -> f64 {
        spectral_floor(&self.op).expect("density operator is Hermitian")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_op(rng: &mut ChaCha8Rng, sig: Signature) -> Operator {
        let d = sig.dim();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        Operator::new(mat, sig).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, sig: Signature) -> Operator {
        let a = random_op(rng, sig);
        let h = &a + &a.adjoint();
        h.scale(c(0.5, 0.0))
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let a = Operator::identity(Signature::Qubit);
        let b = Operator::identity(Signature::Boson(5));
        let t = tensor(&a, &b).unwrap();
        assert_eq!(t, Operator::identity(Signature::Joint(5)));
    }

    #[test]
    fn tensor_sigma_z_with_identity() {
        let t = tensor(&Operator::sigma_z(), &Operator::identity(Signature::Boson(2))).unwrap();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(t.get(i, i).re, *e);
        }
        assert_abs_diff_eq!(t.matrix().iter().map(|z| z.norm()).sum::<f64>(), 4.0);
    }

    #[test]
    fn adjoint_distributes_over_tensor() {
        // Brute-force comparison (σ_z ⊗ a)† = σ_z ⊗ a†.
        let mut a_mat = Array2::<C64>::zeros((4, 4));
        for n in 1..4 {
            a_mat[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
        }
        let a = Operator::new(a_mat, Signature::Boson(4)).unwrap();
        let lhs = tensor(&Operator::sigma_z(), &a).unwrap().adjoint();
        let rhs = tensor(&Operator::sigma_z(), &a.adjoint()).unwrap();
        assert!((lhs - rhs).max_abs() < 1e-15);
    }

    #[test]
    fn tensor_rejects_mismatched_signatures() {
        let a = Operator::identity(Signature::Boson(3));
        let b = Operator::identity(Signature::Boson(3));
        assert!(tensor(&a, &b).is_err());
    }

    #[test]
    fn kron_is_bilinear_and_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_op(&mut rng, Signature::Qubit).into_matrix();
            let b = random_op(&mut rng, Signature::Qubit).into_matrix();
            let d = random_op(&mut rng, Signature::Boson(3)).into_matrix();
            // bilinearity in the first slot
            let lhs = kron(&(&a + &b), &d);
            let rhs = &kron(&a, &d) + &kron(&b, &d);
            let diff = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-14);
            // associativity
            let lhs = kron(&kron(&a, &b), &d);
            let rhs = kron(&a, &kron(&b, &d));
            let diff = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-14);
        }
    }

    #[test]
    fn partial_trace_of_maximally_entangled_state() {
        // |ψ⟩ = (|+,0⟩ + |−,1⟩)/√2 reduces to 𝟙/2.
        let n = 2;
        let mut psi = Array1::<C64>::zeros(2 * n);
        psi[0] = c(1.0 / 2.0_f64.sqrt(), 0.0); // (+, 0)
        psi[n + 1] = c(1.0 / 2.0_f64.sqrt(), 0.0); // (−, 1)
        let mut proj = Array2::zeros((2 * n, 2 * n));
        for i in 0..2 * n {
            for j in 0..2 * n {
                proj[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        let rho = partial_trace_env(&Operator::new(proj, Signature::Joint(n)).unwrap()).unwrap();
        let half = Operator::identity(Signature::Qubit).scale(c(0.5, 0.0));
        assert!((rho - half).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_op(&mut rng, Signature::Qubit);
            let b = random_op(&mut rng, Signature::Boson(4));
            let joint = tensor(&a, &b).unwrap();
            let reduced = partial_trace_env(&joint).unwrap();
            let expect = a.scale(b.trace());
            assert!((reduced - expect).max_abs() < 1e-13);
        }
    }

    #[test]
    fn partial_trace_matches_index_sum_oracle() {
        // Random Hermitian 4×4 against a brute-force reindexing of the
        // 2×2 diagonal blocks.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(&mut rng, Signature::Joint(2));
        let r = partial_trace_env(&m).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let expect = m.get(2 * k, 2 * l) + m.get(2 * k + 1, 2 * l + 1);
                assert_abs_diff_eq!(r.get(k, l).re, expect.re, epsilon = 1e-15);
                assert_abs_diff_eq!(r.get(k, l).im, expect.im, epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(r.trace().re, m.trace().re, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_rejects_non_joint() {
        assert!(partial_trace_env(&Operator::sigma_x()).is_err());
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let a = Operator::sigma_x();
        let e = expm(&a, C64::ZERO).unwrap();
        assert!((e - Operator::identity(Signature::Qubit)).max_abs() < 1e-15);
    }

    #[test]
    fn expm_diagonal_closed_form() {
        // exp(−iθσ_z) = diag(e^{−iθ}, e^{+iθ})
        let theta = 0.7;
        let e = expm(&Operator::sigma_z(), c(0.0, -theta)).unwrap();
        assert_abs_diff_eq!(e.get(0, 0).re, theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(0, 0).im, -theta.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(1, 1).re, theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(1, 1).im, theta.sin(), epsilon = 1e-14);
        assert!(e.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn expm_inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..5 {
            let h = random_hermitian(&mut rng, Signature::Boson(6));
            let scale = 1.0 / h.inf_norm().max(1.0);
            let h = h.scale(c(scale, 0.0));
            let e = expm(&h, C64::ONE).unwrap();
            let einv = expm(&h, -C64::ONE).unwrap();
            let prod = &e * &einv;
            let diff = prod - Operator::identity(Signature::Boson(6));
            assert!(diff.max_abs() < 1e-10);
        }
    }

    #[test]
    fn expm_unitarity_for_anti_hermitian_exponents() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for norm in [0.5, 3.0, 10.0] {
            let h = random_hermitian(&mut rng, Signature::Boson(8));
            let h = h.scale(c(norm / h.inf_norm(), 0.0));
            let u = expm(&h, -C64::I).unwrap();
            let resid = &u.adjoint() * &u - Operator::identity(Signature::Boson(8));
            assert!(
                resid.max_abs() < 1e-10,
                "unitarity residual {} at norm {norm}",
                resid.max_abs()
            );
        }
    }

    #[test]
    fn spectral_floor_examples() {
        let half = Operator::identity(Signature::Qubit).scale(c(0.5, 0.0));
        assert_abs_diff_eq!(spectral_floor(&half).unwrap(), 0.5, epsilon = 1e-12);

        let proj = Operator::qubit([[C64::ONE, C64::ZERO], [C64::ZERO, C64::ZERO]]);
        assert_abs_diff_eq!(spectral_floor(&proj).unwrap(), 0.0, epsilon = 1e-12);

        assert_abs_diff_eq!(
            spectral_floor(&Operator::sigma_x()).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn spectral_floor_rejects_non_hermitian() {
        assert!(spectral_floor(&Operator::sigma_plus()).is_err());
    }

    #[test]
    fn density_operator_validation() {
        let checks = DensityChecks {
            trace: 1e-9,
            hermiticity: 1e-9,
            positivity: 1e-9,
        };
        let rho = DensityOperator::pure_qubit([C64::ONE, C64::ONE], checks).unwrap();
        assert_abs_diff_eq!(rho.op().trace().re, 1.0, epsilon = 1e-14);
        assert!(rho.min_eigenvalue() > -1e-12);

        // Trace-violating operator is rejected.
        let bad = Operator::identity(Signature::Qubit);
        assert!(DensityOperator::new(bad, checks).is_err());
    }

    #[test]
    fn pauli_algebra_sanity() {
        let comm = Operator::sigma_x().commutator(&Operator::sigma_y());
        // [σ_x, σ_y] = 2iσ_z
        let expect = Operator::sigma_z().scale(c(0.0, 2.0));
        assert!((comm - expect).max_abs() < 1e-15);

        let anti = Operator::sigma_plus().anticommutator(&Operator::sigma_minus());
        assert!((anti - Operator::identity(Signature::Qubit)).max_abs() < 1e-15);
    }
}
