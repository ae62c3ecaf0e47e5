//! The two concrete qubit-boson models and their classical-limit equations.
//!
//! Pure dephasing:  H = 𝟙 ⊗ ω a†a + g σ_z ⊗ (a + a†), whose qubit operators
//! all commute; populations are conserved and coherences decay at the rate
//! T(t) = ½ e^{−|β|²} |sin(gβ)|² with β(t) = (g/ω)(1 − e^{−iωt}).
//!
//! Jaynes-Cummings: H = 𝟙 ⊗ ω a†a + g(σ⁺ ⊗ a + σ⁻ ⊗ a†). Its classical-limit
//! master equation has the raising jump σ⁺ at a constant rate T̃ supplied by
//! configuration (the rate and effective field are not derivable without the
//! exact joint solution).
//!
//! Sign convention, fixed here and relied on everywhere: σ⁺|−⟩ = |+⟩ and
//! σ⁻ = (σ⁺)†, so σ⁻σ⁺ = |−⟩⟨−| and the Jaynes-Cummings dissipator pumps
//! toward |+⟩⟨+|.

use num_complex::Complex64 as C64;

use crate::bosonic::{coherent_vector, CoherentPoint, FockSpace};
use crate::dynamics::{coefficient_b_at, JumpChannel};
use crate::error::{Error, Result};
use crate::lindblad::{compute_f, EnvOpKind, InteractionTerm};
use crate::operator::{tensor, Operator, Signature};
use crate::precs::{JointState, ParametricField};
use crate::tolerance::Tolerances;

/// A packaged classical-limit GKSL system, ready for the RK4 integrator.
pub struct ClassicalEquation {
    pub h_eff: Box<dyn Fn(f64) -> Operator + Send + Sync>,
    pub jumps: Vec<JumpChannel>,
}

/// Qubit dephasing against the mode: H = 𝟙⊗ωa†a + gσ_z⊗(a + a†).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureDephasingModel {
    pub omega: f64,
    pub g: f64,
}

impl PureDephasingModel {
    pub fn new(omega: f64, g: f64) -> Result<Self> {
        if omega.is_nan() || omega <= 0.0 {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        if g < 0.0 {
            return Err(Error::Config(format!("g must be nonnegative, got {g}")));
        }
        Ok(PureDephasingModel { omega, g })
    }

    /// The interaction terms {(ω, 𝟙, a†a), (g, σ_z, a), (g, σ_z, a†)}.
    pub fn interaction_terms(&self) -> Vec<InteractionTerm> {
        vec![
            InteractionTerm::new(
                self.omega,
                Operator::identity(Signature::Qubit),
                EnvOpKind::Number,
            )
            .expect("qubit operator"),
            InteractionTerm::new(self.g, Operator::sigma_z(), EnvOpKind::Annihilation)
                .expect("qubit operator"),
            InteractionTerm::new(self.g, Operator::sigma_z(), EnvOpKind::Creation)
                .expect("qubit operator"),
        ]
    }

    /// Joint Hamiltonian on the truncated ladder.
    pub fn hamiltonian(&self, fs: &FockSpace) -> Operator {
        let free = tensor(
            &Operator::identity(Signature::Qubit),
            &fs.number().scale(C64::new(self.omega, 0.0)),
        )
        .expect("qubit ⊗ boson");
        let coupling = tensor(
            &Operator::sigma_z(),
            &(fs.annihilation() + fs.creation()).scale(C64::new(self.g, 0.0)),
        )
        .expect("qubit ⊗ boson");
        free + coupling
    }

    /// β(t) = (g/ω)(1 − e^{−iωt}).
    pub fn beta(&self, t: f64) -> C64 {
        C64::new(self.g / self.omega, 0.0) * (C64::ONE - C64::new(0.0, -self.omega * t).exp())
    }

    /// The dephasing rate T(t) = ½ e^{−|β|²} |sin(gβ)|², with the sine taken
    /// at the complex argument gβ.
    pub fn rate(&self, t: f64) -> f64 {
        let beta = self.beta(t);
        let s = (C64::new(self.g, 0.0) * beta).sin();
        0.5 * (-beta.norm_sqr()).exp() * s.norm_sqr()
    }

    /// The α-resolved rate carrying the phase-space factor e^{−2ω Im(α*β)},
    /// before the distribution-peak argument collapses it onto [`rate`](Self::rate).
    pub fn rate_alpha_resolved(&self, alpha: C64, t: f64) -> f64 {
        let beta = self.beta(t);
        self.rate(t) * (-2.0 * self.omega * (alpha.conj() * beta).im).exp()
    }

    /// Small-coupling asymptote (g⁴/ω²)(1 − cos ωt).
    pub fn small_g_asymptote(&self, t: f64) -> f64 {
        self.g.powi(4) / (self.omega * self.omega) * (1.0 - (self.omega * t).cos())
    }

    /// Classical-limit coefficients of F_±(α) = d_±𝟙 + b_±σ_z for the
    /// equal-superposition initial state:
    ///
    /// ```text
    /// d^C_± = (1/√2) e^{−|β|²/2} e^{∓iωβα*} cos(gβ),
    /// b^C_± = ∓(i/√2) e^{−|β|²/2} e^{∓iωβα*} sin(gβ).
    /// ```
    pub fn classical_coefficients(&self, alpha: C64, t: f64) -> ClassicalCoefficients {
        let beta = self.beta(t);
        let gb = C64::new(self.g, 0.0) * beta;
        let envelope = C64::new(
            std::f64::consts::FRAC_1_SQRT_2 * (-0.5 * beta.norm_sqr()).exp(),
            0.0,
        );
        let phase_plus = (-C64::I * C64::new(self.omega, 0.0) * beta * alpha.conj()).exp();
        let phase_minus = (C64::I * C64::new(self.omega, 0.0) * beta * alpha.conj()).exp();
        ClassicalCoefficients {
            d: [
                envelope * phase_plus * gb.cos(),
                envelope * phase_minus * gb.cos(),
            ],
            b: [
                -C64::I * envelope * phase_plus * gb.sin(),
                C64::I * envelope * phase_minus * gb.sin(),
            ],
        }
    }

    /// F^C_±(α) assembled from the classical coefficients.
    pub fn classical_f(&self, alpha: C64, t: f64) -> [Operator; 2] {
        let coeffs = self.classical_coefficients(alpha, t);
        let one = Operator::identity(Signature::Qubit);
        let sz = Operator::sigma_z();
        [
            one.scale(coeffs.d[0]) + sz.scale(coeffs.b[0]),
            one.scale(coeffs.d[1]) + sz.scale(coeffs.b[1]),
        ]
    }

    /// Residuals of the operator identities behind the displacement
    /// factorization: with Y = (gσ_z + ωα𝟙)⊗a† and Ȳ = (gσ_z + ωα*𝟙)⊗a,
    ///
    /// ```text
    /// [Y, Ȳ] = −(g² + ω²|α|²) 𝟙⊗𝟙 − gω(α + α*) σ_z⊗𝟙,
    /// [Y, [Y, Ȳ]] = [Ȳ, [Y, Ȳ]] = 0,
    /// ```
    ///
    /// all measured in max-norm on the faithful block ξ < n_max/2.
    pub fn bch_commutator_check(&self, fs: &FockSpace, alpha: C64) -> BchResiduals {
        let block = fs.n_max() / 2;
        let g = C64::new(self.g, 0.0);
        let w = C64::new(self.omega, 0.0);
        let qubit_y = Operator::sigma_z().scale(g) + Operator::identity(Signature::Qubit).scale(w * alpha);
        let qubit_ybar =
            Operator::sigma_z().scale(g) + Operator::identity(Signature::Qubit).scale(w * alpha.conj());
        let y = tensor(&qubit_y, &fs.creation()).expect("qubit ⊗ boson");
        let ybar = tensor(&qubit_ybar, &fs.annihilation()).expect("qubit ⊗ boson");

        let comm = y.commutator(&ybar);
        let scalar = -(self.g * self.g + self.omega * self.omega * alpha.norm_sqr());
        let linear = -self.g * self.omega * 2.0 * alpha.re;
        let expected = tensor(
            &(Operator::identity(Signature::Qubit).scale(C64::new(scalar, 0.0))
                + Operator::sigma_z().scale(C64::new(linear, 0.0))),
            &fs.identity(),
        )
        .expect("qubit ⊗ boson");

        BchResiduals {
            commutator: block_max_norm(&(&comm - &expected), fs.n_max(), block),
            double_y: block_max_norm(&y.commutator(&comm), fs.n_max(), block),
            double_ybar: block_max_norm(&ybar.commutator(&comm), fs.n_max(), block),
        }
    }

    /// The classical-limit master equation: H_eff = h·σ_z plus the σ_z jump
    /// at rate T(t). The field h may be a configured constant; see
    /// [`effective_field`](Self::effective_field) for the grid-computed value.
    pub fn classical_equation(&self, h_field: f64) -> ClassicalEquation {
        let model = *self;
        ClassicalEquation {
            h_eff: Box::new(move |_| Operator::sigma_z().scale(C64::new(h_field, 0.0))),
            jumps: vec![JumpChannel::new(
                move |t| model.rate(t),
                |_| Operator::sigma_z(),
            )],
        }
    }

    /// The effective-field strength h at the instantaneous state, evaluated
    /// by quadrature: h = Σ_j w_j χ²_j⁻¹ Σ_k Im(a_k b_k + |a_k|² d_k* b_k)
    /// over unmasked interior points, with b_k from the joint Schrödinger
    /// derivative and d_k the identity component of F_k.
    pub fn effective_field(
        &self,
        fs: &FockSpace,
        psi: &JointState,
        field: &ParametricField,
    ) -> Result<f64> {
        let h = self.hamiltonian(fs);
        let terms = self.interaction_terms();
        let w = field.grid().weight();
        let mut total = 0.0;
        for j in 0..field.len() {
            if field.is_null(j) {
                continue;
            }
            let Some(f_ops) = compute_f(field, &terms, j) else {
                continue;
            };
            let p = field.point(j);
            let b = coefficient_b_at(&h, psi, p.alpha)?;
            let mut point_sum = 0.0;
            for k in 0..2 {
                let d_k = 0.5 * (f_ops[k].get(0, 0) + f_ops[k].get(1, 1));
                point_sum += (p.a[k] * b[k]).im
                    + (C64::new(p.a[k].norm_sqr(), 0.0) * d_k.conj() * b[k]).im;
            }
            total += w * point_sum / p.chi2;
        }
        Ok(total)
    }
}

/// The coefficient pair of F^C_± = d_±𝟙 + b_±σ_z.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalCoefficients {
    pub d: [C64; 2],
    pub b: [C64; 2],
}

/// Max-norms returned by the commutator identity check.
#[derive(Debug, Clone, Copy)]
pub struct BchResiduals {
    pub commutator: f64,
    pub double_y: f64,
    pub double_ybar: f64,
}

impl BchResiduals {
    pub fn worst(&self) -> f64 {
        self.commutator.max(self.double_y).max(self.double_ybar)
    }
}

fn block_max_norm(op: &Operator, n_max: usize, block: usize) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..2 {
        for l in 0..2 {
            for n in 0..block {
                for m in 0..block {
                    worst = worst.max(op.get(k * n_max + n, l * n_max + m).norm());
                }
            }
        }
    }
    worst
}

/// Excitation exchange with the mode: H = 𝟙⊗ωa†a + g(σ⁺⊗a + σ⁻⊗a†).
#[derive(Debug, Clone)]
pub struct JaynesCummingsModel {
    pub omega: f64,
    pub g: f64,
    /// Classical-limit jump rate T̃ (configuration input).
    pub rate: f64,
    /// Classical-limit effective Hamiltonian H̃_eff (configuration input).
    pub h_eff: Operator,
}

impl JaynesCummingsModel {
    pub fn new(omega: f64, g: f64, rate: f64, h_eff: Operator) -> Result<Self> {
        if omega.is_nan() || omega <= 0.0 {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        if g < 0.0 {
            return Err(Error::Config(format!("g must be nonnegative, got {g}")));
        }
        if rate < 0.0 {
            return Err(Error::Config(format!(
                "classical-limit rate must be nonnegative, got {rate}"
            )));
        }
        if h_eff.signature() != Signature::Qubit {
            return Err(Error::Signature(
                "effective Hamiltonian must act on the qubit".to_string(),
            ));
        }
        Ok(JaynesCummingsModel {
            omega,
            g,
            rate,
            h_eff,
        })
    }

    /// The interaction terms {(ω, 𝟙, a†a), (g, σ⁺, a), (g, σ⁻, a†)}.
    pub fn interaction_terms(&self) -> Vec<InteractionTerm> {
        vec![
            InteractionTerm::new(
                self.omega,
                Operator::identity(Signature::Qubit),
                EnvOpKind::Number,
            )
            .expect("qubit operator"),
            InteractionTerm::new(self.g, Operator::sigma_plus(), EnvOpKind::Annihilation)
                .expect("qubit operator"),
            InteractionTerm::new(self.g, Operator::sigma_minus(), EnvOpKind::Creation)
                .expect("qubit operator"),
        ]
    }

    pub fn hamiltonian(&self, fs: &FockSpace) -> Operator {
        let free = tensor(
            &Operator::identity(Signature::Qubit),
            &fs.number().scale(C64::new(self.omega, 0.0)),
        )
        .expect("qubit ⊗ boson");
        let exchange = tensor(&Operator::sigma_plus(), &fs.annihilation()).expect("qubit ⊗ boson")
            + tensor(&Operator::sigma_minus(), &fs.creation()).expect("qubit ⊗ boson");
        free + exchange.scale(C64::new(self.g, 0.0))
    }

    /// The constant-coefficient classical-limit equation
    /// ρ̇ = −i[H̃_eff, ρ] + T̃(σ⁺ρσ⁻ − ½{σ⁻σ⁺, ρ}).
    pub fn classical_equation(&self) -> ClassicalEquation {
        let h = self.h_eff.clone();
        ClassicalEquation {
            h_eff: Box::new(move |_| h.clone()),
            jumps: vec![JumpChannel::constant(self.rate, Operator::sigma_plus())],
        }
    }

    /// The classical-limit factorized displacement action
    /// e^{−igσ⁻⊗a†} · e^{−iωα𝟙⊗a†} evaluated on the reference state.
    ///
    /// The second factor acts displacement-like on the vacuum, producing the
    /// normalized coherent state with label −iωα; the first truncates exactly
    /// at first order because (σ⁻)² = 0. The qubit reference is the state
    /// annihilated by σ⁻ (that is |−⟩ in the σ⁺|−⟩ = |+⟩ convention), which
    /// keeps the truncated factorization norm-deficient rather than
    /// norm-inflating. Returned in the joint layout k·n_max + ξ.
    pub fn factorized_displacement(
        &self,
        fs: &FockSpace,
        alpha: C64,
        tol: &Tolerances,
    ) -> Result<ndarray::Array1<C64>> {
        let label = -C64::I * C64::new(self.omega, 0.0) * alpha;
        let env = coherent_vector(&fs.clone(), CoherentPoint::new(label), tol)?;
        let n = fs.n_max();
        let mut joint = ndarray::Array1::<C64>::zeros(2 * n);
        // |−⟩ ⊗ |label⟩
        for (xi, v) in env.iter().enumerate() {
            joint[n + xi] = *v;
        }
        // (𝟙 − ig σ⁻⊗a†), exact because the generator is nilpotent. With the
        // reference annihilated by σ⁻ this leaves the state untouched; the
        // construction is kept explicit so any reference works.
        let nilpotent = tensor(&Operator::sigma_minus(), &fs.creation())
            .expect("qubit ⊗ boson")
            .scale(C64::new(0.0, -self.g));
        let correction = nilpotent.apply(&joint);
        Ok(joint + correction)
    }
}

/// One row of the strong-coupling sweep.
#[derive(Debug, Clone, Copy)]
pub struct StrongCouplingRow {
    pub g: f64,
    pub max_rate: f64,
    /// Fraction of one period with T(t)/max T below the threshold.
    pub subthreshold_fraction: f64,
}

/// Sample T(t)/max T over one period for each coupling and report the
/// fraction of the period spent below `threshold`. The fraction grows with
/// the coupling: the rate concentrates into ever narrower spikes while the
/// qubit otherwise evolves unitarily.
pub fn strong_coupling_report(
    omega: f64,
    g_list: &[f64],
    samples: usize,
    threshold: f64,
) -> Result<Vec<StrongCouplingRow>> {
    if g_list.is_empty() {
        return Err(Error::Config("empty coupling list".to_string()));
    }
    if samples < 16 {
        return Err(Error::Config("need at least 16 samples per period".to_string()));
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let mut rows = Vec::with_capacity(g_list.len());
    for &g in g_list {
        let model = PureDephasingModel::new(omega, g)?;
        let rates: Vec<f64> = (0..samples)
            .map(|i| model.rate(period * i as f64 / samples as f64))
            .collect();
        let max_rate = rates.iter().fold(0.0_f64, |m, &r| m.max(r));
        let subthreshold_fraction = if max_rate > 0.0 {
            rates.iter().filter(|&&r| r < threshold * max_rate).count() as f64
                / samples as f64
        } else {
            // T ≡ 0: the whole period is decoherence-free.
            1.0
        };
        rows.push(StrongCouplingRow {
            g,
            max_rate,
            subthreshold_fraction,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_gksl, hamilton_flow};
    use crate::operator::{expm, DensityChecks, DensityOperator};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn checks() -> DensityChecks {
        DensityChecks {
            trace: 1e-9,
            hermiticity: 1e-9,
            positivity: 1e-9,
        }
    }

    #[test]
    fn beta_closed_form() {
        let m = PureDephasingModel::new(1.0, 0.2).unwrap();
        assert!(m.beta(0.0).norm() < 1e-15);
        // 1 − e^{−iπ} = 2
        assert!((m.beta(PI) - c(0.4, 0.0)).norm() < 1e-14);
        // |β| is 2π/ω-periodic with maximum 2g/ω.
        let period = 2.0 * PI;
        for t in [0.3, 1.1, 2.9] {
            assert_abs_diff_eq!(
                m.beta(t).norm(),
                m.beta(t + period).norm(),
                epsilon = 1e-12
            );
            assert!(m.beta(t).norm() <= 2.0 * 0.2 + 1e-12);
        }
        assert_abs_diff_eq!(m.beta(PI).norm(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn rate_vanishes_at_period_boundaries_and_stays_nonnegative() {
        let m = PureDephasingModel::new(1.0, 0.8).unwrap();
        assert_abs_diff_eq!(m.rate(0.0), 0.0, epsilon = 1e-15);
        for n in 1..4 {
            assert!(m.rate(2.0 * PI * n as f64) < 1e-24);
        }
        for i in 0..200 {
            let t = 2.0 * PI * i as f64 / 200.0;
            assert!(m.rate(t) >= 0.0);
            assert_abs_diff_eq!(m.rate(t), m.rate(t + 2.0 * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn small_g_asymptote_value_and_accuracy() {
        let m = PureDephasingModel::new(1.0, 0.05).unwrap();
        // (g⁴/ω²)(1 − cos π) = 2 g⁴
        let asym = m.small_g_asymptote(PI);
        assert_abs_diff_eq!(asym, 1.25e-5, epsilon = 1e-12);
        // Relative deviation of the full rate is O(g²).
        let rel = (m.rate(PI) - asym).abs() / asym;
        assert!(rel < 0.05, "relative deviation {rel}");
    }

    #[test]
    fn classical_coefficients_at_t_zero() {
        let m = PureDephasingModel::new(1.0, 0.4).unwrap();
        let coeffs = m.classical_coefficients(c(0.7, -0.2), 0.0);
        for k in 0..2 {
            assert!((coeffs.d[k] - c(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
            assert!(coeffs.b[k].norm() < 1e-14);
        }
    }

    #[test]
    fn classical_coefficients_square_identity() {
        // d_±² + b_±² = ½ e^{−|β|²} e^{∓2iωβα*} cos(2gβ), because the ∓i in
        // b_± flips the sign of sin² in the sum.
        let m = PureDephasingModel::new(1.3, 0.6).unwrap();
        for (alpha, t) in [(c(0.5, 0.2), 0.7), (c(-1.1, 0.4), 2.3), (c(0.0, -0.9), 4.1)] {
            let beta = m.beta(t);
            let coeffs = m.classical_coefficients(alpha, t);
            for k in 0..2 {
                let sign = if k == 0 { -1.0 } else { 1.0 };
                let expected = c(0.5 * (-beta.norm_sqr()).exp(), 0.0)
                    * (C64::new(0.0, sign * 2.0 * m.omega) * beta * alpha.conj()).exp()
                    * (c(2.0 * m.g, 0.0) * beta).cos();
                let got = coeffs.d[k] * coeffs.d[k] + coeffs.b[k] * coeffs.b[k];
                assert!((got - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn classical_coefficients_reproduce_rate_at_peak() {
        // For α ∝ β the phase factors are unimodular and
        // Σ_k γ_k|b_k|² with γ_± = ½ equals T(t) exactly.
        let m = PureDephasingModel::new(1.0, 0.9).unwrap();
        for t in [0.4, 1.9, 3.3] {
            let alpha = m.beta(t) * c(0.5, 0.0);
            let coeffs = m.classical_coefficients(alpha, t);
            let sum = 0.5 * coeffs.b[0].norm_sqr() + 0.5 * coeffs.b[1].norm_sqr();
            assert_abs_diff_eq!(sum, m.rate(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn alpha_resolved_rate_matches_peak_rate_on_the_ray() {
        let m = PureDephasingModel::new(1.0, 0.9).unwrap();
        for t in [0.4, 1.9] {
            let alpha = m.beta(t) * c(0.3, 0.0);
            // Im(α*β) = 0 on the ray through β.
            assert_abs_diff_eq!(m.rate_alpha_resolved(alpha, t), m.rate(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn bch_residuals_vanish_on_the_faithful_block() {
        let fs = FockSpace::new(40).unwrap();
        // Trivial case first.
        let trivial = PureDephasingModel::new(1.0, 0.0).unwrap();
        let r = trivial.bch_commutator_check(&fs, C64::ZERO);
        assert!(r.worst() < 1e-12);

        let m = PureDephasingModel::new(1.0, 0.3).unwrap();
        let r = m.bch_commutator_check(&fs, c(1.0, 0.5));
        assert!(r.commutator < 1e-8, "commutator residual {}", r.commutator);
        assert!(r.double_y < 1e-8 && r.double_ybar < 1e-8);
    }

    #[test]
    fn dephasing_classical_equation_coherence_law() {
        // |ρ_{+−}(t)| = ½ exp(−2∫₀ᵗ T), with the integral done by fine
        // trapezoidal quadrature as an independent oracle.
        let tol = Tolerances::default();
        let m = PureDephasingModel::new(1.0, 0.8).unwrap();
        let eq = m.classical_equation(0.0);
        let rho0 = DensityOperator::pure_qubit([C64::ONE, C64::ONE], checks()).unwrap();
        let times: Vec<f64> = (0..=8).map(|i| 2.0 * PI * i as f64 / 8.0).collect();
        let run = evolve_gksl(eq.h_eff, &eq.jumps, &rho0, &times, 1e-3, &tol).unwrap();
        for (t, rho) in run.trajectory.iter() {
            let n = 20_000;
            let dt = t / n as f64;
            let mut integral = 0.0;
            if t > 0.0 {
                for i in 0..n {
                    let a = m.rate(i as f64 * dt);
                    let b = m.rate((i + 1) as f64 * dt);
                    integral += 0.5 * (a + b) * dt;
                }
            }
            let expect = 0.5 * (-2.0 * integral).exp();
            assert_abs_diff_eq!(rho.op().get(0, 1).norm(), expect, epsilon = 1e-6);
            // Populations stay put.
            assert_abs_diff_eq!(rho.op().get(0, 0).re, 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn dephasing_with_zero_coupling_is_unitary() {
        let tol = Tolerances::default();
        let m = PureDephasingModel::new(1.0, 0.0).unwrap();
        for t in [0.0, 0.7, 3.0] {
            assert_eq!(m.rate(t), 0.0);
        }
        // The packaged equation then evolves coherence unitarily.
        let eq = m.classical_equation(0.4);
        let rho0 = DensityOperator::pure_qubit([C64::ONE, C64::ONE], checks()).unwrap();
        let times: Vec<f64> = (0..=5).map(|i| i as f64).collect();
        let run = evolve_gksl(eq.h_eff, &eq.jumps, &rho0, &times, 1e-3, &tol).unwrap();
        for (_, rho) in run.trajectory.iter() {
            assert_abs_diff_eq!(rho.op().get(0, 1).norm(), 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn effective_field_vanishes_for_the_symmetric_initial_state() {
        use std::sync::Arc;
        let tol = Tolerances::default();
        let m = PureDephasingModel::new(1.0, 0.4).unwrap();
        let fs = FockSpace::new(16).unwrap();
        let mut env = ndarray::Array1::zeros(16);
        env[0] = C64::ONE;
        let inv = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = JointState::from_product([inv, inv], &env, &tol).unwrap();
        let grid = Arc::new(crate::bosonic::PhaseSpaceGrid::make(6.0, 0.1).unwrap());
        let field = crate::precs::decompose(&psi, grid, &tol).unwrap();
        let h = m.effective_field(&fs, &psi, &field).unwrap();
        assert!(h.abs() < 1e-6, "effective field {h}");
    }

    #[test]
    fn jc_classical_equation_decay_law() {
        let tol = Tolerances::default();
        let m = JaynesCummingsModel::new(1.0, 0.5, 1.0, Operator::zeros(Signature::Qubit))
            .unwrap();
        let eq = m.classical_equation();
        let rho0 = DensityOperator::pure_qubit([C64::ZERO, C64::ONE], checks()).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
        let run = evolve_gksl(eq.h_eff, &eq.jumps, &rho0, &times, 1e-3, &tol).unwrap();
        for (t, rho) in run.trajectory.iter() {
            assert_abs_diff_eq!(rho.op().get(1, 1).re, (-t).exp(), epsilon = 1e-6);
        }
        assert!(run.report.max_trace_deviation < 1e-9);
        assert!(run.report.min_eigenvalue > -1e-8);
    }

    #[test]
    fn jc_rejects_negative_rate() {
        assert!(matches!(
            JaynesCummingsModel::new(1.0, 0.5, -0.1, Operator::zeros(Signature::Qubit)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn jc_zero_rate_is_unitary() {
        let tol = Tolerances::default();
        let hfield = 0.3;
        let m = JaynesCummingsModel::new(
            1.0,
            0.5,
            0.0,
            Operator::sigma_z().scale(c(hfield, 0.0)),
        )
        .unwrap();
        let eq = m.classical_equation();
        let rho0 = DensityOperator::pure_qubit([C64::ONE, C64::ONE], checks()).unwrap();
        let times: Vec<f64> = (0..=6).map(|i| 0.4 * i as f64).collect();
        let run = evolve_gksl(eq.h_eff, &eq.jumps, &rho0, &times, 1e-3, &tol).unwrap();
        for (t, rho) in run.trajectory.iter() {
            let expect = c(0.5, 0.0) * c(0.0, -2.0 * hfield * t).exp();
            assert!((rho.op().get(0, 1) - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn nilpotent_factor_truncates_exactly() {
        // expm(−igσ⁻⊗a†) = 𝟙 − igσ⁻⊗a† because (σ⁻⊗a†)² = 0.
        let fs = FockSpace::new(12).unwrap();
        let gen = tensor(&Operator::sigma_minus(), &fs.creation())
            .unwrap()
            .scale(c(0.0, -0.7));
        let exact = Operator::identity(Signature::Joint(12)) + gen.clone();
        let series = expm(&gen, C64::ONE).unwrap();
        assert!((series - exact).max_abs() < 1e-12);
    }

    #[test]
    fn factorized_displacement_limits() {
        let tol = Tolerances::default();
        let fs = FockSpace::new(30).unwrap();
        let alpha = c(0.8, 0.3);

        // g = 0 reduces to the coherent state with label −iωα.
        let m0 = JaynesCummingsModel::new(1.2, 0.0, 0.5, Operator::zeros(Signature::Qubit))
            .unwrap();
        let out = m0.factorized_displacement(&fs, alpha, &tol).unwrap();
        let label = -C64::I * c(1.2, 0.0) * alpha;
        let expect = coherent_vector(&fs, CoherentPoint::new(label), &tol).unwrap();
        for xi in 0..30 {
            assert!((out[30 + xi] - expect[xi]).norm() < 1e-12);
            assert!(out[xi].norm() < 1e-15);
        }

        // Norm stays at or below one, with only the truncation deficit.
        let m = JaynesCummingsModel::new(1.2, 0.9, 0.5, Operator::zeros(Signature::Qubit))
            .unwrap();
        let out = m.factorized_displacement(&fs, alpha, &tol).unwrap();
        let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm <= 1.0 + 1e-12);
        assert!(norm > 1.0 - 1e-6);
    }

    #[test]
    fn strong_coupling_fraction_grows_with_g() {
        // The concentration effect sets in around g ≈ ω: below that the
        // normalized profile still reshapes non-monotonically (measured dip
        // between g = 0.5 and g = 1), so the ladder starts at ω.
        let rows = strong_coupling_report(1.0, &[1.0, 2.0, 4.0, 8.0], 4096, 0.01).unwrap();
        assert_eq!(rows.len(), 4);
        for w in rows.windows(2) {
            assert!(
                w[1].subthreshold_fraction >= w[0].subthreshold_fraction,
                "fraction not monotone: {w:?}"
            );
        }
        assert!(rows[3].subthreshold_fraction > 0.5);
    }

    #[test]
    fn strong_coupling_small_g_baseline() {
        // As g → 0 the normalized profile tends to (1 − cos ωt)/2 whose
        // sub-1% fraction is arccos(0.98)/π ≈ 0.0638.
        let rows = strong_coupling_report(1.0, &[1e-3], 4096, 0.01).unwrap();
        let baseline = (0.98_f64).acos() / PI;
        assert_abs_diff_eq!(rows[0].subthreshold_fraction, baseline, epsilon = 5e-3);
    }

    #[test]
    fn free_flow_feeds_the_branch_labels() {
        // The conditional label of the dephasing branch s = ±1 solves
        // Ω̇ = −i(ωΩ + gs): Ω(t) = (α₀ + sg/ω)e^{−iωt} − sg/ω. The s = 0
        // slice is the free flow.
        let (omega, g) = (1.3, 0.4);
        let alpha0 = c(0.9, -0.2);
        for s in [-1.0, 1.0] {
            let shift = c(s * g / omega, 0.0);
            for t in [0.0, 0.7, 2.1] {
                let label = hamilton_flow(omega, alpha0 + shift, t) - shift;
                // Derivative check by finite differences.
                let dt = 1e-6;
                let dot = (hamilton_flow(omega, alpha0 + shift, t + dt)
                    - hamilton_flow(omega, alpha0 + shift, t - dt))
                    / c(2.0 * dt, 0.0);
                let expect = -C64::I * (c(omega, 0.0) * label + c(g * s, 0.0));
                assert!((dot - expect).norm() < 1e-6);
            }
        }
    }
}
