//! Time-evolution engines.
//!
//! Three integrators live here:
//! - [`evolve_exact`]: joint Schrödinger propagation |ψ(t)⟩ = e^{−iHt}|ψ₀⟩
//!   with one cached matrix exponential per distinct time gap;
//! - [`evolve_gksl`]: fixed-step classic RK4 for
//!   ρ̇ = −i[H(t), ρ] + Σ_k γ_k(t)(L_k ρ L_k† − ½{L_k†L_k, ρ});
//! - [`evolve_decoupled_markov`]: the branch-resolved classical-limit
//!   equation, evolving one matrix per phase-space branch and summing
//!   ρ = Σ_i p_i P_i.
//!
//! Steps are fixed-size (no adaptivity): the rates are smooth and bounded in
//! both supported models, and determinism matters more here than step
//! economy. Positivity violations are reported, never corrected; a breach
//! beyond tolerance must stay visible.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::bosonic::{bra_coefficients, PhaseSpaceGrid};
use crate::error::{Error, Result};
use crate::operator::{
    expm, spectral_floor, DensityChecks, DensityOperator, Operator, Signature,
};
use crate::precs::JointState;
use crate::tolerance::Tolerances;

/// Sampled states at strictly increasing times (units 1/ω).
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    states: Vec<S>,
}

impl<S> Trajectory<S> {
    fn with_capacity(n: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: f64, state: S) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("empty time list".to_string()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("times must be strictly increasing".to_string()));
    }
    Ok(())
}

/// Exact joint propagation.
///
/// `psi0` is the state at `times[0]`; each later sample applies the cached
/// propagator e^{−iH·Δt} for its gap. For uniform time lists this costs a
/// single matrix exponential.
pub fn evolve_exact(
    h: &Operator,
    psi0: &JointState,
    times: &[f64],
    tol: &Tolerances,
) -> Result<Trajectory<JointState>> {
    check_times(times)?;
    let n = match h.signature() {
        Signature::Joint(n) => n,
        sig => {
            return Err(Error::Signature(format!(
                "evolve_exact needs a joint Hamiltonian, got {sig}"
            )))
        }
    };
    if n != psi0.n_max() {
        return Err(Error::Signature(format!(
            "Hamiltonian n_max = {n} but state has n_max = {}",
            psi0.n_max()
        )));
    }
    if !h.is_hermitian(tol.hermiticity) {
        return Err(Error::Contract(format!(
            "evolve_exact: Hamiltonian residual {:.3e} exceeds {:.1e}",
            h.hermiticity_residual(),
            tol.hermiticity
        )));
    }

    let mut propagators: HashMap<u64, Operator> = HashMap::new();
    let mut traj = Trajectory::with_capacity(times.len());
    let mut psi = psi0.as_vector();
    traj.push(times[0], psi0.clone());
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let key = gap.to_bits();
        let u = match propagators.get(&key) {
            Some(u) => u,
            None => {
                let u = expm(h, C64::new(0.0, -gap))?;
                propagators.entry(key).or_insert(u)
            }
        };
        psi = u.apply(&psi);
        traj.push(w[1], JointState::from_vector(&psi, tol)?);
    }
    Ok(traj)
}

/// Coherent-label flow of the isolated mode, α(t) = α₀e^{−iωt}.
///
/// Solves α̇ = −i ∂H/∂α* for H(α) = ω|α|²; |α| is conserved exactly.
pub fn hamilton_flow(omega: f64, alpha0: C64, t: f64) -> C64 {
    alpha0 * C64::new(0.0, -omega * t).exp()
}

/// One jump channel: a nonnegative rate γ(t) and an operator L(t), both pure
/// functions of time.
pub struct JumpChannel {
    rate: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    op: Box<dyn Fn(f64) -> Operator + Send + Sync>,
}

impl JumpChannel {
    pub fn new(
        rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
        op: impl Fn(f64) -> Operator + Send + Sync + 'static,
    ) -> Self {
        JumpChannel {
            rate: Box::new(rate),
            op: Box::new(op),
        }
    }

    pub fn constant(rate: f64, op: Operator) -> Self {
        JumpChannel::new(move |_| rate, move |_| op.clone())
    }

    pub fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }

    pub fn op(&self, t: f64) -> Operator {
        (self.op)(t)
    }
}

impl std::fmt::Debug for JumpChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "JumpChannel(..)")
    }
}

/// Conservation diagnostics accumulated over a master-equation run.
#[derive(Debug, Clone, Default)]
pub struct ConservationReport {
    pub max_trace_deviation: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// Set when the spectral floor dipped below −tolerance; data are still
    /// returned.
    pub positivity_warning: bool,
}

/// A master-equation run: the sampled trajectory plus its diagnostics.
pub struct GkslRun {
    pub trajectory: Trajectory<DensityOperator>,
    pub report: ConservationReport,
}

fn gksl_rhs_at(
    t: f64,
    rho: &Array2<C64>,
    h_eff: &Operator,
    jumps: &[(f64, Operator)],
) -> Array2<C64> {
    let hmat = h_eff.matrix();
    let mut out = hmat.dot(rho) - rho.dot(hmat);
    out.mapv_inplace(|z| z * (-C64::I));
    let _ = t;
    let half = C64::new(0.5, 0.0);
    for (rate, l) in jumps {
        let lmat = l.matrix();
        let ldag = lmat.t().mapv(|z| z.conj());
        let ldl = ldag.dot(lmat);
        let sandwich = lmat.dot(rho).dot(&ldag);
        let anti = ldl.dot(rho) + rho.dot(&ldl);
        let r = C64::new(*rate, 0.0);
        out = out + (sandwich - anti.mapv(|z| z * half)).mapv(|z| z * r);
    }
    out
}

struct StageData {
    h_eff: Operator,
    jumps: Vec<(f64, Operator)>,
}

fn stage_data(
    t: f64,
    h_eff: &impl Fn(f64) -> Operator,
    jumps: &[JumpChannel],
) -> Result<StageData> {
    let h = h_eff(t);
    if h.signature() != Signature::Qubit {
        return Err(Error::Signature(
            "effective Hamiltonian must act on the qubit".to_string(),
        ));
    }
    let mut evaluated = Vec::with_capacity(jumps.len());
    for ch in jumps {
        let rate = ch.rate(t);
        if rate < 0.0 {
            return Err(Error::Contract(format!(
                "negative jump rate {rate:.3e} at t = {t}"
            )));
        }
        evaluated.push((rate, ch.op(t)));
    }
    Ok(StageData {
        h_eff: h,
        jumps: evaluated,
    })
}

fn rk4_step(
    t: f64,
    dt: f64,
    rho: &Array2<C64>,
    h_eff: &impl Fn(f64) -> Operator,
    jumps: &[JumpChannel],
) -> Result<Array2<C64>> {
    let s0 = stage_data(t, h_eff, jumps)?;
    let s1 = stage_data(t + 0.5 * dt, h_eff, jumps)?;
    let s2 = stage_data(t + dt, h_eff, jumps)?;
    let dtc = C64::new(dt, 0.0);
    let half = C64::new(0.5, 0.0);

    let k1 = gksl_rhs_at(t, rho, &s0.h_eff, &s0.jumps);
    let r2 = rho + &k1.mapv(|z| z * half * dtc);
    let k2 = gksl_rhs_at(t + 0.5 * dt, &r2, &s1.h_eff, &s1.jumps);
    let r3 = rho + &k2.mapv(|z| z * half * dtc);
    let k3 = gksl_rhs_at(t + 0.5 * dt, &r3, &s1.h_eff, &s1.jumps);
    let r4 = rho + &k3.mapv(|z| z * dtc);
    let k4 = gksl_rhs_at(t + dt, &r4, &s2.h_eff, &s2.jumps);

    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    Ok(rho + &((k1 + k2.mapv(|z| z * two) + k3.mapv(|z| z * two) + k4).mapv(|z| z * sixth)))
}

fn snapshot_checks(tol: &Tolerances) -> DensityChecks {
    // Hard failure only when the integration has genuinely broken down;
    // small breaches below these bounds surface as warnings in the report.
    DensityChecks {
        trace: (tol.trace * 1e3).max(1e-6),
        hermiticity: (tol.hermiticity * 1e3).max(1e-6),
        positivity: 1e-6,
    }
}

fn record_snapshot(
    traj: &mut Trajectory<DensityOperator>,
    report: &mut ConservationReport,
    t: f64,
    rho: &Array2<C64>,
    checks: DensityChecks,
    tol: &Tolerances,
) -> Result<()> {
    let op = Operator::new(rho.clone(), Signature::Qubit)?;
    let trace_dev = (op.trace() - C64::ONE).norm();
    let herm = op.hermiticity_residual();
    let floor = spectral_floor(&op)?;
    report.max_trace_deviation = report.max_trace_deviation.max(trace_dev);
    report.max_hermiticity_residual = report.max_hermiticity_residual.max(herm);
    report.min_eigenvalue = report.min_eigenvalue.min(floor);
    if floor < -tol.positivity {
        report.positivity_warning = true;
    }
    traj.push(t, DensityOperator::new(op, checks)?);
    Ok(())
}

/// Integrate the GKSL equation with classic fixed-step RK4.
///
/// `rho0` is the state at `times[0]`; sample times are hit exactly by
/// splitting each gap into near-`dt` substeps. Trace and Hermiticity are
/// monitored per snapshot, and the spectral floor is tracked via
/// [`spectral_floor`]; a dip below −`tol.positivity` sets the warning flag.
pub fn evolve_gksl(
    h_eff: impl Fn(f64) -> Operator,
    jumps: &[JumpChannel],
    rho0: &DensityOperator,
    times: &[f64],
    dt: f64,
    tol: &Tolerances,
) -> Result<GkslRun> {
    check_times(times)?;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let checks = snapshot_checks(tol);
    let mut traj = Trajectory::with_capacity(times.len());
    let mut report = ConservationReport {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut rho = rho0.op().matrix().clone();
    record_snapshot(&mut traj, &mut report, times[0], &rho, checks, tol)?;
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let nsub = ((gap / dt - 1e-9).ceil() as usize).max(1);
        let h = gap / nsub as f64;
        for i in 0..nsub {
            let t = w[0] + i as f64 * h;
            rho = rk4_step(t, h, &rho, &h_eff, jumps)?;
        }
        record_snapshot(&mut traj, &mut report, w[1], &rho, checks, tol)?;
    }
    Ok(GkslRun {
        trajectory: traj,
        report,
    })
}

/// One classical-limit branch: weight p_i, initial projector P_i, and the
/// branch-local jump channels (rates γ_k(Ω_i(t)) with operators F_k(Ω_i(t))).
pub struct Branch {
    pub weight: f64,
    pub projector: Operator,
    pub jumps: Vec<JumpChannel>,
}

/// Integrate the branch-resolved classical-limit equation
/// ρ̇ = −i[H_eff, ρ] + Σ_{ki} p_i γ_ki (F_ki P_i F_ki† − ½{F_ki†F_ki, P_i}),
/// evolving each branch matrix separately and assembling ρ = Σ_i p_i P_i.
///
/// When √γ_ki·F_ki is the same for every branch this reduces, by linearity,
/// to [`evolve_gksl`] on ρ directly.
pub fn evolve_decoupled_markov(
    h_eff: impl Fn(f64) -> Operator,
    branches: &[Branch],
    times: &[f64],
    dt: f64,
    tol: &Tolerances,
) -> Result<GkslRun> {
    check_times(times)?;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    if branches.is_empty() {
        return Err(Error::Config("no branches supplied".to_string()));
    }
    let total: f64 = branches.iter().map(|b| b.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "branch weights sum to {total}, expected 1"
        )));
    }
    for (i, b) in branches.iter().enumerate() {
        if b.weight < 0.0 {
            return Err(Error::Config(format!("branch {i} has negative weight")));
        }
        if b.projector.signature() != Signature::Qubit {
            return Err(Error::Signature(format!(
                "branch {i} projector must be a qubit operator"
            )));
        }
        let idem = (&(&b.projector * &b.projector) - &b.projector).max_abs();
        let tr = (b.projector.trace() - C64::ONE).norm();
        if idem > 1e-8 || tr > 1e-8 {
            return Err(Error::Contract(format!(
                "branch {i} is not a rank-1 projector (idempotency {idem:.2e}, trace dev {tr:.2e})"
            )));
        }
    }

    let checks = snapshot_checks(tol);
    let mut traj = Trajectory::with_capacity(times.len());
    let mut report = ConservationReport {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut parts: Vec<Array2<C64>> = branches
        .iter()
        .map(|b| b.projector.matrix().clone())
        .collect();

    let assemble = |parts: &[Array2<C64>]| -> Array2<C64> {
        let mut rho = Array2::<C64>::zeros((2, 2));
        for (b, p) in branches.iter().zip(parts) {
            rho = rho + p.mapv(|z| z * C64::new(b.weight, 0.0));
        }
        rho
    };

    record_snapshot(&mut traj, &mut report, times[0], &assemble(&parts), checks, tol)?;
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let nsub = ((gap / dt - 1e-9).ceil() as usize).max(1);
        let h = gap / nsub as f64;
        for i in 0..nsub {
            let t = w[0] + i as f64 * h;
            for (part, branch) in parts.iter_mut().zip(branches) {
                *part = rk4_step(t, h, part, &h_eff, &branch.jumps)?;
            }
        }
        record_snapshot(&mut traj, &mut report, w[1], &assemble(&parts), checks, tol)?;
    }
    Ok(GkslRun {
        trajectory: traj,
        report,
    })
}

/// b_k(α) = Σ_ξ ċ_{kξ} ⟨α|ξ⟩ with ċ = −iH·c from the joint Schrödinger
/// equation, using the same ⟨α|ξ⟩ kernel as the decomposition.
pub fn coefficient_b_at(h: &Operator, psi: &JointState, alpha: C64) -> Result<[C64; 2]> {
    let n = match h.signature() {
        Signature::Joint(n) => n,
        sig => {
            return Err(Error::Signature(format!(
                "coefficient_b needs a joint Hamiltonian, got {sig}"
            )))
        }
    };
    if n != psi.n_max() {
        return Err(Error::Signature(
            "coefficient_b: Hamiltonian and state disagree on n_max".to_string(),
        ));
    }
    let cdot = h.apply(&psi.as_vector()).mapv(|z| -C64::I * z);
    let kernel = bra_coefficients(alpha, n);
    let mut b = [C64::ZERO; 2];
    for k in 0..2 {
        for (xi, k_xi) in kernel.iter().enumerate() {
            b[k] += cdot[k * n + xi] * k_xi;
        }
    }
    Ok(b)
}

/// Grid-indexed variant of [`coefficient_b_at`].
pub fn coefficient_b(
    h: &Operator,
    psi: &JointState,
    grid: &PhaseSpaceGrid,
    j: usize,
) -> Result<[C64; 2]> {
    coefficient_b_at(h, psi, grid.point(j))
}
