//! The work behind the `precs` subcommands: orchestration, CSV/JSON
//! emission, and the exit-code contract (0 success, 2 config, 3
//! coverage/truncation, 4 numeric contract violation).
//!
//! All floating-point output is printed with 17 significant digits so the
//! files round-trip exactly, and every pipeline here is deterministic:
//! identical configs produce byte-identical outputs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bosonic::PhaseSpaceGrid;
use crate::config::{ModelKind, RunConfig};
use crate::dynamics::{
    evolve_decoupled_markov, evolve_exact, evolve_gksl, hamilton_flow, Branch, GkslRun,
    JumpChannel, Trajectory,
};
use crate::error::{Error, Result};
use crate::lindblad::{assemble, gksl_rhs};
use crate::models::strong_coupling_report;
use crate::operator::{spectral_floor, DensityChecks, DensityOperator, Operator};
use crate::precs::{decompose, reconstruct};

/// Samples per period used by the rate-curve command.
pub const GAMMA_CURVE_SAMPLES: usize = 4096;
/// Normalized-rate threshold defining the "approximately zero" fraction.
pub const GAMMA_CURVE_THRESHOLD: f64 = 0.01;

/// 17-significant-digit formatting; guarantees f64 round-trip.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Exact,
    Gksl,
    Decoupled,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Engine::Exact),
            "gksl" => Ok(Engine::Gksl),
            "decoupled" => Ok(Engine::Decoupled),
            other => Err(Error::Config(format!(
                "unknown engine '{other}' (expected exact, gksl, or decoupled)"
            ))),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Engine::Exact => write!(f, "exact"),
            Engine::Gksl => write!(f, "gksl"),
            Engine::Decoupled => write!(f, "decoupled"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DecomposeReport {
    pub chi2_norm_dev: f64,
    pub reconstruction_err: f64,
    pub points: usize,
    pub null_points: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct FieldReport {
    pub time: f64,
    pub points_assembled: usize,
    /// Largest off-diagonal magnitude of any F_±; the span{𝟙, σ_z}
    /// structure check for the pure-dephasing model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_span_residual: Option<f64>,
    pub gksl_trace_abs: f64,
    pub all_finite: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct EvolveReport {
    pub engine: String,
    pub max_trace_dev: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift: Option<f64>,
    pub positivity_warning: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct GammaRow {
    pub g: f64,
    pub max_rate: f64,
    pub subthreshold_fraction: f64,
}

#[derive(Debug, Serialize)]
pub struct GammaReport {
    pub threshold: f64,
    pub samples: usize,
    pub monotone: bool,
    pub rows: Vec<GammaRow>,
    pub warnings: Vec<String>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn sample_times(config: &RunConfig) -> Vec<f64> {
    let n = config.integrator.samples;
    (0..=n)
        .map(|i| config.integrator.t_end * i as f64 / n as f64)
        .collect()
}

fn grid_from(config: &RunConfig) -> Result<Arc<PhaseSpaceGrid>> {
    Ok(Arc::new(PhaseSpaceGrid::make(config.grid.r, config.grid.h)?))
}

/// Decompose the configured initial state, reconstruct, and write
/// `field.csv` plus `decompose_report.json`.
pub fn cmd_decompose(config: &RunConfig) -> Result<DecomposeReport> {
    let tol = config.resolved_tolerances();
    let fs = config.fock_space()?;
    let psi = config.joint_state(&fs, &tol)?;
    let grid = grid_from(config)?;
    let field = decompose(&psi, grid, &tol)?;
    let rho = reconstruct(&field, &tol)?;
    let reference = psi.reduced_qubit();
    let reconstruction_err = (rho.op() - &reference).max_abs();

    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let mut out = BufWriter::new(fs::File::create(dir.join("field.csv"))?);
    writeln!(
        out,
        "re_alpha,im_alpha,chi2,re_a_plus,im_a_plus,re_a_minus,im_a_minus,gamma_plus"
    )?;
    for p in field.points() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt(p.alpha.re),
            fmt(p.alpha.im),
            fmt(p.chi2),
            fmt(p.a[0].re),
            fmt(p.a[0].im),
            fmt(p.a[1].re),
            fmt(p.a[1].im),
            fmt(p.gamma[0]),
        )?;
    }
    out.flush()?;

    let mut warnings = Vec::new();
    if reconstruction_err > tol.reconstruction {
        warnings.push(format!(
            "reconstruction error {reconstruction_err:.3e} exceeds {:.1e}",
            tol.reconstruction
        ));
    }
    let report = DecomposeReport {
        chi2_norm_dev: field.norm_deviation(),
        reconstruction_err,
        points: field.len(),
        null_points: (0..field.len()).filter(|&j| field.is_null(j)).count(),
        warnings,
    };
    write_json(&dir.join("decompose_report.json"), &report)?;
    Ok(report)
}

/// Propagate the initial state to time `t` exactly, assemble the point-local
/// operators there, and write `f_field.csv` plus `lindblad_report.json`.
pub fn cmd_lindblad_field(config: &RunConfig, t: f64) -> Result<FieldReport> {
    if t < 0.0 {
        return Err(Error::Config(format!("t must be nonnegative, got {t}")));
    }
    let tol = config.resolved_tolerances();
    let fs = config.fock_space()?;
    let psi0 = config.joint_state(&fs, &tol)?;
    let h = config.hamiltonian(&fs)?;
    let psi_t = if t > 0.0 {
        let traj = evolve_exact(&h, &psi0, &[0.0, t], &tol)?;
        traj.states().last().expect("two samples").clone()
    } else {
        psi0
    };
    let grid = grid_from(config)?;
    let field = decompose(&psi_t, grid, &tol)?;
    let terms = config.interaction_terms()?;
    let lf = assemble(&field, &terms, &tol);
    let rhs = gksl_rhs(&lf);

    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let mut out = BufWriter::new(fs::File::create(dir.join("f_field.csv"))?);
    write!(out, "re_alpha,im_alpha")?;
    for k in ["plus", "minus"] {
        for entry in ["00", "01", "10", "11"] {
            write!(out, ",re_f_{k}_{entry},im_f_{k}_{entry}")?;
        }
    }
    writeln!(out)?;

    let mut all_finite = true;
    let mut span_residual = 0.0_f64;
    let mut assembled = 0usize;
    for rec in lf.records().iter().flatten() {
        assembled += 1;
        write!(out, "{},{}", fmt(rec.alpha.re), fmt(rec.alpha.im))?;
        for f in &rec.f_ops {
            for i in 0..2 {
                for j in 0..2 {
                    let z = f.get(i, j);
                    if !z.re.is_finite() || !z.im.is_finite() {
                        all_finite = false;
                    }
                    write!(out, ",{},{}", fmt(z.re), fmt(z.im))?;
                }
            }
            span_residual = span_residual.max(f.get(0, 1).norm()).max(f.get(1, 0).norm());
        }
        writeln!(out)?;
    }
    out.flush()?;

    let mut warnings = Vec::new();
    if !all_finite {
        warnings.push("non-finite operator entries in the assembled field".to_string());
    }
    let trace_abs = rhs.trace().norm();
    if trace_abs > tol.trace {
        warnings.push(format!(
            "dissipator trace {trace_abs:.3e} exceeds {:.1e}",
            tol.trace
        ));
    }
    let report = FieldReport {
        time: t,
        points_assembled: assembled,
        max_span_residual: matches!(config.model, ModelKind::PureDephasing)
            .then_some(span_residual),
        gksl_trace_abs: trace_abs,
        all_finite,
        warnings,
    };
    write_json(&dir.join("lindblad_report.json"), &report)?;
    Ok(report)
}

/// One sampled trajectory point in the reduced qubit picture.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub rho_pp: f64,
    pub rho_mm: f64,
    pub re_coherence: f64,
    pub im_coherence: f64,
    pub trace_dev: f64,
    pub min_eig: f64,
}

impl TrajectoryRow {
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.t,
            self.rho_pp,
            self.rho_mm,
            self.re_coherence,
            self.im_coherence,
            self.trace_dev,
            self.min_eig,
        ]
    }
}

fn density_row(t: f64, rho: &Operator) -> Result<TrajectoryRow> {
    Ok(TrajectoryRow {
        t,
        rho_pp: rho.get(0, 0).re,
        rho_mm: rho.get(1, 1).re,
        re_coherence: rho.get(0, 1).re,
        im_coherence: rho.get(0, 1).im,
        trace_dev: (rho.trace() - C64::ONE).norm(),
        min_eig: spectral_floor(rho)?,
    })
}

fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "t,re_rho_pp,re_rho_mm,re_rho_pm,im_rho_pm,trace_dev,min_eig"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(r.t),
            fmt(r.rho_pp),
            fmt(r.rho_mm),
            fmt(r.re_coherence),
            fmt(r.im_coherence),
            fmt(r.trace_dev),
            fmt(r.min_eig),
        )?;
    }
    out.flush()?;
    Ok(())
}

fn density_run_report(engine: Engine, run: &GkslRun, tol_pos: f64) -> EvolveReport {
    let mut warnings = Vec::new();
    if run.report.positivity_warning {
        warnings.push(format!(
            "spectral floor {:.3e} dips below -{tol_pos:.1e}",
            run.report.min_eigenvalue
        ));
    }
    EvolveReport {
        engine: engine.to_string(),
        max_trace_dev: run.report.max_trace_deviation,
        max_hermiticity_residual: run.report.max_hermiticity_residual,
        min_eigenvalue: run.report.min_eigenvalue,
        norm_drift: None,
        positivity_warning: run.report.positivity_warning,
        warnings,
    }
}

fn density_rows(traj: &Trajectory<DensityOperator>) -> Result<Vec<TrajectoryRow>> {
    traj.iter().map(|(t, rho)| density_row(t, rho.op())).collect()
}

fn initial_density(config: &RunConfig, tol_trace: f64) -> Result<DensityOperator> {
    let q = config.qubit_amplitudes()?;
    DensityOperator::pure_qubit(
        q,
        DensityChecks {
            trace: tol_trace,
            hermiticity: tol_trace,
            positivity: tol_trace,
        },
    )
}

/// Single-branch classical-limit construction for the decoupled engine.
///
/// For the pure-dephasing model the branch carries the configured initial
/// qubit projector with constant occupation weights γ_k = |q_k|² and jump
/// operators F^C_k evaluated at the (optionally flowing) coherent label. For
/// Jaynes-Cummings, where no branch data are derivable, the branch reduces
/// to the constant-coefficient classical equation.
fn decoupled_branches(config: &RunConfig) -> Result<Vec<Branch>> {
    let q = config.qubit_amplitudes()?;
    let projector = Operator::qubit([
        [q[0] * q[0].conj(), q[0] * q[1].conj()],
        [q[1] * q[0].conj(), q[1] * q[1].conj()],
    ]);
    let jumps = match config.model {
        ModelKind::PureDephasing => {
            let model = config.pure_dephasing_model()?;
            let alpha0 = config.env_label().unwrap_or(C64::ZERO);
            let flow = config.branch_flow;
            let omega = config.omega;
            let mut jumps = Vec::new();
            for (k, amp) in q.iter().enumerate() {
                let gamma = amp.norm_sqr();
                if gamma == 0.0 {
                    continue;
                }
                jumps.push(JumpChannel::new(
                    move |_| gamma,
                    move |t| {
                        let label = if flow {
                            hamilton_flow(omega, alpha0, t)
                        } else {
                            alpha0
                        };
                        model.classical_f(label, t)[k].clone()
                    },
                ));
            }
            jumps
        }
        ModelKind::JaynesCummings => {
            let model = config.jaynes_cummings_model()?;
            vec![JumpChannel::constant(model.rate, Operator::sigma_plus())]
        }
    };
    Ok(vec![Branch {
        weight: 1.0,
        projector,
        jumps,
    }])
}

/// Run one of the three engines and write `trajectory_<engine>.csv` plus
/// `evolve_report_<engine>.json`. Positivity breaches set the warning field;
/// the data are still written and the exit stays 0.
pub fn cmd_evolve(config: &RunConfig, engine: Engine) -> Result<EvolveReport> {
    Ok(cmd_evolve_rows(config, engine)?.0)
}

/// [`cmd_evolve`] variant that also hands back the sampled rows (used by the
/// foreign-function layer).
pub fn cmd_evolve_rows(
    config: &RunConfig,
    engine: Engine,
) -> Result<(EvolveReport, Vec<TrajectoryRow>)> {
    let tol = config.resolved_tolerances();
    let times = sample_times(config);
    let dir = config.output_dir();
    ensure_dir(&dir)?;

    let (report, rows) = match engine {
        Engine::Exact => {
            let fs = config.fock_space()?;
            let psi0 = config.joint_state(&fs, &tol)?;
            let h = config.hamiltonian(&fs)?;
            let traj = evolve_exact(&h, &psi0, &times, &tol)?;

            let mut rows = Vec::with_capacity(traj.len());
            let mut norm_drift = 0.0_f64;
            let mut max_herm = 0.0_f64;
            for (t, psi) in traj.iter() {
                let rho = psi.reduced_qubit();
                norm_drift = norm_drift.max((psi.norm() - 1.0).abs());
                max_herm = max_herm.max(rho.hermiticity_residual());
                rows.push(density_row(t, &rho)?);
            }
            let max_trace_dev = rows.iter().map(|r| r.trace_dev).fold(0.0, f64::max);
            let min_eig = rows.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
            let report = EvolveReport {
                engine: engine.to_string(),
                max_trace_dev,
                max_hermiticity_residual: max_herm,
                min_eigenvalue: min_eig,
                norm_drift: Some(norm_drift),
                positivity_warning: min_eig < -tol.positivity,
                warnings: Vec::new(),
            };
            (report, rows)
        }
        Engine::Gksl => {
            let rho0 = initial_density(config, tol.trace)?;
            let eq = match config.model {
                ModelKind::PureDephasing => config
                    .pure_dephasing_model()?
                    .classical_equation(config.effective_field),
                ModelKind::JaynesCummings => config.jaynes_cummings_model()?.classical_equation(),
            };
            let run = evolve_gksl(eq.h_eff, &eq.jumps, &rho0, &times, config.resolved_dt(), &tol)?;
            (
                density_run_report(engine, &run, tol.positivity),
                density_rows(&run.trajectory)?,
            )
        }
        Engine::Decoupled => {
            let branches = decoupled_branches(config)?;
            let h_field = config.effective_field;
            let run = evolve_decoupled_markov(
                move |_| Operator::sigma_z().scale(C64::new(h_field, 0.0)),
                &branches,
                &times,
                config.resolved_dt(),
                &tol,
            )?;
            (
                density_run_report(engine, &run, tol.positivity),
                density_rows(&run.trajectory)?,
            )
        }
    };
    write_trajectory_csv(&dir.join(format!("trajectory_{engine}.csv")), &rows)?;
    write_json(&dir.join(format!("evolve_report_{engine}.json")), &report)?;
    Ok((report, rows))
}

/// One-period normalized rate curves for a coupling ladder, plus the
/// sub-threshold fraction table. Writes `gamma_curve_<i>.csv` per coupling,
/// `fractions.csv`, and `gamma_report.json`.
pub fn cmd_gamma_curve(config: &RunConfig, g_list: &[f64]) -> Result<GammaReport> {
    let ladder: Vec<f64> = if g_list.is_empty() {
        [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|m| m * config.omega)
            .collect()
    } else {
        g_list.to_vec()
    };
    let rows = strong_coupling_report(
        config.omega,
        &ladder,
        GAMMA_CURVE_SAMPLES,
        GAMMA_CURVE_THRESHOLD,
    )?;

    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let period = 2.0 * std::f64::consts::PI / config.omega;
    for (idx, row) in rows.iter().enumerate() {
        let model = crate::models::PureDephasingModel::new(config.omega, row.g)?;
        let mut out =
            BufWriter::new(fs::File::create(dir.join(format!("gamma_curve_{idx}.csv")))?);
        writeln!(out, "t,rate,normalized")?;
        for i in 0..GAMMA_CURVE_SAMPLES {
            let t = period * i as f64 / GAMMA_CURVE_SAMPLES as f64;
            let rate = model.rate(t);
            let normalized = if row.max_rate > 0.0 {
                rate / row.max_rate
            } else {
                0.0
            };
            writeln!(out, "{},{},{}", fmt(t), fmt(rate), fmt(normalized))?;
        }
        out.flush()?;
    }

    let mut out = BufWriter::new(fs::File::create(dir.join("fractions.csv"))?);
    writeln!(out, "g,max_rate,subthreshold_fraction")?;
    for row in &rows {
        writeln!(
            out,
            "{},{},{}",
            fmt(row.g),
            fmt(row.max_rate),
            fmt(row.subthreshold_fraction)
        )?;
    }
    out.flush()?;

    let monotone = rows
        .windows(2)
        .all(|w| w[1].subthreshold_fraction >= w[0].subthreshold_fraction);
    let mut warnings = Vec::new();
    if !monotone {
        warnings.push("sub-threshold fraction is not monotone over the ladder".to_string());
    }
    let report = GammaReport {
        threshold: GAMMA_CURVE_THRESHOLD,
        samples: GAMMA_CURVE_SAMPLES,
        monotone,
        rows: rows
            .iter()
            .map(|r| GammaRow {
                g: r.g,
                max_rate: r.max_rate,
                subthreshold_fraction: r.subthreshold_fraction,
            })
            .collect(),
        warnings,
    };
    write_json(&dir.join("gamma_report.json"), &report)?;
    Ok(report)
}

/// Parse a comma-separated coupling list (the `--g-list` flag).
pub fn parse_g_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad coupling '{s}': {e}")))
        })
        .collect()
}
