//! JSON run configuration shared by the CLI, the FFI layer, and tests.
//!
//! A config file looks like:
//!
//! ```json
//! {
//!   "model": "pure-dephasing",
//!   "omega": 1.0,
//!   "g": 0.2,
//!   "n_max": 40,
//!   "grid": { "r": 6.0, "h": 0.05 },
//!   "integrator": { "dt": 0.001, "t_end": 12.566370614359172, "samples": 64 },
//!   "initial_state": { "qubit": "superposition", "env": { "coherent": [0.0, 0.0] } },
//!   "output": "out"
//! }
//! ```
//!
//! Optional fields: `effective_field` (h in H_eff = h·σ_z, default 0),
//! `jc_rate` (the constant jump rate of the Jaynes-Cummings classical-limit
//! equation; required when that model is evolved), `branch_flow` (whether the
//! decoupled engine lets the branch label follow the free flow, default
//! true), `tolerances` (per-field overrides), and `threads`.
//!
//! The environment variable `PRECS_OUT` overrides the output directory.

use std::path::{Path, PathBuf};

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bosonic::{coherent_vector, CoherentPoint, FockSpace};
use crate::error::{Error, Result};
use crate::models::{JaynesCummingsModel, PureDephasingModel};
use crate::operator::Operator;
use crate::precs::JointState;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "pure-dephasing")]
    PureDephasing,
    #[serde(rename = "jaynes-cummings")]
    JaynesCummings,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::PureDephasing => write!(f, "pure-dephasing"),
            ModelKind::JaynesCummings => write!(f, "jaynes-cummings"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    /// Disc radius R.
    pub r: f64,
    /// Cell spacing h.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Fixed RK4 step (units 1/ω); defaults to 1e-3/ω when omitted.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Final time (units 1/ω).
    pub t_end: f64,
    /// Number of sample intervals; samples+1 rows are emitted.
    pub samples: usize,
}

/// Qubit part of the initial state: a named preset or explicit amplitudes
/// [[re, im], [re, im]] on (|+⟩, |−⟩).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitSpec {
    Named(String),
    Amplitudes([[f64; 2]; 2]),
}

/// Environmental part: a coherent label or a Fock index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvSpec {
    Coherent { coherent: [f64; 2] },
    Fock { fock: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialStateConfig {
    pub qubit: QubitSpec,
    pub env: EnvSpec,
}

/// Partial tolerance overrides; unspecified fields keep their defaults.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub hermiticity: Option<f64>,
    pub trace: Option<f64>,
    pub positivity: Option<f64>,
    pub unitarity: Option<f64>,
    pub truncation_tail: Option<f64>,
    pub coherent_residual: Option<f64>,
    pub null_chi2: Option<f64>,
    pub field_norm: Option<f64>,
    pub reconstruction: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            hermiticity: self.hermiticity.unwrap_or(d.hermiticity),
            trace: self.trace.unwrap_or(d.trace),
            positivity: self.positivity.unwrap_or(d.positivity),
            unitarity: self.unitarity.unwrap_or(d.unitarity),
            truncation_tail: self.truncation_tail.unwrap_or(d.truncation_tail),
            coherent_residual: self.coherent_residual.unwrap_or(d.coherent_residual),
            null_chi2: self.null_chi2.unwrap_or(d.null_chi2),
            field_norm: self.field_norm.unwrap_or(d.field_norm),
            reconstruction: self.reconstruction.unwrap_or(d.reconstruction),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub omega: f64,
    pub g: f64,
    pub n_max: usize,
    pub grid: GridConfig,
    pub integrator: IntegratorConfig,
    pub initial_state: InitialStateConfig,
    /// h in H_eff = h·σ_z, used by both classical-limit equations.
    #[serde(default)]
    pub effective_field: f64,
    /// T̃ for the Jaynes-Cummings classical-limit equation.
    #[serde(default)]
    pub jc_rate: Option<f64>,
    /// Let the decoupled engine's branch label follow the free flow.
    #[serde(default = "default_true")]
    pub branch_flow: bool,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub output: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.is_nan() || self.omega <= 0.0 {
            return Err(Error::Config(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.g < 0.0 {
            return Err(Error::Config(format!("g must be nonnegative, got {}", self.g)));
        }
        if self.n_max < 2 {
            return Err(Error::Config(format!("n_max must be ≥ 2, got {}", self.n_max)));
        }
        if self.grid.r.is_nan() || self.grid.h.is_nan() || self.grid.r <= 0.0 || self.grid.h <= 0.0 || self.grid.h >= self.grid.r
        {
            return Err(Error::Config(format!(
                "grid needs 0 < h < R, got R = {}, h = {}",
                self.grid.r, self.grid.h
            )));
        }
        if let Some(dt) = self.integrator.dt {
            if dt.is_nan() || dt <= 0.0 {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if self.integrator.t_end.is_nan() || self.integrator.t_end <= 0.0 {
            return Err(Error::Config("t_end must be positive".to_string()));
        }
        if self.integrator.samples == 0 {
            return Err(Error::Config("samples must be ≥ 1".to_string()));
        }
        if let Some(rate) = self.jc_rate {
            if rate < 0.0 {
                return Err(Error::Config(format!(
                    "jc_rate must be nonnegative, got {rate}"
                )));
            }
        }
        if let QubitSpec::Named(name) = &self.initial_state.qubit {
            qubit_preset(name)?;
        }
        if let EnvSpec::Fock { fock } = self.initial_state.env {
            if fock >= self.n_max {
                return Err(Error::Config(format!(
                    "Fock index {fock} outside the truncated ladder (n_max = {})",
                    self.n_max
                )));
            }
        }
        Ok(())
    }

    pub fn resolved_tolerances(&self) -> Tolerances {
        self.tolerances.resolve()
    }

    /// Integrator step; the default is 1e-3/ω.
    pub fn resolved_dt(&self) -> f64 {
        self.integrator.dt.unwrap_or(1e-3 / self.omega)
    }

    /// Output directory, after the `PRECS_OUT` override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("PRECS_OUT") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.clone(),
        }
    }

    pub fn fock_space(&self) -> Result<FockSpace> {
        FockSpace::new(self.n_max)
    }

    /// Qubit amplitudes of the initial state on (|+⟩, |−⟩).
    pub fn qubit_amplitudes(&self) -> Result<[C64; 2]> {
        match &self.initial_state.qubit {
            QubitSpec::Named(name) => qubit_preset(name),
            QubitSpec::Amplitudes(raw) => {
                let amps = [
                    C64::new(raw[0][0], raw[0][1]),
                    C64::new(raw[1][0], raw[1][1]),
                ];
                let n2 = amps[0].norm_sqr() + amps[1].norm_sqr();
                if n2 <= 0.0 {
                    return Err(Error::Config("qubit amplitudes are all zero".to_string()));
                }
                let s = C64::new(1.0 / n2.sqrt(), 0.0);
                Ok([amps[0] * s, amps[1] * s])
            }
        }
    }

    /// Coherent label of the environmental initial state, when there is one.
    pub fn env_label(&self) -> Option<C64> {
        match self.initial_state.env {
            EnvSpec::Coherent { coherent } => Some(C64::new(coherent[0], coherent[1])),
            EnvSpec::Fock { .. } => None,
        }
    }

    /// Environmental initial vector on the truncated ladder.
    pub fn env_vector(&self, fs: &FockSpace, tol: &Tolerances) -> Result<Array1<C64>> {
        match self.initial_state.env {
            EnvSpec::Coherent { coherent } => coherent_vector(
                fs,
                CoherentPoint::new(C64::new(coherent[0], coherent[1])),
                tol,
            ),
            EnvSpec::Fock { fock } => {
                if fock >= fs.n_max() {
                    return Err(Error::Config(format!(
                        "Fock index {fock} outside the truncated ladder"
                    )));
                }
                let mut env = Array1::zeros(fs.n_max());
                env[fock] = C64::ONE;
                Ok(env)
            }
        }
    }

    /// The full initial joint state.
    pub fn joint_state(&self, fs: &FockSpace, tol: &Tolerances) -> Result<JointState> {
        let qubit = self.qubit_amplitudes()?;
        let env = self.env_vector(fs, tol)?;
        JointState::from_product(qubit, &env, tol)
    }

    pub fn pure_dephasing_model(&self) -> Result<PureDephasingModel> {
        PureDephasingModel::new(self.omega, self.g)
    }

    pub fn jaynes_cummings_model(&self) -> Result<JaynesCummingsModel> {
        let rate = self.jc_rate.ok_or_else(|| {
            Error::Config("jc_rate is required for the jaynes-cummings model".to_string())
        })?;
        JaynesCummingsModel::new(
            self.omega,
            self.g,
            rate,
            Operator::sigma_z().scale(C64::new(self.effective_field, 0.0)),
        )
    }

    /// The joint Hamiltonian of the configured model.
    pub fn hamiltonian(&self, fs: &FockSpace) -> Result<Operator> {
        match self.model {
            ModelKind::PureDephasing => Ok(self.pure_dephasing_model()?.hamiltonian(fs)),
            ModelKind::JaynesCummings => {
                let rate = self.jc_rate.unwrap_or(0.0);
                Ok(JaynesCummingsModel::new(
                    self.omega,
                    self.g,
                    rate,
                    Operator::zeros(crate::operator::Signature::Qubit),
                )?
                .hamiltonian(fs))
            }
        }
    }

    /// Interaction terms of the configured model.
    pub fn interaction_terms(&self) -> Result<Vec<crate::lindblad::InteractionTerm>> {
        match self.model {
            ModelKind::PureDephasing => Ok(self.pure_dephasing_model()?.interaction_terms()),
            ModelKind::JaynesCummings => {
                let rate = self.jc_rate.unwrap_or(0.0);
                Ok(JaynesCummingsModel::new(
                    self.omega,
                    self.g,
                    rate,
                    Operator::zeros(crate::operator::Signature::Qubit),
                )?
                .interaction_terms())
            }
        }
    }
}

fn qubit_preset(name: &str) -> Result<[C64; 2]> {
    let inv = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match name {
        "plus" => Ok([C64::ONE, C64::ZERO]),
        "minus" => Ok([C64::ZERO, C64::ONE]),
        "superposition" => Ok([inv, inv]),
        other => Err(Error::Config(format!(
            "unknown qubit preset '{other}' (expected plus, minus, or superposition)"
        ))),
    }
}
