//! Experiment configuration: a versioned JSON schema describing which code,
//! decoder, noise family and parameter grids an experiment runs over.

use crate::channel::{coherent_rotation, depolarizing, pauli_twirl, NoiseFamily};
use crate::decoder::{DecoderMode, NoiseRecursion};
use crate::error::{Error, Result};
use crate::logical::{correlated_dephasing_mix, BlockNoise};
use crate::threshold::TieMode;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Parameter grid: either an inclusive linspace or explicit values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Linspace { start: f64, stop: f64, count: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            Grid::Linspace { start, stop, count } => {
                if *count == 0 {
                    return Err(Error::Config {
                        field: "grid.count".into(),
                        reason: "empty grid".into(),
                    });
                }
                if *count == 1 {
                    vec![*start]
                } else {
                    (0..*count)
                        .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                        .collect()
                }
            }
            Grid::Values(v) => v.clone(),
        };
        if pts.is_empty() {
            return Err(Error::Config {
                field: "grid".into(),
                reason: "empty grid".into(),
            });
        }
        Ok(pts)
    }
}

/// One-parameter noise family for sweeps and threshold searches; the swept
/// parameter is the one not fixed here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Sweeps the error probability p.
    Depolarizing,
    /// Sweeps the damping rate p at fixed dephasing rate lambda.
    AmplitudePhaseDamping { lambda: f64 },
    /// Sweeps the rotation angle theta about the fixed axis.
    Coherent {
        phi: f64,
        gamma: f64,
        #[serde(default)]
        twirled: bool,
    },
    /// Sweeps the correlated-dephasing probability q at fixed depolarizing
    /// p. `reinject` rebuilds the intra-block correlations at every
    /// concatenation level instead of confining them to level 1.
    CorrelatedDephasing {
        p: f64,
        #[serde(default)]
        reinject: bool,
    },
}

impl FamilySpec {
    /// Block noise at swept-parameter value `x` for an n-qubit code.
    pub fn noise(&self, n: usize, x: f64) -> Result<BlockNoise> {
        match self {
            FamilySpec::Depolarizing => Ok(BlockNoise::uniform(n, depolarizing(x)?)),
            FamilySpec::AmplitudePhaseDamping { lambda } => Ok(BlockNoise::uniform(
                n,
                crate::channel::amplitude_phase_damping(x, *lambda)?,
            )),
            FamilySpec::Coherent { phi, gamma, twirled } => {
                let mut m = coherent_rotation(x, *phi, *gamma);
                if *twirled {
                    m = pauli_twirl(&m);
                }
                Ok(BlockNoise::uniform(n, m))
            }
            FamilySpec::CorrelatedDephasing { p, .. } => correlated_dephasing_mix(n, *p, x),
        }
    }

    /// How deeper levels regenerate their block noise for this family.
    pub fn recursion(&self, x: f64) -> NoiseRecursion {
        match self {
            FamilySpec::CorrelatedDephasing { reinject: true, .. } => {
                NoiseRecursion::CorrelatedDephasing { q: x }
            }
            _ => NoiseRecursion::Uniform,
        }
    }
}

/// Base channel of a perturbation-robustness study.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PerturbationBase {
    /// Rotation by the swept angle about a per-sample random axis.
    CoherentRandomAxis,
    /// Amplitude-phase damping at fixed p, sweeping lambda.
    AmplitudePhaseDamping { p: f64 },
}

/// Perturbation weight as a function of the swept parameter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFn {
    SinSquaredOverTen,
    LinearOverTen,
}

impl WeightFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightFn::SinSquaredOverTen => x.sin().powi(2) / 10.0,
            WeightFn::LinearOverTen => x / 10.0,
        }
    }
}

fn default_samples() -> u64 {
    100
}

fn default_levels() -> Vec<usize> {
    vec![1, 3]
}

fn one() -> usize {
    1
}

/// What the experiment computes; tag selects the runner.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Effective logical channel of a single noise point, per level.
    Channel {
        noise: NoiseFamily,
        #[serde(default = "one")]
        levels: usize,
    },
    /// Infidelity at the requested levels across a parameter grid, for the
    /// symmetric decoder and the configured optimizer.
    Sweep {
        family: FamilySpec,
        grid: Grid,
        #[serde(default = "default_levels")]
        levels: Vec<usize>,
    },
    /// Symmetric threshold, then the optimizer's step-ladder refinement.
    Threshold { family: FamilySpec },
    /// Rotation-angle threshold per (gamma, phi) axis grid point.
    Contour { gamma: Grid, phi: Grid },
    /// Bare vs Pauli-twirled rotation thresholds under Clifford and
    /// Pauli-only corrections over an axis-angle grid.
    Twirl { phi: Grid },
    /// Robustness of pre-optimized recovery maps to random unitary
    /// perturbations.
    Perturb {
        base: PerturbationBase,
        weight: WeightFn,
        grid: Grid,
        #[serde(default = "default_samples")]
        samples: u64,
    },
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::Channel { .. } => "channel",
            ExperimentKind::Sweep { .. } => "sweep",
            ExperimentKind::Threshold { .. } => "threshold",
            ExperimentKind::Contour { .. } => "contour",
            ExperimentKind::Twirl { .. } => "twirl",
            ExperimentKind::Perturb { .. } => "perturb",
        }
    }
}

fn default_mode() -> DecoderMode {
    DecoderMode::OptimizedAll
}

fn default_ties() -> TieMode {
    TieMode::First
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// Output file stem.
    pub name: String,
    pub code: String,
    #[serde(default = "default_mode")]
    pub mode: DecoderMode,
    #[serde(default = "default_ties")]
    pub ties: TieMode,
    /// Required for randomized experiments; CLI --seed overrides.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            field: "config".into(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config {
                field: "schema".into(),
                reason: format!("expected version {SCHEMA_VERSION}, got {}", self.schema),
            });
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_alphanumeric() || c == '-') {
            return Err(Error::Config {
                field: "name".into(),
                reason: "must be a nonempty alphanumeric-or-dash file stem".into(),
            });
        }
        crate::code::builtin_code(&self.code)?;
        if matches!(self.kind, ExperimentKind::Perturb { .. }) && self.seed.is_none() {
            return Err(Error::Config {
                field: "seed".into(),
                reason: "randomized experiment requires a seed".into(),
            });
        }
        if let ExperimentKind::Perturb { weight, grid, .. } = &self.kind {
            for x in grid.points()? {
                let w = weight.eval(x);
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Config {
                        field: "weight".into(),
                        reason: format!("weight {w} at grid point {x} is outside [0, 1]"),
                    });
                }
            }
        }
        Ok(())
    }
}
