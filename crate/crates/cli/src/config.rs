// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files. Every section is optional and unknown keys are rejected.
//!
//! ```toml
//! kind = "gkls"
//! output = "run.csv"
//!
//! [gkls]
//! model = { kind = "dephasing", rate = 0.25 }
//! initial = { kind = "plus" }
//! grid = { t0 = 0.0, t1 = 1.0, steps = 1000 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weakinv_core::gkls::{ModelSpec, PositivityPolicy, TimeGrid};
use weakinv_core::invariants::AuditRanges;
use weakinv_core::oscillator::{InitialState, OscillatorTolerances, StiffnessSchedule};
use weakinv_core::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ChannelAudit,
    EntropyAudit,
    Gkls,
    Oscillator,
    KrausStudy,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::ChannelAudit,
        Kind::EntropyAudit,
        Kind::Gkls,
        Kind::Oscillator,
        Kind::KrausStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ChannelAudit => "channel-audit",
            Self::EntropyAudit => "entropy-audit",
            Self::Gkls => "gkls",
            Self::Oscillator => "oscillator",
            Self::KrausStudy => "kraus-study",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Option<Kind>,
    pub output: Option<PathBuf>,
    pub channel_audit: ChannelAuditConfig,
    pub entropy_audit: EntropyAuditConfig,
    pub gkls: GklsConfig,
    pub oscillator: OscillatorConfig,
    pub kraus_study: KrausStudyConfig,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelAuditConfig {
    pub seed_start: u64,
    pub seed_count: u64,
    pub sys_dims: (usize, usize),
    pub env_dims: (usize, usize),
    pub chain_lengths: (usize, usize),
    /// Replace the first channel of every chain with a lossy copy.
    pub inject_non_trace_preserving: bool,
}

impl Default for ChannelAuditConfig {
    fn default() -> Self {
        Self {
            seed_start: 0,
            seed_count: 200,
            sys_dims: (2, 4),
            env_dims: (2, 4),
            chain_lengths: (1, 5),
            inject_non_trace_preserving: false,
        }
    }
}

impl ChannelAuditConfig {
    pub fn ranges(&self) -> AuditRanges {
        AuditRanges {
            sys_dims: self.sys_dims,
            env_dims: self.env_dims,
            chain_lengths: self.chain_lengths,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyAuditConfig {
    pub seed_start: u64,
    pub seed_count: u64,
    pub dims: (usize, usize),
    /// Inclusive range for the number of unitaries in each mixture.
    pub unitaries: (usize, usize),
    /// Rényi indices asserted for unital channels; each in `(0, 2]`.
    pub alphas: Vec<f64>,
    /// Environment dimension of the non-unital comparison channels.
    pub env_dim: usize,
}

impl Default for EntropyAuditConfig {
    fn default() -> Self {
        Self {
            seed_start: 0,
            seed_count: 100,
            dims: (2, 4),
            unitaries: (1, 4),
            alphas: vec![0.5, 1.5, 2.0],
            env_dim: 2,
        }
    }
}

/// Model selection shared by `gkls` and `kraus-study`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelChoice {
    /// Qubit, `H = 0`, `L = sigma_z`.
    Dephasing {
        rate: f64,
    },
    /// Qubit, `H = 0`, `L = |0><1|`.
    AmplitudeDamping {
        rate: f64,
    },
    /// Seeded GUE Hamiltonian only.
    Unitary {
        dim: usize,
    },
    /// Seeded Hamiltonian and dissipators; `--seed` overrides `seed`.
    Random {
        dim: usize,
        seed: u64,
    },
    /// `H = 0` and no dissipators.
    Trivial {
        dim: usize,
    },
    Custom(ModelSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateChoice {
    /// `|+>` on a qubit.
    Plus,
    MaximallyMixed,
    Basis {
        index: usize,
    },
    /// Seeded random density matrix.
    Random {
        seed: u64,
    },
    Pure {
        amplitudes: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InvariantChoice {
    /// `sigma_x, sigma_y, sigma_z` (qubits only).
    Pauli,
    Random {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GklsConfig {
    pub model: ModelChoice,
    pub initial: StateChoice,
    pub invariants: InvariantChoice,
    pub grid: TimeGrid,
    pub alphas: Vec<f64>,
    pub positivity: PositivityPolicy,
    pub checks: GklsChecks,
}

impl Default for GklsConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Dephasing { rate: 0.25 },
            initial: StateChoice::Plus,
            invariants: InvariantChoice::Pauli,
            grid: TimeGrid {
                t0: 0.0,
                t1: 1.0,
                steps: 1000,
            },
            alphas: vec![0.5, 1.5, 2.0],
            positivity: PositivityPolicy::Fail,
            checks: GklsChecks::default(),
        }
    }
}

/// Pass thresholds for a GKLS run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GklsChecks {
    pub conservation: f64,
    pub variance_slack: f64,
    pub covariance_rate_relative: f64,
    pub covariance_rate_slack: f64,
    pub entropy_rate_slack: f64,
}

impl Default for GklsChecks {
    fn default() -> Self {
        Self {
            conservation: 1e-6,
            variance_slack: 1e-8,
            covariance_rate_relative: 1e-4,
            covariance_rate_slack: 1e-12,
            entropy_rate_slack: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorConfig {
    pub fock_dim: usize,
    pub margin: usize,
    pub schedule: StiffnessSchedule,
    pub alpha0: [f64; 3],
    pub grid: TimeGrid,
    pub initial: InitialState,
    pub alphas: Vec<f64>,
    pub checks: OscillatorTolerances,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            fock_dim: 30,
            margin: 4,
            schedule: StiffnessSchedule::Exponential {
                k0: 1.0,
                lambda: 1.0,
                offset: 0.0,
            },
            alpha0: [1.0, 0.0, 0.5],
            grid: TimeGrid {
                t0: 0.0,
                t1: 1.0,
                steps: 1000,
            },
            initial: InitialState::Coherent { re: 1.0, im: 0.0 },
            alphas: vec![0.5, 1.5, 2.0],
            checks: OscillatorTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrausStudyConfig {
    pub model: ModelChoice,
    pub initial: StateChoice,
    pub dts: Vec<f64>,
    pub t0: f64,
    pub duration: f64,
    pub min_defect_slope: f64,
}

impl Default for KrausStudyConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Dephasing { rate: 0.25 },
            initial: StateChoice::Random { seed: 1 },
            dts: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            t0: 0.0,
            duration: 1.0,
            min_defect_slope: 1.4,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Rejects a config whose `kind` names a different subcommand.
    pub fn check_kind(&self, kind: Kind) -> Result<()> {
        match self.kind {
            Some(k) if k != kind => Err(Error::Config(format!(
                "config is for `{}` but `{}` was requested",
                k.name(),
                kind.name()
            ))),
            _ => Ok(()),
        }
    }

    /// Points every seeded section at `seed`.
    pub fn apply_seed(&mut self, seed: u64) {
        self.channel_audit.seed_start = seed;
        self.entropy_audit.seed_start = seed;
        for model in [&mut self.gkls.model, &mut self.kraus_study.model] {
            if let ModelChoice::Random { seed: s, .. } = model {
                *s = seed;
            }
        }
        for state in [&mut self.gkls.initial, &mut self.kraus_study.initial] {
            if let StateChoice::Random { seed: s } = state {
                *s = seed;
            }
        }
        if let InvariantChoice::Random { seed: s, .. } = &mut self.gkls.invariants {
            *s = seed;
        }
    }

    /// Overlays a named scenario on the section for `kind`.
    pub fn apply_preset(&mut self, kind: Kind, name: &str) -> Result<()> {
        let unknown = || {
            Err(Error::Config(format!(
                "unknown preset `{name}` for `{}`; available: {}",
                kind.name(),
                presets(kind).join(", ")
            )))
        };
        match kind {
            Kind::ChannelAudit => match name {
                "default" => self.channel_audit = ChannelAuditConfig::default(),
                "non-tp-fixture" => {
                    self.channel_audit.seed_count = 5;
                    self.channel_audit.inject_non_trace_preserving = true;
                }
                "empty" => self.channel_audit.seed_count = 0,
                _ => return unknown(),
            },
            Kind::EntropyAudit => match name {
                "default" => self.entropy_audit = EntropyAuditConfig::default(),
                "single-unitary" => self.entropy_audit.unitaries = (1, 1),
                _ => return unknown(),
            },
            Kind::Gkls => {
                let g = &mut self.gkls;
                match name {
                    "dephasing" => {
                        g.model = ModelChoice::Dephasing { rate: 0.25 };
                        g.initial = StateChoice::Plus;
                        g.invariants = InvariantChoice::Pauli;
                    }
                    "amplitude-damping" => {
                        g.model = ModelChoice::AmplitudeDamping { rate: 0.25 };
                        g.initial = StateChoice::Random { seed: 1 };
                        g.invariants = InvariantChoice::Pauli;
                    }
                    "unitary" => {
                        g.model = ModelChoice::Unitary { dim: 3 };
                        g.initial = StateChoice::Random { seed: 1 };
                        g.invariants = InvariantChoice::Random { count: 3, seed: 2 };
                    }
                    "random" => {
                        g.model = ModelChoice::Random { dim: 4, seed: 0 };
                        g.initial = StateChoice::Random { seed: 1 };
                        g.invariants = InvariantChoice::Random { count: 3, seed: 2 };
                    }
                    _ => return unknown(),
                }
            }
            Kind::Oscillator => {
                let o = &mut self.oscillator;
                match name {
                    "oscillator-exp" => {
                        *o = OscillatorConfig::default();
                    }
                    "oscillator-rational" => {
                        *o = OscillatorConfig::default();
                        o.schedule = StiffnessSchedule::Rational {
                            k0: 2.0,
                            lambda: 1.0,
                            offset: 0.0,
                        };
                    }
                    "oscillator-constant" => {
                        *o = OscillatorConfig::default();
                        o.schedule = StiffnessSchedule::Constant { k: 1.0 };
                    }
                    "oscillator-hot" => {
                        *o = OscillatorConfig::default();
                        o.initial = InitialState::Thermal {
                            beta: 0.2,
                            cutoff: o.fock_dim,
                        };
                    }
                    _ => return unknown(),
                }
            }
            Kind::KrausStudy => {
                let k = &mut self.kraus_study;
                match name {
                    "dephasing" => k.model = ModelChoice::Dephasing { rate: 0.25 },
                    "unitary" => k.model = ModelChoice::Unitary { dim: 3 },
                    "trivial" => k.model = ModelChoice::Trivial { dim: 2 },
                    "random" => k.model = ModelChoice::Random { dim: 3, seed: 0 },
                    _ => return unknown(),
                }
            }
        }
        Ok(())
    }
}

pub fn presets(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::ChannelAudit => &["default", "non-tp-fixture", "empty"],
        Kind::EntropyAudit => &["default", "single-unitary"],
        Kind::Gkls => &["dephasing", "amplitude-damping", "unitary", "random"],
        Kind::Oscillator => &[
            "oscillator-exp",
            "oscillator-rational",
            "oscillator-constant",
            "oscillator-hot",
        ],
        Kind::KrausStudy => &["dephasing", "unitary", "trivial", "random"],
    }
}
