// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Central numerical tolerances.
//!
//! Structural checks (Hermiticity, trace, channel identities) use the tight
//! values; anything that went through a time integrator uses the dynamical
//! ones. Functions that take a tolerance argument default to these.

/// Trace, PSD floor, channel identities, spectral reconstruction.
pub const STRUCTURAL: f64 = 1e-10;

/// States and invariants produced by fixed-step integration.
pub const DYNAMICAL: f64 = 1e-8;

/// Relative Hermiticity defect accepted by [`crate::Hermitian::new`].
pub const HERMITICITY: f64 = 1e-12;

/// Unit-norm check for pure-state vectors.
pub const UNIT_NORM: f64 = 1e-12;

/// Kraus operators below this Frobenius norm are dropped after generation.
pub const NULL_KRAUS: f64 = 1e-14;

/// Eigenvalues in `[-CLIP_FLOOR, 0)` are treated as zero by entropy functions.
pub const CLIP_FLOOR: f64 = 1e-10;

/// Slack allowed on monotonicity audits (variance and entropy increments).
pub const AUDIT_SLACK: f64 = 1e-10;

/// Eigenvalue floor for PSD checks on assembled covariance matrices.
pub const COVARIANCE_PSD: f64 = 1e-8;

/// `|alpha - 1|` below this dispatches Rényi quantities to the von Neumann limit.
pub const RENYI_UNIT_WINDOW: f64 = 1e-6;

/// `tr rho^alpha` below this is reported as underflow.
pub const POWER_TRACE_FLOOR: f64 = 1e-300;

/// Per-call overrides for the values above.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub structural: f64,
    pub dynamical: f64,
    pub audit_slack: f64,
    pub clip_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: STRUCTURAL,
            dynamical: DYNAMICAL,
            audit_slack: AUDIT_SLACK,
            clip_floor: CLIP_FLOOR,
        }
    }
}
