// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Weak invariants of open quantum systems: Kraus channels, entropies,
//! variance audits, GKLS dynamics and a damped-oscillator worked example.

pub mod channels;
pub mod entropy;
pub mod error;
pub mod gkls;
pub mod invariants;
pub mod ode;
pub mod operator;
pub mod oscillator;
pub mod random;
pub mod report;
pub mod tolerance;

pub use channels::{DilationSpec, KrausChannel};
pub use error::{Error, Result};
pub use gkls::{LindbladModel, TimeGrid, Trajectory};
pub use invariants::{CovarianceMatrix, InvariantSet};
pub use operator::{CMatrix, CVector, DensityMatrix, Hermitian, C64};
pub use random::SeededRng;
pub use tolerance::Tolerances;
