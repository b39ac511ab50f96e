// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{Dissipator, LindbladModel, TimeDependent};
use crate::error::{Error, Result};
use crate::invariants::InvariantSet;
use crate::operator::{c, matrix_from_pairs, matrix_to_pairs, Hermitian};
use crate::random::SeededRng;

/// Structured-text description of a time-independent model. Matrices are
/// row-major lists of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dim: usize,
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub dissipators: Vec<DissipatorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorSpec {
    pub rate: f64,
    pub operator: Vec<Vec<[f64; 2]>>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<LindbladModel> {
        let field = |name: String, e: Error| Error::Config(format!("{name}: {e}"));
        let h = matrix_from_pairs(&self.hamiltonian)
            .and_then(Hermitian::new)
            .map_err(|e| field("hamiltonian".into(), e))?;
        if h.dim() != self.dim {
            return Err(Error::Config(format!(
                "hamiltonian: expected {0}x{0}, found {1}x{1}",
                self.dim,
                h.dim()
            )));
        }
        let mut dissipators = Vec::with_capacity(self.dissipators.len());
        for (i, d) in self.dissipators.iter().enumerate() {
            if !(d.rate.is_finite() && d.rate >= 0.0) {
                return Err(Error::Config(format!(
                    "dissipators[{i}].rate must be nonnegative, got {}",
                    d.rate
                )));
            }
            let l = matrix_from_pairs(&d.operator)
                .map_err(|e| field(format!("dissipators[{i}].operator"), e))?;
            if l.nrows() != self.dim {
                return Err(Error::Config(format!(
                    "dissipators[{i}].operator: expected {0}x{0}, found {1}x{1}",
                    self.dim,
                    l.nrows()
                )));
            }
            dissipators.push(Dissipator::constant(d.rate, l));
        }
        LindbladModel::new(self.dim, TimeDependent::Constant(h), dissipators)
    }

    /// Snapshot of a model at time `t`.
    pub fn from_model(model: &LindbladModel, t: f64) -> Result<Self> {
        let g = model.generator(t)?;
        Ok(Self {
            dim: model.dim(),
            hamiltonian: matrix_to_pairs(&g.h),
            dissipators: g
                .terms
                .iter()
                .map(|term| DissipatorSpec {
                    rate: term.rate,
                    operator: matrix_to_pairs(&term.l),
                })
                .collect(),
        })
    }
}

/// Seeded time-independent model: GUE Hamiltonian and one to three
/// dissipators with rates in `[0.05, 0.5)`. Roughly a third of the Lindblad
/// operators are Hermitian (normal); the rest are scaled Ginibre matrices,
/// which are non-normal almost surely.
pub fn random_model(dim: usize, seed: u64) -> Result<LindbladModel> {
    let mut rng = SeededRng::new(seed);
    let h = rng.hermitian(dim);
    let count = rng.int(1, 3);
    let mut dissipators = Vec::with_capacity(count);
    for _ in 0..count {
        let rate = rng.uniform(0.05, 0.5);
        let normal = rng.uniform(0.0, 1.0) < 1.0 / 3.0;
        let l = if normal {
            rng.hermitian(dim).into_inner()
        } else {
            rng.ginibre(dim, dim) * c(0.5 / (dim as f64).sqrt(), 0.0)
        };
        dissipators.push((rate, l));
    }
    LindbladModel::time_independent(h, dissipators)
}

/// `count` seeded GUE observables.
pub fn random_invariants(dim: usize, count: usize, seed: u64) -> Result<InvariantSet> {
    let mut rng = SeededRng::new(seed);
    InvariantSet::new(dim, (0..count).map(|_| rng.hermitian(dim)).collect())
}
