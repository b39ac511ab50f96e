// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Weak invariants of discrete channel chains.
//!
//! A weak invariant is represented by its value at the final time; earlier
//! values are obtained by pulling back through the adjoint channels,
//! `I(t) = Phi*(I(t'))`. The expectation `tr(I rho)` is then constant along
//! the chain while the variance can only grow, for any trace-preserving
//! chain (unital or not).

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::channels::{random_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::operator::{
    expectation, hermitize_unchecked, same_dim, spectral_decompose, trace_product, DensityMatrix,
    Hermitian,
};
use crate::random::SeededRng;
use crate::report::format_float;
use crate::tolerance::{self, Tolerances};

/// Ordered collection of invariants; the order fixes covariance indices.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    dim: usize,
    members: Vec<Hermitian>,
}

impl InvariantSet {
    pub fn new(dim: usize, members: Vec<Hermitian>) -> Result<Self> {
        for m in &members {
            same_dim("invariant set member", dim, m.matrix())?;
        }
        Ok(Self { dim, members })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[Hermitian] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Symmetric `K x K` matrix of invariant covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, k: usize, kp: usize) -> f64 {
        self.0[(k, kp)]
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    /// Smallest eigenvalue; `+inf` for the empty matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.size() == 0 {
            return f64::INFINITY;
        }
        self.0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -tolerance::COVARIANCE_PSD
    }
}

/// `I(t) = Phi*(I(t'))`. The channel must be trace preserving.
pub fn pull_back(phi: &KrausChannel, i_final: &Hermitian) -> Result<Hermitian> {
    same_dim("pull-back", phi.dim(), i_final.matrix())?;
    phi.require_trace_preserving()?;
    phi.adjoint_apply(i_final)
}

/// `(1/2) <{A, B}> - <A><B>`.
pub fn covariance(rho: &DensityMatrix, a: &Hermitian, b: &Hermitian) -> Result<f64> {
    same_dim("covariance", rho.dim(), a.matrix())?;
    same_dim("covariance", rho.dim(), b.matrix())?;
    let r = rho.matrix();
    let ab = trace_product(&(a.matrix() * b.matrix()), r).re;
    let ba = trace_product(&(b.matrix() * a.matrix()), r).re;
    Ok(0.5 * (ab + ba) - expectation(rho, a)? * expectation(rho, b)?)
}

/// `<I^2> - <I>^2`.
pub fn variance(rho: &DensityMatrix, i: &Hermitian) -> Result<f64> {
    covariance(rho, i, i)
}

pub fn covariance_matrix(rho: &DensityMatrix, set: &InvariantSet) -> Result<CovarianceMatrix> {
    let k = set.len();
    if k > 0 {
        same_dim("covariance matrix", set.dim(), rho.matrix())?;
    }
    let mut m = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = covariance(rho, &set.members[a], &set.members[b])?;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(CovarianceMatrix(m))
}

/// Smallest eigenvalue of `Phi*(J^2) - Phi*(J)^2`, nonnegative for any
/// trace-preserving channel.
pub fn convexity_gap(phi: &KrausChannel, j: &Hermitian) -> Result<f64> {
    let pulled = pull_back(phi, j)?;
    let pulled_square = pull_back(phi, &j.square())?;
    let gap = hermitize_unchecked(pulled_square.matrix() - pulled.square().matrix());
    Ok(spectral_decompose(&gap)?.eigenvalues[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditStep {
    pub step: usize,
    pub expectation: f64,
    pub variance: f64,
    /// `|<I_j> - <I_0>|`
    pub expectation_drift: f64,
    /// `Var_j - Var_{j-1}`; zero at the first step.
    pub variance_increment: f64,
    pub expectation_violation: bool,
    pub variance_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceAudit {
    pub steps: Vec<AuditStep>,
    pub max_expectation_drift: f64,
    /// Smallest step-to-step variance change; `+inf` for an empty chain.
    pub min_variance_increment: f64,
    pub passed: bool,
}

impl VarianceAudit {
    pub fn violations(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.expectation_violation || s.variance_violation)
            .count()
    }

    /// CSV rows `step,expectation,variance`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "expectation", "variance"])?;
        for s in &self.steps {
            w.write_record([
                s.step.to_string(),
                format_float(s.expectation),
                format_float(s.variance),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Pushes `rho0` forward and pulls `i_final` backward through the chain,
/// then checks expectation conservation and variance growth at every time.
pub fn audit_variance_growth(
    channels: &[KrausChannel],
    rho0: &DensityMatrix,
    i_final: &Hermitian,
) -> Result<VarianceAudit> {
    audit_variance_growth_with(channels, rho0, i_final, &Tolerances::default())
}

pub fn audit_variance_growth_with(
    channels: &[KrausChannel],
    rho0: &DensityMatrix,
    i_final: &Hermitian,
    tol: &Tolerances,
) -> Result<VarianceAudit> {
    let dim = rho0.dim();
    same_dim("audit observable", dim, i_final.matrix())?;
    for ch in channels {
        if ch.dim() != dim {
            return Err(Error::dim("audit channel", dim, ch.dim()));
        }
        ch.require_trace_preserving()?;
    }

    let mut states = Vec::with_capacity(channels.len() + 1);
    states.push(rho0.clone());
    for ch in channels {
        let next = ch.apply(states.last().expect("nonempty"))?;
        states.push(next);
    }

    let mut invariants = vec![i_final.clone()];
    for ch in channels.iter().rev() {
        let earlier = pull_back(ch, invariants.last().expect("nonempty"))?;
        invariants.push(earlier);
    }
    invariants.reverse();

    let mut steps: Vec<AuditStep> = Vec::with_capacity(states.len());
    for (j, (rho, inv)) in states.iter().zip(&invariants).enumerate() {
        let e = expectation(rho, inv)?;
        let v = variance(rho, inv)?;
        let (drift, increment) = match steps.first() {
            Some(first) => (
                (e - first.expectation).abs(),
                v - steps.last().expect("nonempty").variance,
            ),
            None => (0.0, 0.0),
        };
        steps.push(AuditStep {
            step: j,
            expectation: e,
            variance: v,
            expectation_drift: drift,
            variance_increment: increment,
            expectation_violation: drift > tol.structural,
            variance_violation: increment < -tol.audit_slack,
        });
    }

    let max_expectation_drift = steps
        .iter()
        .map(|s| s.expectation_drift)
        .fold(0.0, f64::max);
    let min_variance_increment = steps
        .iter()
        .skip(1)
        .map(|s| s.variance_increment)
        .fold(f64::INFINITY, f64::min);
    let passed = steps
        .iter()
        .all(|s| !s.expectation_violation && !s.variance_violation);
    Ok(VarianceAudit {
        steps,
        max_expectation_drift,
        min_variance_increment,
        passed,
    })
}

/// A seeded channel chain with initial state and final observable.
#[derive(Debug, Clone)]
pub struct AuditCase {
    pub seed: u64,
    pub dim: usize,
    pub env_dims: Vec<usize>,
    pub channels: Vec<KrausChannel>,
    pub rho0: DensityMatrix,
    pub i_final: Hermitian,
}

/// Inclusive ranges from which [`random_audit_case`] draws its sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditRanges {
    pub sys_dims: (usize, usize),
    pub env_dims: (usize, usize),
    pub chain_lengths: (usize, usize),
}

impl Default for AuditRanges {
    fn default() -> Self {
        Self {
            sys_dims: (2, 4),
            env_dims: (2, 4),
            chain_lengths: (1, 5),
        }
    }
}

impl AuditRanges {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
        for (name, r) in [
            ("sys_dims", self.sys_dims),
            ("env_dims", self.env_dims),
            ("chain_lengths", self.chain_lengths),
        ] {
            if !ok(r) {
                return Err(Error::Config(format!(
                    "{name} must satisfy 1 <= lo <= hi, got ({}, {})",
                    r.0, r.1
                )));
            }
        }
        Ok(())
    }
}

/// Chain of Haar-dilated channels drawn deterministically from `seed`.
pub fn random_audit_case(seed: u64, ranges: &AuditRanges) -> Result<AuditCase> {
    ranges.validate()?;
    let mut rng = SeededRng::new(seed);
    let dim = rng.int(ranges.sys_dims.0, ranges.sys_dims.1);
    let len = rng.int(ranges.chain_lengths.0, ranges.chain_lengths.1);
    let mut env_dims = Vec::with_capacity(len);
    let mut channels = Vec::with_capacity(len);
    for _ in 0..len {
        let env = rng.int(ranges.env_dims.0, ranges.env_dims.1);
        let channel_seed = rng.next_u64();
        env_dims.push(env);
        channels.push(random_channel(dim, env, channel_seed)?);
    }
    let rho0 = rng.density(dim);
    let i_final = rng.hermitian(dim);
    Ok(AuditCase {
        seed,
        dim,
        env_dims,
        channels,
        rho0,
        i_final,
    })
}
