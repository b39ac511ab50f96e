// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Completely positive maps in Kraus form.
//!
//! A [`KrausChannel`] is the ordered family `{V_n}` acting as
//! `rho -> sum_n V_n rho V_n^dag`; its adjoint acts on observables as
//! `Q -> sum_n V_n^dag Q V_n`. Channels are produced either directly or
//! from a system-environment unitary via [`DilationSpec`], where
//! `V_n = <v_n| U |phi>` with `{|v_n>}` the standard environment basis.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    c, check_operator, hermitize_unchecked, identity, matrix_from_pairs, matrix_to_pairs, same_dim,
    CMatrix, CVector, DensityMatrix, Hermitian,
};
use crate::random::SeededRng;
use crate::tolerance;

/// Result of a structural channel check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelCheck {
    pub holds: bool,
    /// Frobenius norm of the identity defect.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators.first().ok_or(Error::Empty)?;
        let dim = check_operator(first)?;
        for op in &operators[1..] {
            check_operator(op)?;
            same_dim("Kraus operator", dim, op)?;
        }
        Ok(Self { dim, operators })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            operators: vec![identity(dim)],
        }
    }

    /// Single-Kraus channel `rho -> U rho U^dag`; `U` must be unitary.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let dim = check_operator(&u)?;
        let defect = (u.adjoint() * &u - identity(dim)).norm();
        if defect > tolerance::STRUCTURAL {
            return Err(Error::InvalidChannel {
                defect,
                tolerance: tolerance::STRUCTURAL,
            });
        }
        Self::new(vec![u])
    }

    /// Qubit amplitude damping: `V0 = diag(1, sqrt(1-g))`, `V1 = sqrt(g) |0><1|`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!(
                "damping probability {gamma} outside [0, 1]"
            )));
        }
        let z = c(0.0, 0.0);
        let v0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c((1.0 - gamma).sqrt(), 0.0)]);
        let v1 = CMatrix::from_row_slice(2, 2, &[z, c(gamma.sqrt(), 0.0), z, z]);
        Self::new(vec![v0, v1])
    }

    /// `rho -> sum_k p_k U_k rho U_k^dag`, always unital.
    pub fn mixed_unitary(weights: &[f64], unitaries: Vec<CMatrix>) -> Result<Self> {
        if weights.len() != unitaries.len() {
            return Err(Error::dim(
                "mixed-unitary weights",
                unitaries.len(),
                weights.len(),
            ));
        }
        if weights.iter().any(|&p| p < 0.0) {
            return Err(Error::Domain("negative mixing weight".into()));
        }
        let ops = weights
            .iter()
            .zip(unitaries)
            .map(|(&p, u)| u * c(p.sqrt(), 0.0))
            .collect();
        Self::new(ops)
    }

    /// Seeded mixed-unitary channel with `count` Haar unitaries.
    pub fn random_mixed_unitary(dim: usize, count: usize, seed: u64) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let weights = rng.simplex(count.max(1));
        let unitaries = (0..weights.len()).map(|_| rng.haar_unitary(dim)).collect();
        Self::mixed_unitary(&weights, unitaries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `|| sum V^dag V - I ||_F`
    pub fn trace_preserving_defect(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| {
                acc + v.adjoint() * v
            });
        (sum - identity(self.dim)).norm()
    }

    /// `|| sum V V^dag - I ||_F`
    pub fn unital_defect(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| {
                acc + v * v.adjoint()
            });
        (sum - identity(self.dim)).norm()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> ChannelCheck {
        let defect = self.trace_preserving_defect();
        ChannelCheck {
            holds: defect <= tol,
            defect,
        }
    }

    pub fn is_unital(&self, tol: f64) -> ChannelCheck {
        let defect = self.unital_defect();
        ChannelCheck {
            holds: defect <= tol,
            defect,
        }
    }

    pub(crate) fn require_trace_preserving(&self) -> Result<()> {
        let check = self.is_trace_preserving(tolerance::STRUCTURAL);
        if check.holds {
            Ok(())
        } else {
            Err(Error::InvalidChannel {
                defect: check.defect,
                tolerance: tolerance::STRUCTURAL,
            })
        }
    }

    /// `sum V m V^dag` on an arbitrary matrix, with no structural checks.
    pub fn apply_raw(&self, m: &CMatrix) -> Result<CMatrix> {
        same_dim("channel input", self.dim, m)?;
        Ok(self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| {
                acc + v * m * v.adjoint()
            }))
    }

    /// `sum V^dag m V` on an arbitrary matrix, with no structural checks.
    pub fn adjoint_apply_raw(&self, m: &CMatrix) -> Result<CMatrix> {
        same_dim("adjoint input", self.dim, m)?;
        Ok(self
            .operators
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| {
                acc + v.adjoint() * m * v
            }))
    }

    /// Evolves a state. The channel must be trace preserving.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        same_dim("channel input", self.dim, rho.matrix())?;
        self.require_trace_preserving()?;
        let out = hermitize_unchecked(self.apply_raw(rho.matrix())?);
        DensityMatrix::new(out.into_inner())
    }

    /// Heisenberg-picture action on an observable.
    pub fn adjoint_apply(&self, q: &Hermitian) -> Result<Hermitian> {
        Ok(hermitize_unchecked(self.adjoint_apply_raw(q.matrix())?))
    }

    /// `next o self`, with Kraus family `{W_m V_n}` (m outer, n inner).
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if next.dim != self.dim {
            return Err(Error::dim("channel composition", self.dim, next.dim));
        }
        let ops = next
            .operators
            .iter()
            .flat_map(|w| self.operators.iter().map(move |v| w * v))
            .collect();
        Self::new(ops)
    }

    pub fn to_record(&self) -> ChannelRecord {
        ChannelRecord {
            dim: self.dim,
            operators: self.operators.iter().map(matrix_to_pairs).collect(),
        }
    }

    pub fn from_record(record: &ChannelRecord) -> Result<Self> {
        let ops = record
            .operators
            .iter()
            .map(|rows| matrix_from_pairs(rows))
            .collect::<Result<Vec<_>>>()?;
        let channel = Self::new(ops)?;
        if channel.dim != record.dim {
            return Err(Error::dim("channel record", record.dim, channel.dim));
        }
        Ok(channel)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form: `{"dim": d, "operators": [[[ [re, im], ... ], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelRecord {
    pub dim: usize,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
}

/// System-environment unitary plus initial environment state.
///
/// Composite indices are ordered system-major: `(a, b) -> a * env_dim + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSpec {
    sys_dim: usize,
    env_dim: usize,
    unitary: CMatrix,
    env_state: CVector,
}

impl DilationSpec {
    pub fn new(
        sys_dim: usize,
        env_dim: usize,
        unitary: CMatrix,
        env_state: CVector,
    ) -> Result<Self> {
        if sys_dim == 0 || env_dim == 0 {
            return Err(Error::Empty);
        }
        let n = check_operator(&unitary)?;
        if n != sys_dim * env_dim {
            return Err(Error::dim("dilation unitary", sys_dim * env_dim, n));
        }
        let defect = (unitary.adjoint() * &unitary - identity(n)).norm();
        if defect > tolerance::STRUCTURAL {
            return Err(Error::Domain(format!(
                "dilation operator is not unitary (defect {defect:e})"
            )));
        }
        if env_state.len() != env_dim {
            return Err(Error::dim("environment state", env_dim, env_state.len()));
        }
        let norm = env_state.norm();
        if (norm - 1.0).abs() > tolerance::UNIT_NORM {
            return Err(Error::Domain(format!("environment state has norm {norm}")));
        }
        Ok(Self {
            sys_dim,
            env_dim,
            unitary,
            env_state,
        })
    }

    /// `U = I`, environment in `|0>`.
    pub fn identity(sys_dim: usize, env_dim: usize) -> Result<Self> {
        Self::new(
            sys_dim,
            env_dim,
            identity(sys_dim * env_dim),
            basis_vector(env_dim, 0),
        )
    }

    /// Haar-random unitary on the product space, environment in `|0>`.
    pub fn random(sys_dim: usize, env_dim: usize, seed: u64) -> Result<Self> {
        let u = SeededRng::new(seed).haar_unitary(sys_dim * env_dim);
        Self::new(sys_dim, env_dim, u, basis_vector(env_dim, 0))
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn env_state(&self) -> &CVector {
        &self.env_state
    }

    /// `V_n = <v_n| U |phi>` for every environment basis vector, null ones included.
    pub fn kraus_operators(&self) -> Vec<CMatrix> {
        let (s, e) = (self.sys_dim, self.env_dim);
        (0..e)
            .map(|n| {
                CMatrix::from_fn(s, s, |a, ap| {
                    (0..e)
                        .map(|b| self.unitary[(a * e + n, ap * e + b)] * self.env_state[b])
                        .sum()
                })
            })
            .collect()
    }

    /// Kraus channel with numerically null operators removed.
    pub fn channel(&self) -> Result<KrausChannel> {
        let ops: Vec<CMatrix> = self
            .kraus_operators()
            .into_iter()
            .filter(|v| v.norm() >= tolerance::NULL_KRAUS)
            .collect();
        KrausChannel::new(ops)
    }
}

fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = c(1.0, 0.0);
    v
}

/// Channel from a Haar-random dilation with the environment in `|0>`.
pub fn random_channel(sys_dim: usize, env_dim: usize, seed: u64) -> Result<KrausChannel> {
    DilationSpec::random(sys_dim, env_dim, seed)?.channel()
}

/// Outcome probabilities `p_n = tr(V_n rho V_n^dag)` of the POVM `{V_n^dag V_n}`.
pub fn povm_probabilities(spec: &DilationSpec, rho: &DensityMatrix) -> Result<Vec<f64>> {
    same_dim("POVM state", spec.sys_dim, rho.matrix())?;
    Ok(spec
        .kraus_operators()
        .iter()
        .map(|v| (v * rho.matrix() * v.adjoint()).trace().re)
        .collect())
}

/// Largest difference between projective probabilities in the extended
/// space, `<Psi| U^dag (I (x) |v_n><v_n|) U |Psi>` with `Psi = psi (x) phi`,
/// and the POVM probabilities `|| V_n psi ||^2`.
pub fn naimark_check(spec: &DilationSpec, psi: &CVector) -> Result<f64> {
    if psi.len() != spec.sys_dim {
        return Err(Error::dim("Naimark state", spec.sys_dim, psi.len()));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > tolerance::STRUCTURAL {
        return Err(Error::Domain(format!("system state has norm {norm}")));
    }
    let big = psi.kronecker(&spec.env_state);
    let u = &spec.unitary;
    let kraus = spec.kraus_operators();
    let mut worst: f64 = 0.0;
    for (n, v) in kraus.iter().enumerate() {
        let mut env_proj = CMatrix::zeros(spec.env_dim, spec.env_dim);
        env_proj[(n, n)] = c(1.0, 0.0);
        let projector = u.adjoint() * identity(spec.sys_dim).kronecker(&env_proj) * u;
        let projective = (big.adjoint() * &projector * &big)[(0, 0)].re;
        let povm = (v * psi).norm_squared();
        worst = worst.max((projective - povm).abs());
    }
    Ok(worst)
}
