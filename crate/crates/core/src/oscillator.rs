// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-dependent harmonic oscillator `H(t) = K1 + k(t) K2` on a truncated
//! Fock space, with the su(1,1) generators
//!
//! ```text
//! K1 = p^2 / 2,  K2 = x^2 / 2,  K3 = (px + xp) / 2
//! [K1, K2] = -i K3,  [K2, K3] = 2i K2,  [K3, K1] = 2i K1
//! ```
//!
//! and dissipation `c(t) [K2, [K2, rho]]` with `c = -k'/2`. Invariants in
//! the span of the `K_j` have coefficients obeying `a' = A(t) a`.
//!
//! Ladder products only couple levels `n` and `n +- 2`, so products of up
//! to three generators are exact on levels `0..N-1-margin` when the margin
//! is at least 4. Every comparison below is restricted to that block.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gkls::{
    evolve_states, Dissipator, IntegrateOptions, LindbladModel, PositivityPolicy, TimeDependent,
    TimeGrid, Trajectory,
};
use crate::invariants::InvariantSet;
use crate::ode::rk4_step;
use crate::operator::{c, commutator, frobenius, CMatrix, CVector, DensityMatrix, Hermitian, I};
use crate::tolerance;

pub type CoefficientVector = Vector3<f64>;

pub const MIN_FOCK_DIM: usize = 8;
pub const MIN_MARGIN: usize = 4;
/// Largest population tolerated on levels at or above the guard level.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Truncated su(1,1) generators.
#[derive(Debug, Clone)]
pub struct SU11Basis {
    fock_dim: usize,
    margin: usize,
    k: [Hermitian; 3],
}

impl SU11Basis {
    pub fn build(fock_dim: usize, margin: usize) -> Result<Self> {
        if fock_dim < MIN_FOCK_DIM {
            return Err(Error::Config(format!(
                "fock_dim must be at least {MIN_FOCK_DIM}, got {fock_dim}"
            )));
        }
        if margin < MIN_MARGIN {
            return Err(Error::Config(format!(
                "margin must be at least {MIN_MARGIN}, got {margin}"
            )));
        }
        if margin >= fock_dim {
            return Err(Error::Config(format!(
                "margin {margin} leaves no interior in {fock_dim} levels"
            )));
        }
        let n = fock_dim;
        // a^2 |m> = sqrt(m (m - 1)) |m - 2>
        let mut a2 = CMatrix::zeros(n, n);
        let mut number = CMatrix::zeros(n, n);
        for m in 0..n {
            number[(m, m)] = c(m as f64, 0.0);
            if m >= 2 {
                a2[(m - 2, m)] = c(((m * (m - 1)) as f64).sqrt(), 0.0);
            }
        }
        let a2_dag = a2.adjoint();
        let diag = number * c(2.0, 0.0) + CMatrix::identity(n, n);
        let sum = &a2 + &a2_dag;
        let k1 = (&diag - &sum) * c(0.25, 0.0);
        let k2 = (&diag + &sum) * c(0.25, 0.0);
        let k3 = (&a2_dag - &a2) * c(0.0, 0.5);
        let basis = Self {
            fock_dim,
            margin,
            k: [
                Hermitian::new(k1)?,
                Hermitian::new(k2)?,
                Hermitian::new(k3)?,
            ],
        };
        let defects = basis.commutator_defects();
        let scale = basis.k[0].norm() * basis.k[1].norm();
        if let Some(d) = defects.iter().find(|&&d| d > tolerance::DYNAMICAL * scale) {
            return Err(Error::Domain(format!(
                "su(1,1) relations fail on the interior block (defect {d:e})"
            )));
        }
        Ok(basis)
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Number of interior levels, `N - margin`.
    pub fn interior_dim(&self) -> usize {
        self.fock_dim - self.margin
    }

    pub fn k1(&self) -> &Hermitian {
        &self.k[0]
    }

    pub fn k2(&self) -> &Hermitian {
        &self.k[1]
    }

    pub fn k3(&self) -> &Hermitian {
        &self.k[2]
    }

    pub fn generators(&self) -> &[Hermitian; 3] {
        &self.k
    }

    /// Top-left interior block of `m`.
    pub fn interior(&self, m: &CMatrix) -> CMatrix {
        let d = self.interior_dim();
        m.view((0, 0), (d, d)).into_owned()
    }

    /// Interior Frobenius norms of `[K1,K2]+iK3`, `[K2,K3]-2iK2`, `[K3,K1]-2iK1`.
    pub fn commutator_defects(&self) -> [f64; 3] {
        let [k1, k2, k3] = self.k.each_ref().map(Hermitian::matrix);
        let d = |m: CMatrix| frobenius(&self.interior(&m));
        [
            d(commutator(k1, k2) + k3 * I),
            d(commutator(k2, k3) - k2 * (I * 2.0)),
            d(commutator(k3, k1) - k1 * (I * 2.0)),
        ]
    }

    /// `H = K1 + kval K2`.
    pub fn hamiltonian(&self, kval: f64) -> Result<Hermitian> {
        if !(kval >= 0.0 && kval.is_finite()) {
            return Err(Error::Domain(format!(
                "stiffness must be nonnegative, got {kval}"
            )));
        }
        Ok(&self.k[0] + &(&self.k[1] * kval))
    }

    /// `a1 K1 + a2 K2 + a3 K3`.
    pub fn invariant_from_coefficients(&self, alpha: &CoefficientVector) -> Hermitian {
        let m = self.k[0].matrix() * c(alpha[0], 0.0)
            + self.k[1].matrix() * c(alpha[1], 0.0)
            + self.k[2].matrix() * c(alpha[2], 0.0);
        Hermitian::new_unchecked(m)
    }

    /// Real least-squares coordinates of the interior block of `m` in the
    /// interior span of the generators, plus the relative fit residual.
    fn fit_interior(&self, m: &CMatrix, gram_inv: &Matrix3<f64>) -> (CoefficientVector, f64) {
        let target = self.interior(m);
        let blocks = self.k.each_ref().map(|k| self.interior(k.matrix()));
        let rhs = Vector3::from_fn(|i, _| blocks[i].dotc(&target).re);
        let coeffs = gram_inv * rhs;
        let mut fitted = target.clone();
        for (b, &x) in blocks.iter().zip(coeffs.iter()) {
            fitted -= b * c(x, 0.0);
        }
        let residual = frobenius(&fitted) / frobenius(&target).max(f64::MIN_POSITIVE);
        (coeffs, residual)
    }

    fn interior_gram_inverse(&self) -> Result<Matrix3<f64>> {
        let blocks = self.k.each_ref().map(|k| self.interior(k.matrix()));
        let gram = Matrix3::from_fn(|i, j| blocks[i].dotc(&blocks[j]).re);
        gram.try_inverse()
            .ok_or_else(|| Error::Domain("generator Gram matrix is singular".into()))
    }
}

fn default_offset() -> f64 {
    0.0
}

/// Nonincreasing stiffness `k(t)` with analytic derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StiffnessSchedule {
    /// `offset + k0 exp(-lambda t)`.
    Exponential {
        k0: f64,
        lambda: f64,
        #[serde(default = "default_offset")]
        offset: f64,
    },
    /// `offset + k0 / (1 + lambda t)`.
    Rational {
        k0: f64,
        lambda: f64,
        #[serde(default = "default_offset")]
        offset: f64,
    },
    Constant {
        k: f64,
    },
}

/// Result of checking a schedule on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleCheck {
    /// Steps on which `k'` vanishes at both ends (unitary stretches).
    pub zero_rate_steps: usize,
    pub max_kdot: f64,
    pub min_k: f64,
}

impl StiffnessSchedule {
    pub fn k(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { k0, lambda, offset } => offset + k0 * (-lambda * t).exp(),
            Self::Rational { k0, lambda, offset } => offset + k0 / (1.0 + lambda * t),
            Self::Constant { k } => k,
        }
    }

    pub fn kdot(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { k0, lambda, .. } => -lambda * k0 * (-lambda * t).exp(),
            Self::Rational { k0, lambda, .. } => {
                let d = 1.0 + lambda * t;
                -lambda * k0 / (d * d)
            }
            Self::Constant { .. } => 0.0,
        }
    }

    /// Requires `k >= 0` and `k' <= 0` at every RK4 sample time of `grid`.
    pub fn check(&self, grid: &TimeGrid) -> Result<ScheduleCheck> {
        grid.validate()?;
        if let Self::Rational { lambda, .. } = *self {
            if 1.0 + lambda * grid.t0 <= 0.0 || 1.0 + lambda * grid.t1 <= 0.0 {
                return Err(Error::Config(format!(
                    "schedule.lambda = {lambda} puts a pole inside the time grid"
                )));
            }
        }
        let mut out = ScheduleCheck {
            zero_rate_steps: 0,
            max_kdot: f64::NEG_INFINITY,
            min_k: f64::INFINITY,
        };
        let dt = grid.dt();
        for step in 0..grid.steps {
            let t = grid.time(step);
            for s in [t, t + 0.5 * dt, grid.time(step + 1)] {
                let (k, kdot) = (self.k(s), self.kdot(s));
                if !(k.is_finite() && kdot.is_finite()) {
                    return Err(Error::Config(format!("schedule is not finite at t = {s}")));
                }
                out.max_kdot = out.max_kdot.max(kdot);
                out.min_k = out.min_k.min(k);
                if k < 0.0 {
                    return Err(Error::Config(format!(
                        "schedule gives k = {k} < 0 at t = {s}"
                    )));
                }
                if kdot > 0.0 {
                    return Err(Error::Config(format!(
                        "schedule gives k' = {kdot} > 0 at t = {s}; the dissipation rate -k'/2 \
                         would be negative"
                    )));
                }
            }
            if self.kdot(t) == 0.0 && self.kdot(grid.time(step + 1)) == 0.0 {
                out.zero_rate_steps += 1;
            }
        }
        Ok(out)
    }
}

/// `H(t) = K1 + k(t) K2` with the single dissipator `L = K2`, `c = -k'(t)/2`.
pub fn gkls_model(
    basis: &SU11Basis,
    schedule: StiffnessSchedule,
    grid: &TimeGrid,
) -> Result<LindbladModel> {
    schedule.check(grid)?;
    let (k1, k2) = (basis.k1().clone(), basis.k2().clone());
    let hamiltonian = TimeDependent::varying(move |t| &k1 + &(&k2 * schedule.k(t)));
    let dissipator = Dissipator {
        rate: TimeDependent::varying(move |t| -0.5 * schedule.kdot(t)),
        operator: TimeDependent::Constant(basis.k2().matrix().clone()),
    };
    LindbladModel::new(basis.fock_dim(), hamiltonian, vec![dissipator])
}

/// `A(t) = [[0, 0, -2], [k', 0, 2k], [k, -1, 0]]`.
pub fn coefficient_matrix(schedule: &StiffnessSchedule, t: f64) -> Matrix3<f64> {
    let (k, kdot) = (schedule.k(t), schedule.kdot(t));
    Matrix3::new(0.0, 0.0, -2.0, kdot, 0.0, 2.0 * k, k, -1.0, 0.0)
}

/// `A(t) alpha`.
pub fn coefficient_rhs(
    alpha: &CoefficientVector,
    t: f64,
    schedule: &StiffnessSchedule,
) -> CoefficientVector {
    coefficient_matrix(schedule, t) * alpha
}

/// RK4 realization of the time-ordered exponential acting on `alpha0`.
pub fn propagate_coefficients(
    alpha0: &CoefficientVector,
    grid: &TimeGrid,
    schedule: &StiffnessSchedule,
) -> Result<Vec<CoefficientVector>> {
    grid.validate()?;
    let f = |t: f64, a: &CoefficientVector| -> Result<CoefficientVector> {
        Ok(coefficient_rhs(a, t, schedule))
    };
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    out.push(*alpha0);
    for k in 0..grid.steps {
        let next = rk4_step(&f, grid.time(k), &out[k], dt)?;
        out.push(next);
    }
    Ok(out)
}

/// Second path: ordered product of `exp(A(t_mid) dt)`, applied to `alpha0`.
pub fn propagate_coefficients_midpoint(
    alpha0: &CoefficientVector,
    grid: &TimeGrid,
    schedule: &StiffnessSchedule,
) -> Result<Vec<CoefficientVector>> {
    grid.validate()?;
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    out.push(*alpha0);
    for k in 0..grid.steps {
        let mid = grid.time(k) + 0.5 * dt;
        let step = (coefficient_matrix(schedule, mid) * dt).exp();
        out.push(step * out[k]);
    }
    Ok(out)
}

/// Initial oscillator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    /// Fock-basis amplitudes `[re, im]`, normalized after padding.
    Fock { amplitudes: Vec<[f64; 2]> },
    /// `p_n ~ exp(-beta n)` for `n < cutoff`.
    Thermal { beta: f64, cutoff: usize },
    /// Coherent state truncated to the Fock space and renormalized.
    Coherent { re: f64, im: f64 },
}

impl InitialState {
    pub fn build(&self, fock_dim: usize) -> Result<DensityMatrix> {
        match self {
            Self::Fock { amplitudes } => {
                if amplitudes.len() > fock_dim {
                    return Err(Error::Config(format!(
                        "initial.amplitudes has {} entries for {fock_dim} levels",
                        amplitudes.len()
                    )));
                }
                let mut psi = CVector::zeros(fock_dim);
                for (slot, &[re, im]) in psi.iter_mut().zip(amplitudes) {
                    *slot = c(re, im);
                }
                normalized_pure(psi)
            }
            Self::Thermal { beta, cutoff } => {
                if !(beta.is_finite() && *beta >= 0.0) || *cutoff == 0 || *cutoff > fock_dim {
                    return Err(Error::Config(format!(
                        "initial thermal state needs beta >= 0 and 1 <= cutoff <= {fock_dim}"
                    )));
                }
                let mut p: Vec<f64> = (0..fock_dim)
                    .map(|n| {
                        if n < *cutoff {
                            (-beta * n as f64).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let z: f64 = p.iter().sum();
                p.iter_mut().for_each(|x| *x /= z);
                DensityMatrix::diagonal(&p)
            }
            Self::Coherent { re, im } => {
                let z = c(*re, *im);
                let mut psi = CVector::zeros(fock_dim);
                let mut amp = c(1.0, 0.0);
                for n in 0..fock_dim {
                    if n > 0 {
                        amp *= z / (n as f64).sqrt();
                    }
                    psi[n] = amp;
                }
                normalized_pure(psi)
            }
        }
    }
}

fn normalized_pure(psi: CVector) -> Result<DensityMatrix> {
    let norm = psi.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Config(
            "initial state has zero or non-finite norm".into(),
        ));
    }
    DensityMatrix::pure(&(psi / c(norm, 0.0)))
}

/// Lowest level counted as leakage: `N - margin - 4`.
pub fn guard_level(basis: &SU11Basis) -> usize {
    basis.fock_dim().saturating_sub(basis.margin() + MIN_MARGIN)
}

/// Population on levels `>= guard_level`.
pub fn leakage(basis: &SU11Basis, rho: &DensityMatrix) -> f64 {
    (guard_level(basis)..basis.fock_dim())
        .map(|n| rho.matrix()[(n, n)].re)
        .sum()
}

/// Inputs of one oscillator run.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorScenario {
    pub schedule: StiffnessSchedule,
    /// Initial coefficients of the second invariant.
    pub alpha0: CoefficientVector,
    pub grid: TimeGrid,
    pub initial: InitialState,
}

/// Cross-validation report. Member 0 is `H(t)`, member 1 is `I2(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    /// Interior Frobenius distance between operator and coefficient paths, per step.
    pub interior_discrepancy: Vec<f64>,
    pub max_interior_discrepancy: f64,
    /// Largest relative residual of the interior dual generator outside the generator span.
    pub max_fit_residual: f64,
    /// `max_t |alpha_H(t) - (1, k(t), 0)|`.
    pub fixed_solution_drift: f64,
    /// `max_t |alpha_RK4(t) - alpha_midpoint(t)|` for both members.
    pub chronological_mismatch: f64,
    pub expectation_drift: [f64; 2],
    pub min_variance_increment: [f64; 2],
    pub min_covariance_rate_diagonal: f64,
    pub initial_leakage: f64,
    pub final_leakage: f64,
    pub guard_level: usize,
    pub zero_rate_steps: usize,
    /// `max_t ||[H(t), I2(t)]||_F` on the interior block.
    pub min_noncommutativity: f64,
}

/// Certification thresholds for [`CrossValidation::violations`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorTolerances {
    pub discrepancy: f64,
    pub fixed_solution: f64,
    pub chronological: f64,
    pub conservation: f64,
    pub variance_slack: f64,
    pub covariance_rate_slack: f64,
}

impl Default for OscillatorTolerances {
    fn default() -> Self {
        Self {
            discrepancy: 1e-6,
            fixed_solution: 1e-8,
            chronological: 1e-6,
            conservation: 1e-6,
            variance_slack: 1e-8,
            covariance_rate_slack: 1e-12,
        }
    }
}

impl CrossValidation {
    /// Names of failed checks; empty means certified.
    pub fn violations(&self, tol: &OscillatorTolerances) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, what: String| {
            if !ok {
                v.push(what);
            }
        };
        check(
            self.max_interior_discrepancy <= tol.discrepancy,
            format!("interior discrepancy {:e}", self.max_interior_discrepancy),
        );
        check(
            self.fixed_solution_drift <= tol.fixed_solution,
            format!("fixed-solution drift {:e}", self.fixed_solution_drift),
        );
        check(
            self.chronological_mismatch <= tol.chronological,
            format!("chronological mismatch {:e}", self.chronological_mismatch),
        );
        for (k, name) in ["H", "I2"].iter().enumerate() {
            check(
                self.expectation_drift[k] <= tol.conservation,
                format!("<{name}> drift {:e}", self.expectation_drift[k]),
            );
            check(
                self.min_variance_increment[k] >= -tol.variance_slack,
                format!("Var({name}) decrease {:e}", self.min_variance_increment[k]),
            );
        }
        check(
            self.min_covariance_rate_diagonal >= -tol.covariance_rate_slack,
            format!(
                "covariance rate diagonal {:e}",
                self.min_covariance_rate_diagonal
            ),
        );
        v
    }
}

/// Operator-level propagation of `I = beta . K` under the dual equation.
///
/// The full truncated matrix `beta . K` is pushed through the dual generator
/// of `model`; its interior block, which is exact, is projected back onto
/// the generators and the coordinates are stepped with RK4. Stepping the
/// full truncated matrix directly is not viable: the dual of the diffusive
/// double commutator is anti-diffusive forward in time and the corrupted top
/// levels blow up.
fn propagate_operator_path(
    basis: &SU11Basis,
    model: &LindbladModel,
    alpha0: &CoefficientVector,
    grid: &TimeGrid,
) -> Result<(Vec<CoefficientVector>, f64)> {
    let gram_inv = basis.interior_gram_inverse()?;
    let residual = std::cell::Cell::new(0.0f64);
    let f = |t: f64, beta: &CoefficientVector| -> Result<CoefficientVector> {
        let x = basis.invariant_from_coefficients(beta);
        let dx = crate::gkls::invariant_rhs(model, &x, t)?;
        let (coeffs, r) = basis.fit_interior(dx.matrix(), &gram_inv);
        if frobenius(dx.matrix()) > 0.0 {
            residual.set(residual.get().max(r));
        }
        Ok(coeffs)
    };
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    out.push(*alpha0);
    for k in 0..grid.steps {
        let next = rk4_step(&f, grid.time(k), &out[k], dt)?;
        out.push(next);
    }
    Ok((out, residual.get()))
}

fn max_distance(a: &[CoefficientVector], b: &[CoefficientVector]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max)
}

/// Runs both invariant paths and the state path, returning the report and
/// the state trajectory (members `H(t)` and `I2(t)`).
pub fn cross_validate(
    basis: &SU11Basis,
    scenario: &OscillatorScenario,
    opts: &IntegrateOptions,
) -> Result<(CrossValidation, Trajectory)> {
    let grid = &scenario.grid;
    let schedule = &scenario.schedule;
    let check = schedule.check(grid)?;
    let model = gkls_model(basis, *schedule, grid)?;

    let rho0 = scenario.initial.build(basis.fock_dim())?;
    let initial_leakage = leakage(basis, &rho0);
    if initial_leakage > LEAKAGE_LIMIT {
        return Err(Error::Leakage {
            population: initial_leakage,
            level: guard_level(basis),
            limit: LEAKAGE_LIMIT,
        });
    }

    let h0 = Vector3::new(1.0, schedule.k(grid.t0), 0.0);
    let alpha_h = propagate_coefficients(&h0, grid, schedule)?;
    let alpha_i = propagate_coefficients(&scenario.alpha0, grid, schedule)?;
    let fixed_solution_drift = alpha_h
        .iter()
        .enumerate()
        .map(|(k, a)| (a - Vector3::new(1.0, schedule.k(grid.time(k)), 0.0)).amax())
        .fold(0.0, f64::max);
    let chronological_mismatch = max_distance(
        &alpha_h,
        &propagate_coefficients_midpoint(&h0, grid, schedule)?,
    )
    .max(max_distance(
        &alpha_i,
        &propagate_coefficients_midpoint(&scenario.alpha0, grid, schedule)?,
    ));

    let (beta_h, res_h) = propagate_operator_path(basis, &model, &h0, grid)?;
    let (beta_i, res_i) = propagate_operator_path(basis, &model, &scenario.alpha0, grid)?;
    let interior_discrepancy: Vec<f64> = (0..grid.len())
        .map(|k| {
            let d = |x: &CoefficientVector, y: &CoefficientVector| {
                let diff = basis.invariant_from_coefficients(&(x - y));
                frobenius(&basis.interior(diff.matrix()))
            };
            d(&beta_h[k], &alpha_h[k]).max(d(&beta_i[k], &alpha_i[k]))
        })
        .collect();

    let (states, projections) =
        evolve_states(&model, &rho0, grid, PositivityPolicy::Fail, opts.tolerance)?;
    let final_leakage = leakage(basis, states.last().expect("nonempty grid"));
    let mut min_noncommutativity = f64::INFINITY;
    let invariants = alpha_h
        .iter()
        .zip(&alpha_i)
        .map(|(ah, ai)| {
            let h = basis.invariant_from_coefficients(ah);
            let i2 = basis.invariant_from_coefficients(ai);
            let comm = commutator(h.matrix(), i2.matrix());
            min_noncommutativity = min_noncommutativity.min(frobenius(&basis.interior(&comm)));
            InvariantSet::new(basis.fock_dim(), vec![h, i2])
        })
        .collect::<Result<Vec<_>>>()?;
    let traj = Trajectory::observe(&model, *grid, states, invariants, projections, opts)?;

    let drift = traj.expectation_drift();
    let min_var = |k: usize| {
        traj.records
            .windows(2)
            .map(|w| w[1].variances[k] - w[0].variances[k])
            .fold(f64::INFINITY, f64::min)
    };
    let rate_check = traj.covariance_rate_check(&model)?;

    let report = CrossValidation {
        max_interior_discrepancy: interior_discrepancy.iter().copied().fold(0.0, f64::max),
        interior_discrepancy,
        max_fit_residual: res_h.max(res_i),
        fixed_solution_drift,
        chronological_mismatch,
        expectation_drift: [drift[0], drift[1]],
        min_variance_increment: [min_var(0), min_var(1)],
        min_covariance_rate_diagonal: rate_check.min_diagonal_rate,
        initial_leakage,
        final_leakage,
        guard_level: guard_level(basis),
        zero_rate_steps: check.zero_rate_steps,
        min_noncommutativity,
    };
    Ok((report, traj))
}
