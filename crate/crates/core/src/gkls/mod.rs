// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Markovian open-system dynamics.
//!
//! States obey
//!
//! ```text
//! d rho/dt = -i[H, rho] - sum_i c_i (L_i^dag L_i rho + rho L_i^dag L_i - 2 L_i rho L_i^dag)
//! ```
//!
//! and weak invariants obey the dual equation
//!
//! ```text
//! dI/dt = -i[H, I] + sum_i c_i (L_i^dag L_i I + I L_i^dag L_i - 2 L_i^dag I L_i)
//! ```
//!
//! so that `d tr(I rho)/dt = 0`. Rates `c_i` must be nonnegative.

mod config;
mod kraus_study;
mod trajectory;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use config::{random_invariants, random_model, DissipatorSpec, ModelSpec};
pub use kraus_study::{
    check_dt_progression, kraus_step_study, KrausStudy, KrausStudyRow, REFERENCE_DT,
};
pub use trajectory::{
    evolve_states, integrate, CovarianceRateCheck, EntropyRateCheck, IntegrateOptions,
    PositivityPolicy, Projection, StepRecord, TimeGrid, Trajectory,
};

use crate::channels::KrausChannel;
use crate::entropy::{alpha_expectation_with, near_unit_alpha};
use crate::error::{Error, Result};
use crate::invariants::InvariantSet;
use crate::operator::{
    c, check_operator, commutator, hermitize_unchecked, identity, same_dim, trace_product, CMatrix,
    DensityMatrix, Hermitian, I,
};
use crate::tolerance;

/// A value that is either fixed or a function of time.
#[derive(Clone)]
pub enum TimeDependent<T> {
    Constant(T),
    Varying(Arc<dyn Fn(f64) -> T + Send + Sync>),
}

impl<T: Clone> TimeDependent<T> {
    pub fn varying(f: impl Fn(f64) -> T + Send + Sync + 'static) -> Self {
        Self::Varying(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> T {
        match self {
            Self::Constant(v) => v.clone(),
            Self::Varying(f) => f(t),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for TimeDependent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Varying(_) => f.write_str("Varying(..)"),
        }
    }
}

/// One dissipation channel `(c_i, L_i)`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub rate: TimeDependent<f64>,
    pub operator: TimeDependent<CMatrix>,
}

impl Dissipator {
    pub fn constant(rate: f64, operator: CMatrix) -> Self {
        Self {
            rate: TimeDependent::Constant(rate),
            operator: TimeDependent::Constant(operator),
        }
    }
}

/// Hamiltonian plus dissipators, possibly time dependent.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: TimeDependent<Hermitian>,
    dissipators: Vec<Dissipator>,
}

/// The generator frozen at one instant.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    h: CMatrix,
    terms: Vec<Term>,
}

#[derive(Debug, Clone)]
struct Term {
    rate: f64,
    l: CMatrix,
    l_dag: CMatrix,
    l_dag_l: CMatrix,
}

fn check_rate(index: usize, rate: f64, t: Option<f64>) -> Result<()> {
    if rate.is_finite() && rate >= 0.0 {
        return Ok(());
    }
    let when = t.map(|t| format!(" at t = {t}")).unwrap_or_default();
    Err(Error::Config(format!(
        "dissipators[{index}].rate must be a nonnegative finite number, got {rate}{when}"
    )))
}

impl LindbladModel {
    /// Validates every constant component; varying components are checked
    /// whenever they are evaluated.
    pub fn new(
        dim: usize,
        hamiltonian: TimeDependent<Hermitian>,
        dissipators: Vec<Dissipator>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        if let TimeDependent::Constant(h) = &hamiltonian {
            same_dim("Hamiltonian", dim, h.matrix())?;
        }
        for (i, d) in dissipators.iter().enumerate() {
            if let TimeDependent::Constant(rate) = d.rate {
                check_rate(i, rate, None)?;
            }
            if let TimeDependent::Constant(l) = &d.operator {
                check_operator(l)?;
                same_dim("Lindblad operator", dim, l)?;
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            dissipators,
        })
    }

    /// Time-independent model from `H` and `(c_i, L_i)` pairs.
    pub fn time_independent(h: Hermitian, dissipators: Vec<(f64, CMatrix)>) -> Result<Self> {
        let dim = h.dim();
        let d = dissipators
            .into_iter()
            .map(|(rate, l)| Dissipator::constant(rate, l))
            .collect();
        Self::new(dim, TimeDependent::Constant(h), d)
    }

    /// Qubit dephasing: `H = 0`, `L = sigma_z` at rate `c`.
    pub fn dephasing(rate: f64) -> Result<Self> {
        Self::time_independent(
            Hermitian::zeros(2),
            vec![(rate, crate::operator::pauli::z().into_inner())],
        )
    }

    /// Qubit decay: `H = 0`, `L = |0><1|` at rate `c`.
    pub fn amplitude_damping(rate: f64) -> Result<Self> {
        Self::time_independent(
            Hermitian::zeros(2),
            vec![(rate, crate::operator::pauli::lowering())],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<Hermitian> {
        let h = self.hamiltonian.at(t);
        same_dim("Hamiltonian", self.dim, h.matrix())?;
        Ok(h)
    }

    pub(crate) fn generator(&self, t: f64) -> Result<Generator> {
        let h = self.hamiltonian_at(t)?.into_inner();
        let mut terms = Vec::with_capacity(self.dissipators.len());
        for (i, d) in self.dissipators.iter().enumerate() {
            let rate = d.rate.at(t);
            check_rate(i, rate, Some(t))?;
            let l = d.operator.at(t);
            same_dim("Lindblad operator", self.dim, &l)?;
            let l_dag = l.adjoint();
            let l_dag_l = &l_dag * &l;
            terms.push(Term {
                rate,
                l,
                l_dag,
                l_dag_l,
            });
        }
        Ok(Generator { h, terms })
    }
}

impl Generator {
    /// `-i[H, rho] - sum c (L^dag L rho + rho L^dag L - 2 L rho L^dag)`
    pub(crate) fn rho_rhs(&self, rho: &CMatrix) -> CMatrix {
        // -i H rho + h.c. gives -i[H, rho] for Hermitian rho.
        let mut half = &self.h * rho * (-I);
        let mut jump = CMatrix::zeros(rho.nrows(), rho.ncols());
        for term in &self.terms {
            if term.rate == 0.0 {
                continue;
            }
            half -= &term.l_dag_l * rho * c(term.rate, 0.0);
            jump += &term.l * rho * &term.l_dag * c(2.0 * term.rate, 0.0);
        }
        let adj = half.adjoint();
        hermitize_unchecked(half + adj + jump).into_inner()
    }

    /// `-i[H, X] + sum c (L^dag L X + X L^dag L - 2 L^dag X L)`
    pub(crate) fn invariant_rhs(&self, x: &CMatrix) -> CMatrix {
        let mut half = &self.h * x * (-I);
        let mut jump = CMatrix::zeros(x.nrows(), x.ncols());
        for term in &self.terms {
            if term.rate == 0.0 {
                continue;
            }
            half += &term.l_dag_l * x * c(term.rate, 0.0);
            jump += &term.l_dag * x * &term.l * c(2.0 * term.rate, 0.0);
        }
        let adj = half.adjoint();
        hermitize_unchecked(half + adj - jump).into_inner()
    }

    /// `2 sum c <[L^dag, L]>_α`, or the plain expectation when `alpha` is `None`.
    fn rate_bound(&self, rho: &DensityMatrix, alpha: Option<f64>, clip: f64) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.terms {
            if term.rate == 0.0 {
                continue;
            }
            let comm = &term.l_dag_l - &term.l * &term.l_dag;
            let value = match alpha {
                None => trace_product(&comm, rho.matrix()).re,
                Some(a) => alpha_expectation_with(rho, &hermitize_unchecked(comm), a, clip)?,
            };
            total += 2.0 * term.rate * value;
        }
        Ok(total)
    }

    fn covariance_rate(&self, rho: &DensityMatrix, members: &[Hermitian]) -> DMatrix<f64> {
        let k = members.len();
        let mut out = DMatrix::zeros(k, k);
        for term in &self.terms {
            if term.rate == 0.0 {
                continue;
            }
            let comms: Vec<CMatrix> = members
                .iter()
                .map(|m| commutator(&term.l, m.matrix()))
                .collect();
            for a in 0..k {
                let left = comms[a].adjoint();
                for b in a..k {
                    // <X + X^dag> = 2 Re <X>, X = [L, I_a]^dag [L, I_b]
                    let x = trace_product(&(&left * &comms[b]), rho.matrix()).re;
                    let v = 2.0 * term.rate * x;
                    out[(a, b)] += v;
                    if a != b {
                        out[(b, a)] += v;
                    }
                }
            }
        }
        out
    }
}

/// `d rho/dt` at time `t`.
pub fn rho_rhs(model: &LindbladModel, rho: &DensityMatrix, t: f64) -> Result<Hermitian> {
    same_dim("state", model.dim, rho.matrix())?;
    let g = model.generator(t)?;
    Ok(Hermitian::new_unchecked(g.rho_rhs(rho.matrix())))
}

/// `dI/dt` at time `t`.
pub fn invariant_rhs(model: &LindbladModel, inv: &Hermitian, t: f64) -> Result<Hermitian> {
    same_dim("invariant", model.dim, inv.matrix())?;
    let g = model.generator(t)?;
    Ok(Hermitian::new_unchecked(g.invariant_rhs(inv.matrix())))
}

/// Short-time Kraus family: `V_0 = I - i dt H - (dt/2) sum |g_i|^2 L_i^dag L_i`
/// and `V_i = sqrt(dt) g_i L_i` with `g_i = sqrt(2 c_i)`. Terms with `c_i = 0`
/// contribute no Kraus operator.
pub fn kraus_step(model: &LindbladModel, t: f64, dt: f64) -> Result<KrausChannel> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let g = model.generator(t)?;
    let mut v0 = identity(model.dim) - &g.h * (I * dt);
    let mut ops = Vec::with_capacity(g.terms.len() + 1);
    for term in &g.terms {
        if term.rate == 0.0 {
            continue;
        }
        let g_sq = 2.0 * term.rate;
        v0 -= &term.l_dag_l * c(0.5 * dt * g_sq, 0.0);
        ops.push(&term.l * c((dt * g_sq).sqrt(), 0.0));
    }
    ops.insert(0, v0);
    KrausChannel::new(ops)
}

/// Lower bound on `dS/dt`: `2 sum c_i <[L_i^dag, L_i]>`.
pub fn entropy_rate_bound(model: &LindbladModel, rho: &DensityMatrix, t: f64) -> Result<f64> {
    same_dim("state", model.dim, rho.matrix())?;
    model
        .generator(t)?
        .rate_bound(rho, None, tolerance::CLIP_FLOOR)
}

/// Lower bound on `dS_α/dt`: `2 sum c_i <[L_i^dag, L_i]>_α`, for `0 < α <= 2`.
pub fn renyi_rate_bound(
    model: &LindbladModel,
    rho: &DensityMatrix,
    alpha: f64,
    t: f64,
) -> Result<f64> {
    renyi_rate_bound_with(model, rho, alpha, t, tolerance::CLIP_FLOOR)
}

pub fn renyi_rate_bound_with(
    model: &LindbladModel,
    rho: &DensityMatrix,
    alpha: f64,
    t: f64,
    clip_floor: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!(
            "Rényi rate bound requires 0 < alpha <= 2, got {alpha}"
        )));
    }
    same_dim("state", model.dim, rho.matrix())?;
    let g = model.generator(t)?;
    if near_unit_alpha(alpha) {
        g.rate_bound(rho, None, clip_floor)
    } else {
        g.rate_bound(rho, Some(alpha), clip_floor)
    }
}

/// `d C(I_K, I_K')/dt = sum_i c_i <[L_i, I_K]^dag [L_i, I_K'] + [L_i, I_K']^dag [L_i, I_K]>`.
pub fn covariance_rate(
    model: &LindbladModel,
    rho: &DensityMatrix,
    set: &InvariantSet,
    t: f64,
) -> Result<DMatrix<f64>> {
    same_dim("state", model.dim, rho.matrix())?;
    if !set.is_empty() {
        same_dim("invariant set", model.dim, set.members()[0].matrix())?;
    }
    Ok(model.generator(t)?.covariance_rate(rho, set.members()))
}

/// `d (Delta I)^2/dt = 2 sum_i c_i <[L_i, I]^dag [L_i, I]>`.
pub fn variance_rate(
    model: &LindbladModel,
    rho: &DensityMatrix,
    inv: &Hermitian,
    t: f64,
) -> Result<f64> {
    same_dim("state", model.dim, rho.matrix())?;
    same_dim("invariant", model.dim, inv.matrix())?;
    let g = model.generator(t)?;
    Ok(g.covariance_rate(rho, std::slice::from_ref(inv))[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{expectation, pauli};
    use crate::random::SeededRng;

    fn plus_state() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&crate::operator::CVector::from_vec(vec![
            c(h, 0.0),
            c(h, 0.0),
        ]))
        .unwrap()
    }

    #[test]
    fn negative_rate_is_rejected() {
        let err = LindbladModel::dephasing(-0.1).unwrap_err();
        assert!(err.to_string().contains("dissipators[0].rate"));
    }

    #[test]
    fn rho_rhs_without_dissipation_is_commutator() {
        let mut rng = SeededRng::new(1);
        let h = rng.hermitian(3);
        let rho = rng.density(3);
        let model =
            LindbladModel::time_independent(h.clone(), vec![(0.0, rng.ginibre(3, 3))]).unwrap();
        let d = rho_rhs(&model, &rho, 0.0).unwrap();
        let expected = commutator(h.matrix(), rho.matrix()) * (-I);
        assert!((d.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn dephasing_coherence_rate() {
        let rate = 0.3;
        let model = LindbladModel::dephasing(rate).unwrap();
        let rho = plus_state();
        let d = rho_rhs(&model, &rho, 0.0).unwrap();
        // sigma_z rho sigma_z flips the off-diagonal sign: d rho01/dt = -4 c rho01.
        assert!((d.matrix()[(0, 1)] - rho.matrix()[(0, 1)] * (-4.0 * rate)).norm() < 1e-15);
        assert!(d.matrix()[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_fixed_by_hermitian_lindblad() {
        let mut rng = SeededRng::new(2);
        let model = LindbladModel::time_independent(
            Hermitian::zeros(4),
            vec![(0.7, rng.hermitian(4).into_inner())],
        )
        .unwrap();
        let d = rho_rhs(&model, &DensityMatrix::maximally_mixed(4), 0.0).unwrap();
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn rho_rhs_is_traceless() {
        for seed in 0..10 {
            let model = random_model(4, seed).unwrap();
            let rho = SeededRng::new(seed + 50).density(4);
            let d = rho_rhs(&model, &rho, 0.0).unwrap();
            assert!(d.matrix().trace().norm() <= 1e-12);
        }
    }

    #[test]
    fn invariant_rhs_examples() {
        let model = random_model(3, 4).unwrap();
        let d = invariant_rhs(&model, &Hermitian::identity(3), 0.0).unwrap();
        assert!(d.norm() < 1e-14);

        let rate = 0.2;
        let deph = LindbladModel::dephasing(rate).unwrap();
        let d = invariant_rhs(&deph, &pauli::x(), 0.0).unwrap();
        assert!((d.matrix() - pauli::x().matrix() * c(4.0 * rate, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn invariant_rhs_is_dual_to_rho_rhs() {
        for seed in 0..10 {
            let model = random_model(3, seed).unwrap();
            let mut rng = SeededRng::new(seed + 9);
            let rho = rng.density(3);
            let q = rng.hermitian(3);
            let lhs = expectation(&rho, &invariant_rhs(&model, &q, 0.0).unwrap()).unwrap();
            let rhs = trace_product(q.matrix(), rho_rhs(&model, &rho, 0.0).unwrap().matrix()).re;
            assert!((lhs + rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn kraus_step_examples() {
        let mut rng = SeededRng::new(3);
        let h = rng.hermitian(2);
        let unitary_only =
            LindbladModel::time_independent(h.clone(), vec![(0.0, pauli::z().into_inner())])
                .unwrap();
        let k = kraus_step(&unitary_only, 0.0, 0.01).unwrap();
        assert_eq!(k.operators().len(), 1);
        let expected = identity(2) - h.matrix() * (I * 0.01);
        assert!((&k.operators()[0] - expected).norm() < 1e-15);

        assert!(kraus_step(&unitary_only, 0.0, 0.0).is_err());
        assert!(kraus_step(&unitary_only, 0.0, -1.0).is_err());
    }

    #[test]
    fn rate_bound_examples() {
        let mut rng = SeededRng::new(5);
        let rho = rng.density(2);
        let deph = LindbladModel::dephasing(0.4).unwrap();
        assert_eq!(entropy_rate_bound(&deph, &rho, 0.0).unwrap(), 0.0);
        assert_eq!(renyi_rate_bound(&deph, &rho, 0.5, 0.0).unwrap(), 0.0);

        let rate = 0.3;
        let decay = LindbladModel::amplitude_damping(rate).unwrap();
        let b = entropy_rate_bound(&decay, &rho, 0.0).unwrap();
        let (p0, p1) = (rho.matrix()[(0, 0)].re, rho.matrix()[(1, 1)].re);
        assert!((b - 2.0 * rate * (p1 - p0)).abs() < 1e-15);

        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            let r = renyi_rate_bound(&decay, &rho, alpha, 0.0).unwrap();
            assert!((r - b).abs() < 1e-4);
        }
        let mixed = DensityMatrix::maximally_mixed(2);
        let full = entropy_rate_bound(&decay, &mixed, 0.0).unwrap();
        for alpha in [0.5, 1.5, 2.0] {
            let r = renyi_rate_bound(&decay, &mixed, alpha, 0.0).unwrap();
            assert!((r - full).abs() < 1e-15);
        }
        assert!(renyi_rate_bound(&decay, &rho, 2.5, 0.0).is_err());
        assert!(renyi_rate_bound(&decay, &rho, 0.0, 0.0).is_err());
    }

    #[test]
    fn covariance_rate_examples() {
        let mut rng = SeededRng::new(6);
        let rho = rng.density(2);
        let set = InvariantSet::new(2, vec![pauli::x(), pauli::y(), pauli::z()]).unwrap();
        let silent =
            LindbladModel::time_independent(rng.hermitian(2), vec![(0.0, pauli::z().into_inner())])
                .unwrap();
        assert_eq!(
            covariance_rate(&silent, &rho, &set, 0.0).unwrap().amax(),
            0.0
        );

        let rate = 0.25;
        let deph = LindbladModel::dephasing(rate).unwrap();
        let r = covariance_rate(&deph, &rho, &set, 0.0).unwrap();
        assert!((r[(0, 0)] - 8.0 * rate).abs() < 1e-14);
        // sigma_z commutes with L = sigma_z: its row and column vanish.
        for k in 0..3 {
            assert_eq!(r[(2, k)], 0.0);
            assert_eq!(r[(k, 2)], 0.0);
        }
        assert!((&r - r.transpose()).amax() == 0.0);
    }

    #[test]
    fn variance_rate_examples() {
        let deph = LindbladModel::dephasing(0.25).unwrap();
        let rho = plus_state();
        assert!((variance_rate(&deph, &rho, &pauli::x(), 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(
            variance_rate(&deph, &rho, &Hermitian::identity(2), 0.0).unwrap(),
            0.0
        );
        for seed in 0..20 {
            let model = random_model(3, seed).unwrap();
            let mut rng = SeededRng::new(seed);
            let v = variance_rate(&model, &rng.density(3), &rng.hermitian(3), 0.0).unwrap();
            assert!(v >= -1e-12);
        }
    }
}
