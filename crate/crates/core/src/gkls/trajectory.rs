// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::LindbladModel;
use crate::entropy::{
    near_unit_alpha, power_trace_of_spectrum, renyi_of_spectrum, von_neumann_of_spectrum,
};
use crate::error::{Error, Result};
use crate::invariants::{covariance_matrix, CovarianceMatrix, InvariantSet};
use crate::ode::rk4_step;
use crate::operator::{
    clip_spectrum, expectation, hermitize_unchecked, same_dim, spectral_decompose, trace_product,
    validate_density_with, CMatrix, DensityMatrix, Hermitian, SpectralDecomposition,
};
use crate::report::format_float;
use crate::tolerance;

/// Uniform grid `t0, t0 + dt, ..., t1` with `dt = (t1 - t0) / steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        let grid = Self { t0, t1, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::Config(format!(
                "time grid needs t1 > t0, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// What to do when an integrated state leaves the PSD cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityPolicy {
    /// Abort with [`Error::Integration`] naming the step.
    #[default]
    Fail,
    /// Clip negative eigenvalues, renormalize, and log a [`Projection`].
    Project,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    /// Rényi indices recorded at every step; each must lie in `(0, 2]`.
    pub alphas: Vec<f64>,
    pub positivity: PositivityPolicy,
    /// Trace / PSD tolerance for integrated states and spectrum clipping.
    pub tolerance: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            alphas: vec![0.5, 1.5, 2.0],
            positivity: PositivityPolicy::Fail,
            tolerance: tolerance::DYNAMICAL,
        }
    }
}

impl IntegrateOptions {
    fn validate(&self) -> Result<()> {
        match self.alphas.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
            Some(a) => Err(Error::Config(format!(
                "recorded Rényi index {a} is outside (0, 2]"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Projection {
    pub step: usize,
    pub time: f64,
    pub min_eigenvalue: f64,
}

/// Observables at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub expectations: Vec<f64>,
    pub variances: Vec<f64>,
    pub covariance: CovarianceMatrix,
    pub entropy: f64,
    pub renyi: Vec<f64>,
    pub bound_vn: f64,
    pub bound_renyi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub alphas: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Invariant values at each grid point.
    pub invariants: Vec<InvariantSet>,
    pub records: Vec<StepRecord>,
    pub projections: Vec<Projection>,
}

/// Finite-difference check of the covariance-rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceRateCheck {
    /// `max_k || FD_k - R_k ||_F / max(|| R_k ||_F, 1e-8)` over interior points.
    pub max_relative_error: f64,
    /// Smallest diagonal entry of the analytic rate over all grid points.
    pub min_diagonal_rate: f64,
}

/// Finite-difference entropy rates minus their lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRateCheck {
    pub min_margin_vn: f64,
    pub min_margin_renyi: Vec<f64>,
}

fn check_state(
    m: CMatrix,
    step: usize,
    time: f64,
    policy: PositivityPolicy,
    tol: f64,
    projections: &mut Vec<Projection>,
) -> Result<DensityMatrix> {
    let m = hermitize_unchecked(m).into_inner();
    let diag = validate_density_with(&m, tol);
    if diag.passed() {
        return Ok(DensityMatrix::new_unchecked(m));
    }
    match policy {
        PositivityPolicy::Fail => Err(Error::Integration {
            step,
            time,
            reason: format!(
                "state left the density-matrix set (trace {}, min eigenvalue {:e})",
                diag.trace, diag.min_eigenvalue
            ),
        }),
        PositivityPolicy::Project => {
            let (rho, min) = DensityMatrix::project(&m)?;
            projections.push(Projection {
                step,
                time,
                min_eigenvalue: min,
            });
            Ok(rho)
        }
    }
}

/// RK4 evolution of the state alone.
pub fn evolve_states(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    policy: PositivityPolicy,
    tol: f64,
) -> Result<(Vec<DensityMatrix>, Vec<Projection>)> {
    grid.validate()?;
    same_dim("initial state", model.dim(), rho0.matrix())?;
    let dt = grid.dt();
    let f = |t: f64, y: &CMatrix| -> Result<CMatrix> { Ok(model.generator(t)?.rho_rhs(y)) };
    let mut states = Vec::with_capacity(grid.len());
    let mut projections = Vec::new();
    states.push(rho0.clone());
    for k in 0..grid.steps {
        let t = grid.time(k);
        let next = rk4_step(&f, t, states[k].matrix(), dt)?;
        states.push(check_state(
            next,
            k + 1,
            grid.time(k + 1),
            policy,
            tol,
            &mut projections,
        )?);
    }
    Ok((states, projections))
}

/// Co-evolves the state forward with the master equation and every
/// invariant forward with the dual equation on the same grid (one RK4
/// system, so all stages share sample times), then records observables.
pub fn integrate(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    invariants0: &InvariantSet,
    grid: &TimeGrid,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    grid.validate()?;
    opts.validate()?;
    let dim = model.dim();
    same_dim("initial state", dim, rho0.matrix())?;
    if !invariants0.is_empty() && invariants0.dim() != dim {
        return Err(Error::dim("invariant set", dim, invariants0.dim()));
    }

    let f = |t: f64, y: &Vec<CMatrix>| -> Result<Vec<CMatrix>> {
        let g = model.generator(t)?;
        let mut out = Vec::with_capacity(y.len());
        out.push(g.rho_rhs(&y[0]));
        out.extend(y[1..].iter().map(|x| g.invariant_rhs(x)));
        Ok(out)
    };

    let dt = grid.dt();
    let mut y: Vec<CMatrix> = std::iter::once(rho0.matrix().clone())
        .chain(invariants0.members().iter().map(|m| m.matrix().clone()))
        .collect();
    let mut states = Vec::with_capacity(grid.len());
    let mut invariants = Vec::with_capacity(grid.len());
    let mut projections = Vec::new();
    states.push(rho0.clone());
    invariants.push(invariants0.clone());

    for k in 0..grid.steps {
        let next = rk4_step(&f, grid.time(k), &y, dt)?;
        let mut parts = next.into_iter();
        let rho = check_state(
            parts.next().expect("state slot"),
            k + 1,
            grid.time(k + 1),
            opts.positivity,
            opts.tolerance,
            &mut projections,
        )?;
        let members: Vec<Hermitian> = parts.map(hermitize_unchecked).collect();
        y = std::iter::once(rho.matrix().clone())
            .chain(members.iter().map(|m| m.matrix().clone()))
            .collect();
        states.push(rho);
        invariants.push(InvariantSet::new(dim, members)?);
    }

    Trajectory::observe(model, *grid, states, invariants, projections, opts)
}

/// `tr(Q rho^α) / tr(rho^α)` from an existing decomposition of `rho`.
fn alpha_weighted(spec: &SpectralDecomposition, p: &[f64], q: &CMatrix, alpha: f64) -> f64 {
    let u = &spec.eigenvectors;
    let qu = q * u;
    let mut num = 0.0;
    for (k, &x) in p.iter().enumerate() {
        if x > 0.0 {
            num += x.powf(alpha) * u.column(k).dotc(&qu.column(k)).re;
        }
    }
    num / power_trace_of_spectrum(p, alpha)
}

impl Trajectory {
    /// Records observables for given state and invariant series.
    pub fn observe(
        model: &LindbladModel,
        grid: TimeGrid,
        states: Vec<DensityMatrix>,
        invariants: Vec<InvariantSet>,
        projections: Vec<Projection>,
        opts: &IntegrateOptions,
    ) -> Result<Self> {
        opts.validate()?;
        if states.len() != grid.len() || invariants.len() != grid.len() {
            return Err(Error::dim("trajectory length", grid.len(), states.len()));
        }
        let mut records = Vec::with_capacity(grid.len());
        for (k, (rho, set)) in states.iter().zip(&invariants).enumerate() {
            let t = grid.time(k);
            let g = model.generator(t)?;
            let spec = spectral_decompose(rho.as_hermitian())?;
            let p = clip_spectrum(&spec.eigenvalues, opts.tolerance).map_err(|e| {
                Error::Integration {
                    step: k,
                    time: t,
                    reason: e.to_string(),
                }
            })?;
            let expectations = set
                .members()
                .iter()
                .map(|m| expectation(rho, m))
                .collect::<Result<Vec<_>>>()?;
            let covariance = covariance_matrix(rho, set)?;
            let variances = (0..set.len()).map(|i| covariance.get(i, i)).collect();

            let mut bound_vn = 0.0;
            let mut bound_renyi = vec![0.0; opts.alphas.len()];
            for term in &g.terms {
                if term.rate == 0.0 {
                    continue;
                }
                let comm = &term.l_dag_l - &term.l * &term.l_dag;
                let plain = trace_product(&comm, rho.matrix()).re;
                bound_vn += 2.0 * term.rate * plain;
                for (b, &alpha) in bound_renyi.iter_mut().zip(&opts.alphas) {
                    let v = if near_unit_alpha(alpha) {
                        plain
                    } else {
                        alpha_weighted(&spec, &p, &comm, alpha)
                    };
                    *b += 2.0 * term.rate * v;
                }
            }

            records.push(StepRecord {
                t,
                expectations,
                variances,
                covariance,
                entropy: von_neumann_of_spectrum(&p),
                renyi: opts
                    .alphas
                    .iter()
                    .map(|&a| renyi_of_spectrum(&p, a))
                    .collect(),
                bound_vn,
                bound_renyi,
            });
        }
        Ok(Self {
            grid,
            alphas: opts.alphas.clone(),
            states,
            invariants,
            records,
            projections,
        })
    }

    pub fn member_count(&self) -> usize {
        self.invariants.first().map_or(0, InvariantSet::len)
    }

    /// Per member, `max_t |<I_K(t)> - <I_K(t0)>|`.
    pub fn expectation_drift(&self) -> Vec<f64> {
        let first = &self.records[0].expectations;
        (0..first.len())
            .map(|k| {
                self.records
                    .iter()
                    .map(|r| (r.expectations[k] - first[k]).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn max_expectation_drift(&self) -> f64 {
        self.expectation_drift().into_iter().fold(0.0, f64::max)
    }

    /// Smallest step-to-step variance change across all members; `+inf` if none.
    pub fn min_variance_increment(&self) -> f64 {
        self.records
            .windows(2)
            .flat_map(|w| {
                w[1].variances
                    .iter()
                    .zip(&w[0].variances)
                    .map(|(b, a)| b - a)
                    .collect::<Vec<_>>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Central differences of the covariance matrix against the analytic rate.
    pub fn covariance_rate_check(&self, model: &LindbladModel) -> Result<CovarianceRateCheck> {
        let dt = self.grid.dt();
        let mut max_rel: f64 = 0.0;
        let mut min_diag = f64::INFINITY;
        for k in 0..self.records.len() {
            let g = model.generator(self.grid.time(k))?;
            let rate = g.covariance_rate(&self.states[k], self.invariants[k].members());
            for i in 0..rate.nrows() {
                min_diag = min_diag.min(rate[(i, i)]);
            }
            if k == 0 || k + 1 == self.records.len() {
                continue;
            }
            let fd = (self.records[k + 1].covariance.matrix()
                - self.records[k - 1].covariance.matrix())
                / (2.0 * dt);
            let scale = rate.norm().max(1e-8);
            max_rel = max_rel.max((fd - &rate).norm() / scale);
        }
        Ok(CovarianceRateCheck {
            max_relative_error: max_rel,
            min_diagonal_rate: min_diag,
        })
    }

    /// Central differences of `S` and `S_α` minus the recorded bounds.
    pub fn entropy_rate_check(&self) -> EntropyRateCheck {
        let dt = self.grid.dt();
        let mut vn = f64::INFINITY;
        let mut renyi = vec![f64::INFINITY; self.alphas.len()];
        for w in self.records.windows(3) {
            let ds = (w[2].entropy - w[0].entropy) / (2.0 * dt);
            vn = vn.min(ds - w[1].bound_vn);
            for (a, slot) in renyi.iter_mut().enumerate() {
                let ds = (w[2].renyi[a] - w[0].renyi[a]) / (2.0 * dt);
                *slot = slot.min(ds - w[1].bound_renyi[a]);
            }
        }
        EntropyRateCheck {
            min_margin_vn: vn,
            min_margin_renyi: renyi,
        }
    }

    /// Column names in output order.
    pub fn csv_header(&self) -> Vec<String> {
        let k = self.member_count();
        let mut h = vec!["t".to_string()];
        h.extend((0..k).map(|i| format!("expectation.{i}")));
        h.extend((0..k).map(|i| format!("variance.{i}")));
        for i in 0..k {
            for j in i + 1..k {
                h.push(format!("cov.{i}.{j}"));
            }
        }
        h.push("S".into());
        h.extend(self.alphas.iter().map(|a| format!("S_alpha.{a}")));
        h.push("bound_vn".into());
        h.extend(self.alphas.iter().map(|a| format!("bound_renyi.{a}")));
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        let k = self.member_count();
        for r in &self.records {
            let mut row = vec![format_float(r.t)];
            row.extend(r.expectations.iter().map(|&x| format_float(x)));
            row.extend(r.variances.iter().map(|&x| format_float(x)));
            for i in 0..k {
                for j in i + 1..k {
                    row.push(format_float(r.covariance.get(i, j)));
                }
            }
            row.push(format_float(r.entropy));
            row.extend(r.renyi.iter().map(|&x| format_float(x)));
            row.push(format_float(r.bound_vn));
            row.extend(r.bound_renyi.iter().map(|&x| format_float(x)));
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::von_neumann;
    use crate::gkls::{random_invariants, random_model};
    use crate::operator::{c, pauli, CVector};
    use crate::random::SeededRng;

    fn unit_grid(steps: usize) -> TimeGrid {
        TimeGrid::new(0.0, 1.0, steps).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let g = TimeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.dt(), 0.5);
        assert_eq!(g.time(4), 2.0);
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn unitary_dynamics_keeps_entropy_and_energy() {
        let mut rng = SeededRng::new(1);
        let h = rng.hermitian(3);
        let model = crate::gkls::LindbladModel::time_independent(h.clone(), vec![]).unwrap();
        let rho = rng.density(3);
        let set = InvariantSet::new(3, vec![h]).unwrap();
        let traj = integrate(&model, &rho, &set, &unit_grid(200), &Default::default()).unwrap();
        let s0 = von_neumann(&rho).unwrap();
        for r in &traj.records {
            assert!((r.entropy - s0).abs() < 1e-10);
        }
        assert!(traj.max_expectation_drift() < 1e-12);
    }

    #[test]
    fn identity_invariant_stays_identity() {
        let model = random_model(3, 2).unwrap();
        let set = InvariantSet::new(3, vec![Hermitian::identity(3)]).unwrap();
        let rho = SeededRng::new(4).density(3);
        let traj = integrate(&model, &rho, &set, &unit_grid(50), &Default::default()).unwrap();
        for inv in &traj.invariants {
            let d = inv.members()[0].matrix() - Hermitian::identity(3).matrix();
            assert!(d.norm() < 1e-15);
        }
    }

    #[test]
    fn dephasing_follows_closed_form() {
        let rate = 0.25;
        let model = crate::gkls::LindbladModel::dephasing(rate).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)])).unwrap();
        let set = InvariantSet::new(2, vec![pauli::x()]).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        let traj = integrate(&model, &plus, &set, &grid, &Default::default()).unwrap();
        for (k, rho) in traj.states.iter().enumerate() {
            let t = grid.time(k);
            let exact = 0.5 * (-4.0 * rate * t).exp();
            assert!((rho.matrix()[(0, 1)].re - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn fail_policy_names_the_step() {
        // A huge step makes RK4 overshoot out of the PSD cone.
        let model = crate::gkls::LindbladModel::amplitude_damping(5.0).unwrap();
        let rho = DensityMatrix::basis(2, 1).unwrap();
        let empty = InvariantSet::new(2, vec![]).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 2).unwrap();
        let err = integrate(&model, &rho, &empty, &grid, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::Integration { step: 1, .. }), "{err}");

        let opts = IntegrateOptions {
            positivity: PositivityPolicy::Project,
            ..Default::default()
        };
        let traj = integrate(&model, &rho, &empty, &grid, &opts).unwrap();
        assert!(!traj.projections.is_empty());
        assert_eq!(traj.projections[0].step, 1);
    }

    #[test]
    fn rejects_bad_alpha() {
        let model = random_model(2, 1).unwrap();
        let opts = IntegrateOptions {
            alphas: vec![2.5],
            ..Default::default()
        };
        let set = InvariantSet::new(2, vec![]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(integrate(&model, &rho, &set, &unit_grid(10), &opts).is_err());
    }

    #[test]
    fn csv_header_and_width() {
        let model = random_model(3, 3).unwrap();
        let set = random_invariants(3, 3, 4).unwrap();
        let rho = SeededRng::new(5).density(3);
        let traj = integrate(&model, &rho, &set, &unit_grid(10), &Default::default()).unwrap();
        let header = traj.csv_header();
        assert_eq!(
            header,
            [
                "t",
                "expectation.0",
                "expectation.1",
                "expectation.2",
                "variance.0",
                "variance.1",
                "variance.2",
                "cov.0.1",
                "cov.0.2",
                "cov.1.2",
                "S",
                "S_alpha.0.5",
                "S_alpha.1.5",
                "S_alpha.2",
                "bound_vn",
                "bound_renyi.0.5",
                "bound_renyi.1.5",
                "bound_renyi.2"
            ]
        );
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert!(text.lines().all(|l| l.split(',').count() == header.len()));
    }
}
