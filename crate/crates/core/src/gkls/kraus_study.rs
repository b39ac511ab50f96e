// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use serde::Serialize;

use super::{evolve_states, kraus_step, rho_rhs, LindbladModel, PositivityPolicy, TimeGrid};
use crate::error::{Error, Result};
use crate::operator::{frobenius, DensityMatrix};
use crate::report::{format_float, loglog_slope};
use crate::tolerance;

/// Step used for the reference solution of the global-error column.
pub const REFERENCE_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrausStudyRow {
    pub dt: f64,
    /// `|| sum V^dag V - I ||_F` at `t0`.
    pub defect: f64,
    /// `|| Phi_dt(rho0) - rho0 - dt rho'(t0) ||_F`.
    pub one_step_error: f64,
    /// Composed steps against the RK4 reference at the final time.
    pub global_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausStudy {
    pub rows: Vec<KrausStudyRow>,
    pub defect_slope: Option<f64>,
    pub one_step_slope: Option<f64>,
    pub global_slope: Option<f64>,
}

impl KrausStudy {
    /// Defects shrink at least like `dt^min_slope`, or vanish identically.
    pub fn defect_order_ok(&self, min_slope: f64) -> bool {
        match self.defect_slope {
            Some(s) => s >= min_slope,
            None => self.rows.iter().all(|r| r.defect <= tolerance::NULL_KRAUS),
        }
    }

    pub fn global_order_ok(&self, min_slope: f64) -> bool {
        match self.global_slope {
            Some(s) => s >= min_slope,
            None => self
                .rows
                .iter()
                .all(|r| r.global_error <= tolerance::STRUCTURAL),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dt", "defect", "one_step_error", "global_error"])?;
        for r in &self.rows {
            w.write_record([
                format_float(r.dt),
                format_float(r.defect),
                format_float(r.one_step_error),
                format_float(r.global_error),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Checks that `dts` has at least four entries with a common ratio.
pub fn check_dt_progression(dts: &[f64]) -> Result<()> {
    if dts.len() < 4 {
        return Err(Error::Config(format!(
            "dt list needs at least 4 entries, got {}",
            dts.len()
        )));
    }
    if dts.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::Config("dt entries must be positive".into()));
    }
    let ratio = dts[1] / dts[0];
    let geometric = dts
        .windows(2)
        .all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9);
    if !geometric || ratio == 1.0 {
        return Err(Error::Config(
            "dt list must form a geometric progression".into(),
        ));
    }
    Ok(())
}

/// Scaling of the short-time Kraus construction over `dts`, starting at
/// `t0` and composing up to `t0 + duration` for the global column.
pub fn kraus_step_study(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t0: f64,
    duration: f64,
    dts: &[f64],
) -> Result<KrausStudy> {
    check_dt_progression(dts)?;
    let ref_steps = (duration / REFERENCE_DT).round().max(1.0) as usize;
    let ref_grid = TimeGrid::new(t0, t0 + duration, ref_steps)?;
    let (reference, _) = evolve_states(
        model,
        rho0,
        &ref_grid,
        PositivityPolicy::Fail,
        tolerance::DYNAMICAL,
    )?;
    let target = reference.last().expect("nonempty grid").matrix();
    let deriv = rho_rhs(model, rho0, t0)?;

    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        let first = kraus_step(model, t0, dt)?;
        let euler = rho0.matrix() + deriv.matrix() * crate::operator::c(dt, 0.0);
        let one_step_error = frobenius(&(first.apply_raw(rho0.matrix())? - euler));

        let n = (duration / dt).round().max(1.0) as usize;
        let h = duration / n as f64;
        let mut m = rho0.matrix().clone();
        for k in 0..n {
            m = kraus_step(model, t0 + k as f64 * h, h)?.apply_raw(&m)?;
        }
        rows.push(KrausStudyRow {
            dt,
            defect: first.trace_preserving_defect(),
            one_step_error,
            global_error: frobenius(&(m - target)),
        });
    }
    let col = |f: fn(&KrausStudyRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let xs = col(|r| r.dt);
    Ok(KrausStudy {
        defect_slope: loglog_slope(&xs, &col(|r| r.defect)),
        one_step_slope: loglog_slope(&xs, &col(|r| r.one_step_error)),
        global_slope: loglog_slope(&xs, &col(|r| r.global_error)),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkls::random_model;
    use crate::operator::Hermitian;
    use crate::random::SeededRng;

    const DTS: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

    #[test]
    fn progression_checks() {
        assert!(check_dt_progression(&DTS[..3]).is_err());
        assert!(check_dt_progression(&[1e-2, 5e-3, 2e-3, 1e-3]).is_err());
        assert!(check_dt_progression(&DTS).is_ok());
    }

    #[test]
    fn unitary_only_defect_is_quadratic() {
        let h = SeededRng::new(2).hermitian(3);
        let model = LindbladModel::time_independent(h, vec![]).unwrap();
        let rho = SeededRng::new(3).density(3);
        let study = kraus_step_study(&model, &rho, 0.0, 0.2, &DTS).unwrap();
        assert!((study.defect_slope.unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn trivial_model_has_no_defect() {
        let model = LindbladModel::time_independent(Hermitian::zeros(2), vec![]).unwrap();
        let rho = SeededRng::new(1).density(2);
        let study = kraus_step_study(&model, &rho, 0.0, 0.2, &DTS).unwrap();
        assert!(study.rows.iter().all(|r| r.defect == 0.0));
        assert!(study.defect_order_ok(1.4));
    }

    #[test]
    fn random_model_orders() {
        let model = random_model(3, 11).unwrap();
        let rho = SeededRng::new(4).density(3);
        let study = kraus_step_study(&model, &rho, 0.0, 1.0, &DTS).unwrap();
        assert!(study.defect_order_ok(1.4), "{study:?}");
        assert!(study.global_order_ok(0.9), "{study:?}");
        assert!(study.one_step_slope.unwrap() > 1.8);
    }
}
