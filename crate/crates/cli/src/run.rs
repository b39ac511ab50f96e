// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use weakinv_core::channels::random_channel;
use weakinv_core::entropy::{renyi_with, von_neumann_with};
use weakinv_core::gkls::{
    integrate, kraus_step_study, random_invariants, random_model, variance_rate, IntegrateOptions,
    PositivityPolicy,
};
use weakinv_core::invariants::{audit_variance_growth_with, random_audit_case, AuditRanges};
use weakinv_core::operator::{c, pauli, CVector};
use weakinv_core::oscillator::{cross_validate, OscillatorScenario, SU11Basis};
use weakinv_core::report::format_float;
use weakinv_core::{
    DensityMatrix, Error, Hermitian, InvariantSet, KrausChannel, LindbladModel, Result, SeededRng,
    Tolerances,
};

use crate::config::{
    ChannelAuditConfig, EntropyAuditConfig, GklsConfig, InvariantChoice, Kind, KrausStudyConfig,
    ModelChoice, OscillatorConfig, ScenarioConfig, StateChoice,
};

/// Result of one subcommand, ready to be written.
#[derive(Debug, Clone)]
pub struct Report {
    pub kind: Kind,
    /// CSV body including its header row.
    pub csv: Vec<u8>,
    pub summary: Value,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Summary with the pass/fail fields appended.
    pub fn summary_json(&self) -> Value {
        let mut v = self.summary.clone();
        if let Value::Object(map) = &mut v {
            map.insert("kind".into(), json!(self.kind.name()));
            map.insert("passed".into(), json!(self.passed()));
            map.insert("violations".into(), json!(self.violations));
            map.insert("warnings".into(), json!(self.warnings));
        }
        v
    }
}

pub fn run(kind: Kind, cfg: &ScenarioConfig) -> Result<Report> {
    match kind {
        Kind::ChannelAudit => channel_audit(&cfg.channel_audit, &cfg.tolerances),
        Kind::EntropyAudit => entropy_audit(&cfg.entropy_audit, &cfg.tolerances),
        Kind::Gkls => gkls(&cfg.gkls, &cfg.tolerances),
        Kind::Oscillator => oscillator(&cfg.oscillator, &cfg.tolerances),
        Kind::KrausStudy => kraus_study(&cfg.kraus_study),
    }
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// `f64` that serializes non-finite values as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

#[derive(Debug, Clone)]
struct AuditRow {
    seed: u64,
    dim: usize,
    env_dims: Vec<usize>,
    steps: usize,
    max_expectation_drift: f64,
    min_variance_increment: f64,
    failure: Option<String>,
}

fn lossy(ch: &KrausChannel) -> Result<KrausChannel> {
    KrausChannel::new(ch.operators().iter().map(|v| v * c(0.9, 0.0)).collect())
}

fn audit_one(
    seed: u64,
    cfg: &ChannelAuditConfig,
    ranges: &AuditRanges,
    tol: &Tolerances,
) -> Result<AuditRow> {
    let mut case = random_audit_case(seed, ranges)?;
    if cfg.inject_non_trace_preserving {
        case.channels[0] = lossy(&case.channels[0])?;
    }
    let mut row = AuditRow {
        seed,
        dim: case.dim,
        env_dims: case.env_dims.clone(),
        steps: case.channels.len(),
        max_expectation_drift: f64::NAN,
        min_variance_increment: f64::NAN,
        failure: None,
    };
    match audit_variance_growth_with(&case.channels, &case.rho0, &case.i_final, tol) {
        Ok(audit) => {
            row.max_expectation_drift = audit.max_expectation_drift;
            row.min_variance_increment = audit.min_variance_increment;
            if !audit.passed {
                let bad: Vec<String> = audit
                    .steps
                    .iter()
                    .filter(|s| s.expectation_violation || s.variance_violation)
                    .map(|s| s.step.to_string())
                    .collect();
                row.failure = Some(format!("violation at steps {}", bad.join(" ")));
            }
        }
        Err(e @ Error::InvalidChannel { .. }) => row.failure = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(row)
}

pub fn channel_audit(cfg: &ChannelAuditConfig, tol: &Tolerances) -> Result<Report> {
    let ranges = cfg.ranges();
    ranges.validate()?;
    let seeds: Vec<u64> = (cfg.seed_start..cfg.seed_start + cfg.seed_count).collect();
    let mut rows = seeds
        .par_iter()
        .map(|&s| audit_one(s, cfg, &ranges, tol))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.seed);

    let mut warnings = Vec::new();
    if rows.is_empty() {
        warnings.push("seed range is empty; nothing was audited".to_string());
    }
    let violations: Vec<String> = rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("seed {}: {f}", r.seed)))
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.seed.to_string(),
                r.dim.to_string(),
                r.env_dims
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(";"),
                r.steps.to_string(),
                format_float(r.max_expectation_drift),
                format_float(r.min_variance_increment),
                r.failure.is_none().to_string(),
                r.failure.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let csv = csv_bytes(
        &[
            "seed",
            "dim",
            "env_dims",
            "steps",
            "max_expectation_drift",
            "min_variance_increment",
            "passed",
            "failure",
        ],
        &table,
    )?;
    let finite = |f: fn(&AuditRow) -> f64| rows.iter().map(f).filter(|x| x.is_finite());
    let summary = json!({
        "cases": rows.len(),
        "failed_cases": violations.len(),
        "max_expectation_drift": num(finite(|r| r.max_expectation_drift).fold(0.0, f64::max)),
        "min_variance_increment":
            num(finite(|r| r.min_variance_increment).fold(f64::INFINITY, f64::min)),
        "expectation_tolerance": tol.structural,
        "variance_slack": tol.audit_slack,
    });
    Ok(Report {
        kind: Kind::ChannelAudit,
        csv,
        summary,
        violations,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
struct EntropyRow {
    seed: u64,
    case: &'static str,
    dim: usize,
    measure: String,
    before: f64,
    after: f64,
}

fn entropies(rho: &DensityMatrix, alphas: &[f64], clip: f64) -> Result<Vec<(String, f64)>> {
    let mut out = vec![("S".to_string(), von_neumann_with(rho, clip)?)];
    for &a in alphas {
        out.push((format!("S_alpha.{a}"), renyi_with(rho, a, clip)?));
    }
    Ok(out)
}

fn entropy_case(seed: u64, cfg: &EntropyAuditConfig, clip: f64) -> Result<Vec<EntropyRow>> {
    let mut rng = SeededRng::new(seed);
    let dim = rng.int(cfg.dims.0, cfg.dims.1);
    let count = rng.int(cfg.unitaries.0, cfg.unitaries.1);
    let unital = KrausChannel::random_mixed_unitary(dim, count, rng.next_u64())?;
    let rho = rng.density(dim);
    let non_unital = random_channel(dim, cfg.env_dim, rng.next_u64())?;
    let before = entropies(&rho, &cfg.alphas, clip)?;
    let mut rows = Vec::new();
    for (case, ch) in [("unital", &unital), ("non-unital", &non_unital)] {
        let after = entropies(&ch.apply(&rho)?, &cfg.alphas, clip)?;
        for ((measure, b), (_, a)) in before.iter().zip(after) {
            rows.push(EntropyRow {
                seed,
                case,
                dim,
                measure: measure.clone(),
                before: *b,
                after: a,
            });
        }
    }
    Ok(rows)
}

pub fn entropy_audit(cfg: &EntropyAuditConfig, tol: &Tolerances) -> Result<Report> {
    if let Some(a) = cfg.alphas.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
        return Err(Error::Config(format!(
            "entropy_audit.alphas: {a} is outside (0, 2]"
        )));
    }
    let ok = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
    if !ok(cfg.dims) || !ok(cfg.unitaries) || cfg.env_dim < 2 {
        return Err(Error::Config(
            "entropy_audit: dims and unitaries need 1 <= lo <= hi, env_dim >= 2".into(),
        ));
    }
    let seeds: Vec<u64> = (cfg.seed_start..cfg.seed_start + cfg.seed_count).collect();
    let mut rows: Vec<EntropyRow> = seeds
        .par_iter()
        .map(|&s| entropy_case(s, cfg, tol.clip_floor))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| (a.seed, a.case).cmp(&(b.seed, b.case)));

    let mut violations = Vec::new();
    let mut decreases = 0usize;
    let mut worst_unital = f64::INFINITY;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let change = r.after - r.before;
            let dropped = change < -tol.audit_slack;
            let flag = match (r.case, dropped) {
                ("unital", true) => {
                    violations.push(format!(
                        "seed {}: {} decreased by {:e} under a unital channel",
                        r.seed, r.measure, -change
                    ));
                    "violation"
                }
                ("unital", false) => "ok",
                (_, true) => {
                    decreases += 1;
                    "decrease"
                }
                (_, false) => "no-decrease",
            };
            if r.case == "unital" {
                worst_unital = worst_unital.min(change);
            }
            vec![
                r.seed.to_string(),
                r.case.to_string(),
                r.dim.to_string(),
                r.measure.clone(),
                format_float(r.before),
                format_float(r.after),
                format_float(change),
                flag.to_string(),
            ]
        })
        .collect();
    let csv = csv_bytes(
        &[
            "seed", "case", "dim", "measure", "before", "after", "change", "flag",
        ],
        &table,
    )?;

    let ad = KrausChannel::amplitude_damping(0.5)?;
    let mixed = DensityMatrix::maximally_mixed(2);
    let mut warnings = Vec::new();
    if rows.is_empty() {
        warnings.push("seed range is empty; nothing was audited".to_string());
    }
    let summary = json!({
        "cases": seeds.len(),
        "unital_violations": violations.len(),
        "min_unital_change": num(worst_unital),
        "non_unital_decreases": decreases,
        "amplitude_damping_example": {
            "gamma": 0.5,
            "entropy_before": von_neumann_with(&mixed, tol.clip_floor)?,
            "entropy_after": von_neumann_with(&ad.apply(&mixed)?, tol.clip_floor)?,
        },
    });
    Ok(Report {
        kind: Kind::EntropyAudit,
        csv,
        summary,
        violations,
        warnings,
    })
}

pub fn build_model(choice: &ModelChoice) -> Result<LindbladModel> {
    match choice {
        ModelChoice::Dephasing { rate } => LindbladModel::dephasing(*rate),
        ModelChoice::AmplitudeDamping { rate } => LindbladModel::amplitude_damping(*rate),
        ModelChoice::Unitary { dim } => {
            LindbladModel::time_independent(SeededRng::new(0).hermitian(*dim), vec![])
        }
        ModelChoice::Random { dim, seed } => random_model(*dim, *seed),
        ModelChoice::Trivial { dim } => {
            LindbladModel::time_independent(Hermitian::zeros(*dim), vec![])
        }
        ModelChoice::Custom(spec) => spec.build(),
    }
}

pub fn build_state(choice: &StateChoice, dim: usize) -> Result<DensityMatrix> {
    match choice {
        StateChoice::Plus => {
            if dim != 2 {
                return Err(Error::Config(
                    "initial state `plus` needs a qubit model".into(),
                ));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            DensityMatrix::pure(&CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]))
        }
        StateChoice::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(dim)),
        StateChoice::Basis { index } => DensityMatrix::basis(dim, *index),
        StateChoice::Random { seed } => Ok(SeededRng::new(*seed).density(dim)),
        StateChoice::Pure { amplitudes } => {
            if amplitudes.len() != dim {
                return Err(Error::Config(format!(
                    "initial.amplitudes has {} entries for dimension {dim}",
                    amplitudes.len()
                )));
            }
            let psi = CVector::from_iterator(dim, amplitudes.iter().map(|&[re, im]| c(re, im)));
            let norm = psi.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::Config("initial.amplitudes has zero norm".into()));
            }
            DensityMatrix::pure(&(psi / c(norm, 0.0)))
        }
    }
}

fn build_invariants(choice: &InvariantChoice, dim: usize) -> Result<InvariantSet> {
    match choice {
        InvariantChoice::Pauli => {
            if dim != 2 {
                return Err(Error::Config(
                    "invariants `pauli` need a qubit model".into(),
                ));
            }
            InvariantSet::new(2, vec![pauli::x(), pauli::y(), pauli::z()])
        }
        InvariantChoice::Random { count, seed } => random_invariants(dim, *count, *seed),
    }
}

pub fn gkls(cfg: &GklsConfig, tol: &Tolerances) -> Result<Report> {
    let model = build_model(&cfg.model)?;
    let dim = model.dim();
    let rho0 = build_state(&cfg.initial, dim)?;
    let set = build_invariants(&cfg.invariants, dim)?;
    let opts = IntegrateOptions {
        alphas: cfg.alphas.clone(),
        positivity: cfg.positivity,
        tolerance: tol.dynamical,
    };
    let traj = integrate(&model, &rho0, &set, &cfg.grid, &opts)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;

    let drift = traj.max_expectation_drift();
    let min_inc = traj.min_variance_increment();
    let cov = traj.covariance_rate_check(&model)?;
    let ent = traj.entropy_rate_check();
    let min_margin = ent
        .min_margin_renyi
        .iter()
        .copied()
        .fold(ent.min_margin_vn, f64::min);
    let s0 = traj.records[0].entropy;
    let entropy_span = traj
        .records
        .iter()
        .map(|r| (r.entropy - s0).abs())
        .fold(0.0, f64::max);
    let t0 = cfg.grid.t0;
    let rates = set
        .members()
        .iter()
        .map(|m| variance_rate(&model, &rho0, m, t0))
        .collect::<Result<Vec<_>>>()?;

    let k = &cfg.checks;
    let mut violations = Vec::new();
    if drift > k.conservation {
        violations.push(format!(
            "expectation drift {drift:e} exceeds {:e}",
            k.conservation
        ));
    }
    if min_inc < -k.variance_slack {
        violations.push(format!("variance decreased by {:e}", -min_inc));
    }
    if cfg.grid.steps >= 2 && cov.max_relative_error > k.covariance_rate_relative {
        violations.push(format!(
            "covariance-rate relative error {:e} exceeds {:e}",
            cov.max_relative_error, k.covariance_rate_relative
        ));
    }
    if cov.min_diagonal_rate < -k.covariance_rate_slack {
        violations.push(format!(
            "negative variance rate {:e}",
            cov.min_diagonal_rate
        ));
    }
    if min_margin < -k.entropy_rate_slack {
        violations.push(format!("entropy rate below its bound by {:e}", -min_margin));
    }

    let mut warnings = Vec::new();
    if !traj.projections.is_empty() {
        warnings.push(format!(
            "{} states were projected back onto the density-matrix set",
            traj.projections.len()
        ));
    }
    let summary = json!({
        "dim": dim,
        "steps": cfg.grid.steps,
        "max_expectation_drift": drift,
        "min_variance_increment": num(min_inc),
        "variance_rate_t0": rates,
        "covariance_rate_max_relative_error": cov.max_relative_error,
        "covariance_rate_min_diagonal": num(cov.min_diagonal_rate),
        "entropy_rate_min_margin_vn": num(ent.min_margin_vn),
        "entropy_rate_min_margin_renyi": ent.min_margin_renyi.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "max_bound_violation": num((-min_margin).max(0.0)),
        "entropy_span": entropy_span,
        "projections": traj.projections,
    });
    Ok(Report {
        kind: Kind::Gkls,
        csv,
        summary,
        violations,
        warnings,
    })
}

pub fn oscillator(cfg: &OscillatorConfig, tol: &Tolerances) -> Result<Report> {
    let basis = SU11Basis::build(cfg.fock_dim, cfg.margin)?;
    let scenario = OscillatorScenario {
        schedule: cfg.schedule,
        alpha0: Vector3::from(cfg.alpha0),
        grid: cfg.grid,
        initial: cfg.initial.clone(),
    };
    let opts = IntegrateOptions {
        alphas: cfg.alphas.clone(),
        positivity: PositivityPolicy::Fail,
        tolerance: tol.dynamical,
    };
    let (report, traj) = cross_validate(&basis, &scenario, &opts)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    let violations = report.violations(&cfg.checks);
    let mut warnings = Vec::new();
    if report.zero_rate_steps > 0 {
        warnings.push(format!(
            "k' vanishes on {} of {} steps (unitary stretches)",
            report.zero_rate_steps, cfg.grid.steps
        ));
    }
    if report.final_leakage > weakinv_core::oscillator::LEAKAGE_LIMIT {
        warnings.push(format!(
            "population {:e} reached levels >= {} by the final time",
            report.final_leakage, report.guard_level
        ));
    }
    let summary = json!({
        "fock_dim": cfg.fock_dim,
        "margin": cfg.margin,
        "schedule": cfg.schedule,
        "alpha0": cfg.alpha0,
        "report": report,
        "thresholds": cfg.checks,
    });
    Ok(Report {
        kind: Kind::Oscillator,
        csv,
        summary,
        violations,
        warnings,
    })
}

pub fn kraus_study(cfg: &KrausStudyConfig) -> Result<Report> {
    let model = build_model(&cfg.model)?;
    let rho0 = build_state(&cfg.initial, model.dim())?;
    let study = kraus_step_study(&model, &rho0, cfg.t0, cfg.duration, &cfg.dts)?;
    let mut csv = Vec::new();
    study.write_csv(&mut csv)?;
    let mut violations = Vec::new();
    if !study.defect_order_ok(cfg.min_defect_slope) {
        violations.push(format!(
            "trace-defect slope {:?} is below {}",
            study.defect_slope, cfg.min_defect_slope
        ));
    }
    let summary = json!({
        "dim": model.dim(),
        "defect_slope": study.defect_slope.map(num),
        "one_step_slope": study.one_step_slope.map(num),
        "global_slope": study.global_slope.map(num),
        "min_defect_slope": cfg.min_defect_slope,
    });
    Ok(Report {
        kind: Kind::KrausStudy,
        csv,
        summary,
        violations,
        warnings: Vec::new(),
    })
}
