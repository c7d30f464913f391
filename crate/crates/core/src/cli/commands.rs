use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Format, Problem, RunConfig};
use super::output::{fmt_opt, fmt_sig, Report};
use crate::adaptive::{forward_check, optimize_schedule, simulate_schedule};
use crate::bounds::{upper_bound, upper_bound_unitary, Method};
use crate::certificate::certify;
use crate::error::{Error, Result};

/// Standard deviations beyond which a simulated rate is flagged.
pub const SIGMA_FLAG: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub upper_ms: f64,
    pub lower_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub upper: f64,
    pub lower: f64,
    pub exact: Option<f64>,
    pub upper_argmax: f64,
    pub t: Option<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub problem: &'static str,
    #[serde(flatten)]
    pub record: BoundsRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub problem: &'static str,
    pub rows: Vec<BoundsRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationRow {
    pub k: usize,
    pub analytic: f64,
    pub empirical: f64,
    pub successes: u64,
    pub sigma: f64,
    pub deviation_sigmas: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub problem: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub lower_bound: f64,
    pub rows: Vec<SimulationRow>,
    pub passed: bool,
}

const BOUNDS_HEADER: &str = "N,upper,lower,exact\n";

fn csv_row(r: &BoundsRecord) -> String {
    format!("{},{},{},{}\n", r.n, fmt_sig(r.upper), fmt_sig(r.lower), fmt_opt(r.exact))
}

/// Upper bound, adaptive lower bound and, for unitary pairs, the exact value.
pub fn bounds_record(problem: &Problem, n: usize, grid: usize, timed: bool) -> Result<BoundsRecord> {
    let exact = match problem.t {
        Some(t) => Some(upper_bound_unitary(t, n)?),
        None => None,
    };
    let Some(curve) = &problem.curve else {
        // t = 0 or t = 1: perfectly distinguishable or identical channels
        let v = exact.expect("curve-less problems are unitary");
        return Ok(BoundsRecord {
            n,
            upper: v,
            lower: v,
            exact,
            upper_argmax: 1.0 - problem.t.unwrap_or(0.0).powi(2),
            t: problem.t,
            method: Method::ClosedForm,
            timings: timed.then_some(Timings {
                upper_ms: 0.0,
                lower_ms: 0.0,
            }),
        });
    };
    let start = Instant::now();
    let up = upper_bound(curve, n, grid)?;
    let upper_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let schedule = optimize_schedule(curve, n)?;
    let lower_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BoundsRecord {
        n,
        upper: up.upper,
        lower: schedule.lower_bound,
        exact,
        upper_argmax: up.upper_argmax,
        t: problem.t,
        method: up.method,
        timings: timed.then_some(Timings { upper_ms, lower_ms }),
    })
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.single_n()?;
    let problem = cfg.problem()?;
    let record = bounds_record(&problem, n, cfg.resolution()?, true)?;
    log::info!("bounds N={n}: upper {} lower {}", record.upper, record.lower);
    let csv = format!("{BOUNDS_HEADER}{}", csv_row(&record));
    let doc = BoundsReport {
        problem: problem.label,
        record,
    };
    Report::new(&doc, csv, true, Format::Json)
}

/// Rows are computed in parallel and emitted in `N` order.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Report> {
    let range = cfg.range()?;
    let problem = cfg.problem()?;
    let grid = cfg.resolution()?;
    let rows: Vec<BoundsRecord> = range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| bounds_record(&problem, n, grid, false))
        .collect::<Result<_>>()?;
    let mut csv = String::from(BOUNDS_HEADER);
    for r in &rows {
        csv.push_str(&csv_row(r));
    }
    let doc = SweepReport {
        problem: problem.label,
        rows,
    };
    Report::new(&doc, csv, true, Format::Csv)
}

/// Build and verify the optimal tester. Fails (exit 2) when any check does.
pub fn cmd_certify(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.single_n()?;
    let problem = cfg.problem()?;
    let Some((u0, u1)) = &problem.unitaries else {
        return Err(Error::validation("certify needs a unitary problem (unitary or omega_over_pi)"));
    };
    let report = certify(u0, u1, n, cfg.d_prime)?;
    let mut csv = String::from("check,residual,threshold,passed\n");
    for c in report.checks.iter() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            c.name,
            fmt_sig(c.residual),
            fmt_sig(c.threshold),
            c.passed
        ));
    }
    if let Some(e) = &report.error {
        csv.push_str(&format!("error,,,\"{}\"\n", e.replace('"', "'")));
        log::warn!("certification stopped: {e}");
    }
    Report::new(&report, csv, report.passed, Format::Json)
}

/// Monte Carlo check of the adaptive schedule against its analytic success.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.single_n()?;
    let trials = cfg.trials()?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::validation("simulate needs a seed (--seed or `seed`)"))?;
    let problem = cfg.problem()?;
    let Some(curve) = &problem.curve else {
        return Err(Error::validation("t = 0 or t = 1: nothing to simulate"));
    };
    let schedule = optimize_schedule(curve, n)?;
    let analytic = forward_check(&schedule, curve)?;
    let ks: Vec<usize> = match cfg.k {
        Some(k) if k <= n => vec![k],
        Some(k) => return Err(Error::validation(format!("k = {k} outside 0..={n}"))),
        None => (0..=n).collect(),
    };
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let outcome = simulate_schedule(&schedule, curve, k, trials, seed)?;
        let p = analytic.success[k];
        let sigma = (p * (1.0 - p) / trials as f64).max(0.0).sqrt();
        let diff = (outcome.rate - p).abs();
        let deviation_sigmas = if sigma > 0.0 {
            diff / sigma
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(SimulationRow {
            k,
            analytic: p,
            empirical: outcome.rate,
            successes: outcome.successes,
            sigma,
            deviation_sigmas: deviation_sigmas.min(f64::MAX),
            flagged: deviation_sigmas > SIGMA_FLAG,
        });
    }
    let passed = rows.iter().all(|r| !r.flagged);
    let mut csv = String::from("k,analytic,empirical,successes,sigma,flagged\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k,
            fmt_sig(r.analytic),
            fmt_sig(r.empirical),
            r.successes,
            fmt_sig(r.sigma),
            r.flagged
        ));
    }
    let doc = SimulationReport {
        problem: problem.label,
        n,
        trials,
        seed,
        lower_bound: schedule.lower_bound,
        rows,
        passed,
    };
    Report::new(&doc, csv, passed, Format::Json)
}
