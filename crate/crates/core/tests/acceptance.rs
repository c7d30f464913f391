mod common;

use std::time::{Duration, Instant};

use qcp::adaptive::{forward_check, optimize_schedule, simulate_schedule};
use qcp::bounds::{dp_oracle, theorem1_diagnostics, upper_bound, upper_bound_unitary, DEFAULT_RESOLUTION};
use qcp::certificate::{certify, gram_checks, gram_model, nu_checks, Branch};
use qcp::cli::{cmd_simulate, cmd_sweep, RunConfig};
use qcp::fmap::TradeoffCurve;
use qcp::numerics::{pseudo_inverse, C64};
use rand::Rng;
use rayon::prelude::*;

use common::*;

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_1_odd_n_exactness() {
    let start = Instant::now();
    let mut worst_closed: f64 = 0.0;
    let mut worst_cert: f64 = 0.0;
    let mut all_passed = true;
    for &t in &[0.80902, 0.30902] {
        let (u0, u1) = pair_for_t(t);
        for n in (1..=9).step_by(2) {
            worst_closed = worst_closed.max((upper_bound_unitary(t, n).unwrap() - (1.0 - t)).abs());
            let report = certify(&u0, &u1, n, None).unwrap();
            all_passed &= report.passed;
            let avg = report.evaluation.as_ref().map_or(f64::NAN, |e| e.average);
            let dev = (avg - (1.0 - report.t)).abs();
            worst_cert = if dev.is_nan() { f64::INFINITY } else { worst_cert.max(dev) };
        }
    }
    let elapsed = start.elapsed();
    let passed = worst_closed <= 1e-12 && worst_cert <= 1e-9 && all_passed;
    report(
        1,
        "odd-N exactness",
        passed,
        &format!("closed form off by {worst_closed:.1e}, certified average off by {worst_cert:.1e}"),
        elapsed,
        secs(10),
    );
    assert!(passed && elapsed <= secs(10));
}

#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let mut curves: Vec<(String, TradeoffCurve)> = [0.309, 0.5, 0.809, 0.9]
        .iter()
        .map(|&t| (format!("t={t}"), TradeoffCurve::unitary(t).unwrap()))
        .collect();
    let mut r = rng(11);
    for i in 0..5 {
        curves.push((format!("random #{i}"), random_concave_curve(&mut r)));
    }
    let cases: Vec<(usize, usize)> = (0..curves.len()).flat_map(|c| (1..=10).map(move |n| (c, n))).collect();
    let worst = cases
        .par_iter()
        .map(|&(c, n)| {
            let curve = &curves[c].1;
            let up = upper_bound(curve, n, DEFAULT_RESOLUTION).unwrap().upper;
            let dp = dp_oracle(curve, n, 100_000).unwrap();
            ((dp - up).abs(), c, n)
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    let elapsed = start.elapsed();
    let passed = worst.0 <= 1e-4;
    report(
        2,
        "oracle equivalence",
        passed,
        &format!("max |oracle − upper| = {:.2e} ({} N={})", worst.0, curves[worst.1].0, worst.2),
        elapsed,
        secs(30),
    );
    assert!(passed && elapsed <= secs(30));
}

#[test]
fn criterion_3_end_to_end_certificate() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut succ, mut wrong, mut avg, mut step): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..10u64 {
        let mut r = rng(1000 + seed);
        let u0 = random_qubit_unitary(&mut r);
        let u1 = random_qubit_unitary(&mut r);
        for n in 1..=8 {
            let rep = match certify(&u0, &u1, n, None) {
                Ok(rep) => rep,
                Err(e) => {
                    failures.push(format!("seed {seed} N={n}: {e}"));
                    continue;
                }
            };
            let Some(eval) = &rep.evaluation else {
                failures.push(format!("seed {seed} N={n}: {:?}", rep.error));
                continue;
            };
            let model = gram_model(rep.t, rep.certificate.as_ref().unwrap().u, n).unwrap();
            for (s, x) in eval.success.iter().zip(model.x()) {
                succ = succ.max((s - x).abs());
            }
            wrong = wrong.max(eval.max_error);
            avg = avg.max((eval.average - upper_bound_unitary(rep.t, n).unwrap()).abs());
            let steps: Vec<_> = rep.checks.iter().filter(|c| c.name.starts_with("step_gram_n")).collect();
            if steps.len() != n {
                failures.push(format!("seed {seed} N={n}: {} Gram steps recorded", steps.len()));
            }
            for c in steps {
                step = step.max(c.residual);
            }
            if !rep.passed {
                failures.push(format!("seed {seed} N={n}: report failed"));
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = failures.is_empty() && succ <= 1e-9 && wrong <= 1e-9 && avg <= 1e-9 && step <= 1e-9;
    report(
        3,
        "end-to-end certificate",
        passed,
        &format!(
            "success {succ:.1e}, wrong {wrong:.1e}, average {avg:.1e}, per-step Gram {step:.1e}, {} failures",
            failures.len()
        ),
        elapsed,
        secs(60),
    );
    assert!(passed && elapsed <= secs(60), "{failures:?}");
}

#[test]
fn criterion_4_closed_forms() {
    let start = Instant::now();
    let mut pinv_dev: f64 = 0.0;
    let mut quad_max: f64 = 0.0;
    let mut singular_identity: f64 = 0.0;
    let mut all_checks = true;
    let mut singular_cases = 0;
    let phases = [0.3, 1.1, 2.5];
    for n in 1..=10 {
        let mut ts = vec![0.2, 0.5, 0.8, 0.95];
        if n % 2 == 0 {
            ts.push((n as f64 / (n as f64 + 2.0)).sqrt());
        }
        for &t in &ts {
            for &phi in &phases {
                let model = gram_model(t, C64::from_polar(1.0, phi), n).unwrap();
                let numeric = pseudo_inverse(&model.g);
                pinv_dev = pinv_dev.max(model.closed_form_pinv().max_abs_diff(&numeric));
                all_checks &= gram_checks(&model).unwrap().passed();
                let nu = nu_checks(&model).unwrap();
                all_checks &= nu.checks.passed();
                for s in &nu.steps {
                    quad_max = quad_max.max(s.quad);
                }
                if model.branch == Branch::Singular && n >= 2 {
                    singular_cases += 1;
                    for s in &nu.steps {
                        singular_identity = singular_identity.max((s.quad - s.nu1_sq).abs());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = pinv_dev <= 1e-8 && quad_max <= 1.0 + 1e-9 && singular_identity <= 1e-9 && all_checks;
    report(
        4,
        "closed forms",
        passed,
        &format!(
            "pinv deviation {pinv_dev:.1e}, max quad {quad_max:.12}, singular quad − ν′₁² {singular_identity:.1e} over {singular_cases} cases"
        ),
        elapsed,
        secs(30),
    );
    assert!(passed && elapsed <= secs(30));
    assert!(singular_cases > 0);
}

/// Best average over a `points`-point grid for every `p_n` and `q_n`.
///
/// The average is affine in each `q_n` separately (it enters `S_n`, `T_n`
/// linearly and everything after is linear in those), so with
/// `endpoints_only` the `q` grid shrinks to `{0, p̄}` without changing the
/// grid maximum.
fn exhaustive_lower(curve: &TradeoffCurve, n: usize, points: usize, endpoints_only: bool) -> f64 {
    let p_bar = curve.p_bar();
    let grid: Vec<f64> = (0..points).map(|i| p_bar * i as f64 / (points - 1) as f64).collect();
    let f: Vec<f64> = grid.iter().map(|&p| curve.value(p)).collect();
    let q_grid: Vec<f64> = if endpoints_only { vec![0.0, p_bar] } else { grid.clone() };

    struct Grid {
        p: Vec<f64>,
        f: Vec<f64>,
        q: Vec<f64>,
        n: usize,
    }
    fn walk(g: &Grid, step: usize, s: f64, t: f64, acc: f64) -> f64 {
        if step > g.n {
            return acc + s;
        }
        let mut best = f64::NEG_INFINITY;
        // q_1 never matters since T_0 = 0
        let qs: &[f64] = if step == 1 { &g.q[..1] } else { &g.q };
        for (i, &p) in g.p.iter().enumerate() {
            for &q in qs {
                let v = walk(g, step + 1, s * p + t * q, s * (1.0 - p) + t * (1.0 - q), acc + s * g.f[i]);
                best = best.max(v);
            }
        }
        best
    }
    let g = Grid { p: grid, f, q: q_grid, n };
    walk(&g, 1, 1.0, 0.0, 0.0) / (n + 1) as f64
}

#[test]
fn criterion_5_lower_bound_soundness() {
    let start = Instant::now();
    let zoo = curve_zoo();
    let mut gap_violation: f64 = 0.0;
    let mut one_step: f64 = 0.0;
    for (_, curve) in &zoo {
        for n in 1..=12 {
            let up = upper_bound(curve, n, DEFAULT_RESOLUTION).unwrap().upper;
            let low = optimize_schedule(curve, n).unwrap().lower_bound;
            gap_violation = gap_violation.max(low - up);
            if n == 1 && curve.is_involution() {
                one_step = one_step.max((low - up).abs());
            }
        }
    }
    let mut grid_fail = Vec::new();
    for (name, curve) in &zoo {
        for n in 1..=3 {
            let best = exhaustive_lower(curve, n, 51, n == 3);
            if n == 2 {
                let reduced = exhaustive_lower(curve, n, 51, true);
                if (reduced - best).abs() > 1e-12 {
                    grid_fail.push(format!("{name}: q-endpoint reduction changed the N=2 grid maximum"));
                }
            }
            let low = optimize_schedule(curve, n).unwrap().lower_bound;
            let slack = curve.p_bar() / 50.0;
            if low < best - 1e-9 || low > best + slack {
                grid_fail.push(format!("{name} N={n}: dp {low} vs grid {best}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = gap_violation <= 1e-9 && one_step <= 1e-9 && grid_fail.is_empty();
    report(
        5,
        "lower-bound soundness",
        passed,
        &format!(
            "max lP − uP {gap_violation:.1e}, N=1 involutive mismatch {one_step:.1e}, grid mismatches {}",
            grid_fail.len()
        ),
        elapsed,
        secs(60),
    );
    assert!(passed && elapsed <= secs(60), "{grid_fail:?}");
}

fn parse_sweep(csv: &str) -> Vec<(usize, f64, f64, Option<f64>)> {
    csv.lines()
        .skip(1)
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            (
                c[0].parse().unwrap(),
                c[1].parse().unwrap(),
                c[2].parse().unwrap(),
                if c[3].is_empty() { None } else { Some(c[3].parse().unwrap()) },
            )
        })
        .collect()
}

#[test]
fn criterion_6_sweep_reproduction() {
    let start = Instant::now();
    let mut problems = Vec::new();
    for &omega in &[0.4, 0.8] {
        let t = (omega * std::f64::consts::PI / 2.0).cos();
        let cfg = RunConfig::from_toml(&format!("n_range = [1, 10]\n[problem]\nomega_over_pi = {omega}\n")).unwrap();
        let rows = parse_sweep(&cmd_sweep(&cfg).unwrap().csv);
        let plateau = 1.0 - t;
        let odd_dev = rows
            .iter()
            .filter(|r| r.0 % 2 == 1)
            .map(|r| (r.1 - plateau).abs().max((r.3.unwrap() - plateau).abs()))
            .fold(0.0, f64::max);
        let even: Vec<f64> = rows.iter().filter(|r| r.0 % 2 == 0).map(|r| r.1).collect();
        let above = even.iter().all(|&v| v > plateau + 1e-9);
        let nonincreasing = even.windows(2).all(|w| w[1] <= w[0] + 1e-11);
        let lower_ok = rows.iter().all(|r| r.2 <= r.3.unwrap() + 1e-11);
        if odd_dev > 1e-10 || !above || !nonincreasing || !lower_ok || rows.len() != 10 {
            problems.push(format!(
                "t={t:.5}: odd deviation {odd_dev:.1e}, above {above}, nonincreasing {nonincreasing}, lower≤exact {lower_ok}"
            ));
        }
    }
    let mut r = rng(606);
    for i in 0..3 {
        let curve = random_concave_curve(&mut r);
        let crate_knots = match curve.kind() {
            qcp::fmap::CurveKind::Tabulated { knots } => knots.clone(),
            _ => unreachable!(),
        };
        let knots: Vec<String> = crate_knots.iter().map(|(p, f)| format!("[{p:?}, {f:?}]")).collect();
        let cfg = RunConfig::from_toml(&format!(
            "n_range = [1, 10]\n[problem.curve]\nknots = [{}]\np_bar = {:?}\n",
            knots.join(", "),
            curve.p_bar()
        ))
        .unwrap();
        let rows = parse_sweep(&cmd_sweep(&cfg).unwrap().csv);
        for row in rows {
            let gap = row.1 - row.2;
            if !gap.is_finite() || gap < -1e-9 || row.3.is_some() {
                problems.push(format!("synthetic #{i} N={}: gap {gap}", row.0));
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = problems.is_empty();
    report(
        6,
        "sweep reproduction",
        passed,
        &format!("2 unitary sweeps + 3 synthetic sweeps, {} problems", problems.len()),
        elapsed,
        secs(60),
    );
    assert!(passed, "{problems:?}");
}

#[test]
fn criterion_7_monte_carlo() {
    let start = Instant::now();
    let zoo = curve_zoo();
    let mut r = rng(77);
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    for combo in 0..20 {
        let (_, curve) = &zoo[combo % zoo.len()];
        let n = r.random_range(1..=6);
        let k = r.random_range(0..=n);
        let seed = r.random::<u64>();
        let schedule = optimize_schedule(curve, n).unwrap();
        let p = forward_check(&schedule, curve).unwrap().success[k];
        let out = simulate_schedule(&schedule, curve, k, 100_000, seed).unwrap();
        let sigma = (p * (1.0 - p) / 1e5).sqrt();
        let z = if sigma > 0.0 {
            (out.rate - p).abs() / sigma
        } else if out.rate == p {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        if z > 4.0 {
            flagged += 1;
        }
    }
    let cfg = RunConfig::from_toml("n = 4\ntrials = 100000\nseed = 7\n[problem]\nomega_over_pi = 0.4\n").unwrap();
    let a = cmd_simulate(&cfg).unwrap();
    let b = cmd_simulate(&cfg).unwrap();
    let identical = a.render(None) == b.render(None) && a.csv == b.csv;
    let elapsed = start.elapsed();
    let passed = flagged == 0 && identical && a.passed;
    report(
        7,
        "Monte Carlo consistency",
        passed,
        &format!("20 combinations, worst deviation {worst:.2}σ, repeated report identical: {identical}"),
        elapsed,
        secs(60),
    );
    assert!(passed);
}

#[test]
fn criterion_8_maximizer_diagnostics() {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut checked = 0;
    for (name, curve) in curve_zoo() {
        let rep = theorem1_diagnostics(&curve, 10, DEFAULT_RESOLUTION).unwrap();
        checked += rep.checks.len();
        for c in rep.checks.iter().filter(|c| !c.passed) {
            failed.push(format!("{name}: {} at n={} ({} vs {})", c.name, c.n, c.lhs, c.rhs));
        }
    }
    let elapsed = start.elapsed();
    let passed = failed.is_empty();
    report(
        8,
        "maximizer diagnostics",
        passed,
        &format!("{checked} inequalities, {} failed", failed.len()),
        elapsed,
        secs(60),
    );
    assert!(passed, "{failed:?}");
}
