//! Upper bound uP(N) on the unambiguous change-point success probability,
//! its closed forms, a brute-force dynamic-programming oracle and
//! diagnostics for the maximizers r_n.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmap::{validate_curve, TradeoffCurve};
use crate::numerics::{maximize_grid_refined, TieBreak};

/// Default coarse grid for maximizing `R_N`.
pub const DEFAULT_RESOLUTION: usize = 10_000;
pub const MIN_RESOLUTION: usize = 101;
pub const MIN_DP_GRID: usize = 1001;
const REFINE_TOL: f64 = 1e-10;

/// How an upper bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Concave shortcut `max_p ξp + (1 − ξ)f(p)` for involutive curves.
    Involution,
    /// Global grid search with golden refinement.
    GridRefined,
    /// Closed form for unitary pairs.
    ClosedForm,
}

/// Bounds on the optimal average success probability for `n` channels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangePointBounds {
    pub n: usize,
    pub upper: f64,
    /// Largest maximizer `r_N` of `R_N`.
    pub upper_argmax: f64,
    pub lower: Option<f64>,
    pub exact: Option<f64>,
    pub method: Method,
}

/// `ξ_N = (⌊N/2⌋ + 1)/(N + 1)`.
pub fn xi(n: usize) -> f64 {
    (n / 2 + 1) as f64 / (n + 1) as f64
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("N must be at least 1"));
    }
    Ok(())
}

fn check_curve(curve: &TradeoffCurve) -> Result<()> {
    let report = validate_curve(curve);
    if !report.passed() {
        return Err(Error::validation(format!(
            "invalid curve: monotone={}, concave={}, in_range={}, f(0) - p_bar = {:.3e}",
            report.monotone, report.concave, report.in_range, report.f0_excess
        )));
    }
    Ok(())
}

/// `P̄_q = max_p qp + (1 − q)f(p)` and its largest maximizer.
pub fn symmetric_value(curve: &TradeoffCurve, q: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::validation(format!("weight q = {q} outside [0, 1]")));
    }
    let x = if q == 1.0 {
        curve.p_bar()
    } else {
        curve.argmax_linear(q / (1.0 - q), TieBreak::Rightmost)
    };
    Ok((q * x + (1.0 - q) * curve.value(x), x))
}

/// `R_n(p) = Σ_{i=0}^{n} f⁽ⁱ⁾(p)`.
pub fn r_sum(curve: &TradeoffCurve, n: usize, p: f64) -> f64 {
    let mut x = p.clamp(0.0, curve.p_bar());
    let mut sum = x;
    for _ in 0..n {
        x = curve.value(x);
        sum += x;
    }
    sum
}

/// `uP(N) = max_p R_N(p)/(N + 1)` with its largest maximizer.
pub fn upper_bound(curve: &TradeoffCurve, n: usize, resolution: usize) -> Result<ChangePointBounds> {
    check_n(n)?;
    if resolution < MIN_RESOLUTION {
        return Err(Error::validation(format!(
            "resolution {resolution} below minimum {MIN_RESOLUTION}"
        )));
    }
    check_curve(curve)?;
    let (upper, upper_argmax, method) = maximize_r(curve, n, resolution)?;
    Ok(ChangePointBounds {
        n,
        upper,
        upper_argmax,
        lower: None,
        exact: None,
        method,
    })
}

/// `(max R_n/(n+1), r_n, method)` without validation.
fn maximize_r(curve: &TradeoffCurve, n: usize, resolution: usize) -> Result<(f64, f64, Method)> {
    if curve.is_involution() {
        let (value, x) = symmetric_value(curve, xi(n))?;
        return Ok((value, x, Method::Involution));
    }
    let m = maximize_grid_refined(
        |p| r_sum(curve, n, p),
        0.0,
        curve.p_bar(),
        resolution,
        REFINE_TOL,
        TieBreak::Rightmost,
    )?;
    Ok((m.value / (n + 1) as f64, m.x, Method::GridRefined))
}

/// The constant `c` of the unitary closed form.
pub fn unitary_c(t: f64, n: usize) -> f64 {
    if n % 2 == 1 {
        1.0
    } else {
        t.max((n as f64 / (n + 2) as f64).sqrt())
    }
}

/// Closed-form `uP(N)` for a unitary pair with polygon distance `t`.
pub fn upper_bound_unitary(t: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::validation(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if t == 1.0 {
        return Ok(0.0);
    }
    let c = unitary_c(t, n);
    let nf = n as f64;
    Ok(1.0 - t * ((nf + 2.0) * c + nf / c) / (2.0 * (nf + 1.0)))
}

/// Brute-force value `Q_N(p̄)/(N + 1)` of the recursion
/// `Q′_n(p) = p + Q_{n−1}(f(p))`, `Q_n` = prefix maximum of `Q′_n`, on a
/// uniform grid with linear interpolation.
pub fn dp_oracle(curve: &TradeoffCurve, n: usize, grid_size: usize) -> Result<f64> {
    check_n(n)?;
    if grid_size < MIN_DP_GRID {
        return Err(Error::validation(format!(
            "grid size {grid_size} below minimum {MIN_DP_GRID}"
        )));
    }
    check_curve(curve)?;
    let p_bar = curve.p_bar();
    let h = p_bar / (grid_size - 1) as f64;
    let ps: Vec<f64> = (0..grid_size).map(|i| h * i as f64).collect();
    let fs: Vec<f64> = ps.iter().map(|&p| curve.value(p)).collect();
    let mut q = ps.clone();
    let mut next = vec![0.0; grid_size];
    for _ in 0..n {
        let mut running = f64::NEG_INFINITY;
        for i in 0..grid_size {
            let v = ps[i] + interpolate_uniform(&q, h, fs[i]);
            running = running.max(v);
            next[i] = running;
        }
        std::mem::swap(&mut q, &mut next);
    }
    Ok(q[grid_size - 1] / (n + 1) as f64)
}

fn interpolate_uniform(values: &[f64], h: f64, x: f64) -> f64 {
    let last = values.len() - 1;
    let s = (x / h).clamp(0.0, last as f64);
    let k = (s.floor() as usize).min(last - 1);
    let w = s - k as f64;
    values[k] * (1.0 - w) + values[k + 1] * w
}

/// Success vector `p_i = f⁽ᴺ⁻ⁱ⁾(r_N)` attaining the upper bound.
pub fn optimal_success_vector(curve: &TradeoffCurve, n: usize, r_n: f64) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    let mut x = r_n.clamp(0.0, curve.p_bar());
    for i in (0..=n).rev() {
        v[i] = x;
        x = curve.value(x);
    }
    v
}

/// One inequality checked by [`theorem1_diagnostics`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub n: usize,
    /// The check is `lhs ≥ rhs − tolerance`.
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Report {
    /// `r_0 … r_N`.
    pub r: Vec<f64>,
    /// `t_0 … t_N`.
    pub t: Vec<f64>,
    /// Indices `n` whose preimage `f⁻¹(r_{n−1})` is a nondegenerate interval.
    pub flat_preimages: Vec<usize>,
    pub checks: Vec<LemmaCheck>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Maximizers `r_n` and the inequalities they must satisfy:
/// `r_n ≥ f⁽ⁿ⁺¹⁾(r_n)`, `r_n ≥ f(p̄)`, `r_n ≥ r_1`, `f⁽²⁾(r_n) ≤ r_{n−2}`
/// and `t_n ≤ r_n`, each within `2/resolution`.
pub fn theorem1_diagnostics(
    curve: &TradeoffCurve,
    n_max: usize,
    resolution: usize,
) -> Result<Theorem1Report> {
    check_n(n_max)?;
    if resolution < MIN_RESOLUTION {
        return Err(Error::validation(format!(
            "resolution {resolution} below minimum {MIN_RESOLUTION}"
        )));
    }
    let tol = 2.0 / resolution as f64;
    let p_bar = curve.p_bar();
    let mut r = vec![p_bar];
    for n in 1..=n_max {
        r.push(maximize_r(curve, n, resolution)?.1);
    }
    let mut t = vec![0.0];
    let mut flat_preimages = Vec::new();
    for n in 1..=n_max {
        match curve.preimage(r[n - 1]) {
            Some((lo, hi)) => {
                if hi - lo > tol {
                    flat_preimages.push(n);
                }
                t.push(lo);
            }
            None => t.push(0.0),
        }
    }

    let f_pbar = curve.value(p_bar);
    let mut checks = Vec::new();
    let mut check = |name: &'static str, n: usize, lhs: f64, rhs: f64| {
        checks.push(LemmaCheck {
            name,
            n,
            lhs,
            rhs,
            passed: lhs >= rhs - tol,
        });
    };
    for n in 0..=n_max {
        check("r_n >= f^(n+1)(r_n)", n, r[n], curve.iterate(r[n], n + 1));
        check("r_n >= f(p_bar)", n, r[n], f_pbar);
        if n >= 1 {
            check("r_n >= r_1", n, r[n], r[1]);
            check("t_n <= r_n", n, r[n], t[n]);
        }
        if n >= 2 {
            check("f^(2)(r_n) <= r_(n-2)", n, r[n - 2], curve.iterate(r[n], 2));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Theorem1Report {
        r,
        t,
        flat_preimages,
        checks,
        tolerance: tol,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    /// `uP(1) … uP(N_max)`.
    pub upper: Vec<f64>,
    /// `P̄_{1/2}`, the common odd-N value and the even-N limit.
    pub half_value: f64,
    /// Largest spread among odd-N values.
    pub odd_spread: f64,
    /// Largest increase between consecutive even-N values.
    pub even_increase: f64,
    /// `P̄_q` for `q = 0.5, 0.55, …, 1.0`.
    pub p_bar_q: Vec<(f64, f64)>,
    pub odd_constant: bool,
    pub even_nonincreasing: bool,
    pub even_above_half: bool,
    pub q_monotone: bool,
    pub passed: bool,
}

/// For involutive curves: odd-N values are all equal, even-N values decrease
/// towards them, and `P̄_q` is nondecreasing in `q ≥ 1/2`.
pub fn oscillation_check(curve: &TradeoffCurve, n_max: usize) -> Result<OscillationReport> {
    check_n(n_max)?;
    if !curve.is_involution() {
        return Err(Error::validation("oscillation check needs an involutive curve"));
    }
    let upper: Vec<f64> = (1..=n_max)
        .map(|n| symmetric_value(curve, xi(n)).map(|v| v.0))
        .collect::<Result<_>>()?;
    let (half_value, _) = symmetric_value(curve, 0.5)?;
    let odd: Vec<f64> = upper.iter().step_by(2).cloned().collect();
    let even: Vec<f64> = upper.iter().skip(1).step_by(2).cloned().collect();
    let odd_spread = odd.iter().map(|v| (v - half_value).abs()).fold(0.0, f64::max);
    let even_increase = even.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let p_bar_q: Vec<(f64, f64)> = (0..=10)
        .map(|i| {
            let q = 0.5 + 0.05 * i as f64;
            symmetric_value(curve, q).map(|v| (q, v.0))
        })
        .collect::<Result<_>>()?;
    let odd_constant = odd_spread <= 1e-9;
    let even_nonincreasing = even_increase <= 1e-12;
    let even_above_half = even.iter().all(|&v| v >= half_value - 1e-12);
    let q_monotone = p_bar_q.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    Ok(OscillationReport {
        upper,
        half_value,
        odd_spread,
        even_increase,
        p_bar_q,
        odd_constant,
        even_nonincreasing,
        even_above_half,
        q_monotone,
        passed: odd_constant && even_nonincreasing && even_above_half && q_monotone,
    })
}
