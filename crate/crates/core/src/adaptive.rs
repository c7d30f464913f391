//! Lower bound lP(N) from an adaptive local strategy with Bayesian updating:
//! each step probes one channel and measures, choosing the next measurement
//! from the last outcome (`0` or `?`; `?` is never followed by `1`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmap::TradeoffCurve;
use crate::numerics::TieBreak;

const FORWARD_TOL: f64 = 1e-8;

/// Per-step probabilities and value functions of the adaptive strategy.
///
/// Indices follow the step number: `p[n − 1] = p_n` for `n = 1…N`, likewise
/// `q` (where `q_1` is never used and is set to `p̄`); `a[n] = A_n`,
/// `b[n] = B_n` for `n = 0…N−1`; `s[n] = S_n`, `t[n] = T_n` for `n = 0…N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptiveSchedule {
    pub n: usize,
    /// `p_n`: probability of outcome `0` at step `n` after outcome `0`,
    /// given the channel is still the first one.
    pub p: Vec<f64>,
    /// `q_n`: the same after outcome `?`.
    pub q: Vec<f64>,
    /// Expected future correct identifications after outcome `0` at step `n`.
    pub a: Vec<f64>,
    /// The same after outcome `?`.
    pub b: Vec<f64>,
    /// Probability of outcome `0` after `n` steps of the first channel.
    pub s: Vec<f64>,
    /// Probability of outcome `?` after `n` steps of the first channel.
    pub t: Vec<f64>,
    pub lower_bound: f64,
}

impl AdaptiveSchedule {
    pub fn p_at(&self, n: usize) -> f64 {
        self.p[n - 1]
    }

    pub fn q_at(&self, n: usize) -> f64 {
        self.q[n - 1]
    }
}

/// Forward propagation of a schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForwardCheck {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// `P(k|k)` for `k = 0…N`.
    pub success: Vec<f64>,
    pub average: f64,
}

/// Empirical success of the strategy for one change point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationOutcome {
    pub k: usize,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
}

/// Optimize the schedule by the backward recursion
/// `A_{n−1} = f(p_n) + p_n A_n + (1 − p_n) B_n`,
/// `B_{n−1} = q_n A_n + (1 − q_n) B_n`.
pub fn optimize_schedule(curve: &TradeoffCurve, n: usize) -> Result<AdaptiveSchedule> {
    if n == 0 {
        return Err(Error::validation("N must be at least 1"));
    }
    let p_bar = curve.p_bar();
    let argmax = |slope: f64| curve.argmax_linear(slope, TieBreak::Leftmost);

    let mut p = vec![0.0; n];
    let mut q = vec![p_bar; n];
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];

    p[n - 1] = argmax(1.0);
    a[n - 1] = curve.value(p[n - 1]) + p[n - 1];
    b[n - 1] = p_bar;
    for step in (1..n).rev() {
        let (an, bn) = (a[step], b[step]);
        let pn = argmax(an - bn);
        let qn = if an >= bn { p_bar } else { 0.0 };
        p[step - 1] = pn;
        if step > 1 {
            q[step - 1] = qn;
        }
        a[step - 1] = curve.value(pn) + pn * an + (1.0 - pn) * bn;
        b[step - 1] = qn * an + (1.0 - qn) * bn;
    }
    let lower_bound = a[0] / (n + 1) as f64;

    let mut schedule = AdaptiveSchedule {
        n,
        p,
        q,
        a,
        b,
        s: Vec::new(),
        t: Vec::new(),
        lower_bound,
    };
    let fwd = forward_check(&schedule, curve)?;
    schedule.s = fwd.s;
    schedule.t = fwd.t;
    Ok(schedule)
}

/// Forward-propagate `S_n = S_{n−1}p_n + T_{n−1}q_n`,
/// `T_n = S_{n−1}(1 − p_n) + T_{n−1}(1 − q_n)` and compare the resulting
/// average with `A_0/(N + 1)`.
pub fn forward_check(schedule: &AdaptiveSchedule, curve: &TradeoffCurve) -> Result<ForwardCheck> {
    let n = schedule.n;
    let mut s = vec![1.0];
    let mut t = vec![0.0];
    for step in 1..=n {
        let (sp, tp) = (s[step - 1], t[step - 1]);
        let (pn, qn) = (schedule.p_at(step), schedule.q_at(step));
        s.push(sp * pn + tp * qn);
        t.push(sp * (1.0 - pn) + tp * (1.0 - qn));
    }
    let success: Vec<f64> = (0..=n)
        .map(|k| {
            if k < n {
                s[k] * curve.value(schedule.p_at(k + 1))
            } else {
                s[n]
            }
        })
        .collect();
    let average = success.iter().sum::<f64>() / (n + 1) as f64;
    let mismatch = (average - schedule.lower_bound).abs();
    if mismatch > FORWARD_TOL {
        return Err(Error::Consistency(format!(
            "forward average {average} differs from backward value {} by {mismatch:.3e}",
            schedule.lower_bound
        )));
    }
    Ok(ForwardCheck {
        s,
        t,
        success,
        average,
    })
}

/// Monte Carlo run of the outcome chain for change point `k`.
///
/// Trial `i` draws from ChaCha8 seeded with `seed` on stream `i`, so results
/// do not depend on thread scheduling.
pub fn simulate_schedule(
    schedule: &AdaptiveSchedule,
    curve: &TradeoffCurve,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<SimulationOutcome> {
    let n = schedule.n;
    if k > n {
        return Err(Error::validation(format!("change point {k} outside 0..={n}")));
    }
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let declare = (k < n).then(|| curve.value(schedule.p_at(k + 1)));
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let mut zero = true;
            for step in 1..=k {
                let x: f64 = rng.random();
                let go = if zero { schedule.p_at(step) } else { schedule.q_at(step) };
                zero = x < go;
            }
            let hit = match declare {
                Some(fk) => zero && rng.random::<f64>() < fk,
                None => zero,
            };
            hit as u64
        })
        .sum();
    Ok(SimulationOutcome {
        k,
        trials,
        successes,
        rate: successes as f64 / trials as f64,
    })
}
