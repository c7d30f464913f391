#![allow(dead_code)]

use std::io::Write;
use std::time::Duration;

use qcp::fmap::{eigenphase_pair, TradeoffCurve};
use qcp::numerics::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Qubit pair `(I, diag(1, e^{iθ}))` with polygon distance `t`.
pub fn pair_for_t(t: f64) -> (ComplexMatrix, ComplexMatrix) {
    eigenphase_pair(2.0 * t.acos() / std::f64::consts::PI)
}

pub fn omega_over_pi_for_t(t: f64) -> f64 {
    2.0 * t.acos() / std::f64::consts::PI
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed point of U(2), up to the uniform sphere sampler.
pub fn random_qubit_unitary(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let v = loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-6 && r2 <= 1.0 {
            let r = r2.sqrt();
            break v.map(|x| x / r);
        }
    };
    let a = C64::new(v[0], v[1]);
    let b = C64::new(v[2], v[3]);
    let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    ComplexMatrix::from_rows(&[vec![a * phase, -b.conj() * phase], vec![b * phase, a.conj() * phase]])
        .expect("2×2")
}

/// Tabulated `f(p) = f₀(1 − (p/p̄)^a)^{1/b}` with `a, b ≥ 1`: concave,
/// nonincreasing, `f(p̄) = 0`.
pub fn random_concave_curve(rng: &mut ChaCha8Rng) -> TradeoffCurve {
    let p_bar = rng.random_range(0.5..0.95);
    let f0 = p_bar * rng.random_range(0.4..1.0);
    let a = rng.random_range(1.0..3.0);
    let b = rng.random_range(1.0..3.0);
    let knots: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let p = p_bar * i as f64 / 200.0;
            let x = (p / p_bar).min(1.0);
            (p, f0 * (1.0 - x.powf(a)).max(0.0).powf(1.0 / b))
        })
        .collect();
    TradeoffCurve::tabulated(&knots, p_bar, false).expect("valid by construction")
}

/// Curves exercised across criteria: unitary, pure-state, linear involution
/// and seeded random concave tables.
pub fn curve_zoo() -> Vec<(String, TradeoffCurve)> {
    let mut zoo: Vec<(String, TradeoffCurve)> = [0.309, 0.5, 0.809, 0.9]
        .iter()
        .map(|&t| (format!("unitary t={t}"), TradeoffCurve::unitary(t).unwrap()))
        .collect();
    zoo.push(("pure s=0.3".into(), TradeoffCurve::pure_state(0.3).unwrap()));
    zoo.push((
        "linear p+f=0.6".into(),
        TradeoffCurve::tabulated(&[(0.0, 0.6), (0.6, 0.0)], 0.6, false).unwrap(),
    ));
    let mut r = rng(2024);
    for i in 0..5 {
        zoo.push((format!("random #{i}"), random_concave_curve(&mut r)));
    }
    zoo
}

/// One unbuffered result line, visible even when test output is captured.
pub fn report(criterion: usize, title: &str, passed: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let verdict = if passed && elapsed <= limit { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {criterion} ({title}): {verdict} — {detail}; {:.2}s of {}s\n",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}
