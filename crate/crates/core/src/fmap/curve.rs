use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::TieBreak;

/// Slack allowed when checking that a probability lies in `[0, p̄]`.
const DOMAIN_TOL: f64 = 1e-12;
/// Slack for the drift clamp in iterated evaluation.
const DRIFT_TOL: f64 = 1e-14;
/// Monotonicity/concavity slack on knot data.
const SHAPE_TOL: f64 = 1e-12;

/// How the map is represented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveKind {
    /// Unitary pair with overlap `t`: `f(p) = 1 − t²/(1 − p)`.
    Unitary { t: f64 },
    /// Pure-state pair with overlap `s`, same functional form.
    PureState { s: f64 },
    /// Piecewise-linear interpolation of `(p, f(p))` knots.
    Tabulated { knots: Vec<(f64, f64)> },
}

/// The tradeoff map `f: [0, p̄] → [0, p̄]`: the best probability of
/// correctly identifying the second channel when the first one is identified
/// with probability `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    kind: CurveKind,
    p_bar: f64,
    involution: bool,
}

/// Shape checks of a curve on a uniform 1001-point grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveReport {
    /// Largest increase `f(p_{i+1}) − f(p_i)` seen (≤ 0 when nonincreasing).
    pub monotonicity_violation: f64,
    /// Largest second difference (≤ 0 when concave).
    pub concavity_violation: f64,
    /// Largest distance of a value outside `[0, p̄]`.
    pub range_violation: f64,
    /// `f(0) − p̄`; positive means the channels should be swapped.
    pub f0_excess: f64,
    /// `max |f(f(p)) − p|` over the grid.
    pub involution_residual: f64,
    pub monotone: bool,
    pub concave: bool,
    pub in_range: bool,
}

impl CurveReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.concave && self.in_range && self.f0_excess <= SHAPE_TOL
    }
}

impl TradeoffCurve {
    /// Curve of a unitary pair whose single-shot minimum overlap is `t`.
    pub fn unitary(t: f64) -> Result<Self> {
        check_open_unit("t", t)?;
        Ok(TradeoffCurve {
            kind: CurveKind::Unitary { t },
            p_bar: 1.0 - t * t,
            involution: true,
        })
    }

    /// Curve of a pure-state pair with overlap `s`.
    pub fn pure_state(s: f64) -> Result<Self> {
        check_open_unit("s", s)?;
        Ok(TradeoffCurve {
            kind: CurveKind::PureState { s },
            p_bar: 1.0 - s * s,
            involution: true,
        })
    }

    /// Piecewise-linear curve through `knots`.
    ///
    /// Knots must start at `p = 0`, end at `p = p̄`, be strictly increasing in
    /// `p`, and describe a nonincreasing concave map into `[0, p̄]`. With
    /// `invert` set, the knots describe the map with the two channels
    /// exchanged and are inverted first (useful when `f(0) > p̄`).
    pub fn tabulated(knots: &[(f64, f64)], p_bar: f64, invert: bool) -> Result<Self> {
        if invert {
            check_knot_grid(knots, p_bar)?;
            check_nonincreasing(knots)?;
            let (inverted, new_bar) = invert_knots(knots, p_bar);
            return Self::tabulated(&inverted, new_bar, false);
        }
        check_knot_grid(knots, p_bar)?;
        if knots[0].1 > p_bar + SHAPE_TOL {
            return Err(Error::validation(format!(
                "f(0) = {} exceeds p_bar = {p_bar}; exchange the two channels \
                 (set `invert = true` to invert the tabulated map)",
                knots[0].1
            )));
        }
        for (i, &(_, f)) in knots.iter().enumerate() {
            if f < -SHAPE_TOL || f > p_bar + SHAPE_TOL {
                return Err(Error::validation(format!(
                    "knot {i}: value {f} outside [0, {p_bar}]"
                )));
            }
        }
        check_nonincreasing(knots)?;
        for i in 1..knots.len() - 1 {
            let left = slope(knots[i - 1], knots[i]);
            let right = slope(knots[i], knots[i + 1]);
            if right > left + SHAPE_TOL * left.abs().max(1.0) {
                return Err(Error::validation(format!(
                    "knot {i}: not concave (slope increases from {left} to {right})"
                )));
            }
        }
        let mut curve = Self::tabulated_unchecked(knots, p_bar);
        curve.involution = involution_residual(&curve, 101) <= 1e-9;
        Ok(curve)
    }

    /// Tabulated curve without shape validation, for diagnostics.
    pub fn tabulated_unchecked(knots: &[(f64, f64)], p_bar: f64) -> Self {
        TradeoffCurve {
            kind: CurveKind::Tabulated {
                knots: knots.to_vec(),
            },
            p_bar,
            involution: false,
        }
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Largest achievable `p`.
    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    pub fn is_involution(&self) -> bool {
        self.involution
    }

    /// `f(p)`, with `p` checked against the domain.
    pub fn eval(&self, p: f64) -> Result<f64> {
        self.check_domain(p)?;
        Ok(self.value(p))
    }

    /// `f⁽ⁱ⁾(p)`, the `i`-fold iterate (`f⁽⁰⁾(p) = p`).
    pub fn eval_iterated(&self, p: f64, i: usize) -> Result<f64> {
        self.check_domain(p)?;
        Ok(self.iterate(p, i))
    }

    /// `f(p)` with `p` clamped into the domain.
    pub fn value(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, self.p_bar);
        let v = match &self.kind {
            CurveKind::Unitary { t } => 1.0 - t * t / (1.0 - p),
            CurveKind::PureState { s } => 1.0 - s * s / (1.0 - p),
            CurveKind::Tabulated { knots } => interpolate(knots, p),
        };
        v.clamp(0.0, self.p_bar)
    }

    /// `f⁽ⁱ⁾(p)` with clamping after every step.
    pub fn iterate(&self, p: f64, i: usize) -> f64 {
        let mut x = p.clamp(0.0, self.p_bar);
        for _ in 0..i {
            x = self.value(x);
        }
        x
    }

    /// Minimal `p` with `f(p) = y`, or `None` when `y` is outside
    /// `[f(p̄), f(0)]`. Also returns the maximal preimage.
    pub fn preimage(&self, y: f64) -> Option<(f64, f64)> {
        let lo_val = self.value(self.p_bar);
        let hi_val = self.value(0.0);
        if y < lo_val - DRIFT_TOL || y > hi_val + DRIFT_TOL {
            return None;
        }
        // f nonincreasing: {p : f(p) <= y} = [p_min, p̄], {p : f(p) >= y} = [0, p_max]
        let p_min = bisect(0.0, self.p_bar, |p| self.value(p) <= y + DRIFT_TOL);
        let p_max = bisect_last(0.0, self.p_bar, |p| self.value(p) >= y - DRIFT_TOL);
        Some((p_min, p_max.max(p_min)))
    }

    /// Maximizer of `slope·p + f(p)` over `[0, p̄]`.
    ///
    /// Exact: the closed-form kinds have a single stationary point, and a
    /// piecewise-linear map attains its maximum at a knot. Knot values within
    /// a few ulps of the maximum are ties.
    pub fn argmax_linear(&self, slope: f64, tie: TieBreak) -> f64 {
        match &self.kind {
            CurveKind::Unitary { t: w } | CurveKind::PureState { s: w } => {
                // d/dp = slope − w²/(1 − p)²
                if slope <= w * w {
                    0.0
                } else {
                    (1.0 - w / slope.sqrt()).min(self.p_bar)
                }
            }
            CurveKind::Tabulated { knots } => {
                let vals: Vec<f64> = knots.iter().map(|&(p, f)| slope * p + f).collect();
                let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let floor = top - 8.0 * f64::EPSILON * top.abs().max(slope.abs()).max(1.0);
                let mut hits = vals.iter().enumerate().filter(|(_, &v)| v >= floor);
                let (i, _) = match tie {
                    TieBreak::Leftmost => hits.next(),
                    TieBreak::Rightmost => hits.next_back(),
                }
                .expect("at least one knot");
                knots[i].0.clamp(0.0, self.p_bar)
            }
        }
    }

    fn check_domain(&self, p: f64) -> Result<()> {
        if !p.is_finite() || p < -DOMAIN_TOL || p > self.p_bar + DOMAIN_TOL {
            return Err(Error::validation(format!(
                "p = {p} outside the curve domain [0, {}]",
                self.p_bar
            )));
        }
        Ok(())
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::validation(format!(
            "{name} = {v} must lie in the open interval (0, 1)"
        )));
    }
    Ok(())
}

fn check_knot_grid(knots: &[(f64, f64)], p_bar: f64) -> Result<()> {
    if !(p_bar > 0.0 && p_bar <= 1.0) {
        return Err(Error::validation(format!("p_bar = {p_bar} must lie in (0, 1]")));
    }
    if knots.len() < 2 {
        return Err(Error::validation("a tabulated curve needs at least two knots"));
    }
    if knots.iter().any(|(p, f)| !p.is_finite() || !f.is_finite()) {
        return Err(Error::validation("knots must be finite"));
    }
    if knots[0].0.abs() > SHAPE_TOL {
        return Err(Error::validation(format!(
            "knot 0: first knot must be at p = 0, got {}",
            knots[0].0
        )));
    }
    let last = knots.len() - 1;
    if (knots[last].0 - p_bar).abs() > SHAPE_TOL {
        return Err(Error::validation(format!(
            "knot {last}: last knot must be at p = p_bar = {p_bar}, got {}",
            knots[last].0
        )));
    }
    for i in 1..knots.len() {
        if knots[i].0 <= knots[i - 1].0 {
            return Err(Error::validation(format!(
                "knot {i}: p values must be strictly increasing"
            )));
        }
    }
    Ok(())
}

fn check_nonincreasing(knots: &[(f64, f64)]) -> Result<()> {
    for i in 1..knots.len() {
        if knots[i].1 > knots[i - 1].1 + SHAPE_TOL {
            return Err(Error::validation(format!(
                "knot {i}: value increases from {} to {}",
                knots[i - 1].1,
                knots[i].1
            )));
        }
    }
    Ok(())
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

fn interpolate(knots: &[(f64, f64)], p: f64) -> f64 {
    let k = knots.partition_point(|&(x, _)| x <= p);
    if k == 0 {
        return knots[0].1;
    }
    if k == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (x0, y0) = knots[k - 1];
    let (x1, y1) = knots[k];
    y0 + (y1 - y0) * (p - x0) / (x1 - x0)
}

/// Knots of the map with the two channels exchanged. Flat runs keep their
/// largest `p`; below `f(p̄)` the inverse saturates at `p̄`.
fn invert_knots(knots: &[(f64, f64)], p_bar: f64) -> (Vec<(f64, f64)>, f64) {
    let new_bar = knots[0].1;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(knots.len() + 1);
    let f_end = knots[knots.len() - 1].1;
    if f_end > SHAPE_TOL {
        out.push((0.0, p_bar));
    }
    for &(p, f) in knots.iter().rev() {
        match out.last_mut() {
            Some(last) if (last.0 - f).abs() <= SHAPE_TOL => last.1 = last.1.max(p),
            _ => out.push((f.max(0.0), p)),
        }
    }
    if let Some(first) = out.first_mut() {
        first.0 = 0.0;
    }
    (out, new_bar)
}

fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    // smallest x with pred(x), pred monotone false→true
    if pred(lo) {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn bisect_last(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    // largest x with pred(x), pred monotone true→false
    if pred(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn grid(p_bar: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| p_bar * i as f64 / (points - 1) as f64)
}

pub(crate) fn involution_residual(curve: &TradeoffCurve, points: usize) -> f64 {
    grid(curve.p_bar, points)
        .map(|p| (curve.iterate(p, 2) - p).abs())
        .fold(0.0, f64::max)
}

/// Shape report over a 1001-point grid. Never fails.
pub fn validate_curve(curve: &TradeoffCurve) -> CurveReport {
    const POINTS: usize = 1001;
    let p_bar = curve.p_bar;
    // raw values: the clamp in `value` would hide range violations
    let raw = |p: f64| match &curve.kind {
        CurveKind::Unitary { t } => 1.0 - t * t / (1.0 - p),
        CurveKind::PureState { s } => 1.0 - s * s / (1.0 - p),
        CurveKind::Tabulated { knots } => interpolate(knots, p),
    };
    let vals: Vec<f64> = grid(p_bar, POINTS).map(raw).collect();
    let monotonicity_violation = vals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let concavity_violation = vals
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::NEG_INFINITY, f64::max);
    let range_violation = vals
        .iter()
        .map(|&v| (-v).max(v - p_bar).max(0.0))
        .fold(0.0, f64::max);
    CurveReport {
        monotonicity_violation,
        concavity_violation,
        range_violation,
        f0_excess: raw(0.0) - p_bar,
        involution_residual: involution_residual(curve, POINTS),
        monotone: monotonicity_violation <= SHAPE_TOL,
        concave: concavity_violation <= SHAPE_TOL,
        in_range: range_violation <= SHAPE_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_endpoints() {
        let c = TradeoffCurve::unitary(0.9).unwrap();
        assert!((c.p_bar() - 0.19).abs() < 1e-15);
        assert!(c.eval(0.19).unwrap().abs() < 1e-12);
        let c = TradeoffCurve::unitary(0.5).unwrap();
        // p⋆ = 1 − tc maps to 1 − t/c
        let cc = 0.8;
        assert!((c.eval(1.0 - 0.5 * cc).unwrap() - (1.0 - 0.5 / cc)).abs() < 1e-15);
        assert!((c.eval(0.6).unwrap() - 0.375).abs() < 1e-15);
        assert!((c.iterate(0.2, 2) - 0.2).abs() < 1e-12);
        assert!((c.eval_iterated(0.0, 1).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(c.eval_iterated(0.33, 0).unwrap(), 0.33);
    }

    #[test]
    fn constructor_domain() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(TradeoffCurve::unitary(bad).is_err());
            assert!(TradeoffCurve::pure_state(bad).is_err());
        }
    }

    #[test]
    fn pure_state_symmetric() {
        let c = TradeoffCurve::pure_state(0.5).unwrap();
        assert!((c.p_bar() - 0.75).abs() < 1e-15);
        assert!((c.eval(0.0).unwrap() - c.p_bar()).abs() < 1e-15);
        assert!(involution_residual(&c, 101) <= 1e-12);
        assert!(c.is_involution());
    }

    #[test]
    fn eval_outside_domain() {
        let c = TradeoffCurve::unitary(0.5).unwrap();
        assert!(c.eval(0.8).is_err());
        assert!(c.eval(-0.01).is_err());
        assert!(c.eval_iterated(0.9, 3).is_err());
    }

    #[test]
    fn linear_tabulated() {
        let c = TradeoffCurve::tabulated(&[(0.0, 1.0), (1.0, 0.0)], 1.0, false).unwrap();
        assert!((c.eval(0.25).unwrap() - 0.75).abs() < 1e-15);
        assert!(c.is_involution());
    }

    #[test]
    fn increase_rejected_at_knot() {
        let err = TradeoffCurve::tabulated(&[(0.0, 0.5), (0.5, 0.6), (1.0, 0.0)], 1.0, false)
            .unwrap_err()
            .to_string();
        assert!(err.contains("knot 1"), "{err}");
    }

    #[test]
    fn convex_rejected() {
        let err = TradeoffCurve::tabulated(&[(0.0, 1.0), (0.5, 0.2), (1.0, 0.0)], 1.0, false)
            .unwrap_err()
            .to_string();
        assert!(err.contains("knot 1") && err.contains("concave"), "{err}");
    }

    #[test]
    fn f0_above_pbar_needs_inversion() {
        // identifies the second channel perfectly at p = 0 but caps p at 0.5
        let knots = [(0.0, 1.0), (0.5, 0.0)];
        let err = TradeoffCurve::tabulated(&knots, 0.5, false).unwrap_err().to_string();
        assert!(err.contains("invert"), "{err}");
        let inv = TradeoffCurve::tabulated(&knots, 0.5, true).unwrap();
        assert_eq!(inv.p_bar(), 1.0);
        assert!((inv.eval(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((inv.eval(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(inv.eval(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn inversion_saturates_below_f_pbar() {
        let knots = [(0.0, 0.9), (0.4, 0.5)];
        let inv = TradeoffCurve::tabulated(&knots, 0.4, true).unwrap();
        assert_eq!(inv.p_bar(), 0.9);
        assert!((inv.eval(0.2).unwrap() - 0.4).abs() < 1e-15);
        assert!((inv.eval(0.5).unwrap() - 0.4).abs() < 1e-15);
        assert!((inv.eval(0.9).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn knot_grid_errors() {
        assert!(TradeoffCurve::tabulated(&[(0.1, 0.5), (1.0, 0.0)], 1.0, false).is_err());
        assert!(TradeoffCurve::tabulated(&[(0.0, 0.5), (0.9, 0.0)], 1.0, false).is_err());
        assert!(TradeoffCurve::tabulated(&[(0.0, 0.5)], 1.0, false).is_err());
        assert!(
            TradeoffCurve::tabulated(&[(0.0, 0.5), (0.5, 0.4), (0.5, 0.3), (1.0, 0.0)], 1.0, false)
                .is_err()
        );
    }

    #[test]
    fn sampled_unitary_matches_closed_form() {
        let t: f64 = 0.5;
        let exact = TradeoffCurve::unitary(t).unwrap();
        let p_bar = exact.p_bar();
        // knots geometric in 1 − p, so h²·|f''| is uniform along the curve
        let knots: Vec<(f64, f64)> = (0..=1000)
            .map(|i| {
                let p = if i == 1000 {
                    p_bar
                } else {
                    1.0 - (t * t).powf(i as f64 / 1000.0)
                };
                (p, exact.value(p))
            })
            .collect();
        let tab = TradeoffCurve::tabulated(&knots, p_bar, false).unwrap();
        let worst = (0..=20_000)
            .map(|i| p_bar * i as f64 / 20_000.0)
            .map(|p| (tab.value(p) - exact.value(p)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "max interpolation error {worst}");
    }

    #[test]
    fn uniform_sampling_error_within_chord_bound() {
        let t: f64 = 0.5;
        let exact = TradeoffCurve::unitary(t).unwrap();
        let p_bar = exact.p_bar();
        let h = p_bar / 1000.0;
        let knots: Vec<(f64, f64)> =
            (0..=1000).map(|i| (h * i as f64, exact.value(h * i as f64))).collect();
        let tab = TradeoffCurve::tabulated(&knots, p_bar, false).unwrap();
        // |error| ≤ h²/8 · max|f''|, f'' = −2t²/(1 − p)³
        let bound = h * h / 8.0 * 2.0 * t * t / (1.0 - p_bar).powi(3);
        let worst = (0..=20_000)
            .map(|i| p_bar * i as f64 / 20_000.0)
            .map(|p| (tab.value(p) - exact.value(p)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= bound * (1.0 + 1e-6), "{worst} > {bound}");
    }

    #[test]
    fn report_examples() {
        let r = validate_curve(&TradeoffCurve::unitary(0.309).unwrap());
        assert!(r.passed(), "{r:?}");
        assert!(r.involution_residual < 1e-12);

        let convex = TradeoffCurve::tabulated_unchecked(&[(0.0, 1.0), (0.5, 0.2), (1.0, 0.0)], 1.0);
        let r = validate_curve(&convex);
        assert!(!r.concave);
        assert!(r.monotone);

        let zero = TradeoffCurve::tabulated(&[(0.0, 0.0), (1.0, 0.0)], 1.0, false).unwrap();
        let r = validate_curve(&zero);
        assert!(r.passed());
        assert!(!zero.is_involution());
    }

    #[test]
    fn argmax_linear_exact() {
        let c = TradeoffCurve::unitary(0.5).unwrap();
        assert_eq!(c.argmax_linear(1.0, TieBreak::Leftmost), 0.5);
        assert_eq!(c.argmax_linear(0.25, TieBreak::Leftmost), 0.0);
        assert_eq!(c.argmax_linear(-3.0, TieBreak::Leftmost), 0.0);
        assert_eq!(c.argmax_linear(100.0, TieBreak::Leftmost), 0.75);

        let lin = TradeoffCurve::tabulated(&[(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)], 1.0, false)
            .unwrap();
        assert_eq!(lin.argmax_linear(1.0, TieBreak::Leftmost), 0.0);
        assert_eq!(lin.argmax_linear(1.0, TieBreak::Rightmost), 1.0);
        assert_eq!(lin.argmax_linear(0.5, TieBreak::Rightmost), 0.0);
        let zero = TradeoffCurve::tabulated(&[(0.0, 0.0), (1.0, 0.0)], 1.0, false).unwrap();
        assert_eq!(zero.argmax_linear(0.0, TieBreak::Leftmost), 0.0);
        assert_eq!(zero.argmax_linear(1.0, TieBreak::Leftmost), 1.0);
    }

    #[test]
    fn preimage_of_flat_segment() {
        let c = TradeoffCurve::tabulated(&[(0.0, 0.5), (0.3, 0.5), (1.0, 0.0)], 1.0, false)
            .unwrap();
        let (lo, hi) = c.preimage(0.5).unwrap();
        assert!(lo < 1e-12);
        assert!((hi - 0.3).abs() < 1e-9);
        assert!(c.preimage(0.7).is_none());
    }
}
