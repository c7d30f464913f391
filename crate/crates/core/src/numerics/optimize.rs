//! Scalar maximizers on a closed interval.

use crate::error::{Error, Result};

const GOLDEN_MAX_ITER: usize = 200;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Which maximizer to report when several points attain the maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    Leftmost,
    Rightmost,
}

/// Golden-section maximization of a concave `g` on `[a, b]`.
///
/// The endpoints are compared against the interior optimum so monotone
/// functions return the boundary exactly. On a flat top the leftmost
/// maximizer is returned.
pub fn maximize_concave_1d(g: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Maximum> {
    check_interval(a, b)?;
    let inner = golden(&g, a, b, tol);
    let mut best = Maximum { x: a, value: g(a) };
    for x in [inner.x, b] {
        let value = if x == inner.x { inner.value } else { g(x) };
        if value > best.value {
            best = Maximum { x, value };
        }
    }
    Ok(push_to_edge(&g, best, a))
}

/// Global maximization of a continuous `g` on `[a, b]`: a uniform grid of
/// `coarse_points`, then golden-section refinement inside the two cells
/// around the best grid point.
///
/// Grid values within `1e−12·max(1, |best|)` of the best count as ties.
/// The returned value is never below the best grid value.
pub fn maximize_grid_refined(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    coarse_points: usize,
    tol: f64,
    tie: TieBreak,
) -> Result<Maximum> {
    check_interval(a, b)?;
    if coarse_points < 2 {
        return Err(Error::validation("coarse grid needs at least 2 points"));
    }
    let h = (b - a) / (coarse_points - 1) as f64;
    let xs: Vec<f64> = (0..coarse_points)
        .map(|i| if i + 1 == coarse_points { b } else { a + h * i as f64 })
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tie_tol = 1e-12 * top.abs().max(1.0);
    let is_top = |&i: &usize| vals[i] >= top - tie_tol;
    let i = match tie {
        TieBreak::Leftmost => (0..coarse_points).find(is_top),
        TieBreak::Rightmost => (0..coarse_points).rev().find(is_top),
    }
    .expect("grid maximum exists");
    let grid_best = Maximum { x: xs[i], value: vals[i] };

    let lo = xs[i.saturating_sub(1)];
    let hi = xs[(i + 1).min(coarse_points - 1)];
    let refined = golden(&g, lo, hi, tol);
    let best = if refined.value > grid_best.value + tie_tol {
        refined
    } else if refined.value >= grid_best.value - tie_tol {
        // equivalent maximizers: honour the tie rule
        match tie {
            TieBreak::Leftmost if refined.x < grid_best.x => refined,
            TieBreak::Rightmost if refined.x > grid_best.x => refined,
            _ => grid_best,
        }
    } else {
        grid_best
    };
    if best.value < grid_best.value {
        return Ok(grid_best);
    }
    Ok(best)
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::validation(format!("invalid interval [{a}, {b}]")));
    }
    Ok(())
}

fn golden(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Maximum {
    if b - a <= tol {
        let x = 0.5 * (a + b);
        return Maximum { x, value: g(x) };
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..GOLDEN_MAX_ITER {
        if b - a < tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = g(x2);
        }
    }
    if f1 >= f2 {
        Maximum { x: x1, value: f1 }
    } else {
        Maximum { x: x2, value: f2 }
    }
}

/// Move a maximizer of a concave function to the edge of its (exactly) flat
/// top by bisection toward `edge`.
fn push_to_edge(g: &impl Fn(f64) -> f64, best: Maximum, edge: f64) -> Maximum {
    let floor = best.value;
    let at_edge = g(edge);
    if at_edge >= floor {
        return Maximum { x: edge, value: at_edge };
    }
    // invariant: g(inside) >= floor > g(outside)
    let (mut inside, mut outside) = (best.x, edge);
    let mut inside_value = best.value;
    for _ in 0..80 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        let v = g(mid);
        if v >= floor {
            inside = mid;
            inside_value = v;
        } else {
            outside = mid;
        }
    }
    Maximum { x: inside, value: inside_value }
}
