//! Distance from the origin to the convex hull of points on the unit circle.

use serde::Serialize;

use super::matrix::C64;
use crate::error::{Error, Result};

const DEDUP_TOL: f64 = 1e-12;

/// Closest point of a convex hull to the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolygonResult {
    /// Distance from the origin, in `[0, 1]`.
    pub t: f64,
    /// Input indices of the hull edge (or single vertex, repeated) attaining
    /// the distance, lowest index first. When the origin lies inside the hull
    /// this is the first pair of `weights`.
    pub edge: (usize, usize),
    /// Convex weights over input indices whose combination is the closest
    /// point (the origin itself when `t = 0`).
    pub weights: Vec<(usize, f64)>,
}

/// Distance from `0` to the convex hull of `points`, all of unit modulus.
pub fn distance_to_polygon(points: &[C64]) -> Result<PolygonResult> {
    if points.is_empty() {
        return Err(Error::validation("distance_to_polygon needs at least one point"));
    }
    if let Some((i, p)) = points
        .iter()
        .enumerate()
        .find(|(_, p)| (p.norm() - 1.0).abs() > 1e-10)
    {
        return Err(Error::validation(format!(
            "point {i} has modulus {} (expected 1)",
            p.norm()
        )));
    }

    let unique = dedup(points);
    if unique.len() == 1 {
        let i = unique[0];
        return Ok(PolygonResult {
            t: points[i].norm().min(1.0),
            edge: (i, i),
            weights: vec![(i, 1.0)],
        });
    }

    let hull = monotone_chain(points, &unique);
    if contains_origin(points, &hull) {
        return Ok(origin_representation(points, &unique));
    }

    // closest hull edge; ties go to the lowest index pair
    let mut best: Option<(f64, (usize, usize), f64)> = None;
    for k in 0..hull.len() {
        let (i, j) = (hull[k], hull[(k + 1) % hull.len()]);
        if hull.len() == 2 && k == 1 {
            break;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (a, b) = (points[lo], points[hi]);
        let d = b - a;
        let s = (-(a.re * d.re + a.im * d.im) / d.norm_sqr()).clamp(0.0, 1.0);
        let dist = (a + d * s).norm();
        let better = match best {
            None => true,
            Some((bd, pair, _)) => {
                dist < bd - DEDUP_TOL || ((dist - bd).abs() <= DEDUP_TOL && (lo, hi) < pair)
            }
        };
        if better {
            best = Some((dist, (lo, hi), s));
        }
    }
    let (dist, (lo, hi), s) = best.expect("hull has at least one edge");
    Ok(PolygonResult {
        t: dist.min(1.0),
        edge: (lo, hi),
        weights: vec![(lo, 1.0 - s), (hi, s)],
    })
}

/// Lowest input index of every distinct point.
fn dedup(points: &[C64]) -> Vec<usize> {
    let mut unique: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let dup = unique.iter().any(|&j| {
            (points[j].re - p.re).abs() <= DEDUP_TOL && (points[j].im - p.im).abs() <= DEDUP_TOL
        });
        if !dup {
            unique.push(i);
        }
    }
    unique
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Andrew's monotone chain; returns hull vertices (input indices) in
/// counter-clockwise order.
fn monotone_chain(points: &[C64], idx: &[usize]) -> Vec<usize> {
    let mut order = idx.to_vec();
    order.sort_by(|&a, &b| {
        points[a]
            .re
            .total_cmp(&points[b].re)
            .then(points[a].im.total_cmp(&points[b].im))
    });
    let mut lower: Vec<usize> = Vec::new();
    for &i in &order {
        while lower.len() >= 2
            && cross(points[lower[lower.len() - 2]], points[lower[lower.len() - 1]], points[i]) <= 0.0
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2
            && cross(points[upper[upper.len() - 2]], points[upper[upper.len() - 1]], points[i]) <= 0.0
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn contains_origin(points: &[C64], hull: &[usize]) -> bool {
    let origin = C64::new(0.0, 0.0);
    if hull.len() == 2 {
        let (a, b) = (points[hull[0]], points[hull[1]]);
        return (a + b).norm() <= DEDUP_TOL;
    }
    (0..hull.len()).all(|k| {
        let a = points[hull[k]];
        let b = points[hull[(k + 1) % hull.len()]];
        cross(a, b, origin) >= -DEDUP_TOL
    })
}

/// Origin as a convex combination of at most three points: an antipodal pair
/// if one exists, otherwise the lowest-index triangle containing it.
fn origin_representation(points: &[C64], unique: &[usize]) -> PolygonResult {
    for (a, &i) in unique.iter().enumerate() {
        for &j in &unique[a + 1..] {
            if (points[i] + points[j]).norm() <= 1e-9 {
                return PolygonResult {
                    t: 0.0,
                    edge: (i, j),
                    weights: vec![(i, 0.5), (j, 0.5)],
                };
            }
        }
    }
    for (a, &i) in unique.iter().enumerate() {
        for (b, &j) in unique.iter().enumerate().skip(a + 1) {
            for &k in &unique[b + 1..] {
                if let Some(w) = barycentric_origin(points[i], points[j], points[k]) {
                    return PolygonResult {
                        t: 0.0,
                        edge: (i, j),
                        weights: vec![(i, w[0]), (j, w[1]), (k, w[2])],
                    };
                }
            }
        }
    }
    unreachable!("origin inside the hull lies in some vertex triangle")
}

fn barycentric_origin(a: C64, b: C64, c: C64) -> Option<[f64; 3]> {
    let area = cross(a, b, c);
    if area.abs() < 1e-14 {
        return None;
    }
    let o = C64::new(0.0, 0.0);
    let wa = cross(o, b, c) / area;
    let wb = cross(a, o, c) / area;
    let wc = cross(a, b, o) / area;
    if wa < -1e-12 || wb < -1e-12 || wc < -1e-12 {
        return None;
    }
    let (wa, wb, wc) = (wa.max(0.0), wb.max(0.0), wc.max(0.0));
    let s = wa + wb + wc;
    Some([wa / s, wb / s, wc / s])
}
