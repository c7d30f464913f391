//! Hermitian and normal eigenproblems by cyclic complex Jacobi rotations, and
//! the spectral functions built on them.

use super::matrix::{inner, ComplexMatrix, C64, I};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `H = V diag(λ) V†` of a Hermitian matrix, with
/// eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn decompose(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::validation("eigendecomposition needs a square matrix"));
        }
        if !h.is_hermitian() {
            return Err(Error::validation(format!(
                "matrix is not Hermitian (residual {:.3e})",
                h.hermitian_residual()
            )));
        }
        Ok(jacobi(h.hermitian_part()))
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(g(λ)) V†`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let weights: Vec<f64> = self.values.iter().map(|&l| g(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .filter(|&k| weights[k] != 0.0)
                .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * weights[k])
                .sum()
        })
    }

    /// Number of eigenvalues whose magnitude exceeds `rtol · max|λ|`.
    pub fn rank(&self, rtol: f64) -> usize {
        let cut = rtol * self.max_abs_value();
        self.values.iter().filter(|v| v.abs() > cut).count()
    }
}

fn jacobi(mut a: ComplexMatrix) -> HermitianEigen {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale || off == 0.0 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// One Jacobi rotation annihilating `a[p,q]`: a phase rotation making the
/// pivot real, followed by a real plane rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if abs < 1e-300 || abs <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / abs;
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // columns: M ← M W with W = [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    for k in 0..n {
        for m in [&mut *a, &mut *v] {
            let mp = m[(k, p)];
            let mq = m[(k, q)];
            m[(k, p)] = mp * c - mq * ph_conj * s;
            m[(k, q)] = mp * s + mq * ph_conj * c;
        }
    }
    // rows: A ← W† A
    for k in 0..n {
        let rp = a[(p, k)];
        let rq = a[(q, k)];
        a[(p, k)] = rp * c - rq * phase * s;
        a[(q, k)] = rp * s + rq * phase * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Eigendecomposition of a normal matrix `M = V diag(λ) V†`.
///
/// The Hermitian part fixes the eigenvectors except inside clusters of
/// (nearly) equal real parts; those clusters are split with the
/// anti-Hermitian part `(M − M†)/(2i)` restricted to the cluster.
pub fn normal_eigen(m: &ComplexMatrix) -> Result<(Vec<C64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::validation("eigendecomposition needs a square matrix"));
    }
    let n = m.rows();
    let scale = m.max_abs().max(1.0);
    let herm = m.hermitian_part();
    let anti = ComplexMatrix::from_fn(n, n, |i, j| {
        (m[(i, j)] - m[(j, i)].conj()) / (2.0 * I)
    });
    let base = HermitianEigen::decompose(&herm)?;
    let mut vectors = base.vectors.clone();

    let cluster_tol = 1e-6 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && base.values[end] - base.values[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<Vec<C64>> = (start..end).map(|k| base.vector(k)).collect();
            let q = ComplexMatrix::from_columns(&cols);
            let restricted = &(&q.adjoint() * &anti) * &q;
            let split = HermitianEigen::decompose(&restricted.hermitian_part())?;
            let rotated = &q * &split.vectors;
            for (offset, k) in (start..end).enumerate() {
                vectors.set_column(k, &rotated.column(offset));
            }
        }
        start = end;
    }

    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let vk = vectors.column(k);
        let mv = m.mul_vec(&vk);
        let lambda = inner(&vk, &mv);
        let resid = mv
            .iter()
            .zip(&vk)
            .map(|(a, b)| (a - lambda * b).norm())
            .fold(0.0, f64::max);
        if resid > 1e-9 * scale {
            return Err(Error::validation(format!(
                "matrix is not normal (eigen residual {resid:.3e})"
            )));
        }
        values.push(lambda);
    }
    Ok((values, vectors))
}

/// Positive-semidefiniteness test: `ok` iff `λ_min ≥ −tol · max(1, max|H|)`.
pub fn psd_check(h: &ComplexMatrix, tol: f64) -> Result<(bool, f64)> {
    let eig = HermitianEigen::decompose(h)?;
    let min = eig.min_value();
    Ok((min >= -tol * h.max_abs().max(1.0), min))
}

/// Principal square root of a PSD Hermitian matrix.
///
/// Eigenvalues in `[−1e−8·s, 1e−10·s]` (`s = max(1, max|H|)`) are treated as
/// zero; anything more negative is rejected.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (eig, cut) = psd_spectrum(h)?;
    Ok(eig.map(|l| if l > cut { l.sqrt() } else { 0.0 }))
}

/// Pseudo-inverse of the PSD square root, `(H^½)⁺`, with the same zero
/// threshold as [`psd_sqrt`].
pub fn psd_sqrt_pinv(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (eig, cut) = psd_spectrum(h)?;
    Ok(eig.map(|l| if l > cut { 1.0 / l.sqrt() } else { 0.0 }))
}

fn psd_spectrum(h: &ComplexMatrix) -> Result<(HermitianEigen, f64)> {
    let eig = HermitianEigen::decompose(h)?;
    let s = h.max_abs().max(1.0);
    if eig.min_value() < -1e-8 * s {
        return Err(Error::validation(format!(
            "matrix has a materially negative eigenvalue {:.3e}",
            eig.min_value()
        )));
    }
    Ok((eig, 1e-10 * s))
}

/// Relative singular-value cutoff used by [`pseudo_inverse`].
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Moore–Penrose pseudo-inverse.
pub fn pseudo_inverse(m: &ComplexMatrix) -> ComplexMatrix {
    pseudo_inverse_rcond(m, DEFAULT_RCOND)
}

/// Moore–Penrose pseudo-inverse, discarding singular values below
/// `rcond · σ_max`.
///
/// Singular triples come from the Hermitian dilation `[[0, M], [M†, 0]]`,
/// whose eigenpairs are `±σ` with vectors `(u; ±v)/√2`. This keeps absolute
/// accuracy on small singular values, unlike forming `M†M`.
pub fn pseudo_inverse_rcond(m: &ComplexMatrix, rcond: f64) -> ComplexMatrix {
    let (r, c) = (m.rows(), m.cols());
    let n = r + c;
    let dilation = ComplexMatrix::from_fn(n, n, |i, j| match (i < r, j < r) {
        (true, false) => m[(i, j - r)],
        (false, true) => m[(j, i - r)].conj(),
        _ => C64::new(0.0, 0.0),
    });
    let eig = jacobi(dilation);
    let sigma_max = eig.max_abs_value();
    let cut = rcond * sigma_max;
    let mut out = ComplexMatrix::zeros(c, r);
    if sigma_max == 0.0 {
        return out;
    }
    for (k, &sigma) in eig.values.iter().enumerate() {
        if sigma <= cut {
            continue;
        }
        // M⁺ += v u† / σ with u = √2·a, v = √2·b
        let w = 2.0 / sigma;
        for i in 0..c {
            let b = eig.vectors[(r + i, k)];
            for j in 0..r {
                out[(i, j)] += b * eig.vectors[(j, k)].conj() * w;
            }
        }
    }
    out
}
