use serde::Serialize;

use super::{gram_model, Checks, GramModel};
use crate::error::{Error, Result};
use crate::fmap::analyze_unitary_pair;
use crate::numerics::matrix::{
    basis_vector, complete_orthonormal_basis, gram, inner, kron_vec, norm, orthogonal_residual,
};
use crate::numerics::{psd_sqrt_pinv, ComplexMatrix, HermitianEigen, C64};

const GRAM_TOL: f64 = 1e-9;
const PRESERVE_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

/// Probe, interleaved unitaries and final states of the tester.
#[derive(Clone, Debug, Serialize)]
pub struct TesterCertificate {
    pub n: usize,
    pub d: usize,
    pub d_prime: usize,
    pub t: f64,
    pub u: C64,
    /// `|+⟩ ⊗ |0⟩`.
    pub probe: Vec<C64>,
    /// `D⁽²⁾ … D⁽ᴺ⁾`.
    pub d_list: Vec<ComplexMatrix>,
    /// Final states `ψ⁽ᴺ⁾₀ … ψ⁽ᴺ⁾_N`.
    pub psi: Vec<Vec<C64>>,
    /// `psi_steps[n − 1][k] = ψ⁽ⁿ⁾ₖ` for `n = 1…N`, `k = 0…n`.
    pub psi_steps: Vec<Vec<Vec<C64>>>,
    pub gram_final: ComplexMatrix,
    /// Measurement `Π₀ … Π_{N+1}`, filled by [`super::build_povm`].
    pub povm: Vec<ComplexMatrix>,
    /// `x₀ … x_N`, filled by [`super::build_povm`].
    pub x: Vec<f64>,
    pub residuals: Checks,
}

/// Build the tester for `N` uses of the pair `(U₀, U₁)` with ancilla
/// dimension `d_prime`.
///
/// `U₁` is divided by `λ₀` (a global phase, hence the same channel) so that
/// `⟨+|U₀†U₁|+⟩ = tu` with `u² = ω`.
pub fn construct_tester(
    u0: &ComplexMatrix,
    u1: &ComplexMatrix,
    n: usize,
    d_prime: usize,
) -> Result<TesterCertificate> {
    let pair = analyze_unitary_pair(u0, u1)?;
    let t = pair.t;
    let u = match pair.u {
        Some(u) if t < 1.0 - 1e-12 => u,
        _ => return Err(Error::validation(format!("tester needs 0 < t < 1, got t = {t}"))),
    };
    let d = pair.dim;
    let dim = d * d_prime;
    if dim < n + 2 {
        return Err(Error::validation(format!(
            "d·d' = {dim} is below N + 2 = {}; increase d_prime",
            n + 2
        )));
    }
    let model = gram_model(t, u, n)?;

    let u1n = u1.scale(pair.lambda0.conj());
    let u_tilde = &u0.adjoint() * &u1n;
    let id = ComplexMatrix::identity(d_prime);
    let big0 = u0.kron(&id);
    let big1 = u1n.kron(&id);
    let anc0 = basis_vector(d_prime, 0);
    let probe = kron_vec(&pair.ket_plus, &anc0);
    let target_nu = kron_vec(&u_tilde.adjoint().mul_vec(&pair.ket_plus), &anc0);

    let mut residuals = Checks::default();
    let mut psi = vec![big1.mul_vec(&probe), big0.mul_vec(&probe)];
    let g1 = gram(&psi).max_abs_diff(&model.leading(1).g);
    residuals.push("step_gram_n1", g1, GRAM_TOL);
    check_now(&residuals)?;

    let mut psi_steps = vec![psi.clone()];
    let mut d_list = Vec::new();
    for step in 1..n {
        let sub = model.leading(step);
        let (nu_check, overlap) = next_nu(&psi, &sub, dim)?;
        residuals.push(format!("nu_check_overlap_n{step}"), overlap, 1e-9);
        check_now(&residuals)?;

        let dmat = pair_unitary(&psi[step], &nu_check, &probe, &target_nu, dim)?;
        residuals.push(format!("d_unitary_n{}", step + 1), dmat.unitary_residual(), UNITARY_TOL);

        let before = gram(&psi);
        let mut next: Vec<Vec<C64>> = psi.iter().map(|v| big1.mul_vec(&dmat.mul_vec(v))).collect();
        next.push(big0.mul_vec(&dmat.mul_vec(&psi[step])));
        let after = gram(&next);
        residuals.push(
            format!("inner_products_preserved_n{}", step + 1),
            after.leading(step + 1).max_abs_diff(&before),
            PRESERVE_TOL,
        );
        residuals.push(
            format!("step_gram_n{}", step + 1),
            after.max_abs_diff(&model.leading(step + 1).g),
            GRAM_TOL,
        );
        check_now(&residuals)?;
        psi_steps.push(next.clone());
        psi = next;
        d_list.push(dmat);
    }

    let norm_dev = psi.iter().map(|v| (norm(v) - 1.0).abs()).fold(0.0, f64::max);
    residuals.push("state_norms", norm_dev, 1e-10);
    let gram_final = gram(&psi);
    Ok(TesterCertificate {
        n,
        d,
        d_prime,
        t,
        u,
        probe,
        d_list,
        psi,
        psi_steps,
        gram_final,
        povm: Vec::new(),
        x: Vec::new(),
        residuals,
    })
}

fn check_now(checks: &Checks) -> Result<()> {
    checks.ensure()
}

/// `ν̌ = Θν″ + ν̌′` for the step `n → n + 1`, and `|⟨ν̌|ψₙ⟩ − tu|`.
fn next_nu(psi: &[Vec<C64>], sub: &GramModel, dim: usize) -> Result<(Vec<C64>, f64)> {
    let n = sub.n;
    let big_psi = ComplexMatrix::from_columns(psi);
    let half_pinv = psd_sqrt_pinv(&sub.g)?;
    let theta = &big_psi * &half_pinv;
    let nu_prime: Vec<C64> = sub.nu_prime().iter().map(|z| z.conj()).collect();
    let nu2 = half_pinv.mul_vec(&nu_prime);
    let nu2_sq = inner(&nu2, &nu2).re;
    if nu2_sq > 1.0 + 1e-9 {
        return Err(Error::verification(format!("nu_norm_le_1_n{n}"), nu2_sq - 1.0, 1e-9));
    }

    let mut nu = theta.mul_vec(&nu2);
    let rest = (1.0 - nu2_sq).max(0.0).sqrt();
    if rest > 0.0 {
        let span = range_basis(psi, &sub.g)?;
        let fill = (0..dim)
            .find_map(|i| orthogonal_residual(&basis_vector(dim, i), &span, 1e-6))
            .ok_or_else(|| {
                Error::validation(format!("no vector orthogonal to the states at step {n}"))
            })?;
        for (a, b) in nu.iter_mut().zip(&fill) {
            *a += b * rest;
        }
    }
    let target = sub.u * sub.t;
    let overlap = (inner(&nu, &psi[n]) - target).norm();
    Ok((nu, overlap))
}

/// Orthonormal basis of `span{ψₖ}`, led by the spectrum of their Gram matrix.
fn range_basis(psi: &[Vec<C64>], g: &ComplexMatrix) -> Result<Vec<Vec<C64>>> {
    let eig = HermitianEigen::decompose(g)?;
    let cut = 1e-10 * g.max_abs().max(1.0);
    let big_psi = ComplexMatrix::from_columns(psi);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for k in 0..eig.dim() {
        let l = eig.values[k];
        if l > cut {
            let v: Vec<C64> = big_psi
                .mul_vec(&eig.vector(k))
                .into_iter()
                .map(|z| z / l.sqrt())
                .collect();
            // re-orthogonalize against accumulated rounding
            if let Some(w) = orthogonal_residual(&v, &basis, 0.5) {
                basis.push(w);
            }
        }
    }
    // In the singular branch the states are dependent only up to rounding;
    // pick up those tiny leftovers so the fill is orthogonal to every ψₖ.
    for p in psi {
        if let Some(w) = orthogonal_residual(p, &basis, 1e-14) {
            basis.push(w);
        }
    }
    Ok(basis)
}

/// Unitary with `a₁ ↦ b₁` and `a₂ ↦ b₂`, given `⟨a₁|a₂⟩ = ⟨b₁|b₂⟩`.
fn pair_unitary(
    a1: &[C64],
    a2: &[C64],
    b1: &[C64],
    b2: &[C64],
    dim: usize,
) -> Result<ComplexMatrix> {
    let orthonormal_pair = |x: &[C64], y: &[C64]| -> Result<Vec<Vec<C64>>> {
        let first: Vec<C64> = x.iter().map(|z| z / norm(x)).collect();
        let second = orthogonal_residual(y, std::slice::from_ref(&first), 1e-9)
            .ok_or_else(|| Error::validation("pair is linearly dependent (t = 1?)"))?;
        Ok(complete_orthonormal_basis(&[first, second], dim))
    };
    let e = orthonormal_pair(a1, a2)?;
    let f = orthonormal_pair(b1, b2)?;
    if e.len() != dim || f.len() != dim {
        return Err(Error::Consistency("basis completion came up short".into()));
    }
    let em = ComplexMatrix::from_columns(&e);
    let fm = ComplexMatrix::from_columns(&f);
    Ok(&fm * &em.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmap::eigenphase_pair;

    #[test]
    fn first_step_gram() {
        let (u0, u1) = eigenphase_pair(0.4);
        let cert = construct_tester(&u0, &u1, 1, 3).unwrap();
        let t = cert.t;
        let u = cert.u;
        assert!((cert.gram_final[(0, 1)] - u.conj() * t).norm() < 1e-12);
        assert!((cert.gram_final[(1, 0)] - u * t).norm() < 1e-12);
    }

    #[test]
    fn fig4_order_three() {
        let (u0, u1) = eigenphase_pair(0.4);
        let cert = construct_tester(&u0, &u1, 3, 5).unwrap();
        let model = gram_model(cert.t, cert.u, 3).unwrap();
        assert!(cert.gram_final.max_abs_diff(&model.g) < 1e-9);
        for d in &cert.d_list {
            assert!(d.unitary_residual() <= 1e-10);
        }
        assert_eq!(cert.d_list.len(), 2);
        assert_eq!(cert.psi_steps.len(), 3);
        for (i, states) in cert.psi_steps.iter().enumerate() {
            assert_eq!(states.len(), i + 2);
            let sub = model.leading(i + 1);
            assert!(gram(states).max_abs_diff(&sub.g) < 1e-9);
        }
        assert!(cert.residuals.passed());
    }

    #[test]
    fn singular_branch_construction() {
        // t = cos(θ/2) = √(4/6)
        let t: f64 = (4.0f64 / 6.0).sqrt();
        let theta = 2.0 * t.acos();
        let (u0, u1) = eigenphase_pair(theta / std::f64::consts::PI);
        let cert = construct_tester(&u0, &u1, 4, 6).unwrap();
        let model = gram_model(cert.t, cert.u, 4).unwrap();
        assert_eq!(model.branch, super::super::Branch::Singular);
        assert!(cert.gram_final.max_abs_diff(&model.g) < 1e-9);
    }

    #[test]
    fn ancilla_too_small() {
        let (u0, u1) = eigenphase_pair(0.4);
        assert!(construct_tester(&u0, &u1, 5, 2).is_err());
    }

    #[test]
    fn trivial_pairs_rejected() {
        let (u0, u1) = eigenphase_pair(1.0);
        assert!(construct_tester(&u0, &u1, 2, 4).is_err());
        assert!(construct_tester(&u0, &u0, 2, 4).is_err());
    }
}
