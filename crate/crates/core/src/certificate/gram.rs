use serde::Serialize;

use super::Checks;
use crate::bounds::unitary_c;
use crate::error::{Error, Result};
use crate::numerics::matrix::sandwich;
use crate::numerics::{pseudo_inverse, psd_check, ComplexMatrix, HermitianEigen, C64};

/// `|c − t|` at or below which the Gram matrix is treated as singular.
pub const BRANCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `c ≠ t`: `G̃` is nonsingular.
    Regular,
    /// `c = t`: `G̃` is singular for `n ≥ 3`.
    Singular,
}

/// Target Gram matrix `G̃⁽ⁿ⁾ = Σ(1 − tcᵢ)|i⟩⟨i| + t|μ⟩⟨μ|` with
/// `μᵢ = uⁱ√cᵢ`, `cᵢ = c` for even `i` and `1/c` for odd `i`, and its
/// closed-form pseudo-inverse.
#[derive(Clone, Debug, Serialize)]
pub struct GramModel {
    pub n: usize,
    pub t: f64,
    pub u: C64,
    pub c: f64,
    pub c_list: Vec<f64>,
    pub g: ComplexMatrix,
    pub mu: Vec<C64>,
    pub branch: Branch,
    pub m: usize,
    /// `a₀ … a₄` of the pseudo-inverse pattern.
    pub a: [f64; 5],
    /// Projector onto the range of `G̃`.
    pub xi: ComplexMatrix,
}

/// Gram model for `N` channels; `c` comes from the unitary closed form.
pub fn gram_model(t: f64, u: C64, n: usize) -> Result<GramModel> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::validation(format!("t = {t} must lie in (0, 1)")));
    }
    if (u.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::validation(format!("|u| = {} (expected 1)", u.norm())));
    }
    if n == 0 {
        return Err(Error::validation("N must be at least 1"));
    }
    let c = unitary_c(t, n);
    Ok(GramModel::build(t, u, n, c))
}

fn c_i(c: f64, i: usize) -> f64 {
    if i.is_multiple_of(2) {
        c
    } else {
        1.0 / c
    }
}

/// `uᵏ` for signed `k`.
fn upow(u: C64, k: i64) -> C64 {
    if k >= 0 {
        u.powu(k as u32)
    } else {
        u.conj().powu((-k) as u32)
    }
}

impl GramModel {
    fn build(t: f64, u: C64, n: usize, c: f64) -> Self {
        let (branch, c) = if (c - t).abs() <= BRANCH_TOL {
            (Branch::Singular, t)
        } else {
            (Branch::Regular, c)
        };
        let c_list: Vec<f64> = (0..=n).map(|i| c_i(c, i)).collect();
        let mu: Vec<C64> = (0..=n).map(|i| upow(u, i as i64) * c_list[i].sqrt()).collect();
        let g = ComplexMatrix::from_fn(n + 1, n + 1, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                mu[i] * mu[j].conj() * t
            }
        });
        let m = n.div_ceil(2);
        let a = coefficients(t, c, n, m, branch);
        let xi = match branch {
            Branch::Regular => ComplexMatrix::identity(n + 1),
            Branch::Singular => singular_projector(u, n, m),
        };
        GramModel {
            n,
            t,
            u,
            c,
            c_list,
            g,
            mu,
            branch,
            m,
            a,
            xi,
        }
    }

    /// Model of order `k + 1` with the same `c`; its matrix is the leading
    /// principal submatrix of this one.
    pub fn leading(&self, k: usize) -> GramModel {
        GramModel::build(self.t, self.u, k, self.c)
    }

    /// `xᵢ = 1 − t·cᵢ`.
    pub fn x(&self) -> Vec<f64> {
        self.c_list.iter().map(|ci| 1.0 - self.t * ci).collect()
    }

    /// `G̃⁺` assembled from `a₀ … a₄`.
    pub fn closed_form_pinv(&self) -> ComplexMatrix {
        let [a0, a1, a2, a3, a4] = self.a;
        ComplexMatrix::from_fn(self.n + 1, self.n + 1, |i, j| {
            let coef = match (i == j, i % 2, j % 2) {
                (true, 0, _) => a0,
                (true, _, _) => a1,
                (false, 0, 0) => a2,
                (false, 1, 1) => a3,
                _ => a4,
            };
            upow(self.u, i as i64 - j as i64) * coef
        })
    }

    /// `⟨ν′| = ⟨n+1|G̃⁽ⁿ⁺¹⁾[|0⟩ … |n⟩]`, as bra entries.
    pub fn nu_prime(&self) -> Vec<C64> {
        let n = self.n;
        let c_next = c_i(self.c, n + 1);
        (0..=n)
            .map(|j| upow(self.u, (n + 1 - j) as i64) * (self.t * (c_next * self.c_list[j]).sqrt()))
            .collect()
    }
}

fn coefficients(t: f64, c: f64, n: usize, m: usize, branch: Branch) -> [f64; 5] {
    let (nf, mf) = (n as f64, m as f64);
    let f1 = |l: f64| mf * t * (1.0 - c * c) + (1.0 + l * t * c) * (c - t);
    let ci = 1.0 / c;
    let f2 = |l: f64| (nf - mf + 1.0) * t * (1.0 - ci * ci) + (1.0 + l * t * ci) * (ci - t);
    let a0 = f1(nf - 1.0) / ((1.0 - t * c) * f1(nf));
    let a4 = -t * c / f1(nf);
    match branch {
        Branch::Regular => [
            a0,
            f2(nf - 1.0) / ((1.0 - t * ci) * f2(nf)),
            -t * c * (c - t) / ((1.0 - t * c) * f1(nf)),
            -t * ci * (ci - t) / ((1.0 - t * ci) * f2(nf)),
            a4,
        ],
        Branch::Singular => {
            let a13 = (1.0 + (nf - mf) * t * t) / (mf * mf * (1.0 - t * t));
            [a0, a13, 0.0, a13, a4]
        }
    }
}

/// `Σ_{i=0}^{n−m}|2i⟩⟨2i| + (1/m)Σ_{i,j=1}^{m} u^{2(i−j)}|2i−1⟩⟨2j−1|`.
fn singular_projector(u: C64, n: usize, m: usize) -> ComplexMatrix {
    let mut xi = ComplexMatrix::zeros(n + 1, n + 1);
    for i in 0..=(n - m) {
        xi[(2 * i, 2 * i)] = C64::new(1.0, 0.0);
    }
    for i in 1..=m {
        for j in 1..=m {
            xi[(2 * i - 1, 2 * j - 1)] = upow(u, 2 * (i as i64 - j as i64)) / m as f64;
        }
    }
    xi
}

fn rel_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

/// Residuals of the Gram certificate: `G̃ − diag(1 − tcᵢ) = t|μ⟩⟨μ| ⪰ 0`,
/// closed-form `G̃⁺` against the numeric pseudo-inverse, and `G̃⁺G̃ = Ξ`.
pub fn gram_checks(model: &GramModel) -> Result<Checks> {
    let n1 = model.n + 1;
    let mut checks = Checks::default();
    let x = model.x();
    let diff = &model.g - &ComplexMatrix::diag_real(&x);
    let (_, min_eig) = psd_check(&diff, 1e-9)?;
    checks.push("gram_minus_diag_psd", (-min_eig).max(0.0), 1e-9);
    let rank1 = ComplexMatrix::from_fn(n1, n1, |i, j| model.mu[i] * model.mu[j].conj() * model.t);
    checks.push("gram_minus_diag_rank1", diff.max_abs_diff(&rank1), 1e-10);
    let diag_dev = (0..n1).map(|i| (model.g[(i, i)] - 1.0).norm()).fold(0.0, f64::max);
    checks.push("gram_unit_diagonal", diag_dev, 1e-12);

    let closed = model.closed_form_pinv();
    let numeric = pseudo_inverse(&model.g);
    checks.push("pinv_closed_vs_numeric", rel_diff(&closed, &numeric), 1e-8);
    checks.push("pinv_times_gram_is_xi", (&closed * &model.g).max_abs_diff(&model.xi), 1e-8);
    checks.push("xi_idempotent", (&model.xi * &model.xi).max_abs_diff(&model.xi), 1e-10);
    if model.branch == Branch::Regular {
        let id = ComplexMatrix::identity(n1);
        checks.push("gram_times_pinv_identity", (&model.g * &closed).max_abs_diff(&id), 1e-8);
    } else {
        let expected = n1 - (model.m - 1);
        let rank_g = HermitianEigen::decompose(&model.g)?.rank(1e-9);
        let rank_xi = HermitianEigen::decompose(&model.xi)?.rank(1e-9);
        let off = (rank_g as f64 - expected as f64).abs() + (rank_xi as f64 - expected as f64).abs();
        checks.push("singular_rank", off, 0.5);
    }
    Ok(checks)
}

/// [`gram_checks`], failing on the first residual above its threshold.
pub fn verify_gram_certificate(model: &GramModel) -> Result<Checks> {
    let checks = gram_checks(model)?;
    checks.ensure()?;
    Ok(checks)
}

/// The step condition at one order `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuStep {
    pub n: usize,
    /// `‖⟨ν′|Ξ − ⟨ν′|‖∞`.
    pub xi_residual: f64,
    /// `⟨ν′|G̃⁽ⁿ⁾⁺|ν′⟩` from the closed form.
    pub quad: f64,
    /// The same quadratic form from the numeric pseudo-inverse.
    pub quad_numeric: f64,
    /// `ν′₁²`, equal to `quad` on the singular branch.
    pub nu1_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuReport {
    pub steps: Vec<NuStep>,
    pub checks: Checks,
}

/// Quadratic-form threshold beyond which the condition is a hard failure.
const NU_HARD_TOL: f64 = 1e-6;

/// `⟨ν′|Ξ = ⟨ν′|` and `⟨ν′|G̃⁽ⁿ⁾⁺|ν′⟩ ≤ 1` for `n = 1 … N`.
pub fn nu_checks(model: &GramModel) -> Result<NuReport> {
    let mut steps = Vec::new();
    let mut checks = Checks::default();
    for n in 1..=model.n {
        let sub = model.leading(n);
        let bra = sub.nu_prime();
        let ket: Vec<C64> = bra.iter().map(|z| z.conj()).collect();
        let projected: Vec<C64> = sub.xi.adjoint().mul_vec(&ket);
        let xi_residual = projected
            .iter()
            .zip(&ket)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let quad = sandwich(&ket, &sub.closed_form_pinv(), &ket).re;
        let quad_numeric = sandwich(&ket, &pseudo_inverse(&sub.g), &ket).re;
        let nu1 = model.t * (c_i(model.c, n + 1) * c_i(model.c, 1)).sqrt();
        let step = NuStep {
            n,
            xi_residual,
            quad,
            quad_numeric,
            nu1_sq: nu1 * nu1,
        };
        checks.push(format!("nu_in_range_n{n}"), xi_residual, 1e-10);
        checks.push(format!("nu_quad_le_1_n{n}"), (quad.max(quad_numeric) - 1.0).max(0.0), 1e-9);
        checks.push(format!("nu_quad_closed_vs_numeric_n{n}"), (quad - quad_numeric).abs(), 1e-8);
        if model.branch == Branch::Singular {
            checks.push(format!("nu_quad_singular_identity_n{n}"), (quad - step.nu1_sq).abs(), 1e-9);
        }
        steps.push(step);
    }
    Ok(NuReport { steps, checks })
}

/// [`nu_checks`]; fails when a quadratic form exceeds `1 + 1e−6` or any
/// other residual exceeds its threshold.
pub fn verify_nu_condition(model: &GramModel) -> Result<NuReport> {
    let report = nu_checks(model)?;
    if let Some(step) = report
        .steps
        .iter()
        .find(|s| s.quad.max(s.quad_numeric) > 1.0 + NU_HARD_TOL)
    {
        return Err(Error::verification(
            format!("nu_quad_le_1_n{}", step.n),
            step.quad.max(step.quad_numeric) - 1.0,
            NU_HARD_TOL,
        ));
    }
    report.checks.ensure()?;
    Ok(report)
}
