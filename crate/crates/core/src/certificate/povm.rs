use serde::Serialize;

use super::{Checks, GramModel, TesterCertificate};
use crate::error::{Error, Result};
use crate::numerics::matrix::{gram, outer, sandwich};
use crate::numerics::{pseudo_inverse, psd_check, ComplexMatrix, C64};

const PSD_TOL: f64 = 1e-9;
const RANGE_TOL: f64 = 1e-6;

/// Outcome probabilities of the tester on its own final states.
#[derive(Clone, Debug, Serialize)]
pub struct TesterEvaluation {
    /// `P(k|k)`.
    pub success: Vec<f64>,
    /// `errors[j][k] = P(j|k)` for `j ≠ k` (zero on the diagonal).
    pub errors: Vec<Vec<f64>>,
    /// `P(N+1|k)`.
    pub inconclusive: Vec<f64>,
    pub average: f64,
    pub max_error: f64,
}

/// Attach the zero-error measurement `Πₘ = xₘ|ψ̃ₘ⟩⟨ψ̃ₘ|`, `Π_{N+1} = I − ΣΠₘ`,
/// where `ψ̃ₘ` are the dual vectors (columns of `ΨG⁺`).
pub fn build_povm(cert: &mut TesterCertificate, model: &GramModel) -> Result<()> {
    if model.n != cert.n {
        return Err(Error::validation(format!(
            "model order {} does not match tester order {}",
            model.n, cert.n
        )));
    }
    let g = gram(&cert.psi);
    let gp = pseudo_inverse(&g);
    let proj = &gp * &g;
    let in_range: Vec<bool> = (0..=cert.n).map(|i| (proj[(i, i)].re - 1.0).abs() <= RANGE_TOL).collect();
    if model.branch == super::Branch::Regular && in_range.iter().any(|&b| !b) {
        return Err(Error::verification("regular_gram_full_rank", 1.0, 0.0));
    }
    let x: Vec<f64> = model
        .x()
        .into_iter()
        .zip(&in_range)
        .map(|(x, &keep)| if keep { x } else { 0.0 })
        .collect();

    let (povm, mut checks) = povm_from_weights(&cert.psi, &x)?;

    let dual = &ComplexMatrix::from_columns(&cert.psi) * &gp;
    let mut dual_res: f64 = 0.0;
    for i in (0..=cert.n).filter(|&i| in_range[i]) {
        let di = dual.column(i);
        for (j, pj) in cert.psi.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            dual_res = dual_res.max((crate::numerics::matrix::inner(&di, pj) - want).norm());
        }
    }
    checks.push("dual_vectors", dual_res, 1e-8);

    let gram_side = &g - &ComplexMatrix::diag_real(&x);
    let (_, min_eig) = psd_check(&gram_side, PSD_TOL)?;
    checks.push("gram_minus_x_psd", (-min_eig).max(0.0), PSD_TOL);

    cert.residuals.extend(checks);
    cert.povm = povm;
    cert.x = x;
    cert.residuals.ensure()
}

/// Measurement with weights `x` on the dual vectors of `psi`, plus the
/// positivity and completeness checks.
pub(crate) fn povm_from_weights(
    psi: &[Vec<C64>],
    x: &[f64],
) -> Result<(Vec<ComplexMatrix>, Checks)> {
    let dim = psi[0].len();
    let g = gram(psi);
    let dual = &ComplexMatrix::from_columns(psi) * &pseudo_inverse(&g);
    let mut povm: Vec<ComplexMatrix> = x
        .iter()
        .enumerate()
        .map(|(m, &xm)| {
            let d = dual.column(m);
            outer(&d, &d).scale_real(xm)
        })
        .collect();
    let mut rest = ComplexMatrix::identity(dim);
    for p in &povm {
        rest = &rest - p;
    }
    let mut checks = Checks::default();
    let (_, min_eig) = psd_check(&rest, PSD_TOL)?;
    checks.push("inconclusive_psd", (-min_eig).max(0.0), PSD_TOL);
    let neg_weight = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
    checks.push("outcome_weights_nonnegative", neg_weight, 0.0);
    povm.push(rest);
    let mut total = ComplexMatrix::zeros(dim, dim);
    for p in &povm {
        total = &total + p;
    }
    checks.push("completeness", total.max_abs_diff(&ComplexMatrix::identity(dim)), 1e-10);
    let herm = povm.iter().map(|p| p.hermitian_residual()).fold(0.0, f64::max);
    checks.push("povm_hermitian", herm, 1e-10);
    Ok((povm, checks))
}

/// `P(j|k) = ⟨ψₖ|Πⱼ|ψₖ⟩` for the attached measurement.
pub fn evaluate_tester(cert: &TesterCertificate) -> Result<TesterEvaluation> {
    let n = cert.n;
    if cert.povm.len() != n + 2 {
        return Err(Error::validation("tester has no measurement attached; call build_povm"));
    }
    let prob = |j: usize, k: usize| sandwich(&cert.psi[k], &cert.povm[j], &cert.psi[k]).re;
    let success: Vec<f64> = (0..=n).map(|k| prob(k, k)).collect();
    let errors: Vec<Vec<f64>> = (0..=n)
        .map(|j| (0..=n).map(|k| if j == k { 0.0 } else { prob(j, k) }).collect())
        .collect();
    let inconclusive = (0..=n).map(|k| prob(n + 1, k)).collect();
    let max_error = errors
        .iter()
        .enumerate()
        .flat_map(|(j, row)| row.iter().enumerate().filter(move |(k, _)| *k != j).map(|(_, v)| v.abs()))
        .fold(0.0, f64::max);
    let average = success.iter().sum::<f64>() / (n + 1) as f64;
    Ok(TesterEvaluation {
        success,
        errors,
        inconclusive,
        average,
        max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::upper_bound_unitary;
    use crate::certificate::{construct_tester, gram_model};
    use crate::fmap::eigenphase_pair;

    fn tester(x: f64, n: usize) -> (TesterCertificate, GramModel) {
        let (u0, u1) = eigenphase_pair(x);
        let mut cert = construct_tester(&u0, &u1, n, n + 2).unwrap();
        let model = gram_model(cert.t, cert.u, n).unwrap();
        build_povm(&mut cert, &model).unwrap();
        (cert, model)
    }

    #[test]
    fn success_matches_weights() {
        for n in 1..=6 {
            let (cert, model) = tester(0.4, n);
            let eval = evaluate_tester(&cert).unwrap();
            for (s, x) in eval.success.iter().zip(model.x()) {
                assert!((s - x).abs() < 1e-9, "n={n}: {s} vs {x}");
            }
            assert!(eval.max_error < 1e-9);
            let up = upper_bound_unitary(cert.t, n).unwrap();
            assert!((eval.average - up).abs() < 1e-9);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (cert, _) = tester(0.3, 4);
        let eval = evaluate_tester(&cert).unwrap();
        for k in 0..=4 {
            let errs: f64 = (0..=4).map(|j| eval.errors[j][k]).sum();
            let total = eval.success[k] + eval.inconclusive[k] + errs;
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn raised_weights_fail_on_both_sides() {
        let (cert, model) = tester(0.4, 3);
        let x: Vec<f64> = model.x().iter().map(|v| v + 1e-3).collect();
        let (_, checks) = povm_from_weights(&cert.psi, &x).unwrap();
        assert!(!checks.passed());
        let g = gram(&cert.psi);
        let (ok, _) = psd_check(&(&g - &ComplexMatrix::diag_real(&x)), PSD_TOL).unwrap();
        assert!(!ok);
    }

    #[test]
    fn lowered_weights_pass_on_both_sides() {
        let (cert, model) = tester(0.4, 3);
        let x: Vec<f64> = model.x().iter().map(|v| v - 1e-3).collect();
        let (_, checks) = povm_from_weights(&cert.psi, &x).unwrap();
        assert!(checks.passed());
        let g = gram(&cert.psi);
        let (ok, _) = psd_check(&(&g - &ComplexMatrix::diag_real(&x)), PSD_TOL).unwrap();
        assert!(ok);
    }

    #[test]
    fn evaluation_needs_measurement() {
        let (u0, u1) = eigenphase_pair(0.4);
        let cert = construct_tester(&u0, &u1, 2, 4).unwrap();
        assert!(evaluate_tester(&cert).is_err());
    }
}
