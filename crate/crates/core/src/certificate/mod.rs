//! Optimal unambiguous tester for unitary channel pairs: the target Gram
//! matrix with its closed-form pseudo-inverse, the sequential construction of
//! probe and interleaved unitaries, and the zero-error measurement.

mod gram;
mod povm;
mod tester;

use serde::Serialize;

use crate::bounds::upper_bound_unitary;
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

pub use gram::{
    gram_checks, gram_model, nu_checks, verify_gram_certificate, verify_nu_condition, Branch,
    GramModel, NuReport, NuStep, BRANCH_TOL,
};
pub use povm::{build_povm, evaluate_tester, TesterEvaluation};
pub use tester::{construct_tester, TesterCertificate};

/// One named residual compared against a threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// An ordered list of checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn push(&mut self, name: impl Into<String>, residual: f64, threshold: f64) {
        self.0.push(Check {
            name: name.into(),
            residual,
            threshold,
            passed: residual <= threshold,
        });
    }

    pub fn extend(&mut self, other: Checks) {
        self.0.extend(other.0);
    }

    pub fn passed(&self) -> bool {
        self.0.iter().all(|c| c.passed)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Check> {
        self.0.iter()
    }

    /// Error naming the first failed check, if any.
    pub fn ensure(&self) -> Result<()> {
        match self.0.iter().find(|c| !c.passed) {
            Some(c) => Err(Error::verification(c.name.clone(), c.residual, c.threshold)),
            None => Ok(()),
        }
    }
}

/// Full certification run for one unitary pair and `N`.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub n: usize,
    pub t: f64,
    pub c: Option<f64>,
    pub branch: Option<Branch>,
    pub d_prime: usize,
    /// Closed-form `uP(N)`.
    pub expected_average: f64,
    pub evaluation: Option<TesterEvaluation>,
    pub checks: Checks,
    pub passed: bool,
    /// First hard failure, when the pipeline stopped early.
    pub error: Option<String>,
    #[serde(skip)]
    pub certificate: Option<TesterCertificate>,
}

/// Run Gram model → Gram certificate → step condition → tester → POVM →
/// evaluation. Verification failures are recorded in the report; only
/// invalid input is returned as an error.
pub fn certify(
    u0: &ComplexMatrix,
    u1: &ComplexMatrix,
    n: usize,
    d_prime: Option<usize>,
) -> Result<CertificationReport> {
    let analysis = crate::fmap::analyze_unitary_pair(u0, u1)?;
    let t = analysis.t;
    let expected_average = upper_bound_unitary(t.clamp(0.0, 1.0), n)?;
    let d_prime = d_prime.unwrap_or(n + 2);
    let mut report = CertificationReport {
        n,
        t,
        c: None,
        branch: None,
        d_prime,
        expected_average,
        evaluation: None,
        checks: Checks::default(),
        passed: false,
        error: None,
        certificate: None,
    };
    let u = match analysis.u {
        Some(u) if t < 1.0 - 1e-12 => u,
        _ => {
            return Err(Error::validation(format!(
                "t = {t}: the tester construction needs 0 < t < 1 \
                 (t = 0 is perfectly distinguishable, t = 1 indistinguishable)"
            )))
        }
    };

    let model = gram_model(t, u, n)?;
    report.c = Some(model.c);
    report.branch = Some(model.branch);
    report.checks.extend(gram_checks(&model)?);
    report.checks.extend(nu_checks(&model)?.checks);

    let outcome = construct_tester(u0, u1, n, d_prime).and_then(|mut cert| {
        build_povm(&mut cert, &model)?;
        Ok(cert)
    });
    match outcome {
        Ok(cert) => {
            report.checks.extend(cert.residuals.clone());
            let eval = evaluate_tester(&cert)?;
            let x = model.x();
            let succ = eval
                .success
                .iter()
                .zip(&x)
                .map(|(s, x)| (s - x).abs())
                .fold(0.0, f64::max);
            report.checks.push("success_equals_x", succ, 1e-9);
            report.checks.push("wrong_answer_max", eval.max_error.max(0.0), 1e-9);
            report.checks.push(
                "average_equals_upper_bound",
                (eval.average - expected_average).abs(),
                1e-9,
            );
            report.evaluation = Some(eval);
            report.certificate = Some(cert);
        }
        Err(e @ Error::Verification { .. }) => report.error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    report.passed = report.error.is_none() && report.checks.passed();
    Ok(report)
}
