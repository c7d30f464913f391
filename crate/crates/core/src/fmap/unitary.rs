use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::matrix::{inner, sandwich};
use crate::numerics::{distance_to_polygon, normal_eigen, ComplexMatrix, C64};

/// Below this polygon distance the pair is treated as perfectly
/// distinguishable and `u` is undefined.
const T_ZERO: f64 = 1e-12;

/// Eigenvalue geometry of `Ũ = U₀†U₁`.
#[derive(Clone, Debug, Serialize)]
pub struct UnitaryPairAnalysis {
    pub dim: usize,
    /// Eigenvalues of `Ũ`, normalized to unit modulus.
    pub eigenvalues: Vec<C64>,
    /// Distance from the origin to the convex hull of the eigenvalues.
    pub t: f64,
    /// Indices of the eigenvalues spanning the closest hull edge.
    pub edge: (usize, usize),
    pub lambda0: C64,
    pub lambda1: C64,
    /// `λ₁/λ₀`.
    pub omega: C64,
    /// Probe minimizing `|⟨+|Ũ|+⟩|`; for an edge `(|λ₀⟩ + |λ₁⟩)/√2`.
    pub ket_plus: Vec<C64>,
    /// `(1 + ω)/(2t)`, the phase of `⟨+|Ũ|+⟩/λ₀`; `None` when `t = 0`.
    pub u: Option<C64>,
}

impl UnitaryPairAnalysis {
    /// `⟨+|Ũ|+⟩`; equals `λ₀·t·u` when `t > 0`.
    pub fn overlap(&self, u0: &ComplexMatrix, u1: &ComplexMatrix) -> C64 {
        let ut = &u0.adjoint() * u1;
        sandwich(&self.ket_plus, &ut, &self.ket_plus)
    }
}

/// Analyze a unitary pair `(U₀, U₁)`.
pub fn analyze_unitary_pair(u0: &ComplexMatrix, u1: &ComplexMatrix) -> Result<UnitaryPairAnalysis> {
    if !u0.is_square() || !u1.is_square() {
        return Err(Error::validation("unitaries must be square"));
    }
    if u0.rows() != u1.rows() {
        return Err(Error::validation(format!(
            "dimension mismatch: U0 is {}x{}, U1 is {}x{}",
            u0.rows(),
            u0.cols(),
            u1.rows(),
            u1.cols()
        )));
    }
    for (name, m) in [("U0", u0), ("U1", u1)] {
        if !m.is_unitary() {
            return Err(Error::validation(format!(
                "{name} is not unitary (residual {:.3e})",
                m.unitary_residual()
            )));
        }
    }
    let dim = u0.rows();
    let ut = &u0.adjoint() * u1;
    let (values, vectors) = normal_eigen(&ut)?;
    let eigenvalues: Vec<C64> = values.iter().map(|l| l / l.norm()).collect();
    let poly = distance_to_polygon(&eigenvalues)?;

    let mut ket_plus = vec![C64::new(0.0, 0.0); dim];
    for &(k, w) in &poly.weights {
        let amp = w.max(0.0).sqrt();
        for (x, v) in ket_plus.iter_mut().zip(vectors.column(k)) {
            *x += v * amp;
        }
    }
    let nrm = inner(&ket_plus, &ket_plus).re.sqrt();
    ket_plus.iter_mut().for_each(|x| *x /= nrm);

    let (i, j) = poly.edge;
    let lambda0 = eigenvalues[i];
    let lambda1 = eigenvalues[j];
    let omega = lambda1 / lambda0;
    let t = poly.t;
    let u = if t > T_ZERO {
        let u = (C64::new(1.0, 0.0) + omega) / (2.0 * t);
        Some(u / u.norm())
    } else {
        None
    };
    Ok(UnitaryPairAnalysis {
        dim,
        eigenvalues,
        t,
        edge: poly.edge,
        lambda0,
        lambda1,
        omega,
        ket_plus,
        u,
    })
}

/// The qubit pair `(I, diag(1, e^{iπx}))`.
pub fn eigenphase_pair(omega_over_pi: f64) -> (ComplexMatrix, ComplexMatrix) {
    let phase = C64::from_polar(1.0, std::f64::consts::PI * omega_over_pi);
    (
        ComplexMatrix::identity(2),
        ComplexMatrix::diag(&[C64::new(1.0, 0.0), phase]),
    )
}
