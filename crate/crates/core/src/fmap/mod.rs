//! Tradeoff maps between identifying the first and the second channel, and
//! the eigenvalue geometry of unitary pairs.

mod curve;
mod unitary;

pub use curve::{validate_curve, CurveKind, CurveReport, TradeoffCurve};
pub use unitary::{analyze_unitary_pair, eigenphase_pair, UnitaryPairAnalysis};
