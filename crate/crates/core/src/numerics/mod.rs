//! Small dense complex linear algebra, planar geometry and scalar optimizers.

pub mod eigen;
pub mod matrix;
pub mod optimize;
pub mod polygon;

pub use eigen::{
    normal_eigen, pseudo_inverse, pseudo_inverse_rcond, psd_check, psd_sqrt, psd_sqrt_pinv,
    HermitianEigen, DEFAULT_RCOND,
};
pub use matrix::{ComplexMatrix, C64};
pub use optimize::{maximize_concave_1d, maximize_grid_refined, Maximum, TieBreak};
pub use polygon::{distance_to_polygon, PolygonResult};
