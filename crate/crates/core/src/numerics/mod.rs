//! Numeric kernels shared by the solvers.

mod eigen;
mod lambert;
mod linalg;
mod search;

pub use eigen::{max_eigenpair, Eigenpair, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL};
pub use lambert::lambert_w0;
pub use linalg::{ComplexVector, HermitianMatrix};
pub use search::{bisect_root, golden_section_max, DEFAULT_BISECT_TOL, DEFAULT_GOLDEN_REL_TOL};

#[allow(unused_imports)]
pub(crate) use search::bisect;
