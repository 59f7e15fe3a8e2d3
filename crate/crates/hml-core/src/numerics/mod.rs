//! Shared numerical routines: adaptive quadrature, scalar and simplex
//! optimizers, through-origin regression, and Hermitian eigenvalue helpers.

pub mod fit;
pub mod linalg;
pub mod optim;
pub mod quad;

pub use fit::{fit_through_origin, LineFit};
pub use linalg::hermitian_eigenvalues;
pub use optim::{golden_section_max, NelderMead, SimplexResult};
pub use quad::{gauss_legendre, integrate, integrate_with_order, QuadResult};
