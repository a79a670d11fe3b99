//! Arbitrary-precision kernel: precision context, dense linear algebra and
//! orthogonal-polynomial coefficients.

mod linalg;
mod poly;
mod precision;

pub use linalg::{least_squares, solve_dense, DenseMatrix, DenseVector, LeastSquares, LuDecomposition};
pub use poly::{laguerre_coeffs, legendre_coeffs, PolynomialCoeffs};
pub use precision::{log10_abs, to_scientific, PrecisionContext, Real};
