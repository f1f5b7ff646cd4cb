//! Summation and quadrature primitives.

mod quad;
mod sum;

pub use quad::{gauss_legendre, integrate, integrate_2d, GaussRule, QuadResult};
pub use sum::{sum_compensated, NeumaierSum};
