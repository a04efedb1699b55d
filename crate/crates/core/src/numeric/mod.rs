//! Scalar tiers, dense complex matrices and polynomial root helpers.

pub mod dense;
pub mod logmag;
pub mod poly;
pub mod scalar;

pub use dense::{vec_norm, CMatrix, Lu};
pub use scalar::{cabs, cdiv, cmul, cplx, cplx_f, factorial_f64, ln_factorial, xf, xf_join, xf_split, Precision, XfParts, Real, Xf, C64};
