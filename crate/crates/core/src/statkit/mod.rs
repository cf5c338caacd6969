//! Numerical support: Gaussian special functions, exact binomial bounds and
//! reproducible random streams.

mod binomial;
mod rng;
mod special;

pub use binomial::{binomial_upper_tail, clopper_pearson_lower};
pub use rng::{fmix64, split_stream, RngStream};
pub use special::{erfc, gaussian_cdf, gaussian_pdf, inverse_gaussian_cdf, ln_gamma, q_function};
