//! Numerical toolkit for the elliptic term of the GL(2) trace formula after
//! Poisson summation: generalised Kloosterman sums, the smoothing functions
//! F, H0, H1 and their Mellin transforms, singular oscillatory Fourier
//! integrals with their asymptotic expansions, and the assembled sums.

pub mod asymp;
pub mod charsum;
pub mod elliptic;
pub mod error;
pub mod ntheory;
pub mod nufft;
pub mod oscint;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
