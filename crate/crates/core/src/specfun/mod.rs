//! Special functions: complex Γ, Bessel K of complex order, the smoothing
//! functions F, H0, H1, the cut-off family φ, and real ζ.

pub mod bessel;
pub mod cheb;
pub mod cutoff;
pub mod gamma;
pub mod smoothing;
pub mod zeta;

pub use bessel::{bessel_k, bessel_k_real};
pub use cutoff::{phi_family, CutoffSpec, PhiFamily};
pub use gamma::{gamma, ln_gamma, rgamma};
pub use smoothing::{
    big_f, big_f_mellin, h0, h1, h_direct, h_on_contour, BigF, Contour, HFunction, HKind,
    MellinFunction, F, H0, H1,
};
pub use zeta::zeta_real;
