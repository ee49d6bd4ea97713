//! Smallest-eigenvalue statistics for Wishart-Laguerre ensembles.
//!
//! The crate covers three regimes:
//!
//! * finite `N`, unconstrained real Wishart-Laguerre (`WL`) matrices, built from
//!   Edelman's polynomial representation ([`edelman`]);
//! * finite `N`, fixed-trace (`FT`) matrices obtained by inverting the Laplace
//!   transform that links both ensembles ([`ftwl`]);
//! * the universal hard-edge limit, through Bessel determinants and Pfaffians
//!   ([`micro`]) and, independently, through hypergeometric functions of a
//!   matrix argument ([`hfma`]).
//!
//! [`montecarlo`] samples Gaussian matrices to cross-check the analytic curves.

pub mod bessel;
pub mod edelman;
pub mod ensemble;
pub mod error;
pub mod ftwl;
pub mod hfma;
pub mod linalg;
pub mod micro;
pub mod montecarlo;
pub mod quad;
pub mod rational;
pub mod special;

pub use ensemble::{Beta, EnsembleKind, EnsembleParams};
pub use error::{Error, Result};
