//! Shared numerical machinery: adaptive integration of complex ODE systems,
//! symmetric tridiagonal eigensolves, polar-grid quadrature, and log-gamma.

mod gamma;
mod hermitian;
mod ode;
mod quadrature;
mod tridiag;

pub use gamma::{log_gamma, ln_factorial};
pub use hermitian::hermitian_eigenvalues;
pub use ode::{integrate_ode, OdeSolution};
pub use quadrature::{polar_quadrature, gauss_legendre, MeasureConvention, PolarGrid};
pub use tridiag::{tridiag_eigen, EigenSystem, TridiagSym};
