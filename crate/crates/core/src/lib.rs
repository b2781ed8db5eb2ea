//! Two-mode condensate synchronization toolkit.
//!
//! Dynamics of two coupled scattering modes of a condensate, treated at
//! three levels: the classical mean-field flow of the normalized mode
//! amplitudes, exact quantum evolution inside fixed-particle-number
//! sectors, and evolution of a truncated two-mode Fock space. On top of
//! those sit Husimi distributions and the synchronization measures
//! (quadrature-error measure, mutual information in several variants).

pub mod focksector;
pub mod fullspace;
pub mod husimi;
pub mod meanfield;
pub mod numerics;
pub mod syncmeasures;

#[cfg(test)]
pub(crate) mod testkit;

mod error;
pub use error::{Error, Result};
