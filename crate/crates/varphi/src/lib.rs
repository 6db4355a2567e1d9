//! Variational eigenvalue toolkit for double-phase problems with variable
//! exponents: Young functions, variable-exponent norms, energy functionals,
//! Rayleigh-quotient eigensolvers and potential optimization over norm balls.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod eigensolve;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod lebesgue;
pub mod potopt;
pub mod young;

pub use error::Error;
