//! Charged 6j-symbols and 3-manifold state sums built from the cyclic
//! representations of the Borel subalgebra of quantum sl2 at odd roots of unity.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line live in
//! the companion `psihat-cli` crate.

#![cfg_attr(not(test), no_std)]
// `num_traits::Float` supplies float math under no_std; its import turns unused
// whenever std is linked into the build and provides the inherent methods.
#![allow(unused_imports)]

extern crate alloc;

pub mod cyclic_algebra;
pub mod error;
pub mod intsolve;
pub mod matrix;
pub mod psi_operators;
pub mod sixj;
pub mod state_sum;
pub mod tensor;
pub mod triangulation;
pub mod verify;

pub use error::{Error, Result};
