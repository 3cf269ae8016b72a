//! Temperley-Lieb lattice models and the indecomposability parameter `b`.
//!
//! The crate builds transfer matrices and Hamiltonians of loop models on
//! link-state bases (and the XXZ chain on spins), equips them with invariant
//! bilinear forms, extracts rank-2 Jordan cells from their spectra and turns
//! those cells into finite-size estimates of `b`. Boundary entropies of the
//! Ising chain and the dense loop model live alongside.

pub mod diagram;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod reference;
pub mod spectral;
pub mod tl;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
