//! Spectral renormalization group for particle-field Hamiltonians on
//! truncated Fock spaces.

pub mod config;
pub mod error;
pub mod feshbach;
pub mod fock;
pub mod hamiltonian;
pub mod interp;
pub mod kernels;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod quadrature;
pub mod rg;
pub mod spectral;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
