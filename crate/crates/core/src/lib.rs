//! Certification thresholds for quantum non-Gaussian (QNG) coherences of a
//! single bosonic mode.
//!
//! A coherence measure `C_{m,n}` is twice the modulus of the density-matrix
//! element between the Fock states `|m⟩` and `|n⟩`. A state certifies QNG
//! coherence of a given hierarchical order when its measured `C_{m,n}`
//! exceeds the largest value reachable by Gaussian dynamics `S(ξ)D(α)`
//! applied to the core states rejected at that order.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, caching, the
//! command-line front end and thread-pool execution live in the `qng` crate.
#![no_std]
#![forbid(unsafe_code)]
extern crate alloc;

pub mod cores;
pub mod decoherence;
pub mod envelope;
mod error;
pub mod exec;
pub mod fock;
mod linalg;
pub mod measures;
mod neldermead;
pub mod opt;
pub mod thresholds;

pub use error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
