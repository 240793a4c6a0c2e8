//! Numerics for coherence quantifiers built on Tsallis alpha-divergences:
//! dense Hermitian linear algebra, closed-form and brute-force coherence
//! measures, incoherent channels with monotonicity diagnostics, single-qubit
//! closed forms, and seeded randomized property campaigns.

pub mod channels;
pub mod coherence;
pub mod divergence;
pub mod error;
pub mod fuzz;
pub mod linalg;
pub mod measure;
pub mod qubit;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};
