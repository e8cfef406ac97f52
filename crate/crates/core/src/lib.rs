//! Indivisible stochastic processes over finite configuration spaces and
//! their Hilbert-space representations.
//!
//! A process is described by column-stochastic transition matrices `Γ(t←0)`.
//! Any such matrix can be written as the entrywise modulus-square of a
//! complex evolution operator `Θ(t←0)`, which opens the door to density
//! matrices, projectors, gauge transformations, Kraus decompositions and
//! dilations. This crate provides the dense linear algebra and the checks
//! that tie the two descriptions together.

pub mod algebra;
pub mod correspondence;
pub mod dilation;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod literal;
pub mod matrix;
pub mod pvm;
pub mod sample;
pub mod stochastic;
pub mod symmetry;
pub mod tolerance;
pub mod validate;

pub use correspondence::{
    Beable, DensityMatrix, Emergeable, EvolutionOperator, Observable, StateVector,
};
pub use dynamics::{BeableFamily, Hamiltonian, UnitaryFamily};
pub use error::{Error, Result};
pub use matrix::{c, CMatrix, RMatrix, C64};
pub use pvm::{configuration_pvm, pvm_from_unitary, Basis, Pvm};
pub use stochastic::{ProbVector, Process, TransitionMatrix};
pub use tolerance::Tolerance;
