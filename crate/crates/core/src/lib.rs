//! Pseudo-spectral simulation of density-dependent incompressible
//! viscoelastic flow of Oldroyd type on a periodic box, together with a
//! suite of checks for the exact identities the model satisfies: energy
//! balance, propagation of `div(ρFᵀ) = 0`, curl compatibility of the
//! deformation gradient, transport of `∇ln ρ`, the dissipative `Z`
//! combination, the pressure Poisson relation and scaling symmetry.
//!
//! The unknowns are the density `ρ`, the velocity `u` and `E = F - I`,
//! where `F` is the deformation gradient. Index conventions:
//! `(∇u)_ij = ∂u_i/∂x_j`, `(∇u E)_ij = (∇u)_ik E_kj`, and the divergence of
//! a tensor is taken row-wise, `(div T)_i = ∂_j T_ij`.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod init;
pub mod mms;
pub mod state;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use grid::{Grid, ScalarField, TensorField, VectorField};
pub use state::{PressureLaw, State};
