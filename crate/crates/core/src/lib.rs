//! Exact chain-level machinery for modules with ∞-simplicial faces, their
//! cyclic and dihedral structure, the associated bicomplexes and homology,
//! and the tensor-module construction for involutive A∞-algebras.

pub mod ainfty;
pub mod cli;
pub mod complexes;
pub mod dihedral;
pub mod error;
pub mod exactlin;
pub mod graded;
pub mod report;
pub mod sface;
pub mod tensor;

pub use error::{Error, Result};
