//! Verification workbench for relation-algebra atom structures.

pub mod atoms;
pub mod chain;
pub mod complex;
pub mod rep;
pub mod error;
pub mod logic;
pub mod sexpr;
pub mod suite;

pub use atoms::{build_z, AtomLabel, FiniteAtomStructure, StructureParts, ValidationReport};
pub use complex::{ComplexAlgebra, Element, Term};
pub use error::{Error, Result};
