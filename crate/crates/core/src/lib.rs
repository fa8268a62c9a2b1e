//! Atomic sets, gauges, support functions and conditional-gradient solvers.
pub mod apps;
pub mod atoms;
pub mod calculus;
pub mod cli;
pub mod element;
pub mod error;
pub mod io;
pub mod linalg;
pub mod linmap;
pub mod recipe;
pub mod selftest;
pub mod solvers;
pub use atoms::{AtomicSet, Atom, AtomTag, AtomicDecomposition, ExposedFace};
pub use element::{Element, Extended, MaskedMatrix};
pub use error::{Error, Result};
pub use recipe::Recipe;
