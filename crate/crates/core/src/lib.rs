//! Symbolic dynamics workbench for subshifts of finite type and their
//! suspension flows.

pub mod error;
pub mod function;
pub mod graph;
pub mod horseshoe;
pub mod io;
pub mod linalg;
pub mod lorenz;
pub mod measures;
pub mod roots;
pub mod sft;
pub mod spectrum;
pub mod suspension;
pub mod thermo;
pub mod witness;

pub use error::{Error, Result};
pub use function::LocallyConstantFunction;
pub use sft::{Sft, Word};
pub use measures::{d_star, InvariantMeasure, MarkovComponent};
