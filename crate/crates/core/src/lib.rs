//! Multi-spin coded Metropolis simulation of the 2D Ising model.
//!
//! Sixteen spins share one `u16` word; neighbor sums come from a bitwise
//! adder and acceptance from a sixteen-entry table. See the `examples/`
//! directory for one runnable program per capability.

pub mod bitkernels;
pub mod cli;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod observables;
pub mod reference;
pub mod rng;

pub use engine::{Ensemble, ExpTable, InitMode, Measurement, Simulation};
pub use error::{Error, Result};
pub use lattice::{
    classify, onsager_magnetization, unclassify, ArrayCode, Color, LatticeDims, PackedArrays,
    PlainLattice, CRITICAL_TEMPERATURE,
};
pub use rng::GeneratorState;
