//! Finite discounted Markov decision processes on ordered grids.
//!
//! The crate solves grid-discretized MDPs by value iteration, propagates the
//! state distribution induced by the optimal policy, and checks monotone
//! comparative statics and stochastic comparative statics on concrete
//! instances. Every check is an exact finite computation: stochastic orders
//! are reduced to finitely many cone generators (upper sets, hinges, the
//! identity), and structural hypotheses such as increasing differences are
//! tested on adjacent grid pairs.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the batch
//! runner and random instance generators live in the `scstat` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod distribution;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod lattice;
pub mod model;
pub mod models;
pub mod orders;
pub mod solver;
pub mod stationary;
pub mod structure;
mod upper_sets;

pub use distribution::DiscreteDistribution;
pub use error::{Error, Result};
pub use grid::Grid;
pub use kernel::{InducedKernel, Kernel};
pub use model::{allocate_offgrid, kernel_from_map, MdpModel, PolicyFunction};
pub use orders::{Condition, OrderVerdict, TestFunction, Witness};
pub use solver::{PolicyCorrespondence, Solution, SolvedModel, SolverOptions, ValueFunction};

/// Tolerance on probability masses summing to one.
pub const MASS_TOL: f64 = 1e-12;

/// Default tolerance for every inequality checked by the order and structure checkers.
pub const ORDER_TOL: f64 = 1e-9;
