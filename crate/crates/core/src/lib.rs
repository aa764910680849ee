//! Discrete Schwarz rearrangement on the lattice graphs `Z^d`.
//!
//! The crate provides the one-dimensional rearrangement on `Z` and `Z + 1/2`,
//! polarizations, per-direction one-step rearrangements and their iterated
//! limit on `Z^d`, together with the functionals that decrease or increase
//! under rearrangement, brute-force oracles and constrained minimizers that
//! use rearrangement as an acceleration step.

pub mod error;
pub mod functionals;
pub mod io;
pub mod lattice;
pub mod optimize;
pub mod oracle;
pub mod rearrange;
pub mod sample;
pub mod shape;

pub use error::{Error, Result};
pub use lattice::{
    box_ball, cutoff, diamond_ball, direction_set, graph_distance, line_of, point_on_line,
    values_multiset, Direction, HalfInt, LatticePoint, LineKey, Parity, SparseFunction,
    ValueMultiset,
};
pub use shape::{canonical_shape, ShapeClass};
