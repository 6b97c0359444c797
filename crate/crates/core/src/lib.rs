//! Exact finite-size laboratory for the XX0 spin chain: Pauli-string
//! algebra, the determinant eigenbasis, base-2 thermodynamics, the subspace
//! of thermodynamic equilibrium, thermal correlation functions and
//! Knill-Laflamme error-correction checks on that subspace.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlations;
pub mod equilibrium;
pub mod pauli;
pub mod qec;
pub mod quad;
pub mod sector;
pub mod thermo;
pub mod xx0;
