//! Finite-volume Lindblad generators for qudit and fermion lattices, the
//! perturbative ergodicity certificate, and exact desk-scale checks of the
//! inequalities behind it.

pub mod bounds;
pub mod catalog;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fermion;
pub mod lattice;
pub mod locality;
pub mod linalg;
pub mod operator;
pub mod single_site;
pub mod superop;
pub mod verify;
pub mod wasserstein;

pub use error::{Error, Result};
pub mod model;
pub mod random;
pub mod report;
