//! Numerical toolkit for weighted Bergman spaces on the unit disk.
//!
//! Covers disk geometry, quadrature against `dA_α`, reproducing kernels,
//! hyperbolic lattices and atomic decomposition, the classical integral
//! estimates, concrete operator families with their Berezin transforms,
//! and boundedness/compactness diagnostics built on top of them.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod diagnostics;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod kernels;
pub mod lattice;
pub mod operators;
pub mod quadrature;

pub use atomic::{AtomicExpansion, Decomposer};
pub use diagnostics::{GridPolicy, ScanReport};
pub use error::{Error, Result};
pub use geometry::{DiskPoint, EuclideanDisk};
pub use lattice::{CellMeasures, Lattice};
pub use operators::{NamedFn, OperatorSpec, Sequence, Symbol, Truncation};
pub use quadrature::{QuadratureGrid, SpaceParams};
