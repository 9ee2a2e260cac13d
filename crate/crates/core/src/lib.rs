//! Numerical toolkit for finite-dimensional modular sequence spaces:
//! Luxemburg norms of convex modulars, Nakano direct sums, the
//! Jordan-von Neumann constant, inequality verifiers and a small lab for
//! isometries onto hilbertian sums.

// `!(a > b)` is how preconditions reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geomconst;
pub mod isolab;
pub mod linalg;
pub mod modular;
pub mod nakano;
pub mod sampling;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
