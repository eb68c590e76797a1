//! Symplectic reduction on tube domains over convex cones.
//!
//! The crate evaluates the momentum map of affine subgroups acting on a tube
//! domain V + iΩ, projects points onto the zero level set by Newton's method on
//! the characteristic-function barrier, realizes the quotient domain in
//! complement coordinates, and checks candidate subalgebras against the Lie
//! condition numerically.

// `!(a <= b)` is used deliberately so NaN falls on the failing side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cone;
pub mod error;
pub mod liecond;
pub mod linalg;
pub mod moment;
pub mod numdiff;
pub mod reduce;
pub mod sampling;
pub mod seed;
pub mod tube;

pub use cone::{ConeSpec, Matrix, RealVector};
pub use error::{Error, Result};
pub use moment::{AffineGenerator, AffineMap, GeneratorSet};
pub use reduce::{QuotientDomain, Subspace};
pub use tube::{Tangent, TubePoint};
