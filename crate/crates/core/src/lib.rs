//! Convex hulls of sets cut out by quadratic inequalities, built from
//! aggregations of the defining constraints.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadcore`] holds the data model (symmetric matrices, quadratic
//!   constraints and systems, aggregation weights) and the elementary
//!   operations on it.
//! * [`spectral`] is a dense cyclic-Jacobi eigensolver plus the spectral
//!   predicates built on it (PSD tests, semi-convex-cone classification,
//!   hyperplane restriction).
//! * [`certsearch`] searches low-dimensional multiplier spaces for PDLC
//!   witnesses, PSD combinations and dual witnesses, and hosts a small
//!   LP feasibility solver that emits Farkas certificates.
//! * [`sdprank`] solves small SDP feasibility problems by alternating
//!   projections, reduces solution rank, and extracts strict points of
//!   three homogeneous quadratic inequalities.
//! * [`hull`] is the separation oracle for `conv(S)` together with a
//!   sampled inner approximation used as an independent check.
//! * [`catalog`] encodes the reference instances and scripted checks of
//!   every claim made about them.
//!
//! Every yes/no answer is paired with a witness that can be re-verified
//! from the raw matrices.

pub mod catalog;
pub mod certsearch;
mod error;
pub mod format;
pub mod hull;
pub mod linalg;
pub mod quadcore;
pub mod sdprank;
pub mod simplex;
pub mod spectral;

pub use error::{Error, Result};
pub use quadcore::{QuadConstraint, QuadSystem, Sense, SymMatrix, Weights};
