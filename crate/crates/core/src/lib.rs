//! Finite-depth operator toolkit for multiscale linear systems on
//! homogeneous trees.
//!
//! The computational universe is a rooted window of the homogeneous tree of
//! order `q`: all words of length at most `depth`.  Bounded operators become
//! dense complex matrices over the window nodes; the primitive shifts
//! satisfy truncated Cuntz relations that lose rank only at the deepest
//! level, and identities from the infinite-tree calculus are stated either
//! window-exact or under interior compression with a small level buffer.
//!
//! Modules:
//! - [`tree`]: words, windows, meet/distance/order combinatorics.
//! - [`op`]: operator surrogates, shifts, bands, masks, compression.
//! - [`series`]: two-index and causal power-series representations.
//! - [`eval`]: point evaluation, Cauchy kernel, backward shifts.
//! - [`schur`]: Schur multipliers, kernel positivity, the defect-space
//!   model, coisometric realizations and the transfer recursion.
//! - [`blaschke`]: the kernel-at-a-point operators, Blaschke factors and
//!   factorization of operators vanishing at a point.
//! - [`gen`]: deterministic random instance generation.
//! - [`io`]: JSON serialization of operators, tuples, series and reports.
//! - [`suite`]: the verification suites and report assembly.

pub mod blaschke;
pub mod error;
pub mod eval;
pub mod gen;
pub mod io;
mod linalg;
pub mod op;
pub mod schur;
pub mod series;
pub mod suite;
pub mod tol;
pub mod tree;

pub use error::{Error, Result};
pub use op::{C64, ConstOp, CTuple, Op};
pub use tree::{NodeId, OrderRel, TreeWindow, Word};
