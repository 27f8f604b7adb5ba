//! Pinned tolerances for the verification suites.
//!
//! Structural (0/1 mask) identities are asserted exactly; floating-point
//! identities get an absolute tolerance graded by how many layers of
//! arithmetic sit between the two sides being compared.

/// Entrywise tolerance for single-layer floating-point operator identities.
pub const FLOAT_IDENTITY: f64 = 1e-10;

/// Tolerance for identities that are pure entry rearrangements or one
/// cancellation away from exact (unipotent inverses, adjoint pairings).
pub const FLOAT_TIGHT: f64 = 1e-12;

/// Defect bound for coisometry and reproducing-kernel identities computed
/// through an eigenbasis of the state space.
pub const REALIZATION: f64 = 1e-8;

/// Floor for the minimum eigenvalue of kernel Gram matrices.
pub const GRAM_FLOOR: f64 = 1e-9;

/// Transfer recursion output vs direct multiplication, per coefficient.
pub const TRANSFER: f64 = 1e-9;

/// Path-independence of the transfer recursion output.
pub const TRANSFER_PATH: f64 = 1e-8;

/// Blaschke factorization round-trip and norm preservation (two layers of
/// truncated shift identities, buffer-2 compression).
pub const FACTORIZATION: f64 = 1e-7;

/// Identities from the kernel-at-a-point calculus (single buffer-1 layer).
pub const BLASCHKE_IDENTITY: f64 = 1e-9;

/// Isometry defect of the Blaschke factor under buffer-1 compression.
pub const BLASCHKE_ISOMETRY: f64 = 1e-8;

/// Eigenvalue clip separating numerical kernel from range in PSD matrices.
pub const EIG_CLIP: f64 = 1e-10;

/// Slack accepted on the contraction bound of a Schur multiplier.
pub const SCHUR_SLACK: f64 = 1e-10;

/// Margin used when scaling random contractions: generated multipliers have
/// norm 1/(1 + SCHUR_MARGIN), keeping the defect operator well conditioned.
pub const SCHUR_MARGIN: f64 = 0.05;

/// Tolerant causality mask used when expanding operators that were produced
/// by floating-point arithmetic rather than constructed structurally.
pub const CAUSAL_RELAXED: f64 = 1e-12;

/// Scalar-path cross-check of the full pipeline.
pub const DEGENERATION: f64 = 1e-10;
