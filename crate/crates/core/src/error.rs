//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window parameters: q = {q}, depth = {depth} (both must be >= 1)")]
    BadWindowParams { q: usize, depth: usize },

    #[error("window too large: {nodes} nodes exceeds cap {cap}")]
    WindowTooLarge { nodes: usize, cap: usize },

    #[error("letter {letter} out of range 1..={q}")]
    BadLetter { letter: u8, q: usize },

    #[error("word `{word}` does not parse over alphabet 1..={q}")]
    BadWord { word: String, q: usize },

    #[error("operator is not causal (off-mask magnitude {defect:.3e})")]
    NotCausal { defect: f64 },

    #[error("operator is not constant (off-mask magnitude {defect:.3e})")]
    NotConstant { defect: f64 },

    #[error("operator is not diagonal (off-diagonal magnitude {defect:.3e})")]
    NotDiagonal { defect: f64 },

    #[error("not a Schur multiplier: operator norm {norm:.6} exceeds 1")]
    NotSchur { norm: f64 },

    #[error("defect operator indefinite beyond tolerance (eigenvalue {min_eig:.3e})")]
    IndefiniteDefect { min_eig: f64 },

    #[error("two-index key ({w1}, {w2}) is reducible")]
    ReducibleKey { w1: String, w2: String },

    #[error("word length mismatch: |{lhs}| = {lhs_len}, expected {expected}")]
    WordLengthMismatch {
        lhs: String,
        lhs_len: usize,
        expected: usize,
    },

    #[error("point evaluation does not vanish (magnitude {defect:.3e}); factorization requires a zero")]
    NonVanishing { defect: f64 },

    #[error("matrix numerically singular in {context}")]
    Singular { context: &'static str },

    #[error("state space is not invariant under the backward shifts (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("transfer recursion output depends on the coefficient path (defect {defect:.3e})")]
    PathInconsistent { defect: f64 },

    #[error("unknown kind `{0}`")]
    UnknownKind(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
