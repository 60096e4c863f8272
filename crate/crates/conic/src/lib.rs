//! Dual-form block semidefinite programming.
//!
//! Problems have the shape
//!
//! ```text
//!   maximize    c · x                 x ∈ R^m free
//!   subject to  F0_k + Σ_i x_i F_ik ⪰ 0     for every block k
//! ```
//!
//! with real symmetric data matrices. Complex Hermitian constraints enter
//! through [`embed_hermitian`], which doubles the dimension and preserves the
//! spectrum. The solver is a first-order operator-splitting (ADMM) iteration
//! that alternates a cached linear solve on the affine subspace with
//! eigenvalue projections onto the PSD cone, and it always reports the dual
//! PSD certificates `Z_k` alongside the optimizer.
//!
//! At optimality the duals satisfy, up to tolerance,
//!
//! ```text
//!   Z_k ⪰ 0,   ⟨S_k, Z_k⟩ = 0,   Σ_k ⟨F_ik, Z_k⟩ = -c_i,
//! ```
//!
//! so `c · x ≤ Σ_k ⟨F0_k, Z_k⟩` gives a verifiable optimality gap. The
//! independent checker in [`kkt`] re-derives all of these from scratch.

mod embed;
mod kkt;
mod problem;
mod sdpa;
mod solver;

pub use embed::{deembed_hermitian, embed_hermitian};
pub use kkt::{check_kkt, KktReport};
pub use problem::{Block, BlockMeta, ConicProblem, SparseSym};
pub use sdpa::{read_problem, write_problem};
pub use solver::{solve, ConicSolution, Residuals, SolveOptions, SolveStatus};

/// Errors produced while building or solving conic problems.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
