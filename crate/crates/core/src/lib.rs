//! Certified lower bounds on ground-state energies of quantum spin and
//! spinless-fermion Hamiltonians.
//!
//! The pipeline, bottom to top:
//!
//! * [`algebra`] — symbolic Pauli strings and normally-ordered fermionic
//!   words, products under the (anti-)commutation relations, and
//!   matricization through the Jordan-Wigner transformation.
//! * [`models`] / [`graph`] — seeded benchmark Hamiltonians (transverse-field
//!   Ising, XXZ, spinless Hubbard, quantum SK, quadratic fermions) on
//!   explicit or Erdős–Rényi interaction graphs.
//! * [`exact`] — dense exact diagonalization: ground energies and states,
//!   exact marginals, expectations. The ground truth for every test.
//! * [`layout`] — cluster groupings, pair fragments, and the convex
//!   splitting of a Hamiltonian across pair fragments.
//! * [`relax`] — the embedding SDP relaxations (first-order moment scheme,
//!   pair-augmented schemes in two equivalent formulations, the cheaper
//!   variant without communication variables, and the Anderson bound),
//!   plus relaxed two-fragment marginals extracted from dual certificates.
//! * [`info`] — von Neumann entropy, mutual information, relative entropy
//!   of entanglement, normalized pair tables, gap detection and graph
//!   reconstruction.
//! * [`cluster`] — greedy correlation-driven cluster optimization and the
//!   successive merge loop.
//! * [`experiments`] — seeded batch drivers used by the CLI.

pub mod algebra;
pub mod cluster;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod graph;
pub mod info;
pub mod layout;
pub mod models;
pub mod relax;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Coefficients with magnitude at or below this threshold are pruned from
/// operator polynomials; below the double-precision noise floor for
/// desk-scale products.
pub const COEFF_PRUNE_TOL: f64 = 1e-14;
