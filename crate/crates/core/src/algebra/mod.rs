//! Symbolic operator algebra for spins and spinless fermions.

mod fermi;
mod matrix;
mod pauli;
mod poly;
mod text;

pub use fermi::FermiWord;
pub use matrix::{jordan_wigner, local_basis, to_matrix, DenseHermitian};
pub use pauli::{PauliAxis, PauliString};
pub use poly::{Kind, Monomial, OperatorPolynomial};
pub use text::parse_polynomial;

pub(crate) use matrix::apply_monomial;
pub(crate) use matrix::position_map;
