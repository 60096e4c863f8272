//! Real embedding of complex Hermitian matrices.
//!
//! `M = A + iB` maps to the real symmetric matrix `[[A, -B], [B, A]]` of
//! doubled dimension. The embedding preserves positive semidefiniteness in
//! both directions and doubles every eigenvalue's multiplicity, so PSD
//! constraints on complex blocks can be handed to a purely real solver.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::{Error, Result};

/// Embed a complex Hermitian matrix into a real symmetric one of twice the
/// dimension. Fails if the input is not Hermitian to `1e-12` (absolute,
/// relative to the largest entry).
pub fn embed_hermitian(m: &Array2<Complex64>) -> Result<Array2<f64>> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::InvalidInput(format!("matrix is {r}x{c}, not square")));
    }
    let mut max_entry: f64 = 0.0;
    let mut herm_defect: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            max_entry = max_entry.max(m[[i, j]].norm());
            herm_defect = herm_defect.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    if herm_defect > 1e-12 * (1.0 + max_entry) {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian: max |M - M^dag| = {herm_defect:.3e}"
        )));
    }
    let mut out = Array2::zeros((2 * r, 2 * r));
    for i in 0..r {
        for j in 0..r {
            // Symmetrize so round-off in the input cannot leak asymmetry.
            let v = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            out[[i, j]] = v.re;
            out[[r + i, r + j]] = v.re;
            out[[i, r + j]] = -v.im;
            out[[r + i, j]] = v.im;
        }
    }
    Ok(out)
}

/// Inverse of [`embed_hermitian`]: recover `(Z11 + Z22)/2 + i (Z21 - Z12)/2`.
///
/// For any symmetric PSD `Z` (not necessarily of embedded form) the result
/// is Hermitian PSD and satisfies `⟨M, deembed(Z)⟩ = ⟨embed(M), Z⟩ / 2`.
pub fn deembed_hermitian(z: &Array2<f64>) -> Result<Array2<Complex64>> {
    let (r, c) = z.dim();
    if r != c || r % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "embedded matrix must be square of even dimension, got {r}x{c}"
        )));
    }
    let n = r / 2;
    let z11 = z.slice(s![..n, ..n]);
    let z12 = z.slice(s![..n, n..]);
    let z21 = z.slice(s![n.., ..n]);
    let z22 = z.slice(s![n.., n..]);
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (z11[[i, j]] + z22[[i, j]]);
            let im = 0.5 * (z21[[i, j]] - z12[[i, j]]);
            out[[i, j]] = Complex64::new(re, im);
        }
    }
    // Hermitize: symmetric Z gives Hermitian output up to round-off.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (out[[i, j]] + out[[j, i]].conj());
            out[[i, j]] = v;
            out[[j, i]] = v.conj();
        }
        out[[i, i]] = Complex64::new(out[[i, i]].re, 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use ndarray_linalg::{Eigh, UPLO};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_matrix_embeds_block_diagonally() {
        let m = array![[c(2.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(3.0, 0.0)]];
        let e = embed_hermitian(&m).unwrap();
        assert_eq!(e[[0, 0]], 2.0);
        assert_eq!(e[[2, 2]], 2.0);
        assert_eq!(e[[0, 2]], 0.0);
        assert_eq!(e[[1, 3]], 0.0);
        assert_eq!(e[[0, 1]], 1.0);
        assert_eq!(e[[2, 3]], 1.0);
    }

    #[test]
    fn pauli_y_spectrum_is_doubled() {
        let m = array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let e = embed_hermitian(&m).unwrap();
        let (vals, _) = e.eigh(UPLO::Lower).unwrap();
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (v, ex) in vals.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(v, ex, epsilon = 1e-12);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let m = array![
            [c(1.0, 0.0), c(0.25, -0.75), c(0.0, 0.5)],
            [c(0.25, 0.75), c(-2.0, 0.0), c(1.0, 0.0)],
            [c(0.0, -0.5), c(1.0, 0.0), c(0.5, 0.0)]
        ];
        let z = deembed_hermitian(&embed_hermitian(&m).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((z[[i, j]] - m[[i, j]]).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = array![[c(0.0, 1.0)]];
        assert!(embed_hermitian(&m).is_err());
    }
}
