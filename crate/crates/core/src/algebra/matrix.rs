//! Matricization of operator polynomials onto dense complex matrices.
//!
//! Spin monomials act site-by-site; fermionic words go through the
//! Jordan-Wigner transformation with the Z-string over the tensor slots
//! preceding the mode's position in the given order:
//!
//! ```text
//!   J(a_i^dag) = sigma_z^{(i-1)} (x) [[0,0],[1,0]] (x) I^{(d-i)}
//! ```
//!
//! Basis states are indexed big-endian: the first entry of the cluster list
//! is the most significant bit, `|0..0>` is index 0.

use ndarray::Array2;

use super::fermi::FermiWord;
use super::pauli::PauliAxis;
use super::poly::{Kind, Monomial, OperatorPolynomial};
use crate::{C64, Error, Result};

/// A dense complex matrix checked to be Hermitian at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    mat: Array2<C64>,
}

impl DenseHermitian {
    /// Wrap a matrix, verifying `||M - M^dag||_max <= 1e-12` (relative to
    /// the largest entry).
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::InvalidInput(format!("matrix is {r}x{c}, not square")));
        }
        let mut max_entry: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                max_entry = max_entry.max(mat[[i, j]].norm());
                defect = defect.max((mat[[i, j]] - mat[[j, i]].conj()).norm());
            }
        }
        if defect > 1e-12 * (1.0 + max_entry) {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian: defect {defect:.3e}"
            )));
        }
        Ok(DenseHermitian { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }
}

pub(crate) fn position_map(order: &[usize]) -> Result<std::collections::HashMap<usize, usize>> {
    let mut map = std::collections::HashMap::with_capacity(order.len());
    for (pos, &site) in order.iter().enumerate() {
        if map.insert(site, pos).is_some() {
            return Err(Error::InvalidInput(format!("site {site} appears twice in the order")));
        }
    }
    Ok(map)
}

#[inline]
fn bit(index: usize, pos: usize, n: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

#[inline]
fn flip(index: usize, pos: usize, n: usize) -> usize {
    index ^ (1 << (n - 1 - pos))
}

/// Parity of occupied slots strictly before `pos` (the Jordan-Wigner
/// Z-string sign).
#[inline]
fn jw_parity(index: usize, pos: usize, n: usize) -> bool {
    let mask = if pos == 0 { 0 } else { ((1usize << pos) - 1) << (n - pos) };
    (index & mask).count_ones() % 2 == 1
}

/// Action of a canonical monomial on the basis vector `e_index` of the
/// cluster Hilbert space: returns `(target, phase)` with
/// `m e_index = phase * e_target`, or `None` when the vector is killed.
/// Monomials act as generalized permutations, so this is exact.
pub(crate) fn apply_monomial(
    m: &Monomial,
    positions: &std::collections::HashMap<usize, usize>,
    n: usize,
    index: usize,
) -> Option<(usize, C64)> {
    match m {
        Monomial::Pauli(p) => {
            let mut idx = index;
            let mut phase = C64::new(1.0, 0.0);
            for &(site, axis) in p.factors() {
                let pos = *positions.get(&site).expect("site not in cluster");
                let b = bit(idx, pos, n);
                match axis {
                    PauliAxis::X => idx = flip(idx, pos, n),
                    PauliAxis::Y => {
                        // Y|0> = i|1>, Y|1> = -i|0>
                        phase *= if b == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                        idx = flip(idx, pos, n);
                    }
                    PauliAxis::Z => {
                        if b == 1 {
                            phase = -phase;
                        }
                    }
                }
            }
            Some((idx, phase))
        }
        Monomial::Fermi(w) => {
            let mut idx = index;
            let mut sign = 1.0;
            // Rightmost operator acts first.
            for &mode in w.annihilations().iter().rev() {
                let pos = *positions.get(&mode).expect("mode not in cluster");
                if bit(idx, pos, n) == 0 {
                    return None;
                }
                if jw_parity(idx, pos, n) {
                    sign = -sign;
                }
                idx = flip(idx, pos, n);
            }
            for &mode in w.creations().iter().rev() {
                let pos = *positions.get(&mode).expect("mode not in cluster");
                if bit(idx, pos, n) == 1 {
                    return None;
                }
                if jw_parity(idx, pos, n) {
                    sign = -sign;
                }
                idx = flip(idx, pos, n);
            }
            Some((idx, C64::new(sign, 0.0)))
        }
    }
}

/// Jordan-Wigner image of a fermionic word with the modes of `mode_order`
/// mapped to tensor slots in order. Every mode of the word must appear in
/// `mode_order`.
pub fn jordan_wigner(word: &FermiWord, mode_order: &[usize]) -> Result<Array2<C64>> {
    for m in word.support() {
        if !mode_order.contains(&m) {
            return Err(Error::InvalidInput(format!(
                "mode {m} of the word is missing from the mode order"
            )));
        }
    }
    let positions = position_map(mode_order)?;
    let n = mode_order.len();
    let dim = 1usize << n;
    let mut out = Array2::zeros((dim, dim));
    let mono = Monomial::Fermi(word.clone());
    for col in 0..dim {
        if let Some((row, phase)) = apply_monomial(&mono, &positions, n, col) {
            out[[row, col]] += phase;
        }
    }
    Ok(out)
}

/// Matrix of a polynomial on the Hilbert space of `cluster` (ordered site
/// list). Spin kind: tensor products of Pauli matrices on cluster slots;
/// fermion kind: sum of Jordan-Wigner images. Linear in the polynomial.
pub fn to_matrix(p: &OperatorPolynomial, cluster: &[usize]) -> Result<Array2<C64>> {
    let cluster_set: std::collections::BTreeSet<usize> = cluster.iter().copied().collect();
    if cluster_set.len() != cluster.len() {
        return Err(Error::InvalidInput("cluster contains duplicate sites".into()));
    }
    for s in p.support() {
        if !cluster_set.contains(&s) {
            return Err(Error::InvalidInput(format!(
                "polynomial touches site {s} outside the cluster"
            )));
        }
    }
    let positions = position_map(cluster)?;
    let n = cluster.len();
    let dim = 1usize << n;
    let mut out = Array2::zeros((dim, dim));
    for (m, &coeff) in p.terms() {
        for col in 0..dim {
            if let Some((row, phase)) = apply_monomial(m, &positions, n, col) {
                out[[row, col]] += coeff * phase;
            }
        }
    }
    Ok(out)
}

/// The `4^n` basis polynomials of the local algebra on `cluster`, in a
/// deterministic odometer order (last site fastest).
///
/// Spin: per-site factors ordered `1 < X < Y < Z`; the first element is the
/// identity. Fermion: per-mode factors ordered
/// `a^dag a < a a^dag < a < a^dag`; products are expanded to canonical
/// normal order, so `a a^dag` contributes `1 - a^dag a`.
pub fn local_basis(cluster: &[usize], kind: Kind) -> Result<Vec<OperatorPolynomial>> {
    if cluster.is_empty() {
        return Err(Error::InvalidInput("cluster must be nonempty".into()));
    }
    let num_sites = cluster.iter().max().unwrap() + 1;
    let n = cluster.len();
    let total = 4usize.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut factor = OperatorPolynomial::identity(kind, num_sites);
        for (slot, &site) in cluster.iter().enumerate() {
            let digit = (code >> (2 * (n - 1 - slot))) & 3;
            let f = match kind {
                Kind::Spin => match digit {
                    0 => continue,
                    1 => OperatorPolynomial::pauli(num_sites, site, PauliAxis::X)?,
                    2 => OperatorPolynomial::pauli(num_sites, site, PauliAxis::Y)?,
                    _ => OperatorPolynomial::pauli(num_sites, site, PauliAxis::Z)?,
                },
                Kind::Fermion => match digit {
                    0 => OperatorPolynomial::number(num_sites, site)?,
                    1 => {
                        // a a^dag = 1 - a^dag a
                        let mut p = OperatorPolynomial::identity(kind, num_sites);
                        p.sub_assign(&OperatorPolynomial::number(num_sites, site)?)?;
                        p
                    }
                    2 => OperatorPolynomial::annihilate(num_sites, site)?,
                    _ => OperatorPolynomial::create(num_sites, site)?,
                },
            };
            factor = factor.mul(&f)?;
        }
        out.push(factor);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn jwt_single_mode_creation() {
        let m = jordan_wigner(&FermiWord::create(1), &[1]).unwrap();
        assert_eq!(m, array![[c(0.0, 0.0), c(0.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    }

    #[test]
    fn jwt_second_mode_carries_z_string() {
        // a_2^dag on [1, 2] = sigma_z (x) [[0,0],[1,0]]
        let m = jordan_wigner(&FermiWord::create(2), &[1, 2]).unwrap();
        let mut expect = Array2::zeros((4, 4));
        expect[[1, 0]] = c(1.0, 0.0);
        expect[[3, 2]] = c(-1.0, 0.0);
        assert_eq!(m, expect);
    }

    #[test]
    fn jwt_missing_mode_is_error() {
        assert!(jordan_wigner(&FermiWord::create(3), &[1, 2]).is_err());
    }

    #[test]
    fn car_identities_under_jwt() {
        // {J(a_i), J(a_j^dag)} = delta_ij I and {J(a_i), J(a_j)} = 0 for d <= 4.
        let order: Vec<usize> = (0..4).collect();
        let dim = 16;
        for i in 0..4 {
            for j in 0..4 {
                let ai = jordan_wigner(&FermiWord::annihilate(i), &order).unwrap();
                let cj = jordan_wigner(&FermiWord::create(j), &order).unwrap();
                let anti = ai.dot(&cj) + cj.dot(&ai);
                for r in 0..dim {
                    for s in 0..dim {
                        let expect = if i == j && r == s { 1.0 } else { 0.0 };
                        assert!(
                            (anti[[r, s]] - c(expect, 0.0)).norm() <= 1e-12,
                            "CAR violated at i={i} j={j}"
                        );
                    }
                }
                let aj = jordan_wigner(&FermiWord::annihilate(j), &order).unwrap();
                let anti2 = ai.dot(&aj) + aj.dot(&ai);
                assert!(anti2.iter().all(|v| v.norm() <= 1e-12));
            }
        }
    }

    #[test]
    fn to_matrix_identity() {
        let p = OperatorPolynomial::identity(Kind::Spin, 3);
        let m = to_matrix(&p, &[1, 2]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(m[[i, j]], c(expect, 0.0));
            }
        }
    }

    #[test]
    fn to_matrix_zz_diagonal() {
        let z1 = OperatorPolynomial::pauli(3, 1, PauliAxis::Z).unwrap();
        let z2 = OperatorPolynomial::pauli(3, 2, PauliAxis::Z).unwrap();
        let zz = z1.mul(&z2).unwrap();
        let m = to_matrix(&zz, &[1, 2]).unwrap();
        let want = [1.0, -1.0, -1.0, 1.0];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(m[[i, i]], c(*w, 0.0));
        }
    }

    #[test]
    fn number_operator_matrix() {
        // n_1 on cluster [1] is diag(0, 1) in the |0>,|1> basis.
        let n1 = OperatorPolynomial::number(2, 1).unwrap();
        let m = to_matrix(&n1, &[1]).unwrap();
        assert_eq!(m, array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    }

    #[test]
    fn support_outside_cluster_is_error() {
        let p = OperatorPolynomial::pauli(4, 3, PauliAxis::X).unwrap();
        assert!(to_matrix(&p, &[0, 1]).is_err());
    }

    #[test]
    fn local_basis_single_site() {
        let spin = local_basis(&[0], Kind::Spin).unwrap();
        assert_eq!(spin.len(), 4);
        assert_eq!(spin[0], OperatorPolynomial::identity(Kind::Spin, 1));

        let fermi = local_basis(&[0], Kind::Fermion).unwrap();
        assert_eq!(fermi.len(), 4);
        assert_eq!(fermi[0], OperatorPolynomial::number(1, 0).unwrap());
        // Second element is a a^dag = 1 - n.
        let mut aad = OperatorPolynomial::identity(Kind::Fermion, 1);
        aad.sub_assign(&OperatorPolynomial::number(1, 0).unwrap()).unwrap();
        assert_eq!(fermi[1], aad);
        assert_eq!(fermi[2], OperatorPolynomial::annihilate(1, 0).unwrap());
        assert_eq!(fermi[3], OperatorPolynomial::create(1, 0).unwrap());
    }

    #[test]
    fn local_basis_spans_two_spin_sites() {
        // Gram matrix of the 16 matricized elements must have full rank.
        let basis = local_basis(&[0, 1], Kind::Spin).unwrap();
        assert_eq!(basis.len(), 16);
        let mats: Vec<Array2<C64>> =
            basis.iter().map(|b| to_matrix(b, &[0, 1]).unwrap()).collect();
        let mut gram = Array2::zeros((16, 16));
        for i in 0..16 {
            for j in 0..16 {
                let mut acc = c(0.0, 0.0);
                for r in 0..4 {
                    for s in 0..4 {
                        acc += mats[i][[r, s]].conj() * mats[j][[r, s]];
                    }
                }
                gram[[i, j]] = acc;
            }
        }
        // Determinant nonzero <=> full rank; use eigh on the Hermitian Gram.
        use ndarray_linalg::{Eigh, UPLO};
        let (vals, _) = gram.eigh(UPLO::Lower).unwrap();
        assert!(vals.iter().all(|&v| v > 1e-9), "Gram matrix is rank deficient: {vals:?}");
    }

    #[test]
    fn dense_hermitian_checks() {
        let good = array![[c(1.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(2.0, 0.0)]];
        assert!(DenseHermitian::new(good).is_ok());
        let bad = array![[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        assert!(DenseHermitian::new(bad).is_err());
    }
}
