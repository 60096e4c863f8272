//! Shared machinery for the relaxation builders: the concatenated local
//! operator basis behind the moment matrix, Hermitian matrix-variable
//! parameterizations, and conversions between matrices on a cluster and
//! operator polynomials.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Solve, UPLO};
use vembed_conic::SparseSym;

use crate::algebra::{local_basis, to_matrix, FermiWord, Kind, Monomial, OperatorPolynomial};
use crate::layout::ClusterLayout;
use crate::models::LocalHamiltonian;
use crate::{C64, Error, Result};

/// The ordered list `W_1`: local operator bases of every group,
/// concatenated, together with the group bookkeeping the builders need.
pub(crate) struct MomentBasis {
    pub kind: Kind,
    pub num_sites: usize,
    /// Sorted site list per group.
    pub group_sites: Vec<Vec<usize>>,
    /// Basis elements widened to the full system.
    pub elements: Vec<OperatorPolynomial>,
    /// Group owning each basis element.
    pub group_of: Vec<usize>,
    /// `lambda_max` of `Σ_α f_α^dag f_α` per group; bounds how far an
    /// eigenvalue shift of the moment matrix can move the constraint
    /// operators, used for certified value corrections.
    pub kappa: Vec<f64>,
}

impl MomentBasis {
    pub fn build(ham: &LocalHamiltonian, layout: &ClusterLayout) -> Result<Self> {
        let n = ham.num_sites();
        let m = layout.num_groups();
        let mut group_sites = Vec::with_capacity(m);
        let mut elements = Vec::new();
        let mut group_of = Vec::new();
        let mut kappa = Vec::with_capacity(m);
        for g in 0..m {
            let sites = layout.group_sites(ham, g);
            let basis = local_basis(&sites, ham.kind)?;
            let mut gram_sum = OperatorPolynomial::zero(ham.kind, n);
            for b in &basis {
                let wide = b.widened(n)?;
                gram_sum.add_assign(&wide.adjoint().mul(&wide)?)?;
                elements.push(wide);
                group_of.push(g);
            }
            let mat = to_matrix(&gram_sum, &sites)?;
            let (vals, _) = mat
                .eigh(UPLO::Lower)
                .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
            kappa.push(vals.iter().cloned().fold(0.0, f64::max));
            group_sites.push(sites);
        }
        Ok(MomentBasis { kind: ham.kind, num_sites: n, group_sites, elements, group_of, kappa })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn kappa_total(&self) -> f64 {
        self.kappa.iter().sum()
    }
}

/// One real parameter of a Hermitian matrix variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum HermParam {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

/// Parameters of an `n x n` complex Hermitian matrix (`n^2` of them), in a
/// fixed deterministic order.
pub(crate) fn herm_params(n: usize) -> Vec<HermParam> {
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(HermParam::Diag(k));
        for l in k + 1..n {
            out.push(HermParam::Re(k, l));
            out.push(HermParam::Im(k, l));
        }
    }
    out
}

/// Parameters of a traceless Hermitian matrix (`n^2 - 1`): diagonal
/// differences `E_kk - E_{n-1,n-1}` followed by the off-diagonal pairs.
pub(crate) fn traceless_herm_params(n: usize) -> Vec<HermParam> {
    let mut out = Vec::with_capacity(n * n - 1);
    for k in 0..n - 1 {
        out.push(HermParam::Diag(k));
    }
    for k in 0..n {
        for l in k + 1..n {
            out.push(HermParam::Re(k, l));
            out.push(HermParam::Im(k, l));
        }
    }
    out
}

/// Complex entries of a parameter's basis matrix. `traceless_dim` turns
/// `Diag(k)` into `E_kk - E_{d-1,d-1}`.
pub(crate) fn param_entries(p: HermParam, traceless_dim: Option<usize>) -> Vec<(usize, usize, C64)> {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    match p {
        HermParam::Diag(k) => match traceless_dim {
            Some(d) => vec![(k, k, one), (d - 1, d - 1, -one)],
            None => vec![(k, k, one)],
        },
        HermParam::Re(k, l) => vec![(k, l, one), (l, k, one)],
        HermParam::Im(k, l) => vec![(k, l, i), (l, k, -i)],
    }
}

/// Assemble a Hermitian matrix from parameter values.
pub(crate) fn herm_from_params(
    params: &[HermParam],
    values: &[f64],
    dim: usize,
    traceless: bool,
) -> Array2<C64> {
    let mut out = Array2::zeros((dim, dim));
    let td = traceless.then_some(dim);
    for (p, &v) in params.iter().zip(values.iter()) {
        for (r, c, e) in param_entries(*p, td) {
            out[[r, c]] += e * v;
        }
    }
    out
}

/// Real embedding of a sparse complex Hermitian matrix, as solver triplets.
pub(crate) fn embed_entries(entries: &[(usize, usize, C64)], dim: usize) -> SparseSym {
    let mut out = Vec::with_capacity(entries.len() * 4);
    for &(r, c, v) in entries {
        if v.re != 0.0 {
            out.push((r as u32, c as u32, v.re));
            out.push(((r + dim) as u32, (c + dim) as u32, v.re));
        }
        if v.im != 0.0 {
            out.push((r as u32, (c + dim) as u32, -v.im));
            out.push(((r + dim) as u32, c as u32, v.im));
        }
    }
    SparseSym { dim: 2 * dim, entries: out }
}

/// Dense complex Hermitian matrix to embedded solver triplets.
pub(crate) fn embed_dense(m: &Array2<C64>, tol: f64) -> Result<SparseSym> {
    let e = vembed_conic::embed_hermitian(m).map_err(|err| {
        Error::Internal(format!("embedding failed ({err}); Hermiticity tolerance {tol}"))
    })?;
    Ok(SparseSym::from_dense(&e, 1e-9).map_err(Error::Solver)?)
}

/// The operator polynomial a Hermitian parameter of the moment matrix
/// contributes to `tr(Y F)`: `f_k^dag f_k`, `f_k^dag f_l + f_l^dag f_k`, or
/// `i f_l^dag f_k - i f_k^dag f_l`.
pub(crate) fn moment_param_operator(
    basis: &MomentBasis,
    p: HermParam,
) -> Result<OperatorPolynomial> {
    let prod = |k: usize, l: usize| -> Result<OperatorPolynomial> {
        basis.elements[k].adjoint().mul(&basis.elements[l])
    };
    match p {
        HermParam::Diag(k) => prod(k, k),
        HermParam::Re(k, l) => prod(k, l)?.plus(&prod(l, k)?),
        HermParam::Im(k, l) => {
            let i = C64::new(0.0, 1.0);
            prod(l, k)?.scaled(i).plus(&prod(k, l)?.scaled(-i))
        }
    }
}

/// All `4^n` canonical fermionic words on a cluster: per mode, one of
/// {absent, a^dag a, a^dag, a}.
pub(crate) fn canonical_words(cluster: &[usize]) -> Vec<FermiWord> {
    let n = cluster.len();
    let total = 4usize.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut creations = Vec::new();
        let mut annihilations = Vec::new();
        for (slot, &mode) in cluster.iter().enumerate() {
            match (code >> (2 * (n - 1 - slot))) & 3 {
                0 => {}
                1 => {
                    creations.push(mode);
                    annihilations.push(mode);
                }
                2 => creations.push(mode),
                _ => annihilations.push(mode),
            }
        }
        creations.sort_unstable();
        annihilations.sort_unstable();
        annihilations.reverse();
        out.push(FermiWord::new(creations, annihilations).expect("sorted by construction"));
    }
    out
}

/// Expand dense matrices on a cluster into operator polynomials. Spin uses
/// Pauli orthogonality; fermionic matrices are matched against the
/// canonical-word matrices through one Gram factorization.
pub(crate) fn matrices_to_polynomials(
    mats: &[Array2<C64>],
    cluster: &[usize],
    kind: Kind,
) -> Result<Vec<OperatorPolynomial>> {
    let n = cluster.len();
    let dim = 1usize << n;
    let num_sites = cluster.iter().max().copied().unwrap_or(0) + 1;
    match kind {
        Kind::Spin => {
            let basis = local_basis(cluster, Kind::Spin)?;
            let basis_mats: Vec<Array2<C64>> =
                basis.iter().map(|b| to_matrix(b, cluster)).collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(mats.len());
            for m in mats {
                let mut poly = OperatorPolynomial::zero(Kind::Spin, num_sites);
                for (b, bm) in basis.iter().zip(basis_mats.iter()) {
                    let mut tr = C64::new(0.0, 0.0);
                    for r in 0..dim {
                        for c in 0..dim {
                            tr += bm[[r, c]] * m[[c, r]];
                        }
                    }
                    let coeff = tr / dim as f64;
                    if coeff.norm() > 1e-14 {
                        let (mono, base) = b.terms().next().expect("pauli basis is monomial");
                        poly.add_term(mono.clone(), coeff * base)?;
                    }
                }
                out.push(poly);
            }
            Ok(out)
        }
        Kind::Fermion => {
            let words = canonical_words(cluster);
            let nb = words.len();
            let word_mats: Vec<Array2<C64>> = words
                .iter()
                .map(|w| {
                    let mut p = OperatorPolynomial::zero(Kind::Fermion, num_sites);
                    p.add_term(Monomial::Fermi(w.clone()), C64::new(1.0, 0.0))?;
                    to_matrix(&p, cluster)
                })
                .collect::<Result<_>>()?;
            // Gram system: sum_w c_w <mat(w'), mat(w)> = <mat(w'), M>.
            let mut gram: Array2<C64> = Array2::zeros((nb, nb));
            for wp in 0..nb {
                for w in 0..nb {
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..dim {
                        for c in 0..dim {
                            acc += word_mats[wp][[r, c]].conj() * word_mats[w][[r, c]];
                        }
                    }
                    gram[[wp, w]] = acc;
                }
            }
            use ndarray_linalg::Factorize;
            let lu = gram
                .factorize()
                .map_err(|_| Error::Internal("canonical word Gram matrix is singular".into()))?;
            let mut out = Vec::with_capacity(mats.len());
            for m in mats {
                let mut rhs: Array1<C64> = Array1::zeros(nb);
                for wp in 0..nb {
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..dim {
                        for c in 0..dim {
                            acc += word_mats[wp][[r, c]].conj() * m[[r, c]];
                        }
                    }
                    rhs[wp] = acc;
                }
                let coeffs = lu
                    .solve(&rhs)
                    .map_err(|_| Error::Internal("Gram solve failed".into()))?;
                let mut poly = OperatorPolynomial::zero(Kind::Fermion, num_sites);
                for (w, c) in words.iter().zip(coeffs.iter()) {
                    if c.norm() > 1e-14 {
                        poly.add_term(Monomial::Fermi(w.clone()), *c)?;
                    }
                }
                out.push(poly);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::models::build_tfi;

    #[test]
    fn herm_param_count_and_assembly() {
        let params = herm_params(3);
        assert_eq!(params.len(), 9);
        let values: Vec<f64> = (0..9).map(|k| k as f64 + 1.0).collect();
        let m = herm_from_params(&params, &values, 3, false);
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[[i, j]] - m[[j, i]].conj()).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn traceless_params_have_zero_trace() {
        let params = traceless_herm_params(4);
        assert_eq!(params.len(), 15);
        for p in params {
            let entries = param_entries(p, Some(4));
            let tr: C64 = entries
                .iter()
                .filter(|(r, c, _)| r == c)
                .map(|&(_, _, v)| v)
                .sum();
            assert!(tr.norm() <= 1e-15);
        }
    }

    #[test]
    fn pauli_kappa_is_basis_size() {
        // For a Pauli basis every f^dag f = 1, so kappa = 4^{|V|}.
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let h = build_tfi(&g, &[1.0; 4], &[1.0, 1.0]).unwrap();
        let layout = ClusterLayout::uniform(4, 2).unwrap();
        let basis = MomentBasis::build(&h, &layout).unwrap();
        assert_eq!(basis.len(), 32);
        for k in &basis.kappa {
            assert!((k - 16.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn matrix_polynomial_round_trip_spin() {
        let cluster = [0usize, 2];
        let basis = local_basis(&cluster, Kind::Spin).unwrap();
        // Take a Hermitian combination, matricize, expand back.
        let mut p = basis[5].scaled(C64::new(0.7, 0.0));
        p.add_assign(&basis[10].scaled(C64::new(-0.2, 0.0))).unwrap();
        let m = to_matrix(&p, &cluster).unwrap();
        let back = matrices_to_polynomials(&[m], &cluster, Kind::Spin).unwrap();
        let diff = back[0].minus(&p).unwrap();
        assert!(diff.max_coeff() <= 1e-12);
    }

    #[test]
    fn matrix_polynomial_round_trip_fermion() {
        let cluster = [1usize, 3];
        let words = canonical_words(&cluster);
        assert_eq!(words.len(), 16);
        let mut p = OperatorPolynomial::zero(Kind::Fermion, 4);
        p.add_term(Monomial::Fermi(words[3].clone()), C64::new(0.5, 0.25)).unwrap();
        p.add_term(Monomial::Fermi(words[7].clone()), C64::new(-1.0, 0.0)).unwrap();
        let m = to_matrix(&p, &cluster).unwrap();
        let back = matrices_to_polynomials(&[m], &cluster, Kind::Fermion).unwrap();
        let diff = back[0].minus(&p).unwrap();
        assert!(diff.max_coeff() <= 1e-10);
    }
}
