//! Dense exact diagonalization: ground energies and states, exact
//! marginals, expectations. Ground truth for everything else in the crate.
//!
//! Spin marginals are partial traces. Fermionic marginals are obtained by
//! a moment-matching linear solve against the local operator basis, because
//! the global Jordan-Wigner Z-strings break the naive partial trace for
//! non-contiguous subsets: the returned matrix is the unique Hermitian
//! `rho_C` with `tr(rho_C M(m)) = <psi| J(m) |psi>` for every basis element
//! `m` of the local algebra.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Solve, UPLO};

use crate::algebra::{
    apply_monomial, local_basis, position_map, to_matrix, Kind, Monomial, OperatorPolynomial,
};
use crate::models::LocalHamiltonian;
use crate::{C64, Error, Result};

/// Default cap on the total site count for dense diagonalization.
pub const DEFAULT_ED_CAP: usize = 14;

/// Spectral gap below which the ground level is flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Minimal eigenpair of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub ground_energy: f64,
    /// Unit-norm ground state over the full `2^n` basis.
    pub ground_state: Array1<C64>,
    /// True when the gap to the next level is below [`DEGENERACY_GAP`].
    pub degeneracy_flag: bool,
}

/// A trace-one Hermitian matrix on the Hilbert space of an ordered subset
/// of sites/modes.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    /// Ordered site list; the first entry maps to the most significant bit.
    pub subsystem: Vec<usize>,
    pub mat: Array2<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Validate trace one, Hermiticity and approximate positivity.
    pub fn validate(&self, tol_trace: f64, tol_eig: f64) -> Result<()> {
        let tr: C64 = (0..self.dim()).map(|i| self.mat[[i, i]]).sum();
        if (tr - C64::new(1.0, 0.0)).norm() > tol_trace {
            return Err(Error::Internal(format!("density matrix trace {tr}")));
        }
        let (vals, _) = self
            .mat
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tol_eig {
            return Err(Error::Internal(format!("density matrix min eigenvalue {min:.3e}")));
        }
        Ok(())
    }
}

/// Assemble the full `2^n` matrix of a polynomial with sites in global
/// order `0..n`. Monomials act as generalized permutations, so assembly is
/// `O(2^n)` per term.
pub fn full_matrix(p: &OperatorPolynomial) -> Result<Array2<C64>> {
    let n = p.num_sites();
    let order: Vec<usize> = (0..n).collect();
    to_matrix(p, &order)
}

/// Minimal eigenpair via dense Hermitian eigendecomposition. Real symmetric
/// matrices take the faster real path.
pub fn ground_of_poly(p: &OperatorPolynomial, ed_cap: usize) -> Result<SpectrumResult> {
    let n = p.num_sites();
    if n > ed_cap {
        return Err(Error::ResourceLimit(format!(
            "{n} sites exceed the diagonalization cap {ed_cap}"
        )));
    }
    let h = full_matrix(p)?;
    ground_of_matrix(&h)
}

/// Minimal eigenpair of an explicit Hermitian matrix.
pub fn ground_of_matrix(h: &Array2<C64>) -> Result<SpectrumResult> {
    let dim = h.nrows();
    let scale = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let is_real = h.iter().all(|v| v.im.abs() <= 1e-12 * (1.0 + scale));
    let (vals, ground): (Vec<f64>, Array1<C64>) = if is_real {
        let hr = h.map(|v| v.re);
        let (vals, vecs) = hr
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
        let g = vecs.column(0).map(|&v| C64::new(v, 0.0));
        (vals.to_vec(), g)
    } else {
        let (vals, vecs) = h
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
        (vals.to_vec(), vecs.column(0).to_owned())
    };
    let degeneracy_flag = dim > 1 && (vals[1] - vals[0]).abs() < DEGENERACY_GAP;
    Ok(SpectrumResult { ground_energy: vals[0], ground_state: ground, degeneracy_flag })
}

/// Ground state of an assembled local Hamiltonian.
pub fn ground(h: &LocalHamiltonian, ed_cap: usize) -> Result<SpectrumResult> {
    ground_of_poly(&h.total()?, ed_cap)
}

/// `<psi| P |psi>`; real to round-off when `P` is Hermitian.
pub fn expectation(p: &OperatorPolynomial, state: &Array1<C64>) -> Result<C64> {
    let n = p.num_sites();
    let dim = 1usize << n;
    if state.len() != dim {
        return Err(Error::InvalidInput(format!(
            "state has length {} but the polynomial lives on {n} sites",
            state.len()
        )));
    }
    let order: Vec<usize> = (0..n).collect();
    let positions = position_map(&order)?;
    let mut acc = C64::new(0.0, 0.0);
    for (m, &coeff) in p.terms() {
        let mut term = C64::new(0.0, 0.0);
        for col in 0..dim {
            if state[col].norm() == 0.0 {
                continue;
            }
            if let Some((row, phase)) = apply_monomial(m, &positions, n, col) {
                term += state[row].conj() * phase * state[col];
            }
        }
        acc += coeff * term;
    }
    Ok(acc)
}

/// `tr(rho M(m))` with `rho` given on an ordered subsystem.
pub fn trace_with_monomial(rho: &DensityMatrix, m: &Monomial) -> Result<C64> {
    let n = rho.subsystem.len();
    let positions = position_map(&rho.subsystem)?;
    let dim = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for col in 0..dim {
        if let Some((row, phase)) = apply_monomial(m, &positions, n, col) {
            acc += rho.mat[[col, row]] * phase;
        }
    }
    Ok(acc)
}

/// `tr(rho M(p))` for a polynomial supported inside the subsystem.
pub fn trace_with_polynomial(rho: &DensityMatrix, p: &OperatorPolynomial) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (m, &c) in p.terms() {
        acc += c * trace_with_monomial(rho, m)?;
    }
    Ok(acc)
}

fn hermitize(m: &mut Array2<C64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            m[[i, j]] = v;
            m[[j, i]] = v.conj();
        }
        m[[i, i]] = C64::new(m[[i, i]].re, 0.0);
    }
}

/// Marginal of a pure state on `subset` (ordered, possibly non-contiguous).
pub fn marginal(state: &Array1<C64>, kind: Kind, subset: &[usize]) -> Result<DensityMatrix> {
    let dim = state.len();
    let n = dim.trailing_zeros() as usize;
    if dim != 1usize << n {
        return Err(Error::InvalidInput("state length is not a power of two".into()));
    }
    if subset.is_empty() {
        return Err(Error::InvalidInput("subset must be nonempty".into()));
    }
    if subset.iter().any(|&s| s >= n) {
        return Err(Error::InvalidInput("subset site out of range".into()));
    }
    match kind {
        Kind::Spin => spin_marginal_pure(state, n, subset),
        Kind::Fermion => {
            let evaluate = |p: &OperatorPolynomial| expectation(p, state);
            moment_matched_marginal(subset, kind, n, evaluate)
        }
    }
}

/// Restrict (or reorder) a density matrix to `subset` of its subsystem.
pub fn marginal_of_density(
    rho: &DensityMatrix,
    kind: Kind,
    subset: &[usize],
) -> Result<DensityMatrix> {
    if subset.is_empty() {
        return Err(Error::InvalidInput("subset must be nonempty".into()));
    }
    for s in subset {
        if !rho.subsystem.contains(s) {
            return Err(Error::InvalidInput(format!(
                "site {s} is not part of the subsystem"
            )));
        }
    }
    match kind {
        Kind::Spin => spin_marginal_density(rho, subset),
        Kind::Fermion => {
            let num_sites = rho.subsystem.iter().chain(subset.iter()).max().unwrap() + 1;
            let evaluate = |p: &OperatorPolynomial| trace_with_polynomial(rho, p);
            moment_matched_marginal(subset, kind, num_sites, evaluate)
        }
    }
}

fn spin_marginal_pure(state: &Array1<C64>, n: usize, subset: &[usize]) -> Result<DensityMatrix> {
    let k = subset.len();
    let env: Vec<usize> = (0..n).filter(|s| !subset.contains(s)).collect();
    let sub_dim = 1usize << k;
    let env_dim = 1usize << env.len();
    let compose = |sub_idx: usize, env_idx: usize| -> usize {
        let mut global = 0usize;
        for (pos, &site) in subset.iter().enumerate() {
            if (sub_idx >> (k - 1 - pos)) & 1 == 1 {
                global |= 1 << (n - 1 - site);
            }
        }
        for (pos, &site) in env.iter().enumerate() {
            if (env_idx >> (env.len() - 1 - pos)) & 1 == 1 {
                global |= 1 << (n - 1 - site);
            }
        }
        global
    };
    let mut mat = Array2::zeros((sub_dim, sub_dim));
    for i in 0..sub_dim {
        for j in 0..sub_dim {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env_dim {
                acc += state[compose(i, e)] * state[compose(j, e)].conj();
            }
            mat[[i, j]] = acc;
        }
    }
    hermitize(&mut mat);
    Ok(DensityMatrix { subsystem: subset.to_vec(), mat })
}

fn spin_marginal_density(rho: &DensityMatrix, subset: &[usize]) -> Result<DensityMatrix> {
    let n = rho.subsystem.len();
    let k = subset.len();
    let pos_of: Vec<usize> = subset
        .iter()
        .map(|s| rho.subsystem.iter().position(|t| t == s).unwrap())
        .collect();
    let env: Vec<usize> =
        (0..n).filter(|p| !pos_of.contains(p)).collect();
    let sub_dim = 1usize << k;
    let env_dim = 1usize << env.len();
    let compose = |sub_idx: usize, env_idx: usize| -> usize {
        let mut local = 0usize;
        for (slot, &p) in pos_of.iter().enumerate() {
            if (sub_idx >> (k - 1 - slot)) & 1 == 1 {
                local |= 1 << (n - 1 - p);
            }
        }
        for (slot, &p) in env.iter().enumerate() {
            if (env_idx >> (env.len() - 1 - slot)) & 1 == 1 {
                local |= 1 << (n - 1 - p);
            }
        }
        local
    };
    let mut mat = Array2::zeros((sub_dim, sub_dim));
    for i in 0..sub_dim {
        for j in 0..sub_dim {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env_dim {
                acc += rho.mat[[compose(i, e), compose(j, e)]];
            }
            mat[[i, j]] = acc;
        }
    }
    hermitize(&mut mat);
    Ok(DensityMatrix { subsystem: subset.to_vec(), mat })
}

/// Solve for the unique Hermitian matrix on `subset` whose moments against
/// the local basis match the supplied evaluator.
fn moment_matched_marginal(
    subset: &[usize],
    kind: Kind,
    num_sites: usize,
    evaluate: impl Fn(&OperatorPolynomial) -> Result<C64>,
) -> Result<DensityMatrix> {
    let basis = local_basis(subset, kind)?;
    let nb = basis.len();
    let dim = 1usize << subset.len();
    let mats: Vec<Array2<C64>> = basis
        .iter()
        .map(|b| to_matrix(b, subset))
        .collect::<Result<_>>()?;
    // rho = sum_p y_p B_p with sum_p y_p tr(B_p B_m) = v_m.
    let mut gram: Array2<C64> = Array2::zeros((nb, nb));
    for (mi, bm) in mats.iter().enumerate() {
        for (pi, bp) in mats.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..dim {
                for c in 0..dim {
                    acc += bp[[r, c]] * bm[[c, r]];
                }
            }
            gram[[mi, pi]] = acc;
        }
    }
    let mut rhs: Array1<C64> = Array1::zeros(nb);
    for (mi, b) in basis.iter().enumerate() {
        // Widen the basis polynomial to the ambient system size.
        let mut wide = OperatorPolynomial::zero(kind, num_sites);
        for (m, &c) in b.terms() {
            wide.add_term(m.clone(), c)?;
        }
        rhs[mi] = evaluate(&wide)?;
    }
    let y = gram
        .solve(&rhs)
        .map_err(|_| Error::Internal("singular basis Gram matrix".into()))?;
    let mut mat: Array2<C64> = Array2::zeros((dim, dim));
    for (p, coeff) in y.iter().enumerate() {
        mat.scaled_add(*coeff, &mats[p]);
    }
    hermitize(&mut mat);
    Ok(DensityMatrix { subsystem: subset.to_vec(), mat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FermiWord, PauliAxis};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_spin_ground_state() {
        // H = -sigma^x has ground energy -1 with state (|0>+|1>)/sqrt(2).
        let h = OperatorPolynomial::pauli(1, 0, PauliAxis::X).unwrap().scaled(c(-1.0, 0.0));
        let res = ground_of_poly(&h, DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -1.0, epsilon = 1e-12);
        assert!(!res.degeneracy_flag);
        let v = &res.ground_state;
        assert_abs_diff_eq!((v[0] * v[1].conj()).re, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn zero_hamiltonian_is_degenerate() {
        let h = OperatorPolynomial::zero(Kind::Spin, 2);
        let res = ground_of_poly(&h, DEFAULT_ED_CAP).unwrap();
        assert_eq!(res.ground_energy, 0.0);
        assert!(res.degeneracy_flag);
    }

    #[test]
    fn cap_is_enforced() {
        let h = OperatorPolynomial::zero(Kind::Spin, 6);
        assert!(matches!(ground_of_poly(&h, 5), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn expectation_examples() {
        // <+|sigma^x|+> = 1
        let x = OperatorPolynomial::pauli(1, 0, PauliAxis::X).unwrap();
        let plus = Array1::from(vec![c(1.0, 0.0), c(1.0, 0.0)]) / C64::new(2.0_f64.sqrt(), 0.0);
        let e = expectation(&x, &plus).unwrap();
        assert_abs_diff_eq!(e.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);

        // <Omega| a_0 a_0^dag |Omega> = 1
        let mut p = OperatorPolynomial::annihilate(1, 0).unwrap();
        p = p.mul(&OperatorPolynomial::create(1, 0).unwrap()).unwrap();
        let vacuum = Array1::from(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_abs_diff_eq!(expectation(&p, &vacuum).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn marginal_of_product_state() {
        // |0> (x) |+>, marginal on site 1 is 0.5 [[1,1],[1,1]].
        let s = 1.0 / 2.0_f64.sqrt();
        let state = Array1::from(vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let rho = marginal(&state, Kind::Spin, &[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(rho.mat[[i, j]].re, 0.5, epsilon = 1e-12);
            }
        }
        rho.validate(1e-10, 1e-9).unwrap();
    }

    #[test]
    fn marginal_of_bell_state() {
        let s = 1.0 / 2.0_f64.sqrt();
        let state = Array1::from(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let rho = marginal(&state, Kind::Spin, &[0]).unwrap();
        assert_abs_diff_eq!(rho.mat[[0, 0]].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.mat[[1, 1]].re, 0.5, epsilon = 1e-12);
        assert!(rho.mat[[0, 1]].norm() <= 1e-12);
    }

    #[test]
    fn fermionic_marginal_of_occupied_mode() {
        // State a_0^dag |Omega> on 2 modes; marginal on mode 1 is |0><0|.
        let state = Array1::from(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let rho = marginal(&state, Kind::Fermion, &[1]).unwrap();
        assert_abs_diff_eq!(rho.mat[[0, 0]].re, 1.0, epsilon = 1e-12);
        assert!(rho.mat[[1, 1]].norm() <= 1e-12);
        // Cross-check against the direct computation: <n_1> = 0.
        let n1 = OperatorPolynomial::number(2, 1).unwrap();
        assert!(expectation(&n1, &state).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn fermionic_marginal_matches_moments_on_entangled_state() {
        // (a_0^dag + a_2^dag)/sqrt(2) |Omega> on 3 modes; check the marginal
        // on the non-contiguous pair {0, 2} reproduces all basis moments.
        let s = 1.0 / 2.0_f64.sqrt();
        let mut state = Array1::from(vec![c(0.0, 0.0); 8]);
        state[0b100] = c(s, 0.0);
        state[0b001] = c(s, 0.0);
        let rho = marginal(&state, Kind::Fermion, &[0, 2]).unwrap();
        rho.validate(1e-10, 1e-9).unwrap();
        for b in local_basis(&[0, 2], Kind::Fermion).unwrap() {
            let mut wide = OperatorPolynomial::zero(Kind::Fermion, 3);
            for (m, &cc) in b.terms() {
                wide.add_term(m.clone(), cc).unwrap();
            }
            let direct = expectation(&wide, &state).unwrap();
            let from_marginal = trace_with_polynomial(&rho, &b).unwrap();
            assert!(
                (direct - from_marginal).norm() <= 1e-10,
                "moment mismatch for {b}: {direct} vs {from_marginal}"
            );
        }
        // The odd monomial a_0 must also agree (and not vanish trivially deep
        // inside the solve): its expectation is zero here by particle number.
        let a0 = Monomial::Fermi(FermiWord::annihilate(0));
        assert!(trace_with_monomial(&rho, &a0).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn density_restriction_consistency() {
        // marginal(marginal(rho, {0,1}), {0}) = marginal(rho, {0}).
        let s = 0.5_f64.sqrt();
        let state = Array1::from(vec![
            c(s, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(s, 0.0),
        ]);
        let rho01 = marginal(&state, Kind::Spin, &[0, 1]).unwrap();
        let rho0_direct = marginal(&state, Kind::Spin, &[0]).unwrap();
        let rho0_nested = marginal_of_density(&rho01, Kind::Spin, &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho0_direct.mat[[i, j]] - rho0_nested.mat[[i, j]]).norm() <= 1e-10);
            }
        }
    }
}
