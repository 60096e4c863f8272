//! Benchmark Hamiltonians decomposed as on-cluster plus pair terms.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::algebra::{Kind, OperatorPolynomial, PauliAxis};
use crate::graph::Graph;
use crate::{C64, Error, Result};

/// A Hamiltonian `H = Σ_i H_{C_i} + Σ_{i<j} H_{C_ij}` over a partition of
/// sites into clusters. Builders produce singleton clusters `C_i = {i}`;
/// larger clusters are accepted.
#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    pub kind: Kind,
    /// Disjoint clusters covering `0..num_sites`.
    pub clusters: Vec<Vec<usize>>,
    /// Interaction graph over cluster indices.
    pub graph: Graph,
    /// On-cluster terms, one per cluster (possibly zero).
    pub onsite: Vec<OperatorPolynomial>,
    /// Pair terms keyed by graph edges.
    pub pair: BTreeMap<(usize, usize), OperatorPolynomial>,
}

impl LocalHamiltonian {
    pub fn new(
        kind: Kind,
        clusters: Vec<Vec<usize>>,
        graph: Graph,
        onsite: Vec<OperatorPolynomial>,
        pair: BTreeMap<(usize, usize), OperatorPolynomial>,
    ) -> Result<Self> {
        let num_sites: usize = clusters.iter().map(|c| c.len()).sum();
        let mut seen = vec![false; num_sites];
        for c in &clusters {
            for &s in c {
                if s >= num_sites || seen[s] {
                    return Err(Error::InvalidInput(
                        "clusters must form a disjoint partition of the sites".into(),
                    ));
                }
                seen[s] = true;
            }
        }
        if graph.n != clusters.len() {
            return Err(Error::InvalidInput(format!(
                "graph has {} vertices but there are {} clusters",
                graph.n,
                clusters.len()
            )));
        }
        if onsite.len() != clusters.len() {
            return Err(Error::InvalidInput("one onsite term per cluster required".into()));
        }
        for (j, h) in onsite.iter().enumerate() {
            if h.kind() != kind {
                return Err(Error::KindMismatch);
            }
            if !h.support().iter().all(|s| clusters[j].contains(s)) {
                return Err(Error::InvalidInput(format!(
                    "onsite term {j} has support outside its cluster"
                )));
            }
            if !h.is_hermitian(1e-10) {
                return Err(Error::InvalidInput(format!("onsite term {j} is not Hermitian")));
            }
        }
        for (&(i, j), h) in &pair {
            if !graph.has_edge(i, j) {
                return Err(Error::InvalidInput(format!(
                    "pair term ({i},{j}) has no matching graph edge"
                )));
            }
            if h.kind() != kind {
                return Err(Error::KindMismatch);
            }
            let allowed: Vec<usize> =
                clusters[i].iter().chain(clusters[j].iter()).copied().collect();
            if !h.support().iter().all(|s| allowed.contains(s)) {
                return Err(Error::InvalidInput(format!(
                    "pair term ({i},{j}) has support outside its clusters"
                )));
            }
            if !h.is_hermitian(1e-10) {
                return Err(Error::InvalidInput(format!("pair term ({i},{j}) is not Hermitian")));
            }
        }
        Ok(LocalHamiltonian { kind, clusters, graph, onsite, pair })
    }

    pub fn num_sites(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Sum of all terms; reproduces the assembled Hamiltonian exactly.
    pub fn total(&self) -> Result<OperatorPolynomial> {
        let mut h = OperatorPolynomial::zero(self.kind, self.num_sites());
        for t in &self.onsite {
            h.add_assign(t)?;
        }
        for t in self.pair.values() {
            h.add_assign(t)?;
        }
        Ok(h)
    }
}

fn singleton_clusters(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

fn zero_onsite(kind: Kind, n: usize) -> Vec<OperatorPolynomial> {
    (0..n).map(|_| OperatorPolynomial::zero(kind, n)).collect()
}

/// Transverse-field Ising model: `H = -Σ_i h_i X_i - Σ_{i~j} J_ij Z_i Z_j`.
pub fn build_tfi(g: &Graph, h: &[f64], j: &[f64]) -> Result<LocalHamiltonian> {
    let n = g.n;
    if h.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} field values for {n} vertices",
            h.len()
        )));
    }
    if j.len() != g.num_edges() {
        return Err(Error::InvalidInput(format!(
            "{} couplings for {} edges",
            j.len(),
            g.num_edges()
        )));
    }
    let mut onsite = Vec::with_capacity(n);
    for (i, &hi) in h.iter().enumerate() {
        let x = OperatorPolynomial::pauli(n, i, PauliAxis::X)?;
        onsite.push(x.scaled(C64::new(-hi, 0.0)));
    }
    let mut pair = BTreeMap::new();
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        let zz = OperatorPolynomial::pauli(n, a, PauliAxis::Z)?
            .mul(&OperatorPolynomial::pauli(n, b, PauliAxis::Z)?)?;
        pair.insert((a, b), zz.scaled(C64::new(-j[e], 0.0)));
    }
    LocalHamiltonian::new(Kind::Spin, singleton_clusters(n), g.clone(), onsite, pair)
}

/// Heisenberg XXZ model: `H = Σ_{i~j} X_i X_j + Y_i Y_j + J_z Z_i Z_j`.
pub fn build_xxz(g: &Graph, jz: f64) -> Result<LocalHamiltonian> {
    let n = g.n;
    let mut pair = BTreeMap::new();
    for &(a, b) in &g.edges {
        let mut term = OperatorPolynomial::pauli(n, a, PauliAxis::X)?
            .mul(&OperatorPolynomial::pauli(n, b, PauliAxis::X)?)?;
        term.add_assign(
            &OperatorPolynomial::pauli(n, a, PauliAxis::Y)?
                .mul(&OperatorPolynomial::pauli(n, b, PauliAxis::Y)?)?,
        )?;
        term.add_assign(
            &OperatorPolynomial::pauli(n, a, PauliAxis::Z)?
                .mul(&OperatorPolynomial::pauli(n, b, PauliAxis::Z)?)?
                .scaled(C64::new(jz, 0.0)),
        )?;
        pair.insert((a, b), term);
    }
    LocalHamiltonian::new(Kind::Spin, singleton_clusters(n), g.clone(), zero_onsite(Kind::Spin, n), pair)
}

/// Spinless Hubbard model:
/// `H = -t Σ_{i~j} (a_i^dag a_j + a_j^dag a_i) + U Σ_{i~j} (n_i - 1/2)(n_j - 1/2)`,
/// with the quartic term expanded to normal order.
pub fn build_hubbard_spinless(g: &Graph, t: f64, u: f64) -> Result<LocalHamiltonian> {
    let n = g.n;
    let half = C64::new(0.5, 0.0);
    let mut pair = BTreeMap::new();
    for &(a, b) in &g.edges {
        let hop_ab = OperatorPolynomial::create(n, a)?.mul(&OperatorPolynomial::annihilate(n, b)?)?;
        let hop_ba = OperatorPolynomial::create(n, b)?.mul(&OperatorPolynomial::annihilate(n, a)?)?;
        let mut term = hop_ab.plus(&hop_ba)?.scaled(C64::new(-t, 0.0));
        let na = OperatorPolynomial::number(n, a)?
            .minus(&OperatorPolynomial::constant(Kind::Fermion, n, half))?;
        let nb = OperatorPolynomial::number(n, b)?
            .minus(&OperatorPolynomial::constant(Kind::Fermion, n, half))?;
        term.add_assign(&na.mul(&nb)?.scaled(C64::new(u, 0.0)))?;
        pair.insert((a, b), term);
    }
    LocalHamiltonian::new(
        Kind::Fermion,
        singleton_clusters(n),
        g.clone(),
        zero_onsite(Kind::Fermion, n),
        pair,
    )
}

/// Box-Muller transform over a seeded uniform stream. Draws are consumed
/// one at a time with the paired value cached, so the draw order is exactly
/// the order of requests.
struct BoxMuller {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl BoxMuller {
    fn new(seed: u64) -> Self {
        BoxMuller { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.random::<f64>(); // (0, 1]
        let u2: f64 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    fn next(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.next_standard()
    }
}

/// Quantum Sherrington-Kirkpatrick model: complete graph with
/// `h_i ~ N(0, h0^2)` and `J_ij ~ N(0, J0^2 / n)`. Fields are drawn first,
/// then couplings in edge lexicographic order.
pub fn build_sk(n: usize, h0: f64, j0: f64, seed: u64) -> Result<LocalHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidInput("SK model needs at least two spins".into()));
    }
    let g = Graph::complete(n);
    let mut gauss = BoxMuller::new(seed);
    let h: Vec<f64> = (0..n).map(|_| gauss.next(0.0, h0)).collect();
    let j_std = (j0 * j0 / n as f64).sqrt();
    let j: Vec<f64> = (0..g.num_edges()).map(|_| gauss.next(0.0, j_std)).collect();
    build_tfi(&g, &h, &j)
}

/// Disordered ferromagnet: constant field `h`, couplings
/// `J_ij ~ N(mean, sigma^2)` in edge lexicographic order.
pub fn build_disordered_tfi(
    g: &Graph,
    h: f64,
    mean: f64,
    sigma: f64,
    seed: u64,
) -> Result<LocalHamiltonian> {
    if sigma < 0.0 {
        return Err(Error::InvalidInput("sigma must be nonnegative".into()));
    }
    let mut gauss = BoxMuller::new(seed);
    let fields = vec![h; g.n];
    let j: Vec<f64> = (0..g.num_edges()).map(|_| gauss.next(mean, sigma)).collect();
    build_tfi(g, &fields, &j)
}

/// Quadratic (free) fermions `H = Σ_ij T_ij a_i^dag a_j` for Hermitian `T`:
/// diagonal entries become on-site number terms, nonzero off-diagonal
/// entries become hopping edges.
pub fn build_quadratic_fermion(t: &Array2<C64>) -> Result<LocalHamiltonian> {
    let (r, c) = t.dim();
    if r != c {
        return Err(Error::InvalidInput("coefficient matrix must be square".into()));
    }
    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..r {
        for j in 0..r {
            if (t[[i, j]] - t[[j, i]].conj()).norm() > 1e-12 * (1.0 + scale) {
                return Err(Error::InvalidInput("coefficient matrix is not Hermitian".into()));
            }
        }
    }
    let n = r;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if t[[i, j]].norm() > 0.0 {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::new(n, edges)?;
    let mut onsite = Vec::with_capacity(n);
    for i in 0..n {
        onsite.push(OperatorPolynomial::number(n, i)?.scaled(t[[i, i]]));
    }
    let mut pair = BTreeMap::new();
    for &(a, b) in &g.edges {
        let mut term = OperatorPolynomial::create(n, a)?
            .mul(&OperatorPolynomial::annihilate(n, b)?)?
            .scaled(t[[a, b]]);
        term.add_assign(
            &OperatorPolynomial::create(n, b)?
                .mul(&OperatorPolynomial::annihilate(n, a)?)?
                .scaled(t[[b, a]]),
        )?;
        pair.insert((a, b), term);
    }
    LocalHamiltonian::new(Kind::Fermion, singleton_clusters(n), g, onsite, pair)
}

/// Exact free-fermion ground energy `Σ_{eps_j < 0} eps_j` from the
/// eigenvalues of the coefficient matrix.
pub fn free_fermion_energy(t: &Array2<C64>) -> Result<f64> {
    use ndarray_linalg::{Eigh, UPLO};
    let (vals, _) = t
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
    Ok(vals.iter().filter(|&&v| v < 0.0).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_site_tfi() {
        let g = Graph::empty(1);
        let h = build_tfi(&g, &[1.0], &[]).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_site_tfi_ground_energy() {
        // h = J = 1 on a single edge: E0 = -sqrt(5).
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let h = build_tfi(&g, &[1.0, 1.0], &[1.0]).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -5.0_f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn edgeless_tfi_is_product() {
        let g = Graph::empty(4);
        let h = build_tfi(&g, &[1.0; 4], &[]).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -4.0, epsilon = 1e-10);
    }

    #[test]
    fn heisenberg_dimer() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let h = build_xxz(&g, 1.0).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -3.0, epsilon = 1e-10);
    }

    #[test]
    fn xxz_dimer_easy_axis() {
        // J_z = -1: spectrum of XX+YY-ZZ on two sites has minimum -2... fixed
        // by the diagonalization oracle below.
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let h = build_xxz(&g, -1.0).unwrap();
        let full = exact::full_matrix(&h.total().unwrap()).unwrap();
        use ndarray_linalg::{Eigh, UPLO};
        let hr = full.map(|v| v.re);
        let (vals, _) = hr.eigh(UPLO::Lower).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, vals[0], epsilon = 1e-12);
        assert_abs_diff_eq!(res.ground_energy, -3.0, epsilon = 1e-10);
    }

    #[test]
    fn empty_xxz_is_zero() {
        let g = Graph::empty(3);
        let h = build_xxz(&g, 0.7).unwrap();
        assert!(h.total().unwrap().is_zero());
    }

    #[test]
    fn hubbard_single_edge_hopping_only() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let h = build_hubbard_spinless(&g, 1.0, 0.0).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn hubbard_interaction_only() {
        // t = 0: H = U (n_0 - 1/2)(n_1 - 1/2), minimum is -|U|/4.
        for u in [2.0, -3.0] {
            let g = Graph::new(2, vec![(0, 1)]).unwrap();
            let h = build_hubbard_spinless(&g, 0.0, u).unwrap();
            let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
            assert_abs_diff_eq!(res.ground_energy, -u.abs() / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hubbard_empty_graph() {
        let g = Graph::empty(3);
        let h = build_hubbard_spinless(&g, 1.0, 1.0).unwrap();
        assert!(h.total().unwrap().is_zero());
    }

    #[test]
    fn sk_determinism_and_zero_variance() {
        let a = build_sk(5, 0.0, 0.0, 3).unwrap();
        assert!(a.total().unwrap().is_zero());
        let b = build_sk(5, 1.0, 2.0, 11).unwrap();
        let c2 = build_sk(5, 1.0, 2.0, 11).unwrap();
        assert_eq!(b.total().unwrap(), c2.total().unwrap());
    }

    #[test]
    fn sk_coupling_variance_matches() {
        // Sample variance of J over many draws within 10% of J0^2 / n.
        let n = 6;
        let j0 = 1.5;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..700 {
            let h = build_sk(n, 0.0, j0, seed).unwrap();
            for term in h.pair.values() {
                let coeff = -term.terms().next().unwrap().1.re; // -J zz
                sum += coeff;
                sum_sq += coeff * coeff;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = sum_sq / count as f64 - mean * mean;
        let expect = j0 * j0 / n as f64;
        assert!(
            (var - expect).abs() <= 0.1 * expect,
            "variance {var} vs expected {expect} over {count} draws"
        );
    }

    #[test]
    fn disordered_tfi_zero_sigma_matches_uniform() {
        let g = Graph::erdos_renyi(5, 0.6, 2).unwrap();
        let a = build_disordered_tfi(&g, 1.0, 0.8, 0.0, 77).unwrap();
        let b = build_tfi(&g, &[1.0; 5], &vec![0.8; g.num_edges()]).unwrap();
        assert_eq!(a.total().unwrap(), b.total().unwrap());
    }

    #[test]
    fn disordered_tfi_mean_estimate() {
        let g = Graph::complete(6);
        let mut sum = 0.0;
        let mut count = 0;
        let sigma = 0.3;
        for seed in 0..700 {
            let h = build_disordered_tfi(&g, 1.0, 1.0, sigma, seed).unwrap();
            for term in h.pair.values() {
                sum += -term.terms().next().unwrap().1.re;
                count += 1;
            }
        }
        let mean: f64 = sum / count as f64;
        // 3 sigma / sqrt(count) band around the true mean.
        let band = 3.0 * sigma / (count as f64).sqrt();
        assert!((mean - 1.0).abs() <= band, "mean {mean}, band {band}");
    }

    #[test]
    fn quadratic_fermion_diagonal() {
        let t = array![[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        let h = build_quadratic_fermion(&t).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(free_fermion_energy(&t).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_fermion_hopping() {
        let t = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let h = build_quadratic_fermion(&t).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(res.ground_energy, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn quadratic_fermion_random_matches_band_filling() {
        let mut gauss = BoxMuller::new(99);
        let n = 5;
        let mut t = Array2::zeros((n, n));
        for i in 0..n {
            t[[i, i]] = c(gauss.next(0.0, 1.0), 0.0);
            for j in i + 1..n {
                let v = c(gauss.next(0.0, 1.0), gauss.next(0.0, 1.0));
                t[[i, j]] = v;
                t[[j, i]] = v.conj();
            }
        }
        let h = build_quadratic_fermion(&t).unwrap();
        let res = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap();
        assert_abs_diff_eq!(
            res.ground_energy,
            free_fermion_energy(&t).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn non_hermitian_coefficients_rejected() {
        let t = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)]];
        assert!(build_quadratic_fermion(&t).is_err());
    }

    #[test]
    fn totals_are_hermitian_and_relabeling_invariant() {
        let g = Graph::erdos_renyi(6, 0.5, 13).unwrap();
        let h = build_xxz(&g, 0.7).unwrap();
        assert!(h.total().unwrap().is_hermitian(1e-12));
        let e0 = exact::ground(&h, exact::DEFAULT_ED_CAP).unwrap().ground_energy;

        // Relabel sites by a fixed permutation and re-diagonalize.
        let perm = [3usize, 0, 5, 1, 4, 2];
        let edges: Vec<(usize, usize)> =
            g.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let g2 = Graph::new(6, edges).unwrap();
        let h2 = build_xxz(&g2, 0.7).unwrap();
        let e1 = exact::ground(&h2, exact::DEFAULT_ED_CAP).unwrap().ground_energy;
        assert_abs_diff_eq!(e0, e1, epsilon = 1e-9);
    }
}
