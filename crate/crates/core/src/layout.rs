//! Group layouts over clusters and the convex splitting of a Hamiltonian
//! across pair fragments.
//!
//! A layout collects the clusters of a [`LocalHamiltonian`] into `M`
//! disjoint groups. Every unordered group pair carries a fragment
//! Hamiltonian
//!
//! ```text
//!   Hhat_{gd} = Σ_{i~j in E_gd} [ w_ij^{gd} H_{C_ij}
//!                                + w_{i~j,i}^{gd} H_{C_i} + w_{i~j,j}^{gd} H_{C_j} ]
//! ```
//!
//! whose sum over pairs reproduces `H` exactly whenever the weights satisfy
//! the per-edge and per-cluster normalizations. Clusters with no incident
//! edges have no edge slot to ride on; their on-cluster terms are spread
//! uniformly over the pairs containing their group so the reconstruction
//! identity still holds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::algebra::OperatorPolynomial;
use crate::models::LocalHamiltonian;
use crate::{C64, Error, Result};

pub type Pair = (usize, usize);

/// Disjoint groups of cluster indices covering all clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLayout {
    pub groups: Vec<Vec<usize>>,
}

impl ClusterLayout {
    pub fn from_groups(num_clusters: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; num_clusters];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidInput("empty group".into()));
            }
            for &c in g {
                if c >= num_clusters || seen[c] {
                    return Err(Error::InvalidInput(
                        "groups must partition the cluster indices".into(),
                    ));
                }
                seen[c] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("groups must cover all clusters".into()));
        }
        let mut groups = groups;
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        Ok(ClusterLayout { groups })
    }

    /// One group per cluster.
    pub fn singletons(num_clusters: usize) -> Self {
        ClusterLayout { groups: (0..num_clusters).map(|c| vec![c]).collect() }
    }

    /// Uniform `k x 1` groups `{0..k-1}, {k..2k-1}, ...`; the cluster count
    /// must be divisible by `k`.
    pub fn uniform(num_clusters: usize, k: usize) -> Result<Self> {
        if k == 0 || num_clusters % k != 0 {
            return Err(Error::InvalidInput(format!(
                "{num_clusters} clusters cannot be split into groups of {k}"
            )));
        }
        let groups = (0..num_clusters / k)
            .map(|g| (g * k..(g + 1) * k).collect())
            .collect();
        Ok(ClusterLayout { groups })
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_of(&self, cluster: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&cluster))
    }

    /// All unordered group pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<Pair> {
        let m = self.num_groups();
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for g in 0..m {
            for d in g + 1..m {
                out.push((g, d));
            }
        }
        out
    }

    /// Sites of a group, sorted ascending.
    pub fn group_sites(&self, ham: &LocalHamiltonian, group: usize) -> Vec<usize> {
        let mut sites: Vec<usize> = self.groups[group]
            .iter()
            .flat_map(|&c| ham.clusters[c].iter().copied())
            .collect();
        sites.sort_unstable();
        sites
    }

    /// Sites of the union `V_g ∪ V_d`, sorted ascending.
    pub fn pair_sites(&self, ham: &LocalHamiltonian, pair: Pair) -> Vec<usize> {
        let mut sites = self.group_sites(ham, pair.0);
        sites.extend(self.group_sites(ham, pair.1));
        sites.sort_unstable();
        sites
    }

    /// Merge groups `g < d` into one; the merged group takes `g`'s slot and
    /// `d` is removed, preserving the order of the others.
    pub fn merge(&self, g: usize, d: usize) -> Result<Self> {
        if g >= d || d >= self.num_groups() {
            return Err(Error::InvalidInput(format!("cannot merge groups {g} and {d}")));
        }
        let mut groups = Vec::with_capacity(self.num_groups() - 1);
        for (idx, grp) in self.groups.iter().enumerate() {
            if idx == g {
                let mut merged = grp.clone();
                merged.extend(self.groups[d].iter().copied());
                merged.sort_unstable();
                groups.push(merged);
            } else if idx != d {
                groups.push(grp.clone());
            }
        }
        Ok(ClusterLayout { groups })
    }

    /// Pairs `(g, d)` whose fragment contains the edge `i~j`: the single
    /// pair of the endpoint groups when they differ, every pair containing
    /// the common group otherwise.
    pub fn pairs_of_edge(&self, edge: Pair) -> Vec<Pair> {
        let gi = self.group_of(edge.0).expect("cluster in layout");
        let gj = self.group_of(edge.1).expect("cluster in layout");
        if gi != gj {
            vec![(gi.min(gj), gi.max(gj))]
        } else {
            self.pairs_containing(gi)
        }
    }

    pub fn pairs_containing(&self, group: usize) -> Vec<Pair> {
        (0..self.num_groups())
            .filter(|&other| other != group)
            .map(|other| (group.min(other), group.max(other)))
            .collect()
    }
}

/// Convex weights distributing edge terms, on-cluster terms and moment
/// diagonal blocks across pair fragments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitWeights {
    /// `(edge, pair) -> w_ij^{gd}`; sums to 1 over pairs for each edge.
    pub edge: BTreeMap<(Pair, Pair), f64>,
    /// `(edge, endpoint cluster, pair) -> w_{i~j,i}^{gd}`; sums to 1 over
    /// all (edge, pair) slots for each cluster with at least one edge.
    pub onsite: BTreeMap<(Pair, usize, Pair), f64>,
    /// `(cluster, pair) -> weight` for clusters with no incident edge.
    pub isolated: BTreeMap<(usize, Pair), f64>,
    /// `(pair, member group) -> omega`; sums to 1 over the pairs containing
    /// each group.
    pub omega: BTreeMap<(Pair, usize), f64>,
}

impl SplitWeights {
    pub fn omega_of(&self, pair: Pair, group: usize) -> f64 {
        self.omega.get(&(pair, group)).copied().unwrap_or(0.0)
    }

    /// Short digest of the weight values for provenance records.
    pub fn digest(&self) -> String {
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut feed = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        };
        for v in self.edge.values() {
            feed(*v);
        }
        for v in self.onsite.values() {
            feed(*v);
        }
        for v in self.isolated.values() {
            feed(*v);
        }
        for v in self.omega.values() {
            feed(*v);
        }
        format!("{hash:016x}")
    }
}

fn edge_pairs_table(ham: &LocalHamiltonian, layout: &ClusterLayout) -> Vec<(Pair, Vec<Pair>)> {
    ham.graph
        .edges
        .iter()
        .map(|&e| (e, layout.pairs_of_edge(e)))
        .collect()
}

/// Uniform weights: `1/|I_{i~j}|` per edge slot, `1/Σ_j |I_{i~j}|` per
/// on-cluster slot, `1/(M-1)` per moment-diagonal slot.
pub fn default_weights(ham: &LocalHamiltonian, layout: &ClusterLayout) -> Result<SplitWeights> {
    let m = layout.num_groups();
    if m < 2 {
        return Err(Error::InvalidInput("pair splitting needs at least two groups".into()));
    }
    let table = edge_pairs_table(ham, layout);
    let mut edge = BTreeMap::new();
    let mut onsite = BTreeMap::new();
    let mut slots_per_cluster: BTreeMap<usize, usize> = BTreeMap::new();
    for (e, pairs) in &table {
        if pairs.is_empty() {
            return Err(Error::InvalidInput(format!("edge {e:?} is not covered by any pair")));
        }
        for p in pairs {
            edge.insert((*e, *p), 1.0 / pairs.len() as f64);
        }
        *slots_per_cluster.entry(e.0).or_insert(0) += pairs.len();
        *slots_per_cluster.entry(e.1).or_insert(0) += pairs.len();
    }
    for (e, pairs) in &table {
        for p in pairs {
            for endpoint in [e.0, e.1] {
                onsite.insert((*e, endpoint, *p), 1.0 / slots_per_cluster[&endpoint] as f64);
            }
        }
    }
    let mut isolated = BTreeMap::new();
    for c in 0..ham.num_clusters() {
        if !slots_per_cluster.contains_key(&c) {
            let g = layout.group_of(c).unwrap();
            for p in layout.pairs_containing(g) {
                isolated.insert((c, p), 1.0 / (m - 1) as f64);
            }
        }
    }
    let mut omega = BTreeMap::new();
    for g in 0..m {
        for p in layout.pairs_containing(g) {
            omega.insert((p, g), 1.0 / (m - 1) as f64);
        }
    }
    Ok(SplitWeights { edge, onsite, isolated, omega })
}

/// Random admissible weights: an independent flat Dirichlet draw on every
/// normalization simplex, seeded.
pub fn random_weights(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    seed: u64,
) -> Result<SplitWeights> {
    let m = layout.num_groups();
    if m < 2 {
        return Err(Error::InvalidInput("pair splitting needs at least two groups".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirichlet = |k: usize| -> Vec<f64> {
        // Flat Dirichlet via normalized exponentials.
        let draws: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = draws.iter().sum();
        draws.iter().map(|d| d / total).collect()
    };
    let table = edge_pairs_table(ham, layout);
    let mut edge = BTreeMap::new();
    for (e, pairs) in &table {
        if pairs.is_empty() {
            return Err(Error::InvalidInput(format!("edge {e:?} is not covered by any pair")));
        }
        let w = dirichlet(pairs.len());
        for (p, wi) in pairs.iter().zip(w) {
            edge.insert((*e, *p), wi);
        }
    }
    let mut onsite = BTreeMap::new();
    let mut cluster_slots: BTreeMap<usize, Vec<(Pair, Pair)>> = BTreeMap::new();
    for (e, pairs) in &table {
        for p in pairs {
            cluster_slots.entry(e.0).or_default().push((*e, *p));
            cluster_slots.entry(e.1).or_default().push((*e, *p));
        }
    }
    for (cluster, slots) in &cluster_slots {
        let w = dirichlet(slots.len());
        for ((e, p), wi) in slots.iter().zip(w) {
            onsite.insert((*e, *cluster, *p), wi);
        }
    }
    let mut isolated = BTreeMap::new();
    for c in 0..ham.num_clusters() {
        if !cluster_slots.contains_key(&c) {
            let g = layout.group_of(c).unwrap();
            let pairs = layout.pairs_containing(g);
            let w = dirichlet(pairs.len());
            for (p, wi) in pairs.iter().zip(w) {
                isolated.insert((c, *p), wi);
            }
        }
    }
    let mut omega = BTreeMap::new();
    for g in 0..m {
        let pairs = layout.pairs_containing(g);
        let w = dirichlet(pairs.len());
        for (p, wi) in pairs.iter().zip(w) {
            omega.insert((*p, g), wi);
        }
    }
    Ok(SplitWeights { edge, onsite, isolated, omega })
}

/// Check the three normalization identities to `tol`.
pub fn validate_weights(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    w: &SplitWeights,
    tol: f64,
) -> Result<()> {
    for &e in &ham.graph.edges {
        let total: f64 = layout.pairs_of_edge(e).iter().map(|p| w.edge[&(e, *p)]).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "edge weights for {e:?} sum to {total}, not 1"
            )));
        }
    }
    for c in 0..ham.num_clusters() {
        let from_edges: f64 = w
            .onsite
            .iter()
            .filter(|((_, endpoint, _), _)| *endpoint == c)
            .map(|(_, v)| v)
            .sum();
        let from_isolated: f64 = w
            .isolated
            .iter()
            .filter(|((cluster, _), _)| *cluster == c)
            .map(|(_, v)| v)
            .sum();
        let total = from_edges + from_isolated;
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "on-cluster weights for cluster {c} sum to {total}, not 1"
            )));
        }
    }
    for g in 0..layout.num_groups() {
        let total: f64 = layout.pairs_containing(g).iter().map(|p| w.omega_of(*p, g)).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "moment weights for group {g} sum to {total}, not 1"
            )));
        }
    }
    Ok(())
}

/// Split the Hamiltonian across pair fragments; the values sum to the total
/// Hamiltonian exactly (term-map equality up to the pruning threshold).
pub fn split_hamiltonian(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    w: &SplitWeights,
) -> Result<BTreeMap<Pair, OperatorPolynomial>> {
    let n = ham.num_sites();
    let mut out: BTreeMap<Pair, OperatorPolynomial> = layout
        .pairs()
        .into_iter()
        .map(|p| (p, OperatorPolynomial::zero(ham.kind, n)))
        .collect();
    if out.is_empty() {
        return Err(Error::InvalidInput("layout has no pairs to split over".into()));
    }
    for &e in &ham.graph.edges {
        for p in layout.pairs_of_edge(e) {
            let frag = out.get_mut(&p).unwrap();
            if let Some(h_pair) = ham.pair.get(&e) {
                frag.add_assign(&h_pair.scaled(C64::new(w.edge[&(e, p)], 0.0)))?;
            }
            for endpoint in [e.0, e.1] {
                let weight = w.onsite.get(&(e, endpoint, p)).copied().unwrap_or(0.0);
                if weight != 0.0 {
                    frag.add_assign(&ham.onsite[endpoint].scaled(C64::new(weight, 0.0)))?;
                }
            }
        }
    }
    for ((cluster, p), weight) in &w.isolated {
        let frag = out.get_mut(p).ok_or_else(|| {
            Error::InvalidInput(format!("isolated weight references unknown pair {p:?}"))
        })?;
        frag.add_assign(&ham.onsite[*cluster].scaled(C64::new(*weight, 0.0)))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::models::{build_tfi, build_xxz};

    fn toy() -> LocalHamiltonian {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        build_tfi(&g, &[1.0; 4], &[1.0; 4]).unwrap()
    }

    #[test]
    fn two_groups_single_pair() {
        let h = toy();
        let layout = ClusterLayout::uniform(4, 2).unwrap();
        let w = default_weights(&h, &layout).unwrap();
        validate_weights(&h, &layout, &w, 1e-12).unwrap();
        // M = 2: every edge weight is 1 and omega is 1.
        assert!(w.edge.values().all(|&v| v == 1.0));
        assert!(w.omega.values().all(|&v| v == 1.0));
        let frags = split_hamiltonian(&h, &layout, &w).unwrap();
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[&(0, 1)], h.total().unwrap());
    }

    #[test]
    fn triangle_singletons() {
        let g = Graph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let h = build_tfi(&g, &[1.0; 3], &[1.0; 3]).unwrap();
        let layout = ClusterLayout::singletons(3);
        let w = default_weights(&h, &layout).unwrap();
        // Each edge lives in exactly one pair with weight 1; omega = 1/2.
        assert!(w.edge.values().all(|&v| v == 1.0));
        assert!(w.omega.values().all(|&v| (v - 0.5).abs() < 1e-15));
        validate_weights(&h, &layout, &w, 1e-12).unwrap();
    }

    #[test]
    fn split_reconstructs_hamiltonian() {
        let h = toy();
        for layout in [ClusterLayout::singletons(4), ClusterLayout::uniform(4, 2).unwrap()] {
            for w in [
                default_weights(&h, &layout).unwrap(),
                random_weights(&h, &layout, 5).unwrap(),
            ] {
                validate_weights(&h, &layout, &w, 1e-12).unwrap();
                let frags = split_hamiltonian(&h, &layout, &w).unwrap();
                let mut sum = OperatorPolynomial::zero(h.kind, h.num_sites());
                for f in frags.values() {
                    sum.add_assign(f).unwrap();
                }
                let diff = sum.minus(&h.total().unwrap()).unwrap();
                assert!(diff.max_coeff() <= 1e-12, "reconstruction defect {}", diff.max_coeff());
            }
        }
    }

    #[test]
    fn isolated_vertex_terms_survive_splitting() {
        // Vertex 3 has no edges; its field term must still reach a fragment.
        let g = Graph::new(4, vec![(0, 1), (1, 2)]).unwrap();
        let h = build_tfi(&g, &[1.0; 4], &[1.0, 1.0]).unwrap();
        let layout = ClusterLayout::singletons(4);
        let w = default_weights(&h, &layout).unwrap();
        validate_weights(&h, &layout, &w, 1e-12).unwrap();
        let frags = split_hamiltonian(&h, &layout, &w).unwrap();
        let mut sum = OperatorPolynomial::zero(h.kind, 4);
        for f in frags.values() {
            sum.add_assign(f).unwrap();
        }
        assert!(sum.minus(&h.total().unwrap()).unwrap().max_coeff() <= 1e-12);
    }

    #[test]
    fn random_weights_validate_on_er_layouts() {
        for seed in 0..5 {
            let g = Graph::erdos_renyi(7, 0.45, seed).unwrap();
            let h = build_xxz(&g, 0.8).unwrap();
            let layout = ClusterLayout::singletons(7);
            let w = random_weights(&h, &layout, seed * 31 + 1).unwrap();
            validate_weights(&h, &layout, &w, 1e-10).unwrap();
            let frags = split_hamiltonian(&h, &layout, &w).unwrap();
            let mut sum = OperatorPolynomial::zero(h.kind, 7);
            for f in frags.values() {
                sum.add_assign(f).unwrap();
            }
            assert!(sum.minus(&h.total().unwrap()).unwrap().max_coeff() <= 1e-11);
        }
    }

    #[test]
    fn merge_preserves_partition() {
        let layout = ClusterLayout::singletons(5);
        let merged = layout.merge(1, 3).unwrap();
        assert_eq!(merged.groups, vec![vec![0], vec![1, 3], vec![2], vec![4]]);
        assert!(layout.merge(3, 1).is_err());
    }
}
