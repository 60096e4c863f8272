//! Normally-ordered fermionic words under the canonical anti-commutation
//! relations `{a_i, a_j} = 0`, `{a_i, a_j^dag} = delta_ij`.
//!
//! Canonical form: all creation operators to the left of all annihilation
//! operators, creations sorted ascending and annihilations descending. With
//! this convention the adjoint of a word is again a canonical word with no
//! extra sign.

use crate::{Error, Result};

/// A normally-ordered monomial `a^dag_{i1} ... a^dag_{ik} a_{j1} ... a_{jm}`
/// with `i1 < ... < ik` and `j1 > ... > jm`. Empty lists give the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FermiWord {
    creations: Vec<usize>,
    annihilations: Vec<usize>,
}

impl FermiWord {
    pub fn identity() -> Self {
        FermiWord::default()
    }

    /// `a_i^dag`
    pub fn create(mode: usize) -> Self {
        FermiWord { creations: vec![mode], annihilations: Vec::new() }
    }

    /// `a_i`
    pub fn annihilate(mode: usize) -> Self {
        FermiWord { creations: Vec::new(), annihilations: vec![mode] }
    }

    /// The number operator `n_i = a_i^dag a_i`.
    pub fn number(mode: usize) -> Self {
        FermiWord { creations: vec![mode], annihilations: vec![mode] }
    }

    /// Build from explicit lists; creations must be strictly increasing and
    /// annihilations strictly decreasing.
    pub fn new(creations: Vec<usize>, annihilations: Vec<usize>) -> Result<Self> {
        if creations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("creations must be strictly increasing".into()));
        }
        if annihilations.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidInput("annihilations must be strictly decreasing".into()));
        }
        Ok(FermiWord { creations, annihilations })
    }

    pub fn creations(&self) -> &[usize] {
        &self.creations
    }

    pub fn annihilations(&self) -> &[usize] {
        &self.annihilations
    }

    pub fn is_identity(&self) -> bool {
        self.creations.is_empty() && self.annihilations.is_empty()
    }

    /// Total number of ladder operators in the word.
    pub fn degree(&self) -> usize {
        self.creations.len() + self.annihilations.len()
    }

    /// Modes touched by the word, sorted ascending without duplicates.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.creations.iter().chain(self.annihilations.iter()).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Adjoint: reverse the annihilations into creations and vice versa.
    /// The result is already canonical, no sign is produced.
    pub fn adjoint(&self) -> FermiWord {
        let mut creations: Vec<usize> = self.annihilations.clone();
        creations.reverse();
        let mut annihilations: Vec<usize> = self.creations.clone();
        annihilations.reverse();
        FermiWord { creations, annihilations }
    }

    /// The word as a left-to-right list of `(mode, is_creation)` operators.
    pub fn ops(&self) -> Vec<(usize, bool)> {
        self.creations
            .iter()
            .map(|&m| (m, true))
            .chain(self.annihilations.iter().map(|&m| (m, false)))
            .collect()
    }

    /// Per-mode occupancy code over the support, used for canonical
    /// ordering: 0 = `a^dag a`, 1 = `a^dag`, 2 = `a`.
    pub(crate) fn mode_codes(&self) -> Vec<(usize, u8)> {
        let mut codes: Vec<(usize, u8)> = Vec::with_capacity(self.degree());
        for &m in &self.creations {
            codes.push((m, 1));
        }
        for &m in &self.annihilations {
            match codes.iter_mut().find(|(mm, _)| *mm == m) {
                Some(entry) => entry.1 = 0,
                None => codes.push((m, 2)),
            }
        }
        codes.sort_unstable();
        codes
    }
}

/// Rewrite an arbitrary operator sequence into canonical normally-ordered
/// words via repeated anti-commutation swaps. Returns the expansion as
/// `(word, sign)` pairs; contractions of `a_i a_i^dag` produce the identity
/// term of the pair, and repeated ladder operators annihilate the term.
pub fn normal_order(ops: &[(usize, bool)]) -> Vec<(FermiWord, f64)> {
    let mut result: Vec<(FermiWord, f64)> = Vec::new();
    let mut work: Vec<(Vec<(usize, bool)>, f64)> = vec![(ops.to_vec(), 1.0)];

    'outer: while let Some((seq, sign)) = work.pop() {
        // Find the first adjacent violation of the canonical order.
        for k in 0..seq.len().saturating_sub(1) {
            let (mi, di) = seq[k];
            let (mj, dj) = seq[k + 1];
            match (di, dj) {
                // a_i a_j^dag -> delta_ij - a_j^dag a_i
                (false, true) => {
                    if mi == mj {
                        let mut contracted = seq.clone();
                        contracted.drain(k..=k + 1);
                        work.push((contracted, sign));
                    }
                    let mut swapped = seq.clone();
                    swapped.swap(k, k + 1);
                    work.push((swapped, -sign));
                    continue 'outer;
                }
                // creations must ascend
                (true, true) if mi >= mj => {
                    if mi == mj {
                        continue 'outer; // a^dag a^dag of the same mode vanishes
                    }
                    let mut swapped = seq.clone();
                    swapped.swap(k, k + 1);
                    work.push((swapped, -sign));
                    continue 'outer;
                }
                // annihilations must descend
                (false, false) if mi <= mj => {
                    if mi == mj {
                        continue 'outer;
                    }
                    let mut swapped = seq.clone();
                    swapped.swap(k, k + 1);
                    work.push((swapped, -sign));
                    continue 'outer;
                }
                _ => {}
            }
        }
        // Canonical: split into the two sorted runs.
        let creations: Vec<usize> =
            seq.iter().filter(|(_, d)| *d).map(|&(m, _)| m).collect();
        let annihilations: Vec<usize> =
            seq.iter().filter(|(_, d)| !*d).map(|&(m, _)| m).collect();
        result.push((FermiWord { creations, annihilations }, sign));
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_same_mode() {
        // a_1 a_1^dag = 1 - a_1^dag a_1
        let terms = normal_order(&[(1, false), (1, true)]);
        assert_eq!(terms.len(), 2);
        let mut found_id = false;
        let mut found_n = false;
        for (w, s) in &terms {
            if w.is_identity() {
                assert_eq!(*s, 1.0);
                found_id = true;
            } else if *w == FermiWord::number(1) {
                assert_eq!(*s, -1.0);
                found_n = true;
            }
        }
        assert!(found_id && found_n);
    }

    #[test]
    fn disjoint_modes_anticommute() {
        // a_2 a_1^dag = -a_1^dag a_2
        let terms = normal_order(&[(2, false), (1, true)]);
        assert_eq!(terms.len(), 1);
        let (w, s) = &terms[0];
        assert_eq!(*s, -1.0);
        assert_eq!(w.creations(), &[1]);
        assert_eq!(w.annihilations(), &[2]);
    }

    #[test]
    fn normal_ordering_is_projection() {
        // An already-canonical word passes through unchanged.
        let w = FermiWord::new(vec![0, 2], vec![3, 1]).unwrap();
        let terms = normal_order(&w.ops());
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, w);
        assert_eq!(terms[0].1, 1.0);
    }

    #[test]
    fn repeated_ladder_vanishes() {
        assert!(normal_order(&[(0, true), (0, true)]).is_empty());
        assert!(normal_order(&[(4, false), (4, false)]).is_empty());
    }

    #[test]
    fn adjoint_is_involution() {
        let w = FermiWord::new(vec![0, 3], vec![2]).unwrap();
        assert_eq!(w.adjoint().adjoint(), w);
        let adj = w.adjoint();
        assert_eq!(adj.creations(), &[2]);
        assert_eq!(adj.annihilations(), &[3, 0]);
    }
}
