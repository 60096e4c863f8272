//! Linear combinations of canonical monomials with complex coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::fermi::{normal_order, FermiWord};
use super::pauli::{PauliAxis, PauliString};
use crate::{C64, COEFF_PRUNE_TOL, Error, Result};

/// The algebra a polynomial lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Spin,
    Fermion,
}

/// A canonical monomial: a Pauli string or a normally-ordered fermionic
/// word. Ordering is lexicographic on (support set, per-site factor codes),
/// which makes iteration over term maps deterministic everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Monomial {
    Pauli(PauliString),
    Fermi(FermiWord),
}

impl Monomial {
    pub fn support(&self) -> Vec<usize> {
        match self {
            Monomial::Pauli(p) => p.support().collect(),
            Monomial::Fermi(w) => w.support(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Monomial::Pauli(p) => p.is_identity(),
            Monomial::Fermi(w) => w.is_identity(),
        }
    }

    fn sort_key(&self) -> (Vec<usize>, Vec<u8>) {
        match self {
            Monomial::Pauli(p) => {
                let support: Vec<usize> = p.support().collect();
                let codes = p
                    .factors()
                    .iter()
                    .map(|&(_, a)| match a {
                        PauliAxis::X => 1,
                        PauliAxis::Y => 2,
                        PauliAxis::Z => 3,
                    })
                    .collect();
                (support, codes)
            }
            Monomial::Fermi(w) => {
                let codes = w.mode_codes();
                (codes.iter().map(|&(m, _)| m).collect(), codes.iter().map(|&(_, c)| c).collect())
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Monomial::Pauli(_), Monomial::Fermi(_)) => Ordering::Less,
            (Monomial::Fermi(_), Monomial::Pauli(_)) => Ordering::Greater,
            _ => self.sort_key().cmp(&other.sort_key()),
        }
    }
}

/// A polynomial in the spin or fermionic algebra on `num_sites` sites.
/// Zero coefficients (magnitude <= 1e-14) are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPolynomial {
    kind: Kind,
    num_sites: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl OperatorPolynomial {
    pub fn zero(kind: Kind, num_sites: usize) -> Self {
        OperatorPolynomial { kind, num_sites, terms: BTreeMap::new() }
    }

    pub fn identity(kind: Kind, num_sites: usize) -> Self {
        let mut p = Self::zero(kind, num_sites);
        let m = match kind {
            Kind::Spin => Monomial::Pauli(PauliString::identity()),
            Kind::Fermion => Monomial::Fermi(FermiWord::identity()),
        };
        p.terms.insert(m, C64::new(1.0, 0.0));
        p
    }

    pub fn constant(kind: Kind, num_sites: usize, value: C64) -> Self {
        let mut p = Self::identity(kind, num_sites);
        p.scale_mut(value);
        p
    }

    /// `sigma_i^s` on `num_sites` spins.
    pub fn pauli(num_sites: usize, site: usize, axis: PauliAxis) -> Result<Self> {
        let mut p = Self::zero(Kind::Spin, num_sites);
        p.add_term(Monomial::Pauli(PauliString::single(site, axis)), C64::new(1.0, 0.0))?;
        Ok(p)
    }

    /// `a_i^dag` on `num_sites` modes.
    pub fn create(num_sites: usize, mode: usize) -> Result<Self> {
        let mut p = Self::zero(Kind::Fermion, num_sites);
        p.add_term(Monomial::Fermi(FermiWord::create(mode)), C64::new(1.0, 0.0))?;
        Ok(p)
    }

    /// `a_i` on `num_sites` modes.
    pub fn annihilate(num_sites: usize, mode: usize) -> Result<Self> {
        let mut p = Self::zero(Kind::Fermion, num_sites);
        p.add_term(Monomial::Fermi(FermiWord::annihilate(mode)), C64::new(1.0, 0.0))?;
        Ok(p)
    }

    /// `n_i = a_i^dag a_i`.
    pub fn number(num_sites: usize, mode: usize) -> Result<Self> {
        let mut p = Self::zero(Kind::Fermion, num_sites);
        p.add_term(Monomial::Fermi(FermiWord::number(mode)), C64::new(1.0, 0.0))?;
        Ok(p)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.support()).collect()
    }

    fn check_monomial(&self, m: &Monomial) -> Result<()> {
        let fits_kind = matches!(
            (self.kind, m),
            (Kind::Spin, Monomial::Pauli(_)) | (Kind::Fermion, Monomial::Fermi(_))
        );
        if !fits_kind {
            return Err(Error::KindMismatch);
        }
        if let Some(&max) = m.support().last() {
            if max >= self.num_sites {
                return Err(Error::InvalidInput(format!(
                    "monomial touches site {max} but the system has {} sites",
                    self.num_sites
                )));
            }
        }
        Ok(())
    }

    /// Accumulate `coeff * m`, pruning the entry if it cancels out.
    pub fn add_term(&mut self, m: Monomial, coeff: C64) -> Result<()> {
        self.check_monomial(&m)?;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + coeff;
                if v.norm() <= COEFF_PRUNE_TOL {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                if coeff.norm() > COEFF_PRUNE_TOL {
                    e.insert(coeff);
                }
            }
        }
        Ok(())
    }

    pub fn add_assign(&mut self, rhs: &Self) -> Result<()> {
        if self.kind != rhs.kind || self.num_sites != rhs.num_sites {
            return Err(Error::KindMismatch);
        }
        for (m, c) in rhs.terms.iter() {
            self.add_term(m.clone(), *c)?;
        }
        Ok(())
    }

    pub fn sub_assign(&mut self, rhs: &Self) -> Result<()> {
        if self.kind != rhs.kind || self.num_sites != rhs.num_sites {
            return Err(Error::KindMismatch);
        }
        for (m, c) in rhs.terms.iter() {
            self.add_term(m.clone(), -*c)?;
        }
        Ok(())
    }

    pub fn scale_mut(&mut self, s: C64) {
        if s.norm() <= COEFF_PRUNE_TOL {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v *= s;
        }
        self.terms.retain(|_, v| v.norm() > COEFF_PRUNE_TOL);
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut p = self.clone();
        p.scale_mut(s);
        p
    }

    pub fn plus(&self, rhs: &Self) -> Result<Self> {
        let mut p = self.clone();
        p.add_assign(rhs)?;
        Ok(p)
    }

    pub fn minus(&self, rhs: &Self) -> Result<Self> {
        let mut p = self.clone();
        p.sub_assign(rhs)?;
        Ok(p)
    }

    /// Product in canonical form. Pauli factors reduce through the
    /// single-site table; fermionic factors are rewritten to normal order
    /// via repeated CAR swaps.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.kind != rhs.kind || self.num_sites != rhs.num_sites {
            return Err(Error::KindMismatch);
        }
        let mut out = Self::zero(self.kind, self.num_sites);
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in rhs.terms.iter() {
                let coeff = ca * cb;
                match (ma, mb) {
                    (Monomial::Pauli(pa), Monomial::Pauli(pb)) => {
                        let (phase, prod) = pa.mul(pb);
                        out.add_term(Monomial::Pauli(prod), coeff * phase)?;
                    }
                    (Monomial::Fermi(wa), Monomial::Fermi(wb)) => {
                        let mut ops = wa.ops();
                        ops.extend(wb.ops());
                        for (word, sign) in normal_order(&ops) {
                            out.add_term(Monomial::Fermi(word), coeff * sign)?;
                        }
                    }
                    _ => return Err(Error::KindMismatch),
                }
            }
        }
        Ok(out)
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.kind, self.num_sites);
        for (m, c) in self.terms.iter() {
            let (m_adj, c_adj) = match m {
                Monomial::Pauli(p) => (Monomial::Pauli(p.clone()), c.conj()),
                Monomial::Fermi(w) => (Monomial::Fermi(w.adjoint()), c.conj()),
            };
            out.add_term(m_adj, c_adj).expect("adjoint preserves validity");
        }
        out
    }

    /// True when `coefficient(adjoint(m)) = conj(coefficient(m))` for every
    /// stored monomial; for spin polynomials this reduces to all
    /// coefficients being real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        for (m, c) in self.terms.iter() {
            match m {
                Monomial::Pauli(_) => {
                    if c.im.abs() > tol {
                        return false;
                    }
                }
                Monomial::Fermi(w) => {
                    let adj = Monomial::Fermi(w.adjoint());
                    if (self.coefficient(&adj) - c.conj()).norm() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Largest coefficient magnitude, 0 for the zero polynomial.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// The same polynomial viewed on a larger system.
    pub fn widened(&self, num_sites: usize) -> Result<Self> {
        let mut out = Self::zero(self.kind, num_sites);
        for (m, &c) in self.terms.iter() {
            out.add_term(m.clone(), c)?;
        }
        Ok(out)
    }
}
