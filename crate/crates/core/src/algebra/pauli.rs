//! Pauli strings: tensor products of single-site Pauli operators.

use serde::{Deserialize, Serialize};

use crate::{C64, Error, Result};

/// A non-identity single-site Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn letter(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// Product of Pauli operators on distinct sites, stored as a sorted factor
/// list. The empty list is the identity. Pauli strings are self-adjoint, so
/// the adjoint of a string is itself.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PauliString {
    factors: Vec<(usize, PauliAxis)>,
}

impl PauliString {
    pub fn identity() -> Self {
        PauliString { factors: Vec::new() }
    }

    pub fn single(site: usize, axis: PauliAxis) -> Self {
        PauliString { factors: vec![(site, axis)] }
    }

    /// Build from factors; site indices must be strictly increasing.
    pub fn from_factors(factors: Vec<(usize, PauliAxis)>) -> Result<Self> {
        for w in factors.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidInput(format!(
                    "pauli factor sites must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(PauliString { factors })
    }

    pub fn factors(&self) -> &[(usize, PauliAxis)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|&(s, _)| s)
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.last().map(|&(s, _)| s)
    }

    /// Multiply two strings, merging site by site through the single-site
    /// multiplication table. Returns the accumulated phase and the product
    /// string.
    pub fn mul(&self, rhs: &Self) -> (C64, PauliString) {
        let mut phase = C64::new(1.0, 0.0);
        let mut factors = Vec::with_capacity(self.factors.len() + rhs.factors.len());
        let mut a = self.factors.iter().peekable();
        let mut b = rhs.factors.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(sa, xa)), Some(&&(sb, xb))) => {
                    if sa < sb {
                        factors.push((sa, xa));
                        a.next();
                    } else if sb < sa {
                        factors.push((sb, xb));
                        b.next();
                    } else {
                        let (ph, axis) = mul_single(xa, xb);
                        phase *= ph;
                        if let Some(axis) = axis {
                            factors.push((sa, axis));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some(&&(sa, xa)), None) => {
                    factors.push((sa, xa));
                    a.next();
                }
                (None, Some(&&(sb, xb))) => {
                    factors.push((sb, xb));
                    b.next();
                }
                (None, None) => break,
            }
        }
        (phase, PauliString { factors })
    }
}

/// Single-site products: sigma^a sigma^b = phase * sigma^c, with `None`
/// denoting the identity.
fn mul_single(a: PauliAxis, b: PauliAxis) -> (C64, Option<PauliAxis>) {
    use PauliAxis::*;
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    match (a, b) {
        (X, X) | (Y, Y) | (Z, Z) => (one, None),
        (X, Y) => (i, Some(Z)),
        (Y, X) => (-i, Some(Z)),
        (Y, Z) => (i, Some(X)),
        (Z, Y) => (-i, Some(X)),
        (Z, X) => (i, Some(Y)),
        (X, Z) => (-i, Some(Y)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_table_matches_commutation() {
        // sigma^x sigma^y = i sigma^z on the same site.
        let x = PauliString::single(1, PauliAxis::X);
        let y = PauliString::single(1, PauliAxis::Y);
        let (phase, prod) = x.mul(&y);
        assert_eq!(phase, C64::new(0.0, 1.0));
        assert_eq!(prod, PauliString::single(1, PauliAxis::Z));

        let (phase_rev, prod_rev) = y.mul(&x);
        assert_eq!(phase_rev, C64::new(0.0, -1.0));
        assert_eq!(prod_rev, prod);
    }

    #[test]
    fn squares_are_identity() {
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let p = PauliString::single(0, axis);
            let (phase, prod) = p.mul(&p);
            assert_eq!(phase, C64::new(1.0, 0.0));
            assert!(prod.is_identity());
        }
    }

    #[test]
    fn disjoint_sites_merge_sorted() {
        let a = PauliString::from_factors(vec![(0, PauliAxis::Z), (3, PauliAxis::X)]).unwrap();
        let b = PauliString::single(1, PauliAxis::Y);
        let (phase, prod) = a.mul(&b);
        assert_eq!(phase, C64::new(1.0, 0.0));
        assert_eq!(
            prod.factors(),
            &[(0, PauliAxis::Z), (1, PauliAxis::Y), (3, PauliAxis::X)]
        );
    }

    #[test]
    fn rejects_unsorted_factors() {
        assert!(PauliString::from_factors(vec![(2, PauliAxis::X), (1, PauliAxis::Z)]).is_err());
        assert!(PauliString::from_factors(vec![(1, PauliAxis::X), (1, PauliAxis::Z)]).is_err());
    }
}
