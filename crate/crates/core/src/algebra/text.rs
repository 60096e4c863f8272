//! Textual round-trip format for operator polynomials.
//!
//! Grammar (whitespace-separated, terms joined by `+`):
//!
//! ```text
//!   polynomial := term ( '+' term )*
//!   term       := coeff factor*
//!   coeff      := FLOAT | FLOAT 'i' | '(' FLOAT SIGN FLOAT 'i' ')'
//!   factor     := ('X'|'Y'|'Z') INDEX          spin operators
//!               | 'adag' INDEX | 'a' INDEX     fermionic ladder operators
//! ```
//!
//! Site indices are 0-based. A term's factors are multiplied left to right,
//! so `0.5 a2 adag1` parses to `-0.5 adag1 a2` after normal ordering.
//! Examples: `1.5 Z1 Z2 + -1 X1`, `0.5 adag1 a2 + 0.5 adag2 a1`.

use std::fmt;

use super::pauli::PauliAxis;
use super::poly::{Kind, Monomial, OperatorPolynomial};
use crate::{C64, Error, Result};

fn format_coeff(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for OperatorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", format_coeff(*c))?;
            match m {
                Monomial::Pauli(p) => {
                    for &(site, axis) in p.factors() {
                        write!(f, " {}{}", axis.letter(), site)?;
                    }
                }
                Monomial::Fermi(w) => {
                    for &mode in w.creations() {
                        write!(f, " adag{mode}")?;
                    }
                    for &mode in w.annihilations() {
                        write!(f, " a{mode}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_float(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number `{tok}`")))
}

fn parse_coeff(tok: &str) -> Result<C64> {
    let t = tok.trim();
    if let Some(inner) = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        let body = inner.trim();
        let Some(imag_part) = body.strip_suffix('i') else {
            return Err(Error::Parse(format!("bad complex coefficient `{tok}`")));
        };
        // Split at the last sign that is not an exponent sign or leading.
        let bytes = imag_part.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let Some(k) = split else {
            return Err(Error::Parse(format!("bad complex coefficient `{tok}`")));
        };
        let re = parse_float(imag_part[..k].trim())?;
        let sign = if bytes[k] as char == '-' { -1.0 } else { 1.0 };
        let im_str = imag_part[k + 1..].trim();
        let im = if im_str.is_empty() { 1.0 } else { parse_float(im_str)? };
        Ok(C64::new(re, sign * im))
    } else if let Some(im_str) = t.strip_suffix('i') {
        Ok(C64::new(0.0, parse_float(im_str)?))
    } else {
        Ok(C64::new(parse_float(t)?, 0.0))
    }
}

fn parse_factor(tok: &str, kind: Kind, num_sites: usize) -> Result<OperatorPolynomial> {
    let make_spin = |axis: PauliAxis, idx: &str| -> Result<OperatorPolynomial> {
        if kind != Kind::Spin {
            return Err(Error::Parse(format!("spin factor `{tok}` in a fermionic polynomial")));
        }
        let site: usize =
            idx.parse().map_err(|_| Error::Parse(format!("bad site in `{tok}`")))?;
        OperatorPolynomial::pauli(num_sites, site, axis)
    };
    if let Some(idx) = tok.strip_prefix('X') {
        make_spin(PauliAxis::X, idx)
    } else if let Some(idx) = tok.strip_prefix('Y') {
        make_spin(PauliAxis::Y, idx)
    } else if let Some(idx) = tok.strip_prefix('Z') {
        make_spin(PauliAxis::Z, idx)
    } else if let Some(idx) = tok.strip_prefix("adag") {
        if kind != Kind::Fermion {
            return Err(Error::Parse(format!("fermionic factor `{tok}` in a spin polynomial")));
        }
        let mode: usize = idx.parse().map_err(|_| Error::Parse(format!("bad mode in `{tok}`")))?;
        OperatorPolynomial::create(num_sites, mode)
    } else if let Some(idx) = tok.strip_prefix('a') {
        if kind != Kind::Fermion {
            return Err(Error::Parse(format!("fermionic factor `{tok}` in a spin polynomial")));
        }
        let mode: usize = idx.parse().map_err(|_| Error::Parse(format!("bad mode in `{tok}`")))?;
        OperatorPolynomial::annihilate(num_sites, mode)
    } else {
        Err(Error::Parse(format!("unknown factor `{tok}`")))
    }
}

/// Parse the textual format. Terms are split on `+` outside parentheses;
/// each term's factors multiply left to right.
pub fn parse_polynomial(text: &str, kind: Kind, num_sites: usize) -> Result<OperatorPolynomial> {
    let mut out = OperatorPolynomial::zero(kind, num_sites);
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "0" {
        return Ok(out);
    }
    let mut terms = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (k, ch) in trimmed.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse("unbalanced parentheses".into()))?;
            }
            '+' if depth == 0 => {
                terms.push(&trimmed[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced parentheses".into()));
    }
    terms.push(&trimmed[start..]);

    for term in terms {
        let toks: Vec<&str> = term.split_whitespace().collect();
        if toks.is_empty() {
            return Err(Error::Parse("empty term".into()));
        }
        let coeff = parse_coeff(toks[0])?;
        let mut factor = OperatorPolynomial::constant(kind, num_sites, coeff);
        for tok in &toks[1..] {
            factor = factor.mul(&parse_factor(tok, kind, num_sites)?)?;
        }
        out.add_assign(&factor)?;
    }
    Ok(out)
}
