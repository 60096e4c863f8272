//! Relaxed two-fragment marginals from dual certificates.
//!
//! The dual block of each pair constraint, de-embedded and normalized to
//! unit trace, is the relaxed marginal of the pair fragment. Negative
//! eigenvalues beyond the solver's cone tolerance are an error; tiny ones
//! are projected away. Restrictions of two pair marginals to a shared group
//! agree only approximately at finite solver tolerance, so the residuals
//! are recorded rather than enforced.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use std::collections::BTreeMap;
use vembed_conic::{deembed_hermitian, ConicProblem, ConicSolution};

use super::support::canonical_words;
use crate::algebra::{Kind, Monomial};
use crate::exact::{trace_with_monomial, DensityMatrix};
use crate::layout::{ClusterLayout, Pair};
use crate::models::LocalHamiltonian;
use crate::{C64, Error, Result};

/// Restrictions of two pair marginals to a shared group should agree to
/// about this tolerance; larger deviations are recorded as warnings.
pub const CONSISTENCY_TOL: f64 = 1e-4;

/// Trace-one Hermitian matrices per pair fragment, with consistency and
/// parity diagnostics.
#[derive(Debug, Clone)]
pub struct RelaxedMarginals {
    pub per_pair: BTreeMap<Pair, DensityMatrix>,
    /// Largest disagreement between shared-group restrictions.
    pub consistency_residual: f64,
    /// Pairs of pairs whose shared-group restrictions disagree beyond
    /// [`CONSISTENCY_TOL`].
    pub consistency_warnings: Vec<((Pair, Pair), f64)>,
    /// Largest expectation of an odd fermionic word (0 for spin systems);
    /// physical (parity-even) marginals keep this at solver-noise level.
    pub parity_residual: f64,
}

impl RelaxedMarginals {
    pub fn get(&self, pair: Pair) -> Option<&DensityMatrix> {
        self.per_pair.get(&pair)
    }
}

/// Extract the relaxed marginals from a solved pair-scheme problem.
pub fn extract_marginals(
    problem: &ConicProblem,
    sol: &ConicSolution,
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    tol_feas: f64,
) -> Result<RelaxedMarginals> {
    let mut per_pair = BTreeMap::new();
    for (k, block) in problem.blocks.iter().enumerate() {
        let Some(pair) = block.meta.pair else { continue };
        if !block.meta.complex_embedded {
            return Err(Error::Internal("pair blocks are expected to be embedded".into()));
        }
        let z = deembed_hermitian(&sol.duals[k]).map_err(Error::Solver)?;
        let dim = z.nrows();
        let trace: f64 = (0..dim).map(|i| z[[i, i]].re).sum();
        if trace <= 1e-8 {
            return Err(Error::DegenerateDual(format!(
                "dual of pair {pair:?} has trace {trace:.3e}"
            )));
        }
        let normalized = z.map(|v| v / trace);
        // Clip small negative eigenvalues, error on large ones.
        let (vals, vecs) = normalized
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -10.0 * tol_feas {
            return Err(Error::DegenerateDual(format!(
                "dual of pair {pair:?} has eigenvalue {min:.3e} below -10*tol"
            )));
        }
        let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let mut mat: Array2<C64> = Array2::zeros((dim, dim));
        for (j, &v) in clipped.iter().enumerate() {
            if v > 0.0 {
                let w = v / total;
                for r in 0..dim {
                    for c in 0..dim {
                        mat[[r, c]] += vecs[[r, j]] * vecs[[c, j]].conj() * w;
                    }
                }
            }
        }
        let sites = layout.pair_sites(ham, pair);
        per_pair.insert(pair, DensityMatrix { subsystem: sites, mat });
    }
    if per_pair.is_empty() {
        return Err(Error::InvalidInput("solution carries no pair blocks".into()));
    }

    // Shared-group consistency residuals.
    let mut consistency_residual = 0.0_f64;
    let mut consistency_warnings = Vec::new();
    let pairs: Vec<Pair> = per_pair.keys().copied().collect();
    for (a_idx, &pa) in pairs.iter().enumerate() {
        for &pb in pairs.iter().skip(a_idx + 1) {
            let shared: Vec<usize> = [pa.0, pa.1]
                .into_iter()
                .filter(|g| *g == pb.0 || *g == pb.1)
                .collect();
            for &g in &shared {
                let sites = layout.group_sites(ham, g);
                let ra = crate::exact::marginal_of_density(&per_pair[&pa], ham.kind, &sites)?;
                let rb = crate::exact::marginal_of_density(&per_pair[&pb], ham.kind, &sites)?;
                let mut diff = 0.0_f64;
                for r in 0..ra.dim() {
                    for c in 0..ra.dim() {
                        diff = diff.max((ra.mat[[r, c]] - rb.mat[[r, c]]).norm());
                    }
                }
                consistency_residual = consistency_residual.max(diff);
                if diff > CONSISTENCY_TOL {
                    consistency_warnings.push(((pa, pb), diff));
                }
            }
        }
    }

    // Parity check: expectations of odd fermionic words.
    let mut parity_residual = 0.0_f64;
    if ham.kind == Kind::Fermion {
        for (pair, rho) in &per_pair {
            let _ = pair;
            for w in canonical_words(&rho.subsystem) {
                if w.degree() % 2 == 1 {
                    let v = trace_with_monomial(rho, &Monomial::Fermi(w))?;
                    parity_residual = parity_residual.max(v.norm());
                }
            }
        }
    }

    Ok(RelaxedMarginals {
        per_pair,
        consistency_residual,
        consistency_warnings,
        parity_residual,
    })
}
