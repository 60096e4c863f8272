//! Independent KKT verification.
//!
//! Recomputes every optimality condition from the problem data and a
//! reported solution, sharing no state with the solver loop: primal cone
//! feasibility, dual cone feasibility, complementary slackness, dual
//! stationarity, and the duality gap.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

use crate::problem::ConicProblem;
use crate::solver::ConicSolution;

#[derive(Debug, Clone)]
pub struct KktReport {
    /// Most negative eigenvalue of any primal slack `F0_k + Σ x_i F_ik`.
    pub primal_min_eig: f64,
    /// Most negative eigenvalue of any dual block.
    pub dual_min_eig: f64,
    /// `max_k |⟨S_k, Z_k⟩| / (1 + ||S_k|| ||Z_k||)`.
    pub complementarity: f64,
    /// `||Σ_k F_ik · Z_k + c||_inf`.
    pub stationarity: f64,
    /// `|c·x - Σ_k ⟨F0_k, Z_k⟩|`.
    pub gap: f64,
    /// Problem scale used for the pass thresholds.
    pub scale: f64,
    pub pass: bool,
}

/// Verify a solution against the KKT system at tolerance `tol` (relative to
/// the problem scale).
pub fn check_kkt(p: &ConicProblem, sol: &ConicSolution, tol: f64) -> KktReport {
    let scale = p.scale();
    let mut primal_min = 0.0_f64;
    let mut dual_min = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut stat = vec![0.0_f64; p.num_vars];
    let mut dual_obj = 0.0;

    for (k, block) in p.blocks.iter().enumerate() {
        let mut s: Array2<f64> = block.f0.to_dense();
        for (var, f) in &block.terms {
            f.add_scaled_into(&mut s, sol.x[*var]);
        }
        let (s_vals, _) = s.eigh(UPLO::Lower).expect("eigh failed");
        primal_min = primal_min.min(s_vals.iter().cloned().fold(f64::INFINITY, f64::min));

        let z = &sol.duals[k];
        let (z_vals, _) = z.eigh(UPLO::Lower).expect("eigh failed");
        dual_min = dual_min.min(z_vals.iter().cloned().fold(f64::INFINITY, f64::min));

        let sz: f64 = s
            .iter()
            .zip(z.iter())
            .map(|(a, b)| a * b)
            .sum();
        let s_norm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let z_norm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        comp = comp.max(sz.abs() / (1.0 + s_norm * z_norm));

        for (var, f) in &block.terms {
            stat[*var] += f.dot_dense(z);
        }
        dual_obj += block.f0.dot_dense(z);
    }

    let stationarity = stat
        .iter()
        .zip(p.objective.iter())
        .map(|(s, c)| (s + c).abs())
        .fold(0.0, f64::max);
    let primal_obj: f64 = sol
        .x
        .iter()
        .zip(p.objective.iter())
        .map(|(x, c)| x * c)
        .sum();
    let gap = (primal_obj - dual_obj).abs();

    let thr = tol * scale;
    let pass = primal_min >= -thr
        && dual_min >= -thr
        && comp <= thr
        && stationarity <= thr
        && gap <= thr * (1.0 + primal_obj.abs() + dual_obj.abs());

    KktReport {
        primal_min_eig: primal_min,
        dual_min_eig: dual_min,
        complementarity: comp,
        stationarity,
        gap,
        scale,
        pass,
    }
}
