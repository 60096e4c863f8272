//! First-order operator-splitting solver.
//!
//! The iteration alternates between (a) a least-squares step onto the affine
//! subspace `S_k = F0_k + Σ_i x_i F_ik`, solved through a Cholesky
//! factorization of the normal matrix that is computed once per problem, and
//! (b) eigenvalue projections of each block onto the PSD cone. Scaled dual
//! variables accumulate the constraint violations; at a fixed point they are
//! exactly `-Z_k / rho` with `Z_k ⪰ 0` complementary to the primal slack.
//!
//! The iteration order is deterministic and the starting point is fixed
//! (zero primal, identity-proportional duals), so repeated solves of the
//! same problem agree bitwise within one build.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Diag, Eigh, SolveTriangular, UPLO};
use num_complex::Complex64;

use crate::embed::{deembed_hermitian, embed_hermitian};
use crate::problem::ConicProblem;
use crate::{Error, Result};

/// Solver options. The defaults suit desk-scale problems with blocks up to a
/// few hundred rows.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    /// Relative feasibility/stationarity tolerance.
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Over-relaxation parameter in (1, 2).
    pub alpha: f64,
    /// Convergence is tested every this many iterations.
    pub check_every: usize,
    /// Re-solve the dual stationarity system on the detected active faces
    /// after the main loop; keeps the result only when it improves.
    pub polish: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_gap: 1e-7,
            tol_feas: 1e-7,
            max_iter: 200_000,
            rho: 1.0,
            alpha: 1.6,
            check_every: 25,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    InfeasibleSuspected,
}

/// Final residuals, all relative to the problem scale.
#[derive(Debug, Clone, Copy, Default)]
pub struct Residuals {
    /// `sqrt(Σ_k ||S_k - P_psd(S_k)||^2) / scale` — primal cone violation.
    pub primal: f64,
    /// `||Σ_k F_ik · Z_k + c||_2 / (1 + ||c||)` — dual stationarity.
    pub dual: f64,
    /// `|c·x - Σ_k ⟨F0_k, Z_k⟩| / (1 + |p| + |d|)` — relative gap.
    pub gap: f64,
    /// Most negative eigenvalue over all primal slacks (0 if PSD).
    pub min_eig_primal: f64,
    /// Most negative eigenvalue over all duals (0 if PSD).
    pub min_eig_dual: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// `Σ_k ⟨F0_k, Z_k⟩`, an upper bound on the optimum when the duals are
    /// feasible.
    pub dual_objective: f64,
    /// One PSD certificate per block, in block order.
    pub duals: Vec<Array2<f64>>,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Project a real symmetric matrix onto the PSD cone. Exposed for tests.
pub(crate) fn psd_project(m: &Array2<f64>) -> Array2<f64> {
    let (vals, vecs) = m.eigh(UPLO::Lower).expect("eigh failed on symmetric matrix");
    let n = m.nrows();
    let mut scaled = Array2::zeros((n, n));
    for (j, &v) in vals.iter().enumerate() {
        let v = v.max(0.0);
        if v > 0.0 {
            for i in 0..n {
                scaled[[i, j]] = vecs[[i, j]] * v;
            }
        }
    }
    let out = scaled.dot(&vecs.t());
    // Resymmetrize to keep round-off from drifting.
    let mut sym = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            sym[[i, j]] = 0.5 * (out[[i, j]] + out[[j, i]]);
        }
    }
    sym
}

/// PSD projection of an embedded complex Hermitian block, done on the
/// de-embedded matrix. Identical result to [`psd_project`] on the embedded
/// form, at a quarter of the eigendecomposition cost.
fn psd_project_embedded(m: &Array2<f64>) -> Result<Array2<f64>> {
    let h = deembed_hermitian(m)?;
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("complex eigh failed: {e}")))?;
    let n = h.nrows();
    let mut scaled: Array2<Complex64> = Array2::zeros((n, n));
    for (j, &v) in vals.iter().enumerate() {
        let v = v.max(0.0);
        if v > 0.0 {
            for i in 0..n {
                scaled[[i, j]] = vecs[[i, j]] * v;
            }
        }
    }
    let mut proj: Array2<Complex64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += scaled[[i, k]] * vecs[[j, k]].conj();
            }
            proj[[i, j]] = acc;
        }
    }
    embed_hermitian(&proj)
}

fn min_eig(m: &Array2<f64>) -> f64 {
    let (vals, _) = m.eigh(UPLO::Lower).expect("eigh failed");
    vals.iter().copied().fold(f64::INFINITY, f64::min)
}

struct Factor {
    lower: Array2<f64>,
    upper: Array2<f64>,
}

impl Factor {
    fn solve(&self, rhs: &Array1<f64>) -> Result<Array1<f64>> {
        let y = self
            .lower
            .solve_triangular(UPLO::Lower, Diag::NonUnit, rhs)
            .map_err(|e| Error::Numerical(format!("triangular solve failed: {e}")))?;
        self.upper
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &y)
            .map_err(|e| Error::Numerical(format!("triangular solve failed: {e}")))
    }
}

/// Build and factorize the normal matrix `Σ_k B_k^T B_k` where `B_k` stacks
/// the vectorized coefficient matrices of block `k`.
fn factorize_normal(p: &ConicProblem) -> Result<Factor> {
    let m = p.num_vars;
    let mut ata: Array2<f64> = Array2::zeros((m, m));
    let mut scratch: Vec<f64> = Vec::new();
    for block in &p.blocks {
        let d2 = block.dim * block.dim;
        scratch.clear();
        scratch.resize(d2, 0.0);
        // Dense column per variable, dotted against the sparse partners.
        for (a, (va, fa)) in block.terms.iter().enumerate() {
            for &(i, j, v) in &fa.entries {
                scratch[i as usize * block.dim + j as usize] = v;
            }
            for (vb, fb) in block.terms.iter().take(a + 1) {
                let mut acc = 0.0;
                for &(i, j, v) in &fb.entries {
                    acc += v * scratch[i as usize * block.dim + j as usize];
                }
                ata[[*va, *vb]] += acc;
                if va != vb {
                    ata[[*vb, *va]] += acc;
                }
            }
            for &(i, j, _) in &fa.entries {
                scratch[i as usize * block.dim + j as usize] = 0.0;
            }
        }
    }
    let base_reg = 1e-12 * (1.0 + ata.diag().iter().cloned().fold(0.0, f64::max));
    let mut reg = base_reg;
    for _ in 0..40 {
        let mut shifted = ata.clone();
        for i in 0..m {
            shifted[[i, i]] += reg;
        }
        if let Ok(l) = shifted.cholesky(UPLO::Lower) {
            let upper = l.t().to_owned();
            return Ok(Factor { lower: l, upper });
        }
        reg *= 10.0;
    }
    Err(Error::Numerical("normal matrix could not be factorized".into()))
}

pub fn solve(p: &ConicProblem, opts: &SolveOptions) -> Result<ConicSolution> {
    p.validate()?;
    let scale = p.scale();
    let m = p.num_vars;
    let c = Array1::from(p.objective.clone());
    let c_norm = 1.0 + c.dot(&c).sqrt();

    let factor = factorize_normal(p)?;
    let f0_dense: Vec<Array2<f64>> = p.blocks.iter().map(|b| b.f0.to_dense()).collect();

    let mut rho = opts.rho;
    let mut x: Array1<f64> = Array1::zeros(m);
    let mut slack: Vec<Array2<f64>> = f0_dense.clone();
    let mut t: Vec<Array2<f64>> = Vec::with_capacity(p.blocks.len());
    let mut u: Vec<Array2<f64>> = Vec::with_capacity(p.blocks.len());
    for block in &p.blocks {
        t.push(Array2::zeros((block.dim, block.dim)));
        u.push(-Array2::eye(block.dim) / rho);
    }

    let project = |block_idx: usize, w: &Array2<f64>| -> Result<Array2<f64>> {
        if p.blocks[block_idx].meta.complex_embedded {
            psd_project_embedded(w)
        } else {
            Ok(psd_project(w))
        }
    };

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = opts.max_iter;
    let mut t_prev_norm_diff;

    for iter in 0..opts.max_iter {
        // x-update: rho * A^T A x = c + rho * A^T (T - U - F0).
        let mut rhs = c.clone() / rho;
        for (k, block) in p.blocks.iter().enumerate() {
            let w = &t[k] - &u[k] - &f0_dense[k];
            for (var, f) in &block.terms {
                rhs[*var] += f.dot_dense(&w);
            }
        }
        x = factor.solve(&rhs)?;

        // Slack assembly and over-relaxed projection per block.
        t_prev_norm_diff = 0.0;
        for (k, block) in p.blocks.iter().enumerate() {
            let mut s = f0_dense[k].clone();
            for (var, f) in &block.terms {
                f.add_scaled_into(&mut s, x[*var]);
            }
            slack[k] = s;
            let v = opts.alpha * &slack[k] + (1.0 - opts.alpha) * &t[k];
            let w = &v + &u[k];
            let t_new = project(k, &w)?;
            let diff = &t_new - &t[k];
            t_prev_norm_diff += diff.iter().map(|d| d * d).sum::<f64>();
            u[k] = &w - &t_new;
            t[k] = t_new;
        }

        if (iter + 1) % opts.check_every == 0 || iter + 1 == opts.max_iter {
            let mut primal_sq = 0.0;
            for k in 0..p.blocks.len() {
                let d = &slack[k] - &t[k];
                primal_sq += d.iter().map(|v| v * v).sum::<f64>();
            }
            let primal = primal_sq.sqrt() / scale;

            // Z = -rho * U.
            let mut stat = c.clone();
            let mut dual_obj = 0.0;
            for (k, block) in p.blocks.iter().enumerate() {
                for (var, f) in &block.terms {
                    stat[*var] += -rho * f.dot_dense(&u[k]);
                }
                dual_obj += -rho * block.f0.dot_dense(&u[k]);
            }
            let dual = stat.dot(&stat).sqrt() / c_norm;
            let obj = c.dot(&x);
            let gap = (obj - dual_obj).abs() / (1.0 + obj.abs() + dual_obj.abs());

            if primal <= opts.tol_feas && dual <= opts.tol_feas && gap <= opts.tol_gap {
                status = SolveStatus::Optimal;
                iterations = iter + 1;
                break;
            }
            if !obj.is_finite() || x.iter().any(|v| !v.is_finite()) || obj.abs() > 1e14 * scale {
                status = SolveStatus::InfeasibleSuspected;
                iterations = iter + 1;
                break;
            }

            // Residual balancing keeps the two ADMM residuals comparable;
            // the factorization is rho-independent so this is free.
            if (iter + 1) % (4 * opts.check_every) == 0 {
                let dual_res = rho * t_prev_norm_diff.sqrt() / scale;
                if primal > 10.0 * dual_res && rho < 1e6 {
                    rho *= 2.0;
                    for uk in &mut u {
                        *uk /= 2.0;
                    }
                } else if dual_res > 10.0 * primal && rho > 1e-6 {
                    rho /= 2.0;
                    for uk in &mut u {
                        *uk *= 2.0;
                    }
                }
            }
        }
    }

    let mut duals: Vec<Array2<f64>> = u.iter().map(|uk| uk * (-rho)).collect();
    if opts.polish {
        if let Some(polished) = polish_duals(p, &duals, &slack, &c) {
            duals = polished;
        }
    }

    // Final independent residuals (primal violation via eigenvalues).
    let mut min_eig_primal = 0.0_f64;
    let mut min_eig_dual = 0.0_f64;
    let mut primal_sq = 0.0;
    for (k, s) in slack.iter().enumerate() {
        min_eig_primal = min_eig_primal.min(min_eig(s));
        min_eig_dual = min_eig_dual.min(min_eig(&duals[k]));
        let d = s - &t[k];
        primal_sq += d.iter().map(|v| v * v).sum::<f64>();
    }
    let mut stat = c.clone();
    let mut dual_obj = 0.0;
    for (k, block) in p.blocks.iter().enumerate() {
        for (var, f) in &block.terms {
            stat[*var] += f.dot_dense(&duals[k]);
        }
        dual_obj += block.f0.dot_dense(&duals[k]);
    }
    let objective_value = c.dot(&x);
    let residuals = Residuals {
        primal: primal_sq.sqrt() / scale,
        dual: stat.dot(&stat).sqrt() / c_norm,
        gap: (objective_value - dual_obj).abs()
            / (1.0 + objective_value.abs() + dual_obj.abs()),
        min_eig_primal,
        min_eig_dual,
    };

    Ok(ConicSolution {
        status,
        x: x.to_vec(),
        objective_value,
        dual_objective: dual_obj,
        duals,
        residuals,
        iterations,
    })
}

/// Restrict each dual to the face spanned by its significant eigenvectors
/// and re-solve the stationarity equations `Σ_k ⟨F_ik, Z_k⟩ = -c_i` in the
/// reduced coordinates, projecting back onto the PSD cone. Returns `None`
/// when the refit does not improve the stationarity residual.
fn polish_duals(
    p: &ConicProblem,
    duals: &[Array2<f64>],
    slack: &[Array2<f64>],
    c: &Array1<f64>,
) -> Option<Vec<Array2<f64>>> {
    let stat_norm = |zs: &[Array2<f64>]| -> f64 {
        let mut stat = c.clone();
        for (k, block) in p.blocks.iter().enumerate() {
            for (var, f) in &block.terms {
                stat[*var] += f.dot_dense(&zs[k]);
            }
        }
        stat.dot(&stat).sqrt()
    };
    let before = stat_norm(duals);

    // Face detection: eigenvectors of Z with eigenvalue above a relative
    // threshold, cross-checked against near-zero directions of the slack.
    let mut faces: Vec<Array2<f64>> = Vec::with_capacity(p.blocks.len());
    let mut dims: Vec<usize> = Vec::with_capacity(p.blocks.len());
    for (k, z) in duals.iter().enumerate() {
        let (vals, vecs) = z.eigh(UPLO::Lower).ok()?;
        let vmax = vals.iter().cloned().fold(0.0, f64::max);
        let tol = 1e-7 * (1.0 + vmax);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol).collect();
        if keep.is_empty() {
            faces.push(Array2::zeros((z.nrows(), 0)));
            dims.push(0);
            continue;
        }
        let mut basis = Array2::zeros((z.nrows(), keep.len()));
        for (col, &i) in keep.iter().enumerate() {
            for r in 0..z.nrows() {
                basis[[r, col]] = vecs[[r, i]];
            }
        }
        let _ = &slack[k];
        dims.push(keep.len());
        faces.push(basis);
    }

    // Unknowns: symmetric W_k per block, Z_k = V_k W_k V_k^T.
    let mut offsets = vec![0usize];
    for &d in &dims {
        offsets.push(offsets.last().unwrap() + d * (d + 1) / 2);
    }
    let total = *offsets.last().unwrap();
    if total == 0 || total > 4000 {
        return None;
    }

    let m = p.num_vars;
    let mut a = Array2::zeros((m, total));
    for (k, block) in p.blocks.iter().enumerate() {
        let d = dims[k];
        if d == 0 {
            continue;
        }
        let v = &faces[k];
        // G_f = V^T F V per coefficient matrix, unpacked over sym params.
        for (var, f) in &block.terms {
            let fd = f.to_dense();
            let g = v.t().dot(&fd).dot(v);
            let mut col = offsets[k];
            for i in 0..d {
                for j in i..d {
                    let w = if i == j { g[[i, i]] } else { g[[i, j]] + g[[j, i]] };
                    a[[*var, col]] += w;
                    col += 1;
                }
            }
        }
    }
    let rhs = -c.clone();
    // Ridge-regularized normal equations keep the refit near the ADMM dual.
    let mut ata = a.t().dot(&a);
    let ridge = 1e-10 * (1.0 + ata.diag().iter().cloned().fold(0.0, f64::max));
    for i in 0..total {
        ata[[i, i]] += ridge;
    }
    let mut atb = a.t().dot(&rhs);
    // Bias toward the current duals.
    for (k, z) in duals.iter().enumerate() {
        let d = dims[k];
        if d == 0 {
            continue;
        }
        let v = &faces[k];
        let w0 = v.t().dot(z).dot(v);
        let mut col = offsets[k];
        for i in 0..d {
            for j in i..d {
                let val = if i == j { w0[[i, i]] } else { w0[[i, j]] };
                atb[col] += ridge * val;
                col += 1;
            }
        }
    }
    let l = ata.cholesky(UPLO::Lower).ok()?;
    let upper = l.t().to_owned();
    let y = l.solve_triangular(UPLO::Lower, Diag::NonUnit, &atb).ok()?;
    let w = upper.solve_triangular(UPLO::Upper, Diag::NonUnit, &y).ok()?;

    let mut out = Vec::with_capacity(p.blocks.len());
    for (k, z) in duals.iter().enumerate() {
        let d = dims[k];
        if d == 0 {
            out.push(Array2::zeros(z.raw_dim()));
            continue;
        }
        let mut wk = Array2::zeros((d, d));
        let mut col = offsets[k];
        for i in 0..d {
            for j in i..d {
                wk[[i, j]] = w[col];
                wk[[j, i]] = w[col];
                col += 1;
            }
        }
        let wk = psd_project(&wk);
        out.push(faces[k].dot(&wk).dot(&faces[k].t()));
    }
    let after = stat_norm(&out);
    if after < before {
        Some(out)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Block, BlockMeta, SparseSym};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn projection_is_idempotent_on_psd() {
        let m = array![[2.0, 0.5], [0.5, 1.0]];
        let p = psd_project(&m);
        let d = &p - &m;
        assert!(d.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn scalar_block_reaches_bound() {
        // maximize x s.t. 1 - x >= 0.
        let mut p = ConicProblem::new(1, vec![1.0]).unwrap();
        let f = SparseSym::from_dense(&array![[-1.0]], 1e-12).unwrap();
        p.add_block(Block {
            dim: 1,
            f0: SparseSym::from_dense(&array![[1.0]], 1e-12).unwrap(),
            terms: vec![(0, f)],
            meta: BlockMeta::default(),
        })
        .unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.objective_value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.duals[0][[0, 0]], 1.0, epsilon = 1e-5);
    }
}
