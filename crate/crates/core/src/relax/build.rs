//! Assembly of the embedding relaxations as dual-form conic problems.
//!
//! Two builder families:
//!
//! * **Pair-constraint form** (`build_e12_pairwise`, `build_e12_prime`):
//!   one PSD block per group pair, constraining
//!   `Hhat_gd - Htilde_gd(Y) + W_gd - lambda_gd >= 0`, plus the moment
//!   matrix block `Y >= 0`. The communication term `W_gd` is parameterized
//!   per group by traceless Hermitian operators on the shared-group algebra
//!   whose sum over the pairs containing the group vanishes (the identity
//!   components are redundant against the `lambda` shifts and are dropped
//!   to keep the normal matrix nonsingular). The prime variant omits the
//!   communication variables entirely.
//!
//! * **Operator-identity form** (`build_e1`, `build_e12_sos`): the scalar
//!   identity `H - lambda = tr(Y F) (+ Σ g_gd)` is expanded over canonical
//!   monomials and solved by variable elimination; the solver sees only the
//!   free null-space coordinates, with the PSD blocks affine in them.

use ndarray::{Array1, Array2};
use vembed_conic::{Block, BlockMeta, ConicProblem, SparseSym};

use super::support::{
    embed_dense, embed_entries, herm_from_params, herm_params, matrices_to_polynomials,
    moment_param_operator, param_entries, traceless_herm_params, HermParam, MomentBasis,
};
use crate::algebra::{to_matrix, Monomial, OperatorPolynomial};
use crate::layout::{split_hamiltonian, ClusterLayout, Pair, SplitWeights};
use crate::models::LocalHamiltonian;
use crate::{C64, Error, Result};

/// A relaxation ready for the conic solver. The relaxation value is
/// `objective + offset`; `cert_weights` scale each block's cone violation
/// when computing a certified lower bound.
pub(crate) struct BuiltRelaxation {
    pub problem: ConicProblem,
    pub offset: f64,
    pub cert_weights: Vec<f64>,
}

fn neg_identity_embedded(dim: usize) -> SparseSym {
    let entries: Vec<(usize, usize, C64)> =
        (0..dim).map(|k| (k, k, C64::new(-1.0, 0.0))).collect();
    embed_entries(&entries, dim)
}

/// Pair-constraint schemes. `communication = true` gives the full scheme,
/// `false` the cheaper variant without communication variables.
fn build_pair_scheme(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    weights: &SplitWeights,
    communication: bool,
) -> Result<BuiltRelaxation> {
    let m = layout.num_groups();
    if m < 2 {
        return Err(Error::InvalidInput("pair schemes need at least two groups".into()));
    }
    let basis = MomentBasis::build(ham, layout)?;
    let pairs = layout.pairs();
    let num_pairs = pairs.len();
    let fragments = split_hamiltonian(ham, layout, weights)?;

    let y_params = herm_params(basis.len());
    let num_y = y_params.len();

    // Communication variables: per group, per containing pair except the
    // lexicographically last, a traceless Hermitian operator block.
    struct CommGroup {
        group: usize,
        pairs: Vec<Pair>,
        dim: usize,
        params: Vec<HermParam>,
        polys: Vec<OperatorPolynomial>,
        var_start: Vec<usize>,
    }
    let mut comm: Vec<CommGroup> = Vec::new();
    let mut num_vars = num_pairs + num_y;
    if communication && m > 2 {
        for g in 0..m {
            let sites = basis.group_sites[g].clone();
            let dim = 1usize << sites.len();
            let params = traceless_herm_params(dim);
            let mats: Vec<Array2<C64>> = params
                .iter()
                .map(|&p| {
                    let mut mat = Array2::zeros((dim, dim));
                    for (r, c, v) in param_entries(p, Some(dim)) {
                        mat[[r, c]] += v;
                    }
                    mat
                })
                .collect();
            let polys = matrices_to_polynomials(&mats, &sites, ham.kind)?
                .into_iter()
                .map(|p| p.widened(ham.num_sites()))
                .collect::<Result<Vec<_>>>()?;
            let containing = layout.pairs_containing(g);
            let mut var_start = Vec::new();
            for _ in 0..containing.len() - 1 {
                var_start.push(num_vars);
                num_vars += params.len();
            }
            comm.push(CommGroup { group: g, pairs: containing, dim, params, polys, var_start });
        }
    }

    let mut objective = vec![0.0; num_vars];
    for v in objective.iter_mut().take(num_pairs) {
        *v = 1.0;
    }
    let mut problem = ConicProblem::new(num_vars, objective).map_err(Error::Solver)?;

    // Precompute the operator each moment parameter feeds into tr(Y F).
    let ops: Vec<OperatorPolynomial> = y_params
        .iter()
        .map(|&p| moment_param_operator(&basis, p))
        .collect::<Result<_>>()?;

    for (pi, &pair) in pairs.iter().enumerate() {
        let sites = layout.pair_sites(ham, pair);
        let cdim = 1usize << sites.len();
        let f0 = embed_dense(&to_matrix(&fragments[&pair], &sites)?, 1e-9)?;
        let mut terms: Vec<(usize, SparseSym)> = Vec::new();
        terms.push((pi, neg_identity_embedded(cdim)));

        for (yi, (&p, op)) in y_params.iter().zip(ops.iter()).enumerate() {
            let (k, l) = match p {
                HermParam::Diag(k) => (k, k),
                HermParam::Re(k, l) | HermParam::Im(k, l) => (k, l),
            };
            let (gk, gl) = (basis.group_of[k], basis.group_of[l]);
            let coeff = if gk != gl {
                let home = (gk.min(gl), gk.max(gl));
                if home == pair {
                    -1.0
                } else {
                    continue;
                }
            } else if gk == pair.0 || gk == pair.1 {
                -weights.omega_of(pair, gk)
            } else {
                continue;
            };
            if coeff == 0.0 {
                continue;
            }
            let mat = to_matrix(&op.scaled(C64::new(coeff, 0.0)), &sites)?;
            let f = embed_dense(&mat, 1e-9)?;
            if f.nnz() > 0 {
                terms.push((num_pairs + yi, f));
            }
        }

        for cg in &comm {
            if cg.group != pair.0 && cg.group != pair.1 {
                continue;
            }
            let last = *cg.pairs.last().expect("group has pairs");
            if pair != last {
                let slot = cg.pairs.iter().position(|&q| q == pair).unwrap();
                for (qi, poly) in cg.polys.iter().enumerate() {
                    let f = embed_dense(&to_matrix(poly, &sites)?, 1e-9)?;
                    terms.push((cg.var_start[slot] + qi, f));
                }
            } else {
                // The eliminated slot: minus the sum of the others.
                for slot in 0..cg.pairs.len() - 1 {
                    for (qi, poly) in cg.polys.iter().enumerate() {
                        let mat = to_matrix(&poly.scaled(C64::new(-1.0, 0.0)), &sites)?;
                        terms.push((cg.var_start[slot] + qi, embed_dense(&mat, 1e-9)?));
                    }
                }
            }
        }

        problem
            .add_block(Block {
                dim: 2 * cdim,
                f0,
                terms,
                meta: BlockMeta {
                    label: format!("pair({},{})", pair.0, pair.1),
                    pair: Some(pair),
                    complex_embedded: true,
                },
            })
            .map_err(Error::Solver)?;
    }

    // Moment matrix block.
    let ny = basis.len();
    let mut terms = Vec::with_capacity(num_y);
    for (yi, &p) in y_params.iter().enumerate() {
        terms.push((num_pairs + yi, embed_entries(&param_entries(p, None), ny)));
    }
    problem
        .add_block(Block {
            dim: 2 * ny,
            f0: SparseSym::zeros(2 * ny),
            terms,
            meta: BlockMeta { label: "moment".into(), pair: None, complex_embedded: true },
        })
        .map_err(Error::Solver)?;

    let mut cert_weights = vec![1.0; num_pairs];
    cert_weights.push(basis.kappa_total());
    Ok(BuiltRelaxation { problem, offset: 0.0, cert_weights })
}

pub fn build_e12_pairwise(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    weights: &SplitWeights,
) -> Result<BuiltRelaxation> {
    build_pair_scheme(ham, layout, weights, true)
}

pub fn build_e12_prime(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    weights: &SplitWeights,
) -> Result<BuiltRelaxation> {
    build_pair_scheme(ham, layout, weights, false)
}

/// One unknown of the operator-identity system: its coefficient polynomial
/// and where it sits inside a PSD block.
struct ElimVar {
    op: OperatorPolynomial,
    block: usize,
    entries: Vec<(usize, usize, C64)>,
}

/// Operator-identity schemes: `with_pair_psd = false` builds the pure
/// moment relaxation, `true` adds one PSD operator variable per group pair.
fn build_identity_scheme(
    ham: &LocalHamiltonian,
    layout: &ClusterLayout,
    with_pair_psd: bool,
) -> Result<BuiltRelaxation> {
    let basis = MomentBasis::build(ham, layout)?;
    let h_total = ham.total()?;
    let ny = basis.len();

    // Block 0 is the moment matrix; pair PSD operators follow.
    let mut block_dims = vec![ny];
    let mut block_meta = vec![BlockMeta {
        label: "moment".into(),
        pair: None,
        complex_embedded: true,
    }];
    let mut cert_weights = vec![basis.kappa_total()];

    let mut vars: Vec<ElimVar> = Vec::new();
    for (yi, &p) in herm_params(ny).iter().enumerate() {
        let _ = yi;
        vars.push(ElimVar {
            op: moment_param_operator(&basis, p)?,
            block: 0,
            entries: param_entries(p, None),
        });
    }
    if with_pair_psd {
        if layout.num_groups() < 2 {
            return Err(Error::InvalidInput("pair schemes need at least two groups".into()));
        }
        for pair in layout.pairs() {
            let sites = layout.pair_sites(ham, pair);
            let dim = 1usize << sites.len();
            let params = herm_params(dim);
            let mats: Vec<Array2<C64>> = params
                .iter()
                .map(|&p| {
                    let mut mat = Array2::zeros((dim, dim));
                    for (r, c, v) in param_entries(p, None) {
                        mat[[r, c]] += v;
                    }
                    mat
                })
                .collect();
            let polys = matrices_to_polynomials(&mats, &sites, ham.kind)?;
            let block = block_dims.len();
            block_dims.push(dim);
            block_meta.push(BlockMeta {
                label: format!("pair-psd({},{})", pair.0, pair.1),
                pair: Some(pair),
                complex_embedded: true,
            });
            cert_weights.push(1.0);
            for (&p, poly) in params.iter().zip(polys.iter()) {
                vars.push(ElimVar {
                    op: poly.widened(ham.num_sites())?,
                    block,
                    entries: param_entries(p, None),
                });
            }
        }
    }

    // Monomial index over the identity `lambda + sum_v z_v op_v = H`.
    let mut monomials: std::collections::BTreeMap<Monomial, usize> = Default::default();
    let mut intern = |p: &OperatorPolynomial, map: &mut std::collections::BTreeMap<Monomial, usize>| {
        for (mono, _) in p.terms() {
            let next = map.len();
            map.entry(mono.clone()).or_insert(next);
        }
    };
    intern(&h_total, &mut monomials);
    let identity = OperatorPolynomial::identity(ham.kind, ham.num_sites());
    intern(&identity, &mut monomials);
    for v in &vars {
        intern(&v.op, &mut monomials);
    }
    let n_mono = monomials.len();
    let rows = 2 * n_mono;
    let cols = 1 + vars.len();

    let mut a: Array2<f64> = Array2::zeros((rows, cols));
    let mut b: Array1<f64> = Array1::zeros(rows);
    let mut fill = |col: usize, p: &OperatorPolynomial, a: &mut Array2<f64>| {
        for (mono, &coeff) in p.terms() {
            let r = monomials[mono];
            a[[2 * r, col]] += coeff.re;
            a[[2 * r + 1, col]] += coeff.im;
        }
    };
    fill(0, &identity, &mut a);
    for (vi, v) in vars.iter().enumerate() {
        fill(1 + vi, &v.op, &mut a);
    }
    for (mono, &coeff) in h_total.terms() {
        let r = monomials[mono];
        b[2 * r] = coeff.re;
        b[2 * r + 1] = coeff.im;
    }

    // Minimum-norm particular solution, then the null space.
    use ndarray_linalg::{LeastSquaresSvd, SVDInto};
    let lsq = a
        .least_squares(&b)
        .map_err(|e| Error::Internal(format!("least squares failed: {e}")))?;
    let z0 = lsq.solution;
    let residual = {
        let r = a.dot(&z0) - &b;
        r.dot(&r).sqrt()
    };
    let b_norm = b.dot(&b).sqrt();
    if residual > 1e-8 * (1.0 + b_norm) {
        return Err(Error::Internal(format!(
            "operator identity is infeasible: residual {residual:.3e}"
        )));
    }
    let (_, sigma, vt) = a
        .clone()
        .svd_into(false, true)
        .map_err(|e| Error::Internal(format!("svd failed: {e}")))?;
    let vt = vt.expect("vt requested");
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let rank = sigma.iter().filter(|&&s| s > 1e-10 * (1.0 + smax)).count();
    let null_dim = cols - rank;
    if null_dim == 0 {
        return Err(Error::Internal("operator identity leaves no free parameters".into()));
    }

    // Conic variables are the null-space coordinates.
    let mut objective = vec![0.0; null_dim];
    let mut offset = z0[0];
    for (t, obj) in objective.iter_mut().enumerate() {
        *obj = vt[[rank + t, 0]];
    }
    // Guard against a fully pinned lambda: keep offset exact either way.
    if objective.iter().all(|&c| c == 0.0) {
        offset = z0[0];
    }

    let mut problem = ConicProblem::new(null_dim, objective).map_err(Error::Solver)?;
    let num_blocks = block_dims.len();
    for blk in 0..num_blocks {
        let dim = block_dims[blk];
        // F0 from the particular solution.
        let mut f0c: Array2<C64> = Array2::zeros((dim, dim));
        for (vi, v) in vars.iter().enumerate() {
            if v.block == blk {
                let z = z0[1 + vi];
                if z != 0.0 {
                    for &(r, c, e) in &v.entries {
                        f0c[[r, c]] += e * z;
                    }
                }
            }
        }
        let f0 = embed_dense(&f0c, 1e-9)?;
        let mut terms = Vec::with_capacity(null_dim);
        for t in 0..null_dim {
            let mut fc: Array2<C64> = Array2::zeros((dim, dim));
            let mut nonzero = false;
            for (vi, v) in vars.iter().enumerate() {
                if v.block == blk {
                    let w = vt[[rank + t, 1 + vi]];
                    if w.abs() > 1e-14 {
                        nonzero = true;
                        for &(r, c, e) in &v.entries {
                            fc[[r, c]] += e * w;
                        }
                    }
                }
            }
            if nonzero {
                terms.push((t, embed_dense(&fc, 1e-9)?));
            }
        }
        problem
            .add_block(Block {
                dim: 2 * dim,
                f0,
                terms,
                meta: block_meta[blk].clone(),
            })
            .map_err(Error::Solver)?;
    }
    Ok(BuiltRelaxation { problem, offset, cert_weights })
}

pub fn build_e1(ham: &LocalHamiltonian, layout: &ClusterLayout) -> Result<BuiltRelaxation> {
    build_identity_scheme(ham, layout, false)
}

pub fn build_e12_sos(ham: &LocalHamiltonian, layout: &ClusterLayout) -> Result<BuiltRelaxation> {
    build_identity_scheme(ham, layout, true)
}

/// Certified lower bound: subtract each block's cone violation, weighted by
/// how far a unit eigenvalue shift of that block can move the constraint
/// operator. The result is a true lower bound on the relaxation value (and
/// hence the ground energy) regardless of solver convergence.
pub(crate) fn certified_value(
    built: &BuiltRelaxation,
    x: &[f64],
    raw_value: f64,
) -> Result<f64> {
    use ndarray_linalg::{Eigh, UPLO};
    let mut cert = raw_value;
    for (k, block) in built.problem.blocks.iter().enumerate() {
        let mut s = block.f0.to_dense();
        for (var, f) in &block.terms {
            f.add_scaled_into(&mut s, x[*var]);
        }
        let (vals, _) = s
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Internal(format!("eigh failed: {e}")))?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            cert -= built.cert_weights[k] * (-min);
        }
    }
    Ok(cert)
}

/// Assemble `Y(x)` from a solved pair-scheme problem for diagnostics: the
/// moment block is always the last block of the pair schemes.
#[allow(dead_code)]
pub(crate) fn moment_matrix_of(
    basis_len: usize,
    num_pairs: usize,
    x: &[f64],
) -> Array2<C64> {
    let params = herm_params(basis_len);
    herm_from_params(&params, &x[num_pairs..num_pairs + params.len()], basis_len, false)
}
