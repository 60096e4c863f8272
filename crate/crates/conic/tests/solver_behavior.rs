//! Solver behavior on reference problems with independently known answers.

use approx::assert_abs_diff_eq;
use ndarray::{array, Array2};
use ndarray_linalg::{Eigh, UPLO};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use vembed_conic::{
    check_kkt, solve, Block, BlockMeta, ConicProblem, SolveOptions, SolveStatus, SparseSym,
};

fn sym(m: &Array2<f64>) -> SparseSym {
    SparseSym::from_dense(m, 1e-10).unwrap()
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

/// maximize lambda s.t. A - lambda I >= 0 has optimum min_eig(A).
#[test]
fn eigenvalue_variational_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2usize, 4, 7] {
        let a = random_sym(&mut rng, n);
        let (vals, _) = a.eigh(UPLO::Lower).unwrap();
        let expect = vals.iter().cloned().fold(f64::INFINITY, f64::min);

        let mut p = ConicProblem::new(1, vec![1.0]).unwrap();
        let neg_eye = -Array2::<f64>::eye(n);
        p.add_block(Block {
            dim: n,
            f0: sym(&a),
            terms: vec![(0, sym(&neg_eye))],
            meta: BlockMeta::default(),
        })
        .unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.objective_value, expect, epsilon = 1e-7);
        assert!(check_kkt(&p, &sol, 1e-6).pass);
    }
}

#[test]
fn scalar_problem_dual_certificate() {
    let mut p = ConicProblem::new(1, vec![1.0]).unwrap();
    p.add_block(Block {
        dim: 1,
        f0: sym(&array![[1.0]]),
        terms: vec![(0, sym(&array![[-1.0]]))],
        meta: BlockMeta::default(),
    })
    .unwrap();
    let sol = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_abs_diff_eq!(sol.objective_value, 1.0, epsilon = 1e-7);
    assert_abs_diff_eq!(sol.duals[0][[0, 0]], 1.0, epsilon = 1e-5);
}

/// Random feasible-by-construction problems must pass the independent KKT
/// checker at 1e-6 scale.
#[test]
fn random_problems_satisfy_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..5 {
        let nvars = 3;
        let mut p = ConicProblem::new(nvars, vec![1.0, -0.5, 0.25]).unwrap();
        for b in 0..2 {
            let n = 3;
            // F0 strictly positive definite so x = 0 is strictly feasible.
            let base = random_sym(&mut rng, n);
            let f0 = base.dot(&base.t()) + Array2::<f64>::eye(n) * (1.0 + b as f64);
            let terms = (0..nvars)
                .map(|v| (v, sym(&random_sym(&mut rng, n))))
                .collect();
            p.add_block(Block { dim: n, f0: sym(&f0), terms, meta: BlockMeta::default() })
                .unwrap();
        }
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial} not optimal");
        let report = check_kkt(&p, &sol, 1e-6);
        assert!(report.pass, "trial {trial}: {report:?}");
    }
}

/// Weak duality: reported primal value never exceeds the dual bound beyond
/// tolerance.
#[test]
fn weak_duality_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let n = 4;
        let base = random_sym(&mut rng, n);
        let f0 = base.dot(&base.t()) + Array2::<f64>::eye(n);
        let mut p = ConicProblem::new(2, vec![1.0, 1.0]).unwrap();
        let terms = vec![(0, sym(&random_sym(&mut rng, n))), (1, sym(&random_sym(&mut rng, n)))];
        p.add_block(Block { dim: n, f0: sym(&f0), terms, meta: BlockMeta::default() }).unwrap();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        if sol.status == SolveStatus::Optimal {
            let tol = 1e-6 * p.scale() * (1.0 + sol.objective_value.abs());
            assert!(sol.objective_value <= sol.dual_objective + tol);
        }
    }
}

/// Scaling variable i and its matrices F_i by s rescales x_i by 1/s and
/// leaves the optimum unchanged.
#[test]
fn rescaling_invariance() {
    let a = array![[1.5, 0.3, 0.0], [0.3, 2.0, -0.4], [0.0, -0.4, 1.0]];
    let build = |s: f64| {
        let mut p = ConicProblem::new(1, vec![s]).unwrap();
        let scaled = -Array2::<f64>::eye(3) * s;
        p.add_block(Block {
            dim: 3,
            f0: sym(&a),
            terms: vec![(0, sym(&scaled))],
            meta: BlockMeta::default(),
        })
        .unwrap();
        p
    };
    let sol1 = solve(&build(1.0), &SolveOptions::default()).unwrap();
    let sol2 = solve(&build(8.0), &SolveOptions::default()).unwrap();
    let rel = (sol1.objective_value - sol2.objective_value).abs()
        / (1.0 + sol1.objective_value.abs());
    assert!(rel <= 1e-6, "objective changed under rescaling: {rel:.3e}");
    assert_abs_diff_eq!(sol1.x[0], 8.0 * sol2.x[0], epsilon = 1e-5);
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let a = array![[1.0, 0.7], [0.7, -0.5]];
    let mut p = ConicProblem::new(1, vec![1.0]).unwrap();
    let neg_eye = -Array2::<f64>::eye(2);
    p.add_block(Block {
        dim: 2,
        f0: sym(&a),
        terms: vec![(0, sym(&neg_eye))],
        meta: BlockMeta::default(),
    })
    .unwrap();
    let s1 = solve(&p, &SolveOptions::default()).unwrap();
    let s2 = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s1.objective_value.to_bits(), s2.objective_value.to_bits());
    assert_eq!(s1.x[0].to_bits(), s2.x[0].to_bits());
}

#[test]
fn unbounded_is_flagged() {
    // maximize x with x only pushing the block more positive: unbounded.
    let mut p = ConicProblem::new(1, vec![1.0]).unwrap();
    p.add_block(Block {
        dim: 1,
        f0: sym(&array![[1.0]]),
        terms: vec![(0, sym(&array![[1.0]]))],
        meta: BlockMeta::default(),
    })
    .unwrap();
    let opts = SolveOptions { max_iter: 20_000, ..Default::default() };
    let sol = solve(&p, &opts).unwrap();
    assert_ne!(sol.status, SolveStatus::Optimal);
}

#[test]
fn sdpa_round_trip_solves_identically() {
    let a = array![[2.0, -0.3], [-0.3, 0.5]];
    let mut p = ConicProblem::new(1, vec![1.0]).unwrap();
    let neg_eye = -Array2::<f64>::eye(2);
    p.add_block(Block {
        dim: 2,
        f0: sym(&a),
        terms: vec![(0, sym(&neg_eye))],
        meta: BlockMeta { label: "moment".into(), pair: None, complex_embedded: false },
    })
    .unwrap();
    let text = vembed_conic::write_problem(&p);
    let q = vembed_conic::read_problem(&text).unwrap();
    let s1 = solve(&p, &SolveOptions::default()).unwrap();
    let s2 = solve(&q, &SolveOptions::default()).unwrap();
    assert_abs_diff_eq!(s1.objective_value, s2.objective_value, epsilon = 1e-9);
}
