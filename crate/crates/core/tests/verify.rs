//! Verifier determinism, witness replay and independent recomputation.

use modseq_core::spaces::{FiniteNormedSpace, Vector};
use modseq_core::verify::{
    default_lambda_grid, run_pair_check, verify_2smooth, verify_beckner, verify_clarkson_lower, verify_clarkson_upper,
    verify_lp_pair, verify_parallelogram, verify_schatten_inf, Check, Verdict, ViolationReport, Witness,
};

fn lp(p: f64, d: usize) -> FiniteNormedSpace {
    FiniteNormedSpace::lp(p, d).unwrap()
}

fn schatten(p: f64, d: usize) -> FiniteNormedSpace {
    FiniteNormedSpace::schatten(p, d).unwrap()
}

fn sampled_reports(seed: u64) -> Vec<ViolationReport> {
    vec![
        verify_clarkson_lower(&lp(3.0, 4), 3.0, 3000, seed).unwrap(),
        verify_clarkson_upper(&lp(1.5, 4), 1.5, 3000, seed).unwrap(),
        verify_clarkson_lower(&schatten(4.0, 2), 4.0, 1000, seed).unwrap(),
        verify_clarkson_upper(&schatten(1.2, 3), 1.2, 1000, seed).unwrap(),
        verify_2smooth(&lp(4.0, 3), 3f64.sqrt(), 3000, seed).unwrap(),
        verify_schatten_inf(3, 1000, seed).unwrap(),
        verify_parallelogram(&lp(3.0, 2), 3000, seed).unwrap(),
    ]
}

#[test]
fn verifiers_are_deterministic_and_witnesses_replay() {
    let a = sampled_reports(8);
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sampled_reports(8));
    assert_eq!(a, b);
    for r in a.iter().chain([&verify_beckner(3.0, None).unwrap()]) {
        let again = r.reevaluate().unwrap();
        assert!((again - r.max_violation).abs() <= 1e-12, "{:?}", r.check);
    }
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[test]
fn clarkson_witness_matches_direct_formula() {
    for (p, lower) in [(3.0, true), (2.5, true), (1.5, false), (1.1, false)] {
        let s = lp(p, 3);
        let r = if lower {
            verify_clarkson_lower(&s, p, 2000, 5).unwrap()
        } else {
            verify_clarkson_upper(&s, p, 2000, 5).unwrap()
        };
        let Witness::Pair { x, y } = &r.worst_witness else { panic!("pair witness expected") };
        let (x, y) = (x.as_real().unwrap(), y.as_real().unwrap());
        let plus: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let lhs = lp_norm(&plus, p).powi(2) + lp_norm(&minus, p).powi(2);
        let rhs = 2.0 * (lp_norm(x, p).powf(p) + lp_norm(y, p).powf(p)).powf(2.0 / p);
        let v = if lower { rhs - lhs } else { lhs - rhs } / rhs.max(1e-14);
        assert!((v - r.max_violation).abs() <= 1e-12, "p = {p}: {v} vs {}", r.max_violation);
        assert_eq!(r.verdict, Verdict::Holds);
    }
}

#[test]
fn clarkson_directions_meet_at_p_two() {
    for s in [lp(2.0, 3), schatten(2.0, 2)] {
        let lower = run_pair_check(Check::ClarksonLower { space: s.clone(), p: 2.0 }, 2000, 1, 1e-10).unwrap();
        let upper = run_pair_check(Check::ClarksonUpper { space: s.clone(), p: 2.0 }, 2000, 1, 1e-10).unwrap();
        assert!(lower.max_violation.abs() <= 1e-10 && upper.max_violation.abs() <= 1e-10);
        assert!(lower.holds() && upper.holds());
    }
}

#[test]
fn disjoint_basis_vectors_are_lp_pairs() {
    for p in [1.5, 2.0, 2.5, 4.0] {
        let s = lp(p, 3);
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let r = verify_lp_pair(&s, &Vector::basis(3, i), &Vector::basis(3, j), p, &default_lambda_grid()).unwrap();
            assert!(r.holds(), "p = {p}, ({i}, {j}): {}", r.max_violation);
        }
        let e = Vector::basis(3, 0);
        let r = verify_lp_pair(&s, &e, &e, p, &default_lambda_grid()).unwrap();
        assert_eq!(r.verdict, Verdict::Violated, "collinear pair at p = {p}");
    }
}

#[test]
fn schatten_matrix_units() {
    let unit = |i: usize, j: usize| Vector::basis(4, 2 * i + j);
    for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let s = schatten(p, 2);
        let grid = default_lambda_grid();
        let r = verify_lp_pair(&s, &unit(0, 0), &unit(1, 1), p, &grid).unwrap();
        assert!(r.holds(), "disjoint units at p = {p}");
        for other in [unit(0, 1), unit(1, 0)] {
            let r = verify_lp_pair(&s, &unit(0, 0), &other, p, &grid).unwrap();
            assert_eq!(r.holds(), p == 2.0, "shared row or column at p = {p}: {}", r.max_violation);
        }
    }
}

#[test]
fn beckner_at_two_is_an_identity() {
    let r = verify_beckner(2.0, None).unwrap();
    assert_eq!(r.samples, 401 * 401);
    assert!(r.max_violation <= 0.0, "{}", r.max_violation);
}

#[test]
fn non_hilbert_parallelogram_is_flagged() {
    let r = verify_parallelogram(&lp(4.0, 2), 500, 2).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    // the ratio ranges over [1/sqrt 2, sqrt 2], so the relative gap peaks at
    // sqrt 2 - 1, reached by ((1, 1), (1, -1))
    assert!((r.max_violation - (2f64.sqrt() - 1.0)).abs() <= 1e-12, "{}", r.max_violation);
}
