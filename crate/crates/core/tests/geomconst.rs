//! Jordan-von Neumann estimates against grid oracles and closed forms.

use modseq_core::geomconst::{
    alpha, alpha_beta, alpha_beta_for_spec, jvn_lower_bound, jvn_ratio, jvn_upper_bound, jvn_upper_bound_clarkson,
    tail_parallelogram_defect,
};
use modseq_core::nakano::{BlockFamily, ExponentSequence, NakanoSpec};
use modseq_core::spaces::{FiniteNormedSpace, Vector};
use proptest::prelude::*;

fn lp(p: f64, d: usize) -> FiniteNormedSpace {
    FiniteNormedSpace::lp(p, d).unwrap()
}

/// Grid maximum of the ratio on `l_p^2` over directions of `x`, `y` and
/// their relative length.
fn grid_oracle(p: f64) -> f64 {
    let norm = |a: f64, b: f64| (a.abs().powf(p) + b.abs().powf(p)).powf(1.0 / p);
    let pi = std::f64::consts::PI;
    let mut best = 0.0f64;
    for i in 0..180 {
        let (x0, x1) = ((i as f64 * pi / 180.0).cos(), (i as f64 * pi / 180.0).sin());
        for j in 0..180 {
            let ph = j as f64 * pi / 180.0;
            for k in -10..=10 {
                let t = 2f64.powf(k as f64 / 5.0);
                let (y0, y1) = (t * ph.cos(), t * ph.sin());
                let num = norm(x0 + y0, x1 + y1).powi(2) + norm(x0 - y0, x1 - y1).powi(2);
                best = best.max(num / (2.0 * (norm(x0, x1).powi(2) + norm(y0, y1).powi(2))));
            }
        }
    }
    best
}

#[test]
fn estimates_match_grid_oracle_and_closed_form() {
    for p in [1.5, 3.0, 4.0] {
        let est = jvn_lower_bound(&lp(p, 2), 32, 11).unwrap().lower_bound;
        let oracle = grid_oracle(p);
        // a(l_p) = 2^{2/min(p, p') - 1}
        let closed = 2f64.powf(2.0 / p.min(p / (p - 1.0)) - 1.0);
        assert!((oracle - closed).abs() <= 1e-6, "p = {p}: grid {oracle} vs {closed}");
        assert!((est - closed).abs() <= 1e-6, "p = {p}: estimate {est} vs {closed}");
    }
}

#[test]
fn estimates_stay_below_clarkson_bound() {
    for p in [1.0, 1.2, 1.5, 1.9, 2.0, 2.1, 2.5, 3.0, 4.0, 6.0] {
        for d in [2, 3] {
            let est = jvn_lower_bound(&lp(p, d), 8, 3).unwrap().lower_bound;
            let bound = jvn_upper_bound_clarkson(p).unwrap();
            assert!(est <= bound + 1e-6, "p = {p}, d = {d}: {est} > {bound}");
            assert!(est >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn hilbert_spaces_give_one() {
    for d in 1..=8 {
        let est = jvn_lower_bound(&FiniteNormedSpace::euclid(d).unwrap(), 8, d as u64).unwrap();
        assert!((est.lower_bound - 1.0).abs() <= 1e-9);
        assert_eq!(jvn_upper_bound(&FiniteNormedSpace::euclid(d).unwrap()).unwrap(), 1.0);
    }
}

#[test]
fn estimator_is_bit_identical_across_thread_counts() {
    let s = FiniteNormedSpace::schatten(3.0, 2).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| jvn_lower_bound(&s, 12, 99).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(8));
    assert_eq!(a, run(3));
}

proptest! {
    #[test]
    fn ratio_is_capped_and_its_orbit_reaches_one(
        p in prop_oneof![1.0..8.0f64, Just(f64::INFINITY)],
        x in prop::collection::vec(-10.0..10.0f64, 3),
        y in prop::collection::vec(-10.0..10.0f64, 3),
    ) {
        let s = lp(p, 3);
        let (x, y) = (Vector::real(x), Vector::real(y));
        prop_assume!(!x.is_zero() || !y.is_zero());
        let r = jvn_ratio(&s, &x, &y).unwrap();
        prop_assert!(r <= 2.0 + 1e-12);
        let u = x.add(&y);
        let v = x.sub(&y);
        let r2 = jvn_ratio(&s, &u, &v).unwrap();
        prop_assert!(r.max(r2) >= 1.0 - 1e-9);
    }

    #[test]
    fn beta_is_a_nonincreasing_majorant(
        rows in prop::collection::vec((1.0..6.0f64, 1.0..2.0f64), 1..40),
    ) {
        let exps: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let jvn: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let r = alpha_beta(&exps, &jvn).unwrap();
        for i in 0..exps.len() {
            prop_assert!(r.beta[i] >= r.alpha[i]);
            prop_assert_eq!(r.alpha[i], alpha(exps[i], jvn[i]));
            if i + 1 < exps.len() {
                prop_assert!(r.beta[i + 1] <= r.beta[i]);
            }
        }
    }
}

#[test]
fn tail_defect_stays_below_beta() {
    for (exps, cutoff) in [
        (ExponentSequence::Power { a: 1.0, s: 1.0 }, 5),
        (ExponentSequence::Log { a: 1.0, b: 1.0 }, 20),
        (ExponentSequence::Power { a: -0.5, s: 0.5 }, 3),
    ] {
        let spec = NakanoSpec { exponents: exps, blocks: BlockFamily::LpMatching { d: 2 } };
        let t = tail_parallelogram_defect(&spec, cutoff, 500, 4).unwrap();
        let r = alpha_beta_for_spec(&spec, 1000).unwrap();
        assert_eq!(t.beta, r.beta[cutoff - 1]);
        assert!(t.max_ratio <= t.beta + 1e-9, "{:?}: {} > {}", spec.exponents, t.max_ratio, t.beta);
    }
}
