mod common;

use fiblab::catalog::Catalog;
use fiblab::dsl::{expand_umbral, parse_identity, Expr, Identity, UmbralVariant};
use fiblab::evaluator::{check_identity, IndexRange, Sweep};
use fiblab::prover::prove;
use fiblab::sequences::{fib, lucas};
use num_bigint::BigInt;
use proptest::prelude::*;

use common::*;

proptest! {
    #[test]
    fn fib_matches_naive_iteration(n in -200i64..400) {
        prop_assert_eq!(fib(n), naive_fib(n));
    }

    #[test]
    fn cassini(n in -50i64..=200) {
        let lhs = fib(n + 1) * fib(n - 1) - fib(n) * fib(n);
        let sign = if n % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(lhs, BigInt::from(sign));
    }

    #[test]
    fn addition_law(m in -150i64..150, n in -150i64..150) {
        prop_assert_eq!(fib(m + n), fib(m) * fib(n + 1) + fib(m - 1) * fib(n));
    }

    #[test]
    fn lucas_is_sum_of_neighbours(n in 0i64..300) {
        prop_assert_eq!(lucas(n).unwrap(), naive_fib(n - 1) + naive_fib(n + 1));
    }

    #[test]
    fn generated_render_round_trips(e in golden_expr()) {
        let id = Identity::new(vec![e.clone(), e]);
        prop_assert_eq!(render_round_trips(&id), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn normal_form_agrees_with_evaluation(e in golden_expr(), n in 0i64..=12, m in 0i64..=12) {
        prop_assert_eq!(oracle_agrees(&e, &env(n, m)), Ok(()));
    }

    #[test]
    fn k_fibonacci_normal_form_agrees(e in kfib_expr(), n in 0i64..=10) {
        prop_assert_eq!(oracle_agrees(&e, &env(n, 0)), Ok(()));
    }

    #[test]
    fn corpus_subexpressions_agree(pick in any::<prop::sample::Index>(), offset in 0i64..15) {
        let pool = corpus_subexpressions();
        let (sub, id) = &pool[pick.index(pool.len())];
        prop_assert_eq!(pooled_agrees(sub, id, offset), Ok(()));
    }
}

#[test]
fn cassini_sweep_through_evaluator() {
    let id = parse_identity("F[n+1]*F[n-1] - F[n]^2 = (-1)^n").unwrap();
    let r = check_identity(
        &id,
        &Sweep::Explicit(vec![IndexRange {
            var: "n".into(),
            start: -50,
            end: 200,
        }]),
    )
    .unwrap();
    assert!(r.all_equal());
    assert_eq!(r.assignments, 251);
}

#[test]
fn corpus_render_round_trips() {
    for e in &Catalog::shipped().entries {
        assert_eq!(render_round_trips(&e.identity), Ok(()), "{}", e.id());
    }
}

#[test]
fn umbral_identities_are_proven() {
    for p in 1..=8 {
        for variant in [UmbralVariant::Plus, UmbralVariant::Minus] {
            let id = expand_umbral(p, variant);
            let outcomes = prove(&id).unwrap();
            assert!(outcomes.iter().all(|o| o.is_proven()), "p={p} {variant}: {id}");
        }
    }
}

#[test]
fn subexpression_pool_is_substantial() {
    let pool = corpus_subexpressions();
    assert!(pool.len() > 200, "{}", pool.len());
    assert!(pool.iter().any(|(e, _)| matches!(e, Expr::KFib { .. })));
}
