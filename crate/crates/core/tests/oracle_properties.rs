use afl_core::analytic::{analytic_oracle, CanonicalX};
use afl_core::cayley::verify_order_equality;
use afl_core::matrix::MatrixF;
use afl_core::oracle::{
    count_quadratic_solutions, count_quadratic_solutions_exhaustive, integral_cosets, CosetRep, OracleConfig, Parity,
    QuadraticCondition,
};
use afl_core::{AflError, PrecisionContext};
use proptest::prelude::*;

fn instance(p: u32, parity: Parity, m: i32, va: Option<i32>, vb: i32, seed: u64) -> CanonicalX {
    let ctx = PrecisionContext::new(p, 30).unwrap();
    CanonicalX::from_valuations(&ctx, parity, m, va, vb, seed).unwrap()
}

#[test]
fn distinct_integral_cosets_are_inequivalent() {
    for parity in [Parity::Odd, Parity::Even] {
        let x = instance(5, parity, 1, Some(1), 1, 3);
        let y = x.build_match_y().unwrap();
        let reps = integral_cosets(&y, &x.default_window(), parity, x.m(), &OracleConfig::default()).unwrap();
        assert!(reps.len() > 3);
        let ctx = x.ctx();
        for (i, r1) in reps.iter().enumerate() {
            let (h1, _) = r1.matrices(ctx, x.m());
            for r2 in &reps[i + 1..] {
                let (_, h2inv) = r2.matrices(ctx, x.m());
                let g = h1.mul(&h2inv);
                let in_gl3 = g.is_integral().unwrap() && g.det().unwrap().is_unit().unwrap();
                assert!(!in_gl3, "{r1:?} and {r2:?} define the same coset");
            }
        }
    }
}

#[test]
fn conjugation_agrees_with_quadratic_condition() {
    for parity in [Parity::Odd, Parity::Even] {
        for (va, vb) in [(Some(0), 0), (Some(2), 1), (None, 1)] {
            let x = instance(5, parity, 1, va, vb, 0);
            let y = x.build_match_y().unwrap();
            let cond = QuadraticCondition::from_canonical(&y, parity, x.m()).unwrap();
            let ctx = x.ctx();
            let w = x.default_window();
            for t in 0..=3 {
                for s in w.s_min..=w.s_max {
                    for star in 0..5u128.pow(t as u32) {
                        let rep = CosetRep { parity, s, t, x: star, margin: 0 };
                        let direct = rep.conjugate_is_integral(&y, x.m()).unwrap();
                        let derived = cond.holds(s, t, &rep.star(ctx)).unwrap();
                        assert_eq!(direct, derived, "{rep:?} va={va:?} vb={vb}");
                    }
                }
            }
        }
    }
}

#[test]
fn oracle_tally_ignores_unit_parts() {
    for parity in [Parity::Odd, Parity::Even] {
        for (va, vb) in [(Some(0), 1), (Some(2), 0), (None, 2)] {
            let tallies: Vec<_> = (0..4)
                .map(|seed| analytic_oracle(&instance(7, parity, 1, va, vb, seed), &OracleConfig::default()).unwrap().tally)
                .collect();
            assert!(tallies.windows(2).all(|w| w[0] == w[1]), "{parity:?} va={va:?} vb={vb}: {tallies:?}");
        }
    }
}

#[test]
fn order_equality_fails_for_a_bad_kappa() {
    // Companion matrix of (T-1)(T-2)(T-3) + 5: det(1 - x) = 5 is not a unit.
    let ctx = PrecisionContext::new(5, 30).unwrap();
    let row = |v: [i64; 3]| v.iter().map(|&n| ctx.qint(n)).collect::<Vec<_>>();
    let x = MatrixF::from_rows(&ctx, vec![row([0, 0, 1]), row([1, 0, -11]), row([0, 1, 6])]).unwrap();
    assert!(verify_order_equality(&x, &ctx.int(4)).unwrap());
    match verify_order_equality(&x, &ctx.int(1)) {
        Ok(holds) => assert!(!holds),
        Err(e) => assert!(matches!(e, AflError::OnDivisor | AflError::InvertZero | AflError::SingularMatrix), "{e}"),
    }
}

proptest! {
    #[test]
    fn quadratic_count_matches_enumeration(
        p in prop::sample::select(vec![5u32, 7]),
        center in 0u128..2401,
        tv in 0i32..5,
        tu in 1u128..2401,
        zero_target in any::<bool>(),
        t in 0i32..5,
    ) {
        let ctx = PrecisionContext::new(p, 20).unwrap();
        let c = ctx.from_unit(0, center);
        let d = if zero_target || tu % p as u128 == 0 { ctx.zero() } else { ctx.from_unit(tv, tu) };
        let exhaustive = count_quadratic_solutions_exhaustive(&c, &d, t).unwrap();
        for shift in 0..=t {
            prop_assert_eq!(count_quadratic_solutions(&c, &d, t, shift).unwrap(), exhaustive[shift as usize]);
        }
    }
}

#[test]
fn quadratic_count_edge_values() {
    let ctx = PrecisionContext::new(5, 20).unwrap();
    // t = 0 leaves one class; a non-square unit target has no roots.
    assert_eq!(count_quadratic_solutions(&ctx.zero(), &ctx.int(2), 0, 0).unwrap(), 1);
    assert_eq!(count_quadratic_solutions(&ctx.zero(), &ctx.int(2), 3, 0).unwrap(), 0);
    assert_eq!(count_quadratic_solutions(&ctx.zero(), &ctx.int(4), 3, 0).unwrap(), 2);
    assert!(count_quadratic_solutions(&ctx.zero(), &ctx.int(4), -1, 0).is_err());
}
