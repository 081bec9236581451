mod common;

use proptest::prelude::*;

use sqn::lbfgs::{two_loop_apply, CorrectionPair, LbfgsMemory};
use sqn::objective::NoisyQuadratic;
use sqn::optim::{run, OptimizerConfig, RunOptions, SqnParams, Stop};

use common::{explicit_h, rel_diff, sym_eigenvalues, to_dvec};

/// Pairs `(s, y)` with `y = (D + u uᵀ) s` for a positive diagonal `D`.
fn pair_strategy(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-3.0f64..3.0, n),
        prop::collection::vec(0.05f64..5.0, n),
        prop::collection::vec(-1.0f64..1.0, n),
    )
        .prop_filter("nonzero s", |(s, _, _)| s.iter().map(|v| v * v).sum::<f64>() > 1e-6)
        .prop_map(|(s, d, u)| {
            let us: f64 = u.iter().zip(&s).map(|(a, b)| a * b).sum();
            let y = s.iter().zip(&d).zip(&u).map(|((si, di), ui)| di * si + ui * us).collect();
            (s, y)
        })
}

fn memory_strategy() -> impl Strategy<Value = (usize, LbfgsMemory, Vec<f64>)> {
    (1usize..=8, 0usize..=5).prop_flat_map(|(n, m)| {
        (
            Just(n),
            Just(m),
            prop::collection::vec(pair_strategy(n), 1..=7),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(|(n, m, pairs, g)| {
                let mut mem = LbfgsMemory::new(m);
                for (s, y) in pairs {
                    mem.insert(CorrectionPair::new(s.into(), y.into()).unwrap());
                }
                (n, mem, g)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn two_loop_matches_the_dense_update((n, mem, g) in memory_strategy()) {
        let fast = two_loop_apply(&mem, &g).unwrap();
        let dense = explicit_h(&mem, n) * to_dvec(&g);
        prop_assert!(rel_diff(&fast, dense.as_slice()) <= 1e-9);
    }

    #[test]
    fn inverse_hessian_is_positive_definite_and_satisfies_secant((n, mem, _g) in memory_strategy()) {
        let ev = sym_eigenvalues(&explicit_h(&mem, n));
        prop_assert!(ev[0] > 0.0);
        if mem.capacity() > 0 {
            let newest = mem.newest().unwrap();
            let hy = two_loop_apply(&mem, newest.y()).unwrap();
            prop_assert!(rel_diff(&hy, newest.s()) <= 1e-9);
        }
    }

    #[test]
    fn two_loop_is_linear((_n, mem, g) in memory_strategy(), a in -3.0f64..3.0) {
        let hg = two_loop_apply(&mem, &g).unwrap();
        let scaled: Vec<f64> = g.iter().map(|v| a * v).collect();
        let h_scaled = two_loop_apply(&mem, &scaled).unwrap();
        let expected: Vec<f64> = hg.iter().map(|v| a * v).collect();
        prop_assert!(rel_diff(&h_scaled, &expected) <= 1e-12 || expected.iter().all(|v| v.abs() < 1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sqn_accessed_points_follow_the_schedule(
        b in 1usize..20,
        b_h in 1usize..60,
        l in 1usize..8,
        m in 0usize..4,
        iters in 1u64..120,
        seed in 0u64..1000,
    ) {
        let q = NoisyQuadratic::linspace(4, 1.0, 3.0, 0.3, seed).unwrap().with_virtual_examples(500).unwrap();
        let opts = RunOptions {
            stop: Stop::Iterations(iters),
            checkpoint_every: 1,
            ..RunOptions::default()
        };
        let out = run(&OptimizerConfig::Sqn(SqnParams::new(b, b_h, l, m, 0.5)), &q, None, &opts).unwrap();
        prop_assert_eq!(out.records.len() as u64, iters + 1);
        for r in &out.records {
            let formed = (r.k / l as u64).saturating_sub(1);
            prop_assert_eq!(r.adp, r.k * b as u64 + formed * b_h as u64);
        }
        prop_assert_eq!(out.accounting.pairs_skipped, 0);
    }
}
