//! Randomized invariant checks complementing the example-based unit tests.

use proptest::prelude::*;

use netent::linalg::max_abs;
use netent::lmi::{lp_solve, LinearProgram};
use netent::netgraph::{domination_chain_radius, edge_radius, Hypergraph};
use netent::qstate::{
    fidelity, noisy_ghz, partial_trace, random_state, trace_norm, DensityMatrix, KrausChannel,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tensor_then_trace_is_identity(seed_a in 0u64..1000, seed_b in 0u64..1000) {
        let a = random_state(3, seed_a).unwrap();
        let b = random_state(4, seed_b).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back_a = partial_trace(&ab, &[0]).unwrap();
        let back_b = partial_trace(&ab, &[1]).unwrap();
        prop_assert!(max_abs(&(back_a.matrix() - a.matrix())) < 1e-10);
        prop_assert!(max_abs(&(back_b.matrix() - b.matrix())) < 1e-10);
    }

    #[test]
    fn trace_distance_fidelity_inequalities(seed_a in 0u64..1000, seed_b in 0u64..1000) {
        // 1 - sqrt(F) <= T <= sqrt(1 - F)
        let a = random_state(4, seed_a).unwrap();
        let b = random_state(4, seed_b).unwrap();
        let f = fidelity(&a, &b).unwrap();
        let t = trace_norm(&(a.matrix() - b.matrix())).unwrap() / 2.0;
        prop_assert!(1.0 - f.sqrt() <= t + 1e-8, "F={f} T={t}");
        prop_assert!(t <= (1.0 - f).max(0.0).sqrt() + 1e-8, "F={f} T={t}");
    }

    #[test]
    fn channels_preserve_state_invariants(seed in 0u64..1000, p in 0.0f64..1.0) {
        let rho = noisy_ghz(2, 3, p).unwrap();
        let dep = KrausChannel::depolarizing(2);
        // constructor revalidates Hermiticity, trace and positivity
        let out = netent::qstate::apply_channel(&rho, &dep, (seed % 3) as usize).unwrap();
        prop_assert!(out.purity() <= 1.0 + 1e-9);
        // depolarizing can only mix
        prop_assert!(out.purity() <= rho.purity() + 1e-9);
    }

    #[test]
    fn radius_characterizations_agree_on_random_graphs(
        seed in 0u64..10_000,
        n in 3usize..12,
        extra in 0usize..10,
    ) {
        // random connected graph: spanning-path plus `extra` random chords
        let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let mut x = seed;
        for _ in 0..extra {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (x >> 33) as usize % n;
            let v = (x >> 13) as usize % n;
            if u != v && !pairs.contains(&(u.min(v), u.max(v))) {
                pairs.push((u.min(v), u.max(v)));
            }
        }
        let g = Hypergraph::simple(n, &pairs).unwrap();
        prop_assert_eq!(domination_chain_radius(&g), edge_radius(&g).map(|(v, _)| v));
    }

    #[test]
    fn simplex_beats_random_feasible_points(
        c0 in -3.0f64..3.0, c1 in -3.0f64..3.0,
        g0 in -2.0f64..2.0, g1 in -2.0f64..2.0, h in -1.0f64..0.5,
        px in 0.0f64..1.0, py in 0.0f64..1.0,
    ) {
        let lp = LinearProgram {
            objective: vec![c0, c1],
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
            cuts: vec![(vec![g0, g1], h)],
        };
        if let Ok(x) = lp_solve(&lp) {
            // optimum is feasible
            prop_assert!(g0 * x[0] + g1 * x[1] >= h - 1e-8);
            prop_assert!((0.0..=1.0 + 1e-9).contains(&x[0]) && (0.0..=1.0 + 1e-9).contains(&x[1]));
            // and dominates any feasible sample point
            if g0 * px + g1 * py >= h {
                let opt = c0 * x[0] + c1 * x[1];
                prop_assert!(opt >= c0 * px + c1 * py - 1e-8, "opt {opt}");
            }
        }
    }

    #[test]
    fn witness_bounded_and_monotone(p in 0.0f64..0.98) {
        let lo = netent::bounds::witness_bound(&noisy_ghz(2, 3, p).unwrap(), 2)
            .unwrap().value.lower();
        let hi = netent::bounds::witness_bound(&noisy_ghz(2, 3, p + 0.02).unwrap(), 2)
            .unwrap().value.lower();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-12);
    }
}

#[test]
fn loaded_state_rejects_corruption() {
    // serialization round trip preserves the state; corrupting positivity is
    // caught on load
    let rho = noisy_ghz(2, 2, 0.7).unwrap();
    let mut j = rho.to_json();
    let back = DensityMatrix::from_json(&j).unwrap();
    assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
    j.re[0][0] -= 2.0;
    j.re[3][3] += 2.0;
    assert!(DensityMatrix::from_json(&j).is_err());
}
