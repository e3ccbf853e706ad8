use proptest::prelude::*;

use monothresh::cover::{candidate_sets, min_cover_cost, q_threshold, weight};
use monothresh::measure::{duality_identities, Analyzer};
use monothresh::simulate::{estimate_mu_stream, Property};
use monothresh::{Caps, GraphSpec, MonotoneFamily, Subset};

fn family() -> impl Strategy<Value = MonotoneFamily> {
    (1usize..=8).prop_flat_map(|n| {
        let full = (1u64 << n) - 1;
        prop::collection::vec(1..=full, 1..8).prop_map(move |sets| {
            MonotoneFamily::from_sets(n, sets.into_iter().map(Subset)).unwrap()
        })
    })
}

fn brute_members(f: &MonotoneFamily) -> Vec<u64> {
    (0..1u64 << f.n())
        .filter(|&s| f.contains(Subset(s)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_form_is_a_fixed_point(f in family()) {
        let again = MonotoneFamily::from_sets(f.n(), f.minimal_sets().iter().copied()).unwrap();
        prop_assert_eq!(again, f);
    }

    #[test]
    fn level_profile_counts_members(f in family()) {
        let caps = Caps::default();
        let profile = f.level_profile(&caps).unwrap();
        prop_assert_eq!(profile.total(), brute_members(&f).len() as u64);
    }

    #[test]
    fn russo_and_isoperimetry(f in family(), p in 0.01f64..0.99) {
        let a = Analyzer::new(&f, &Caps::default()).unwrap();
        prop_assert!((a.total_influence(p) - a.mu_derivative(p)).abs() <= 1e-8);
        if let Ok(gap) = a.iso_gap(p) {
            prop_assert!(gap >= -1e-9);
        }
        if let Ok(r) = a.optimality_ratio(p) {
            prop_assert!(r >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn measure_is_monotone(f in family(), p in 0.0f64..0.99, dp in 0.001f64..0.01) {
        let a = Analyzer::new(&f, &Caps::default()).unwrap();
        prop_assert!(a.mu((p + dp).min(1.0)) >= a.mu(p) - 1e-15);
    }

    #[test]
    fn duality(f in family(), p in 0.01f64..0.99) {
        let caps = Caps::default();
        let d = f.dual(&caps).unwrap();
        prop_assert_eq!(d.dual(&caps).unwrap(), f.clone());
        let total = brute_members(&f).len() + brute_members(&d).len();
        prop_assert_eq!(total, 1usize << f.n());
        let (rm, ri) = duality_identities(&f, p, &caps).unwrap();
        prop_assert!(rm <= 1e-9 && ri <= 1e-9);
    }

    #[test]
    fn cover_witness_is_valid(f in family(), q in 0.01f64..0.99) {
        let caps = Caps::default();
        let w = min_cover_cost(&f, q, &caps).unwrap();
        prop_assert!(f.is_covered_by(&w.set_family(f.n())));
        let cost: f64 = w.g.iter().map(|&a| weight(q, a)).sum();
        prop_assert!((cost - w.cost).abs() <= 1e-12);
        let own: f64 = f.minimal_sets().iter().map(|&a| weight(q, a)).sum();
        prop_assert!(w.cost <= own + 1e-12);
        let candidates = candidate_sets(&f, &caps).unwrap();
        prop_assert!(w.g.iter().all(|a| candidates.sets().contains(a)));
    }

    #[test]
    fn cover_threshold_is_a_lower_bound(f in family()) {
        let caps = Caps::default();
        let q = q_threshold(&f, 1e-10, &caps).unwrap();
        let p_c = Analyzer::new(&f, &caps).unwrap().critical_probability(1e-12);
        prop_assert!(q.q <= p_c + 1e-6);
        prop_assert!(q.cost < 0.5);
    }

    #[test]
    fn thresholds_are_relabeling_invariant(f in family(), seed in any::<u64>()) {
        let caps = Caps::default();
        let n = f.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let g = f.permuted(&perm);
        let pa = Analyzer::new(&f, &caps).unwrap().critical_probability(1e-12);
        let pb = Analyzer::new(&g, &caps).unwrap().critical_probability(1e-12);
        prop_assert!((pa - pb).abs() <= 1e-10);
        let qa = q_threshold(&f, 1e-10, &caps).unwrap().q;
        let qb = q_threshold(&g, 1e-10, &caps).unwrap().q;
        prop_assert!((qa - qb).abs() <= 1e-8);
    }
}

#[test]
fn monte_carlo_estimates_increase_with_p() {
    let prop = Property::Subgraph {
        pattern: GraphSpec::complete(3),
    };
    let mut prev_low = 0.0;
    for (i, p) in [0.2, 0.35, 0.5, 0.65, 0.8].into_iter().enumerate() {
        let e = estimate_mu_stream(&prop, 6, p, 2000, 11, i as u64, 0.999).unwrap();
        assert!(e.ci_high >= prev_low, "{p}: {e:?}");
        prev_low = e.ci_low;
    }
}
