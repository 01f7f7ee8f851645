//! Linear minimization oracles against brute force.

use proptest::prelude::*;
use ucgs_core::sets::{approx_lmo, ApproxLmo, ErrorBudget};
use ucgs_core::{FeasibleSet, Vector};

fn vertices(set: &FeasibleSet, n: usize, radius: f64, lo: f64, hi: f64) -> Vec<Vector> {
    match set {
        FeasibleSet::Simplex { .. } => (0..n).map(|i| Vector::basis(n, i, 1.0)).collect(),
        FeasibleSet::L1Ball { .. } => (0..n)
            .flat_map(|i| [Vector::basis(n, i, radius), Vector::basis(n, i, -radius)])
            .collect(),
        _ => (0..1usize << n)
            .map(|mask| {
                Vector::new((0..n).map(|i| if mask >> i & 1 == 1 { hi } else { lo }).collect()).unwrap()
            })
            .collect(),
    }
}

fn direction(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-5.0f64..5.0, n).prop_map(|v| Vector::new(v).unwrap())
}

proptest! {
    #[test]
    fn polytope_lmo_matches_vertex_enumeration(c in direction(7), which in 0usize..3) {
        let n = 7;
        let (radius, lo, hi) = (0.75, -0.5, 2.0);
        let set = match which {
            0 => FeasibleSet::simplex(n).unwrap(),
            1 => FeasibleSet::l1_ball(Vector::zeros(n), radius).unwrap(),
            _ => FeasibleSet::cube(Vector::filled(n, lo), Vector::filled(n, hi)).unwrap(),
        };
        let v = set.lmo(&c).unwrap();
        prop_assert!(set.contains_within(&v, 1e-12));
        let best = vertices(&set, n, radius, lo, hi).iter().map(|u| c.dot(u)).fold(f64::INFINITY, f64::min);
        prop_assert!((c.dot(&v) - best).abs() <= 1e-12 * (1.0 + best.abs()));
    }

    #[test]
    fn ball_lmo_beats_sampled_boundary(c in direction(5), seed in 0u64..1000) {
        prop_assume!(c.norm() > 1e-6);
        let set = FeasibleSet::l2_ball(Vector::zeros(5), 1.5).unwrap();
        let v = set.lmo(&c).unwrap();
        prop_assert!((c.dot(&v) + 1.5 * c.norm()).abs() <= 1e-12 * (1.0 + c.norm()));
        let mut rng = ucgs_core::rng::seeded_rng(seed);
        for _ in 0..50 {
            let x = set.sample(&mut rng);
            prop_assert!(c.dot(&v) <= c.dot(&x) + 1e-12);
        }
    }

    #[test]
    fn approximate_lmo_stays_within_budget(c in direction(6), delta in 0.0f64..3.0, t in 1usize..100, which in 0usize..4) {
        let set = match which {
            0 => FeasibleSet::simplex(6).unwrap(),
            1 => FeasibleSet::l1_ball(Vector::zeros(6), 2.0).unwrap(),
            2 => FeasibleSet::l2_ball(Vector::zeros(6), 1.0).unwrap(),
            _ => FeasibleSet::cube(Vector::filled(6, -1.0), Vector::filled(6, 1.0)).unwrap(),
        };
        let exact = c.dot(&set.lmo(&c).unwrap());
        for budget in [ErrorBudget::Constant(delta), ErrorBudget::Harmonic { scale: delta }] {
            let oracle = ApproxLmo::new(&set, budget).unwrap();
            let v = approx_lmo(&oracle, &c, t).unwrap();
            prop_assert!(set.contains_within(&v, 1e-12));
            prop_assert!(c.dot(&v) - exact <= budget.at(t) + 1e-12);
        }
    }
}

#[test]
fn approximate_lmo_rejects_negative_budget() {
    let set = FeasibleSet::simplex(3).unwrap();
    assert!(ApproxLmo::new(&set, ErrorBudget::Constant(-1.0)).is_err());
}
