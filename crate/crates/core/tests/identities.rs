use proptest::prelude::*;
use ucgs_core::ucgs::gamma_from_l;
use ucgs_core::{gamma_sequence_product, telescoping_bound};

proptest! {
    #[test]
    fn telescoping_matches_recursion(
        tail in prop::collection::vec(0.0f64..1.0, 0..80),
        seed_bs in prop::collection::vec(-10.0f64..10.0, 81),
    ) {
        let mut gammas = vec![1.0];
        gammas.extend(tail);
        let bs = &seed_bs[..gammas.len()];
        let fold = bs.iter().zip(&gammas).fold(0.0, |a, (b, g)| (1.0 - g) * a + g * b);
        let closed = telescoping_bound(bs, &gammas).unwrap();
        prop_assert!((closed - fold).abs() <= 1e-12 * (1.0 + bs.iter().map(|b| b.abs()).sum::<f64>()));
    }

    #[test]
    fn open_loop_product_closed_form(len in 1usize..500) {
        let gammas: Vec<f64> = (1..=len).map(|k| 2.0 / (k as f64 + 1.0)).collect();
        let products = gamma_sequence_product(&gammas);
        prop_assert_eq!(products.len(), len);
        for (i, p) in products.iter().enumerate() {
            let k = (i + 1) as f64;
            prop_assert!((p - 2.0 / (k * (k + 1.0))).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn step_size_solves_bookkeeping_identity(
        log_prev in -8.0f64..0.0,
        log_l in -4.0f64..6.0,
        k in 2usize..100_000,
    ) {
        let prev = 10f64.powf(log_prev);
        let l = 10f64.powf(log_l);
        let g = gamma_from_l(prev, l, k);
        prop_assert!(g > 0.0 && g <= 1.0);
        let lhs = l * g * g / k as f64;
        // scale by the larger term: 1 - γ cancels when γ is near 1
        prop_assert!((lhs - (1.0 - g) * prev).abs() <= 1e-12 * lhs.max(prev));
    }
}

#[test]
fn telescoping_rejects_nonunit_first_step() {
    assert!(telescoping_bound(&[1.0, 2.0], &[0.5, 0.5]).is_err());
}
