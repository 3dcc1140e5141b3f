use proptest::prelude::*;
use seacat_core::costmodel::*;
use seacat_core::{Rational64, Scalar};

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Unrounded cost, so linearity can be checked exactly.
fn raw_cost(hours: Rational64, rate: Rational64) -> Rational64 {
    hours * rate
}

proptest! {
    #[test]
    fn hours_are_linear_in_images_and_redundancy(
        images in 1i64..2_000_000, iph in 1i64..2000, red in 1i64..10, k in 1i64..20,
    ) {
        let base = estimate_hours(r(images, 1), r(iph, 10), r(red, 1)).unwrap();
        prop_assert_eq!(estimate_hours(r(images * k, 1), r(iph, 10), r(red, 1)).unwrap(), base * r(k, 1));
        prop_assert_eq!(estimate_hours(r(images, 1), r(iph, 10), r(red * k, 1)).unwrap(), base * r(k, 1));
        prop_assert_eq!(base, r(images * red * 10, iph));
    }

    #[test]
    fn cost_is_linear_and_rounds_half_up(hours in 1i64..1_000_000, cents in 1i64..20_000, k in 1i64..50) {
        let (h, rate) = (r(hours, 1), r(cents, 100));
        let exact = raw_cost(h, rate);
        let got = estimate_cost(h, rate).unwrap();
        prop_assert!(got >= Rational64::from_integer(0));
        prop_assert!(*got.denom() == 1);
        // half-up: got - 1/2 <= exact < got + 1/2
        prop_assert!(got - r(1, 2) <= exact && exact < got + r(1, 2));
        prop_assert_eq!(raw_cost(h * r(k, 1), rate), exact * r(k, 1));
        prop_assert_eq!(raw_cost(h, rate * r(k, 1)), exact * r(k, 1));
        prop_assert_eq!(estimate_cost(h * r(k, 1), rate).unwrap(), (exact * r(k, 1)).round_half_up());
    }

    #[test]
    fn expert_cost_is_a_linear_combination(mid in 0i64..100_000, ben in 0i64..100_000, a in 0i64..500, b in 0i64..500) {
        let got = expert_cost(r(mid, 1), r(ben, 1), r(a, 100), r(b, 100)).unwrap();
        prop_assert_eq!(got, r(mid * a + ben * b, 100));
        let f = expert_cost(mid as f64, ben as f64, a as f64 / 100.0, b as f64 / 100.0).unwrap();
        prop_assert!((f - got.to_f64()).abs() <= 1e-6 * got.to_f64().max(1.0));
    }
}

#[test]
fn precision_variants_agree_on_reference_figures() {
    assert_eq!(estimate_cost(26_168.0_f32, 3.25).unwrap(), 85_046.0);
    assert_eq!(estimate_cost(26_168.0_f64, 3.25).unwrap(), 85_046.0);
    assert_eq!(estimate_cost(r(26_168, 1), r(13, 4)).unwrap(), r(85_046, 1));
}
