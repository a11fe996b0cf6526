//! Property tests for the structural invariants.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, Zero};
use proptest::prelude::*;

use framecert::exact::{frac_part, ratio, ExactFrequency};
use framecert::measure::zero_set_member;
use framecert::stage::{build_stage_matrices, frob_deviation_double_sum, DEFAULT_STAGE_CAP};
use framecert::tower::{build_structured_stage, Family, StructuredParams, Tower};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frac_part_in_unit_interval(n in -10_000i64..10_000, d in 1i64..10_000) {
        let f = frac_part(&ratio(n, d));
        prop_assert!(!f.is_negative());
        prop_assert!(f < ratio(1, 1));
        // Difference from the input is an integer.
        prop_assert!((ratio(n, d) - f).is_integer());
    }

    #[test]
    fn deviation_chain_on_random_stages(m in 2u64..=8, k in 1u64..=500, alpha_seed in 0u64..8) {
        let alpha = alpha_seed % m;
        let params = StructuredParams::new(m, k, alpha).unwrap();
        let stage = build_structured_stage(&params);
        let sm = build_stage_matrices::<f64>(&stage, DEFAULT_STAGE_CAP).unwrap();
        // Operator norm below Frobenius norm below the analytic bound.
        prop_assert!(sm.dev_op <= sm.dev_frob + 1e-10);
        prop_assert!(sm.dev_op <= params.eps_analytic() + 1e-9);
        let n = (m * k + alpha) as f64;
        let frob_sq_bound = (std::f64::consts::TAU).powi(2) * (m as f64).powi(3)
            * (alpha as f64).powi(2) / (n * n);
        prop_assert!(sm.dev_frob.powi(2) <= frob_sq_bound + 1e-9);
        // Frobenius norm squared equals the explicit double sum.
        let ds: f64 = frob_deviation_double_sum(&stage).unwrap();
        prop_assert!((sm.dev_frob.powi(2) - ds).abs() < 1e-10);
        // Singular values sandwich 1 within eps_measured.
        prop_assert!(sm.sigma_min >= 1.0 - sm.eps_measured - 1e-12);
        prop_assert!(sm.sigma_max <= 1.0 + sm.eps_measured + 1e-12);
        // alpha = 0 collapses F onto the unitary H.
        if alpha == 0 {
            prop_assert!(sm.dev_op < 1e-12);
            prop_assert!(sm.eps_measured < 1e-12);
        }
    }

    #[test]
    fn zero_set_symmetry_p7(num in -500i64..500, den in 1i64..50, j_max in 1usize..4) {
        let t = Tower::new(Family::Nonspectral4k3 { p: 7 }).unwrap();
        let xi = ExactFrequency(ratio(num, den));
        let pos = zero_set_member(&t, &xi, j_max).unwrap();
        let neg = zero_set_member(
            &t,
            &ExactFrequency(-xi.value()),
            j_max,
        ).unwrap();
        // Membership is symmetric under negation, with the same witness level.
        prop_assert_eq!(pos.as_ref().map(|w| w.j), neg.as_ref().map(|w| w.j));
        if let (Some(p), Some(n)) = (pos, neg) {
            prop_assert_eq!(p.t, -n.t);
        }
    }

    #[test]
    fn zero_is_never_in_the_zero_set(j_max in 1usize..6) {
        let t = Tower::new(Family::OddPrimePower { p: 3 }).unwrap();
        let zero = ExactFrequency(BigRational::zero());
        prop_assert!(zero_set_member(&t, &zero, j_max).unwrap().is_none());
    }

    #[test]
    fn base_products_multiply(j in 1usize..8) {
        let t = Tower::new(Family::OddPrimePower { p: 5 }).unwrap();
        let prev = t.base_product(j - 1).unwrap();
        let cur = t.base_product(j).unwrap();
        prop_assert_eq!(cur, prev * &t.stage(j).unwrap().n);
        prop_assert!(t.base_product(0).unwrap() == BigInt::from(1));
    }
}
