//! Randomised cross-checks between independent routes to the same numbers.

use proptest::prelude::*;
use verlinde_core::charfun::{irred_character, Character};
use verlinde_core::deform::DeformationSpec;
use verlinde_core::index::{index_even, IndexRequest};
use verlinde_core::levels::{canonical_level, fusion_gluing_oracle, verlinde_number};
use verlinde_core::liealg::root_system_from_label;
use verlinde_core::witten::su2_verlinde;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn formula_matches_fusion_ring_a1(k in 1i64..14, genus in 1u32..6) {
        let rs = root_system_from_label("A1").unwrap();
        let v = verlinde_number(&rs, &canonical_level(&rs, k).unwrap(), genus).unwrap();
        let o = fusion_gluing_oracle(&rs, k, genus).unwrap();
        prop_assert!((v - o as f64).abs() < 1e-9 * (o as f64).max(1.0), "{} vs {}", v, o);
        let closed = su2_verlinde(k, genus).unwrap();
        prop_assert!((closed - v).abs() < 1e-9 * v.max(1.0));
    }

    #[test]
    fn formula_matches_fusion_ring_rank_two(
        label in prop::sample::select(vec!["A2", "C2", "G2"]),
        k in 1i64..4,
        genus in 1u32..4,
    ) {
        let rs = root_system_from_label(label).unwrap();
        let v = verlinde_number(&rs, &canonical_level(&rs, k).unwrap(), genus).unwrap();
        let o = fusion_gluing_oracle(&rs, k, genus).unwrap();
        prop_assert!((v - o as f64).abs() < 1e-9 * (o as f64).max(1.0), "{} k={}: {} vs {}", label, k, v, o);
    }

    #[test]
    fn trivial_deformation_leaves_only_the_constant(k in 1i64..6, genus in 2u32..4, order in 1usize..4) {
        let rs = root_system_from_label("A1").unwrap();
        let level = canonical_level(&rs, k).unwrap();
        let spec = DeformationSpec::new(vec![("t".into(), Character::zero())], order).unwrap();
        let s = index_even(&rs, &level, &IndexRequest::even(genus, spec, Character::trivial(1))).unwrap();
        let v = verlinde_number(&rs, &level, genus).unwrap();
        prop_assert!((s.constant_term().re - v).abs() < 1e-9 * v);
        for (exps, c) in s.terms() {
            if exps.iter().any(|&e| e > 0) {
                prop_assert!(c.norm() < 1e-9 * v);
            }
        }
    }

    #[test]
    fn insertion_of_trivial_weight_is_neutral(k in 1i64..5, genus in 2u32..4) {
        let rs = root_system_from_label("A2").unwrap();
        let level = canonical_level(&rs, k).unwrap();
        let adjoint = irred_character(&rs, &[1, 1]).unwrap();
        let spec = |ch: &Character| DeformationSpec::new(vec![("t".into(), ch.clone())], 2).unwrap();
        let plain = index_even(&rs, &level, &IndexRequest::even(genus, spec(&adjoint), Character::trivial(2))).unwrap();
        let inserted = irred_character(&rs, &[0, 0]).unwrap();
        let with = index_even(&rs, &level, &IndexRequest::even(genus, spec(&adjoint), inserted)).unwrap();
        for ((e1, a), (e2, b)) in plain.terms().zip(with.terms()) {
            prop_assert_eq!(e1, e2);
            prop_assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        }
    }
}
