use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use wconorm::algebra::{reconstruct, AlgebraElement, CMatrix};
use wconorm::dynamics::MeasuredGSpace;
use wconorm::norms::{realize, norm_p, EstimateOptions, Exponent};
use wconorm::scenario::{load_scenario, random_scenario, RandomSpec, Scenario};
use wconorm::GroupDescriptor;

fn group_strategy() -> impl Strategy<Value = GroupDescriptor> {
    prop_oneof![
        (1usize..=5).prop_map(GroupDescriptor::Cyclic),
        Just(GroupDescriptor::Product(vec![GroupDescriptor::Cyclic(2), GroupDescriptor::Cyclic(2)])),
        Just(GroupDescriptor::Symmetric(3)),
    ]
}

fn order(g: &GroupDescriptor) -> usize {
    match g {
        GroupDescriptor::Cyclic(n) => *n,
        GroupDescriptor::Symmetric(3) => 6,
        GroupDescriptor::Product(f) => f.iter().map(order).product(),
        _ => unreachable!(),
    }
}

fn spec_strategy() -> impl Strategy<Value = RandomSpec> {
    (group_strategy(), 1usize..=3, 1usize..=2, any::<u64>(), any::<bool>(), 0usize..=6).prop_map(
        |(group, orbits, dim, seed, free, support)| {
            let k = order(&group);
            RandomSpec {
                points: k * orbits + usize::from(!free),
                group,
                dim,
                support,
                seed,
                free,
            }
        },
    )
}

fn exponent_strategy() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::TWO),
        Just(Exponent::INFINITY),
        (1.0f64..6.0).prop_map(|p| Exponent::new(p).unwrap()),
    ]
}

/// Two elements over the same space.
fn pair(spec: &RandomSpec) -> (AlgebraElement, AlgebraElement) {
    let a = random_scenario(spec).unwrap().instantiate().unwrap().element;
    let other = RandomSpec {
        seed: spec.seed.wrapping_add(1),
        ..spec.clone()
    };
    let b = random_scenario(&other).unwrap().instantiate().unwrap().element;
    // same space: rebuild b's coefficients over a's space
    let terms = b.terms().map(|(g, f)| (g, f.clone())).collect();
    let b = AlgebraElement::from_terms(a.space().clone(), a.dim(), terms).unwrap();
    (a, b)
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realization_is_multiplicative(spec in spec_strategy(), p in exponent_strategy()) {
        let (a, b) = pair(&spec);
        let lhs = realize(&a.multiply(&b).unwrap(), p);
        let rhs = realize(&a, p).matrix() * realize(&b, p).matrix();
        prop_assert!(max_diff(lhs.matrix(), &rhs) <= 1e-12);
    }

    #[test]
    fn realization_is_linear(spec in spec_strategy(), p in exponent_strategy(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (a, b) = pair(&spec);
        let s = Complex64::new(re, im);
        let lhs = realize(&a.scale(s).add(&b).unwrap(), p);
        let rhs = realize(&a, p).matrix() * s + realize(&b, p).matrix();
        prop_assert!(max_diff(lhs.matrix(), &rhs) <= 1e-12);
    }

    #[test]
    fn multiplication_is_associative(spec in spec_strategy()) {
        let (a, b) = pair(&spec);
        let c = a.add(&b).unwrap();
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert!(left.max_coefficient_diff(&right) <= 1e-12);
    }

    #[test]
    fn twists_are_multiplicative(spec in spec_strategy()) {
        prop_assume!(spec.group != GroupDescriptor::Symmetric(3));
        let (a, b) = pair(&spec);
        let chars = a.space().group().characters().unwrap();
        for chi in &chars {
            let lhs = a.multiply(&b).unwrap().twist(chi);
            let rhs = a.twist(chi).multiply(&b.twist(chi)).unwrap();
            prop_assert!(lhs.max_coefficient_diff(&rhs) <= 1e-12);
        }
    }

    #[test]
    fn reconstruct_inverts_realize_on_free_spaces(spec in spec_strategy(), p in exponent_strategy()) {
        prop_assume!(spec.free);
        let b = random_scenario(&spec).unwrap().instantiate().unwrap().element;
        let back = reconstruct(b.space(), &realize(&b, p)).unwrap();
        prop_assert!(back.max_coefficient_diff(&b) <= 1e-10);
    }

    #[test]
    fn norm_bounds_are_ordered(spec in spec_strategy(), p in exponent_strategy()) {
        let b = random_scenario(&spec).unwrap().instantiate().unwrap().element;
        let opts = EstimateOptions { restarts: 8, ..EstimateOptions::with_seed(spec.seed) };
        let nb = norm_p(&realize(&b, p), &opts);
        prop_assert!(nb.lower >= 0.0);
        prop_assert!(nb.lower <= nb.upper);
        prop_assert!(!nb.exact || nb.upper - nb.lower <= 1e-9);
    }

    #[test]
    fn scenarios_round_trip_through_files(spec in spec_strategy()) {
        let sc = random_scenario(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        sc.save(&path).unwrap();
        prop_assert_eq!(load_scenario(&path).unwrap(), sc);
    }

    #[test]
    fn random_scenarios_are_deterministic(spec in spec_strategy()) {
        prop_assert_eq!(random_scenario(&spec).unwrap(), random_scenario(&spec).unwrap());
    }

    #[test]
    fn free_flag_is_honoured(spec in spec_strategy()) {
        let sc = random_scenario(&spec).unwrap();
        let space: Arc<MeasuredGSpace> = sc.build_space().unwrap();
        let trivial_group = space.group().order() == 1;
        prop_assert_eq!(space.is_topologically_free().free, spec.free || trivial_group);
    }
}

#[test]
fn rational_weights_survive_round_trip() {
    let json = r#"{
        "label": "exact",
        "seed": 1,
        "group": "cyclic:2",
        "space": {"points": 2, "weights": ["1/3", "5/2"], "action": [[0, 1], [1, 0]]},
        "element": [{"g": 1, "coeff": [[[[1.0, 0.0]]], [[[0.5, -1.0]]]]}]
    }"#;
    let sc = Scenario::from_json_str(json).unwrap();
    let back = Scenario::from_json_str(&sc.to_json_string()).unwrap();
    assert_eq!(back, sc);
    assert!(sc.to_json_string().contains("\"1/3\""));
}
