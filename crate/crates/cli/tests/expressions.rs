use moyal_cli::expr::parse_state;
use moyal_core::fock::StateTag;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn pure() -> impl Strategy<Value = StateTag> {
    let eigen = (0usize..40).prop_map(StateTag::Eigen);
    let coherent = complex().prop_map(StateTag::Coherent);
    let sup = prop::collection::btree_set(0usize..20, 1..4).prop_flat_map(|set| {
        let indices: Vec<usize> = set.into_iter().collect();
        let n = indices.len();
        prop::collection::vec(complex(), n)
            .prop_map(move |coeffs| StateTag::Superposition { indices: indices.clone(), coeffs })
    });
    let base = prop_oneof![eigen, coherent, sup];
    prop_oneof![
        3 => base.clone(),
        1 => (base, complex()).prop_map(|(b, kappa)| StateTag::Translated { base: Box::new(b), kappa }),
    ]
}

fn tag() -> impl Strategy<Value = StateTag> {
    let mix = prop::collection::vec((0.01..1.0f64, pure()), 1..4).prop_map(|parts| {
        let (weights, tags) = parts.into_iter().unzip();
        StateTag::Mixed { weights, tags }
    });
    prop_oneof![3 => pure(), 1 => mix]
}

proptest! {
    #[test]
    fn display_parses_back(t in tag()) {
        let text = t.to_string();
        let back = parse_state(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_string(), text);
    }
}
