//! Property-based invariants across the public API: randomized keys,
//! digit strings, and configurations must never break the structural
//! guarantees the fixed-seed tests pin down pointwise.

use proptest::prelude::*;

use geonets::digits::DigitVector;
use geonets::experiment::{ExperimentConfig, Method};
use geonets::nets::faure_net_with_depth;
use geonets::quad::catalog::by_name;
use geonets::quad::gains::gain_coefficient;
use geonets::quad::scrambled_estimate;
use geonets::regions::schemes::{default_root, lookup, rule_base, RULE_NAMES};
use geonets::regions::transform::phi;
use geonets::{scramble_point_set, vdc_points, verify_net, ScrambleKey};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any key whatsoever leaves the net property intact.
    #[test]
    fn scrambling_with_any_key_preserves_the_net_property(
        seed in any::<u64>(),
        replicate in any::<u64>(),
        base in prop::sample::select(vec![2u32, 3]),
        m in 0u32..=4,
    ) {
        let s = (base as usize).min(2);
        let net = faure_net_with_depth(base, s, m, m.max(1) as usize).unwrap();
        let scrambled = scramble_point_set(&net, &ScrambleKey::new(seed, replicate));
        prop_assert!(verify_net(&scrambled, 0).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Descending any digit string through any registry rule lands
    /// inside the root region.
    #[test]
    fn any_digit_path_maps_into_the_root_region(
        rule_name in prop::sample::select(
            RULE_NAMES.iter().copied().filter(|n| *n != "triangle-b3").collect::<Vec<_>>()
        ),
        raw in prop::collection::vec(0u8..64, 1..12),
    ) {
        let base = rule_base(rule_name).unwrap().unwrap_or(2);
        let digits: Vec<u8> = raw.iter().map(|d| d % base as u8).collect();
        let point = phi(
            &DigitVector::new(base, digits).unwrap(),
            &default_root(rule_name).unwrap(),
            lookup(rule_name, base).unwrap().as_ref(),
        ).unwrap();
        prop_assert!(default_root(rule_name).unwrap().contains(&point));
    }

    /// Estimates of a {0,1}-valued integrand stay inside [0, 1] for
    /// every key.
    #[test]
    fn indicator_estimates_are_probabilities(
        seed in any::<u64>(),
        replicate in any::<u64>(),
        m in 0u32..=5,
    ) {
        let f = by_name("ind-tri-half").unwrap();
        let space = f.space(2).unwrap();
        let net = vdc_points(2, 2usize.pow(m)).unwrap();
        let est = scrambled_estimate(&f, &space, &net, ScrambleKey::new(seed, replicate)).unwrap();
        prop_assert!((0.0..=1.0).contains(&est));
    }

    /// Gain coefficients are averages of squared block sums, so they
    /// can never be negative, and a single point always has gain 1.
    #[test]
    fn gain_coefficients_are_nonnegative(
        m in 0u32..=5,
        k in 0u32..=6,
    ) {
        let net = vdc_points(2, 2usize.pow(m)).unwrap();
        let gamma = gain_coefficient(&net, &[0], &[k]).unwrap();
        prop_assert!(gamma >= 0.0);
        let single = vdc_points(2, 1).unwrap();
        prop_assert_eq!(gain_coefficient(&single, &[0], &[k]).unwrap(), 1.0);
    }

    /// Experiment configurations survive a JSON round trip unchanged.
    #[test]
    fn experiment_config_round_trips(
        base in 2u32..=5,
        m_min in 0u32..=3,
        span in 0u32..=3,
        replicates in 2usize..=64,
        seed in any::<u64>(),
        net_method in any::<bool>(),
    ) {
        let config = ExperimentConfig {
            integrand: "tri-xy".to_string(),
            base,
            m_min,
            m_max: m_min + span,
            replicates,
            seed,
            methods: if net_method {
                vec![Method::ScrambledNet, Method::MonteCarlo]
            } else {
                vec![Method::MonteCarlo]
            },
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, config);
    }
}
