use proptest::prelude::*;

use gsi::catalog::{self, Params};
use gsi::engine::{estimate, estimate_batch, estimate_with, pair_terms, Correction, SampleConfig};
use gsi::models::{brute_force_anova, AnyModel, GridFunction, ProductModel};
use gsi::spec::batch_cost;
use gsi::subset::{lower_from_sigma, nxor_set, sigma_from_lower, xor_set, SubsetMap};
use gsi::verify::{catalog_target, exhaustive_average};
use gsi::{GsiSpec, SubsetMask};

fn mask(d: usize) -> impl Strategy<Value = SubsetMask> {
    (0u64..(1 << d)).prop_map(move |b| SubsetMask::new(b, d).unwrap())
}

fn params(d: usize, extended: bool) -> Params {
    Params::new(d)
        .with_u(SubsetMask::from_indices(&[1, 2], d).unwrap())
        .with_w(SubsetMask::from_indices(&[1, 2, 3], d).unwrap())
        .with_extended(extended)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_is_an_involution(u in mask(7)) {
        prop_assert_eq!(u.complement().complement(), u);
        prop_assert_eq!(u.union(u.complement()).unwrap(), SubsetMask::full(7).unwrap());
        prop_assert_eq!(u.cardinality() + u.complement().cardinality(), 7);
    }

    #[test]
    fn nxor_is_symmetric_and_complements_xor(u in mask(6), v in mask(6)) {
        prop_assert_eq!(nxor_set(u, v).unwrap(), nxor_set(v, u).unwrap());
        prop_assert_eq!(nxor_set(u, v).unwrap(), xor_set(u, v).unwrap().complement());
        prop_assert!(nxor_set(u, u).unwrap().is_full());
    }

    #[test]
    fn moebius_roundtrip_on_random_maps(vals in proptest::collection::vec(-5.0f64..5.0, 32)) {
        let d = 5;
        let lower: SubsetMap = SubsetMask::all(d).unwrap().zip(vals).collect();
        let back = lower_from_sigma(&sigma_from_lower(&lower).unwrap()).unwrap();
        for (u, v) in &lower {
            prop_assert!((back[u] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn engine_counts_match_cost(d in 3usize..=6, seed in any::<u64>(), extended in any::<bool>()) {
        let model = AnyModel::Grid(GridFunction::random(d, 2, seed).unwrap());
        let cfg = SampleConfig::new(40, seed);
        for entry in catalog::catalog() {
            let specs: Vec<GsiSpec> = entry.build(&params(d, extended)).unwrap().into_iter().map(|n| n.spec).collect();
            for s in &specs {
                prop_assert_eq!(estimate(s, &model, &cfg).unwrap().evals_per_pair, s.cost());
            }
            prop_assert_eq!(estimate_batch(&specs, &model, &cfg).unwrap().evals_per_pair, batch_cost(&specs).unwrap());
        }
    }

    #[test]
    fn square_terms_are_nonnegative(seed in any::<u64>(), w in mask(4)) {
        prop_assume!(!w.is_empty());
        let model = ProductModel::new(vec![1.0, -0.5, 0.3, 2.0], vec![0.7, 1.0, 0.2, 0.4]).unwrap();
        let cfg = SampleConfig::new(500, seed);
        for spec in [catalog::superset_square(w).unwrap(), catalog::upper_index(w).unwrap(), catalog::mean_dimension(4).unwrap()] {
            prop_assert!(pair_terms(&spec, &model, &cfg).unwrap().iter().all(|&t| t >= 0.0));
        }
    }

    #[test]
    fn results_do_not_depend_on_workers(n in 1usize..20_000, seed in any::<u64>(), workers in 2usize..6) {
        let model = ProductModel::unit_mean(vec![1.0, 0.5, 0.25]).unwrap();
        let spec = catalog::lower_index(SubsetMask::from_indices(&[1, 3], 3).unwrap()).unwrap();
        let one = estimate_with(&spec, &model, &SampleConfig::new(n, seed), Correction::MeanCorrected).unwrap();
        let many = estimate_with(&spec, &model, &SampleConfig::new(n, seed).with_workers(workers), Correction::MeanCorrected).unwrap();
        prop_assert_eq!(one.estimate.to_bits(), many.estimate.to_bits());
        prop_assert_eq!(one.std_error.to_bits(), many.std_error.to_bits());
    }

    #[test]
    fn spec_json_roundtrips(w in mask(5), w1 in mask(5)) {
        prop_assume!(!w.is_empty() && w1.is_subset_of(w));
        for spec in [
            catalog::variance_component_bilinear(w, Some(w1)).unwrap(),
            catalog::superset_square(w).unwrap(),
            catalog::variance_component_simple(w).unwrap(),
        ] {
            let back = GsiSpec::from_json(&spec.to_json()).unwrap();
            prop_assert_eq!(back.weights(), spec.weights());
            prop_assert_eq!(back.cost(), spec.cost());
            prop_assert_eq!(back.scale(), spec.scale());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exhaustive_unbiasedness_on_two_level_grids(seed in any::<u64>(), j in 1usize..=2) {
        let g = GridFunction::random(2, 2, seed).unwrap();
        let table = brute_force_anova(&g).unwrap().sobol_table().unwrap();
        let u = SubsetMask::singleton(j, 2).unwrap();
        let want = gsi::models::LowerOracle::lower(&table, u).unwrap();
        let contrast = exhaustive_average(&catalog::mauntz_lower(u).unwrap(), &g, 2, Correction::None).unwrap();
        prop_assert!((contrast - want).abs() < 1e-12);
        let unbiased = exhaustive_average(&catalog::lower_index(u).unwrap(), &g, 2, Correction::BiasCorrected).unwrap();
        prop_assert!((unbiased - want).abs() < 1e-12);
    }
}

#[test]
fn catalog_estimates_are_consistent_on_grids() {
    let d = 4;
    let g = GridFunction::random(d, 3, 4242).unwrap();
    let anova = brute_force_anova(&g).unwrap();
    let model = AnyModel::Grid(g);
    let p = params(d, true);
    let cfg = SampleConfig::new(100_000, 77);
    for entry in catalog::catalog() {
        for named in entry.build(&p).unwrap() {
            let correction = Correction::auto(&named.spec);
            let r = estimate_with(&named.spec, &model, &cfg, correction).unwrap();
            let truth = catalog_target(entry.name, &named.label, &p, &anova.sigma).unwrap();
            assert!(
                (r.estimate - truth).abs() < 4.0 * r.std_error,
                "{} {}: {} vs {} (se {})",
                entry.name,
                named.label,
                r.estimate,
                truth,
                r.std_error
            );
        }
    }
}
