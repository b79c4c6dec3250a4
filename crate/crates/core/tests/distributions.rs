use num_rational::BigRational;
use proptest::prelude::*;
use ptlab_core::dist::{
    count_pairwise_collisions, lp_distance, make_uniform, multiset_mass, paninski_with_signs, tv_distance,
    DiscreteDistribution, SampleMultiset,
};
use ptlab_core::exact::{l1_distance_exact, ratio, ExactDistribution};
use ptlab_core::Rng;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..10.0, 1..40).prop_map(|mut w| {
        w[0] += 0.5;
        w
    })
}

proptest! {
    #[test]
    fn guide_table_sampler_matches_bisection(w in weights(), seed in any::<u64>()) {
        let p = DiscreteDistribution::from_weights(&w).unwrap();
        let s = p.sampler();
        let mut a = Rng::new(seed, 0);
        let mut b = Rng::new(seed, 0);
        for _ in 0..200 {
            let x = s.sample(&mut a);
            prop_assert_eq!(x, s.sample_by_bisection(b.unit()));
            prop_assert!(p.prob(x) > 0.0);
        }
    }

    #[test]
    fn tv_is_half_l1(w1 in weights(), seed in any::<u64>()) {
        let p = DiscreteDistribution::from_weights(&w1).unwrap();
        let mut rng = Rng::new(seed, 0);
        let w2: Vec<f64> = (0..p.n()).map(|_| rng.unit()).collect();
        let q = DiscreteDistribution::from_weights(&w2).unwrap();
        let l1 = lp_distance(&p, &q, 1).unwrap();
        prop_assert!((tv_distance(&p, &q).unwrap() - l1 / 2.0).abs() < 1e-12);
        prop_assert!(l1 <= 2.0 + 1e-12);
    }

    #[test]
    fn collisions_and_mass_of_multisets(xs in proptest::collection::vec(1u32..=12, 0..60)) {
        let s = SampleMultiset::from_elements(12, &xs).unwrap();
        let brute = (0..xs.len())
            .flat_map(|i| (i + 1..xs.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| xs[i] == xs[j])
            .count() as u64;
        prop_assert_eq!(count_pairwise_collisions(&s), brute);
        let u = make_uniform(12).unwrap();
        prop_assert!((multiset_mass(&u, &s).unwrap() - xs.len() as f64 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn paired_bin_instance_is_exactly_eps_far(
        signs in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1..30),
        num in 1i64..=20,
    ) {
        let eps: BigRational = ratio(num, 20);
        let p = ExactDistribution::paninski(&eps, &signs).unwrap();
        let u = ExactDistribution::uniform(2 * signs.len()).unwrap();
        prop_assert_eq!(l1_distance_exact(&p, &u).unwrap(), eps);
        let f = paninski_with_signs(num as f64 / 20.0, &signs).unwrap().dist;
        let l1 = lp_distance(&f, &make_uniform(2 * signs.len()).unwrap(), 1).unwrap();
        prop_assert!((l1 - num as f64 / 20.0).abs() < 1e-12);
    }
}
