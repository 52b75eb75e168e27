mod common;

use std::sync::Arc;

use common::*;
use lattice_core::arith::q;
use lattice_core::lattice::builtin;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use series_engine::invariant::{InvariantSeries, WeylChamber};
use series_engine::{Axis, TruncatedSeries};

fn series_strategy(terms: usize) -> impl Strategy<Value = TruncatedSeries> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_series(&mut rng, 1, 2, (2, 2), terms)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in series_strategy(5), b in series_strategy(5), c in series_strategy(5)) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.mul(&a.one_like()).unwrap(), a.clone());
        prop_assert!(is_zero(&a.sub(&a).unwrap()));
    }

    #[test]
    fn derivations(a in series_strategy(5), b in series_strategy(5)) {
        let axes = [Axis::Tau, Axis::Z(0), Axis::Omega];
        for d in axes {
            let lhs = a.mul(&b).unwrap().derive(d).unwrap();
            let rhs = a.derive(d).unwrap().mul(&b).unwrap().add(&a.mul(&b.derive(d).unwrap()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            for e in axes {
                prop_assert_eq!(a.derive(d).unwrap().derive(e).unwrap(), a.derive(e).unwrap().derive(d).unwrap());
            }
        }
    }

    #[test]
    fn inverse_and_json(a in series_strategy(6), c in 1i64..=5) {
        let mut shift = a.empty_like();
        shift.insert(&q(1), &[q(0)], &q(0), q(1)).unwrap();
        let unit = a.mul(&shift).unwrap().scale(&q(c)).add(&a.one_like()).unwrap();
        let inv = unit.inverse().unwrap();
        prop_assert_eq!(unit.mul(&inv).unwrap(), unit.one_like());
        let back = TruncatedSeries::from_json(&a.to_json().to_string()).unwrap();
        prop_assert_eq!(back, a);
    }
}

fn a2_chamber() -> Arc<WeylChamber> {
    Arc::new(WeylChamber::new(&builtin("A2").unwrap(), 2).unwrap())
}

fn invariant_strategy(ch: Arc<WeylChamber>) -> impl Strategy<Value = InvariantSeries> {
    let weights = ch.dominant_weights(&q(6)).unwrap();
    prop::collection::vec((0i64..=2, prop::sample::select(weights), 0i64..=2, -3i64..=3), 1..5).prop_map(move |ts| {
        let mut s = InvariantSeries::zero(ch.clone(), (2, 2), 1);
        for (a, w, t, c) in ts {
            s.add_orbit(a, &w, t, q(c)).unwrap();
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn orbit_products_expand(
        (a, b) in {
            let ch = a2_chamber();
            (invariant_strategy(ch.clone()), invariant_strategy(ch))
        }
    ) {
        let prod = a.mul(&b).unwrap().expand(3).unwrap();
        let plain = a.expand(3).unwrap().mul(&b.expand(3).unwrap()).unwrap();
        prop_assert_eq!(prod, plain);
    }

    #[test]
    fn dominant_is_orbit_invariant(idx in 0usize..64) {
        let ch = a2_chamber();
        let weights = ch.dominant_weights(&q(8)).unwrap();
        let w = weights[idx % weights.len()];
        prop_assert!(ch.is_dominant(&w));
        let orbit = ch.orbit(&w);
        prop_assert_eq!(num_bigint::BigInt::from(orbit.len()), ch.orbit_size(&w));
        for x in orbit {
            prop_assert_eq!(ch.dominant(&x), w);
            prop_assert_eq!(ch.norm_of(&x), ch.norm_of(&w));
        }
    }
}
