use lattice_core::lattice::{builtin, Lattice};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use root_systems::{coxeter_number, decompose, detect_roots, models};

const SMALL: [&str; 8] = ["A1", "A2", "A3", "D4", "2A1", "3A1", "4A1", "2A2"];

fn small_lattice() -> impl Strategy<Value = Lattice> {
    prop::sample::select(vec!["A1", "A2", "A3", "D4", "2A1", "3A1", "E6", "E8"]).prop_map(|n| builtin(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn root_reflections(lat in small_lattice(), seed in any::<u64>()) {
        let rd = detect_roots(&lat, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = &rd.roots[rand::Rng::gen_range(&mut rng, 0..rd.len())];
        let x = lat.vector_i(&(0..lat.rank()).map(|_| rand::Rng::gen_range(&mut rng, -3..=3)).collect::<Vec<_>>());
        let y = lat.reflect(&x, r).unwrap();
        prop_assert_eq!(&y.norm, &x.norm);
        prop_assert_eq!(lat.reflect(&y, r).unwrap(), x);
        // the root set is stable under its own reflections
        for s in rd.roots.iter().take(16) {
            let image = lat.reflect(s, r).unwrap();
            prop_assert!(rd.roots.contains(&image));
        }
    }
}

#[test]
fn decompositions_partition_roots() {
    for name in SMALL.iter().chain(["D5", "E7", "E8"].iter()) {
        let lat = builtin(name).unwrap();
        for bound in [2, 4] {
            let rd = detect_roots(&lat, bound).unwrap();
            let comps = decompose(&rd).unwrap();
            let total: usize = comps.iter().map(|c| c.roots.len()).sum();
            assert_eq!(total, rd.len(), "{name}");
            for (i, a) in comps.iter().enumerate() {
                for b in &comps[i + 1..] {
                    for x in &a.roots {
                        for y in &b.roots {
                            assert!(lat.inner(&x.coords, &y.coords).is_zero());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn coxeter_numbers_defined_for_small_d() {
    for t in models::all_types(8) {
        for d in 1..=3 {
            let comp = models::component(t, models::scale_for(t, d)).unwrap();
            assert!(coxeter_number(&comp).is_ok(), "{t} d={d}");
        }
    }
}
