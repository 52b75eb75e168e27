//! Weights, Weyl vectors and multiplicities recomputed from the root data.

mod common;

use borcherds_weyl::{
    assemble_phi, character_datum_of, divisor_multiplicity_of, solve_weight, verify_moment_identity, weyl_vector,
    CoeffMap, MomentIdentity,
};
use common::*;
use lattice_core::ambient::AmbientVector;
use lattice_core::arith::{q, qr, Q};
use num_traits::{Signed, Zero};
use root_systems::{build_dual_set, detect_roots, models, modified_coxeter, Subcase};

#[test]
fn e8_reflective_data() {
    let (phi, w) = reflective("E8", 2, None);
    let k = phi.weight().unwrap().clone();
    assert_eq!(k, q(252));
    let roots = detect_roots(phi.lattice(), 2).unwrap();
    let lat = phi.lattice();
    assert_eq!(roots.len(), 240);
    for r in &roots.roots {
        assert_eq!(phi.f(0, &r.coords).eval(&k), q(1));
    }
    assert_eq!(phi.f(-1, &vec![Q::zero(); 8]).eval(&k), q(1));
    assert_eq!(phi.f(0, &vec![Q::zero(); 8]).eval(&k), q(504));
    let a = q(240 + 504) / q(24);
    let c: Q = roots.roots.iter().map(|r| lat.inner(&r.coords, &r.coords)).sum::<Q>() / q(16);
    assert_eq!((w.a.clone(), w.c.clone()), (a, c));
    assert_eq!((w.a, w.c.clone()), (q(31), q(30)));
    // (rho, rho) = h (h + 1) rk / 12
    assert_eq!(lat.inner(&w.b, &w.b), q(30 * 31 * 8 / 12));
}

#[test]
fn weyl_vector_norms_on_simply_laced() {
    for (name, h) in [("A2", 3), ("A3", 4), ("A4", 5), ("D4", 6), ("D5", 8), ("E6", 12), ("E7", 18)] {
        let (phi, w) = reflective(name, 2, None);
        let n = phi.lattice().rank() as i64;
        assert_eq!(phi.lattice().inner(&w.b, &w.b), qr(h * (h + 1) * n, 12), "{name}");
        assert_eq!(w.c, q(h), "{name}");
        assert_eq!(&w.a - q(1), w.c, "{name}");
    }
}

#[test]
fn a1_subcase_three_weight() {
    let (phi, w) = reflective("A1", 2, Some(Subcase::III));
    let lat = phi.lattice();
    let sum: i64 = phi.q0_terms().filter(|(l, _)| l.iter().any(|x| !x.is_zero())).map(|(_, f)| f).sum();
    let c: Q = phi.q0_terms().map(|(l, f)| q(f) * lat.inner(l, l)).sum::<Q>() / q(2);
    // 24 (A - 1) = 24 C with 24 A = sum + 2k
    let k = (q(24) * (&c + q(1)) - q(sum)) / q(2);
    assert_eq!(sum, 0);
    assert_eq!(c, qr(3, 2));
    assert_eq!(k, q(30));
    assert_eq!(phi.weight().unwrap(), &k);
    assert_eq!(w.c, c);
}

#[test]
fn multiplicities_and_character() {
    let (phi, _) = reflective("E8", 2, None);
    let lat = phi.lattice();
    let roots = detect_roots(lat, 2).unwrap();
    let coeffs = phi.full_map().unwrap();
    for r in roots.roots.iter().take(10) {
        let ints = r.ints().unwrap();
        let v = AmbientVector::from_ints(0, 0, &ints, 1, 0);
        let m = divisor_multiplicity_of(lat, &coeffs, &v).unwrap();
        // sum over d of f(0, d r); only d = 1 is a root
        let expect: i64 =
            (1..=3).map(|d| coeffs.get(&(0, r.coords.iter().map(|x| x * q(d)).collect())).copied().unwrap_or(0)).sum();
        assert_eq!(m.value, expect);
        assert_eq!(m.value, 1);
    }
    let mut map = CoeffMap::new();
    map.insert((-1, vec![q(0)]), 2);
    map.insert((-2, vec![q(0)]), 1);
    map.insert((-3, vec![q(1)]), 7);
    let d: i64 = map
        .iter()
        .filter(|((_, l), _)| l.iter().all(Zero::is_zero))
        .map(|((n, _), f)| (1..=n.abs()).filter(|x| n.abs() % x == 0).count() as i64 * f)
        .sum();
    assert_eq!(d, 4);
    assert_eq!(character_datum_of(&map), (4, 1));
}

#[test]
fn moment_identity_holds_for_model_systems() {
    for name in ["A2", "A3", "D4", "E6", "E7", "E8"] {
        let (phi, w) = reflective(name, 2, None);
        let again = weyl_vector(&phi).unwrap();
        assert_eq!(again, w);
        assert!((&w.a - q(1) - &w.c).is_zero(), "{name}");
        assert!(!w.c.is_negative());
    }
}

#[test]
fn model_reflective_data_satisfy_moment_identity() {
    for t in models::all_types(6) {
        for d in 1..=2 {
            let base = models::component(t, models::scale_for(t, d)).unwrap();
            let variants: Vec<_> = if base.needs_subcase() {
                Subcase::ALL.iter().map(|s| base.clone().with_subcase(Some(*s))).collect()
            } else {
                vec![base]
            };
            for comp in variants {
                let table = modified_coxeter(&comp).unwrap();
                let phi = assemble_phi(&comp.lattice, &[build_dual_set(&comp).unwrap()], None).unwrap();
                assert_eq!(verify_moment_identity(&phi), MomentIdentity::Constant(table), "{}", comp.name());
                let phi = phi.clone().with_weight(solve_weight(&phi).unwrap()).unwrap();
                let w = weyl_vector(&phi).unwrap();
                assert_eq!(verify_moment_identity(&phi), MomentIdentity::Constant(w.c.clone()), "{}", comp.name());
                assert_eq!(&w.a - q(1), w.c);
                // dual roots come in +- pairs with equal multiplicity
                let total: Vec<Q> = phi.q0_terms().fold(vec![Q::zero(); comp.rank()], |acc, (l, f)| {
                    acc.iter().zip(l).map(|(a, x)| a + q(f) * x).collect()
                });
                assert!(total.iter().all(Zero::is_zero));
            }
        }
    }
}
