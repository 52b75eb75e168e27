#![allow(dead_code)]

use borcherds_weyl::{assemble_phi, solve_weight, weyl_vector, QZeroData, WeylVector};
use lattice_core::lattice::builtin;
use root_systems::{build_dual_set, decompose, detect_roots, Subcase};

/// Reflective q^0 data of the roots of norm `<= max_norm`, weight solved.
pub fn reflective(name: &str, max_norm: i64, subcase: Option<Subcase>) -> (QZeroData, WeylVector) {
    let lat = builtin(name).unwrap();
    let rd = detect_roots(&lat, max_norm).unwrap();
    let sets: Vec<_> = decompose(&rd)
        .unwrap()
        .into_iter()
        .map(|c| {
            let c = if c.needs_subcase() { c.with_subcase(subcase) } else { c };
            build_dual_set(&c).unwrap()
        })
        .collect();
    let phi = assemble_phi(&lat, &sets, None).unwrap();
    let k = solve_weight(&phi).unwrap();
    let phi = phi.with_weight(k).unwrap();
    let w = weyl_vector(&phi).unwrap();
    (phi, w)
}
