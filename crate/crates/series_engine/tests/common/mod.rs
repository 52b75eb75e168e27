#![allow(dead_code)]

use borcherds_weyl::{assemble_phi, weyl_vector, QZeroData, WeylVector};
use lattice_core::arith::{q, qr, Q};
use lattice_core::lattice::builtin;
use num_traits::Zero;
use rand::Rng;
use series_engine::{CoefficientMap, TruncatedSeries, WeightedSeries};

pub fn empty_phi(name: &str) -> (QZeroData, WeylVector) {
    let phi = assemble_phi(&builtin(name).unwrap(), &[], Some(q(12))).unwrap();
    let w = weyl_vector(&phi).unwrap();
    (phi, w)
}

pub fn coefficient_map(phi: &QZeroData) -> CoefficientMap {
    CoefficientMap::from_q0(phi, None).unwrap()
}

fn random_q<R: Rng>(rng: &mut R) -> Q {
    let n = rng.gen_range(-4i64..=4);
    let d = rng.gen_range(1i64..=3);
    if n == 0 {
        q(1)
    } else {
        qr(n, d)
    }
}

/// A random series with arbitrary (possibly negative) `zeta` exponents and
/// rational `q`, `xi` exponents on the denominator-`den` grid.
pub fn random_series<R: Rng>(rng: &mut R, rank: usize, den: i64, rect: (i64, i64), terms: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(rank, den, (q(rect.0), q(rect.1))).unwrap();
    for _ in 0..terms {
        let a = qr(rng.gen_range(0..=rect.0 * den), den);
        let t = qr(rng.gen_range(0..=rect.1 * den), den);
        let l: Vec<Q> = (0..rank).map(|_| qr(rng.gen_range(-2 * den..=2 * den), den)).collect();
        s.insert(&a, &l, &t, random_q(rng)).unwrap();
    }
    s
}

pub fn weighted(s: TruncatedSeries, k: i64) -> WeightedSeries {
    WeightedSeries::new(s, k).unwrap()
}

pub fn is_zero(s: &TruncatedSeries) -> bool {
    s.is_zero() || s.terms().iter().all(|t| t.3.is_zero())
}
