#![allow(dead_code)]

use std::sync::Arc;

use borcherds_weyl::{assemble_phi, solve_weight, weyl_vector, QZeroData, WeylVector};
use lattice_core::arith::{q, qr, Q};
use lattice_core::lattice::{builtin, Lattice};
use num_traits::Zero;
use rand::Rng;
use root_systems::{build_dual_set, decompose, detect_roots, Subcase};
use series_engine::invariant::{InvariantCoefficients, WeylChamber};
use series_engine::{CoefficientMap, TruncatedSeries, WeightedSeries};

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

pub fn empty_phi(name: &str) -> (QZeroData, WeylVector) {
    let phi = assemble_phi(&builtin(name).unwrap(), &[], Some(q(12))).unwrap();
    let w = weyl_vector(&phi).unwrap();
    (phi, w)
}

pub fn coefficient_map(phi: &QZeroData) -> CoefficientMap {
    CoefficientMap::from_q0(phi, None).unwrap()
}

pub fn e8_invariant() -> (Arc<WeylChamber>, InvariantCoefficients, WeylVector) {
    let (phi, w) = reflective("E8", 2, None);
    let ch = Arc::new(WeylChamber::new(phi.lattice(), 2).unwrap());
    let ic = InvariantCoefficients::from_map(&coefficient_map(&phi), &ch).unwrap();
    (ch, ic, w)
}

/// Vectors of `L` (integral coordinates) with `(l, l) <= bound`.
pub fn small_vectors(lat: &Lattice, bound: i64) -> Vec<Vec<i64>> {
    let mut v = vec![vec![0; lat.rank()]];
    v.extend(lat.short_vectors_i(bound).unwrap());
    v
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

/// A random series whose exponents `(n, l, m)` are integral with
/// `n, m >= 0` and `2nm >= (l, l)`.
pub fn holomorphic_series<R: Rng>(rng: &mut R, lat: &Lattice, rect: (i64, i64), terms: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(lat.rank(), 1, (q(rect.0), q(rect.1))).unwrap();
    let pool = small_vectors(lat, 2 * rect.0 * rect.1);
    for _ in 0..terms {
        // low exponents keep the products inside the rectangle
        let n = rng.gen_range(0..=rect.0.min(2));
        let m = rng.gen_range(0..=rect.1.min(2));
        let cands: Vec<&Vec<i64>> = pool.iter().filter(|l| lat.inner_i(l, l) <= 2 * n * m).collect();
        let l = cands[rng.gen_range(0..cands.len())];
        let lq: Vec<Q> = l.iter().map(|x| q(*x)).collect();
        s.insert(&q(n), &lq, &q(m), random_q(rng)).unwrap();
    }
    s
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

pub fn norm_i(gram: &[Vec<i64>], x: &[i64]) -> i64 {
    let n = x.len();
    (0..n).map(|a| (0..n).map(|b| x[a] * gram[a][b] * x[b]).sum::<i64>()).sum()
}

/// Nonzero vectors of norm `<= bound`, by a pruned search over a floating
/// Cholesky factor; membership is decided in exact integer arithmetic.
pub fn enumerate_vectors(gram: &[Vec<i64>], bound: i64) -> Vec<Vec<i64>> {
    let n = gram.len();
    let mut l = vec![vec![0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = gram[i][j] as f64;
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
        }
    }
    // x^T G x = |L^T x|^2; fix coordinates from the last one down
    fn rec(
        i: usize,
        x: &mut Vec<i64>,
        l: &[Vec<f64>],
        gram: &[Vec<i64>],
        bound: i64,
        partial: f64,
        out: &mut Vec<Vec<i64>>,
    ) {
        let n = x.len();
        let c: f64 = (i + 1..n).map(|k| l[k][i] * x[k] as f64).sum();
        let lii = l[i][i];
        let room = (bound as f64 - partial).max(0.0).sqrt() + 1e-9;
        let lo = ((-room - c) / lii).ceil() as i64;
        let hi = ((room - c) / lii).floor() as i64;
        for v in lo..=hi {
            x[i] = v;
            let y = lii * v as f64 + c;
            let p = partial + y * y;
            if p > bound as f64 + 1e-6 {
                continue;
            }
            if i == 0 {
                let exact = norm_i(gram, x);
                if exact > 0 && exact <= bound {
                    out.push(x.clone());
                }
            } else {
                rec(i - 1, x, l, gram, bound, p, out);
            }
        }
        x[i] = 0;
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    rec(n - 1, &mut x, &l, gram, bound, 0.0, &mut out);
    out
}
