//! Weyl-invariant truncated series stored as orbit sums.
//!
//! A series invariant under the Weyl group `W` of a root system in `L` is
//! kept as coefficients of `m_k = sum_{x in W k} zeta^x` for dominant `k`.
//! Dual vectors are written in pairing coordinates `G l` (integral on `L^v`).
//! `q`- and `xi`-exponents are integers; the prefactor is exact and separate.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::{CoefficientMap, Prefactor, TruncatedSeries, MAX_RANK};
use borcherds_weyl::WeylVector;
use lattice_core::arith::{self, q, QMatrix, Q, Z};
use lattice_core::error::{Error, Result};
use lattice_core::lattice::{Lattice, LatticeVector};
use root_systems::{decompose, detect_roots, RootDatum};

/// Pairing coordinates of a dual vector.
pub type Weight = [i32; MAX_RANK];

type Table = Arc<Vec<(Weight, Q)>>;

/// Simple roots and orbit bookkeeping for the Weyl group of a root set.
pub struct WeylChamber {
    lattice: Lattice,
    gram_inv: QMatrix,
    simple: Vec<Vec<i64>>,
    /// `G alpha_i`.
    g_simple: Vec<Vec<i64>>,
    simple_norm: Vec<i64>,
    /// Roots in simple-root coordinates.
    root_support: Vec<(Vec<i64>, u32)>,
    roots: Vec<Vec<i64>>,
    order: Z,
    parabolic: Mutex<FxHashMap<u32, Z>>,
    products: Mutex<FxHashMap<(Weight, Weight), Table>>,
}

impl std::fmt::Debug for WeylChamber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeylChamber").field("lattice", &self.lattice.label()).field("order", &self.order).finish()
    }
}

fn weyl_order(lat: &Lattice, roots: &[Vec<i64>]) -> Result<Z> {
    if roots.is_empty() {
        return Ok(Z::one());
    }
    let rd = RootDatum::new(lat.clone(), roots.iter().map(|r| lat.vector_i(r)).collect())?;
    Ok(decompose(&rd)?.iter().map(|c| c.root_type.weyl_group_order()).product())
}

impl WeylChamber {
    /// Weyl group of the roots of `lat` of norm at most `max_norm`.
    pub fn new(lat: &Lattice, max_norm: i64) -> Result<Self> {
        let rd = detect_roots(lat, max_norm)?;
        let roots: Vec<Vec<i64>> = rd.roots.iter().map(|r| r.ints().expect("integral roots")).collect();
        Self::from_roots(lat, roots)
    }

    pub fn from_roots(lat: &Lattice, roots: Vec<Vec<i64>>) -> Result<Self> {
        let n = lat.rank();
        if n > MAX_RANK {
            return Err(Error::Invalid(format!("rank {n} exceeds {MAX_RANK}")));
        }
        // a functional that is nonzero on every root
        let big = 1 + 2 * roots.iter().flatten().map(|x| x.abs()).max().unwrap_or(0);
        let weights: Vec<i128> = (0..n).map(|i| (big as i128).pow(i as u32)).collect();
        let phi = |r: &[i64]| -> i128 { r.iter().zip(&weights).map(|(a, w)| *a as i128 * w).sum() };
        let positive: Vec<&Vec<i64>> = roots.iter().filter(|r| phi(r) > 0).collect();
        let pos_set: FxHashSet<&Vec<i64>> = positive.iter().copied().collect();
        let mut simple: Vec<Vec<i64>> = Vec::new();
        for r in &positive {
            let decomposable = positive.iter().any(|p| {
                let d: Vec<i64> = r.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
                pos_set.contains(&d)
            });
            if !decomposable {
                simple.push((*r).clone());
            }
        }
        let g_simple: Vec<Vec<i64>> =
            simple.iter().map(|a| (0..n).map(|j| lat.inner_i(a, &unit(n, j))).collect()).collect();
        let simple_norm: Vec<i64> = simple.iter().map(|a| lat.inner_i(a, a)).collect();
        let k = simple.len();
        let cartan: QMatrix =
            (0..k).map(|i| (0..k).map(|j| q(lat.inner_i(&simple[i], &simple[j]))).collect()).collect();
        let cinv = arith::inverse(&cartan).ok_or_else(|| Error::Internal("simple roots are dependent".into()))?;
        let mut root_support = Vec::new();
        for r in &roots {
            let b: Vec<Q> = simple.iter().map(|a| q(lat.inner_i(a, r))).collect();
            let y = arith::mat_vec(&cinv, &b);
            let coords: Option<Vec<i64>> = y.iter().map(arith::to_i64).collect();
            let coords = coords.ok_or_else(|| Error::Internal("root is not an integral sum of simple roots".into()))?;
            let mask = coords.iter().enumerate().filter(|(_, c)| **c != 0).fold(0u32, |m, (i, _)| m | 1 << i);
            root_support.push((coords, mask));
        }
        let order = weyl_order(lat, &roots)?;
        let gram_inv = lat.dual_basis()?;
        Ok(WeylChamber {
            lattice: lat.clone(),
            gram_inv,
            simple,
            g_simple,
            simple_norm,
            root_support,
            roots,
            order,
            parabolic: Mutex::new(FxHashMap::default()),
            products: Mutex::new(FxHashMap::default()),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn order(&self) -> &Z {
        &self.order
    }

    pub fn simple_roots(&self) -> &[Vec<i64>] {
        &self.simple
    }

    fn pairing(&self, c: &Weight, i: usize) -> i64 {
        // (x, alpha_i) = (G x) . alpha_i
        self.simple[i].iter().enumerate().map(|(j, a)| c[j] as i64 * a).sum()
    }

    fn reflect(&self, c: &mut Weight, i: usize, p: i64) {
        for (j, g) in self.g_simple[i].iter().enumerate() {
            let num = 2 * p * g;
            debug_assert_eq!(num % self.simple_norm[i], 0);
            c[j] -= (num / self.simple_norm[i]) as i32;
        }
    }

    /// The dominant representative of the orbit of `c`.
    pub fn dominant(&self, c: &Weight) -> Weight {
        let mut x = *c;
        loop {
            let mut moved = false;
            for i in 0..self.simple.len() {
                let p = self.pairing(&x, i);
                if p < 0 {
                    self.reflect(&mut x, i, p);
                    moved = true;
                }
            }
            if !moved {
                return x;
            }
        }
    }

    pub fn is_dominant(&self, c: &Weight) -> bool {
        (0..self.simple.len()).all(|i| self.pairing(c, i) >= 0)
    }

    fn parabolic_order(&self, mask: u32) -> Z {
        if let Some(z) = self.parabolic.lock().expect("lock").get(&mask) {
            return z.clone();
        }
        let roots: Vec<Vec<i64>> = self
            .roots
            .iter()
            .zip(&self.root_support)
            .filter(|(_, (_, m))| m & !mask == 0)
            .map(|(r, _)| r.clone())
            .collect();
        let z = weyl_order(&self.lattice, &roots).expect("parabolic subsystem decomposes");
        self.parabolic.lock().expect("lock").insert(mask, z.clone());
        z
    }

    /// `|W c|` for dominant `c`.
    pub fn orbit_size(&self, c: &Weight) -> Z {
        let mask = (0..self.simple.len()).filter(|&i| self.pairing(c, i) == 0).fold(0u32, |m, i| m | 1 << i);
        &self.order / self.parabolic_order(mask)
    }

    /// All elements of the orbit of a dominant weight.
    pub fn orbit(&self, c: &Weight) -> Vec<Weight> {
        let mut seen: FxHashSet<Weight> = FxHashSet::default();
        seen.insert(*c);
        let mut frontier = vec![*c];
        while let Some(x) = frontier.pop() {
            for i in 0..self.simple.len() {
                let p = self.pairing(&x, i);
                if p != 0 {
                    let mut y = x;
                    self.reflect(&mut y, i, p);
                    if seen.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        let mut out: Vec<Weight> = seen.into_iter().collect();
        out.sort();
        out
    }

    /// Pairing coordinates of a dual vector given in lattice coordinates.
    pub fn weight_of(&self, l: &[Q]) -> Result<Weight> {
        let mut w = [0i32; MAX_RANK];
        for (i, p) in self.lattice.pairings(l).iter().enumerate() {
            let v = arith::to_i64(p).ok_or_else(|| Error::Invalid("vector is not in the dual lattice".into()))?;
            w[i] = i32::try_from(v).map_err(|_| Error::Invalid("weight too large".into()))?;
        }
        Ok(w)
    }

    /// Lattice coordinates of a weight.
    pub fn vector_of(&self, c: &Weight) -> Vec<Q> {
        let n = self.rank();
        let cq: Vec<Q> = c[..n].iter().map(|x| q(*x as i64)).collect();
        arith::mat_vec(&self.gram_inv, &cq)
    }

    pub fn norm_of(&self, c: &Weight) -> Q {
        let v = self.vector_of(c);
        self.lattice.inner(&v, &v)
    }

    /// `m_a m_b = sum_y N_y m_y`.
    pub fn product(&self, a: &Weight, b: &Weight) -> Table {
        let key = if a <= b { (*a, *b) } else { (*b, *a) };
        if let Some(t) = self.products.lock().expect("lock").get(&key) {
            return t.clone();
        }
        let table = Arc::new(self.compute_product(&key.0, &key.1));
        self.products.lock().expect("lock").insert(key, table.clone());
        table
    }

    fn compute_product(&self, a: &Weight, b: &Weight) -> Vec<(Weight, Q)> {
        let (sa, sb) = (self.orbit_size(a), self.orbit_size(b));
        // walk the smaller orbit
        let (fixed, walked, s_fixed) = if sa >= sb { (a, b, sa) } else { (b, a, sb) };
        let mut counts: FxHashMap<Weight, i64> = FxHashMap::default();
        for nu in self.orbit(walked) {
            let mut y = *fixed;
            for (yi, ni) in y.iter_mut().zip(&nu) {
                *yi += ni;
            }
            *counts.entry(self.dominant(&y)).or_default() += 1;
        }
        let mut out: Vec<(Weight, Q)> = counts
            .into_iter()
            .map(|(y, n)| {
                let m = Q::new(Z::from(n) * &s_fixed, self.orbit_size(&y));
                (y, m)
            })
            .collect();
        out.sort_by_key(|x| x.0);
        out
    }

    /// Dominant weights `x` in `L^v` with `(x, x) <= max_norm`, when the
    /// simple roots span `L (x) Q`.
    pub fn dominant_weights(&self, max_norm: &Q) -> Result<Vec<Weight>> {
        let n = self.rank();
        let k = self.simple.len();
        if k != n {
            return Err(Error::Invalid("roots do not span the lattice".into()));
        }
        let cartan: QMatrix = (0..k)
            .map(|i| (0..k).map(|j| q(self.lattice.inner_i(&self.simple[i], &self.simple[j]))).collect())
            .collect();
        let cinv = arith::inverse(&cartan).expect("independent");
        // norm = p^T C^-1 p with p_i = (x, alpha_i) >= 0; C^-1 >= 0 entrywise
        let mut out = Vec::new();
        let mut p = vec![0i64; k];
        fn rec(i: usize, p: &mut Vec<i64>, cinv: &QMatrix, max: &Q, out: &mut Vec<Vec<i64>>) {
            let norm = |p: &[i64]| -> Q {
                let mut s = Q::zero();
                for a in 0..p.len() {
                    for b in 0..p.len() {
                        if p[a] != 0 && p[b] != 0 {
                            s += &cinv[a][b] * q(p[a] * p[b]);
                        }
                    }
                }
                s
            };
            if i == p.len() {
                out.push(p.clone());
                return;
            }
            loop {
                rec(i + 1, p, cinv, max, out);
                p[i] += 1;
                if norm(p) > *max {
                    p[i] = 0;
                    return;
                }
            }
        }
        let mut raw = Vec::new();
        rec(0, &mut p, &cinv, max_norm, &mut raw);
        for pv in raw {
            // x = sum y_j alpha_j with C y = p
            let y = arith::mat_vec(&cinv, &pv.iter().map(|v| q(*v)).collect::<Vec<_>>());
            let mut x = vec![Q::zero(); n];
            for (j, yj) in y.iter().enumerate() {
                for (xi, a) in x.iter_mut().zip(&self.simple[j]) {
                    *xi += yj * q(*a);
                }
            }
            if self.lattice.in_dual(&x) {
                out.push(self.weight_of(&x)?);
            }
        }
        out.sort();
        Ok(out)
    }
}

fn unit(n: usize, j: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[j] = 1;
    v
}

/// `[a, weight.., t]` with the weight in slots `1..=MAX_RANK`.
type Key = (i32, Weight, i32);

/// A `W`-invariant series `prefactor * sum c_{a,k,t} q^a m_k xi^t`.
#[derive(Clone)]
pub struct InvariantSeries {
    chamber: Arc<WeylChamber>,
    prefactor: Prefactor,
    terms: FxHashMap<Key, Q>,
    level_max: i64,
    t_max: i64,
    skew: i64,
}

impl std::fmt::Debug for InvariantSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvariantSeries")
            .field("orbits", &self.terms.len())
            .field("prefactor", &self.prefactor)
            .finish()
    }
}

impl PartialEq for InvariantSeries {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.chamber, &o.chamber)
            && self.prefactor == o.prefactor
            && self.terms == o.terms
            && self.level_max == o.level_max
            && self.t_max == o.t_max
            && self.skew == o.skew
    }
}

impl InvariantSeries {
    pub fn zero(chamber: Arc<WeylChamber>, rect: (i64, i64), skew: i64) -> Self {
        let rank = chamber.rank();
        InvariantSeries {
            chamber,
            prefactor: Prefactor::trivial(rank),
            terms: FxHashMap::default(),
            level_max: rect.0 + skew * rect.1,
            t_max: rect.1,
            skew,
        }
    }

    pub fn one_like(&self) -> Self {
        let mut s = self.empty_like();
        s.prefactor = Prefactor::trivial(self.chamber.rank());
        s.terms.insert((0, [0; MAX_RANK], 0), Q::one());
        s
    }

    pub fn empty_like(&self) -> Self {
        InvariantSeries { terms: FxHashMap::default(), ..self.clone() }
    }

    pub fn prefactor(&self) -> &Prefactor {
        &self.prefactor
    }

    /// Number of stored orbit sums.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials after expanding every orbit sum.
    pub fn expanded_len(&self) -> Z {
        self.terms.keys().map(|(_, w, _)| self.chamber.orbit_size(w)).sum()
    }

    fn level(&self, k: &Key) -> i64 {
        k.0 as i64 + self.skew * k.2 as i64
    }

    fn in_region(&self, k: &Key) -> bool {
        (k.2 as i64) <= self.t_max && self.level(k) <= self.level_max
    }

    /// Adds `c q^a m_w xi^t`; `w` is moved to the dominant chamber.
    pub fn add_orbit(&mut self, a: i64, w: &Weight, t: i64, c: Q) -> Result<()> {
        let k = (
            i32::try_from(a).map_err(|_| Error::Invalid("exponent overflow".into()))?,
            self.chamber.dominant(w),
            i32::try_from(t).map_err(|_| Error::Invalid("exponent overflow".into()))?,
        );
        if k.2 < 0 || self.level(&k) < 0 {
            return Err(Error::Invalid("orbit term outside the truncation cone".into()));
        }
        self.add_key(k, c);
        Ok(())
    }

    fn add_key(&mut self, k: Key, c: Q) {
        if c.is_zero() || !self.in_region(&k) {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn coeff(&self, a: i64, w: &Weight, t: i64) -> Q {
        self.terms.get(&(a as i32, self.chamber.dominant(w), t as i32)).cloned().unwrap_or_else(Q::zero)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.chamber, &o.chamber) {
            return Err(Error::Invalid("series over different Weyl chambers".into()));
        }
        if self.skew != o.skew {
            return Err(Error::Invalid("truncation skews differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        if self.prefactor != o.prefactor {
            return Err(Error::Invalid("invariant sums need equal prefactors".into()));
        }
        let mut out = self.empty_like();
        out.level_max = self.level_max.min(o.level_max);
        out.t_max = self.t_max.min(o.t_max);
        for (k, c) in self.terms.iter().chain(&o.terms) {
            out.add_key(*k, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = self.empty_like();
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(k, x)| (*k, x * c)).collect();
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.empty_like();
        out.prefactor = Prefactor {
            a: &self.prefactor.a + &o.prefactor.a,
            b: self.prefactor.b.iter().zip(&o.prefactor.b).map(|(x, y)| x + y).collect(),
            c: &self.prefactor.c + &o.prefactor.c,
        };
        out.level_max = self.level_max.min(o.level_max);
        out.t_max = self.t_max.min(o.t_max);
        let mut pairs: Vec<(&Key, &Q, &Key, &Q)> = Vec::new();
        for (kx, cx) in &self.terms {
            for (ky, cy) in &o.terms {
                let k = (kx.0 + ky.0, [0; MAX_RANK], kx.2 + ky.2);
                if out.in_region(&k) {
                    pairs.push((kx, cx, ky, cy));
                }
            }
        }
        let chamber = &self.chamber;
        let acc = pairs
            .par_iter()
            .fold(FxHashMap::<Key, Q>::default, |mut acc, (kx, cx, ky, cy)| {
                let table = chamber.product(&kx.1, &ky.1);
                let c = *cx * *cy;
                for (y, m) in table.iter() {
                    let e = acc.entry((kx.0 + ky.0, *y, kx.2 + ky.2)).or_insert_with(Q::zero);
                    *e += &c * m;
                }
                acc
            })
            .reduce(FxHashMap::default, |mut a, b| {
                for (k, c) in b {
                    *a.entry(k).or_insert_with(Q::zero) += c;
                }
                a
            });
        out.terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(out)
    }

    /// `D_tau` (`omega = false`) or `D_omega`, prefactor included.
    pub fn derive(&self, omega: bool) -> Self {
        let p = if omega { &self.prefactor.c } else { &self.prefactor.a };
        let mut out = self.empty_like();
        for (k, c) in &self.terms {
            let m = p + q(if omega { k.2 } else { k.0 } as i64);
            if !m.is_zero() {
                out.terms.insert(*k, c * m);
            }
        }
        out
    }

    fn grade(&self, k: &Key) -> i64 {
        self.level(k) * (self.t_max + 1) + k.2 as i64
    }

    /// `exp(self)` by the grading recurrence; every term needs positive grade.
    pub fn exp_graded(&self) -> Result<Self> {
        let mut by_grade: BTreeMap<i64, InvariantSeries> = BTreeMap::new();
        for (k, c) in &self.terms {
            let g = self.grade(k);
            if g <= 0 {
                return Err(Error::Invalid("exp needs terms of positive grade".into()));
            }
            let s = by_grade.entry(g).or_insert_with(|| {
                let mut s = self.empty_like();
                s.prefactor = Prefactor::trivial(self.chamber.rank());
                s
            });
            s.terms.insert(*k, c * q(g));
        }
        let g_max = self.level_max * (self.t_max + 1) + self.t_max;
        let mut parts: BTreeMap<i64, InvariantSeries> = BTreeMap::new();
        parts.insert(0, self.one_like());
        for g in 1..=g_max {
            let mut acc: Option<InvariantSeries> = None;
            for (k, lk) in by_grade.range(..=g) {
                let Some(prev) = parts.get(&(g - k)) else { continue };
                let prod = lk.mul(prev)?;
                acc = Some(match acc {
                    None => prod,
                    Some(a) => a.add(&prod)?,
                });
            }
            if let Some(a) = acc {
                let a = a.scale(&(Q::one() / q(g)));
                if !a.is_zero() {
                    parts.insert(g, a);
                }
            }
        }
        let mut out = self.one_like();
        out.terms.clear();
        for (_, p) in parts {
            out.terms.extend(p.terms);
        }
        Ok(out)
    }

    pub fn with_prefactor(mut self, p: Prefactor) -> Self {
        self.prefactor = p;
        self
    }

    /// The same series with every orbit sum written out.
    pub fn expand(&self, den: i64) -> Result<TruncatedSeries> {
        let rank = self.chamber.rank();
        let a_max = self.level_max - self.skew * self.t_max;
        let mut s = TruncatedSeries::zero_skewed(rank, den, (q(a_max), q(self.t_max)), self.skew)?;
        for ((a, w, t), c) in &self.terms {
            for x in self.chamber.orbit(w) {
                let l = self.chamber.vector_of(&x);
                s.insert(&q(*a as i64), &l, &q(*t as i64), c.clone())?;
            }
        }
        s.with_prefactor(self.prefactor.clone())
    }
}

/// Weyl-invariant Jacobi coefficients `f(n, k)` on dominant weights.
#[derive(Debug, Clone)]
pub struct InvariantCoefficients {
    pub coeffs: BTreeMap<(i64, Weight), i64>,
    pub complete_through: Option<i64>,
}

impl InvariantCoefficients {
    /// Groups a coefficient map into orbits, checking that it is invariant.
    pub fn from_map(cm: &CoefficientMap, chamber: &WeylChamber) -> Result<Self> {
        let mut groups: BTreeMap<(i64, Weight), Vec<i64>> = BTreeMap::new();
        for ((n, l), f) in &cm.coeffs {
            let w = chamber.weight_of(l)?;
            groups.entry((*n, chamber.dominant(&w))).or_default().push(*f);
        }
        let mut coeffs = BTreeMap::new();
        for ((n, w), fs) in groups {
            let size = chamber.orbit_size(&w);
            if Z::from(fs.len()) != size || fs.iter().any(|f| *f != fs[0]) {
                return Err(Error::Invalid(format!("coefficients at n = {n} are not Weyl invariant")));
            }
            coeffs.insert((n, w), fs[0]);
        }
        Ok(InvariantCoefficients { coeffs, complete_through: cm.complete_through })
    }

    fn n_min(&self) -> i64 {
        self.coeffs.keys().map(|(n, _)| *n).min().unwrap_or(0).min(0)
    }
}

/// Coefficients of `E_4^2 / Delta = q^-1 + 504 + ...`, starting at `q^-1`.
pub fn e4_squared_over_delta(n_max: i64) -> Vec<i64> {
    let len = (n_max + 2).max(1) as usize;
    let sigma3 = |n: usize| -> i128 { (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| (d as i128).pow(3)).sum() };
    let mut e4 = vec![0i128; len];
    e4[0] = 1;
    for (n, c) in e4.iter_mut().enumerate().skip(1) {
        *c = 240 * sigma3(n);
    }
    let mul = |a: &[i128], b: &[i128]| -> Vec<i128> {
        let mut out = vec![0i128; len];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    // prod (1 - q^n)^-24 = prod (sum_k q^{nk})^24
    let mut inv_eta = vec![0i128; len];
    inv_eta[0] = 1;
    for n in 1..len {
        for _ in 0..24 {
            for i in n..len {
                inv_eta[i] += inv_eta[i - n];
            }
        }
    }
    let e8 = mul(&e4, &e4);
    mul(&e8, &inv_eta).into_iter().map(|x| i64::try_from(x).expect("coefficient fits in i64")).collect()
}

impl InvariantCoefficients {
    /// `f(n, l) = g(n - (l, l)/2)` for an even unimodular lattice, with
    /// `g[0]` the coefficient of `q^-1`; complete for `n <= n_max`.
    pub fn from_theta(chamber: &WeylChamber, g: &[i64], n_max: i64) -> Result<Self> {
        if chamber.lattice().det() != Z::one() {
            return Err(Error::Invalid("theta decomposition needs a unimodular lattice".into()));
        }
        if (g.len() as i64) < n_max + 2 {
            return Err(Error::Invalid("too few coefficients".into()));
        }
        let mut coeffs = BTreeMap::new();
        for w in chamber.dominant_weights(&q(2 * n_max + 2))? {
            let half =
                arith::to_i64(&(chamber.norm_of(&w) / q(2))).ok_or_else(|| Error::Invalid("odd lattice".into()))?;
            for n in half - 1..=n_max {
                let f = g[(n - half + 1) as usize];
                if f != 0 {
                    coeffs.insert((n, w), f);
                }
            }
        }
        Ok(InvariantCoefficients { coeffs, complete_through: Some(n_max) })
    }
}

fn frame(ic: &InvariantCoefficients, rect: (i64, i64)) -> Result<(i64, i64, i64)> {
    if rect.0 < 0 || rect.1 < 0 {
        return Err(Error::Invalid("rectangle bounds must be nonnegative".into()));
    }
    let skew = -ic.n_min();
    let (level_max, t_max) = (rect.0 + skew * rect.1, rect.1);
    if let Some(c) = ic.complete_through {
        let mut need = 0;
        for m in 1..=t_max {
            for n in 1..=level_max - skew * m {
                need = need.max(n * m);
            }
        }
        if need > c {
            return Err(Error::MissingCoefficients((c + 1..=need).map(|n| format!("f({n}, *)")).collect()));
        }
    }
    Ok((skew, level_max, t_max))
}

fn scaled_weight(w: &Weight, j: i64) -> Weight {
    let mut out = *w;
    for x in out.iter_mut() {
        *x *= j as i32;
    }
    out
}

/// The product without toric factors,
/// `q^A zeta^B xi^C prod_{n > 0 or m > 0} (1 - q^n zeta^l xi^m)^f(nm, l)`.
pub fn borch_expand_invariant(
    ic: &InvariantCoefficients,
    chamber: &Arc<WeylChamber>,
    weyl: &WeylVector,
    rect: (i64, i64),
) -> Result<InvariantSeries> {
    let (skew, level_max, t_max) = frame(ic, rect)?;
    let zero = InvariantSeries::zero(chamber.clone(), rect, skew);
    let mut log = zero.clone();
    for ((nn, w), f) in &ic.coeffs {
        let mut pairs: Vec<(i64, i64)> = Vec::new();
        if *nn == 0 {
            pairs.extend((1..=level_max).map(|n| (n, 0)));
            pairs.extend((1..=t_max).map(|m| (0, m)));
        } else {
            for m in 1..=t_max {
                if nn % m == 0 && (*nn < 0 || nn / m >= 1) {
                    pairs.push((nn / m, m));
                }
            }
        }
        for (n, m) in pairs {
            for j in 1.. {
                let k = ((j * n) as i32, scaled_weight(w, j), (j * m) as i32);
                if !(k.2 as i64 <= t_max && k.0 as i64 + skew * k.2 as i64 <= level_max) {
                    break;
                }
                log.add_orbit(j * n, &k.1, j * m, -q(*f) / q(j))?;
            }
        }
    }
    Ok(log.exp_graded()?.with_prefactor(Prefactor::from(weyl)))
}

/// `C + sum_{m >= 1} f(nm, l) (-m) sum_j x^j` as orbit sums.
pub fn log_derivative_sum_invariant(
    ic: &InvariantCoefficients,
    chamber: &Arc<WeylChamber>,
    c: &Q,
    rect: (i64, i64),
) -> Result<InvariantSeries> {
    let (skew, level_max, t_max) = frame(ic, rect)?;
    let mut s = InvariantSeries::zero(chamber.clone(), rect, skew);
    s.add_orbit(0, &[0; MAX_RANK], 0, c.clone())?;
    for m in 1..=t_max {
        for n in -skew..=level_max {
            if n + skew * m > level_max {
                continue;
            }
            for ((nn, w), f) in ic.coeffs.range((n * m, [i32::MIN; MAX_RANK])..=(n * m, [i32::MAX; MAX_RANK])) {
                debug_assert_eq!(*nn, n * m);
                for j in 1.. {
                    if j * m > t_max || j * n + skew * j * m > level_max {
                        break;
                    }
                    s.add_orbit(j * n, &scaled_weight(w, j), j * m, q(-m * f))?;
                }
            }
        }
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct InvariantLogReport {
    pub holds: bool,
    pub orbits_checked: usize,
    pub monomials_checked: Z,
    pub product_orbits: usize,
}

/// Checks `D_omega(G) = G * (C + sum ...)` on orbit sums.
pub fn log_derivative_check_invariant(
    ic: &InvariantCoefficients,
    chamber: &Arc<WeylChamber>,
    weyl: &WeylVector,
    rect: (i64, i64),
) -> Result<InvariantLogReport> {
    let g = borch_expand_invariant(ic, chamber, weyl, rect)?;
    let sum = log_derivative_sum_invariant(ic, chamber, &weyl.c, rect)?;
    let lhs = g.derive(true);
    let rhs = g.mul(&sum)?;
    let holds = lhs == rhs;
    let monomials_checked = rhs.expanded_len().max(lhs.expanded_len());
    Ok(InvariantLogReport {
        holds,
        orbits_checked: lhs.len().max(rhs.len()),
        monomials_checked,
        product_orbits: g.len(),
    })
}

/// Lattice vectors from weights, mostly for reporting.
pub fn weight_vector(chamber: &WeylChamber, w: &Weight) -> LatticeVector {
    let v = chamber.vector_of(w);
    chamber.lattice().vector(v)
}
