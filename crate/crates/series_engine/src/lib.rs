//! Exact truncated Fourier expansions in `q`, `zeta = (zeta_1..zeta_s)` and
//! `xi`, stored as a monomial prefactor `q^A zeta^B xi^C` times a sparse
//! series with integer exponents scaled by a global denominator.
//!
//! A series is exact on the region `t <= t_max`, `a + skew*t <= a_max +
//! skew*t_max` of relative exponents; with `skew = 0` this is the rectangle
//! `[0, a_max] x [0, t_max]`. Terms always satisfy `t >= 0` and
//! `a + skew*t >= 0`, which makes the region closed under products.

pub mod invariant;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use borcherds_weyl::{parse_q_value, CoeffMap, WeylVector};
use lattice_core::arith::{self, fmt_q, parse_q, q, Q};
use lattice_core::error::{Error, Result};
use lattice_core::lattice::Lattice;

pub const MAX_RANK: usize = 10;
const T_IDX: usize = MAX_RANK + 1;
/// `[a, l_1, .., l_MAX_RANK, t]`, each scaled by the series denominator.
pub type Exp = [i32; MAX_RANK + 2];

const PAR_THRESHOLD: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Tau,
    /// `z_i`, zero based.
    Z(usize),
    Omega,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Axis::Tau),
            "omega" => Ok(Axis::Omega),
            _ => s
                .strip_prefix('z')
                .and_then(|i| i.parse::<usize>().ok())
                .filter(|i| *i >= 1)
                .map(|i| Axis::Z(i - 1))
                .ok_or_else(|| Error::Invalid(format!("invalid axis {s:?}"))),
        }
    }

    fn index(self) -> usize {
        match self {
            Axis::Tau => 0,
            Axis::Z(i) => i + 1,
            Axis::Omega => T_IDX,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Tau => write!(f, "tau"),
            Axis::Z(i) => write!(f, "z{}", i + 1),
            Axis::Omega => write!(f, "omega"),
        }
    }
}

/// `q^a zeta^b xi^c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prefactor {
    pub a: Q,
    pub b: Vec<Q>,
    pub c: Q,
}

impl Prefactor {
    pub fn trivial(rank: usize) -> Self {
        Prefactor { a: Q::zero(), b: vec![Q::zero(); rank], c: Q::zero() }
    }

    fn axis(&self, axis: Axis) -> &Q {
        match axis {
            Axis::Tau => &self.a,
            Axis::Z(i) => &self.b[i],
            Axis::Omega => &self.c,
        }
    }

    fn add(&self, o: &Prefactor) -> Prefactor {
        Prefactor { a: &self.a + &o.a, b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(), c: &self.c + &o.c }
    }
}

impl From<&WeylVector> for Prefactor {
    fn from(w: &WeylVector) -> Self {
        Prefactor { a: w.a.clone(), b: w.b.clone(), c: w.c.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    rank: usize,
    den: i64,
    prefactor: Prefactor,
    terms: FxHashMap<Exp, Q>,
    /// Bound on `a + skew*t`, in units of `1/den`.
    level_max: i64,
    /// Bound on `t`, in units of `1/den`.
    t_max: i64,
    skew: i64,
}

fn scaled(x: &Q, den: i64) -> Result<i64> {
    let y = x * q(den);
    if !y.is_integer() {
        return Err(Error::Denominator(fmt_q(x), den));
    }
    y.to_integer().to_i64().ok_or_else(|| Error::Invalid(format!("exponent {} too large", fmt_q(x))))
}

fn scaled32(x: &Q, den: i64) -> Result<i32> {
    let v = scaled(x, den)?;
    i32::try_from(v).map_err(|_| Error::Invalid(format!("exponent {} too large", fmt_q(x))))
}

fn zero_exp() -> Exp {
    [0; MAX_RANK + 2]
}

fn add_exp(x: &Exp, y: &Exp) -> Exp {
    let mut z = *x;
    for (zi, yi) in z.iter_mut().zip(y) {
        *zi += yi;
    }
    z
}

impl TruncatedSeries {
    /// The zero series exact on `rect = (a_max, t_max)`.
    pub fn zero(rank: usize, den: i64, rect: (Q, Q)) -> Result<Self> {
        Self::zero_skewed(rank, den, rect, 0)
    }

    pub fn zero_skewed(rank: usize, den: i64, rect: (Q, Q), skew: i64) -> Result<Self> {
        if rank > MAX_RANK {
            return Err(Error::Invalid(format!("rank {rank} exceeds {MAX_RANK}")));
        }
        if den <= 0 || skew < 0 {
            return Err(Error::Invalid("denominator must be positive and skew nonnegative".into()));
        }
        let a_max = scaled(&rect.0, den)?;
        let t_max = scaled(&rect.1, den)?;
        if a_max < 0 || t_max < 0 {
            return Err(Error::Invalid("rectangle bounds must be nonnegative".into()));
        }
        Ok(TruncatedSeries {
            rank,
            den,
            prefactor: Prefactor::trivial(rank),
            terms: FxHashMap::default(),
            level_max: a_max + skew * t_max,
            t_max,
            skew,
        })
    }

    pub fn constant(rank: usize, den: i64, rect: (Q, Q), c: Q) -> Result<Self> {
        let mut s = Self::zero(rank, den, rect)?;
        s.insert(&Q::zero(), &vec![Q::zero(); rank], &Q::zero(), c)?;
        Ok(s)
    }

    pub fn one_like(&self) -> Self {
        let mut s = self.empty_like();
        s.prefactor = Prefactor::trivial(self.rank);
        s.terms.insert(zero_exp(), Q::one());
        s
    }

    /// Same shape (rank, denominator, region, prefactor), no terms.
    pub fn empty_like(&self) -> Self {
        TruncatedSeries { terms: FxHashMap::default(), ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        TruncatedSeries {
            rank: self.rank,
            den: self.den,
            prefactor: self.prefactor.clone(),
            terms: FxHashMap::default(),
            level_max: self.level_max,
            t_max: self.t_max,
            skew: self.skew,
        }
    }

    pub fn with_prefactor(mut self, p: Prefactor) -> Result<Self> {
        if p.b.len() != self.rank {
            return Err(Error::RankMismatch(p.b.len(), self.rank));
        }
        self.prefactor = p;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn skew(&self) -> i64 {
        self.skew
    }

    pub fn prefactor(&self) -> &Prefactor {
        &self.prefactor
    }

    /// `(a_max, t_max)`.
    pub fn rect(&self) -> (Q, Q) {
        let den = q(self.den);
        (q(self.level_max - self.skew * self.t_max) / &den, q(self.t_max) / den)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn level(&self, e: &Exp) -> i64 {
        e[0] as i64 + self.skew * e[T_IDX] as i64
    }

    fn in_cone(&self, e: &Exp) -> bool {
        e[T_IDX] >= 0 && self.level(e) >= 0
    }

    fn in_region(&self, e: &Exp) -> bool {
        (e[T_IDX] as i64) <= self.t_max && self.level(e) <= self.level_max
    }

    fn exp_of(&self, a: &Q, l: &[Q], t: &Q) -> Result<Exp> {
        if l.len() != self.rank {
            return Err(Error::RankMismatch(l.len(), self.rank));
        }
        let mut e = zero_exp();
        e[0] = scaled32(a, self.den)?;
        for (i, x) in l.iter().enumerate() {
            e[i + 1] = scaled32(x, self.den)?;
        }
        e[T_IDX] = scaled32(t, self.den)?;
        Ok(e)
    }

    fn add_term(&mut self, e: Exp, c: Q) {
        if c.is_zero() || !self.in_region(&e) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Adds `c q^a zeta^l xi^t` (relative to the prefactor). Terms beyond the
    /// region are dropped; terms outside the cone are an error.
    pub fn insert(&mut self, a: &Q, l: &[Q], t: &Q, c: Q) -> Result<()> {
        let e = self.exp_of(a, l, t)?;
        if !self.in_cone(&e) {
            return Err(Error::Invalid(format!(
                "term q^{} xi^{} lies outside the truncation cone",
                fmt_q(a),
                fmt_q(t)
            )));
        }
        self.add_term(e, c);
        Ok(())
    }

    /// Coefficient of `q^a zeta^l xi^t` relative to the prefactor.
    pub fn coeff(&self, a: &Q, l: &[Q], t: &Q) -> Q {
        match self.exp_of(a, l, t) {
            Ok(e) => self.terms.get(&e).cloned().unwrap_or_else(Q::zero),
            Err(_) => Q::zero(),
        }
    }

    /// Terms as `(a, l, t, c)` relative to the prefactor, sorted by `(t, a, l)`.
    pub fn terms(&self) -> Vec<(Q, Vec<Q>, Q, Q)> {
        let den = q(self.den);
        let mut keys: Vec<&Exp> = self.terms.keys().collect();
        keys.sort_by_key(|e| (e[T_IDX], e[0], **e));
        keys.into_iter()
            .map(|e| {
                (
                    q(e[0] as i64) / &den,
                    (0..self.rank).map(|i| q(e[i + 1] as i64) / &den).collect(),
                    q(e[T_IDX] as i64) / &den,
                    self.terms[e].clone(),
                )
            })
            .collect()
    }

    fn check_compatible(&self, o: &TruncatedSeries) -> Result<()> {
        if self.rank != o.rank {
            return Err(Error::RankMismatch(self.rank, o.rank));
        }
        if self.skew != o.skew {
            return Err(Error::Invalid(format!("truncation skews differ ({} vs {})", self.skew, o.skew)));
        }
        Ok(())
    }

    /// Re-expresses the series over denominator `den` (a multiple of the current one).
    pub fn with_den(&self, den: i64) -> Result<Self> {
        if den % self.den != 0 {
            return Err(Error::Invalid(format!("denominator {den} is not a multiple of {}", self.den)));
        }
        let f = (den / self.den) as i32;
        let mut out = self.clone_shape();
        out.den = den;
        out.level_max *= f as i64;
        out.t_max *= f as i64;
        for (e, c) in &self.terms {
            let mut e2 = *e;
            for x in e2.iter_mut() {
                *x *= f;
            }
            out.terms.insert(e2, c.clone());
        }
        Ok(out)
    }

    fn common_den(&self, o: &TruncatedSeries) -> Result<(Self, Self)> {
        let den = arith::lcm_i64(self.den, o.den);
        Ok((self.with_den(den)?, o.with_den(den)?))
    }

    /// Moves the prefactor to `p`, shifting terms by the (nonnegative) residual.
    fn refactor(&self, p: &Prefactor) -> Result<Self> {
        let da = scaled(&(&self.prefactor.a - &p.a), self.den)?;
        let dc = scaled(&(&self.prefactor.c - &p.c), self.den)?;
        if da < 0 || dc < 0 {
            return Err(Error::Invalid("prefactor difference has negative residual exponents".into()));
        }
        let mut shift = zero_exp();
        shift[0] = da as i32;
        shift[T_IDX] = dc as i32;
        for i in 0..self.rank {
            shift[i + 1] = scaled32(&(&self.prefactor.b[i] - &p.b[i]), self.den)?;
        }
        let mut out = self.clone_shape();
        out.prefactor = p.clone();
        out.level_max += da + self.skew * dc;
        out.t_max += dc;
        for (e, c) in &self.terms {
            out.terms.insert(add_exp(e, &shift), c.clone());
        }
        Ok(out)
    }

    pub fn add(&self, o: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(o)?;
        let (x, y) = self.common_den(o)?;
        let p = Prefactor {
            a: x.prefactor.a.clone().min(y.prefactor.a.clone()),
            b: x.prefactor.b.clone(),
            c: x.prefactor.c.clone().min(y.prefactor.c.clone()),
        };
        let (x, y) = (x.refactor(&p)?, y.refactor(&p)?);
        let mut out = x.clone_shape();
        out.level_max = x.level_max.min(y.level_max);
        out.t_max = x.t_max.min(y.t_max);
        for (e, c) in x.terms.iter().chain(&y.terms) {
            out.add_term(*e, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, o: &TruncatedSeries) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = self.clone_shape();
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(e, x)| (*e, x * c)).collect();
        }
        out
    }

    fn buckets(&self) -> BTreeMap<(i64, i32), Vec<(&Exp, &Q)>> {
        let mut b: BTreeMap<(i64, i32), Vec<(&Exp, &Q)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            b.entry((self.level(e), e[T_IDX])).or_default().push((e, c));
        }
        b
    }

    pub fn mul(&self, o: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(o)?;
        let (x, y) = self.common_den(o)?;
        let mut out = x.clone_shape();
        out.prefactor = x.prefactor.add(&y.prefactor);
        out.level_max = x.level_max.min(y.level_max);
        out.t_max = x.t_max.min(y.t_max);
        let (lmax, tmax) = (out.level_max, out.t_max as i32);
        let bx = x.buckets();
        let by = y.buckets();
        let mut pairs: Vec<(&Vec<(&Exp, &Q)>, &Vec<(&Exp, &Q)>)> = Vec::new();
        let mut work = 0usize;
        for ((lx, tx), vx) in &bx {
            for ((ly, ty), vy) in &by {
                if lx + ly <= lmax && tx + ty <= tmax {
                    pairs.push((vx, vy));
                    work += vx.len() * vy.len();
                }
            }
        }
        let fold = |acc: &mut FxHashMap<Exp, Q>, vx: &Vec<(&Exp, &Q)>, vy: &Vec<(&Exp, &Q)>| {
            for (ex, cx) in vx {
                for (ey, cy) in vy {
                    let e = add_exp(ex, ey);
                    let c = *cx * *cy;
                    match acc.get_mut(&e) {
                        Some(v) => *v += c,
                        None => {
                            acc.insert(e, c);
                        }
                    }
                }
            }
        };
        let terms = if work >= PAR_THRESHOLD {
            // split the larger side so the tasks balance
            let mut jobs: Vec<(Vec<(&Exp, &Q)>, &Vec<(&Exp, &Q)>)> = Vec::new();
            for (vx, vy) in &pairs {
                for chunk in vx.chunks(64) {
                    jobs.push((chunk.to_vec(), vy));
                }
            }
            jobs.into_par_iter()
                .fold(FxHashMap::default, |mut acc, (vx, vy)| {
                    fold(&mut acc, &vx, vy);
                    acc
                })
                .reduce(FxHashMap::default, |mut a, b| {
                    let (small, mut big) = if a.len() < b.len() { (a, b) } else { (b, std::mem::take(&mut a)) };
                    for (e, c) in small {
                        match big.get_mut(&e) {
                            Some(v) => *v += c,
                            None => {
                                big.insert(e, c);
                            }
                        }
                    }
                    big
                })
        } else {
            let mut acc = FxHashMap::default();
            for (vx, vy) in &pairs {
                fold(&mut acc, vx, vy);
            }
            acc
        };
        out.terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = self.one_like();
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Normalized derivative: each monomial is multiplied by its full
    /// exponent along `axis` (prefactor included).
    pub fn derive(&self, axis: Axis) -> Result<Self> {
        if let Axis::Z(i) = axis {
            if i >= self.rank {
                return Err(Error::Invalid(format!("invalid axis {axis} for rank {}", self.rank)));
            }
        }
        let p = self.prefactor.axis(axis).clone();
        let den = q(self.den);
        let idx = axis.index();
        let mut out = self.clone_shape();
        for (e, c) in &self.terms {
            let m = &p + q(e[idx] as i64) / &den;
            if !m.is_zero() {
                out.terms.insert(*e, c * m);
            }
        }
        Ok(out)
    }

    /// Minimal `q`- and `xi`-exponents over the stored terms, prefactor included.
    pub fn leading_order(&self) -> Result<(Q, Q)> {
        if self.terms.is_empty() {
            return Err(Error::VanishesToRectangleOrder);
        }
        let den = q(self.den);
        let a = self.terms.keys().map(|e| e[0]).min().expect("nonempty");
        let t = self.terms.keys().map(|e| e[T_IDX]).min().expect("nonempty");
        Ok((&self.prefactor.a + q(a as i64) / &den, &self.prefactor.c + q(t as i64) / den))
    }

    /// Restricts to a smaller rectangle.
    pub fn truncate(&self, rect: (Q, Q)) -> Result<Self> {
        let a_max = scaled(&rect.0, self.den)?;
        let t_max = scaled(&rect.1, self.den)?.min(self.t_max);
        let level_max = (a_max + self.skew * t_max).min(self.level_max);
        let mut out = self.clone_shape();
        out.t_max = t_max;
        out.level_max = level_max;
        out.terms = self.terms.iter().filter(|(e, _)| out.in_region(e)).map(|(e, c)| (*e, c.clone())).collect();
        Ok(out)
    }

    /// Inverse of a series whose relative part is `1 + X` with every term of
    /// `X` of positive level or positive `t`.
    pub fn inverse(&self) -> Result<Self> {
        if self.terms.get(&zero_exp()) != Some(&Q::one()) {
            return Err(Error::Invalid("inverse needs reduced constant term 1".into()));
        }
        if self.terms.keys().any(|e| *e != zero_exp() && e[0] == 0 && e[T_IDX] == 0) {
            return Err(Error::Invalid("inverse needs a reduced constant term free of zeta".into()));
        }
        let mut x = self.clone();
        x.prefactor = Prefactor::trivial(self.rank);
        x.terms.remove(&zero_exp());
        let neg_x = x.neg();
        let mut acc = self.one_like();
        let mut power = self.one_like();
        loop {
            power = power.mul(&neg_x)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power)?;
        }
        acc.prefactor = Prefactor {
            a: -&self.prefactor.a,
            b: self.prefactor.b.iter().map(|x| -x).collect(),
            c: -&self.prefactor.c,
        };
        Ok(acc)
    }

    /// Grading `level * (t_max + 1) + t` used by [`Self::exp_graded`].
    fn grade(&self, e: &Exp) -> i64 {
        self.level(e) * (self.t_max + 1) + e[T_IDX] as i64
    }

    /// `exp(self)` for a series without terms of grade zero, through the
    /// recurrence `g G_g = sum_k k L_k G_{g-k}` of the grading derivation.
    pub fn exp_graded(&self, term_cap: usize) -> Result<Self> {
        let mut by_grade: BTreeMap<i64, TruncatedSeries> = BTreeMap::new();
        for (e, c) in &self.terms {
            let g = self.grade(e);
            if g <= 0 {
                return Err(Error::Invalid("exp needs terms of positive grade".into()));
            }
            let s = by_grade.entry(g).or_insert_with(|| {
                let mut s = self.clone_shape();
                s.prefactor = Prefactor::trivial(self.rank);
                s
            });
            s.terms.insert(*e, c * q(g));
        }
        let g_max = self.level_max * (self.t_max + 1) + self.t_max;
        let mut parts: BTreeMap<i64, TruncatedSeries> = BTreeMap::new();
        parts.insert(0, self.one_like());
        let mut total = 1usize;
        for g in 1..=g_max {
            let mut acc: Option<TruncatedSeries> = None;
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
                    total += a.len();
                    if total > term_cap {
                        return Err(Error::TermCap(term_cap));
                    }
                    parts.insert(g, a);
                }
            }
        }
        let mut out = self.one_like();
        out.terms.clear();
        for (_, p) in parts {
            for (e, c) in p.terms {
                out.terms.insert(e, c);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let (a_max, t_max) = self.rect();
        let terms: Vec<Value> = self
            .terms()
            .into_iter()
            .map(|(a, l, t, c)| {
                serde_json::json!({
                    "a": fmt_q(&a),
                    "l": l.iter().map(fmt_q).collect::<Vec<_>>(),
                    "t": fmt_q(&t),
                    "c": fmt_q(&c),
                })
            })
            .collect();
        serde_json::json!({
            "rank": self.rank,
            "den": self.den,
            "prefactor": {
                "A": fmt_q(&self.prefactor.a),
                "B": self.prefactor.b.iter().map(fmt_q).collect::<Vec<_>>(),
                "C": fmt_q(&self.prefactor.c),
            },
            "terms": terms,
            "rect": [fmt_q(&a_max), fmt_q(&t_max)],
            "skew": self.skew,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SeriesFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let rect = (parse_q_value(&f.rect[0])?, parse_q_value(&f.rect[1])?);
        let mut s = TruncatedSeries::zero_skewed(f.rank, f.den, rect, f.skew)?;
        let p = Prefactor {
            a: parse_q_value(&f.prefactor.a)?,
            b: f.prefactor.b.iter().map(parse_q_value).collect::<Result<_>>()?,
            c: parse_q_value(&f.prefactor.c)?,
        };
        s = s.with_prefactor(p)?;
        for t in &f.terms {
            let l = t.l.iter().map(parse_q_value).collect::<Result<Vec<_>>>()?;
            s.insert(&parse_q_value(&t.a)?, &l, &parse_q_value(&t.t)?, parse_q_value(&t.c)?)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Deserialize)]
struct SeriesFile {
    rank: usize,
    #[serde(default = "default_den")]
    den: i64,
    prefactor: PrefactorFile,
    terms: Vec<TermFile>,
    rect: [Value; 2],
    #[serde(default)]
    skew: i64,
}

#[derive(Debug, Deserialize)]
struct PrefactorFile {
    #[serde(rename = "A")]
    a: Value,
    #[serde(rename = "B")]
    b: Vec<Value>,
    #[serde(rename = "C")]
    c: Value,
}

#[derive(Debug, Deserialize)]
struct TermFile {
    a: Value,
    l: Vec<Value>,
    t: Value,
    c: Value,
}

fn default_den() -> i64 {
    24
}

/// A series together with its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSeries {
    pub series: TruncatedSeries,
    pub weight: i64,
}

impl WeightedSeries {
    pub fn new(series: TruncatedSeries, weight: i64) -> Result<Self> {
        if weight < 0 {
            return Err(Error::Invalid("weight must be nonnegative".into()));
        }
        Ok(WeightedSeries { series, weight })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let weight = v.get("weight").and_then(Value::as_i64).ok_or_else(|| Error::Parse("missing weight".into()))?;
        let series = TruncatedSeries::from_json(&v.to_string())?;
        WeightedSeries::new(series, weight)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.series.to_json();
        v["weight"] = Value::from(self.weight);
        v
    }
}

/// Number of forms the Jacobian takes for zeta-rank `s`: one per variable
/// `tau, z_1..z_s, omega`, plus one for the weighted row.
pub fn jacobian_form_count(rank: usize) -> usize {
    rank + 3
}

/// Determinant of the matrix with first row `k_i f_i` and further rows the
/// normalized derivatives of `f_i` along `tau, z_1, .., z_s, omega`.
pub fn jacobian(forms: &[WeightedSeries]) -> Result<TruncatedSeries> {
    let first = forms.first().ok_or(Error::FormCount { expected: 1, got: 0 })?;
    let s = first.series.rank;
    let n = jacobian_form_count(s);
    if forms.len() != n {
        return Err(Error::FormCount { expected: n, got: forms.len() });
    }
    let mut den = 1;
    for f in forms {
        first.series.check_compatible(&f.series)?;
        den = arith::lcm_i64(den, f.series.den);
    }
    let mut axes = vec![Axis::Tau];
    axes.extend((0..s).map(Axis::Z));
    axes.push(Axis::Omega);
    // columns with their prefactors pulled out
    let mut cols: Vec<Vec<TruncatedSeries>> = Vec::with_capacity(n);
    let mut total = Prefactor::trivial(s);
    for f in forms {
        let x = f.series.with_den(den)?;
        total = total.add(&x.prefactor);
        let mut col = vec![x.scale(&q(f.weight))];
        for &ax in &axes {
            col.push(x.derive(ax)?);
        }
        for e in &mut col {
            e.prefactor = Prefactor::trivial(s);
        }
        cols.push(col);
    }
    let mut memo: FxHashMap<u32, TruncatedSeries> = FxHashMap::default();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut det = minor(&cols, full, n, &mut memo)?;
    det.prefactor = total;
    Ok(det)
}

/// Determinant of the rows `n - |mask| ..` restricted to the columns in `mask`,
/// expanded along its first row.
fn minor(
    cols: &[Vec<TruncatedSeries>],
    mask: u32,
    n: usize,
    memo: &mut FxHashMap<u32, TruncatedSeries>,
) -> Result<TruncatedSeries> {
    if let Some(m) = memo.get(&mask) {
        return Ok(m.clone());
    }
    let size = mask.count_ones() as usize;
    let row = n - size;
    let members: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
    let result = if size == 1 {
        cols[members[0]][row].clone()
    } else {
        let mut acc: Option<TruncatedSeries> = None;
        for (pos, &j) in members.iter().enumerate() {
            let entry = &cols[j][row];
            if entry.is_zero() {
                continue;
            }
            let sub = minor(cols, mask & !(1 << j), n, memo)?;
            let mut term = entry.mul(&sub)?;
            if pos % 2 == 1 {
                term = term.neg();
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        match acc {
            Some(a) => a,
            None => {
                // every entry vanished: zero on the common region
                let mut z = cols[members[0]][row].empty_like();
                for &j in &members[1..] {
                    z = z.add(&cols[j][row].empty_like())?;
                }
                z
            }
        }
    };
    memo.insert(mask, result.clone());
    Ok(result)
}

/// `sum_t (-1)^t k_t f_t J_t` over `s + 4` forms, `J_t` the Jacobian of the
/// others; identically zero.
pub fn syzygy_check(forms: &[WeightedSeries]) -> Result<TruncatedSeries> {
    let first = forms.first().ok_or(Error::FormCount { expected: 1, got: 0 })?;
    let n = jacobian_form_count(first.series.rank) + 1;
    if forms.len() != n {
        return Err(Error::FormCount { expected: n, got: forms.len() });
    }
    let mut acc: Option<TruncatedSeries> = None;
    for t in 0..n {
        let rest: Vec<WeightedSeries> =
            forms.iter().enumerate().filter(|(i, _)| *i != t).map(|(_, f)| f.clone()).collect();
        let j = jacobian(&rest)?;
        let mut term = forms[t].series.scale(&q(forms[t].weight)).mul(&j)?;
        if t % 2 == 1 {
            term = term.neg();
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.expect("at least one form"))
}

/// Coefficients `f(n, l)` of a Jacobi form of weight 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMap {
    pub rank: usize,
    pub coeffs: CoeffMap,
    /// All `f(n, l)` with `n <= N` are listed; `None` means absent entries
    /// are zero for every `n`.
    pub complete_through: Option<i64>,
}

impl CoefficientMap {
    pub fn formal(rank: usize, coeffs: CoeffMap) -> Self {
        CoefficientMap { rank, coeffs: coeffs.into_iter().filter(|(_, f)| *f != 0).collect(), complete_through: None }
    }

    pub fn from_q0(phi: &borcherds_weyl::QZeroData, complete_through: Option<i64>) -> Result<Self> {
        Ok(CoefficientMap { rank: phi.lattice().rank(), coeffs: phi.full_map()?, complete_through })
    }

    fn n_min(&self) -> i64 {
        self.coeffs.keys().map(|(n, _)| *n).min().unwrap_or(0).min(0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let entries = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing coeffs".into()))?;
        let mut coeffs = CoeffMap::new();
        let mut rank = None;
        for e in entries {
            let n = e.get("n").and_then(Value::as_i64).ok_or_else(|| Error::Parse("coefficient without n".into()))?;
            let f = e.get("f").and_then(Value::as_i64).ok_or_else(|| Error::Parse("coefficient without f".into()))?;
            let l = e
                .get("l")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("coefficient without l".into()))?
                .iter()
                .map(parse_q_value)
                .collect::<Result<Vec<_>>>()?;
            if *rank.get_or_insert(l.len()) != l.len() {
                return Err(Error::RankMismatch(l.len(), rank.unwrap_or_default()));
            }
            if coeffs.insert((n, l), f).is_some() {
                return Err(Error::CoefficientConflict(format!("duplicate entry for n = {n}")));
            }
        }
        let rank = match (rank, v.get("rank").and_then(Value::as_u64)) {
            (Some(r), _) => r,
            (None, Some(r)) => r as usize,
            (None, None) => return Err(Error::Parse("cannot infer rank of an empty coefficient map".into())),
        };
        let complete_through = match v.get("complete_through") {
            None | Some(Value::Null) => None,
            Some(x) => Some(x.as_i64().ok_or_else(|| Error::Parse("complete_through must be an integer".into()))?),
        };
        Ok(CoefficientMap { rank, coeffs: coeffs.into_iter().filter(|(_, f)| *f != 0).collect(), complete_through })
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .coeffs
            .iter()
            .map(|((n, l), f)| serde_json::json!({"n": n, "l": l.iter().map(fmt_q).collect::<Vec<_>>(), "f": f}))
            .collect();
        serde_json::json!({"rank": self.rank, "coeffs": entries, "complete_through": self.complete_through})
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BorchOptions {
    /// Include the factors `(1 - zeta^l)^f(0,l)` with `l < 0`.
    pub include_toric: bool,
    pub term_cap: usize,
    /// Minimal global denominator; raised to cover the dual vectors.
    pub den: i64,
}

impl Default for BorchOptions {
    fn default() -> Self {
        BorchOptions { include_toric: true, term_cap: 2_000_000, den: 24 }
    }
}

/// `l < 0` in the order used for the toric factors.
fn is_negative_in(lat: Option<&Lattice>, l: &[Q]) -> bool {
    let first = match lat {
        Some(lat) => lat.pairings(l).into_iter().find(|x| !x.is_zero()),
        None => l.iter().find(|x| !x.is_zero()).cloned(),
    };
    first.is_some_and(|x| x.is_negative())
}

/// A factor `(1 - q^n zeta^l xi^m)^f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub n: i64,
    pub l: Vec<Q>,
    pub m: i64,
    pub f: i64,
}

/// Truncation data shared by the expansion and the log-derivative oracle.
#[derive(Debug, Clone, Copy)]
struct Frame {
    skew: i64,
    /// bound on n + skew*m
    level_max: i64,
    t_max: i64,
}

impl Frame {
    fn new(coeffs: &CoefficientMap, rect: (i64, i64)) -> Result<Self> {
        if rect.0 < 0 || rect.1 < 0 {
            return Err(Error::Invalid("rectangle bounds must be nonnegative".into()));
        }
        let skew = -coeffs.n_min();
        Ok(Frame { skew, level_max: rect.0 + skew * rect.1, t_max: rect.1 })
    }

    fn admits(&self, n: i64, m: i64) -> bool {
        m <= self.t_max && n + self.skew * m <= self.level_max
    }

    fn check_complete(&self, coeffs: &CoefficientMap) -> Result<()> {
        let Some(c) = coeffs.complete_through else { return Ok(()) };
        let mut need = 0;
        for m in 1..=self.t_max {
            for n in 1..=self.level_max {
                if self.admits(n, m) {
                    need = need.max(n * m);
                }
            }
        }
        if need > c {
            let missing = (c + 1..=need).map(|n| format!("f({n}, *)")).collect();
            return Err(Error::MissingCoefficients(missing));
        }
        Ok(())
    }
}

/// The factors of the product inside the truncation region, toric ones
/// (`n = m = 0`, `l < 0`) last.
pub fn borcherds_factors(
    coeffs: &CoefficientMap,
    lat: Option<&Lattice>,
    rect: (i64, i64),
    include_toric: bool,
) -> Result<Vec<Factor>> {
    let frame = Frame::new(coeffs, rect)?;
    frame.check_complete(coeffs)?;
    let mut out = Vec::new();
    let mut toric = Vec::new();
    for ((nn, l), &f) in &coeffs.coeffs {
        let nn = *nn;
        let is_zero_l = l.iter().all(Zero::is_zero);
        if nn == 0 {
            for n in 1..=frame.level_max {
                if frame.admits(n, 0) {
                    out.push(Factor { n, l: l.clone(), m: 0, f });
                }
            }
            for m in 1..=frame.t_max {
                if frame.admits(0, m) {
                    out.push(Factor { n: 0, l: l.clone(), m, f });
                }
            }
            if include_toric && !is_zero_l && is_negative_in(lat, l) {
                if f < 0 {
                    return Err(Error::MeromorphicToric(f));
                }
                toric.push(Factor { n: 0, l: l.clone(), m: 0, f });
            }
        } else {
            for m in 1..=frame.t_max {
                if nn % m != 0 {
                    continue;
                }
                let n = nn / m;
                if (nn > 0 && n < 1) || !frame.admits(n, m) {
                    continue;
                }
                out.push(Factor { n, l: l.clone(), m, f });
            }
        }
    }
    out.extend(toric);
    Ok(out)
}

fn series_den(coeffs: &CoefficientMap, base: i64) -> i64 {
    let mut den = base;
    for (_, l) in coeffs.coeffs.keys() {
        for x in l {
            den = arith::lcm_i64(den, x.denom().to_i64().unwrap_or(1));
        }
    }
    den
}

fn empty_frame_series(coeffs: &CoefficientMap, rect: (i64, i64), den: i64) -> Result<TruncatedSeries> {
    let frame = Frame::new(coeffs, rect)?;
    TruncatedSeries::zero_skewed(coeffs.rank, den, (q(rect.0), q(rect.1)), frame.skew)
}

/// `q^A zeta^B xi^C prod (1 - q^n zeta^l xi^m)^f(nm, l)` over `(n, l, m) > 0`,
/// expanded exactly on the rectangle `rect` (and the closure region above it).
pub fn borch_expand(
    coeffs: &CoefficientMap,
    lat: Option<&Lattice>,
    weyl: &WeylVector,
    rect: (i64, i64),
    opts: &BorchOptions,
) -> Result<TruncatedSeries> {
    if weyl.b.len() != coeffs.rank {
        return Err(Error::RankMismatch(weyl.b.len(), coeffs.rank));
    }
    let factors = borcherds_factors(coeffs, lat, rect, opts.include_toric)?;
    let den = series_den(coeffs, opts.den);
    let zero = empty_frame_series(coeffs, rect, den)?;
    // log of the non-toric part: -sum f x^j / j
    let mut log = zero.clone();
    let mut toric = zero.one_like();
    for fac in &factors {
        if fac.n == 0 && fac.m == 0 {
            let x = zero.monomial_like(0, &fac.l, 0)?;
            let one_minus = zero.one_like().sub(&x)?;
            toric = toric.mul(&one_minus.pow(fac.f as u32)?)?;
            if toric.len() > opts.term_cap {
                return Err(Error::TermCap(opts.term_cap));
            }
            continue;
        }
        let mut j = 1i64;
        loop {
            let e = zero.exp_scaled(j * fac.n, &fac.l, j, j * fac.m)?;
            if !zero.in_region(&e) {
                break;
            }
            log.add_term(e, -q(fac.f) / q(j));
            j += 1;
        }
    }
    let mut g = log.exp_graded(opts.term_cap)?;
    if opts.include_toric {
        g = g.mul(&toric)?;
    }
    if g.len() > opts.term_cap {
        return Err(Error::TermCap(opts.term_cap));
    }
    g.with_prefactor(Prefactor::from(weyl))
}

/// The same product multiplied out factor by factor with generalized
/// binomial series.
pub fn borch_expand_direct(
    coeffs: &CoefficientMap,
    lat: Option<&Lattice>,
    weyl: &WeylVector,
    rect: (i64, i64),
    opts: &BorchOptions,
) -> Result<TruncatedSeries> {
    let factors = borcherds_factors(coeffs, lat, rect, opts.include_toric)?;
    let den = series_den(coeffs, opts.den);
    let zero = empty_frame_series(coeffs, rect, den)?;
    let mut g = zero.one_like();
    for fac in &factors {
        let mut pow = zero.empty_like();
        let mut j = 0u32;
        loop {
            let e = zero.exp_scaled(j as i64 * fac.n, &fac.l, j as i64, j as i64 * fac.m)?;
            let b = arith::binom(fac.f, j);
            if !zero.in_region(&e) || (fac.f >= 0 && j as i64 > fac.f) {
                break;
            }
            let sign = if j.is_multiple_of(2) { Q::one() } else { -Q::one() };
            pow.add_term(e, Q::from_integer(b) * sign);
            j += 1;
        }
        g = g.mul(&pow)?;
        if g.len() > opts.term_cap {
            return Err(Error::TermCap(opts.term_cap));
        }
    }
    g.with_prefactor(Prefactor::from(weyl))
}

impl TruncatedSeries {
    fn exp_scaled(&self, n: i64, l: &[Q], j: i64, t: i64) -> Result<Exp> {
        let mut e = zero_exp();
        let den = self.den;
        e[0] = i32::try_from(n * den).map_err(|_| Error::Invalid("exponent overflow".into()))?;
        for (i, x) in l.iter().enumerate() {
            e[i + 1] = scaled32(&(x * q(j)), den)?;
        }
        e[T_IDX] = i32::try_from(t * den).map_err(|_| Error::Invalid("exponent overflow".into()))?;
        Ok(e)
    }

    fn monomial_like(&self, n: i64, l: &[Q], m: i64) -> Result<Self> {
        let mut s = self.empty_like();
        s.prefactor = Prefactor::trivial(self.rank);
        let e = self.exp_scaled(n, l, 1, m)?;
        s.terms.insert(e, Q::one());
        Ok(s)
    }
}

/// Outcome of the log-derivative identity `D_omega(G) = G * (C + sum f(nm,l) (-m) x/(1-x))`.
#[derive(Debug, Clone)]
pub struct LogDerivativeReport {
    pub lhs: TruncatedSeries,
    pub rhs: TruncatedSeries,
    pub holds: bool,
    /// `D_omega(G) G^-1` compared with the sum directly, when `G` is invertible.
    pub holds_via_inverse: Option<bool>,
    pub terms_checked: usize,
}

/// The right-hand side `C + sum_{m >= 1} f(nm,l) (-m) sum_j x^j`, built by
/// scanning `(n, m)` pairs.
pub fn log_derivative_sum(coeffs: &CoefficientMap, c: &Q, rect: (i64, i64), den: i64) -> Result<TruncatedSeries> {
    let frame = Frame::new(coeffs, rect)?;
    let den = series_den(coeffs, den);
    let mut s = empty_frame_series(coeffs, rect, den)?;
    s.add_term(zero_exp(), c.clone());
    let mut by_n: BTreeMap<i64, Vec<(&Vec<Q>, i64)>> = BTreeMap::new();
    for ((nn, l), f) in &coeffs.coeffs {
        by_n.entry(*nn).or_default().push((l, *f));
    }
    for m in 1..=frame.t_max {
        let n_lo = -frame.skew;
        for n in n_lo..=frame.level_max {
            if !frame.admits(n, m) {
                continue;
            }
            let Some(list) = by_n.get(&(n * m)) else { continue };
            for (l, f) in list {
                for j in 1.. {
                    let e = s.exp_scaled(j * n, l, j, j * m)?;
                    if !s.in_region(&e) {
                        break;
                    }
                    s.add_term(e, q(-m * f));
                }
            }
        }
    }
    Ok(s)
}

pub fn log_derivative_check(
    coeffs: &CoefficientMap,
    lat: Option<&Lattice>,
    weyl: &WeylVector,
    rect: (i64, i64),
    opts: &BorchOptions,
) -> Result<LogDerivativeReport> {
    let g = borch_expand(coeffs, lat, weyl, rect, opts)?;
    let sum = log_derivative_sum(coeffs, &weyl.c, rect, opts.den)?;
    let lhs = g.derive(Axis::Omega)?;
    let rhs = g.mul(&sum)?;
    let holds = lhs == rhs;
    let holds_via_inverse = match g.inverse() {
        Ok(inv) => {
            let mut quotient = lhs.mul(&inv)?;
            quotient.prefactor = Prefactor::trivial(g.rank);
            Some(quotient == sum)
        }
        Err(_) => None,
    };
    Ok(LogDerivativeReport { terms_checked: lhs.len().max(rhs.len()), lhs, rhs, holds, holds_via_inverse })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportClass {
    Cusp,
    Holomorphic,
    Weak,
    WeaklyHolomorphic,
}

/// Support class of one Fourier-Jacobi coefficient of index `t`.
pub fn jacobi_support_class(lat: &Lattice, slice: &[(i64, Vec<Q>, Q)], t: &Q) -> SupportClass {
    let live: Vec<&(i64, Vec<Q>, Q)> = slice.iter().filter(|(_, _, c)| !c.is_zero()).collect();
    let hyp = |n: i64, l: &[Q]| q(2 * n) * t - lat.inner(l, l);
    if live.iter().all(|(n, l, _)| hyp(*n, l).is_positive()) {
        SupportClass::Cusp
    } else if live.iter().all(|(n, l, _)| !hyp(*n, l).is_negative()) {
        SupportClass::Holomorphic
    } else if live.iter().all(|(n, _, _)| *n >= 0) {
        SupportClass::Weak
    } else {
        SupportClass::WeaklyHolomorphic
    }
}

/// Parses `"A,T"` into a rectangle.
pub fn parse_rect(s: &str) -> Result<(Q, Q)> {
    let (a, t) = s.split_once(',').ok_or_else(|| Error::Parse(format!("rectangle {s:?} is not A,T")))?;
    Ok((parse_q(a)?, parse_q(t)?))
}
