//! Root sets of positive definite lattices: detection, decomposition into
//! rescaled irreducible systems, Coxeter numbers and the modified Coxeter
//! numbers attached to the dual root sets `R*`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use lattice_core::arith::{self, fmt_q, q, QMatrix, Q, Z};
use lattice_core::error::{Error, Result};
use lattice_core::lattice::{Lattice, LatticeVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootType {
    pub family: Family,
    pub rank: usize,
}

impl RootType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B => rank >= 2,
            Family::C => rank >= 3,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if ok {
            Ok(RootType { family, rank })
        } else {
            Err(Error::Invalid(format!("no root system {}{rank}", family.letter())))
        }
    }

    pub fn root_count(self) -> usize {
        let n = self.rank;
        match self.family {
            Family::A => n * (n + 1),
            Family::B | Family::C => 2 * n * n,
            Family::D => 2 * n * (n - 1),
            Family::E => [72, 126, 240][n - 6],
            Family::F => 48,
            Family::G => 12,
        }
    }

    /// Number of short roots (all roots for simply laced types).
    pub fn short_count(self) -> usize {
        let n = self.rank;
        match self.family {
            Family::B => 2 * n,
            Family::C => 2 * n * (n - 1),
            Family::F => 24,
            Family::G => 6,
            _ => self.root_count(),
        }
    }

    pub fn is_simply_laced(self) -> bool {
        matches!(self.family, Family::A | Family::D | Family::E)
    }

    /// Long/short norm ratio.
    pub fn length_ratio(self) -> i64 {
        match self.family {
            Family::B | Family::C | Family::F => 2,
            Family::G => 3,
            _ => 1,
        }
    }

    pub fn coxeter_number(self) -> i64 {
        let n = self.rank as i64;
        match self.family {
            Family::A => n + 1,
            Family::B | Family::C => 2 * n,
            Family::D => 2 * (n - 1),
            Family::E => [12, 18, 30][self.rank - 6],
            Family::F => 12,
            Family::G => 6,
        }
    }

    pub fn dual_coxeter_number(self) -> i64 {
        let n = self.rank as i64;
        match self.family {
            Family::A => n + 1,
            Family::B => 2 * n - 1,
            Family::C => n + 1,
            Family::D => 2 * (n - 1),
            Family::E => [12, 18, 30][self.rank - 6],
            Family::F => 9,
            Family::G => 4,
        }
    }

    /// Order of the Weyl group.
    pub fn weyl_group_order(self) -> Z {
        let n = self.rank as u32;
        let fact = |k: u32| (1..=k).fold(Z::one(), |acc, i| acc * Z::from(i));
        match self.family {
            Family::A => fact(n + 1),
            Family::B | Family::C => Z::from(2u32).pow(n) * fact(n),
            Family::D => Z::from(2u32).pow(n - 1) * fact(n),
            Family::E => Z::from([51_840u64, 2_903_040, 696_729_600][self.rank - 6]),
            Family::F => Z::from(1152u32),
            Family::G => Z::from(12u32),
        }
    }

    /// Whether the parenthesized rescale in the naming is the short-root norm
    /// (`B_n(2d)`, `F_4(2d)`) rather than half of it.
    fn scale_is_short_norm(self) -> bool {
        matches!(self.family, Family::B | Family::F)
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

/// The `(i)/(ii)/(iii)` split for `A_1(d)` and `B_n(2d)` components whose
/// short roots have `div = 2d`: whether `r/d` and `r/(2d)` are dual roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Subcase {
    /// `r/d` is not a dual root.
    I,
    /// both `r/d` and `r/(2d)` are dual roots.
    II,
    /// `r/d` is a dual root, `r/(2d)` is not.
    III,
}

impl Subcase {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" => Ok(Subcase::I),
            "ii" => Ok(Subcase::II),
            "iii" => Ok(Subcase::III),
            _ => Err(Error::Parse(format!("unknown subcase {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subcase::I => "i",
            Subcase::II => "ii",
            Subcase::III => "iii",
        }
    }

    pub const ALL: [Subcase; 3] = [Subcase::I, Subcase::II, Subcase::III];
}

/// A finite root set in a lattice, each root annotated with its div.
#[derive(Debug, Clone)]
pub struct RootDatum {
    pub lattice: Lattice,
    pub roots: Vec<LatticeVector>,
    pub divs: Vec<i64>,
}

impl RootDatum {
    pub fn new(lattice: Lattice, roots: Vec<LatticeVector>) -> Result<Self> {
        let divs = roots.iter().map(|r| lattice.div(r)).collect::<Result<Vec<_>>>()?;
        Ok(RootDatum { lattice, roots, divs })
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn count_with_norm(&self, norm: i64) -> usize {
        self.roots.iter().filter(|r| r.norm == q(norm)).count()
    }

    pub fn is_closed_under_negation(&self) -> bool {
        let set: std::collections::HashSet<&Vec<Q>> = self.roots.iter().map(|r| &r.coords).collect();
        self.roots.iter().all(|r| {
            let neg: Vec<Q> = r.coords.iter().map(|x| -x).collect();
            set.contains(&neg)
        })
    }

    /// Crystallographic closure: every reflection permutes the set and all
    /// Cartan integers `2(r,x)/(r,r)` are integral.
    pub fn is_crystallographic(&self) -> bool {
        let set: std::collections::HashSet<&Vec<Q>> = self.roots.iter().map(|r| &r.coords).collect();
        for r in &self.roots {
            for x in &self.roots {
                let c = q(2) * self.lattice.inner(&r.coords, &x.coords) / &r.norm;
                if !arith::is_integer(&c) {
                    return false;
                }
                let Ok(y) = self.lattice.reflect(x, r) else { return false };
                if !set.contains(&y.coords) {
                    return false;
                }
            }
        }
        true
    }
}

/// All primitive vectors `r` with `(r,r) <= max_norm` whose reflection maps
/// the lattice into itself.
pub fn detect_roots(lat: &Lattice, max_norm: i64) -> Result<RootDatum> {
    let mut roots = Vec::new();
    for v in lat.short_vectors_i(max_norm)? {
        if arith::gcd_slice(&v) != 1 {
            continue;
        }
        let norm = lat.inner_i(&v, &v);
        let div = lat.div_i(&v)?;
        // 2 (r, b_i) / (r, r) integral for every basis vector b_i
        if (2 * div) % norm == 0 {
            roots.push(lat.vector_i(&v));
        }
    }
    RootDatum::new(lat.clone(), roots)
}

/// Div of the roots of one length class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivClass {
    pub norm: Q,
    pub div: Q,
}

#[derive(Debug, Clone)]
pub struct IrreducibleComponent {
    pub root_type: RootType,
    /// The `d` of the naming `A_n(d)`, `B_n(2d)`, `C_n(d)`, `F_4(2d)`, ...
    pub d: Q,
    pub lattice: Lattice,
    pub roots: Vec<LatticeVector>,
    /// Short class first.
    pub div_profile: Vec<DivClass>,
    pub subcase: Option<Subcase>,
}

impl IrreducibleComponent {
    pub fn rank(&self) -> usize {
        self.root_type.rank
    }

    /// Rescale factor appearing in the name, e.g. 2 for `B_3(2)`.
    pub fn scale(&self) -> Q {
        if self.root_type.scale_is_short_norm() {
            &self.d * q(2)
        } else {
            self.d.clone()
        }
    }

    pub fn name(&self) -> String {
        let s = self.scale();
        if s.is_one() {
            self.root_type.to_string()
        } else {
            format!("{}({})", self.root_type, fmt_scale(&s))
        }
    }

    pub fn short_norm(&self) -> &Q {
        &self.div_profile[0].norm
    }

    pub fn short_div(&self) -> &Q {
        &self.div_profile[0].div
    }

    pub fn with_subcase(mut self, s: Option<Subcase>) -> Self {
        self.subcase = s;
        self
    }

    /// Overrides the div of the short class, used to model components sitting
    /// in an overlattice other than the one the roots were built in.
    pub fn with_short_div(mut self, div: Q) -> Self {
        self.div_profile[0].div = div;
        self
    }

    /// Whether the short roots have `div = 2d` in the sense of the
    /// reflectivity criterion (`div` equal to the full short norm).
    pub fn short_div_is_norm(&self) -> bool {
        self.short_div() == self.short_norm()
    }

    pub fn needs_subcase(&self) -> bool {
        matches!(self.root_type.family, Family::A | Family::B)
            && (self.root_type.family == Family::B || self.root_type.rank == 1)
            && self.short_div_is_norm()
    }

    pub fn report(&self) -> ComponentReport {
        ComponentReport {
            root_type: self.root_type.family.letter().to_string(),
            rank: self.rank(),
            d: fmt_q(&self.d),
            name: self.name(),
            roots: self.roots.len(),
            coxeter: self.root_type.coxeter_number(),
            modified_coxeter: modified_coxeter(self).ok().map(|c| fmt_q(&c)),
            subcase: self.subcase.map(|s| s.name().to_string()),
        }
    }
}

fn fmt_scale(s: &Q) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    #[serde(rename = "type")]
    pub root_type: String,
    pub rank: usize,
    pub d: String,
    pub name: String,
    pub roots: usize,
    pub coxeter: i64,
    pub modified_coxeter: Option<String>,
    pub subcase: Option<String>,
}

/// Splits a root datum into mutually orthogonal irreducible components and
/// identifies each by rank, root count and the norms of its length classes.
pub fn decompose(rd: &RootDatum) -> Result<Vec<IrreducibleComponent>> {
    if rd.is_empty() {
        return Err(Error::Invalid("empty root datum".into()));
    }
    let lat = &rd.lattice;
    let n = rd.roots.len();
    // union-find over non-orthogonality
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if !lat.inner(&rd.roots[i].coords, &rd.roots[j].coords).is_zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut comps = Vec::new();
    for idx in groups.values() {
        let roots: Vec<LatticeVector> = idx.iter().map(|&i| rd.roots[i].clone()).collect();
        let divs: Vec<i64> = idx.iter().map(|&i| rd.divs[i]).collect();
        comps.push(identify(lat, roots, &divs)?);
    }
    comps.sort_by_key(|a| (a.rank(), a.root_type, a.scale()));
    Ok(comps)
}

fn identify(lat: &Lattice, roots: Vec<LatticeVector>, divs: &[i64]) -> Result<IrreducibleComponent> {
    let count = roots.len();
    let coords: QMatrix = roots.iter().map(|r| r.coords.clone()).collect();
    let rank = arith::rank(&coords);
    let mut classes: BTreeMap<Q, Vec<i64>> = BTreeMap::new();
    for (r, &d) in roots.iter().zip(divs) {
        classes.entry(r.norm.clone()).or_default().push(d);
    }
    let norms: Vec<Q> = classes.keys().cloned().collect();
    let describe = || {
        let ns: Vec<String> = classes.iter().map(|(k, v)| format!("{}x{}", v.len(), fmt_q(k))).collect();
        format!("rank {rank}, {count} roots, norms [{}]", ns.join(", "))
    };
    let mut div_profile = Vec::new();
    for (norm, ds) in &classes {
        if ds.iter().any(|d| *d != ds[0]) {
            return Err(Error::UnrecognizedRootSystem(format!("{}: mixed div in one length class", describe())));
        }
        div_profile.push(DivClass { norm: norm.clone(), div: q(ds[0]) });
    }
    let short = norms[0].clone();
    let short_count = classes[&short].len();
    let candidates: Vec<RootType> = match norms.len() {
        1 => {
            let mut c = vec![];
            if count == rank * (rank + 1) {
                c.push(RootType { family: Family::A, rank });
            }
            if rank >= 4 && count == 2 * rank * (rank - 1) {
                c.push(RootType { family: Family::D, rank });
            }
            if (6..=8).contains(&rank) && count == [72, 126, 240][rank - 6] {
                c.push(RootType { family: Family::E, rank });
            }
            c
        }
        2 => {
            let ratio = &norms[1] / &short;
            let mut c = vec![];
            if ratio == q(2) && count == 2 * rank * rank && rank >= 2 {
                if short_count == 2 * rank {
                    c.push(RootType { family: Family::B, rank });
                } else if rank >= 3 && short_count == 2 * rank * (rank - 1) {
                    c.push(RootType { family: Family::C, rank });
                }
            }
            if ratio == q(2) && rank == 4 && count == 48 && short_count == 24 {
                c.push(RootType { family: Family::F, rank });
            }
            if ratio == q(3) && rank == 2 && count == 12 && short_count == 6 {
                c.push(RootType { family: Family::G, rank });
            }
            c
        }
        _ => vec![],
    };
    let Some(&root_type) = candidates.first() else {
        return Err(Error::UnrecognizedRootSystem(describe()));
    };
    let d = &short / q(2);
    Ok(IrreducibleComponent { root_type, d, lattice: lat.clone(), roots, div_profile, subcase: None })
}

/// `sum_r (G r)(G r)^T` over the roots of a component.
fn root_moment(lat: &Lattice, roots: &[LatticeVector], weight: impl Fn(&LatticeVector) -> Q) -> QMatrix {
    let n = lat.rank();
    let mut m = vec![vec![Q::zero(); n]; n];
    for r in roots {
        let w = weight(r);
        if w.is_zero() {
            continue;
        }
        let g = lat.pairings(&r.coords);
        for i in 0..n {
            if g[i].is_zero() {
                continue;
            }
            for j in 0..n {
                m[i][j] += &w * &g[i] * &g[j];
            }
        }
    }
    m
}

/// Rows of a basis of the span of the given vectors, chosen among them.
fn span_basis(vectors: &[Vec<Q>]) -> QMatrix {
    let mut basis: QMatrix = Vec::new();
    for v in vectors {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if arith::rank(&trial) == trial.len() {
            basis = trial;
        }
    }
    basis
}

/// Checks `B M B^T == c * B G B^T` for a basis `B` of the span.
fn is_multiple_on_span(moment: &QMatrix, gram: &QMatrix, span: &QMatrix, c: &Q) -> bool {
    let bt = arith::transpose(span);
    let lhs = arith::mat_mul(&arith::mat_mul(span, moment), &bt);
    let rhs = arith::mat_mul(&arith::mat_mul(span, gram), &bt);
    lhs.iter().zip(&rhs).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x == &(c * y)))
}

/// Classical Coxeter number, after checking the quadratic identity
/// `sum_r (r,z)^2 = h' * N_long * (z,z)` on the span (with `h'` the dual
/// Coxeter number, equal to `h` for simply laced types).
pub fn coxeter_number(comp: &IrreducibleComponent) -> Result<i64> {
    let lat = &comp.lattice;
    let moment = root_moment(lat, &comp.roots, |_| Q::one());
    let span = span_basis(&comp.roots.iter().map(|r| r.coords.clone()).collect::<Vec<_>>());
    let long = comp.div_profile.last().expect("nonempty").norm.clone();
    let c = q(comp.root_type.dual_coxeter_number()) * long;
    if !is_multiple_on_span(&moment, &lat.gram_q(), &span, &c) {
        return Err(Error::Internal(format!("Coxeter identity fails for {}", comp.name())));
    }
    Ok(comp.root_type.coxeter_number())
}

/// Modified Coxeter number from the thirteen-case table.
pub fn modified_coxeter(comp: &IrreducibleComponent) -> Result<Q> {
    let n = comp.rank() as i64;
    let d = comp.d.clone();
    let t = comp.root_type;
    let sub = || comp.subcase.ok_or_else(|| Error::SubcaseRequired(comp.name()));
    Ok(match t.family {
        Family::A if n == 1 => {
            if comp.short_div_is_norm() {
                match sub()? {
                    Subcase::I => Q::one() / (q(2) * &d),
                    Subcase::II => q(2) / &d,
                    Subcase::III => q(3) / (q(2) * &d),
                }
            } else {
                q(2) / &d
            }
        }
        Family::A => q(n + 1) / &d,
        Family::B => {
            if comp.short_div_is_norm() {
                match sub()? {
                    Subcase::I => q(2 * n - 1) / (q(2) * &d),
                    Subcase::II => q(n + 1) / &d,
                    Subcase::III => q(2 * n + 1) / (q(2) * &d),
                }
            } else {
                q(n + 1) / &d
            }
        }
        Family::C => q(2 * n - 1) / &d,
        Family::D => q(2 * (n - 1)) / &d,
        Family::E => q([12, 18, 30][t.rank - 6]) / &d,
        Family::G => q(4) / &d,
        Family::F => q(9) / &d,
    })
}

/// A vector of the dual set `R*` in `L^v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualRoot {
    pub coords: Vec<Q>,
    pub norm: Q,
    /// Whether half of this vector still lies in `L^v`.
    pub half_in_dual: bool,
}

#[derive(Debug, Clone)]
pub struct DualSet {
    pub lattice: Lattice,
    pub vectors: Vec<DualRoot>,
}

impl DualSet {
    pub fn empty(lattice: Lattice) -> Self {
        DualSet { lattice, vectors: vec![] }
    }

    pub fn contains(&self, coords: &[Q]) -> bool {
        self.vectors.iter().any(|v| v.coords == coords)
    }

    /// Union of several dual sets over the same lattice.
    pub fn union(sets: &[DualSet]) -> Result<DualSet> {
        let lattice = sets.first().ok_or_else(|| Error::Invalid("no dual sets".into()))?.lattice.clone();
        let mut out = DualSet::empty(lattice);
        for s in sets {
            if s.lattice.gram() != out.lattice.gram() {
                return Err(Error::Invalid("dual sets over different lattices".into()));
            }
            for v in &s.vectors {
                if !out.contains(&v.coords) {
                    out.vectors.push(v.clone());
                }
            }
        }
        Ok(out)
    }
}

/// The dual set `R*`: each root `r` of norm `2e` contributes `r/e` when its
/// div is `e`; when its div is `2e` the subcase picks `r/(2e)`, `r/e`, or both.
pub fn build_dual_set(comp: &IrreducibleComponent) -> Result<DualSet> {
    let lat = &comp.lattice;
    let mut vectors = Vec::new();
    let needs = comp.needs_subcase();
    if needs && comp.subcase.is_none() {
        return Err(Error::SubcaseRequired(comp.name()));
    }
    for r in &comp.roots {
        let class = comp
            .div_profile
            .iter()
            .find(|c| c.norm == r.norm)
            .ok_or_else(|| Error::Internal("root without length class".into()))?;
        let e = &r.norm / q(2);
        let div = &class.div;
        let mut push = |m: &Q| {
            let coords: Vec<Q> = r.coords.iter().map(|x| x / m).collect();
            let norm = &r.norm / (m * m);
            // (r/m)/2 is dual iff 2m divides div(r)
            let half_in_dual = arith::is_integer(&(div / (q(2) * m)));
            vectors.push(DualRoot { coords, norm, half_in_dual });
        };
        if *div == e {
            push(&e);
        } else if *div == &e * q(2) {
            let is_short = class.norm == *comp.short_norm();
            if !(needs && is_short) {
                return Err(Error::Invalid(format!(
                    "inconsistent div profile for {}: div {} on a root of norm {}",
                    comp.name(),
                    fmt_q(div),
                    fmt_q(&r.norm)
                )));
            }
            match comp.subcase.expect("checked above") {
                Subcase::I => push(&(&e * q(2))),
                Subcase::II => {
                    push(&e);
                    push(&(&e * q(2)));
                }
                Subcase::III => push(&e),
            }
        } else {
            return Err(Error::Invalid(format!(
                "inconsistent div profile for {}: div {} does not match norm {}",
                comp.name(),
                fmt_q(div),
                fmt_q(&r.norm)
            )));
        }
    }
    Ok(DualSet { lattice: lat.clone(), vectors })
}

/// Explicit models of every rescaled irreducible root system: a lattice
/// carrying the roots, and the roots in its basis.
pub mod models {
    use super::*;

    /// A lattice spanned by integer vectors of `Z^n` with `scale * dot`, and a
    /// way to express ambient vectors in its basis.
    struct Embedded {
        basis: Vec<Vec<i64>>,
        scale: i64,
    }

    impl Embedded {
        fn lattice(&self, label: String) -> Result<Lattice> {
            let gram = self
                .basis
                .iter()
                .map(|u| {
                    self.basis.iter().map(|v| self.scale * u.iter().zip(v).map(|(a, b)| a * b).sum::<i64>()).collect()
                })
                .collect();
            Lattice::new(gram, Some(label))
        }

        fn coords(&self, v: &[i64]) -> Vec<Q> {
            // solve B^T c = v
            let bt: QMatrix = arith::transpose(&arith::to_qmatrix(&self.basis));
            let inv = arith::inverse(&bt).expect("basis is independent");
            arith::mat_vec(&inv, &v.iter().map(|&x| q(x)).collect::<Vec<_>>())
        }
    }

    fn d_basis(n: usize) -> Vec<Vec<i64>> {
        let mut b = Vec::new();
        for i in 0..n - 1 {
            let mut v = vec![0; n];
            v[i] = 1;
            v[i + 1] = -1;
            b.push(v);
        }
        let mut v = vec![0; n];
        v[n - 2] = 1;
        v[n - 1] = 1;
        b.push(v);
        b
    }

    fn pm_pairs(n: usize) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let mut v = vec![0; n];
                    v[i] = a;
                    v[j] = b;
                    out.push(v);
                }
            }
        }
        out
    }

    fn pm_units(n: usize, len: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for i in 0..n {
            for s in [len, -len] {
                let mut v = vec![0; n];
                v[i] = s;
                out.push(v);
            }
        }
        out
    }

    fn from_embedded(emb: &Embedded, label: String, ambient_roots: Vec<Vec<i64>>) -> Result<RootDatum> {
        let lat = emb.lattice(label)?;
        let roots = ambient_roots.iter().map(|v| lat.vector(emb.coords(v))).collect();
        RootDatum::new(lat, roots)
    }

    fn norm_class(lat: &Lattice, norm: i64) -> Result<Vec<LatticeVector>> {
        Ok(lat.short_vectors(norm)?.into_iter().filter(|v| v.norm == q(norm)).collect())
    }

    /// Root datum of `type(scale)` where `scale` is the parenthesized
    /// rescale of the naming (`B_n(2d)` and `F_4(2d)` take `2d`).
    pub fn root_datum(t: RootType, scale: i64) -> Result<RootDatum> {
        let n = t.rank;
        let label = if scale == 1 { t.to_string() } else { format!("{t}({scale})") };
        match t.family {
            Family::A | Family::D | Family::E => {
                let lat = Lattice::new(lattice_core::lattice::cartan(t.family.letter(), n)?, None)?
                    .rescale(scale)?
                    .with_label(label);
                let roots = norm_class(&lat, 2 * scale)?;
                RootDatum::new(lat, roots)
            }
            Family::G => {
                let lat = lattice_core::lattice::builtin("A2")?.rescale(scale)?.with_label(label);
                let mut roots = norm_class(&lat, 2 * scale)?;
                roots.extend(norm_class(&lat, 6 * scale)?);
                RootDatum::new(lat, roots)
            }
            Family::C => {
                let emb = Embedded { basis: d_basis(n), scale };
                let mut roots = pm_pairs(n);
                roots.extend(pm_units(n, 2));
                from_embedded(&emb, label, roots)
            }
            Family::B => {
                if scale % 2 != 0 {
                    return Err(Error::Invalid("B_n(2d) needs an even rescale".into()));
                }
                let basis = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
                let emb = Embedded { basis, scale };
                let mut roots = pm_units(n, 1);
                roots.extend(pm_pairs(n));
                from_embedded(&emb, label, roots)
            }
            Family::F => {
                if scale % 2 != 0 {
                    return Err(Error::Invalid("F_4(2d) needs an even rescale".into()));
                }
                let emb = Embedded { basis: d_basis(4), scale: scale / 2 };
                let mut roots = pm_pairs(4);
                roots.extend(pm_units(4, 2));
                for mask in 0..16u32 {
                    roots.push((0..4).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect());
                }
                from_embedded(&emb, label, roots)
            }
        }
    }

    /// The single irreducible component of [`root_datum`].
    pub fn component(t: RootType, scale: i64) -> Result<IrreducibleComponent> {
        let rd = root_datum(t, scale)?;
        let mut comps = decompose(&rd)?;
        if comps.len() != 1 || comps[0].root_type != t {
            return Err(Error::Internal(format!("model of {t}({scale}) did not decompose to itself")));
        }
        Ok(comps.remove(0))
    }

    /// The rescale in the name for a given `d`.
    pub fn scale_for(t: RootType, d: i64) -> i64 {
        if t.scale_is_short_norm() {
            2 * d
        } else {
            d
        }
    }

    /// Every root type of rank at most `max_rank`.
    pub fn all_types(max_rank: usize) -> Vec<RootType> {
        let mut out = Vec::new();
        for n in 1..=max_rank {
            out.push(RootType { family: Family::A, rank: n });
        }
        for n in 2..=max_rank {
            out.push(RootType { family: Family::B, rank: n });
        }
        for n in 3..=max_rank {
            out.push(RootType { family: Family::C, rank: n });
        }
        for n in 4..=max_rank {
            out.push(RootType { family: Family::D, rank: n });
        }
        for n in 6..=max_rank.min(8) {
            out.push(RootType { family: Family::E, rank: n });
        }
        if max_rank >= 4 {
            out.push(RootType { family: Family::F, rank: 4 });
        }
        if max_rank >= 2 {
            out.push(RootType { family: Family::G, rank: 2 });
        }
        out
    }
}

/// `d` as an integer when it is one.
pub fn d_as_int(d: &Q) -> Option<i64> {
    if d.is_integer() {
        d.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lattice_core::arith::qr;
    use lattice_core::lattice::builtin;

    fn ty(f: Family, n: usize) -> RootType {
        RootType::new(f, n).unwrap()
    }

    #[test]
    fn detection_examples() {
        assert_eq!(detect_roots(&builtin("A2").unwrap(), 2).unwrap().len(), 6);
        let d4 = detect_roots(&builtin("D4").unwrap(), 4).unwrap();
        assert_eq!(d4.count_with_norm(2), 24);
        assert_eq!(d4.count_with_norm(4), 24);
        let six = Lattice::new(vec![vec![6]], None).unwrap();
        let rd = detect_roots(&six, 6).unwrap();
        assert_eq!(rd.len(), 2);
        assert_eq!(rd.roots[0].norm, q(6));
    }

    #[test]
    fn detected_sets_are_root_systems() {
        for lat in lattice_core::lattice::builtin_table() {
            for max in [2, 4] {
                let rd = detect_roots(&lat, max).unwrap();
                assert!(rd.is_closed_under_negation(), "{}", lat.label());
                if lat.rank() <= 5 {
                    assert!(rd.is_crystallographic(), "{}", lat.label());
                }
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let two = decompose(&detect_roots(&builtin("2A1").unwrap(), 2).unwrap()).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|c| c.root_type == ty(Family::A, 1) && c.d == q(1)));
        let e8 = decompose(&detect_roots(&builtin("E8").unwrap(), 2).unwrap()).unwrap();
        assert_eq!(e8.len(), 1);
        assert_eq!(e8[0].root_type, ty(Family::E, 8));
        let b3 = decompose(&detect_roots(&builtin("3A1").unwrap(), 4).unwrap()).unwrap();
        assert_eq!(b3.len(), 1);
        assert_eq!(b3[0].root_type, ty(Family::B, 3));
        assert_eq!(b3[0].scale(), q(2));
        assert_eq!(b3[0].roots.len(), 18);
        assert_eq!(b3[0].name(), "B3(2)");
        let f4 = decompose(&detect_roots(&builtin("D4").unwrap(), 4).unwrap()).unwrap();
        assert_eq!(f4[0].root_type, ty(Family::F, 4));
        assert_eq!(f4[0].name(), "F4(2)");
        let g2 = decompose(&detect_roots(&builtin("A2").unwrap(), 6).unwrap()).unwrap();
        assert_eq!(g2[0].root_type, ty(Family::G, 2));
        let c5 = decompose(&detect_roots(&builtin("D5").unwrap(), 4).unwrap()).unwrap();
        assert_eq!(c5[0].root_type, ty(Family::C, 5));
        let c3 = decompose(&detect_roots(&builtin("A3").unwrap(), 4).unwrap()).unwrap();
        assert_eq!(c3[0].root_type, ty(Family::C, 3));
        // D3 is reported as A3
        let a3 = decompose(&detect_roots(&builtin("D3").unwrap(), 2).unwrap()).unwrap();
        assert_eq!(a3[0].root_type, ty(Family::A, 3));
    }

    #[test]
    fn decomposition_is_an_orthogonal_partition() {
        let lat = builtin("A2").unwrap().direct_sum(&builtin("D4").unwrap()).direct_sum(&builtin("A1").unwrap());
        let rd = detect_roots(&lat, 2).unwrap();
        let comps = decompose(&rd).unwrap();
        assert_eq!(comps.iter().map(|c| c.roots.len()).sum::<usize>(), rd.len());
        let names: Vec<String> = comps.iter().map(|c| c.name()).collect();
        assert_eq!(names, ["A1", "A2", "D4"]);
        for (i, a) in comps.iter().enumerate() {
            for b in &comps[i + 1..] {
                for r in &a.roots {
                    for s in &b.roots {
                        assert!(lat.inner(&r.coords, &s.coords).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn unrecognized_component_is_an_error() {
        // two roots of norms 2 and 4 at 45 degrees is B2; drop half of it
        let lat = builtin("2A1").unwrap();
        let roots = vec![lat.vector_i(&[1, 0]), lat.vector_i(&[1, 1]), lat.vector_i(&[-1, 0])];
        let rd = RootDatum::new(lat, roots).unwrap();
        assert!(matches!(decompose(&rd), Err(Error::UnrecognizedRootSystem(_))));
    }

    #[test]
    fn coxeter_numbers() {
        let a2 = models::component(ty(Family::A, 2), 1).unwrap();
        assert_eq!(coxeter_number(&a2).unwrap(), 3);
        let d4 = models::component(ty(Family::D, 4), 1).unwrap();
        assert_eq!(coxeter_number(&d4).unwrap(), 6);
        let e8 = models::component(ty(Family::E, 8), 1).unwrap();
        assert_eq!(coxeter_number(&e8).unwrap(), 30);
    }

    #[test]
    fn every_model_satisfies_the_coxeter_identity() {
        for t in models::all_types(8) {
            for d in 1..=2 {
                let c = models::component(t, models::scale_for(t, d)).unwrap();
                assert_eq!(c.d, q(d), "{t}");
                assert_eq!(c.roots.len(), t.root_count());
                coxeter_number(&c).unwrap();
            }
        }
    }

    #[test]
    fn modified_coxeter_examples() {
        let a1 = models::component(ty(Family::A, 1), 1).unwrap().with_subcase(Some(Subcase::I));
        assert_eq!(modified_coxeter(&a1).unwrap(), qr(1, 2));
        let b2 = models::component(ty(Family::B, 2), 2).unwrap().with_subcase(Some(Subcase::III));
        assert_eq!(modified_coxeter(&b2).unwrap(), qr(5, 2));
        let c3 = models::component(ty(Family::C, 3), 1).unwrap();
        assert_eq!(modified_coxeter(&c3).unwrap(), q(5));
        let bare = models::component(ty(Family::A, 1), 1).unwrap();
        assert!(matches!(modified_coxeter(&bare), Err(Error::SubcaseRequired(_))));
        let div_d = bare.with_short_div(q(1));
        assert_eq!(modified_coxeter(&div_d).unwrap(), q(2));
    }

    fn norms(ds: &DualSet) -> BTreeMap<Q, usize> {
        let mut m = BTreeMap::new();
        for v in &ds.vectors {
            *m.entry(v.norm.clone()).or_default() += 1;
        }
        m
    }

    #[test]
    fn dual_set_examples() {
        // C_n(1): R* = B_n(1): short norm 1 (2n of them), long norm 2
        let c4 = models::component(ty(Family::C, 4), 1).unwrap();
        let ds = build_dual_set(&c4).unwrap();
        assert_eq!(norms(&ds), BTreeMap::from([(q(1), 8), (q(2), 24)]));
        // G2(1): R* = G2(1/3): short norm 2/3, long norm 2
        let g2 = models::component(ty(Family::G, 2), 1).unwrap();
        let ds = build_dual_set(&g2).unwrap();
        assert_eq!(norms(&ds), BTreeMap::from([(qr(2, 3), 6), (q(2), 6)]));
        // A1(1) with div 2, subcase ii: A1(1) + A1(1/4)
        let a1 = models::component(ty(Family::A, 1), 1).unwrap().with_subcase(Some(Subcase::II));
        let ds = build_dual_set(&a1).unwrap();
        assert_eq!(norms(&ds), BTreeMap::from([(qr(1, 2), 2), (q(2), 2)]));
        assert!(ds.vectors.iter().any(|v| v.coords == vec![q(1)] && v.half_in_dual));
    }

    #[test]
    fn dual_set_rejects_bad_profiles() {
        let a2 = models::component(ty(Family::A, 2), 1).unwrap().with_short_div(q(3));
        assert!(build_dual_set(&a2).is_err());
        let a1 = models::component(ty(Family::A, 1), 1).unwrap();
        assert!(matches!(build_dual_set(&a1), Err(Error::SubcaseRequired(_))));
    }

    #[test]
    fn report_serializes() {
        let c3 = models::component(ty(Family::C, 3), 1).unwrap();
        let json = serde_json::to_value(c3.report()).unwrap();
        assert_eq!(json["type"], "C");
        assert_eq!(json["rank"], 3);
        assert_eq!(json["roots"], 18);
        assert_eq!(json["modified_coxeter"], "5/1");
        assert!(json["subcase"].is_null());
    }
}
