//! Even lattices given by an integral Gram matrix on a fixed basis.
//!
//! Everything here is exact. Lattices are stored with their own sign (the
//! positive definite `L`); the `(-1)` twist used inside `2U + L(-1)` lives in
//! [`crate::ambient`].

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_slice, q, QMatrix, Q, Z};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    gram: Vec<Vec<i64>>,
    label: Option<String>,
}

/// A vector of `L (x) Q` in the lattice basis together with its norm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    pub coords: Vec<Q>,
    pub norm: Q,
}

impl LatticeVector {
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(arith::is_integer)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Integer coordinates, when integral and small enough.
    pub fn ints(&self) -> Option<Vec<i64>> {
        self.coords.iter().map(arith::to_i64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminantGroup {
    /// Invariant factors larger than one, each dividing the next.
    pub elementary_divisors: Vec<Z>,
    pub order: Z,
    pub level: Z,
}

impl DiscriminantGroup {
    pub fn is_trivial(&self) -> bool {
        self.elementary_divisors.is_empty()
    }

    /// Exponent of the group (largest invariant factor).
    pub fn exponent(&self) -> Z {
        self.elementary_divisors.last().cloned().unwrap_or_else(Z::one)
    }
}

impl fmt::Display for DiscriminantGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.elementary_divisors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// On-disk lattice description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFile {
    #[serde(default)]
    pub label: String,
    pub gram: Vec<Vec<i64>>,
}

impl Lattice {
    pub fn new(gram: Vec<Vec<i64>>, label: Option<String>) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return Err(Error::Invalid("empty gram matrix".into()));
        }
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!("row {i} has length {}, expected {n}", row.len())));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::NotSymmetric { i, j, a: gram[i][j], b: gram[j][i] });
                }
            }
        }
        if arith::det_int(&gram).is_zero() {
            return Err(Error::DegenerateLattice);
        }
        Ok(Lattice { gram, label })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LatticeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let label = if file.label.is_empty() { None } else { Some(file.label) };
        Lattice::new(file.gram, label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&LatticeFile { label: self.label().to_string(), gram: self.gram.clone() })
            .expect("lattice serializes")
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn gram_q(&self) -> QMatrix {
        arith::to_qmatrix(&self.gram)
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or("L")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[i][i] % 2 == 0)
    }

    pub fn det(&self) -> Z {
        arith::det_int(&self.gram)
    }

    pub fn is_positive_definite(&self) -> bool {
        match arith::ldl(&self.gram_q()) {
            Some((d, _)) => d.iter().all(|x| x.is_positive()),
            None => false,
        }
    }

    pub fn vector(&self, coords: Vec<Q>) -> LatticeVector {
        let norm = self.inner(&coords, &coords);
        LatticeVector { coords, norm }
    }

    pub fn vector_i(&self, coords: &[i64]) -> LatticeVector {
        self.vector(coords.iter().map(|&x| q(x)).collect())
    }

    pub fn inner(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = Q::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                let g = self.gram[i][j];
                if g != 0 && !yj.is_zero() {
                    s += xi * yj * Z::from(g);
                }
            }
        }
        s
    }

    pub fn inner_i(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..y.len() {
                s += x[i] * self.gram[i][j] * y[j];
            }
        }
        s
    }

    /// `G * coords`: the pairings of a vector with the basis.
    pub fn pairings(&self, coords: &[Q]) -> Vec<Q> {
        self.gram.iter().map(|row| row.iter().zip(coords).fold(Q::zero(), |s, (&g, c)| s + c * Z::from(g))).collect()
    }

    /// Whether `coords` lies in the dual lattice (all pairings integral).
    pub fn in_dual(&self, coords: &[Q]) -> bool {
        self.pairings(coords).iter().all(arith::is_integer)
    }

    /// Coordinates of the dual basis: the inverse Gram matrix.
    pub fn dual_basis(&self) -> Result<QMatrix> {
        arith::inverse(&self.gram_q()).ok_or(Error::DegenerateLattice)
    }

    pub fn discriminant_group(&self) -> Result<DiscriminantGroup> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::DegenerateLattice);
        }
        let elementary_divisors: Vec<Z> =
            arith::smith_diagonal(&self.gram).into_iter().filter(|d| *d > Z::one()).collect();
        let order = det.abs();
        let inv = self.dual_basis()?;
        // N (x,x) in 2Z for every dual vector x  <=>  N g_ii / 2 and N g_ij integral
        let mut level = Z::one();
        for i in 0..self.rank() {
            for j in i..self.rank() {
                let v = if i == j { &inv[i][i] / q(2) } else { inv[i][j].clone() };
                level = num_integer::Integer::lcm(&level, v.denom());
            }
        }
        Ok(DiscriminantGroup { elementary_divisors, order, level })
    }

    /// Positive generator of the ideal `(v, L)`.
    pub fn div(&self, v: &LatticeVector) -> Result<i64> {
        let ints = v.ints().ok_or_else(|| Error::Invalid("div needs an integral vector".into()))?;
        self.div_i(&ints)
    }

    pub fn div_i(&self, v: &[i64]) -> Result<i64> {
        let pairings: Vec<i64> = self.gram.iter().map(|row| row.iter().zip(v).map(|(g, x)| g * x).sum()).collect();
        let g = gcd_slice(&pairings);
        if g == 0 {
            return Err(Error::ZeroVector);
        }
        Ok(g)
    }

    pub fn rescale(&self, a: i64) -> Result<Lattice> {
        if a == 0 {
            return Err(Error::ZeroScale);
        }
        let gram = self.gram.iter().map(|r| r.iter().map(|x| x * a).collect()).collect();
        Ok(Lattice { gram, label: Some(format!("{}({a})", self.label())) })
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let (n, m) = (self.rank(), other.rank());
        let mut gram = vec![vec![0; n + m]; n + m];
        for i in 0..n {
            gram[i][..n].copy_from_slice(&self.gram[i]);
        }
        for i in 0..m {
            gram[n + i][n..].copy_from_slice(&other.gram[i]);
        }
        Lattice { gram, label: Some(format!("{}+{}", self.label(), other.label())) }
    }

    /// All nonzero integral vectors of norm at most `max_norm`, both signs,
    /// sorted lexicographically by coordinates.
    pub fn short_vectors(&self, max_norm: i64) -> Result<Vec<LatticeVector>> {
        Ok(self
            .short_vectors_i(max_norm)?
            .into_iter()
            .map(|c| {
                let norm = q(self.inner_i(&c, &c));
                LatticeVector { coords: c.into_iter().map(q).collect(), norm }
            })
            .collect())
    }

    pub fn short_vectors_i(&self, max_norm: i64) -> Result<Vec<Vec<i64>>> {
        if max_norm <= 0 {
            return Err(Error::Invalid("max_norm must be positive".into()));
        }
        let (d, mu) = arith::ldl(&self.gram_q()).ok_or(Error::NotPositiveDefinite)?;
        if d.iter().any(|x| !x.is_positive()) {
            return Err(Error::NotPositiveDefinite);
        }
        let n = self.rank();
        let inv = self.dual_basis()?;
        // coordinate box: x_i^2 <= (G^-1)_ii * max_norm
        let bounds: Vec<i64> = (0..n)
            .map(|i| {
                let b2 = &inv[i][i] * q(max_norm);
                let mut b = 0i64;
                while q((b + 1) * (b + 1)) <= b2 {
                    b += 1;
                }
                b
            })
            .collect();
        let mut out = Vec::new();
        let mut x = vec![0i64; n];
        enumerate(n, &d, &mu, &bounds, &q(max_norm), Q::zero(), &mut x, &mut out);
        out.retain(|v| v.iter().any(|&c| c != 0));
        out.sort();
        Ok(out)
    }

    /// Reflection of `x` in the hyperplane orthogonal to `r`.
    pub fn reflect(&self, x: &LatticeVector, r: &LatticeVector) -> Result<LatticeVector> {
        if r.norm.is_zero() {
            return Err(Error::Isotropic);
        }
        let f = q(2) * self.inner(&r.coords, &x.coords) / &r.norm;
        let coords = x.coords.iter().zip(&r.coords).map(|(a, b)| a - &f * b).collect();
        Ok(self.vector(coords))
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    level: usize,
    d: &[Q],
    mu: &QMatrix,
    bounds: &[i64],
    max: &Q,
    partial: Q,
    x: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if level == 0 {
        out.push(x.clone());
        return;
    }
    let i = level - 1;
    let n = x.len();
    let mut center = Q::zero();
    for j in i + 1..n {
        if x[j] != 0 {
            center -= &mu[i][j] * Z::from(x[j]);
        }
    }
    let budget = max - &partial;
    let cost = |xi: i64| -> Q {
        let y = q(xi) - &center;
        &d[i] * &y * &y
    };
    let start = arith::floor_q(&center).to_i64().expect("small center");
    // walk down from floor(center), then up from floor(center)+1
    let mut xi = start;
    while xi >= -bounds[i] {
        let c = cost(xi);
        if c > budget {
            break;
        }
        if xi <= bounds[i] {
            x[i] = xi;
            enumerate(i, d, mu, bounds, max, &partial + c, x, out);
        }
        xi -= 1;
    }
    let mut xi = start + 1;
    while xi <= bounds[i] {
        let c = cost(xi);
        if c > budget {
            break;
        }
        if xi >= -bounds[i] {
            x[i] = xi;
            enumerate(i, d, mu, bounds, max, &partial + c, x, out);
        }
        xi += 1;
    }
    x[i] = 0;
}

/// Cartan-type Gram matrices of the simply laced root lattices.
pub fn cartan(kind: char, n: usize) -> Result<Vec<Vec<i64>>> {
    let mut g = vec![vec![0i64; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |a: usize, b: usize| {
        g[a][b] = -1;
        g[b][a] = -1;
    };
    match (kind, n) {
        ('A', n) if n >= 1 => {
            for i in 1..n {
                link(i - 1, i);
            }
        }
        ('D', n) if n >= 3 => {
            for i in 1..n - 1 {
                link(i - 1, i);
            }
            link(n - 3, n - 1);
        }
        ('E', 6..=8) => {
            // Bourbaki numbering: 1-3-4-5-6(-7-8), with 2 attached to 4
            let chain = [0usize, 2, 3, 4, 5, 6, 7];
            for w in chain[..n - 1].windows(2) {
                link(w[0], w[1]);
            }
            link(1, 3);
        }
        _ => return Err(Error::Invalid(format!("no Cartan matrix for {kind}{n}"))),
    }
    Ok(g)
}

/// Built-in lattice by name: `A1`..`A10`, `D3`..`D10`, `E6`, `E7`, `E8`,
/// `nA1` (= 2 I_n), multiples `kX` as direct sums and rescalings `X(a)`.
pub fn builtin(name: &str) -> Result<Lattice> {
    let name = name.trim();
    let unknown = || Error::Invalid(format!("unknown built-in lattice {name:?}"));
    if let Some(open) = name.find('(') {
        let inner = name[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
        let a: i64 = inner.trim().parse().map_err(|_| unknown())?;
        return Ok(builtin(&name[..open])?.rescale(a)?.with_label(name));
    }
    let digits: String = name.chars().take_while(|c| c.is_ascii_digit()).collect();
    if !digits.is_empty() {
        let k: usize = digits.parse().map_err(|_| unknown())?;
        let base = builtin(&name[digits.len()..])?;
        if k == 0 || k * base.rank() > 10 {
            return Err(unknown());
        }
        let mut out = base.clone();
        for _ in 1..k {
            out = out.direct_sum(&base);
        }
        return Ok(out.with_label(name));
    }
    let mut chars = name.chars();
    let kind = chars.next().ok_or_else(unknown)?;
    let n: usize = chars.as_str().parse().map_err(|_| unknown())?;
    if n > 10 {
        return Err(unknown());
    }
    let gram = cartan(kind, n).map_err(|_| unknown())?;
    Lattice::new(gram, Some(name.to_string()))
}

/// Resolves a lattice reference: `builtin:NAME` or a path to a JSON file.
pub fn resolve_ref(r: &str) -> Result<Lattice> {
    if let Some(name) = r.strip_prefix("builtin:") {
        return builtin(name);
    }
    let text = std::fs::read_to_string(r)?;
    Lattice::from_json(&text)
}

/// A lattice embedded in a JSON document, either as a reference string or
/// as an inline `{"label", "gram"}` object.
pub fn from_value(v: &serde_json::Value) -> Result<Lattice> {
    match v {
        serde_json::Value::String(s) => resolve_ref(s),
        serde_json::Value::Object(_) => {
            let file: LatticeFile = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
            let label = if file.label.is_empty() { None } else { Some(file.label) };
            Lattice::new(file.gram, label)
        }
        _ => Err(Error::Parse("lattice must be a reference string or an object".into())),
    }
}

/// The lattice table exercised by tests and the classifier.
pub fn builtin_table() -> Vec<Lattice> {
    let mut names: Vec<String> = (1..=8).map(|n| format!("A{n}")).collect();
    names.extend((4..=8).map(|n| format!("D{n}")));
    names.extend(["E6", "E7", "E8"].map(String::from));
    names.extend((2..=8).map(|n| format!("{n}A1")));
    names.iter().map(|n| builtin(n).expect("built-in")).collect()
}
