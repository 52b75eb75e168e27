//! Exact integer and rational helpers shared by every module.
//!
//! Rationals are `num_rational::BigRational`; textual form is always `"p/q"`
//! (denominator printed even when it is 1), which is the wire format of all
//! JSON documents produced by the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type Z = BigInt;

pub fn q(n: i64) -> Q {
    Q::from_integer(Z::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(Z::from(n), Z::from(d))
}

/// Renders a rational as `p/q`.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q`, `p` or `-p/q`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Z = n.trim().parse().map_err(|_| bad())?;
            let d: Z = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn to_i64(x: &Q) -> Option<i64> {
    if is_integer(x) {
        x.numer().to_i64()
    } else {
        None
    }
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm_i64(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// gcd of a slice, 0 for an all-zero slice.
pub fn gcd_slice(xs: &[i64]) -> i64 {
    xs.iter().fold(0, |g, &x| g.gcd(&x))
}

/// Least common multiple of the denominators of `xs`.
pub fn common_denominator(xs: &[Q]) -> Z {
    xs.iter().fold(Z::one(), |l, x| l.lcm(x.denom()))
}

/// Number of positive divisors.
pub fn sigma0(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    (1..=n).filter(|d| n.is_multiple_of(*d)).count() as u64
}

/// Generalized binomial coefficient `binom(f, j)` for integer `f` (possibly
/// negative) and `j >= 0`.
pub fn binom(f: i64, j: u32) -> Z {
    let mut num = Z::one();
    let mut den = Z::one();
    for i in 0..j as i64 {
        num *= Z::from(f - i);
        den *= Z::from(i + 1);
    }
    num / den
}

pub type QMatrix = Vec<Vec<Q>>;

pub fn to_qmatrix(m: &[Vec<i64>]) -> QMatrix {
    m.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
}

pub fn identity_q(n: usize) -> QMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &QMatrix) -> QMatrix {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(a: &QMatrix, v: &[Q]) -> Vec<Q> {
    a.iter().map(|row| row.iter().zip(v).fold(Q::zero(), |s, (x, y)| s + x * y)).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + x * y)
}

/// Inverse by Gauss-Jordan elimination; `None` when singular.
pub fn inverse(a: &QMatrix) -> Option<QMatrix> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Rank of a rational matrix.
pub fn rank(a: &QMatrix) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let pr = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Integer determinant by fraction-free (Bareiss) elimination.
pub fn det_int(a: &[Vec<i64>]) -> Z {
    let n = a.len();
    if n == 0 {
        return Z::one();
    }
    let mut m: Vec<Vec<Z>> = a.iter().map(|r| r.iter().map(|&x| Z::from(x)).collect()).collect();
    let mut sign = 1i32;
    let mut prev = Z::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(p) => {
                    m.swap(k, p);
                    sign = -sign;
                }
                None => return Z::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Diagonal of the Smith normal form of an integer matrix (nonnegative,
/// each dividing the next, zeros last).
pub fn smith_diagonal(a: &[Vec<i64>]) -> Vec<Z> {
    let mut m: Vec<Vec<Z>> = a.iter().map(|r| r.iter().map(|&x| Z::from(x)).collect()).collect();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let f = m[i][t].div_floor(&m[t][t]);
                let pr = m[t].clone();
                for (x, y) in m[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
                if !m[i][t].is_zero() {
                    m.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let f = m[t][j].div_floor(&m[t][t]);
                for row in m.iter_mut() {
                    let v = &f * &row[t];
                    row[j] -= v;
                }
                if !m[t][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(t, j);
                    }
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // enforce divisibility of the remaining block by the pivot
            let piv = m[t][t].clone();
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&m[i][j] % &piv).is_zero());
            match offender {
                Some((i, _)) => {
                    let ri = m[i].clone();
                    for (x, y) in m[t].iter_mut().zip(&ri) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    while diag.len() < rows.min(cols) {
        diag.push(Z::zero());
    }
    diag
}

/// Rational LDL^T decomposition of a symmetric matrix. Returns the pivots
/// `d` and the unit upper-triangular `mu` with `Q(x) = sum_i d_i (x_i +
/// sum_{j>i} mu_ij x_j)^2`, or `None` if a zero pivot appears.
pub fn ldl(a: &QMatrix) -> Option<(Vec<Q>, QMatrix)> {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Vec::with_capacity(n);
    let mut mu = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        let p = m[i][i].clone();
        if p.is_zero() {
            return None;
        }
        for j in i + 1..n {
            mu[i][j] = &m[i][j] / &p;
        }
        for j in i + 1..n {
            for k in i + 1..n {
                let v = &mu[i][j] * &m[i][k];
                m[j][k] -= v;
            }
        }
        mu[i][i] = Q::one();
        d.push(p);
    }
    Some((d, mu))
}

/// Floor of a rational.
pub fn floor_q(x: &Q) -> Z {
    x.floor().to_integer()
}
