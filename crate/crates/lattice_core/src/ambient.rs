//! The ambient lattice `M = U + U + L(-1)` with basis `(e1, e2, L-basis, f2, f1)`,
//! `(e_i, f_i) = 1`, reflective vectors and Eichler transvections.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, q, QMatrix, Q, Z};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// A vector `(e1, e2, lambda, f2, f1)` of `M (x) Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmbientVector {
    pub e1: Q,
    pub e2: Q,
    pub lambda: Vec<Q>,
    pub f2: Q,
    pub f1: Q,
}

impl AmbientVector {
    pub fn new(e1: Q, e2: Q, lambda: Vec<Q>, f2: Q, f1: Q) -> Self {
        AmbientVector { e1, e2, lambda, f2, f1 }
    }

    pub fn from_ints(e1: i64, e2: i64, lambda: &[i64], f2: i64, f1: i64) -> Self {
        AmbientVector::new(q(e1), q(e2), lambda.iter().map(|&x| q(x)).collect(), q(f2), q(f1))
    }

    /// Flattened coordinates in the basis order `(e1, e2, L, f2, f1)`.
    pub fn coords(&self) -> Vec<Q> {
        let mut v = vec![self.e1.clone(), self.e2.clone()];
        v.extend(self.lambda.iter().cloned());
        v.push(self.f2.clone());
        v.push(self.f1.clone());
        v
    }

    pub fn from_coords(c: &[Q]) -> Self {
        let n = c.len() - 4;
        AmbientVector::new(c[0].clone(), c[1].clone(), c[2..2 + n].to_vec(), c[n + 2].clone(), c[n + 3].clone())
    }

    pub fn scale(&self, s: &Q) -> Self {
        AmbientVector::from_coords(&self.coords().iter().map(|x| x * s).collect::<Vec<_>>())
    }
}

/// Which half of the reflectivity criterion a vector satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflectivity {
    NotReflective,
    /// `div(r) = d` where `(r, r) = -2d`.
    DivD,
    /// `div(r) = 2d`.
    Div2D,
}

impl Reflectivity {
    pub fn is_reflective(self) -> bool {
        self != Reflectivity::NotReflective
    }
}

/// Heegner divisor label `H(lambda, m)`: `lambda` is a class of `M^v / M`
/// (coordinates reduced to `[0, 1)`), `m < 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorLabel {
    pub lambda: Vec<Q>,
    pub m: Q,
}

#[derive(Debug, Clone)]
pub struct AmbientLattice {
    pub l: Lattice,
}

impl AmbientLattice {
    pub fn new(l: Lattice) -> Self {
        AmbientLattice { l }
    }

    pub fn dim(&self) -> usize {
        self.l.rank() + 4
    }

    pub fn inner(&self, u: &AmbientVector, v: &AmbientVector) -> Q {
        &u.e1 * &v.f1 + &u.f1 * &v.e1 + &u.e2 * &v.f2 + &u.f2 * &v.e2 - self.l.inner(&u.lambda, &v.lambda)
    }

    pub fn norm(&self, v: &AmbientVector) -> Q {
        self.inner(v, v)
    }

    /// Gram matrix of `M` in the basis `(e1, e2, L, f2, f1)`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let n = self.l.rank();
        let dim = n + 4;
        let mut g = vec![vec![0i64; dim]; dim];
        g[0][dim - 1] = 1;
        g[dim - 1][0] = 1;
        g[1][dim - 2] = 1;
        g[dim - 2][1] = 1;
        for i in 0..n {
            for j in 0..n {
                g[2 + i][2 + j] = -self.l.gram()[i][j];
            }
        }
        g
    }

    fn integral_coords(&self, v: &AmbientVector) -> Result<Vec<i64>> {
        v.coords()
            .iter()
            .map(arith::to_i64)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Invalid("vector is not in M".into()))
    }

    /// Positive generator of `(v, M)` for `v` in `M`.
    pub fn div(&self, v: &AmbientVector) -> Result<i64> {
        let c = self.integral_coords(v)?;
        let g = self.gram();
        let pairings: Vec<i64> = g.iter().map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
        match arith::gcd_slice(&pairings) {
            0 => Err(Error::ZeroVector),
            d => Ok(d),
        }
    }

    pub fn is_primitive(&self, v: &AmbientVector) -> Result<bool> {
        Ok(arith::gcd_slice(&self.integral_coords(v)?) == 1)
    }

    /// Reflectivity of a primitive vector of negative norm.
    pub fn is_reflective(&self, r: &AmbientVector) -> Result<Reflectivity> {
        if !self.is_primitive(r)? {
            return Err(Error::Invalid("vector is not primitive".into()));
        }
        let norm = self.norm(r);
        if !norm.is_negative() {
            return Err(Error::Invalid("vector must have negative norm".into()));
        }
        let d = (-norm / q(2)).to_integer().to_i64().expect("small norm");
        let div = self.div(r)?;
        Ok(if div == d {
            Reflectivity::DivD
        } else if div == 2 * d {
            Reflectivity::Div2D
        } else {
            Reflectivity::NotReflective
        })
    }

    /// Reflection `x - 2 (r,x)/(r,r) r`.
    pub fn reflect(&self, x: &AmbientVector, r: &AmbientVector) -> Result<AmbientVector> {
        let rr = self.norm(r);
        if rr.is_zero() {
            return Err(Error::Isotropic);
        }
        let f = q(2) * self.inner(r, x) / rr;
        let c: Vec<Q> = x.coords().iter().zip(r.coords()).map(|(a, b)| a - &f * b).collect();
        Ok(AmbientVector::from_coords(&c))
    }

    /// Heegner label of the mirror of a reflective vector: `l / div(l)` mod
    /// `M` with `m = (l/div, l/div) / 2`.
    pub fn heegner_label(&self, l: &AmbientVector) -> Result<DivisorLabel> {
        if !self.is_reflective(l)?.is_reflective() {
            return Err(Error::Invalid("vector is not reflective".into()));
        }
        let div = self.div(l)?;
        let lam = l.scale(&Q::new(Z::one(), Z::from(div)));
        let m = self.norm(&lam) / q(2);
        let lambda = lam.coords().iter().map(|x| x - x.floor()).collect();
        Ok(DivisorLabel { lambda, m })
    }

    /// Matrix (columns = images of basis vectors) of the Eichler transvection
    /// `v -> v - (a,v) c + (c,v) a - (a,a)/2 (c,v) c`.
    pub fn eichler_transvection(&self, c: &AmbientVector, a: &AmbientVector) -> Result<QMatrix> {
        if !self.norm(c).is_zero() {
            return Err(Error::Invalid("c must be isotropic".into()));
        }
        if !self.inner(c, a).is_zero() {
            return Err(Error::Invalid("(c, a) must vanish".into()));
        }
        let dim = self.dim();
        let half_aa = self.norm(a) / q(2);
        let (cc, ac) = (c.coords(), a.coords());
        let mut cols = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut basis = vec![Q::zero(); dim];
            basis[k] = Q::one();
            let v = AmbientVector::from_coords(&basis);
            let av = self.inner(a, &v);
            let cv = self.inner(c, &v);
            let col: Vec<Q> =
                (0..dim).map(|i| &basis[i] - &av * &cc[i] + &cv * &ac[i] - &half_aa * &cv * &cc[i]).collect();
            cols.push(col);
        }
        Ok(arith::transpose(&cols))
    }

    /// `g^T G g == G`.
    pub fn preserves_form(&self, g: &QMatrix) -> bool {
        let gram = arith::to_qmatrix(&self.gram());
        arith::mat_mul(&arith::mat_mul(&arith::transpose(g), &gram), g) == gram
    }

    /// Whether `g` fixes every class of `M^v / M`.
    pub fn acts_trivially_on_discriminant(&self, g: &QMatrix) -> bool {
        let Some(inv) = arith::inverse(&arith::to_qmatrix(&self.gram())) else {
            return false;
        };
        let dual = arith::transpose(&inv);
        dual.iter().all(|x| {
            let gx = arith::mat_vec(g, x);
            gx.iter().zip(x).all(|(a, b)| arith::is_integer(&(a - b)))
        })
    }
}
