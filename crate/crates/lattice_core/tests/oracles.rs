//! Worked values recomputed by independent means.

use lattice_core::ambient::{AmbientLattice, AmbientVector, Reflectivity};
use lattice_core::arith::{det_int, q, qr, sigma0, smith_diagonal, Q};
use lattice_core::lattice::{builtin, builtin_table, Lattice};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    if n == 0 {
        return vec![(vec![], 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        // insert n-1 at position i: sign flips once per element jumped over
        for i in 0..=p.len() {
            let mut p2 = p.clone();
            p2.insert(i, n - 1);
            let jumps = (p.len() - i) as i64;
            out.push((p2, if jumps % 2 == 0 { s } else { -s }));
        }
    }
    out
}

fn leibniz(m: &[Vec<i64>]) -> BigInt {
    permutations(m.len())
        .into_iter()
        .map(|(p, s)| {
            let prod: BigInt = p.iter().enumerate().map(|(i, &j)| BigInt::from(m[i][j])).product();
            prod * s
        })
        .sum()
}

#[test]
fn determinants_agree_with_leibniz() {
    for lat in builtin_table() {
        assert_eq!(lat.det(), leibniz(lat.gram()), "{}", lat.label());
        assert_eq!(det_int(lat.gram()), leibniz(lat.gram()));
    }
    assert_eq!(builtin("E8").unwrap().det(), BigInt::one());
}

#[test]
fn a2_dual_basis_by_adjugate() {
    let lat = builtin("A2").unwrap();
    let g = lat.gram();
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let adj = [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]];
    let dual = lat.dual_basis().unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(dual[i][j], qr(adj[i][j], det));
        }
    }
    assert_eq!(dual, vec![vec![qr(2, 3), qr(1, 3)], vec![qr(1, 3), qr(2, 3)]]);
}

/// Level as the least `N` with `N (x, x) / 2` and `N (x, y)` integral on
/// the dual basis, computed from the adjugate.
fn level_by_adjugate(lat: &Lattice) -> i64 {
    let n = lat.rank();
    let det = lat.det().to_i64().unwrap();
    // G^{-1} = adj / det; entry (i,j) is (x_i, x_j)
    let minor = |skip_r: usize, skip_c: usize| -> i64 {
        let m: Vec<Vec<i64>> = (0..n)
            .filter(|&r| r != skip_r)
            .map(|r| (0..n).filter(|&c| c != skip_c).map(|c| lat.gram()[r][c]).collect())
            .collect();
        leibniz(&m).to_i64().unwrap()
    };
    let inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| qr(if (i + j) % 2 == 0 { 1 } else { -1 } * minor(j, i), det)).collect())
        .collect();
    (1..=det.abs() * 2)
        .find(|&nn| {
            (0..n)
                .all(|i| (q(nn) * &inv[i][i] / q(2)).is_integer() && (0..n).all(|j| (q(nn) * &inv[i][j]).is_integer()))
        })
        .unwrap()
}

#[test]
fn discriminant_groups() {
    let a2 = builtin("A2").unwrap().discriminant_group().unwrap();
    assert_eq!(a2.elementary_divisors, vec![BigInt::from(3)]);
    assert_eq!(a2.level, BigInt::from(3));
    assert!(builtin("E8").unwrap().discriminant_group().unwrap().is_trivial());
    for lat in builtin_table().into_iter().filter(|l| l.rank() <= 7) {
        let dg = lat.discriminant_group().unwrap();
        assert_eq!(dg.order, lat.det().abs(), "{}", lat.label());
        let prod: BigInt = dg.elementary_divisors.iter().product();
        assert_eq!(prod, dg.order);
        assert_eq!(dg.level, BigInt::from(level_by_adjugate(&lat)), "{}", lat.label());
    }
}

#[test]
fn smith_form_of_two_by_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let m: Vec<Vec<i64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(-20..=20)).collect()).collect();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0 {
            continue;
        }
        let g = num_integer::gcd(num_integer::gcd(m[0][0], m[0][1]), num_integer::gcd(m[1][0], m[1][1]));
        let d = smith_diagonal(&m);
        assert_eq!(d, vec![BigInt::from(g), BigInt::from((det / g).abs())]);
    }
}

#[test]
fn divisor_count() {
    for n in 1..200u64 {
        assert_eq!(sigma0(n), (1..=n).filter(|d| n % d == 0).count() as u64);
    }
}

#[test]
fn ambient_root_of_a1() {
    let amb = AmbientLattice::new(builtin("A1").unwrap());
    let v = AmbientVector::from_ints(0, 0, &[1], 0, 0);
    assert_eq!(amb.norm(&v), q(-2));
    // div = gcd of the row G v
    let g = amb.gram();
    let row: Vec<i64> = (0..g.len()).map(|i| g[i][2]).collect();
    let div = row.iter().fold(0, |a, &b| num_integer::gcd(a, b));
    assert_eq!(amb.div(&v).unwrap(), div);
    assert_eq!(div, 2);
    assert_eq!(amb.is_reflective(&v).unwrap(), Reflectivity::Div2D);
}

#[test]
fn eichler_transvections() {
    let amb = AmbientLattice::new(builtin("A2").unwrap());
    let c = AmbientVector::from_ints(1, 0, &[0, 0], 0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let g = lattice_core::arith::to_qmatrix(&amb.gram());
    for _ in 0..20 {
        let l: Vec<i64> = (0..2).map(|_| rng.gen_range(-3..=3)).collect();
        let a = AmbientVector::from_ints(0, rng.gen_range(-3..=3), &l, rng.gen_range(-3..=3), 0);
        let t = amb.eichler_transvection(&c, &a).unwrap();
        // T^T G T == G by hand
        let dim = g.len();
        for i in 0..dim {
            for j in 0..dim {
                let mut s = Q::zero();
                for k in 0..dim {
                    for m in 0..dim {
                        s += &t[k][i] * &g[k][m] * &t[m][j];
                    }
                }
                assert_eq!(s, g[i][j]);
            }
        }
        assert!(amb.preserves_form(&t));
        assert!(amb.acts_trivially_on_discriminant(&t));
    }
}
