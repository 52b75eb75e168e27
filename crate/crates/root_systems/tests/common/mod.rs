#![allow(dead_code)]

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
