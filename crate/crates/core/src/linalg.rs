//! Dense linear algebra over F_p for the small matrices of the descent.

use crate::arith;

/// Reduced row echelon form of the span of `rows`, zero rows dropped.
pub fn rref(rows: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x % p).collect())
        .collect();
    let width = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = arith::inv_mod(m[rank][col], p).expect("nonzero pivot");
        for x in m[rank].iter_mut() {
            *x = arith::mul_mod(*x, inv, p);
        }
        let pivot = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if i != rank && f != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p - arith::mul_mod(f, y, p)) % p;
                }
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

pub fn rank(rows: &[Vec<u64>], p: u64) -> usize {
    rref(rows, p).len()
}

/// A basis (in reduced echelon form) of {x : Σ x_i rows_i = 0}.
pub fn left_kernel(rows: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    // Row-reduce [A | I]; rows whose A-part vanishes carry kernel vectors.
    let augmented: Vec<Vec<u64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v: Vec<u64> = r.iter().map(|&x| x % p).collect();
            v.extend((0..n).map(|j| u64::from(i == j)));
            v
        })
        .collect();
    let reduced = rref(&augmented, p);
    let kernel: Vec<Vec<u64>> = reduced
        .into_iter()
        .filter(|r| r[..width].iter().all(|&x| x == 0))
        .map(|r| r[width..].to_vec())
        .collect();
    rref(&kernel, p)
}
