//! Reference computations shared by the integration tests.
#![allow(dead_code)]

use pac_core::codec::encode;
use pac_core::{CodeSpec, FrozenSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn kronecker(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    for _ in 0..n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = g[i][j];
                next[m + i][j] = g[i][j];
                next[m + i][m + j] = g[i][j];
            }
        }
        g = next;
    }
    g
}

pub fn toeplitz(len: usize, taps: &[u8]) -> Vec<Vec<u8>> {
    let mut t = vec![vec![0u8; len]; len];
    for (i, row) in t.iter_mut().enumerate() {
        for (d, &g) in taps.iter().enumerate() {
            if i + d < len {
                row[i + d] = g;
            }
        }
    }
    t
}

pub fn vec_mat(v: &[u8], m: &[Vec<u8>]) -> Vec<u8> {
    let mut out = vec![0u8; m[0].len()];
    for (&vi, row) in v.iter().zip(m) {
        if vi == 1 {
            out.iter_mut().zip(row).for_each(|(o, &r)| *o ^= r);
        }
    }
    out
}

pub fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..=1)).collect()
}

pub fn bits_of(word: u64, len: usize) -> Vec<u8> {
    (0..len).map(|j| ((word >> j) & 1) as u8).collect()
}

pub fn weight(c: &[u8]) -> usize {
    c.iter().filter(|&&b| b == 1).count()
}

pub fn enumerate_code(spec: &CodeSpec) -> Vec<Vec<u8>> {
    (0..1u64 << spec.k()).map(|w| encode(&bits_of(w, spec.k()), spec).unwrap()).collect()
}

pub fn enumerator(spec: &CodeSpec) -> BTreeMap<usize, u64> {
    let mut m = BTreeMap::new();
    for c in enumerate_code(spec) {
        let w = weight(&c);
        if w > 0 {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Systematic polar encoding by linear algebra: find `v` with `v_F = 0`
/// and `(v·G)_A = m`, i.e. solve `v_A · G[A][A] = m` over GF(2).
pub fn systematic_polar_reference(msg: &[u8], frozen: &FrozenSet) -> Vec<u8> {
    let len = frozen.len();
    let g = kronecker(len.trailing_zeros() as usize);
    let a: Vec<usize> = frozen.info_indices().collect();
    let k = a.len();
    // Augmented system M^T x = m where M = G[A][A].
    let mut rows: Vec<Vec<u8>> = (0..k)
        .map(|c| {
            let mut r: Vec<u8> = a.iter().map(|&ri| g[ri][a[c]]).collect();
            r.push(msg[c]);
            r
        })
        .collect();
    for col in 0..k {
        let p = (col..k).find(|&r| rows[r][col] == 1).expect("G[A][A] is invertible");
        rows.swap(col, p);
        for r in 0..k {
            if r != col && rows[r][col] == 1 {
                let src = rows[col].clone();
                rows[r].iter_mut().zip(&src).for_each(|(x, &y)| *x ^= y);
            }
        }
    }
    let mut v = vec![0u8; len];
    for (j, &i) in a.iter().enumerate() {
        v[i] = rows[j][k];
    }
    vec_mat(&v, &g)
}
