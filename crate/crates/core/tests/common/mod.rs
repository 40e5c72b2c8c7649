//! Helpers shared by the integration tests: plain prime-field arithmetic
//! on `i64` rows (independent of the library) and fixture loading.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use msr_core::{parse_document, CodeDocument};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> CodeDocument {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse_document(&text).expect("fixture parses")
}

fn inv_mod(a: i64, p: i64) -> i64 {
    let mut r = 1;
    let (mut b, mut e) = (a.rem_euclid(p), p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Reduced row echelon form modulo a prime, with zero rows dropped.
pub fn rref_mod(rows: &[Vec<i64>], p: i64) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(|v| v.rem_euclid(p)).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut lead = 0;
    for c in 0..cols {
        let Some(pivot) = (lead..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(lead, pivot);
        let inv = inv_mod(m[lead][c], p);
        for v in m[lead].iter_mut() {
            *v = *v * inv % p;
        }
        for r in 0..m.len() {
            if r != lead && m[r][c] != 0 {
                let f = m[r][c];
                let pivot_row = m[lead].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v = (*v - f * pv).rem_euclid(p);
                }
            }
        }
        lead += 1;
    }
    m.truncate(lead);
    m
}

pub fn rank_mod(rows: &[Vec<i64>], p: i64) -> usize {
    rref_mod(rows, p).len()
}

/// Row vector times matrix modulo `p`.
pub fn vec_mat(v: &[i64], m: &[Vec<i64>], p: i64) -> Vec<i64> {
    let cols = m[0].len();
    (0..cols)
        .map(|c| {
            v.iter()
                .zip(m)
                .map(|(a, row)| a * row[c])
                .sum::<i64>()
                .rem_euclid(p)
        })
        .collect()
}

/// Gaussian binomial coefficient: number of `k`-dimensional subspaces of
/// an `n`-dimensional space over GF(q).
pub fn gaussian_binomial(n: u32, k: u32, q: u128) -> u128 {
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}

/// Every `rows x cols` matrix over GF(p), row-major counter order.
pub fn all_matrices(rows: usize, cols: usize, p: i64) -> impl Iterator<Item = Vec<Vec<i64>>> {
    let cells = rows * cols;
    (0..(p as u64).pow(cells as u32)).map(move |mut code| {
        let mut m = vec![vec![0; cols]; rows];
        for cell in (0..cells).rev() {
            m[cell / cols][cell % cols] = (code % p as u64) as i64;
            code /= p as u64;
        }
        m
    })
}

/// One representative per scalar class of nonzero vectors in GF(p)^2.
pub fn projective_line(p: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0, 1]];
    out.extend((0..p).map(|x| vec![1, x]));
    out
}

/// Storage of node `i` (1-based) for base `a`: every column shifted
/// `i - 1` places to the right, cyclically over the first `n` columns.
fn shifted(a: &[Vec<i64>], shift: usize, n: usize) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| {
            let mut out = row.clone();
            for c in 0..n {
                out[(c + shift) % n] = row[c];
            }
            out
        })
        .collect()
}

/// Reduction-free search for rotationally symmetric (4,2) codes: every
/// raw 2x4 matrix `A`, every projective triple of transmission vectors,
/// full independence over all node pairs and recovery at every node.
/// Returns the RREF forms of the bases that admit a working code.
pub fn brute_force_four_two(p: i64) -> BTreeSet<Vec<Vec<i64>>> {
    let n = 4;
    let line = projective_line(p);
    let mut working = BTreeSet::new();
    for a in all_matrices(2, 4, p) {
        let storage: Vec<Vec<Vec<i64>>> = (0..n).map(|s| shifted(&a, s, n)).collect();
        let independent = (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let mut stack = storage[i].clone();
                stack.extend(storage[j].iter().cloned());
                rank_mod(&stack, p) == 4
            })
        });
        if !independent {
            continue;
        }
        let mut found = false;
        'triples: for b1 in &line {
            for b2 in &line {
                for b3 in &line {
                    let bs = [b1, b2, b3];
                    let ok = (1..=n).all(|j| {
                        let stack: Vec<Vec<i64>> = (1..=n)
                            .filter(|&i| i != j)
                            .map(|i| {
                                let t = (i + n - j) % n;
                                vec_mat(bs[t - 1], &storage[i - 1], p)
                            })
                            .collect();
                        let mut with_target = stack.clone();
                        with_target.extend(storage[j - 1].iter().cloned());
                        rank_mod(&with_target, p) == rank_mod(&stack, p)
                    });
                    if ok {
                        found = true;
                        break 'triples;
                    }
                }
            }
        }
        if found {
            working.insert(rref_mod(&a, p));
        }
    }
    working
}
