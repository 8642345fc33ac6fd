//! Plug-in (maximum-likelihood) entropy and mutual information in bits.
//!
//! Per-cell terms are summed in ascending value order so the result does not
//! depend on argument order: `mutual_information(x, y)` and
//! `mutual_information(y, x)` are bitwise equal, and `mutual_information(x, x)`
//! is bitwise equal to `entropy(x)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

const DENSE_LIMIT: usize = 1 << 12;

/// Values remapped to `0..k` (identity when already small).
fn densify(x: &[usize]) -> (Vec<usize>, usize) {
    let max = x.iter().copied().max().unwrap_or(0);
    if max < DENSE_LIMIT {
        return (x.to_vec(), max + 1);
    }
    let mut map = BTreeMap::new();
    for &v in x {
        let next = map.len();
        map.entry(v).or_insert(next);
    }
    (x.iter().map(|v| map[v]).collect(), map.len())
}

fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn counts(x: &[usize], k: usize) -> Vec<u64> {
    let mut c = vec![0u64; k];
    for &v in x {
        c[v] += 1;
    }
    c
}

pub fn entropy(x: &[usize]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (x, k) = densify(x);
    let n = x.len() as u64;
    let terms = counts(&x, k)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| (c as f64 / n as f64) * ((c * n) as f64 / (c * c) as f64).log2())
        .collect();
    canonical_sum(terms)
}

pub fn mutual_information(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("mutual information of empty vectors".into()));
    }
    let (x, kx) = densify(x);
    let (y, ky) = densify(y);
    let n = x.len() as u64;
    let cx = counts(&x, kx);
    let cy = counts(&y, ky);

    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    if kx * ky <= 1 << 20 {
        let mut table = vec![0u64; kx * ky];
        for (&a, &b) in x.iter().zip(&y) {
            table[a * ky + b] += 1;
        }
        for (i, &c) in table.iter().enumerate() {
            if c > 0 {
                joint.insert((i / ky, i % ky), c);
            }
        }
    } else {
        for (&a, &b) in x.iter().zip(&y) {
            *joint.entry((a, b)).or_default() += 1;
        }
    }

    let terms = joint
        .into_iter()
        .map(|((a, b), c)| (c as f64 / n as f64) * ((c * n) as f64 / (cx[a] * cy[b]) as f64).log2())
        .collect();
    Ok(canonical_sum(terms))
}
