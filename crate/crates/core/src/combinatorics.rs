//! Exact integer combinatorics shared by the audits and the bound calculators.

use crate::error::{Error, Result};

/// `C(n, r)`, zero when `r > n`. Panics on overflow; use [`checked_binomial`]
/// where the arguments are user controlled.
pub fn binomial(n: u64, r: u64) -> u128 {
    checked_binomial(n, r).expect("binomial overflow")
}

pub fn checked_binomial(n: u64, r: u64) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Binomial with a signed lower index; negative `r` gives zero.
pub fn binomial_signed(n: i64, r: i64) -> u128 {
    if n < 0 || r < 0 {
        return 0;
    }
    binomial(n as u64, r as u64)
}

pub fn factorial(n: u64) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, i| acc.checked_mul(i))
}

pub fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Number of unordered families of `count` pairwise-disjoint `size`-subsets of a
/// ground set with `ground` elements.
pub fn disjoint_families(ground: u64, size: u64, count: u64) -> Result<u128> {
    let mut remaining = ground;
    let mut acc: u128 = 1;
    for _ in 0..count {
        if remaining < size {
            return Ok(0);
        }
        acc = acc.checked_mul(binomial(remaining, size)).ok_or(Error::Overflow("disjoint block families"))?;
        remaining -= size;
    }
    let order = factorial(count).ok_or(Error::Overflow("disjoint block families"))?;
    Ok(acc / order)
}

/// Colex rank of a strictly increasing sequence.
pub fn colex_rank(sorted: &[u32]) -> u64 {
    sorted.iter().enumerate().map(|(i, &v)| binomial(v as u64, i as u64 + 1) as u64).sum()
}

/// Calls `f` with every `r`-subset of `items` (in lexicographic index order).
pub fn for_each_subset<T: Copy>(items: &[T], r: usize, mut f: impl FnMut(&[T])) {
    let n = items.len();
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        // advance the rightmost index that can still move
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..r {
            buf[j] = items[idx[j]];
        }
    }
}

/// Integer ceiling of a positive float that is robust to values sitting a few
/// ulps above an integer (`100f64.powf(0.5)` and friends).
pub fn robust_ceil(x: f64) -> u64 {
    let rounded = x.round();
    if (x - rounded).abs() <= 1e-9 * x.abs().max(1.0) {
        rounded as u64
    } else {
        x.ceil() as u64
    }
}
