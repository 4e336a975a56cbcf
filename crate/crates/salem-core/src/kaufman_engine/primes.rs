//! Prime windows `P_M = {p prime : M/2 < p ≤ M}` by a segmented sieve.

use crate::error::{Result, SalemError};

/// Primes up to `n` inclusive.
pub fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return vec![];
    }
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in `(lo, hi]`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi <= lo || hi < 2 {
        return vec![];
    }
    let start = (lo + 1).max(2);
    let len = (hi - start + 1) as usize;
    let mut comp = vec![false; len];
    for p in small_primes(hi.isqrt()) {
        let first = (p * p).max(start.div_ceil(p) * p);
        let mut j = first;
        while j <= hi {
            comp[(j - start) as usize] = true;
            j += p;
        }
    }
    comp.iter()
        .enumerate()
        .filter(|(_, c)| !**c)
        .map(|(i, _)| start + i as u64)
        .collect()
}

pub fn prime_window(m: u64) -> Result<Vec<u64>> {
    if m <= 2 {
        return Err(SalemError::invalid("prime window needs M > 2"));
    }
    Ok(primes_in(m / 2, m))
}

/// Members of `P_M` dividing `k`.
pub fn window_divisors(window: &[u64], k: u64) -> Vec<u64> {
    window.iter().copied().filter(|p| k % p == 0).collect()
}
