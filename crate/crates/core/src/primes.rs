//! Prime generation with an on-disk cache.
//!
//! The cache lives in `$SIDONBENCH_CACHE_DIR` (default: a `sidonbench-cache`
//! directory under the system temp dir) as little-endian `u32` values. Cache
//! failures are never fatal; the sieve result is returned regardless.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

pub const CACHE_ENV: &str = "SIDONBENCH_CACHE_DIR";
const CACHE_FILE: &str = "primes-u32le.bin";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sidonbench-cache"))
}

/// Upper bound for the `count`-th prime: `n (ln n + ln ln n)` for `n >= 6`.
fn nth_prime_bound(count: usize) -> usize {
    if count < 6 {
        return 15;
    }
    let n = count as f64;
    (n * (n.ln() + n.ln().ln())).ceil() as usize + 1
}

/// Primes below `limit`, segment by segment.
fn sieve_below(limit: usize) -> Vec<u32> {
    if limit < 3 {
        return Vec::new();
    }
    let root = (limit as f64).sqrt() as usize + 1;
    let mut small = vec![true; root + 1];
    small[0] = false;
    small[1] = false;
    let mut i = 2;
    while i * i <= root {
        if small[i] {
            (i * i..=root).step_by(i).for_each(|k| small[k] = false);
        }
        i += 1;
    }
    let base: Vec<usize> = (2..=root).filter(|&k| small[k]).collect();
    let mut out = Vec::with_capacity(limit / (limit as f64).ln().max(1.0) as usize + 16);
    const SEGMENT: usize = 1 << 18;
    let mut seg = vec![true; SEGMENT];
    let mut lo = 2;
    while lo < limit {
        let hi = (lo + SEGMENT).min(limit);
        seg[..hi - lo].iter_mut().for_each(|v| *v = true);
        for &p in &base {
            if p * p >= hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            (start..hi).step_by(p).for_each(|k| seg[k - lo] = false);
        }
        out.extend((lo..hi).filter(|&k| seg[k - lo]).map(|k| k as u32));
        lo = hi;
    }
    out
}

/// The first `count` primes, computed without touching the cache.
pub fn sieve_first(count: usize) -> Vec<u32> {
    let mut limit = nth_prime_bound(count);
    loop {
        let mut primes = sieve_below(limit);
        if primes.len() >= count {
            primes.truncate(count);
            return primes;
        }
        limit += limit / 2;
    }
}

fn read_cache() -> Option<Vec<u32>> {
    let bytes = fs::read(cache_dir().join(CACHE_FILE)).ok()?;
    if bytes.len() % 4 != 0 {
        return None;
    }
    let primes: Vec<u32> = bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    // cheap integrity check on the prefix
    (primes.first() == Some(&2) && primes.windows(2).all(|w| w[0] < w[1])).then_some(primes)
}

fn write_cache(primes: &[u32]) {
    let dir = cache_dir();
    if fs::create_dir_all(&dir).is_err() {
        return;
    }
    let tmp = dir.join(format!("{CACHE_FILE}.{}.tmp", std::process::id()));
    let ok = fs::File::create(&tmp).and_then(|mut f| {
        let mut buf = Vec::with_capacity(primes.len() * 4);
        primes.iter().for_each(|p| buf.extend_from_slice(&p.to_le_bytes()));
        f.write_all(&buf)
    });
    if ok.is_ok() {
        let _ = fs::rename(&tmp, dir.join(CACHE_FILE));
    } else {
        let _ = fs::remove_file(&tmp);
    }
}

/// The first `count` primes, served from the cache when it is long enough.
pub fn first_primes(count: usize) -> Vec<u32> {
    if let Some(mut cached) = read_cache() {
        if cached.len() >= count {
            cached.truncate(count);
            return cached;
        }
    }
    let primes = sieve_first(count);
    write_cache(&primes);
    primes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u32) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_primes() {
        assert_eq!(sieve_first(10), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(sieve_first(0).is_empty());
        assert_eq!(sieve_first(1), vec![2]);
    }

    #[test]
    fn agrees_with_trial_division() {
        let primes = sieve_first(5000);
        let direct: Vec<u32> = (2..).filter(|&k| is_prime(k)).take(5000).collect();
        assert_eq!(primes, direct);
    }

    #[test]
    fn known_values() {
        let primes = sieve_first(100_000);
        assert_eq!(primes[9_999], 104_729);
        assert_eq!(primes[99_999], 1_299_709);
    }
}
