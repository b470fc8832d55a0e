//! Index families on `Z^n`, `N_0^n` and subsets of `[N]`.
//!
//! All families come out in graded-lexicographic order: first by order
//! `|alpha| = sum |alpha_j|` (resp. cardinality for subsets), then
//! lexicographically ascending on the entry vector (resp. on the sorted
//! element list). For signed indices the order is `sum |alpha_j|`, so the
//! trigonometric family `TSet(m, n)` is the closed l1-ball of radius `m`.
//!
//! Counts are exact big integers; floating point only appears in roots and
//! in the constants of the binomial/Stirling bounds.

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Integer exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `sum |alpha_j|`.
    pub fn order(&self) -> u32 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }

    pub fn is_analytic(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }

    /// 0/1 indicator vector of a subset mask.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        MultiIndex((0..n).map(|j| ((mask >> j) & 1) as i32).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Graded-lexicographic comparison of subset bitmasks.
pub fn subset_cmp(a: u64, b: u64) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        let ea = mask_elements(a);
        let eb = mask_elements(b);
        ea.cmp(&eb)
    })
}

/// Zero-based elements of a mask, ascending.
pub fn mask_elements(mask: u64) -> Vec<u32> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros());
        m &= m - 1;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FamilyKind {
    /// `alpha in N_0^n`, `|alpha| <= m`.
    LambdaLE,
    /// `alpha in N_0^n`, `|alpha| = m`.
    LambdaEQ,
    /// `alpha in Z^n`, `sum |alpha_j| <= m`.
    TSet,
    /// `S subset [N]`, `|S| <= d`.
    SubsetsLE,
    /// `S subset [N]`, `|S| = d`.
    SubsetsEQ,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::LambdaLE => "lambda-le",
            FamilyKind::LambdaEQ => "lambda-eq",
            FamilyKind::TSet => "t-set",
            FamilyKind::SubsetsLE => "subsets-le",
            FamilyKind::SubsetsEQ => "subsets-eq",
        }
    }

    pub fn is_subsets(self) -> bool {
        matches!(self, FamilyKind::SubsetsLE | FamilyKind::SubsetsEQ)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lambda-le" | "lambdale" | "le" => Ok(FamilyKind::LambdaLE),
            "lambda-eq" | "lambdaeq" | "eq" => Ok(FamilyKind::LambdaEQ),
            "t-set" | "tset" | "t" => Ok(FamilyKind::TSet),
            "subsets-le" | "subsetsle" => Ok(FamilyKind::SubsetsLE),
            "subsets-eq" | "subsetseq" => Ok(FamilyKind::SubsetsEQ),
            other => Err(invalid(format!("unknown family kind `{other}` (expected lambda-le, lambda-eq, t-set, subsets-le, subsets-eq)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Members {
    Multi(Vec<MultiIndex>),
    Subsets(Vec<u64>),
}

/// A finite index family in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexFamily {
    pub kind: FamilyKind,
    /// Degree bound `m` (or subset size bound `d`).
    pub degree: usize,
    /// Ambient dimension `n` (or `N`).
    pub dim: usize,
    pub members: Members,
}

impl IndexFamily {
    pub fn len(&self) -> usize {
        match &self.members {
            Members::Multi(v) => v.len(),
            Members::Subsets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_indices(&self) -> Option<&[MultiIndex]> {
        match &self.members {
            Members::Multi(v) => Some(v),
            Members::Subsets(_) => None,
        }
    }

    pub fn subsets(&self) -> Option<&[u64]> {
        match &self.members {
            Members::Subsets(v) => Some(v),
            Members::Multi(_) => None,
        }
    }

    /// True when members are strictly increasing in canonical order.
    pub fn is_canonically_sorted(&self) -> bool {
        match &self.members {
            Members::Multi(v) => v.windows(2).all(|w| w[0] < w[1]),
            Members::Subsets(v) => v.windows(2).all(|w| subset_cmp(w[0], w[1]) == Ordering::Less),
        }
    }

    /// Line format: header `kind m n count`, then one index per line.
    /// Subsets are written as their 0/1 indicator vectors.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {} {}", self.kind, self.degree, self.dim, self.len())?;
        match &self.members {
            Members::Multi(v) => {
                for a in v {
                    writeln!(w, "{a}")?;
                }
            }
            Members::Subsets(v) => {
                for &s in v {
                    writeln!(w, "{}", MultiIndex::from_mask(s, self.dim))?;
                }
            }
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Parse { line: 1, msg: "header must be `kind m n count`".into() });
        }
        let perr = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
        let kind: FamilyKind = parts[0].parse()?;
        let degree: usize = parts[1].parse().map_err(|_| perr("bad m"))?;
        let dim: usize = parts[2].parse().map_err(|_| perr("bad n"))?;
        let count: usize = parts[3].parse().map_err(|_| perr("bad count"))?;
        let mut multi = Vec::with_capacity(count);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entries: std::result::Result<Vec<i32>, _> = line.split_whitespace().map(str::parse).collect();
            let entries = entries.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            if entries.len() != dim {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {dim} entries, got {}", entries.len()) });
            }
            multi.push(MultiIndex(entries));
        }
        if multi.len() != count {
            return Err(Error::Parse { line: 1, msg: format!("header announces {count} members, found {}", multi.len()) });
        }
        let members = if kind.is_subsets() {
            let masks =
                multi.iter().map(|a| a.entries().iter().enumerate().fold(0u64, |acc, (j, &e)| acc | ((e as u64 & 1) << j))).collect();
            Members::Subsets(masks)
        } else {
            Members::Multi(multi)
        };
        Ok(IndexFamily { kind, degree, dim, members })
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Exact number of indices of order exactly `k` in the family's ambient set.
fn count_grade(kind: FamilyKind, k: u64, n: u64) -> BigUint {
    match kind {
        FamilyKind::LambdaLE | FamilyKind::LambdaEQ => {
            if n == 0 {
                return if k == 0 { BigUint::one() } else { BigUint::zero() };
            }
            binomial(k + n - 1, k)
        }
        FamilyKind::TSet => {
            if k == 0 {
                return BigUint::one();
            }
            // choose j nonzero coordinates, a composition of k into j parts, and signs
            (1..=n.min(k)).fold(BigUint::zero(), |acc, j| acc + (BigUint::one() << j as usize) * binomial(n, j) * binomial(k - 1, j - 1))
        }
        FamilyKind::SubsetsLE | FamilyKind::SubsetsEQ => binomial(n, k),
    }
}

/// Exact cardinality of the family, from binomial-sum formulas.
pub fn count_exact(kind: FamilyKind, m: usize, n: usize) -> BigUint {
    let (m, n) = (m as u64, n as u64);
    match kind {
        FamilyKind::LambdaEQ | FamilyKind::SubsetsEQ => count_grade(kind, m, n),
        FamilyKind::LambdaLE | FamilyKind::TSet | FamilyKind::SubsetsLE => {
            (0..=m).fold(BigUint::zero(), |acc, k| acc + count_grade(kind, k, n))
        }
    }
}

pub fn enumerate(kind: FamilyKind, m: usize, n: usize) -> Result<IndexFamily> {
    enumerate_with_cap(kind, m, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_with_cap(kind: FamilyKind, m: usize, n: usize, cap: u64) -> Result<IndexFamily> {
    if n == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if kind.is_subsets() && n > 64 {
        return Err(invalid("subset families support N <= 64"));
    }
    let count = count_exact(kind, m, n);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded { what: "enumerate", count, cap });
    }
    let count = count.to_usize().unwrap_or(usize::MAX);
    let members = match kind {
        FamilyKind::LambdaEQ => {
            let mut out = Vec::with_capacity(count);
            push_analytic_grade(m as u32, n, &mut out);
            Members::Multi(out)
        }
        FamilyKind::LambdaLE => {
            let mut out = Vec::with_capacity(count);
            for k in 0..=m as u32 {
                push_analytic_grade(k, n, &mut out);
            }
            Members::Multi(out)
        }
        FamilyKind::TSet => {
            let mut out = Vec::with_capacity(count);
            for k in 0..=m as u32 {
                push_signed_grade(k, n, &mut out);
            }
            Members::Multi(out)
        }
        FamilyKind::SubsetsEQ => {
            let mut out = Vec::with_capacity(count);
            push_subsets(m.min(n), n, &mut out);
            if m > n {
                out.clear();
            }
            Members::Subsets(out)
        }
        FamilyKind::SubsetsLE => {
            let mut out = Vec::with_capacity(count);
            for k in 0..=m.min(n) {
                push_subsets(k, n, &mut out);
            }
            Members::Subsets(out)
        }
    };
    Ok(IndexFamily { kind, degree: m, dim: n, members })
}

fn push_analytic_grade(k: u32, n: usize, out: &mut Vec<MultiIndex>) {
    fn rec(pos: usize, remaining: i32, cur: &mut Vec<i32>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            cur[pos] = remaining;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for v in 0..=remaining {
            cur[pos] = v;
            rec(pos + 1, remaining - v, cur, out);
        }
    }
    let mut cur = vec![0; n];
    rec(0, k as i32, &mut cur, out);
}

fn push_signed_grade(k: u32, n: usize, out: &mut Vec<MultiIndex>) {
    fn rec(pos: usize, remaining: i32, cur: &mut Vec<i32>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == cur.len() {
            if remaining == 0 {
                cur[pos] = 0;
                out.push(MultiIndex(cur.clone()));
            } else {
                for v in [-remaining, remaining] {
                    cur[pos] = v;
                    out.push(MultiIndex(cur.clone()));
                }
            }
            return;
        }
        for v in -remaining..=remaining {
            cur[pos] = v;
            rec(pos + 1, remaining - v.abs(), cur, out);
        }
    }
    let mut cur = vec![0; n];
    rec(0, k as i32, &mut cur, out);
}

fn push_subsets(k: usize, n: usize, out: &mut Vec<u64>) {
    fn rec(start: usize, left: usize, n: usize, mask: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for j in start..=(n - left) {
            rec(j + 1, left - 1, n, mask | (1u64 << j), out);
        }
    }
    if k <= n {
        rec(0, k, n, 0, out);
    }
}

/// Root bracket for `|Lambda_le(m, n)|^(1/(2m))`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CountCertificate {
    pub kind: FamilyKind,
    pub m: usize,
    pub n: usize,
    #[serde(serialize_with = "ser_biguint")]
    pub exact_count: BigUint,
    pub lower_bound: f64,
    pub mid: f64,
    pub upper_bound: f64,
    /// Lower side checked in exact integer arithmetic: `(m+n-1)^m <= count * m^m`.
    pub lower_exact: bool,
}

fn ser_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Natural log of a big integer, accurate well beyond f64 range.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().map(f64::ln).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top = (v >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn surprise_certificate(m: usize, n: usize) -> Result<CountCertificate> {
    if m == 0 || n == 0 {
        return Err(invalid("surprise_certificate requires m, n >= 1"));
    }
    let count = count_exact(FamilyKind::LambdaLE, m, n);
    let ratio = 1.0 + (n as f64 - 1.0) / m as f64;
    let lower = ratio.sqrt();
    let upper = 2.0 * (2.0 * std::f64::consts::E).sqrt() * lower;
    let mid = (ln_biguint(&count) / (2.0 * m as f64)).exp();

    let lhs = BigUint::from((m + n - 1) as u64).pow(m as u32);
    let rhs = &count * BigUint::from(m as u64).pow(m as u32);
    let lower_exact = lhs <= rhs;
    if !lower_exact {
        return Err(Error::CertificateViolated { side: "lower", detail: format!("(m+n-1)^m > |Lambda|*m^m at m={m}, n={n}") });
    }
    const SLACK: f64 = 1e-12;
    if mid > upper * (1.0 + SLACK) {
        return Err(Error::CertificateViolated { side: "upper", detail: format!("{mid} > {upper} at m={m}, n={n}") });
    }
    Ok(CountCertificate { kind: FamilyKind::LambdaLE, m, n, exact_count: count, lower_bound: lower, mid, upper_bound: upper, lower_exact })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `(N/k)^k <= C(N, k)`, decided as `N^k <= C(N,k) k^k` over the integers.
pub fn binomial_bounds_check(n: u64, k: u64) -> Result<BoundReport> {
    if k == 0 || k > n {
        return Err(invalid("binomial bound requires 1 <= k <= N"));
    }
    let c = binomial(n, k);
    let holds = BigUint::from(n).pow(k as u32) <= &c * BigUint::from(k).pow(k as u32);
    Ok(BoundReport {
        name: "power-below-binomial",
        lhs: (n as f64 / k as f64).powi(k as i32),
        rhs: c.to_f64().unwrap_or(f64::INFINITY),
        holds,
    })
}

/// `C(m+n-1, m) <= 2 e^m (1 + (n-1)/m)^m`, compared in log space.
pub fn stirling_bound_check(m: u64, n: u64) -> Result<BoundReport> {
    if m == 0 || n == 0 {
        return Err(invalid("stirling bound requires m, n >= 1"));
    }
    let c = binomial(m + n - 1, m);
    let ln_lhs = ln_biguint(&c);
    let ln_rhs = 2f64.ln() + m as f64 + m as f64 * (1.0 + (n as f64 - 1.0) / m as f64).ln();
    Ok(BoundReport {
        name: "stirling-binomial",
        lhs: ln_lhs.exp(),
        rhs: ln_rhs.exp(),
        holds: ln_lhs <= ln_rhs + 1e-12 * ln_rhs.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn brute_force(kind: FamilyKind, m: usize, n: usize) -> HashSet<Vec<i32>> {
        let lo = if kind == FamilyKind::TSet { -(m as i32) } else { 0 };
        let hi = m as i32;
        let mut out = HashSet::new();
        let mut cur = vec![lo; n];
        loop {
            let ord: i32 = cur.iter().map(|a: &i32| a.abs()).sum();
            let keep = match kind {
                FamilyKind::LambdaEQ => ord == m as i32,
                _ => ord <= m as i32,
            };
            if keep {
                out.insert(cur.clone());
            }
            let mut j = 0;
            loop {
                if j == n {
                    return out;
                }
                if cur[j] < hi {
                    cur[j] += 1;
                    break;
                }
                cur[j] = lo;
                j += 1;
            }
        }
    }

    #[test]
    fn zero_degree_is_the_origin() {
        let f = enumerate(FamilyKind::LambdaLE, 0, 5).unwrap();
        assert_eq!(f.multi_indices().unwrap(), &[MultiIndex::zeros(5)]);
    }

    #[test]
    fn small_families_match_brute_force() {
        let t = enumerate(FamilyKind::TSet, 1, 2).unwrap();
        assert_eq!(t.len(), 5);
        let got: HashSet<Vec<i32>> = t.multi_indices().unwrap().iter().map(|a| a.entries().to_vec()).collect();
        assert_eq!(got, brute_force(FamilyKind::TSet, 1, 2));

        let e = enumerate(FamilyKind::LambdaEQ, 2, 3).unwrap();
        assert_eq!(e.len(), 6);
        assert_eq!(BigUint::from(6u32), binomial(4, 2));

        for kind in [FamilyKind::LambdaLE, FamilyKind::LambdaEQ, FamilyKind::TSet] {
            for m in 0..4 {
                for n in 1..4 {
                    let fam = enumerate(kind, m, n).unwrap();
                    let got: HashSet<Vec<i32>> = fam.multi_indices().unwrap().iter().map(|a| a.entries().to_vec()).collect();
                    assert_eq!(got.len(), fam.len(), "duplicates in {kind} {m} {n}");
                    assert_eq!(got, brute_force(kind, m, n), "{kind} {m} {n}");
                    assert!(fam.is_canonically_sorted());
                    assert_eq!(BigUint::from(fam.len()), count_exact(kind, m, n));
                }
            }
        }
    }

    #[test]
    fn counts() {
        assert_eq!(count_exact(FamilyKind::LambdaLE, 2, 3), BigUint::from(10u32));
        for m in 0..20 {
            assert_eq!(count_exact(FamilyKind::LambdaEQ, m, 1), BigUint::one());
        }
        assert_eq!(count_exact(FamilyKind::SubsetsEQ, 2, 4), BigUint::from(6u32));
        let subsets = enumerate(FamilyKind::SubsetsEQ, 2, 4).unwrap();
        assert_eq!(subsets.len(), 6);
        assert!(subsets.is_canonically_sorted());
        let all = enumerate(FamilyKind::SubsetsLE, 4, 4).unwrap();
        assert_eq!(all.len(), 16);
        assert_eq!(all.subsets().unwrap()[..5], [0b0000, 0b0001, 0b0010, 0b0100, 0b1000]);
    }

    #[test]
    fn cap_error_carries_count() {
        match enumerate_with_cap(FamilyKind::LambdaLE, 10, 10, 1000) {
            Err(Error::CapExceeded { count, .. }) => assert_eq!(count, binomial(20, 10)),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn certificate_examples() {
        let c = surprise_certificate(1, 4).unwrap();
        assert_eq!(c.lower_bound, 2.0);
        assert!((c.mid - 5f64.sqrt()).abs() < 1e-14);
        assert!((c.upper_bound - 9.3266).abs() < 1e-4);

        for m in 1..10 {
            let c = surprise_certificate(m, 1).unwrap();
            assert_eq!(c.lower_bound, 1.0);
            assert!((c.mid - ((m + 1) as f64).powf(1.0 / (2 * m) as f64)).abs() < 1e-13);
        }

        let c = surprise_certificate(3, 3).unwrap();
        assert_eq!(c.exact_count, BigUint::from(20u32));
        assert!((c.mid - 20f64.powf(1.0 / 6.0)).abs() < 1e-14);
        assert!((c.mid - 1.6475).abs() < 1e-4);
    }

    #[test]
    fn binomial_and_stirling() {
        let r = binomial_bounds_check(4, 2).unwrap();
        assert!(r.holds);
        assert!((r.lhs - 4.0).abs() < 1e-12 && (r.rhs - 6.0).abs() < 1e-12);
        for n in 1..30 {
            let r = binomial_bounds_check(n, n).unwrap();
            assert!(r.holds);
            assert!((r.lhs - 1.0).abs() < 1e-12);
        }
        let s = stirling_bound_check(2, 3).unwrap();
        assert!(s.holds);
        assert!((s.lhs - 6.0).abs() < 1e-12);
        assert!((s.rhs - 59.1124).abs() < 1e-3);
        assert!(binomial_bounds_check(3, 0).is_err());
    }

    #[test]
    fn text_roundtrip() {
        for (kind, m, n) in [(FamilyKind::TSet, 2, 2), (FamilyKind::SubsetsLE, 2, 4)] {
            let fam = enumerate(kind, m, n).unwrap();
            let mut buf = Vec::new();
            fam.write_text(&mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with(&format!("{kind} {m} {n} {}", fam.len())));
            let back = IndexFamily::read_text(&buf[..]).unwrap();
            assert_eq!(back, fam);
        }
    }
}
