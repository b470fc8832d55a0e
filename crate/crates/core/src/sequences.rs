//! Sequence functionals: decreasing rearrangements, weak `l_q` norms,
//! monomial-convergence classifiers, the prime-power test, a subset-sum
//! inequality checked exactly, and Bohr radius bounds.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::multipliers::{Verdict, VerdictReport};
use crate::primes::first_primes;

pub const DEFAULT_DELTA: f64 = 0.05;
const GRID_POINTS: usize = 48;
const GRID_START: usize = 16;

/// Moduli of `x` sorted nonincreasingly; ties keep their original order.
pub fn decreasing_rearrangement(x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|a| a.abs()).collect();
    // stable sort keeps index order among equal moduli
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `sup_n n^(1/q) x*_n` over the truncation.
pub fn weak_lq_norm(x: &[f64], q: f64) -> Result<f64> {
    if q.is_nan() || q <= 0.0 {
        return Err(invalid(format!("q must be positive, got {q}")));
    }
    Ok(decreasing_rearrangement(x).iter().enumerate().map(|(i, v)| ((i + 1) as f64).powf(1.0 / q) * v).fold(0.0, f64::max))
}

/// Roughly geometric grid of `GRID_POINTS` distinct integers in `[16, n_max]`.
pub fn geometric_grid(n_max: usize) -> Vec<usize> {
    let lo = GRID_START.min(n_max).max(2);
    let ratio = (n_max as f64 / lo as f64).ln() / (GRID_POINTS - 1) as f64;
    let mut grid: Vec<usize> =
        (0..GRID_POINTS).map(|i| ((lo as f64) * (ratio * i as f64).exp()).round() as usize).map(|n| n.clamp(lo, n_max)).collect();
    grid.dedup();
    if grid.last() != Some(&n_max) {
        grid.push(n_max);
    }
    grid
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Member,
    NonMember,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Member => "member",
            Classification::NonMember => "non-member",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonVerdict {
    pub criterion: String,
    pub grid: Vec<usize>,
    /// `t_n = (1/ln n) sum_{j<=n} (z*_j)^2` at the grid points.
    pub trajectory: Vec<f64>,
    pub tail_min: f64,
    pub tail_max: f64,
    /// Local growth index `d ln S_n / d ln ln n` between consecutive grid points.
    pub growth_index: Vec<f64>,
    /// Relative increase of the growth index across the tail (least-squares fit).
    pub growth_trend: f64,
    pub classification: Classification,
    pub delta: f64,
    pub notes: String,
}

fn tail_start(len: usize) -> usize {
    len - (len / 3).max(1)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Prefix sums of squares of the rearrangement, sampled on the grid.
fn square_sums(z: &[f64], grid: &[usize]) -> Vec<f64> {
    let zs = decreasing_rearrangement(z);
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut j = 0;
    for &n in grid {
        while j < n {
            acc += zs.get(j).map_or(0.0, |v| v * v);
            j += 1;
        }
        out.push(acc);
    }
    out
}

fn growth_profile(grid: &[usize], sums: &[f64]) -> (Vec<f64>, f64) {
    let mut index = Vec::new();
    let mut at = Vec::new();
    for i in 1..grid.len() {
        let (s0, s1) = (sums[i - 1], sums[i]);
        let (l0, l1) = ((grid[i - 1] as f64).ln().ln(), (grid[i] as f64).ln().ln());
        if s0 > 0.0 && s1 > 0.0 && l1 > l0 {
            index.push((s1.ln() - s0.ln()) / (l1 - l0));
            at.push(l1);
        }
    }
    if index.len() < 3 {
        return (index, 0.0);
    }
    let start = tail_start(index.len());
    let (xs, ys) = (&at[start..], &index[start..]);
    let slope = least_squares_slope(xs, ys);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let span = xs.last().unwrap() - xs.first().unwrap();
    let trend = if mean.abs() > 1e-300 { slope * span / mean.abs() } else { 0.0 };
    (index, trend)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid(format!("delta must lie in (0, 0.5), got {delta}")));
    }
    Ok(())
}

/// Classifies `z` by the truncated criterion `t_n = (1/ln n) sum_{j<=n} (z*_j)^2`.
///
/// The limsup is replaced by the tail third of a geometric grid: member if the
/// tail stays below `1 - delta`, non-member if it stays above `1 + delta`,
/// inconclusive otherwise. `z` is zero-padded to `n_max`.
pub fn mon_criterion(z: &[f64], n_max: usize, delta: f64) -> Result<MonVerdict> {
    check_delta(delta)?;
    if n_max < 8 {
        return Err(invalid(format!("n_max must be at least 8, got {n_max}")));
    }
    let truncated = &z[..z.len().min(n_max)];
    let grid = geometric_grid(n_max);
    let sums = square_sums(truncated, &grid);
    let trajectory: Vec<f64> = grid.iter().zip(&sums).map(|(&n, s)| s / (n as f64).ln()).collect();
    let start = tail_start(trajectory.len());
    let tail = &trajectory[start..];
    let tail_min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let classification = if tail_max < 1.0 - delta {
        Classification::Member
    } else if tail_min > 1.0 + delta {
        Classification::NonMember
    } else {
        Classification::Inconclusive
    };
    let (growth_index, growth_trend) = growth_profile(&grid, &sums);
    Ok(MonVerdict {
        criterion: "log-normalised-square-sum".into(),
        grid,
        trajectory,
        tail_min,
        tail_max,
        growth_index,
        growth_trend,
        classification,
        delta,
        notes: String::new(),
    })
}

/// `z_j = p_j^-sigma` over the first `count` primes.
pub fn prime_power_sequence(sigma: f64, count: usize) -> Vec<f64> {
    first_primes(count).into_iter().map(|p| (p as f64).powf(-sigma)).collect()
}

/// Membership test for `z_j = p_j^-sigma`.
///
/// Combines the square-sum criterion with the growth index of `S_n`: past the
/// critical exponent the partial sums grow like a power of `n`, so the index
/// `d ln S / d ln ln n` keeps increasing, while below it the sums converge and
/// the index decays. Non-member if the criterion says so or if the index rises
/// by more than `delta` (relative) over the tail; member if the criterion says
/// member and the index does not rise.
pub fn dirichlet_sigma_test(sigma: f64, count: usize, delta: f64) -> Result<MonVerdict> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    if count < 8 {
        return Err(invalid("the prime test needs at least 8 primes"));
    }
    let z = prime_power_sequence(sigma, count);
    let mut v = mon_criterion(&z, count, delta)?;
    let rising = v.growth_trend > delta;
    v.classification = match v.classification {
        Classification::NonMember => Classification::NonMember,
        _ if rising => Classification::NonMember,
        Classification::Member => Classification::Member,
        Classification::Inconclusive => Classification::Inconclusive,
    };
    v.criterion = "prime-power-square-sum".into();
    v.notes = format!("sigma = {sigma}, primes = {count}, growth trend {:.4}", v.growth_trend);
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct BooleanMonReport {
    pub grid: Vec<usize>,
    /// `(1/sqrt N) sum_{n<=N} |x_n|`.
    pub l1_trajectory: Vec<f64>,
    /// `(1/ln N) sum_{n<=N} x_n^2`.
    pub l2_trajectory: Vec<f64>,
    pub l1_tail_slope: f64,
    pub l2_tail_slope: f64,
    /// Set when either functional grows like a positive power of `N` on the tail.
    pub unbounded: bool,
}

fn tail_log_slope(grid: &[usize], values: &[f64]) -> f64 {
    let start = tail_start(grid.len());
    let pts: Vec<(f64, f64)> =
        grid[start..].iter().zip(&values[start..]).filter(|(_, v)| **v > 0.0).map(|(&n, v)| ((n as f64).ln(), v.ln())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    least_squares_slope(&xs, &ys)
}

/// Both necessary-condition functionals for Boolean monomial convergence.
pub fn boolean_mon_necessary(x: &[f64], n_max: usize, delta: f64) -> Result<BooleanMonReport> {
    check_delta(delta)?;
    if n_max < 8 {
        return Err(invalid(format!("n_max must be at least 8, got {n_max}")));
    }
    let grid = geometric_grid(n_max);
    let (mut l1, mut l2) = (Vec::new(), Vec::new());
    let (mut a1, mut a2) = (0.0, 0.0);
    let mut j = 0;
    for &n in &grid {
        while j < n {
            let v = x.get(j).copied().unwrap_or(0.0);
            a1 += v.abs();
            a2 += v * v;
            j += 1;
        }
        l1.push(a1 / (n as f64).sqrt());
        l2.push(a2 / (n as f64).ln());
    }
    let l1_tail_slope = tail_log_slope(&grid, &l1);
    let l2_tail_slope = tail_log_slope(&grid, &l2);
    Ok(BooleanMonReport {
        unbounded: l1_tail_slope > delta || l2_tail_slope > delta,
        grid,
        l1_trajectory: l1,
        l2_trajectory: l2,
        l1_tail_slope,
        l2_tail_slope,
    })
}

pub const CLAIM_MAX_N: usize = 14;
pub const CLAIM_MAX_M: usize = 4;

/// `m = round(ln N)` clamped to `[1, min(N, 4)]`.
pub fn default_claim_degree(n: usize) -> usize {
    ((n as f64).ln().round() as usize).clamp(1, n.clamp(1, CLAIM_MAX_M))
}

fn exact(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| invalid(format!("non-finite value {v}")))
}

fn rational_to_f64(q: &BigRational) -> f64 {
    crate::boolean_cube::rational_to_f64(q)
}

/// Exact check of `(r_m^2 + ... + r_N^2)^m / m! <= sum_{|S|=m} prod_{j in S} r_j^2`.
///
/// Inputs are converted to rationals exactly; the right side is summed over
/// all `m`-subsets of `[N]`.
pub fn rearrangement_claim_check(r: &[f64], m: usize) -> Result<VerdictReport> {
    let n = r.len();
    if m == 0 || m > CLAIM_MAX_M || m > n || n > CLAIM_MAX_N {
        return Err(invalid(format!("need 1 <= m <= min(N, {CLAIM_MAX_M}) and N <= {CLAIM_MAX_N}, got m = {m}, N = {n}")));
    }
    if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("entries must be positive and finite"));
    }
    if r.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid("sequence must be nonincreasing"));
    }
    let squares: Vec<BigRational> = r.iter().map(|&v| exact(v).map(|q| &q * &q)).collect::<Result<_>>()?;
    let tail: BigRational = squares[m - 1..].iter().fold(BigRational::zero(), |a, b| a + b);
    let mut factorial = BigInt::one();
    for k in 2..=m {
        factorial *= BigInt::from(k);
    }
    let mut lhs = BigRational::one();
    for _ in 0..m {
        lhs *= &tail;
    }
    lhs /= BigRational::from_integer(factorial);
    let mut rhs = BigRational::zero();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == m {
            let mut prod = BigRational::one();
            for (j, s) in squares.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    prod *= s;
                }
            }
            rhs += prod;
        }
    }
    let holds = lhs <= rhs;
    Ok(VerdictReport {
        check_id: "rearrangement-claim".into(),
        space: "sequence".into(),
        m,
        n,
        p: None,
        lhs: rational_to_f64(&lhs),
        constant: 1.0,
        bracket_lower: rational_to_f64(&rhs),
        bracket_upper: rational_to_f64(&rhs),
        verdict: if holds { Verdict::Verified } else { Verdict::Counterexample },
        seed: 0,
        anchor: "subset-square-sum-claim".into(),
        basis: "exact".into(),
        notes: String::new(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BohrBound {
    pub n: usize,
    pub m: usize,
    /// `chi_lower^(-1/m)`, an upper bound for the Bohr radius.
    pub bound: f64,
    /// `sqrt(ln n / n)`, the asymptotic order.
    pub target: f64,
}

pub fn bohr_radius_upper(n: usize, m: usize, sidon_lower: f64) -> Result<BohrBound> {
    if m == 0 || n == 0 {
        return Err(invalid("need m, n >= 1"));
    }
    if sidon_lower.is_nan() || sidon_lower <= 0.0 {
        return Err(invalid(format!("Sidon lower bound must be positive, got {sidon_lower}")));
    }
    Ok(BohrBound { n, m, bound: sidon_lower.powf(-1.0 / m as f64), target: ((n as f64).ln() / n as f64).sqrt() })
}

/// Named sequence generators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SequenceGenerator {
    /// `z_j = scale * j^-sigma`.
    Power { sigma: f64, scale: f64 },
    /// `z_j = p_j^-sigma`.
    Primes { sigma: f64 },
    /// `z_j = c`.
    Const { c: f64 },
}

impl SequenceGenerator {
    pub fn generate(&self, len: usize) -> Vec<f64> {
        match *self {
            SequenceGenerator::Power { sigma, scale } => (1..=len).map(|j| scale * (j as f64).powf(-sigma)).collect(),
            SequenceGenerator::Primes { sigma } => prime_power_sequence(sigma, len),
            SequenceGenerator::Const { c } => vec![c; len],
        }
    }
}

impl FromStr for SequenceGenerator {
    type Err = Error;

    /// `power SIGMA [SCALE]`, `primes SIGMA` or `const C`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| invalid(format!("generator {s:?} is missing a parameter")))?
                .parse::<f64>()
                .map_err(|e| invalid(format!("generator {s:?}: {e}")))
        };
        match parts.first().copied() {
            Some("power") if parts.len() <= 3 => {
                Ok(SequenceGenerator::Power { sigma: num(1)?, scale: if parts.len() == 3 { num(2)? } else { 1.0 } })
            }
            Some("primes") if parts.len() == 2 => Ok(SequenceGenerator::Primes { sigma: num(1)? }),
            Some("const") if parts.len() == 2 => Ok(SequenceGenerator::Const { c: num(1)? }),
            _ => Err(invalid(format!("unknown generator {s:?}; use `power s [c]`, `primes s` or `const c`"))),
        }
    }
}

pub fn parse_sequence(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() }))
        .collect()
}
