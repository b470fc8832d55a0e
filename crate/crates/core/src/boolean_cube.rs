//! Fourier-Walsh analysis on `{-1, 1}^N`.
//!
//! Truth tables are indexed by `b in [0, 2^N)`: bit `j` clear means
//! `x_{j+1} = +1`, bit `j` set means `x_{j+1} = -1`. Walsh tables are indexed by
//! the bitmask of `S`, so `chi_S(b) = (-1)^{popcount(b & S)}` and
//! `f(x) = sum_S f_hat(S) chi_S(x)` with `f_hat(S) = E[f chi_S]`.

use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{invalid, Error, Result};
use crate::index_sets::binomial;
use crate::par;

pub const DEFAULT_MAX_DIM: usize = 24;
pub const EXACT_NORM_MAX_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<f64>,
}

impl BooleanFunction {
    pub fn from_table(table: Vec<f64>) -> Result<Self> {
        let n = log2_exact(table.len())?;
        Ok(BooleanFunction { n, table })
    }

    pub fn from_walsh(coeffs: &[f64]) -> Result<Self> {
        Self::from_table(wht_inverse(coeffs)?)
    }

    /// Builds the table from `f(x)` with `x` given as a `+-1` vector.
    pub fn from_fn(n: usize, f: impl Fn(&[i8]) -> f64) -> Result<Self> {
        if n > DEFAULT_MAX_DIM {
            return Err(Error::TooLarge { what: "truth table", n, limit: DEFAULT_MAX_DIM });
        }
        let mut x = vec![1i8; n];
        let table = (0..1usize << n)
            .map(|b| {
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = if b >> j & 1 == 1 { -1 } else { 1 };
                }
                f(&x)
            })
            .collect();
        Ok(BooleanFunction { n, table })
    }

    /// The character `x^S`.
    pub fn character(n: usize, mask: u64) -> Result<Self> {
        Self::from_fn(n, |x| x.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &v)| v as f64).product())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn walsh(&self) -> Vec<f64> {
        wht_forward(&self.table).expect("table length is a power of two")
    }

    /// Keeps only the coefficients with `|S| = m`.
    pub fn homogeneous_part(&self, m: usize) -> BooleanFunction {
        let coeffs: Vec<f64> =
            self.walsh().into_iter().enumerate().map(|(s, c)| if (s.count_ones() as usize) == m { c } else { 0.0 }).collect();
        BooleanFunction::from_walsh(&coeffs).expect("same length")
    }

    /// Largest `|S|` with `|f_hat(S)| > tol` (0 for the zero function).
    pub fn degree(&self, tol: f64) -> usize {
        walsh_degree(&self.walsh(), tol)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm_boolean(&self.table)
    }

    /// Header `N mode`, then one value per line.
    pub fn write_text<W: Write>(&self, mut w: W, walsh: bool) -> std::io::Result<()> {
        let values = if walsh { self.walsh() } else { self.table.clone() };
        writeln!(w, "{} {}", self.n, if walsh { "walsh" } else { "truth" })?;
        for v in values {
            writeln!(w, "{v:?}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let mut parts = header.split_whitespace();
        let parse_err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let n: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err(1, "expected dimension"))?;
        let walsh = match parts.next() {
            Some("truth") => false,
            Some("walsh") => true,
            _ => return Err(parse_err(1, "mode must be truth or walsh")),
        };
        let mut values = Vec::with_capacity(1 << n.min(DEFAULT_MAX_DIM));
        for (i, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|e| parse_err(i + 1, &e.to_string()))?);
        }
        if values.len() != 1usize << n {
            return Err(Error::Mismatch(format!("expected {} values for N = {n}, found {}", 1usize << n, values.len())));
        }
        if walsh {
            Self::from_walsh(&values)
        } else {
            Self::from_table(values)
        }
    }
}

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

fn butterfly(data: &mut [f64]) {
    let len = data.len();
    let mut h = 1;
    while h < len {
        for block in data.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// Walsh coefficients `f_hat(S) = 2^-N sum_b f(b) chi_S(b)`.
pub fn wht_forward(table: &[f64]) -> Result<Vec<f64>> {
    let n = log2_exact(table.len())?;
    let mut out = table.to_vec();
    butterfly(&mut out);
    let scale = 1.0 / (1u64 << n) as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Truth table `f(b) = sum_S f_hat(S) chi_S(b)`.
pub fn wht_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    log2_exact(coeffs.len())?;
    let mut out = coeffs.to_vec();
    butterfly(&mut out);
    Ok(out)
}

/// Exact Walsh coefficients of an integer-valued table.
pub fn wht_forward_exact(table: &[BigInt]) -> Result<Vec<BigRational>> {
    let n = log2_exact(table.len())?;
    let mut data = table.to_vec();
    let len = data.len();
    let mut h = 1;
    while h < len {
        for block in data.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let u = x.clone();
                *x += &*y;
                *y = u - &*y;
            }
        }
        h *= 2;
    }
    let denom = BigInt::from(1u8) << n;
    Ok(data.into_iter().map(|v| BigRational::new(v, denom.clone())).collect())
}

pub fn walsh_degree(coeffs: &[f64], tol: f64) -> usize {
    coeffs.iter().enumerate().filter(|(_, c)| c.abs() > tol).map(|(s, _)| s.count_ones() as usize).max().unwrap_or(0)
}

/// `Maj_N(x) = sign(x_1 + ... + x_N)` for odd `N`.
pub fn majority(n: usize) -> Result<BooleanFunction> {
    if n.is_multiple_of(2) {
        return Err(invalid(format!("majority needs odd N, got {n}")));
    }
    BooleanFunction::from_fn(n, |x| if x.iter().map(|&v| v as i32).sum::<i32>() > 0 { 1.0 } else { -1.0 })
}

/// Exact level-one coefficient `C(N-1, (N-1)/2) / 2^(N-1)` of `Maj_N`.
pub fn majority_level1_coeff(n: usize) -> Result<BigRational> {
    if n.is_multiple_of(2) {
        return Err(invalid(format!("majority needs odd N, got {n}")));
    }
    let num = BigInt::from(binomial((n - 1) as u64, ((n - 1) / 2) as u64));
    let den = BigInt::from(1u8) << (n - 1);
    Ok(BigRational::new(num, den))
}

/// The asymptotic approximation `sqrt(2/pi) / sqrt(N)` of the level-one coefficient.
pub fn majority_level1_asymptotic(n: usize) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() / (n as f64).sqrt()
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // scale down huge numerators and denominators together
            let shift = q.denom().bits().max(q.numer().bits()).saturating_sub(1000);
            let a = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let b = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            a / b
        }
    }
}

pub fn sup_norm_boolean(table: &[f64]) -> f64 {
    table.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// `||(xi_S t_S)||_p` for a coefficient vector `t`; `p = inf` gives the max.
pub fn weighted_lp(xi: &[f64], coeffs: &[f64], p: f64) -> f64 {
    let terms = xi.iter().zip(coeffs).map(|(x, c)| (x * c).abs());
    if p.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Exact value and a maximising vertex for
/// `sup { ||(xi_S f_hat(S))||_p : ||f||_inf <= 1 }` on real functions.
///
/// The objective is convex in the truth table, so the maximum over the cube
/// `[-1, 1]^(2^N)` is attained at one of its `2^(2^N)` sign vertices.
pub fn multiplier_norm_boolean_exact(xi: &[f64], p: f64, n: usize) -> Result<(f64, Vec<f64>)> {
    if n > EXACT_NORM_MAX_DIM {
        return Err(Error::TooLarge { what: "exact Boolean multiplier norm", n, limit: EXACT_NORM_MAX_DIM });
    }
    if xi.len() != 1 << n {
        return Err(Error::Mismatch(format!("weight vector has length {}, expected {}", xi.len(), 1usize << n)));
    }
    if p < 1.0 || p.is_nan() {
        return Err(invalid(format!("p must be >= 1, got {p}")));
    }
    let len = 1usize << n;
    let vertices = 1usize << len;
    let block = 256usize.min(vertices);
    let best = par::map_range(vertices.div_ceil(block), |blk| {
        let mut table = vec![0.0; len];
        let mut best = (0usize, f64::NEG_INFINITY);
        for v in blk * block..((blk + 1) * block).min(vertices) {
            for (b, t) in table.iter_mut().enumerate() {
                *t = if v >> b & 1 == 1 { -1.0 } else { 1.0 };
            }
            let c = wht_forward(&table).expect("power of two");
            let val = weighted_lp(xi, &c, p);
            if val > best.1 {
                best = (v, val);
            }
        }
        best
    });
    let (v, val) = best.into_iter().fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let table = (0..len).map(|b| if v >> b & 1 == 1 { -1.0 } else { 1.0 }).collect();
    Ok((val, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn single_character_and_constant() {
        let f = BooleanFunction::from_table(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert_eq!(f.walsh(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(BooleanFunction::character(2, 0b11).unwrap(), f);
        let one = BooleanFunction::from_table(vec![1.0; 8]).unwrap();
        let w = one.walsh();
        assert_eq!(w[0], 1.0);
        assert!(w[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn majority_three_coefficients_by_direct_expectation() {
        let maj = majority(3).unwrap();
        let w = maj.walsh();
        // oracle: E[f chi_S] summed over the 8 points
        for (s, &coeff) in w.iter().enumerate() {
            let direct: f64 =
                (0..8usize).map(|b| maj.table()[b] * if (b & s).count_ones() % 2 == 1 { -1.0 } else { 1.0 }).sum::<f64>() / 8.0;
            assert!(approx(coeff, direct));
        }
        for s in [1, 2, 4] {
            assert!(approx(w[s], 0.5));
        }
        assert!(approx(w[7], -0.5));
        for s in [0, 3, 5, 6] {
            assert_eq!(w[s], 0.0);
        }
    }

    #[test]
    fn homogeneous_part_and_degree() {
        let maj = majority(3).unwrap();
        let lin = maj.homogeneous_part(1);
        let want = BooleanFunction::from_fn(3, |x| x.iter().map(|&v| v as f64).sum::<f64>() / 2.0).unwrap();
        for (a, b) in lin.table().iter().zip(want.table()) {
            assert!(approx(*a, *b));
        }
        assert_eq!(lin.homogeneous_part(1), lin);
        assert_eq!(BooleanFunction::character(3, 0b111).unwrap().degree(1e-12), 3);
        assert_eq!(maj.degree(1e-12), 3);
    }

    #[test]
    fn majority_level1_exact_values() {
        assert_eq!(majority_level1_coeff(3).unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(majority_level1_coeff(5).unwrap(), BigRational::new(3.into(), 8.into()));
        for n in [3usize, 5, 7, 9] {
            let table: Vec<BigInt> = majority(n).unwrap().table().iter().map(|&v| BigInt::from(v as i64)).collect();
            let exact = wht_forward_exact(&table).unwrap();
            assert_eq!(exact[1], majority_level1_coeff(n).unwrap());
        }
        assert!((majority_level1_asymptotic(3) - 0.4607).abs() < 1e-4);
        assert!(majority(4).is_err());
        assert!(majority_level1_coeff(4).is_err());
        // far beyond table construction the formula still works
        let big = rational_to_f64(&majority_level1_coeff(2001).unwrap());
        assert!((big / majority_level1_asymptotic(2001) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(majority(3).unwrap().sup_norm(), 1.0);
        let half = BooleanFunction::from_fn(2, |x| (x[0] + x[1]) as f64 / 2.0).unwrap();
        assert_eq!(half.sup_norm(), 1.0);
        assert_eq!(sup_norm_boolean(&[0.0; 16]), 0.0);
    }

    #[test]
    fn exact_multiplier_norm_examples() {
        let mut xi = vec![0.0; 4];
        xi[1] = 1.0;
        assert!(approx(multiplier_norm_boolean_exact(&xi, 1.0, 2).unwrap().0, 1.0));
        let (v, vertex) = multiplier_norm_boolean_exact(&[1.0; 4], 1.0, 2).unwrap();
        assert!(approx(v, 2.0));
        let c = wht_forward(&vertex).unwrap();
        assert!(approx(c.iter().map(|x| x.abs()).sum(), 2.0));
        for n in 0..=4usize {
            assert!(approx(multiplier_norm_boolean_exact(&vec![1.0; 1 << n], 2.0, n).unwrap().0, 1.0));
        }
        assert!(multiplier_norm_boolean_exact(&[1.0; 32], 1.0, 5).is_err());
        assert!(multiplier_norm_boolean_exact(&[1.0; 8], 1.0, 2).is_err());
    }

    #[test]
    fn exact_norm_at_p2_is_max_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=3usize {
            for _ in 0..6 {
                let xi: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
                let max = xi.iter().map(|x| x.abs()).fold(0.0, f64::max);
                let got = multiplier_norm_boolean_exact(&xi, 2.0, n).unwrap().0;
                assert!((got - max).abs() < 1e-12, "{xi:?}");
            }
        }
    }

    #[test]
    fn exact_norm_respects_dimension_free_lower_bound() {
        let e2 = std::f64::consts::E.powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=3usize {
            let mut bank: Vec<Vec<f64>> = vec![vec![1.0; 1 << n]];
            bank.push((0..1 << n).map(|s: usize| if s.count_ones() == 1 { 1.0 } else { 0.0 }).collect());
            for _ in 0..8 {
                bank.push((0..1 << n).map(|_| rng.random::<f64>()).collect());
            }
            for xi in bank {
                let l2 = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                let bound = l2 / (2.0 * 2f64.sqrt() * e2 * (1.0 + n as f64 * 2f64.ln()).sqrt());
                let norm = multiplier_norm_boolean_exact(&xi, 1.0, n).unwrap().0;
                assert!(norm >= bound, "{xi:?}");
            }
        }
    }

    #[test]
    fn not_power_of_two() {
        assert!(matches!(wht_forward(&[1.0; 3]), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(BooleanFunction::from_table(vec![]), Err(Error::NotPowerOfTwo(0))));
    }

    #[test]
    fn text_roundtrip() {
        let maj = majority(5).unwrap();
        for walsh in [false, true] {
            let mut buf = Vec::new();
            maj.write_text(&mut buf, walsh).unwrap();
            let back = BooleanFunction::read_text(&buf[..]).unwrap();
            for (a, b) in back.table().iter().zip(maj.table()) {
                assert!(approx(*a, *b));
            }
        }
    }

    proptest! {
        #[test]
        fn roundtrip_and_parseval(n in 0usize..=16, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table: Vec<f64> = (0..1usize << n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let w = wht_forward(&table).unwrap();
            let back = wht_inverse(&w).unwrap();
            for (a, b) in back.iter().zip(&table) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            let energy: f64 = w.iter().map(|c| c * c).sum();
            let mean_sq = table.iter().map(|v| v * v).sum::<f64>() / table.len() as f64;
            prop_assert!((energy - mean_sq).abs() <= 1e-10 * mean_sq.max(1e-300));
        }
    }
}
