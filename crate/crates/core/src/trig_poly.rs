//! Trigonometric polynomials on the n-torus: evaluation, grid evaluation by
//! FFT, certified sup-norm brackets and phase-ascent refinement.
//!
//! Points of the torus are given by phases `theta in [0, 2pi)^n`, so
//! `z^alpha = exp(i alpha . theta)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::index_sets::MultiIndex;
use crate::par;

pub const DEFAULT_GRID_CAP: u64 = 1 << 26;

/// Sparse trigonometric polynomial `sum c_alpha z^alpha` with `|alpha| <= m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    n: usize,
    m: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl TrigPolynomial {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("torus dimension must be at least 1"));
        }
        Ok(TrigPolynomial { n, m, coeffs: BTreeMap::new() })
    }

    pub fn from_terms<I>(n: usize, m: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = Self::new(n, m)?;
        for (a, c) in terms {
            p.add_term(a, c)?;
        }
        Ok(p)
    }

    /// Adds `c z^alpha` to the polynomial.
    pub fn add_term(&mut self, alpha: MultiIndex, c: Complex64) -> Result<()> {
        if alpha.dim() != self.n {
            return Err(invalid(format!("index {alpha} has length {}, expected {}", alpha.dim(), self.n)));
        }
        if alpha.order() as usize > self.m {
            return Err(invalid(format!("index {alpha} has order {} > degree bound {}", alpha.order(), self.m)));
        }
        *self.coeffs.entry(alpha).or_insert(Complex64::new(0.0, 0.0)) += c;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn is_analytic(&self) -> bool {
        self.coeffs.keys().all(MultiIndex::is_analytic)
    }

    /// Highest order among nonzero coefficients.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().filter(|(_, c)| c.norm() > 0.0).map(|(a, _)| a.order() as usize).max().unwrap_or(0)
    }

    /// `sum |c_alpha|`, always an upper bound for the sup norm.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// The polynomial `z -> P(z * w)` for the fixed rotation `w = exp(i offset)`.
    pub fn rotated(&self, offset: &[f64]) -> TrigPolynomial {
        let coeffs = self.coeffs.iter().map(|(a, c)| (a.clone(), c * Complex64::from_polar(1.0, dot(a, offset)))).collect();
        TrigPolynomial { n: self.n, m: self.m, coeffs }
    }

    /// JSON-lines: header `{"n":..,"m":..}`, then `{"alpha":[..],"re":..,"im":..}` per term.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = serde_json::to_string(&PolyHeader { n: self.n, m: self.m })?;
        writeln!(w, "{header}")?;
        for (a, c) in &self.coeffs {
            let rec = CoeffRecord { alpha: a.entries().to_vec(), re: c.re, im: c.im };
            writeln!(w, "{}", serde_json::to_string(&rec)?)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header: PolyHeader = serde_json::from_str(&header?).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        let mut p = TrigPolynomial::new(header.n, header.m)?;
        for (i, line) in lines {
            let rec: CoeffRecord = serde_json::from_str(&line?).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            p.add_term(MultiIndex::new(rec.alpha), Complex64::new(rec.re, rec.im))?;
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyHeader {
    n: usize,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct CoeffRecord {
    alpha: Vec<i32>,
    re: f64,
    im: f64,
}

fn dot(a: &MultiIndex, theta: &[f64]) -> f64 {
    a.entries().iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum()
}

/// Direct summation of `P` at the point with the given phases.
pub fn eval(p: &TrigPolynomial, phases: &[f64]) -> Complex64 {
    debug_assert_eq!(phases.len(), p.n);
    p.coeffs.iter().map(|(a, c)| c * Complex64::from_polar(1.0, dot(a, phases))).sum()
}

/// Equispaced product grid with `k` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub n: usize,
}

impl GridSpec {
    pub fn new(points_per_axis: usize, n: usize) -> Result<Self> {
        if points_per_axis == 0 || n == 0 {
            return Err(invalid("grid needs K >= 1 and n >= 1"));
        }
        Ok(GridSpec { points_per_axis, n })
    }

    /// `K = 1 + 20 m`.
    pub fn bernstein(m: usize, n: usize) -> Self {
        GridSpec { points_per_axis: 1 + 20 * m, n }
    }

    pub fn total(&self) -> BigUint {
        BigUint::from(self.points_per_axis).pow(self.n as u32)
    }

    pub fn certifies_degree(&self, m: usize) -> bool {
        self.points_per_axis > 20 * m
    }

    /// Phases of the node with flat index `flat` (axis 0 varies fastest).
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let k = self.points_per_axis;
        let step = 2.0 * PI / k as f64;
        let mut rest = flat;
        (0..self.n)
            .map(|_| {
                let j = rest % k;
                rest /= k;
                j as f64 * step
            })
            .collect()
    }

    fn checked_total(&self, cap: u64) -> Result<usize> {
        let total = self.total();
        if total > BigUint::from(cap) {
            return Err(Error::GridTooLarge { total, cap });
        }
        Ok(total.to_usize().expect("capped grid fits in usize"))
    }
}

/// Values of `P` at every node of `grid`, flat index `sum_j k_j K^j`.
///
/// Coefficients are folded modulo `K` per axis and then transformed by an
/// unnormalised inverse DFT along each axis; folding is exact because
/// `exp(2 pi i a k / K)` only depends on `a mod K`.
pub fn eval_grid(p: &TrigPolynomial, grid: &GridSpec, cap: u64) -> Result<Vec<Complex64>> {
    if grid.n != p.n {
        return Err(invalid("grid dimension does not match polynomial"));
    }
    let total = grid.checked_total(cap)?;
    let k = grid.points_per_axis;
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for (a, c) in &p.coeffs {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &e in a.entries() {
            idx += (e.rem_euclid(k as i32) as usize) * stride;
            stride *= k;
        }
        data[idx] += c;
    }
    if k == 1 {
        return Ok(data);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(k);
    // lines whose untransformed coordinates miss the folded support are zero
    let mut support = vec![vec![false; k]; grid.n];
    for a in p.coeffs.keys() {
        for (j, &e) in a.entries().iter().enumerate() {
            support[j][e.rem_euclid(k as i32) as usize] = true;
        }
    }
    let needed = |axis: usize, mut block: usize| {
        for row in &support[axis + 1..] {
            if !row[block % k] {
                return false;
            }
            block /= k;
        }
        true
    };
    let mut stride = 1usize;
    for axis in 0..grid.n {
        if stride == 1 {
            par::for_each_chunk_mut(&mut data, k, |line, chunk| {
                if needed(axis, line) {
                    fft.process(chunk);
                }
            });
        } else {
            const BATCH: usize = 32;
            let batches = stride.div_ceil(BATCH);
            for (b, chunk) in data.chunks_mut(stride * k).enumerate() {
                if !needed(axis, b) {
                    continue;
                }
                let src = &*chunk;
                let done = par::map_range(batches, |bi| {
                    let i0 = bi * BATCH;
                    let width = BATCH.min(stride - i0);
                    let mut buf = vec![Complex64::new(0.0, 0.0); width * k];
                    for r in 0..k {
                        let row = &src[r * stride + i0..r * stride + i0 + width];
                        for (d, v) in row.iter().enumerate() {
                            buf[d * k + r] = *v;
                        }
                    }
                    fft.process(&mut buf);
                    buf
                });
                for (bi, buf) in done.iter().enumerate() {
                    let i0 = bi * BATCH;
                    let width = BATCH.min(stride - i0);
                    for r in 0..k {
                        let row = &mut chunk[r * stride + i0..r * stride + i0 + width];
                        for (d, v) in row.iter_mut().enumerate() {
                            *v = buf[d * k + r];
                        }
                    }
                }
            }
        }
        stride *= k;
    }
    Ok(data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMethod {
    /// Equispaced grid with `K >= 1 + 20m`; factor 2 certified.
    BernsteinGrid,
    /// Grid too coarse for the certificate.
    Uncertified,
    /// Combination of certified upper bounds (grid, triangle, quadratic form).
    Certified,
    /// Budgeted candidate search for an operator norm.
    CandidateSearch,
    /// Exact value (finite enumeration or closed form).
    Exact,
}

impl fmt::Display for BracketMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BracketMethod::BernsteinGrid => "bernstein-grid",
            BracketMethod::Uncertified => "uncertified",
            BracketMethod::Certified => "certified",
            BracketMethod::CandidateSearch => "candidate-search",
            BracketMethod::Exact => "exact",
        };
        f.write_str(s)
    }
}

/// Interval `[lower, upper]` containing a norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub method: BracketMethod,
}

impl NormBracket {
    pub fn exact(v: f64) -> Self {
        NormBracket { lower: v, upper: v, method: BracketMethod::Exact }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }
}

/// Grid maximum on the Bernstein grid; the true sup lies in `[max, 2 max]`.
pub fn sup_norm_bracket(p: &TrigPolynomial, cap: u64) -> Result<NormBracket> {
    let grid = GridSpec::bernstein(p.m, p.n);
    let values = eval_grid(p, &grid, cap)?;
    let lower = max_modulus(&values);
    Ok(NormBracket { lower, upper: 2.0 * lower, method: BracketMethod::BernsteinGrid })
}

/// Same as [`sup_norm_bracket`] on a caller-chosen grid; tagged uncertified when
/// the grid is too coarse for the degree.
pub fn sup_norm_bracket_heuristic(p: &TrigPolynomial, grid: &GridSpec, cap: u64) -> Result<NormBracket> {
    let values = eval_grid(p, grid, cap)?;
    let lower = max_modulus(&values);
    Ok(NormBracket {
        lower,
        upper: 2.0 * lower,
        method: if grid.certifies_degree(p.m) { BracketMethod::BernsteinGrid } else { BracketMethod::Uncertified },
    })
}

pub(crate) fn max_modulus(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max).sqrt()
}

pub(crate) fn argmax_modulus(values: &[Complex64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.iter().enumerate() {
        let a = v.norm_sqr();
        if a > best.1 {
            best = (i, a);
        }
    }
    (best.0, best.1.sqrt())
}

/// `(sum |c_alpha|^2)^(1/2)`.
pub fn l2_norm(p: &TrigPolynomial) -> f64 {
    p.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `(sum |c_alpha|^(2m/(m+1)))^((m+1)/(2m))` over analytic coefficients.
pub fn bh_functional(p: &TrigPolynomial, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(invalid("bh_functional needs m >= 1"));
    }
    if let Some(a) = p.coeffs.keys().find(|a| !a.is_analytic()) {
        return Err(Error::NonAnalytic(a.entries().to_vec()));
    }
    if p.degree() > m {
        return Err(invalid(format!("polynomial degree {} exceeds m = {m}", p.degree())));
    }
    let q = 2.0 * m as f64 / (m as f64 + 1.0);
    let s: f64 = p.coeffs.values().map(|c| c.norm().powf(q)).sum();
    Ok(s.powf(1.0 / q))
}

/// `n * ||A||_op` for a 2-homogeneous analytic polynomial `z^T A z`.
///
/// `|z^T A z| <= ||A|| ||z||_2^2 = n ||A||` on the torus; a small relative
/// slack absorbs the rounding of the singular value computation.
pub fn quadratic_form_bound(p: &TrigPolynomial) -> Option<f64> {
    if p.is_empty() || !p.is_analytic() || p.coeffs.keys().any(|a| a.order() != 2) {
        return None;
    }
    let n = p.n;
    let mut a = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for (alpha, c) in &p.coeffs {
        let nz: Vec<usize> = alpha.entries().iter().enumerate().filter(|(_, &e)| e != 0).map(|(j, _)| j).collect();
        match nz.as_slice() {
            [j] => a[(*j, *j)] += c,
            [j, k] => {
                a[(*j, *k)] += c * 0.5;
                a[(*k, *j)] += c * 0.5;
            }
            _ => return None,
        }
    }
    let sv = a.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    Some(n as f64 * top * (1.0 + 1e-10) + 1e-300)
}

/// Best certified sup bracket available without exceeding `cap`: lower from the
/// grid (if feasible) and the value at `z = 1`, upper as the minimum of
/// `2 * grid max`, `sum |c|`, and the quadratic-form bound.
pub fn certified_sup(p: &TrigPolynomial, cap: u64) -> NormBracket {
    let zero_phase = vec![0.0; p.n];
    let mut lower = eval(p, &zero_phase).norm();
    let mut upper = p.coefficient_l1();
    let grid = GridSpec::bernstein(p.m, p.n);
    if let Ok(values) = eval_grid(p, &grid, cap) {
        let g = max_modulus(&values);
        lower = lower.max(g);
        upper = upper.min(2.0 * g);
    }
    if let Some(q) = quadratic_form_bound(p) {
        upper = upper.min(q);
    }
    NormBracket { lower, upper: upper.max(lower), method: BracketMethod::Certified }
}

#[derive(Clone, Copy, Debug)]
pub struct AscentConfig {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig { starts: 8, iters: 50, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscentResult {
    pub value: f64,
    pub phases: Vec<f64>,
}

/// Coordinate-wise phase ascent on `|P|`.
///
/// Runs from every point in `initial` followed by `cfg.starts` uniformly random
/// points drawn from a stream keyed by `(cfg.seed, start index)`. Each sweep
/// maximises `|P|` exactly-enough along one phase at a time (dense sampling plus
/// golden-section refinement), accepting only improvements. Returns the best
/// visited value, which is a certified lower bound for the sup norm.
pub fn phase_ascent(p: &TrigPolynomial, cfg: &AscentConfig, initial: &[Vec<f64>]) -> AscentResult {
    let terms: Vec<(Vec<i32>, Complex64)> = p.coeffs.iter().map(|(a, c)| (a.entries().to_vec(), *c)).collect();
    let total = initial.len() + cfg.starts;
    let n = p.n;
    let results = par::map_range(total, |s| {
        let start = if s < initial.len() {
            initial[s].clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s as u64);
            (0..n).map(|_| rng.random::<f64>() * 2.0 * PI).collect()
        };
        ascend(&terms, p.m, start, cfg.iters)
    });
    let mut best = AscentResult { value: if p.is_empty() { 0.0 } else { f64::NEG_INFINITY }, phases: vec![0.0; n] };
    for r in results {
        if r.value > best.value {
            best = r;
        }
    }
    if best.value == f64::NEG_INFINITY {
        best.value = eval(p, &best.phases).norm();
    }
    best
}

fn ascend(terms: &[(Vec<i32>, Complex64)], m: usize, mut theta: Vec<f64>, iters: usize) -> AscentResult {
    let n = theta.len();
    let value_at = |theta: &[f64]| -> f64 {
        terms
            .iter()
            .map(|(a, c)| {
                let ph: f64 = a.iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
                c * Complex64::from_polar(1.0, ph)
            })
            .sum::<Complex64>()
            .norm()
    };
    let mut current = value_at(&theta);
    let width = 2 * m + 1;
    let samples = 16 * width + 8;
    let mut coef = vec![Complex64::new(0.0, 0.0); width];
    for _ in 0..iters {
        let before = current;
        for j in 0..n {
            // univariate slice: g(t) = sum_k coef[k + m] e^{ikt}
            coef.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (a, c) in terms {
                let ph: f64 = a.iter().zip(&theta).enumerate().filter(|(l, _)| *l != j).map(|(_, (&k, &t))| k as f64 * t).sum();
                coef[(a[j] + m as i32) as usize] += c * Complex64::from_polar(1.0, ph);
            }
            let g = |t: f64| -> f64 {
                coef.iter()
                    .enumerate()
                    .map(|(idx, c)| c * Complex64::from_polar(1.0, (idx as f64 - m as f64) * t))
                    .sum::<Complex64>()
                    .norm()
            };
            let mut best_t = theta[j];
            let mut best_v = g(best_t);
            let step = 2.0 * PI / samples as f64;
            for s in 0..samples {
                let t = s as f64 * step;
                let v = g(t);
                if v > best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            // golden-section refinement around the best sample
            let (mut lo, mut hi) = (best_t - step, best_t + step);
            let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let (mut f1, mut f2) = (g(x1), g(x2));
            for _ in 0..60 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = g(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = g(x1);
                }
            }
            let (t_ref, v_ref) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
            if v_ref > best_v {
                best_v = v_ref;
                best_t = t_ref;
            }
            if best_v > current {
                theta[j] = best_t.rem_euclid(2.0 * PI);
                current = value_at(&theta).max(current);
            }
        }
        if current - before <= 1e-14 * current.max(1e-300) {
            break;
        }
    }
    AscentResult { value: current, phases: theta }
}

/// Grid bracket refined by phase ascent started at the grid argmax.
/// The returned lower end is the best attained value; the upper end stays `2 * grid max`.
pub fn refined_sup_bracket(p: &TrigPolynomial, cap: u64, cfg: &AscentConfig) -> Result<(NormBracket, AscentResult)> {
    let grid = GridSpec::bernstein(p.m, p.n);
    let values = eval_grid(p, &grid, cap)?;
    let (idx, gmax) = argmax_modulus(&values);
    let gmax = gmax.max(0.0);
    let start = grid.node(idx);
    let asc = phase_ascent(p, cfg, &[start]);
    let lower = asc.value.max(gmax);
    let upper = (2.0 * gmax).min(p.coefficient_l1()).max(lower);
    Ok((NormBracket { lower, upper, method: BracketMethod::BernsteinGrid }, asc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::{enumerate, FamilyKind};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mono(entries: &[i32], m: usize) -> TrigPolynomial {
        TrigPolynomial::from_terms(entries.len(), m, [(MultiIndex::new(entries.to_vec()), c(1.0, 0.0))]).unwrap()
    }

    fn random_poly(kind: FamilyKind, m: usize, n: usize, seed: u64) -> TrigPolynomial {
        let fam = enumerate(kind, m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = fam.multi_indices().unwrap().iter().map(|a| (a.clone(), c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)));
        TrigPolynomial::from_terms(n, m, terms).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((eval(&mono(&[1], 1), &[0.0]) - c(1.0, 0.0)).norm() < 1e-15);
        let mut p = mono(&[0], 1);
        p.add_term(MultiIndex::new(vec![1]), c(1.0, 0.0)).unwrap();
        assert!(eval(&p, &[PI]).norm() < 1e-15);
        let q = mono(&[1, 2], 3);
        assert!((eval(&q, &[PI / 2.0, PI / 2.0]) - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn rejects_out_of_degree_terms() {
        let mut p = TrigPolynomial::new(2, 1).unwrap();
        assert!(p.add_term(MultiIndex::new(vec![1, 1]), c(1.0, 0.0)).is_err());
        assert!(p.add_term(MultiIndex::new(vec![1]), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn grid_examples() {
        let p = mono(&[3], 3);
        let v = eval_grid(&p, &GridSpec::new(64, 1).unwrap(), DEFAULT_GRID_CAP).unwrap();
        assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));

        let mut q = mono(&[0], 1);
        q.add_term(MultiIndex::new(vec![1]), c(1.0, 0.0)).unwrap();
        let v = eval_grid(&q, &GridSpec::new(4, 1).unwrap(), DEFAULT_GRID_CAP).unwrap();
        let want = [c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(1.0, -1.0)];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn grid_matches_direct_evaluation() {
        for (kind, m, n, k) in [
            (FamilyKind::TSet, 2, 2, 41),
            (FamilyKind::LambdaLE, 3, 3, 13),
            (FamilyKind::TSet, 3, 2, 5), // aliasing grid
            (FamilyKind::LambdaEQ, 1, 3, 21),
        ] {
            let p = random_poly(kind, m, n, 7 + m as u64);
            let grid = GridSpec::new(k, n).unwrap();
            let fast = eval_grid(&p, &grid, DEFAULT_GRID_CAP).unwrap();
            let scale = max_modulus(&fast).max(1e-300);
            for (i, v) in fast.iter().enumerate() {
                let direct = eval(&p, &grid.node(i));
                assert!((v - direct).norm() <= 1e-10 * scale, "{kind} node {i}");
            }
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        let p = mono(&[1, 1, 1], 3);
        match sup_norm_bracket(&p, 1000) {
            Err(Error::GridTooLarge { total, .. }) => assert_eq!(total, BigUint::from(61u32).pow(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bracket_examples() {
        for m in 1..5 {
            let b = sup_norm_bracket(&mono(&[m as i32], m), DEFAULT_GRID_CAP).unwrap();
            assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 2.0).abs() < 1e-12);
        }
        let mut p = mono(&[0], 1);
        p.add_term(MultiIndex::new(vec![1]), c(1.0, 0.0)).unwrap();
        assert!((sup_norm_bracket(&p, DEFAULT_GRID_CAP).unwrap().lower - 2.0).abs() < 1e-12);
        let fam = enumerate(FamilyKind::LambdaLE, 1, 2).unwrap();
        let q = TrigPolynomial::from_terms(2, 1, fam.multi_indices().unwrap().iter().map(|a| (a.clone(), c(1.0, 0.0)))).unwrap();
        assert!((sup_norm_bracket(&q, DEFAULT_GRID_CAP).unwrap().lower - 3.0).abs() < 1e-12);
    }

    #[test]
    fn l2_and_bh_examples() {
        assert_eq!(l2_norm(&mono(&[1, 1], 2)), 1.0);
        let mut p = mono(&[0], 1);
        p.add_term(MultiIndex::new(vec![1]), c(1.0, 0.0)).unwrap();
        assert!((l2_norm(&p) - 2f64.sqrt()).abs() < 1e-15);

        assert!((bh_functional(&mono(&[1, 0], 1), 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((bh_functional(&mono(&[1, 0], 3), 3).unwrap() - 1.0).abs() < 1e-15);
        let lin = TrigPolynomial::from_terms(2, 1, [(MultiIndex::unit(2, 0), c(1.0, 0.0)), (MultiIndex::unit(2, 1), c(1.0, 0.0))]).unwrap();
        // exponent 2m/(m+1) = 1 at m = 1
        assert!((bh_functional(&lin, 1).unwrap() - 2.0).abs() < 1e-15);
        let quad =
            TrigPolynomial::from_terms(3, 2, [[1, 1, 0], [1, 0, 1], [0, 1, 1]].iter().map(|a| (MultiIndex::new(a.to_vec()), c(1.0, 0.0))))
                .unwrap();
        assert!((bh_functional(&quad, 2).unwrap() - 3f64.powf(0.75)).abs() < 1e-14);
        assert!(matches!(bh_functional(&mono(&[-1], 1), 1), Err(Error::NonAnalytic(_))));
    }

    #[test]
    fn ascent_examples() {
        let mut p = mono(&[0], 1);
        p.add_term(MultiIndex::new(vec![1]), c(1.0, 0.0)).unwrap();
        let grid = GridSpec::new(2, 1).unwrap();
        let vals = eval_grid(&p, &grid, DEFAULT_GRID_CAP).unwrap();
        let (idx, _) = argmax_modulus(&vals);
        let r = phase_ascent(&p, &AscentConfig { starts: 0, iters: 20, seed: 1 }, &[grid.node(idx)]);
        assert!((r.value - 2.0).abs() < 1e-12);

        let r = phase_ascent(&mono(&[4], 4), &AscentConfig::default(), &[]);
        assert!((r.value - 1.0).abs() < 1e-12);

        let mut q = mono(&[0], 1);
        q.add_term(MultiIndex::new(vec![1]), c(0.0, 1.0)).unwrap();
        let r = phase_ascent(&q, &AscentConfig { starts: 4, iters: 20, seed: 3 }, &[]);
        assert!((r.value - 2.0).abs() < 1e-10);
        assert!((r.phases[0] - 1.5 * PI).abs() < 1e-4);
    }

    #[test]
    fn ascent_is_deterministic() {
        let p = random_poly(FamilyKind::TSet, 3, 2, 11);
        let cfg = AscentConfig { starts: 6, iters: 30, seed: 99 };
        assert_eq!(phase_ascent(&p, &cfg, &[]), phase_ascent(&p, &cfg, &[]));
    }

    #[test]
    fn fourier_quadratic_form_bound_is_tight() {
        let n = 4;
        let mut p = TrigPolynomial::new(n, 2).unwrap();
        for j in 0..n {
            for k in 0..n {
                let mut e = vec![0; n];
                e[j] += 1;
                e[k] += 1;
                let w = Complex64::from_polar(1.0, 2.0 * PI * (j * k) as f64 / n as f64);
                p.add_term(MultiIndex::new(e), w).unwrap();
            }
        }
        let q = quadratic_form_bound(&p).unwrap();
        assert!((q - (n as f64).powf(1.5)).abs() < 1e-8);
        let b = sup_norm_bracket(&p, DEFAULT_GRID_CAP).unwrap();
        assert!(b.lower <= q && q <= b.upper);
    }

    #[test]
    fn jsonl_roundtrip() {
        let p = random_poly(FamilyKind::TSet, 2, 2, 5);
        let mut buf = Vec::new();
        p.write_jsonl(&mut buf).unwrap();
        let back = TrigPolynomial::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn parseval_on_fine_grid() {
        for seed in 0..200u64 {
            let m = 1 + (seed % 5) as usize;
            let n = 1 + (seed % 3) as usize;
            let kind = if seed % 2 == 0 { FamilyKind::TSet } else { FamilyKind::LambdaLE };
            let p = random_poly(kind, m, n, seed);
            let grid = GridSpec::new(4 * (1 + m), n).unwrap();
            let v = eval_grid(&p, &grid, DEFAULT_GRID_CAP).unwrap();
            let mean = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
            let l2 = l2_norm(&p).powi(2);
            assert!((l2 - mean).abs() <= 1e-8 * l2, "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bracket_consistency(seed in 0u64..10_000, m in 1usize..4, n in 1usize..3) {
            let p = random_poly(FamilyKind::TSet, m, n, seed);
            let b = sup_norm_bracket(&p, DEFAULT_GRID_CAP).unwrap();
            prop_assert!(l2_norm(&p) <= b.upper + 1e-12);
            let (refined, _) = refined_sup_bracket(&p, DEFAULT_GRID_CAP, &AscentConfig { starts: 2, iters: 20, seed }).unwrap();
            prop_assert!(b.lower <= refined.lower + 1e-12);
            prop_assert!(refined.lower <= b.upper + 1e-12);

            // finer grid never lowers the estimate when it contains the coarse one
            let k = 1 + 20 * m;
            let fine = sup_norm_bracket_heuristic(&p, &GridSpec::new(2 * k, n).unwrap(), DEFAULT_GRID_CAP).unwrap();
            prop_assert!(fine.lower >= b.lower - 1e-12);

            // a rotated grid still lands inside the certified bracket
            let rotated = sup_norm_bracket(&p.rotated(&vec![0.37; n]), DEFAULT_GRID_CAP).unwrap();
            prop_assert!(rotated.lower >= b.lower / 2.0 - 1e-12 && rotated.lower <= b.upper + 1e-12);
        }
    }
}
