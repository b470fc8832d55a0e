//! Monte-Carlo experiments on random-sign polynomials.
//!
//! Torus trials draw independent `+-1` signs per coefficient, bracket the sup
//! norm of `sum eps_alpha c_alpha z^alpha` on the certified grid, refine the
//! lower end by phase ascent, and compare with `sqrt(n log(1+m)) ||c||_2`.
//! Boolean searches compute exact sups by the inverse Walsh transform and
//! compare the best sign family with `6 sqrt(log 2) sqrt(N) ||c||_2`.
//!
//! Every trial uses its own RNG stream keyed by `(seed, trial)`, so results do
//! not depend on scheduling.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolean_cube::{sup_norm_boolean, wht_inverse};
use crate::error::{invalid, Error, Result};
use crate::index_sets::{enumerate_with_cap, FamilyKind, IndexFamily, DEFAULT_ENUMERATION_CAP};
use crate::multipliers::{Verdict, VerdictReport};
use crate::par;
use crate::trig_poly::{argmax_modulus, eval_grid, phase_ascent, AscentConfig, GridSpec, TrigPolynomial};

pub const BOOLEAN_MAX_DIM: usize = 20;
/// Grids above this size run their trials one at a time to bound memory.
const SEQUENTIAL_GRID: usize = 1 << 18;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn signs(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialSup {
    /// Best attained value (grid maximum refined by phase ascent).
    pub lower: f64,
    /// `min(2 * grid max, sum |c|)`.
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KszTrial {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub c_norm: f64,
    /// `sqrt(n log(1+m)) ||c||_2`.
    pub scale: f64,
    /// Mean of the per-trial sup estimates.
    pub mean_sup: f64,
    /// Mean bracket width, the error bar of `mean_sup`.
    pub mean_width: f64,
    /// Mean of the per-trial upper ends.
    pub mean_upper: f64,
    /// Empirical constant `mean_sup / scale`.
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub stddev: f64,
    #[serde(skip)]
    pub sups: Vec<TrialSup>,
}

fn trial_sup(family: &IndexFamily, coeffs: &[Complex64], grid: &GridSpec, cap: u64, rng_seed: (u64, u64)) -> Result<TrialSup> {
    let mut rng = trial_rng(rng_seed.0, rng_seed.1);
    let eps = signs(&mut rng, coeffs.len());
    let members = family.multi_indices().expect("torus family");
    let poly = TrigPolynomial::from_terms(
        family.dim,
        family.degree,
        members.iter().zip(coeffs.iter().zip(&eps)).filter(|(_, (c, _))| c.norm() > 0.0).map(|(a, (c, e))| (a.clone(), c * *e)),
    )?;
    let values = eval_grid(&poly, grid, cap)?;
    let (idx, gmax) = argmax_modulus(&values);
    drop(values);
    let asc = phase_ascent(&poly, &AscentConfig { starts: 0, iters: 20, seed: rng_seed.0 }, &[grid.node(idx)]);
    let lower = asc.value.max(gmax);
    let upper = (2.0 * gmax).min(poly.coefficient_l1()).max(lower);
    Ok(TrialSup { lower, upper })
}

/// Random-sign trials for coefficients `c` on `T(m, n)` (aligned with the
/// canonical enumeration order).
pub fn ksz_trig_trial(m: usize, n: usize, coeffs: &[Complex64], trials: usize, seed: u64, cap: u64) -> Result<KszTrial> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    if m == 0 {
        return Err(invalid("the normalisation sqrt(n log(1+m)) vanishes at m = 0"));
    }
    let family = enumerate_with_cap(FamilyKind::TSet, m, n, DEFAULT_ENUMERATION_CAP)?;
    if family.len() != coeffs.len() {
        return Err(Error::Mismatch(format!("{} coefficients for |T({m},{n})| = {}", coeffs.len(), family.len())));
    }
    let c_norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if c_norm == 0.0 {
        return Err(invalid("coefficient vector is zero"));
    }
    let grid = GridSpec::bernstein(m, n);
    let total = grid.total();
    if total > cap.into() {
        return Err(Error::GridTooLarge { total, cap });
    }
    let sequential = total > SEQUENTIAL_GRID.into();
    let run = |t: usize| trial_sup(&family, coeffs, &grid, cap, (seed, t as u64));
    let sups: Vec<TrialSup> = if sequential {
        (0..trials).map(run).collect::<Result<_>>()?
    } else {
        par::map_range(trials, run).into_iter().collect::<Result<_>>()?
    };
    let scale = (n as f64 * (1.0 + m as f64).ln()).sqrt() * c_norm;
    let tf = trials as f64;
    let mean_sup = sups.iter().map(|s| s.lower).sum::<f64>() / tf;
    let mean_upper = sups.iter().map(|s| s.upper).sum::<f64>() / tf;
    let mean_width = sups.iter().map(|s| s.upper - s.lower).sum::<f64>() / tf;
    let ratios: Vec<f64> = sups.iter().map(|s| s.lower / scale).collect();
    let mean_ratio = mean_sup / scale;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let stddev = if trials > 1 { (ratios.iter().map(|r| (r - mean_ratio).powi(2)).sum::<f64>() / (tf - 1.0)).sqrt() } else { 0.0 };
    Ok(KszTrial { m, n, trials, seed, c_norm, scale, mean_sup, mean_width, mean_upper, mean_ratio, max_ratio, stddev, sups })
}

/// `c = 1` on all of `T(m, n)`.
pub fn unit_coefficients(m: usize, n: usize) -> Result<Vec<Complex64>> {
    let family = enumerate_with_cap(FamilyKind::TSet, m, n, DEFAULT_ENUMERATION_CAP)?;
    Ok(vec![Complex64::new(1.0, 0.0); family.len()])
}

/// Exact mean of `sup |e_{-1} conj(z) + e_0 + e_1 z|` over the 8 sign patterns:
/// four patterns align at `z = +-1` (sup 3) and four reach `sqrt 5`.
pub fn exhaustive_mean_unit_t11() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

#[derive(Clone, Debug, Serialize)]
pub struct KszBooleanResult {
    pub best_signs: Vec<i8>,
    pub min_sup: f64,
    pub bound: f64,
    pub ratio: f64,
    pub report: VerdictReport,
}

/// Best of `trials` sign families for `sum xi_S c_S x^S` with exact sup norms.
/// `c` is indexed by the bitmask of `S` (length `2^N`).
pub fn ksz_boolean_search(c: &[f64], n: usize, trials: usize, seed: u64) -> Result<KszBooleanResult> {
    if n > BOOLEAN_MAX_DIM {
        return Err(Error::TooLarge { what: "Boolean sign search", n, limit: BOOLEAN_MAX_DIM });
    }
    if c.len() != 1usize << n {
        return Err(Error::Mismatch(format!("{} coefficients for 2^{n} subsets", c.len())));
    }
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let sups = par::map_range(trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let eps = signs(&mut rng, c.len());
        let coeffs: Vec<f64> = c.iter().zip(&eps).map(|(a, e)| a * e).collect();
        sup_norm_boolean(&wht_inverse(&coeffs).expect("power of two"))
    });
    let (best, min_sup) = sups.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let mut rng = trial_rng(seed, best as u64);
    let best_signs: Vec<i8> = signs(&mut rng, c.len()).into_iter().map(|s| s as i8).collect();
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let constant = 6.0 * 2f64.ln().sqrt() * (n as f64).sqrt();
    let bound = constant * c_norm;
    let verdict = if min_sup <= bound { Verdict::Verified } else { Verdict::Inconclusive };
    let report = VerdictReport {
        check_id: "ksz-cube-sign-search".into(),
        space: format!("cube:subsets-le({n},{n})"),
        m: n,
        n,
        p: None,
        lhs: min_sup,
        constant,
        bracket_lower: c_norm,
        bracket_upper: c_norm,
        verdict,
        seed,
        anchor: "ksz-cube-random-signs".into(),
        basis: "exact".into(),
        notes: format!("best of {trials} sign families, ratio {:.6}", if bound > 0.0 { min_sup / bound } else { 0.0 }),
    };
    Ok(KszBooleanResult { best_signs, min_sup, bound, ratio: if bound > 0.0 { min_sup / bound } else { 0.0 }, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub c_norm: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub stddev: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub notes: Vec<String>,
}

impl SweepTable {
    pub const HEADER: &'static str = "m,n,trials,seed,c_norm,mean_ratio,max_ratio,stddev";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ =
                writeln!(out, "{},{},{},{},{:?},{:?},{:?},{:?}", r.m, r.n, r.trials, r.seed, r.c_norm, r.mean_ratio, r.max_ratio, r.stddev);
        }
        out
    }

    /// `max / min` of the mean ratio column.
    pub fn spread(&self) -> f64 {
        let col = self.rows.iter().map(|r| r.mean_ratio);
        let max = col.clone().fold(f64::NEG_INFINITY, f64::max);
        let min = col.fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Trials with `c = 1` on every cell of `ms x ns`, all with the same base seed.
pub fn ksz_constant_sweep(ms: &[usize], ns: &[usize], trials: usize, seed: u64, cap: u64) -> Result<SweepTable> {
    if ms.is_empty() || ns.is_empty() {
        return Err(invalid("sweep ranges must be nonempty"));
    }
    let mut table = SweepTable::default();
    for &m in ms {
        for &n in ns {
            if m == 0 || n == 0 {
                table.notes.push(format!("skipped (m={m}, n={n}): empty normalisation"));
                continue;
            }
            let coeffs = unit_coefficients(m, n)?;
            match ksz_trig_trial(m, n, &coeffs, trials, seed, cap) {
                Ok(t) => table.rows.push(SweepRow {
                    m,
                    n,
                    trials,
                    seed,
                    c_norm: t.c_norm,
                    mean_ratio: t.mean_ratio,
                    max_ratio: t.max_ratio,
                    stddev: t.stddev,
                }),
                Err(Error::GridTooLarge { total, cap }) => {
                    table.notes.push(format!("skipped (m={m}, n={n}): grid of {total} nodes exceeds {cap}"))
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig_poly::DEFAULT_GRID_CAP;

    #[test]
    fn single_coefficient_is_deterministic_sup() {
        let (m, n) = (2, 2);
        let mut c = vec![Complex64::new(0.0, 0.0); unit_coefficients(m, n).unwrap().len()];
        c[5] = Complex64::new(0.0, 1.5);
        let t = ksz_trig_trial(m, n, &c, 20, 3, DEFAULT_GRID_CAP).unwrap();
        assert!(t.sups.iter().all(|s| (s.lower - 1.5).abs() < 1e-12));
        let expect = 1.0 / (n as f64 * (1.0 + m as f64).ln()).sqrt();
        assert!((t.mean_ratio - expect).abs() < 1e-12);
    }

    #[test]
    fn unit_t11_patterns() {
        // each trial must land on 3 or sqrt 5
        let c = unit_coefficients(1, 1).unwrap();
        let t = ksz_trig_trial(1, 1, &c, 256, 11, DEFAULT_GRID_CAP).unwrap();
        for s in &t.sups {
            assert!((s.lower - 3.0).abs() < 1e-9 || (s.lower - 5f64.sqrt()).abs() < 1e-9, "{s:?}");
            assert!(s.upper >= s.lower);
        }
    }

    #[test]
    fn deterministic_summary() {
        let c = unit_coefficients(2, 2).unwrap();
        let a = ksz_trig_trial(2, 2, &c, 16, 5, DEFAULT_GRID_CAP).unwrap();
        let b = ksz_trig_trial(2, 2, &c, 16, 5, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(a.sups, b.sups);
        assert_eq!(a.mean_ratio.to_bits(), b.mean_ratio.to_bits());
    }

    #[test]
    fn boolean_examples() {
        let r = ksz_boolean_search(&[0.5, -2.0], 1, 8, 1).unwrap();
        assert!((r.min_sup - 2.5).abs() < 1e-15);
        assert!(r.min_sup <= 2f64.sqrt() * (0.25f64 + 4.0).sqrt() + 1e-12);
        assert_eq!(r.report.verdict, Verdict::Verified);
        let mut c = vec![0.0; 16];
        c[9] = 0.7;
        let r = ksz_boolean_search(&c, 4, 4, 2).unwrap();
        assert!((r.min_sup - 0.7).abs() < 1e-15);
        assert!(ksz_boolean_search(&[1.0; 8], 2, 1, 0).is_err());
        assert!(ksz_boolean_search(&[1.0; 2], 21, 1, 0).is_err());
    }

    #[test]
    fn sweep_single_cell_matches_trial() {
        let table = ksz_constant_sweep(&[2], &[1], 32, 9, DEFAULT_GRID_CAP).unwrap();
        let t = ksz_trig_trial(2, 1, &unit_coefficients(2, 1).unwrap(), 32, 9, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].mean_ratio, t.mean_ratio);
        assert_eq!(table.rows[0].max_ratio, t.max_ratio);
        assert!(table.to_csv().starts_with(SweepTable::HEADER));
        let skipped = ksz_constant_sweep(&[0, 1], &[1], 4, 9, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(skipped.rows.len(), 1);
        assert_eq!(skipped.notes.len(), 1);
    }
}
