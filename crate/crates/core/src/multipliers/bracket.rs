use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{diagonal_attainer, holder_inverse_exponent, two_summing_norm, weighted_lp_norm, MultiplierSpec, Space};
use crate::boolean_cube::{majority, multiplier_norm_boolean_exact, sup_norm_boolean, wht_forward, wht_inverse, EXACT_NORM_MAX_DIM};
use crate::error::{Error, Result};
use crate::index_sets::{FamilyKind, IndexFamily, MultiIndex};
use crate::par;
use crate::trig_poly::{certified_sup, phase_ascent, AscentConfig, BracketMethod, GridSpec, NormBracket, TrigPolynomial, DEFAULT_GRID_CAP};

/// Random candidates per unit of budget.
pub const CANDIDATES_PER_BUDGET: usize = 64;
const BOOLEAN_SEARCH_MAX_DIM: usize = 20;

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Cap for grids that certify the sup of a single candidate.
    pub candidate_grid_cap: u64,
    /// Phase-ascent effort for the uncertified estimate.
    pub ascent: AscentConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { candidate_grid_cap: 1 << 20, ascent: AscentConfig { starts: 4, iters: 30, seed: 0 } }
    }
}

impl SearchConfig {
    pub fn with_grid_cap(grid_cap: u64) -> Self {
        SearchConfig { candidate_grid_cap: grid_cap.min(DEFAULT_GRID_CAP).min(1 << 20), ..Self::default() }
    }
}

/// Certified bracket for `||M_xi||` plus the best candidate found.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplierBracket {
    pub bracket: NormBracket,
    /// Description of the candidate attaining `bracket.lower`.
    pub witness: String,
    /// Uncertified estimate: best ratio with the sup replaced by its phase-ascent lower bound.
    pub estimate: f64,
    pub candidates: usize,
}

#[derive(Clone, Debug)]
struct Candidate {
    ratio: f64,
    label: String,
    coeffs: Option<Vec<Complex64>>,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    if b.ratio > a.ratio {
        b
    } else {
        a
    }
}

fn ones(len: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); len]
}

/// Coefficients of `sum_{j,k} w^{jk} z_j z_k` with `w = exp(2 pi i / n)` on the family,
/// or `None` if the family lacks a degree-two analytic index.
fn fourier_quadratic(family: &IndexFamily) -> Option<Vec<Complex64>> {
    let members = family.multi_indices()?;
    let n = family.dim;
    if n < 2 || family.degree < 2 {
        return None;
    }
    let mut any = false;
    let coeffs = members
        .iter()
        .map(|a| {
            if a.order() != 2 || !a.is_analytic() {
                return Complex64::new(0.0, 0.0);
            }
            any = true;
            let nz: Vec<usize> = a.entries().iter().enumerate().filter(|(_, &e)| e != 0).map(|(j, _)| j).collect();
            match nz.as_slice() {
                [j] => Complex64::from_polar(1.0, 2.0 * PI * (j * j) as f64 / n as f64),
                [j, k] => Complex64::from_polar(2.0, 2.0 * PI * (j * k) as f64 / n as f64),
                _ => Complex64::new(0.0, 0.0),
            }
        })
        .collect();
    any.then_some(coeffs)
}

fn torus_poly(family: &IndexFamily, coeffs: &[Complex64]) -> TrigPolynomial {
    let members = family.multi_indices().expect("torus family");
    TrigPolynomial::from_terms(
        family.dim,
        family.degree,
        members.iter().zip(coeffs).filter(|(_, c)| c.norm() > 0.0).map(|(a, c)| (a.clone(), *c)),
    )
    .expect("family members respect the degree bound")
}

fn random_signs(len: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

/// Grades present in the family, each as an indicator vector.
fn grade_indicators(family: &IndexFamily) -> Vec<(usize, Vec<Complex64>)> {
    let grades: Vec<usize> = match (family.multi_indices(), family.subsets()) {
        (Some(v), _) => v.iter().map(|a| a.order() as usize).collect(),
        (_, Some(v)) => v.iter().map(|s| s.count_ones() as usize).collect(),
        _ => unreachable!(),
    };
    let top = grades.iter().copied().max().unwrap_or(0);
    (0..=top)
        .filter(|k| grades.contains(k))
        .map(|k| {
            let ind = grades.iter().map(|&g| Complex64::new(if g == k { 1.0 } else { 0.0 }, 0.0)).collect();
            (k, ind)
        })
        .collect()
}

/// Certified bracket for `||M_xi : space -> l_p||`.
///
/// The upper end is the 2-summing norm `||xi||_r`. The lower end is the best
/// ratio `||(xi t)||_p / sup-upper(P_t)` over a candidate bank: characters,
/// positive (grade-wise all-ones) polynomials, a Fourier quadratic form,
/// `64 * budget` random-sign polynomials (plain and Hoelder-weighted), and on
/// the cube also random sign vertices, majority and exact vertex enumeration
/// for the full cube with `N <= 4`.
pub fn multiplier_norm_bracket(spec: &MultiplierSpec, budget: usize, seed: u64, cfg: &SearchConfig) -> Result<MultiplierBracket> {
    let upper = two_summing_norm(&spec.xi, spec.p)?;
    if upper == 0.0 {
        return Ok(MultiplierBracket { bracket: NormBracket::exact(0.0), witness: "zero weights".into(), estimate: 0.0, candidates: 0 });
    }
    let mut out = if spec.space.is_boolean() { boolean_search(spec, budget, seed)? } else { torus_search(spec, budget, seed, cfg) };
    out.bracket.upper = upper;
    out.bracket.lower = out.bracket.lower.min(upper);
    out.estimate = out.estimate.clamp(out.bracket.lower, upper);
    Ok(out)
}

fn character_candidate(spec: &MultiplierSpec) -> Candidate {
    let (idx, best) = spec.xi.iter().enumerate().fold((0, -1.0), |acc, (i, c)| if c.norm() > acc.1 { (i, c.norm()) } else { acc });
    let label = match (spec.family.multi_indices(), spec.family.subsets()) {
        (Some(v), _) => format!("character [{}]", v[idx]),
        (_, Some(v)) => format!("character S={:#b}", v[idx]),
        _ => unreachable!(),
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); spec.xi.len()];
    coeffs[idx] = Complex64::new(1.0, 0.0);
    Candidate { ratio: best, label, coeffs: Some(coeffs) }
}

fn positive_candidates(spec: &MultiplierSpec) -> Candidate {
    // positive coefficients: the sup is attained at the identity, equal to the l1 mass
    let all = ones(spec.xi.len());
    let mut best =
        Candidate { ratio: weighted_lp_norm(&spec.xi, &all, spec.p) / spec.xi.len() as f64, label: "all-ones".into(), coeffs: Some(all) };
    for (k, ind) in grade_indicators(&spec.family) {
        let mass = ind.iter().filter(|c| c.re > 0.0).count() as f64;
        let c =
            Candidate { ratio: weighted_lp_norm(&spec.xi, &ind, spec.p) / mass, label: format!("all-ones grade {k}"), coeffs: Some(ind) };
        best = better(best, c);
    }
    best
}

fn torus_search(spec: &MultiplierSpec, budget: usize, seed: u64, cfg: &SearchConfig) -> MultiplierBracket {
    let family = &spec.family;
    let p = spec.p;
    let cap = cfg.candidate_grid_cap;
    let mut count = 1 + grade_indicators(family).len() + 1;
    let mut best = better(character_candidate(spec), positive_candidates(spec));

    let grid_ok = GridSpec::bernstein(family.degree, family.dim).total() <= cap.into();
    let quadratic = matches!(family.kind, FamilyKind::LambdaEQ) && family.degree == 2;

    if let Some(t) = fourier_quadratic(family) {
        count += 1;
        let sup = certified_sup(&torus_poly(family, &t), cap).upper;
        best = better(
            best,
            Candidate { ratio: weighted_lp_norm(&spec.xi, &t, p) / sup, label: "fourier quadratic form".into(), coeffs: Some(t) },
        );
    }

    if grid_ok || quadratic {
        let total = CANDIDATES_PER_BUDGET * budget.max(1);
        let weights = diagonal_attainer(&spec.xi, p).unwrap_or_else(|_| vec![1.0; spec.xi.len()]);
        let results = par::map_range(total, |i| {
            let signs = random_signs(family.len(), seed, i as u64);
            let t: Vec<Complex64> = if i % 2 == 0 {
                signs.iter().map(|&s| Complex64::new(s, 0.0)).collect()
            } else {
                signs.iter().zip(&weights).map(|(&s, &w)| Complex64::new(s * w, 0.0)).collect()
            };
            let sup = certified_sup(&torus_poly(family, &t), cap).upper;
            let ratio = if sup > 0.0 { weighted_lp_norm(&spec.xi, &t, p) / sup } else { 0.0 };
            (ratio, t)
        });
        count += total;
        for (i, (ratio, t)) in results.into_iter().enumerate() {
            let kind = if i % 2 == 0 { "random signs" } else { "weighted random signs" };
            best = better(best, Candidate { ratio, label: format!("{kind} #{i}"), coeffs: Some(t) });
        }
    }

    // uncertified estimate: replace the certified sup by the best attained value
    let estimate = best
        .coeffs
        .as_ref()
        .map(|t| {
            let poly = torus_poly(family, t);
            let asc = phase_ascent(&poly, &AscentConfig { seed, ..cfg.ascent }, &[vec![0.0; family.dim]]);
            if asc.value > 0.0 {
                weighted_lp_norm(&spec.xi, t, p) / asc.value
            } else {
                best.ratio
            }
        })
        .unwrap_or(best.ratio);

    MultiplierBracket {
        bracket: NormBracket { lower: best.ratio, upper: f64::INFINITY, method: BracketMethod::CandidateSearch },
        witness: best.label,
        estimate,
        candidates: count,
    }
}

/// Coefficients over all `2^N` subsets from a family-aligned vector.
fn spread(family: &IndexFamily, t: &[Complex64]) -> Vec<f64> {
    let mut full = vec![0.0; 1usize << family.dim];
    for (s, c) in family.subsets().expect("subset family").iter().zip(t) {
        full[*s as usize] = c.re;
    }
    full
}

fn boolean_ratio(spec: &MultiplierSpec, t: &[Complex64]) -> f64 {
    let table = wht_inverse(&spread(&spec.family, t)).expect("power of two");
    let sup = sup_norm_boolean(&table);
    if sup > 0.0 {
        weighted_lp_norm(&spec.xi, t, spec.p) / sup
    } else {
        0.0
    }
}

/// Restriction of the Walsh expansion of `table` to the family.
fn project(family: &IndexFamily, table: &[f64]) -> Vec<Complex64> {
    let w = wht_forward(table).expect("power of two");
    family.subsets().expect("subset family").iter().map(|&s| Complex64::new(w[s as usize], 0.0)).collect()
}

fn boolean_search(spec: &MultiplierSpec, budget: usize, seed: u64) -> Result<MultiplierBracket> {
    let family = &spec.family;
    let n = family.dim;
    let xi_real: Vec<f64> = spec.xi.iter().map(|c| c.norm()).collect();

    if spec.space.is_full_cube() && n <= EXACT_NORM_MAX_DIM {
        let mut full = vec![0.0; 1 << n];
        for (s, x) in family.subsets().expect("subset family").iter().zip(&xi_real) {
            full[*s as usize] = *x;
        }
        let (value, _) = multiplier_norm_boolean_exact(&full, spec.p, n)?;
        return Ok(MultiplierBracket {
            bracket: NormBracket { lower: value, upper: value, method: BracketMethod::Exact },
            witness: "exact vertex enumeration".into(),
            estimate: value,
            candidates: 1 << (1 << n),
        });
    }
    if n > BOOLEAN_SEARCH_MAX_DIM {
        return Err(Error::TooLarge { what: "Boolean candidate search", n, limit: BOOLEAN_SEARCH_MAX_DIM });
    }

    let mut best = better(character_candidate(spec), positive_candidates(spec));
    let mut count = 1 + grade_indicators(family).len() + 1;

    if n % 2 == 1 {
        let maj = majority(n)?;
        let t = project(family, maj.table());
        count += 1;
        best = better(best, Candidate { ratio: boolean_ratio(spec, &t), label: "majority projection".into(), coeffs: None });
    }

    let total = CANDIDATES_PER_BUDGET * budget.max(1);
    let weights = diagonal_attainer(&spec.xi, spec.p)?;
    let results = par::map_range(total, |i| {
        let t: Vec<Complex64> = match i % 3 {
            0 => random_signs(family.len(), seed, i as u64).into_iter().map(|s| Complex64::new(s, 0.0)).collect(),
            1 => random_signs(family.len(), seed, i as u64).into_iter().zip(&weights).map(|(s, w)| Complex64::new(s * w, 0.0)).collect(),
            _ => project(family, &random_signs(1 << n, seed, i as u64)),
        };
        boolean_ratio(spec, &t)
    });
    count += total;
    for (i, ratio) in results.into_iter().enumerate() {
        let kind = ["random signs", "weighted random signs", "projected vertex"][i % 3];
        best = better(best, Candidate { ratio, label: format!("{kind} #{i}"), coeffs: None });
    }
    Ok(MultiplierBracket {
        bracket: NormBracket { lower: best.ratio, upper: f64::INFINITY, method: BracketMethod::CandidateSearch },
        witness: best.label,
        estimate: best.ratio,
        candidates: count,
    })
}

/// Bracket for the p-Sidon constant of a space.
#[derive(Clone, Debug, Serialize)]
pub struct SidonEstimate {
    pub space: Space,
    pub p: f64,
    pub bracket: NormBracket,
    pub witness: String,
    pub estimate: f64,
    /// Growth envelope `gamma^m (n/m)^(m/r - 1/2)`.
    pub envelope: f64,
    /// Source of the upper end.
    pub upper_basis: String,
}

/// `gamma^m (n/m)^(m/r - 1/2)`; equals 1 when `m = 0`.
pub fn sidon_envelope(m: usize, n: usize, p: f64, gamma: f64) -> Result<f64> {
    if m == 0 {
        return Ok(1.0);
    }
    let inv_r = holder_inverse_exponent(p)?;
    let exponent = m as f64 * inv_r - 0.5;
    Ok(gamma.powi(m as i32) * (n as f64 / m as f64).powf(exponent))
}

/// Bracket for `chi_p(space)`, the norm of `M_1`.
///
/// On top of the multiplier bracket, structural upper bounds are used: Parseval
/// (`p >= 2`), linear polynomials (`chi_p <= chi_1 = 1` for analytic degree-one
/// spaces and real degree-one cube spaces) and exact enumeration of the full
/// cube at small `N`.
pub fn sidon_estimate(space: Space, p: f64, budget: usize, seed: u64, cap: u64, gamma: f64, cfg: &SearchConfig) -> Result<SidonEstimate> {
    let spec = MultiplierSpec::ones(space, p, cap)?;
    let envelope = sidon_envelope(space.degree, space.dim, p, gamma)?;
    let linear = space.degree <= 1
        && matches!(space.kind, FamilyKind::LambdaLE | FamilyKind::LambdaEQ | FamilyKind::SubsetsLE | FamilyKind::SubsetsEQ);
    let structural = if p >= 2.0 {
        Some("parseval")
    } else if linear {
        Some("linear-phase-alignment")
    } else {
        None
    };
    if let Some(basis) = structural {
        // a single character attains 1
        return Ok(SidonEstimate {
            space,
            p,
            bracket: NormBracket { lower: 1.0, upper: 1.0, method: BracketMethod::Exact },
            witness: format!("character [{}]", first_member(&spec.family)),
            estimate: 1.0,
            envelope,
            upper_basis: basis.into(),
        });
    }
    let res = multiplier_norm_bracket(&spec, budget, seed, cfg)?;
    let upper_basis = if res.bracket.method == BracketMethod::Exact { "exact-vertex-enumeration" } else { "two-summing-norm" };
    Ok(SidonEstimate {
        space,
        p,
        bracket: res.bracket,
        witness: res.witness,
        estimate: res.estimate,
        envelope,
        upper_basis: upper_basis.into(),
    })
}

fn first_member(family: &IndexFamily) -> String {
    match (family.multi_indices(), family.subsets()) {
        (Some(v), _) => v.first().map(MultiIndex::to_string).unwrap_or_default(),
        (_, Some(v)) => v.first().map(|s| format!("S={s:#b}")).unwrap_or_default(),
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::count_exact;

    const CAP: u64 = 1 << 22;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn single_weight_collapses() {
        for (space, idx) in [
            (Space::torus(FamilyKind::TSet, 2, 2).unwrap(), 3usize),
            (Space::full_cube(3), 5),
            (Space::boolean(FamilyKind::SubsetsLE, 2, 6).unwrap(), 4),
        ] {
            for p in [1.0, 1.5, 2.0] {
                let len = space.family(CAP).unwrap().len();
                let mut xi = vec![Complex64::new(0.0, 0.0); len];
                xi[idx] = Complex64::new(0.0, -2.5);
                let spec = MultiplierSpec::new(space, xi, p, CAP).unwrap();
                let b = multiplier_norm_bracket(&spec, 1, 1, &cfg()).unwrap().bracket;
                assert!((b.lower - 2.5).abs() < 1e-12 && (b.upper - 2.5).abs() < 1e-12, "{space} {b:?}");
            }
        }
    }

    #[test]
    fn linear_ones_contains_one() {
        let spec = MultiplierSpec::ones(Space::torus(FamilyKind::LambdaEQ, 1, 4).unwrap(), 1.0, CAP).unwrap();
        let b = multiplier_norm_bracket(&spec, 1, 3, &cfg()).unwrap().bracket;
        assert!(b.lower <= 1.0 + 1e-12 && b.upper >= 1.0);
        assert!((b.lower - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ones_upper_is_root_count() {
        for (m, n) in [(2usize, 2usize), (2, 3)] {
            let space = Space::torus(FamilyKind::LambdaLE, m, n).unwrap();
            let spec = MultiplierSpec::ones(space, 1.0, CAP).unwrap();
            let b = multiplier_norm_bracket(&spec, 1, 9, &cfg()).unwrap();
            let count = count_exact(FamilyKind::LambdaLE, m, n).to_string().parse::<f64>().unwrap();
            assert_eq!(b.bracket.upper, count.sqrt());
            assert!(b.bracket.lower >= 1.0 && b.bracket.lower <= b.bracket.upper);
            assert!(b.estimate >= b.bracket.lower);
        }
    }

    #[test]
    fn candidates_never_exceed_upper() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (space, p) in [
            (Space::torus(FamilyKind::TSet, 2, 2).unwrap(), 1.0),
            (Space::torus(FamilyKind::LambdaEQ, 2, 5).unwrap(), 4.0 / 3.0),
            (Space::boolean(FamilyKind::SubsetsEQ, 2, 5).unwrap(), 1.0),
        ] {
            let family = space.family(CAP).unwrap();
            let xi: Vec<Complex64> = (0..family.len()).map(|_| Complex64::new(rng.random::<f64>(), 0.0)).collect();
            let spec = MultiplierSpec::new(space, xi, p, CAP).unwrap();
            let b = multiplier_norm_bracket(&spec, 2, 4, &cfg()).unwrap();
            assert_eq!(b.bracket.upper, two_summing_norm(&spec.xi, p).unwrap());
            assert!(b.bracket.lower <= b.bracket.upper + 1e-9);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = MultiplierSpec::ones(Space::torus(FamilyKind::TSet, 2, 2).unwrap(), 1.0, CAP).unwrap();
        let a = multiplier_norm_bracket(&spec, 1, 5, &cfg()).unwrap();
        let b = multiplier_norm_bracket(&spec, 1, 5, &cfg()).unwrap();
        assert_eq!(a.bracket, b.bracket);
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn sidon_examples() {
        let s = sidon_estimate(Space::torus(FamilyKind::LambdaEQ, 1, 5).unwrap(), 1.0, 1, 0, CAP, std::f64::consts::E, &cfg()).unwrap();
        assert!((s.bracket.lower - 1.0).abs() < 1e-12 && (s.bracket.upper - 1.0).abs() < 1e-12);
        for m in 1..=2 {
            for n in 1..=3 {
                for p in [2.0, 3.0] {
                    let s = sidon_estimate(Space::torus(FamilyKind::LambdaLE, m, n).unwrap(), p, 1, 0, CAP, 1.0, &cfg()).unwrap();
                    assert!((s.bracket.lower - 1.0).abs() < 1e-6 && (s.bracket.upper - 1.0).abs() < 1e-6);
                }
            }
        }
        let s = sidon_estimate(Space::full_cube(2), 1.0, 1, 0, CAP, 1.0, &cfg()).unwrap();
        assert!((s.bracket.lower - 2.0).abs() < 1e-9 && (s.bracket.upper - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fourier_quadratic_ratio_is_root_n() {
        for n in [2usize, 4, 8] {
            let spec = MultiplierSpec::ones(Space::torus(FamilyKind::LambdaEQ, 2, n).unwrap(), 1.0, CAP).unwrap();
            let t = fourier_quadratic(&spec.family).unwrap();
            let sup = certified_sup(&torus_poly(&spec.family, &t), CAP).upper;
            let ratio = weighted_lp_norm(&spec.xi, &t, 1.0) / sup;
            assert!((ratio - (n as f64).sqrt()).abs() < 1e-6 * (n as f64).sqrt());
        }
    }

    #[test]
    fn envelope_values() {
        assert_eq!(sidon_envelope(0, 5, 1.0, 2.0).unwrap(), 1.0);
        // m/r - 1/2 = (m-1)/2 at p = 1
        let v = sidon_envelope(3, 12, 1.0, 1.0).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }
}
