use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use super::{diagonal_norm, holder_inverse_exponent, Space};
use crate::error::{invalid, Error, Result};
use crate::index_sets::{FamilyKind, IndexFamily};
use crate::trig_poly::NormBracket;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Inconclusive,
    Counterexample,
    /// Within the envelope of an inequality with an unspecified constant.
    Envelope,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "verified",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Counterexample => "counterexample",
            Verdict::Envelope => "envelope",
        })
    }
}

/// Structured verdict line shared by all checkers.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub check_id: String,
    pub space: String,
    pub m: usize,
    pub n: usize,
    pub p: Option<f64>,
    pub lhs: f64,
    pub constant: f64,
    pub bracket_lower: f64,
    pub bracket_upper: f64,
    pub verdict: Verdict,
    pub seed: u64,
    pub anchor: String,
    /// "certified" for explicit constants, "envelope" for configured ones, "exact" for enumerations.
    pub basis: String,
    pub notes: String,
}

impl VerdictReport {
    /// Trichotomy for `lhs <= constant * norm` with `norm` in `[lower, upper]`.
    pub fn classify(lhs: f64, constant: f64, bracket: &NormBracket, tol_abs: f64, tol_rel: f64) -> Verdict {
        let slack = |v: f64| v * (1.0 + tol_rel) + tol_abs;
        if lhs <= slack(constant * bracket.lower) {
            Verdict::Verified
        } else if lhs > slack(constant * bracket.upper) {
            Verdict::Counterexample
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Configured values for constants the theory leaves unspecified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub c: f64,
    pub gamma: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c: 1.0, gamma: E }
    }
}

/// Which multiplier inequality to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// `||xi||_r <= 2 sqrt2 e^2 sqrt(n log(1+20m)) ||M_xi||` on torus polynomials.
    TorusGrid,
    /// `||xi||_r <= C sqrt(n log(1+m)) ||M_xi||`.
    TorusKsz,
    /// `||xi||_r <= C sqrt(n log(1+mn)) ||M_xi||`.
    TorusKszDegree,
    /// `||xi||_r <= 2 sqrt2 e^2 sqrt(1 + N log 2) ||M_xi||` on the full cube.
    CubeFull,
    /// Degree-restricted cube version with `(1+sqrt2)^d`, or `2^(d-1)` when homogeneous.
    CubeDegree,
    /// `||xi||_r <= 2 sqrt2 e^2 sqrt(n) sqrt(log(1+20m))^beta_m ||M_xi||`, `1 <= p <= 2m/(m+1)`.
    TorusInterpolated,
    /// `(z*_n)^m <= 2 sqrt2 e^2 (m!)^(1/r) sqrt(log(1+20m)) n^-(m/r-1/2) ||M_z||` on `Lambda=(m,n)`.
    TorusRearranged,
    /// `(z*_N)^m <= 4 sqrt2 e^2 2^(m-1) (m!)^(1/r) sqrt(log(1+20m)) N^-(m/r-1/2) ||M_z||` on `|S| = m`.
    CubeRearranged,
}

impl CheckMode {
    pub const ALL: [CheckMode; 8] = [
        CheckMode::TorusGrid,
        CheckMode::TorusKsz,
        CheckMode::TorusKszDegree,
        CheckMode::CubeFull,
        CheckMode::CubeDegree,
        CheckMode::TorusInterpolated,
        CheckMode::TorusRearranged,
        CheckMode::CubeRearranged,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CheckMode::TorusGrid => "torus-grid",
            CheckMode::TorusKsz => "torus-ksz",
            CheckMode::TorusKszDegree => "torus-ksz-degree",
            CheckMode::CubeFull => "cube-full",
            CheckMode::CubeDegree => "cube-degree",
            CheckMode::TorusInterpolated => "torus-interpolated",
            CheckMode::TorusRearranged => "torus-rearranged",
            CheckMode::CubeRearranged => "cube-rearranged",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            CheckMode::TorusGrid => "multiplier-lower-bound-bernstein-grid",
            CheckMode::TorusKsz => "multiplier-lower-bound-ksz",
            CheckMode::TorusKszDegree => "multiplier-lower-bound-ksz-degree",
            CheckMode::CubeFull => "cube-multiplier-lower-bound",
            CheckMode::CubeDegree => "cube-degree-multiplier-lower-bound",
            CheckMode::TorusInterpolated => "interpolated-multiplier-lower-bound",
            CheckMode::TorusRearranged => "rearrangement-multiplier-bound",
            CheckMode::CubeRearranged => "cube-rearrangement-multiplier-bound",
        }
    }

    /// Checks against configured constants yield envelope verdicts.
    pub fn uses_configured_constant(self) -> bool {
        matches!(self, CheckMode::TorusKsz | CheckMode::TorusKszDegree)
    }

    pub fn is_rearranged(self) -> bool {
        matches!(self, CheckMode::TorusRearranged | CheckMode::CubeRearranged)
    }
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CheckMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckMode::ALL.into_iter().find(|m| m.id() == s).ok_or_else(|| invalid(format!("unknown check mode {s:?}")))
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

fn validate(mode: CheckMode, space: &Space, p: f64) -> Result<()> {
    let mismatch = |what: &str| Err(Error::Mismatch(format!("{mode} needs {what}, got {space}")));
    match mode {
        CheckMode::TorusGrid | CheckMode::TorusKsz | CheckMode::TorusKszDegree if space.is_boolean() => return mismatch("a torus space"),
        CheckMode::TorusInterpolated if space.kind != FamilyKind::LambdaLE => return mismatch("lambda-le"),
        CheckMode::TorusRearranged if space.kind != FamilyKind::LambdaEQ => return mismatch("lambda-eq"),
        CheckMode::CubeFull if !space.is_full_cube() => return mismatch("the full cube"),
        CheckMode::CubeDegree if !space.is_boolean() => return mismatch("a cube space"),
        CheckMode::CubeRearranged if space.kind != FamilyKind::SubsetsEQ => return mismatch("subsets-eq"),
        _ => {}
    }
    if p > 2.0 {
        return Err(invalid(format!("{mode} holds for 1 <= p <= 2, got {p}")));
    }
    let m = space.degree as f64;
    let needs_bh = matches!(mode, CheckMode::TorusInterpolated | CheckMode::TorusRearranged | CheckMode::CubeRearranged);
    if needs_bh && (space.degree == 0 || p > 2.0 * m / (m + 1.0) + 1e-12) {
        return Err(invalid(format!("{mode} needs 1 <= p <= 2m/(m+1), got p = {p}, m = {m}")));
    }
    Ok(())
}

/// The constant multiplying `||M_xi||` on the right-hand side.
pub fn check_constant(mode: CheckMode, space: &Space, p: f64, constants: &Constants) -> Result<f64> {
    validate(mode, space, p)?;
    let base = 2.0 * 2f64.sqrt() * E * E;
    let m = space.degree;
    let n = space.dim as f64;
    let mf = m as f64;
    let inv_r = holder_inverse_exponent(p)?;
    let log20 = (1.0 + 20.0 * mf).ln();
    Ok(match mode {
        CheckMode::TorusGrid => base * (n * log20).sqrt(),
        CheckMode::TorusKsz => constants.c * (n * (1.0 + mf).ln()).sqrt(),
        CheckMode::TorusKszDegree => constants.c * (n * (1.0 + mf * n).ln()).sqrt(),
        CheckMode::CubeFull => base * (1.0 + n * 2f64.ln()).sqrt(),
        CheckMode::CubeDegree => {
            let growth = if space.kind == FamilyKind::SubsetsEQ { 2f64.powi(m as i32 - 1) } else { (1.0 + 2f64.sqrt()).powi(m as i32) };
            base * growth * (1.0 + n * log20).sqrt()
        }
        CheckMode::TorusInterpolated => {
            let beta = if m == 1 { 1.0 } else { 1.0 - (1.0 - 1.0 / p) / (1.0 - (mf + 1.0) / (2.0 * mf)) };
            base * n.sqrt() * log20.sqrt().powf(beta)
        }
        CheckMode::TorusRearranged => base * factorial(m).powf(inv_r) * log20.sqrt() / n.powf(mf * inv_r - 0.5),
        CheckMode::CubeRearranged => {
            2.0 * base * 2f64.powi(m as i32 - 1) * factorial(m).powf(inv_r) * log20.sqrt() / n.powf(mf * inv_r - 0.5)
        }
    })
}

/// Multiplier weights `xi_alpha = (z*)^alpha` (or `prod_{j in S} z*_j`) built from the
/// decreasing rearrangement of `z`.
pub fn rearranged_weights(z: &[f64], family: &IndexFamily) -> Result<Vec<Complex64>> {
    if z.len() != family.dim {
        return Err(Error::Mismatch(format!("sequence of length {} for dimension {}", z.len(), family.dim)));
    }
    let mut zs: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    zs.sort_by(|a, b| b.total_cmp(a));
    let w = match (family.multi_indices(), family.subsets()) {
        (Some(v), _) => v.iter().map(|a| a.entries().iter().zip(&zs).map(|(&e, &x)| x.powi(e)).product::<f64>()).collect::<Vec<_>>(),
        (_, Some(v)) => v.iter().map(|&s| (0..family.dim).filter(|j| s >> j & 1 == 1).map(|j| zs[j]).product::<f64>()).collect(),
        _ => unreachable!(),
    };
    Ok(w.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

pub struct CheckInput<'a> {
    pub mode: CheckMode,
    pub space: Space,
    pub p: f64,
    /// `xi` on the family, or the sequence `z` for rearranged modes.
    pub weights: &'a [Complex64],
    pub bracket: &'a NormBracket,
    pub seed: u64,
}

/// Evaluates one inequality against a norm bracket.
///
/// The left side is `||xi||_r`, or `(z*_n)^m` for the rearranged modes; the
/// verdict is verified iff it is at most `constant * lower`, counterexample iff
/// it exceeds `constant * upper`. Configured-constant modes report `envelope`
/// instead of `verified` and never report a counterexample.
pub fn kislyakov_check(input: &CheckInput<'_>, constants: &Constants, tol_abs: f64, tol_rel: f64) -> Result<VerdictReport> {
    let CheckInput { mode, space, p, weights, bracket, seed } = *input;
    let constant = check_constant(mode, &space, p, constants)?;
    let lhs = if mode.is_rearranged() {
        if weights.len() != space.dim {
            return Err(Error::Mismatch(format!("{mode} expects a sequence of length {}, got {}", space.dim, weights.len())));
        }
        let smallest = weights.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
        smallest.powi(space.degree as i32)
    } else {
        diagonal_norm(weights, p)?
    };
    let mut verdict = VerdictReport::classify(lhs, constant, bracket, tol_abs, tol_rel);
    let mut notes = format!("bracket method {}", bracket.method);
    if mode.uses_configured_constant() {
        verdict = match verdict {
            Verdict::Verified => Verdict::Envelope,
            _ => {
                notes.push_str(&format!("; exceeds envelope at C = {}", constants.c));
                Verdict::Inconclusive
            }
        };
    }
    Ok(VerdictReport {
        check_id: mode.id().to_string(),
        space: space.to_string(),
        m: space.degree,
        n: space.dim,
        p: Some(p),
        lhs,
        constant,
        bracket_lower: bracket.lower,
        bracket_upper: bracket.upper,
        verdict,
        seed,
        anchor: mode.anchor().to_string(),
        basis: if mode.uses_configured_constant() { "envelope" } else { "certified" }.to_string(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::{multiplier_norm_bracket, MultiplierSpec, SearchConfig};
    use crate::trig_poly::BracketMethod;

    const CAP: u64 = 1 << 22;

    fn check(mode: CheckMode, space: Space, p: f64, xi: &[Complex64]) -> VerdictReport {
        let spec = if mode.is_rearranged() {
            let family = space.family(CAP).unwrap();
            let z: Vec<f64> = xi.iter().map(|c| c.re).collect();
            MultiplierSpec::new(space, rearranged_weights(&z, &family).unwrap(), p, CAP).unwrap()
        } else {
            MultiplierSpec::new(space, xi.to_vec(), p, CAP).unwrap()
        };
        let b = multiplier_norm_bracket(&spec, 1, 42, &SearchConfig::default()).unwrap();
        kislyakov_check(&CheckInput { mode, space, p, weights: xi, bracket: &b.bracket, seed: 42 }, &Constants::default(), 1e-12, 1e-9)
            .unwrap()
    }

    fn ones(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); n]
    }

    #[test]
    fn single_weight_verified() {
        let space = Space::torus(FamilyKind::TSet, 2, 2).unwrap();
        let mut xi = vec![Complex64::new(0.0, 0.0); 13];
        xi[2] = Complex64::new(0.7, 0.0);
        let r = check(CheckMode::TorusGrid, space, 1.0, &xi);
        assert_eq!(r.verdict, Verdict::Verified);
        assert!((r.lhs - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ones_on_linear_family() {
        let space = Space::torus(FamilyKind::LambdaLE, 1, 2).unwrap();
        let r = check(CheckMode::TorusGrid, space, 1.0, &ones(3));
        assert!((r.lhs - 3f64.sqrt()).abs() < 1e-15);
        assert!((r.constant - 51.5).abs() < 0.1, "{}", r.constant);
        assert!(r.bracket_lower >= 1.0 - 1e-12);
        assert_eq!(r.verdict, Verdict::Verified);
    }

    #[test]
    fn full_cube_two() {
        let r = check(CheckMode::CubeFull, Space::full_cube(2), 1.0, &ones(4));
        assert!((r.lhs - 2.0).abs() < 1e-15);
        assert!((r.bracket_lower - 2.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Verified);
    }

    #[test]
    fn all_modes_run() {
        let cases = [
            (CheckMode::TorusKsz, Space::torus(FamilyKind::TSet, 1, 2).unwrap(), 1.0, ones(5)),
            (CheckMode::TorusKszDegree, Space::torus(FamilyKind::TSet, 1, 2).unwrap(), 1.0, ones(5)),
            (CheckMode::CubeDegree, Space::boolean(FamilyKind::SubsetsLE, 2, 4).unwrap(), 1.0, ones(11)),
            (CheckMode::CubeDegree, Space::boolean(FamilyKind::SubsetsEQ, 2, 4).unwrap(), 1.5, ones(6)),
            (CheckMode::TorusInterpolated, Space::torus(FamilyKind::LambdaLE, 2, 2).unwrap(), 1.2, ones(6)),
            (CheckMode::TorusRearranged, Space::torus(FamilyKind::LambdaEQ, 2, 3).unwrap(), 1.0, ones(3)),
            (CheckMode::CubeRearranged, Space::boolean(FamilyKind::SubsetsEQ, 2, 4).unwrap(), 1.0, ones(4)),
        ];
        for (mode, space, p, xi) in cases {
            let r = check(mode, space, p, &xi);
            assert_ne!(r.verdict, Verdict::Counterexample, "{mode}");
            if mode.uses_configured_constant() {
                assert_eq!(r.basis, "envelope");
                assert_ne!(r.verdict, Verdict::Verified);
            }
        }
    }

    #[test]
    fn trichotomy() {
        let b = NormBracket { lower: 1.0, upper: 2.0, method: BracketMethod::CandidateSearch };
        assert_eq!(VerdictReport::classify(3.0, 3.0, &b, 0.0, 0.0), Verdict::Verified);
        assert_eq!(VerdictReport::classify(4.0, 3.0, &b, 0.0, 0.0), Verdict::Inconclusive);
        assert_eq!(VerdictReport::classify(7.0, 3.0, &b, 0.0, 0.0), Verdict::Counterexample);
    }

    #[test]
    fn mismatched_space_rejected() {
        let c = Constants::default();
        assert!(check_constant(CheckMode::CubeFull, &Space::torus(FamilyKind::TSet, 1, 1).unwrap(), 1.0, &c).is_err());
        assert!(check_constant(CheckMode::TorusInterpolated, &Space::torus(FamilyKind::LambdaLE, 2, 2).unwrap(), 1.5, &c).is_err());
        assert!(check_constant(CheckMode::TorusGrid, &Space::full_cube(2), 1.0, &c).is_err());
        assert_eq!("cube-full".parse::<CheckMode>().unwrap(), CheckMode::CubeFull);
    }
}
