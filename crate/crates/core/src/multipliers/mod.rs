//! Multipliers `M_xi f = (xi_gamma f_hat(gamma))` from polynomial spaces into `l_p`:
//! closed-form diagonal norms, certified norm brackets, Sidon constants,
//! exponent algebra and verdicts.

mod bracket;
pub mod exponents;
mod verdict;

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::index_sets::{enumerate_with_cap, FamilyKind, IndexFamily};

pub use bracket::{multiplier_norm_bracket, sidon_envelope, sidon_estimate, MultiplierBracket, SearchConfig, SidonEstimate};
pub use verdict::{check_constant, kislyakov_check, rearranged_weights, CheckInput, CheckMode, Constants, Verdict, VerdictReport};

/// A polynomial space: a frequency family on the torus or on the Boolean cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Space {
    pub kind: FamilyKind,
    /// Degree bound `m` (torus) or `d` (cube).
    pub degree: usize,
    /// `n` (torus) or `N` (cube).
    pub dim: usize,
}

impl Space {
    pub fn torus(kind: FamilyKind, m: usize, n: usize) -> Result<Self> {
        if kind.is_subsets() {
            return Err(invalid(format!("{kind} is not a torus family")));
        }
        if n == 0 {
            return Err(invalid("torus dimension must be at least 1"));
        }
        Ok(Space { kind, degree: m, dim: n })
    }

    pub fn boolean(kind: FamilyKind, degree: usize, n: usize) -> Result<Self> {
        if !kind.is_subsets() {
            return Err(invalid(format!("{kind} is not a Boolean family")));
        }
        Ok(Space { kind, degree, dim: n })
    }

    /// All functions on `{-1,1}^N`.
    pub fn full_cube(n: usize) -> Self {
        Space { kind: FamilyKind::SubsetsLE, degree: n, dim: n }
    }

    pub fn is_boolean(&self) -> bool {
        self.kind.is_subsets()
    }

    pub fn is_full_cube(&self) -> bool {
        self.kind == FamilyKind::SubsetsLE && self.degree >= self.dim
    }

    pub fn family(&self, cap: u64) -> Result<IndexFamily> {
        enumerate_with_cap(self.kind, self.degree, self.dim, cap)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let setting = if self.is_boolean() { "cube" } else { "torus" };
        write!(f, "{setting}:{}({},{})", self.kind, self.degree, self.dim)
    }
}

/// `1/r = 1/p - 1/2`, clamped to 0 (`r = inf`) for `p >= 2`.
pub fn holder_inverse_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("p must be >= 1, got {p}")));
    }
    Ok((1.0 / p - 0.5).max(0.0))
}

fn lr_norm(values: impl Iterator<Item = f64> + Clone, inv_r: f64) -> f64 {
    let max = values.clone().fold(0.0, f64::max);
    if inv_r == 0.0 || max == 0.0 {
        return max;
    }
    let r = 1.0 / inv_r;
    let s: f64 = values.map(|v| (v / max).powf(r)).sum();
    max * s.powf(inv_r)
}

/// `sup { ||(mu_gamma xi_gamma)||_p : ||mu||_2 <= 1 } = ||xi||_r` with `1/r = 1/p - 1/2`.
///
/// For `p >= 2` this is `max |xi_gamma|`.
pub fn diagonal_norm(xi: &[Complex64], p: f64) -> Result<f64> {
    let inv_r = holder_inverse_exponent(p)?;
    Ok(lr_norm(xi.iter().map(|c| c.norm()), inv_r))
}

/// The 2-summing norm of `M_xi` on `C_Gamma`, equal to the diagonal norm `l_2 -> l_p`.
pub fn two_summing_norm(xi: &[Complex64], p: f64) -> Result<f64> {
    diagonal_norm(xi, p)
}

/// A unit vector `mu >= 0` with `||(mu xi)||_p = ||xi||_r`: `mu ~ |xi|^(r/2)`,
/// or the unit vector at the largest weight when `p >= 2`.
pub fn diagonal_attainer(xi: &[Complex64], p: f64) -> Result<Vec<f64>> {
    let inv_r = holder_inverse_exponent(p)?;
    let mut mu = vec![0.0; xi.len()];
    let max = xi.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(mu);
    }
    if inv_r == 0.0 {
        let idx = xi.iter().position(|c| c.norm() == max).expect("max exists");
        mu[idx] = 1.0;
        return Ok(mu);
    }
    let half_r = 0.5 / inv_r;
    for (m, c) in mu.iter_mut().zip(xi) {
        *m = (c.norm() / max).powf(half_r);
    }
    let norm = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
    mu.iter_mut().for_each(|v| *v /= norm);
    Ok(mu)
}

/// `||(xi_gamma t_gamma)||_p`, with `p = inf` giving the maximum.
pub fn weighted_lp_norm(xi: &[Complex64], t: &[Complex64], p: f64) -> f64 {
    let terms = xi.iter().zip(t).map(|(x, c)| x.norm() * c.norm());
    if p.is_infinite() {
        return terms.fold(0.0, f64::max);
    }
    let max = terms.clone().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    max * terms.map(|v| (v / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// A weight vector together with its space and target exponent.
#[derive(Clone, Debug)]
pub struct MultiplierSpec {
    pub space: Space,
    pub family: IndexFamily,
    pub xi: Vec<Complex64>,
    pub p: f64,
}

impl MultiplierSpec {
    pub fn new(space: Space, xi: Vec<Complex64>, p: f64, cap: u64) -> Result<Self> {
        holder_inverse_exponent(p)?;
        let family = space.family(cap)?;
        if family.len() != xi.len() {
            return Err(Error::Mismatch(format!("{} weights for a family of {} indices", xi.len(), family.len())));
        }
        Ok(MultiplierSpec { space, family, xi, p })
    }

    /// `xi = 1` on the whole family, whose multiplier norm is the p-Sidon constant.
    pub fn ones(space: Space, p: f64, cap: u64) -> Result<Self> {
        let family = space.family(cap)?;
        let xi = vec![Complex64::new(1.0, 0.0); family.len()];
        Self::new(space, xi, p, cap)
    }
}
