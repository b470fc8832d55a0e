//! Exact exponent algebra over rationals.

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};

pub type Rational = Ratio<i128>;

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// `1/r = 1/p - 1/2`, or 0 (`r = inf`) for `p >= 2`.
pub fn inverse_r(p: Rational) -> Rational {
    let v = p.recip() - q(1, 2);
    if v < Rational::zero() {
        Rational::zero()
    } else {
        v
    }
}

/// `2m/(m+1)`.
pub fn bh_exponent(m: u32) -> Rational {
    q(2 * m as i128, m as i128 + 1)
}

/// `1/p_theta = (1 - theta) + theta/2`.
pub fn interpolated_p(theta: Rational) -> Rational {
    (Rational::one() - theta + theta / 2).recip()
}

/// `beta_m = 1 - (1 - 1/p)/(1 - (m+1)/(2m))` for `1 <= p <= 2m/(m+1)`; `beta_1 = 1` at `p = 1`.
pub fn beta(p: Rational, m: u32) -> Result<Rational> {
    check_exponent_range(p, m)?;
    if m == 1 {
        return Ok(Rational::one());
    }
    let m = m as i128;
    Ok(Rational::one() - (Rational::one() - p.recip()) / (Rational::one() - q(m + 1, 2 * m)))
}

/// `1/s = m/(m-1) (1/p - (m+1)/(2m))` for `m >= 2` and `1 <= p <= 2m/(m+1)`.
pub fn inverse_s(p: Rational, m: u32) -> Result<Rational> {
    if m < 2 {
        return Err(invalid("the s exponent needs m >= 2"));
    }
    check_exponent_range(p, m)?;
    let m = m as i128;
    Ok(q(m, m - 1) * (p.recip() - q(m + 1, 2 * m)))
}

fn check_exponent_range(p: Rational, m: u32) -> Result<()> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    if p < Rational::one() || p > bh_exponent(m) {
        return Err(invalid(format!("p = {p} outside [1, 2m/(m+1)] = [1, {}]", bh_exponent(m))));
    }
    Ok(())
}

/// All exponents attached to `(p, m, theta)`. Fields outside their range are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentBundle {
    #[serde(serialize_with = "ser_q")]
    pub p: Rational,
    pub m: u32,
    #[serde(serialize_with = "ser_q")]
    pub theta: Rational,
    #[serde(serialize_with = "ser_q")]
    pub inv_r: Rational,
    #[serde(serialize_with = "ser_opt_q")]
    pub r: Option<Rational>,
    #[serde(serialize_with = "ser_q")]
    pub p_theta: Rational,
    #[serde(serialize_with = "ser_q")]
    pub bh_exponent: Rational,
    #[serde(serialize_with = "ser_opt_q")]
    pub beta_m: Option<Rational>,
    #[serde(serialize_with = "ser_opt_q")]
    pub theta_m: Option<Rational>,
    #[serde(serialize_with = "ser_opt_q")]
    pub inv_s: Option<Rational>,
    #[serde(serialize_with = "ser_opt_q")]
    pub s: Option<Rational>,
    /// `m/r - 1/2`.
    #[serde(serialize_with = "ser_q")]
    pub sidon_exponent: Rational,
}

fn ser_q<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_opt_q<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub fn exponents(p: Rational, m: u32, theta: Rational) -> Result<ExponentBundle> {
    if p < Rational::one() {
        return Err(invalid(format!("p must be >= 1, got {p}")));
    }
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    if theta < Rational::zero() || theta > Rational::one() {
        return Err(invalid(format!("theta must lie in [0, 1], got {theta}")));
    }
    let inv_r = inverse_r(p);
    let beta_m = beta(p, m).ok();
    let inv_s = inverse_s(p, m).ok();
    let bundle = ExponentBundle {
        p,
        m,
        theta,
        inv_r,
        r: (!inv_r.is_zero()).then(|| inv_r.recip()),
        p_theta: interpolated_p(theta),
        bh_exponent: bh_exponent(m),
        beta_m,
        theta_m: beta_m.map(|b| Rational::one() - b),
        inv_s,
        s: inv_s.and_then(|v| (!v.is_zero()).then(|| v.recip())),
        sidon_exponent: inv_r * m as i128 - q(1, 2),
    };
    if let Some(inv_s) = bundle.inv_s {
        // (m - 1)/s = m/r - 1/2
        debug_assert_eq!(inv_s * (m as i128 - 1), bundle.sidon_exponent);
    }
    Ok(bundle)
}

pub fn to_f64(v: Rational) -> f64 {
    v.numer().to_f64().unwrap_or(f64::NAN) / v.denom().to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation with denominator at most `max_den` (exact for short decimals).
pub fn rational_from_f64(x: f64, max_den: i128) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i128;
        let (h2, k2) = (ai.checked_mul(h1)?.checked_add(h0)?, ai.checked_mul(k1)?.checked_add(k0)?);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac.abs() < 1e-15 || ((h1 as f64) / (k1 as f64) - x).abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
        y = 1.0 / frac;
    }
    Some(Rational::new(h1, k1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let b = exponents(q(1, 1), 1, q(0, 1)).unwrap();
        assert_eq!(b.r, Some(q(2, 1)));
        assert_eq!(interpolated_p(q(2, 3)), q(3, 2));
        let b = exponents(q(1, 1), 2, q(2, 3)).unwrap();
        assert_eq!(b.s, Some(q(2, 1)));
        assert_eq!(b.inv_s.unwrap() * 1, q(1, 2));
        assert_eq!(b.sidon_exponent, q(1, 2));
        assert_eq!(b.p_theta, q(3, 2));
        let b = exponents(q(2, 1), 3, q(1, 1)).unwrap();
        assert_eq!(b.r, None);
        assert_eq!(b.beta_m, None);
        assert!(inverse_s(q(3, 2), 2).is_err());
        assert!(inverse_s(q(1, 1), 1).is_err());
        assert!(exponents(q(1, 2), 2, q(0, 1)).is_err());
        assert!(exponents(q(1, 1), 2, q(3, 2)).is_err());
    }

    #[test]
    fn beta_endpoints() {
        for m in 1..30u32 {
            assert_eq!(beta(q(1, 1), m).unwrap(), Rational::one());
            if m > 1 {
                assert_eq!(beta(bh_exponent(m), m).unwrap(), Rational::zero());
            }
        }
    }

    #[test]
    fn rational_recovery() {
        assert_eq!(rational_from_f64(4.0 / 3.0, 1000), Some(q(4, 3)));
        assert_eq!(rational_from_f64(1.5, 1000), Some(q(3, 2)));
        assert_eq!(rational_from_f64(2.0, 1000), Some(q(2, 1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn identities(m in 1u32..20, t_num in 0i128..=1000, p_num in 0i128..=1000) {
            let theta = q(t_num, 1000);
            // p ranges over [1, 2m/(m+1)]
            let p = Rational::one() + (bh_exponent(m) - Rational::one()) * q(p_num, 1000);
            let b = exponents(p, m, theta).unwrap();
            prop_assert_eq!(b.inv_r, p.recip() - q(1, 2));
            prop_assert_eq!(b.p_theta.recip(), Rational::one() - theta + theta / 2);
            let beta = b.beta_m.unwrap();
            if m > 1 {
                prop_assert_eq!((Rational::one() - beta) * (Rational::one() - q(m as i128 + 1, 2 * m as i128)), Rational::one() - p.recip());
                let inv_s = b.inv_s.unwrap();
                prop_assert_eq!(inv_s * (m as i128 - 1), b.sidon_exponent);
                prop_assert!((to_f64(inv_s) - (m as f64 / (m as f64 - 1.0)) * (1.0 / to_f64(p) - (m as f64 + 1.0) / (2.0 * m as f64))).abs() < 1e-12);
            }
            prop_assert_eq!(b.theta_m.unwrap() + beta, Rational::one());
        }
    }
}
