//! Exact rational helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for every probability in the crate.
pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(value: i64) -> Q {
    Q::from_integer(BigInt::from(value))
}

/// Parses `"p/q"`, an integer, or an exact decimal such as `"0.125"`.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(Error::Parse(format!("bad decimal `{s}`")));
        }
        let digits = format!("{int_digits}{frac_part}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad decimal `{s}`")))?
        };
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        let value = Q::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    Ok(Q::from_integer(n))
}

pub fn to_f64(value: &Q) -> f64 {
    let n = value.numer().to_f64().unwrap_or(f64::NAN);
    let d = value.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Simplest rational (smallest denominator) inside `[x - tol, x + tol]`.
///
/// Walks the Stern-Brocot tree via continued fractions.
pub fn simplest_within(x: f64, tol: f64) -> Result<Q> {
    if !x.is_finite() || !tol.is_finite() || tol < 0.0 {
        return Err(Error::Parse(format!("cannot rationalize {x} within {tol}")));
    }
    let lo = x - tol;
    let hi = x + tol;
    if lo <= 0.0 && hi >= 0.0 {
        return Ok(Q::zero());
    }
    if hi < 0.0 {
        return simplest_within(-x, tol).map(|v| -v);
    }
    let lo_q = Q::from_float(lo).ok_or_else(|| Error::Parse(format!("bad float {lo}")))?;
    let hi_q = Q::from_float(hi).ok_or_else(|| Error::Parse(format!("bad float {hi}")))?;
    Ok(simplest_between(&lo_q, &hi_q))
}

/// Simplest rational in the closed interval `[lo, hi]`, `0 < lo <= hi`.
fn simplest_between(lo: &Q, hi: &Q) -> Q {
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if fl.clone() + Q::one() <= *hi {
        return fl + Q::one();
    }
    // Both endpoints share the integer part; recurse on the reciprocals of
    // the fractional parts (order flips).
    let lo_frac = lo - &fl;
    let hi_frac = hi - &fl;
    let inner = simplest_between(&hi_frac.recip(), &lo_frac.recip());
    fl + inner.recip()
}

/// `true` when `value` lies in `[0, 1]`.
pub fn is_probability(value: &Q) -> bool {
    !value.is_negative() && *value <= Q::one()
}

/// Least common multiple of the denominators in `values`.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
