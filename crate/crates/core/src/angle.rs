//! Measurement angles: exact rational multiples of π, or plain radians.

use std::f64::consts::PI;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, to_f64, Q};

#[derive(Debug, Clone)]
pub enum Angle {
    /// `k·π` for rational `k`.
    PiMultiple(Q),
    Radians(f64),
}

impl Angle {
    pub fn zero() -> Self {
        Angle::PiMultiple(Q::zero())
    }

    pub fn pi_fraction(numer: i64, denom: i64) -> Self {
        Angle::PiMultiple(crate::rational::q(numer, denom))
    }

    pub fn radians(&self) -> f64 {
        match self {
            Angle::PiMultiple(k) => to_f64(k) * PI,
            Angle::Radians(r) => *r,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::PiMultiple(_))
    }

    /// `(self - other) / π` when both are exact.
    pub fn difference_in_pi(&self, other: &Angle) -> Option<Q> {
        match (self, other) {
            (Angle::PiMultiple(a), Angle::PiMultiple(b)) => Some(a - b),
            _ => None,
        }
    }

    /// Accepts `0`, `pi`, `-pi/2`, `2pi/3`, `2*pi/3`, `1/3pi` and plain
    /// decimals (radians).
    pub fn parse(text: &str) -> Result<Angle> {
        let cleaned: String = text
            .trim()
            .to_lowercase()
            .replace('π', "pi")
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty angle".into()));
        }
        let bad = || Error::Parse(format!("cannot parse angle `{text}`"));
        if let Some(pos) = cleaned.find("pi") {
            let (head, tail) = (&cleaned[..pos], &cleaned[pos + 2..]);
            let coeff = match head {
                "" | "+" => Q::one(),
                "-" => -Q::one(),
                h => parse_rational(h).map_err(|_| bad())?,
            };
            let divisor = match tail {
                "" => Q::one(),
                t => {
                    let d = t.strip_prefix('/').ok_or_else(bad)?;
                    let d = parse_rational(d).map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    d
                }
            };
            return Ok(Angle::PiMultiple(coeff / divisor));
        }
        if let Ok(v) = parse_rational(&cleaned) {
            if v.is_zero() {
                return Ok(Angle::zero());
            }
        }
        let r: f64 = cleaned.parse().map_err(|_| bad())?;
        if !r.is_finite() {
            return Err(bad());
        }
        Ok(Angle::Radians(r))
    }
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Angle::PiMultiple(a), Angle::PiMultiple(b)) => a == b,
            (Angle::Radians(a), Angle::Radians(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Radians(r) => write!(f, "{r}"),
            Angle::PiMultiple(k) => {
                if k.is_zero() {
                    return write!(f, "0");
                }
                let sign = if k.is_negative() { "-" } else { "" };
                let n = k.numer().abs();
                let d = k.denom();
                let coeff = if n.is_one() {
                    String::new()
                } else {
                    n.to_string()
                };
                if d.is_one() {
                    write!(f, "{sign}{coeff}pi")
                } else {
                    write!(f, "{sign}{coeff}pi/{d}")
                }
            }
        }
    }
}
