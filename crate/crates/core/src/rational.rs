//! Exact exponents for parameter gates.
//!
//! Integrability and summability exponents are parsed as rationals (or `inf`)
//! so that gates such as `min(1, p, q) > p / (p + 1)` are decided exactly at
//! their boundaries.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::Error;

pub type Rational = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinite,
}

impl Exponent {
    pub fn int(n: i64) -> Self {
        Exponent::Finite(Rational::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Exponent::Finite(Rational::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn is_positive(self) -> bool {
        match self {
            Exponent::Finite(r) => r > Rational::from_integer(0),
            Exponent::Infinite => true,
        }
    }

    /// `p / (p + 1)`, equal to 1 at `p = inf`.
    pub fn p_over_p_plus_one(self) -> Exponent {
        match self {
            Exponent::Finite(r) => Exponent::Finite(r / (r + Rational::from_integer(1))),
            Exponent::Infinite => Exponent::int(1),
        }
    }

    /// Reciprocal, with `1/inf = 0`.
    pub fn recip(self) -> Rational {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => Rational::from_integer(0),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Infinite, Exponent::Infinite) => Ordering::Equal,
            (Exponent::Infinite, _) => Ordering::Greater,
            (_, Exponent::Infinite) => Ordering::Less,
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Exponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse exponent {s:?}"));
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinite),
            _ => {}
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Exponent::ratio(n, d));
        }
        let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
        if frac_part.len() > 12 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let whole: i64 = if int_part.is_empty() || int_part == "-" {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(frac_part.len() as u32);
        let frac: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let num = whole.abs() * den + frac;
        Ok(Exponent::ratio(if negative { -num } else { num }, den))
    }
}

/// `min(1, p, q)`.
pub fn min_one(p: Exponent, q: Exponent) -> Exponent {
    Exponent::int(1).min(p).min(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::int(2));
        assert_eq!("1/2".parse::<Exponent>().unwrap(), Exponent::ratio(1, 2));
        assert_eq!("0.51".parse::<Exponent>().unwrap(), Exponent::ratio(51, 100));
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert_eq!("-1.5".parse::<Exponent>().unwrap(), Exponent::ratio(-3, 2));
        assert!("x".parse::<Exponent>().is_err());
        assert!("1/0".parse::<Exponent>().is_err());
    }

    #[test]
    fn boundary_comparisons_are_exact() {
        let p = Exponent::int(2);
        let q = Exponent::ratio(2, 3);
        assert_eq!(min_one(p, q), p.p_over_p_plus_one());
        assert!(Exponent::Infinite > Exponent::int(1_000_000));
        assert_eq!(Exponent::Infinite.p_over_p_plus_one(), Exponent::int(1));
    }
}
