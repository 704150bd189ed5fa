//! Elements of Q/Z as reduced fractions in `[0, 1)`.
//!
//! An [`Angle`] `a` stands for the root of unity `e(a) = exp(2*pi*i*a)`.
//! Angles are the atoms of all eigenvalue arithmetic in this crate: sums are
//! taken mod 1, conjugation is `a -> 1 - a`, and the zero angle is the
//! eigenvalue 1.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::integer::gcd;
use num::{BigInt, BigRational};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A reduced fraction `num/den` with `0 <= num < den` and `gcd(num, den) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    num: i64,
    den: i64,
}

impl Angle {
    /// Builds the angle `num/den` reduced mod 1. `den` must be nonzero.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "angle denominator must be nonzero");
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        num = num.rem_euclid(den);
        let g = gcd(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        Angle { num, den }
    }

    pub const fn zero() -> Self {
        Angle { num: 0, den: 1 }
    }

    pub const fn half() -> Self {
        Angle { num: 1, den: 2 }
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// The conjugate angle `(1 - a) mod 1`; fixed points are 0 and 1/2.
    pub fn conj(&self) -> Self {
        if self.num == 0 {
            *self
        } else {
            Angle {
                num: self.den - self.num,
                den: self.den,
            }
        }
    }

    /// Sum mod 1, exactly.
    pub fn add(&self, other: &Angle) -> Self {
        let den = (self.den as i128) * (other.den as i128);
        let num = (self.num as i128) * (other.den as i128) + (other.num as i128) * (self.den as i128);
        let num = num.rem_euclid(den);
        let g = num::integer::gcd(num, den);
        Angle {
            num: i64::try_from(num / g).expect("reduced angle numerator fits i64"),
            den: i64::try_from(den / g).expect("reduced angle denominator fits i64"),
        }
    }

    /// The angle as an exact rational number in `[0, 1)`.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = (self.num as i128) * (other.den as i128);
        let rhs = (other.num as i128) * (self.den as i128);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid angle literal {0:?}: expected \"p/q\" or an integer")]
pub struct ParseAngleError(String);

impl FromStr for Angle {
    type Err = ParseAngleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseAngleError(s.to_string());
        match s.split_once('/') {
            Some((p, q)) => {
                let num: i64 = p.trim().parse().map_err(|_| bad())?;
                let den: i64 = q.trim().parse().map_err(|_| bad())?;
                if den == 0 {
                    return Err(bad());
                }
                Ok(Angle::new(num, den))
            }
            None => {
                let num: i64 = s.trim().parse().map_err(|_| bad())?;
                Ok(Angle::new(num, 1))
            }
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}
