use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An angle stored exactly as a rational multiple of π.
///
/// Lattice angles are always of the form `n·π/d`, so keeping them rational
/// makes periodicity (`φ + π`, `φ + 2π`) and equality tests exact. The
/// fraction is kept reduced with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[i64; 2]", from = "[i64; 2]")]
pub struct PiRational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl PiRational {
    pub const ZERO: PiRational = PiRational { num: 0, den: 1 };
    pub const HALF: PiRational = PiRational { num: 1, den: 2 };
    pub const ONE: PiRational = PiRational { num: 1, den: 1 };

    /// `num/den · π`. Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator in rational angle");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        PiRational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn radians(&self) -> f64 {
        self.num as f64 * PI / self.den as f64
    }

    /// Representative in `[0, 2π)`.
    pub fn reduce_two_pi(&self) -> Self {
        let period = 2 * self.den;
        PiRational::new(self.num.rem_euclid(period), self.den)
    }

    /// Representative in `[0, π)`; used for comparisons "mod π".
    pub fn reduce_pi(&self) -> Self {
        PiRational::new(self.num.rem_euclid(self.den), self.den)
    }

    pub fn eq_mod_pi(&self, other: &PiRational) -> bool {
        (*self - *other).reduce_pi() == PiRational::ZERO
    }
}

impl std::ops::Add for PiRational {
    type Output = PiRational;
    fn add(self, rhs: Self) -> Self {
        PiRational::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
    }
}

impl std::ops::Sub for PiRational {
    type Output = PiRational;
    fn sub(self, rhs: Self) -> Self {
        PiRational::new(self.num * rhs.den - rhs.num * self.den, self.den * rhs.den)
    }
}

impl std::ops::Neg for PiRational {
    type Output = PiRational;
    fn neg(self) -> Self {
        PiRational::new(-self.num, self.den)
    }
}

impl PartialOrd for PiRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PiRational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl From<PiRational> for [i64; 2] {
    fn from(a: PiRational) -> Self {
        [a.num, a.den]
    }
}

impl From<[i64; 2]> for PiRational {
    fn from(v: [i64; 2]) -> Self {
        PiRational::new(v[0], v[1])
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "0"),
            (n, 1) => write!(f, "{n}π"),
            (n, d) => write!(f, "{n}π/{d}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_normalizes_sign() {
        let a = PiRational::new(4, -6);
        assert_eq!(a.numer(), -2);
        assert_eq!(a.denom(), 3);
    }

    #[test]
    fn wraparound_is_exact() {
        let a = PiRational::new(1, 6);
        let b = a + PiRational::ONE;
        assert!(a.eq_mod_pi(&b));
        assert_eq!((b + PiRational::ONE).reduce_two_pi(), a);
        assert!(!a.eq_mod_pi(&PiRational::new(1, 3)));
    }

    #[test]
    fn radians_match() {
        assert!((PiRational::new(3, 4).radians() - 0.75 * PI).abs() < 1e-15);
        assert_eq!(PiRational::new(2, 4).to_string(), "1π/2");
    }

    #[test]
    fn serializes_as_pair() {
        let s = serde_json::to_string(&PiRational::new(1, 6)).unwrap();
        assert_eq!(s, "[1,6]");
        let back: PiRational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, PiRational::new(1, 6));
    }
}
