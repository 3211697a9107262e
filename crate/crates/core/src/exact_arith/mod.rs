//! Exact arithmetic substrate: rationals, valuations, square classes and Kronecker symbols.

mod factor;
mod kronecker;
mod poly;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use factor::{factor, is_prime_u64, is_probable_prime, sieve_primes, FactoredRat, TRIAL_DIVISION_BOUND};
pub use kronecker::{kronecker, kronecker_i64};
pub use poly::{Poly, RatFunc};

use crate::error::{domain, Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type BigRat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(n.into(), d.into())
}

pub fn int(n: impl Into<BigInt>) -> BigRat {
    BigRat::from_integer(n.into())
}

/// Parses `"a"` or `"a/b"`.
pub fn parse_rat(s: &str) -> Result<BigRat> {
    let s = s.trim();
    let bad = || Error::Domain(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRat::new(n, d))
        }
        None => Ok(int(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// `v_p(x)`: the exponent of the prime `p` in the nonzero rational `x`.
pub fn valuation(x: &BigRat, p: u64) -> Result<i64> {
    if x.is_zero() {
        return domain("valuation of zero");
    }
    if !is_prime_u64(p) {
        return domain(format!("{p} is not prime"));
    }
    let p = BigInt::from(p);
    let count = |n: &BigInt| {
        let mut n = n.abs();
        let mut e = 0i64;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                return e;
            }
            n = q;
            e += 1;
        }
    };
    Ok(count(x.numer()) - count(x.denom()))
}

/// The class of a nonzero rational in `Q^× / (Q^×)²`, labelled by its square-free
/// integer representative. `1` is the trivial class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass(BigInt);

impl SquareClass {
    pub fn trivial() -> Self {
        SquareClass(BigInt::one())
    }

    /// Checks that `label` is a nonzero square-free integer.
    pub fn from_label(label: impl Into<BigInt>) -> Result<Self> {
        let label = label.into();
        if label.is_zero() {
            return domain("square class label must be nonzero");
        }
        if factor(&label)?.iter().any(|(_, e)| *e > 1) {
            return domain(format!("{label} is not square-free"));
        }
        Ok(SquareClass(label))
    }

    /// Caller guarantees `label` is square-free and nonzero.
    pub(crate) fn from_label_unchecked(label: BigInt) -> Self {
        debug_assert!(!label.is_zero());
        SquareClass(label)
    }

    pub fn label(&self) -> &BigInt {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_one()
    }

    /// Product in `Q^× / (Q^×)²`: `ab / gcd(a, b)²`.
    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        let g = self.0.gcd(&other.0);
        SquareClass((&self.0 / &g) * (&other.0 / &g))
    }

    /// Discriminant of `Q(√m)`: `m` if `m ≡ 1 mod 4`, else `4m`.
    pub fn fundamental_discriminant(&self) -> Result<BigInt> {
        if self.is_trivial() {
            return domain("the trivial square class has no quadratic field");
        }
        if self.0.mod_floor(&BigInt::from(4)).is_one() {
            Ok(self.0.clone())
        } else {
            Ok(&self.0 * 4)
        }
    }

    /// Whether the prime `p` ramifies in `Q(√m)`.
    pub fn ramified_at(&self, p: &BigInt) -> bool {
        match self.fundamental_discriminant() {
            Ok(disc) => disc.is_multiple_of(p),
            Err(_) => false,
        }
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for SquareClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let n = BigInt::from_str(&s).map_err(serde::de::Error::custom)?;
        SquareClass::from_label(n).map_err(serde::de::Error::custom)
    }
}

/// The square-free integer `m` with `x / m` a rational square.
///
/// `num/den` and `num·den` differ by the square `den²`, so the numerator and
/// denominator are factored separately.
pub fn squarefree_part(x: &BigRat) -> Result<SquareClass> {
    if x.is_zero() {
        return domain("square class of zero");
    }
    Ok(SquareClass(FactoredRat::of(x)?.squarefree_label()))
}

/// Free-function form of [`SquareClass::fundamental_discriminant`].
pub fn fundamental_discriminant(m: &SquareClass) -> Result<BigInt> {
    m.fundamental_discriminant()
}

/// Euler's totient of a positive integer.
pub fn euler_phi(n: u64) -> u64 {
    let mut n_rest = n;
    let mut phi = n;
    let mut p = 2;
    while p * p <= n_rest {
        if n_rest % p == 0 {
            while n_rest % p == 0 {
                n_rest /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n_rest > 1 {
        phi -= phi / n_rest;
    }
    phi
}

/// Möbius function.
pub fn moebius(n: u64) -> i8 {
    let mut n = n;
    let mut sign = 1i8;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Distinct prime divisors of a positive integer, increasing.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Positive divisors of `n`, increasing.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..).take_while(|d| d * d <= n).filter(|d| n % d == 0).collect();
    let mut big: Vec<u64> = out.iter().rev().map(|d| n / d).filter(|&e| e * e != n).collect();
    out.append(&mut big);
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && moebius(n) != 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&int(194502), 3).unwrap(), 1);
        assert_eq!(valuation(&int(1), 7).unwrap(), 0);
        assert_eq!(valuation(&rat(50, 27), 3).unwrap(), -3);
        assert!(matches!(valuation(&int(0), 3), Err(Error::Domain(_))));
        assert!(matches!(valuation(&int(12), 4), Err(Error::Domain(_))));
    }

    #[test]
    fn squarefree_part_examples() {
        assert_eq!(squarefree_part(&rat(-294, 625)).unwrap().label(), &BigInt::from(-6));
        assert!(squarefree_part(&int(4)).unwrap().is_trivial());
        assert_eq!(squarefree_part(&int(18)).unwrap().label(), &BigInt::from(2));
        assert_eq!(squarefree_part(&rat(3, 8)).unwrap().label(), &BigInt::from(6));
        assert!(squarefree_part(&int(0)).is_err());
    }

    #[test]
    fn discriminants() {
        let d = |m: i64| SquareClass::from_label(m).unwrap().fundamental_discriminant().unwrap();
        assert_eq!(d(2), BigInt::from(8));
        assert_eq!(d(-3), BigInt::from(-3));
        assert_eq!(d(-6), BigInt::from(-24));
        assert_eq!(d(5), BigInt::from(5));
        assert!(SquareClass::trivial().fundamental_discriminant().is_err());
        assert!(SquareClass::from_label(12).is_err());
    }

    #[test]
    fn class_multiplication() {
        let a = SquareClass::from_label(-6).unwrap();
        let b = SquareClass::from_label(-3).unwrap();
        assert_eq!(a.mul(&b).label(), &BigInt::from(2));
        assert!(a.mul(&a).is_trivial());
    }

    #[test]
    fn arithmetic_helpers() {
        assert_eq!(euler_phi(8), 4);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(24), 8);
        assert_eq!(moebius(30), -1);
        assert_eq!(moebius(12), 0);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(prime_divisors(42), vec![2, 3, 7]);
        assert_eq!(parse_rat("3/5").unwrap(), rat(3, 5));
        assert_eq!(parse_rat("-21").unwrap(), int(-21));
        assert!(parse_rat("1/0").is_err());
    }

    fn nonzero_rat() -> impl Strategy<Value = BigRat> {
        (prop_oneof![-100_000i64..-1, 1i64..100_000], 1i64..100_000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn squarefree_part_ignores_squares(x in nonzero_rat(), y in nonzero_rat()) {
            let lhs = squarefree_part(&(&x * &y * &y)).unwrap();
            prop_assert_eq!(lhs, squarefree_part(&x).unwrap());
        }

        #[test]
        fn squarefree_part_is_a_homomorphism(x in nonzero_rat(), y in nonzero_rat()) {
            let lhs = squarefree_part(&(&x * &y)).unwrap();
            let rhs = squarefree_part(&x).unwrap().mul(&squarefree_part(&y).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn valuation_is_additive(x in nonzero_rat(), y in nonzero_rat(), pi in 0usize..6) {
            let p = [2u64, 3, 5, 7, 11, 13][pi];
            let lhs = valuation(&(&x * &y), p).unwrap();
            prop_assert_eq!(lhs, valuation(&x, p).unwrap() + valuation(&y, p).unwrap());
        }

        #[test]
        fn kronecker_is_multiplicative_in_the_bottom(d in -500i64..500, a in -300i64..300, b in -300i64..300) {
            prop_assert_eq!(kronecker_i64(d, a * b), kronecker_i64(d, a) * kronecker_i64(d, b));
        }

        #[test]
        fn kronecker_is_periodic_for_fundamental_discriminants(m in -200i64..200, a in 1i64..2000) {
            let class = squarefree_part(&int(m));
            prop_assume!(m != 0);
            let class = class.unwrap();
            prop_assume!(!class.is_trivial());
            let disc = class.fundamental_discriminant().unwrap();
            let modulus = disc.abs();
            let shifted = BigInt::from(a) + &modulus;
            prop_assert_eq!(kronecker(&disc, &BigInt::from(a)), kronecker(&disc, &shifted));
        }
    }
}
