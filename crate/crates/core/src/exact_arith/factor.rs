//! Primality testing and integer factorisation.
//!
//! Trial division by the primes below [`TRIAL_DIVISION_BOUND`] removes the smooth part;
//! what remains is split with Pollard–Brent and certified with Miller–Rabin.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::BigRat;
use crate::error::{domain, Error, Result};

/// Default trial-division bound.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Total Pollard–Brent iterations allowed per `factor` call before giving up.
const RHO_ITERATION_BUDGET: u64 = 200_000_000;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(TRIAL_DIVISION_BOUND))
}

/// All primes `<= limit`, by a plain sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the first 20 prime bases; deterministic below 2^64.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71] {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return false;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_perfect_square(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// One Pollard–Brent attempt; returns a nontrivial factor or `None` if the cycle closed.
fn brent(n: &BigUint, c: u64, budget: &mut u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let m = 128u64;
    let mut y = BigUint::from(2u32);
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += m;
            *budget = budget.saturating_sub(m.min(r));
            if *budget == 0 {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

fn split_large(n: BigUint, out: &mut BTreeMap<BigUint, u32>, budget: &mut u64) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return Ok(());
    }
    if let Some(r) = is_perfect_square(&n) {
        let mut inner = BTreeMap::new();
        split_large(r, &mut inner, budget)?;
        for (p, e) in inner {
            *out.entry(p).or_insert(0) += 2 * e;
        }
        return Ok(());
    }
    for c in 1u64.. {
        if *budget == 0 {
            return Err(Error::Resource(format!("could not factor {n} within the iteration budget")));
        }
        if let Some(d) = brent(&n, c, budget) {
            let other = &n / &d;
            split_large(d, out, budget)?;
            split_large(other, out, budget)?;
            return Ok(());
        }
    }
    unreachable!()
}

/// Prime factorisation of `|n|` as `(prime, exponent)` pairs in increasing order.
pub fn factor(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    if n.is_zero() {
        return domain("cannot factor zero");
    }
    let mut rest = n.magnitude().clone();
    let mut out: BTreeMap<BigUint, u32> = BTreeMap::new();
    for &p in small_primes() {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.insert(pb, e);
        }
    }
    let mut budget = RHO_ITERATION_BUDGET;
    split_large(rest, &mut out, &mut budget)?;
    Ok(out
        .into_iter()
        .map(|(p, e)| (BigInt::from_biguint(Sign::Plus, p), e))
        .collect())
}

/// A nonzero rational stored as `sign · ∏ pᵉ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredRat {
    pub negative: bool,
    pub exponents: BTreeMap<BigInt, i64>,
}

impl FactoredRat {
    pub fn one() -> Self {
        FactoredRat { negative: false, exponents: BTreeMap::new() }
    }

    pub fn of(x: &BigRat) -> Result<Self> {
        if x.is_zero() {
            return domain("cannot factor the rational 0");
        }
        let mut out = FactoredRat { negative: x.is_negative(), exponents: BTreeMap::new() };
        for (p, e) in factor(x.numer())? {
            out.bump(p, e as i64);
        }
        for (p, e) in factor(x.denom())? {
            out.bump(p, -(e as i64));
        }
        Ok(out)
    }

    /// Factors `∏ baseᵢ^expᵢ` one base at a time, which keeps each factorisation small
    /// when the product itself is large.
    pub fn from_powers(powers: &[(BigRat, i64)]) -> Result<Self> {
        let mut out = FactoredRat::one();
        for (base, exp) in powers {
            out = out.mul(&FactoredRat::of(base)?.pow(*exp));
        }
        Ok(out)
    }

    fn bump(&mut self, p: BigInt, e: i64) {
        let slot = self.exponents.entry(p.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.exponents.remove(&p);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.negative ^= other.negative;
        for (p, e) in &other.exponents {
            out.bump(p.clone(), *e);
        }
        out
    }

    pub fn pow(&self, k: i64) -> Self {
        FactoredRat {
            negative: self.negative && k.rem_euclid(2) == 1,
            exponents: if k == 0 {
                BTreeMap::new()
            } else {
                self.exponents.iter().map(|(p, e)| (p.clone(), e * k)).collect()
            },
        }
    }

    pub fn valuation(&self, p: &BigInt) -> i64 {
        self.exponents.get(p).copied().unwrap_or(0)
    }

    /// Signed product of the primes occurring to an odd power.
    pub fn squarefree_label(&self) -> BigInt {
        let mut m = BigInt::one();
        for (p, e) in &self.exponents {
            if e.rem_euclid(2) == 1 {
                m *= p;
            }
        }
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn to_rational(&self) -> BigRat {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &self.exponents {
            let k = e.unsigned_abs() as u32;
            if *e > 0 {
                num *= num_traits::pow(p.clone(), k as usize);
            } else {
                den *= num_traits::pow(p.clone(), k as usize);
            }
        }
        if self.negative {
            num = -num;
        }
        BigRat::new(num, den)
    }
}
