//! Integral Weierstrass models, their reductions modulo primes `p ≥ 5`, point counts,
//! group structure `Z/d × Z/e`, and full `ℓ`-torsion tests.

pub mod fp;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact_arith::{is_prime_u64, kronecker, BigRat};
use crate::multiquadratic::MultiQuadField;

/// `y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6` with integer coefficients and `Δ ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeierstrassModel {
    a: [BigInt; 5],
}

impl WeierstrassModel {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self> {
        let m = WeierstrassModel { a: [a1, a2, a3, a4, a6] };
        if m.discriminant().is_zero() {
            return domain(format!("singular model {m}"));
        }
        Ok(m)
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
        Self::new(a1, a2, a3, a4, a6)
    }

    /// `y² = x³ + A·x + B`.
    pub fn short(a4: BigInt, a6: BigInt) -> Result<Self> {
        Self::new(BigInt::zero(), BigInt::zero(), BigInt::zero(), a4, a6)
    }

    pub fn coefficients(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn is_short(&self) -> bool {
        self.a[..3].iter().all(Zero::is_zero)
    }

    pub fn b2(&self) -> BigInt {
        let [a1, a2, ..] = &self.a;
        a1 * a1 + 4 * a2
    }

    pub fn b4(&self) -> BigInt {
        let [a1, _, a3, a4, _] = &self.a;
        2 * a4 + a1 * a3
    }

    pub fn b6(&self) -> BigInt {
        let [_, _, a3, _, a6] = &self.a;
        a3 * a3 + 4 * a6
    }

    pub fn b8(&self) -> BigInt {
        let [a1, a2, a3, a4, a6] = &self.a;
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    pub fn c4(&self) -> BigInt {
        let b2 = self.b2();
        &b2 * &b2 - 24 * self.b4()
    }

    pub fn c6(&self) -> BigInt {
        let b2 = self.b2();
        -(&b2 * &b2 * &b2) + 36 * &b2 * self.b4() - 216 * self.b6()
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    pub fn j_invariant(&self) -> BigRat {
        let c4 = self.c4();
        BigRat::new(&c4 * &c4 * &c4, self.discriminant())
    }

    /// Stable content hash of `(a1, …, a6)`, used as the cache key.
    pub fn hash_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.to_string().as_bytes());
        hex::encode(h.finalize())
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for WeierstrassModel {
    type Err = Error;

    /// Parses `a1,a2,a3,a4,a6`, or `A,B` for a short model.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| BigInt::from_str(t.trim()).map_err(|_| Error::Domain(format!("bad coefficient {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        match <[BigInt; 5]>::try_from(parts) {
            Ok([a1, a2, a3, a4, a6]) => Self::new(a1, a2, a3, a4, a6),
            Err(parts) if parts.len() == 2 => {
                let [a4, a6] = <[BigInt; 2]>::try_from(parts).unwrap();
                Self::short(a4, a6)
            }
            Err(_) => domain(format!("expected 5 (or 2) comma-separated integers, got {s:?}")),
        }
    }
}

impl Serialize for WeierstrassModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.a.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeierstrassModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.join(",").parse().map_err(serde::de::Error::custom)
    }
}

/// `y² = x³ + A·x + B` over `F_p`, `p ≥ 5`, nonsingular.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedCurve {
    pub p: u64,
    pub a: u64,
    pub b: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    #[serde(rename = "N")]
    pub n: u64,
    pub d: u64,
    pub e: u64,
}

/// Result of reducing a model modulo a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    Good(ReducedCurve),
    Bad,
}

impl Reduction {
    pub fn good(self) -> Option<ReducedCurve> {
        match self {
            Reduction::Good(c) => Some(c),
            Reduction::Bad => None,
        }
    }
}

fn mod_p(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in u64")
}

/// Short form of `m` modulo `p`. Short models are reduced as they are; general models
/// go through `A = −27c4`, `B = −54c6`.
pub fn reduce(m: &WeierstrassModel, p: u64) -> Result<Reduction> {
    if p == 2 || p == 3 {
        return domain("primes 2 and 3 are not supported");
    }
    if !is_prime_u64(p) {
        return domain(format!("{p} is not prime"));
    }
    if m.discriminant().is_multiple_of(&BigInt::from(p)) {
        return Ok(Reduction::Bad);
    }
    let (a, b) = if m.is_short() {
        (mod_p(&m.a[3], p), mod_p(&m.a[4], p))
    } else {
        (mod_p(&(-27 * m.c4()), p), mod_p(&(-54 * m.c6()), p))
    };
    Ok(Reduction::Good(ReducedCurve { p, a, b }))
}

impl ReducedCurve {
    pub fn new(p: u64, a: u64, b: u64) -> Result<Self> {
        if p < 5 || !is_prime_u64(p) {
            return domain(format!("{p} is not a prime ≥ 5"));
        }
        let (a, b) = (a % p, b % p);
        let disc = fp::add(fp::mul(4, fp::pow(a, 3, p), p), fp::mul(27, fp::mul(b, b, p), p), p);
        if disc == 0 {
            return domain(format!("y² = x³ + {a}x + {b} is singular mod {p}"));
        }
        Ok(ReducedCurve { p, a, b })
    }

    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        fp::add(fp::mul(fp::add(fp::mul(x, x, p), self.a, p), x, p), self.b, p)
    }

    pub fn j_invariant(&self) -> u64 {
        let p = self.p;
        let a3 = fp::mul(4, fp::pow(self.a, 3, p), p);
        let denom = fp::add(a3, fp::mul(27, fp::mul(self.b, self.b, p), p), p);
        fp::mul(fp::mul(1728, a3, p), fp::inv(denom, p), p)
    }
}

/// `#E(F_p)` as `p + 1 + Σ_x χ(x³ + Ax + B)`, with a table of squares and the cubic
/// evaluated by finite differences.
pub fn count_points(c: &ReducedCurve) -> u64 {
    let p = c.p;
    let mut is_square = vec![false; p as usize];
    let mut sq = 0u64;
    let mut step = 1u64;
    // (y + 1)² = y² + (2y + 1)
    for _ in 0..(p + 1) / 2 {
        is_square[sq as usize] = true;
        sq = fp::add(sq, step, p);
        step = fp::add(step, 2, p);
    }
    // f(x+1) − f(x) = 3x² + 3x + 1 + A; second difference 6x + 6; third 6.
    let mut f = c.b;
    let mut d1 = fp::add(1, c.a, p);
    let mut d2 = 6 % p;
    let mut chi_sum: i64 = 0;
    for _ in 0..p {
        if f != 0 {
            chi_sum += if is_square[f as usize] { 1 } else { -1 };
        }
        f = fp::add(f, d1, p);
        d1 = fp::add(d1, d2, p);
        d2 = fp::add(d2, 6 % p, p);
    }
    (p as i64 + 1 + chi_sum) as u64
}

type Point = Option<(u64, u64)>;

fn point_add(c: &ReducedCurve, p1: Point, p2: Point) -> Point {
    let p = c.p;
    let ((x1, y1), (x2, y2)) = match (p1, p2) {
        (None, q) | (q, None) => return q,
        (Some(a), Some(b)) => (a, b),
    };
    let lambda = if x1 == x2 {
        if fp::add(y1, y2, p) == 0 {
            return None;
        }
        let num = fp::add(fp::mul(3, fp::mul(x1, x1, p), p), c.a, p);
        fp::mul(num, fp::inv(fp::mul(2, y1, p), p), p)
    } else {
        fp::mul(fp::sub(y2, y1, p), fp::inv(fp::sub(x2, x1, p), p), p)
    };
    let x3 = fp::sub(fp::sub(fp::mul(lambda, lambda, p), x1, p), x2, p);
    let y3 = fp::sub(fp::mul(lambda, fp::sub(x1, x3, p), p), y1, p);
    Some((x3, y3))
}

fn point_mul(c: &ReducedCurve, mut k: u64, pt: Point) -> Point {
    let mut acc = None;
    let mut base = pt;
    while k > 0 {
        if k & 1 == 1 {
            acc = point_add(c, acc, base);
        }
        base = point_add(c, base, base);
        k >>= 1;
    }
    acc
}

fn random_point<R: Rng>(c: &ReducedCurve, rng: &mut R) -> Point {
    loop {
        let x = rng.gen_range(0..c.p);
        if let Some(y) = fp::sqrt(c.rhs(x), c.p) {
            let y = if rng.gen() { y } else { fp::sub(0, y, c.p) };
            return Some((x, y));
        }
    }
}

/// All affine points, in order of `x`.
pub fn enumerate_points(c: &ReducedCurve) -> Vec<(u64, u64)> {
    let p = c.p;
    let mut out = Vec::new();
    for x in 0..p {
        if let Some(y) = fp::sqrt(c.rhs(x), p) {
            out.push((x, y));
            if y != 0 {
                out.push((x, p - y));
            }
        }
    }
    out
}

fn valuation_u64(mut n: u64, l: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % l == 0 {
        n /= l;
        v += 1;
    }
    v
}

/// Whether `E(F_p) ⊇ (Z/ℓ)²`.
pub fn has_full_torsion(c: &ReducedCurve, l: u64) -> Result<bool> {
    if l == c.p {
        return domain(format!("ℓ = p = {l}"));
    }
    if !is_prime_u64(l) {
        return domain(format!("{l} is not prime"));
    }
    let p = c.p;
    if (p - 1) % l != 0 {
        return Ok(false);
    }
    Ok(match l {
        2 => fp::splits_completely(&[c.b, c.a, 0, 1], p),
        3 => {
            // ψ3 = 3x⁴ + 6Ax² + 12Bx − A²
            let psi3 = [fp::sub(0, fp::mul(c.a, c.a, p), p), fp::mul(12, c.b, p), fp::mul(6, c.a, p), 0, 3];
            fp::splits_completely(&psi3, p)
                && fp::split_roots(&psi3, p).into_iter().all(|x| fp::legendre(c.rhs(x), p) == 1)
        }
        _ => {
            let n = count_points(c);
            if n % (l * l) != 0 {
                return Ok(false);
            }
            let killed = enumerate_points(c)
                .into_iter()
                .filter(|&pt| point_mul(c, l, Some(pt)).is_none())
                .count() as u64;
            killed + 1 == l * l
        }
    })
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Number of random points sampled when locating the exponent of a Sylow subgroup.
const SYLOW_SAMPLES: usize = 48;

/// `(N, d, e)` with `E(F_p) ≅ Z/d × Z/e`, `d | e`.
///
/// For each `ℓ` dividing `gcd(N, p − 1)` with full `ℓ`-torsion, the `ℓ`-part of `d` is
/// `ℓ^(v − b)` where `ℓ^b` is the exponent of the `ℓ`-Sylow subgroup, found as the largest
/// order among projections of seeded random points.
pub fn group_structure(c: &ReducedCurve) -> GroupStructure {
    let p = c.p;
    let n = count_points(c);
    let mut d = 1u64;
    for l in prime_factors(n.gcd(&(p - 1))) {
        let v = valuation_u64(n, l);
        if v < 2 || !has_full_torsion(c, l).unwrap_or(false) {
            continue;
        }
        let cap = valuation_u64(p - 1, l).min(v / 2);
        if cap == 1 {
            d *= l;
            continue;
        }
        let cofactor = n / l.pow(v);
        let mut rng = rand::rngs::StdRng::seed_from_u64(p ^ (l << 40));
        let mut b = 0;
        for _ in 0..SYLOW_SAMPLES {
            let mut q = point_mul(c, cofactor, random_point(c, &mut rng));
            let mut order_exp = 0;
            while q.is_some() {
                q = point_mul(c, l, q);
                order_exp += 1;
            }
            b = b.max(order_exp);
            if v - b <= 1 {
                break;
            }
        }
        d *= l.pow((v - b).clamp(1, cap));
    }
    GroupStructure { n, d, e: n / d }
}

/// `E(F_p)` is cyclic iff no `ℓ | gcd(N, p − 1)` with `ℓ² | N` has full `ℓ`-torsion.
pub fn is_cyclic(c: &ReducedCurve) -> bool {
    let p = c.p;
    for l in [2u64, 3] {
        if (p - 1) % l == 0 && has_full_torsion(c, l).unwrap_or(false) {
            return false;
        }
    }
    let n = count_points(c);
    prime_factors(n.gcd(&(p - 1)))
        .into_iter()
        .filter(|&l| l > 3 && n % (l * l) == 0)
        .all(|l| !has_full_torsion(c, l).unwrap_or(false))
}

/// Predicts complete splitting of `p` in `F` from the Kronecker characters of its generators.
pub fn split_prediction(f: &MultiQuadField, p: u64) -> Result<bool> {
    let pb = BigInt::from(p);
    let mut all = true;
    for m in f.basis() {
        let disc = m.fundamental_discriminant()?;
        if disc.is_multiple_of(&pb) {
            return Err(Error::Precondition(format!("{p} ramifies in Q(√{m})")));
        }
        all &= kronecker(&disc, &pb) == 1;
    }
    Ok(all)
}

/// Whether `p` ramifies in `F`.
pub fn ramified_in(f: &MultiQuadField, p: u64) -> bool {
    let pb = BigInt::from(p);
    f.basis().iter().any(|m| m.ramified_at(&pb))
}
