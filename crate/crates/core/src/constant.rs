//! The cyclicity constant `C_{E,a,n}`: truncated Möbius sums, the almost-Euler
//! product, vanishing via `S′`-emptiness, and the classical 2-torsion criterion.
//!
//! Curves enter only through [`GaloisData`], a finite proxy for the adelic image:
//! exact data at the divisors of a square-free support `D`, and (optionally) the
//! open-image default `GL₂(F_ℓ)` with no entanglement beyond `Q(ζ_ℓ)` elsewhere.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ec_reduction::WeierstrassModel;
use crate::error::{domain, Error, Result};
use crate::exact_arith::{
    divisors, euler_phi, is_squarefree, kronecker_i64, moebius, prime_divisors, sieve_primes,
    BigRat, SquareClass,
};
use crate::multiquadratic::{compositum_degree, s_prime_empty, CycloRestriction, Fiber, MultiQuadField};

/// Fractional digits carried by [`Decimal`].
pub const DECIMAL_DIGITS: usize = 50;

/// Largest auxiliary modulus enumerated when intersecting an abelian part with `Q(ζ_n)`.
pub const MAX_CHARACTER_MODULUS: u64 = 20_000_000;

/// `|GL₂(F_ℓ)|`.
pub fn gl2_order(l: u64) -> u64 {
    (l * l - 1) * (l * l - l)
}

/// `|GL₂(Z/dZ)|` for square-free `d`.
fn gl2_order_squarefree(d: u64) -> BigInt {
    prime_divisors(d).into_iter().map(|l| BigInt::from(gl2_order(l))).product()
}

/// A fixed-point decimal with [`DECIMAL_DIGITS`] fractional digits, rounded to nearest.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decimal {
    scaled: BigInt,
}

impl Decimal {
    pub fn from_rational(x: &BigRat) -> Self {
        let scale = num_traits::pow(BigInt::from(10), DECIMAL_DIGITS);
        let num: BigInt = x.numer() * scale * 2 + x.denom();
        Decimal { scaled: num.div_floor(&(x.denom() * 2)) }
    }

    pub fn is_zero(&self) -> bool {
        self.scaled.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().expect("decimal renders as a float literal")
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.scaled.abs().to_string();
        let padded = format!("{digits:0>width$}", width = DECIMAL_DIGITS + 1);
        let (int, frac) = padded.split_at(padded.len() - DECIMAL_DIGITS);
        let sign = if self.scaled.is_negative() { "-" } else { "" };
        write!(f, "{sign}{int}.{frac}")
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn serialize_rat<S: Serializer>(x: &BigRat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Exact data for `Q(E[d])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelData {
    /// `[Q(E[d]) : Q]`.
    pub degree: BigInt,
    /// The known multiquadratic subfield.
    pub abelian: MultiQuadField,
    /// Largest `c` with `Q(ζ_c) ⊆ Q(E[d])`.
    pub cyclotomic: u64,
}

impl LevelData {
    pub fn new(degree: impl Into<BigInt>, abelian: MultiQuadField, cyclotomic: u64) -> Self {
        LevelData { degree: degree.into(), abelian, cyclotomic }
    }

    fn trivial() -> Self {
        LevelData::new(1, MultiQuadField::rational(), 1)
    }

    /// True when `Q(E[d])` is itself the multiquadratic field `abelian`.
    pub fn is_multiquadratic(&self) -> bool {
        self.degree == BigInt::from(self.abelian.degree())
            && (self.cyclotomic == 1 || (24 % self.cyclotomic == 0 && cyclotomic_in(self.cyclotomic, &self.abelian)))
    }
}

/// Quadratic subfields generating `Q(ζ_c)` for `c | 24`.
fn cyclotomic_generators(c: u64) -> Vec<i64> {
    let mut g = Vec::new();
    if c % 4 == 0 {
        g.push(-1);
    }
    if c % 8 == 0 {
        g.push(2);
    }
    if c % 3 == 0 {
        g.push(-3);
    }
    g
}

fn cyclotomic_in(c: u64, f: &MultiQuadField) -> bool {
    cyclotomic_generators(c).into_iter().all(|m| f.contains(&SquareClass::from_label_unchecked(m.into())))
}

/// The largest `c | 24` with `Q(ζ_c) ⊆ F`.
pub fn cyclotomic_part(f: &MultiQuadField) -> u64 {
    [24, 12, 8, 6, 4, 3, 2, 1].into_iter().find(|&c| cyclotomic_in(c, f)).unwrap_or(1)
}

/// The finite proxy for the adelic Galois image of a curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisData {
    support: u64,
    levels: BTreeMap<u64, LevelData>,
    full_image_outside: bool,
    cm: bool,
}

impl GaloisData {
    /// Validates the invariants of the proxy. Levels outside the divisors of `support`
    /// are accepted and override the open-image defaults.
    pub fn new(support: u64, levels: BTreeMap<u64, LevelData>, full_image_outside: bool) -> Result<Self> {
        if !is_squarefree(support) {
            return domain(format!("support {support} is not a positive square-free integer"));
        }
        for (&d, lv) in &levels {
            if !is_squarefree(d) {
                return domain(format!("level {d} is not square-free"));
            }
            if d == 1 && !lv.degree.is_one() {
                return domain("degree at level 1 must be 1");
            }
            if !lv.degree.is_positive() || !gl2_order_squarefree(d).is_multiple_of(&lv.degree) {
                return domain(format!("degree {} at level {d} does not divide |GL2(Z/{d})|", lv.degree));
            }
            if !lv.degree.is_multiple_of(&BigInt::from(lv.abelian.degree())) {
                return domain(format!("abelian part at level {d} has degree not dividing {}", lv.degree));
            }
            if lv.cyclotomic == 0 {
                return domain(format!("cyclotomic part at level {d} must be positive"));
            }
        }
        Ok(GaloisData { support, levels, full_image_outside, cm: false })
    }

    /// A non-CM curve whose image is `GL₂(Ẑ)` up to the cyclotomic determinant.
    pub fn full_image() -> Self {
        GaloisData { support: 1, levels: BTreeMap::new(), full_image_outside: true, cm: false }
    }

    /// The reference curve: `Q(E[2]) = Q(√−6)`, `Q(E[3]) = Q(√−3)`.
    pub fn example() -> Self {
        let f2 = MultiQuadField::from_labels(&[-6]).expect("valid labels");
        let f3 = MultiQuadField::from_labels(&[-3]).expect("valid labels");
        let f6 = f2.join(&f3).expect("rank 2");
        let levels = BTreeMap::from([
            (2, LevelData::new(2, f2, 2)),
            (3, LevelData::new(2, f3, 3)),
            (6, LevelData::new(4, f6, 6)),
        ]);
        GaloisData::new(6, levels, true).expect("example data is valid")
    }

    /// Data at level 2, 3 and 6 for multiquadratic 2- and 3-division fields.
    pub fn from_division_fields(field2: &MultiQuadField, field3: &MultiQuadField) -> Result<Self> {
        let f6 = field2.join(field3)?;
        let levels = BTreeMap::from([
            (2, LevelData::new(field2.degree(), field2.clone(), cyclotomic_part(field2).max(2))),
            (3, LevelData::new(field3.degree(), field3.clone(), cyclotomic_part(field3))),
            (6, LevelData::new(f6.degree(), f6.clone(), cyclotomic_part(&f6).max(2))),
        ]);
        GaloisData::new(6, levels, true)
    }

    /// Marks the curve as CM; every constant evaluation then refuses it.
    pub fn with_cm(mut self, cm: bool) -> Self {
        self.cm = cm;
        self
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn levels(&self) -> &BTreeMap<u64, LevelData> {
        &self.levels
    }

    pub fn full_image_outside(&self) -> bool {
        self.full_image_outside
    }

    pub fn is_cm(&self) -> bool {
        self.cm
    }

    /// Data at square-free `d`, filling in open-image defaults away from the support.
    pub fn level(&self, d: u64) -> Result<LevelData> {
        if let Some(lv) = self.levels.get(&d) {
            return Ok(lv.clone());
        }
        if !is_squarefree(d) {
            return domain(format!("level {d} is not square-free"));
        }
        let d1 = d.gcd(&self.support);
        let d2 = d / d1;
        if d2 == 1 {
            return if d == 1 {
                Ok(LevelData::trivial())
            } else {
                domain(format!("no data for level {d} dividing the support {}", self.support))
            };
        }
        if !self.full_image_outside {
            return domain(format!("no data for level {d} and full_image_outside is false"));
        }
        let base = self.level(d1)?;
        Ok(LevelData {
            degree: base.degree * gl2_order_squarefree(d2),
            abelian: base.abelian,
            cyclotomic: base.cyclotomic.lcm(&d2),
        })
    }

    fn check_usable(&self) -> Result<()> {
        if self.cm {
            return Err(Error::Precondition("CM curves are outside the scope of the constant".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Label {
    Int(i64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct RawLevel {
    degree: u64,
    #[serde(default)]
    abelian: Vec<Label>,
    #[serde(default)]
    cyclotomic: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawData {
    #[serde(rename = "D")]
    support: u64,
    #[serde(default)]
    levels: BTreeMap<u64, RawLevel>,
    full_image_outside: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    cm: bool,
}

impl Serialize for GaloisData {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let levels = self
            .levels
            .iter()
            .map(|(&d, lv)| {
                let abelian = lv
                    .abelian
                    .basis()
                    .iter()
                    .map(|m| m.label().to_i64().map(Label::Int).unwrap_or_else(|| Label::Text(m.label().to_string())))
                    .collect();
                let degree = lv.degree.to_u64().ok_or_else(|| serde::ser::Error::custom("degree exceeds u64"))?;
                Ok((d, RawLevel { degree, abelian, cyclotomic: Some(lv.cyclotomic) }))
            })
            .collect::<std::result::Result<_, S::Error>>()?;
        RawData { support: self.support, levels, full_image_outside: self.full_image_outside, cm: self.cm }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaloisData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawData::deserialize(d)?;
        let mut levels = BTreeMap::new();
        for (level, lv) in raw.levels {
            let gens = lv
                .abelian
                .into_iter()
                .map(|l| match l {
                    Label::Int(m) => SquareClass::from_label(m),
                    Label::Text(t) => {
                        t.parse::<BigInt>().map_err(|e| Error::Domain(e.to_string())).and_then(SquareClass::from_label)
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map_err(D::Error::custom)?;
            let abelian = MultiQuadField::new(gens).map_err(D::Error::custom)?;
            levels.insert(level, LevelData::new(lv.degree, abelian, lv.cyclotomic.unwrap_or(level)));
        }
        GaloisData::new(raw.support, levels, raw.full_image_outside).map(|g| g.with_cm(raw.cm)).map_err(D::Error::custom)
    }
}

/// `(γ_{a,n}(Q(E[d])), [Q(E[d])Q(ζ_n) : Q])` for one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTerm {
    pub gamma: bool,
    pub compositum_degree: BigInt,
}

/// Evaluates level terms for a fixed `σ_a`, memoizing the character computations.
struct TermEvaluator<'a> {
    data: &'a GaloisData,
    a: u64,
    n: u64,
    cache: Mutex<HashMap<(Vec<BigInt>, u64), (bool, u64)>>,
}

impl<'a> TermEvaluator<'a> {
    fn new(data: &'a GaloisData, a: &BigInt, n: &BigInt) -> Result<Self> {
        data.check_usable()?;
        let r = CycloRestriction::new(a.clone(), n.clone())?;
        let n = r.n().to_u64().ok_or_else(|| Error::Domain(format!("modulus {n} exceeds u64")))?;
        let a = r.a().to_u64().expect("reduced below n");
        Ok(TermEvaluator { data, a, n, cache: Mutex::new(HashMap::new()) })
    }

    /// The image in `(Z/n)^×` of `Gal(Q(ζ_M)/L)` for `L = Q(ζ_c)·F`: its size, and
    /// whether it contains `a`. Its index is `[L ∩ Q(ζ_n) : Q]`.
    fn restriction_image(&self, f: &MultiQuadField, c: u64) -> Result<(bool, u64)> {
        let discs: Vec<i64> = f
            .basis()
            .iter()
            .map(|m| m.fundamental_discriminant()?.to_i64().ok_or_else(|| Error::Resource(format!("conductor of √{m}"))))
            .collect::<Result<_>>()?;
        let conductor = discs.iter().fold(1u64, |acc, d| acc.lcm(&d.unsigned_abs()));
        // Prime powers of c away from n and the conductor impose independent conditions.
        let relevant = self.n * conductor;
        let c_rel = prime_divisors(c)
            .into_iter()
            .filter(|&p| relevant % p == 0)
            .map(|p| {
                let mut q = 1;
                while c % (q * p) == 0 {
                    q *= p;
                }
                q
            })
            .product::<u64>();
        let key = (f.basis().iter().map(|m| m.label().clone()).collect(), c_rel);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*hit);
        }
        let modulus = c_rel.lcm(&conductor).lcm(&self.n);
        if modulus > MAX_CHARACTER_MODULUS {
            return Err(Error::Resource(format!("character modulus {modulus} exceeds {MAX_CHARACTER_MODULUS}")));
        }
        let mut seen = vec![false; self.n as usize];
        let mut x = 1;
        while x < modulus.max(2) {
            if x.gcd(&modulus) == 1 && discs.iter().all(|&d| kronecker_i64(d, x as i64) == 1) {
                seen[(x % self.n) as usize] = true;
            }
            x += c_rel;
        }
        let size = seen.iter().filter(|&&s| s).count() as u64;
        let out = (seen[self.a as usize], size);
        self.cache.lock().expect("cache lock").insert(key, out);
        Ok(out)
    }

    fn term(&self, d: u64) -> Result<LevelTerm> {
        let lv = self.data.level(d)?;
        let (gamma, image) = self.restriction_image(&lv.abelian, lv.cyclotomic)?;
        Ok(LevelTerm { gamma, compositum_degree: lv.degree * image })
    }

    /// `μ(d)·γ/[Q(E[d])Q(ζ_n):Q]`, skipping the degree when `γ = 0`.
    fn moebius_term(&self, d: u64) -> Result<BigRat> {
        let mu = moebius(d);
        if mu == 0 {
            return Ok(BigRat::zero());
        }
        let t = self.term(d)?;
        if !t.gamma {
            return Ok(BigRat::zero());
        }
        Ok(BigRat::new(BigInt::from(mu), t.compositum_degree))
    }

    /// The Lemma's `f(d) = γ/[Q(E[d])Q(ζ_n) : Q(ζ_n)]`.
    fn f(&self, d: u64) -> Result<BigRat> {
        let t = self.term(d)?;
        if !t.gamma {
            return Ok(BigRat::zero());
        }
        Ok(BigRat::new(BigInt::from(euler_phi(self.n)), t.compositum_degree))
    }
}

/// `γ_{a,n}(Q(E[d]))` and `[Q(E[d])Q(ζ_n):Q]` from the data.
pub fn level_term(data: &GaloisData, a: &BigInt, n: &BigInt, d: u64) -> Result<LevelTerm> {
    TermEvaluator::new(data, a, n)?.term(d)
}

fn sum_tree(mut xs: Vec<BigRat>) -> BigRat {
    while xs.len() > 1 {
        xs = xs
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] + &c[1] } else { c[0].clone() })
            .collect();
    }
    xs.pop().unwrap_or_else(BigRat::zero)
}

fn product_tree(mut xs: Vec<BigRat>) -> BigRat {
    while xs.len() > 1 {
        xs = xs
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() })
            .collect();
    }
    xs.pop().unwrap_or_else(BigRat::one)
}

/// The exact partial sum `Σ_{d ≤ D_max} μ(d)γ_{a,n}(Q(E[d]))/[Q(E[d])Q(ζ_n):Q]`.
pub fn truncated_sum_exact(data: &GaloisData, a: &BigInt, n: &BigInt, d_max: u64) -> Result<BigRat> {
    if d_max == 0 {
        return domain("D_max must be at least 1");
    }
    let ev = TermEvaluator::new(data, a, n)?;
    let terms = (1..=d_max)
        .into_par_iter()
        .filter(|&d| is_squarefree(d))
        .map(|d| ev.moebius_term(d))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_tree(terms))
}

pub fn truncated_sum(data: &GaloisData, a: &BigInt, n: &BigInt, d_max: u64) -> Result<Decimal> {
    truncated_sum_exact(data, a, n, d_max).map(|x| Decimal::from_rational(&x))
}

/// The finite sum over the square-free divisors of `m`. For `m` a multiple of the
/// support this is the exact leading factor of the almost-Euler product.
pub fn level_sum(data: &GaloisData, a: &BigInt, n: &BigInt, m: u64) -> Result<BigRat> {
    if m == 0 {
        return domain("level must be positive");
    }
    let ev = TermEvaluator::new(data, a, n)?;
    let terms = divisors(m).into_iter().map(|d| ev.moebius_term(d)).collect::<Result<Vec<_>>>()?;
    Ok(sum_tree(terms))
}

/// The prime-indexed multiquadratic division fields at the support, when every one of
/// them is multiquadratic.
fn prime_fields(data: &GaloisData) -> Result<Option<BTreeMap<u64, MultiQuadField>>> {
    let mut fields = BTreeMap::new();
    for l in prime_divisors(data.support) {
        let lv = data.level(l)?;
        if !lv.is_multiquadratic() {
            return Ok(None);
        }
        fields.insert(l, lv.abelian);
    }
    Ok(Some(fields))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantResult {
    pub value: Decimal,
    #[serde(serialize_with = "serialize_rat")]
    pub leading_rational: BigRat,
    pub euler_cutoff: u64,
    pub vanishes: bool,
}

/// `|S′(D)|/[Q(E[D])Q(ζ_n):Q]`, by fiber enumeration when the division fields at the
/// support are multiquadratic and by inclusion–exclusion otherwise.
pub fn leading_factor(data: &GaloisData, a: &BigInt, n: &BigInt) -> Result<BigRat> {
    data.check_usable()?;
    let r = CycloRestriction::new(a.clone(), n.clone())?;
    match prime_fields(data)? {
        Some(fields) => {
            let fiber = Fiber::compute(&fields, &r)?;
            let count = fiber.s_prime().count();
            let join = fields.values().try_fold(MultiQuadField::rational(), |acc, f| acc.join(f))?;
            let n = r.n().to_u64().ok_or_else(|| Error::Domain("modulus exceeds u64".into()))?;
            Ok(BigRat::new(count.into(), compositum_degree(&join, n)?.into()))
        }
        None => level_sum(data, a, n, data.support),
    }
}

/// `C_{E,a,n}` as an exact leading factor times the local factors `1 − f(ℓ)` for
/// primes `ℓ ∤ D` up to `cutoff`.
pub fn almost_euler(data: &GaloisData, a: &BigInt, n: &BigInt, cutoff: u64) -> Result<ConstantResult> {
    if !data.full_image_outside {
        return Err(Error::Precondition("almost_euler needs full_image_outside".into()));
    }
    if let Some(&big) = prime_divisors(data.support).last() {
        if cutoff < big {
            return domain(format!("cutoff {cutoff} is below the prime {big} of the support"));
        }
    }
    let leading = leading_factor(data, a, n)?;
    let ev = TermEvaluator::new(data, a, n)?;
    let primes: Vec<u64> =
        sieve_primes(cutoff).into_iter().map(u64::from).filter(|l| data.support % l != 0).collect();
    let factors = primes
        .into_par_iter()
        .map(|l| ev.f(l).map(|f| BigRat::one() - f))
        .collect::<Result<Vec<_>>>()?;
    let product = product_tree(factors);
    let value = &leading * product;
    Ok(ConstantResult {
        value: Decimal::from_rational(&value),
        vanishes: leading.is_zero(),
        leading_rational: leading,
        euler_cutoff: cutoff,
    })
}

/// `S′_{E,a,n}(D) = ∅`, decided in exact arithmetic.
pub fn vanishes(data: &GaloisData, a: &BigInt, n: &BigInt) -> Result<bool> {
    data.check_usable()?;
    let r = CycloRestriction::new(a.clone(), n.clone())?;
    match prime_fields(data)? {
        Some(fields) => s_prime_empty(&fields, &r),
        None => Ok(level_sum(data, a, n, data.support)?.is_zero()),
    }
}

/// A prime `ℓ | D` with `σ_a` forced to act trivially on all of `Q(E[ℓ])`, i.e.
/// `Q(E[ℓ]) ⊆ Q(ζ_n)` and `γ_{a,n}(Q(E[ℓ])) = 1`. Such a prime makes the constant
/// vanish on its own.
pub fn single_prime_obstruction(data: &GaloisData, a: &BigInt, n: &BigInt) -> Result<Option<u64>> {
    let ev = TermEvaluator::new(data, a, n)?;
    for l in prime_divisors(data.support) {
        let t = ev.term(l)?;
        // Q(E[ℓ]) ⊆ Q(ζ_n) iff the compositum is no larger than Q(ζ_n).
        if t.gamma && t.compositum_degree == BigInt::from(euler_phi(ev.n)) {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

/// Integer roots of the monic cubic `X³ + pX² + qX + s`.
fn integer_roots_of_cubic(p: &BigInt, q: &BigInt, s: &BigInt) -> BTreeSet<BigInt> {
    let g = |x: &BigInt| ((x + p) * x + q) * x + s;
    let bound = BigInt::one() + p.abs().max(q.abs()).max(s.abs());
    let mut roots = BTreeSet::new();
    let check = |x: &BigInt, roots: &mut BTreeSet<BigInt>| {
        if g(x).is_zero() {
            roots.insert(x.clone());
        }
    };
    // Cutting points: approximations of the critical points, each within 1 of the truth.
    let delta: BigInt = p * p - 3 * q;
    let mut cuts = Vec::new();
    if delta.is_positive() {
        let r = delta.sqrt();
        cuts.push(Integer::div_floor(&(-p - &r), &BigInt::from(3)));
        cuts.push(Integer::div_floor(&(-p + &r), &BigInt::from(3)));
    }
    let window = BigInt::from(3);
    let mut edges = vec![-bound.clone()];
    for c in &cuts {
        let mut x = c - &window;
        while x <= c + &window {
            check(&x, &mut roots);
            x += 1;
        }
        edges.push(c - &window);
        edges.push(c + &window);
    }
    edges.push(bound);
    // Between windows g is monotone, so bisection finds the only possible root.
    for pair in edges.chunks(2) {
        let (mut lo, mut hi) = (pair[0].clone(), pair[1].clone());
        if lo > hi {
            continue;
        }
        check(&lo, &mut roots);
        check(&hi, &mut roots);
        let (glo, ghi) = (g(&lo), g(&hi));
        if glo.signum() == ghi.signum() {
            continue;
        }
        let rising = glo.is_negative();
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            let gm = g(&mid);
            if gm.is_zero() {
                roots.insert(mid.clone());
                break;
            }
            if gm.is_negative() == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    roots
}

/// The 2-rank of `E(Q)[2]`, from the integer roots of `X³ + b₂X² + 8b₄X + 16b₆`
/// (the 2-division cubic scaled by `x = X/4`).
pub fn rational_two_torsion(m: &WeierstrassModel) -> u8 {
    let roots = integer_roots_of_cubic(&m.b2(), &(m.b4() * 8), &(m.b6() * 16));
    match roots.len() {
        0 => 0,
        1 => 1,
        _ => 2,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiMultViolation {
    pub d1: u64,
    pub d2: u64,
    #[serde(serialize_with = "serialize_rat")]
    pub f_d1: BigRat,
    #[serde(serialize_with = "serialize_rat")]
    pub f_d2: BigRat,
    #[serde(serialize_with = "serialize_rat")]
    pub f_product: BigRat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiMultReport {
    pub checked: usize,
    pub violations: Vec<QuasiMultViolation>,
}

impl QuasiMultReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `f(d₁d₂) = f(d₁)f(d₂)` for the given pairs. Pairs violating
/// `gcd(d₁·D, d₂) = 1` or square-freeness are rejected.
pub fn quasi_mult_check(data: &GaloisData, a: &BigInt, n: &BigInt, pairs: &[(u64, u64)]) -> Result<QuasiMultReport> {
    let ev = TermEvaluator::new(data, a, n)?;
    for &(d1, d2) in pairs {
        if (d1 * data.support).gcd(&d2) != 1 {
            return domain(format!("pair ({d1}, {d2}) violates gcd(d1*D, d2) = 1"));
        }
        if !is_squarefree(d1) || !is_squarefree(d2) {
            return domain(format!("pair ({d1}, {d2}) is not square-free"));
        }
    }
    let mut violations = Vec::new();
    for &(d1, d2) in pairs {
        let (f1, f2, f12) = (ev.f(d1)?, ev.f(d2)?, ev.f(d1 * d2)?);
        if &f1 * &f2 != f12 {
            violations.push(QuasiMultViolation { d1, d2, f_d1: f1, f_d2: f2, f_product: f12 });
        }
    }
    Ok(QuasiMultReport { checked: pairs.len(), violations })
}

#[cfg(test)]
mod tests;
