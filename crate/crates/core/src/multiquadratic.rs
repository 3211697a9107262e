//! Multiquadratic fields `Q(√m₁, …, √m_k)` as spans of square classes.
//!
//! A field is stored as a basis of its subgroup of `Q^×/(Q^×)²`. Every class of the
//! span is tagged with its coordinate bitmask in that basis, so Galois elements
//! (sign vectors on the basis) act on any class by a parity computation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::exact_arith::{euler_phi, kronecker, SquareClass};

/// Largest rank accepted for span enumeration.
pub const MAX_RANK: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiQuadField {
    basis: Vec<SquareClass>,
}

impl MultiQuadField {
    /// Builds the field generated by `gens`. Trivial and dependent generators are dropped.
    pub fn new<I: IntoIterator<Item = SquareClass>>(gens: I) -> Result<Self> {
        let mut field = MultiQuadField { basis: Vec::new() };
        let mut span = vec![SquareClass::trivial()];
        for g in gens {
            if span.contains(&g) {
                continue;
            }
            if field.basis.len() == MAX_RANK {
                return Err(Error::Resource(format!("multiquadratic rank exceeds {MAX_RANK}")));
            }
            let shifted: Vec<_> = span.iter().map(|s| s.mul(&g)).collect();
            span.extend(shifted);
            field.basis.push(g);
        }
        Ok(field)
    }

    pub fn rational() -> Self {
        MultiQuadField { basis: Vec::new() }
    }

    /// Convenience constructor from square-free integer labels.
    pub fn from_labels(labels: &[i64]) -> Result<Self> {
        let classes = labels.iter().map(|&m| SquareClass::from_label(m)).collect::<Result<Vec<_>>>()?;
        Self::new(classes)
    }

    pub fn basis(&self) -> &[SquareClass] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> u64 {
        1 << self.rank()
    }

    pub fn is_rational(&self) -> bool {
        self.basis.is_empty()
    }

    /// Every class of the span paired with its coordinate mask in the basis.
    pub fn span_with_masks(&self) -> Vec<(SquareClass, u32)> {
        let mut span = vec![(SquareClass::trivial(), 0u32)];
        for (i, g) in self.basis.iter().enumerate() {
            let shifted: Vec<_> = span.iter().map(|(s, mask)| (s.mul(g), mask | (1 << i))).collect();
            span.extend(shifted);
        }
        span
    }

    pub fn span(&self) -> Vec<SquareClass> {
        self.span_with_masks().into_iter().map(|(s, _)| s).collect()
    }

    pub fn contains(&self, m: &SquareClass) -> bool {
        self.span().contains(m)
    }

    /// The compositum.
    pub fn join(&self, other: &MultiQuadField) -> Result<MultiQuadField> {
        MultiQuadField::new(self.basis.iter().chain(other.basis.iter()).cloned())
    }
}

impl fmt::Display for MultiQuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.basis.iter().map(|m| format!("√{m}")).collect();
        if labels.is_empty() {
            write!(f, "Q")
        } else {
            write!(f, "Q({})", labels.join(", "))
        }
    }
}

impl Serialize for MultiQuadField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.basis.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiQuadField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let gens = Vec::<SquareClass>::deserialize(d)?;
        MultiQuadField::new(gens).map_err(serde::de::Error::custom)
    }
}

/// `σ_a ∈ Gal(Q(ζ_n)/Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloRestriction {
    a: BigInt,
    n: BigInt,
}

impl CycloRestriction {
    pub fn new(a: impl Into<BigInt>, n: impl Into<BigInt>) -> Result<Self> {
        let (a, n) = (a.into(), n.into());
        if !n.is_positive() {
            return domain(format!("modulus must be positive, got {n}"));
        }
        if !a.gcd(&n).is_one() {
            return domain(format!("gcd({a}, {n}) != 1"));
        }
        Ok(CycloRestriction { a: a.mod_floor(&n), n })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn n(&self) -> &BigInt {
        &self.n
    }
}

/// Signs of a Galois element on the generators of a family of multiquadratic fields.
pub type SignVector = BTreeMap<SquareClass, i8>;

/// `Q(√m) ⊆ Q(ζ_n)` iff the discriminant divides `n`.
pub fn contained_in_cyclotomic(m: &SquareClass, n: &BigInt) -> bool {
    match m.fundamental_discriminant() {
        Ok(disc) => n.is_multiple_of(&disc.abs()),
        Err(_) => true,
    }
}

/// The sign by which `σ_a` acts on `√m`.
pub fn sigma_action(m: &SquareClass, r: &CycloRestriction) -> Result<i8> {
    if m.is_trivial() {
        return Ok(1);
    }
    if !contained_in_cyclotomic(m, &r.n) {
        return Err(Error::Precondition(format!("Q(√{m}) is not contained in Q(ζ_{})", r.n)));
    }
    Ok(kronecker(&m.fundamental_discriminant()?, &r.a))
}

/// `γ_{a,n}(F)`: 1 iff `σ_a` fixes `F ∩ Q(ζ_n)` pointwise.
pub fn gamma_an(f: &MultiQuadField, r: &CycloRestriction) -> Result<u8> {
    for m in f.span() {
        if contained_in_cyclotomic(&m, &r.n) && sigma_action(&m, r)? == -1 {
            return Ok(0);
        }
    }
    Ok(1)
}

/// `[F·Q(ζ_n) : Q]`.
pub fn compositum_degree(f: &MultiQuadField, n: u64) -> Result<u64> {
    if n == 0 {
        return domain("modulus must be positive");
    }
    let nb = BigInt::from(n);
    let inside = f.span().iter().filter(|m| contained_in_cyclotomic(m, &nb)).count() as u64;
    Ok(f.degree() * euler_phi(n) / inside)
}

/// The Galois fiber over `σ_a` of a compositum of multiquadratic fields, in coordinates.
///
/// Elements are bitmasks `s` over the combined basis (bit set = sign −1). The fiber is
/// an affine subspace: a particular solution plus the kernel of the constraints.
pub(crate) struct Fiber {
    /// For each field key, the masks of its own basis in the combined basis.
    pub field_masks: BTreeMap<u64, Vec<u32>>,
    pub members: Vec<u32>,
}

impl Fiber {
    pub fn compute(fields: &BTreeMap<u64, MultiQuadField>, r: &CycloRestriction) -> Result<Fiber> {
        let all = fields.values().flat_map(|f| f.basis().iter().cloned());
        let combined = MultiQuadField::new(all)?;
        let span = combined.span_with_masks();
        let index: HashMap<&SquareClass, u32> = span.iter().map(|(m, k)| (m, *k)).collect();

        let field_masks = fields
            .iter()
            .map(|(&l, f)| (l, f.basis().iter().map(|g| index[g]).collect()))
            .collect();

        // Reduce the constraints to an echelon basis over GF(2).
        let mut rows: Vec<(u32, u8)> = Vec::new();
        for (m, mask) in &span {
            if *mask == 0 || !contained_in_cyclotomic(m, &r.n) {
                continue;
            }
            let bit = u8::from(sigma_action(m, r)? == -1);
            let (mut v, mut b) = (*mask, bit);
            for &(rv, rb) in &rows {
                if v & (1 << rv.trailing_zeros()) != 0 {
                    v ^= rv;
                    b ^= rb;
                }
            }
            if v == 0 {
                if b != 0 {
                    return Err(Error::Internal("inconsistent cyclotomic constraints".into()));
                }
                continue;
            }
            let pivot = 1 << v.trailing_zeros();
            for row in rows.iter_mut() {
                if row.0 & pivot != 0 {
                    row.0 ^= v;
                    row.1 ^= b;
                }
            }
            rows.push((v, b));
        }

        let rank = combined.rank();
        let members = (0u32..1 << rank)
            .filter(|s| rows.iter().all(|&(v, b)| (v & s).count_ones() as u8 % 2 == b))
            .collect();
        Ok(Fiber { field_masks, members })
    }

    pub fn restricts_trivially(&self, s: u32, field: u64) -> bool {
        self.field_masks[&field].iter().all(|&g| (g & s).count_ones() % 2 == 0)
    }

    /// Members acting nontrivially on every field.
    pub fn s_prime(&self) -> impl Iterator<Item = u32> + '_ {
        self.members
            .iter()
            .copied()
            .filter(|&s| self.field_masks.keys().all(|&l| !self.restricts_trivially(s, l)))
    }
}

/// All Galois elements of the compositum restricting to `σ_a` on `Q(ζ_n)`, as signs on
/// the union of the fields' generators.
pub fn enumerate_fiber(fields: &BTreeMap<u64, MultiQuadField>, r: &CycloRestriction) -> Result<Vec<SignVector>> {
    let fiber = Fiber::compute(fields, r)?;
    let generators: Vec<(&SquareClass, u32)> = fields
        .iter()
        .flat_map(|(l, f)| f.basis().iter().zip(fiber.field_masks[l].iter().copied()))
        .collect();
    Ok(fiber
        .members
        .iter()
        .map(|&s| {
            generators
                .iter()
                .map(|&(g, mask)| (g.clone(), if (mask & s).count_ones() % 2 == 0 { 1 } else { -1 }))
                .collect()
        })
        .collect())
}

/// True iff every element of the fiber fixes at least one of the fields.
pub fn s_prime_empty(fields: &BTreeMap<u64, MultiQuadField>, r: &CycloRestriction) -> Result<bool> {
    Ok(Fiber::compute(fields, r)?.s_prime().next().is_none())
}

/// Sign of a class in the span of `vector`'s generators, if it is expressible.
pub fn sign_of(vector: &SignVector, m: &SquareClass) -> Option<i8> {
    let gens: Vec<_> = vector.keys().cloned().collect();
    let field = MultiQuadField::new(gens).ok()?;
    let (_, mask) = field.span_with_masks().into_iter().find(|(c, _)| c == m)?;
    let mut sign = 1;
    for (i, g) in field.basis().iter().enumerate() {
        if mask & (1 << i) != 0 {
            sign *= vector[g];
        }
    }
    Some(sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(m: i64) -> SquareClass {
        SquareClass::from_label(m).unwrap()
    }

    fn mq(labels: &[i64]) -> MultiQuadField {
        MultiQuadField::from_labels(labels).unwrap()
    }

    fn cr(a: i64, n: i64) -> CycloRestriction {
        CycloRestriction::new(a, n).unwrap()
    }

    fn example_fields() -> BTreeMap<u64, MultiQuadField> {
        BTreeMap::from([(2, mq(&[-6])), (3, mq(&[-3]))])
    }

    #[test]
    fn field_rank() {
        assert_eq!(mq(&[-6, -3, 2]).rank(), 2);
        assert_eq!(mq(&[1, 5]).rank(), 1);
        assert_eq!(mq(&[2, 3, 5, 7]).degree(), 16);
        assert_eq!(mq(&[-6, -3]).span().len(), 4);
    }

    #[test]
    fn containment() {
        let n8 = BigInt::from(8);
        assert!(contained_in_cyclotomic(&sc(2), &n8));
        assert!(contained_in_cyclotomic(&SquareClass::trivial(), &BigInt::from(7)));
        assert!(!contained_in_cyclotomic(&sc(-6), &n8));
        assert!(contained_in_cyclotomic(&sc(-3), &BigInt::from(3)));
        assert!(!contained_in_cyclotomic(&sc(3), &BigInt::from(3)));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_action(&sc(2), &cr(3, 8)).unwrap(), -1);
        assert_eq!(sigma_action(&SquareClass::trivial(), &cr(1, 5)).unwrap(), 1);
        assert_eq!(sigma_action(&sc(-3), &cr(2, 3)).unwrap(), -1);
        assert!(matches!(sigma_action(&sc(-6), &cr(3, 8)), Err(Error::Precondition(_))));
    }

    #[test]
    fn restriction_validation() {
        assert!(CycloRestriction::new(2, 8).is_err());
        assert!(CycloRestriction::new(1, 0).is_err());
        assert_eq!(cr(-5, 8).a(), &BigInt::from(3));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_an(&mq(&[-6]), &cr(3, 8)).unwrap(), 1);
        assert_eq!(gamma_an(&MultiQuadField::rational(), &cr(3, 8)).unwrap(), 1);
        assert_eq!(gamma_an(&mq(&[2]), &cr(3, 8)).unwrap(), 0);
        assert_eq!(gamma_an(&mq(&[-6, -3]), &cr(3, 8)).unwrap(), 0);
        assert_eq!(gamma_an(&mq(&[-6, -3]), &cr(7, 8)).unwrap(), 1);
    }

    #[test]
    fn fiber_examples() {
        let fiber = enumerate_fiber(&example_fields(), &cr(3, 8)).unwrap();
        let expected: Vec<SignVector> = vec![
            BTreeMap::from([(sc(-6), -1), (sc(-3), 1)]),
            BTreeMap::from([(sc(-6), 1), (sc(-3), -1)]),
        ];
        assert_eq!(fiber, expected);

        let trivial = enumerate_fiber(&BTreeMap::from([(2, MultiQuadField::rational())]), &cr(5, 7)).unwrap();
        assert_eq!(trivial, vec![SignVector::new()]);

        let identity = enumerate_fiber(&example_fields(), &cr(1, 8)).unwrap();
        assert_eq!(identity.len(), 2);
        assert!(identity.iter().all(|v| sign_of(v, &sc(2)) == Some(1)));
    }

    #[test]
    fn s_prime_examples() {
        assert!(s_prime_empty(&example_fields(), &cr(3, 8)).unwrap());
        assert!(s_prime_empty(&example_fields(), &cr(5, 8)).unwrap());
        assert!(!s_prime_empty(&example_fields(), &cr(1, 8)).unwrap());
        assert!(!s_prime_empty(&example_fields(), &cr(0, 1)).unwrap());
        assert!(s_prime_empty(&BTreeMap::from([(2, MultiQuadField::rational())]), &cr(0, 1)).unwrap());
    }

    #[test]
    fn compositum_examples() {
        assert_eq!(compositum_degree(&mq(&[2]), 8).unwrap(), 4);
        assert_eq!(compositum_degree(&MultiQuadField::rational(), 15).unwrap(), 8);
        assert_eq!(compositum_degree(&mq(&[-6, -3]), 8).unwrap(), 8);
        assert_eq!(compositum_degree(&mq(&[-6, -3]), 24).unwrap(), 8);
    }

    #[test]
    fn rank_limit() {
        let primes = crate::exact_arith::sieve_primes(200);
        let gens: Vec<_> = primes.iter().take(21).map(|&p| sc(p as i64)).collect();
        assert!(matches!(MultiQuadField::new(gens), Err(Error::Resource(_))));
    }

    /// Brute force: all sign assignments on a basis, filtered by the cyclotomic constraints.
    fn brute_fiber(fields: &BTreeMap<u64, MultiQuadField>, r: &CycloRestriction) -> Vec<SignVector> {
        let combined = MultiQuadField::new(fields.values().flat_map(|f| f.basis().to_vec())).unwrap();
        let gens: Vec<SquareClass> = fields.values().flat_map(|f| f.basis().to_vec()).collect();
        let basis = combined.basis().to_vec();
        let mut out = Vec::new();
        for bits in 0u32..1 << basis.len() {
            let on_basis: SignVector =
                basis.iter().enumerate().map(|(i, g)| (g.clone(), if bits >> i & 1 == 1 { -1 } else { 1 })).collect();
            let ok = combined
                .span()
                .iter()
                .filter(|m| contained_in_cyclotomic(m, r.n()))
                .all(|m| sign_of(&on_basis, m) == Some(sigma_action(m, r).unwrap()));
            if ok {
                out.push(gens.iter().map(|g| (g.clone(), sign_of(&on_basis, g).unwrap())).collect());
            }
        }
        out.sort();
        out
    }

    const SMALL_CLASSES: [i64; 14] = [-1, 2, -2, 3, -3, 5, -5, 6, -6, 7, 10, -15, 13, 30];

    fn field_strategy() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(prop::sample::select(SMALL_CLASSES.to_vec()), 0..4)
    }

    fn restriction_strategy() -> impl Strategy<Value = CycloRestriction> {
        (prop::sample::select(vec![1i64, 3, 4, 5, 8, 12, 15, 24, 40, 120]), 0i64..120)
            .prop_filter_map("coprime", |(n, a)| CycloRestriction::new(a, n).ok())
    }

    proptest! {
        #[test]
        fn fiber_matches_brute_force(f2 in field_strategy(), f3 in field_strategy(), r in restriction_strategy()) {
            let fields = BTreeMap::from([(2, mq(&f2)), (3, mq(&f3))]);
            let mut fast = enumerate_fiber(&fields, &r).unwrap();
            fast.sort();
            prop_assert_eq!(fast, brute_fiber(&fields, &r));
        }

        #[test]
        fn fiber_size_is_power_of_two(f2 in field_strategy(), f3 in field_strategy(), r in restriction_strategy()) {
            let fields = BTreeMap::from([(2, mq(&f2)), (3, mq(&f3))]);
            let combined = fields[&2].join(&fields[&3]).unwrap();
            let n = r.n();
            let s = combined.span().iter().filter(|m| contained_in_cyclotomic(m, n)).count();
            let fiber = enumerate_fiber(&fields, &r).unwrap();
            prop_assert_eq!(fiber.len() * s, combined.degree() as usize);
        }

        #[test]
        fn gamma_matches_fiber(f in field_strategy(), r in restriction_strategy()) {
            let field = mq(&f);
            let fiber = enumerate_fiber(&BTreeMap::from([(7, field.clone())]), &r).unwrap();
            let all_plus = fiber.iter().any(|v| v.values().all(|&s| s == 1));
            prop_assert_eq!(gamma_an(&field, &r).unwrap() == 1, all_plus);
        }

        #[test]
        fn trivial_restriction(f2 in field_strategy(), f3 in field_strategy()) {
            let r = cr(0, 1);
            let (a, b) = (mq(&f2), mq(&f3));
            prop_assert_eq!(gamma_an(&a, &r).unwrap(), 1);
            let fields = BTreeMap::from([(2, a.clone()), (3, b.clone())]);
            if !a.is_rational() && !b.is_rational() {
                prop_assert!(!s_prime_empty(&fields, &r).unwrap());
            }
        }

        #[test]
        fn compositum_identity(f in field_strategy(), n in 1u64..200) {
            let field = mq(&f);
            let nb = BigInt::from(n);
            let s = field.span().iter().filter(|m| contained_in_cyclotomic(m, &nb)).count() as u64;
            prop_assert_eq!(compositum_degree(&field, n).unwrap() * s, field.degree() * euler_phi(n));
        }
    }

    #[test]
    fn serde_round_trip() {
        let f = mq(&[-6, -3]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"["-6","-3"]"#);
        assert_eq!(serde_json::from_str::<MultiQuadField>(&json).unwrap(), f);
    }
}
