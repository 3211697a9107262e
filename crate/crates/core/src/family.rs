//! The two-parameter family `𝔼_{t,d} : y² = x³ + d²a4(t)·x + d³a6(t)`, whose mod-2 image
//! has order at most 2 and mod-3 image order at most 4, together with its acyclicity
//! witnesses.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::{Serialize, Serializer};

use crate::ec_reduction::WeierstrassModel;
use crate::error::{Error, Result};
use crate::exact_arith::{int, kronecker, rat, valuation, BigRat, FactoredRat, Poly, RatFunc, SquareClass};
use crate::multiquadratic::{s_prime_empty, CycloRestriction, MultiQuadField};

/// Named integer polynomials in `t`, lowest degree first.
const T: &[i64] = &[0, 1];
const T_MINUS_1: &[i64] = &[-1, 1];
const TWO_T_PLUS_1: &[i64] = &[1, 2];
const T2_T_1: &[i64] = &[1, 1, 1];
const Q_4T2: &[i64] = &[1, -2, 4];
const C1: &[i64] = &[-1, 0, 0, 4];
const C2: &[i64] = &[-1, 6, 0, 4];
const F: &[i64] = &[1, 6, 36, -8, -24, 0, 16];
const G: &[i64] = &[1, -8, 64, 16, -56, -128, 64, 64, 64];
const Q0: &[i64] = &[-1, 2, 2];
const Q1: &[i64] = &[1, 2, 6, -4, 4];
const Q2: &[i64] = &[-1, -8, 0, -8, 8];

/// Factors whose vanishing makes the point degenerate, with their printed names.
const POLES: [(&str, &[i64]); 4] =
    [("2t^2+2t-1", Q0), ("4t^4-4t^3+6t^2+2t+1", Q1), ("8t^4-8t^3-8t-1", Q2), ("g(t)", G)];
const ZEROS: [(&str, &[i64]); 8] = [
    ("t", T),
    ("t-1", T_MINUS_1),
    ("2t+1", TWO_T_PLUS_1),
    ("t^2+t+1", T2_T_1),
    ("4t^2-2t+1", Q_4T2),
    ("4t^3-1", C1),
    ("4t^3+6t-1", C2),
    ("f(t)", F),
];

fn eval(coeffs: &[i64], t: &BigRat) -> BigRat {
    coeffs.iter().rev().fold(BigRat::zero(), |acc, &c| acc * t + int(c))
}

fn poly(coeffs: &[i64]) -> Poly {
    Poly::from_ints(coeffs)
}

fn product(factors: &[(&[i64], u32)]) -> Poly {
    factors.iter().fold(Poly::one(), |acc, &(c, e)| &acc * &poly(c).pow(e))
}

/// The family's rational functions in `t`, with `d = 1`.
pub struct FamilyFunctions {
    pub f: Poly,
    pub g: Poly,
    pub a4: RatFunc,
    pub a6: RatFunc,
    pub j: RatFunc,
    pub delta: RatFunc,
    pub h2: RatFunc,
    pub h3: RatFunc,
}

pub fn functions() -> &'static FamilyFunctions {
    static CELL: OnceLock<FamilyFunctions> = OnceLock::new();
    CELL.get_or_init(|| {
        let n = product(&[(C1, 3), (C2, 3), (F, 3)]);
        let dn = product(&[(Q0, 2), (Q1, 2), (Q2, 2), (G, 2)]);
        let a4 = RatFunc::new(n.scale(&int(-108)), dn.clone()).expect("nonzero denominator");
        let a6 = RatFunc::new(n.scale(&int(-432)), dn).expect("nonzero denominator");
        let j = RatFunc::new(
            product(&[(C1, 3), (C2, 3), (F, 3)]),
            product(&[(T, 3), (T_MINUS_1, 3), (TWO_T_PLUS_1, 6), (T2_T_1, 3), (Q_4T2, 6)]),
        )
        .expect("nonzero denominator");
        let delta_num = product(&[
            (T, 3),
            (T_MINUS_1, 3),
            (TWO_T_PLUS_1, 6),
            (T2_T_1, 3),
            (Q_4T2, 6),
            (C1, 6),
            (C2, 6),
            (F, 6),
        ])
        .scale(&int(BigInt::from(2).pow(18) * BigInt::from(3).pow(12)));
        let delta = RatFunc::new(delta_num, product(&[(Q0, 6), (Q1, 6), (Q2, 6), (G, 6)])).expect("nonzero");
        let h2 = RatFunc::from_poly(product(&[(T, 1), (T_MINUS_1, 1), (T2_T_1, 1)]));
        let h3 = RatFunc::new(
            product(&[(C1, 1), (C2, 1), (Q0, 1), (F, 1), (G, 1)]).scale(&int(6)),
            product(&[(Q1, 1), (Q2, 1)]),
        )
        .expect("nonzero");
        FamilyFunctions { f: poly(F), g: poly(G), a4, a6, j, delta, h2, h3 }
    })
}

/// A specialization `(t0, d0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyPoint {
    t0: BigRat,
    d0: BigRat,
}

impl FamilyPoint {
    pub fn new(t0: BigRat, d0: BigRat) -> Result<Self> {
        if d0.is_zero() {
            return Err(Error::Degenerate("d0 = 0".into()));
        }
        for (name, c) in POLES.iter().chain(ZEROS.iter()) {
            if eval(c, &t0).is_zero() {
                return Err(Error::Degenerate(format!("{name} vanishes at t0 = {t0}")));
            }
        }
        Ok(FamilyPoint { t0, d0 })
    }

    pub fn t0(&self) -> &BigRat {
        &self.t0
    }

    pub fn d0(&self) -> &BigRat {
        &self.d0
    }

    /// The specialization giving the reference curve `(3/5, −28910265879522405941333082)`.
    pub fn example() -> Self {
        let d0: BigInt = "-28910265879522405941333082".parse().unwrap();
        FamilyPoint::new(rat(3, 5), int(d0)).unwrap()
    }

    fn values_at(&self, c: &[i64]) -> BigRat {
        eval(c, &self.t0)
    }

    /// `a4(t0)` in factored form, one polynomial value at a time.
    fn a4_factored(&self) -> Result<FactoredRat> {
        let v = |c| self.values_at(c);
        FactoredRat::from_powers(&[
            (int(-108), 1),
            (v(C1), 3),
            (v(C2), 3),
            (v(F), 3),
            (v(Q0), -2),
            (v(Q1), -2),
            (v(Q2), -2),
            (v(G), -2),
        ])
    }

    fn h3_factored(&self) -> Result<FactoredRat> {
        let v = |c| self.values_at(c);
        FactoredRat::from_powers(&[(int(6), 1), (v(C1), 1), (v(C2), 1), (v(Q0), 1), (v(F), 1), (v(G), 1), (v(Q1), -1), (v(Q2), -1)])
    }

    fn h2_factored(&self) -> Result<FactoredRat> {
        let v = |c| self.values_at(c);
        FactoredRat::from_powers(&[(v(T), 1), (v(T_MINUS_1), 1), (v(T2_T_1), 1)])
    }
}

impl Serialize for FamilyPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BTreeMap::from([("d0", self.d0.to_string()), ("t0", self.t0.to_string())]).serialize(s)
    }
}

/// The specialized values; `a4`, `a6`, `delta` include the twist by `d0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyValues {
    pub f: BigRat,
    pub g: BigRat,
    pub a4: BigRat,
    pub a6: BigRat,
    pub j: BigRat,
    pub delta: BigRat,
    pub h2: BigRat,
    pub h3: BigRat,
}

impl Serialize for FamilyValues {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BTreeMap::from([
            ("a4", self.a4.to_string()),
            ("a6", self.a6.to_string()),
            ("delta", self.delta.to_string()),
            ("f", self.f.to_string()),
            ("g", self.g.to_string()),
            ("h2", self.h2.to_string()),
            ("h3", self.h3.to_string()),
            ("j", self.j.to_string()),
        ])
        .serialize(s)
    }
}

pub fn eval_family(p: &FamilyPoint) -> Result<FamilyValues> {
    let fx = functions();
    let t = &p.t0;
    let d = &p.d0;
    let at = |r: &RatFunc, name: &str| r.eval(t).ok_or_else(|| Error::Degenerate(format!("pole of {name} at {t}")));
    let d2 = d * d;
    let d3 = &d2 * d;
    Ok(FamilyValues {
        f: fx.f.eval(t),
        g: fx.g.eval(t),
        a4: at(&fx.a4, "a4")? * &d2,
        a6: at(&fx.a6, "a6")? * &d3,
        j: at(&fx.j, "j")?,
        delta: at(&fx.delta, "Δ")? * (&d3 * &d3),
        h2: at(&fx.h2, "h2")?,
        h3: at(&fx.h3, "h3")?,
    })
}

/// Integral short model `y² = x³ + u⁴A·x + u⁶B` with the least such `u`.
pub fn specialize(p: &FamilyPoint) -> Result<WeierstrassModel> {
    let a4 = p.a4_factored()?.mul(&FactoredRat::of(&p.d0)?.pow(2));
    let a6 = a4.mul(&FactoredRat::of(&(int(4) * &p.d0))?);
    let mut u = FactoredRat::one();
    for q in a4.exponents.keys().chain(a6.exponents.keys()) {
        let need4 = Integer::div_ceil(&(-a4.valuation(q)).max(0), &4);
        let need6 = Integer::div_ceil(&(-a6.valuation(q)).max(0), &6);
        let e = need4.max(need6);
        if e > 0 && u.valuation(q) == 0 {
            u.exponents.insert(q.clone(), e);
        }
    }
    let a = a4.mul(&u.pow(4)).to_rational();
    let b = a6.mul(&u.pow(6)).to_rational();
    debug_assert!(a.is_integer() && b.is_integer());
    WeierstrassModel::short(a.to_integer(), b.to_integer())
        .map_err(|_| Error::Degenerate(format!("singular specialization at t0 = {}", p.t0)))
}

/// `(Q(E[2]), Q(E[3]), n3)`.
pub fn division_fields(p: &FamilyPoint) -> Result<(MultiQuadField, MultiQuadField, SquareClass)> {
    let h2 = SquareClass::from_label_unchecked(p.h2_factored()?.squarefree_label());
    let m = SquareClass::from_label_unchecked(p.h3_factored()?.mul(&FactoredRat::of(&p.d0)?).squarefree_label());
    let minus3 = SquareClass::from_label_unchecked(BigInt::from(-3));
    let field2 = MultiQuadField::new([h2])?;
    let field3 = MultiQuadField::new([m.clone(), minus3.clone()])?;
    let n3 = if m.is_trivial() || !m.ramified_at(&BigInt::from(3)) { m } else { m.mul(&minus3) };
    Ok((field2, field3, n3))
}

/// Hypothesis checks of the witness theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessChecks {
    /// `Q(E[2]) ⊄ Q(E[3])`.
    pub condition_b: bool,
    /// 3 ramifies in `Q(√h2)`.
    pub ramified3_at2: bool,
    /// 5 is unramified in `Q(√−3h2, √−3n3h2)`.
    pub unramified5: bool,
}

impl WitnessChecks {
    pub fn all(&self) -> bool {
        self.condition_b && self.ramified3_at2 && self.unramified5
    }
}

/// Largest `n0` for which `a0_list` is enumerated exhaustively.
pub const EXHAUSTIVE_A0_LIMIT: u64 = 1_000_000;
/// Number of representatives kept when `n0` is beyond the exhaustive limit.
pub const A0_REPRESENTATIVES: usize = 16;

#[derive(Clone, Debug)]
pub struct WitnessCertificate {
    pub point: FamilyPoint,
    pub model: WeierstrassModel,
    pub field2: MultiQuadField,
    pub field3: MultiQuadField,
    pub n3: SquareClass,
    pub n0: BigInt,
    pub a0_list: Vec<BigInt>,
    /// Whether `a0_list` is every admissible residue mod `n0`.
    pub a0_complete: bool,
    pub checks: WitnessChecks,
}

impl WitnessCertificate {
    fn h2_class(&self) -> &SquareClass {
        &self.field2.basis()[0]
    }

    /// The discriminants of `Q(√−3h2)` and `Q(√−3n3h2)`.
    pub fn discriminants(&self) -> (BigInt, BigInt) {
        let minus3 = SquareClass::from_label_unchecked(BigInt::from(-3));
        let c1 = minus3.mul(self.h2_class());
        let c2 = c1.mul(&self.n3);
        (c1.fundamental_discriminant().expect("nontrivial"), c2.fundamental_discriminant().expect("nontrivial"))
    }

    /// Whether `a` is coprime to `n0` and `σ_a` negates both `√−3h2` and `√−3n3h2`.
    pub fn admits(&self, a: &BigInt) -> bool {
        let (d1, d2) = self.discriminants();
        a.gcd(&self.n0).is_one() && kronecker(&d1, a) == -1 && kronecker(&d2, a) == -1
    }

    /// `S'(6) = ∅` for `σ_{a0}` on `Q(ζ_{n0})`, for every listed `a0`.
    pub fn field_level_vanishing(&self) -> Result<bool> {
        let fields = BTreeMap::from([(2, self.field2.clone()), (3, self.field3.clone())]);
        for a0 in &self.a0_list {
            if !s_prime_empty(&fields, &CycloRestriction::new(a0.clone(), self.n0.clone())?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl Serialize for WitnessCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let c = self.model.coefficients();
        let mut map = s.serialize_map(Some(11))?;
        map.serialize_entry("a0_complete", &self.a0_complete)?;
        map.serialize_entry("a0_list", &self.a0_list.iter().map(|a| a.to_string()).collect::<Vec<_>>())?;
        map.serialize_entry("checks", &self.checks)?;
        map.serialize_entry("d0", &self.point.d0.to_string())?;
        map.serialize_entry("field2", &self.field2)?;
        map.serialize_entry("field3", &self.field3)?;
        map.serialize_entry("model", &[c[3].to_string(), c[4].to_string()])?;
        map.serialize_entry("n0", &self.n0.to_string())?;
        map.serialize_entry("n3", &self.n3)?;
        map.serialize_entry("t0", &self.point.t0.to_string())?;
        map.end()
    }
}

/// Builds `(n0, a0)` and the hypothesis checks for a specialization.
pub fn acyclicity_params(p: &FamilyPoint) -> Result<WitnessCertificate> {
    let (field2, field3, n3) = division_fields(p)?;
    let h2 = field2.basis().first().cloned().unwrap_or_else(SquareClass::trivial);
    if field3.contains(&h2) {
        return Err(Error::Precondition(format!("Q(√{h2}) ⊆ {field3}: not a witness")));
    }
    let minus3 = SquareClass::from_label_unchecked(BigInt::from(-3));
    let c1 = minus3.mul(&h2);
    let c2 = c1.mul(&n3);
    let d1 = c1.fundamental_discriminant()?;
    let d2 = c2.fundamental_discriminant()?;
    let n0 = d1.abs().lcm(&d2.abs());

    let checks = WitnessChecks {
        condition_b: true,
        ramified3_at2: h2.ramified_at(&BigInt::from(3)),
        unramified5: !n0.is_multiple_of(&BigInt::from(5)),
    };
    let model = specialize(p)?;
    let mut cert = WitnessCertificate {
        point: p.clone(),
        model,
        field2,
        field3,
        n3,
        n0: n0.clone(),
        a0_list: Vec::new(),
        a0_complete: false,
        checks,
    };

    let exhaustive = n0.to_u64().filter(|&n| n <= EXHAUSTIVE_A0_LIMIT);
    let mut a = BigInt::one();
    while exhaustive.is_some() || cert.a0_list.len() < A0_REPRESENTATIVES {
        if a > n0 {
            break;
        }
        if cert.admits(&a) {
            cert.a0_list.push(a.clone());
        }
        a += 1;
    }
    cert.a0_complete = exhaustive.is_some();
    if cert.a0_list.is_empty() {
        return Err(Error::Internal(format!("no admissible a0 modulo {n0}")));
    }
    Ok(cert)
}

/// The witness built from `t0 = 21(15u0 − 1)` with `d0` clearing `h3(t0)` at 3, 5 and 7.
pub fn witness_from_u0(u0: &BigRat) -> Result<WitnessCertificate> {
    witness_from_u0_with_point(u0).and_then(|p| acyclicity_params(&p))
}

/// The specialization used by [`witness_from_u0`].
pub fn witness_from_u0_with_point(u0: &BigRat) -> Result<FamilyPoint> {
    for q in [3u64, 5, 7] {
        if !u0.is_zero() && valuation(u0, q)? < 0 {
            return Err(Error::Precondition(format!("u0 = {u0} is not {q}-integral")));
        }
    }
    let t0 = int(21) * (int(15) * u0 - int(1));
    let h3 = FamilyPoint::new(t0.clone(), int(1))?.h3_factored()?;
    let mut d0 = int(1);
    for q in [3i64, 5, 7] {
        let v = h3.valuation(&BigInt::from(q));
        d0 *= num_traits::pow(int(q), v.unsigned_abs() as usize).pow(if v > 0 { -1 } else { 1 });
    }
    FamilyPoint::new(t0, d0)
}

/// Checks `256(u+1)³/u = j_𝔼(t)` and the level-3 cover identity at `samples` random
/// rational points, skipping poles.
pub fn verify_cover_identity(samples: usize) -> bool {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut done = 0;
    let mut attempts = 0;
    while done < samples {
        attempts += 1;
        if attempts > 100 * samples + 100 {
            return false;
        }
        let t = rat(rng.gen_range(-200..=200), rng.gen_range(1..=60));
        match cover_identity_at(&t) {
            Some(true) => done += 1,
            Some(false) => return false,
            None => continue,
        }
    }
    true
}

/// `None` at a pole of either cover or of `j_𝔼`.
pub fn cover_identity_at(t: &BigRat) -> Option<bool> {
    let j = functions().j.eval(t)?;
    let (u, v) = cover_parameters(t)?;
    if u.is_zero() || v.is_zero() {
        return None;
    }
    let one = BigRat::one();
    let three = int(3);
    let level2 = int(256) * (&u + &one).pow(3) / &u;
    let v2 = &v * &v;
    let den3 = v.pow(3) * (&v2 + &three * &v + &three).pow(3);
    if den3.is_zero() {
        return None;
    }
    let level3 = int(27) * (&v + &one).pow(3) * (&v + &three).pow(3) * (&v2 + &three).pow(3) / den3;
    Some(level2 == j && level3 == j)
}

/// `(u(t), v(t))`.
pub fn cover_parameters(t: &BigRat) -> Option<(BigRat, BigRat)> {
    if t.is_zero() {
        return None;
    }
    let v = (int(4) * t.pow(3) - int(3) * t - int(1)) / (int(3) * t);
    let den = eval(TWO_T_PLUS_1, t).pow(3) * eval(Q_4T2, t).pow(3);
    if den.is_zero() {
        return None;
    }
    let u = int(256) * t.pow(3) * eval(T_MINUS_1, t).pow(3) * eval(T2_T_1, t).pow(3) / den;
    Some((u, v))
}
