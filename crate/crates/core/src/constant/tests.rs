use super::*;
use crate::gl2::{all_invertible, full_gl2};
use crate::multiquadratic::gamma_an;
use proptest::prelude::*;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn q(n: i64, d: i64) -> BigRat {
    BigRat::new(n.into(), d.into())
}

fn level(degree: u64, labels: &[i64], c: u64) -> LevelData {
    LevelData::new(degree, MultiQuadField::from_labels(labels).unwrap(), c)
}

#[test]
fn gl2_order_matches_matrix_count() {
    for l in [2u64, 3, 5, 7] {
        assert_eq!(gl2_order(l), all_invertible(l as u32).len() as u64, "l = {l}");
    }
    assert_eq!((gl2_order(2), gl2_order(3), gl2_order(5)), (6, 48, 480));
}

#[test]
fn decimal_rendering() {
    assert_eq!(Decimal::from_rational(&q(5, 6)).to_string(), format!("0.{}3", "8".to_owned() + &"3".repeat(48)));
    assert_eq!(Decimal::from_rational(&q(-1, 4)).to_string(), format!("-0.25{}", "0".repeat(48)));
    assert_eq!(Decimal::from_rational(&q(7, 1)).to_string(), format!("7.{}", "0".repeat(50)));
    assert!(Decimal::from_rational(&BigRat::zero()).is_zero());
    assert!((Decimal::from_rational(&q(1, 3)).to_f64() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn truncated_sum_small_cutoffs() {
    let full = GaloisData::full_image();
    let (a, n) = (big(1), big(1));
    assert_eq!(truncated_sum_exact(&full, &a, &n, 1).unwrap(), q(1, 1));
    assert_eq!(truncated_sum_exact(&full, &a, &n, 2).unwrap(), q(5, 6));
    // 1 − 1/6 − 1/48 − 1/480 + 1/288
    assert_eq!(truncated_sum_exact(&full, &a, &n, 6).unwrap(), q(1, 1) - q(1, 6) - q(1, 48) - q(1, 480) + q(1, 288));
    assert!(matches!(truncated_sum_exact(&full, &a, &n, 0), Err(Error::Domain(_))));
}

#[test]
fn example_level_sums_vanish_but_partial_sums_do_not() {
    let data = GaloisData::example();
    let (a, n) = (big(3), big(8));
    for m in [6u64, 30, 42, 210, 6 * 11 * 13] {
        assert!(level_sum(&data, &a, &n, m).unwrap().is_zero(), "m = {m}");
    }
    // The literal partial sum picks up the d = 5 term, −1/(480·φ(8)).
    assert_eq!(truncated_sum_exact(&data, &a, &n, 6).unwrap(), q(-1, 1920));
    assert!(!level_sum(&data, &big(1), &n, 6).unwrap().is_zero());
}

#[test]
fn example_vanishing() {
    let data = GaloisData::example();
    let n = big(8);
    let r = almost_euler(&data, &big(3), &n, 1000).unwrap();
    assert!(r.vanishes && r.leading_rational.is_zero() && r.value.is_zero());
    assert!(vanishes(&data, &big(3), &n).unwrap());
    assert!(vanishes(&data, &big(5), &n).unwrap());
    assert!(!vanishes(&data, &big(1), &n).unwrap());
    assert!(!vanishes(&data, &big(7), &n).unwrap());
    let r1 = almost_euler(&data, &big(1), &n, 1000).unwrap();
    assert!(!r1.vanishes && r1.value.to_f64() > 0.0);
    assert!(matches!(vanishes(&data, &big(2), &n), Err(Error::Domain(_))));
}

#[test]
fn example_is_not_a_single_prime_obstruction() {
    let data = GaloisData::example();
    assert!(vanishes(&data, &big(3), &big(8)).unwrap());
    assert_eq!(single_prime_obstruction(&data, &big(3), &big(8)).unwrap(), None);

    // Q(E[2]) = Q(i) inside Q(ζ_4), σ_1 trivial on it: the classical obstruction.
    let levels = BTreeMap::from([(2, level(2, &[-1], 4))]);
    let classical = GaloisData::new(2, levels, true).unwrap();
    assert_eq!(single_prime_obstruction(&classical, &big(1), &big(4)).unwrap(), Some(2));
    assert!(vanishes(&classical, &big(1), &big(4)).unwrap());
    assert!(!vanishes(&classical, &big(3), &big(4)).unwrap());
}

#[test]
fn full_image_constant_and_agreement() {
    let full = GaloisData::full_image();
    let (a, n) = (big(1), big(1));
    let e3 = almost_euler(&full, &a, &n, 1_000).unwrap();
    let e4 = almost_euler(&full, &a, &n, 10_000).unwrap();
    assert!(!e3.vanishes && e3.leading_rational.is_one());
    let v3 = e3.value.to_f64();
    assert!((v3 - 0.8137).abs() < 5e-4, "{v3}");
    assert!((v3 - e4.value.to_f64()).abs() < 1e-6);
    let t = truncated_sum(&full, &a, &n, 1_000).unwrap().to_f64();
    assert!((t - v3).abs() < 1e-4, "{t} vs {v3}");
}

#[test]
fn progression_constant_matches_truncated_sum() {
    // For n = 8 the Euler factor at 2 is replaced by the progression-dependent term.
    let full = GaloisData::full_image();
    for a in [1, 3, 5, 7] {
        let e = almost_euler(&full, &big(a), &big(8), 1_000).unwrap().value.to_f64();
        let t = truncated_sum(&full, &big(a), &big(8), 1_000).unwrap().to_f64();
        assert!((e - t).abs() < 1e-4, "a = {a}: {e} vs {t}");
    }
    let e1 = almost_euler(&full, &big(1), &big(3), 1_000).unwrap().value.to_f64();
    let e2 = almost_euler(&full, &big(2), &big(3), 1_000).unwrap().value.to_f64();
    assert!(e1 < e2);
}

#[test]
fn inclusion_exclusion_matches_gl2_6_enumeration() {
    let levels = BTreeMap::from([(2, level(6, &[], 2)), (3, level(48, &[], 3)), (6, level(288, &[], 6))]);
    let data = GaloisData::new(6, levels, true).unwrap();
    let g = full_gl2(6).unwrap();
    let s_prime = g.elements().filter(|x| !x.reduce(2).is_identity() && !x.reduce(3).is_identity()).count();
    let expected = BigRat::new(s_prime.into(), g.order().into());
    assert_eq!(expected, q(235, 288));
    assert_eq!(leading_factor(&data, &big(1), &big(1)).unwrap(), expected);
    assert!(!vanishes(&data, &big(1), &big(1)).unwrap());
}

#[test]
fn missing_levels_and_preconditions() {
    let partial = GaloisData::new(6, BTreeMap::from([(2, level(2, &[-6], 2))]), true).unwrap();
    assert!(matches!(truncated_sum_exact(&partial, &big(1), &big(1), 10), Err(Error::Domain(_))));
    let closed = GaloisData::new(1, BTreeMap::new(), false).unwrap();
    assert!(matches!(truncated_sum_exact(&closed, &big(1), &big(1), 2), Err(Error::Domain(_))));
    assert!(matches!(almost_euler(&closed, &big(1), &big(1), 100), Err(Error::Precondition(_))));
    assert!(matches!(almost_euler(&GaloisData::example(), &big(3), &big(8), 2), Err(Error::Domain(_))));
    let cm = GaloisData::full_image().with_cm(true);
    assert!(matches!(almost_euler(&cm, &big(1), &big(1), 100), Err(Error::Precondition(_))));
    assert!(GaloisData::new(4, BTreeMap::new(), true).is_err());
    assert!(GaloisData::new(2, BTreeMap::from([(2, level(4, &[], 2))]), true).is_err());
    assert!(GaloisData::new(3, BTreeMap::from([(3, level(2, &[-3, 2], 3))]), true).is_err());
}

#[test]
fn json_shape_and_round_trip() {
    let data = GaloisData::example();
    let v = serde_json::to_value(&data).unwrap();
    assert_eq!(
        v,
        serde_json::json!({
            "D": 6,
            "full_image_outside": true,
            "levels": {
                "2": {"degree": 2, "abelian": [-6], "cyclotomic": 2},
                "3": {"degree": 2, "abelian": [-3], "cyclotomic": 3},
                "6": {"degree": 4, "abelian": [-6, -3], "cyclotomic": 6},
            }
        })
    );
    let back: GaloisData = serde_json::from_value(v).unwrap();
    assert_eq!(back, data);
    let defaulted: GaloisData =
        serde_json::from_str(r#"{"D": 2, "levels": {"2": {"degree": 6}}, "full_image_outside": true}"#).unwrap();
    assert_eq!(defaulted.level(2).unwrap().cyclotomic, 2);
    assert!(serde_json::from_str::<GaloisData>(r#"{"D": 4, "full_image_outside": true}"#).is_err());
}

#[test]
fn quasi_multiplicativity() {
    let data = GaloisData::example();
    for a in [1, 3, 5, 7] {
        let report = quasi_mult_check(&data, &big(a), &big(8), &[(6, 5), (2, 7), (3, 35)]).unwrap();
        assert!(report.passed() && report.checked == 3);
    }
    assert!(matches!(quasi_mult_check(&data, &big(3), &big(8), &[(2, 3)]), Err(Error::Domain(_))));
    assert!(matches!(quasi_mult_check(&data, &big(3), &big(8), &[(5, 10)]), Err(Error::Domain(_))));

    // Q(E[2]) = Q(√5) ⊆ Q(E[5]) while D = 2 pretends level 5 is independent.
    let levels = BTreeMap::from([(2, level(2, &[5], 2)), (5, level(480, &[5], 5)), (10, level(480, &[5], 10))]);
    let entangled = GaloisData::new(2, levels, true).unwrap();
    let report = quasi_mult_check(&entangled, &big(0), &big(1), &[(2, 5)]).unwrap();
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].f_product, q(1, 480));
}

/// Direct scan for integer roots over the Cauchy bound.
fn scan_roots(p: i64, q: i64, s: i64) -> usize {
    let bound = 1 + p.abs().max(q.abs()).max(s.abs());
    (-bound..=bound).filter(|&x| ((x + p) * x + q) * x + s == 0).count()
}

#[test]
fn two_torsion_examples() {
    let m = |a: [i64; 5]| WeierstrassModel::from_i64(a).unwrap();
    assert_eq!(rational_two_torsion(&m([0, 0, 0, -1, 0])), 2);
    assert_eq!(rational_two_torsion(&m([0, 0, 0, 1, 1])), 0);
    assert_eq!(rational_two_torsion(&m([0, 0, 0, 1, 0])), 1);
    assert_eq!(rational_two_torsion(&m([0, -1, 0, 1, 0])), 1);
    // 15a1: y² + xy + y = x³ + x² − 10x − 10 has full rational 2-torsion.
    assert_eq!(rational_two_torsion(&m([1, 1, 1, -10, -10])), 2);
    // The example curve has [Q(E[2]):Q] = 2, so exactly one rational root.
    assert_eq!(rational_two_torsion(&"1,0,1,32271697,-1200056843302".parse().unwrap()), 1);
    // Large roots: (x − 10^15)(x + 10^15)(x − 3).
    let e = BigInt::from(10u64.pow(15));
    let big_model = WeierstrassModel::new(
        BigInt::zero(),
        big(-3),
        BigInt::zero(),
        -(&e * &e),
        &e * &e * 3,
    )
    .unwrap();
    assert_eq!(rational_two_torsion(&big_model), 2);
}

proptest! {
    #[test]
    fn two_torsion_matches_scan(a in proptest::array::uniform5(-6i64..=6)) {
        if let Ok(m) = WeierstrassModel::from_i64(a) {
            let b2 = m.b2().to_i64().unwrap();
            let b4 = m.b4().to_i64().unwrap();
            let b6 = m.b6().to_i64().unwrap();
            let expected = match scan_roots(b2, 8 * b4, 16 * b6) { 0 => 0, 1 => 1, _ => 2 };
            prop_assert_eq!(rational_two_torsion(&m), expected);
        }
    }

    #[test]
    fn cubic_roots_from_factors(r in proptest::array::uniform3(-1_000_000i64..1_000_000), shift in -5i64..5) {
        // (X − r0)(X − r1)(X − r2) + shift has the scanned roots only when shift = 0.
        let p = -(r[0] + r[1] + r[2]);
        let qq = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let s = -(r[0] * r[1] * r[2]) + shift;
        let found = integer_roots_of_cubic(&big(p), &big(qq), &big(s));
        for x in &found {
            let x = x.to_i64().unwrap();
            prop_assert_eq!(((x + p) * x + qq) * x + s, 0);
        }
        if shift == 0 {
            let distinct: BTreeSet<i64> = r.iter().copied().collect();
            prop_assert_eq!(found.len(), distinct.len());
        }
    }
}

const LABELS: [i64; 10] = [-1, 2, -2, 3, -3, 5, -6, 6, 7, -15];

fn synthetic_data() -> impl Strategy<Value = GaloisData> {
    let primes = proptest::sample::subsequence(vec![2u64, 3, 5], 0..=3);
    let gens = proptest::collection::vec(proptest::collection::vec(proptest::sample::select(LABELS.to_vec()), 0..=2), 3);
    (primes, gens).prop_filter_map("degree must divide |GL2|", |(primes, gens)| {
        let fields: BTreeMap<u64, MultiQuadField> = primes
            .iter()
            .zip(gens)
            .map(|(&l, g)| (l, MultiQuadField::from_labels(&g).unwrap()))
            .collect();
        let support: u64 = primes.iter().product();
        let levels = divisors(support)
            .into_iter()
            .filter(|&d| d > 1)
            .map(|d| {
                let f = prime_divisors(d)
                    .into_iter()
                    .try_fold(MultiQuadField::rational(), |acc, l| acc.join(&fields[&l]))
                    .unwrap();
                (d, LevelData::new(f.degree(), f.clone(), cyclotomic_part(&f)))
            })
            .collect();
        GaloisData::new(support, levels, true).ok()
    })
}

fn restriction() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=60).prop_flat_map(|n| (1..=n, Just(n))).prop_filter("coprime", |(a, n)| a.gcd(n) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn three_way_agreement(data in synthetic_data(), (a, n) in restriction()) {
        let (a, n) = (big(a), big(n));
        let lead = leading_factor(&data, &a, &n).unwrap();
        let incl_excl = level_sum(&data, &a, &n, data.support()).unwrap();
        prop_assert_eq!(&lead, &incl_excl);
        let v = vanishes(&data, &a, &n).unwrap();
        prop_assert_eq!(v, lead.is_zero());
        prop_assert_eq!(v, almost_euler(&data, &a, &n, 30).unwrap().vanishes);
        if single_prime_obstruction(&data, &a, &n).unwrap().is_some() {
            prop_assert!(v);
        }
    }

    #[test]
    fn level_terms_match_multiquadratic_formulas(data in synthetic_data(), (a, n) in restriction()) {
        let r = CycloRestriction::new(a, n).unwrap();
        for d in divisors(data.support()) {
            let lv = data.level(d).unwrap();
            let t = level_term(&data, &big(a), &big(n), d).unwrap();
            prop_assert_eq!(t.gamma, gamma_an(&lv.abelian, &r).unwrap() == 1);
            prop_assert_eq!(t.compositum_degree, BigInt::from(compositum_degree(&lv.abelian, n as u64).unwrap()));
        }
    }

    #[test]
    fn example_quasi_multiplicative(d2 in 1u64..400, (a, n) in restriction()) {
        prop_assume!(is_squarefree(d2) && d2.gcd(&6) == 1);
        let data = GaloisData::example();
        for d1 in [1u64, 2, 3, 6] {
            let report = quasi_mult_check(&data, &big(a), &big(n), &[(d1, d2)]).unwrap();
            prop_assert!(report.passed());
        }
    }
}

