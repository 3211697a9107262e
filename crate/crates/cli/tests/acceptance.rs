//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::{BTreeMap, HashSet};
use std::process::{Command, ExitCode};

use acyc_core::constant::{almost_euler, gl2_order, truncated_sum, vanishes, GaloisData};
use acyc_core::ec_reduction::WeierstrassModel;
use acyc_core::exact_arith::int;
use acyc_core::family::{
    acyclicity_params, division_fields, specialize, verify_cover_identity, witness_from_u0, FamilyPoint,
};
use acyc_core::gl2::{
    acyclicity_check, all_invertible, closure, example_quotient_data, full_gl2, genus, g6_tilde, relative_levels,
    search_witness_data, standard_groups, Mat2, LEVEL_CANDIDATES,
};
use acyc_core::harness::{
    cross_check_lemma, cross_check_with, cyclic_fraction, pi_count, survey, verify_noncyclic, verify_witness,
    SweepConfig,
};
use acyc_core::multiquadratic::{s_prime_empty, CycloRestriction, MultiQuadField};
use acyc_core::Result;
use num_bigint::BigInt;

const EXAMPLE: &str = "1,0,1,32271697,-1200056843302";

type Check = Result<Vec<(String, bool)>>;

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn example() -> WeierstrassModel {
    EXAMPLE.parse().unwrap()
}

fn example_reproduction() -> Check {
    let e = example();
    let pi3 = pi_count(&e, &big(3), &big(8), 100_000)?;
    let pi5 = pi_count(&e, &big(5), &big(8), 100_000)?;
    let sweep = verify_noncyclic(&e, 100_000, |p| p % 8 == 3)?;
    Ok(vec![
        (format!("pi(3 mod 8, 1e5) = {pi3}"), pi3 == 0),
        (format!("pi(5 mod 8, 1e5) = {pi5}"), pi5 == 0),
        (format!("full 2- or 3-torsion at {} primes = 3 mod 8", sweep.checked), sweep.failures.is_empty() && sweep.checked > 0),
    ])
}

fn specialization_pipeline() -> Check {
    let point = FamilyPoint::example();
    let model = specialize(&point)?;
    let (f2, f3, _) = division_fields(&point)?;
    let cert = acyclicity_params(&point)?;
    let fields = BTreeMap::from([(2, f2.clone()), (3, f3.clone())]);
    let empty = s_prime_empty(&fields, &CycloRestriction::new(3, 8)?)? && s_prime_empty(&fields, &CycloRestriction::new(5, 8)?)?;
    let data = GaloisData::from_division_fields(&f2, &f3)?;
    let c = almost_euler(&data, &big(3), &big(8), 1000)?;
    Ok(vec![
        ("j matches the example model".into(), model.j_invariant() == example().j_invariant()),
        (
            format!("division fields {f2}, {f3}"),
            f2 == MultiQuadField::from_labels(&[-6])? && f3 == MultiQuadField::from_labels(&[-3])?,
        ),
        (format!("n0 = {}", cert.n0), cert.n0 == big(8)),
        (format!("a0 list {:?}", cert.a0_list.iter().map(ToString::to_string).collect::<Vec<_>>()), cert.a0_list == vec![big(3), big(5)]),
        ("S'(6) empty for a = 3, 5 mod 8".into(), empty),
        (format!("leading rational {}", c.leading_rational), c.vanishes && c.leading_rational == int(0)),
    ])
}

// Independent oracle for x^3 + x + 1: full 2-torsion iff the cubic has three roots mod p.
fn three_roots(p: u64) -> bool {
    (0..p).filter(|&x| (x * x % p * x + x + 1) % p == 0).count() == 3
}

fn lemma_equivalence() -> Check {
    let mut out = Vec::new();
    let (f2, f3, _) = division_fields(&FamilyPoint::example())?;
    let r = cross_check_lemma(&example(), &BTreeMap::from([(2, f2), (3, f3)]), 2000)?;
    out.push((format!("example: {} checks, {} mismatches", r.checked, r.failures.len()), r.passed() && r.checked > 0));
    for u0 in [0, 1] {
        let cert = witness_from_u0(&int(u0))?;
        let fields = BTreeMap::from([(2, cert.field2.clone()), (3, cert.field3.clone())]);
        let r = cross_check_lemma(&cert.model, &fields, 2000)?;
        out.push((format!("witness u0={u0}: {} checks, {} mismatches", r.checked, r.failures.len()), r.passed() && r.checked > 0));
    }
    let r = cross_check_with(&"0,0,0,1,1".parse()?, [2], 2000, |_, p| Ok(Some(three_roots(p))))?;
    out.push((format!("x^3+x+1: {} checks, {} mismatches", r.checked, r.failures.len()), r.passed() && r.checked > 0));
    let r = cross_check_lemma(&"0,0,0,-1,0".parse()?, &BTreeMap::from([(2, MultiQuadField::rational())]), 2000)?;
    out.push((format!("x^3-x: {} checks, {} mismatches", r.checked, r.failures.len()), r.passed() && r.checked > 0));
    Ok(out)
}

fn witness_generator() -> Check {
    let mut out = Vec::new();
    let mut js = HashSet::new();
    for u0 in [0, 1, -1, 2, -2] {
        let cert = witness_from_u0(&int(u0))?;
        js.insert(cert.model.j_invariant());
        let r = verify_witness(&cert, 10_000)?;
        out.push((
            format!("u0={u0}: n0={} checks={} pi={} over {} primes", cert.n0, cert.checks.all(), r.pi, r.checked),
            cert.checks.all() && r.passed() && r.pi <= r.pi_paper_bound,
        ));
    }
    out.push((format!("{} distinct j-invariants", js.len()), js.len() == 5));
    Ok(out)
}

fn constants() -> Check {
    let mut out = Vec::new();
    for l in [2u32, 3, 5] {
        let brute = all_invertible(l).len() as u64;
        out.push((format!("|GL2(F_{l})| = {brute}"), gl2_order(u64::from(l)) == brute));
    }
    let full = GaloisData::full_image();
    let one = big(1);
    let t = truncated_sum(&full, &one, &one, 1000)?.to_f64();
    let c3 = almost_euler(&full, &one, &one, 1000)?.value.to_f64();
    let c4 = almost_euler(&full, &one, &one, 10_000)?.value.to_f64();
    out.push((format!("truncated {t:.8} vs product {c3:.8}"), (t - c3).abs() < 1e-4));
    out.push((format!("cutoff 1e3 vs 1e4 differ by {:.2e}", (c3 - c4).abs()), (c3 - c4).abs() < 1e-6));
    let s = survey(&"0,0,0,1,1".parse()?, &SweepConfig::new(100_000))?;
    let frac = cyclic_fraction(&s.records);
    out.push((format!("x^3+x+1 cyclic fraction {frac:.5} vs {c3:.5}"), (frac - c3).abs() < 0.02));
    Ok(out)
}

fn group_theory() -> Check {
    let gl = closure(&[Mat2::new(6, [1, 1, 0, 1]), Mat2::new(6, [1, 0, 1, 1]), Mat2::new(6, [5, 0, 0, 1])], 6)?;
    let orders = [standard_groups(2)?.order(), standard_groups(3)?.order(), standard_groups(6)?.order()];
    let g6 = standard_groups(6)?;
    let gt = genus(&g6_tilde()?)?;
    let levels = relative_levels(&g6);
    let (data, tau) = example_quotient_data()?;
    let report = acyclicity_check(&data, &tau)?;
    let none = search_witness_data(&full_gl2(6)?)?;
    Ok(vec![
        (format!("|GL2(Z/6)| = {} by closure", gl.order()), gl.order() == 288),
        (format!("|B(2)|, |Cs(3)|, |G(6)| = {orders:?}"), orders == [2, 4, 8]),
        (format!("genus of G6~ = {gt}"), gt == 0),
        (format!("levels of G(6) = {levels:?}"), levels == (6, 6)),
        ("acyclicity items on the example data".into(), report.all()),
        (format!("{} witness data on GL2(Z/6)", none.len()), none.is_empty()),
        ("level candidates".into(), LEVEL_CANDIDATES == [6, 10, 14, 15, 21, 22, 26, 30, 33, 39, 42]),
    ])
}

fn cover_identities() -> Check {
    Ok(vec![("cover identity at 25 samples".into(), verify_cover_identity(25))])
}

fn negative_controls() -> Check {
    let v = vanishes(&GaloisData::example(), &big(1), &big(8))?;
    let wrong = BTreeMap::from([(2, MultiQuadField::from_labels(&[5])?), (3, MultiQuadField::from_labels(&[-3])?)]);
    let r = cross_check_lemma(&example(), &wrong, 2000)?;
    let status = Command::new(env!("CARGO_BIN_EXE_acyc"))
        .args(["count", "--model", EXAMPLE, "--a", "2", "--n", "8", "--x", "1000"])
        .output()
        .expect("binary runs")
        .status
        .code();
    Ok(vec![
        ("example constant at 1 mod 8 does not vanish".into(), !v),
        (format!("corrupted field gives {} mismatches", r.failures.len()), !r.failures.is_empty()),
        (format!("gcd(a, n) > 1 exits with {status:?}"), status == Some(2)),
    ])
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("example reproduction", example_reproduction),
        ("specialization pipeline", specialization_pipeline),
        ("splitting oracle equivalence", lemma_equivalence),
        ("witness generator", witness_generator),
        ("constants", constants),
        ("group theory", group_theory),
        ("cover identities", cover_identities),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(items) => {
                let ok = items.iter().all(|(_, b)| *b);
                let detail = items
                    .iter()
                    .map(|(d, b)| if *b { d.clone() } else { format!("[x] {d}") })
                    .collect::<Vec<_>>()
                    .join("; ");
                (ok, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} criterion {}: {name} ({detail})", if ok { "PASS" } else { "FAIL" }, i + 1);
        failed += usize::from(!ok);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
