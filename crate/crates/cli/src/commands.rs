use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use acyc_core::constant::{almost_euler, single_prime_obstruction, truncated_sum, GaloisData};
use acyc_core::ec_reduction::WeierstrassModel;
use acyc_core::exact_arith::{is_prime_u64, parse_rat, SquareClass};
use acyc_core::family::{
    acyclicity_params, eval_family, specialize, witness_from_u0, FamilyPoint, WitnessCertificate,
};
use acyc_core::gl2::{
    acyclicity_check, closure, example_image, example_quotient_data, full_gl2, g6_tilde, genus, relative_levels,
    search_witness_data, standard_groups, Gl2Subgroup, Mat2,
};
use acyc_core::harness::{
    cross_check_lemma, cyclic_fraction, pi_count, survey, verify_noncyclic, verify_witness, Status, SweepConfig,
};
use acyc_core::multiquadratic::{CycloRestriction, MultiQuadField};
use acyc_core::Error;
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::{Cli, Command, CurveArgs, FamilyCommand, GroupArgs, GroupCommand, NamedGroup, PointArgs, Preset, WitnessArgs, WitnessSource};

pub const EXAMPLE_MODEL: &str = "1,0,1,32271697,-1200056843302";
pub const CACHE_ENV: &str = "ACYC_CACHE";

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Verification(String),
    Resource(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Precondition(_) | Error::Degenerate(_) | Error::Json(_) => {
                CliError::Input(e.to_string())
            }
            Error::Resource(_) | Error::Io(_) => CliError::Resource(e.to_string()),
            Error::Internal(_) => CliError::Verification(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Verification(m) | CliError::Resource(m) => m,
        }
    }
}

pub fn report_error(e: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": e.message(), "exit_code": e.code() }));
    ExitCode::from(e.code())
}

pub struct Output {
    pub text: String,
    pub verified: bool,
}

impl Output {
    fn json(v: Value, verified: bool) -> Self {
        // serde_json maps keep keys sorted, so equal values render identically.
        Output { text: serde_json::to_string_pretty(&v).expect("JSON values serialize"), verified }
    }
}

type Res<T> = std::result::Result<T, CliError>;

fn input<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Input(msg.into()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

fn dry(command: &str) -> Res<Output> {
    Ok(Output::json(json!({ "command": command, "dry_run": true, "valid": true }), true))
}

fn model_of(c: &CurveArgs) -> Res<WeierstrassModel> {
    match (&c.model, c.preset) {
        (Some(s), None) => Ok(s.parse()?),
        (None, Some(Preset::Example)) => Ok(EXAMPLE_MODEL.parse()?),
        _ => input("give exactly one of --model and --preset"),
    }
}

fn point_of(t0: &Option<String>, d0: &Option<String>, preset: Option<Preset>) -> Res<FamilyPoint> {
    match (t0, d0, preset) {
        (Some(t), Some(d), None) => Ok(FamilyPoint::new(parse_rat(t)?, parse_rat(d)?)?),
        (None, None, Some(Preset::Example)) => Ok(FamilyPoint::example()),
        _ => input("give --t0 and --d0, or --preset"),
    }
}

fn point_args(p: &PointArgs) -> Res<FamilyPoint> {
    point_of(&p.t0, &p.d0, p.preset)
}

fn check_progression(a: u64, n: u64) -> Res<()> {
    CycloRestriction::new(a, n)?;
    Ok(())
}

fn certificate_of(src: &WitnessSource) -> Res<WitnessCertificate> {
    match &src.u0 {
        Some(u) => Ok(witness_from_u0(&parse_rat(u)?)?),
        None => Ok(acyclicity_params(&point_of(&src.t0, &src.d0, src.preset)?)?),
    }
}

fn parse_matrix(m: u32, s: &str) -> Res<Mat2> {
    let e: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("matrix {s:?}: {e}")))?;
    let e: [i64; 4] = e.try_into().map_err(|_| CliError::Input(format!("matrix {s:?} needs four entries")))?;
    let x = Mat2::new(m, e);
    if !x.is_invertible() {
        return input(format!("matrix {s:?} is not invertible mod {m}"));
    }
    Ok(x)
}

/// Validates the group description; building it may be expensive.
fn group_spec(g: &GroupArgs) -> Res<Option<(u32, Vec<Mat2>)>> {
    if g.named.is_some() {
        return Ok(None);
    }
    let Some(m) = g.m else {
        return input("give --named or --m with --gen");
    };
    if m < 2 {
        return input("--m must be at least 2");
    }
    let gens = g.gens.iter().map(|s| parse_matrix(m, s)).collect::<Res<Vec<_>>>()?;
    Ok(Some((m, gens)))
}

fn build_group(g: &GroupArgs, spec: Option<(u32, Vec<Mat2>)>) -> Res<Gl2Subgroup> {
    Ok(match (g.named, spec) {
        (Some(NamedGroup::Gl2_6), _) => full_gl2(6)?,
        (Some(NamedGroup::B2), _) => standard_groups(2)?,
        (Some(NamedGroup::Cs3), _) => standard_groups(3)?,
        (Some(NamedGroup::G6), _) => standard_groups(6)?,
        (Some(NamedGroup::G6Tilde), _) => g6_tilde()?,
        (Some(NamedGroup::Example), _) => example_image()?,
        (None, Some((m, gens))) => closure(&gens, m)?,
        (None, None) => return input("missing group"),
    })
}

fn parse_field(s: &str) -> Res<(u64, MultiQuadField)> {
    let (l, labels) = s.split_once('=').ok_or_else(|| CliError::Input(format!("field {s:?} is not l=m1,m2,...")))?;
    let l: u64 = l.trim().parse().map_err(|_| CliError::Input(format!("bad prime in {s:?}")))?;
    if !is_prime_u64(l) {
        return input(format!("{l} is not prime"));
    }
    let gens = labels
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let m: BigInt = t.parse().map_err(|_| CliError::Input(format!("bad label {t:?}")))?;
            Ok(SquareClass::from_label(m)?)
        })
        .collect::<Res<Vec<_>>>()?;
    Ok((l, MultiQuadField::new(gens)?))
}

fn cache_path(flag: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone().or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

pub fn run(cli: &Cli) -> Res<Output> {
    let dry_run = cli.dry_run;
    match &cli.command {
        Command::Count { curve, a, n, x } => {
            let m = model_of(curve)?;
            check_progression(*a, *n)?;
            if dry_run {
                return dry("count");
            }
            let pi = pi_count(&m, &BigInt::from(*a), &BigInt::from(*n), *x)?;
            Ok(Output::json(json!({ "a": a, "n": n, "pi": pi, "x": x }), true))
        }
        Command::Survey { curve, x, a, n, cache, csv } => {
            let m = model_of(curve)?;
            let mut cfg = SweepConfig::new(*x);
            cfg.progression = a.zip(*n);
            cfg.cache_path = cache_path(cache);
            if let Some(k) = cli.workers {
                cfg.workers = k;
            }
            cfg.validate()?;
            if dry_run {
                return dry("survey");
            }
            let out = survey(&m, &cfg)?;
            if *csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                let row = |w: &mut csv::Writer<Vec<u8>>, r: [String; 6]| w.write_record(&r);
                let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
                let io = |e: csv::Error| CliError::Resource(e.to_string());
                row(&mut w, ["p", "status", "N", "d", "e", "cyclic"].map(String::from)).map_err(io)?;
                for r in &out.records {
                    let status = if r.status == Status::Good { "good" } else { "bad" };
                    row(&mut w, [r.p.to_string(), status.into(), opt(r.n), opt(r.d), opt(r.e), r.cyclic.to_string()])
                        .map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Resource(e.to_string()))?;
                let text = String::from_utf8(bytes).expect("csv output is UTF-8");
                return Ok(Output { text: text.trim_end().to_owned(), verified: true });
            }
            Ok(Output::json(
                json!({
                    "computed": out.computed,
                    "cyclic_fraction": format!("{:.6}", cyclic_fraction(&out.records)),
                    "records": to_value(&out.records),
                    "reused": out.reused,
                }),
                true,
            ))
        }
        Command::Family { command } => match command {
            FamilyCommand::Eval(p) => {
                let point = point_args(p)?;
                if dry_run {
                    return dry("family eval");
                }
                Ok(Output::json(to_value(&eval_family(&point)?), true))
            }
            FamilyCommand::Specialize(p) => {
                let point = point_args(p)?;
                if dry_run {
                    return dry("family specialize");
                }
                let model = specialize(&point)?;
                Ok(Output::json(
                    json!({
                        "discriminant": model.discriminant().to_string(),
                        "j": model.j_invariant().to_string(),
                        "model": to_value(&model),
                    }),
                    true,
                ))
            }
            FamilyCommand::Witness(w) => witness(w, dry_run),
        },
        Command::Witness(w) => witness(w, dry_run),
        Command::VerifyExample { x } => {
            if dry_run {
                return dry("verify-example");
            }
            let m: WeierstrassModel = EXAMPLE_MODEL.parse()?;
            let n = BigInt::from(8);
            let pi3 = pi_count(&m, &BigInt::from(3), &n, *x)?;
            let pi5 = pi_count(&m, &BigInt::from(5), &n, *x)?;
            let dichotomy = verify_noncyclic(&m, *x, |p| p % 8 == 3)?;
            let verified = pi3 == 0 && pi5 == 0 && dichotomy.passed();
            Ok(Output::json(
                json!({
                    "dichotomy_checked": dichotomy.checked,
                    "dichotomy_failures": to_value(&dichotomy.failures),
                    "pi_3_8": pi3,
                    "pi_5_8": pi5,
                    "x": x,
                }),
                verified,
            ))
        }
        Command::VerifyWitness { source, x } => {
            let cert = certificate_of(source)?;
            if !cert.checks.all() {
                return Err(CliError::Verification(format!("hypothesis checks failed: {:?}", cert.checks)));
            }
            if dry_run {
                return dry("verify-witness");
            }
            let report = verify_witness(&cert, *x)?;
            Ok(Output::json(
                json!({ "certificate": to_value(&cert), "report": to_value(&report), "x": x }),
                report.passed(),
            ))
        }
        Command::Constant { data, preset, full_image: _, a, n, cutoff, d_max } => {
            let galois = match (data, preset) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path).map_err(Error::from)?;
                    serde_json::from_str::<GaloisData>(&text).map_err(|e| CliError::Input(e.to_string()))?
                }
                (None, Some(Preset::Example)) => GaloisData::example(),
                (None, None) => GaloisData::full_image(),
            };
            check_progression(*a, *n)?;
            if dry_run {
                return dry("constant");
            }
            let (ab, nb) = (BigInt::from(*a), BigInt::from(*n));
            let result = almost_euler(&galois, &ab, &nb, *cutoff)?;
            let mut v = to_value(&result);
            let obj = v.as_object_mut().expect("object");
            obj.insert("a".into(), json!(a));
            obj.insert("n".into(), json!(n));
            obj.insert("single_prime_obstruction".into(), json!(single_prime_obstruction(&galois, &ab, &nb)?));
            if let Some(d) = d_max {
                obj.insert("d_max".into(), json!(d));
                obj.insert("truncated_sum".into(), json!(truncated_sum(&galois, &ab, &nb, *d)?.to_string()));
            }
            Ok(Output::json(v, true))
        }
        Command::Group { command } => group(command, dry_run),
        Command::CrossCheckLemma { curve, fields, x } => {
            let m = model_of(curve)?;
            let mut map: BTreeMap<u64, MultiQuadField> = fields.iter().map(|s| parse_field(s)).collect::<Res<_>>()?;
            if map.is_empty() {
                if curve.preset != Some(Preset::Example) {
                    return input("give at least one --field");
                }
                map.insert(2, MultiQuadField::from_labels(&[-6])?);
                map.insert(3, MultiQuadField::from_labels(&[-3])?);
            }
            if dry_run {
                return dry("cross-check-lemma");
            }
            let report = cross_check_lemma(&m, &map, *x)?;
            Ok(Output::json(to_value(&report), report.passed()))
        }
    }
}

fn witness(w: &WitnessArgs, dry_run: bool) -> Res<Output> {
    let u0 = parse_rat(&w.u0)?;
    if dry_run {
        return dry("witness");
    }
    let cert = witness_from_u0(&u0)?;
    let mut out = json!({ "certificate": to_value(&cert) });
    let mut verified = cert.checks.all();
    if let Some(x) = w.x {
        let report = verify_witness(&cert, x)?;
        verified &= report.passed();
        out["report"] = to_value(&report);
        out["x"] = json!(x);
    }
    Ok(Output::json(out, verified))
}

fn group(command: &GroupCommand, dry_run: bool) -> Res<Output> {
    match command {
        GroupCommand::Closure(g) => {
            let spec = group_spec(g)?;
            if dry_run {
                return dry("group closure");
            }
            let h = build_group(g, spec)?;
            Ok(Output::json(json!({ "group": to_value(&h), "m": h.modulus(), "order": h.order() }), true))
        }
        GroupCommand::Genus(g) => {
            let spec = group_spec(g)?;
            if dry_run {
                return dry("group genus");
            }
            let h = build_group(g, spec)?;
            let (gl, sl) = relative_levels(&h);
            Ok(Output::json(
                json!({ "genus": genus(&h)?, "gl2_level": gl, "m": h.modulus(), "order": h.order(), "sl2_level": sl }),
                true,
            ))
        }
        GroupCommand::CheckAcyclicity => {
            if dry_run {
                return dry("group check-acyclicity");
            }
            let (data, tau) = example_quotient_data()?;
            let report = acyclicity_check(&data, &tau)?;
            Ok(Output::json(
                json!({
                    "group": to_value(&data.group),
                    "item1": report.item1,
                    "item2": report.item2,
                    "item3": report.item3,
                    "normal": to_value(&data.normal),
                    "tau": to_value(&tau),
                }),
                report.all(),
            ))
        }
        GroupCommand::SearchWitness(g) => {
            let spec = group_spec(g)?;
            if dry_run {
                return dry("group search-witness");
            }
            let h = build_group(g, spec)?;
            let found = search_witness_data(&h)?;
            Ok(Output::json(json!({ "count": found.len(), "order": h.order(), "witnesses": to_value(&found) }), true))
        }
    }
}
