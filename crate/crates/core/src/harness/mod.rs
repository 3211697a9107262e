//! Prime sweeps over a fixed model: cyclicity counts, cached surveys, the splitting
//! Lemma cross-check and verification of witness certificates.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use log::{debug, warn};
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ec_reduction::{
    group_structure, has_full_torsion, is_cyclic, ramified_in, reduce, split_prediction, ReducedCurve,
    WeierstrassModel,
};
use crate::error::{domain, Error, Result};
use crate::exact_arith::sieve_primes;
use crate::family::WitnessCertificate;
use crate::multiquadratic::MultiQuadField;

/// Primes per block handed to the cache writer.
pub const BLOCK_SIZE: usize = 256;

/// The cyclic-prime bound of the non-cyclicity theorem, which also counts primes this
/// crate excludes (2, 3 and primes of bad reduction of the chosen model).
pub const PAPER_PI_BOUND: u64 = 2;

/// Primes in `[lo, hi]` by a segmented sieve.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base: Vec<u64> = sieve_primes(hi.sqrt() + 1).into_iter().map(u64::from).collect();
    let mut out = Vec::new();
    const SEGMENT: u64 = 1 << 16;
    let mut start = lo;
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let mut composite = vec![false; (end - start + 1) as usize];
        for &q in &base {
            if q * q > end {
                break;
            }
            let mut j = (q * q).max(start.div_ceil(q) * q);
            while j <= end {
                composite[(j - start) as usize] = true;
                j += q;
            }
        }
        out.extend((start..=end).zip(composite).filter(|&(_, c)| !c).map(|(p, _)| p));
        start = end + 1;
    }
    out
}

/// `p ≡ a mod n` with an arbitrary-size modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Progression {
    a: BigInt,
    n: BigInt,
}

impl Progression {
    pub fn new(a: impl Into<BigInt>, n: impl Into<BigInt>) -> Result<Self> {
        let (a, n) = (a.into(), n.into());
        if !n.is_positive() {
            return domain(format!("modulus must be positive, got {n}"));
        }
        if !a.gcd(&n).is_one() {
            return domain(format!("gcd({a}, {n}) != 1"));
        }
        Ok(Progression { a: a.mod_floor(&n), n })
    }

    /// All integers.
    pub fn all() -> Self {
        Progression { a: BigInt::from(0), n: BigInt::one() }
    }

    pub fn contains(&self, p: u64) -> bool {
        match (self.a.to_u64(), self.n.to_u64()) {
            (Some(a), Some(n)) => p % n == a,
            _ => (BigInt::from(p) - &self.a).is_multiple_of(&self.n),
        }
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn n(&self) -> &BigInt {
        &self.n
    }
}

fn good_curve(m: &WeierstrassModel, p: u64) -> Result<Option<ReducedCurve>> {
    Ok(reduce(m, p)?.good())
}

/// `π_{E,a,n}(x)`: good primes `5 ≤ p ≤ x`, `p ≡ a mod n`, with cyclic reduction.
pub fn pi_count(m: &WeierstrassModel, a: &BigInt, n: &BigInt, x: u64) -> Result<u64> {
    let prog = Progression::new(a.clone(), n.clone())?;
    let primes: Vec<u64> = primes_between(5, x).into_iter().filter(|&p| prog.contains(p)).collect();
    let flags = primes
        .par_iter()
        .map(|&p| Ok(good_curve(m, p)?.is_some_and(|c| is_cyclic(&c))))
        .collect::<Result<Vec<bool>>>()?;
    Ok(flags.into_iter().filter(|&c| c).count() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Good,
    Bad,
}

/// One prime of a survey. `N`, `d`, `e` are present for good primes only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub p: u64,
    pub status: Status,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u64>,
    /// `d = 1`; false for bad primes.
    pub cyclic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<u64>,
}

impl SurveyRecord {
    fn compute(m: &WeierstrassModel, p: u64) -> Result<Self> {
        Ok(match good_curve(m, p)? {
            Some(c) => {
                let g = group_structure(&c);
                SurveyRecord { p, status: Status::Good, n: Some(g.n), d: Some(g.d), e: Some(g.e), cyclic: g.d == 1, residue: None }
            }
            None => SurveyRecord { p, status: Status::Bad, n: None, d: None, e: None, cyclic: false, residue: None },
        })
    }

    fn from_cache(line: CacheLine) -> Option<Self> {
        let ok = match line.status {
            Status::Good => line.n.is_some() && line.d.is_some() && line.e.is_some(),
            Status::Bad => line.n.is_none() && line.d.is_none() && line.e.is_none(),
        };
        ok.then(|| SurveyRecord {
            p: line.p,
            status: line.status,
            n: line.n,
            d: line.d,
            e: line.e,
            cyclic: line.d == Some(1),
            residue: None,
        })
    }
}

/// One line of the JSON-lines cache.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct CacheLine {
    curve: String,
    p: u64,
    status: Status,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e: Option<u64>,
}

impl CacheLine {
    fn of(curve: &str, r: &SurveyRecord) -> Self {
        CacheLine { curve: curve.to_owned(), p: r.p, status: r.status, n: r.n, d: r.d, e: r.e }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub x_max: u64,
    pub progression: Option<(u64, u64)>,
    pub workers: usize,
    pub cache_path: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(x_max: u64) -> Self {
        SweepConfig { x_max, progression: None, workers: rayon::current_num_threads(), cache_path: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return domain("worker count must be positive");
        }
        if let Some((a, n)) = self.progression {
            Progression::new(a, n)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurveyOutcome {
    pub records: Vec<SurveyRecord>,
    pub computed: usize,
    pub reused: usize,
}

/// Reads the cached records of `curve`, skipping lines that do not parse.
fn load_cache(path: &Path, curve: &str) -> Result<HashMap<u64, SurveyRecord>> {
    let mut out = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CacheLine>(&line).ok().filter(|l| l.curve == curve) {
            Some(l) => match SurveyRecord::from_cache(l) {
                Some(r) => {
                    out.insert(r.p, r);
                }
                None => warn!("{}:{}: inconsistent cache record skipped", path.display(), i + 1),
            },
            None if serde_json::from_str::<serde_json::Value>(&line).is_err() => {
                warn!("{}:{}: corrupt cache line skipped", path.display(), i + 1)
            }
            None => {}
        }
    }
    Ok(out)
}

/// Group structures for every prime `5 ≤ p ≤ x_max` in the configured progression.
/// New records are computed in contiguous blocks and appended to the cache by a single
/// writer thread.
pub fn survey(m: &WeierstrassModel, cfg: &SweepConfig) -> Result<SurveyOutcome> {
    cfg.validate()?;
    let curve = m.hash_hex();
    let primes: Vec<u64> = primes_between(5, cfg.x_max)
        .into_iter()
        .filter(|&p| cfg.progression.map_or(true, |(a, n)| p % n == a % n))
        .collect();
    let mut cached = match &cfg.cache_path {
        Some(path) => load_cache(path, &curve)?,
        None => HashMap::new(),
    };
    let missing: Vec<u64> = primes.iter().copied().filter(|p| !cached.contains_key(p)).collect();
    let reused = primes.len() - missing.len();
    debug!("survey {curve}: {} primes, {reused} cached", primes.len());

    let mut writer = match &cfg.cache_path {
        Some(path) if !missing.is_empty() => {
            Some(BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?))
        }
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;

    let (tx, rx) = mpsc::channel::<Vec<SurveyRecord>>();
    let fresh = std::thread::scope(|scope| -> Result<Vec<SurveyRecord>> {
        let curve = &curve;
        let sink = scope.spawn(move || -> Result<Vec<SurveyRecord>> {
            let mut all = Vec::new();
            for block in rx {
                if let Some(w) = writer.as_mut() {
                    for r in &block {
                        serde_json::to_writer(&mut *w, &CacheLine::of(curve, r))?;
                        w.write_all(b"\n")?;
                    }
                    w.flush()?;
                }
                all.extend(block);
            }
            Ok(all)
        });
        let computed = pool.install(|| {
            missing.par_chunks(BLOCK_SIZE).try_for_each_with(tx, |tx, block| {
                let records = block.iter().map(|&p| SurveyRecord::compute(m, p)).collect::<Result<Vec<_>>>()?;
                tx.send(records).map_err(|_| Error::Internal("cache writer stopped".into()))
            })
        });
        let written = sink.join().map_err(|_| Error::Internal("cache writer panicked".into()))?;
        computed?;
        written
    })?;

    let computed = fresh.len();
    for r in fresh {
        cached.insert(r.p, r);
    }
    let mut records: Vec<SurveyRecord> = primes
        .iter()
        .map(|p| cached.remove(p).ok_or_else(|| Error::Internal(format!("record for {p} missing"))))
        .collect::<Result<_>>()?;
    if let Some((_, n)) = cfg.progression {
        for r in &mut records {
            r.residue = Some(r.p % n);
        }
    }
    Ok(SurveyOutcome { records, computed, reused })
}

/// Fraction of good primes with cyclic reduction.
pub fn cyclic_fraction(records: &[SurveyRecord]) -> f64 {
    let good = records.iter().filter(|r| r.status == Status::Good).count();
    let cyclic = records.iter().filter(|r| r.cyclic).count();
    if good == 0 {
        0.0
    } else {
        cyclic as f64 / good as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaMismatch {
    pub p: u64,
    pub l: u64,
    pub predicted: bool,
    pub actual: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    /// Prime–field pairs compared.
    pub checked: usize,
    /// Good primes skipped because they ramify in one of the fields.
    pub skipped: usize,
    pub failures: Vec<LemmaMismatch>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares the splitting prediction in `Q(E[ℓ])` with full `ℓ`-torsion of the reduction.
pub fn cross_check_lemma(m: &WeierstrassModel, fields: &BTreeMap<u64, MultiQuadField>, x: u64) -> Result<LemmaReport> {
    cross_check_with(m, fields.keys().copied(), x, |l, p| match fields.get(&l) {
        Some(f) if ramified_in(f, p) => Ok(None),
        Some(f) => split_prediction(f, p).map(Some),
        None => Ok(None),
    })
}

/// The same sweep against any oracle `(ℓ, p) ↦ Some(splits)`, `None` meaning skip `p`.
pub fn cross_check_with<I, F>(m: &WeierstrassModel, ls: I, x: u64, oracle: F) -> Result<LemmaReport>
where
    I: IntoIterator<Item = u64>,
    F: Fn(u64, u64) -> Result<Option<bool>> + Sync,
{
    let ls: Vec<u64> = ls.into_iter().collect();
    let per_prime = primes_between(5, x)
        .into_par_iter()
        .map(|p| -> Result<(usize, bool, Vec<LemmaMismatch>)> {
            let Some(c) = good_curve(m, p)? else {
                return Ok((0, false, Vec::new()));
            };
            let mut predictions = Vec::new();
            for &l in ls.iter().filter(|&&l| l != p) {
                match oracle(l, p)? {
                    Some(pred) => predictions.push((l, pred)),
                    None => return Ok((0, true, Vec::new())),
                }
            }
            let mut bad = Vec::new();
            for &(l, predicted) in &predictions {
                let actual = has_full_torsion(&c, l)?;
                if actual != predicted {
                    bad.push(LemmaMismatch { p, l, predicted, actual });
                }
            }
            Ok((predictions.len(), false, bad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport { checked: 0, skipped: 0, failures: Vec::new() };
    for (n, skipped, bad) in per_prime {
        report.checked += n;
        report.skipped += usize::from(skipped);
        report.failures.extend(bad);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessFailure {
    pub p: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    /// Good primes in the admissible classes.
    pub checked: usize,
    pub failures: Vec<WitnessFailure>,
    /// Cyclic primes under this crate's exclusions.
    pub pi: u64,
    /// The theorem's bound, which also counts excluded primes.
    pub pi_paper_bound: u64,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.pi == 0
    }
}

/// Sweeps good primes `5 ≤ p ≤ x` accepted by `admits`, requiring non-cyclic reduction
/// with full 2-torsion or full 3-torsion.
pub fn verify_noncyclic<F>(m: &WeierstrassModel, x: u64, admits: F) -> Result<WitnessReport>
where
    F: Fn(u64) -> bool + Sync,
{
    let outcomes = primes_between(5, x)
        .into_par_iter()
        .filter(|&p| admits(p))
        .map(|p| -> Result<Option<(bool, Option<WitnessFailure>)>> {
            let Some(c) = good_curve(m, p)? else {
                return Ok(None);
            };
            let cyclic = is_cyclic(&c);
            let failure = if cyclic {
                Some(WitnessFailure { p, reason: "cyclic reduction".into() })
            } else if !has_full_torsion(&c, 2)? && !has_full_torsion(&c, 3)? {
                Some(WitnessFailure { p, reason: "non-cyclic without full 2- or 3-torsion".into() })
            } else {
                None
            };
            Ok(Some((cyclic, failure)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = WitnessReport { checked: 0, failures: Vec::new(), pi: 0, pi_paper_bound: PAPER_PI_BOUND };
    for (cyclic, failure) in outcomes.into_iter().flatten() {
        report.checked += 1;
        report.pi += u64::from(cyclic);
        report.failures.extend(failure);
    }
    Ok(report)
}

/// Checks a certificate's non-cyclicity claim over every admissible class mod `n0`.
pub fn verify_witness(w: &WitnessCertificate, x: u64) -> Result<WitnessReport> {
    if !w.checks.all() {
        return Err(Error::Precondition("certificate hypothesis checks do not all pass".into()));
    }
    verify_noncyclic(&w.model, x, |p| w.admits(&BigInt::from(p)))
}
