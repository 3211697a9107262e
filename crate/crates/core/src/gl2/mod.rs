//! Finite subgroups of `GL₂(Z/mZ)`: closure, the standard level-6 groups, conjugate
//! containment, modular-curve genus, relative levels, and acyclicity-group checks.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact_arith::{divisors, prime_divisors};

/// Default cap on materialized subgroup orders.
pub const DEFAULT_ORDER_BOUND: usize = 10_000_000;

/// The possible composite acyclicity levels.
pub const LEVEL_CANDIDATES: [u32; 11] = [6, 10, 14, 15, 21, 22, 26, 30, 33, 39, 42];

/// `(a b; c d)` with entries reduced mod `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub m: u32,
    pub e: [u32; 4],
}

impl Mat2 {
    pub fn new(m: u32, e: [i64; 4]) -> Self {
        Mat2 { m, e: e.map(|x| x.rem_euclid(m as i64) as u32) }
    }

    pub fn identity(m: u32) -> Self {
        Mat2::new(m, [1, 0, 0, 1])
    }

    pub fn scalar(m: u32, s: i64) -> Self {
        Mat2::new(m, [s, 0, 0, s])
    }

    pub fn det(&self) -> u32 {
        let [a, b, c, d] = self.e.map(u64::from);
        let m = self.m as u64;
        ((a * d + m * m - (b * c) % m) % m) as u32
    }

    pub fn trace(&self) -> u32 {
        (self.e[0] + self.e[3]) % self.m
    }

    pub fn is_invertible(&self) -> bool {
        gcd(self.det(), self.m) == 1
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        debug_assert_eq!(self.m, o.m);
        let m = self.m as u64;
        let [a, b, c, d] = self.e.map(u64::from);
        let [w, x, y, z] = o.e.map(u64::from);
        Mat2 {
            m: self.m,
            e: [(a * w + b * y) % m, (a * x + b * z) % m, (c * w + d * y) % m, (c * x + d * z) % m].map(|v| v as u32),
        }
    }

    /// Inverse of an invertible matrix.
    pub fn inv(&self) -> Mat2 {
        let m = self.m as i64;
        let di = inv_mod(self.det() as i64, m).expect("invertible matrix");
        let [a, b, c, d] = self.e.map(i64::from);
        Mat2::new(self.m, [d * di, -b * di, -c * di, a * di])
    }

    pub fn transpose(&self) -> Mat2 {
        let [a, b, c, d] = self.e;
        Mat2 { m: self.m, e: [a, c, b, d] }
    }

    /// Reduction modulo a divisor of `m`.
    pub fn reduce(&self, d: u32) -> Mat2 {
        Mat2 { m: d, e: self.e.map(|x| x % d) }
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::identity(self.m)
    }

    /// Order in the group.
    pub fn order(&self) -> u32 {
        let id = Mat2::identity(self.m);
        let mut x = *self;
        let mut k = 1;
        while x != id {
            x = x.mul(self);
            k += 1;
        }
        k
    }

    pub fn code(&self) -> u32 {
        let m = self.m;
        ((self.e[0] * m + self.e[1]) * m + self.e[2]) * m + self.e[3]
    }

    pub fn from_code(m: u32, mut c: u32) -> Mat2 {
        let mut e = [0u32; 4];
        for slot in e.iter_mut().rev() {
            *slot = c % m;
            c /= m;
        }
        Mat2 { m, e }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.e;
        write!(f, "({a} {b}; {c} {d}) mod {}", self.m)
    }
}

impl Serialize for Mat2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.e.serialize(s)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (mut t, mut t1) = (0i64, 1i64);
    let (mut r, mut r1) = (m, a.rem_euclid(m));
    while r1 != 0 {
        let q = r / r1;
        (t, t1) = (t1, t - q * t1);
        (r, r1) = (r1, r - q * r1);
    }
    (r == 1).then(|| t.rem_euclid(m))
}

/// Chinese-remainder lift of matrices modulo coprime `m1`, `m2`.
pub fn crt(x: &Mat2, y: &Mat2) -> Mat2 {
    let (m1, m2) = (x.m as i64, y.m as i64);
    let k = inv_mod(m1, m2).expect("coprime moduli");
    let mut e = [0i64; 4];
    for i in 0..4 {
        let (a, b) = (x.e[i] as i64, y.e[i] as i64);
        e[i] = a + m1 * ((b - a).rem_euclid(m2) * k % m2);
    }
    Mat2::new((m1 * m2) as u32, e)
}

/// A subgroup given by generators, with its element set materialized.
#[derive(Clone, Debug)]
pub struct Gl2Subgroup {
    m: u32,
    gens: Vec<Mat2>,
    /// Sorted codes of all elements.
    elements: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SubgroupJson {
    m: u32,
    gens: Vec<[u32; 4]>,
}

impl Serialize for Gl2Subgroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubgroupJson { m: self.m, gens: self.gens.iter().map(|g| g.e).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gl2Subgroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SubgroupJson::deserialize(d)?;
        let gens: Vec<Mat2> = raw.gens.iter().map(|e| Mat2::new(raw.m, e.map(i64::from))).collect();
        closure(&gens, raw.m).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for Gl2Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.elements == other.elements
    }
}

impl Eq for Gl2Subgroup {}

impl Gl2Subgroup {
    pub fn modulus(&self) -> u32 {
        self.m
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.gens
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &Mat2) -> bool {
        x.m == self.m && self.elements.binary_search(&x.code()).is_ok()
    }

    pub fn elements(&self) -> impl Iterator<Item = Mat2> + '_ {
        self.elements.iter().map(move |&c| Mat2::from_code(self.m, c))
    }

    pub fn is_subgroup_of(&self, other: &Gl2Subgroup) -> bool {
        self.m == other.m && self.gens.iter().all(|g| other.contains(g))
    }

    pub fn transpose(&self) -> Gl2Subgroup {
        let gens: Vec<Mat2> = self.gens.iter().map(Mat2::transpose).collect();
        let mut elements: Vec<u32> = self.elements().map(|x| x.transpose().code()).collect();
        elements.sort_unstable();
        Gl2Subgroup { m: self.m, gens, elements }
    }

    pub fn conjugate(&self, g: &Mat2) -> Gl2Subgroup {
        let gi = g.inv();
        let gens: Vec<Mat2> = self.gens.iter().map(|x| g.mul(x).mul(&gi)).collect();
        let mut elements: Vec<u32> = self.elements().map(|x| g.mul(&x).mul(&gi).code()).collect();
        elements.sort_unstable();
        Gl2Subgroup { m: self.m, gens, elements }
    }

    /// Image under reduction to a divisor of the modulus.
    pub fn reduce(&self, d: u32) -> Result<Gl2Subgroup> {
        if d < 1 || self.m % d != 0 {
            return domain(format!("{d} does not divide {}", self.m));
        }
        let gens: Vec<Mat2> = self.gens.iter().map(|g| g.reduce(d)).collect();
        let mut elements: Vec<u32> = self.elements().map(|x| x.reduce(d).code()).collect();
        elements.sort_unstable();
        elements.dedup();
        Ok(Gl2Subgroup { m: d, gens, elements })
    }

    fn from_elements(m: u32, mut elements: Vec<u32>) -> Gl2Subgroup {
        elements.sort_unstable();
        elements.dedup();
        let gens = elements.iter().map(|&c| Mat2::from_code(m, c)).collect();
        Gl2Subgroup { m, gens, elements }
    }

    /// Whether `−I` lies in the group.
    pub fn contains_minus_identity(&self) -> bool {
        self.contains(&Mat2::scalar(self.m, -1))
    }

    pub fn is_normal_in(&self, g: &Gl2Subgroup) -> bool {
        self.is_subgroup_of(g)
            && g.gens.iter().all(|x| {
                let xi = x.inv();
                self.gens.iter().all(|n| self.contains(&x.mul(n).mul(&xi)))
            })
    }
}

/// The subgroup generated by `gens`.
pub fn closure(gens: &[Mat2], m: u32) -> Result<Gl2Subgroup> {
    closure_bounded(gens, m, DEFAULT_ORDER_BOUND)
}

pub fn closure_bounded(gens: &[Mat2], m: u32, bound: usize) -> Result<Gl2Subgroup> {
    if m < 2 {
        return domain(format!("modulus must be at least 2, got {m}"));
    }
    for g in gens {
        if g.m != m {
            return domain(format!("generator {g} has the wrong modulus"));
        }
        if !g.is_invertible() {
            return domain(format!("generator {g} is not invertible"));
        }
    }
    let id = Mat2::identity(m);
    let mut seen: HashSet<u32> = HashSet::from([id.code()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y.code()) {
                if seen.len() > bound {
                    return Err(Error::Resource(format!("subgroup order exceeds {bound}")));
                }
                queue.push_back(y);
            }
        }
    }
    let mut elements: Vec<u32> = seen.into_iter().collect();
    elements.sort_unstable();
    Ok(Gl2Subgroup { m, gens: gens.to_vec(), elements })
}

/// Every invertible matrix mod `m`, by direct enumeration.
pub fn all_invertible(m: u32) -> Vec<Mat2> {
    (0..m.pow(4)).map(|c| Mat2::from_code(m, c)).filter(Mat2::is_invertible).collect()
}

/// `GL₂(Z/mZ)` as the closure of elementary and diagonal matrices.
pub fn full_gl2(m: u32) -> Result<Gl2Subgroup> {
    let mut gens = vec![Mat2::new(m, [1, 1, 0, 1]), Mat2::new(m, [1, 0, 1, 1])];
    gens.extend((1..m).filter(|&u| gcd(u, m) == 1).map(|u| Mat2::new(m, [u as i64, 0, 0, 1])));
    closure(&gens, m)
}

/// `B(2)`, `C_s(3)` or `G(6) = B(2) ×_CRT C_s(3)`.
pub fn standard_groups(m: u32) -> Result<Gl2Subgroup> {
    let b2 = [Mat2::new(2, [1, 1, 0, 1])];
    let cs3 = [Mat2::new(3, [2, 0, 0, 1]), Mat2::new(3, [1, 0, 0, 2])];
    match m {
        2 => closure(&b2, 2),
        3 => closure(&cs3, 3),
        6 => {
            let mut gens: Vec<Mat2> = b2.iter().map(|g| crt(g, &Mat2::identity(3))).collect();
            gens.extend(cs3.iter().map(|g| crt(&Mat2::identity(2), g)));
            closure(&gens, 6)
        }
        _ => domain(format!("no standard group at level {m}")),
    }
}

/// `⟨G(6), −I⟩`.
pub fn g6_tilde() -> Result<Gl2Subgroup> {
    let g6 = standard_groups(6)?;
    let mut gens = g6.gens.clone();
    gens.push(Mat2::scalar(6, -1));
    closure(&gens, 6)
}

/// Preimage in `GL₂(Z/mZ)` of a subgroup at a divisor level.
pub fn preimage(h: &Gl2Subgroup, m: u32) -> Result<Gl2Subgroup> {
    if m % h.m != 0 {
        return domain(format!("{} does not divide {m}", h.m));
    }
    let elements: Vec<u32> = all_invertible(m).into_iter().filter(|x| h.contains(&x.reduce(h.m))).map(|x| x.code()).collect();
    Ok(Gl2Subgroup::from_elements(m, elements))
}

type Profile = BTreeMap<(u32, u32, u32), usize>;

fn profile(h: &Gl2Subgroup) -> Profile {
    let mut out = Profile::new();
    for x in h.elements() {
        *out.entry((x.order(), x.det(), x.trace())).or_default() += 1;
    }
    out
}

/// Whether some conjugate of `h1` lies in `h2`.
pub fn conj_contained(h1: &Gl2Subgroup, h2: &Gl2Subgroup) -> Result<bool> {
    if h1.m != h2.m {
        return domain(format!("moduli differ: {} vs {}", h1.m, h2.m));
    }
    if h1.order() > h2.order() || h2.order() % h1.order() != 0 {
        return Ok(false);
    }
    let (p1, p2) = (profile(h1), profile(h2));
    if p1.iter().any(|(k, n)| p2.get(k).copied().unwrap_or(0) < *n) {
        return Ok(false);
    }
    let gens = &h1.gens;
    Ok(all_invertible(h1.m).par_iter().any(|g| {
        let gi = g.inv();
        gens.iter().all(|x| h2.contains(&g.mul(x).mul(&gi)))
    }))
}

/// `g = 1 + μ/12 − ν₂/4 − ν₃/3 − ν∞/2`.
pub fn genus_from_data(mu: u64, nu2: u64, nu3: u64, nu_inf: u64) -> Result<u64> {
    let twelve_g = 12 + mu as i64 - 3 * nu2 as i64 - 4 * nu3 as i64 - 6 * nu_inf as i64;
    if twelve_g < 0 || twelve_g % 12 != 0 {
        return Err(Error::Internal(format!("non-integral genus from (μ, ν₂, ν₃, ν∞) = ({mu}, {nu2}, {nu3}, {nu_inf})")));
    }
    Ok(twelve_g as u64 / 12)
}

/// Labels right cosets `Hx` of `h` inside `ambient` (both as element lists).
fn right_coset_ids(h: &[Mat2], ambient: &[Mat2]) -> HashMap<u32, usize> {
    let mut ids = HashMap::with_capacity(ambient.len());
    let mut next = 0;
    for x in ambient {
        if ids.contains_key(&x.code()) {
            continue;
        }
        for y in h {
            ids.insert(y.mul(x).code(), next);
        }
        next += 1;
    }
    ids
}

/// Genus of `X_G`, from the action of `SL₂(Z/mZ)` on cosets of `G ∩ SL₂`.
pub fn genus(g: &Gl2Subgroup) -> Result<u64> {
    let m = g.m;
    if !g.contains_minus_identity() {
        return domain("genus requires −I ∈ G");
    }
    let dets: HashSet<u32> = g.elements().map(|x| x.det()).collect();
    if dets.len() as u32 != (1..=m).filter(|&u| gcd(u % m, m) == 1).count() as u32 {
        return domain("genus requires surjective determinant");
    }
    let sl2: Vec<Mat2> = all_invertible(m).into_iter().filter(|x| x.det() == 1 % m).collect();
    let h: Vec<Mat2> = g.elements().filter(|x| x.det() == 1 % m).collect();
    let ids = right_coset_ids(&h, &sl2);
    let mu = sl2.len() / h.len();
    let mut reps = vec![None; mu];
    for x in &sl2 {
        reps[ids[&x.code()]].get_or_insert(*x);
    }
    let reps: Vec<Mat2> = reps.into_iter().map(|r| r.expect("every coset has a representative")).collect();
    let act = |s: &Mat2| -> Vec<usize> { reps.iter().map(|r| ids[&r.mul(s).code()]).collect() };
    let fixed = |perm: &[usize]| perm.iter().enumerate().filter(|(i, j)| i == *j).count() as u64;
    let s = act(&Mat2::new(m, [0, -1, 1, 0]));
    let r = act(&Mat2::new(m, [0, -1, 1, -1]));
    let t = act(&Mat2::new(m, [1, 1, 0, 1]));
    let mut visited = vec![false; mu];
    let mut cusps = 0;
    for i in 0..mu {
        if !visited[i] {
            cusps += 1;
            let mut j = i;
            while !visited[j] {
                visited[j] = true;
                j = t[j];
            }
        }
    }
    genus_from_data(mu as u64, fixed(&s), fixed(&r), cusps)
}

/// Whether the kernel of reduction mod `d` (intersected with `SL₂` if `sl2`) lies in `g`.
fn kernel_contained(g: &Gl2Subgroup, d: u32, sl2: bool) -> bool {
    let m = g.m;
    let id = Mat2::identity(d);
    let step = m / d;
    let lifts = |x: u32| (0..step).map(move |k| x + k * d);
    let [a, b, c, e] = id.e;
    for a in lifts(a) {
        for b in lifts(b) {
            for c in lifts(c) {
                for e in lifts(e) {
                    let x = Mat2 { m, e: [a, b, c, e] };
                    if !x.is_invertible() || (sl2 && x.det() != 1 % m) {
                        continue;
                    }
                    if !g.contains(&x) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `(GL₂-level, SL₂-level)` of `g` relative to its modulus.
pub fn relative_levels(g: &Gl2Subgroup) -> (u32, u32) {
    let divs: Vec<u32> = divisors(g.m as u64).into_iter().map(|d| d as u32).collect();
    let level = |sl2: bool| *divs.iter().find(|&&d| kernel_contained(g, d, sl2)).expect("d = m always works");
    (level(false), level(true))
}

/// `G(d)` with a normal subgroup `N(d)` of abelian quotient.
#[derive(Clone, Debug)]
pub struct AbelianQuotientData {
    pub group: Gl2Subgroup,
    pub normal: Gl2Subgroup,
}

impl AbelianQuotientData {
    pub fn new(group: Gl2Subgroup, normal: Gl2Subgroup) -> Result<Self> {
        if !normal.is_normal_in(&group) {
            return domain("N is not a normal subgroup of G");
        }
        for x in &group.gens {
            for y in &group.gens {
                if !normal.contains(&x.mul(y).mul(&y.mul(x).inv())) {
                    return domain("G/N is not abelian");
                }
            }
        }
        Ok(AbelianQuotientData { group, normal })
    }

    pub fn quotient_order(&self) -> usize {
        self.group.order() / self.normal.order()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AcyclicityReport {
    pub item1: bool,
    pub item2: bool,
    pub item3: bool,
}

impl AcyclicityReport {
    pub fn all(&self) -> bool {
        self.item1 && self.item2 && self.item3
    }
}

fn composite_squarefree_primes(d: u32) -> Result<Vec<u32>> {
    let primes: Vec<u32> = prime_divisors(d as u64).into_iter().map(|p| p as u32).collect();
    if primes.iter().product::<u32>() != d {
        return domain(format!("level {d} is not square-free"));
    }
    if primes.len() < 2 {
        return domain(format!("level {d} is not composite"));
    }
    Ok(primes)
}

/// Item (1) restricted to a coset `τN`: every element is `≡ I` mod some `ℓ`, and for each
/// `ℓ` some element is `≢ I` modulo every prime of `d/ℓ`.
fn coset_condition(coset: &[Mat2], primes: &[u32]) -> bool {
    let trivial_at = |x: &Mat2, l: u32| x.reduce(l).is_identity();
    coset.iter().all(|x| primes.iter().any(|&l| trivial_at(x, l)))
        && primes
            .iter()
            .all(|&l| coset.iter().any(|x| primes.iter().filter(|&&q| q != l).all(|&q| !trivial_at(x, q))))
}

/// The three items of the acyclicity proposition for `(G(d), N(d), τ)`.
pub fn acyclicity_check(data: &AbelianQuotientData, tau: &Mat2) -> Result<AcyclicityReport> {
    let d = data.group.m;
    let primes = composite_squarefree_primes(d)?;
    if !data.group.contains(tau) {
        return domain(format!("τ = {tau} is not in G"));
    }
    let reductions: Vec<Gl2Subgroup> = primes.iter().map(|&l| data.normal.reduce(l)).collect::<Result<_>>()?;
    let in_tilde = primes.iter().zip(&reductions).all(|(&l, nl)| nl.contains(&tau.reduce(l)));
    let coset: Vec<Mat2> = data.normal.elements().map(|n| tau.mul(&n)).collect();
    let item1 = in_tilde && coset_condition(&coset, &primes);
    let item2 = reductions.iter().all(|nl| nl.order() > 1);
    let item3 = primes.iter().all(|&l| {
        let d_prime = d / l;
        data.normal.elements().filter(|x| x.reduce(d_prime).is_identity()).count() == 1
    });
    Ok(AcyclicityReport { item1, item2, item3 })
}

/// A normal subgroup `N ⊇ [G, G]` and a coset `τN` satisfying item (1).
#[derive(Clone, Debug, Serialize)]
pub struct WitnessData {
    pub normal: Gl2Subgroup,
    pub coset: Vec<Mat2>,
}

/// Smallest normal subgroup of `g` containing `seeds`.
pub fn normal_closure(seeds: &[Mat2], g: &Gl2Subgroup) -> Result<Gl2Subgroup> {
    let mut gens: Vec<Mat2> = seeds.to_vec();
    loop {
        let n = closure(&gens, g.m)?;
        let extra: Vec<Mat2> = g
            .gens
            .iter()
            .flat_map(|x| {
                let xi = x.inv();
                n.gens.iter().map(move |y| x.mul(y).mul(&xi))
            })
            .filter(|c| !n.contains(c))
            .collect();
        if extra.is_empty() {
            return Ok(n);
        }
        gens.extend(extra);
    }
}

pub fn commutator_subgroup(g: &Gl2Subgroup) -> Result<Gl2Subgroup> {
    let seeds: Vec<Mat2> =
        g.gens.iter().flat_map(|x| g.gens.iter().map(move |y| x.mul(y).mul(&y.mul(x).inv()))).collect();
    normal_closure(&seeds, g)
}

/// Cap on the number of subgroups of `G/[G,G]` visited.
const MAX_ABELIAN_SUBGROUPS: usize = 100_000;

/// All subgroups of `g` containing `[G, G]`, i.e. every `N` with `G/N` abelian.
pub fn abelian_quotient_kernels(g: &Gl2Subgroup) -> Result<Vec<Gl2Subgroup>> {
    let c = commutator_subgroup(g)?;
    let c_elems: Vec<Mat2> = c.elements().collect();
    let all: Vec<Mat2> = g.elements().collect();
    let ids = right_coset_ids(&c_elems, &all);
    let mut reps: Vec<Mat2> = Vec::new();
    for x in &all {
        if ids[&x.code()] == reps.len() {
            reps.push(*x);
        }
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([c.clone()]);
    seen.insert(vec![0]);
    while let Some(n) = queue.pop_front() {
        for r in &reps {
            if n.contains(r) {
                continue;
            }
            let mut gens = n.gens.clone();
            gens.push(*r);
            let bigger = closure(&gens, g.m)?;
            let mut key: Vec<usize> = bigger.elements().map(|x| ids[&x.code()]).collect();
            key.sort_unstable();
            key.dedup();
            if seen.insert(key) {
                if seen.len() > MAX_ABELIAN_SUBGROUPS {
                    return Err(Error::Resource("too many abelian-quotient subgroups".into()));
                }
                queue.push_back(bigger);
            }
        }
        out.push(n);
    }
    Ok(out)
}

/// Largest group order accepted by [`search_witness_data`].
pub const SEARCH_ORDER_BOUND: usize = 100_000;

/// Every `(N, τN)` with `G/N` abelian for which item (1) holds.
pub fn search_witness_data(g: &Gl2Subgroup) -> Result<Vec<WitnessData>> {
    let primes = composite_squarefree_primes(g.m)?;
    if g.order() > SEARCH_ORDER_BOUND {
        return Err(Error::Resource(format!("|G| = {} exceeds {SEARCH_ORDER_BOUND}", g.order())));
    }
    let kernels = abelian_quotient_kernels(g)?;
    let results: Vec<Vec<WitnessData>> = kernels
        .par_iter()
        .map(|n| {
            let reductions: Vec<Gl2Subgroup> = primes.iter().map(|&l| n.reduce(l).expect("divisor")).collect();
            let n_elems: Vec<Mat2> = n.elements().collect();
            let ids = right_coset_ids(&n_elems, &g.elements().collect::<Vec<_>>());
            let mut done = HashSet::new();
            let mut found = Vec::new();
            for tau in g.elements() {
                let id = ids[&tau.code()];
                if !done.insert(id) {
                    continue;
                }
                let coset: Vec<Mat2> = n_elems.iter().map(|x| x.mul(&tau)).collect();
                let meets_tilde = coset
                    .iter()
                    .any(|s| primes.iter().zip(&reductions).all(|(&l, nl)| nl.contains(&s.reduce(l))));
                if meets_tilde && coset_condition(&coset, &primes) {
                    let mut coset = coset;
                    coset.sort();
                    found.push(WitnessData { normal: n.clone(), coset });
                }
            }
            found
        })
        .collect();
    Ok(results.into_iter().flatten().collect())
}

/// The order-4 level-6 image of the Example curve: `⟨T⟩` at 2 times `⟨diag(1, 2)⟩` at 3.
pub fn example_image() -> Result<Gl2Subgroup> {
    let t2 = crt(&Mat2::new(2, [1, 1, 0, 1]), &Mat2::identity(3));
    let d3 = crt(&Mat2::identity(2), &Mat2::new(3, [1, 0, 0, 2]));
    closure(&[t2, d3], 6)
}

/// The Example data: `N = ⟨(T, diag(1,2))⟩`, the kernel of the character cutting out `Q(√2)`,
/// and `τ = (T, I)` over `σ₃`.
pub fn example_quotient_data() -> Result<(AbelianQuotientData, Mat2)> {
    let g = example_image()?;
    let n_gen = crt(&Mat2::new(2, [1, 1, 0, 1]), &Mat2::new(3, [1, 0, 0, 2]));
    let n = closure(&[n_gen], 6)?;
    let tau = crt(&Mat2::new(2, [1, 1, 0, 1]), &Mat2::identity(3));
    Ok((AbelianQuotientData::new(g, n)?, tau))
}
