//! Arithmetic in `F_p` and `F_p[x]` for word-sized primes.

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn pow(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero element.
pub fn inv(a: u64, p: u64) -> u64 {
    let (mut t, mut t1) = (0i128, 1i128);
    let (mut r, mut r1) = (p as i128, (a % p) as i128);
    while r1 != 0 {
        let q = r / r1;
        (t, t1) = (t1, t - q * t1);
        (r, r1) = (r1, r - q * r1);
    }
    debug_assert_eq!(r, 1, "{a} is not invertible mod {p}");
    t.rem_euclid(p as i128) as u64
}

/// Quadratic character: 0, 1 or −1.
pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli–Shanks square root of a quadratic residue.
pub fn sqrt(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| legendre(z, p) == -1)?;
    let mut m = s;
    let mut c = pow(z, q, p);
    let mut t = pow(a, q, p);
    let mut r = pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul(tt, tt, p);
            i += 1;
        }
        let b = pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b, p);
        t = mul(t, c, p);
        r = mul(r, b, p);
    }
    Some(r)
}

/// Reduces a signed value into `[0, p)`.
pub fn from_i64(a: i64, p: u64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

/// Polynomials over `F_p`, lowest degree first, without trailing zeros.
pub type Poly = Vec<u64>;

fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

pub fn poly_sub(f: &[u64], g: &[u64], p: u64) -> Poly {
    let n = f.len().max(g.len());
    let out = (0..n)
        .map(|i| sub(f.get(i).copied().unwrap_or(0), g.get(i).copied().unwrap_or(0), p))
        .collect();
    trim(out)
}

/// Remainder of `f` modulo a nonzero `m`.
pub fn poly_rem(f: &[u64], m: &[u64], p: u64) -> Poly {
    let mut r = trim(f.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let coef = mul(r[top], lead_inv, p);
        let shift = top - dm;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = sub(r[shift + i], mul(coef, mi, p), p);
        }
        r = trim(r);
    }
    r
}

pub fn poly_mulmod(f: &[u64], g: &[u64], m: &[u64], p: u64) -> Poly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; f.len() + g.len() - 1];
    for (i, &fi) in f.iter().enumerate() {
        for (j, &gj) in g.iter().enumerate() {
            prod[i + j] = add(prod[i + j], mul(fi, gj, p), p);
        }
    }
    poly_rem(&prod, m, p)
}

/// `base^e mod m`.
pub fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Poly {
    let mut acc = poly_rem(&[1], m, p);
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

pub fn poly_monic(f: &[u64], p: u64) -> Poly {
    let f = trim(f.to_vec());
    match f.last() {
        None => f,
        Some(&lead) => {
            let li = inv(lead, p);
            f.iter().map(|&c| mul(c, li, p)).collect()
        }
    }
}

pub fn poly_gcd(f: &[u64], g: &[u64], p: u64) -> Poly {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    poly_monic(&a, p)
}

/// Exact quotient of `f` by a divisor `g`.
pub fn poly_div_exact(f: &[u64], g: &[u64], p: u64) -> Poly {
    let dg = g.len() - 1;
    let mut r = trim(f.to_vec());
    let mut q = vec![0u64; r.len().saturating_sub(dg)];
    let lead_inv = inv(g[dg], p);
    while r.len() > dg {
        let top = r.len() - 1;
        let coef = mul(r[top], lead_inv, p);
        q[top - dg] = coef;
        for (i, &gi) in g.iter().enumerate() {
            r[top - dg + i] = sub(r[top - dg + i], mul(coef, gi, p), p);
        }
        r = trim(r);
    }
    debug_assert!(r.is_empty());
    q
}

/// Whether a square-free `f` splits into linear factors: `x^p ≡ x mod f`.
pub fn splits_completely(f: &[u64], p: u64) -> bool {
    let f = poly_monic(f, p);
    if f.len() <= 2 {
        return true;
    }
    let xp = poly_powmod(&[0, 1], p, &f, p);
    poly_sub(&xp, &poly_rem(&[0, 1], &f, p), p).is_empty()
}

/// Roots of a square-free polynomial that splits completely, by equal-degree splitting.
pub fn split_roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = poly_monic(f, p);
    match f.len() {
        0 | 1 => return Vec::new(),
        2 => return vec![sub(0, f[0], p)],
        _ => {}
    }
    for delta in 0..p {
        let h = poly_powmod(&[delta, 1], (p - 1) / 2, &f, p);
        let g = poly_gcd(&f, &poly_sub(&h, &[1], p), p);
        if g.len() > 1 && g.len() < f.len() {
            let mut roots = split_roots(&g, p);
            roots.extend(split_roots(&poly_div_exact(&f, &g, p), p));
            return roots;
        }
    }
    unreachable!("equal-degree splitting failed on a split square-free polynomial")
}
