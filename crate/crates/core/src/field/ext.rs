//! Extension field internals: polynomial arithmetic over GF(2^w), the
//! deterministic irreducible-modulus search, and the Frobenius map table.

use super::{FieldError, FieldRepr};

pub(super) struct Extension {
    pub m: usize,
    /// Monic modulus, little-endian coefficients, length m + 1.
    pub modulus: Vec<u16>,
    /// frob[j] = coordinates of (x^j)^q mod modulus, one row per basis element.
    frob: Vec<Vec<u16>>,
}

impl Extension {
    pub fn build(base: &FieldRepr, m: usize) -> Result<Extension, FieldError> {
        let modulus = find_irreducible(base, m)?;
        let q = 1u64 << base.w;
        // image of x under the q-power map
        let x = vec![0u16, 1];
        let xq = powmod(base, &x, q, &modulus);
        // images of every basis element x^j
        let mut frob = Vec::with_capacity(m);
        let mut cur = vec![1u16];
        for _ in 0..m {
            let mut row = normalize(&cur, m);
            row.resize(m, 0);
            frob.push(row);
            cur = mulmod(base, &cur, &xq, &modulus);
        }
        Ok(Extension { m, modulus, frob })
    }

    pub fn mul(&self, base: &FieldRepr, a: &[u16], b: &[u16]) -> Vec<u16> {
        // scalar shortcut: embedded base elements multiply coordinatewise
        if a[1..].iter().all(|&c| c == 0) {
            return scale(base, a[0], b);
        }
        if b[1..].iter().all(|&c| c == 0) {
            return scale(base, b[0], a);
        }
        let prod = poly_mul(base, a, b);
        normalize(&poly_rem(base, prod, &self.modulus), self.m)
    }

    pub fn inv(&self, base: &FieldRepr, a: &[u16]) -> Result<Vec<u16>, FieldError> {
        if a.iter().all(|&c| c == 0) {
            return Err(FieldError::DivisionByZero);
        }
        // extended Euclid over GF(q)[x]
        let mut r0 = self.modulus.clone();
        let mut r1 = trim(a.to_vec());
        let mut s0: Vec<u16> = vec![];
        let mut s1: Vec<u16> = vec![1];
        while deg(&r1) > 0 {
            let (q, r) = poly_divmod(base, &r0, &r1);
            let qs1 = poly_mul(base, &q, &s1);
            let s2 = poly_add(&s0, &qs1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            if r1.is_empty() {
                // a shares a factor with the modulus: impossible for an
                // irreducible modulus and nonzero a
                return Err(FieldError::DivisionByZero);
            }
        }
        // r1 is a nonzero constant; divide it out
        let c_inv = word_inv(base, r1[0])?;
        let inv = s1
            .iter()
            .map(|&c| word_mul(base, c, c_inv))
            .collect::<Vec<_>>();
        Ok(normalize(&inv, self.m))
    }

    pub fn frobenius(&self, base: &FieldRepr, a: &[u16]) -> Vec<u16> {
        let mut out = vec![0u16; self.m];
        for (j, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, &f) in out.iter_mut().zip(&self.frob[j]) {
                *o ^= word_mul(base, c, f);
            }
        }
        out
    }
}

// ---- raw base-field words (duplicated here to avoid borrowing Field) ----

fn word_mul(base: &FieldRepr, a: u16, b: u16) -> u16 {
    if a == 0 || b == 0 {
        return 0;
    }
    base.exp[base.log[a as usize] as usize + base.log[b as usize] as usize]
}

fn word_inv(base: &FieldRepr, a: u16) -> Result<u16, FieldError> {
    if a == 0 {
        return Err(FieldError::DivisionByZero);
    }
    Ok(base.exp[(base.order - base.log[a as usize] as u32) as usize])
}

fn scale(base: &FieldRepr, s: u16, a: &[u16]) -> Vec<u16> {
    a.iter().map(|&c| word_mul(base, s, c)).collect()
}

// ---- polynomials over GF(q), little-endian coefficient vectors ----

fn trim(mut p: Vec<u16>) -> Vec<u16> {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn deg(p: &[u16]) -> isize {
    p.len() as isize - 1
}

fn normalize(p: &[u16], m: usize) -> Vec<u16> {
    let mut out = p.to_vec();
    out.resize(m, 0);
    out
}

fn poly_add(a: &[u16], b: &[u16]) -> Vec<u16> {
    let n = a.len().max(b.len());
    let mut out = vec![0u16; n];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a.get(i).copied().unwrap_or(0) ^ b.get(i).copied().unwrap_or(0);
    }
    trim(out)
}

fn poly_mul(base: &FieldRepr, a: &[u16], b: &[u16]) -> Vec<u16> {
    let (a, b) = (trim(a.to_vec()), trim(b.to_vec()));
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u16; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] ^= word_mul(base, ai, bj);
        }
    }
    trim(out)
}

fn poly_rem(base: &FieldRepr, mut a: Vec<u16>, modulus: &[u16]) -> Vec<u16> {
    a = trim(a);
    let dm = modulus.len() - 1;
    let lead_inv = word_inv(base, modulus[dm]).expect("monic modulus");
    while a.len() > dm {
        let shift = a.len() - 1 - dm;
        let factor = word_mul(base, *a.last().unwrap(), lead_inv);
        for (i, &mc) in modulus.iter().enumerate() {
            a[shift + i] ^= word_mul(base, factor, mc);
        }
        a = trim(a);
    }
    a
}

fn poly_divmod(base: &FieldRepr, a: &[u16], b: &[u16]) -> (Vec<u16>, Vec<u16>) {
    let mut rem = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = word_inv(base, b[db]).expect("nonzero divisor");
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let mut quot = vec![0u16; rem.len() - db];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let factor = word_mul(base, *rem.last().unwrap(), lead_inv);
        quot[shift] = factor;
        for (i, &bc) in b.iter().enumerate() {
            rem[shift + i] ^= word_mul(base, factor, bc);
        }
        rem = trim(rem);
        if rem.is_empty() {
            break;
        }
    }
    (trim(quot), rem)
}

fn mulmod(base: &FieldRepr, a: &[u16], b: &[u16], modulus: &[u16]) -> Vec<u16> {
    poly_rem(base, poly_mul(base, a, b), modulus)
}

fn poly_gcd(base: &FieldRepr, mut a: Vec<u16>, mut b: Vec<u16>) -> Vec<u16> {
    a = trim(a);
    b = trim(b);
    while !b.is_empty() {
        let r = poly_rem(base, a, &b);
        a = b;
        b = r;
    }
    a
}

/// p^e mod modulus by square and multiply.
fn powmod(base: &FieldRepr, p: &[u16], mut e: u64, modulus: &[u16]) -> Vec<u16> {
    let mut acc = vec![1u16];
    let mut cur = poly_rem(base, p.to_vec(), modulus);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(base, poly_mul(base, &acc, &cur), modulus);
        }
        cur = poly_rem(base, poly_mul(base, &cur, &cur), modulus);
        e >>= 1;
    }
    acc
}

/// x^(q^steps) mod modulus via repeated q-th powering.
fn x_q_power(base: &FieldRepr, steps: usize, modulus: &[u16]) -> Vec<u16> {
    let q = 1u64 << base.w;
    let mut h = vec![0u16, 1];
    for _ in 0..steps {
        h = powmod(base, &h, q, modulus);
    }
    h
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_irreducible(base: &FieldRepr, modulus: &[u16], m: usize) -> bool {
    // x^(q^m) must equal x mod f, and x^(q^(m/p)) - x must be coprime to f
    // for every prime p dividing m.
    let xqm = x_q_power(base, m, modulus);
    if trim(poly_add(&xqm, &[0, 1])) != Vec::<u16>::new() {
        return false;
    }
    for p in prime_divisors(m) {
        let h = x_q_power(base, m / p, modulus);
        let diff = poly_add(&h, &[0, 1]);
        let g = poly_gcd(base, modulus.to_vec(), diff);
        if deg(&g) != 0 {
            return false;
        }
    }
    true
}

/// First monic irreducible x^m + tail in a fixed enumeration of tails by
/// increasing value in base q.
fn find_irreducible(base: &FieldRepr, m: usize) -> Result<Vec<u16>, FieldError> {
    let q = (base.order + 1) as u64;
    let limit = q.saturating_pow(4).min(1 << 24);
    for t in 1..limit {
        let mut modulus = vec![0u16; m + 1];
        modulus[m] = 1;
        let mut v = t;
        let mut i = 0;
        while v > 0 && i < m {
            modulus[i] = (v % q) as u16;
            v /= q;
            i += 1;
        }
        if v > 0 {
            break;
        }
        if is_irreducible(base, &modulus, m) {
            return Ok(modulus);
        }
    }
    Err(FieldError::NoIrreducible(m))
}
