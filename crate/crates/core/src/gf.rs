//! Exact arithmetic for small finite fields GF(p^k), and vectors and square
//! matrices over them.
//!
//! A field element is an integer in `[0, q)` whose base-p digits, little
//! endian, are the coefficients of its polynomial representative (constant
//! term first). This encoding is bit-exact across runs: the modulus for each
//! (p, k) is fixed by a bundled table, with a deterministic
//! smallest-encoding search as fallback for pairs outside the table.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on field size: log/exp tables stay in memory.
pub const MAX_Q: u64 = 1 << 20;

/// Bundled modulus table: (p, k, encoded modulus). The encoding is the
/// little-endian base-p digit value of the monic polynomial including the
/// leading coefficient. Each entry is the smallest-encoded monic irreducible
/// of its degree, so the fallback search reproduces exactly these values.
const MODULUS_TABLE: &[(u64, u32, u64)] = &[
    (2, 1, 2),
    (2, 2, 7),
    (2, 3, 11),
    (2, 4, 19),
    (2, 5, 37),
    (2, 6, 67),
    (2, 7, 131),
    (2, 8, 283),
    (2, 9, 515),
    (2, 10, 1033),
    (2, 11, 2053),
    (2, 12, 4105),
    (2, 13, 8219),
    (2, 14, 16417),
    (2, 15, 32771),
    (2, 16, 65579),
    (2, 17, 131081),
    (2, 18, 262153),
    (2, 19, 524327),
    (2, 20, 1048585),
    (3, 1, 3),
    (3, 2, 10),
    (3, 3, 34),
    (3, 4, 86),
    (3, 5, 250),
    (3, 6, 734),
    (3, 7, 2198),
    (3, 8, 6572),
    (3, 9, 19747),
    (3, 10, 59068),
    (3, 11, 177158),
    (3, 12, 531452),
    (5, 1, 5),
    (5, 2, 27),
    (5, 3, 131),
    (5, 4, 627),
    (5, 5, 3146),
    (5, 6, 15632),
    (5, 7, 78131),
    (5, 8, 390627),
    (7, 1, 7),
    (7, 2, 50),
    (7, 3, 345),
    (7, 4, 2409),
    (7, 5, 16817),
    (7, 6, 117651),
    (7, 7, 823586),
    (11, 1, 11),
    (11, 2, 122),
    (11, 3, 1346),
    (11, 4, 14654),
    (11, 5, 161053),
    (13, 1, 13),
    (13, 2, 171),
    (13, 3, 2199),
    (13, 4, 28563),
    (13, 5, 371347),
    (17, 1, 17),
    (17, 2, 292),
    (17, 3, 4933),
    (17, 4, 83524),
    (19, 1, 19),
    (19, 2, 362),
    (19, 3, 6861),
    (19, 4, 130348),
    (23, 1, 23),
    (23, 2, 530),
    (23, 3, 12193),
    (29, 1, 29),
    (29, 2, 843),
    (29, 3, 24422),
    (31, 1, 31),
    (31, 2, 962),
    (31, 3, 29794),
    (31, 4, 923553),
];

static REGISTRY: OnceLock<Mutex<HashMap<(u64, u32), Arc<FiniteField>>>> = OnceLock::new();

/// GF(p^k) with full exp/log tables over a fixed generator.
pub struct FiniteField {
    pub p: u64,
    pub k: u32,
    pub q: u64,
    /// Monic irreducible modulus, little-endian digits, length k+1.
    modulus: Vec<u64>,
    /// exp[i] = value of g^i for 0 <= i < q-1; a bijection onto nonzero values.
    exp: Vec<u32>,
    /// log[v] for v != 0; log[exp[i]] = i.
    log: Vec<u32>,
    /// Multiplicative generator value.
    pub generator: u32,
}

impl std::fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}
impl Eq for FiniteField {}

pub type Field = Arc<FiniteField>;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn euler_phi(n: u64) -> u64 {
    let mut out = n;
    for p in prime_factors(n) {
        out = out / p * (p - 1);
    }
    out
}

/// Prime factors of n, ascending, without multiplicity.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Polynomial helpers over GF(p), used only during field construction.
// Polys are little-endian digit vectors with no trailing zeros.

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while r.len() >= b.len() && !r.is_empty() {
        let dr = r.len() - 1;
        let c = (r[dr] * lead_inv) % p;
        for i in 0..=db {
            let idx = dr - db + i;
            r[idx] = (r[idx] + p - (c * b[i]) % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    let mut t: i128 = 0;
    let mut newt: i128 = 1;
    let mut r: i128 = p as i128;
    let mut newr: i128 = (a % p) as i128;
    while newr != 0 {
        let qq = r / newr;
        (t, newt) = (newt, t - qq * newt);
        (r, newr) = (newr, r - qq * newr);
    }
    (((t % p as i128) + p as i128) % p as i128) as u64
}

fn value_to_poly(mut v: u64, p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while v > 0 {
        out.push(v % p);
        v /= p;
    }
    out
}

fn poly_to_value(poly: &[u64], p: u64) -> u64 {
    let mut v = 0u64;
    for &d in poly.iter().rev() {
        v = v * p + d;
    }
    v
}

/// True iff the monic polynomial has no monic divisor of degree in 1..=deg/2.
/// A reducible monic polynomial always has such a factor.
fn poly_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        // all monic polys of degree d: low part counts p^d values
        for low in 0..p.pow(d as u32) {
            let mut f = value_to_poly(low, p);
            f.resize(d, 0);
            f.push(1);
            if poly_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn find_modulus(p: u64, k: u32) -> Vec<u64> {
    for &(tp, tk, enc) in MODULUS_TABLE {
        if tp == p && tk == k {
            return value_to_poly(enc, p);
        }
    }
    // deterministic fallback: smallest-encoded monic irreducible of degree k
    let low_count = p.pow(k);
    for low in 0..low_count {
        let mut f = value_to_poly(low, p);
        f.resize(k as usize, 0);
        f.push(1);
        if poly_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomial of every degree exists")
}

impl FiniteField {
    /// Shared handle to GF(p^k); construction is cached per (p, k).
    pub fn get(p: u64, k: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::domain("extension degree must be positive"));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= MAX_Q)
            .ok_or_else(|| Error::resource(format!("field size {p}^{k} exceeds 2^20")))?;
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        {
            let guard = reg.lock().unwrap();
            if let Some(f) = guard.get(&(p, k)) {
                return Ok(f.clone());
            }
        }
        let field = Arc::new(Self::build(p, k, q)?);
        let mut guard = reg.lock().unwrap();
        Ok(guard.entry((p, k)).or_insert(field).clone())
    }

    /// Convenience: field of size q (q must be a prime power).
    pub fn of_order(q: u64) -> Result<Field> {
        let fs = prime_factors(q);
        if fs.len() != 1 {
            return Err(Error::domain(format!("{q} is not a prime power")));
        }
        let p = fs[0];
        let mut k = 0u32;
        let mut t = q;
        while t > 1 {
            t /= p;
            k += 1;
        }
        Self::get(p, k)
    }

    fn build(p: u64, k: u32, q: u64) -> Result<FiniteField> {
        let modulus = find_modulus(p, k);
        if !poly_irreducible(&modulus, p) {
            return Err(Error::internal(format!(
                "bundled modulus for GF({p}^{k}) is reducible"
            )));
        }
        // raw product in the quotient ring, digit arithmetic
        let mulmod = |a: u64, b: u64| -> u64 {
            let pa = value_to_poly(a, p);
            let pb = value_to_poly(b, p);
            let prod = poly_mul(&pa, &pb, p);
            poly_to_value(&poly_rem(&prod, &modulus, p), p)
        };
        let powmod = |mut a: u64, mut e: u64| -> u64 {
            let mut acc = 1u64;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(acc, a);
                }
                a = mulmod(a, a);
                e >>= 1;
            }
            acc
        };
        let factors = prime_factors(q - 1);
        let mut generator = 0u64;
        for g in 2..q {
            if q == 2 {
                generator = 1;
                break;
            }
            if factors.iter().all(|&f| powmod(g, (q - 1) / f) != 1) {
                generator = g;
                break;
            }
        }
        if q == 2 {
            generator = 1;
        }
        if generator == 0 {
            return Err(Error::internal("no multiplicative generator found"));
        }
        let mut exp = vec![0u32; (q - 1) as usize];
        let mut log = vec![u32::MAX; q as usize];
        let mut x = 1u64;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = x as u32;
            if log[x as usize] != u32::MAX {
                return Err(Error::internal("generator order too small"));
            }
            log[x as usize] = i as u32;
            x = mulmod(x, generator);
        }
        if x != 1 {
            return Err(Error::internal("exp table does not close"));
        }
        Ok(FiniteField {
            p,
            k,
            q,
            modulus,
            exp,
            log,
            generator: generator as u32,
        })
    }

    pub fn zero(&self) -> u32 {
        0
    }
    pub fn one(&self) -> u32 {
        1
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (p, mut a, mut b) = (self.p, a as u64, b as u64);
        let mut out = 0u64;
        let mut shift = 1u64;
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * shift;
            a /= p;
            b /= p;
            shift *= p;
        }
        out as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let (p, mut a) = (self.p, a as u64);
        let mut out = 0u64;
        let mut shift = 1u64;
        while a > 0 {
            let d = a % p;
            out += if d == 0 { 0 } else { (p - d) * shift };
            a /= p;
            shift *= p;
        }
        out as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let la = self.log[a as usize] as u64;
        let lb = self.log[b as usize] as u64;
        self.exp[((la + lb) % (self.q - 1)) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::domain("inversion of zero"));
        }
        let la = self.log[a as usize] as u64;
        Ok(self.exp[((self.q - 1 - la) % (self.q - 1)) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^e via the log table; 0^0 = 1.
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let la = self.log[a as usize] as u128;
        let idx = (la * (e as u128 % (self.q as u128 - 1))) % (self.q as u128 - 1);
        self.exp[idx as usize]
    }

    /// Frobenius x -> x^p, the base-field automorphism generator.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p)
    }

    pub fn log_of(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.log[a as usize])
        }
    }

    pub fn exp_of(&self, i: u64) -> u32 {
        self.exp[(i % (self.q - 1)) as usize]
    }

    /// Element from a base-p digit slice (little-endian).
    pub fn from_digits(&self, digits: &[u64]) -> u32 {
        let mut v = 0u64;
        for &d in digits.iter().rev() {
            v = v * self.p + (d % self.p);
        }
        v as u32
    }

    pub fn digits(&self, a: u32) -> Vec<u64> {
        let mut v = a as u64;
        let mut out = vec![0u64; self.k as usize];
        for o in out.iter_mut() {
            *o = v % self.p;
            v /= self.p;
        }
        out
    }

    pub fn modulus_digits(&self) -> &[u64] {
        &self.modulus
    }

    /// Representative in [0, p) for a prime-field element.
    pub fn scalar(&self, n: u64) -> u32 {
        (n % self.p) as u32
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Square matrix over a shared field, row-major.
#[derive(Clone)]
pub struct Matrix {
    pub field: Field,
    pub n: usize,
    pub entries: Vec<u32>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && *self.field == *other.field && self.entries == other.entries
    }
}
impl Eq for Matrix {}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?}", self.n, self.n, self.field)?;
        for r in 0..self.n {
            writeln!(f, "  {:?}", &self.entries[r * self.n..(r + 1) * self.n])?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn new(field: Field, n: usize, entries: Vec<u32>) -> Result<Matrix> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::usage("matrix shape mismatch"));
        }
        if entries.iter().any(|&e| e as u64 >= field.q) {
            return Err(Error::usage("matrix entry outside field"));
        }
        Ok(Matrix { field, n, entries })
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut entries = vec![0u32; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Matrix { field, n, entries }
    }

    pub fn zero(field: Field, n: usize) -> Matrix {
        Matrix {
            field,
            n,
            entries: vec![0u32; n * n],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.entries[r * self.n + c] = v;
    }

    pub fn is_identity(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, &e)| e == u32::from(i % (self.n + 1) == 0))
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, rhs.n);
        let f = &self.field;
        let n = self.n;
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.entries[i * n + l];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.entries[l * n + j];
                    if b != 0 {
                        out[i * n + j] = f.add(out[i * n + j], f.mul(a, b));
                    }
                }
            }
        }
        Matrix {
            field: self.field.clone(),
            n,
            entries: out,
        }
    }

    /// Matrix applied to a column vector of coordinates.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let n = self.n;
        let mut out = vec![0u32; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0u32;
            for j in 0..n {
                let a = self.entries[i * n + j];
                if a != 0 && v[j] != 0 {
                    acc = f.add(acc, f.mul(a, v[j]));
                }
            }
            *o = acc;
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.entries[i * n + j];
            }
        }
        Matrix {
            field: self.field.clone(),
            n,
            entries: out,
        }
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> u32 {
        let f = self.field.clone();
        let n = self.n;
        let mut m = self.entries.clone();
        let mut det = 1u32;
        for col in 0..n {
            let pivot = (col..n).find(|&r| m[r * n + col] != 0);
            let Some(pr) = pivot else {
                return 0;
            };
            if pr != col {
                for j in 0..n {
                    m.swap(pr * n + j, col * n + j);
                }
                det = f.neg(det);
            }
            let pv = m[col * n + col];
            det = f.mul(det, pv);
            let pinv = f.inv(pv).expect("pivot nonzero");
            for r in (col + 1)..n {
                let factor = f.mul(m[r * n + col], pinv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let s = f.mul(factor, m[col * n + j]);
                    m[r * n + j] = f.sub(m[r * n + j], s);
                }
            }
        }
        det
    }

    pub fn inv(&self) -> Result<Matrix> {
        let f = self.field.clone();
        let n = self.n;
        let mut m = self.entries.clone();
        let mut inv = Matrix::identity(f.clone(), n).entries;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| m[r * n + col] != 0)
                .ok_or_else(|| Error::domain("singular matrix"))?;
            if pivot != col {
                for j in 0..n {
                    m.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let pinv = f.inv(m[col * n + col])?;
            for j in 0..n {
                m[col * n + j] = f.mul(m[col * n + j], pinv);
                inv[col * n + j] = f.mul(inv[col * n + j], pinv);
            }
            for r in 0..n {
                if r == col || m[r * n + col] == 0 {
                    continue;
                }
                let factor = m[r * n + col];
                for j in 0..n {
                    let s = f.mul(factor, m[col * n + j]);
                    m[r * n + j] = f.sub(m[r * n + j], s);
                    let s2 = f.mul(factor, inv[col * n + j]);
                    inv[r * n + j] = f.sub(inv[r * n + j], s2);
                }
            }
        }
        Ok(Matrix {
            field: f,
            n,
            entries: inv,
        })
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.field.clone(), self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Kernel basis of the linear map, echelonized rows.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let f = self.field.clone();
        let n = self.n;
        let mut m = self.entries.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
        let mut row = 0usize;
        for col in 0..n {
            let pr = (row..n).find(|&r| m[r * n + col] != 0);
            let Some(pr) = pr else { continue };
            if pr != row {
                for j in 0..n {
                    m.swap(pr * n + j, row * n + j);
                }
            }
            let pinv = f.inv(m[row * n + col]).expect("pivot nonzero");
            for j in 0..n {
                m[row * n + j] = f.mul(m[row * n + j], pinv);
            }
            for r in 0..n {
                if r != row && m[r * n + col] != 0 {
                    let factor = m[r * n + col];
                    for j in 0..n {
                        let s = f.mul(factor, m[row * n + j]);
                        m[r * n + j] = f.sub(m[r * n + j], s);
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
            if row == n {
                break;
            }
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![0u32; n];
            v[free] = 1;
            for &(r, c) in &pivots {
                v[c] = f.neg(m[r * n + free]);
            }
            basis.push(v);
        }
        basis
    }

    /// self - identity.
    pub fn minus_identity(&self) -> Matrix {
        let f = &self.field;
        let mut out = self.clone();
        for i in 0..self.n {
            let v = out.at(i, i);
            out.set(i, i, f.sub(v, 1));
        }
        out
    }

    /// Kronecker product; acts on the tensor product of the column spaces.
    pub fn kronecker(&self, rhs: &Matrix) -> Matrix {
        debug_assert!(*self.field == *rhs.field);
        let (na, nb) = (self.n, rhs.n);
        let n = na * nb;
        let f = self.field.clone();
        let mut out = vec![0u32; n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.at(i, j);
                if a == 0 {
                    continue;
                }
                for r in 0..nb {
                    for c in 0..nb {
                        let b = rhs.at(r, c);
                        if b != 0 {
                            out[(i * nb + r) * n + (j * nb + c)] = f.mul(a, b);
                        }
                    }
                }
            }
        }
        Matrix {
            field: f,
            n,
            entries: out,
        }
    }

    /// Block-diagonal assembly of same-field square matrices.
    pub fn block_diag(blocks: &[Matrix]) -> Matrix {
        let f = blocks[0].field.clone();
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut out = Matrix::zero(f, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    out.set(off + i, off + j, b.at(i, j));
                }
            }
            off += b.n;
        }
        out
    }
}

/// Fixed space of m: basis of ker(m - I) and its cardinality q^nullity.
pub fn fixed_space(m: &Matrix) -> (Vec<Vec<u32>>, u128) {
    let basis = m.minus_identity().kernel_basis();
    let size = (m.field.q as u128).pow(basis.len() as u32);
    (basis, size)
}

// ---------------------------------------------------------------------------
// Packed vector codes
// ---------------------------------------------------------------------------

/// Base-q packed code of a coordinate vector, coordinate 0 least significant.
pub fn encode_vec(coords: &[u32], q: u64) -> u64 {
    let mut code = 0u64;
    for &c in coords.iter().rev() {
        code = code * q + c as u64;
    }
    code
}

pub fn decode_vec(mut code: u64, q: u64, n: usize) -> Vec<u32> {
    let mut out = vec![0u32; n];
    for o in out.iter_mut() {
        *o = (code % q) as u32;
        code /= q;
    }
    out
}

// ---------------------------------------------------------------------------
// Matrix text format
// ---------------------------------------------------------------------------

/// Wire form: field header plus entry rows of element values.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct MatrixJson {
    pub p: u64,
    pub k: u32,
    pub entries: Vec<Vec<u64>>,
}

impl Matrix {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            p: self.field.p,
            k: self.field.k,
            entries: (0..self.n)
                .map(|r| (0..self.n).map(|c| self.at(r, c) as u64).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Matrix> {
        let field = FiniteField::get(j.p, j.k)?;
        let n = j.entries.len();
        if j.entries.iter().any(|r| r.len() != n) {
            return Err(Error::usage("matrix rows must form a square"));
        }
        let entries: Vec<u32> = j
            .entries
            .iter()
            .flatten()
            .map(|&v| {
                if v >= field.q {
                    Err(Error::usage(format!("entry {v} outside field of size {}", field.q)))
                } else {
                    Ok(v as u32)
                }
            })
            .collect::<Result<_>>()?;
        Matrix::new(field, n, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det_cofactor(m: &Matrix) -> u32 {
        let f = &m.field;
        let n = m.n;
        if n == 1 {
            return m.at(0, 0);
        }
        let mut acc = 0u32;
        for j in 0..n {
            let a = m.at(0, j);
            if a == 0 {
                continue;
            }
            let mut sub = Matrix::zero(m.field.clone(), n - 1);
            for r in 1..n {
                let mut cc = 0;
                for c in 0..n {
                    if c == j {
                        continue;
                    }
                    sub.set(r - 1, cc, m.at(r, c));
                    cc += 1;
                }
            }
            let term = f.mul(a, det_cofactor(&sub));
            acc = if j % 2 == 0 {
                f.add(acc, term)
            } else {
                f.sub(acc, term)
            };
        }
        acc
    }

    #[test]
    fn small_field_values() {
        let f5 = FiniteField::get(5, 1).unwrap();
        assert_eq!(f5.mul(2, 3), 1);
        let f4 = FiniteField::get(2, 2).unwrap();
        // value 2 is the class of x; x^2 = x + 1 under x^2+x+1
        assert_eq!(f4.mul(2, 2), 3);
    }

    #[test]
    fn inverses_gf9() {
        let f9 = FiniteField::get(3, 2).unwrap();
        for x in 1..9u32 {
            assert_eq!(f9.mul(f9.inv(x).unwrap(), x), 1);
        }
        assert!(f9.inv(0).is_err());
    }

    #[test]
    fn field_axioms() {
        // exhaustive for q <= 64, random triples beyond
        for (p, k) in [(2, 1), (2, 2), (2, 4), (3, 1), (3, 2), (5, 1), (7, 1), (2, 6)] {
            let f = FiniteField::get(p, k).unwrap();
            let q = f.q as u32;
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
        // larger fields: seeded sample
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(2u64, 10u32), (3, 5), (11, 2), (5, 4)] {
            let f = FiniteField::get(p, k).unwrap();
            for _ in 0..10_000 {
                let a = rng.gen_range(0..f.q) as u32;
                let b = rng.gen_range(0..f.q) as u32;
                let c = rng.gen_range(0..f.q) as u32;
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_of_order_k() {
        for (p, k) in [(2u64, 4u32), (2, 12), (3, 3), (5, 2), (7, 2)] {
            let f = FiniteField::get(p, k).unwrap();
            for a in 0..f.q as u32 {
                for b in 0..f.q as u32 {
                    assert_eq!(
                        f.frobenius(f.add(a, b)),
                        f.add(f.frobenius(a), f.frobenius(b))
                    );
                    assert_eq!(
                        f.frobenius(f.mul(a, b)),
                        f.mul(f.frobenius(a), f.frobenius(b))
                    );
                }
            }
            // order exactly k
            let mut x = f.generator;
            for _ in 0..k {
                x = f.frobenius(x);
            }
            assert_eq!(x, f.generator);
            if k > 1 {
                let mut y = f.generator;
                for _ in 0..k - 1 {
                    y = f.frobenius(y);
                }
                assert_ne!(y, f.generator);
            }
        }
    }

    #[test]
    fn exp_log_bijection() {
        let f = FiniteField::get(2, 4).unwrap();
        for i in 0..15u64 {
            let x = f.exp_of(i);
            assert_eq!(f.log_of(x), Some(i as u32));
        }
    }

    #[test]
    fn identity_apply() {
        let f2 = FiniteField::get(2, 1).unwrap();
        let id = Matrix::identity(f2.clone(), 3);
        for code in 0..8u64 {
            let v = decode_vec(code, 2, 3);
            assert_eq!(id.apply(&v), v);
        }
    }

    #[test]
    fn random_inverse_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let f3 = FiniteField::get(3, 1).unwrap();
        let mut found = 0;
        while found < 100 {
            let entries: Vec<u32> = (0..16).map(|_| rng.gen_range(0..3)).collect();
            let m = Matrix::new(f3.clone(), 4, entries).unwrap();
            if m.det() == 0 {
                continue;
            }
            found += 1;
            assert!(m.mul(&m.inv().unwrap()).is_identity());
        }
    }

    #[test]
    fn det_dual_algorithm() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4usize {
            for (p, k) in [(2u64, 1u32), (3, 1), (5, 1), (2, 2)] {
                let f = FiniteField::get(p, k).unwrap();
                for _ in 0..50 {
                    let entries: Vec<u32> =
                        (0..n * n).map(|_| rng.gen_range(0..f.q) as u32).collect();
                    let m = Matrix::new(f.clone(), n, entries).unwrap();
                    assert_eq!(m.det(), det_cofactor(&m));
                }
            }
        }
    }

    #[test]
    fn fixed_space_brute_force() {
        // every matrix with q^n <= 10^4 in this list is checked exhaustively
        let f2 = FiniteField::get(2, 1).unwrap();
        let id = Matrix::identity(f2.clone(), 4);
        assert_eq!(fixed_space(&id).1, 16);

        // x -> x^4 on GF(16) as a GF(2)-linear map
        let f16 = FiniteField::get(2, 4).unwrap();
        let mut sq2 = Matrix::zero(f2.clone(), 4);
        for j in 0..4 {
            let e = 1u32 << j;
            let img = f16.pow(e, 4);
            for (i, d) in f16.digits(img).iter().enumerate() {
                sq2.set(i, j, *d as u32);
            }
        }
        let (_, size) = fixed_space(&sq2);
        assert_eq!(size, 4);
        let brute = (0..16u64)
            .filter(|&c| {
                let v = decode_vec(c, 2, 4);
                sq2.apply(&v) == v
            })
            .count();
        assert_eq!(brute as u128, size);

        // order-4 element of Q8 <= GL(2,3): x^2+1 has no root in GF(3)
        let f3 = FiniteField::get(3, 1).unwrap();
        let i_mat = Matrix::new(f3, 2, vec![0, 2, 1, 0]).unwrap();
        assert_eq!(fixed_space(&i_mat).1, 1);

        // general brute-force agreement on random small matrices
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (p, k, n) in [(2u64, 1u32, 4usize), (3, 1, 3), (5, 1, 3), (2, 2, 3)] {
            let f = FiniteField::get(p, k).unwrap();
            for _ in 0..20 {
                let entries: Vec<u32> = (0..n * n).map(|_| rng.gen_range(0..f.q) as u32).collect();
                let m = Matrix::new(f.clone(), n, entries).unwrap();
                let (_, size) = fixed_space(&m);
                let total = f.q.pow(n as u32);
                let brute = (0..total)
                    .filter(|&c| {
                        let v = decode_vec(c, f.q, n);
                        m.apply(&v) == v
                    })
                    .count();
                assert_eq!(brute as u128, size);
            }
        }
    }

    #[test]
    fn matrix_json_roundtrip() {
        let f4 = FiniteField::get(2, 2).unwrap();
        let m = Matrix::new(f4, 2, vec![2, 1, 3, 0]).unwrap();
        let j = m.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(Matrix::from_json(&back).unwrap(), m);
    }

    #[test]
    fn vector_code_roundtrip() {
        for q in [2u64, 3, 4, 11] {
            for code in 0..q.pow(3) {
                let v = decode_vec(code, q, 3);
                assert_eq!(encode_vec(&v, q), code);
            }
        }
    }

    #[test]
    fn bundled_moduli_are_smallest_irreducible() {
        // the fallback search must reproduce the bundled values
        for &(p, k, enc) in MODULUS_TABLE.iter() {
            if p.pow(k) > 1 << 14 {
                continue;
            }
            let low_count = p.pow(k);
            let mut found = None;
            for low in 0..low_count {
                let mut f = value_to_poly(low, p);
                f.resize(k as usize, 0);
                f.push(1);
                if poly_irreducible(&f, p) {
                    found = Some(poly_to_value(&f, p));
                    break;
                }
            }
            assert_eq!(found, Some(enc), "modulus mismatch for GF({p}^{k})");
        }
    }
}
