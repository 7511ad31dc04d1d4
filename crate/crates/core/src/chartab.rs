//! Exact character tables of enumerated groups via the class-algebra
//! eigenvector method, p-block distributions with defects, and the degree
//! and class-size statistics feeding the divisibility corollaries.
//!
//! Character values live in Z[zeta_m] for m the group exponent, represented
//! as integer coefficient vectors modulo the m-th cyclotomic polynomial, so
//! orthogonality and block congruences are checked exactly. The eigenvector
//! stage works over a prime field GF(l) with l = 1 (mod m), splitting common
//! eigenspaces of the class-sum matrices with seeded random combinations and
//! verifying every resulting vector against all class sums before lifting.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{prime_factors, FiniteField};
use crate::grp::{p_valuation, EnumeratedGroup, Subgroup};

/// Class-count cap: tables beyond this are out of scope.
pub const CHARTAB_CLASS_CAP: usize = 60;
/// Group-order cap for table computation.
pub const CHARTAB_ORDER_CAP: u64 = 100_000;

// ---------------------------------------------------------------------------
// Cyclotomic integers
// ---------------------------------------------------------------------------

pub type Cyclo = Vec<i128>;

/// Arithmetic context for Z[zeta_m]: coefficient vectors of length phi(m)
/// reduced modulo the m-th cyclotomic polynomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycloCtx {
    pub m: u64,
    pub phi: usize,
    /// x^t reduced, for t up to max(2 phi - 2, m).
    red: Vec<Vec<i128>>,
}

fn cyclotomic_poly(m: u64, memo: &mut HashMap<u64, Vec<i128>>) -> Vec<i128> {
    if let Some(p) = memo.get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by the product of lower cyclotomic polynomials
    let mut num = vec![0i128; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d != 0 {
            continue;
        }
        let div = cyclotomic_poly(d, memo);
        num = poly_divide_exact(&num, &div);
    }
    memo.insert(m, num.clone());
    num
}

fn poly_divide_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i128; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        debug_assert_eq!(c % den[dd], 0);
        let q = c / den[dd];
        quot[i - dd] = q;
        for (j, &dc) in den.iter().enumerate() {
            rem[i - dd + j] -= q * dc;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

impl CycloCtx {
    pub fn new(m: u64) -> CycloCtx {
        let mut memo = HashMap::new();
        let phi_poly = cyclotomic_poly(m, &mut memo);
        let phi = phi_poly.len() - 1;
        let tmax = (2 * phi).max(m as usize + 1);
        let mut red: Vec<Vec<i128>> = Vec::with_capacity(tmax);
        for t in 0..phi {
            let mut v = vec![0i128; phi];
            v[t] = 1;
            red.push(v);
        }
        for t in phi..tmax {
            // x^t = x * x^(t-1), then fold the overflow term with
            // x^phi = -(phi_poly lower part)
            let prev = red[t - 1].clone();
            let mut v = vec![0i128; phi + 1];
            for (i, &c) in prev.iter().enumerate() {
                v[i + 1] = c;
            }
            let top = v[phi];
            let mut out = vec![0i128; phi];
            for i in 0..phi {
                out[i] = v[i] - top * phi_poly[i];
            }
            red.push(out);
        }
        CycloCtx { m, phi, red }
    }

    pub fn zero(&self) -> Cyclo {
        vec![0i128; self.phi]
    }

    pub fn from_int(&self, n: i128) -> Cyclo {
        let mut v = self.zero();
        if self.phi > 0 {
            v[0] = n;
        }
        v
    }

    pub fn zeta_pow(&self, j: u64) -> Cyclo {
        self.red[(j % self.m) as usize].clone()
    }

    pub fn add(&self, a: &Cyclo, b: &Cyclo) -> Cyclo {
        a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
    }

    pub fn sub(&self, a: &Cyclo, b: &Cyclo) -> Cyclo {
        a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
    }

    pub fn scale(&self, a: &Cyclo, c: i128) -> Cyclo {
        a.iter().map(|x| x * c).collect()
    }

    pub fn mul(&self, a: &Cyclo, b: &Cyclo) -> Cyclo {
        let mut conv = vec![0i128; 2 * self.phi.max(1)];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    conv[i + j] += x * y;
                }
            }
        }
        let mut out = self.zero();
        for (t, &c) in conv.iter().enumerate() {
            if c != 0 {
                for (i, &r) in self.red[t].iter().enumerate() {
                    out[i] += c * r;
                }
            }
        }
        out
    }

    /// Complex conjugation zeta -> zeta^(m-1).
    pub fn conj(&self, a: &Cyclo) -> Cyclo {
        let mut out = self.zero();
        for (i, &c) in a.iter().enumerate() {
            if c != 0 {
                let t = ((self.m - i as u64 % self.m) % self.m) as usize;
                for (j, &r) in self.red[t].iter().enumerate() {
                    out[j] += c * r;
                }
            }
        }
        out
    }

    pub fn is_zero(&self, a: &Cyclo) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Coefficient-wise exact division by an integer; None when not exact.
    pub fn div_exact(&self, a: &Cyclo, d: i128) -> Option<Cyclo> {
        let mut out = self.zero();
        for (i, &c) in a.iter().enumerate() {
            if c % d != 0 {
                return None;
            }
            out[i] = c / d;
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// Mod-l arithmetic
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct ModL {
    l: u64,
}

impl ModL {
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.l
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.l - b % self.l) % self.l
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.l as u128) as u64
    }
    fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        a %= self.l;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }
    fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.l - 2)
    }
}

fn is_prime_u64(n: u64) -> bool {
    n >= 2 && prime_factors(n) == vec![n]
}

// ---------------------------------------------------------------------------
// Echelon bases over GF(l)
// ---------------------------------------------------------------------------

struct EchelonL {
    ml: ModL,
    width: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl EchelonL {
    fn new(ml: ModL, width: usize) -> Self {
        EchelonL {
            ml,
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }
    fn insert(&mut self, v: &[u64]) -> bool {
        let ml = self.ml;
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            let c = w[p];
            if c != 0 {
                for i in 0..self.width {
                    w[i] = ml.sub(w[i], ml.mul(c, row[i]));
                }
            }
        }
        let Some(pivot) = w.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = ml.inv(w[pivot]);
        for c in w.iter_mut() {
            *c = ml.mul(*c, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[pivot];
            if c != 0 {
                for i in 0..self.width {
                    row[i] = ml.sub(row[i], ml.mul(c, w[i]));
                }
            }
        }
        let pos = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(pos, pivot);
        self.rows.insert(pos, w);
        true
    }
    fn coords_of(&self, v: &[u64]) -> Option<Vec<u64>> {
        let ml = self.ml;
        let mut w = v.to_vec();
        let mut coords = vec![0u64; self.rows.len()];
        for (i, (row, &p)) in self.rows.iter().zip(self.pivots.iter()).enumerate() {
            let c = w[p];
            coords[i] = c;
            if c != 0 {
                for j in 0..self.width {
                    w[j] = ml.sub(w[j], ml.mul(c, row[j]));
                }
            }
        }
        w.iter().all(|&c| c == 0).then_some(coords)
    }
}

// ---------------------------------------------------------------------------
// Character tables
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharTable {
    pub group_order: u64,
    pub m: u64,
    pub ctx: CycloCtx,
    pub class_sizes: Vec<u64>,
    pub class_orders: Vec<u32>,
    pub class_reps: Vec<u32>,
    pub inverse_class: Vec<usize>,
    pub degrees: Vec<u64>,
    /// values[character][class] in Z[zeta_m].
    pub values: Vec<Vec<Cyclo>>,
}

fn charpoly_mod_l(ml: ModL, a: &[Vec<u64>]) -> Vec<u64> {
    // det(A - x I) coefficients by Lagrange interpolation at x = 0..d
    let d = a.len();
    let det_at = |x: u64| -> u64 {
        let mut m: Vec<Vec<u64>> = a.to_vec();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ml.sub(row[i], x);
        }
        let mut det = 1u64;
        for col in 0..d {
            let Some(pr) = (col..d).find(|&r| m[r][col] != 0) else {
                return 0;
            };
            if pr != col {
                m.swap(pr, col);
                det = ml.sub(0, det);
            }
            let pv = m[col][col];
            det = ml.mul(det, pv);
            let pinv = ml.inv(pv);
            for r in col + 1..d {
                let factor = ml.mul(m[r][col], pinv);
                if factor == 0 {
                    continue;
                }
                for c in col..d {
                    let s = ml.mul(factor, m[col][c]);
                    m[r][c] = ml.sub(m[r][c], s);
                }
            }
        }
        det
    };
    // Lagrange interpolation on points 0..=d
    let pts: Vec<u64> = (0..=d as u64).collect();
    let vals: Vec<u64> = pts.iter().map(|&x| det_at(x)).collect();
    let mut coeffs = vec![0u64; d + 1];
    for (i, (&xi, &yi)) in pts.iter().zip(vals.iter()).enumerate() {
        // basis polynomial prod_{j != i} (x - xj)/(xi - xj)
        let mut basis = vec![0u64; d + 1];
        basis[0] = 1;
        let mut deg = 0;
        let mut denom = 1u64;
        for (j, &xj) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            // multiply basis by (x - xj)
            let mut next = vec![0u64; d + 1];
            for t in 0..=deg {
                next[t + 1] = ml.add(next[t + 1], basis[t]);
                next[t] = ml.sub(next[t], ml.mul(basis[t], xj));
            }
            basis = next;
            deg += 1;
            denom = ml.mul(denom, ml.sub(xi, xj));
        }
        let scale = ml.mul(yi, ml.inv(denom));
        for t in 0..=d {
            coeffs[t] = ml.add(coeffs[t], ml.mul(basis[t], scale));
        }
    }
    coeffs
}

fn kernel_mod_l(ml: ModL, a: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let d = a.len();
    let mut m = a.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rr = 0;
    for col in 0..d {
        let Some(pr) = (rr..d).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(pr, rr);
        let inv = ml.inv(m[rr][col]);
        for c in 0..d {
            m[rr][c] = ml.mul(m[rr][c], inv);
        }
        for r in 0..d {
            if r != rr && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..d {
                    let s = ml.mul(f, m[rr][c]);
                    m[r][c] = ml.sub(m[r][c], s);
                }
            }
        }
        pivots.push((rr, col));
        rr += 1;
        if rr == d {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut out = Vec::new();
    for free in 0..d {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; d];
        v[free] = 1;
        for &(r, c) in &pivots {
            v[c] = ml.sub(0, m[r][free]);
        }
        out.push(v);
    }
    out
}

/// Exact character table by the class-algebra eigenvector method.
pub fn char_table(g: &EnumeratedGroup, seed: u64) -> Result<CharTable> {
    let n = g.order();
    if n > CHARTAB_ORDER_CAP {
        return Err(Error::resource("group order exceeds the table cap"));
    }
    let classes = g.conjugacy_classes().clone();
    let k = classes.count();
    if k > CHARTAB_CLASS_CAP {
        return Err(Error::resource(format!(
            "{k} classes exceed the table cap {CHARTAB_CLASS_CAP}"
        )));
    }
    let m = g.exponent();
    let ctx = CycloCtx::new(m);

    // structure constants: a[i][j][l] with (M_i)_{j l} = a_ijl
    let mut struct_consts = vec![vec![vec![0u64; k]; k]; k];
    for j in 0..k {
        let rep_j = classes.reps[j];
        for i in 0..k {
            let mut counts = vec![0u64; k];
            for &x in &classes.members[i] {
                let l = classes.class_of[g.mul(x, rep_j) as usize] as usize;
                counts[l] += 1;
            }
            for l in 0..k {
                let pairs = counts[l] * classes.sizes[j];
                if pairs % classes.sizes[l] != 0 {
                    return Err(Error::internal("non-integral structure constant"));
                }
                struct_consts[i][j][l] = pairs / classes.sizes[l];
            }
        }
    }

    let sqrt2n = (2.0 * (n as f64).sqrt()).ceil() as u64;
    let mut l_prime = m + 1;
    let mut retries_left = 3;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    'retry: loop {
        // least prime l = 1 mod m, l > 2 sqrt(n), l coprime to n, and large
        // enough for charpoly interpolation
        while !(is_prime_u64(l_prime)
            && l_prime > sqrt2n
            && l_prime > k as u64 + 1
            && n % l_prime != 0)
        {
            l_prime += m;
        }
        let ml = ModL { l: l_prime };
        let mats: Vec<Vec<Vec<u64>>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).map(|l| struct_consts[i][j][l] % l_prime).collect())
                    .collect()
            })
            .collect();

        // split common eigenspaces with random class-sum combinations
        let mut subspaces: Vec<Vec<Vec<u64>>> = vec![(0..k)
            .map(|i| {
                let mut v = vec![0u64; k];
                v[i] = 1;
                v
            })
            .collect()];
        for _round in 0..60 {
            if subspaces.iter().all(|s| s.len() == 1) {
                break;
            }
            let combo: Vec<u64> = (0..k).map(|_| rng.gen_range(0..l_prime)).collect();
            let apply_combo = |v: &[u64]| -> Vec<u64> {
                let mut out = vec![0u64; k];
                for (i, c) in combo.iter().enumerate() {
                    if *c == 0 {
                        continue;
                    }
                    // (M_i v)_j = sum_l a_ijl v_l
                    for j in 0..k {
                        let mut acc = 0u64;
                        for l in 0..k {
                            if v[l] != 0 && mats[i][j][l] != 0 {
                                acc = ml.add(acc, ml.mul(mats[i][j][l], v[l]));
                            }
                        }
                        out[j] = ml.add(out[j], ml.mul(*c, acc));
                    }
                }
                out
            };
            let mut next: Vec<Vec<Vec<u64>>> = Vec::new();
            for s in subspaces {
                if s.len() == 1 {
                    next.push(s);
                    continue;
                }
                let mut ech = EchelonL::new(ml, k);
                for row in &s {
                    ech.insert(row);
                }
                let d = ech.rows.len();
                // restriction of the combo to the subspace
                let mut restr = vec![vec![0u64; d]; d];
                let mut ok = true;
                for (i, row) in ech.rows.iter().enumerate() {
                    let img = apply_combo(row);
                    match ech.coords_of(&img) {
                        Some(coords) => {
                            for (j, &c) in coords.iter().enumerate() {
                                restr[i][j] = c;
                            }
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    next.push(ech.rows.clone());
                    continue;
                }
                // transpose: we act on coordinate columns
                let mut restr_t = vec![vec![0u64; d]; d];
                for i in 0..d {
                    for j in 0..d {
                        restr_t[i][j] = restr[j][i];
                    }
                }
                let cp = charpoly_mod_l(ml, &restr_t);
                // root scan over GF(l)
                let mut split: Vec<Vec<Vec<u64>>> = Vec::new();
                for lambda in 0..l_prime {
                    // evaluate charpoly
                    let mut acc = 0u64;
                    for &c in cp.iter().rev() {
                        acc = ml.add(ml.mul(acc, lambda), c);
                    }
                    if acc != 0 {
                        continue;
                    }
                    let mut shifted = restr_t.clone();
                    for (i, row) in shifted.iter_mut().enumerate() {
                        row[i] = ml.sub(row[i], lambda);
                    }
                    let kern = kernel_mod_l(ml, &shifted);
                    if kern.is_empty() {
                        continue;
                    }
                    // lift back to ambient coordinates
                    let lifted: Vec<Vec<u64>> = kern
                        .iter()
                        .map(|coords| {
                            let mut v = vec![0u64; k];
                            for (ci, &c) in coords.iter().enumerate() {
                                if c != 0 {
                                    for t in 0..k {
                                        v[t] = ml.add(v[t], ml.mul(c, ech.rows[ci][t]));
                                    }
                                }
                            }
                            v
                        })
                        .collect();
                    split.push(lifted);
                }
                if split.len() <= 1 {
                    next.push(ech.rows.clone());
                } else {
                    next.extend(split);
                }
            }
            subspaces = next;
        }
        if subspaces.len() != k || subspaces.iter().any(|s| s.len() != 1) {
            retries_left -= 1;
            if retries_left == 0 {
                return Err(Error::internal(
                    "eigenspace splitting did not converge for any tried modulus",
                ));
            }
            l_prime += m;
            continue 'retry;
        }

        // verify common eigenvectors of every class-sum matrix and normalize
        let mut omegas: Vec<Vec<u64>> = Vec::with_capacity(k);
        for s in &subspaces {
            let v = &s[0];
            if v[0] == 0 {
                retries_left -= 1;
                if retries_left == 0 {
                    return Err(Error::internal("eigenvector with zero identity component"));
                }
                l_prime += m;
                continue 'retry;
            }
            let norm = ml.inv(v[0]);
            let u: Vec<u64> = v.iter().map(|&c| ml.mul(c, norm)).collect();
            for i in 0..k {
                // M_i u = u_i * u
                for j in 0..k {
                    let mut acc = 0u64;
                    for l in 0..k {
                        acc = ml.add(acc, ml.mul(mats[i][j][l], u[l]));
                    }
                    if acc != ml.mul(u[i], u[j]) {
                        return Err(Error::internal("not a common class-sum eigenvector"));
                    }
                }
            }
            omegas.push(u);
        }

        // inverse classes
        let inverse_class: Vec<usize> = (0..k)
            .map(|j| classes.class_of[g.inv_of(classes.reps[j]) as usize] as usize)
            .collect();

        // degrees from the orthogonality normalization
        let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0 && d * d <= n).collect();
        let mut degrees = Vec::with_capacity(k);
        for u in &omegas {
            let mut s = 0u64;
            for j in 0..k {
                let term = ml.mul(u[j], u[inverse_class[j]]);
                s = ml.add(s, ml.mul(term, ml.inv(classes.sizes[j] % l_prime)));
            }
            let t = ml.mul(n % l_prime, ml.inv(s));
            let found: Vec<u64> = divisors
                .iter()
                .copied()
                .filter(|&d| ml.mul(d, d) == t)
                .collect();
            if found.len() != 1 {
                return Err(Error::internal("degree recovery was not unique"));
            }
            degrees.push(found[0]);
        }
        if degrees.iter().map(|d| d * d).sum::<u64>() != n {
            return Err(Error::internal("degree squares do not sum to the order"));
        }

        // primitive m-th root of unity mod l
        let gen_l = (2..l_prime)
            .find(|&a| {
                prime_factors(l_prime - 1)
                    .iter()
                    .all(|&f| ml.pow(a, (l_prime - 1) / f) != 1)
            })
            .ok_or_else(|| Error::internal("no generator mod l"))?;
        let w_root = ml.pow(gen_l, (l_prime - 1) / m);

        // lift values to Z[zeta_m] through the power map
        let mut values: Vec<Vec<Cyclo>> = Vec::with_capacity(k);
        for (ci, u) in omegas.iter().enumerate() {
            let d = degrees[ci];
            let mut row: Vec<Cyclo> = Vec::with_capacity(k);
            for j in 0..k {
                let rep = classes.reps[j];
                let mj = g.order_of(rep) as u64;
                let z = ml.pow(w_root, m / mj);
                // chi(rep^i) mod l for i in 0..mj
                let chis: Vec<u64> = (0..mj)
                    .map(|i| {
                        let cls = classes.class_of[g.pow_index(rep, i) as usize] as usize;
                        ml.mul(
                            ml.mul(d % l_prime, u[cls]),
                            ml.inv(classes.sizes[cls] % l_prime),
                        )
                    })
                    .collect();
                let mj_inv = ml.inv(mj % l_prime);
                let mut val = ctx.zero();
                for t in 0..mj {
                    let mut mu = 0u64;
                    for (i, &chi) in chis.iter().enumerate() {
                        let zpow = ml.pow(z, (mj - t % mj) * i as u64 % mj);
                        mu = ml.add(mu, ml.mul(chi, zpow));
                    }
                    mu = ml.mul(mu, mj_inv);
                    if mu > d {
                        return Err(Error::internal(
                            "eigenvalue multiplicity exceeds the degree",
                        ));
                    }
                    if mu != 0 {
                        let zt = ctx.zeta_pow(m / mj * t);
                        val = ctx.add(&val, &ctx.scale(&zt, mu as i128));
                    }
                }
                row.push(val);
            }
            values.push(row);
        }

        // canonical order: by degree, then value vectors lexicographically
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| {
            (degrees[x], &values[x]).cmp(&(degrees[y], &values[y]))
        });
        let degrees: Vec<u64> = order.iter().map(|&i| degrees[i]).collect();
        let values: Vec<Vec<Cyclo>> = order.iter().map(|&i| values[i].clone()).collect();

        let table = CharTable {
            group_order: n,
            m,
            ctx,
            class_sizes: classes.sizes.clone(),
            class_orders: classes.reps.iter().map(|&r| g.order_of(r)).collect(),
            class_reps: classes.reps.clone(),
            inverse_class,
            degrees,
            values,
        };
        verify_orthogonality(&table)?;
        return Ok(table);
    }
}

/// Exact row and column orthogonality in Z[zeta_m].
pub fn verify_orthogonality(t: &CharTable) -> Result<()> {
    let k = t.degrees.len();
    let ctx = &t.ctx;
    let n = t.group_order as i128;
    for a in 0..k {
        for b in 0..k {
            let mut acc = ctx.zero();
            for j in 0..k {
                let term = ctx.mul(&t.values[a][j], &ctx.conj(&t.values[b][j]));
                acc = ctx.add(&acc, &ctx.scale(&term, t.class_sizes[j] as i128));
            }
            let expect = if a == b { ctx.from_int(n) } else { ctx.zero() };
            if acc != expect {
                return Err(Error::internal(format!(
                    "row orthogonality fails for characters {a}, {b}"
                )));
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            let mut acc = ctx.zero();
            for c in 0..k {
                let term = ctx.mul(&t.values[c][i], &ctx.conj(&t.values[c][j]));
                acc = ctx.add(&acc, &term);
            }
            let expect = if i == j {
                ctx.from_int(n / t.class_sizes[i] as i128)
            } else {
                ctx.zero()
            };
            if acc != expect {
                return Err(Error::internal(format!(
                    "column orthogonality fails for classes {i}, {j}"
                )));
            }
        }
    }
    // degrees divide the group order
    for &d in &t.degrees {
        if t.group_order % d != 0 {
            return Err(Error::internal("a degree does not divide the group order"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// p-blocks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockData {
    pub p: u64,
    pub n: u32,
    /// partition of character indices (canonical table order)
    pub blocks: Vec<Vec<usize>>,
    /// defect of each block
    pub defects: Vec<u32>,
    /// defect of each character
    pub char_defects: Vec<u32>,
}

/// p-block partition by exact central-character congruence: omega values are
/// reduced through zeta_m -> zeta_(m') -> GF(p^f), killing the p-power part.
pub fn p_blocks(t: &CharTable, p: u64) -> Result<BlockData> {
    let k = t.degrees.len();
    let n_val = p_valuation(t.group_order, p);
    let char_defects: Vec<u32> = t
        .degrees
        .iter()
        .map(|&d| n_val - p_valuation(d, p))
        .collect();
    if n_val == 0 {
        // single convention: every character alone, defect 0
        return Ok(BlockData {
            p,
            n: 0,
            blocks: (0..k).map(|i| vec![i]).collect(),
            defects: vec![0; k],
            char_defects,
        });
    }
    // m = p^alpha m'
    let m = t.m;
    let mut mp = m;
    let mut p_alpha = 1u64;
    while mp % p == 0 {
        mp /= p;
        p_alpha *= p;
    }
    // f = multiplicative order of p mod m'
    let f = if mp == 1 {
        1
    } else {
        let mut f = 1u64;
        let mut acc = p % mp;
        while acc != 1 {
            acc = acc * p % mp;
            f += 1;
        }
        f
    };
    let field = FiniteField::get(p, f as u32).map_err(|_| {
        Error::resource(format!(
            "reduction field GF({p}^{f}) exceeds the field cap"
        ))
    })?;
    // theta: primitive m'-th root; Theta = theta^c with c = (p^alpha)^{-1} mod m'
    let theta = if mp == 1 { 1 } else { field.exp_of((field.q - 1) / mp) };
    let c = if mp == 1 {
        0
    } else {
        (1..mp).find(|&c| c * (p_alpha % mp) % mp == 1).unwrap()
    };
    let theta_c = field.pow(theta, c);
    let reduce = |v: &Cyclo| -> Result<u32> {
        let mut acc = 0u32;
        let mut pw = 1u32;
        for &coef in v {
            let mut c_mod = coef % p as i128;
            if c_mod < 0 {
                c_mod += p as i128;
            }
            if c_mod != 0 {
                acc = field.add(acc, field.mul(field.scalar(c_mod as u64), pw));
            }
            pw = field.mul(pw, theta_c);
        }
        Ok(acc)
    };

    // omega values: |C_j| chi(g_j) / chi(1), exact in Z[zeta]
    let ctx = &t.ctx;
    let mut signatures: Vec<Vec<u32>> = Vec::with_capacity(k);
    for ci in 0..k {
        let d = t.degrees[ci] as i128;
        let mut sig = Vec::with_capacity(k);
        for j in 0..k {
            let scaled = ctx.scale(&t.values[ci][j], t.class_sizes[j] as i128);
            let omega = ctx.div_exact(&scaled, d).ok_or_else(|| {
                Error::internal("central character is not an algebraic integer")
            })?;
            sig.push(reduce(&omega)?);
        }
        signatures.push(sig);
    }
    let mut groups: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    for (i, sig) in signatures.iter().enumerate() {
        groups.entry(sig.clone()).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = groups.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    let defects: Vec<u32> = blocks
        .iter()
        .map(|b| b.iter().map(|&i| char_defects[i]).max().unwrap())
        .collect();
    Ok(BlockData {
        p,
        n: n_val,
        blocks,
        defects,
        char_defects,
    })
}

/// Block-partition invariants: blocks partition Irr, defects are the
/// maxima of their members, and zero-defect characters sit alone.
pub fn block_invariants_hold(t: &CharTable, b: &BlockData) -> bool {
    let k = t.degrees.len();
    let mut seen = vec![false; k];
    for blk in &b.blocks {
        for &i in blk {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return false;
    }
    for (blk, &d) in b.blocks.iter().zip(b.defects.iter()) {
        if blk.iter().map(|&i| b.char_defects[i]).max() != Some(d) {
            return false;
        }
    }
    // defect-zero characters are alone in their blocks
    for (blk, &d) in b.blocks.iter().zip(b.defects.iter()) {
        let has_zero = blk.iter().any(|&i| b.char_defects[i] == 0);
        if has_zero && (blk.len() != 1 || d != 0) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Degree statistics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeStats {
    pub p: u64,
    /// max_chi v_p(chi(1))
    pub a: u32,
    /// largest irreducible character degree of a Sylow p-subgroup
    pub b_p: u64,
    /// derived length of the Sylow p-subgroup
    pub dl_p: u32,
    /// largest conjugacy class size of the Sylow p-subgroup
    pub b_star_p: u64,
    /// order of the derived subgroup of the Sylow p-subgroup
    pub p_derived_order: u64,
    pub rho: Vec<u64>,
    pub sigma: usize,
    pub rho_star: Vec<u64>,
    pub sigma_star: usize,
    pub sylow_order: u64,
}

pub fn degree_stats(
    g: &EnumeratedGroup,
    t: &CharTable,
    p: u64,
    seed: u64,
) -> Result<DegreeStats> {
    let a = t
        .degrees
        .iter()
        .map(|&d| p_valuation(d, p))
        .max()
        .unwrap_or(0);
    let syl = g.sylow(p)?;
    let pgrp = EnumeratedGroup::from_subgroup(g, &syl);
    let (b_p, dl_p, b_star_p, p_derived_order) = if pgrp.order() == 1 {
        (1, 0, 1, 1)
    } else {
        let pt = char_table(&pgrp, seed ^ 0x5115)?;
        let b_p = *pt.degrees.iter().max().unwrap();
        let dl_p = pgrp
            .derived_length_of(&pgrp.whole())
            .ok_or_else(|| Error::internal("p-group not solvable"))?;
        let b_star = *pgrp.conjugacy_classes().sizes.iter().max().unwrap();
        let der = pgrp.derived_subgroup(&pgrp.whole()).order();
        (b_p, dl_p, b_star, der)
    };
    let mut rho: Vec<u64> = t
        .degrees
        .iter()
        .flat_map(|&d| prime_factors(d))
        .collect();
    rho.sort_unstable();
    rho.dedup();
    let sigma = t
        .degrees
        .iter()
        .map(|&d| prime_factors(d).len())
        .max()
        .unwrap_or(0);
    // rho* = primes of |G / Z(G)|; sigma* from class sizes
    let whole: Vec<u32> = (0..g.order() as u32).collect();
    let center = g.centralizer(&whole, &g.gens.clone());
    let rho_star = prime_factors(g.order() / center.len() as u64);
    let sigma_star = g
        .conjugacy_classes()
        .sizes
        .iter()
        .map(|&s| prime_factors(s).len())
        .max()
        .unwrap_or(0);
    Ok(DegreeStats {
        p,
        a,
        b_p,
        dl_p,
        b_star_p,
        p_derived_order,
        rho,
        sigma,
        rho_star,
        sigma_star,
        sylow_order: syl.order(),
    })
}

/// Subgroup handle for callers that need the Sylow subgroup itself.
pub fn sylow_subgroup(g: &EnumeratedGroup, p: u64) -> Result<Subgroup> {
    g.sylow(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{affine, sl2};
    use crate::grp::{Elem, ORDER_CAP};

    fn s3() -> EnumeratedGroup {
        EnumeratedGroup::close(
            vec![Elem::Perm(vec![1, 0, 2]), Elem::Perm(vec![1, 2, 0])],
            ORDER_CAP,
        )
        .unwrap()
    }

    fn sl23() -> EnumeratedGroup {
        sl2(3).unwrap().close(ORDER_CAP).unwrap()
    }

    fn z11_z5() -> EnumeratedGroup {
        affine(11, 5).unwrap().close(ORDER_CAP).unwrap()
    }

    #[test]
    fn degrees_s3() {
        let t = char_table(&s3(), 1).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 2]);
    }

    #[test]
    fn degrees_sl23() {
        let t = char_table(&sl23(), 1).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn degrees_z11_z5() {
        let t = char_table(&z11_z5(), 1).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 1, 1, 1, 5, 5]);
    }

    #[test]
    fn table_is_seed_independent() {
        let a = char_table(&sl23(), 1).unwrap();
        let b = char_table(&sl23(), 999).unwrap();
        assert_eq!(a.degrees, b.degrees);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn blocks_s3_at_3() {
        let t = char_table(&s3(), 1).unwrap();
        let b = p_blocks(&t, 3).unwrap();
        assert_eq!(b.blocks.len(), 1);
        assert_eq!(b.defects, vec![1]);
        assert!(block_invariants_hold(&t, &b));
    }

    #[test]
    fn blocks_sl23_at_3() {
        // blocks correspond to the Z3-orbits on Irr(Q8): the three linear
        // characters, the three degree-2 characters, and the degree-3
        // character alone with defect 0
        let t = char_table(&sl23(), 1).unwrap();
        let b = p_blocks(&t, 3).unwrap();
        assert_eq!(b.blocks.len(), 3);
        let zero_defect: Vec<&Vec<usize>> = b
            .blocks
            .iter()
            .zip(b.defects.iter())
            .filter(|(_, &d)| d == 0)
            .map(|(blk, _)| blk)
            .collect();
        assert_eq!(zero_defect.len(), 1);
        assert_eq!(zero_defect[0].len(), 1);
        assert_eq!(t.degrees[zero_defect[0][0]], 3);
        let mut sizes: Vec<usize> = b.blocks.iter().map(|blk| blk.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 3]);
        assert!(block_invariants_hold(&t, &b));
    }

    #[test]
    fn blocks_z11_z5_at_5() {
        let t = char_table(&z11_z5(), 1).unwrap();
        let b = p_blocks(&t, 5).unwrap();
        let zero_blocks = b.defects.iter().filter(|&&d| d == 0).count();
        assert_eq!(zero_blocks, 2);
        assert_eq!(b.blocks.len(), 3);
        assert!(block_invariants_hold(&t, &b));
    }

    #[test]
    fn blocks_when_p_does_not_divide() {
        let t = char_table(&s3(), 1).unwrap();
        let b = p_blocks(&t, 5).unwrap();
        assert_eq!(b.blocks.len(), 3);
        assert!(b.defects.iter().all(|&d| d == 0));
    }

    #[test]
    fn linking_graph_oracle() {
        // blocks by connectivity of nonzero p-regular inner products
        for (g, p) in [(s3(), 3u64), (sl23(), 3), (z11_z5(), 5), (z11_z5(), 11)] {
            let t = char_table(&g, 7).unwrap();
            let b = p_blocks(&t, p).unwrap();
            let k = t.degrees.len();
            let ctx = &t.ctx;
            let mut adj = vec![vec![false; k]; k];
            for x in 0..k {
                for y in 0..k {
                    let mut acc = ctx.zero();
                    for j in 0..k {
                        if t.class_orders[j] as u64 % p == 0 {
                            continue; // p-singular class
                        }
                        let term = ctx.mul(&t.values[x][j], &ctx.conj(&t.values[y][j]));
                        acc = ctx.add(&acc, &ctx.scale(&term, t.class_sizes[j] as i128));
                    }
                    adj[x][y] = !ctx.is_zero(&acc);
                }
            }
            // connected components
            let mut comp = vec![usize::MAX; k];
            let mut cid = 0;
            for s in 0..k {
                if comp[s] != usize::MAX {
                    continue;
                }
                let mut stack = vec![s];
                comp[s] = cid;
                while let Some(x) = stack.pop() {
                    for y in 0..k {
                        if adj[x][y] && comp[y] == usize::MAX {
                            comp[y] = cid;
                            stack.push(y);
                        }
                    }
                }
                cid += 1;
            }
            let mut oracle: Vec<Vec<usize>> = vec![Vec::new(); cid];
            for (i, &c) in comp.iter().enumerate() {
                oracle[c].push(i);
            }
            oracle.sort_by_key(|b| b[0]);
            assert_eq!(b.blocks, oracle, "block mismatch at p={p}");
        }
    }

    #[test]
    fn degree_stats_examples() {
        let g = s3();
        let t = char_table(&g, 1).unwrap();
        let st = degree_stats(&g, &t, 3, 1).unwrap();
        assert_eq!(st.a, 0);
        assert_eq!(st.rho, vec![2]);
        assert_eq!(st.sigma, 1);

        let g = sl23();
        let t = char_table(&g, 1).unwrap();
        let st = degree_stats(&g, &t, 3, 1).unwrap();
        assert_eq!(st.rho, vec![2, 3]);
        assert_eq!(st.sigma, 1);
        assert!(st.rho.len() <= 3 * st.sigma + 2);

        // abelian group: empty rho, b(P) = 1
        let z5 = EnumeratedGroup::close(vec![Elem::Perm(vec![1, 2, 3, 4, 0])], ORDER_CAP).unwrap();
        let t = char_table(&z5, 1).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 1, 1, 1]);
        let st = degree_stats(&z5, &t, 5, 1).unwrap();
        assert_eq!(st.a, 0);
        assert!(st.rho.is_empty());
        assert_eq!(st.sigma, 0);
        assert_eq!(st.b_p, 1);
        assert_eq!(st.dl_p, 1);
    }

    #[test]
    fn cyclo_arithmetic() {
        let ctx = CycloCtx::new(12);
        assert_eq!(ctx.phi, 4);
        // zeta^12 = 1
        assert_eq!(ctx.zeta_pow(12), ctx.from_int(1));
        // zeta^6 = -1
        assert_eq!(ctx.zeta_pow(6), ctx.from_int(-1));
        // zeta * conj(zeta) = 1
        let z = ctx.zeta_pow(1);
        assert_eq!(ctx.mul(&z, &ctx.conj(&z)), ctx.from_int(1));
        // (zeta^4) is a primitive cube root: 1 + w + w^2 = 0
        let w = ctx.zeta_pow(4);
        let w2 = ctx.mul(&w, &w);
        let s = ctx.add(&ctx.add(&ctx.from_int(1), &w), &w2);
        assert!(ctx.is_zero(&s));
    }

    #[test]
    fn quaternion_table() {
        let q8 = crate::families::q8().unwrap().close(ORDER_CAP).unwrap();
        let t = char_table(&q8, 1).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 1, 1, 2]);
        let b = p_blocks(&t, 2).unwrap();
        assert_eq!(b.blocks.len(), 1);
        assert_eq!(b.defects, vec![3]);
    }
}
