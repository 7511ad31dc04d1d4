//! Constructors for the group families under study, as explicit matrix
//! groups: semilinear groups, extraspecial groups in their clock/shift
//! representation with their solvable normalizer pieces, symplectic groups
//! via transvections, and product embeddings. Also symplectic-form
//! utilities: preservation tests, isotropy classification, and symplectic
//! basis transforms.



use crate::error::{Error, Result};
use crate::gf::{Field, FiniteField, Matrix};
use crate::grp::{small_generating_set, Elem, EnumeratedGroup, Subgroup, ORDER_CAP};

/// A named family instance: generator elements plus the ambient spaces they
/// act on (one entry per direct summand) and the order the closure must have
/// when a formula predicts it.
#[derive(Clone, Debug)]
pub struct Construction {
    pub name: String,
    pub gens: Vec<Elem>,
    pub spaces: Vec<(Field, usize)>,
    pub predicted_order: Option<u64>,
}

impl Construction {
    pub fn close(&self, cap: usize) -> Result<EnumeratedGroup> {
        let g = EnumeratedGroup::close(self.gens.clone(), cap)?;
        if let Some(pred) = self.predicted_order {
            if g.order() != pred {
                return Err(Error::internal(format!(
                    "{}: closure order {} != predicted {}",
                    self.name,
                    g.order(),
                    pred
                )));
            }
        }
        Ok(g)
    }

    fn single(name: String, f: Field, dim: usize, mats: Vec<Matrix>, pred: Option<u64>) -> Self {
        Construction {
            name,
            gens: mats.into_iter().map(|m| Elem::Mats(vec![m])).collect(),
            spaces: vec![(f, dim)],
            predicted_order: pred,
        }
    }
}

// ---------------------------------------------------------------------------
// Semilinear groups
// ---------------------------------------------------------------------------

/// Powers of the polynomial class x in GF(p^d): the base-p digit encoding is
/// exactly the coordinate vector in the basis 1, x, ..., x^{d-1}.
fn x_powers(big: &Field) -> Vec<u32> {
    let d = big.k as usize;
    let x_val = big.p as u32; // digits [0,1]
    let mut pows = vec![1u32; d];
    for j in 1..d {
        pows[j] = big.mul(pows[j - 1], x_val);
    }
    pows
}

/// Matrix over GF(p) of a GF(p)-linear map on GF(p^d) given pointwise.
fn linear_map_matrix(big: &Field, prime: &Field, map: impl Fn(u32) -> u32) -> Matrix {
    let d = big.k as usize;
    let pows = x_powers(big);
    let mut m = Matrix::zero(prime.clone(), d);
    for (j, &xp) in pows.iter().enumerate() {
        let img = map(xp);
        for (i, dig) in big.digits(img).iter().enumerate() {
            m.set(i, j, *dig as u32);
        }
    }
    m
}

/// Multiplicative part of the semilinear group of GF(q^n), realized over the
/// prime field: one generator, multiplication by a field generator. Order
/// q^n - 1.
pub fn gamma0(q: u64, n: u32) -> Result<Construction> {
    let qf = FiniteField::of_order(q)?;
    let big = FiniteField::get(qf.p, qf.k * n)?;
    let prime = FiniteField::get(qf.p, 1)?;
    let g = big.generator;
    let mult = linear_map_matrix(&big, &prime, |x| big.mul(g, x));
    Ok(Construction::single(
        format!("gamma0({q},{n})"),
        prime,
        big.k as usize,
        vec![mult],
        Some(big.q - 1),
    ))
}

/// Full semilinear group of GF(q^n) over the prime field: multiplication by
/// a field generator together with the Frobenius x -> x^p. Order
/// [GF(q^n):GF(p)] * (q^n - 1).
pub fn gamma(q: u64, n: u32) -> Result<Construction> {
    let qf = FiniteField::of_order(q)?;
    let big = FiniteField::get(qf.p, qf.k * n)?;
    let prime = FiniteField::get(qf.p, 1)?;
    let g = big.generator;
    let mult = linear_map_matrix(&big, &prime, |x| big.mul(g, x));
    let frob = linear_map_matrix(&big, &prime, |x| big.frobenius(x));
    Ok(Construction::single(
        format!("gamma({q},{n})"),
        prime,
        big.k as usize,
        vec![mult, frob],
        Some(big.k as u64 * (big.q - 1)),
    ))
}

/// gamma0 realized n-dimensionally over GF(q) itself (q may be a proper
/// prime power). Used where the ambient field must be GF(q).
pub fn gamma0_over_q(q: u64, n: u32) -> Result<Construction> {
    let qf = FiniteField::of_order(q)?;
    let big = FiniteField::get(qf.p, qf.k * n)?;
    // subfield copy of GF(q) inside GF(q^n): fixed points of x -> x^q
    let subfield: Vec<u32> = (0..big.q as u32).filter(|&x| big.pow(x, q) == x).collect();
    if subfield.len() as u64 != q {
        return Err(Error::internal("subfield has wrong size"));
    }
    // identify GF(q) with the subfield: send the abstract generator to a
    // subfield root of the abstract modulus
    let embed_root = subfield
        .iter()
        .copied()
        .find(|&y| {
            if qf.k == 1 {
                return y == (qf.generator as u64 % big.p) as u32;
            }
            let mut acc = 0u32;
            let mut pw = 1u32;
            for &c in qf.modulus_digits() {
                let term = big.mul(big.scalar(c), pw);
                acc = big.add(acc, term);
                pw = big.mul(pw, y);
            }
            acc == 0 && y as u64 >= 2
        })
        .ok_or_else(|| Error::internal("no embedding root for subfield"))?;
    // map abstract GF(q) value -> subfield element of big
    let embed = |v: u32| -> u32 {
        let mut acc = 0u32;
        let mut pw = 1u32;
        for &c in &qf.digits(v) {
            acc = big.add(acc, big.mul(big.scalar(c), pw));
            pw = big.mul(pw, embed_root);
        }
        acc
    };
    // greedy GF(q)-basis of big and coordinate table
    let mut basis: Vec<u32> = Vec::new();
    let mut span: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    span.insert(0, vec![]);
    for cand in 1..big.q as u32 {
        if basis.len() == n as usize {
            break;
        }
        if span.contains_key(&cand) {
            continue;
        }
        basis.push(cand);
        let pos = basis.len() - 1;
        let old: Vec<(u32, Vec<u32>)> = span.iter().map(|(k, v)| (*k, v.clone())).collect();
        for (val, coords) in old {
            for s in 1..qf.q as u32 {
                let nv = big.add(val, big.mul(embed(s), cand));
                let mut nc = coords.clone();
                nc.resize(pos, 0);
                nc.push(s);
                span.entry(nv).or_insert(nc);
            }
        }
    }
    if span.len() as u64 != big.q {
        return Err(Error::internal("basis does not span"));
    }
    let coords_of = |val: u32| -> Vec<u32> {
        let mut c = span[&val].clone();
        c.resize(n as usize, 0);
        c
    };
    let g = big.generator;
    let mut m = Matrix::zero(qf.clone(), n as usize);
    for (j, &b) in basis.iter().enumerate() {
        let img = big.mul(g, b);
        // span coordinates are already abstract GF(q) values
        for (i, &c) in coords_of(img).iter().enumerate() {
            m.set(i, j, c);
        }
    }
    Ok(Construction::single(
        format!("gamma0_over_q({q},{n})"),
        qf,
        n as usize,
        vec![m],
        Some(big.q - 1),
    ))
}

// ---------------------------------------------------------------------------
// Extraspecial groups and their normalizer pieces
// ---------------------------------------------------------------------------

/// A primitive p-th root of unity in GF(r); requires p | r - 1.
fn unity_root(p: u64, rf: &Field) -> Result<u32> {
    if (rf.q - 1) % p != 0 {
        return Err(Error::domain(format!(
            "{p} does not divide {} - 1: no faithful degree-{p} representation",
            rf.q
        )));
    }
    Ok(rf.exp_of((rf.q - 1) / p))
}

fn clock_matrix(p: u64, rf: &Field, zeta: u32) -> Matrix {
    let mut m = Matrix::zero(rf.clone(), p as usize);
    for x in 0..p {
        m.set(x as usize, x as usize, rf.pow(zeta, x));
    }
    m
}

fn shift_matrix(p: u64, rf: &Field) -> Matrix {
    let mut m = Matrix::zero(rf.clone(), p as usize);
    for x in 0..p as usize {
        m.set((x + 1) % p as usize, x, 1);
    }
    m
}

/// Extraspecial group of order p^(1+2m) and exponent p (p odd) acting on
/// GF(r)^(p^m): m clock generators and m shift generators, assembled by
/// Kronecker position.
pub fn extraspecial_rep(p: u64, m: u32, r: u64) -> Result<Construction> {
    if p == 2 {
        return Err(Error::domain(
            "p = 2 types are built from the explicit 2x2 tables and tensor_embed",
        ));
    }
    if p.pow(m) > 64 {
        return Err(Error::resource("degree p^m capped at 64"));
    }
    let rf = FiniteField::of_order(r)?;
    let zeta = unity_root(p, &rf)?;
    let clock = clock_matrix(p, &rf, zeta);
    let shift = shift_matrix(p, &rf);
    let id = Matrix::identity(rf.clone(), p as usize);
    let mut gens = Vec::new();
    for pos in 0..m {
        for base in [&clock, &shift] {
            let mut acc: Option<Matrix> = None;
            for j in 0..m {
                let factor = if j == pos { base } else { &id };
                acc = Some(match acc {
                    None => factor.clone(),
                    Some(a) => a.kronecker(factor),
                });
            }
            gens.push(acc.unwrap());
        }
    }
    let dim = p.pow(m) as usize;
    Ok(Construction::single(
        format!("extraspecial_rep({p},{m},{r})"),
        rf,
        dim,
        gens,
        Some(p.pow(1 + 2 * m)),
    ))
}

/// Discrete Fourier matrix [zeta^(xy)] of size p over GF(r); normalizes the
/// clock/shift group, swapping the clock and shift directions.
pub fn fourier_matrix(p: u64, r: u64) -> Result<Matrix> {
    let rf = FiniteField::of_order(r)?;
    let zeta = unity_root(p, &rf)?;
    let mut m = Matrix::zero(rf.clone(), p as usize);
    for x in 0..p {
        for y in 0..p {
            m.set(x as usize, y as usize, rf.pow(zeta, x * y % p));
        }
    }
    Ok(m)
}

/// Diagonal quadratic matrix diag(zeta^(x^2)); together with the coordinate
/// scaling it generates the diagonal part of the normalizer.
pub fn quadratic_gauss_matrix(p: u64, r: u64) -> Result<Matrix> {
    let rf = FiniteField::of_order(r)?;
    let zeta = unity_root(p, &rf)?;
    let mut m = Matrix::zero(rf.clone(), p as usize);
    for x in 0..p {
        m.set(x as usize, x as usize, rf.pow(zeta, x * x % p));
    }
    Ok(m)
}

/// Coordinate scaling e_x -> e_(a*x mod p), a permutation matrix.
pub fn coordinate_scale_matrix(p: u64, r: u64, a: u64) -> Result<Matrix> {
    if a % p == 0 {
        return Err(Error::usage("scale must be a unit mod p"));
    }
    let rf = FiniteField::of_order(r)?;
    let mut m = Matrix::zero(rf.clone(), p as usize);
    for x in 0..p {
        m.set((a * x % p) as usize, x as usize, 1);
    }
    Ok(m)
}

/// The extraspecial clock/shift group of order p^3 extended by the solvable
/// irreducible piece of its normalizer (Fourier element and coordinate
/// scaling by a generator of the prime residues). The extension is solvable
/// and acts quasi-primitively on GF(r)^p.
pub fn extraspecial_qp(p: u64, r: u64) -> Result<Construction> {
    let base = extraspecial_rep(p, 1, r)?;
    let mut mats: Vec<Matrix> = base
        .gens
        .iter()
        .map(|e| match e {
            Elem::Mats(v) => v[0].clone(),
            _ => unreachable!(),
        })
        .collect();
    mats.push(fourier_matrix(p, r)?);
    // smallest primitive root mod p
    let a = (2..p)
        .find(|&a| {
            let mut x = a % p;
            let mut o = 1;
            while x != 1 {
                x = x * a % p;
                o += 1;
            }
            o == p - 1
        })
        .unwrap_or(1);
    if p > 3 {
        mats.push(coordinate_scale_matrix(p, r, a)?);
    } else {
        // for p = 3 the scaling is x -> -x, already the square of Fourier
        mats.push(coordinate_scale_matrix(p, r, p - 1)?);
    }
    let (f, dim) = base.spaces[0].clone();
    Ok(Construction::single(
        format!("extraspecial_qp({p},{r})"),
        f,
        dim,
        mats,
        None,
    ))
}

/// Dihedral group of order 8 as 2x2 matrices over GF(3).
pub fn d8() -> Result<Construction> {
    let f3 = FiniteField::get(3, 1)?;
    let swap = Matrix::new(f3.clone(), 2, vec![0, 1, 1, 0])?;
    let refl = Matrix::new(f3.clone(), 2, vec![1, 0, 0, 2])?;
    Ok(Construction::single(
        "d8".into(),
        f3,
        2,
        vec![swap, refl],
        Some(8),
    ))
}

/// Quaternion group of order 8 as 2x2 matrices over GF(3).
pub fn q8() -> Result<Construction> {
    let f3 = FiniteField::get(3, 1)?;
    let i = Matrix::new(f3.clone(), 2, vec![0, 2, 1, 0])?;
    let j = Matrix::new(f3.clone(), 2, vec![1, 1, 1, 2])?;
    Ok(Construction::single("q8".into(), f3, 2, vec![i, j], Some(8)))
}

/// SL(2, q) from the standard transvection pair.
pub fn sl2(q: u64) -> Result<Construction> {
    let f = FiniteField::of_order(q)?;
    let mut gens = vec![
        Matrix::new(f.clone(), 2, vec![1, 1, 0, 1])?,
        Matrix::new(f.clone(), 2, vec![1, 0, 1, 1])?,
    ];
    if f.k > 1 || f.q > 3 {
        let g = f.generator;
        gens.push(Matrix::new(f.clone(), 2, vec![1, g, 0, 1])?);
    }
    Ok(Construction::single(
        format!("sl2({q})"),
        f,
        2,
        gens,
        Some(q * (q * q - 1)),
    ))
}

// ---------------------------------------------------------------------------
// Products and embeddings
// ---------------------------------------------------------------------------

/// Direct sum: the full product of the factors acting block-wise on the
/// concatenated summand list. Mixed characteristics are allowed; elements
/// are matrix tuples with one block per summand.
pub fn direct_sum(parts: &[Construction]) -> Result<Construction> {
    if parts.is_empty() {
        return Err(Error::usage("empty direct sum"));
    }
    let spaces: Vec<(Field, usize)> = parts.iter().flat_map(|c| c.spaces.clone()).collect();
    let identity_blocks: Vec<Vec<Matrix>> = parts
        .iter()
        .map(|c| {
            c.spaces
                .iter()
                .map(|(f, d)| Matrix::identity(f.clone(), *d))
                .collect()
        })
        .collect();
    let mut gens: Vec<Elem> = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        for g in &part.gens {
            let Elem::Mats(blocks) = g else {
                return Err(Error::usage("direct sum expects matrix constructions"));
            };
            let mut tuple: Vec<Matrix> = Vec::new();
            for (qi, ids) in identity_blocks.iter().enumerate() {
                if qi == pi {
                    tuple.extend(blocks.iter().cloned());
                } else {
                    tuple.extend(ids.iter().cloned());
                }
            }
            gens.push(Elem::Mats(tuple));
        }
    }
    let predicted = parts
        .iter()
        .map(|c| c.predicted_order)
        .try_fold(1u64, |acc, p| p.map(|p| acc * p));
    Ok(Construction {
        name: format!(
            "direct_sum({})",
            parts.iter().map(|c| c.name.clone()).collect::<Vec<_>>().join(",")
        ),
        gens,
        spaces,
        predicted_order: predicted,
    })
}

/// Merge the blocks of a same-field multi-summand construction into single
/// block-diagonal matrices on the concatenated space.
pub fn merge_blocks(c: &Construction) -> Result<Construction> {
    let f = c.spaces[0].0.clone();
    if c.spaces.iter().any(|(g, _)| **g != *f) {
        return Err(Error::usage("merge requires a common field"));
    }
    let dim: usize = c.spaces.iter().map(|(_, d)| d).sum();
    let mats: Vec<Matrix> = c
        .gens
        .iter()
        .map(|e| match e {
            Elem::Mats(blocks) => Matrix::block_diag(blocks),
            _ => unreachable!(),
        })
        .collect();
    Ok(Construction::single(
        format!("merged({})", c.name),
        f,
        dim,
        mats,
        c.predicted_order,
    ))
}

/// Kronecker action of two same-field constructions on the tensor product
/// space; realizes central products of the factors.
pub fn tensor_embed(a: &Construction, b: &Construction) -> Result<Construction> {
    let (fa, da) = &a.spaces[0];
    let (fb, db) = &b.spaces[0];
    if a.spaces.len() != 1 || b.spaces.len() != 1 || **fa != **fb {
        return Err(Error::usage("tensor requires single same-field summands"));
    }
    let ia = Matrix::identity(fa.clone(), *da);
    let ib = Matrix::identity(fb.clone(), *db);
    let mut mats = Vec::new();
    for g in &a.gens {
        let Elem::Mats(v) = g else { unreachable!() };
        mats.push(v[0].kronecker(&ib));
    }
    for h in &b.gens {
        let Elem::Mats(v) = h else { unreachable!() };
        mats.push(ia.kronecker(&v[0]));
    }
    Ok(Construction::single(
        format!("tensor({},{})", a.name, b.name),
        fa.clone(),
        da * db,
        mats,
        None,
    ))
}

/// Wreath-type embedding: t block copies of the inner construction together
/// with the block permutations of the full symmetric top group.
pub fn wreath_embed(inner: &Construction, copies: usize) -> Result<Construction> {
    if inner.spaces.len() != 1 {
        return Err(Error::usage("wreath requires a single-summand inner group"));
    }
    let (f, d) = inner.spaces[0].clone();
    let dim = d * copies;
    let mut mats = Vec::new();
    for g in &inner.gens {
        let Elem::Mats(v) = g else { unreachable!() };
        let mut blocks = vec![Matrix::identity(f.clone(), d); copies];
        blocks[0] = v[0].clone();
        mats.push(Matrix::block_diag(&blocks));
    }
    let block_perm = |perm: &[usize]| -> Matrix {
        let mut m = Matrix::zero(f.clone(), dim);
        for (b, &img) in perm.iter().enumerate() {
            for i in 0..d {
                m.set(img * d + i, b * d + i, 1);
            }
        }
        m
    };
    if copies > 1 {
        let mut swap: Vec<usize> = (0..copies).collect();
        swap.swap(0, 1);
        mats.push(block_perm(&swap));
        if copies > 2 {
            let cycle: Vec<usize> = (0..copies).map(|i| (i + 1) % copies).collect();
            mats.push(block_perm(&cycle));
        }
    }
    let predicted = inner.predicted_order.map(|p| {
        let fact: u64 = (1..=copies as u64).product();
        p.pow(copies as u32) * fact
    });
    Ok(Construction::single(
        format!("wreath({},{copies})", inner.name),
        f,
        dim,
        mats,
        predicted,
    ))
}

/// Affine group of GF(q) with scalar part of the given order, as a
/// permutation group on the q field elements: x -> x + 1 and x -> h x.
pub fn affine(q: u64, scalar_order: u64) -> Result<Construction> {
    let f = FiniteField::of_order(q)?;
    if (f.q - 1) % scalar_order != 0 {
        return Err(Error::usage("scalar order must divide q - 1"));
    }
    let h = f.exp_of((f.q - 1) / scalar_order);
    let add: Vec<u16> = (0..f.q as u32).map(|x| f.add(x, 1) as u16).collect();
    let mul: Vec<u16> = (0..f.q as u32).map(|x| f.mul(h, x) as u16).collect();
    Ok(Construction {
        name: format!("affine({q},{scalar_order})"),
        gens: vec![Elem::Perm(add), Elem::Perm(mul)],
        spaces: vec![],
        predicted_order: Some(q * scalar_order),
    })
}

// ---------------------------------------------------------------------------
// Symplectic machinery
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SymplecticSpace {
    pub field: Field,
    pub dim: usize,
    pub gram: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsotropyType {
    Nonsingular,
    TotallyIsotropic,
    Mixed,
}

impl SymplecticSpace {
    /// Standard non-singular alternating form: consecutive hyperbolic pairs
    /// (e1, f1, e2, f2, ...).
    pub fn standard(field: Field, dim: usize) -> Result<SymplecticSpace> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::usage("symplectic dimension must be even"));
        }
        let mut gram = Matrix::zero(field.clone(), dim);
        for i in 0..dim / 2 {
            gram.set(2 * i, 2 * i + 1, 1);
            gram.set(2 * i + 1, 2 * i, field.neg(1));
        }
        let s = SymplecticSpace { field, dim, gram };
        debug_assert!(s.gram_valid());
        Ok(s)
    }

    pub fn gram_valid(&self) -> bool {
        let g = &self.gram;
        if g.det() == 0 {
            return false;
        }
        for i in 0..self.dim {
            if g.at(i, i) != 0 {
                return false;
            }
            for j in 0..self.dim {
                if g.at(i, j) != self.field.neg(g.at(j, i)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn form(&self, u: &[u32], v: &[u32]) -> u32 {
        let f = &self.field;
        let gv = self.gram.apply(v);
        let mut acc = 0u32;
        for i in 0..self.dim {
            acc = f.add(acc, f.mul(u[i], gv[i]));
        }
        acc
    }
}

/// Does m preserve the form: m^T Gram m = Gram.
pub fn is_symplectic(m: &Matrix, s: &SymplecticSpace) -> bool {
    m.transpose().mul(&s.gram).mul(m) == s.gram
}

/// Classify the restriction of the form to the span of the given basis.
pub fn isotropy_type(basis: &[Vec<u32>], s: &SymplecticSpace) -> IsotropyType {
    let d = basis.len();
    let f = s.field.clone();
    let mut restricted = Matrix::zero(f, d);
    let mut all_zero = true;
    for i in 0..d {
        for j in 0..d {
            let v = s.form(&basis[i], &basis[j]);
            restricted.set(i, j, v);
            if v != 0 {
                all_zero = false;
            }
        }
    }
    if all_zero {
        IsotropyType::TotallyIsotropic
    } else if restricted.det() != 0 {
        IsotropyType::Nonsingular
    } else {
        IsotropyType::Mixed
    }
}

/// Change of basis P with P^T B P equal to the standard Gram: hyperbolic
/// pairs extracted by symplectic Gram-Schmidt. Requires B non-singular
/// alternating.
pub fn symplectic_basis(b: &Matrix) -> Result<Matrix> {
    let f = b.field.clone();
    let n = b.n;
    if n % 2 != 0 {
        return Err(Error::usage("odd dimension"));
    }
    let form = |u: &[u32], v: &[u32]| -> u32 {
        let bv = b.apply(v);
        let mut acc = 0;
        for i in 0..n {
            acc = f.add(acc, f.mul(u[i], bv[i]));
        }
        acc
    };
    let mut chosen: Vec<Vec<u32>> = Vec::new();
    let mut pool: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            let mut v = vec![0u32; n];
            v[i] = 1;
            v
        })
        .collect();
    while chosen.len() < n {
        // next u: first pool vector independent from span(chosen)
        let u = pool.remove(0);
        if u.iter().all(|&c| c == 0) {
            continue;
        }
        // find partner with nonzero pairing
        let wpos = pool
            .iter()
            .position(|w| form(&u, w) != 0)
            .ok_or_else(|| Error::domain("degenerate alternating form"))?;
        let w = pool.remove(wpos);
        let scale = f.inv(form(&u, &w))?;
        let v: Vec<u32> = w.iter().map(|&c| f.mul(c, scale)).collect();
        // reduce the rest of the pool against the new hyperbolic pair
        for x in pool.iter_mut() {
            let a = form(x, &v);
            let c = form(x, &u);
            for i in 0..n {
                let t1 = f.mul(a, u[i]);
                let t2 = f.mul(c, v[i]);
                x[i] = f.add(f.sub(x[i], t1), t2);
            }
        }
        pool.retain(|x| x.iter().any(|&c| c != 0));
        chosen.push(u);
        chosen.push(v);
    }
    let mut p = Matrix::zero(f, n);
    for (j, col) in chosen.iter().enumerate() {
        for i in 0..n {
            p.set(i, j, col[i]);
        }
    }
    Ok(p)
}

/// Symplectic transvection x -> x + lambda B(x, v) v.
pub fn transvection(s: &SymplecticSpace, v: &[u32], lambda: u32) -> Matrix {
    let f = s.field.clone();
    let n = s.dim;
    let gv = s.gram.apply(v);
    let mut m = Matrix::identity(f.clone(), n);
    for i in 0..n {
        for j in 0..n {
            let add = f.mul(lambda, f.mul(v[i], gv[j]));
            let cur = m.at(i, j);
            m.set(i, j, f.add(cur, add));
        }
    }
    m
}

/// Sp(n, q) generated by transvections along the standard basis vectors and
/// their pairwise sums.
pub fn sp(n: usize, q: u64) -> Result<Construction> {
    let f = FiniteField::of_order(q)?;
    let s = SymplecticSpace::standard(f.clone(), n)?;
    let mut vs: Vec<Vec<u32>> = Vec::new();
    for i in 0..n {
        let mut v = vec![0u32; n];
        v[i] = 1;
        vs.push(v);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0u32; n];
            v[i] = 1;
            v[j] = 1;
            vs.push(v);
        }
    }
    let mut lambdas = vec![1u32];
    if f.q > 2 {
        lambdas.push(f.generator);
    }
    let mut gens = Vec::new();
    for v in &vs {
        for &l in &lambdas {
            let t = transvection(&s, v, l);
            debug_assert!(is_symplectic(&t, &s));
            gens.push(t);
        }
    }
    let m = (n / 2) as u32;
    let mut order = q.pow(m * m);
    for i in 1..=m {
        order *= q.pow(2 * i) - 1;
    }
    Ok(Construction::single(
        format!("sp({n},{q})"),
        f,
        n,
        gens,
        Some(order),
    ))
}

// ---------------------------------------------------------------------------
// The (D8 central Q8) . F10 instance inside Sp(4,3)
// ---------------------------------------------------------------------------

/// Result of the normalizer construction inside an enumerated Sp(4,3).
pub struct Sp43Instance {
    /// The enumerated ambient Sp(4,3).
    pub sp43: EnumeratedGroup,
    /// The central-product extraspecial 2-group inside it, order 32.
    pub e_sub: Subgroup,
    /// The solvable subgroup (D8 o Q8).F10, order 320, as a subgroup.
    pub g_sub: Subgroup,
}

/// Builds the extraspecial 2-group D8 o Q8 symplectically inside Sp(4,3) and
/// extends it to (D8 o Q8).F10 by normalizer computations in the enumerated
/// ambient group: the full normalizer of E is cut down to the normalizer of
/// the order-160 subgroup generated by E and an order-5 element.
pub fn d8q8_f10_in_sp43() -> Result<Sp43Instance> {
    let f3 = FiniteField::get(3, 1)?;
    let e_construction = tensor_embed(&d8()?, &q8()?)?;
    // D8 preserves the identity symmetric form, Q8 the standard alternating
    // one; the Kronecker product preserves their tensor, an alternating
    // non-singular form on GF(3)^4. Conjugate into the standard form.
    let s2 = SymplecticSpace::standard(f3.clone(), 2)?;
    let mut b = Matrix::zero(f3.clone(), 4);
    for i in 0..2 {
        for r in 0..2 {
            for c in 0..2 {
                b.set(i * 2 + r, i * 2 + c, s2.gram.at(r, c));
            }
        }
    }
    let p = symplectic_basis(&b)?;
    let p_inv = p.inv()?;
    let s4 = SymplecticSpace::standard(f3.clone(), 4)?;
    let e_mats: Vec<Matrix> = e_construction
        .gens
        .iter()
        .map(|e| {
            let Elem::Mats(v) = e else { unreachable!() };
            p_inv.mul(&v[0]).mul(&p)
        })
        .collect();
    for m in &e_mats {
        if !is_symplectic(m, &s4) {
            return Err(Error::internal("conjugated generator not symplectic"));
        }
    }
    let sp43 = sp(4, 3)?.close(ORDER_CAP)?;
    let e_gen_idx: Vec<u32> = e_mats
        .iter()
        .map(|m| {
            sp43.index_of(&Elem::Mats(vec![m.clone()]))
                .ok_or_else(|| Error::internal("E generator outside Sp(4,3)"))
        })
        .collect::<Result<_>>()?;
    let e_sub = sp43.subgroup_closure(&e_gen_idx);
    if e_sub.order() != 32 {
        return Err(Error::internal(format!(
            "central product has order {}, expected 32",
            e_sub.order()
        )));
    }
    let whole: Vec<u32> = (0..sp43.order() as u32).collect();
    let normalizer_elems = sp43.normalizer(&whole, &e_sub);
    let n_sub = Subgroup {
        gens: small_generating_set(&sp43, &normalizer_elems),
        elems: normalizer_elems,
    };
    // an element of order 5 in the normalizer
    let x5 = n_sub
        .elems
        .iter()
        .copied()
        .find(|&x| sp43.order_of(x) == 5)
        .ok_or_else(|| Error::internal("no order-5 element in the normalizer"))?;
    let mut hgens = e_sub.gens.clone();
    hgens.push(x5);
    let h = sp43.subgroup_closure(&hgens);
    let g_elems = sp43.normalizer(&n_sub.elems, &h);
    let g_sub = Subgroup {
        gens: small_generating_set(&sp43, &g_elems),
        elems: g_elems,
    };
    Ok(Sp43Instance { sp43, e_sub, g_sub })
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;
    use super::*;
    use crate::gf::decode_vec;

    #[test]
    fn gamma_orders() {
        assert_eq!(gamma0(2, 4).unwrap().close(ORDER_CAP).unwrap().order(), 15);
        assert_eq!(gamma(2, 4).unwrap().close(ORDER_CAP).unwrap().order(), 60);
        assert_eq!(gamma(3, 2).unwrap().close(ORDER_CAP).unwrap().order(), 16);
        assert_eq!(gamma(2, 6).unwrap().close(ORDER_CAP).unwrap().order(), 378);
    }

    #[test]
    fn gamma0_over_q_variant() {
        let c = gamma0_over_q(4, 2).unwrap();
        assert_eq!(c.spaces[0].1, 2);
        assert_eq!(c.spaces[0].0.q, 4);
        assert_eq!(c.close(ORDER_CAP).unwrap().order(), 15);
    }

    #[test]
    fn gamma_contains_gamma0_as_normal_cyclic() {
        let g = gamma(2, 4).unwrap().close(ORDER_CAP).unwrap();
        let g0 = gamma0(2, 4).unwrap();
        let mult_idx = g.index_of(&g0.gens[0]).unwrap();
        let sub = g.subgroup_closure(&[mult_idx]);
        assert_eq!(sub.order(), 15);
        assert!(g.is_normal(&sub));
        assert!(g.is_cyclic_subgroup(&sub));
        let (q, _) = g.quotient(&sub).unwrap();
        assert_eq!(q.order(), 4);
        assert!(q.is_cyclic_subgroup(&q.whole()));
    }

    #[test]
    fn extraspecial_structure() {
        for (p, m, r, dim) in [(3u64, 1u32, 4u64, 3usize), (5, 1, 11, 5)] {
            let c = extraspecial_rep(p, m, r).unwrap();
            assert_eq!(c.spaces[0].1, dim);
            let e = c.close(ORDER_CAP).unwrap();
            assert_eq!(e.order(), p.pow(1 + 2 * m));
            // center: scalar p-th roots of unity, order p
            let whole: Vec<u32> = (0..e.order() as u32).collect();
            let center = e.centralizer(&whole, &whole);
            assert_eq!(center.len() as u64, p);
            // exponent p
            assert!(e.orders().iter().all(|&o| o == 1 || o as u64 == p));
            // derived subgroup equals the center
            let der = e.derived_subgroup(&e.whole());
            let mut c_sorted = center.clone();
            c_sorted.sort_unstable();
            assert_eq!(der.elems, c_sorted);
        }
    }

    #[test]
    fn extraspecial_requires_root_of_unity() {
        assert!(matches!(
            extraspecial_rep(3, 1, 5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fourier_and_scale_normalize_clock_shift() {
        for (p, r) in [(3u64, 4u64), (5, 11)] {
            let c = extraspecial_rep(p, 1, r).unwrap();
            let e = c.close(ORDER_CAP).unwrap();
            let keys: HashSet<_> = (0..e.order() as u32)
                .map(|i| e.elem(i).key())
                .collect();
            for m in [
                fourier_matrix(p, r).unwrap(),
                quadratic_gauss_matrix(p, r).unwrap(),
                coordinate_scale_matrix(p, r, p - 1).unwrap(),
            ] {
                let minv = m.inv().unwrap();
                for g in &c.gens {
                    let Elem::Mats(v) = g else { unreachable!() };
                    let conj = m.mul(&v[0]).mul(&minv);
                    assert!(keys.contains(&Elem::Mats(vec![conj]).key()));
                }
            }
        }
    }

    #[test]
    fn extraspecial_qp_closures() {
        let c3 = extraspecial_qp(3, 4).unwrap();
        let g3 = c3.close(ORDER_CAP).unwrap();
        assert_eq!(g3.order(), 108);
        assert!(g3.is_solvable());
        let c5 = extraspecial_qp(5, 11).unwrap();
        let g5 = c5.close(ORDER_CAP).unwrap();
        assert_eq!(g5.order(), 1000);
        assert!(g5.is_solvable());
    }

    #[test]
    fn small_two_groups() {
        assert_eq!(d8().unwrap().close(ORDER_CAP).unwrap().order(), 8);
        let q = q8().unwrap().close(ORDER_CAP).unwrap();
        assert_eq!(q.order(), 8);
        // one element of order 2 in Q8
        assert_eq!(q.orders().iter().filter(|&&o| o == 2).count(), 1);
    }

    #[test]
    fn sl2_orders() {
        assert_eq!(sl2(2).unwrap().close(ORDER_CAP).unwrap().order(), 6);
        assert_eq!(sl2(3).unwrap().close(ORDER_CAP).unwrap().order(), 24);
        assert_eq!(sl2(4).unwrap().close(ORDER_CAP).unwrap().order(), 60);
    }

    #[test]
    fn sp_orders() {
        assert_eq!(sp(2, 2).unwrap().close(ORDER_CAP).unwrap().order(), 6);
        assert_eq!(sp(2, 3).unwrap().close(ORDER_CAP).unwrap().order(), 24);
        assert_eq!(sp(4, 2).unwrap().close(ORDER_CAP).unwrap().order(), 720);
    }

    #[test]
    fn sl23_preserves_standard_form() {
        let f3 = FiniteField::get(3, 1).unwrap();
        let s = SymplecticSpace::standard(f3, 2).unwrap();
        for g in &sl2(3).unwrap().gens {
            let Elem::Mats(v) = g else { unreachable!() };
            assert!(is_symplectic(&v[0], &s));
        }
        assert!(is_symplectic(&Matrix::identity(s.field.clone(), 2), &s));
    }

    #[test]
    fn isotropy_classification() {
        let f3 = FiniteField::get(3, 1).unwrap();
        let s = SymplecticSpace::standard(f3.clone(), 4).unwrap();
        // e1, e2 span: totally isotropic
        assert_eq!(
            isotropy_type(&[vec![1, 0, 0, 0], vec![0, 0, 1, 0]], &s),
            IsotropyType::TotallyIsotropic
        );
        // hyperbolic pair: nonsingular
        assert_eq!(
            isotropy_type(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0]], &s),
            IsotropyType::Nonsingular
        );
        // rank-deficient but nonzero restriction: mixed
        assert_eq!(
            isotropy_type(
                &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]],
                &s
            ),
            IsotropyType::Mixed
        );
        // brute-force pairwise agreement on the restricted Gram entries
        let basis = [vec![1, 0, 1, 0], vec![0, 1, 0, 1]];
        let mut vals = Vec::new();
        for u in &basis {
            for v in &basis {
                vals.push(s.form(u, v));
            }
        }
        assert_eq!(vals, vec![0, 2, 1, 0]);
        assert_eq!(isotropy_type(&basis, &s), IsotropyType::Nonsingular);
    }

    #[test]
    fn wreath_gl22_s2() {
        let inner = sl2(2).unwrap(); // GL(2,2) = SL(2,2)
        let w = wreath_embed(&inner, 2).unwrap();
        assert_eq!(w.close(ORDER_CAP).unwrap().order(), 72);
    }

    #[test]
    fn direct_sum_product_order() {
        let c = direct_sum(&[sl2(3).unwrap(), sl2(3).unwrap()]).unwrap();
        let g = c.close(ORDER_CAP).unwrap();
        assert_eq!(g.order(), 576);
        assert_eq!(c.spaces.len(), 2);
    }

    #[test]
    fn tensor_central_product_e9() {
        let a = extraspecial_rep(3, 1, 4).unwrap();
        let t = tensor_embed(&a, &a).unwrap();
        assert_eq!(t.spaces[0].1, 9);
        let g = t.close(ORDER_CAP).unwrap();
        assert_eq!(g.order(), 243); // 3^(1+4)
    }

    #[test]
    fn affine_groups() {
        assert_eq!(affine(11, 5).unwrap().close(ORDER_CAP).unwrap().order(), 55);
        assert_eq!(affine(16, 15).unwrap().close(ORDER_CAP).unwrap().order(), 240);
        assert_eq!(affine(31, 5).unwrap().close(ORDER_CAP).unwrap().order(), 155);
    }

    #[test]
    fn symplectic_basis_transform() {
        let f3 = FiniteField::get(3, 1).unwrap();
        // tensor form I2 (x) J2
        let s2 = SymplecticSpace::standard(f3.clone(), 2).unwrap();
        let mut b = Matrix::zero(f3.clone(), 4);
        for i in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    b.set(i * 2 + r, i * 2 + c, s2.gram.at(r, c));
                }
            }
        }
        let p = symplectic_basis(&b).unwrap();
        let s4 = SymplecticSpace::standard(f3, 4).unwrap();
        assert_eq!(p.transpose().mul(&b).mul(&p), s4.gram);
    }

    #[test]
    fn gamma0_is_transitive_on_nonzero() {
        // multiplication by a generator cycles through all nonzero vectors
        let c = gamma0(2, 4).unwrap();
        let Elem::Mats(v) = &c.gens[0] else { unreachable!() };
        let m = &v[0];
        let mut seen = HashSet::new();
        let mut vec = decode_vec(1, 2, 4);
        for _ in 0..15 {
            vec = m.apply(&vec);
            seen.insert(vec.clone());
        }
        assert_eq!(seen.len(), 15);
    }
}
