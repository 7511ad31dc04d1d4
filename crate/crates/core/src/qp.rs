//! Quasi-primitivity testing and the structure decomposition of a solvable
//! group acting faithfully, irreducibly and quasi-primitively on a finite
//! vector space: the normal chain Z <= U <= F <= A <= G together with the
//! extraspecial components E_i, the invariant e, the irreducible U-submodule
//! W and the exponent b with |V| = |W|^(e b). Every clause of the structure
//! theorem is an independently runnable named check; `decompose` never
//! returns without all of them asserted.
//!
//! Homogeneity of a restriction V_N is decided by an isotypic-component
//! computation: find one irreducible N-submodule W1 (shrinking cyclic spans
//! over N-orbit representatives until every representative inside the
//! candidate spans all of it), solve for a basis of Hom_N(W1, V) by linear
//! systems, and compare the span of all images with V. The brute-force
//! all-pairs constituent comparison lives in the test suite as the
//! independent oracle.

use serde::{Deserialize, Serialize};

use crate::action::ModuleAction;
use crate::error::{Error, Result};
use crate::gf::{decode_vec, encode_vec, euler_phi, prime_factors, Field, Matrix};
use crate::grp::{is_p_power, small_generating_set, EnumeratedGroup, Subgroup};

// ---------------------------------------------------------------------------
// Echelonized subspaces and module machinery
// ---------------------------------------------------------------------------

/// Subspace in reduced echelon form; rows are ordered by pivot column.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub field: Field,
    pub ambient: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn empty(field: Field, ambient: usize) -> Subspace {
        Subspace {
            field,
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Residual of v after reduction by the basis.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            let c = w[p];
            if c != 0 {
                for i in 0..self.ambient {
                    w[i] = f.sub(w[i], f.mul(c, row[i]));
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&c| c == 0)
    }

    /// Inserts v, returns true when the dimension grew.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        let f = self.field.clone();
        let mut w = self.reduce(v);
        let Some(pivot) = w.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = f.inv(w[pivot]).expect("nonzero pivot");
        for c in w.iter_mut() {
            *c = f.mul(*c, inv);
        }
        // eliminate the new pivot column from existing rows
        for row in self.rows.iter_mut() {
            let c = row[pivot];
            if c != 0 {
                for i in 0..self.ambient {
                    row[i] = f.sub(row[i], f.mul(c, w[i]));
                }
            }
        }
        let pos = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(pos, pivot);
        self.rows.insert(pos, w);
        true
    }

    /// Coordinates of v in the row basis; None when v is outside.
    pub fn coords_of(&self, v: &[u32]) -> Option<Vec<u32>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p]).collect())
    }

    /// All packed codes in the span (base-q of the ambient field).
    pub fn enumerate_codes(&self) -> Vec<u64> {
        let f = &self.field;
        let mut codes = Vec::with_capacity((f.q as usize).pow(self.dim() as u32));
        let mut counters = vec![0u32; self.dim()];
        loop {
            let mut v = vec![0u32; self.ambient];
            for (row, &c) in self.rows.iter().zip(counters.iter()) {
                if c != 0 {
                    for i in 0..self.ambient {
                        v[i] = f.add(v[i], f.mul(c, row[i]));
                    }
                }
            }
            codes.push(encode_vec(&v, f.q));
            let mut pos = 0;
            loop {
                if pos == counters.len() {
                    return codes;
                }
                counters[pos] += 1;
                if (counters[pos] as u64) < f.q {
                    break;
                }
                counters[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Smallest invariant subspace containing the seed.
pub fn spin(mats: &[Matrix], seed: &[u32], field: &Field, ambient: usize) -> Subspace {
    let mut sp = Subspace::empty(field.clone(), ambient);
    sp.insert(seed);
    loop {
        let before = sp.dim();
        let snapshot = sp.rows.clone();
        for r in &snapshot {
            for m in mats {
                sp.insert(&m.apply(r));
            }
        }
        if sp.dim() == before {
            return sp;
        }
    }
}

/// Matrix of m restricted to the invariant subspace w, in basis coordinates.
pub fn restrict(m: &Matrix, w: &Subspace) -> Result<Matrix> {
    let d = w.dim();
    let mut out = Matrix::zero(w.field.clone(), d.max(1));
    if d == 0 {
        return Ok(out);
    }
    for (i, row) in w.rows.iter().enumerate() {
        let img = m.apply(row);
        let coords = w
            .coords_of(&img)
            .ok_or_else(|| Error::internal("subspace not invariant under restriction"))?;
        for (j, &c) in coords.iter().enumerate() {
            out.set(i, j, c);
        }
    }
    Ok(out)
}

/// Nullspace of a rectangular system (rows of length ncols), echelon basis.
pub fn nullspace(rows: &[Vec<u32>], field: &Field, ncols: usize) -> Vec<Vec<u32>> {
    let f = field;
    let mut mat: Vec<Vec<u32>> = rows.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut rr = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rr..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(pr, rr);
        let inv = f.inv(mat[rr][col]).expect("nonzero pivot");
        for c in 0..ncols {
            mat[rr][c] = f.mul(mat[rr][c], inv);
        }
        for r in 0..mat.len() {
            if r != rr && mat[r][col] != 0 {
                let factor = mat[r][col];
                for c in 0..ncols {
                    let s = f.mul(factor, mat[rr][c]);
                    mat[r][c] = f.sub(mat[r][c], s);
                }
            }
        }
        pivots.push((rr, col));
        rr += 1;
        if rr == mat.len() {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for &(r, c) in &pivots {
            v[c] = f.neg(mat[r][free]);
        }
        basis.push(v);
    }
    basis
}

/// Basis of Hom(W, ambient space) equivariant for the listed matrices,
/// as flat d*n coefficient vectors (row i = image of basis vector i).
pub fn hom_space_into_ambient(mats: &[Matrix], w: &Subspace) -> Result<Vec<Vec<u32>>> {
    let f = &w.field;
    let d = w.dim();
    let n = w.ambient;
    let unknowns = d * n;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for m in mats {
        let r = restrict(m, w)?;
        // equation per (i, c): sum_j R[i][j] F[j][c] - sum_c' M[c][c'] F[i][c'] = 0
        for i in 0..d {
            for c in 0..n {
                let mut eq = vec![0u32; unknowns];
                for j in 0..d {
                    let coef = r.at(i, j);
                    if coef != 0 {
                        eq[j * n + c] = f.add(eq[j * n + c], coef);
                    }
                }
                for cp in 0..n {
                    let coef = m.at(c, cp);
                    if coef != 0 {
                        eq[i * n + cp] = f.sub(eq[i * n + cp], coef);
                    }
                }
                rows.push(eq);
            }
        }
    }
    Ok(nullspace(&rows, f, unknowns))
}

/// Basis of Hom(Wa, Wb) equivariant for the listed matrices, as flat
/// da*db coefficient vectors.
pub fn hom_space_between(mats: &[Matrix], wa: &Subspace, wb: &Subspace) -> Result<Vec<Vec<u32>>> {
    let f = &wa.field;
    let da = wa.dim();
    let db = wb.dim();
    let unknowns = da * db;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for m in mats {
        let ra = restrict(m, wa)?;
        let rb = restrict(m, wb)?;
        // equation per (i, c): sum_j Ra[i][j] F[j][c] - sum_c' F[i][c'] Rb[c'][c] = 0
        for i in 0..da {
            for c in 0..db {
                let mut eq = vec![0u32; unknowns];
                for j in 0..da {
                    let coef = ra.at(i, j);
                    if coef != 0 {
                        eq[j * db + c] = f.add(eq[j * db + c], coef);
                    }
                }
                for cp in 0..db {
                    let coef = rb.at(cp, c);
                    if coef != 0 {
                        eq[i * db + cp] = f.sub(eq[i * db + cp], coef);
                    }
                }
                rows.push(eq);
            }
        }
    }
    Ok(nullspace(&rows, f, unknowns))
}

/// One irreducible submodule, found by shrinking cyclic spans: starting from
/// the minimal nonzero orbit representative, replace the candidate by any
/// properly smaller span of a representative inside it, until every
/// representative inside the candidate spans all of it (which certifies
/// irreducibility, since spans are constant along orbits).
pub fn irreducible_submodule(
    mats: &[Matrix],
    reps: &[u64],
    field: &Field,
    ambient: usize,
) -> Subspace {
    let q = field.q;
    let first = reps.iter().copied().find(|&r| r != 0).expect("nonzero rep");
    let mut w = spin(mats, &decode_vec(first, q, ambient), field, ambient);
    'outer: loop {
        for &r in reps {
            if r == 0 {
                continue;
            }
            let v = decode_vec(r, q, ambient);
            if w.contains(&v) {
                let s = spin(mats, &v, field, ambient);
                if s.dim() < w.dim() {
                    w = s;
                    continue 'outer;
                }
            }
        }
        return w;
    }
}

/// Is the restriction to the subgroup generated by `mats` homogeneous:
/// the isotypic component of one irreducible submodule is everything.
pub fn is_homogeneous(
    mats: &[Matrix],
    reps: &[u64],
    field: &Field,
    ambient: usize,
) -> Result<bool> {
    let w1 = irreducible_submodule(mats, reps, field, ambient);
    if w1.dim() == ambient {
        return Ok(true);
    }
    let homs = hom_space_into_ambient(mats, &w1)?;
    let mut span = Subspace::empty(field.clone(), ambient);
    let d = w1.dim();
    for h in &homs {
        for i in 0..d {
            span.insert(&h[i * ambient..(i + 1) * ambient]);
        }
        if span.dim() == ambient {
            return Ok(true);
        }
    }
    Ok(span.dim() == ambient)
}

// ---------------------------------------------------------------------------
// Action-level helpers
// ---------------------------------------------------------------------------

fn single_space(a: &ModuleAction) -> Result<(Field, usize)> {
    if a.spaces.len() != 1 {
        return Err(Error::usage(
            "operation requires a single-summand (irreducible) module",
        ));
    }
    Ok((a.spaces[0].0.clone(), a.spaces[0].1))
}

/// First-block matrices of the given element indices.
pub fn block_mats(a: &ModuleAction, idxs: &[u32]) -> Vec<Matrix> {
    idxs.iter().map(|&i| a.blocks_of(i)[0].clone()).collect()
}

/// Is V irreducible for the group: the span of every nonzero orbit
/// representative is the whole space. Exact for any size: a proper invariant
/// subspace contains full orbits, hence their representatives.
pub fn is_irreducible(a: &ModuleAction) -> Result<bool> {
    let (field, n) = single_space(a)?;
    let orb = a.orbits();
    let mats = block_mats(a, &a.group.gens.clone());
    for &r in &orb.reps {
        if r == 0 {
            continue;
        }
        let w = spin(&mats, &decode_vec(r, field.q, n), &field, n);
        if w.dim() != n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Is the given summand of a (possibly multi-summand) action irreducible.
pub fn summand_irreducible(a: &ModuleAction, which: usize) -> Result<bool> {
    let (field, n) = a.spaces[which].clone();
    let mats: Vec<Matrix> = (0..a.group.order() as u32)
        .map(|i| a.blocks_of(i)[which].clone())
        .collect();
    let gen_mats: Vec<Matrix> = a
        .group
        .gens
        .iter()
        .map(|&g| a.blocks_of(g)[which].clone())
        .collect();
    // orbit reps of the summand space under the block action
    let size = field.q.pow(n as u32) as usize;
    let mut orbit_of = vec![u32::MAX; size];
    let mut reps = Vec::new();
    for start in 0..size as u64 {
        if orbit_of[start as usize] != u32::MAX {
            continue;
        }
        let id = reps.len() as u32;
        reps.push(start);
        let mut stack = vec![start];
        orbit_of[start as usize] = id;
        while let Some(c) = stack.pop() {
            let v = decode_vec(c, field.q, n);
            for m in &gen_mats {
                let y = encode_vec(&m.apply(&v), field.q);
                if orbit_of[y as usize] == u32::MAX {
                    orbit_of[y as usize] = id;
                    stack.push(y);
                }
            }
        }
    }
    let _ = mats;
    for &r in &reps {
        if r == 0 {
            continue;
        }
        let w = spin(&gen_mats, &decode_vec(r, field.q, n), &field, n);
        if w.dim() != n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Quasi-primitivity: V irreducible and V_N homogeneous for every normal
/// subgroup N of G.
pub fn is_quasiprimitive(a: &ModuleAction, class_cap: usize) -> Result<bool> {
    let (field, n) = single_space(a)?;
    if !is_irreducible(a)? {
        return Err(Error::usage("module is reducible"));
    }
    let normals = a.group.normal_subgroups(class_cap)?;
    for nsub in &normals {
        if nsub.is_trivial() || nsub.order() == a.group.order() {
            continue;
        }
        let gens = if nsub.gens.is_empty() {
            nsub.elems.clone()
        } else {
            nsub.gens.clone()
        };
        let reps = a.orbits_with_gens(&gens).reps;
        let mats = block_mats(a, &gens);
        if !is_homogeneous(&mats, &reps, &field, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The E/Z quotient as a G-module over GF(p)
// ---------------------------------------------------------------------------

/// The elementary abelian section E_i/Z_i as a GF(p) module with the
/// conjugation action, realized through coset identifiers in the parent.
pub struct SectionModule {
    pub p: u64,
    pub field: Field,
    pub dim: usize,
    /// basis coset representatives (parent element indices)
    pub basis: Vec<u32>,
    /// coset id (minimal member index) -> coordinates
    coords: std::collections::HashMap<u32, Vec<u32>>,
}

impl SectionModule {
    /// Builds the section top/bottom as a GF(p) space; requires the section
    /// to be elementary abelian of exponent p.
    pub fn new(g: &EnumeratedGroup, top: &Subgroup, bottom: &Subgroup, p: u64) -> Result<Self> {
        let field = crate::gf::FiniteField::get(p, 1)?;
        let coset_id = |x: u32| -> u32 {
            bottom
                .elems
                .iter()
                .map(|&z| g.mul(x, z))
                .min()
                .expect("nonempty bottom")
        };
        let id0 = coset_id(0);
        let mut coords: std::collections::HashMap<u32, Vec<u32>> =
            std::collections::HashMap::new();
        coords.insert(id0, vec![]);
        let mut basis: Vec<u32> = Vec::new();
        let target = (top.order() / bottom.order()) as usize;
        for &cand in &top.elems {
            if coords.len() >= target {
                break;
            }
            let cid = coset_id(cand);
            if coords.contains_key(&cid) {
                continue;
            }
            basis.push(cand);
            let pos = basis.len() - 1;
            let old: Vec<(u32, Vec<u32>)> = coords
                .iter()
                .map(|(k, v)| (*k, v.clone()))
                .collect();
            for (rep_id, cvec) in old {
                // a representative element with this id
                let rep = rep_id;
                let mut pw = cand;
                for s in 1..p as u32 {
                    let nv = coset_id(g.mul(rep, pw));
                    let mut nc = cvec.clone();
                    nc.resize(pos, 0);
                    nc.push(s);
                    coords.entry(nv).or_insert(nc);
                    pw = g.mul(pw, cand);
                }
            }
        }
        if coords.len() != target {
            return Err(Error::internal("section is not elementary abelian"));
        }
        let dim = basis.len();
        let mut full: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
        for (k, mut v) in coords {
            v.resize(dim, 0);
            full.insert(k, v);
        }
        Ok(SectionModule {
            p,
            field,
            dim,
            basis,
            coords: full,
        })
    }

    pub fn coords_of_element(&self, g: &EnumeratedGroup, bottom: &Subgroup, x: u32) -> Vec<u32> {
        let cid = bottom
            .elems
            .iter()
            .map(|&z| g.mul(x, z))
            .min()
            .expect("nonempty bottom");
        self.coords[&cid].clone()
    }

    /// Matrix of conjugation by a on the section.
    pub fn conj_matrix(&self, g: &EnumeratedGroup, bottom: &Subgroup, a: u32) -> Matrix {
        let mut m = Matrix::zero(self.field.clone(), self.dim.max(1));
        for (j, &b) in self.basis.iter().enumerate() {
            let img = g.conj(b, a);
            for (i, &c) in self
                .coords_of_element(g, bottom, img)
                .iter()
                .enumerate()
            {
                m.set(i, j, c);
            }
        }
        m
    }

    /// Alternating commutator form beta(x, y) defined by [x, y] = z^beta for
    /// the fixed generator z of the bottom (which must be cyclic of order p).
    pub fn commutator_form(
        &self,
        g: &EnumeratedGroup,
        bottom: &Subgroup,
        zgen: u32,
        x: u32,
        y: u32,
    ) -> Result<u32> {
        let c = g.commutator(x, y);
        let mut acc = 0u32;
        for t in 0..self.p as u32 {
            if acc == c {
                return Ok(t);
            }
            acc = g.mul(acc, zgen);
        }
        let _ = bottom;
        Err(Error::internal("commutator outside the cyclic center"))
    }
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct QpComponent {
    pub p: u64,
    pub p_i: Subgroup,
    pub z_i: Subgroup,
    pub e_i: Subgroup,
    pub t_i: Subgroup,
    pub u_i: Subgroup,
    /// p^(n_i) when E_i > Z_i, else 1.
    pub e_i_value: u64,
}

#[derive(Clone, Debug)]
pub struct QpDecomposition {
    pub z: Subgroup,
    pub u: Subgroup,
    pub f: Subgroup,
    pub a: Subgroup,
    pub e: Subgroup,
    pub components: Vec<QpComponent>,
    pub e_value: u64,
    pub w: Subspace,
    pub w_size: u64,
    pub b: u32,
    pub dim_w: usize,
    /// Set when the index-2 cyclic subgroup of a non-cyclic T_i was not
    /// unique; the canonical (minimal) choice was taken.
    pub u_choice_ambiguous: bool,
    pub clause_results: Vec<(String, bool)>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DecompositionReport {
    pub group_order: u64,
    pub z_order: u64,
    pub u_order: u64,
    pub f_order: u64,
    pub a_order: u64,
    pub e_order: u64,
    pub e_i: Vec<u64>,
    pub e: u64,
    pub w_size: u64,
    pub b: u32,
    pub dim_w: usize,
    pub clauses: Vec<(String, bool)>,
    pub order_lemma_holds: bool,
    pub order_lemma_lhs: String,
    pub order_lemma_rhs: String,
    pub u_choice_ambiguous: bool,
}

fn center_of(g: &EnumeratedGroup, sub: &Subgroup) -> Vec<u32> {
    let targets: &[u32] = if sub.gens.is_empty() {
        &sub.elems
    } else {
        &sub.gens
    };
    g.centralizer(&sub.elems, targets)
}

/// Omega_1 of an abelian p-subgroup given by its element list: the elements
/// of order dividing p.
fn omega1_of_abelian(g: &EnumeratedGroup, elems: &[u32], p: u64) -> Subgroup {
    let elems: Vec<u32> = elems
        .iter()
        .copied()
        .filter(|&x| x == 0 || g.order_of(x) as u64 == p)
        .collect();
    let gens = small_generating_set(g, &elems);
    Subgroup { elems, gens }
}

/// Omega_1 of a p-group: the subgroup generated by its order-p elements.
fn omega1_subgroup(g: &EnumeratedGroup, sub: &Subgroup, p: u64) -> Subgroup {
    let seeds: Vec<u32> = sub
        .elems
        .iter()
        .copied()
        .filter(|&x| x != 0 && g.order_of(x) as u64 == p)
        .collect();
    if seeds.is_empty() {
        Subgroup::trivial()
    } else {
        g.subgroup_closure(&seeds)
    }
}

/// Iterated commutator [L, G, ..., G] until stabilization.
fn iterated_commutator_with_group(g: &EnumeratedGroup, start: &Subgroup, cap: usize) -> Subgroup {
    let mut cur = start.clone();
    for _ in 0..cap {
        let mut seeds: Vec<u32> = Vec::new();
        for &l in &cur.elems {
            for &gg in &g.gens {
                let c = g.commutator(l, gg);
                if c != 0 {
                    seeds.push(c);
                }
            }
        }
        seeds.sort_unstable();
        seeds.dedup();
        let next = if seeds.is_empty() {
            Subgroup::trivial()
        } else {
            g.normal_closure(&seeds)
        };
        if next.elems == cur.elems {
            return cur;
        }
        cur = next;
        if cur.is_trivial() {
            return cur;
        }
    }
    cur
}

pub fn decompose(a: &ModuleAction, class_cap: usize) -> Result<QpDecomposition> {
    let (field, n) = single_space(a)?;
    let g = &a.group;
    if !g.is_solvable() {
        return Err(Error::usage("group is not solvable"));
    }
    if !a.is_faithful() {
        return Err(Error::usage("action is not faithful"));
    }
    if !is_quasiprimitive(a, class_cap)? {
        return Err(Error::usage("module is not quasi-primitive"));
    }

    let fitting = g.fitting();
    let primes = prime_factors(fitting.order());
    let mut components = Vec::new();
    let mut ambiguous = false;
    for &p in &primes {
        let p_i = g.p_core(p);
        let z_center = center_of(g, &p_i);
        let z_i = omega1_of_abelian(g, &z_center, p);
        let e_i = if p % 2 == 1 {
            omega1_subgroup(g, &p_i, p)
        } else {
            let lim = iterated_commutator_with_group(g, &p_i, 20);
            if lim.is_trivial() {
                z_i.clone()
            } else {
                lim
            }
        };
        // T_i = C_{P_i}(E_i)
        let t_targets: &[u32] = if e_i.gens.is_empty() {
            &e_i.elems
        } else {
            &e_i.gens
        };
        let t_elems = g.centralizer(&p_i.elems, t_targets);
        let t_i = Subgroup {
            gens: small_generating_set(g, &t_elems),
            elems: t_elems,
        };
        // U_i: T_i when p odd or T_i cyclic; else the index-2 cyclic
        // subgroup with C_{T_i}(U_i) = U_i, normal in G
        let u_i = if p % 2 == 1 || g.is_cyclic_subgroup(&t_i) {
            t_i.clone()
        } else {
            let half = t_i.order() / 2;
            let mut candidates: Vec<Subgroup> = Vec::new();
            let mut seen: std::collections::HashSet<Vec<u32>> = std::collections::HashSet::new();
            for &x in &t_i.elems {
                if g.order_of(x) as u64 != half {
                    continue;
                }
                let c = g.subgroup_closure(&[x]);
                if !seen.insert(c.elems.clone()) {
                    continue;
                }
                let centr = g.centralizer(&t_i.elems, &c.gens);
                if centr == c.elems && g.is_normal(&c) {
                    candidates.push(c);
                }
            }
            candidates.sort_by(|x, y| x.elems.cmp(&y.elems));
            if candidates.is_empty() {
                return Err(Error::structure(
                    "component-U",
                    format!("no cyclic index-2 subgroup for the non-cyclic 2-part T (order {})", t_i.order()),
                ));
            }
            if candidates.len() > 1 {
                ambiguous = true;
            }
            candidates[0].clone()
        };
        let e_i_value = if e_i.elems == z_i.elems {
            1
        } else {
            let ratio = e_i.order() / z_i.order();
            let root = (ratio as f64).sqrt().round() as u64;
            if root * root != ratio {
                return Err(Error::structure(
                    "clause-3",
                    format!("|E_i/Z_i| = {ratio} is not a perfect square"),
                ));
            }
            root
        };
        components.push(QpComponent {
            p,
            p_i,
            z_i,
            e_i,
            t_i,
            u_i,
            e_i_value,
        });
    }

    let gather = |pick: &dyn Fn(&QpComponent) -> Option<&Subgroup>| -> Subgroup {
        let mut gens = Vec::new();
        for c in &components {
            if let Some(s) = pick(c) {
                gens.extend(if s.gens.is_empty() {
                    s.elems.clone()
                } else {
                    s.gens.clone()
                });
            }
        }
        if gens.is_empty() {
            Subgroup::trivial()
        } else {
            g.subgroup_closure(&gens)
        }
    };
    let in_s = |c: &QpComponent| c.e_i.elems != c.z_i.elems;
    let e = gather(&|c| if in_s(c) { Some(&c.e_i) } else { None });
    let z = gather(&|c| if in_s(c) { Some(&c.z_i) } else { None });
    let u = gather(&|c| Some(&c.u_i));
    let mut f_gens: Vec<u32> = Vec::new();
    f_gens.extend(&e.gens);
    f_gens.extend(&u.gens);
    let f = if f_gens.is_empty() {
        Subgroup::trivial()
    } else {
        g.subgroup_closure(&f_gens)
    };
    let whole: Vec<u32> = (0..g.order() as u32).collect();
    let a_targets: &[u32] = if u.gens.is_empty() { &u.elems } else { &u.gens };
    let a_elems = g.centralizer(&whole, a_targets);
    let a_sub = Subgroup {
        gens: small_generating_set(g, &a_elems),
        elems: a_elems,
    };

    let e_value: u64 = components.iter().map(|c| c.e_i_value).product();

    // W: irreducible U-submodule found from the minimal nonzero code
    let u_gens = if u.gens.is_empty() {
        u.elems.clone()
    } else {
        u.gens.clone()
    };
    let u_mats = block_mats(a, &u_gens);
    let u_reps = if u_gens.is_empty() {
        (0..a.space_size()).collect::<Vec<u64>>()
    } else {
        a.orbits_with_gens(&u_gens).reps
    };
    let w = irreducible_submodule(&u_mats, &u_reps, &field, n);
    let dim_w = w.dim();
    let w_size = field.q.pow(dim_w as u32);
    // b from |V| = |W|^(e b)
    let total_dim = n as u64;
    let denom = e_value * dim_w as u64;
    if denom == 0 || total_dim % denom != 0 {
        return Err(Error::structure(
            "clause-7",
            format!("|V| = q^{n} is not |W|^(e b) for e = {e_value}, dim W = {dim_w}"),
        ));
    }
    let b = (total_dim / denom) as u32;

    let mut dec = QpDecomposition {
        z,
        u,
        f,
        a: a_sub,
        e,
        components,
        e_value,
        w,
        w_size,
        b,
        dim_w,
        u_choice_ambiguous: ambiguous,
        clause_results: Vec::new(),
    };
    let mut results = Vec::new();
    for idx in 1..=9 {
        let r = check_clause(a, &dec, idx);
        results.push((format!("clause-{idx}"), r.is_ok()));
        r?;
    }
    dec.clause_results = results;
    Ok(dec)
}

/// Named executable checks of the structure theorem's nine clauses.
pub fn check_clause(a: &ModuleAction, d: &QpDecomposition, idx: usize) -> Result<()> {
    let g = &a.group;
    let fail = |detail: String| -> Result<()> {
        Err(Error::structure(format!("clause-{idx}"), detail))
    };
    match idx {
        1 => {
            // F = EU central product, Z = E cap U = Z(E), C_G(F) <= F
            let prod = g.product_set(&d.e, &d.u);
            if prod != d.f.elems {
                return fail("F != E*U as sets".into());
            }
            let inter = EnumeratedGroup::intersect(&d.e, &d.u);
            if inter.elems != d.z.elems {
                return fail("E cap U != Z".into());
            }
            let zcenter = if d.e.is_trivial() {
                vec![0]
            } else {
                center_of(g, &d.e)
            };
            let mut zc = zcenter;
            zc.sort_unstable();
            if zc != d.z.elems {
                return fail("Z != Z(E)".into());
            }
            let f_targets: &[u32] = if d.f.gens.is_empty() {
                &d.f.elems
            } else {
                &d.f.gens
            };
            let whole: Vec<u32> = (0..g.order() as u32).collect();
            let cf = g.centralizer(&whole, f_targets);
            if !cf.iter().all(|x| d.f.contains(*x)) {
                return fail("C_G(F) not contained in F".into());
            }
            Ok(())
        }
        2 => {
            // F/U isomorphic to E/Z (via the natural map, given clause 1),
            // and E/Z is a direct sum of completely reducible G-modules:
            // each E_i/Z_i is elementary abelian with full socle
            if d.f.order() / d.u.order() != d.e.order() / d.z.order() {
                return fail("|F/U| != |E/Z|".into());
            }
            for c in d.components.iter().filter(|c| c.e_i.elems != c.z_i.elems) {
                for &x in &c.e_i.elems {
                    if !c.z_i.contains(g.pow_index(x, c.p)) {
                        return fail(format!("E_i/Z_i not elementary abelian at p={}", c.p));
                    }
                }
                let sec = SectionModule::new(g, &c.e_i, &c.z_i, c.p)?;
                let mats: Vec<Matrix> = g
                    .gens
                    .iter()
                    .map(|&gg| sec.conj_matrix(g, &c.z_i, gg))
                    .collect();
                // socle = sum of all irreducible cyclic submodules
                let total = (c.p as usize).pow(sec.dim as u32);
                let mut socle = Subspace::empty(sec.field.clone(), sec.dim);
                let all: Vec<u64> = (0..total as u64).collect();
                for &code in &all {
                    if code == 0 {
                        continue;
                    }
                    let v = decode_vec(code, c.p, sec.dim);
                    let span = spin(&mats, &v, &sec.field, sec.dim);
                    // keep only irreducible spans
                    let mut irr = true;
                    for &inner in &all {
                        if inner == 0 {
                            continue;
                        }
                        let w = decode_vec(inner, c.p, sec.dim);
                        if span.contains(&w) && spin(&mats, &w, &sec.field, sec.dim).dim() < span.dim()
                        {
                            irr = false;
                            break;
                        }
                    }
                    if irr {
                        for r in span.rows() {
                            socle.insert(r);
                        }
                    }
                }
                if socle.dim() != sec.dim {
                    return fail(format!(
                        "E_i/Z_i socle has dimension {} < {}",
                        socle.dim(),
                        sec.dim
                    ));
                }
            }
            Ok(())
        }
        3 => {
            let (field, n) = single_space(a)?;
            for c in d.components.iter().filter(|c| c.e_i.elems != c.z_i.elems) {
                // extraspecial: |Z(E_i)| = p, derived = center = Z_i
                let center = {
                    let mut z = center_of(g, &c.e_i);
                    z.sort_unstable();
                    z
                };
                if center.len() as u64 != c.p {
                    return fail(format!("|Z(E_i)| = {} != {}", center.len(), c.p));
                }
                if center != c.z_i.elems {
                    return fail("Z(E_i) != Z_i".into());
                }
                let der = g.derived_subgroup(&c.e_i);
                if der.elems != c.z_i.elems {
                    return fail("[E_i,E_i] != Z_i".into());
                }
                if !is_p_power(c.e_i_value, c.p) || c.e_i_value == 1 {
                    return fail(format!("e_i = {} is not a positive power of {}", c.e_i_value, c.p));
                }
            }
            // pairwise coprime e_i (distinct primes), e | n, gcd(r, e) = 1
            if n as u64 % d.e_value.max(1) != 0 {
                return fail(format!("e = {} does not divide dim V = {n}", d.e_value));
            }
            if num_integer::gcd(field.p, d.e_value) != 1 {
                return fail("gcd(char, e) != 1".into());
            }
            Ok(())
        }
        4 => {
            // A = C_G(U), G/A embeds in Aut(U), A/F faithful on E/Z
            let whole: Vec<u32> = (0..g.order() as u32).collect();
            let u_targets: &[u32] = if d.u.gens.is_empty() {
                &d.u.elems
            } else {
                &d.u.gens
            };
            let ca = g.centralizer(&whole, u_targets);
            if ca != d.a.elems {
                return fail("A != C_G(U)".into());
            }
            let aut_order = euler_phi(d.u.order());
            let index = g.order() / d.a.order();
            if aut_order % index != 0 {
                return fail(format!("|G:A| = {index} does not divide |Aut(U)| = {aut_order}"));
            }
            // C_A(E/Z) = F
            let e_targets: Vec<u32> = if d.e.gens.is_empty() {
                d.e.elems.clone()
            } else {
                d.e.gens.clone()
            };
            let ca_ez: Vec<u32> = d
                .a
                .elems
                .iter()
                .copied()
                .filter(|&x| {
                    e_targets
                        .iter()
                        .all(|&ee| d.z.contains(g.commutator(ee, x)))
                })
                .collect();
            if ca_ez != d.f.elems {
                return fail("C_A(E/Z) != F (A/F not faithful on E/Z)".into());
            }
            Ok(())
        }
        5 => {
            // A / C_A(E_i/Z_i) embeds in Sp(2n_i, p_i) and preserves the
            // commutator form
            for c in d.components.iter().filter(|c| c.e_i.elems != c.z_i.elems) {
                let sec = SectionModule::new(g, &c.e_i, &c.z_i, c.p)?;
                let two_n = sec.dim as u32;
                let zgen = *c
                    .z_i
                    .elems
                    .iter()
                    .find(|&&x| x != 0)
                    .ok_or_else(|| Error::internal("trivial Z_i in component"))?;
                // form preservation on basis pairs for generators of A
                for &aa in if d.a.gens.is_empty() { &d.a.elems } else { &d.a.gens } {
                    for &x in &sec.basis {
                        for &y in &sec.basis {
                            let before = sec.commutator_form(g, &c.z_i, zgen, x, y)?;
                            let after =
                                sec.commutator_form(g, &c.z_i, zgen, g.conj(x, aa), g.conj(y, aa))?;
                            if before != after {
                                return fail("conjugation does not preserve the commutator form".into());
                            }
                        }
                    }
                }
                // order of the image divides |Sp(2n_i, p_i)|
                let ca: Vec<u32> = d
                    .a
                    .elems
                    .iter()
                    .copied()
                    .filter(|&x| {
                        c.e_i
                            .elems
                            .iter()
                            .all(|&ee| c.z_i.contains(g.commutator(ee, x)))
                    })
                    .collect();
                let image_order = d.a.order() / ca.len() as u64;
                let m = two_n / 2;
                let mut sp_order: u64 = c.p.pow(m * m);
                for i in 1..=m {
                    sp_order *= c.p.pow(2 * i) - 1;
                }
                if sp_order % image_order != 0 {
                    return fail(format!(
                        "|A/C_A(E_i/Z_i)| = {image_order} does not divide |Sp({two_n},{})| = {sp_order}",
                        c.p
                    ));
                }
            }
            Ok(())
        }
        6 => {
            if !g.is_cyclic_subgroup(&d.u) {
                return fail("U is not cyclic".into());
            }
            if (d.w_size - 1) % d.u.order().max(1) != 0 {
                return fail(format!(
                    "|U| = {} does not divide |W| - 1 = {}",
                    d.u.order(),
                    d.w_size - 1
                ));
            }
            // fixed-point freeness on W
            for &x in &d.u.elems {
                if x == 0 {
                    continue;
                }
                let m = &a.blocks_of(x)[0];
                let r = restrict(m, &d.w)?;
                if !r.minus_identity().kernel_basis().is_empty() {
                    return fail("a nontrivial element of U fixes a nonzero vector of W".into());
                }
            }
            Ok(())
        }
        7 => {
            let (_, n) = single_space(a)?;
            let lhs = n as u64;
            let rhs = d.e_value * d.b as u64 * d.dim_w as u64;
            if lhs != rhs || d.b == 0 {
                return fail(format!("dim V = {lhs} != e*b*dim W = {rhs}"));
            }
            Ok(())
        }
        8 => {
            let index = g.order() / d.a.order();
            if d.dim_w as u64 % index != 0 {
                return fail(format!("|G:A| = {index} does not divide dim W = {}", d.dim_w));
            }
            let v_size = a.space_size() as u128;
            for x in 0..g.order() as u32 {
                if d.a.contains(x) {
                    continue;
                }
                let o = g.order_of(x) as u64;
                if prime_factors(o) != vec![o] {
                    continue;
                }
                let fc = a.fixed_count(x);
                let mut pow = 1u128;
                for _ in 0..o {
                    pow = pow.saturating_mul(fc);
                }
                if pow != v_size {
                    return fail(format!(
                        "fixed count {fc} of prime-order {o} element outside A: {fc}^{o} != |V|"
                    ));
                }
            }
            Ok(())
        }
        9 => {
            let (q, _) = g.quotient(&d.a)?;
            if !q.is_cyclic_subgroup(&q.whole()) {
                return fail("G/A is not cyclic".into());
            }
            Ok(())
        }
        _ => Err(Error::usage("clause index must be 1..=9")),
    }
}

/// Exact divisibility test of the order bound:
/// |G| divides dim(W) * |A/F| * e^2 * (|W| - 1).
pub fn order_lemma_check(d: &QpDecomposition, g: &EnumeratedGroup) -> (bool, u128, u128) {
    let lhs = g.order() as u128;
    let rhs = d.dim_w as u128
        * (d.a.order() / d.f.order()) as u128
        * (d.e_value as u128 * d.e_value as u128)
        * (d.w_size as u128 - 1).max(1);
    (rhs % lhs == 0, lhs, rhs)
}

pub fn report(a: &ModuleAction, d: &QpDecomposition) -> DecompositionReport {
    let (holds, lhs, rhs) = order_lemma_check(d, &a.group);
    DecompositionReport {
        group_order: a.group.order(),
        z_order: d.z.order(),
        u_order: d.u.order(),
        f_order: d.f.order(),
        a_order: d.a.order(),
        e_order: d.e.order(),
        e_i: d
            .components
            .iter()
            .filter(|c| c.e_i_value > 1)
            .map(|c| c.e_i_value)
            .collect(),
        e: d.e_value,
        w_size: d.w_size,
        b: d.b,
        dim_w: d.dim_w,
        clauses: d.clause_results.clone(),
        order_lemma_holds: holds,
        order_lemma_lhs: lhs.to_string(),
        order_lemma_rhs: rhs.to_string(),
        u_choice_ambiguous: d.u_choice_ambiguous,
    }
}

/// The clause-8 numeric law over all prime-order elements outside A, as a
/// standalone check for corpus sweeps.
pub fn clause8_fixed_point_law(a: &ModuleAction, d: &QpDecomposition) -> Result<()> {
    check_clause(a, d, 8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        direct_sum, extraspecial_qp, gamma, merge_blocks, sl2, wreath_embed,
    };
    use crate::grp::{Elem, CLASS_CAP, ORDER_CAP};

    fn action_of(c: &crate::families::Construction) -> ModuleAction {
        ModuleAction::from_construction(c, ORDER_CAP).unwrap()
    }

    #[test]
    fn subspace_and_spin() {
        let f3 = crate::gf::FiniteField::get(3, 1).unwrap();
        let mut s = Subspace::empty(f3.clone(), 3);
        assert!(s.insert(&[1, 2, 0]));
        assert!(s.insert(&[0, 1, 1]));
        assert!(!s.insert(&[1, 0, 1])); // (1,2,0) + (0,1,1) = (1,0,1)
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[2, 0, 2]));
        assert_eq!(s.coords_of(&[1, 2, 0]).unwrap().len(), 2);
    }

    #[test]
    fn sl23_is_quasiprimitive() {
        let a = action_of(&sl2(3).unwrap());
        assert!(is_irreducible(&a).unwrap());
        assert!(is_quasiprimitive(&a, CLASS_CAP).unwrap());
    }

    #[test]
    fn wreath_is_not_quasiprimitive() {
        let w = wreath_embed(&sl2(2).unwrap(), 2).unwrap();
        let a = action_of(&w);
        assert!(is_irreducible(&a).unwrap());
        assert!(!is_quasiprimitive(&a, CLASS_CAP).unwrap());
    }

    #[test]
    fn homogeneity_oracle_all_pairs() {
        // production isotypic method vs all-pairs constituent comparison on
        // every normal subgroup of small instances
        for c in [sl2(3).unwrap(), gamma(2, 4).unwrap(), wreath_embed(&sl2(2).unwrap(), 2).unwrap()] {
            let a = action_of(&c);
            let (field, n) = (a.spaces[0].0.clone(), a.spaces[0].1);
            for nsub in a.group.normal_subgroups(CLASS_CAP).unwrap() {
                if nsub.is_trivial() {
                    continue;
                }
                let gens = if nsub.gens.is_empty() {
                    nsub.elems.clone()
                } else {
                    nsub.gens.clone()
                };
                let reps = a.orbits_with_gens(&gens).reps;
                let mats = block_mats(&a, &gens);
                let fast = is_homogeneous(&mats, &reps, &field, n).unwrap();
                // oracle: collect all irreducible cyclic spans, compare all pairs
                let mut spans: Vec<Subspace> = Vec::new();
                for &r in &reps {
                    if r == 0 {
                        continue;
                    }
                    let v = decode_vec(r, field.q, n);
                    let s = spin(&mats, &v, &field, n);
                    let irr = reps.iter().all(|&r2| {
                        if r2 == 0 {
                            return true;
                        }
                        let w = decode_vec(r2, field.q, n);
                        !s.contains(&w) || spin(&mats, &w, &field, n).dim() == s.dim()
                    });
                    if irr && !spans.iter().any(|t| s.rows() == t.rows()) {
                        spans.push(s);
                    }
                }
                let slow = spans.windows(2).all(|pair| {
                    pair[0].dim() == pair[1].dim()
                        && !hom_space_between(&mats, &pair[0], &pair[1])
                            .unwrap()
                            .is_empty()
                }) && {
                    // also compare first vs all (windows only checks neighbors)
                    spans.iter().skip(1).all(|t| {
                        t.dim() == spans[0].dim()
                            && !hom_space_between(&mats, &spans[0], t).unwrap().is_empty()
                    })
                };
                assert_eq!(fast, slow, "homogeneity mismatch for {}", c.name);
            }
        }
    }

    #[test]
    fn decompose_sl23() {
        let a = action_of(&sl2(3).unwrap());
        let d = decompose(&a, CLASS_CAP).unwrap();
        assert_eq!(d.e_value, 2);
        assert_eq!(d.u.order(), 2);
        assert_eq!(d.f.order(), 8);
        assert_eq!(d.a.order() / d.f.order(), 3);
        assert_eq!(d.w_size, 3);
        assert_eq!(d.b, 1);
        assert_eq!(d.dim_w, 1);
        let (holds, lhs, rhs) = order_lemma_check(&d, &a.group);
        assert!(holds);
        assert_eq!((lhs, rhs), (24, 24)); // equality
    }

    #[test]
    fn decompose_gamma16() {
        let a = action_of(&gamma(2, 4).unwrap());
        let d = decompose(&a, CLASS_CAP).unwrap();
        assert_eq!(d.e_value, 1);
        assert_eq!(d.u.order(), 15);
        assert_eq!(d.f.order(), 15);
        assert_eq!(d.a.order(), 15);
        assert_eq!(d.w_size, 16);
        assert_eq!(d.b, 1);
        assert_eq!(d.dim_w, 4);
        let (holds, lhs, rhs) = order_lemma_check(&d, &a.group);
        assert!(holds);
        assert_eq!((lhs, rhs), (60, 60));
    }

    #[test]
    fn decompose_extraspecial_qp3() {
        let a = action_of(&extraspecial_qp(3, 4).unwrap());
        let d = decompose(&a, CLASS_CAP).unwrap();
        assert_eq!(d.e_value, 3);
        assert_eq!(a.spaces[0].1 as u64 % d.e_value, 0); // e | dim V
        assert_eq!(d.w_size, 4);
        assert_eq!(d.b, 1);
    }

    #[test]
    fn decompose_rejects_non_quasiprimitive() {
        let w = wreath_embed(&sl2(2).unwrap(), 2).unwrap();
        let a = action_of(&w);
        assert!(matches!(decompose(&a, CLASS_CAP), Err(Error::Usage(_))));
    }

    #[test]
    fn decompose_rejects_reducible() {
        let c = merge_blocks(&direct_sum(&[sl2(3).unwrap(), sl2(3).unwrap()]).unwrap()).unwrap();
        let a = action_of(&c);
        assert!(matches!(
            is_quasiprimitive(&a, CLASS_CAP),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn trivial_group_decomposition() {
        let f2 = crate::gf::FiniteField::get(2, 1).unwrap();
        let id = Matrix::identity(f2.clone(), 1);
        let g = EnumeratedGroup::close(vec![Elem::Mats(vec![id])], ORDER_CAP).unwrap();
        let a = ModuleAction::new(g, vec![(f2, 1)]).unwrap();
        let d = decompose(&a, CLASS_CAP).unwrap();
        assert_eq!(d.e_value, 1);
        assert_eq!(d.w_size, 2);
        let (holds, _, _) = order_lemma_check(&d, &a.group);
        assert!(holds);
    }
}
