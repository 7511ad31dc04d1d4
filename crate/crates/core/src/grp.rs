//! Finite groups given by generators (matrix or permutation images), fully
//! enumerated by breadth-first closure, with structural computations: derived
//! series, p-cores, Fitting series, conjugacy classes, normal subgroups,
//! Hall subgroups, quotients, and prime-order censuses.
//!
//! Groups are enumerated rather than handled by generator-only algorithms:
//! at corpus scale (N <= 1e5) the direct computations are tractable and
//! exact. Element index 0 is always the identity and the element ordering is
//! the deterministic BFS insertion order under sorted generator application.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Field, FiniteField, Matrix};

/// Hard cap on enumerated group order.
pub const ORDER_CAP: usize = 1_000_000;
/// Cap on quotient order for the regular-permutation realization.
pub const QUOTIENT_CAP: usize = 8192;
/// Cap on conjugacy class count for normal-subgroup lattice closure.
pub const CLASS_CAP: usize = 64;
/// Below this order a full multiplication table is materialized lazily.
pub const MULT_TABLE_CAP: u64 = 2048;

/// Underlying element: a permutation of points, or a tuple of matrices
/// (one block per module summand; blocks may live over different fields,
/// which realizes mixed-characteristic direct sums).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Elem {
    Perm(Vec<u16>),
    Mats(Vec<Matrix>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemKey {
    Small(u128),
    Big(Box<[u32]>),
}

impl Elem {
    pub fn compose(&self, rhs: &Elem) -> Elem {
        match (self, rhs) {
            (Elem::Perm(a), Elem::Perm(b)) => {
                Elem::Perm(b.iter().map(|&x| a[x as usize]).collect())
            }
            (Elem::Mats(a), Elem::Mats(b)) => {
                Elem::Mats(a.iter().zip(b.iter()).map(|(x, y)| x.mul(y)).collect())
            }
            _ => panic!("incompatible element kinds"),
        }
    }

    pub fn inverse(&self) -> Result<Elem> {
        match self {
            Elem::Perm(a) => {
                let mut out = vec![0u16; a.len()];
                for (i, &x) in a.iter().enumerate() {
                    out[x as usize] = i as u16;
                }
                Ok(Elem::Perm(out))
            }
            Elem::Mats(ms) => Ok(Elem::Mats(
                ms.iter().map(|m| m.inv()).collect::<Result<_>>()?,
            )),
        }
    }

    pub fn identity_like(&self) -> Elem {
        match self {
            Elem::Perm(a) => Elem::Perm((0..a.len() as u16).collect()),
            Elem::Mats(ms) => Elem::Mats(
                ms.iter()
                    .map(|m| Matrix::identity(m.field.clone(), m.n))
                    .collect(),
            ),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Elem::Perm(a) => a.iter().enumerate().all(|(i, &x)| i == x as usize),
            Elem::Mats(ms) => ms.iter().all(|m| m.is_identity()),
        }
    }

    pub fn key(&self) -> ElemKey {
        match self {
            Elem::Perm(a) => {
                let deg = a.len().max(2) as u128;
                if (a.len() as f64) * (deg as f64).log2() < 126.0 {
                    let mut acc = 0u128;
                    for &x in a {
                        acc = acc * deg + x as u128;
                    }
                    ElemKey::Small(acc)
                } else {
                    ElemKey::Big(a.iter().map(|&x| x as u32).collect())
                }
            }
            Elem::Mats(ms) => {
                let bits: f64 = ms
                    .iter()
                    .map(|m| (m.n * m.n) as f64 * (m.field.q as f64).log2())
                    .sum();
                if bits < 126.0 {
                    let mut acc = 0u128;
                    for m in ms {
                        let q = m.field.q as u128;
                        for &e in &m.entries {
                            acc = acc * q + e as u128;
                        }
                    }
                    ElemKey::Small(acc)
                } else {
                    ElemKey::Big(ms.iter().flat_map(|m| m.entries.iter().copied()).collect())
                }
            }
        }
    }
}

/// A subgroup of an enumerated parent group: sorted element indices plus a
/// small generating set (indices into the parent).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    pub elems: Vec<u32>,
    pub gens: Vec<u32>,
}

impl Subgroup {
    pub fn trivial() -> Subgroup {
        Subgroup {
            elems: vec![0],
            gens: vec![],
        }
    }
    pub fn order(&self) -> u64 {
        self.elems.len() as u64
    }
    pub fn contains(&self, i: u32) -> bool {
        self.elems.binary_search(&i).is_ok()
    }
    pub fn is_trivial(&self) -> bool {
        self.elems.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct Classes {
    /// element index -> class id (classes sorted by order, size, min index)
    pub class_of: Vec<u32>,
    /// class id -> minimal element index in the class
    pub reps: Vec<u32>,
    pub sizes: Vec<u64>,
    pub members: Vec<Vec<u32>>,
}

impl Classes {
    pub fn count(&self) -> usize {
        self.reps.len()
    }
}

/// Ascending Fitting chain; `complete` is false when the chain stalls before
/// reaching the whole group (non-solvable input).
#[derive(Clone, Debug)]
pub struct FittingSeries {
    pub chain: Vec<Subgroup>,
    pub complete: bool,
}

pub struct EnumeratedGroup {
    elems: Vec<Elem>,
    index: HashMap<ElemKey, u32>,
    pub gens: Vec<u32>,
    inv: Vec<u32>,
    orders: OnceLock<Vec<u32>>,
    classes: OnceLock<Classes>,
    mult_table: OnceLock<Option<Vec<u32>>>,
}

impl EnumeratedGroup {
    /// Breadth-first closure of the generator list.
    pub fn close(generators: Vec<Elem>, cap: usize) -> Result<EnumeratedGroup> {
        if generators.is_empty() {
            return Err(Error::usage("at least one generator required"));
        }
        for g in &generators {
            g.inverse()
                .map_err(|_| Error::usage("generators must be invertible"))?;
        }
        let mut gens = generators;
        gens.sort_by_key(|g| g.key());
        gens.dedup_by_key(|g| g.key());

        let identity = gens[0].identity_like();
        let mut elems: Vec<Elem> = vec![identity.clone()];
        let mut index: HashMap<ElemKey, u32> = HashMap::new();
        index.insert(identity.key(), 0);
        let mut queue: VecDeque<u32> = VecDeque::new();
        queue.push_back(0);
        while let Some(i) = queue.pop_front() {
            let x = elems[i as usize].clone();
            for g in &gens {
                let y = x.compose(g);
                let k = y.key();
                if !index.contains_key(&k) {
                    if elems.len() >= cap {
                        return Err(Error::resource(format!(
                            "group closure exceeded cap {cap} (partial count {})",
                            elems.len()
                        )));
                    }
                    index.insert(k, elems.len() as u32);
                    elems.push(y);
                    queue.push_back(elems.len() as u32 - 1);
                }
            }
        }
        let gen_idx: Vec<u32> = gens.iter().map(|g| index[&g.key()]).collect();
        let mut inv = vec![0u32; elems.len()];
        for (i, e) in elems.iter().enumerate() {
            inv[i] = index[&e.inverse()?.key()];
        }
        Ok(EnumeratedGroup {
            elems,
            index,
            gens: gen_idx,
            inv,
            orders: OnceLock::new(),
            classes: OnceLock::new(),
            mult_table: OnceLock::new(),
        })
    }

    /// Standalone group from a closed element subset of a parent.
    pub fn from_subgroup(parent: &EnumeratedGroup, sub: &Subgroup) -> EnumeratedGroup {
        let mut elems = Vec::with_capacity(sub.elems.len());
        let mut index = HashMap::new();
        // ascending parent order; parent index 0 (identity) comes first
        for (new_i, &old) in sub.elems.iter().enumerate() {
            let e = parent.elems[old as usize].clone();
            index.insert(e.key(), new_i as u32);
            elems.push(e);
        }
        let old_to_new: HashMap<u32, u32> = sub
            .elems
            .iter()
            .enumerate()
            .map(|(n, &o)| (o, n as u32))
            .collect();
        let gens: Vec<u32> = if sub.gens.is_empty() {
            sub.elems.iter().skip(1).map(|&o| old_to_new[&o]).collect()
        } else {
            sub.gens.iter().map(|&o| old_to_new[&o]).collect()
        };
        let inv = sub
            .elems
            .iter()
            .map(|&o| old_to_new[&parent.inv[o as usize]])
            .collect();
        EnumeratedGroup {
            elems,
            index,
            gens,
            inv,
            orders: OnceLock::new(),
            classes: OnceLock::new(),
            mult_table: OnceLock::new(),
        }
    }

    pub fn order(&self) -> u64 {
        self.elems.len() as u64
    }

    pub fn elem(&self, i: u32) -> &Elem {
        &self.elems[i as usize]
    }

    pub fn index_of(&self, e: &Elem) -> Option<u32> {
        self.index.get(&e.key()).copied()
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let n = self.elems.len();
        let table = self.mult_table.get_or_init(|| {
            if (n as u64) > MULT_TABLE_CAP {
                return None;
            }
            let mut t = vec![0u32; n * n];
            for i in 0..n {
                for j in 0..n {
                    let prod = self.elems[i].compose(&self.elems[j]);
                    t[i * n + j] = self.index[&prod.key()];
                }
            }
            Some(t)
        });
        match table {
            Some(t) => t[a as usize * n + b as usize],
            None => {
                let prod = self.elems[a as usize].compose(&self.elems[b as usize]);
                self.index[&prod.key()]
            }
        }
    }

    #[inline]
    pub fn inv_of(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn conj(&self, x: u32, g: u32) -> u32 {
        // g^-1 x g
        self.mul(self.mul(self.inv_of(g), x), g)
    }

    pub fn commutator(&self, a: u32, b: u32) -> u32 {
        self.mul(self.mul(self.inv_of(a), self.inv_of(b)), self.mul(a, b))
    }

    pub fn pow_index(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 0u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn order_of(&self, a: u32) -> u32 {
        self.orders()[a as usize]
    }

    pub fn orders(&self) -> &Vec<u32> {
        self.orders.get_or_init(|| {
            self.elems
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let mut x = i as u32;
                    let mut o = 1u32;
                    while x != 0 {
                        x = self.mul(x, i as u32);
                        o += 1;
                    }
                    o
                })
                .collect()
        })
    }

    pub fn exponent(&self) -> u64 {
        self.orders()
            .iter()
            .fold(1u64, |acc, &o| num_integer::lcm(acc, o as u64))
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            elems: (0..self.order() as u32).collect(),
            gens: self.gens.clone(),
        }
    }

    // -----------------------------------------------------------------
    // Subgroup machinery
    // -----------------------------------------------------------------

    /// Subgroup generated by the given element indices.
    pub fn subgroup_closure(&self, gens: &[u32]) -> Subgroup {
        let mut seen: HashSet<u32> = HashSet::new();
        seen.insert(0);
        let mut queue: VecDeque<u32> = VecDeque::new();
        queue.push_back(0);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        let mut elems: Vec<u32> = seen.into_iter().collect();
        elems.sort_unstable();
        let mut small_gens: Vec<u32> = gens.to_vec();
        small_gens.sort_unstable();
        small_gens.dedup();
        small_gens.retain(|&g| g != 0);
        Subgroup {
            elems,
            gens: small_gens,
        }
    }

    /// Smallest normal subgroup of the whole group containing the seeds.
    /// Each round conjugates the current generating set by the group
    /// generators and recloses; every added conjugate strictly grows the
    /// subgroup, so the round count is logarithmic in the result order.
    pub fn normal_closure(&self, seeds: &[u32]) -> Subgroup {
        let mut gens: Vec<u32> = seeds.to_vec();
        gens.sort_unstable();
        gens.dedup();
        loop {
            let sub = self.subgroup_closure(&gens);
            let set: HashSet<u32> = sub.elems.iter().copied().collect();
            let mut grew = false;
            for gi in 0..gens.len() {
                for &g in &self.gens {
                    let c = self.conj(gens[gi], g);
                    if !set.contains(&c) {
                        gens.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                // generator conjugates inside the closure certify normality
                return sub;
            }
        }
    }

    /// Normal closure restricted to a p-group premise: returns None as soon
    /// as the closure leaves p-power orders or exceeds the p-part of |G|.
    fn normal_closure_if_p_group(&self, seed: u32, p: u64) -> Option<Subgroup> {
        let p_part = p_part(self.order(), p);
        let mut gens = vec![seed];
        loop {
            let mut seen: HashSet<u32> = HashSet::new();
            seen.insert(0);
            let mut queue: VecDeque<u32> = VecDeque::new();
            queue.push_back(0);
            while let Some(x) = queue.pop_front() {
                for &g in &gens {
                    let y = self.mul(x, g);
                    if seen.insert(y) {
                        if seen.len() as u64 > p_part || !is_p_power(self.order_of(y) as u64, p) {
                            return None;
                        }
                        queue.push_back(y);
                    }
                }
            }
            let mut elems: Vec<u32> = seen.iter().copied().collect();
            elems.sort_unstable();
            let mut grew = false;
            'outer: for &x in &elems {
                for &g in &self.gens {
                    let c = self.conj(x, g);
                    if !seen.contains(&c) {
                        if !is_p_power(self.order_of(c) as u64, p) {
                            return None;
                        }
                        gens.push(c);
                        grew = true;
                        break 'outer;
                    }
                }
            }
            if !grew {
                gens.sort_unstable();
                gens.dedup();
                gens.retain(|&g| g != 0);
                return Some(Subgroup { elems, gens });
            }
        }
    }

    /// Elements of the domain commuting with every target.
    pub fn centralizer(&self, domain: &[u32], targets: &[u32]) -> Vec<u32> {
        domain
            .iter()
            .copied()
            .filter(|&x| targets.iter().all(|&t| self.mul(x, t) == self.mul(t, x)))
            .collect()
    }

    /// Elements of the domain normalizing the subgroup.
    pub fn normalizer(&self, domain: &[u32], sub: &Subgroup) -> Vec<u32> {
        let set: HashSet<u32> = sub.elems.iter().copied().collect();
        let check_gens: &[u32] = if sub.gens.is_empty() {
            &sub.elems
        } else {
            &sub.gens
        };
        domain
            .iter()
            .copied()
            .filter(|&g| check_gens.iter().all(|&s| set.contains(&self.conj(s, g))))
            .collect()
    }

    pub fn is_normal(&self, sub: &Subgroup) -> bool {
        let set: HashSet<u32> = sub.elems.iter().copied().collect();
        let check: &[u32] = if sub.gens.is_empty() {
            &sub.elems
        } else {
            &sub.gens
        };
        self.gens
            .iter()
            .all(|&g| check.iter().all(|&s| set.contains(&self.conj(s, g))))
    }

    pub fn is_abelian_subset(&self, elems: &[u32]) -> bool {
        for (i, &a) in elems.iter().enumerate() {
            for &b in elems.iter().skip(i + 1) {
                if self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_cyclic_subgroup(&self, sub: &Subgroup) -> bool {
        sub.elems
            .iter()
            .any(|&x| self.order_of(x) as u64 == sub.order())
    }

    /// Product set A*B as a sorted index list (a subgroup whenever one
    /// factor normalizes the other).
    pub fn product_set(&self, a: &Subgroup, b: &Subgroup) -> Vec<u32> {
        let mut out: HashSet<u32> = HashSet::new();
        for &x in &a.elems {
            for &y in &b.elems {
                out.insert(self.mul(x, y));
            }
        }
        let mut v: Vec<u32> = out.into_iter().collect();
        v.sort_unstable();
        v
    }

    pub fn intersect(a: &Subgroup, b: &Subgroup) -> Subgroup {
        let set: HashSet<u32> = b.elems.iter().copied().collect();
        let elems: Vec<u32> = a
            .elems
            .iter()
            .copied()
            .filter(|i| set.contains(i))
            .collect();
        Subgroup { elems, gens: vec![] }
    }

    // -----------------------------------------------------------------
    // Derived series, solvability
    // -----------------------------------------------------------------

    /// Derived subgroup of the given subgroup: closure of generator
    /// commutators under conjugation by the subgroup.
    pub fn derived_subgroup(&self, sub: &Subgroup) -> Subgroup {
        let hgens: &[u32] = if sub.gens.is_empty() {
            &sub.elems
        } else {
            &sub.gens
        };
        let mut seeds: Vec<u32> = Vec::new();
        for &a in hgens {
            for &b in hgens {
                let c = self.commutator(a, b);
                if c != 0 {
                    seeds.push(c);
                }
            }
        }
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.is_empty() {
            return Subgroup::trivial();
        }
        let mut gens = seeds;
        loop {
            let s = self.subgroup_closure(&gens);
            let set: HashSet<u32> = s.elems.iter().copied().collect();
            let mut grew = false;
            'outer: for &x in &s.elems {
                for &g in hgens {
                    let c = self.conj(x, g);
                    if !set.contains(&c) {
                        gens.push(c);
                        grew = true;
                        break 'outer;
                    }
                }
            }
            if !grew {
                return s;
            }
        }
    }

    pub fn derived_series(&self) -> Vec<Subgroup> {
        let mut chain = vec![self.whole()];
        loop {
            let next = self.derived_subgroup(chain.last().unwrap());
            if next.order() == chain.last().unwrap().order() {
                break;
            }
            let done = next.is_trivial();
            chain.push(next);
            if done {
                break;
            }
        }
        chain
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last().unwrap().is_trivial()
    }

    /// Derived length: number of strict steps until trivial (0 for the
    /// trivial group, 1 for nontrivial abelian); None for perfect subgroups.
    pub fn derived_length_of(&self, sub: &Subgroup) -> Option<u32> {
        let mut cur = sub.clone();
        let mut len = 0;
        while !cur.is_trivial() {
            let next = self.derived_subgroup(&cur);
            if next.order() == cur.order() {
                return None;
            }
            cur = next;
            len += 1;
        }
        Some(len)
    }

    // -----------------------------------------------------------------
    // p-cores and Fitting structure
    // -----------------------------------------------------------------

    /// O_p(G): generated by the p-elements whose normal closure is a p-group.
    pub fn p_core(&self, p: u64) -> Subgroup {
        let mut gens: Vec<u32> = Vec::new();
        for i in 1..self.order() as u32 {
            if !is_p_power(self.order_of(i) as u64, p) {
                continue;
            }
            if self.normal_closure_if_p_group(i, p).is_some() {
                gens.push(i);
            }
        }
        if gens.is_empty() {
            Subgroup::trivial()
        } else {
            self.subgroup_closure(&gens)
        }
    }

    /// Fitting subgroup: product of the p-cores over p | |G|.
    pub fn fitting(&self) -> Subgroup {
        let mut gens: Vec<u32> = Vec::new();
        for p in crate::gf::prime_factors(self.order()) {
            gens.extend(self.p_core(p).gens);
        }
        if gens.is_empty() {
            Subgroup::trivial()
        } else {
            self.subgroup_closure(&gens)
        }
    }

    /// Ascending Fitting series, computed in quotients.
    pub fn fitting_series(&self) -> Result<FittingSeries> {
        let mut chain = vec![Subgroup::trivial()];
        loop {
            let cur = chain.last().unwrap().clone();
            if cur.order() == self.order() {
                return Ok(FittingSeries {
                    chain,
                    complete: true,
                });
            }
            let mut pre: Vec<u32> = if cur.is_trivial() {
                self.fitting().elems
            } else {
                let (q, project) = self.quotient(&cur)?;
                let fq = q.fitting();
                let fq_set: HashSet<u32> = fq.elems.iter().copied().collect();
                (0..self.order() as u32)
                    .filter(|&x| fq_set.contains(&project[x as usize]))
                    .collect()
            };
            pre.sort_unstable();
            if pre.len() as u64 == cur.order() {
                return Ok(FittingSeries {
                    chain,
                    complete: false,
                });
            }
            let gens = small_generating_set(self, &pre);
            chain.push(Subgroup { elems: pre, gens });
        }
    }

    /// Quotient by a normal subgroup, realized through the left regular
    /// action on cosets. Returns the quotient group (a permutation group)
    /// and the projection map element-index -> quotient-index.
    pub fn quotient(&self, n: &Subgroup) -> Result<(EnumeratedGroup, Vec<u32>)> {
        if !self.is_normal(n) {
            return Err(Error::usage("quotient by non-normal subgroup"));
        }
        let m = self.order() as usize / n.elems.len();
        if m > QUOTIENT_CAP {
            return Err(Error::resource(format!("quotient order {m} exceeds cap")));
        }
        // left cosets xN, canonical representative = minimal element index
        let mut coset_of = vec![u32::MAX; self.order() as usize];
        let mut reps: Vec<u32> = Vec::with_capacity(m);
        for x in 0..self.order() as u32 {
            if coset_of[x as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            for &nn in &n.elems {
                coset_of[self.mul(x, nn) as usize] = id;
            }
        }
        let perm_of = |g: u32| -> Elem {
            Elem::Perm(
                reps.iter()
                    .map(|&r| coset_of[self.mul(g, r) as usize] as u16)
                    .collect(),
            )
        };
        let q = EnumeratedGroup::close(
            self.gens.iter().map(|&g| perm_of(g)).collect(),
            QUOTIENT_CAP + 1,
        )?;
        if q.order() as usize != m {
            return Err(Error::internal("quotient closure has wrong order"));
        }
        let project: Vec<u32> = (0..self.order() as u32)
            .map(|x| q.index_of(&perm_of(x)).expect("coset image present"))
            .collect();
        Ok((q, project))
    }

    // -----------------------------------------------------------------
    // Conjugacy classes and normal subgroups
    // -----------------------------------------------------------------

    pub fn conjugacy_classes(&self) -> &Classes {
        self.classes.get_or_init(|| {
            let n = self.order() as usize;
            let mut assigned = vec![false; n];
            let mut raw: Vec<Vec<u32>> = Vec::new();
            for i in 0..n as u32 {
                if assigned[i as usize] {
                    continue;
                }
                let mut members = vec![i];
                assigned[i as usize] = true;
                let mut queue = VecDeque::new();
                queue.push_back(i);
                while let Some(x) = queue.pop_front() {
                    for &g in &self.gens {
                        let y = self.conj(x, g);
                        if !assigned[y as usize] {
                            assigned[y as usize] = true;
                            members.push(y);
                            queue.push_back(y);
                        }
                    }
                }
                members.sort_unstable();
                raw.push(members);
            }
            raw.sort_by_key(|c| (self.order_of(c[0]), c.len(), c[0]));
            let mut class_of = vec![0u32; n];
            for (id, c) in raw.iter().enumerate() {
                for &x in c {
                    class_of[x as usize] = id as u32;
                }
            }
            Classes {
                class_of,
                reps: raw.iter().map(|c| c[0]).collect(),
                sizes: raw.iter().map(|c| c.len() as u64).collect(),
                members: raw,
            }
        })
    }

    /// Join of two normal subgroups: their product set, built coset by
    /// coset (the product of normal subgroups is already a subgroup).
    fn normal_join(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        let mut set: HashSet<u32> = b.elems.iter().copied().collect();
        for &x in &a.elems {
            if set.contains(&x) {
                continue;
            }
            for &y in &b.elems {
                set.insert(self.mul(x, y));
            }
        }
        let mut elems: Vec<u32> = set.into_iter().collect();
        elems.sort_unstable();
        let mut gens = a.gens.clone();
        gens.extend(&b.gens);
        gens.sort_unstable();
        gens.dedup();
        Subgroup { elems, gens }
    }

    /// Every normal subgroup: the lattice is generated by the normal
    /// closures of the single conjugacy classes (join-irreducible atoms);
    /// an arbitrary normal subgroup is the join of the class closures it
    /// contains, so closing the atom set under pairwise joins enumerates
    /// the full lattice.
    pub fn normal_subgroups(&self, class_cap: usize) -> Result<Vec<Subgroup>> {
        let classes = self.conjugacy_classes();
        if classes.count() > class_cap {
            return Err(Error::resource(format!(
                "{} conjugacy classes exceed cap {class_cap}",
                classes.count()
            )));
        }
        let mut atoms: Vec<Subgroup> = Vec::new();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        seen.insert(vec![0]);
        for c in &classes.members {
            if c[0] == 0 {
                continue;
            }
            let ncl = self.normal_closure(&[c[0]]);
            if seen.insert(ncl.elems.clone()) {
                atoms.push(ncl);
            }
        }
        let mut known: Vec<Subgroup> = vec![Subgroup::trivial()];
        known.extend(atoms.iter().cloned());
        let mut frontier: Vec<Subgroup> = atoms.clone();
        while let Some(h) = frontier.pop() {
            for atom in &atoms {
                if atom.elems.iter().all(|x| h.contains(*x)) {
                    continue;
                }
                let joined = self.normal_join(&h, atom);
                if seen.insert(joined.elems.clone()) {
                    known.push(joined.clone());
                    frontier.push(joined);
                }
            }
        }
        known.sort_by(|a, b| (a.order(), &a.elems).cmp(&(b.order(), &b.elems)));
        Ok(known)
    }

    // -----------------------------------------------------------------
    // Hall and Sylow subgroups
    // -----------------------------------------------------------------

    /// Sylow p-subgroup by greedy p-element closure restricted to the
    /// normalizer of the current stage; a proper p-subgroup always has a
    /// p-element outside itself in its normalizer, so the loop terminates at
    /// full Sylow order, which is certified before returning.
    pub fn sylow(&self, p: u64) -> Result<Subgroup> {
        let target = p_part(self.order(), p);
        let mut h = Subgroup::trivial();
        let whole: Vec<u32> = (0..self.order() as u32).collect();
        while h.order() < target {
            let normalizer: Vec<u32> = if h.is_trivial() {
                whole.clone()
            } else {
                self.normalizer(&whole, &h)
            };
            let mut extended = false;
            for &x in &normalizer {
                if h.contains(x) || !is_p_power(self.order_of(x) as u64, p) {
                    continue;
                }
                let mut gens = h.gens.clone();
                gens.push(x);
                let ext = self.subgroup_closure(&gens);
                if is_p_power(ext.order(), p) {
                    h = ext;
                    extended = true;
                    break;
                }
            }
            if !extended {
                return Err(Error::internal(format!(
                    "greedy Sylow extension stalled at order {} (target {target})",
                    h.order()
                )));
            }
        }
        Ok(h)
    }

    /// Hall pi-subgroup of a nilpotent subgroup: its pi-order elements.
    /// Verified to be multiplicatively closed before returning; fails with a
    /// usage error when the input section is not nilpotent enough for that.
    pub fn pi_subgroup_of_nilpotent(&self, sub: &Subgroup, pi: &PiSet) -> Result<Subgroup> {
        let elems: Vec<u32> = sub
            .elems
            .iter()
            .copied()
            .filter(|&x| is_pi_number(self.order_of(x) as u64, pi))
            .collect();
        let set: HashSet<u32> = elems.iter().copied().collect();
        for &a in &elems {
            for &b in &elems {
                if !set.contains(&self.mul(a, b)) {
                    return Err(Error::usage(
                        "pi-elements do not form a subgroup (input not nilpotent)",
                    ));
                }
            }
        }
        let gens = small_generating_set(self, &elems);
        Ok(Subgroup { elems, gens })
    }

    // -----------------------------------------------------------------
    // Census
    // -----------------------------------------------------------------

    /// Exact census of prime-order elements and subgroups within a subset.
    pub fn census(&self, subset: Option<&[u32]>) -> Census {
        let whole: Vec<u32>;
        let subset = match subset {
            Some(s) => s,
            None => {
                whole = (0..self.order() as u32).collect();
                &whole
            }
        };
        let mut per_prime: BTreeMap<u64, PrimeCensus> = BTreeMap::new();
        let mut nsp_sets: BTreeMap<u64, HashSet<u32>> = BTreeMap::new();
        for &x in subset {
            let o = self.order_of(x) as u64;
            if o < 2 || crate::gf::prime_factors(o) != vec![o] {
                continue;
            }
            let e = per_prime.entry(o).or_default();
            e.nep += 1;
            // subgroup <x> identified by its minimal nontrivial element
            let mut min_elt = x;
            let mut y = self.mul(x, x);
            while y != 0 {
                min_elt = min_elt.min(y);
                y = self.mul(y, x);
            }
            nsp_sets.entry(o).or_default().insert(min_elt);
        }
        for (p, set) in nsp_sets {
            per_prime.get_mut(&p).unwrap().nsp = set.len() as u64;
        }
        Census { per_prime }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PrimeCensus {
    pub nep: u64,
    pub nsp: u64,
}

/// Counts of elements (NEP) and subgroups (NSP) of each prime order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Census {
    pub per_prime: BTreeMap<u64, PrimeCensus>,
}

impl Census {
    pub fn nep(&self, p: u64) -> u64 {
        self.per_prime.get(&p).map_or(0, |c| c.nep)
    }
    pub fn nsp(&self, p: u64) -> u64 {
        self.per_prime.get(&p).map_or(0, |c| c.nsp)
    }
    pub fn nep_pi(&self, pi: &PiSet) -> u64 {
        self.per_prime
            .iter()
            .filter(|(p, _)| pi.contains(**p))
            .map(|(_, c)| c.nep)
            .sum()
    }
    pub fn nsp_pi(&self, pi: &PiSet) -> u64 {
        self.per_prime
            .iter()
            .filter(|(p, _)| pi.contains(**p))
            .map(|(_, c)| c.nsp)
            .sum()
    }
}

/// A set of primes; `Pi0` is all primes except 2 and 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PiSet {
    Pi0,
    Primes(Vec<u64>),
}

impl PiSet {
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PiSet::Pi0 => p >= 5,
            PiSet::Primes(v) => v.contains(&p),
        }
    }
}

pub fn is_p_power(mut n: u64, p: u64) -> bool {
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

pub fn is_pi_number(n: u64, pi: &PiSet) -> bool {
    crate::gf::prime_factors(n).iter().all(|&p| pi.contains(p))
}

pub fn pi_part(mut n: u64, pi: &PiSet) -> u64 {
    let mut out = 1u64;
    for p in crate::gf::prime_factors(n) {
        if pi.contains(p) {
            while n % p == 0 {
                n /= p;
                out *= p;
            }
        }
    }
    out
}

pub fn p_part(mut n: u64, p: u64) -> u64 {
    let mut out = 1u64;
    while n % p == 0 {
        n /= p;
        out *= p;
    }
    out
}

pub fn p_valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Greedy small generating set for a closed element subset.
pub fn small_generating_set(g: &EnumeratedGroup, elems: &[u32]) -> Vec<u32> {
    let mut gens: Vec<u32> = Vec::new();
    let mut have: HashSet<u32> = HashSet::new();
    have.insert(0);
    for &x in elems {
        if !have.contains(&x) {
            gens.push(x);
            let closed = g.subgroup_closure(&gens);
            have = closed.elems.iter().copied().collect();
            if have.len() == elems.len() {
                break;
            }
        }
    }
    gens
}

// ---------------------------------------------------------------------------
// Group spec wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Matrix {
        field: FieldSpec,
        dim: usize,
        generators: Vec<Vec<Vec<u64>>>,
    },
    Perm {
        degree: usize,
        generators: Vec<Vec<u16>>,
    },
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy)]
pub struct FieldSpec {
    pub p: u64,
    pub k: u32,
}

impl GroupSpec {
    pub fn generators(&self) -> Result<Vec<Elem>> {
        match self {
            GroupSpec::Matrix {
                field,
                dim,
                generators,
            } => {
                let f: Field = FiniteField::get(field.p, field.k)?;
                generators
                    .iter()
                    .map(|rows| {
                        if rows.len() != *dim || rows.iter().any(|r| r.len() != *dim) {
                            return Err(Error::usage("generator dimension mismatch"));
                        }
                        let entries: Vec<u32> = rows
                            .iter()
                            .flatten()
                            .map(|&v| {
                                if v >= f.q {
                                    Err(Error::usage("entry outside field"))
                                } else {
                                    Ok(v as u32)
                                }
                            })
                            .collect::<Result<_>>()?;
                        Ok(Elem::Mats(vec![Matrix::new(f.clone(), *dim, entries)?]))
                    })
                    .collect()
            }
            GroupSpec::Perm { degree, generators } => generators
                .iter()
                .map(|imgs| {
                    if imgs.len() != *degree || imgs.iter().any(|&x| x as usize >= *degree) {
                        return Err(Error::usage("permutation image out of range"));
                    }
                    let mut seen = vec![false; *degree];
                    for &x in imgs {
                        if seen[x as usize] {
                            return Err(Error::usage("not a permutation"));
                        }
                        seen[x as usize] = true;
                    }
                    Ok(Elem::Perm(imgs.clone()))
                })
                .collect(),
        }
    }

    pub fn close(&self, cap: usize) -> Result<EnumeratedGroup> {
        EnumeratedGroup::close(self.generators()?, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s4() -> EnumeratedGroup {
        EnumeratedGroup::close(
            vec![Elem::Perm(vec![1, 0, 2, 3]), Elem::Perm(vec![1, 2, 3, 0])],
            ORDER_CAP,
        )
        .unwrap()
    }

    fn s3() -> EnumeratedGroup {
        EnumeratedGroup::close(
            vec![Elem::Perm(vec![1, 0, 2]), Elem::Perm(vec![1, 2, 0])],
            ORDER_CAP,
        )
        .unwrap()
    }

    fn a5() -> EnumeratedGroup {
        EnumeratedGroup::close(
            vec![
                Elem::Perm(vec![1, 2, 3, 4, 0]),
                Elem::Perm(vec![1, 2, 0, 3, 4]),
            ],
            ORDER_CAP,
        )
        .unwrap()
    }

    #[test]
    fn closure_orders() {
        assert_eq!(s3().order(), 6);
        assert_eq!(s4().order(), 24);
        assert_eq!(a5().order(), 60);
    }

    #[test]
    fn identity_is_index_zero() {
        let g = s4();
        assert!(g.elem(0).is_identity());
        for i in 0..24 {
            assert_eq!(g.mul(i, g.inv_of(i)), 0);
        }
    }

    #[test]
    fn derived_series_examples() {
        let g = s4();
        let chain = g.derived_series();
        // S4 > A4 > V4 > 1
        assert_eq!(
            chain.iter().map(|s| s.order()).collect::<Vec<_>>(),
            vec![24, 12, 4, 1]
        );
        assert!(g.is_solvable());
        assert_eq!(g.derived_length_of(&g.whole()), Some(3));
        assert!(!a5().is_solvable());
    }

    #[test]
    fn brute_force_commutator_oracle() {
        // production derived subgroup vs all-pairs commutator closure
        for g in [s3(), s4()] {
            let prod = g.derived_subgroup(&g.whole());
            let mut comms: Vec<u32> = Vec::new();
            for a in 0..g.order() as u32 {
                for b in 0..g.order() as u32 {
                    comms.push(g.commutator(a, b));
                }
            }
            comms.sort_unstable();
            comms.dedup();
            let brute = g.subgroup_closure(&comms);
            assert_eq!(prod.elems, brute.elems);
        }
    }

    #[test]
    fn p_core_and_fitting_s4() {
        let g = s4();
        let o2 = g.p_core(2);
        assert_eq!(o2.order(), 4); // V4
        assert_eq!(g.p_core(3).order(), 1);
        assert_eq!(g.fitting().order(), 4);
        // intersection-of-Sylows oracle
        let syl = g.sylow(2).unwrap();
        assert_eq!(syl.order(), 8);
        let mut inter: HashSet<u32> = syl.elems.iter().copied().collect();
        for c in 0..g.order() as u32 {
            let conj_set: HashSet<u32> = syl.elems.iter().map(|&x| g.conj(x, c)).collect();
            inter = inter.intersection(&conj_set).copied().collect();
        }
        let mut inter: Vec<u32> = inter.into_iter().collect();
        inter.sort_unstable();
        assert_eq!(inter, o2.elems);
    }

    #[test]
    fn fitting_series_s4() {
        let g = s4();
        let fs = g.fitting_series().unwrap();
        assert!(fs.complete);
        // F(S4) = V4, F2(S4) = A4
        assert_eq!(
            fs.chain.iter().map(|s| s.order()).collect::<Vec<_>>(),
            vec![1, 4, 12, 24]
        );
    }

    #[test]
    fn fitting_series_stalls_on_a5() {
        let g = a5();
        let fs = g.fitting_series().unwrap();
        assert!(!fs.complete);
        assert_eq!(fs.chain.last().unwrap().order(), 1);
    }

    #[test]
    fn classes_s3() {
        let g = s3();
        assert_eq!(g.conjugacy_classes().sizes, vec![1, 3, 2]);
    }

    #[test]
    fn abelian_group_has_singleton_classes() {
        let g = EnumeratedGroup::close(vec![Elem::Perm(vec![1, 2, 3, 4, 0])], ORDER_CAP).unwrap();
        assert_eq!(g.conjugacy_classes().count(), 5);
    }

    #[test]
    fn normal_subgroups_s4() {
        let g = s4();
        let ns = g.normal_subgroups(CLASS_CAP).unwrap();
        assert_eq!(
            ns.iter().map(|s| s.order()).collect::<Vec<_>>(),
            vec![1, 4, 12, 24]
        );
        for s in &ns {
            assert!(g.is_normal(s));
            assert_eq!(24 % s.order(), 0);
        }
    }

    #[test]
    fn quotient_s4_by_v4() {
        let g = s4();
        let v4 = g.p_core(2);
        let (q, project) = g.quotient(&v4).unwrap();
        assert_eq!(q.order(), 6);
        assert!(!q.is_abelian_subset(&q.whole().elems)); // S3
        for a in 0..24u32 {
            for b in 0..24u32 {
                assert_eq!(
                    project[g.mul(a, b) as usize],
                    q.mul(project[a as usize], project[b as usize])
                );
            }
        }
    }

    #[test]
    fn census_counts() {
        let g = s4();
        let c = g.census(None);
        assert_eq!(c.nep(2), 9); // 6 transpositions + 3 double transpositions
        assert_eq!(c.nep(3), 8);
        assert_eq!(c.nsp(3), 4);
        assert_eq!(c.nep_pi(&PiSet::Pi0), 0);
        // identity + prime-order + composite-order partition of G
        let composite = (0..24u32)
            .filter(|&i| {
                let o = g.order_of(i) as u64;
                o > 1 && crate::gf::prime_factors(o) != vec![o]
            })
            .count() as u64;
        let total: u64 = c.per_prime.values().map(|pc| pc.nep).sum();
        assert_eq!(total + composite + 1, 24);
    }

    #[test]
    fn census_trivial() {
        let g = EnumeratedGroup::close(vec![Elem::Perm(vec![0, 1])], ORDER_CAP).unwrap();
        assert_eq!(g.census(None).nep(5), 0);
    }

    #[test]
    fn sylow_and_nilpotent_hall() {
        let g = s4();
        assert_eq!(g.sylow(2).unwrap().order(), 8);
        assert_eq!(g.sylow(3).unwrap().order(), 3);
        assert_eq!(g.sylow(5).unwrap().order(), 1);
        // Z12 as a permutation rotation; its {3}-part is Z3
        let z12 = EnumeratedGroup::close(
            vec![Elem::Perm((0..12).map(|x| ((x + 1) % 12) as u16).collect())],
            ORDER_CAP,
        )
        .unwrap();
        let part = z12
            .pi_subgroup_of_nilpotent(&z12.whole(), &PiSet::Primes(vec![3]))
            .unwrap();
        assert_eq!(part.order(), 3);
        // non-nilpotent input is rejected
        assert!(g
            .pi_subgroup_of_nilpotent(&g.whole(), &PiSet::Primes(vec![2]))
            .is_err());
    }

    #[test]
    fn cap_exceeded_is_resource_error() {
        let r = EnumeratedGroup::close(vec![Elem::Perm(vec![1, 2, 3, 4, 0])], 3);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn frobenius_21_census() {
        // Z7:Z3 as permutations: x+1 and 2x mod 7
        let add = Elem::Perm((0..7).map(|x| ((x + 1) % 7) as u16).collect());
        let mul = Elem::Perm((0..7).map(|x| ((x * 2) % 7) as u16).collect());
        let g = EnumeratedGroup::close(vec![add, mul], ORDER_CAP).unwrap();
        assert_eq!(g.order(), 21);
        let c = g.census(None);
        assert_eq!(c.nep(7), 6);
        assert_eq!(c.nep(3), 14);
        assert_eq!(c.nsp(7), 1);
        assert_eq!(c.nsp(3), 7);
    }

    #[test]
    fn normal_subgroups_brute_force_oracle() {
        // every subgroup via cyclic-extension closure, filtered for normality
        for g in [s3(), s4()] {
            let mut all: HashSet<Vec<u32>> = HashSet::new();
            let mut frontier: Vec<Subgroup> = vec![Subgroup::trivial()];
            all.insert(vec![0]);
            while let Some(h) = frontier.pop() {
                for x in 1..g.order() as u32 {
                    if h.contains(x) {
                        continue;
                    }
                    let mut gens = h.gens.clone();
                    gens.push(x);
                    let ext = g.subgroup_closure(&gens);
                    if all.insert(ext.elems.clone()) {
                        frontier.push(ext);
                    }
                }
            }
            let mut brute_normal: Vec<Vec<u32>> = all
                .into_iter()
                .filter(|elems| {
                    let s = Subgroup {
                        elems: elems.clone(),
                        gens: vec![],
                    };
                    g.is_normal(&s)
                })
                .collect();
            brute_normal.sort_by(|a, b| (a.len(), a.clone()).cmp(&(b.len(), b.clone())));
            let prod: Vec<Vec<u32>> = g
                .normal_subgroups(CLASS_CAP)
                .unwrap()
                .into_iter()
                .map(|s| s.elems)
                .collect();
            assert_eq!(prod, brute_normal);
        }
    }
}
