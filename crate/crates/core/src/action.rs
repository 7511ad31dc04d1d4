//! Group actions on finite vector spaces and finite sets: orbit enumeration
//! over packed vector codes, stabilizers by exact filtering, fixed-point
//! counts, regular-orbit counting, and the subset search for set-stabilizers
//! that are {2,3}-groups.
//!
//! Vectors are packed integer codes, mixed-radix over the module summands
//! (each summand base-q in its own field). Generator application is
//! precomputed as a code permutation when the space is small enough, making
//! orbit BFS an array traversal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Construction;
use crate::gf::{decode_vec, encode_vec, fixed_space, Field, Matrix};
use crate::grp::{Elem, EnumeratedGroup, Subgroup};

/// Hard cap on total space size for orbit enumeration.
pub const SPACE_CAP: u64 = 1 << 24;
/// Below this size, generator application is precomputed as permutations.
pub const PERM_PRECOMPUTE_CAP: u64 = 1 << 20;
/// Point cap for the exponential subset-stabilizer search.
pub const DELTA_POINT_CAP: usize = 16;

/// A group of matrix tuples acting on the direct sum of the listed spaces.
pub struct ModuleAction {
    pub group: EnumeratedGroup,
    pub spaces: Vec<(Field, usize)>,
}

/// Orbit decomposition of the full code space.
#[derive(Clone, Debug)]
pub struct OrbitData {
    /// code -> orbit id; ids are assigned in increasing order of the
    /// minimal code they contain.
    pub orbit_of: Vec<u32>,
    pub sizes: Vec<u64>,
    /// orbit id -> minimal code in the orbit.
    pub reps: Vec<u64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct OrbitReport {
    pub space_size: u64,
    pub orbit_count: usize,
    pub sizes_histogram: Vec<(u64, u64)>,
    pub representatives: Vec<u64>,
    pub stabilizer_orders: Vec<u64>,
    pub regular_orbits: usize,
}

impl ModuleAction {
    pub fn new(group: EnumeratedGroup, spaces: Vec<(Field, usize)>) -> Result<ModuleAction> {
        if spaces.is_empty() {
            return Err(Error::usage("action needs at least one summand"));
        }
        match group.elem(0) {
            Elem::Mats(blocks) => {
                if blocks.len() != spaces.len()
                    || blocks
                        .iter()
                        .zip(spaces.iter())
                        .any(|(m, (f, d))| m.n != *d || *m.field != **f)
                {
                    return Err(Error::usage("element blocks do not match summands"));
                }
            }
            _ => return Err(Error::usage("module actions need matrix elements")),
        }
        let mut size: u64 = 1;
        for (f, d) in &spaces {
            for _ in 0..*d {
                size = size
                    .checked_mul(f.q)
                    .filter(|&s| s <= SPACE_CAP)
                    .ok_or_else(|| Error::resource("space size exceeds 2^24"))?;
            }
        }
        Ok(ModuleAction { group, spaces })
    }

    pub fn from_construction(c: &Construction, cap: usize) -> Result<ModuleAction> {
        if c.spaces.is_empty() {
            return Err(Error::usage("construction has no module spaces"));
        }
        ModuleAction::new(c.close(cap)?, c.spaces.clone())
    }

    pub fn space_size(&self) -> u64 {
        self.spaces
            .iter()
            .map(|(f, d)| f.q.pow(*d as u32))
            .product()
    }

    pub fn summand_sizes(&self) -> Vec<u64> {
        self.spaces
            .iter()
            .map(|(f, d)| f.q.pow(*d as u32))
            .collect()
    }

    /// Per-summand coordinate vectors of a packed code.
    pub fn decode(&self, mut code: u64) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.spaces.len());
        for (f, d) in &self.spaces {
            let s = f.q.pow(*d as u32);
            out.push(decode_vec(code % s, f.q, *d));
            code /= s;
        }
        out
    }

    pub fn encode(&self, coords: &[Vec<u32>]) -> u64 {
        let mut code = 0u64;
        let mut shift = 1u64;
        for ((f, d), c) in self.spaces.iter().zip(coords.iter()) {
            code += encode_vec(c, f.q) * shift;
            shift *= f.q.pow(*d as u32);
        }
        code
    }

    pub fn blocks_of(&self, g: u32) -> &[Matrix] {
        match self.group.elem(g) {
            Elem::Mats(blocks) => blocks,
            _ => unreachable!(),
        }
    }

    pub fn apply(&self, g: u32, code: u64) -> u64 {
        let coords = self.decode(code);
        let blocks = self.blocks_of(g);
        let out: Vec<Vec<u32>> = blocks
            .iter()
            .zip(coords.iter())
            .map(|(m, v)| m.apply(v))
            .collect();
        self.encode(&out)
    }

    /// Orbit decomposition by BFS over codes, ascending from 0.
    pub fn orbits(&self) -> OrbitData {
        let gens = self.group.gens.clone();
        self.orbits_with_gens(&gens)
    }

    /// Orbits under a chosen generator subset (e.g. a normal subgroup's
    /// generators).
    pub fn orbits_with_gens(&self, gens: &[u32]) -> OrbitData {
        let size = self.space_size() as usize;
        let gen_perms: Option<Vec<Vec<u32>>> = if (size as u64) <= PERM_PRECOMPUTE_CAP {
            Some(
                gens.iter()
                    .map(|&g| (0..size as u64).map(|c| self.apply(g, c) as u32).collect())
                    .collect(),
            )
        } else {
            None
        };
        let mut orbit_of = vec![u32::MAX; size];
        let mut sizes = Vec::new();
        let mut reps = Vec::new();
        let mut stack: Vec<u64> = Vec::new();
        for start in 0..size as u64 {
            if orbit_of[start as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(start);
            let mut count = 0u64;
            orbit_of[start as usize] = id;
            stack.push(start);
            while let Some(c) = stack.pop() {
                count += 1;
                match &gen_perms {
                    Some(perms) => {
                        for p in perms {
                            let y = p[c as usize] as u64;
                            if orbit_of[y as usize] == u32::MAX {
                                orbit_of[y as usize] = id;
                                stack.push(y);
                            }
                        }
                    }
                    None => {
                        for &g in gens {
                            let y = self.apply(g, c);
                            if orbit_of[y as usize] == u32::MAX {
                                orbit_of[y as usize] = id;
                                stack.push(y);
                            }
                        }
                    }
                }
            }
            sizes.push(count);
        }
        OrbitData {
            orbit_of,
            sizes,
            reps,
        }
    }

    /// Exact point stabilizer by full filtering.
    pub fn stabilizer(&self, code: u64) -> Subgroup {
        let coords = self.decode(code);
        let elems: Vec<u32> = (0..self.group.order() as u32)
            .filter(|&g| {
                self.blocks_of(g)
                    .iter()
                    .zip(coords.iter())
                    .all(|(m, v)| m.apply(v) == *v)
            })
            .collect();
        let gens = crate::grp::small_generating_set(&self.group, &elems);
        Subgroup { elems, gens }
    }

    /// Number of fixed vectors of g across the whole sum.
    pub fn fixed_count(&self, g: u32) -> u128 {
        self.blocks_of(g)
            .iter()
            .map(|m| fixed_space(m).1)
            .product()
    }

    /// Elements acting trivially; the action is faithful iff this is {0}.
    pub fn kernel(&self) -> Vec<u32> {
        (0..self.group.order() as u32)
            .filter(|&g| self.blocks_of(g).iter().all(|m| m.is_identity()))
            .collect()
    }

    pub fn is_faithful(&self) -> bool {
        self.kernel() == vec![0]
    }

    /// Orbit count by the averaged fixed-point sum; equals the orbit count
    /// exactly and serves as an independent cross-check of the BFS.
    pub fn burnside_orbit_count(&self) -> u128 {
        let total: u128 = (0..self.group.order() as u32)
            .map(|g| self.fixed_count(g))
            .sum();
        total / self.group.order() as u128
    }

    pub fn regular_orbit_count(&self, orbits: &OrbitData) -> usize {
        orbits
            .sizes
            .iter()
            .filter(|&&s| s == self.group.order())
            .count()
    }

    /// Union of the fixed spaces of the given elements, as a code bitmap.
    pub fn fixed_union_bitmap(&self, elems: &[u32]) -> Vec<bool> {
        let size = self.space_size() as usize;
        let mut hit = vec![false; size];
        for &g in elems {
            // per-summand fixed bases; fixed codes = product of spans
            let bases: Vec<(Vec<Vec<u32>>, &Field, usize)> = self
                .blocks_of(g)
                .iter()
                .zip(self.spaces.iter())
                .map(|(m, (f, d))| (fixed_space(m).0, f, *d))
                .collect();
            // enumerate the span of each summand basis
            let mut summand_codes: Vec<Vec<u64>> = Vec::new();
            for (basis, f, d) in &bases {
                let mut codes = Vec::new();
                let mut counters = vec![0u32; basis.len()];
                loop {
                    let mut v = vec![0u32; *d];
                    for (b, &c) in basis.iter().zip(counters.iter()) {
                        if c != 0 {
                            for i in 0..*d {
                                v[i] = f.add(v[i], f.mul(c, b[i]));
                            }
                        }
                    }
                    codes.push(encode_vec(&v, f.q));
                    // odometer over coefficients
                    let mut pos = 0;
                    loop {
                        if pos == counters.len() {
                            break;
                        }
                        counters[pos] += 1;
                        if (counters[pos] as u64) < f.q {
                            break;
                        }
                        counters[pos] = 0;
                        pos += 1;
                    }
                    if pos == counters.len() {
                        break;
                    }
                }
                summand_codes.push(codes);
            }
            // cross product of summand fixed sets
            let sizes = self.summand_sizes();
            let mut combos: Vec<u64> = vec![0];
            let mut shift = 1u64;
            for (i, codes) in summand_codes.iter().enumerate() {
                let mut next = Vec::with_capacity(combos.len() * codes.len());
                for &c in &combos {
                    for &s in codes {
                        next.push(c + s * shift);
                    }
                }
                combos = next;
                shift *= sizes[i];
            }
            for c in combos {
                hit[c as usize] = true;
            }
        }
        hit
    }

    /// Orbit representatives v such that every element of prime order >= 5
    /// in the stabilizer of v lies in K.
    pub fn pi0_regular_mod_k(&self, k: &Subgroup, orbits: &OrbitData) -> Vec<u64> {
        let bad: Vec<u32> = (0..self.group.order() as u32)
            .filter(|&g| {
                let o = self.group.order_of(g) as u64;
                o >= 5 && crate::gf::prime_factors(o) == vec![o] && !k.contains(g)
            })
            .collect();
        let hit = self.fixed_union_bitmap(&bad);
        orbits
            .reps
            .iter()
            .copied()
            .filter(|&r| !hit[r as usize])
            .collect()
    }

    pub fn report(&self, orbits: &OrbitData) -> OrbitReport {
        let mut hist: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        for &s in &orbits.sizes {
            *hist.entry(s).or_default() += 1;
        }
        OrbitReport {
            space_size: self.space_size(),
            orbit_count: orbits.reps.len(),
            sizes_histogram: hist.into_iter().collect(),
            representatives: orbits.reps.clone(),
            stabilizer_orders: orbits
                .reps
                .iter()
                .map(|&r| self.stabilizer(r).order())
                .collect(),
            regular_orbits: self.regular_orbit_count(orbits),
        }
    }
}

// ---------------------------------------------------------------------------
// Subset search on permutation actions
// ---------------------------------------------------------------------------

/// Point orbits of a permutation group.
pub fn point_orbits(g: &EnumeratedGroup) -> Vec<Vec<u16>> {
    let degree = match g.elem(0) {
        Elem::Perm(p) => p.len(),
        _ => panic!("permutation group required"),
    };
    let mut orbit = vec![usize::MAX; degree];
    let mut out: Vec<Vec<u16>> = Vec::new();
    for start in 0..degree {
        if orbit[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start as u16];
        orbit[start] = id;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &gi in &g.gens {
                let Elem::Perm(p) = g.elem(gi) else {
                    unreachable!()
                };
                let y = p[x] as usize;
                if orbit[y] == usize::MAX {
                    orbit[y] = id;
                    members.push(y as u16);
                    stack.push(y);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Finds a subset of the permuted points whose set-stabilizer is a
/// {2,3}-group and which meets every orbit; search order is increasing
/// subset size, then lexicographic. Existence is guaranteed for solvable
/// input, so exhaustion signals a usage error upstream.
pub fn delta_search(g: &EnumeratedGroup) -> Result<Vec<u16>> {
    let degree = match g.elem(0) {
        Elem::Perm(p) => p.len(),
        _ => return Err(Error::usage("delta_search needs a permutation group")),
    };
    if degree > DELTA_POINT_CAP {
        return Err(Error::resource(format!(
            "subset search capped at {DELTA_POINT_CAP} points"
        )));
    }
    if !g.is_solvable() {
        return Err(Error::usage("delta_search requires a solvable group"));
    }
    let orbits = point_orbits(g);
    let orbit_masks: Vec<u32> = orbits
        .iter()
        .map(|o| o.iter().fold(0u32, |m, &x| m | (1 << x)))
        .collect();
    let perms: Vec<&Vec<u16>> = (0..g.order() as u32)
        .map(|i| match g.elem(i) {
            Elem::Perm(p) => p,
            _ => unreachable!(),
        })
        .collect();
    let mut masks: Vec<u32> = (0u32..(1 << degree)).collect();
    masks.sort_by_key(|&m| (m.count_ones(), m));
    for mask in masks {
        if orbit_masks.iter().any(|&om| om & mask == 0) {
            continue;
        }
        let mut stab_order = 0u64;
        let mut ok = true;
        for p in &perms {
            let mut image = 0u32;
            for x in 0..degree {
                if mask & (1 << x) != 0 {
                    image |= 1 << p[x];
                }
            }
            if image == mask {
                stab_order += 1;
            }
        }
        // {2,3}-group test on the stabilizer order
        let mut n = stab_order;
        while n % 2 == 0 {
            n /= 2;
        }
        while n % 3 == 0 {
            n /= 3;
        }
        if n != 1 {
            ok = false;
        }
        if ok {
            let delta: Vec<u16> = (0..degree as u16)
                .filter(|&x| mask & (1 << x) != 0)
                .collect();
            return Ok(delta);
        }
    }
    Err(Error::internal(
        "no subset with a {2,3}-stabilizer found for solvable input",
    ))
}

/// Order of the set-stabilizer of a point subset.
pub fn set_stabilizer_order(g: &EnumeratedGroup, delta: &[u16]) -> u64 {
    let mask: u32 = delta.iter().fold(0u32, |m, &x| m | (1 << x));
    (0..g.order() as u32)
        .filter(|&i| {
            let Elem::Perm(p) = g.elem(i) else {
                unreachable!()
            };
            let mut image = 0u32;
            for x in 0..p.len() {
                if mask & (1 << x) != 0 {
                    image |= 1 << p[x];
                }
            }
            image == mask
        })
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{extraspecial_qp, gamma, gamma0, sl2};
    use crate::grp::ORDER_CAP;

    fn action_of(c: &Construction) -> ModuleAction {
        ModuleAction::from_construction(c, ORDER_CAP).unwrap()
    }

    #[test]
    fn gamma_orbits_and_stabilizers() {
        let a = action_of(&gamma(2, 4).unwrap());
        let orb = a.orbits();
        assert_eq!(orb.sizes, vec![1, 15]);
        assert_eq!(orb.reps, vec![0, 1]);
        assert_eq!(a.stabilizer(0).order(), 60);
        assert_eq!(a.stabilizer(1).order(), 4); // the Galois group fixes 1
        assert_eq!(a.regular_orbit_count(&orb), 0);
        assert!(a.is_faithful());
        // orbit-stabilizer on every representative
        for (i, &r) in orb.reps.iter().enumerate() {
            assert_eq!(orb.sizes[i] * a.stabilizer(r).order(), a.group.order());
        }
        // Burnside
        assert_eq!(a.burnside_orbit_count(), orb.reps.len() as u128);
        // the order-2 Galois coset elements fix exactly GF(4)
        let two_els: Vec<u32> = (0..60u32)
            .filter(|&g| a.group.order_of(g) == 2)
            .collect();
        let gamma0_idx = a.group.index_of(&gamma0(2, 4).unwrap().gens[0]).unwrap();
        let g0 = a.group.subgroup_closure(&[gamma0_idx]);
        for g in two_els {
            if !g0.contains(g) {
                assert_eq!(a.fixed_count(g), 4);
            }
        }
    }

    #[test]
    fn sl23_orbits() {
        let a = action_of(&sl2(3).unwrap());
        let orb = a.orbits();
        assert_eq!(orb.sizes, vec![1, 8]);
        assert_eq!(a.regular_orbit_count(&orb), 0);
        // no elements of order >= 5 at all: every orbit is pi0-regular mod K
        // even with K trivial
        let reps = a.pi0_regular_mod_k(&Subgroup::trivial(), &orb);
        assert_eq!(reps, orb.reps);
    }

    #[test]
    fn trivial_group_has_singleton_orbits() {
        let f2 = crate::gf::FiniteField::get(2, 1).unwrap();
        let id = crate::gf::Matrix::identity(f2.clone(), 3);
        let g = EnumeratedGroup::close(vec![Elem::Mats(vec![id])], ORDER_CAP).unwrap();
        let a = ModuleAction::new(g, vec![(f2, 3)]).unwrap();
        let orb = a.orbits();
        assert_eq!(orb.reps.len(), 8);
        assert!(orb.sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn pi0_regular_mod_k_gamma() {
        let a = action_of(&gamma(2, 4).unwrap());
        let orb = a.orbits();
        // with K = 1 the four order-5 elements are all "bad": only the
        // nonzero orbit qualifies
        let reps = a.pi0_regular_mod_k(&Subgroup::trivial(), &orb);
        assert_eq!(reps, vec![1]);
        // with K = the order-5 subgroup both orbits qualify
        let x5 = (0..60u32).find(|&g| a.group.order_of(g) == 5).unwrap();
        let k = a.group.subgroup_closure(&[x5]);
        let reps = a.pi0_regular_mod_k(&k, &orb);
        assert_eq!(reps, vec![0, 1]);
    }

    #[test]
    fn extraspecial_qp5_has_regular_orbits() {
        let a = action_of(&extraspecial_qp(5, 11).unwrap());
        assert_eq!(a.space_size(), 161051);
        let orb = a.orbits();
        assert!(a.regular_orbit_count(&orb) >= 2);
        let reps = a.pi0_regular_mod_k(&Subgroup::trivial(), &orb);
        assert!(reps.len() >= 2);
        let total: u64 = orb.sizes.iter().sum();
        assert_eq!(total, 161051);
        for (i, &r) in orb.reps.iter().enumerate() {
            let st = a.stabilizer(r).order();
            assert_eq!(orb.sizes[i] * st, a.group.order());
        }
    }

    #[test]
    fn delta_search_examples() {
        // Z5 on 5 points
        let z5 = EnumeratedGroup::close(vec![Elem::Perm(vec![1, 2, 3, 4, 0])], ORDER_CAP).unwrap();
        assert_eq!(delta_search(&z5).unwrap(), vec![0]);
        // S4 on 4 points: {0} works, stabilizer S3
        let s4 = EnumeratedGroup::close(
            vec![Elem::Perm(vec![1, 0, 2, 3]), Elem::Perm(vec![1, 2, 3, 0])],
            ORDER_CAP,
        )
        .unwrap();
        let d = delta_search(&s4).unwrap();
        assert_eq!(d, vec![0]);
        assert_eq!(set_stabilizer_order(&s4, &d), 6);
        // Z7:Z3 on 7 points: stabilizer order coprime to 7
        let add = Elem::Perm((0..7).map(|x| ((x + 1) % 7) as u16).collect());
        let mul = Elem::Perm((0..7).map(|x| ((x * 2) % 7) as u16).collect());
        let f21 = EnumeratedGroup::close(vec![add, mul], ORDER_CAP).unwrap();
        let d = delta_search(&f21).unwrap();
        assert_ne!(set_stabilizer_order(&f21, &d) % 7, 0);
        // non-solvable input is rejected
        let a5 = EnumeratedGroup::close(
            vec![
                Elem::Perm(vec![1, 2, 3, 4, 0]),
                Elem::Perm(vec![1, 2, 0, 3, 4]),
            ],
            ORDER_CAP,
        )
        .unwrap();
        assert!(matches!(delta_search(&a5), Err(Error::Usage(_))));
    }

    #[test]
    fn mixed_characteristic_direct_sum_action() {
        let c = crate::families::direct_sum(&[sl2(3).unwrap(), gamma(2, 4).unwrap()]).unwrap();
        let a = action_of(&c);
        assert_eq!(a.space_size(), 9 * 16);
        assert_eq!(a.group.order(), 24 * 60);
        let orb = a.orbits();
        let total: u64 = orb.sizes.iter().sum();
        assert_eq!(total, 144);
        // orbits: {0}+{0}, 8 x {0}, {0} x 15, 8 x 15
        assert_eq!(orb.sizes.len(), 4);
        assert_eq!(a.burnside_orbit_count(), 4);
        assert!(a.is_faithful());
    }
}
