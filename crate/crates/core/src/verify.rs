//! Theorem-level verifiers: the two-orbit witness for the main orbit
//! theorem, its single-orbit prime variant, the small-defect block bound,
//! and the degree/class divisibility corollaries. Every verifier either
//! returns a witness that a separate replay path re-validates from scratch,
//! or raises an alarm (a structural error); there are no silent passes.
//!
//! Hall-subgroup quantification is replaced by the element-level criterion:
//! all prime-order (>= 5, or p-power for the prime variant) elements of the
//! point stabilizer must lie in K. Since every such element lies in some
//! Hall (resp. Sylow) subgroup and conversely, the criteria agree.

use serde::{Deserialize, Serialize};

use crate::action::ModuleAction;
use crate::chartab::{char_table, p_blocks, CharTable};
use crate::error::{Error, Result};
use crate::gf::prime_factors;
use crate::grp::{
    is_p_power, p_part, p_valuation, pi_part, small_generating_set, EnumeratedGroup, PiSet,
    Subgroup,
};

/// F_2(G): the second term of the ascending Fitting series.
pub fn fitting_two(g: &EnumeratedGroup) -> Result<Subgroup> {
    let fs = g.fitting_series()?;
    let idx = fs.chain.len().min(3) - 1;
    Ok(fs.chain[idx.min(2)].clone())
}

fn pi0_prime_order_outside(g: &EnumeratedGroup, k: &Subgroup) -> Vec<u32> {
    (0..g.order() as u32)
        .filter(|&x| {
            let o = g.order_of(x) as u64;
            o >= 5 && prime_factors(o) == vec![o] && !k.contains(x)
        })
        .collect()
}

fn p_power_order_outside(g: &EnumeratedGroup, k: &Subgroup, p: u64) -> Vec<u32> {
    (0..g.order() as u32)
        .filter(|&x| {
            x != 0 && is_p_power(g.order_of(x) as u64, p) && !k.contains(x)
        })
        .collect()
}

/// Pre-flight for the orbit theorems: solvable, faithful, completely
/// reducible (every summand irreducible).
fn orbit_theorem_preconditions(a: &ModuleAction) -> Result<()> {
    if !a.group.is_solvable() {
        return Err(Error::usage("group is not solvable"));
    }
    if !a.is_faithful() {
        return Err(Error::usage("action is not faithful"));
    }
    for i in 0..a.spaces.len() {
        if !crate::qp::summand_irreducible(a, i)? {
            return Err(Error::usage(format!(
                "summand {i} is not irreducible: module is not completely reducible as given"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Orbit theorem, two-orbit version
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremAWitness {
    pub k_order: u64,
    pub k_elems: Vec<u32>,
    pub v_a: u64,
    pub v_b: u64,
    pub checks: Vec<(String, bool)>,
}

/// The per-K conditions (abelian Hall pi0 parts of KF/F and K cap F).
fn k_conditions(
    g: &EnumeratedGroup,
    k: &Subgroup,
    f: &Subgroup,
    pi: &PiSet,
) -> Result<(bool, bool, Subgroup)> {
    // Hall pi-part of KF/F: the section sits inside F2/F = F(G/F), which is
    // nilpotent, so the pi-elements of the quotient form a subgroup
    let mut kf_gens = k.gens.clone();
    kf_gens.extend(&f.gens);
    let kf = if kf_gens.is_empty() {
        Subgroup::trivial()
    } else {
        g.subgroup_closure(&kf_gens)
    };
    let kf_grp = EnumeratedGroup::from_subgroup(g, &kf);
    let f_in_kf = Subgroup {
        elems: f
            .elems
            .iter()
            .map(|&x| kf.elems.binary_search(&x).unwrap() as u32)
            .collect(),
        gens: vec![],
    };
    let (quot, _) = kf_grp.quotient(&f_in_kf)?;
    let top_part = quot.pi_subgroup_of_nilpotent(&quot.whole(), pi)?;
    let top_abelian = quot.is_abelian_subset(&top_part.elems);
    // pi-part of K cap F: inside nilpotent F
    let kf_int = EnumeratedGroup::intersect(k, f);
    let bottom_part_elems: Vec<u32> = kf_int
        .elems
        .iter()
        .copied()
        .filter(|&x| crate::grp::is_pi_number(g.order_of(x) as u64, pi))
        .collect();
    // closure sanity within the nilpotent F
    let bottom_sub = Subgroup {
        gens: small_generating_set(g, &bottom_part_elems),
        elems: bottom_part_elems,
    };
    let closed = g.subgroup_closure(&if bottom_sub.gens.is_empty() {
        vec![]
    } else {
        bottom_sub.gens.clone()
    });
    if closed.elems != bottom_sub.elems {
        return Err(Error::internal("pi-part of K cap F is not a subgroup"));
    }
    let bottom_abelian = g.is_abelian_subset(&bottom_sub.elems);
    Ok((top_abelian, bottom_abelian, bottom_sub))
}

/// Searches K normal inside F_2(G), ascending by order, and pairs of orbit
/// representatives in code order; returns the first witness satisfying all
/// five checks.
pub fn verify_theorem_a(a: &ModuleAction, class_cap: usize) -> Result<TheoremAWitness> {
    orbit_theorem_preconditions(a)?;
    let g = &a.group;
    let f = g.fitting();
    let f2 = fitting_two(g)?;
    let orbits = a.orbits();
    let normals = g.normal_subgroups(class_cap)?;
    for k in normals
        .iter()
        .filter(|k| k.elems.iter().all(|&x| f2.contains(x)))
    {
        let bad = pi0_prime_order_outside(g, k);
        let hit = a.fixed_union_bitmap(&bad);
        let qualifying: Vec<u64> = orbits
            .reps
            .iter()
            .copied()
            .filter(|&r| !hit[r as usize])
            .collect();
        if qualifying.len() < 2 {
            continue;
        }
        let Ok((top_ab, bottom_ab, o_pi0)) = k_conditions(g, k, &f, &PiSet::Pi0) else {
            continue;
        };
        if !top_ab || !bottom_ab {
            continue;
        }
        for (i, &va) in qualifying.iter().enumerate() {
            for &vb in qualifying.iter().skip(i + 1) {
                // trivial-intersection condition on O_pi0(K cap F)
                let ca = centralizing_subset(a, &o_pi0.elems, va);
                let cb = centralizing_subset(a, &o_pi0.elems, vb);
                let inter: Vec<u32> = ca.iter().copied().filter(|x| cb.contains(x)).collect();
                if inter == vec![0] {
                    return Ok(TheoremAWitness {
                        k_order: k.order(),
                        k_elems: k.elems.clone(),
                        v_a: va,
                        v_b: vb,
                        checks: vec![
                            ("K inside F2".into(), true),
                            ("pi0 stabilizer elements inside K".into(), true),
                            ("Hall pi0 of KF/F abelian".into(), true),
                            ("Hall pi0 of K cap F abelian".into(), true),
                            ("trivial joint centralizer in O_pi0(K cap F)".into(), true),
                        ],
                    });
                }
            }
        }
    }
    Err(Error::structure(
        "theorem-A",
        "no witness found: two-orbit claim would be falsified",
    ))
}

/// Elements of the given subset fixing the vector.
fn centralizing_subset(a: &ModuleAction, subset: &[u32], code: u64) -> Vec<u32> {
    let coords = a.decode(code);
    subset
        .iter()
        .copied()
        .filter(|&x| {
            a.blocks_of(x)
                .iter()
                .zip(coords.iter())
                .all(|(m, v)| m.apply(v) == *v)
        })
        .collect()
}

/// Independent replay of a two-orbit witness: every check is recomputed
/// from scratch through full stabilizer filtering, without the search's
/// fixed-space machinery.
pub fn replay_theorem_a(a: &ModuleAction, w: &TheoremAWitness, class_cap: usize) -> Result<()> {
    orbit_theorem_preconditions(a)?;
    let g = &a.group;
    let k = Subgroup {
        gens: small_generating_set(g, &w.k_elems),
        elems: w.k_elems.clone(),
    };
    if g.subgroup_closure(&if k.gens.is_empty() { vec![] } else { k.gens.clone() })
        .elems
        != k.elems
    {
        return Err(Error::structure("replay-A", "K is not a subgroup"));
    }
    if !g.is_normal(&k) {
        return Err(Error::structure("replay-A", "K is not normal"));
    }
    let f2 = fitting_two(g)?;
    if !k.elems.iter().all(|&x| f2.contains(x)) {
        return Err(Error::structure("replay-A", "K is not inside F2(G)"));
    }
    let orbits = a.orbits();
    if orbits.orbit_of[w.v_a as usize] == orbits.orbit_of[w.v_b as usize] {
        return Err(Error::structure("replay-A", "representatives share an orbit"));
    }
    for v in [w.v_a, w.v_b] {
        let stab = a.stabilizer(v);
        for &x in &stab.elems {
            let o = g.order_of(x) as u64;
            if o >= 5 && prime_factors(o) == vec![o] && !k.contains(x) {
                return Err(Error::structure(
                    "replay-A",
                    format!("stabilizer of {v} has a prime-order {o} element outside K"),
                ));
            }
        }
    }
    let f = g.fitting();
    let (top_ab, bottom_ab, o_pi0) = k_conditions(g, &k, &f, &PiSet::Pi0)?;
    if !top_ab {
        return Err(Error::structure("replay-A", "Hall pi0 of KF/F is not abelian"));
    }
    if !bottom_ab {
        return Err(Error::structure(
            "replay-A",
            "Hall pi0 of K cap F is not abelian",
        ));
    }
    let sa = a.stabilizer(w.v_a);
    let sb = a.stabilizer(w.v_b);
    let joint: Vec<u32> = o_pi0
        .elems
        .iter()
        .copied()
        .filter(|&x| sa.contains(x) && sb.contains(x))
        .collect();
    if joint != vec![0] {
        return Err(Error::structure(
            "replay-A",
            "joint centralizer in O_pi0(K cap F) is nontrivial",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Orbit theorem, single-orbit p-variant
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem34Witness {
    pub p: u64,
    pub k_order: u64,
    pub k_elems: Vec<u32>,
    pub v: u64,
    pub centralizer_order: u64,
    pub o_p_order: u64,
}

pub fn verify_theorem_34(a: &ModuleAction, p: u64, class_cap: usize) -> Result<Theorem34Witness> {
    if p < 5 || prime_factors(p) != vec![p] {
        return Err(Error::usage("p must be a prime >= 5"));
    }
    orbit_theorem_preconditions(a)?;
    let g = &a.group;
    let f = g.fitting();
    let f2 = fitting_two(g)?;
    let orbits = a.orbits();
    let normals = g.normal_subgroups(class_cap)?;
    let pi = PiSet::Primes(vec![p]);
    for k in normals
        .iter()
        .filter(|k| k.elems.iter().all(|&x| f2.contains(x)))
    {
        let bad = p_power_order_outside(g, k, p);
        let hit = a.fixed_union_bitmap(&bad);
        let Ok((top_ab, bottom_ab, o_p)) = k_conditions(g, k, &f, &pi) else {
            continue;
        };
        if !top_ab || !bottom_ab {
            continue;
        }
        for &v in &orbits.reps {
            if hit[v as usize] {
                continue;
            }
            let c = centralizing_subset(a, &o_p.elems, v);
            // squared bound: |C|^2 <= |O_p(K cap F)|
            if (c.len() as u64).pow(2) <= o_p.order() {
                return Ok(Theorem34Witness {
                    p,
                    k_order: k.order(),
                    k_elems: k.elems.clone(),
                    v,
                    centralizer_order: c.len() as u64,
                    o_p_order: o_p.order(),
                });
            }
        }
    }
    Err(Error::structure(
        "theorem-34",
        "no witness found: single-orbit claim would be falsified",
    ))
}

pub fn replay_theorem_34(a: &ModuleAction, w: &Theorem34Witness) -> Result<()> {
    orbit_theorem_preconditions(a)?;
    let g = &a.group;
    let k = Subgroup {
        gens: small_generating_set(g, &w.k_elems),
        elems: w.k_elems.clone(),
    };
    if !g.is_normal(&k) {
        return Err(Error::structure("replay-34", "K is not normal"));
    }
    let f2 = fitting_two(g)?;
    if !k.elems.iter().all(|&x| f2.contains(x)) {
        return Err(Error::structure("replay-34", "K is not inside F2(G)"));
    }
    let stab = a.stabilizer(w.v);
    for &x in &stab.elems {
        if x != 0 && is_p_power(g.order_of(x) as u64, w.p) && !k.contains(x) {
            return Err(Error::structure(
                "replay-34",
                "stabilizer has a p-element outside K",
            ));
        }
    }
    let f = g.fitting();
    let pi = PiSet::Primes(vec![w.p]);
    let (top_ab, bottom_ab, o_p) = k_conditions(g, &k, &f, &pi)?;
    if !top_ab || !bottom_ab {
        return Err(Error::structure("replay-34", "abelian section checks fail"));
    }
    let c: Vec<u32> = o_p
        .elems
        .iter()
        .copied()
        .filter(|&x| stab.contains(x))
        .collect();
    if (c.len() as u64).pow(2) > o_p.order() {
        return Err(Error::structure("replay-34", "square centralizer bound fails"));
    }
    if c.len() as u64 != w.centralizer_order || o_p.order() != w.o_p_order {
        return Err(Error::structure("replay-34", "witness data mismatch"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Small-defect block bound
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremBReport {
    pub p: u64,
    pub n: u32,
    pub min_defect: u32,
    pub bound: u32,
    pub block_count: usize,
}

/// Checks that some p-block has defect at most floor(3n/5); requires
/// O_p(G) = 1 and p >= 5.
pub fn verify_theorem_b(g: &EnumeratedGroup, p: u64, seed: u64) -> Result<TheoremBReport> {
    if p < 5 || prime_factors(p) != vec![p] {
        return Err(Error::usage("p must be a prime >= 5"));
    }
    if !g.is_solvable() {
        return Err(Error::usage("group is not solvable"));
    }
    if g.p_core(p).order() != 1 {
        return Err(Error::usage("O_p(G) must be trivial"));
    }
    let n = p_valuation(g.order(), p);
    let t = char_table(g, seed)?;
    let blocks = p_blocks(&t, p)?;
    let min_defect = *blocks.defects.iter().min().unwrap();
    let bound = 3 * n / 5;
    if min_defect > bound {
        return Err(Error::structure(
            "theorem-B",
            format!("min defect {min_defect} exceeds floor(3n/5) = {bound}"),
        ));
    }
    Ok(TheoremBReport {
        p,
        n,
        min_defect,
        bound,
        block_count: blocks.blocks.len(),
    })
}

// ---------------------------------------------------------------------------
// Degree and class-size corollaries
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section5Report {
    pub p: u64,
    pub a: u32,
    pub a_star: u32,
    pub index_p_valuation: u32,
    pub b_p: u64,
    pub dl_p: u32,
    pub b_star_p: u64,
    pub p_derived_order: u64,
    pub checks: Vec<(String, bool)>,
    /// degrees of a minimal set of distinct irreducibles whose product the
    /// pi0-part of |G : F(G)| divides
    pub theta_degrees: Option<Vec<u64>>,
    /// sizes of distinct classes whose product the pi0-part divides
    pub class_sizes: Option<Vec<u64>>,
}

fn find_divisibility_witness(values: &[u64], target: u64) -> Option<Vec<usize>> {
    if target == 1 {
        return Some(vec![]);
    }
    let k = values.len();
    for i in 0..k {
        if values[i] % target == 0 {
            return Some(vec![i]);
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if (values[i] as u128 * values[j] as u128) % target as u128 == 0 {
                return Some(vec![i, j]);
            }
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let prod = values[i] as u128 * values[j] as u128 * values[l] as u128;
                if prod % target as u128 == 0 {
                    return Some(vec![i, j, l]);
                }
            }
        }
    }
    None
}

pub fn verify_section5(
    g: &EnumeratedGroup,
    t: &CharTable,
    p: u64,
    seed: u64,
) -> Result<Section5Report> {
    if p < 5 || prime_factors(p) != vec![p] {
        return Err(Error::usage("p must be a prime >= 5"));
    }
    if !g.is_solvable() {
        return Err(Error::usage("group is not solvable"));
    }
    let stats = crate::chartab::degree_stats(g, t, p, seed)?;
    let a = stats.a;
    let f = g.fitting();
    let index = g.order() / f.order();
    let index_p = p_valuation(index, p);
    let a_star: u32 = g
        .conjugacy_classes()
        .sizes
        .iter()
        .map(|&s| p_valuation(s, p))
        .max()
        .unwrap_or(0);
    let mut checks: Vec<(String, bool)> = Vec::new();
    // |G:F|_p <= p^(3a); at a = 0 this is exactly "p does not divide |G:F|"
    checks.push((
        if a == 0 {
            "p does not divide |G:F(G)| (a = 0)".into()
        } else {
            "|G:F(G)|_p <= p^(3a)".into()
        },
        index_p <= 3 * a,
    ));
    checks.push(("b(P) <= p^(4a)".into(), stats.b_p <= p.pow(4 * a)));
    if a > 0 {
        // dl(P) <= log2(a) + 7, exactly: dl <= 7 or 2^(dl-7) <= a
        let dl_ok = stats.dl_p <= 7 || 2u64.pow(stats.dl_p - 7) <= a as u64;
        checks.push(("dl(P) <= log2(a) + 7".into(), dl_ok));
    }
    checks.push((
        "b*(P) <= p^(4a*)".into(),
        stats.b_star_p <= p.pow(4 * a_star),
    ));
    checks.push((
        "|P'| <= p^(2a*(4a*+1))".into(),
        stats.p_derived_order <= p.pow(2 * a_star * (4 * a_star + 1)),
    ));
    checks.push((
        "|G:F(G)|_p <= p^(3a*)".into(),
        index_p <= 3 * a_star,
    ));
    // three-character divisibility: the pi0-part of |G:F| divides a product
    // of at most three distinct irreducible degrees
    let target = pi_part(index, &PiSet::Pi0);
    let theta = find_divisibility_witness(&t.degrees, target);
    checks.push(("pi0-part of |G:F| divides a <= 3 degree product".into(), theta.is_some()));
    let class_sizes_all: Vec<u64> = t.class_sizes.clone();
    let cw = find_divisibility_witness(&class_sizes_all, target);
    checks.push((
        "pi0-part of |G:F| divides a <= 3 class-size product".into(),
        cw.is_some(),
    ));
    let report = Section5Report {
        p,
        a,
        a_star,
        index_p_valuation: index_p,
        b_p: stats.b_p,
        dl_p: stats.dl_p,
        b_star_p: stats.b_star_p,
        p_derived_order: stats.p_derived_order,
        checks: checks.clone(),
        theta_degrees: theta.map(|idx| idx.iter().map(|&i| t.degrees[i]).collect()),
        class_sizes: cw.map(|idx| idx.iter().map(|&i| class_sizes_all[i]).collect()),
    };
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(Error::structure("section-5", name.clone()));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section6Report {
    pub rho: Vec<u64>,
    pub sigma: usize,
    pub rho_star: Vec<u64>,
    pub sigma_star: usize,
    pub holds: bool,
}

/// |rho(G)| <= 3 sigma(G) + 2.
pub fn verify_section6(g: &EnumeratedGroup, t: &CharTable) -> Result<Section6Report> {
    if !g.is_solvable() {
        return Err(Error::usage("group is not solvable"));
    }
    let mut rho: Vec<u64> = t.degrees.iter().flat_map(|&d| prime_factors(d)).collect();
    rho.sort_unstable();
    rho.dedup();
    let sigma = t
        .degrees
        .iter()
        .map(|&d| prime_factors(d).len())
        .max()
        .unwrap_or(0);
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
    let holds = rho.len() <= 3 * sigma + 2;
    if !holds {
        return Err(Error::structure(
            "section-6",
            format!("|rho| = {} exceeds 3 sigma + 2 = {}", rho.len(), 3 * sigma + 2),
        ));
    }
    Ok(Section6Report {
        rho,
        sigma,
        rho_star,
        sigma_star,
        holds,
    })
}

/// p-part of the order, re-exported shape used by reports.
pub fn order_p_part(n: u64, p: u64) -> u64 {
    p_part(n, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{affine, direct_sum, gamma, sl2};
    use crate::grp::{Elem, CLASS_CAP, ORDER_CAP};

    fn action_of(c: &crate::families::Construction) -> ModuleAction {
        ModuleAction::from_construction(c, ORDER_CAP).unwrap()
    }

    #[test]
    fn theorem_a_gl22() {
        // S3 = GL(2,2) has no elements of order >= 5: K = 1 works
        let a = action_of(&sl2(2).unwrap());
        let w = verify_theorem_a(&a, CLASS_CAP).unwrap();
        assert_eq!(w.k_order, 1);
        assert_eq!(w.v_a, 0);
        assert_eq!(w.v_b, 1);
        replay_theorem_a(&a, &w, CLASS_CAP).unwrap();
    }

    #[test]
    fn theorem_a_gamma16() {
        let a = action_of(&gamma(2, 4).unwrap());
        let w = verify_theorem_a(&a, CLASS_CAP).unwrap();
        // minimal K is the order-5 subgroup: zero must qualify, which
        // requires every order-5 element inside K
        assert_eq!(w.k_order, 5);
        assert_eq!((w.v_a, w.v_b), (0, 1));
        replay_theorem_a(&a, &w, CLASS_CAP).unwrap();
    }

    #[test]
    fn theorem_a_mixed_characteristic() {
        let c = direct_sum(&[sl2(3).unwrap(), gamma(2, 4).unwrap()]).unwrap();
        let a = action_of(&c);
        let w = verify_theorem_a(&a, CLASS_CAP).unwrap();
        replay_theorem_a(&a, &w, CLASS_CAP).unwrap();
    }

    #[test]
    fn theorem_a_replay_rejects_tampering() {
        let a = action_of(&gamma(2, 4).unwrap());
        let mut w = verify_theorem_a(&a, CLASS_CAP).unwrap();
        // same orbit for both representatives must be rejected
        w.v_b = w.v_a;
        assert!(replay_theorem_a(&a, &w, CLASS_CAP).is_err());
    }

    #[test]
    fn theorem_34_gamma16() {
        let a = action_of(&gamma(2, 4).unwrap());
        let w = verify_theorem_34(&a, 5, CLASS_CAP).unwrap();
        assert!(w.centralizer_order * w.centralizer_order <= w.o_p_order.max(1));
        replay_theorem_34(&a, &w).unwrap();
    }

    #[test]
    fn theorem_34_p_coprime() {
        // p not dividing |G|: K = 1 and any orbit representative works
        let a = action_of(&sl2(3).unwrap());
        let w = verify_theorem_34(&a, 5, CLASS_CAP).unwrap();
        assert_eq!(w.k_order, 1);
        replay_theorem_34(&a, &w).unwrap();
    }

    #[test]
    fn theorem_b_frobenius_groups() {
        for (q, ord) in [(11u64, 5u64), (31, 5), (16, 15), (16, 5), (11, 10)] {
            let g = affine(q, ord).unwrap().close(ORDER_CAP).unwrap();
            let r = verify_theorem_b(&g, 5, 1).unwrap();
            assert_eq!(r.n, 1);
            assert_eq!(r.min_defect, 0);
            assert_eq!(r.bound, 0);
        }
    }

    #[test]
    fn theorem_b_rejects_nontrivial_core() {
        // gamma(2,4) has O_5 = Z5
        let g = gamma(2, 4).unwrap().close(ORDER_CAP).unwrap();
        assert!(matches!(
            verify_theorem_b(&g, 5, 1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn section5_examples() {
        // SL(2,3) at p = 5: a = 0, all checks trivially pass
        let g = sl2(3).unwrap().close(ORDER_CAP).unwrap();
        let t = char_table(&g, 1).unwrap();
        let r = verify_section5(&g, &t, 5, 1).unwrap();
        assert_eq!(r.a, 0);
        assert_eq!(r.index_p_valuation, 0);
        assert!(r.theta_degrees.is_some());

        // Z11:Z5 at p = 5: a = 1, the degree-5 character carries the index
        let g = affine(11, 5).unwrap().close(ORDER_CAP).unwrap();
        let t = char_table(&g, 1).unwrap();
        let r = verify_section5(&g, &t, 5, 1).unwrap();
        assert_eq!(r.a, 1);
        assert_eq!(r.theta_degrees, Some(vec![5]));
        assert_eq!(r.class_sizes, Some(vec![5]));
    }

    #[test]
    fn section6_examples() {
        let s4 = EnumeratedGroup::close(
            vec![Elem::Perm(vec![1, 0, 2, 3]), Elem::Perm(vec![1, 2, 3, 0])],
            ORDER_CAP,
        )
        .unwrap();
        let t = char_table(&s4, 1).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 2, 3, 3]);
        let r = verify_section6(&s4, &t).unwrap();
        assert_eq!(r.rho, vec![2, 3]);
        assert_eq!(r.sigma, 1);
        assert!(r.holds);

        let g = gamma(2, 4).unwrap().close(ORDER_CAP).unwrap();
        let t = char_table(&g, 1).unwrap();
        let r = verify_section6(&g, &t).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn fitting_two_metanilpotent() {
        let s4 = EnumeratedGroup::close(
            vec![Elem::Perm(vec![1, 0, 2, 3]), Elem::Perm(vec![1, 2, 3, 0])],
            ORDER_CAP,
        )
        .unwrap();
        assert_eq!(fitting_two(&s4).unwrap().order(), 12); // A4
    }
}
