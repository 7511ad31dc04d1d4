//! Executable auditors for the counting and estimate bounds: the exact
//! rational beta fixed-point bound, the star inequality evaluator with its
//! per-case coefficient tables and sound directed rounding, census-based
//! counting checks on decomposed instances, and the symplectic
//! completely-reducible subgroup audit.
//!
//! All inequality evaluation is exact: big integers for integral powers,
//! floor-of-integer-root plus one for fractional powers (rounding the left
//! side up), and rational comparison against 1. The sweep covers each
//! admissible |W| range by evaluating at the minimal admissible value and
//! certifying a monotone majorant for everything larger, alongside directly
//! evaluated spot points.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::action::ModuleAction;
use crate::error::{Error, Result};
use crate::gf::prime_factors;
use crate::grp::{Census, EnumeratedGroup, PiSet, Subgroup};
use crate::qp::QpDecomposition;

// ---------------------------------------------------------------------------
// beta
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaBranch {
    DividesMinusOne,
    DividesPlusOne,
}

/// Exact rational beta for a prime s >= 5 and a prime power q^k with
/// s | q^k -+ 1: the fixed-space density bound of prime-order elements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaBound {
    pub s: u64,
    pub qk: u64,
    pub branch: BetaBranch,
    pub t: u64,
    pub beta_num: u64,
    pub beta_den: u64,
}

pub fn beta(s: u64, qk: u64) -> Result<BetaBound> {
    if s < 5 || prime_factors(s) != vec![s] {
        return Err(Error::domain("s must be a prime >= 5"));
    }
    let (branch, t) = if (qk - 1) % s == 0 {
        (BetaBranch::DividesMinusOne, (qk - 1) / s)
    } else if (qk + 1) % s == 0 {
        (BetaBranch::DividesPlusOne, (qk + 1) / s)
    } else {
        return Err(Error::domain(format!(
            "{s} divides neither {qk}-1 nor {qk}+1"
        )));
    };
    let (mut num, mut den) = match branch {
        BetaBranch::DividesMinusOne => (t + 1, s * t + 1),
        BetaBranch::DividesPlusOne => (t, s * t - 1),
    };
    let g = num_integer::gcd(num, den);
    num /= g;
    den /= g;
    // beta <= 1/3 for s >= 5 in both branches
    if 3 * num > den {
        return Err(Error::internal(format!(
            "beta = {num}/{den} exceeds 1/3 for s = {s}, q^k = {qk}"
        )));
    }
    Ok(BetaBound {
        s,
        qk,
        branch,
        t,
        beta_num: num,
        beta_den: den,
    })
}

// ---------------------------------------------------------------------------
// Star case tables
// ---------------------------------------------------------------------------

/// One summand bound of the star inequality: a_i = coeff * (|W|-1), times
/// floor(log5(dim W)) when flagged, and |C_V| <= |W|^(beta b) with
/// beta = beta_num/beta_den.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarTerm {
    pub beta_num: u32,
    pub beta_den: u32,
    pub coeff: u64,
    pub log5_factor: bool,
}

/// Case table row, transcribed term-for-term from the proof's paragraphs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarCase {
    pub name: &'static str,
    pub e: u32,
    /// Some(base): requires a prime p >= 5 dividing dim W with |W| >= base^p.
    pub dim_w_prime_base: Option<u64>,
    /// This must divide |W| - 1 (the cyclic U forces it).
    pub w_minus_one_divisor: u64,
    pub terms: Vec<StarTerm>,
    /// |G| <= dim W * g_coeff * (|W| - 1).
    pub g_coeff: u64,
}

pub fn star_cases() -> Vec<StarCase> {
    let t = |bn: u32, bd: u32, coeff: u64, log5: bool| StarTerm {
        beta_num: bn,
        beta_den: bd,
        coeff,
        log5_factor: log5,
    };
    vec![
        StarCase {
            name: "e16",
            e: 16,
            dim_w_prime_base: None,
            w_minus_one_divisor: 2,
            terms: vec![
                t(5, 1, 24 * 256 / (2 * 4), false),
                t(8, 1, 24 * 1296 * 256, true),
            ],
            g_coeff: 24 * 1296 * 256,
        },
        StarCase {
            name: "e9_top",
            e: 9,
            dim_w_prime_base: Some(4),
            w_minus_one_divisor: 3,
            terms: vec![
                t(3, 1, 64 * 81 / (3 * 4), false),
                t(9, 5, 576 * 2 * 81, true),
            ],
            g_coeff: 576 * 2 * 81,
        },
        StarCase {
            name: "e9_middle",
            e: 9,
            dim_w_prime_base: None,
            w_minus_one_divisor: 3,
            terms: vec![t(3, 1, 64 * 81 / (3 * 4), false)],
            g_coeff: 320 * 81,
        },
        StarCase {
            name: "e8",
            e: 8,
            dim_w_prime_base: Some(3),
            w_minus_one_divisor: 2,
            terms: vec![
                t(2, 1, 6 * 64 / (2 * 4), false),
                t(8, 5, 1296 * 64, true),
            ],
            g_coeff: 1296 * 64,
        },
        StarCase {
            name: "e4",
            e: 4,
            dim_w_prime_base: Some(3),
            w_minus_one_divisor: 2,
            terms: vec![
                t(1, 1, 4 * 16 / (2 * 4), false),
                t(4, 5, 36 * 2 * 16, true),
            ],
            g_coeff: 36 * 2 * 16,
        },
        StarCase {
            name: "e3",
            e: 3,
            dim_w_prime_base: Some(4),
            w_minus_one_divisor: 3,
            terms: vec![t(3, 5, 24 * 9, true)],
            g_coeff: 24 * 9,
        },
        StarCase {
            name: "e2",
            e: 2,
            dim_w_prime_base: Some(3),
            w_minus_one_divisor: 2,
            // the count of prime >= 5 subgroups atop the cyclic quotient
            // carries the floor of log5(dim W), as in the cyclic-top bound
            terms: vec![t(2, 5, 4, true)],
            g_coeff: 6 * 4,
        },
    ]
}

fn floor_log5(n: u64) -> u64 {
    let mut v = 0;
    let mut acc = 5u64;
    while acc <= n {
        v += 1;
        acc *= 5;
    }
    v
}

/// Is w = sigma^dim_w for a prime power sigma (the field-size coherence of
/// |W| with dim W)?
fn sigma_of(w: u64, dim_w: u64) -> Option<u64> {
    let big = BigUint::from(w);
    let root = big.nth_root(dim_w as u32);
    if num_traits::ToPrimitive::to_u64(&root.pow(dim_w as u32))? != w {
        return None;
    }
    let sigma = num_traits::ToPrimitive::to_u64(&root)?;
    (prime_factors(sigma).len() == 1).then_some(sigma)
}

/// Validates the case's side conditions for (w, dim_w).
pub fn star_side_conditions(case: &StarCase, w: u64, dim_w: u64) -> Result<()> {
    if w < 2 {
        return Err(Error::domain("|W| >= 2 always"));
    }
    if (w - 1) % case.w_minus_one_divisor != 0 {
        return Err(Error::domain(format!(
            "{} must divide |W| - 1",
            case.w_minus_one_divisor
        )));
    }
    if sigma_of(w, dim_w).is_none() {
        return Err(Error::domain(
            "|W| must be a dim W power of a prime power field size",
        ));
    }
    if let Some(base) = case.dim_w_prime_base {
        let ok = prime_factors(dim_w)
            .into_iter()
            .any(|p| p >= 5 && w >= base.pow(p as u32));
        if !ok {
            return Err(Error::domain(format!(
                "case {} needs a prime p >= 5 dividing dim W with |W| >= {base}^p",
                case.name
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarOutcome {
    pub holds: bool,
    pub lhs_num: String,
    pub lhs_den: String,
}

/// Upper bound R >= w^(beta b) per the directed-rounding rule:
/// exact for integral beta, (floor((w^u)^(1/v)) + 1)^b for u/v fractional.
fn power_upper(w: u64, term: &StarTerm, b: u32) -> BigUint {
    let wb = BigUint::from(w);
    if term.beta_den == 1 {
        wb.pow(term.beta_num * b)
    } else {
        let root = wb.pow(term.beta_num).nth_root(term.beta_den);
        (root + 1u32).pow(b)
    }
}

/// Evaluates the star inequality's left side as a sound upper bound.
pub fn star_evaluate(
    case: &StarCase,
    w: u64,
    b: u32,
    dim_w: u64,
    g_order_bound: Option<BigUint>,
) -> Result<StarOutcome> {
    star_side_conditions(case, w, dim_w)?;
    if b == 0 {
        return Err(Error::domain("b >= 1"));
    }
    let denom = BigUint::from(w).pow(case.e * b);
    let mut numer = BigUint::zero();
    let wm1 = BigUint::from(w - 1);
    for term in &case.terms {
        let mut a = BigUint::from(term.coeff) * &wm1;
        if term.log5_factor {
            a *= BigUint::from(floor_log5(dim_w));
        }
        numer += a * power_upper(w, term, b);
    }
    let gb = g_order_bound
        .unwrap_or_else(|| BigUint::from(case.g_coeff) * BigUint::from(dim_w) * &wm1);
    numer += gb;
    Ok(StarOutcome {
        holds: numer < denom,
        lhs_num: numer.to_string(),
        lhs_den: denom.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub case: String,
    pub p: Option<u64>,
    pub b: u32,
    pub dim_w: u64,
    pub w: u64,
    pub lhs_num: String,
    pub lhs_den: String,
    pub holds: bool,
    /// True when this record also certifies every admissible |W| larger than
    /// its own, through the monotone majorant.
    pub covers_tail: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub records: Vec<SweepRecord>,
    pub violations: usize,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == vec![n]
}

/// Floor of the k-th root.
fn iroot(n: u64, k: u32) -> u64 {
    use num_traits::ToPrimitive;
    BigUint::from(n).nth_root(k).to_u64().unwrap_or(0)
}

fn prime_powers_up_to(cap: u64) -> Vec<u64> {
    (2..=cap).filter(|&n| prime_factors(n).len() == 1).collect()
}

/// Majorant at w0 that bounds the rounded star left side for every
/// admissible |W| >= w0: integral-beta terms and the |G| term are evaluated
/// exactly at w0 (their shapes (W-1) W^(beta b - e b) decrease in W), and
/// fractional-beta terms use (floor-root + 2)^b >= (W^beta + 1)^b at w0,
/// whose shape also decreases. Requires every exponent 1 + beta b - e b to
/// be negative and w0 >= 3, both asserted.
fn tail_majorant(case: &StarCase, w0: u64, b: u32, dim_w: u64) -> Result<(BigUint, BigUint)> {
    if w0 < 3 {
        return Err(Error::internal("tail coverage needs |W| >= 3"));
    }
    for term in &case.terms {
        // 1 + (beta - e) b < 0, rational check
        let lhs = (case.e as i64 * term.beta_den as i64 - term.beta_num as i64) * b as i64;
        if lhs <= term.beta_den as i64 {
            return Err(Error::internal("majorant exponent not negative"));
        }
    }
    let denom = BigUint::from(w0).pow(case.e * b);
    let wm1 = BigUint::from(w0 - 1);
    let mut numer = BigUint::zero();
    for term in &case.terms {
        let mut a = BigUint::from(term.coeff) * &wm1;
        if term.log5_factor {
            a *= BigUint::from(floor_log5(dim_w));
        }
        let r = if term.beta_den == 1 {
            BigUint::from(w0).pow(term.beta_num * b)
        } else {
            let root = BigUint::from(w0).pow(term.beta_num).nth_root(term.beta_den);
            (root + 2u32).pow(b)
        };
        numer += a * r;
    }
    numer += BigUint::from(case.g_coeff) * BigUint::from(dim_w) * &wm1;
    Ok((numer, denom))
}

/// Sweeps every case over all (|W|, b, dim W) satisfying its side conditions
/// with |W| <= w_cap, b <= b_max, dim W <= dim_max. Directly evaluated spot
/// points cover small sigma; the per-cell tail record certifies the rest of
/// the |W| range.
pub fn star_sweep(w_cap: u64, b_max: u32, dim_max: u64, direct_sigma_cap: u64) -> SweepSummary {
    let mut records = Vec::new();
    let mut violations = 0usize;
    let small_sigma = prime_powers_up_to(direct_sigma_cap);
    for case in star_cases() {
        // (p, dim_w) cells
        let cells: Vec<(Option<u64>, u64)> = match case.dim_w_prime_base {
            Some(_) => {
                let mut v = Vec::new();
                for p in (5..=dim_max).filter(|&p| is_prime(p)) {
                    let mut d = p;
                    while d <= dim_max {
                        v.push((Some(p), d));
                        d += p;
                    }
                }
                v
            }
            None => (1..=dim_max).map(|d| (None, d)).collect(),
        };
        for (p, dim_w) in cells {
            let w_floor = match (case.dim_w_prime_base, p) {
                (Some(base), Some(p)) => match base.checked_pow(p as u32) {
                    Some(f) if f <= w_cap => f,
                    _ => continue, // no admissible |W| in range
                },
                _ => 2,
            };
            // sigma range determined by the |W| bounds
            let sigma_max = iroot(w_cap, dim_w as u32);
            let sigma_min = (iroot(w_floor - 1, dim_w as u32) + 1).max(2);
            if sigma_max < sigma_min {
                continue;
            }
            for b in 1..=b_max {
                let admissible = |sigma: u64| -> bool {
                    let Some(w) = sigma.checked_pow(dim_w as u32) else {
                        return false;
                    };
                    w <= w_cap
                        && w >= w_floor
                        && (w - 1) % case.w_minus_one_divisor == 0
                        && prime_factors(sigma).len() == 1
                };
                let sigma0 = match (sigma_min..=sigma_max).find(|&s| admissible(s)) {
                    Some(s) => s,
                    None => continue,
                };
                let w0 = sigma0.pow(dim_w as u32);
                // tail certificate at the minimal admissible point
                match tail_majorant(&case, w0, b, dim_w) {
                    Ok((num, den)) => {
                        let holds = num < den;
                        if !holds {
                            violations += 1;
                        }
                        records.push(SweepRecord {
                            case: case.name.to_string(),
                            p,
                            b,
                            dim_w,
                            w: w0,
                            lhs_num: num.to_string(),
                            lhs_den: den.to_string(),
                            holds,
                            covers_tail: true,
                        });
                    }
                    Err(_) => {
                        violations += 1;
                    }
                }
                // direct spot evaluations over small sigma
                for &sigma in &small_sigma {
                    if !admissible(sigma) {
                        continue;
                    }
                    let w = sigma.pow(dim_w as u32);
                    match star_evaluate(&case, w, b, dim_w, None) {
                        Ok(out) => {
                            if !out.holds {
                                violations += 1;
                            }
                            records.push(SweepRecord {
                                case: case.name.to_string(),
                                p,
                                b,
                                dim_w,
                                w,
                                lhs_num: out.lhs_num,
                                lhs_den: out.lhs_den,
                                holds: out.holds,
                                covers_tail: false,
                            });
                        }
                        Err(_) => violations += 1,
                    }
                }
            }
        }
    }
    SweepSummary {
        records,
        violations,
    }
}

// ---------------------------------------------------------------------------
// Counting checks on decomposed instances
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountingReport {
    pub p: u64,
    pub nep_a_minus_f: u64,
    pub nep_quotient: u64,
    pub f_order: u64,
    pub bound_plain: u64,
    pub bound_divided_num: u64,
    pub bound_divided_den: u64,
    pub pass_plain: bool,
    pub pass_divided: bool,
}

/// NEP_p(A \ F) <= NEP_p(A/F) |F|, and the sharper variant divided by the
/// product of the Fitting primes other than p.
pub fn counting_check(a: &ModuleAction, d: &QpDecomposition, p: u64) -> Result<CountingReport> {
    let g = &a.group;
    let diff: Vec<u32> = d
        .a
        .elems
        .iter()
        .copied()
        .filter(|&x| !d.f.contains(x))
        .collect();
    let lhs = g.census(Some(&diff)).nep(p);
    let agrp = EnumeratedGroup::from_subgroup(g, &d.a);
    let f_in_a: Vec<u32> = d
        .f
        .elems
        .iter()
        .map(|&x| d.a.elems.binary_search(&x).unwrap() as u32)
        .collect();
    let f_sub = Subgroup {
        elems: f_in_a,
        gens: vec![],
    };
    let (quot, _) = agrp.quotient(&f_sub)?;
    let nep_q = quot.census(None).nep(p);
    let bound_plain = nep_q * d.f.order();
    let divisor: u64 = prime_factors(d.f.order())
        .into_iter()
        .filter(|&pi| pi != p)
        .product();
    Ok(CountingReport {
        p,
        nep_a_minus_f: lhs,
        nep_quotient: nep_q,
        f_order: d.f.order(),
        bound_plain,
        bound_divided_num: bound_plain,
        bound_divided_den: divisor.max(1),
        pass_plain: lhs <= bound_plain,
        pass_divided: lhs * divisor.max(1) <= bound_plain,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopCountingReport {
    pub nsp_pi0_outside: u64,
    pub quotient_order: u64,
    pub bound: u64,
    pub pass: bool,
}

/// NSP_pi0(G \ A) <= floor(log5 |G/A|) * |A| for cyclic G/A.
pub fn top_counting_check(
    g: &EnumeratedGroup,
    a_sub: &Subgroup,
) -> Result<TopCountingReport> {
    let (quot, _) = g.quotient(a_sub)?;
    if !quot.is_cyclic_subgroup(&quot.whole()) {
        return Err(Error::usage("G/A must be cyclic"));
    }
    let outside: Vec<u32> = (0..g.order() as u32)
        .filter(|&x| !a_sub.contains(x))
        .collect();
    let lhs = g.census(Some(&outside)).nsp_pi(&PiSet::Pi0);
    let bound = floor_log5(quot.order()) * a_sub.order();
    Ok(TopCountingReport {
        nsp_pi0_outside: lhs,
        quotient_order: quot.order(),
        bound,
        pass: lhs <= bound,
    })
}

// ---------------------------------------------------------------------------
// Symplectic completely-reducible audit
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpAuditReport {
    pub n: usize,
    pub q: u64,
    pub order: u64,
    pub census: Census,
    pub checks: Vec<(String, bool)>,
    pub pass: bool,
}

/// Audits a solvable completely reducible subgroup of Sp(n, q) against the
/// case bounds for (n, q) in {(2,2),(4,2),(6,2),(8,2),(2,3),(4,3)}.
pub fn scr_sp_audit(a: &ModuleAction) -> Result<SpAuditReport> {
    let g = &a.group;
    if a.spaces.len() != 1 {
        return Err(Error::usage("audit expects a single symplectic space"));
    }
    let (field, n) = (a.spaces[0].0.clone(), a.spaces[0].1);
    let q = field.q;
    let space = crate::families::SymplecticSpace::standard(field.clone(), n)?;
    for &gi in &g.gens {
        let m = &a.blocks_of(gi)[0];
        if !crate::families::is_symplectic(m, &space) {
            return Err(Error::usage(
                "instance does not preserve the standard symplectic form",
            ));
        }
    }
    if !g.is_solvable() {
        return Err(Error::usage("instance is not solvable"));
    }
    // completely reducible: the sum of all irreducible submodules is V
    let orb = a.orbits();
    let mats = crate::qp::block_mats(a, &g.gens.clone());
    let mut socle = crate::qp::Subspace::empty(field.clone(), n);
    for &r in &orb.reps {
        if r == 0 {
            continue;
        }
        let v = crate::gf::decode_vec(r, q, n);
        let s = crate::qp::spin(&mats, &v, &field, n);
        let irr = orb.reps.iter().all(|&r2| {
            if r2 == 0 {
                return true;
            }
            let w = crate::gf::decode_vec(r2, q, n);
            !s.contains(&w) || crate::qp::spin(&mats, &w, &field, n).dim() == s.dim()
        });
        if irr {
            for row in s.rows() {
                socle.insert(row);
            }
        }
    }
    if socle.dim() != n {
        return Err(Error::usage("instance is not completely reducible"));
    }

    let order = g.order();
    let census = g.census(None);
    let mut checks: Vec<(String, bool)> = Vec::new();
    let pi0_abelian_in_fitting = |checks: &mut Vec<(String, bool)>| {
        let pi0_elems: Vec<u32> = (0..order as u32)
            .filter(|&x| crate::grp::is_pi_number(g.order_of(x) as u64, &PiSet::Pi0))
            .collect();
        let fit = g.fitting();
        checks.push((
            "pi0 part abelian".into(),
            g.is_abelian_subset(&pi0_elems),
        ));
        checks.push((
            "pi0 part inside Fitting".into(),
            pi0_elems.iter().all(|&x| fit.contains(x)),
        ));
    };
    match (n, q) {
        (2, 2) => checks.push(("order divides 6".into(), 6 % order == 0)),
        (4, 2) => {
            checks.push(("order <= 72".into(), order <= 72));
            checks.push(("NEP_pi0 <= 4".into(), census.nep_pi(&PiSet::Pi0) <= 4));
            pi0_abelian_in_fitting(&mut checks);
        }
        (6, 2) => {
            checks.push(("order <= 1296".into(), order <= 1296));
            checks.push(("NEP_pi0 <= 6".into(), census.nep_pi(&PiSet::Pi0) <= 6));
            pi0_abelian_in_fitting(&mut checks);
        }
        (8, 2) => {
            checks.push(("order <= 31104".into(), order <= 31104));
            checks.push(("NEP_pi0 <= 24".into(), census.nep_pi(&PiSet::Pi0) <= 24));
        }
        (2, 3) => checks.push(("order divides 24".into(), 24 % order == 0)),
        (4, 3) => {
            checks.push(("order <= 1152".into(), order <= 1152));
            checks.push(("NEP_5 <= 64".into(), census.nep(5) <= 64));
            let max_prime_order = census.per_prime.keys().max().copied().unwrap_or(1);
            checks.push(("no prime order >= 7".into(), max_prime_order < 7));
            if order % 5 == 0 {
                checks.push(("order <= 320 when 5 | order".into(), order <= 320));
            }
        }
        _ => {
            return Err(Error::usage(format!(
                "no audit case for (n, q) = ({n}, {q})"
            )))
        }
    }
    let pass = checks.iter().all(|(_, ok)| *ok);
    Ok(SpAuditReport {
        n,
        q,
        order,
        census,
        checks,
        pass,
    })
}

/// NEP/NSP partition sanity: prime-order elements, composite-order elements
/// and the identity partition the group.
pub fn census_partition_holds(g: &EnumeratedGroup) -> bool {
    let census = g.census(None);
    let prime_total: u64 = census.per_prime.values().map(|c| c.nep).sum();
    let composite = (0..g.order() as u32)
        .filter(|&i| {
            let o = g.order_of(i) as u64;
            o > 1 && prime_factors(o) != vec![o]
        })
        .count() as u64;
    prime_total + composite + 1 == g.order()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn beta_examples() {
        let b = beta(5, 4).unwrap();
        assert_eq!(b.branch, BetaBranch::DividesPlusOne);
        assert_eq!((b.beta_num, b.beta_den), (1, 4));
        let b = beta(5, 11).unwrap();
        assert_eq!(b.branch, BetaBranch::DividesMinusOne);
        assert_eq!((b.beta_num, b.beta_den), (3, 11));
        let b = beta(7, 8).unwrap();
        assert_eq!((b.beta_num, b.beta_den), (1, 4));
        assert!(beta(5, 7).is_err());
        assert!(beta(4, 11).is_err());
    }

    #[test]
    fn beta_below_one_third_exhaustive() {
        for s in (5..=100u64).filter(|&s| prime_factors(s) == vec![s]) {
            for qk in 2..=10_000u64 {
                if prime_factors(qk).len() != 1 {
                    continue;
                }
                if (qk - 1) % s != 0 && (qk + 1) % s != 0 {
                    continue;
                }
                let b = beta(s, qk).unwrap();
                assert!(3 * b.beta_num <= b.beta_den);
                // floor(beta q^k) <= q^k / 3
                let fl = b.beta_num * qk / b.beta_den;
                assert!(3 * fl <= qk);
            }
        }
    }

    #[test]
    fn star_example_e16() {
        let cases = star_cases();
        let e16 = cases.iter().find(|c| c.name == "e16").unwrap();
        let out = star_evaluate(e16, 3, 1, 1, None).unwrap();
        assert!(out.holds);
        // a1 = 24*2^8*(3-1)/2/4 = 1536; term1 = 1536 * 3^5; G = 24*6^4*2^8*2
        let num: u64 = out.lhs_num.parse().unwrap();
        assert_eq!(num, 1536 * 243 + 24 * 1296 * 256 * 2);
        assert_eq!(out.lhs_den.parse::<u64>().unwrap(), 43046721);
    }

    #[test]
    fn star_example_e3() {
        let cases = star_cases();
        let e3 = cases.iter().find(|c| c.name == "e3").unwrap();
        let out = star_evaluate(e3, 1024, 1, 5, None).unwrap();
        assert!(out.holds);
        // lhs_upper < 0.02
        let num: f64 = out.lhs_num.parse().unwrap();
        let den: f64 = out.lhs_den.parse().unwrap();
        assert!(num / den < 0.02);
    }

    #[test]
    fn star_rejects_degenerate_w() {
        let cases = star_cases();
        let e3 = cases.iter().find(|c| c.name == "e3").unwrap();
        assert!(matches!(
            star_evaluate(e3, 1, 1, 5, None),
            Err(Error::Domain(_))
        ));
        // incoherent |W| vs dim W
        assert!(star_side_conditions(e3, 1024, 7).is_err());
    }

    #[test]
    fn star_soundness_against_float() {
        // lhs_upper must dominate a floating-point evaluation of the true
        // left side on random admissible points
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let cases = star_cases();
        let mut tested = 0;
        while tested < 100 {
            let case = &cases[rng.gen_range(0..cases.len())];
            let dim_w = match case.dim_w_prime_base {
                Some(_) => 5 * rng.gen_range(1..=3u64),
                None => rng.gen_range(1..=6u64),
            };
            let sigma = [2u64, 3, 4, 5, 7, 9, 11, 13][rng.gen_range(0..8)];
            let Some(w) = sigma.checked_pow(dim_w as u32) else {
                continue;
            };
            if w > (1 << 30) || star_side_conditions(case, w, dim_w).is_err() {
                continue;
            }
            let b = rng.gen_range(1..=3u32);
            let out = star_evaluate(case, w, b, dim_w, None).unwrap();
            let upper = out.lhs_num.parse::<f64>().unwrap() / out.lhs_den.parse::<f64>().unwrap();
            // true LHS with real fractional powers
            let mut truth = 0.0f64;
            let wf = w as f64;
            for t in &case.terms {
                let mut a = t.coeff as f64 * (wf - 1.0);
                if t.log5_factor {
                    a *= floor_log5(dim_w) as f64;
                }
                truth += a * wf.powf(t.beta_num as f64 / t.beta_den as f64 * b as f64);
            }
            truth += case.g_coeff as f64 * dim_w as f64 * (wf - 1.0);
            truth /= wf.powi((case.e * b) as i32);
            assert!(
                upper >= truth * (1.0 - 1e-9),
                "{}: upper {upper} < truth {truth}",
                case.name
            );
            tested += 1;
        }
    }

    #[test]
    fn sweep_small_has_no_violations() {
        // a reduced-range smoke sweep; the full-range sweep runs in the
        // acceptance suite
        let s = star_sweep(1 << 16, 3, 16, 16);
        assert_eq!(s.violations, 0);
        assert!(!s.records.is_empty());
        // every record carries an exact rational
        for r in &s.records {
            assert!(r.lhs_num.parse::<BigUint>().is_ok());
            assert!(r.holds);
        }
        // tail records exist for cells with admissible points
        assert!(s.records.iter().any(|r| r.covers_tail));
    }

    #[test]
    fn tail_majorant_dominates_spots() {
        // for each (case, b, dim_w) cell, every directly evaluated point at
        // larger |W| must stay below the tail majorant value
        let s = star_sweep(1 << 20, 2, 10, 32);
        use std::collections::HashMap;
        let mut tails: HashMap<(String, Option<u64>, u32, u64), (BigUint, BigUint, u64)> =
            HashMap::new();
        for r in &s.records {
            if r.covers_tail {
                tails.insert(
                    (r.case.clone(), r.p, r.b, r.dim_w),
                    (
                        r.lhs_num.parse().unwrap(),
                        r.lhs_den.parse().unwrap(),
                        r.w,
                    ),
                );
            }
        }
        for r in &s.records {
            if r.covers_tail {
                continue;
            }
            let Some((tn, td, w0)) = tails.get(&(r.case.clone(), r.p, r.b, r.dim_w)) else {
                continue;
            };
            if r.w < *w0 {
                continue;
            }
            let rn: BigUint = r.lhs_num.parse().unwrap();
            let rd: BigUint = r.lhs_den.parse().unwrap();
            // rn/rd <= tn/td
            assert!(&rn * td <= tn * &rd, "majorant violated at {:?}", r);
        }
    }

    #[test]
    fn floor_log5_values() {
        assert_eq!(floor_log5(1), 0);
        assert_eq!(floor_log5(4), 0);
        assert_eq!(floor_log5(5), 1);
        assert_eq!(floor_log5(64), 2);
        assert_eq!(floor_log5(125), 3);
    }

    #[test]
    fn sigma_coherence() {
        assert_eq!(sigma_of(1024, 5), Some(4));
        assert_eq!(sigma_of(1024, 10), Some(2));
        assert_eq!(sigma_of(243, 5), Some(3));
        assert_eq!(sigma_of(1000, 3), None); // 10 is not a prime power
        assert_eq!(sigma_of(7, 2), None);
        assert_eq!(
            sigma_of(3, 1).and_then(|s| BigUint::from(s).to_u64()),
            Some(3)
        );
    }
}
