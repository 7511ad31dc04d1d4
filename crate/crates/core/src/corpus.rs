//! Corpus runner: construction recipes, per-entry check lists, deterministic
//! execution, and JSON report records. A corpus run emits one record per
//! (entry, check); any failed check or errored build is an alarm and drives
//! a nonzero exit status in the CLI.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::action::{delta_search, set_stabilizer_order, ModuleAction};
use crate::bounds::{counting_check, scr_sp_audit, top_counting_check};
use crate::chartab::{block_invariants_hold, char_table, p_blocks, CharTable};
use crate::error::{Error, Result};
use crate::families::{self, Construction};
use crate::grp::{Elem, EnumeratedGroup, GroupSpec, PiSet, Subgroup, CLASS_CAP, ORDER_CAP};
use crate::qp::{clause8_fixed_point_law, decompose, is_quasiprimitive, QpDecomposition};
use crate::verify::{
    replay_theorem_34, replay_theorem_a, verify_section5, verify_section6, verify_theorem_34,
    verify_theorem_a, verify_theorem_b,
};

// ---------------------------------------------------------------------------
// Recipes
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "construct", rename_all = "snake_case")]
pub enum Recipe {
    Gamma { q: u64, n: u32 },
    Gamma0 { q: u64, n: u32 },
    Sp { n: usize, q: u64 },
    Sl2 { q: u64 },
    Extraspecial { p: u64, m: u32, r: u64 },
    ExtraspecialQp { p: u64, r: u64 },
    D8,
    Q8,
    Wreath { inner: Box<Recipe>, copies: usize },
    DirectSum { summands: Vec<Recipe> },
    Tensor { a: Box<Recipe>, b: Box<Recipe> },
    Affine { q: u64, scalar_order: u64 },
    D8q8F10Sp43,
    Cyclic { n: u16 },
    Symmetric { n: u16 },
    Alternating { n: u16 },
    Literal(GroupSpec),
}

/// A built entry: the enumerated group, and its natural module action when
/// the recipe is matrix-based.
pub struct Built {
    pub group: EnumeratedGroup,
    pub action: Option<ModuleAction>,
}

fn to_construction(r: &Recipe) -> Result<Option<Construction>> {
    Ok(Some(match r {
        Recipe::Gamma { q, n } => families::gamma(*q, *n)?,
        Recipe::Gamma0 { q, n } => families::gamma0(*q, *n)?,
        Recipe::Sp { n, q } => families::sp(*n, *q)?,
        Recipe::Sl2 { q } => families::sl2(*q)?,
        Recipe::Extraspecial { p, m, r } => families::extraspecial_rep(*p, *m, *r)?,
        Recipe::ExtraspecialQp { p, r } => families::extraspecial_qp(*p, *r)?,
        Recipe::D8 => families::d8()?,
        Recipe::Q8 => families::q8()?,
        Recipe::Wreath { inner, copies } => {
            let ic = to_construction(inner)?
                .ok_or_else(|| Error::usage("wreath inner must be matrix-based"))?;
            families::wreath_embed(&ic, *copies)?
        }
        Recipe::DirectSum { summands } => {
            let parts: Vec<Construction> = summands
                .iter()
                .map(|s| {
                    to_construction(s)?
                        .ok_or_else(|| Error::usage("direct sum parts must be matrix-based"))
                })
                .collect::<Result<_>>()?;
            families::direct_sum(&parts)?
        }
        Recipe::Tensor { a, b } => {
            let ca = to_construction(a)?
                .ok_or_else(|| Error::usage("tensor parts must be matrix-based"))?;
            let cb = to_construction(b)?
                .ok_or_else(|| Error::usage("tensor parts must be matrix-based"))?;
            families::tensor_embed(&ca, &cb)?
        }
        _ => return Ok(None),
    }))
}

fn perm_cycle(n: u16) -> Elem {
    Elem::Perm((0..n).map(|x| (x + 1) % n).collect())
}

fn perm_swap(n: u16) -> Elem {
    let mut v: Vec<u16> = (0..n).collect();
    v.swap(0, 1);
    Elem::Perm(v)
}

impl Recipe {
    pub fn build(&self, cap: usize) -> Result<Built> {
        if let Some(c) = to_construction(self)? {
            let group = c.close(cap)?;
            let action = if c.spaces.is_empty() {
                None
            } else {
                Some(ModuleAction::new(c.close(cap)?, c.spaces.clone())?)
            };
            return Ok(Built { group, action });
        }
        match self {
            Recipe::Affine { q, scalar_order } => {
                let c = families::affine(*q, *scalar_order)?;
                Ok(Built {
                    group: c.close(cap)?,
                    action: None,
                })
            }
            Recipe::Cyclic { n } => Ok(Built {
                group: EnumeratedGroup::close(vec![perm_cycle(*n)], cap)?,
                action: None,
            }),
            Recipe::Symmetric { n } => Ok(Built {
                group: EnumeratedGroup::close(vec![perm_swap(*n), perm_cycle(*n)], cap)?,
                action: None,
            }),
            Recipe::Alternating { n } => {
                // 3-cycle and an n-cycle (n odd) or (n-1)-cycle fixing 0
                let three: Vec<u16> = {
                    let mut v: Vec<u16> = (0..*n).collect();
                    v[0] = 1;
                    v[1] = 2;
                    v[2] = 0;
                    v
                };
                let big: Vec<u16> = if *n % 2 == 1 {
                    (0..*n).map(|x| (x + 1) % n).collect()
                } else {
                    let mut v: Vec<u16> = (0..*n).collect();
                    for x in 1..*n {
                        v[x as usize] = if x + 1 < *n { x + 1 } else { 1 };
                    }
                    v
                };
                Ok(Built {
                    group: EnumeratedGroup::close(
                        vec![Elem::Perm(three), Elem::Perm(big)],
                        cap,
                    )?,
                    action: None,
                })
            }
            Recipe::D8q8F10Sp43 => {
                let inst = families::d8q8_f10_in_sp43()?;
                let group = EnumeratedGroup::from_subgroup(&inst.sp43, &inst.g_sub);
                let f3 = crate::gf::FiniteField::get(3, 1)?;
                let action_group = EnumeratedGroup::from_subgroup(&inst.sp43, &inst.g_sub);
                let action = ModuleAction::new(action_group, vec![(f3, 4)])?;
                Ok(Built {
                    group,
                    action: Some(action),
                })
            }
            Recipe::Literal(spec) => Ok(Built {
                group: spec.close(cap)?,
                action: None,
            }),
            _ => Err(Error::internal("unhandled recipe")),
        }
    }
}

// ---------------------------------------------------------------------------
// Checks and config
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    Order {
        expect: u64,
    },
    Solvable {
        expect: bool,
    },
    Census {
        #[serde(default)]
        expect_nep: Vec<(u64, u64)>,
        #[serde(default)]
        nep_pi0_max: Option<u64>,
        #[serde(default)]
        max_prime_order: Option<u64>,
    },
    Qp {
        expect: bool,
    },
    Decompose {
        e: u64,
        u: u64,
        f: u64,
        a_over_f: u64,
        w: u64,
        b: u32,
        #[serde(default)]
        order_lemma_equality: bool,
    },
    Clause8,
    Counting {
        p: u64,
    },
    TopCounting,
    SpAudit,
    Orbits {
        #[serde(default)]
        expect_count: Option<usize>,
        #[serde(default)]
        regular_ge: Option<usize>,
        #[serde(default)]
        expect_sizes: Option<Vec<u64>>,
    },
    Burnside,
    Delta,
    Thm31 {
        regular_ge: usize,
    },
    ThmA,
    Thm34 {
        p: u64,
    },
    ThmB {
        p: u64,
        #[serde(default)]
        expect_defect_le: Option<i64>,
    },
    Sec5 {
        p: u64,
    },
    Sec6,
    Chartab {
        #[serde(default)]
        expect_degrees: Option<Vec<u64>>,
    },
    Blocks {
        p: u64,
        #[serde(default)]
        expect_zero_defect_blocks: Option<usize>,
        #[serde(default)]
        expect_block_count: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub group: Recipe,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRecord {
    pub entry: String,
    pub check: String,
    pub pass: bool,
    pub witness: Value,
    pub timings: Timings,
    pub versions: Versions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timings {
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Versions {
    pub solvlin: String,
}

fn versions() -> Versions {
    Versions {
        solvlin: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Stable per-entry seed derived from the run seed and the entry name.
fn entry_seed(seed: u64, name: &str) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

struct EntryState {
    built: Built,
    seed: u64,
    table: Option<CharTable>,
    decomposition: Option<QpDecomposition>,
    orbits: Option<crate::action::OrbitData>,
}

impl EntryState {
    fn ensure_table(&mut self) -> Result<()> {
        if self.table.is_none() {
            self.table = Some(char_table(&self.built.group, self.seed)?);
        }
        Ok(())
    }
    fn table(&mut self) -> Result<&CharTable> {
        self.ensure_table()?;
        Ok(self.table.as_ref().unwrap())
    }
    fn action(&self) -> Result<&ModuleAction> {
        self.built
            .action
            .as_ref()
            .ok_or_else(|| Error::usage("check requires a module action"))
    }
    fn decomposition(&mut self) -> Result<&QpDecomposition> {
        if self.decomposition.is_none() {
            let action = self
                .built
                .action
                .as_ref()
                .ok_or_else(|| Error::usage("check requires a module action"))?;
            self.decomposition = Some(decompose(action, CLASS_CAP)?);
        }
        Ok(self.decomposition.as_ref().unwrap())
    }
    fn orbits(&mut self) -> Result<&crate::action::OrbitData> {
        if self.orbits.is_none() {
            self.orbits = Some(self.action()?.orbits());
        }
        Ok(self.orbits.as_ref().unwrap())
    }
}

fn check_name(c: &Check) -> String {
    match c {
        Check::Order { .. } => "order".into(),
        Check::Solvable { .. } => "solvable".into(),
        Check::Census { .. } => "census".into(),
        Check::Qp { .. } => "qp".into(),
        Check::Decompose { .. } => "decompose".into(),
        Check::Clause8 => "clause8".into(),
        Check::Counting { p } => format!("counting_p{p}"),
        Check::TopCounting => "top_counting".into(),
        Check::SpAudit => "sp_audit".into(),
        Check::Orbits { .. } => "orbits".into(),
        Check::Burnside => "burnside".into(),
        Check::Delta => "delta".into(),
        Check::Thm31 { .. } => "thm31".into(),
        Check::ThmA => "thm_a".into(),
        Check::Thm34 { p } => format!("thm_34_p{p}"),
        Check::ThmB { p, .. } => format!("thm_b_p{p}"),
        Check::Sec5 { p } => format!("sec5_p{p}"),
        Check::Sec6 => "sec6".into(),
        Check::Chartab { .. } => "chartab".into(),
        Check::Blocks { p, .. } => format!("blocks_p{p}"),
    }
}

fn run_check(state: &mut EntryState, check: &Check) -> Result<(bool, Value)> {
    match check {
        Check::Order { expect } => {
            let got = state.built.group.order();
            Ok((got == *expect, json!({"order": got, "expect": expect})))
        }
        Check::Solvable { expect } => {
            let got = state.built.group.is_solvable();
            Ok((got == *expect, json!({"solvable": got})))
        }
        Check::Census {
            expect_nep,
            nep_pi0_max,
            max_prime_order,
        } => {
            let census = state.built.group.census(None);
            let mut pass = crate::bounds::census_partition_holds(&state.built.group);
            for (p, n) in expect_nep {
                pass &= census.nep(*p) == *n;
            }
            if let Some(maxv) = nep_pi0_max {
                pass &= census.nep_pi(&PiSet::Pi0) <= *maxv;
            }
            if let Some(mp) = max_prime_order {
                pass &= census.per_prime.keys().max().copied().unwrap_or(1) <= *mp;
            }
            Ok((pass, serde_json::to_value(&census)?))
        }
        Check::Qp { expect } => {
            let got = is_quasiprimitive(state.action()?, CLASS_CAP)?;
            Ok((got == *expect, json!({"quasiprimitive": got})))
        }
        Check::Decompose {
            e,
            u,
            f,
            a_over_f,
            w,
            b,
            order_lemma_equality,
        } => {
            let action_report = {
                let d = state.decomposition()?;
                crate::qp::report(state.action()?, d)
            };
            let mut pass = action_report.e == *e
                && action_report.u_order == *u
                && action_report.f_order == *f
                && action_report.a_order / action_report.f_order == *a_over_f
                && action_report.w_size == *w
                && action_report.b == *b
                && action_report.clauses.iter().all(|(_, ok)| *ok)
                && action_report.order_lemma_holds;
            if *order_lemma_equality {
                pass &= action_report.order_lemma_lhs == action_report.order_lemma_rhs;
            }
            Ok((pass, serde_json::to_value(&action_report)?))
        }
        Check::Clause8 => {
            let d = state.decomposition()?.clone();
            let r = clause8_fixed_point_law(state.action()?, &d);
            Ok((r.is_ok(), json!({"law": "fixed_count(g)^s == |V| outside A"})))
        }
        Check::Counting { p } => {
            let d = state.decomposition()?.clone();
            let rep = counting_check(state.action()?, &d, *p)?;
            Ok((rep.pass_plain && rep.pass_divided, serde_json::to_value(&rep)?))
        }
        Check::TopCounting => {
            let a_sub = state.decomposition()?.a.clone();
            let rep = top_counting_check(&state.action()?.group, &a_sub)?;
            Ok((rep.pass, serde_json::to_value(&rep)?))
        }
        Check::SpAudit => {
            let rep = scr_sp_audit(state.action()?)?;
            Ok((rep.pass, serde_json::to_value(&rep)?))
        }
        Check::Orbits {
            expect_count,
            regular_ge,
            expect_sizes,
        } => {
            let report = {
                let orbits = state.orbits()?.clone();
                state.action()?.report(&orbits)
            };
            let mut pass = true;
            if let Some(c) = expect_count {
                pass &= report.orbit_count == *c;
            }
            if let Some(r) = regular_ge {
                pass &= report.regular_orbits >= *r;
            }
            if let Some(sizes) = expect_sizes {
                let mut got: Vec<u64> = state.orbits()?.sizes.clone();
                got.sort_unstable();
                let mut want = sizes.clone();
                want.sort_unstable();
                pass &= got == want;
            }
            // orbit-stabilizer on every representative
            let orbits = state.orbits()?.clone();
            let action = state.action()?;
            for (i, &r) in orbits.reps.iter().enumerate() {
                pass &= orbits.sizes[i] * action.stabilizer(r).order() == action.group.order();
            }
            Ok((pass, serde_json::to_value(&report)?))
        }
        Check::Burnside => {
            let orbits = state.orbits()?.clone();
            let action = state.action()?;
            let burnside = action.burnside_orbit_count();
            let pass = burnside == orbits.reps.len() as u128;
            Ok((
                pass,
                json!({"orbit_count": orbits.reps.len(), "burnside": burnside.to_string()}),
            ))
        }
        Check::Delta => {
            let delta = delta_search(&state.built.group)?;
            let stab = set_stabilizer_order(&state.built.group, &delta);
            let mut n = stab;
            while n % 2 == 0 {
                n /= 2;
            }
            while n % 3 == 0 {
                n /= 3;
            }
            Ok((
                n == 1,
                json!({"delta": delta, "stabilizer_order": stab}),
            ))
        }
        Check::Thm31 { regular_ge } => {
            let report = {
                let orbits = state.orbits()?.clone();
                state.action()?.regular_orbit_count(&orbits)
            };
            Ok((
                report >= *regular_ge,
                json!({"regular_orbits": report, "required": regular_ge}),
            ))
        }
        Check::ThmA => {
            let action = state.action()?;
            let w = verify_theorem_a(action, CLASS_CAP)?;
            replay_theorem_a(action, &w, CLASS_CAP)?;
            Ok((true, serde_json::to_value(&w)?))
        }
        Check::Thm34 { p } => {
            let action = state.action()?;
            let w = verify_theorem_34(action, *p, CLASS_CAP)?;
            replay_theorem_34(action, &w)?;
            Ok((true, serde_json::to_value(&w)?))
        }
        Check::ThmB {
            p,
            expect_defect_le,
        } => {
            let rep = verify_theorem_b(&state.built.group, *p, state.seed)?;
            let mut pass = true;
            if let Some(limit) = expect_defect_le {
                pass = (rep.min_defect as i64) <= *limit;
            }
            Ok((pass, serde_json::to_value(&rep)?))
        }
        Check::Sec5 { p } => {
            let seed = state.seed;
            state.ensure_table()?;
            let table = state.table.as_ref().unwrap();
            let rep = verify_section5(&state.built.group, table, *p, seed)?;
            Ok((
                rep.checks.iter().all(|(_, ok)| *ok),
                serde_json::to_value(&rep)?,
            ))
        }
        Check::Sec6 => {
            state.ensure_table()?;
            let table = state.table.as_ref().unwrap();
            let rep = verify_section6(&state.built.group, table)?;
            Ok((rep.holds, serde_json::to_value(&rep)?))
        }
        Check::Chartab { expect_degrees } => {
            let table = state.table()?;
            let mut pass = true;
            if let Some(want) = expect_degrees {
                pass &= &table.degrees == want;
            }
            let sum: u64 = table.degrees.iter().map(|d| d * d).sum();
            pass &= sum == table.group_order;
            Ok((
                pass,
                json!({
                    "degrees": table.degrees,
                    "classes": table.class_sizes,
                    "class_orders": table.class_orders,
                }),
            ))
        }
        Check::Blocks {
            p,
            expect_zero_defect_blocks,
            expect_block_count,
        } => {
            let table = state.table()?;
            let blocks = p_blocks(table, *p)?;
            let mut pass = block_invariants_hold(table, &blocks);
            if let Some(z) = expect_zero_defect_blocks {
                pass &= blocks.defects.iter().filter(|&&d| d == 0).count() == *z;
            }
            if let Some(c) = expect_block_count {
                pass &= blocks.blocks.len() == *c;
            }
            Ok((pass, serde_json::to_value(&blocks)?))
        }
    }
}

/// Runs one entry, producing one record per check.
pub fn run_entry(entry: &Entry, seed: u64, cap: usize) -> Vec<ReportRecord> {
    let t0 = Instant::now();
    let eseed = entry_seed(seed, &entry.name);
    let built = match entry.group.build(cap) {
        Ok(b) => b,
        Err(e) => {
            return vec![ReportRecord {
                entry: entry.name.clone(),
                check: "build".into(),
                pass: false,
                witness: json!({"error": e.to_string()}),
                timings: Timings {
                    elapsed_ms: t0.elapsed().as_millis() as u64,
                },
                versions: versions(),
            }];
        }
    };
    let mut state = EntryState {
        built,
        seed: eseed,
        table: None,
        decomposition: None,
        orbits: None,
    };
    let mut out = Vec::new();
    for check in &entry.checks {
        let t = Instant::now();
        let (pass, witness) = match run_check(&mut state, check) {
            Ok((p, w)) => (p, w),
            Err(e) => (false, json!({"error": e.to_string()})),
        };
        out.push(ReportRecord {
            entry: entry.name.clone(),
            check: check_name(check),
            pass,
            witness,
            timings: Timings {
                elapsed_ms: t.elapsed().as_millis() as u64,
            },
            versions: versions(),
        });
    }
    out
}

/// Runs the whole corpus; entries can execute in parallel, the report is
/// emitted in entry order. Returns records and the alarm count.
pub fn run_corpus(config: &CorpusConfig, jobs: usize, cap: usize) -> (Vec<ReportRecord>, usize) {
    let records: Vec<Vec<ReportRecord>> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            config
                .entries
                .par_iter()
                .map(|e| run_entry(e, config.seed, cap))
                .collect()
        })
    } else {
        config
            .entries
            .iter()
            .map(|e| run_entry(e, config.seed, cap))
            .collect()
    };
    let flat: Vec<ReportRecord> = records.into_iter().flatten().collect();
    let alarms = flat.iter().filter(|r| !r.pass).count();
    (flat, alarms)
}

pub fn parse_config(text: &str) -> Result<CorpusConfig> {
    serde_json::from_str(text)
        .map_err(|e| Error::usage(format!("malformed corpus config: {e}")))
}

// ---------------------------------------------------------------------------
// Bundled default corpus
// ---------------------------------------------------------------------------

pub fn default_corpus() -> CorpusConfig {
    let e = |name: &str, group: Recipe, checks: Vec<Check>| Entry {
        name: name.into(),
        group,
        checks,
    };
    use Check::*;
    use Recipe::*;
    CorpusConfig {
        seed: 20260809,
        entries: vec![
            e(
                "gl22_natural",
                Sl2 { q: 2 },
                vec![
                    Order { expect: 6 },
                    Solvable { expect: true },
                    ThmA,
                    Burnside,
                    SpAudit,
                ],
            ),
            e(
                "sl23_gf9",
                Sl2 { q: 3 },
                vec![
                    Order { expect: 24 },
                    Solvable { expect: true },
                    Qp { expect: true },
                    Decompose {
                        e: 2,
                        u: 2,
                        f: 8,
                        a_over_f: 3,
                        w: 3,
                        b: 1,
                        order_lemma_equality: true,
                    },
                    Clause8,
                    Counting { p: 3 },
                    Orbits {
                        expect_count: Some(2),
                        regular_ge: None,
                        expect_sizes: Some(vec![1, 8]),
                    },
                    Burnside,
                    ThmA,
                    Thm34 { p: 5 },
                    Chartab {
                        expect_degrees: Some(vec![1, 1, 1, 2, 2, 2, 3]),
                    },
                    Blocks {
                        p: 3,
                        expect_zero_defect_blocks: Some(1),
                        expect_block_count: Some(3),
                    },
                    Sec5 { p: 5 },
                    Sec6,
                    SpAudit,
                ],
            ),
            e(
                "gamma_2_4",
                Gamma { q: 2, n: 4 },
                vec![
                    Order { expect: 60 },
                    Census {
                        expect_nep: vec![(5, 4)],
                        nep_pi0_max: Some(4),
                        max_prime_order: Some(5),
                    },
                    Qp { expect: true },
                    Decompose {
                        e: 1,
                        u: 15,
                        f: 15,
                        a_over_f: 1,
                        w: 16,
                        b: 1,
                        order_lemma_equality: true,
                    },
                    Clause8,
                    Counting { p: 5 },
                    TopCounting,
                    Orbits {
                        expect_count: Some(2),
                        regular_ge: None,
                        expect_sizes: Some(vec![1, 15]),
                    },
                    Burnside,
                    ThmA,
                    Thm34 { p: 5 },
                    Sec6,
                ],
            ),
            e(
                "gamma0_2_4",
                Gamma0 { q: 2, n: 4 },
                vec![
                    Order { expect: 15 },
                    Orbits {
                        expect_count: Some(2),
                        regular_ge: Some(1),
                        expect_sizes: Some(vec![1, 15]),
                    },
                    Burnside,
                ],
            ),
            e(
                "gamma_3_2",
                Gamma { q: 3, n: 2 },
                vec![
                    Order { expect: 16 },
                    Qp { expect: true },
                    Decompose {
                        e: 1,
                        u: 8,
                        f: 8,
                        a_over_f: 1,
                        w: 9,
                        b: 1,
                        order_lemma_equality: true,
                    },
                    Clause8,
                    TopCounting,
                    ThmA,
                    Burnside,
                ],
            ),
            e(
                "gamma_2_6",
                Gamma { q: 2, n: 6 },
                vec![
                    Order { expect: 378 },
                    Qp { expect: true },
                    Clause8,
                    TopCounting,
                    Burnside,
                    ThmA,
                ],
            ),
            e(
                "sp_2_2",
                Sp { n: 2, q: 2 },
                vec![Order { expect: 6 }, SpAudit],
            ),
            e(
                "sp_4_3",
                Sp { n: 4, q: 3 },
                vec![Order { expect: 51840 }],
            ),
            e(
                "d8q8_f10",
                D8q8F10Sp43,
                vec![
                    Order { expect: 320 },
                    Census {
                        expect_nep: vec![],
                        nep_pi0_max: Some(64),
                        max_prime_order: Some(5),
                    },
                    SpAudit,
                    Qp { expect: true },
                    Decompose {
                        e: 4,
                        u: 2,
                        f: 32,
                        a_over_f: 10,
                        w: 3,
                        b: 1,
                        order_lemma_equality: true,
                    },
                    Clause8,
                    Counting { p: 5 },
                    ThmA,
                    Thm34 { p: 5 },
                    ThmB {
                        p: 5,
                        expect_defect_le: None,
                    },
                    Burnside,
                ],
            ),
            e(
                "z11_z5",
                Affine { q: 11, scalar_order: 5 },
                vec![
                    Order { expect: 55 },
                    Chartab {
                        expect_degrees: Some(vec![1, 1, 1, 1, 1, 5, 5]),
                    },
                    Blocks {
                        p: 5,
                        expect_zero_defect_blocks: Some(2),
                        expect_block_count: Some(3),
                    },
                    ThmB {
                        p: 5,
                        expect_defect_le: Some(0),
                    },
                    Sec5 { p: 5 },
                    Sec6,
                ],
            ),
            e(
                "z31_z5",
                Affine { q: 31, scalar_order: 5 },
                vec![
                    Order { expect: 155 },
                    ThmB {
                        p: 5,
                        expect_defect_le: Some(0),
                    },
                    Sec5 { p: 5 },
                    Sec6,
                ],
            ),
            e(
                "aff16_15",
                Affine { q: 16, scalar_order: 15 },
                vec![
                    Order { expect: 240 },
                    ThmB {
                        p: 5,
                        expect_defect_le: Some(0),
                    },
                    Sec5 { p: 5 },
                    Sec6,
                ],
            ),
            e(
                "aff16_5",
                Affine { q: 16, scalar_order: 5 },
                vec![
                    Order { expect: 80 },
                    ThmB {
                        p: 5,
                        expect_defect_le: Some(0),
                    },
                    Sec5 { p: 5 },
                ],
            ),
            e(
                "z11_z10",
                Affine { q: 11, scalar_order: 10 },
                vec![
                    Order { expect: 110 },
                    ThmB {
                        p: 5,
                        expect_defect_le: None,
                    },
                    Sec5 { p: 5 },
                    Sec6,
                ],
            ),
            e(
                "z31_z15",
                Affine { q: 31, scalar_order: 15 },
                vec![
                    Order { expect: 465 },
                    ThmB {
                        p: 5,
                        expect_defect_le: None,
                    },
                    Sec5 { p: 5 },
                ],
            ),
            e(
                "s3_points",
                Symmetric { n: 3 },
                vec![
                    Chartab {
                        expect_degrees: Some(vec![1, 1, 2]),
                    },
                    Blocks {
                        p: 3,
                        expect_zero_defect_blocks: Some(0),
                        expect_block_count: Some(1),
                    },
                    Delta,
                    Census {
                        expect_nep: vec![(2, 3), (3, 2)],
                        nep_pi0_max: Some(0),
                        max_prime_order: None,
                    },
                    Sec6,
                ],
            ),
            e(
                "s4_points",
                Symmetric { n: 4 },
                vec![
                    Solvable { expect: true },
                    Delta,
                    Chartab {
                        expect_degrees: Some(vec![1, 1, 2, 3, 3]),
                    },
                    Sec6,
                ],
            ),
            e(
                "z5_points",
                Cyclic { n: 5 },
                vec![
                    Delta,
                    Chartab {
                        expect_degrees: Some(vec![1, 1, 1, 1, 1]),
                    },
                ],
            ),
            e(
                "frobenius21",
                Affine { q: 7, scalar_order: 3 },
                vec![Order { expect: 21 }, Delta, Census {
                    expect_nep: vec![(7, 6), (3, 14)],
                    nep_pi0_max: Some(6),
                    max_prime_order: None,
                }],
            ),
            e(
                "a5_points",
                Alternating { n: 5 },
                vec![Solvable { expect: false }],
            ),
            e(
                "wreath_s3_s2",
                Wreath {
                    inner: Box::new(Sl2 { q: 2 }),
                    copies: 2,
                },
                vec![
                    Order { expect: 72 },
                    Qp { expect: false },
                    SpAudit,
                    ThmA,
                    Burnside,
                ],
            ),
            e(
                "wreath_sl23_s2",
                Wreath {
                    inner: Box::new(Sl2 { q: 3 }),
                    copies: 2,
                },
                vec![
                    Order { expect: 1152 },
                    SpAudit,
                    ThmA,
                ],
            ),
            e(
                "extraspecial_27",
                Extraspecial { p: 3, m: 1, r: 4 },
                vec![
                    Order { expect: 27 },
                    Census {
                        expect_nep: vec![(3, 26)],
                        nep_pi0_max: Some(0),
                        max_prime_order: Some(3),
                    },
                    Burnside,
                ],
            ),
            e(
                "tensor_e9",
                Tensor {
                    a: Box::new(Extraspecial { p: 3, m: 1, r: 4 }),
                    b: Box::new(Extraspecial { p: 3, m: 1, r: 4 }),
                },
                vec![Order { expect: 243 }, Burnside],
            ),
            e(
                "es_qp3_gf4",
                ExtraspecialQp { p: 3, r: 4 },
                vec![
                    Order { expect: 108 },
                    Qp { expect: true },
                    Decompose {
                        e: 3,
                        u: 3,
                        f: 27,
                        a_over_f: 4,
                        w: 4,
                        b: 1,
                        order_lemma_equality: true,
                    },
                    Clause8,
                    Counting { p: 2 },
                    ThmA,
                    Burnside,
                ],
            ),
            e(
                "es_qp5_gf11",
                ExtraspecialQp { p: 5, r: 11 },
                vec![
                    Order { expect: 1000 },
                    Qp { expect: true },
                    Decompose {
                        e: 5,
                        u: 5,
                        f: 125,
                        a_over_f: 8,
                        w: 11,
                        b: 1,
                        order_lemma_equality: false,
                    },
                    Thm31 { regular_ge: 2 },
                    Counting { p: 5 },
                    ThmA,
                    Thm34 { p: 5 },
                    Burnside,
                ],
            ),
            e(
                "mixed_sl23_gamma16",
                DirectSum {
                    summands: vec![Sl2 { q: 3 }, Gamma { q: 2, n: 4 }],
                },
                vec![
                    Order { expect: 1440 },
                    Orbits {
                        expect_count: Some(4),
                        regular_ge: None,
                        expect_sizes: None,
                    },
                    ThmA,
                    Thm34 { p: 5 },
                    Burnside,
                ],
            ),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip() {
        let cfg = default_corpus();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(back.entries.len(), cfg.entries.len());
        assert_eq!(back.seed, cfg.seed);
    }

    #[test]
    fn malformed_config_is_usage_error() {
        assert!(matches!(
            parse_config("{\"seed\": 1, \"entries\": [{\"name\""),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn empty_corpus_is_success() {
        let cfg = CorpusConfig {
            seed: 1,
            entries: vec![],
        };
        let (records, alarms) = run_corpus(&cfg, 1, ORDER_CAP);
        assert!(records.is_empty());
        assert_eq!(alarms, 0);
    }

    #[test]
    fn single_entry_runs() {
        let cfg = CorpusConfig {
            seed: 7,
            entries: vec![Entry {
                name: "smoke".into(),
                group: Recipe::Sl2 { q: 3 },
                checks: vec![
                    Check::Order { expect: 24 },
                    Check::Chartab {
                        expect_degrees: Some(vec![1, 1, 1, 2, 2, 2, 3]),
                    },
                ],
            }],
        };
        let (records, alarms) = run_corpus(&cfg, 1, ORDER_CAP);
        assert_eq!(records.len(), 2);
        assert_eq!(alarms, 0);
    }

    #[test]
    fn false_claim_raises_alarm() {
        let cfg = CorpusConfig {
            seed: 7,
            entries: vec![Entry {
                name: "falsify".into(),
                group: Recipe::Affine {
                    q: 11,
                    scalar_order: 5,
                },
                checks: vec![Check::ThmB {
                    p: 5,
                    expect_defect_le: Some(-1),
                }],
            }],
        };
        let (records, alarms) = run_corpus(&cfg, 1, ORDER_CAP);
        assert_eq!(records.len(), 1);
        assert_eq!(alarms, 1);
        assert!(!records[0].pass);
    }

    #[test]
    fn determinism_modulo_timings() {
        let cfg = CorpusConfig {
            seed: 42,
            entries: vec![Entry {
                name: "det".into(),
                group: Recipe::Sl2 { q: 3 },
                checks: vec![
                    Check::Chartab {
                        expect_degrees: None,
                    },
                    Check::Blocks {
                        p: 3,
                        expect_zero_defect_blocks: None,
                        expect_block_count: None,
                    },
                    Check::ThmA,
                ],
            }],
        };
        let (r1, _) = run_corpus(&cfg, 1, ORDER_CAP);
        let (r2, _) = run_corpus(&cfg, 2, ORDER_CAP);
        let strip = |rs: &[ReportRecord]| -> Vec<Value> {
            rs.iter()
                .map(|r| json!({"e": r.entry, "c": r.check, "p": r.pass, "w": r.witness}))
                .collect()
        };
        assert_eq!(strip(&r1), strip(&r2));
    }
}
