//! Metamorphic relations: rewrites that must not change a verdict, trace
//! extensions that must not revise a decided verdict, and idempotence of
//! the line-authority closure. Each case is driven by a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use agrkit_core::ident::id;
use agrkit_core::property::{check_property, Domain, DynProp, Outcome, Quantifier};
use agrkit_core::state::Atom;
use agrkit_core::structure::{
    line_authority_closure, AuthorityAnnotations, OrgStructure, RoleType,
};
use agrkit_core::trace::Trace;

use super::gen;

/// Negation normal form: negations only in front of `holds`.
pub fn nnf(p: &DynProp) -> DynProp {
    match p {
        DynProp::Not(inner) => neg(inner),
        DynProp::And(a, b) => DynProp::and(nnf(a), nnf(b)),
        DynProp::Or(a, b) => DynProp::or(nnf(a), nnf(b)),
        DynProp::Implies(a, b) => DynProp::or(neg(a), nnf(b)),
        DynProp::Quant {
            q,
            var,
            domain,
            body,
        } => DynProp::Quant {
            q: *q,
            var: var.clone(),
            domain: domain.clone(),
            body: Box::new(nnf(body)),
        },
        other => other.clone(),
    }
}

fn neg(p: &DynProp) -> DynProp {
    match p {
        DynProp::True => DynProp::False,
        DynProp::False => DynProp::True,
        DynProp::Not(inner) => nnf(inner),
        DynProp::And(a, b) => DynProp::or(neg(a), neg(b)),
        DynProp::Or(a, b) => DynProp::and(neg(a), neg(b)),
        DynProp::Implies(a, b) => DynProp::and(nnf(a), neg(b)),
        DynProp::Cmp(a, op, b) => DynProp::Cmp(a.clone(), op.negated(), b.clone()),
        DynProp::Quant {
            q,
            var,
            domain,
            body,
        } => DynProp::Quant {
            q: q.dual(),
            var: var.clone(),
            domain: domain.clone(),
            body: Box::new(neg(body)),
        },
        holds => DynProp::not(holds.clone()),
    }
}

fn unbounded(p: &DynProp) -> bool {
    matches!(
        p,
        DynProp::Quant {
            domain: Domain::Time { lo: None, hi: None },
            ..
        }
    )
}

fn quant(q: Quantifier, var: &agrkit_core::ident::Ident, body: DynProp) -> DynProp {
    DynProp::Quant {
        q,
        var: var.clone(),
        domain: Domain::unbounded_time(),
        body: Box::new(body),
    }
}

/// Pulls quantifiers over the whole trace out of connectives. Their domain
/// is never empty and bound names are unique, so the rewrite is sound.
pub fn prenex(p: &DynProp) -> DynProp {
    match p {
        DynProp::Not(a) => pull_not(prenex(a)),
        DynProp::And(a, b) => pull(prenex(a), prenex(b), Bin::And),
        DynProp::Or(a, b) => pull(prenex(a), prenex(b), Bin::Or),
        DynProp::Implies(a, b) => pull(prenex(a), prenex(b), Bin::Implies),
        DynProp::Quant {
            q,
            var,
            domain,
            body,
        } => DynProp::Quant {
            q: *q,
            var: var.clone(),
            domain: domain.clone(),
            body: Box::new(prenex(body)),
        },
        other => other.clone(),
    }
}

#[derive(Clone, Copy)]
enum Bin {
    And,
    Or,
    Implies,
}

fn build(a: DynProp, b: DynProp, op: Bin) -> DynProp {
    match op {
        Bin::And => DynProp::and(a, b),
        Bin::Or => DynProp::or(a, b),
        Bin::Implies => DynProp::implies(a, b),
    }
}

fn pull_not(a: DynProp) -> DynProp {
    if unbounded(&a) {
        if let DynProp::Quant { q, var, body, .. } = a {
            return quant(q.dual(), &var, pull_not(*body));
        }
    }
    DynProp::not(a)
}

fn pull(a: DynProp, b: DynProp, op: Bin) -> DynProp {
    if unbounded(&a) {
        if let DynProp::Quant { q, var, body, .. } = a {
            let q = match op {
                Bin::Implies => q.dual(),
                _ => q,
            };
            return quant(q, &var, pull(*body, b, op));
        }
    }
    if unbounded(&b) {
        if let DynProp::Quant { q, var, body, .. } = b {
            return quant(q, &var, pull(a, *body, op));
        }
    }
    build(a, b, op)
}

fn outcome(org: &OrgStructure, p: &DynProp, traces: &[Trace]) -> Outcome {
    check_property(p, traces, org).expect("checks").outcome
}

fn setup(seed: u64, bounded: bool) -> (ChaCha8Rng, OrgStructure, DynProp, Vec<Trace>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let org = gen::wide_org();
    let parts = gen::atomic_parts(&org);
    let refs = gen::part_refs(&org);
    let atoms = [id("a"), id("b")];
    let p = gen::random_dyn(&mut rng, &refs, &atoms, 4, bounded);
    let n = rng.gen_range(1..=2);
    let traces = (0..n)
        .map(|i| {
            let h = rng.gen_range(0..=12);
            let d = rng.gen_range(0.1..0.6);
            gen::random_trace(&mut rng, &format!("t{i}"), h, &parts, &atoms, d)
        })
        .collect();
    (rng, org, p, traces)
}

/// A random formula, its negation normal form and its double negation
/// get the same verdict. `Ok(true)` when the rewrite changed the formula.
pub fn de_morgan_case(seed: u64) -> Result<bool, String> {
    let (_, org, p, traces) = setup(seed, false);
    let want = outcome(&org, &p, &traces);
    let n = nnf(&p);
    for (label, q) in [
        ("nnf", &n),
        ("double negation", &DynProp::not(DynProp::not(p.clone()))),
    ] {
        let got = outcome(&org, q, &traces);
        if got != want {
            return Err(format!("{label}: {want} became {got}\n  {p}\n  {q}"));
        }
    }
    // verdicts over several traces are conjoined, so complement per trace
    for tr in &traces {
        let one = std::slice::from_ref(tr);
        let expected = match outcome(&org, &p, one) {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Inconclusive => Outcome::Inconclusive,
        };
        let dual = outcome(&org, &neg(&p), one);
        if dual != expected {
            return Err(format!(
                "negated nnf gave {dual}, expected {expected}\n  {p}"
            ));
        }
    }
    Ok(n != p)
}

/// Prenex rewriting of quantifiers over the whole trace keeps the verdict.
pub fn prenex_case(seed: u64) -> Result<bool, String> {
    let (_, org, p, traces) = setup(seed, false);
    let want = outcome(&org, &p, &traces);
    let q = prenex(&p);
    let got = outcome(&org, &q, &traces);
    if got != want {
        return Err(format!("prenex: {want} became {got}\n  {p}\n  {q}"));
    }
    Ok(q != p)
}

/// Extending the traces with arbitrary frames never revises a verdict that
/// was already decided, for formulas whose domains do not depend on the
/// horizon. `Ok(true)` when the original verdict was decided.
pub fn extension_case(seed: u64) -> Result<bool, String> {
    let (mut rng, org, p, traces) = setup(seed, true);
    let want = outcome(&org, &p, &traces);
    let parts = gen::atomic_parts(&org);
    let extended: Vec<Trace> = traces
        .iter()
        .map(|tr| {
            let mut ext = tr.clone();
            let old = tr.horizon();
            ext.extend_to(old + rng.gen_range(1..=8));
            for t in old + 1..=ext.horizon() {
                for part in &parts {
                    for a in ["a", "b"] {
                        if rng.gen_bool(0.4) {
                            ext.insert(t, part.clone(), Atom::nullary(id(a))).unwrap();
                        }
                    }
                }
            }
            ext
        })
        .collect();
    let got = outcome(&org, &p, &extended);
    let decided = want != Outcome::Inconclusive;
    if decided && got != want {
        return Err(format!("extension revised {want} to {got}\n  {p}"));
    }
    Ok(decided)
}

pub fn random_annotations(rng: &mut impl Rng) -> AuthorityAnnotations {
    let roles = rng.gen_range(2..=7);
    let tasks = rng.gen_range(1..=3);
    let r = |i: usize| id(&format!("r{i}"));
    let t = |i: usize| id(&format!("t{i}"));
    let mut ann = AuthorityAnnotations::default();
    for i in 0..tasks {
        ann.tasks.insert(t(i));
    }
    for i in 0..roles {
        let ty = if rng.gen_bool(0.8) {
            RoleType::Line
        } else {
            RoleType::Staff
        };
        ann.role_of_type.insert(r(i), ty);
    }
    for a in 0..roles {
        for b in a + 1..roles {
            if rng.gen_bool(0.6) {
                ann.superior_of.insert((r(a), r(b)));
            }
            for k in 0..tasks {
                if rng.gen_bool(0.5) {
                    ann.delegates_task_to.insert((r(a), t(k), r(b)));
                }
            }
        }
    }
    for _ in 0..rng.gen_range(0..=3) {
        let (a, k) = (rng.gen_range(0..roles / 2 + 1), rng.gen_range(0..tasks));
        ann.authorised_for.insert((r(a), t(k)));
        if rng.gen_bool(0.8) {
            ann.responsible_for.insert((r(a), t(k)));
        }
    }
    ann
}

/// Closing an already closed annotation set changes nothing. `Ok(true)`
/// when the first closure derived at least one fact.
pub fn closure_case(seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ann = random_annotations(&mut rng);
    let once = line_authority_closure(&ann).map_err(|e| e.to_string())?;
    let twice = line_authority_closure(&once).map_err(|e| e.to_string())?;
    if once != twice {
        return Err(format!("closure not idempotent on {ann:?}"));
    }
    if !ann.authorised_for.is_subset(&once.authorised_for) {
        return Err("closure dropped an input fact".into());
    }
    Ok(once != ann)
}
