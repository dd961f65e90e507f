//! Random traces and formulas for agreement and metamorphic tests.

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

use agrkit_core::ident::{id, Ident};
use agrkit_core::property::{
    ArgTerm, AtomPattern, CmpOp, Domain, DynProp, LtlProp, ModalOp, StateProp, TimeConstraint,
    TimeTerm,
};
use agrkit_core::state::{Atom, Value};
use agrkit_core::structure::OrgStructure;
use agrkit_core::trace::{AtomicPart, PartRef, Trace};

/// Role `x` alone in group `g`: two atomic parts.
pub fn small_org() -> OrgStructure {
    let mut org = OrgStructure::new();
    org.add_group(id("g"), [id("x")]);
    org
}

/// Roles `x`, `y` in `g` and `z` in `h`: six atomic parts.
pub fn wide_org() -> OrgStructure {
    let mut org = OrgStructure::new();
    org.add_group(id("g"), [id("x"), id("y")]);
    org.add_group(id("h"), [id("z")]);
    org
}

pub fn atomic_parts(org: &OrgStructure) -> Vec<AtomicPart> {
    org.roles
        .iter()
        .flat_map(|r| [AtomicPart::input(r.clone()), AtomicPart::output(r.clone())])
        .collect()
}

pub fn part_refs(org: &OrgStructure) -> Vec<PartRef> {
    let mut out: Vec<PartRef> = atomic_parts(org).into_iter().map(PartRef::from).collect();
    out.extend(org.roles.iter().map(|r| PartRef::Role(r.clone())));
    out.extend(org.groups.iter().map(|g| PartRef::Group(g.clone())));
    out.push(PartRef::Organisation);
    out
}

/// The trace whose frame at time `t` and part `p` holds atom `a` exactly
/// when bit `(t * parts + p) * atoms + a` of `bits` is set.
pub fn trace_from_bits(
    name: &str,
    horizon: usize,
    parts: &[AtomicPart],
    atoms: &[Ident],
    bits: u64,
) -> Trace {
    let mut tr = Trace::new(id(name), horizon);
    let mut i = 0;
    for t in 0..=horizon {
        for p in parts {
            for a in atoms {
                if bits >> i & 1 == 1 {
                    tr.insert(t, p.clone(), Atom::nullary(a.clone())).unwrap();
                }
                i += 1;
            }
        }
    }
    tr
}

pub fn random_trace(
    rng: &mut impl Rng,
    name: &str,
    horizon: usize,
    parts: &[AtomicPart],
    atoms: &[Ident],
    density: f64,
) -> Trace {
    let mut tr = Trace::new(id(name), horizon);
    for t in 0..=horizon {
        for p in parts {
            for a in atoms {
                if rng.gen_bool(density) {
                    tr.insert(t, p.clone(), Atom::nullary(a.clone())).unwrap();
                }
            }
        }
    }
    tr
}

/// Inserts `pred(values...)` at random points; `values` draws each argument.
pub fn sprinkle(
    rng: &mut impl Rng,
    tr: &mut Trace,
    part: &AtomicPart,
    predicate: &str,
    args: &[Value],
    density: f64,
) {
    for t in 0..=tr.horizon() {
        if rng.gen_bool(density) {
            tr.insert(t, part.clone(), Atom::new(id(predicate), args.to_vec()))
                .unwrap();
        }
    }
}

pub fn num(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

pub fn random_state(rng: &mut impl Rng, atoms: &[Ident], depth: u32) -> StateProp {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..10) {
            0 => StateProp::True,
            1 => StateProp::False,
            _ => StateProp::atom(atoms.choose(rng).unwrap().clone()),
        };
    }
    let a = random_state(rng, atoms, depth - 1);
    match rng.gen_range(0..4) {
        0 => StateProp::not(a),
        1 => StateProp::and(a, random_state(rng, atoms, depth - 1)),
        2 => StateProp::or(a, random_state(rng, atoms, depth - 1)),
        _ => StateProp::implies(a, random_state(rng, atoms, depth - 1)),
    }
}

const OPS: [ModalOp; 6] = [
    ModalOp::C,
    ModalOp::X,
    ModalOp::F,
    ModalOp::G,
    ModalOp::P,
    ModalOp::H,
];

pub fn random_ltl(
    rng: &mut impl Rng,
    parts: &[PartRef],
    atoms: &[Ident],
    depth: u32,
    max_bound: u32,
) -> LtlProp {
    if depth == 0 || rng.gen_bool(0.35) {
        let op = *OPS.choose(rng).unwrap();
        let constraint = if op.accepts_constraint() {
            let n = rng.gen_range(0..=max_bound);
            match rng.gen_range(0..4) {
                0 => None,
                1 => Some(TimeConstraint::Lt(n)),
                2 => Some(TimeConstraint::Le(n)),
                _ => Some(TimeConstraint::Eq(n)),
            }
        } else {
            None
        };
        return LtlProp::modal(
            op,
            constraint,
            parts.choose(rng).unwrap().clone(),
            random_state(rng, atoms, 2),
        );
    }
    let a = random_ltl(rng, parts, atoms, depth - 1, max_bound);
    match rng.gen_range(0..5) {
        0 => LtlProp::Not(Box::new(a)),
        1 => LtlProp::And(
            Box::new(a),
            Box::new(random_ltl(rng, parts, atoms, depth - 1, max_bound)),
        ),
        2 => LtlProp::Or(
            Box::new(a),
            Box::new(random_ltl(rng, parts, atoms, depth - 1, max_bound)),
        ),
        3 => LtlProp::Implies(
            Box::new(a),
            Box::new(random_ltl(rng, parts, atoms, depth - 1, max_bound)),
        ),
        _ => LtlProp::True,
    }
}

/// A random closed single-trace property of the reified core. Time
/// variables are drawn from those in scope; windows are short and offset
/// from a bound variable or a constant. With `bounded`, every time
/// quantifier has both ends explicit, so no domain depends on the horizon.
pub fn random_dyn(
    rng: &mut impl Rng,
    parts: &[PartRef],
    atoms: &[Ident],
    depth: u32,
    bounded: bool,
) -> DynProp {
    let mut n = 0;
    dyn_at(rng, parts, atoms, depth, bounded, &mut Vec::new(), &mut n)
}

fn term(rng: &mut impl Rng, scope: &[Ident]) -> TimeTerm {
    match scope.choose(rng) {
        Some(v) if rng.gen_bool(0.85) => TimeTerm::plus(v.clone(), rng.gen_range(-2..=2)),
        _ => TimeTerm::constant(rng.gen_range(-1..=6)),
    }
}

fn dyn_at(
    rng: &mut impl Rng,
    parts: &[PartRef],
    atoms: &[Ident],
    depth: u32,
    bounded: bool,
    scope: &mut Vec<Ident>,
    fresh: &mut usize,
) -> DynProp {
    if depth == 0 || (!scope.is_empty() && rng.gen_bool(0.3)) {
        return match rng.gen_range(0..12) {
            0 => DynProp::True,
            1 => DynProp::False,
            2 | 3 if !scope.is_empty() => {
                let ops = [
                    CmpOp::Lt,
                    CmpOp::Le,
                    CmpOp::Eq,
                    CmpOp::Ne,
                    CmpOp::Ge,
                    CmpOp::Gt,
                ];
                DynProp::Cmp(
                    agrkit_core::property::Term::Time(term(rng, scope)),
                    *ops.choose(rng).unwrap(),
                    agrkit_core::property::Term::Time(term(rng, scope)),
                )
            }
            _ => DynProp::holds(
                term(rng, scope),
                parts.choose(rng).unwrap().clone(),
                random_state(rng, atoms, 1),
            ),
        };
    }
    match rng.gen_range(0..6) {
        0 => DynProp::not(dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh)),
        1 => DynProp::and(
            dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh),
            dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh),
        ),
        2 => DynProp::or(
            dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh),
            dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh),
        ),
        3 => DynProp::implies(
            dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh),
            dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh),
        ),
        _ => {
            let v = id(&format!("v{fresh}"));
            *fresh += 1;
            let domain = match rng.gen_range(0..4) {
                0 if !bounded => Domain::unbounded_time(),
                1 if !bounded => Domain::Time {
                    lo: Some(term(rng, scope)),
                    hi: None,
                },
                _ => {
                    let lo = term(rng, scope);
                    let mut hi = lo.clone();
                    hi.offset += rng.gen_range(-1..=4);
                    Domain::window(lo, hi)
                }
            };
            scope.push(v.clone());
            let body = dyn_at(rng, parts, atoms, depth - 1, bounded, scope, fresh);
            scope.pop();
            if rng.gen_bool(0.5) {
                DynProp::forall(v, domain, body)
            } else {
                DynProp::exists(v, domain, body)
            }
        }
    }
}

pub fn pattern(predicate: &str, args: Vec<ArgTerm>) -> StateProp {
    StateProp::Atom(AtomPattern {
        predicate: id(predicate),
        args,
    })
}
