//! Brute-force reference semantics for dynamic properties and for the LTL
//! dialect. Every quantifier binding is visited; nothing is pruned.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Rational64;

use agrkit_core::ident::Ident;
use agrkit_core::property::{
    ArgTerm, CmpOp, Domain, DynProp, LtlProp, ModalOp, NumTerm, Outcome, Quantifier, StateProp,
    Term, TimeConstraint, TimeTerm,
};
use agrkit_core::state::{Atom, Value};
use agrkit_core::structure::OrgStructure;
use agrkit_core::trace::{AtomicPart, PartRef, Trace};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum T3 {
    F,
    U,
    T,
}

impl T3 {
    fn of(b: bool) -> T3 {
        if b {
            T3::T
        } else {
            T3::F
        }
    }

    fn neg(self) -> T3 {
        match self {
            T3::F => T3::T,
            T3::U => T3::U,
            T3::T => T3::F,
        }
    }

    pub fn outcome(self) -> Outcome {
        match self {
            T3::F => Outcome::Fails,
            T3::U => Outcome::Inconclusive,
            T3::T => Outcome::Holds,
        }
    }
}

#[derive(Clone, Debug)]
enum Val {
    Time(i64),
    Num(Rational64),
    Trace(usize),
}

pub fn parts_of(org: &OrgStructure, part: &PartRef) -> Vec<AtomicPart> {
    let both = |r: &Ident| vec![AtomicPart::input(r.clone()), AtomicPart::output(r.clone())];
    match part {
        PartRef::Input(r) => vec![AtomicPart::input(r.clone())],
        PartRef::Output(r) => vec![AtomicPart::output(r.clone())],
        PartRef::Role(r) => both(r),
        PartRef::Group(g) => org
            .role_in
            .iter()
            .filter(|(_, g2)| g2 == g)
            .flat_map(|(r, _)| both(r))
            .collect(),
        PartRef::Organisation => org.roles.iter().flat_map(both).collect(),
    }
}

struct Eval<'a> {
    org: &'a OrgStructure,
    traces: &'a [Trace],
    implicit: usize,
    horizon: i64,
    numbers: Vec<Rational64>,
    env: Vec<(Ident, Val)>,
}

impl Eval<'_> {
    fn get(&self, v: &Ident) -> &Val {
        &self
            .env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .unwrap_or_else(|| panic!("unbound {v}"))
            .1
    }

    fn time(&self, t: &TimeTerm) -> i64 {
        match &t.var {
            None => t.offset,
            Some(v) => match self.get(v) {
                Val::Time(x) => x + t.offset,
                other => panic!("{v} is not a time: {other:?}"),
            },
        }
    }

    fn num(&self, t: &Term) -> Rational64 {
        match t {
            Term::Num(NumTerm::Const(c)) => *c,
            Term::Num(NumTerm::Var(v)) => match self.get(v) {
                Val::Num(n) => *n,
                other => panic!("{v} is not a number: {other:?}"),
            },
            Term::Time(t) => Rational64::from_integer(self.time(t)),
        }
    }

    fn atom(&self, a: &agrkit_core::property::AtomPattern) -> Atom {
        let args = a
            .args
            .iter()
            .map(|arg| match arg {
                ArgTerm::Sym(s) => Value::Sym(s.clone()),
                ArgTerm::Num(n) => Value::Num(*n),
                ArgTerm::Var(v) => match self.get(v) {
                    Val::Num(n) => Value::Num(*n),
                    other => panic!("{v} is not a number: {other:?}"),
                },
            })
            .collect();
        Atom::new(a.predicate.clone(), args)
    }

    fn state(&self, trace: &Trace, t: usize, parts: &[AtomicPart], sp: &StateProp) -> bool {
        match sp {
            StateProp::True => true,
            StateProp::False => false,
            StateProp::Atom(a) => {
                let atom = self.atom(a);
                parts.iter().any(|p| trace.frame(t, p).contains(&atom))
            }
            StateProp::Not(p) => !self.state(trace, t, parts, p),
            StateProp::And(a, b) => {
                self.state(trace, t, parts, a) && self.state(trace, t, parts, b)
            }
            StateProp::Or(a, b) => self.state(trace, t, parts, a) || self.state(trace, t, parts, b),
            StateProp::Implies(a, b) => {
                !self.state(trace, t, parts, a) || self.state(trace, t, parts, b)
            }
        }
    }

    fn eval(&mut self, p: &DynProp) -> T3 {
        match p {
            DynProp::True => T3::T,
            DynProp::False => T3::F,
            DynProp::Holds {
                trace,
                time,
                part,
                prop,
            } => {
                let idx = match trace {
                    None => self.implicit,
                    Some(g) => match self.get(g) {
                        Val::Trace(i) => *i,
                        other => panic!("{g} is not a trace: {other:?}"),
                    },
                };
                let tr = &self.traces[idx];
                let t = self.time(time);
                if t < 0 {
                    T3::F
                } else if t > tr.horizon() as i64 {
                    T3::U
                } else {
                    T3::of(self.state(tr, t as usize, &parts_of(self.org, part), prop))
                }
            }
            DynProp::Cmp(a, op, b) => {
                let r = match (a, b) {
                    (Term::Time(x), Term::Time(y)) => cmp(*op, self.time(x), self.time(y)),
                    _ => cmp(*op, self.num(a), self.num(b)),
                };
                T3::of(r)
            }
            DynProp::Not(a) => self.eval(a).neg(),
            DynProp::And(a, b) => self.eval(a).min(self.eval(b)),
            DynProp::Or(a, b) => self.eval(a).max(self.eval(b)),
            DynProp::Implies(a, b) => self.eval(a).neg().max(self.eval(b)),
            DynProp::Quant {
                q,
                var,
                domain,
                body,
            } => {
                let values: Vec<Val> = match domain {
                    Domain::Time { lo, hi } => {
                        let lo = lo.as_ref().map_or(0, |t| self.time(t)).max(0);
                        let hi = hi.as_ref().map_or(self.horizon, |t| self.time(t));
                        (lo..=hi).map(Val::Time).collect()
                    }
                    Domain::Num => self.numbers.iter().copied().map(Val::Num).collect(),
                    Domain::Trace => (0..self.traces.len()).map(Val::Trace).collect(),
                };
                let mut results = Vec::with_capacity(values.len());
                for v in values {
                    self.env.push((var.clone(), v));
                    results.push(self.eval(body));
                    self.env.pop();
                }
                match q {
                    Quantifier::Forall => results.into_iter().min().unwrap_or(T3::T),
                    Quantifier::Exists => results.into_iter().max().unwrap_or(T3::F),
                }
            }
        }
    }
}

fn cmp<T: Ord>(op: CmpOp, a: T, b: T) -> bool {
    match op {
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Ge => a >= b,
        CmpOp::Gt => a > b,
    }
}

fn mentions_traces(p: &DynProp) -> bool {
    match p {
        DynProp::Holds { trace, .. } => trace.is_some(),
        DynProp::Quant { domain, body, .. } => {
            matches!(domain, Domain::Trace) || mentions_traces(body)
        }
        DynProp::Not(a) => mentions_traces(a),
        DynProp::And(a, b) | DynProp::Or(a, b) | DynProp::Implies(a, b) => {
            mentions_traces(a) || mentions_traces(b)
        }
        _ => false,
    }
}

/// Every number occurring anywhere in the traces. For formulas whose numeric
/// variables are guarded by the atoms they occur in, this superset gives the
/// same truth values as the positional domain.
fn all_numbers(traces: &[Trace]) -> Vec<Rational64> {
    let mut out = BTreeSet::new();
    for tr in traces {
        for (_, _, atom) in tr.entries() {
            for v in &atom.args {
                if let Value::Num(n) = v {
                    out.insert(*n);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Truth value of a closed property. A property quantifying over traces is
/// evaluated once against the set with the smallest horizon; otherwise the
/// per-trace values are conjoined.
pub fn dyn_truth(org: &OrgStructure, p: &DynProp, traces: &[Trace]) -> T3 {
    let numbers = all_numbers(traces);
    let mut ev = Eval {
        org,
        traces,
        implicit: 0,
        horizon: 0,
        numbers,
        env: Vec::new(),
    };
    if mentions_traces(p) {
        ev.horizon = traces
            .iter()
            .map(|t| t.horizon() as i64)
            .min()
            .expect("traces");
        return ev.eval(p);
    }
    (0..traces.len())
        .map(|i| {
            ev.implicit = i;
            ev.horizon = traces[i].horizon() as i64;
            ev.eval(p)
        })
        .min()
        .expect("traces")
}

/// Direct finite-trace LTL semantics: a formula is evaluated at every time
/// point in `[0, horizon]` and the results are conjoined.
pub fn ltl_truth(org: &OrgStructure, p: &LtlProp, trace: &Trace) -> T3 {
    let h = trace.horizon() as i64;
    (0..=h)
        .map(|t| ltl_at(org, p, trace, t))
        .min()
        .expect("non-empty")
}

fn ltl_at(org: &OrgStructure, p: &LtlProp, tr: &Trace, t: i64) -> T3 {
    match p {
        LtlProp::True => T3::T,
        LtlProp::False => T3::F,
        LtlProp::Not(a) => ltl_at(org, a, tr, t).neg(),
        LtlProp::And(a, b) => ltl_at(org, a, tr, t).min(ltl_at(org, b, tr, t)),
        LtlProp::Or(a, b) => ltl_at(org, a, tr, t).max(ltl_at(org, b, tr, t)),
        LtlProp::Implies(a, b) => ltl_at(org, a, tr, t).neg().max(ltl_at(org, b, tr, t)),
        LtlProp::Modal {
            op,
            constraint,
            part,
            prop,
        } => {
            let parts = parts_of(org, part);
            let h = tr.horizon() as i64;
            let at = |s: i64| -> T3 {
                if s < 0 {
                    T3::F
                } else if s > h {
                    T3::U
                } else {
                    T3::of(ground_state(tr, s as usize, &parts, prop))
                }
            };
            let c = |n: &u32| i64::from(*n);
            let future = matches!(op, ModalOp::F | ModalOp::G);
            let range = match (op, constraint) {
                (ModalOp::C, _) => return at(t),
                (ModalOp::X, _) => return at(t + 1),
                (_, Some(TimeConstraint::Eq(n))) => {
                    return at(if future { t + c(n) } else { t - c(n) })
                }
                (_, Some(TimeConstraint::Le(n))) if future => (t, t + c(n)),
                (_, Some(TimeConstraint::Lt(n))) if future => (t, t + c(n) - 1),
                (_, None) if future => (t, h),
                (_, Some(TimeConstraint::Le(n))) => (t - c(n), t),
                (_, Some(TimeConstraint::Lt(n))) => (t - c(n) + 1, t),
                (_, None) => (0, t),
            };
            let points = (range.0.max(0)..=range.1).map(at);
            match op {
                ModalOp::F | ModalOp::P => points.max().unwrap_or(T3::F),
                _ => points.min().unwrap_or(T3::T),
            }
        }
    }
}

fn ground_state(tr: &Trace, t: usize, parts: &[AtomicPart], sp: &StateProp) -> bool {
    match sp {
        StateProp::True => true,
        StateProp::False => false,
        StateProp::Atom(a) => {
            let args = a
                .args
                .iter()
                .map(|arg| match arg {
                    ArgTerm::Sym(s) => Value::Sym(s.clone()),
                    ArgTerm::Num(n) => Value::Num(*n),
                    ArgTerm::Var(v) => panic!("free variable {v} in an LTL atom"),
                })
                .collect();
            let atom = Atom::new(a.predicate.clone(), args);
            parts.iter().any(|p| tr.frame(t, p).contains(&atom))
        }
        StateProp::Not(p) => !ground_state(tr, t, parts, p),
        StateProp::And(a, b) => ground_state(tr, t, parts, a) && ground_state(tr, t, parts, b),
        StateProp::Or(a, b) => ground_state(tr, t, parts, a) || ground_state(tr, t, parts, b),
        StateProp::Implies(a, b) => !ground_state(tr, t, parts, a) || ground_state(tr, t, parts, b),
    }
}
