//! Three-valued evaluation of dynamic properties over finite traces.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::ident::Ident;
use crate::property::ast::{
    ArgTerm, CmpOp, Domain, DynProp, NumTerm, Quantifier, StateProp, Term, TimeTerm,
};
use crate::state::{Atom, State, Value};
use crate::structure::OrgStructure;
use crate::trace::{AtomicPart, PartError, Trace};

/// Explicitly bounded time quantifiers enumerate at most this many
/// instances past the horizon; the remainder counts as undetermined.
const BEYOND_HORIZON_CAP: i64 = 1024;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
            Truth::True => Truth::False,
        }
    }

    fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BoundValue {
    Time(i64),
    Num(Rational64),
    Trace(Ident),
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Time(t) => write!(f, "{t}"),
            BoundValue::Num(n) => write!(f, "{}", Value::Num(*n)),
            BoundValue::Trace(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Binding {
    pub var: Ident,
    pub value: BoundValue,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.var, self.value)
    }
}

/// Result of checking a property against a set of traces.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    /// For single-trace properties checked on several traces, the trace
    /// that decided the outcome.
    pub trace: Option<Ident>,
    /// Bindings of the quantifier instances that decided the outcome,
    /// outermost first: a counterexample for `fails`, the unresolved
    /// instance for `inconclusive`, a witness for `holds` when existential.
    pub witness: Vec<Binding>,
    pub explanation: String,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    fn build(outcome: Outcome, trace: Option<Ident>, witness: Vec<Binding>) -> Verdict {
        let bindings = witness
            .iter()
            .map(Binding::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        let on = trace
            .as_ref()
            .map(|t| format!(" on trace {t}"))
            .unwrap_or_default();
        let explanation = match (outcome, bindings.is_empty()) {
            (Outcome::Holds, true) => format!("holds{on}"),
            (Outcome::Holds, false) => format!("holds{on}, witness {bindings}"),
            (Outcome::Fails, true) => format!("fails{on}"),
            (Outcome::Fails, false) => format!("fails{on}, counterexample {bindings}"),
            (Outcome::Inconclusive, true) => {
                format!("inconclusive{on}, undetermined within the horizon")
            }
            (Outcome::Inconclusive, false) => {
                format!("inconclusive{on}, undetermined within the horizon at {bindings}")
            }
        };
        Verdict {
            outcome,
            trace,
            witness,
            explanation,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.explanation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unbound {kind} variable `{name}`")]
    UnboundVariable { name: Ident, kind: &'static str },
    #[error(transparent)]
    Part(#[from] PartError),
    #[error("no traces supplied")]
    NoTraces,
    #[error("formula mixes trace variables with atoms on the implicit trace")]
    MixedTraceReference,
}

#[derive(Clone, Copy, Debug)]
struct CTime {
    slot: Option<usize>,
    offset: i64,
}

#[derive(Clone, Debug)]
enum CArg {
    Const(Value),
    Slot(usize),
}

#[derive(Clone, Debug)]
enum CAtom {
    Ground(Atom),
    Pattern { predicate: Ident, args: Vec<CArg> },
}

#[derive(Clone, Debug)]
enum CState {
    Const(bool),
    Atom(CAtom),
    Not(Box<CState>),
    And(Box<CState>, Box<CState>),
    Or(Box<CState>, Box<CState>),
    Implies(Box<CState>, Box<CState>),
}

#[derive(Clone, Debug)]
enum CTerm {
    Time(CTime),
    NumSlot(usize),
    NumConst(Rational64),
}

#[derive(Clone, Debug)]
enum CDomain {
    Time {
        lo: Option<CTime>,
        hi: Option<CTime>,
    },
    Num(usize),
    Trace,
}

#[derive(Clone, Debug)]
enum Node {
    Const(Truth),
    Holds {
        trace: Option<usize>,
        time: CTime,
        parts: Vec<usize>,
        prop: CState,
    },
    Cmp(CTerm, CmpOp, CTerm),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Quant {
        q: Quantifier,
        slot: usize,
        name: Ident,
        domain: CDomain,
        body: Box<Node>,
    },
}

#[derive(Clone, Copy, Debug)]
enum Val {
    Unset,
    Time(i64),
    Num(Rational64),
    Trace(usize),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Time,
    Num(usize),
    Trace,
}

/// A property resolved against an organisation structure, ready to be
/// checked against any number of trace sets.
#[derive(Clone, Debug)]
pub struct CompiledProperty {
    root: Node,
    parts: Vec<AtomicPart>,
    slots: usize,
    /// Per numeric quantifier: the `(predicate, arity, position)` triples
    /// where its variable occurs.
    num_positions: Vec<BTreeSet<(Ident, usize, usize)>>,
    multi_trace: bool,
}

struct Compiler<'a> {
    org: &'a OrgStructure,
    parts: Vec<AtomicPart>,
    part_index: BTreeMap<AtomicPart, usize>,
    scope: Vec<(Ident, Kind)>,
    slots: usize,
    num_positions: Vec<BTreeSet<(Ident, usize, usize)>>,
    implicit_seen: bool,
    explicit_seen: bool,
}

impl Compiler<'_> {
    fn lookup(&self, name: &Ident) -> Option<(usize, Kind)> {
        self.scope
            .iter()
            .enumerate()
            .rev()
            .find(|(_, (v, _))| v == name)
            .map(|(slot, (_, k))| (slot, *k))
    }

    fn time(&self, t: &TimeTerm) -> Result<CTime, CheckError> {
        let slot = match &t.var {
            None => None,
            Some(v) => match self.lookup(v) {
                Some((slot, Kind::Time)) => Some(slot),
                _ => {
                    return Err(CheckError::UnboundVariable {
                        name: v.clone(),
                        kind: "time",
                    })
                }
            },
        };
        Ok(CTime {
            slot,
            offset: t.offset,
        })
    }

    fn state(&mut self, sp: &StateProp) -> Result<CState, CheckError> {
        Ok(match sp {
            StateProp::True => CState::Const(true),
            StateProp::False => CState::Const(false),
            StateProp::Atom(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                let mut ground = true;
                for (pos, arg) in a.args.iter().enumerate() {
                    args.push(match arg {
                        ArgTerm::Sym(s) => CArg::Const(Value::Sym(s.clone())),
                        ArgTerm::Num(n) => CArg::Const(Value::Num(*n)),
                        ArgTerm::Var(v) => match self.lookup(v) {
                            Some((slot, Kind::Num(k))) => {
                                self.num_positions[k].insert((
                                    a.predicate.clone(),
                                    a.args.len(),
                                    pos,
                                ));
                                ground = false;
                                CArg::Slot(slot)
                            }
                            _ => {
                                return Err(CheckError::UnboundVariable {
                                    name: v.clone(),
                                    kind: "numeric",
                                })
                            }
                        },
                    });
                }
                if ground {
                    let values = args
                        .into_iter()
                        .map(|a| match a {
                            CArg::Const(v) => v,
                            CArg::Slot(_) => unreachable!(),
                        })
                        .collect();
                    CState::Atom(CAtom::Ground(Atom::new(a.predicate.clone(), values)))
                } else {
                    CState::Atom(CAtom::Pattern {
                        predicate: a.predicate.clone(),
                        args,
                    })
                }
            }
            StateProp::Not(p) => CState::Not(Box::new(self.state(p)?)),
            StateProp::And(a, b) => CState::And(Box::new(self.state(a)?), Box::new(self.state(b)?)),
            StateProp::Or(a, b) => CState::Or(Box::new(self.state(a)?), Box::new(self.state(b)?)),
            StateProp::Implies(a, b) => {
                CState::Implies(Box::new(self.state(a)?), Box::new(self.state(b)?))
            }
        })
    }

    fn term(&self, t: &Term) -> Result<CTerm, CheckError> {
        Ok(match t {
            Term::Time(t) => CTerm::Time(self.time(t)?),
            Term::Num(NumTerm::Const(c)) => CTerm::NumConst(*c),
            Term::Num(NumTerm::Var(v)) => match self.lookup(v) {
                Some((slot, Kind::Num(_))) => CTerm::NumSlot(slot),
                _ => {
                    return Err(CheckError::UnboundVariable {
                        name: v.clone(),
                        kind: "numeric",
                    })
                }
            },
        })
    }

    fn node(&mut self, p: &DynProp) -> Result<Node, CheckError> {
        Ok(match p {
            DynProp::True => Node::Const(Truth::True),
            DynProp::False => Node::Const(Truth::False),
            DynProp::Holds {
                trace,
                time,
                part,
                prop,
            } => {
                let trace = match trace {
                    None => {
                        self.implicit_seen = true;
                        None
                    }
                    Some(g) => match self.lookup(g) {
                        Some((slot, Kind::Trace)) => {
                            self.explicit_seen = true;
                            Some(slot)
                        }
                        _ => {
                            return Err(CheckError::UnboundVariable {
                                name: g.clone(),
                                kind: "trace",
                            })
                        }
                    },
                };
                let mut parts = Vec::new();
                for ap in part.atomic_parts(self.org)? {
                    let next = self.parts.len();
                    let idx = *self.part_index.entry(ap.clone()).or_insert(next);
                    if idx == next {
                        self.parts.push(ap);
                    }
                    parts.push(idx);
                }
                Node::Holds {
                    trace,
                    time: self.time(time)?,
                    parts,
                    prop: self.state(prop)?,
                }
            }
            DynProp::Cmp(a, op, b) => Node::Cmp(self.term(a)?, *op, self.term(b)?),
            DynProp::Not(a) => Node::Not(Box::new(self.node(a)?)),
            DynProp::And(a, b) => Node::And(Box::new(self.node(a)?), Box::new(self.node(b)?)),
            DynProp::Or(a, b) => Node::Or(Box::new(self.node(a)?), Box::new(self.node(b)?)),
            DynProp::Implies(a, b) => {
                Node::Implies(Box::new(self.node(a)?), Box::new(self.node(b)?))
            }
            DynProp::Quant {
                q,
                var,
                domain,
                body,
            } => {
                let (kind, cdomain) = match domain {
                    Domain::Time { lo, hi } => (
                        Kind::Time,
                        CDomain::Time {
                            lo: lo.as_ref().map(|t| self.time(t)).transpose()?,
                            hi: hi.as_ref().map(|t| self.time(t)).transpose()?,
                        },
                    ),
                    Domain::Num => {
                        let k = self.num_positions.len();
                        self.num_positions.push(BTreeSet::new());
                        (Kind::Num(k), CDomain::Num(k))
                    }
                    Domain::Trace => (Kind::Trace, CDomain::Trace),
                };
                let slot = self.scope.len();
                self.scope.push((var.clone(), kind));
                self.slots = self.slots.max(self.scope.len());
                let body = self.node(body);
                self.scope.pop();
                Node::Quant {
                    q: *q,
                    slot,
                    name: var.clone(),
                    domain: cdomain,
                    body: Box::new(body?),
                }
            }
        })
    }
}

struct Ctx<'a> {
    traces: Vec<&'a Trace>,
    lines: Vec<Vec<Option<&'a [State]>>>,
    implicit: usize,
    horizon: i64,
    num_domains: Vec<Vec<Rational64>>,
    env: Vec<Val>,
    witness: Vec<(usize, Ident, Val)>,
}

impl Ctx<'_> {
    fn time(&self, t: CTime) -> i64 {
        match t.slot {
            None => t.offset,
            Some(s) => match self.env[s] {
                Val::Time(v) => v.saturating_add(t.offset),
                _ => unreachable!("time slot holds a time"),
            },
        }
    }

    fn atom_true(&self, trace: usize, t: usize, parts: &[usize], atom: &Atom) -> bool {
        parts.iter().any(|&p| {
            self.lines[trace][p]
                .and_then(|line| line.get(t))
                .is_some_and(|s| s.contains(atom))
        })
    }

    fn state(&self, trace: usize, t: usize, parts: &[usize], sp: &CState) -> bool {
        match sp {
            CState::Const(b) => *b,
            CState::Atom(CAtom::Ground(a)) => self.atom_true(trace, t, parts, a),
            CState::Atom(CAtom::Pattern { predicate, args }) => {
                let values = args
                    .iter()
                    .map(|a| match a {
                        CArg::Const(v) => v.clone(),
                        CArg::Slot(s) => match self.env[*s] {
                            Val::Num(n) => Value::Num(n),
                            _ => unreachable!("numeric slot holds a number"),
                        },
                    })
                    .collect();
                self.atom_true(trace, t, parts, &Atom::new(predicate.clone(), values))
            }
            CState::Not(p) => !self.state(trace, t, parts, p),
            CState::And(a, b) => self.state(trace, t, parts, a) && self.state(trace, t, parts, b),
            CState::Or(a, b) => self.state(trace, t, parts, a) || self.state(trace, t, parts, b),
            CState::Implies(a, b) => {
                !self.state(trace, t, parts, a) || self.state(trace, t, parts, b)
            }
        }
    }

    fn eval(&mut self, node: &Node) -> Truth {
        match node {
            Node::Const(t) => *t,
            Node::Holds {
                trace,
                time,
                parts,
                prop,
            } => {
                let trace = match trace {
                    None => self.implicit,
                    Some(s) => match self.env[*s] {
                        Val::Trace(i) => i,
                        _ => unreachable!("trace slot holds a trace"),
                    },
                };
                let t = self.time(*time);
                if t < 0 {
                    Truth::False
                } else if t as u64 > self.traces[trace].horizon() as u64 {
                    Truth::Unknown
                } else {
                    Truth::from_bool(self.state(trace, t as usize, parts, prop))
                }
            }
            Node::Cmp(a, op, b) => match (a, b) {
                (CTerm::Time(x), CTerm::Time(y)) => {
                    Truth::from_bool(op.apply(&self.time(*x), &self.time(*y)))
                }
                _ => {
                    let num = |t: &CTerm| match t {
                        CTerm::NumConst(c) => *c,
                        CTerm::NumSlot(s) => match self.env[*s] {
                            Val::Num(n) => n,
                            _ => unreachable!("numeric slot holds a number"),
                        },
                        CTerm::Time(t) => Rational64::from_integer(self.time(*t)),
                    };
                    Truth::from_bool(op.apply(&num(a), &num(b)))
                }
            },
            Node::Not(a) => self.eval(a).not(),
            Node::And(a, b) => self.binary(a, b, false, false),
            Node::Or(a, b) => self.binary(a, b, false, true),
            Node::Implies(a, b) => self.binary(a, b, true, true),
            Node::Quant {
                q,
                slot,
                name,
                domain,
                body,
            } => self.quantifier(*q, *slot, name, domain, body),
        }
    }

    /// Kleene conjunction (`disjunctive == false`) or disjunction, with the
    /// left operand optionally negated. The witness of the operand that
    /// determined the result is kept.
    fn binary(&mut self, a: &Node, b: &Node, negate_left: bool, disjunctive: bool) -> Truth {
        let dominant = if disjunctive {
            Truth::True
        } else {
            Truth::False
        };
        let m0 = self.witness.len();
        let mut ra = self.eval(a);
        if negate_left {
            ra = ra.not();
        }
        if ra == dominant {
            return ra;
        }
        let m1 = self.witness.len();
        let rb = self.eval(b);
        let res = if disjunctive { ra.max(rb) } else { ra.min(rb) };
        if ra == res {
            self.witness.truncate(m1);
        } else {
            self.witness.drain(m0..m1);
        }
        res
    }

    fn quantifier(
        &mut self,
        q: Quantifier,
        slot: usize,
        name: &Ident,
        domain: &CDomain,
        body: &Node,
    ) -> Truth {
        let (dominant, neutral) = match q {
            Quantifier::Forall => (Truth::False, Truth::True),
            Quantifier::Exists => (Truth::True, Truth::False),
        };
        let mut acc = neutral;
        let mut step = |ctx: &mut Self, v: Val| -> Option<Truth> {
            ctx.env[slot] = v;
            let mark = ctx.witness.len();
            let r = ctx.eval(body);
            if r == dominant {
                ctx.witness.push((slot, name.clone(), v));
                return Some(r);
            }
            if r == Truth::Unknown && acc == neutral {
                acc = Truth::Unknown;
                ctx.witness.push((slot, name.clone(), v));
            } else {
                ctx.witness.truncate(mark);
            }
            None
        };
        let saved = self.env[slot];
        let mut result = None;
        match domain {
            CDomain::Time { lo, hi } => {
                let lo = lo.map_or(0, |t| self.time(t)).max(0);
                let hi = hi.map_or(self.horizon, |t| self.time(t));
                let last = hi.min(self.horizon.saturating_add(BEYOND_HORIZON_CAP));
                let mut t = lo;
                while t <= last {
                    if let Some(r) = step(self, Val::Time(t)) {
                        result = Some(r);
                        break;
                    }
                    t += 1;
                }
                if result.is_none() && hi > last && lo <= hi && acc == neutral {
                    acc = Truth::Unknown;
                    self.witness.push((slot, name.clone(), Val::Time(last + 1)));
                }
            }
            CDomain::Num(k) => {
                for i in 0..self.num_domains[*k].len() {
                    let v = Val::Num(self.num_domains[*k][i]);
                    if let Some(r) = step(self, v) {
                        result = Some(r);
                        break;
                    }
                }
            }
            CDomain::Trace => {
                for i in 0..self.traces.len() {
                    if let Some(r) = step(self, Val::Trace(i)) {
                        result = Some(r);
                        break;
                    }
                }
            }
        }
        self.env[slot] = saved;
        result.unwrap_or(acc)
    }
}

impl CompiledProperty {
    pub fn new(prop: &DynProp, org: &OrgStructure) -> Result<Self, CheckError> {
        let mut c = Compiler {
            org,
            parts: Vec::new(),
            part_index: BTreeMap::new(),
            scope: Vec::new(),
            slots: 0,
            num_positions: Vec::new(),
            implicit_seen: false,
            explicit_seen: false,
        };
        let root = c.node(prop)?;
        if c.implicit_seen && c.explicit_seen {
            return Err(CheckError::MixedTraceReference);
        }
        let multi_trace = c.explicit_seen || prop.is_multi_trace();
        Ok(CompiledProperty {
            root,
            parts: c.parts,
            slots: c.slots,
            num_positions: c.num_positions,
            multi_trace,
        })
    }

    /// Whether the property quantifies over traces.
    pub fn is_multi_trace(&self) -> bool {
        self.multi_trace
    }

    /// Checks the property. A multi-trace property is evaluated once over
    /// the whole set; any other property is evaluated per trace and the
    /// verdicts are conjoined.
    pub fn check<T: Borrow<Trace>>(&self, traces: &[T]) -> Result<Verdict, CheckError> {
        if traces.is_empty() {
            return Err(CheckError::NoTraces);
        }
        let all: Vec<&Trace> = traces.iter().map(Borrow::borrow).collect();
        if self.multi_trace {
            let horizon = all.iter().map(|t| t.horizon()).min().expect("non-empty");
            return Ok(self.run(&all, 0, horizon, None));
        }
        let mut undecided: Option<Verdict> = None;
        let mut first_holds: Option<Verdict> = None;
        for i in 0..all.len() {
            let name = (all.len() > 1).then(|| all[i].id.clone());
            let v = self.run(&all, i, all[i].horizon(), name);
            match v.outcome {
                Outcome::Fails => return Ok(v),
                Outcome::Inconclusive if undecided.is_none() => undecided = Some(v),
                Outcome::Holds if first_holds.is_none() => first_holds = Some(v),
                _ => {}
            }
        }
        Ok(undecided
            .or(first_holds)
            .expect("at least one trace was checked"))
    }

    fn run(&self, all: &[&Trace], implicit: usize, horizon: usize, name: Option<Ident>) -> Verdict {
        let scope: Vec<&Trace> = if self.multi_trace {
            all.to_vec()
        } else {
            vec![all[implicit]]
        };
        let lines = scope
            .iter()
            .map(|tr| self.parts.iter().map(|p| tr.timeline(p)).collect())
            .collect();
        let num_domains = self
            .num_positions
            .iter()
            .map(|positions| numeric_domain(&scope, positions))
            .collect();
        let mut ctx = Ctx {
            traces: scope,
            lines,
            implicit: 0,
            horizon: horizon as i64,
            num_domains,
            env: vec![Val::Unset; self.slots],
            witness: Vec::new(),
        };
        let truth = ctx.eval(&self.root);
        let outcome = match truth {
            Truth::True => Outcome::Holds,
            Truth::False => Outcome::Fails,
            Truth::Unknown => Outcome::Inconclusive,
        };
        let mut witness: Vec<Binding> = ctx
            .witness
            .iter()
            .rev()
            .map(|(_, var, v)| Binding {
                var: var.clone(),
                value: match v {
                    Val::Time(t) => BoundValue::Time(*t),
                    Val::Num(n) => BoundValue::Num(*n),
                    Val::Trace(i) => BoundValue::Trace(ctx.traces[*i].id.clone()),
                    Val::Unset => unreachable!("bound variables are set"),
                },
            })
            .collect();
        witness.dedup();
        Verdict::build(outcome, name, witness)
    }
}

fn numeric_domain(
    traces: &[&Trace],
    positions: &BTreeSet<(Ident, usize, usize)>,
) -> Vec<Rational64> {
    let mut values = BTreeSet::new();
    if positions.is_empty() {
        return Vec::new();
    }
    for tr in traces {
        for part in tr.parts() {
            for state in tr.timeline(part).unwrap_or(&[]) {
                for atom in state.iter() {
                    for (pred, arity, pos) in positions {
                        if atom.predicate == *pred && atom.args.len() == *arity {
                            if let Value::Num(n) = &atom.args[*pos] {
                                values.insert(*n);
                            }
                        }
                    }
                }
            }
        }
    }
    values.into_iter().collect()
}

/// Checks `prop` against `traces`; see [`CompiledProperty::check`].
pub fn check_property<T: Borrow<Trace>>(
    prop: &DynProp,
    traces: &[T],
    org: &OrgStructure,
) -> Result<Verdict, CheckError> {
    CompiledProperty::new(prop, org)?.check(traces)
}

/// Evaluates a variable-free state property under closed-world lookup.
pub fn eval_state_prop(state: &State, prop: &StateProp) -> Result<bool, CheckError> {
    fn go(state: &State, prop: &StateProp) -> Result<bool, CheckError> {
        Ok(match prop {
            StateProp::True => true,
            StateProp::False => false,
            StateProp::Atom(a) => {
                let args = a
                    .args
                    .iter()
                    .map(|arg| match arg {
                        ArgTerm::Sym(s) => Ok(Value::Sym(s.clone())),
                        ArgTerm::Num(n) => Ok(Value::Num(*n)),
                        ArgTerm::Var(v) => Err(CheckError::UnboundVariable {
                            name: v.clone(),
                            kind: "numeric",
                        }),
                    })
                    .collect::<Result<_, _>>()?;
                state.contains(&Atom::new(a.predicate.clone(), args))
            }
            StateProp::Not(p) => !go(state, p)?,
            StateProp::And(a, b) => go(state, a)? & go(state, b)?,
            StateProp::Or(a, b) => go(state, a)? | go(state, b)?,
            StateProp::Implies(a, b) => !go(state, a)? | go(state, b)?,
        })
    }
    go(state, prop)
}
