//! Abstract syntax of state properties and of the reified temporal core.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;

use crate::ident::Ident;
use crate::state::fmt_rational;
use crate::trace::PartRef;

/// An argument position inside an atom pattern.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ArgTerm {
    Sym(Ident),
    Num(Rational64),
    /// A numeric variable bound by an enclosing quantifier.
    Var(Ident),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AtomPattern {
    pub predicate: Ident,
    pub args: Vec<ArgTerm>,
}

/// A propositional formula over atom patterns.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum StateProp {
    True,
    False,
    Atom(AtomPattern),
    Not(Box<StateProp>),
    And(Box<StateProp>, Box<StateProp>),
    Or(Box<StateProp>, Box<StateProp>),
    Implies(Box<StateProp>, Box<StateProp>),
}

impl StateProp {
    pub fn atom(predicate: Ident) -> Self {
        StateProp::Atom(AtomPattern {
            predicate,
            args: Vec::new(),
        })
    }

    pub fn not(p: StateProp) -> Self {
        StateProp::Not(Box::new(p))
    }

    pub fn and(a: StateProp, b: StateProp) -> Self {
        StateProp::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StateProp, b: StateProp) -> Self {
        StateProp::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: StateProp, b: StateProp) -> Self {
        StateProp::Implies(Box::new(a), Box::new(b))
    }

    /// Visits every atom pattern, left to right.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a AtomPattern)) {
        match self {
            StateProp::True | StateProp::False => {}
            StateProp::Atom(a) => f(a),
            StateProp::Not(p) => p.for_each_atom(f),
            StateProp::And(a, b) | StateProp::Or(a, b) | StateProp::Implies(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    fn rename(&mut self, map: &BTreeMap<Ident, Ident>) {
        match self {
            StateProp::True | StateProp::False => {}
            StateProp::Atom(a) => {
                for arg in &mut a.args {
                    if let ArgTerm::Var(v) = arg {
                        if let Some(n) = map.get(v) {
                            *v = n.clone();
                        }
                    }
                }
            }
            StateProp::Not(p) => p.rename(map),
            StateProp::And(a, b) | StateProp::Or(a, b) | StateProp::Implies(a, b) => {
                a.rename(map);
                b.rename(map);
            }
        }
    }
}

/// `var + offset`, or a plain constant when `var` is absent.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TimeTerm {
    pub var: Option<Ident>,
    pub offset: i64,
}

impl TimeTerm {
    pub fn var(v: Ident) -> Self {
        TimeTerm {
            var: Some(v),
            offset: 0,
        }
    }

    pub fn plus(v: Ident, offset: i64) -> Self {
        TimeTerm {
            var: Some(v),
            offset,
        }
    }

    pub fn constant(c: i64) -> Self {
        TimeTerm {
            var: None,
            offset: c,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum NumTerm {
    Var(Ident),
    Const(Rational64),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Time(TimeTerm),
    Num(NumTerm),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn apply<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// The operator whose truth value is the complement of this one.
    pub fn negated(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

/// What a quantified variable ranges over.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Domain {
    /// Time points in `[lo, hi]`; a missing `lo` is 0 and a missing `hi` is
    /// the trace horizon.
    Time {
        lo: Option<TimeTerm>,
        hi: Option<TimeTerm>,
    },
    /// Numbers occurring at the variable's atom positions in the traces.
    Num,
    /// The supplied trace set.
    Trace,
}

impl Domain {
    pub fn unbounded_time() -> Self {
        Domain::Time { lo: None, hi: None }
    }

    pub fn window(lo: TimeTerm, hi: TimeTerm) -> Self {
        Domain::Time {
            lo: Some(lo),
            hi: Some(hi),
        }
    }
}

/// A dynamic property in the reified temporal core.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum DynProp {
    True,
    False,
    Holds {
        /// `None` refers to the implicit trace under check.
        trace: Option<Ident>,
        time: TimeTerm,
        part: PartRef,
        prop: StateProp,
    },
    Cmp(Term, CmpOp, Term),
    Not(Box<DynProp>),
    And(Box<DynProp>, Box<DynProp>),
    Or(Box<DynProp>, Box<DynProp>),
    Implies(Box<DynProp>, Box<DynProp>),
    Quant {
        q: Quantifier,
        var: Ident,
        domain: Domain,
        body: Box<DynProp>,
    },
}

impl DynProp {
    pub fn holds(time: TimeTerm, part: PartRef, prop: StateProp) -> Self {
        DynProp::Holds {
            trace: None,
            time,
            part,
            prop,
        }
    }

    pub fn not(p: DynProp) -> Self {
        DynProp::Not(Box::new(p))
    }

    pub fn and(a: DynProp, b: DynProp) -> Self {
        DynProp::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: DynProp, b: DynProp) -> Self {
        DynProp::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: DynProp, b: DynProp) -> Self {
        DynProp::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(var: Ident, domain: Domain, body: DynProp) -> Self {
        DynProp::Quant {
            q: Quantifier::Forall,
            var,
            domain,
            body: Box::new(body),
        }
    }

    pub fn exists(var: Ident, domain: Domain, body: DynProp) -> Self {
        DynProp::Quant {
            q: Quantifier::Exists,
            var,
            domain,
            body: Box::new(body),
        }
    }

    /// Conjunction of a non-empty list, folded to the right; `True` when empty.
    pub fn conjunction(mut parts: Vec<DynProp>) -> DynProp {
        let Some(mut acc) = parts.pop() else {
            return DynProp::True;
        };
        while let Some(p) = parts.pop() {
            acc = DynProp::and(p, acc);
        }
        acc
    }

    /// True when any `Holds` names a trace variable.
    pub fn is_multi_trace(&self) -> bool {
        let mut found = false;
        self.for_each_holds(&mut |trace, _, _, _| found |= trace.is_some());
        found || self.any_quant(&|_, d| matches!(d, Domain::Trace))
    }

    fn any_quant(&self, pred: &impl Fn(Quantifier, &Domain) -> bool) -> bool {
        match self {
            DynProp::Quant {
                q, domain, body, ..
            } => pred(*q, domain) || body.any_quant(pred),
            DynProp::Not(p) => p.any_quant(pred),
            DynProp::And(a, b) | DynProp::Or(a, b) | DynProp::Implies(a, b) => {
                a.any_quant(pred) || b.any_quant(pred)
            }
            _ => false,
        }
    }

    /// Visits every `Holds` node, left to right.
    pub fn for_each_holds<'a>(
        &'a self,
        f: &mut impl FnMut(Option<&'a Ident>, &'a TimeTerm, &'a PartRef, &'a StateProp),
    ) {
        match self {
            DynProp::Holds {
                trace,
                time,
                part,
                prop,
            } => f(trace.as_ref(), time, part, prop),
            DynProp::Not(p) => p.for_each_holds(f),
            DynProp::And(a, b) | DynProp::Or(a, b) | DynProp::Implies(a, b) => {
                a.for_each_holds(f);
                b.for_each_holds(f);
            }
            DynProp::Quant { body, .. } => body.for_each_holds(f),
            DynProp::True | DynProp::False | DynProp::Cmp(..) => {}
        }
    }

    /// Rebuilds the formula with the part of every `Holds` replaced.
    pub fn try_map_parts<E>(
        &self,
        f: &mut impl FnMut(&PartRef, &StateProp) -> Result<PartRef, E>,
    ) -> Result<DynProp, E> {
        Ok(match self {
            DynProp::Holds {
                trace,
                time,
                part,
                prop,
            } => DynProp::Holds {
                trace: trace.clone(),
                time: time.clone(),
                part: f(part, prop)?,
                prop: prop.clone(),
            },
            DynProp::Not(p) => DynProp::not(p.try_map_parts(f)?),
            DynProp::And(a, b) => DynProp::and(a.try_map_parts(f)?, b.try_map_parts(f)?),
            DynProp::Or(a, b) => DynProp::or(a.try_map_parts(f)?, b.try_map_parts(f)?),
            DynProp::Implies(a, b) => DynProp::implies(a.try_map_parts(f)?, b.try_map_parts(f)?),
            DynProp::Quant {
                q,
                var,
                domain,
                body,
            } => DynProp::Quant {
                q: *q,
                var: var.clone(),
                domain: domain.clone(),
                body: Box::new(body.try_map_parts(f)?),
            },
            DynProp::True | DynProp::False | DynProp::Cmp(..) => self.clone(),
        })
    }

    /// Renames bound variables to `v0, v1, ...` in binding order and drops
    /// default `[0, horizon]` time bounds, so structurally equal formulas
    /// compare equal regardless of the names chosen.
    pub fn canonicalize(&self) -> DynProp {
        let mut counter = 0usize;
        self.canon(&BTreeMap::new(), &mut counter)
    }

    fn canon(&self, map: &BTreeMap<Ident, Ident>, counter: &mut usize) -> DynProp {
        let tt = |t: &TimeTerm| TimeTerm {
            var: t
                .var
                .as_ref()
                .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone())),
            offset: t.offset,
        };
        let term = |t: &Term| match t {
            Term::Time(t) => Term::Time(tt(t)),
            Term::Num(NumTerm::Var(v)) => Term::Num(NumTerm::Var(
                map.get(v).cloned().unwrap_or_else(|| v.clone()),
            )),
            Term::Num(c) => Term::Num(c.clone()),
        };
        match self {
            DynProp::True => DynProp::True,
            DynProp::False => DynProp::False,
            DynProp::Holds {
                trace,
                time,
                part,
                prop,
            } => {
                let mut prop = prop.clone();
                prop.rename(map);
                DynProp::Holds {
                    trace: trace
                        .as_ref()
                        .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone())),
                    time: tt(time),
                    part: part.clone(),
                    prop,
                }
            }
            DynProp::Cmp(a, op, b) => DynProp::Cmp(term(a), *op, term(b)),
            DynProp::Not(p) => DynProp::not(p.canon(map, counter)),
            DynProp::And(a, b) => DynProp::and(a.canon(map, counter), b.canon(map, counter)),
            DynProp::Or(a, b) => DynProp::or(a.canon(map, counter), b.canon(map, counter)),
            DynProp::Implies(a, b) => {
                DynProp::implies(a.canon(map, counter), b.canon(map, counter))
            }
            DynProp::Quant {
                q,
                var,
                domain,
                body,
            } => {
                let domain = match domain {
                    Domain::Time { lo, hi } => Domain::Time {
                        lo: lo.as_ref().map(&tt).filter(|t| *t != TimeTerm::constant(0)),
                        hi: hi.as_ref().map(&tt),
                    },
                    d => d.clone(),
                };
                let fresh = Ident::new(&format!("v{counter}")).expect("valid identifier");
                *counter += 1;
                let mut inner = map.clone();
                inner.insert(var.clone(), fresh.clone());
                DynProp::Quant {
                    q: *q,
                    var: fresh,
                    domain,
                    body: Box::new(body.canon(&inner, counter)),
                }
            }
        }
    }
}

impl fmt::Display for ArgTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgTerm::Sym(s) | ArgTerm::Var(s) => write!(f, "{s}"),
            ArgTerm::Num(r) => fmt_rational(r, f),
        }
    }
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for StateProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateProp::True => f.write_str("true"),
            StateProp::False => f.write_str("false"),
            StateProp::Atom(a) => write!(f, "{a}"),
            StateProp::Not(p) => write!(f, "not {p}"),
            StateProp::And(a, b) => write!(f, "({a} and {b})"),
            StateProp::Or(a, b) => write!(f, "({a} or {b})"),
            StateProp::Implies(a, b) => write!(f, "({a} => {b})"),
        }
    }
}

impl fmt::Display for TimeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.var, self.offset) {
            (None, c) => write!(f, "{c}"),
            (Some(v), 0) => write!(f, "{v}"),
            (Some(v), c) if c > 0 => write!(f, "{v}+{c}"),
            (Some(v), c) => write!(f, "{v}-{}", c.unsigned_abs()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Time(t) => write!(f, "{t}"),
            Term::Num(NumTerm::Var(v)) => write!(f, "{v}"),
            Term::Num(NumTerm::Const(c)) => fmt_rational(c, f),
        }
    }
}

impl fmt::Display for DynProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynProp::True => f.write_str("true"),
            DynProp::False => f.write_str("false"),
            DynProp::Holds {
                trace,
                time,
                part,
                prop,
            } => {
                f.write_str("holds")?;
                if let Some(g) = trace {
                    write!(f, "[{g}]")?;
                }
                write!(f, "({time}, {part}, {prop})")
            }
            DynProp::Cmp(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            DynProp::Not(p) => write!(f, "not {p}"),
            DynProp::And(a, b) => write!(f, "({a} and {b})"),
            DynProp::Or(a, b) => write!(f, "({a} or {b})"),
            DynProp::Implies(a, b) => write!(f, "({a} => {b})"),
            DynProp::Quant {
                q,
                var,
                domain,
                body,
            } => {
                let q = match q {
                    Quantifier::Forall => "forall",
                    Quantifier::Exists => "exists",
                };
                match domain {
                    Domain::Time { lo, hi } => {
                        write!(f, "({q} {var}")?;
                        if lo.is_some() || hi.is_some() {
                            let lo = lo.clone().unwrap_or(TimeTerm::constant(0));
                            match hi {
                                Some(hi) => write!(f, " in [{lo}, {hi}]")?,
                                None => write!(f, " in [{lo}, *]")?,
                            }
                        }
                    }
                    Domain::Num => write!(f, "({q} num {var}")?,
                    Domain::Trace => write!(f, "({q} trace {var}")?,
                }
                write!(f, ". {body})")
            }
        }
    }
}
