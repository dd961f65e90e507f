//! The indexed linear-time surface dialect and its translation into the
//! reified core.

use std::fmt;

use crate::ident::Ident;
use crate::property::ast::{Domain, DynProp, StateProp, TimeTerm};
use crate::trace::PartRef;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ModalOp {
    /// Currently.
    C,
    /// Next.
    X,
    /// At some time in the future.
    F,
    /// Always in the future.
    G,
    /// At some time in the past.
    P,
    /// Always in the past.
    H,
}

impl ModalOp {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "C" => ModalOp::C,
            "X" => ModalOp::X,
            "F" => ModalOp::F,
            "G" => ModalOp::G,
            "P" => ModalOp::P,
            "H" => ModalOp::H,
            _ => return None,
        })
    }

    pub fn accepts_constraint(self) -> bool {
        matches!(self, ModalOp::F | ModalOp::G | ModalOp::P | ModalOp::H)
    }
}

/// Bound on the distance between the current time and the witnessing time.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TimeConstraint {
    Lt(u32),
    Le(u32),
    Eq(u32),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum LtlProp {
    True,
    False,
    Modal {
        op: ModalOp,
        constraint: Option<TimeConstraint>,
        part: PartRef,
        prop: StateProp,
    },
    Not(Box<LtlProp>),
    And(Box<LtlProp>, Box<LtlProp>),
    Or(Box<LtlProp>, Box<LtlProp>),
    Implies(Box<LtlProp>, Box<LtlProp>),
}

impl LtlProp {
    pub fn modal(
        op: ModalOp,
        constraint: Option<TimeConstraint>,
        part: PartRef,
        prop: StateProp,
    ) -> Self {
        LtlProp::Modal {
            op,
            constraint,
            part,
            prop,
        }
    }
}

fn var(n: usize) -> Ident {
    Ident::new(&format!("t{n}")).expect("valid identifier")
}

/// Translates an LTL formula into the core. The current time is a variable
/// `t0` universally quantified over the whole trace; each modal operator
/// introduces its own time variable where it needs one.
pub fn compile_ltl(prop: &LtlProp) -> DynProp {
    let mut next = 1;
    DynProp::forall(
        var(0),
        Domain::unbounded_time(),
        compile_at(prop, &var(0), &mut next),
    )
}

/// Translates relative to an already bound current-time variable `now`.
pub fn compile_at(prop: &LtlProp, now: &Ident, next: &mut usize) -> DynProp {
    match prop {
        LtlProp::True => DynProp::True,
        LtlProp::False => DynProp::False,
        LtlProp::Not(p) => DynProp::not(compile_at(p, now, next)),
        LtlProp::And(a, b) => DynProp::and(compile_at(a, now, next), compile_at(b, now, next)),
        LtlProp::Or(a, b) => DynProp::or(compile_at(a, now, next), compile_at(b, now, next)),
        LtlProp::Implies(a, b) => {
            DynProp::implies(compile_at(a, now, next), compile_at(b, now, next))
        }
        LtlProp::Modal {
            op,
            constraint,
            part,
            prop,
        } => {
            let at = |offset: i64| {
                DynProp::holds(
                    TimeTerm::plus(now.clone(), offset),
                    part.clone(),
                    prop.clone(),
                )
            };
            let c = |n: u32| i64::from(n);
            let future = matches!(op, ModalOp::F | ModalOp::G);
            let domain = match (op, constraint) {
                (ModalOp::C, _) => return at(0),
                (ModalOp::X, _) => return at(1),
                (_, Some(TimeConstraint::Eq(n))) => {
                    return at(if future { c(*n) } else { -c(*n) });
                }
                (_, Some(TimeConstraint::Lt(n))) if future => Domain::window(
                    TimeTerm::var(now.clone()),
                    TimeTerm::plus(now.clone(), c(*n) - 1),
                ),
                (_, Some(TimeConstraint::Le(n))) if future => Domain::window(
                    TimeTerm::var(now.clone()),
                    TimeTerm::plus(now.clone(), c(*n)),
                ),
                (_, None) if future => Domain::Time {
                    lo: Some(TimeTerm::var(now.clone())),
                    hi: None,
                },
                (_, Some(TimeConstraint::Lt(n))) => Domain::window(
                    TimeTerm::plus(now.clone(), 1 - c(*n)),
                    TimeTerm::var(now.clone()),
                ),
                (_, Some(TimeConstraint::Le(n))) => Domain::window(
                    TimeTerm::plus(now.clone(), -c(*n)),
                    TimeTerm::var(now.clone()),
                ),
                (_, None) => Domain::window(TimeTerm::constant(0), TimeTerm::var(now.clone())),
            };
            let v = var(*next);
            *next += 1;
            let body = DynProp::holds(TimeTerm::var(v.clone()), part.clone(), prop.clone());
            match op {
                ModalOp::F | ModalOp::P => DynProp::exists(v, domain, body),
                _ => DynProp::forall(v, domain, body),
            }
        }
    }
}

impl fmt::Display for ModalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModalOp::C => "C",
            ModalOp::X => "X",
            ModalOp::F => "F",
            ModalOp::G => "G",
            ModalOp::P => "P",
            ModalOp::H => "H",
        };
        f.write_str(s)
    }
}

impl fmt::Display for TimeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeConstraint::Lt(n) => write!(f, "<{n}"),
            TimeConstraint::Le(n) => write!(f, "<={n}"),
            TimeConstraint::Eq(n) => write!(f, "={n}"),
        }
    }
}

impl fmt::Display for LtlProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtlProp::True => f.write_str("true"),
            LtlProp::False => f.write_str("false"),
            LtlProp::Modal {
                op,
                constraint,
                part,
                prop,
            } => {
                write!(f, "{op}")?;
                if let Some(c) = constraint {
                    write!(f, "[{c}]")?;
                }
                write!(f, "[{part}]({prop})")
            }
            LtlProp::Not(p) => write!(f, "not {p}"),
            LtlProp::And(a, b) => write!(f, "({a} and {b})"),
            LtlProp::Or(a, b) => write!(f, "({a} or {b})"),
            LtlProp::Implies(a, b) => write!(f, "({a} => {b})"),
        }
    }
}
