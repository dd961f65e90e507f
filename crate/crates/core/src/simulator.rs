//! Extraction of executable leads-to rules from dynamic properties and
//! time-stepped forward simulation.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{AgrDyn, Filing};
use crate::ident::Ident;
use crate::property::{ArgTerm, Domain, DynProp, Quantifier, StateProp, TimeTerm};
use crate::state::{Atom, Value};
use crate::structure::OrgStructure;
use crate::trace::{AtomicPart, StimuliSchedule, Trace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub part: AtomicPart,
    pub atom: Atom,
    pub positive: bool,
}

/// "If the antecedent holds at t, the consequent holds from some
/// t + d, d in [delay_min, delay_max], for `duration` steps."
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadsToRule {
    /// The property the rule was extracted from.
    pub id: Ident,
    pub filing: Filing,
    pub antecedent: Vec<Literal>,
    pub consequent: Vec<(AtomicPart, Atom)>,
    pub delay_min: u32,
    pub delay_max: u32,
    pub duration: u32,
}

impl fmt::Display for LeadsToRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ante: Vec<String> = self
            .antecedent
            .iter()
            .map(|l| {
                let neg = if l.positive { "" } else { "not " };
                format!("{neg}{}@{}", l.atom, l.part)
            })
            .collect();
        let cons: Vec<String> = self
            .consequent
            .iter()
            .map(|(p, a)| format!("{a}@{p}"))
            .collect();
        write!(
            f,
            "{}: {} -> [{},{}] x{} {}",
            self.id,
            ante.join(" & "),
            self.delay_min,
            self.delay_max,
            self.duration,
            cons.join(" & ")
        )
    }
}

/// A property left for post-hoc checking, with the reason it is not a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residue {
    pub id: Ident,
    pub reason: String,
}

fn ground(sp: &StateProp, positive_only: bool, out: &mut Vec<(Atom, bool)>) -> Result<(), String> {
    let atom_of = |a: &crate::property::AtomPattern| -> Result<Atom, String> {
        let args = a
            .args
            .iter()
            .map(|arg| match arg {
                ArgTerm::Sym(s) => Ok(Value::Sym(s.clone())),
                ArgTerm::Num(n) => Ok(Value::Num(*n)),
                ArgTerm::Var(v) => Err(format!("atom argument `{v}` is a variable")),
            })
            .collect::<Result<_, _>>()?;
        Ok(Atom::new(a.predicate.clone(), args))
    };
    match sp {
        StateProp::Atom(a) => out.push((atom_of(a)?, true)),
        StateProp::Not(inner) => match &**inner {
            StateProp::Atom(a) if !positive_only => out.push((atom_of(a)?, false)),
            StateProp::Atom(_) => return Err("negative consequent".into()),
            _ => return Err("negation of a compound state property".into()),
        },
        StateProp::And(a, b) => {
            ground(a, positive_only, out)?;
            ground(b, positive_only, out)?;
        }
        StateProp::True => {}
        _ => return Err("state property is not a conjunction of literals".into()),
    }
    Ok(())
}

fn conjuncts(p: &DynProp) -> Vec<&DynProp> {
    match p {
        DynProp::And(a, b) => {
            let mut v = conjuncts(a);
            v.extend(conjuncts(b));
            v
        }
        other => vec![other],
    }
}

/// Literals of `p` where every `Holds` is at `var + offset` on an atomic
/// part of the implicit trace.
fn holds_literals(
    p: &DynProp,
    var: &Ident,
    offset: i64,
    positive_only: bool,
) -> Result<Vec<Literal>, String> {
    let mut out = Vec::new();
    for c in conjuncts(p) {
        match c {
            DynProp::Holds {
                trace: None,
                time,
                part,
                prop,
            } => {
                if time.var.as_ref() != Some(var) || time.offset != offset {
                    return Err(format!("unexpected time term `{time}`"));
                }
                let part = part
                    .as_atomic()
                    .ok_or_else(|| format!("{part} is not an input or output part"))?;
                let mut atoms = Vec::new();
                ground(prop, positive_only, &mut atoms)?;
                out.extend(atoms.into_iter().map(|(atom, positive)| Literal {
                    part: part.clone(),
                    atom,
                    positive,
                }));
            }
            DynProp::True => {}
            _ => return Err("conjunct is not a state condition".into()),
        }
    }
    Ok(out)
}

fn is_window(domain: &Domain, var: &Ident) -> Option<(i64, i64)> {
    match domain {
        Domain::Time {
            lo:
                Some(TimeTerm {
                    var: Some(a),
                    offset: lo,
                }),
            hi:
                Some(TimeTerm {
                    var: Some(b),
                    offset: hi,
                }),
        } if a == var && b == var => Some((*lo, *hi)),
        _ => None,
    }
}

struct Shape {
    antecedent: Vec<Literal>,
    consequent: Vec<(AtomicPart, Atom)>,
    delay: (i64, i64),
    duration: i64,
}

fn positive_consequent(lits: Vec<Literal>) -> Vec<(AtomicPart, Atom)> {
    lits.into_iter().map(|l| (l.part, l.atom)).collect()
}

fn match_shape(p: &DynProp) -> Result<Shape, String> {
    let DynProp::Quant {
        q: Quantifier::Forall,
        var: t,
        domain: Domain::Time { lo, hi: None },
        body,
    } = p
    else {
        return Err("not of the form `forall t. ... => ...`".into());
    };
    if lo.as_ref().is_some_and(|lo| *lo != TimeTerm::constant(0)) {
        return Err("outer time quantifier is bounded".into());
    }
    let DynProp::Implies(ante, cons) = &**body else {
        return Err("body is not an implication".into());
    };
    let antecedent = holds_literals(ante, t, 0, false)?;
    if antecedent.is_empty() {
        return Err("empty antecedent".into());
    }
    let (delay, duration, consequent) = match &**cons {
        DynProp::Quant {
            q: Quantifier::Exists,
            var: t2,
            domain,
            body,
        } => {
            let (e, f) = is_window(domain, t).ok_or("consequent window is not relative to t")?;
            match &**body {
                DynProp::Quant {
                    q: Quantifier::Forall,
                    var: t3,
                    domain,
                    body,
                } => {
                    let (a, b) = is_window(domain, t2)
                        .ok_or("duration window is not relative to the consequent time")?;
                    if a != 0 || b < 0 {
                        return Err("duration window must start at the consequent time".into());
                    }
                    ((e, f), b + 1, holds_literals(body, t3, 0, true)?)
                }
                other => ((e, f), 1, holds_literals(other, t2, 0, true)?),
            }
        }
        DynProp::Quant {
            q: Quantifier::Forall,
            var: t3,
            domain,
            body,
        } => {
            let (a, b) = is_window(domain, t).ok_or("consequent window is not relative to t")?;
            ((a, a), b - a + 1, holds_literals(body, t3, 0, true)?)
        }
        other => {
            let first = conjuncts(other)
                .into_iter()
                .find_map(|c| match c {
                    DynProp::Holds { time, .. } => Some(time.offset),
                    _ => None,
                })
                .ok_or("consequent has no state condition")?;
            ((first, first), 1, holds_literals(other, t, first, true)?)
        }
    };
    if consequent.is_empty() {
        return Err("empty consequent".into());
    }
    let (e, f) = delay;
    if e < 0 || f < e || duration < 1 {
        return Err(format!(
            "delay [{e},{f}] with duration {duration} is not executable"
        ));
    }
    if f > i64::from(u32::MAX) || duration > i64::from(u32::MAX) {
        return Err("delay too large".into());
    }
    Ok(Shape {
        antecedent,
        consequent: positive_consequent(consequent),
        delay,
        duration,
    })
}

fn check_direction(org: &OrgStructure, filing: &Filing, shape: &Shape) -> Result<(), String> {
    let (from, to): (BTreeSet<AtomicPart>, BTreeSet<AtomicPart>) = match filing {
        Filing::Role(r) => (
            [AtomicPart::input(r.clone())].into(),
            [AtomicPart::output(r.clone())].into(),
        ),
        Filing::Transfer(t) => (
            org.transfer_sources(t)
                .into_iter()
                .map(|r| AtomicPart::output(r.clone()))
                .collect(),
            org.transfer_destinations(t)
                .into_iter()
                .map(|r| AtomicPart::input(r.clone()))
                .collect(),
        ),
        Filing::Interaction(i) => (
            org.interaction_sources(i)
                .into_iter()
                .map(|r| AtomicPart::input(r.clone()))
                .collect(),
            org.interaction_destinations(i)
                .into_iter()
                .map(|r| AtomicPart::output(r.clone()))
                .collect(),
        ),
        Filing::Group { .. } | Filing::Organisation => {
            return Err(format!("{filing} properties are checked, not executed"));
        }
    };
    if let Some(l) = shape.antecedent.iter().find(|l| !from.contains(&l.part)) {
        return Err(format!(
            "antecedent reads {}, outside the {filing} direction",
            l.part
        ));
    }
    if let Some((p, _)) = shape.consequent.iter().find(|(p, _)| !to.contains(p)) {
        return Err(format!(
            "consequent writes {p}, outside the {filing} direction"
        ));
    }
    Ok(())
}

/// Splits the properties of `dyn_` into executable rules (role, transfer and
/// intergroup interaction properties of leads-to shape) and a residue.
pub fn extract_executable(dyn_: &AgrDyn) -> (Vec<LeadsToRule>, Vec<Residue>) {
    let mut rules = Vec::new();
    let mut residue = Vec::new();
    for decl in dyn_.properties.values() {
        let shape = match &decl.filing {
            Filing::Group { .. } | Filing::Organisation => Err(format!(
                "{} properties are checked, not executed",
                decl.filing
            )),
            _ if decl.core.is_multi_trace() => Err("quantifies over traces".to_string()),
            _ => match_shape(&decl.core)
                .and_then(|s| check_direction(&dyn_.org, &decl.filing, &s).map(|_| s)),
        };
        match shape {
            Ok(s) => rules.push(LeadsToRule {
                id: decl.id.clone(),
                filing: decl.filing.clone(),
                antecedent: s.antecedent,
                consequent: s.consequent,
                delay_min: s.delay.0 as u32,
                delay_max: s.delay.1 as u32,
                duration: s.duration as u32,
            }),
            Err(reason) => residue.push(Residue {
                id: decl.id.clone(),
                reason,
            }),
        }
    }
    (rules, residue)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error("horizon must be non-negative, got {0}")]
    NegativeHorizon(i64),
    #[error("stimulus at time {time} lies beyond the horizon {horizon}")]
    StimulusOutOfRange { time: usize, horizon: usize },
    #[error("rule `{rule}` refers to {part}, which is not a part of a declared role")]
    UndeclaredPart { rule: Ident, part: AtomicPart },
    #[error("stimulus refers to {0}, which is not a part of a declared role")]
    UndeclaredStimulusPart(AtomicPart),
}

/// Runs the rules forward from the stimuli. Each step applies stimuli, then
/// fires every rule whose antecedent holds (at most once per step, in rule
/// order, repeating until zero-delay consequents stop adding atoms). Delays
/// are drawn uniformly with the seeded generator, or fixed at the minimum
/// when no seed is given. Atoms hold only where asserted.
pub fn simulate(
    org: &OrgStructure,
    rules: &[LeadsToRule],
    stimuli: &StimuliSchedule,
    horizon: i64,
    seed: Option<u64>,
) -> Result<Trace, SimulationError> {
    if horizon < 0 {
        return Err(SimulationError::NegativeHorizon(horizon));
    }
    let horizon = horizon as usize;
    for rule in rules {
        let parts = rule
            .antecedent
            .iter()
            .map(|l| &l.part)
            .chain(rule.consequent.iter().map(|(p, _)| p));
        for p in parts {
            if !org.roles.contains(&p.role) {
                return Err(SimulationError::UndeclaredPart {
                    rule: rule.id.clone(),
                    part: p.clone(),
                });
            }
        }
    }
    let mut by_time: Vec<Vec<(AtomicPart, Atom)>> = vec![Vec::new(); horizon + 1];
    for s in &stimuli.injections {
        if s.time > horizon {
            return Err(SimulationError::StimulusOutOfRange {
                time: s.time,
                horizon,
            });
        }
        if !org.roles.contains(&s.part.role) {
            return Err(SimulationError::UndeclaredStimulusPart(s.part.clone()));
        }
        by_time[s.time].push((s.part.clone(), s.atom.clone()));
    }
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut trace = Trace::new(stimuli.id.clone(), horizon);
    let mut fired = vec![false; rules.len()];
    for (t, injections) in by_time.into_iter().enumerate() {
        for (part, atom) in injections {
            trace.insert(t, part, atom).expect("time within horizon");
        }
        fired.iter_mut().for_each(|f| *f = false);
        loop {
            let mut changed = false;
            for (i, rule) in rules.iter().enumerate() {
                if fired[i] {
                    continue;
                }
                let active = rule
                    .antecedent
                    .iter()
                    .all(|l| trace.frame(t, &l.part).contains(&l.atom) == l.positive);
                if !active {
                    continue;
                }
                fired[i] = true;
                let delay = match &mut rng {
                    Some(rng) if rule.delay_max > rule.delay_min => {
                        rng.gen_range(rule.delay_min..=rule.delay_max)
                    }
                    _ => rule.delay_min,
                } as usize;
                for k in 0..rule.duration as usize {
                    let at = t + delay + k;
                    if at > horizon {
                        break;
                    }
                    for (part, atom) in &rule.consequent {
                        let new = trace
                            .insert(at, part.clone(), atom.clone())
                            .expect("time within horizon");
                        changed |= new && at == t;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    Ok(trace)
}
