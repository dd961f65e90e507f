//! Ground atoms, state ontologies and closed-world states.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::ident::{is_ident_start, Ident};

/// An atom argument: a symbol or an exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Num(Rational64),
    Sym(Ident),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Num(Rational64::from_integer(n))
    }

    pub fn kind(&self) -> ArgKind {
        match self {
            Value::Num(_) => ArgKind::Number,
            Value::Sym(_) => ArgKind::Symbol,
        }
    }
}

pub(crate) fn fmt_rational(r: &Rational64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(r) => fmt_rational(r, f),
            Value::Sym(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A ground atom `pred(a1, ..., ak)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Ident,
    pub args: Vec<Value>,
}

impl Atom {
    pub fn new(predicate: Ident, args: Vec<Value>) -> Self {
        Atom { predicate, args }
    }

    pub fn nullary(predicate: Ident) -> Self {
        Atom {
            predicate,
            args: Vec::new(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed atom `{text}`: {reason}")]
pub struct AtomSyntaxError {
    pub text: String,
    pub reason: &'static str,
}

impl std::str::FromStr for Atom {
    type Err = AtomSyntaxError;

    /// Parses `pred` or `pred(a1,...,ak)`; whitespace around arguments is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| AtomSyntaxError {
            text: s.to_string(),
            reason,
        };
        let s = s.trim();
        let (name, rest) = match s.find('(') {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let predicate = Ident::new(name.trim()).map_err(|_| err("bad predicate name"))?;
        let Some(rest) = rest else {
            return Ok(Atom::nullary(predicate));
        };
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| err("missing closing parenthesis"))?;
        if inner.contains(['(', ')']) {
            return Err(err("nested parentheses"));
        }
        let mut args = Vec::new();
        for part in inner.split(',') {
            args.push(parse_value(part.trim()).ok_or_else(|| err("bad argument"))?);
        }
        Ok(Atom::new(predicate, args))
    }
}

/// Parses a symbol, an integer, or a rational `p/q`.
pub fn parse_value(text: &str) -> Option<Value> {
    let mut chars = text.chars();
    let first = chars.next()?;
    if is_ident_start(first) {
        return Ident::new(text).ok().map(Value::Sym);
    }
    parse_rational(text).map(Value::Num)
}

pub fn parse_rational(text: &str) -> Option<Rational64> {
    let int = |t: &str| -> Option<i64> {
        let digits = t.strip_prefix('-').unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        t.parse().ok()
    };
    match text.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (int(p)?, int(q)?);
            if q <= 0 {
                return None;
            }
            Some(Rational64::new(p, q))
        }
        None => int(text).map(Rational64::from_integer),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArgKind {
    Symbol,
    Number,
    /// Declared by arity only (`pred/2`); either kind is accepted.
    Any,
}

impl ArgKind {
    pub fn accepts(self, actual: ArgKind) -> bool {
        self == ArgKind::Any || self == actual
    }
}

impl fmt::Display for ArgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgKind::Symbol => "sym",
            ArgKind::Number => "num",
            ArgKind::Any => "any",
        })
    }
}

/// A predicate signature: per-argument kinds (the arity is their count).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub kinds: Vec<ArgKind>,
}

impl Signature {
    pub fn arity(&self) -> usize {
        self.kinds.len()
    }

    /// Whether `self` can stand in for `other`: same arity, and every
    /// argument kind of `other` is accepted here.
    pub fn covers(&self, other: &Signature) -> bool {
        self.arity() == other.arity()
            && self
                .kinds
                .iter()
                .zip(&other.kinds)
                .all(|(mine, theirs)| *mine == ArgKind::Any || mine == theirs)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kinds.iter().all(|k| *k == ArgKind::Any) {
            return write!(f, "/{}", self.arity());
        }
        f.write_str("(")?;
        for (i, k) in self.kinds.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error(
        "predicate `{predicate}` declared twice with different signatures ({first} vs {second})"
    )]
    ConflictingSignature {
        predicate: Ident,
        first: Signature,
        second: Signature,
    },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(Ident),
    #[error("predicate `{predicate}` expects {expected} arguments, got {actual}")]
    Arity {
        predicate: Ident,
        expected: usize,
        actual: usize,
    },
    #[error("argument {position} of `{predicate}` must be {expected}, got {actual}")]
    Kind {
        predicate: Ident,
        position: usize,
        expected: ArgKind,
        actual: ArgKind,
    },
}

/// A vocabulary: predicate names with their signatures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    signatures: BTreeMap<Ident, Signature>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a predicate; re-declaring it with the same signature is a no-op.
    pub fn declare(&mut self, predicate: Ident, signature: Signature) -> Result<(), OntologyError> {
        match self.signatures.entry(predicate) {
            Entry::Vacant(e) => {
                e.insert(signature);
                Ok(())
            }
            Entry::Occupied(e) if *e.get() == signature => Ok(()),
            Entry::Occupied(e) => Err(OntologyError::ConflictingSignature {
                predicate: e.key().clone(),
                first: e.get().clone(),
                second: signature,
            }),
        }
    }

    pub fn merge(&mut self, other: &Ontology) -> Result<(), OntologyError> {
        for (p, s) in &other.signatures {
            self.declare(p.clone(), s.clone())?;
        }
        Ok(())
    }

    pub fn get(&self, predicate: &str) -> Option<&Signature> {
        self.signatures.get(predicate)
    }

    pub fn contains(&self, predicate: &str) -> bool {
        self.signatures.contains_key(predicate)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &Ident> {
        self.signatures.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Signature)> {
        self.signatures.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    /// Predicates of `self` that `other` lacks or declares incompatibly.
    pub fn missing_from(&self, other: &Ontology) -> Vec<Ident> {
        self.signatures
            .iter()
            .filter(|(p, s)| other.get(p.as_str()).map_or(true, |o| !o.covers(s)))
            .map(|(p, _)| p.clone())
            .collect()
    }

    pub fn overlaps(&self, other: &Ontology) -> bool {
        self.signatures.keys().any(|p| other.contains(p.as_str()))
    }

    pub fn check_atom(&self, atom: &Atom) -> Result<(), OntologyError> {
        let sig = self
            .get(atom.predicate.as_str())
            .ok_or_else(|| OntologyError::UnknownPredicate(atom.predicate.clone()))?;
        check_args(&atom.predicate, sig, atom.args.iter().map(Value::kind))
    }
}

pub(crate) fn check_args(
    predicate: &Ident,
    sig: &Signature,
    kinds: impl ExactSizeIterator<Item = ArgKind>,
) -> Result<(), OntologyError> {
    if kinds.len() != sig.arity() {
        return Err(OntologyError::Arity {
            predicate: predicate.clone(),
            expected: sig.arity(),
            actual: kinds.len(),
        });
    }
    for (position, (expected, actual)) in sig.kinds.iter().zip(kinds).enumerate() {
        if !expected.accepts(actual) {
            return Err(OntologyError::Kind {
                predicate: predicate.clone(),
                position,
                expected: *expected,
                actual,
            });
        }
    }
    Ok(())
}

/// A state: the set of true ground atoms; every other atom is false.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(BTreeSet<Atom>);

pub(crate) static EMPTY_STATE: State = State(BTreeSet::new());

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union_with(&mut self, other: &State) {
        self.0.extend(other.0.iter().cloned());
    }

    /// Numeric values at `position` of atoms with `predicate`.
    pub fn numbers_at<'a>(
        &'a self,
        predicate: &'a Ident,
        position: usize,
    ) -> impl Iterator<Item = Rational64> + 'a {
        self.0
            .iter()
            .filter(move |a| &a.predicate == predicate)
            .filter_map(move |a| match a.args.get(position) {
                Some(Value::Num(r)) => Some(*r),
                _ => None,
            })
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}
