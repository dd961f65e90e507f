//! Parts of an organisation, traces over them, and the line-oriented trace
//! and stimuli file formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ident::Ident;
use crate::state::{Atom, State, EMPTY_STATE};
use crate::structure::OrgStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Input,
    Output,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Input => "input",
            Side::Output => "output",
        })
    }
}

/// One of the two stateful interfaces of a role.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicPart {
    pub role: Ident,
    pub side: Side,
}

impl AtomicPart {
    pub fn input(role: Ident) -> Self {
        AtomicPart {
            role,
            side: Side::Input,
        }
    }

    pub fn output(role: Ident) -> Self {
        AtomicPart {
            role,
            side: Side::Output,
        }
    }
}

impl fmt::Display for AtomicPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Input => write!(f, "input({})", self.role),
            Side::Output => write!(f, "output({})", self.role),
        }
    }
}

impl fmt::Debug for AtomicPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<AtomicPart> for PartRef {
    fn from(p: AtomicPart) -> Self {
        match p.side {
            Side::Input => PartRef::Input(p.role),
            Side::Output => PartRef::Output(p.role),
        }
    }
}

/// A reference to a part of the organisation whose state can be inspected.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartRef {
    Input(Ident),
    Output(Ident),
    /// Input and output of a role together.
    Role(Ident),
    Group(Ident),
    Organisation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartError {
    #[error("unknown role `{0}`")]
    UnknownRole(Ident),
    #[error("unknown group `{0}`")]
    UnknownGroup(Ident),
}

impl PartRef {
    pub fn as_atomic(&self) -> Option<AtomicPart> {
        match self {
            PartRef::Input(r) => Some(AtomicPart::input(r.clone())),
            PartRef::Output(r) => Some(AtomicPart::output(r.clone())),
            _ => None,
        }
    }

    /// Expands the reference into the atomic parts it aggregates, in
    /// canonical order.
    pub fn atomic_parts(&self, org: &OrgStructure) -> Result<Vec<AtomicPart>, PartError> {
        let role_parts = |r: &Ident| [AtomicPart::input(r.clone()), AtomicPart::output(r.clone())];
        let known = |r: &Ident| {
            if org.roles.contains(r) {
                Ok(())
            } else {
                Err(PartError::UnknownRole(r.clone()))
            }
        };
        match self {
            PartRef::Input(r) | PartRef::Output(r) => {
                known(r)?;
                Ok(vec![self.as_atomic().expect("atomic")])
            }
            PartRef::Role(r) => {
                known(r)?;
                Ok(role_parts(r).to_vec())
            }
            PartRef::Group(g) => {
                if !org.groups.contains(g) {
                    return Err(PartError::UnknownGroup(g.clone()));
                }
                let roles: BTreeSet<&Ident> = org.roles_of_group(g).collect();
                Ok(roles.into_iter().flat_map(role_parts).collect())
            }
            PartRef::Organisation => Ok(org.roles.iter().flat_map(role_parts).collect()),
        }
    }
}

impl fmt::Display for PartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartRef::Input(r) => write!(f, "input({r})"),
            PartRef::Output(r) => write!(f, "output({r})"),
            PartRef::Role(r) => write!(f, "role({r})"),
            PartRef::Group(g) => write!(f, "group({g})"),
            PartRef::Organisation => f.write_str("organisation"),
        }
    }
}

impl fmt::Debug for PartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl std::str::FromStr for AtomicPart {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let (side, rest) = if let Some(rest) = s.strip_prefix("input(") {
            (Side::Input, rest)
        } else if let Some(rest) = s.strip_prefix("output(") {
            (Side::Output, rest)
        } else {
            return Err(());
        };
        let role = rest.strip_suffix(')').ok_or(())?;
        let role = Ident::new(role.trim()).map_err(|_| ())?;
        Ok(AtomicPart { role, side })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("time {time} is outside the trace horizon 0..={horizon}")]
    TimeOutOfRange { time: i64, horizon: usize },
    #[error(transparent)]
    Part(#[from] PartError),
}

/// A finite trace: for every time `0..=horizon` and every atomic part, the
/// set of true atoms. Parts or frames never written are empty.
#[derive(Clone, PartialEq, Eq)]
pub struct Trace {
    pub id: Ident,
    horizon: usize,
    timelines: BTreeMap<AtomicPart, Vec<State>>,
}

impl Trace {
    pub fn new(id: Ident, horizon: usize) -> Self {
        Trace {
            id,
            horizon,
            timelines: BTreeMap::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Marks `atom` true at `(t, part)`.
    pub fn insert(&mut self, t: usize, part: AtomicPart, atom: Atom) -> Result<bool, TraceError> {
        if t > self.horizon {
            return Err(TraceError::TimeOutOfRange {
                time: t as i64,
                horizon: self.horizon,
            });
        }
        let horizon = self.horizon;
        let line = self
            .timelines
            .entry(part)
            .or_insert_with(|| vec![State::new(); horizon + 1]);
        Ok(line[t].insert(atom))
    }

    /// The stored state of an atomic part; empty when nothing was recorded.
    pub fn frame(&self, t: usize, part: &AtomicPart) -> &State {
        self.timelines
            .get(part)
            .and_then(|line| line.get(t))
            .unwrap_or(&EMPTY_STATE)
    }

    pub fn timeline(&self, part: &AtomicPart) -> Option<&[State]> {
        self.timelines.get(part).map(Vec::as_slice)
    }

    /// Atomic parts with at least one recorded frame.
    pub fn parts(&self) -> impl Iterator<Item = &AtomicPart> {
        self.timelines.keys()
    }

    /// All true atoms in canonical `(time, part, atom)` order.
    pub fn entries(&self) -> Vec<(usize, &AtomicPart, &Atom)> {
        let mut out: Vec<(usize, &AtomicPart, &Atom)> = self
            .timelines
            .iter()
            .flat_map(|(part, line)| {
                line.iter()
                    .enumerate()
                    .flat_map(move |(t, s)| s.iter().map(move |a| (t, part, a)))
            })
            .collect();
        out.sort();
        out
    }

    /// Grows the horizon with empty frames; never shrinks it.
    pub fn extend_to(&mut self, horizon: usize) {
        if horizon <= self.horizon {
            return;
        }
        self.horizon = horizon;
        for line in self.timelines.values_mut() {
            line.resize(horizon + 1, State::new());
        }
    }

    /// Drops frames after `horizon`.
    pub fn truncate_to(&mut self, horizon: usize) {
        if horizon >= self.horizon {
            return;
        }
        self.horizon = horizon;
        for line in self.timelines.values_mut() {
            line.truncate(horizon + 1);
        }
        self.timelines
            .retain(|_, line| line.iter().any(|s| !s.is_empty()));
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", write_trace(self))
    }
}

/// The state of any part at time `t`. Aggregate parts yield the union of
/// their atomic parts.
pub fn state_at(
    trace: &Trace,
    t: i64,
    part: &PartRef,
    org: &OrgStructure,
) -> Result<State, TraceError> {
    if t < 0 || t as usize > trace.horizon {
        return Err(TraceError::TimeOutOfRange {
            time: t,
            horizon: trace.horizon,
        });
    }
    let mut state = State::new();
    for p in part.atomic_parts(org)? {
        state.union_with(trace.frame(t as usize, &p));
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn format_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// A timed assertion `t part atom`, shared by trace bodies and stimuli.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimedAtom {
    pub time: usize,
    pub part: AtomicPart,
    pub atom: Atom,
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_header<'a>(
    line: &'a str,
    keyword: &str,
    lineno: usize,
) -> Result<Vec<&'a str>, FormatError> {
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.first() != Some(&keyword) {
        return Err(format_err(lineno, format!("expected `{keyword}` header")));
    }
    Ok(words)
}

fn parse_timed_atom(line: &str, lineno: usize) -> Result<TimedAtom, FormatError> {
    let mut it = line.splitn(3, char::is_whitespace);
    let (Some(t), Some(part), Some(atom)) = (it.next(), it.next(), it.next()) else {
        return Err(format_err(lineno, "expected `<time> <part> <atom>`"));
    };
    let time: usize = t
        .parse()
        .map_err(|_| format_err(lineno, format!("bad time `{t}`")))?;
    let part: AtomicPart = part.parse().map_err(|_| {
        format_err(
            lineno,
            format!("bad part `{part}`, expected input(<role>) or output(<role>)"),
        )
    })?;
    let atom: Atom = atom
        .trim()
        .parse()
        .map_err(|e: crate::state::AtomSyntaxError| format_err(lineno, e.to_string()))?;
    Ok(TimedAtom { time, part, atom })
}

/// Parses the trace format: a `trace <id> horizon <T>` header followed by
/// `<t> <part> <atom>` lines listing the true atoms.
pub fn read_trace(text: &str) -> Result<Trace, FormatError> {
    let mut lines = meaningful_lines(text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| format_err(1, "empty trace file"))?;
    let words = parse_header(header, "trace", lineno)?;
    let [_, id, kw, horizon] = words.as_slice() else {
        return Err(format_err(lineno, "expected `trace <id> horizon <T>`"));
    };
    if *kw != "horizon" {
        return Err(format_err(lineno, "expected `trace <id> horizon <T>`"));
    }
    let id = Ident::new(id).map_err(|e| format_err(lineno, e.to_string()))?;
    let horizon: usize = horizon
        .parse()
        .map_err(|_| format_err(lineno, format!("bad horizon `{horizon}`")))?;
    let mut trace = Trace::new(id, horizon);
    for (lineno, line) in lines {
        let entry = parse_timed_atom(line, lineno)?;
        trace
            .insert(entry.time, entry.part, entry.atom)
            .map_err(|e| format_err(lineno, e.to_string()))?;
    }
    Ok(trace)
}

/// Canonical serialisation: entries sorted by time, part, then atom.
pub fn write_trace(trace: &Trace) -> String {
    let mut out = format!("trace {} horizon {}\n", trace.id, trace.horizon);
    for (t, part, atom) in trace.entries() {
        let _ = writeln!(out, "{t} {part} {atom}");
    }
    out
}

/// Inputs injected into a simulation at given times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimuliSchedule {
    pub id: Ident,
    pub injections: Vec<TimedAtom>,
}

/// Parses a `stimuli <id>` header followed by `<t> <part> <atom>` lines.
pub fn read_stimuli(text: &str) -> Result<StimuliSchedule, FormatError> {
    let mut lines = meaningful_lines(text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| format_err(1, "empty stimuli file"))?;
    let words = parse_header(header, "stimuli", lineno)?;
    let [_, id] = words.as_slice() else {
        return Err(format_err(lineno, "expected `stimuli <id>`"));
    };
    let id = Ident::new(id).map_err(|e| format_err(lineno, e.to_string()))?;
    let injections = lines
        .map(|(lineno, line)| parse_timed_atom(line, lineno))
        .collect::<Result<_, _>>()?;
    Ok(StimuliSchedule { id, injections })
}

pub fn write_stimuli(schedule: &StimuliSchedule) -> String {
    let mut out = format!("stimuli {}\n", schedule.id);
    let mut entries = schedule.injections.clone();
    entries.sort();
    for e in entries {
        let _ = writeln!(out, "{} {} {}", e.time, e.part, e.atom);
    }
    out
}
