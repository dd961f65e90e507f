//! Interlevel relations between properties of different aggregation levels:
//! assignments, connectedness and completeness, falsification on traces,
//! the proposition check and diagnosis down the AND-tree.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::dynamics::{AgrDyn, Filing};
use crate::ident::Ident;
use crate::property::{scope_of, Binding, CheckError, CompiledProperty, Outcome, Verdict};
use crate::structure::{involved_roles, Element};
use crate::trace::Trace;
use crate::violation::Violation;

pub mod rules {
    pub const UNKNOWN_PROPERTY: &str = "relation-unknown-property";
    pub const UNKNOWN_GROUP: &str = "relation-unknown-group";
    pub const CONSEQUENT_FILING: &str = "relation-consequent";
    pub const ANTECEDENT_FILING: &str = "relation-antecedent";
    pub const CYCLE: &str = "relation-cycle";
    pub const UNUSED_ANTECEDENT: &str = "unused-antecedent";
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    /// From role, transfer and intragroup properties to a property of the group.
    RoleGroup(Ident),
    /// From group, transfer and intergroup properties to an organisation property.
    GroupOrganisation,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationKind::RoleGroup(g) => write!(f, "group {g}"),
            RelationKind::GroupOrganisation => f.write_str("organisation"),
        }
    }
}

/// `con(antecedents) => consequent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterlevelRelation {
    pub id: Ident,
    pub kind: RelationKind,
    pub consequent: Ident,
    pub antecedents: Vec<Ident>,
}

impl fmt::Display for InterlevelRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ante: Vec<&str> = self.antecedents.iter().map(Ident::as_str).collect();
        write!(
            f,
            "relation {} for {} : {} <= {}",
            self.id,
            self.kind,
            self.consequent,
            ante.join(", ")
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterlevelAssignment {
    pub relations: Vec<InterlevelRelation>,
}

impl InterlevelAssignment {
    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Relations filed for one group, or for the organisation.
    pub fn relations_for<'a>(
        &'a self,
        kind: &'a RelationKind,
    ) -> impl Iterator<Item = &'a InterlevelRelation> + 'a {
        self.relations.iter().filter(move |r| &r.kind == kind)
    }

    pub fn relations_with_consequent<'a>(
        &'a self,
        id: &'a Ident,
    ) -> impl Iterator<Item = &'a InterlevelRelation> + 'a {
        self.relations.iter().filter(move |r| &r.consequent == id)
    }

    /// Every property id mentioned, in first-mention order.
    pub fn property_ids(&self) -> Vec<Ident> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.relations {
            for id in std::iter::once(&r.consequent).chain(&r.antecedents) {
                if seen.insert(id.clone()) {
                    out.push(id.clone());
                }
            }
        }
        out
    }

    pub fn mentions(&self, id: &Ident) -> bool {
        self.relations
            .iter()
            .any(|r| &r.consequent == id || r.antecedents.contains(id))
    }

    /// Consequent-to-antecedent edges as `(relation, consequent, antecedent)`.
    pub fn edges(&self) -> Vec<(&Ident, &Ident, &Ident)> {
        self.relations
            .iter()
            .flat_map(|r| r.antecedents.iter().map(move |a| (&r.id, &r.consequent, a)))
            .collect()
    }

    /// Properties that are consequents but not antecedents of any relation.
    pub fn roots(&self) -> Vec<Ident> {
        let antecedents: BTreeSet<&Ident> =
            self.relations.iter().flat_map(|r| &r.antecedents).collect();
        let mut seen = BTreeSet::new();
        self.relations
            .iter()
            .map(|r| &r.consequent)
            .filter(|c| !antecedents.contains(c) && seen.insert((*c).clone()))
            .cloned()
            .collect()
    }
}

fn transfer_within_group(dyn_: &AgrDyn, transfer: &Ident, group: &Ident) -> bool {
    let Ok(roles) = involved_roles(&dyn_.org, &Element::Transfer(transfer.clone())) else {
        return false;
    };
    let members: BTreeSet<&Ident> = dyn_.org.roles_of_group(group).collect();
    roles.iter().all(|r| members.contains(r))
}

fn filing_of<'a>(dyn_: &'a AgrDyn, id: &Ident) -> Option<&'a Filing> {
    dyn_.property(id.as_str()).map(|p| &p.filing)
}

/// The maximal assignment: every group property is implied by all role
/// properties of the group's roles and all transfer properties within the
/// group; every organisation property by all group, transfer and intergroup
/// interaction properties.
pub fn standard_assignment(dyn_: &AgrDyn) -> InterlevelAssignment {
    let mut relations = Vec::new();
    for group in &dyn_.org.groups {
        let members: BTreeSet<&Ident> = dyn_.org.roles_of_group(group).collect();
        let antecedents: Vec<Ident> = dyn_
            .properties
            .values()
            .filter(|p| match &p.filing {
                Filing::Role(r) => members.contains(r),
                Filing::Transfer(t) => transfer_within_group(dyn_, t, group),
                _ => false,
            })
            .map(|p| p.id.clone())
            .collect();
        for dp in dyn_.group_properties(group) {
            relations.push(InterlevelRelation {
                id: std_id(&dp.id),
                kind: RelationKind::RoleGroup(group.clone()),
                consequent: dp.id.clone(),
                antecedents: antecedents.clone(),
            });
        }
    }
    let antecedents: Vec<Ident> = dyn_
        .properties
        .values()
        .filter(|p| {
            matches!(
                p.filing,
                Filing::Group { .. } | Filing::Transfer(_) | Filing::Interaction(_)
            )
        })
        .map(|p| p.id.clone())
        .collect();
    for dp in dyn_.organisation_properties() {
        relations.push(InterlevelRelation {
            id: std_id(&dp.id),
            kind: RelationKind::GroupOrganisation,
            consequent: dp.id.clone(),
            antecedents: antecedents.clone(),
        });
    }
    InterlevelAssignment { relations }
}

fn std_id(consequent: &Ident) -> Ident {
    Ident::new(&format!("std_{consequent}")).expect("prefixing keeps identifiers valid")
}

/// Checks that each relation is filed consistently with the levels of its
/// properties and that the relations form an acyclic graph.
pub fn validate_assignment(a: &InterlevelAssignment, dyn_: &AgrDyn) -> Vec<Violation> {
    let mut out = Vec::new();
    for rel in &a.relations {
        if let RelationKind::RoleGroup(g) = &rel.kind {
            if !dyn_.org.groups.contains(g) {
                out.push(Violation::error(
                    rules::UNKNOWN_GROUP,
                    vec![rel.id.clone(), g.clone()],
                    format!("relation `{}` is filed for undeclared group `{g}`", rel.id),
                ));
                continue;
            }
        }
        for id in std::iter::once(&rel.consequent).chain(&rel.antecedents) {
            if dyn_.property(id.as_str()).is_none() {
                out.push(Violation::error(
                    rules::UNKNOWN_PROPERTY,
                    vec![rel.id.clone(), id.clone()],
                    format!("relation `{}` refers to undeclared property `{id}`", rel.id),
                ));
            }
        }
        let consequent_ok = match (&rel.kind, filing_of(dyn_, &rel.consequent)) {
            (_, None) => true,
            (RelationKind::RoleGroup(g), Some(Filing::Group { group, .. })) => g == group,
            (RelationKind::GroupOrganisation, Some(Filing::Organisation)) => true,
            _ => false,
        };
        if !consequent_ok {
            out.push(Violation::error(
                rules::CONSEQUENT_FILING,
                vec![rel.id.clone(), rel.consequent.clone()],
                format!(
                    "consequent `{}` of relation `{}` is not a property of {}",
                    rel.consequent, rel.id, rel.kind
                ),
            ));
        }
        for ante in &rel.antecedents {
            let ok = match (&rel.kind, filing_of(dyn_, ante)) {
                (_, None) => true,
                (RelationKind::RoleGroup(g), Some(Filing::Role(r))) => {
                    dyn_.org.role_in.contains(&(r.clone(), g.clone()))
                }
                (RelationKind::RoleGroup(g), Some(Filing::Transfer(t))) => {
                    transfer_within_group(dyn_, t, g)
                }
                (
                    RelationKind::RoleGroup(g),
                    Some(Filing::Group {
                        group,
                        intragroup: true,
                    }),
                ) => g == group,
                (RelationKind::RoleGroup(_), _) => false,
                (
                    RelationKind::GroupOrganisation,
                    Some(Filing::Group { .. } | Filing::Transfer(_) | Filing::Interaction(_)),
                ) => true,
                (RelationKind::GroupOrganisation, _) => false,
            };
            if !ok {
                out.push(Violation::error(
                    rules::ANTECEDENT_FILING,
                    vec![rel.id.clone(), ante.clone()],
                    format!(
                        "antecedent `{ante}` of relation `{}` is not permitted for {}",
                        rel.id, rel.kind
                    ),
                ));
            }
        }
    }
    if let Some(cycle) = find_cycle(a) {
        out.push(Violation::error(
            rules::CYCLE,
            cycle.clone(),
            format!(
                "relations form a cycle: {}",
                cycle
                    .iter()
                    .map(Ident::as_str)
                    .collect::<Vec<_>>()
                    .join(" <= ")
            ),
        ));
    }
    out
}

fn find_cycle(a: &InterlevelAssignment) -> Option<Vec<Ident>> {
    let mut succ: BTreeMap<&Ident, BTreeSet<&Ident>> = BTreeMap::new();
    for (_, c, ante) in a.edges() {
        succ.entry(c).or_default().insert(ante);
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        n: &'a Ident,
        succ: &BTreeMap<&'a Ident, BTreeSet<&'a Ident>>,
        marks: &mut BTreeMap<&'a Ident, Mark>,
        stack: &mut Vec<&'a Ident>,
    ) -> Option<Vec<Ident>> {
        match marks.get(n) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = stack.iter().position(|s| *s == n).expect("on stack");
                let mut cycle: Vec<Ident> = stack[start..].iter().map(|s| (*s).clone()).collect();
                cycle.push(n.clone());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(n, Mark::Active);
        stack.push(n);
        for s in succ.get(n).into_iter().flatten() {
            if let Some(c) = visit(s, succ, marks, stack) {
                return Some(c);
            }
        }
        stack.pop();
        marks.insert(n, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for n in succ.keys() {
        if let Some(c) = visit(n, &succ, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

/// Whether a check passed, and which properties made it fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub ok: bool,
    pub missing: Vec<Ident>,
}

impl CoverageReport {
    fn from_missing(missing: Vec<Ident>) -> Self {
        CoverageReport {
            ok: missing.is_empty(),
            missing,
        }
    }
}

/// Connected: every group property that occurs as an antecedent is the
/// consequent of some relation of its own group.
pub fn check_connected(a: &InterlevelAssignment, dyn_: &AgrDyn) -> CoverageReport {
    let mut missing = Vec::new();
    let mut seen = BTreeSet::new();
    for rel in &a.relations {
        for ante in &rel.antecedents {
            let Some(Filing::Group { group, .. }) = filing_of(dyn_, ante) else {
                continue;
            };
            let kind = RelationKind::RoleGroup(group.clone());
            let covered = a.relations_for(&kind).any(|r| &r.consequent == ante);
            if !covered && seen.insert(ante.clone()) {
                missing.push(ante.clone());
            }
        }
    }
    CoverageReport::from_missing(missing)
}

/// Complete: every group and organisation property is the consequent of
/// some relation.
pub fn check_complete(a: &InterlevelAssignment, dyn_: &AgrDyn) -> CoverageReport {
    let consequents: BTreeSet<&Ident> = a.relations.iter().map(|r| &r.consequent).collect();
    let missing = dyn_
        .properties
        .values()
        .filter(|p| matches!(p.filing, Filing::Group { .. } | Filing::Organisation))
        .filter(|p| !consequents.contains(&p.id))
        .map(|p| p.id.clone())
        .collect();
    CoverageReport::from_missing(missing)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterlevelError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("checking `{id}`: {source}")]
    Check { id: Ident, source: CheckError },
    #[error("property `{0}` does not occur in the assignment")]
    NotInTree(Ident),
    #[error("property `{id}` does not fail on this trace (it {outcome})")]
    NotFailing { id: Ident, outcome: Outcome },
}

/// Verdicts of properties on individual traces, computed once.
#[derive(Debug, Clone, Default)]
pub struct Verdicts {
    trace_ids: Vec<Ident>,
    map: HashMap<(Ident, usize), Verdict>,
}

impl Verdicts {
    /// Checks each listed property on each trace separately.
    pub fn compute<T: Borrow<Trace>>(
        dyn_: &AgrDyn,
        ids: &[Ident],
        traces: &[T],
    ) -> Result<Self, InterlevelError> {
        let mut map = HashMap::new();
        for id in ids {
            let decl = dyn_
                .property(id.as_str())
                .ok_or_else(|| InterlevelError::UnknownProperty(id.to_string()))?;
            let compiled = CompiledProperty::new(&decl.core, &dyn_.org).map_err(|source| {
                InterlevelError::Check {
                    id: id.clone(),
                    source,
                }
            })?;
            for (i, tr) in traces.iter().enumerate() {
                let v =
                    compiled
                        .check(&[tr.borrow()])
                        .map_err(|source| InterlevelError::Check {
                            id: id.clone(),
                            source,
                        })?;
                map.insert((id.clone(), i), v);
            }
        }
        Ok(Verdicts {
            trace_ids: traces.iter().map(|t| t.borrow().id.clone()).collect(),
            map,
        })
    }

    /// Builds a table from verdicts computed elsewhere.
    pub fn from_parts(trace_ids: Vec<Ident>, map: HashMap<(Ident, usize), Verdict>) -> Self {
        Verdicts { trace_ids, map }
    }

    pub fn get(&self, id: &Ident, trace: usize) -> Option<&Verdict> {
        self.map.get(&(id.clone(), trace))
    }

    pub fn outcome(&self, id: &Ident, trace: usize) -> Option<Outcome> {
        self.get(id, trace).map(|v| v.outcome)
    }

    pub fn trace_count(&self) -> usize {
        self.trace_ids.len()
    }

    pub fn trace_id(&self, i: usize) -> &Ident {
        &self.trace_ids[i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationVerdict {
    NotFalsified,
    /// Every antecedent holds on the trace and the consequent fails.
    Falsified {
        trace: Ident,
        witness: Vec<Binding>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationOutcome {
    pub relation: Ident,
    pub verdict: RelationVerdict,
}

/// Searches the traces for counterexamples to each relation.
pub fn falsify_on_traces<T: Borrow<Trace>>(
    a: &InterlevelAssignment,
    dyn_: &AgrDyn,
    traces: &[T],
) -> Result<Vec<RelationOutcome>, InterlevelError> {
    let verdicts = Verdicts::compute(dyn_, &a.property_ids(), traces)?;
    Ok(falsify_with(a, &verdicts))
}

/// As [`falsify_on_traces`], over precomputed verdicts.
pub fn falsify_with(a: &InterlevelAssignment, verdicts: &Verdicts) -> Vec<RelationOutcome> {
    a.relations
        .iter()
        .map(|rel| {
            let falsified = (0..verdicts.trace_count()).find_map(|i| {
                let all_hold = rel
                    .antecedents
                    .iter()
                    .all(|ante| verdicts.outcome(ante, i) == Some(Outcome::Holds));
                let consequent = verdicts.get(&rel.consequent, i)?;
                (all_hold && consequent.fails()).then(|| RelationVerdict::Falsified {
                    trace: verdicts.trace_id(i).clone(),
                    witness: consequent.witness.clone(),
                })
            });
            RelationOutcome {
                relation: rel.id.clone(),
                verdict: falsified.unwrap_or(RelationVerdict::NotFalsified),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartResult {
    pub confirmed: bool,
    /// Properties the proposition predicts to hold that do not.
    pub violations: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropositionReport {
    NotApplicable {
        reason: String,
    },
    Applicable {
        /// Every group property in the assignment holds.
        part_a: PartResult,
        /// Every group and organisation property holds; only when the
        /// assignment is complete.
        part_b: Option<PartResult>,
    },
}

impl PropositionReport {
    pub fn is_applicable(&self) -> bool {
        matches!(self, PropositionReport::Applicable { .. })
    }
}

/// Checks the proposition on one trace: when all role, transfer and
/// intergroup properties hold and no relation is falsified, the group
/// properties of a connected assignment hold, and with a complete
/// assignment so do all group and organisation properties.
pub fn verify_proposition(
    dyn_: &AgrDyn,
    a: &InterlevelAssignment,
    trace: &Trace,
) -> Result<PropositionReport, InterlevelError> {
    let ids: Vec<Ident> = dyn_.properties.keys().cloned().collect();
    let verdicts = Verdicts::compute(dyn_, &ids, &[trace])?;
    Ok(verify_proposition_with(dyn_, a, &verdicts, 0))
}

/// As [`verify_proposition`], over precomputed verdicts that cover every
/// declared property on trace `trace`.
pub fn verify_proposition_with(
    dyn_: &AgrDyn,
    a: &InterlevelAssignment,
    verdicts: &Verdicts,
    trace: usize,
) -> PropositionReport {
    let connected = check_connected(a, dyn_);
    if !connected.ok {
        return PropositionReport::NotApplicable {
            reason: format!(
                "assignment is not connected (missing {})",
                join(&connected.missing)
            ),
        };
    }
    let not_holding = |pred: &dyn Fn(&Filing) -> bool| -> Vec<Ident> {
        dyn_.properties
            .values()
            .filter(|p| pred(&p.filing))
            .filter(|p| verdicts.outcome(&p.id, trace) != Some(Outcome::Holds))
            .map(|p| p.id.clone())
            .collect()
    };
    let leaves = not_holding(&|f| {
        matches!(
            f,
            Filing::Role(_) | Filing::Transfer(_) | Filing::Interaction(_)
        )
    });
    if !leaves.is_empty() {
        return PropositionReport::NotApplicable {
            reason: format!("leaf properties do not hold: {}", join(&leaves)),
        };
    }
    let single = Verdicts {
        trace_ids: vec![verdicts.trace_id(trace).clone()],
        map: verdicts
            .map
            .iter()
            .filter(|((_, i), _)| *i == trace)
            .map(|((id, _), v)| ((id.clone(), 0), v.clone()))
            .collect(),
    };
    let falsified: Vec<Ident> = falsify_with(a, &single)
        .into_iter()
        .filter(|o| o.verdict != RelationVerdict::NotFalsified)
        .map(|o| o.relation)
        .collect();
    if !falsified.is_empty() {
        return PropositionReport::NotApplicable {
            reason: format!("relations falsified on this trace: {}", join(&falsified)),
        };
    }
    let in_assignment: BTreeSet<Ident> = a.property_ids().into_iter().collect();
    let part_a = not_holding(&|f| matches!(f, Filing::Group { .. }))
        .into_iter()
        .filter(|id| in_assignment.contains(id))
        .collect::<Vec<_>>();
    let part_b = check_complete(a, dyn_)
        .ok
        .then(|| not_holding(&|f| matches!(f, Filing::Group { .. } | Filing::Organisation)));
    let result = |violations: Vec<Ident>| PartResult {
        confirmed: violations.is_empty(),
        violations,
    };
    PropositionReport::Applicable {
        part_a: result(part_a),
        part_b: part_b.map(result),
    }
}

fn join(ids: &[Ident]) -> String {
    ids.iter().map(Ident::as_str).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Finding {
    /// A property without relations below it that fails.
    FailingLeaf(Ident),
    /// A relation whose consequent fails although every antecedent holds.
    FalsifiedRelation { relation: Ident, consequent: Ident },
    /// A relation whose consequent fails while some antecedents are
    /// undetermined and none fails.
    Undetermined { relation: Ident, consequent: Ident },
}

impl Finding {
    pub fn subject(&self) -> &Ident {
        match self {
            Finding::FailingLeaf(id) => id,
            Finding::FalsifiedRelation { consequent, .. }
            | Finding::Undetermined { consequent, .. } => consequent,
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::FailingLeaf(id) => write!(f, "failing leaf {id}"),
            Finding::FalsifiedRelation {
                relation,
                consequent,
            } => write!(
                f,
                "relation {relation} falsified: {consequent} fails while its antecedents hold"
            ),
            Finding::Undetermined {
                relation,
                consequent,
            } => write!(
                f,
                "relation {relation}: {consequent} fails while some antecedents are undetermined"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnosis {
    pub findings: BTreeSet<Finding>,
    /// One path of failing properties from the starting node to each finding.
    pub paths: Vec<Vec<Ident>>,
}

impl Diagnosis {
    pub fn leaves(&self) -> BTreeSet<Ident> {
        self.findings
            .iter()
            .filter_map(|f| match f {
                Finding::FailingLeaf(id) => Some(id.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Descends the AND-tree from a failing property into every failing
/// antecedent, collecting failing leaves and falsified relations.
pub fn diagnose(
    a: &InterlevelAssignment,
    dyn_: &AgrDyn,
    trace: &Trace,
    failing: &Ident,
) -> Result<Diagnosis, InterlevelError> {
    let verdicts = Verdicts::compute(dyn_, &a.property_ids(), &[trace])?;
    diagnose_with(a, &verdicts, 0, failing)
}

/// As [`diagnose`], over precomputed verdicts.
pub fn diagnose_with(
    a: &InterlevelAssignment,
    verdicts: &Verdicts,
    trace: usize,
    failing: &Ident,
) -> Result<Diagnosis, InterlevelError> {
    if !a.mentions(failing) {
        return Err(InterlevelError::NotInTree(failing.clone()));
    }
    let outcome = verdicts
        .outcome(failing, trace)
        .ok_or_else(|| InterlevelError::UnknownProperty(failing.to_string()))?;
    if outcome != Outcome::Fails {
        return Err(InterlevelError::NotFailing {
            id: failing.clone(),
            outcome,
        });
    }
    let mut diag = Diagnosis {
        findings: BTreeSet::new(),
        paths: Vec::new(),
    };
    let mut visited = BTreeSet::new();
    let mut path = Vec::new();
    descend(
        a,
        verdicts,
        trace,
        failing,
        &mut visited,
        &mut path,
        &mut diag,
    );
    Ok(diag)
}

fn descend(
    a: &InterlevelAssignment,
    verdicts: &Verdicts,
    trace: usize,
    node: &Ident,
    visited: &mut BTreeSet<Ident>,
    path: &mut Vec<Ident>,
    diag: &mut Diagnosis,
) {
    if !visited.insert(node.clone()) {
        return;
    }
    path.push(node.clone());
    let relations: Vec<&InterlevelRelation> = a.relations_with_consequent(node).collect();
    if relations.is_empty() {
        diag.findings.insert(Finding::FailingLeaf(node.clone()));
        diag.paths.push(path.clone());
    }
    for rel in relations {
        let failing: Vec<&Ident> = rel
            .antecedents
            .iter()
            .filter(|ante| verdicts.outcome(ante, trace) == Some(Outcome::Fails))
            .collect();
        if failing.is_empty() {
            let all_hold = rel
                .antecedents
                .iter()
                .all(|ante| verdicts.outcome(ante, trace) == Some(Outcome::Holds));
            let finding = if all_hold {
                Finding::FalsifiedRelation {
                    relation: rel.id.clone(),
                    consequent: node.clone(),
                }
            } else {
                Finding::Undetermined {
                    relation: rel.id.clone(),
                    consequent: node.clone(),
                }
            };
            diag.findings.insert(finding);
            diag.paths.push(path.clone());
        }
        for ante in failing {
            descend(a, verdicts, trace, ante, visited, path, diag);
        }
    }
    path.pop();
}

/// Flags antecedents that share no predicates, directly or through other
/// antecedents, with their relation's consequent.
pub fn lint_unused_antecedents(a: &InterlevelAssignment, dyn_: &AgrDyn) -> Vec<Violation> {
    let preds = |id: &Ident| -> BTreeSet<Ident> {
        dyn_.property(id.as_str())
            .and_then(|p| scope_of(&p.core, &dyn_.org).ok())
            .map(|s| s.into_values().flatten().collect())
            .unwrap_or_default()
    };
    let mut out = Vec::new();
    for rel in &a.relations {
        let mut reached = preds(&rel.consequent);
        let mut pending: Vec<(&Ident, BTreeSet<Ident>)> =
            rel.antecedents.iter().map(|id| (id, preds(id))).collect();
        loop {
            let before = pending.len();
            pending.retain(|(_, p)| {
                if p.is_disjoint(&reached) {
                    true
                } else {
                    reached.extend(p.iter().cloned());
                    false
                }
            });
            if pending.len() == before {
                break;
            }
        }
        for (id, _) in pending {
            out.push(Violation::warning(
                rules::UNUSED_ANTECEDENT,
                vec![rel.id.clone(), id.clone()],
                format!(
                    "antecedent `{id}` of relation `{}` shares no vocabulary with `{}`",
                    rel.id, rel.consequent
                ),
            ));
        }
    }
    out
}

/// Indented rendering of the AND-tree, optionally annotated with outcomes.
pub fn render_tree(
    a: &InterlevelAssignment,
    annotate: &dyn Fn(&Ident) -> Option<Outcome>,
) -> String {
    fn node(
        a: &InterlevelAssignment,
        id: &Ident,
        depth: usize,
        annotate: &dyn Fn(&Ident) -> Option<Outcome>,
        stack: &mut Vec<Ident>,
        out: &mut String,
    ) {
        let pad = "  ".repeat(depth);
        let tag = annotate(id).map(|o| format!(" [{o}]")).unwrap_or_default();
        let _ = writeln!(out, "{pad}{id}{tag}");
        if stack.contains(id) {
            return;
        }
        stack.push(id.clone());
        for rel in a.relations_with_consequent(id) {
            let _ = writeln!(out, "{pad}  <= {}", rel.id);
            for ante in &rel.antecedents {
                node(a, ante, depth + 2, annotate, stack, out);
            }
        }
        stack.pop();
    }
    let mut out = String::new();
    for root in a.roots() {
        node(a, &root, 0, annotate, &mut Vec::new(), &mut out);
    }
    out
}

/// Machine-readable adjacency: one `edge <relation> <consequent> <antecedent>`
/// line per antecedent.
pub fn render_edges(a: &InterlevelAssignment) -> String {
    let mut out = String::new();
    for (rel, c, ante) in a.edges() {
        let _ = writeln!(out, "edge {rel} {c} {ante}");
    }
    out
}
