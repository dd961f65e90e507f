//! Agents fulfilling roles: allocation checks, agent-level properties and
//! their refutation against role, interaction and transfer properties.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::dynamics::AgrDyn;
use crate::ident::Ident;
use crate::property::{
    scope::typecheck_state_prop, Binding, CheckError, CompiledProperty, DynProp, Outcome, Property,
    StateProp,
};
use crate::state::Ontology;
use crate::structure::{involved_roles, Element};
use crate::trace::{AtomicPart, PartRef, Side, Trace};
use crate::violation::Violation;

pub mod rules {
    pub const UNKNOWN_AGENT: &str = "unknown-agent";
    pub const UNKNOWN_ROLE: &str = "unknown-role";
    pub const MULTI_AGENT_ROLE: &str = "multi-agent-role";
    pub const ONTOLOGY_INCLUSION: &str = "ontology-inclusion";
    pub const INTERGROUP_SINGLE_AGENT: &str = "intergroup-single-agent";
    pub const UNFULFILLED_ROLE: &str = "unfulfilled-role";
    pub const SELF_COMMUNICATION: &str = "self-communication";
    pub const AGENT_PROPERTY_SCOPE: &str = "agent-property-scope";
    pub const AGENT_PROPERTY_ONTOLOGY: &str = "agent-property-ontology";
}

/// Agents and the roles they fulfil.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Realization {
    pub agents: BTreeSet<Ident>,
    /// `(agent, role)`
    pub fulfils: BTreeSet<(Ident, Ident)>,
}

impl Realization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fulfil(&mut self, agent: Ident, role: Ident) {
        self.agents.insert(agent.clone());
        self.fulfils.insert((agent, role));
    }

    pub fn roles_of<'a>(&'a self, agent: &'a Ident) -> impl Iterator<Item = &'a Ident> + 'a {
        self.fulfils
            .iter()
            .filter(move |(a, _)| a == agent)
            .map(|(_, r)| r)
    }

    pub fn agents_of<'a>(&'a self, role: &'a Ident) -> impl Iterator<Item = &'a Ident> + 'a {
        self.fulfils
            .iter()
            .filter(move |(_, r)| r == role)
            .map(|(a, _)| a)
    }

    pub fn fulfils(&self, agent: &Ident, role: &Ident) -> bool {
        self.fulfils.contains(&(agent.clone(), role.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Agent(Ident),
    /// Communication from one agent's output to another agent's input.
    Comm {
        from: Ident,
        to: Ident,
    },
}

impl Owner {
    fn agents(&self) -> Vec<&Ident> {
        match self {
            Owner::Agent(a) => vec![a],
            Owner::Comm { from, to } => vec![from, to],
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Agent(a) => write!(f, "agent {a}"),
            Owner::Comm { from, to } => write!(f, "from {from} to {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPropertyDecl {
    pub id: Ident,
    pub owner: Owner,
    pub source: Property,
    pub core: DynProp,
}

impl AgentPropertyDecl {
    pub fn new(id: Ident, owner: Owner, source: Property) -> Self {
        let core = source.to_dyn();
        AgentPropertyDecl {
            id,
            owner,
            source,
            core,
        }
    }
}

/// Agent interface ontologies and agent-level properties.
#[derive(Debug, Clone, Default)]
pub struct RealizationDyn {
    pub input_ontologies: BTreeMap<Ident, Ontology>,
    pub output_ontologies: BTreeMap<Ident, Ontology>,
    /// In declaration order.
    pub properties: IndexMap<Ident, AgentPropertyDecl>,
}

impl RealizationDyn {
    pub fn add_property(&mut self, decl: AgentPropertyDecl) {
        self.properties.insert(decl.id.clone(), decl);
    }

    pub fn agent_properties<'a>(
        &'a self,
        agent: &'a Ident,
    ) -> impl Iterator<Item = &'a AgentPropertyDecl> + 'a {
        self.properties
            .values()
            .filter(move |p| matches!(&p.owner, Owner::Agent(a) if a == agent))
    }

    pub fn comm_properties<'a>(
        &'a self,
        from: &'a Ident,
        to: &'a Ident,
    ) -> impl Iterator<Item = &'a AgentPropertyDecl> + 'a {
        self.properties.values().filter(
            move |p| matches!(&p.owner, Owner::Comm { from: f, to: t } if f == from && t == to),
        )
    }

    pub fn interface_ontology(&self, agent: &Ident, side: Side) -> Ontology {
        let map = match side {
            Side::Input => &self.input_ontologies,
            Side::Output => &self.output_ontologies,
        };
        map.get(agent).cloned().unwrap_or_default()
    }
}

/// How agent ontologies must relate to the ontologies of fulfilled roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InclusionMode {
    /// Missing predicates are errors.
    #[default]
    Strict,
    /// Missing predicates are warnings.
    Overlap,
}

/// Checks the allocation against the structure, the role ontologies and
/// the requirement that intergroup interactions are realised by one agent.
pub fn validate_realization(
    dyn_: &AgrDyn,
    real: &Realization,
    rdyn: &RealizationDyn,
    mode: InclusionMode,
) -> Vec<Violation> {
    let org = &dyn_.org;
    let mut out = Vec::new();
    for (agent, role) in &real.fulfils {
        if !real.agents.contains(agent) {
            out.push(Violation::error(
                rules::UNKNOWN_AGENT,
                vec![agent.clone()],
                format!("`{agent}` fulfils `{role}` but is not a declared agent"),
            ));
        }
        if !org.roles.contains(role) {
            out.push(Violation::error(
                rules::UNKNOWN_ROLE,
                vec![agent.clone(), role.clone()],
                format!("agent `{agent}` fulfils undeclared role `{role}`"),
            ));
        }
    }
    let owners = rdyn
        .input_ontologies
        .keys()
        .chain(rdyn.output_ontologies.keys())
        .chain(rdyn.properties.values().flat_map(|p| p.owner.agents()));
    let mut reported = BTreeSet::new();
    for agent in owners {
        if !real.agents.contains(agent) && reported.insert(agent) {
            out.push(Violation::error(
                rules::UNKNOWN_AGENT,
                vec![agent.clone()],
                format!("`{agent}` has ontologies or properties but is not a declared agent"),
            ));
        }
    }

    for role in &org.roles {
        let agents: Vec<&Ident> = real.agents_of(role).collect();
        if agents.len() > 1 {
            let mut subjects = vec![role.clone()];
            subjects.extend(agents.iter().map(|a| (*a).clone()));
            out.push(Violation::error(
                rules::MULTI_AGENT_ROLE,
                subjects,
                format!(
                    "role `{role}` is fulfilled by several agents ({})",
                    join(agents.iter().copied())
                ),
            ));
        }
        if agents.is_empty() && !dyn_.role_properties(role).is_empty() {
            out.push(Violation::warning(
                rules::UNFULFILLED_ROLE,
                vec![role.clone()],
                format!("role `{role}` has dynamic properties but no agent fulfils it"),
            ));
        }
    }

    for (agent, role) in &real.fulfils {
        if !org.roles.contains(role) {
            continue;
        }
        for side in [Side::Input, Side::Output] {
            let role_ont = dyn_.interface_ontology(&AtomicPart {
                role: role.clone(),
                side,
            });
            let agent_ont = rdyn.interface_ontology(agent, side);
            for pred in role_ont.missing_from(&agent_ont) {
                let message = format!(
                    "{side} ontology of agent `{agent}` lacks `{pred}` required by role `{role}`"
                );
                let subjects = vec![agent.clone(), role.clone(), pred];
                out.push(match mode {
                    InclusionMode::Strict => {
                        Violation::error(rules::ONTOLOGY_INCLUSION, subjects, message)
                    }
                    InclusionMode::Overlap => {
                        Violation::warning(rules::ONTOLOGY_INCLUSION, subjects, message)
                    }
                });
            }
        }
    }

    for i in &org.interactions {
        let Ok(roles) = involved_roles(org, &Element::Interaction(i.clone())) else {
            continue;
        };
        if single_agent_for(real, &roles).is_none() {
            out.push(Violation::error(
                rules::INTERGROUP_SINGLE_AGENT,
                std::iter::once(i.clone())
                    .chain(roles.iter().cloned())
                    .collect(),
                format!(
                    "roles of intergroup interaction `{i}` ({}) are not all fulfilled by one agent",
                    join(roles.iter())
                ),
            ));
        }
    }

    for t in &org.transfers {
        let Some((src, dst)) = org.transfer_endpoints(t) else {
            continue;
        };
        for agent in real.agents_of(src) {
            if real.fulfils(agent, dst) && rdyn.comm_properties(agent, agent).next().is_none() {
                out.push(Violation::error(
                    rules::SELF_COMMUNICATION,
                    vec![agent.clone(), t.clone()],
                    format!(
                        "agent `{agent}` fulfils both ends of transfer `{t}` but has no communication property from itself to itself"
                    ),
                ));
            }
        }
    }

    for decl in rdyn.properties.values() {
        check_agent_property(decl, real, rdyn, &mut out);
    }
    out
}

fn single_agent_for<'a>(real: &'a Realization, roles: &BTreeSet<Ident>) -> Option<&'a Ident> {
    real.agents
        .iter()
        .find(|a| roles.iter().all(|r| real.fulfils(a, r)))
}

fn check_agent_property(
    decl: &AgentPropertyDecl,
    real: &Realization,
    rdyn: &RealizationDyn,
    out: &mut Vec<Violation>,
) {
    let allowed = decl.owner.agents();
    let mut scope_errors = BTreeSet::new();
    let mut ontology_errors = BTreeSet::new();
    decl.core
        .for_each_holds(&mut |_, _, part, sp| match part.as_atomic() {
            Some(ap) if allowed.contains(&&ap.role) => {
                if real.agents.contains(&ap.role) {
                    if let Err(e) =
                        typecheck_state_prop(sp, &rdyn.interface_ontology(&ap.role, ap.side))
                    {
                        ontology_errors.insert(format!("at {ap}: {e}"));
                    }
                }
            }
            _ => {
                scope_errors.insert(part.to_string());
            }
        });
    for part in scope_errors {
        out.push(Violation::error(
            rules::AGENT_PROPERTY_SCOPE,
            vec![decl.id.clone()],
            format!(
                "property `{}` of {} refers to `{part}`, which is not an interface of its agents",
                decl.id, decl.owner
            ),
        ));
    }
    for err in ontology_errors {
        out.push(Violation::error(
            rules::AGENT_PROPERTY_ONTOLOGY,
            vec![decl.id.clone()],
            format!("property `{}` of {}: {err}", decl.id, decl.owner),
        ));
    }
}

fn join<'a>(ids: impl Iterator<Item = &'a Ident>) -> String {
    ids.map(Ident::as_str).collect::<Vec<_>>().join(", ")
}

/// One resolved agent interface reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Alias {
    pub property: Ident,
    pub agent_part: AtomicPart,
    pub predicate: Option<Ident>,
    pub role_part: AtomicPart,
}

impl fmt::Display for Alias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pred = self.predicate.as_ref().map_or("*", Ident::as_str);
        write!(
            f,
            "{} {} {pred} -> {}",
            self.property, self.agent_part, self.role_part
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizationError {
    #[error(
        "property `{property}`: no role fulfilled by the agent covers `{predicate}` at {part}"
    )]
    UnboundAlias {
        property: Ident,
        part: AtomicPart,
        predicate: String,
    },
    #[error("property `{property}`: `{predicate}` at {part} could refer to roles {roles}")]
    AmbiguousAlias {
        property: Ident,
        part: AtomicPart,
        predicate: String,
        roles: String,
    },
    #[error("property `{property}` refers to `{part}`, which is not an agent interface")]
    UnsupportedPart { property: Ident, part: String },
    #[error("checking `{id}`: {source}")]
    Check { id: Ident, source: CheckError },
}

/// Rewrites agent interfaces into the interfaces of the fulfilled roles
/// whose ontologies declare the predicates used there.
pub fn alias_property(
    decl: &AgentPropertyDecl,
    dyn_: &AgrDyn,
    real: &Realization,
) -> Result<(DynProp, Vec<Alias>), RealizationError> {
    let mut aliases = BTreeSet::new();
    let core = decl.core.try_map_parts(&mut |part, sp| {
        let ap = part
            .as_atomic()
            .filter(|ap| real.agents.contains(&ap.role))
            .ok_or_else(|| RealizationError::UnsupportedPart {
                property: decl.id.clone(),
                part: part.to_string(),
            })?;
        let (role, predicate) = resolve(decl, dyn_, real, &ap, sp)?;
        let role_part = AtomicPart {
            role,
            side: ap.side,
        };
        aliases.insert(Alias {
            property: decl.id.clone(),
            agent_part: ap.clone(),
            predicate,
            role_part: role_part.clone(),
        });
        Ok(match ap.side {
            Side::Input => PartRef::Input(role_part.role),
            Side::Output => PartRef::Output(role_part.role),
        })
    })?;
    Ok((core, aliases.into_iter().collect()))
}

fn resolve(
    decl: &AgentPropertyDecl,
    dyn_: &AgrDyn,
    real: &Realization,
    ap: &AtomicPart,
    sp: &StateProp,
) -> Result<(Ident, Option<Ident>), RealizationError> {
    let mut preds = BTreeSet::new();
    sp.for_each_atom(&mut |a| {
        preds.insert(a.predicate.clone());
    });
    let roles: Vec<&Ident> = real.roles_of(&ap.role).collect();
    let candidates = |pred: Option<&Ident>| -> Vec<&Ident> {
        roles
            .iter()
            .copied()
            .filter(|r| {
                pred.map_or(true, |p| {
                    dyn_.interface_ontology(&AtomicPart {
                        role: (*r).clone(),
                        side: ap.side,
                    })
                    .contains(p.as_str())
                })
            })
            .collect()
    };
    let pick = |pred: Option<&Ident>| -> Result<&Ident, RealizationError> {
        let found = candidates(pred);
        let label = pred.map_or_else(|| "true".to_string(), Ident::to_string);
        match found.as_slice() {
            [r] => Ok(*r),
            [] => Err(RealizationError::UnboundAlias {
                property: decl.id.clone(),
                part: ap.clone(),
                predicate: label,
            }),
            many => Err(RealizationError::AmbiguousAlias {
                property: decl.id.clone(),
                part: ap.clone(),
                predicate: label,
                roles: join(many.iter().copied()),
            }),
        }
    };
    if preds.is_empty() {
        return Ok((pick(None)?.clone(), None));
    }
    let mut chosen: Option<&Ident> = None;
    for p in &preds {
        let r = pick(Some(p))?;
        if let Some(prev) = chosen.filter(|prev| *prev != r) {
            return Err(RealizationError::AmbiguousAlias {
                property: decl.id.clone(),
                part: ap.clone(),
                predicate: join(preds.iter()),
                roles: join([prev, r].into_iter()),
            });
        }
        chosen = Some(r);
    }
    let role = chosen.expect("nonempty predicate set").clone();
    let single = (preds.len() == 1).then(|| preds.into_iter().next().expect("one"));
    Ok((role, single))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntailmentVerdict {
    NotRefuted,
    /// A trace on which every antecedent holds and the consequent fails.
    Refuted {
        trace: Ident,
        witness: Vec<Binding>,
    },
}

/// Refutes `antecedents |= consequent` for each consequent: a trace refutes
/// it when every antecedent holds there and the consequent fails.
pub fn check_entailment_on_traces<T: Borrow<Trace>>(
    org: &crate::structure::OrgStructure,
    antecedents: &[(Ident, DynProp)],
    consequents: &[(Ident, DynProp)],
    traces: &[T],
) -> Result<Vec<(Ident, EntailmentVerdict)>, RealizationError> {
    let compile = |(id, p): &(Ident, DynProp)| {
        CompiledProperty::new(p, org)
            .map(|c| (id.clone(), c))
            .map_err(|source| RealizationError::Check {
                id: id.clone(),
                source,
            })
    };
    let ante: Vec<_> = antecedents.iter().map(compile).collect::<Result<_, _>>()?;
    let cons: Vec<_> = consequents.iter().map(compile).collect::<Result<_, _>>()?;
    let mut verdicts: Vec<(Ident, EntailmentVerdict)> = cons
        .iter()
        .map(|(id, _)| (id.clone(), EntailmentVerdict::NotRefuted))
        .collect();
    for tr in traces {
        let tr = tr.borrow();
        let mut all_hold = true;
        for (id, c) in &ante {
            let v = c.check(&[tr]).map_err(|source| RealizationError::Check {
                id: id.clone(),
                source,
            })?;
            if v.outcome != Outcome::Holds {
                all_hold = false;
                break;
            }
        }
        if !all_hold {
            continue;
        }
        for ((id, c), slot) in cons.iter().zip(verdicts.iter_mut()) {
            if slot.1 != EntailmentVerdict::NotRefuted {
                continue;
            }
            let v = c.check(&[tr]).map_err(|source| RealizationError::Check {
                id: id.clone(),
                source,
            })?;
            if v.fails() {
                slot.1 = EntailmentVerdict::Refuted {
                    trace: tr.id.clone(),
                    witness: v.witness,
                };
            }
        }
    }
    Ok(verdicts)
}

/// Which realisation relationship an entailment check instantiates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Schema {
    AgentRole {
        agent: Ident,
        role: Ident,
    },
    AgentInteraction {
        agent: Ident,
        interaction: Ident,
    },
    CommTransfer {
        from: Ident,
        to: Ident,
        transfer: Ident,
    },
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schema::AgentRole { agent, role } => write!(f, "agent {agent} -> role {role}"),
            Schema::AgentInteraction { agent, interaction } => {
                write!(f, "agent {agent} -> interaction {interaction}")
            }
            Schema::CommTransfer { from, to, transfer } => {
                write!(f, "communication {from} -> {to} -> transfer {transfer}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentResult {
    pub schema: Schema,
    pub consequent: Ident,
    pub verdict: EntailmentVerdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntailmentReport {
    pub results: Vec<EntailmentResult>,
    pub aliases: Vec<Alias>,
}

impl EntailmentReport {
    pub fn refuted(&self) -> impl Iterator<Item = &EntailmentResult> {
        self.results
            .iter()
            .filter(|r| r.verdict != EntailmentVerdict::NotRefuted)
    }
}

/// Runs the agent-to-role, agent-to-interaction and communication-to-transfer
/// checks on the given traces.
pub fn check_realization<T: Borrow<Trace>>(
    dyn_: &AgrDyn,
    real: &Realization,
    rdyn: &RealizationDyn,
    traces: &[T],
) -> Result<EntailmentReport, RealizationError> {
    let org = &dyn_.org;
    let mut aliased: BTreeMap<Ident, DynProp> = BTreeMap::new();
    let mut aliases = Vec::new();
    for decl in rdyn.properties.values() {
        let (core, table) = alias_property(decl, dyn_, real)?;
        aliased.insert(decl.id.clone(), core);
        aliases.extend(table);
    }
    let pick = |decls: Vec<&AgentPropertyDecl>| -> Vec<(Ident, DynProp)> {
        decls
            .into_iter()
            .map(|d| (d.id.clone(), aliased[&d.id].clone()))
            .collect()
    };
    let role_level = |decls: Vec<&crate::dynamics::PropertyDecl>| -> Vec<(Ident, DynProp)> {
        decls
            .into_iter()
            .map(|d| (d.id.clone(), d.core.clone()))
            .collect()
    };

    let mut jobs: Vec<(Schema, Vec<(Ident, DynProp)>, Vec<(Ident, DynProp)>)> = Vec::new();
    for (agent, role) in &real.fulfils {
        let cons = role_level(dyn_.role_properties(role));
        if !cons.is_empty() {
            jobs.push((
                Schema::AgentRole {
                    agent: agent.clone(),
                    role: role.clone(),
                },
                pick(rdyn.agent_properties(agent).collect()),
                cons,
            ));
        }
    }
    for i in &org.interactions {
        let Ok(roles) = involved_roles(org, &Element::Interaction(i.clone())) else {
            continue;
        };
        let cons = role_level(dyn_.interaction_properties(i));
        if cons.is_empty() {
            continue;
        }
        if let Some(agent) = single_agent_for(real, &roles) {
            jobs.push((
                Schema::AgentInteraction {
                    agent: agent.clone(),
                    interaction: i.clone(),
                },
                pick(rdyn.agent_properties(agent).collect()),
                cons,
            ));
        }
    }
    for t in &org.transfers {
        let Some((src, dst)) = org.transfer_endpoints(t) else {
            continue;
        };
        let cons = role_level(dyn_.transfer_properties(t));
        if cons.is_empty() {
            continue;
        }
        for a in real.agents_of(src) {
            for b in real.agents_of(dst) {
                jobs.push((
                    Schema::CommTransfer {
                        from: a.clone(),
                        to: b.clone(),
                        transfer: t.clone(),
                    },
                    pick(rdyn.comm_properties(a, b).collect()),
                    cons.clone(),
                ));
            }
        }
    }

    let mut results = Vec::new();
    for (schema, ante, cons) in jobs {
        for (consequent, verdict) in check_entailment_on_traces(org, &ante, &cons, traces)? {
            results.push(EntailmentResult {
                schema: schema.clone(),
                consequent,
                verdict,
            });
        }
    }
    Ok(EntailmentReport { results, aliases })
}
