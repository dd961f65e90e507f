//! AGR organisation structures: groups, roles, intragroup transfers and
//! intergroup interactions, plus the line/staff authority annotations.

mod authority;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ident::Ident;
use crate::violation::Violation;

pub use authority::{line_authority_closure, AuthorityAnnotations, AuthorityError, RoleType};

/// Rule identifiers reported by [`validate_structure`].
pub mod rules {
    pub const ROLE_WITHOUT_GROUP: &str = "role-without-group";
    pub const UNDECLARED_ROLE: &str = "undeclared-role";
    pub const UNDECLARED_GROUP: &str = "undeclared-group";
    pub const UNDECLARED_TRANSFER: &str = "undeclared-transfer";
    pub const UNDECLARED_INTERACTION: &str = "undeclared-interaction";
    pub const TRANSFER_SOURCE_ARITY: &str = "transfer-source-arity";
    pub const TRANSFER_DESTINATION_ARITY: &str = "transfer-destination-arity";
    pub const TRANSFER_CROSS_GROUP: &str = "transfer-cross-group";
    pub const INTERACTION_SOURCE_ARITY: &str = "interaction-source-arity";
    pub const INTERACTION_DESTINATION_ARITY: &str = "interaction-destination-arity";
    pub const INTERACTION_SAME_GROUP: &str = "interaction-same-group";
    pub const UNDECLARED_TASK: &str = "undeclared-task";
    pub const SUPERIOR_CYCLE: &str = "superior-cycle";
}

/// The structure tuple: four identifier sets and five relations over them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrgStructure {
    pub name: Option<Ident>,
    pub groups: BTreeSet<Ident>,
    pub roles: BTreeSet<Ident>,
    pub transfers: BTreeSet<Ident>,
    pub interactions: BTreeSet<Ident>,
    /// `(role, group)`
    pub role_in: BTreeSet<(Ident, Ident)>,
    /// `(role, transfer)`
    pub source_of_transfer: BTreeSet<(Ident, Ident)>,
    pub destination_of_transfer: BTreeSet<(Ident, Ident)>,
    /// `(role, interaction)`
    pub source_of_interaction: BTreeSet<(Ident, Ident)>,
    pub destination_of_interaction: BTreeSet<(Ident, Ident)>,
}

/// An element of the structure that involves roles.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Group(Ident),
    Transfer(Ident),
    Interaction(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("unknown {kind} `{name}`")]
    UnknownIdentifier { kind: &'static str, name: Ident },
}

impl OrgStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_group<I>(&mut self, group: Ident, roles: I)
    where
        I: IntoIterator<Item = Ident>,
    {
        for role in roles {
            self.roles.insert(role.clone());
            self.role_in.insert((role, group.clone()));
        }
        self.groups.insert(group);
    }

    pub fn add_transfer(&mut self, transfer: Ident, source: Ident, destination: Ident) {
        self.source_of_transfer.insert((source, transfer.clone()));
        self.destination_of_transfer
            .insert((destination, transfer.clone()));
        self.transfers.insert(transfer);
    }

    pub fn add_interaction(&mut self, interaction: Ident, source: Ident, destination: Ident) {
        self.source_of_interaction
            .insert((source, interaction.clone()));
        self.destination_of_interaction
            .insert((destination, interaction.clone()));
        self.interactions.insert(interaction);
    }

    pub fn roles_of_group<'a>(&'a self, group: &'a Ident) -> impl Iterator<Item = &'a Ident> + 'a {
        self.role_in
            .iter()
            .filter(move |(_, g)| g == group)
            .map(|(r, _)| r)
    }

    pub fn groups_of_role<'a>(&'a self, role: &'a Ident) -> impl Iterator<Item = &'a Ident> + 'a {
        self.role_in
            .iter()
            .filter(move |(r, _)| r == role)
            .map(|(_, g)| g)
    }

    pub fn share_group(&self, a: &Ident, b: &Ident) -> bool {
        let ga: BTreeSet<&Ident> = self.groups_of_role(a).collect();
        self.groups_of_role(b).any(|g| ga.contains(g))
    }

    pub fn transfer_sources(&self, transfer: &Ident) -> Vec<&Ident> {
        related(&self.source_of_transfer, transfer)
    }

    pub fn transfer_destinations(&self, transfer: &Ident) -> Vec<&Ident> {
        related(&self.destination_of_transfer, transfer)
    }

    pub fn interaction_sources(&self, interaction: &Ident) -> Vec<&Ident> {
        related(&self.source_of_interaction, interaction)
    }

    pub fn interaction_destinations(&self, interaction: &Ident) -> Vec<&Ident> {
        related(&self.destination_of_interaction, interaction)
    }

    /// The unique `(source, destination)` pair of a transfer, if it has one.
    pub fn transfer_endpoints(&self, transfer: &Ident) -> Option<(&Ident, &Ident)> {
        single_pair(
            self.transfer_sources(transfer),
            self.transfer_destinations(transfer),
        )
    }

    pub fn interaction_endpoints(&self, interaction: &Ident) -> Option<(&Ident, &Ident)> {
        single_pair(
            self.interaction_sources(interaction),
            self.interaction_destinations(interaction),
        )
    }

    /// Looks up an identifier among groups, transfers and interactions.
    pub fn element(&self, name: &Ident) -> Option<Element> {
        if self.groups.contains(name) {
            Some(Element::Group(name.clone()))
        } else if self.transfers.contains(name) {
            Some(Element::Transfer(name.clone()))
        } else if self.interactions.contains(name) {
            Some(Element::Interaction(name.clone()))
        } else {
            None
        }
    }
}

fn related<'a>(relation: &'a BTreeSet<(Ident, Ident)>, element: &Ident) -> Vec<&'a Ident> {
    relation
        .iter()
        .filter(|(_, e)| e == element)
        .map(|(r, _)| r)
        .collect()
}

fn single_pair<'a>(src: Vec<&'a Ident>, dst: Vec<&'a Ident>) -> Option<(&'a Ident, &'a Ident)> {
    match (src.as_slice(), dst.as_slice()) {
        ([s], [d]) => Some((*s, *d)),
        _ => None,
    }
}

/// The roles involved in a group, transfer or interaction.
pub fn involved_roles(
    org: &OrgStructure,
    element: &Element,
) -> Result<BTreeSet<Ident>, StructureError> {
    let unknown = |kind, name: &Ident| StructureError::UnknownIdentifier {
        kind,
        name: name.clone(),
    };
    match element {
        Element::Group(g) => {
            if !org.groups.contains(g) {
                return Err(unknown("group", g));
            }
            Ok(org.roles_of_group(g).cloned().collect())
        }
        Element::Transfer(t) => {
            if !org.transfers.contains(t) {
                return Err(unknown("transfer", t));
            }
            Ok(org
                .transfer_sources(t)
                .into_iter()
                .chain(org.transfer_destinations(t))
                .cloned()
                .collect())
        }
        Element::Interaction(i) => {
            if !org.interactions.contains(i) {
                return Err(unknown("interaction", i));
            }
            Ok(org
                .interaction_sources(i)
                .into_iter()
                .chain(org.interaction_destinations(i))
                .cloned()
                .collect())
        }
    }
}

/// Checks every structural invariant and returns one entry per broken rule
/// instance. An empty list means the structure is well formed.
pub fn validate_structure(org: &OrgStructure) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut membership: BTreeMap<&Ident, usize> = org.roles.iter().map(|r| (r, 0)).collect();
    for (role, group) in &org.role_in {
        match membership.get_mut(role) {
            Some(n) => *n += 1,
            None => out.push(Violation::error(
                rules::UNDECLARED_ROLE,
                vec![role.clone(), group.clone()],
                format!("role `{role}` is placed in group `{group}` but never declared"),
            )),
        }
        if !org.groups.contains(group) {
            out.push(Violation::error(
                rules::UNDECLARED_GROUP,
                vec![group.clone(), role.clone()],
                format!("role `{role}` is placed in undeclared group `{group}`"),
            ));
        }
    }
    for (role, count) in &membership {
        if *count == 0 {
            out.push(Violation::error(
                rules::ROLE_WITHOUT_GROUP,
                vec![(*role).clone()],
                format!("role `{role}` belongs to no group"),
            ));
        }
    }

    check_connections(
        org,
        &org.transfers,
        &org.source_of_transfer,
        &org.destination_of_transfer,
        ConnectionKind::Transfer,
        &mut out,
    );
    check_connections(
        org,
        &org.interactions,
        &org.source_of_interaction,
        &org.destination_of_interaction,
        ConnectionKind::Interaction,
        &mut out,
    );
    out
}

#[derive(Clone, Copy)]
enum ConnectionKind {
    Transfer,
    Interaction,
}

fn check_connections(
    org: &OrgStructure,
    declared: &BTreeSet<Ident>,
    sources: &BTreeSet<(Ident, Ident)>,
    destinations: &BTreeSet<(Ident, Ident)>,
    kind: ConnectionKind,
    out: &mut Vec<Violation>,
) {
    let (noun, undeclared, src_arity, dst_arity) = match kind {
        ConnectionKind::Transfer => (
            "transfer",
            rules::UNDECLARED_TRANSFER,
            rules::TRANSFER_SOURCE_ARITY,
            rules::TRANSFER_DESTINATION_ARITY,
        ),
        ConnectionKind::Interaction => (
            "interaction",
            rules::UNDECLARED_INTERACTION,
            rules::INTERACTION_SOURCE_ARITY,
            rules::INTERACTION_DESTINATION_ARITY,
        ),
    };

    for (role, element) in sources.iter().chain(destinations) {
        if !declared.contains(element) {
            out.push(Violation::error(
                undeclared,
                vec![element.clone(), role.clone()],
                format!("{noun} `{element}` is referenced but not declared"),
            ));
        }
        if !org.roles.contains(role) {
            out.push(Violation::error(
                rules::UNDECLARED_ROLE,
                vec![role.clone(), element.clone()],
                format!("{noun} `{element}` refers to undeclared role `{role}`"),
            ));
        }
    }

    for element in declared {
        let src = related(sources, element);
        let dst = related(destinations, element);
        if src.len() != 1 {
            out.push(Violation::error(
                src_arity,
                vec![element.clone()],
                format!(
                    "{noun} `{element}` has {} source roles, expected 1",
                    src.len()
                ),
            ));
        }
        if dst.len() != 1 {
            out.push(Violation::error(
                dst_arity,
                vec![element.clone()],
                format!(
                    "{noun} `{element}` has {} destination roles, expected 1",
                    dst.len()
                ),
            ));
        }
        let (&[s], &[d]) = (src.as_slice(), dst.as_slice()) else {
            continue;
        };
        if !org.roles.contains(s) || !org.roles.contains(d) {
            continue;
        }
        match kind {
            ConnectionKind::Transfer if !org.share_group(s, d) => out.push(Violation::error(
                rules::TRANSFER_CROSS_GROUP,
                vec![element.clone(), s.clone(), d.clone()],
                format!(
                    "source `{s}` and destination `{d}` of transfer `{element}` belong to no common group"
                ),
            )),
            ConnectionKind::Interaction if org.share_group(s, d) => out.push(Violation::error(
                rules::INTERACTION_SAME_GROUP,
                vec![element.clone(), s.clone(), d.clone()],
                format!(
                    "intergroup interaction `{element}` connects `{s}` and `{d}`, which share a group"
                ),
            )),
            _ => {}
        }
    }
}
