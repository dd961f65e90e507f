//! Ontologies and dynamic properties attached to the elements of an
//! organisation structure, with scope checking per element kind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ident::Ident;
use crate::property::{scope_of, DynProp, Property, Scope};
use crate::state::Ontology;
use crate::structure::{AuthorityAnnotations, OrgStructure};
use crate::trace::{AtomicPart, Side};
use crate::violation::Violation;

pub mod rules {
    pub const UNDECLARED_ELEMENT: &str = "undeclared-element";
    pub const UNKNOWN_PART: &str = "unknown-part";
    pub const ROLE_SCOPE: &str = "role-scope";
    pub const ROLE_ONTOLOGY: &str = "role-ontology";
    pub const ROLE_ONE_SIDED: &str = "role-one-sided";
    pub const TRANSFER_SCOPE: &str = "transfer-scope";
    pub const TRANSFER_ONTOLOGY: &str = "transfer-ontology";
    pub const GROUP_SCOPE: &str = "group-scope";
    pub const GROUP_ONTOLOGY: &str = "group-ontology";
    pub const INTRAGROUP_SCOPE: &str = "intragroup-scope";
    pub const INTERACTION_SCOPE: &str = "interaction-scope";
    pub const INTERACTION_ONTOLOGY: &str = "interaction-ontology";
    pub const ORGANISATION_SCOPE: &str = "organisation-scope";
    pub const ORGANISATION_ONTOLOGY: &str = "organisation-ontology";
}

/// The element a property is filed under.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Filing {
    Role(Ident),
    Transfer(Ident),
    Group { group: Ident, intragroup: bool },
    Interaction(Ident),
    Organisation,
}

impl fmt::Display for Filing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filing::Role(r) => write!(f, "role {r}"),
            Filing::Transfer(t) => write!(f, "transfer {t}"),
            Filing::Group {
                group,
                intragroup: false,
            } => write!(f, "group {group}"),
            Filing::Group {
                group,
                intragroup: true,
            } => write!(f, "group {group} intragroup"),
            Filing::Interaction(i) => write!(f, "interaction {i}"),
            Filing::Organisation => f.write_str("organisation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDecl {
    pub id: Ident,
    pub filing: Filing,
    /// The property as written.
    pub source: Property,
    /// The property in the core dialect.
    pub core: DynProp,
}

impl PropertyDecl {
    pub fn new(id: Ident, filing: Filing, source: Property) -> Self {
        let core = source.to_dyn();
        PropertyDecl {
            id,
            filing,
            source,
            core,
        }
    }
}

/// Classification of a dynamic property by the parts it relates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyType {
    Role,
    Transfer,
    Group,
    Intragroup,
    Intergroup,
    Organisation,
}

impl fmt::Display for PropertyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyType::Role => "role",
            PropertyType::Transfer => "transfer",
            PropertyType::Group => "group",
            PropertyType::Intragroup => "intragroup",
            PropertyType::Intergroup => "intergroup",
            PropertyType::Organisation => "organisation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyTypeError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("property `{id}` is filed under {filing} but relates {parts}")]
    Mismatch {
        id: Ident,
        filing: Filing,
        parts: String,
    },
}

/// An organisation structure together with its dynamics: per-role
/// interface ontologies and properties filed under each element.
#[derive(Debug, Clone, Default)]
pub struct AgrDyn {
    pub org: OrgStructure,
    pub authority: AuthorityAnnotations,
    pub input_ontologies: BTreeMap<Ident, Ontology>,
    pub output_ontologies: BTreeMap<Ident, Ontology>,
    /// In declaration order.
    pub properties: IndexMap<Ident, PropertyDecl>,
}

impl AgrDyn {
    pub fn new(org: OrgStructure) -> Self {
        AgrDyn {
            org,
            ..Default::default()
        }
    }

    pub fn property(&self, id: &str) -> Option<&PropertyDecl> {
        self.properties.get(id)
    }

    pub fn add_property(&mut self, decl: PropertyDecl) {
        self.properties.insert(decl.id.clone(), decl);
    }

    fn filed(&self, pred: impl Fn(&Filing) -> bool) -> Vec<&PropertyDecl> {
        self.properties
            .values()
            .filter(|p| pred(&p.filing))
            .collect()
    }

    pub fn role_properties(&self, role: &Ident) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Role(r) if r == role))
    }

    pub fn transfer_properties(&self, transfer: &Ident) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Transfer(t) if t == transfer))
    }

    /// Group properties, including those tagged as intragroup interactions.
    pub fn group_properties(&self, group: &Ident) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Group { group: g, .. } if g == group))
    }

    pub fn interaction_properties(&self, interaction: &Ident) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Interaction(i) if i == interaction))
    }

    pub fn organisation_properties(&self) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Organisation))
    }

    pub fn all_group_properties(&self) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Group { .. }))
    }

    pub fn all_transfer_properties(&self) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Transfer(_)))
    }

    pub fn all_interaction_properties(&self) -> Vec<&PropertyDecl> {
        self.filed(|f| matches!(f, Filing::Interaction(_)))
    }

    pub fn input_ontology(&self, role: &Ident) -> Ontology {
        self.input_ontologies.get(role).cloned().unwrap_or_default()
    }

    pub fn output_ontology(&self, role: &Ident) -> Ontology {
        self.output_ontologies
            .get(role)
            .cloned()
            .unwrap_or_default()
    }

    /// Ontology of one interface of a role.
    pub fn interface_ontology(&self, part: &AtomicPart) -> Ontology {
        match part.side {
            Side::Input => self.input_ontology(&part.role),
            Side::Output => self.output_ontology(&part.role),
        }
    }

    fn union_over<'a>(&self, roles: impl IntoIterator<Item = &'a Ident>) -> Ontology {
        let mut ont = Ontology::new();
        for r in roles {
            for side in [&self.input_ontologies, &self.output_ontologies] {
                if let Some(o) = side.get(r) {
                    // Conflicts are reported when ontologies are declared.
                    let _ = ont.merge(o);
                }
            }
        }
        ont
    }

    /// Input and output vocabulary of a role together.
    pub fn role_ontology(&self, role: &Ident) -> Ontology {
        self.union_over([role])
    }

    /// Union of the ontologies of a group's roles.
    pub fn group_ontology(&self, group: &Ident) -> Ontology {
        self.union_over(self.org.roles_of_group(group))
    }

    /// Union of the ontologies of all roles.
    pub fn organisation_ontology(&self) -> Ontology {
        self.union_over(self.org.roles.iter())
    }
}

fn describe_parts(parts: &BTreeSet<AtomicPart>) -> String {
    parts
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parts a property filed under `filing` may relate, or `None` when the
/// element is undeclared.
fn permitted_parts(org: &OrgStructure, filing: &Filing) -> Option<BTreeSet<AtomicPart>> {
    let both = |r: &Ident| [AtomicPart::input(r.clone()), AtomicPart::output(r.clone())];
    Some(match filing {
        Filing::Role(r) => {
            if !org.roles.contains(r) {
                return None;
            }
            both(r).into_iter().collect()
        }
        Filing::Transfer(t) => {
            if !org.transfers.contains(t) {
                return None;
            }
            let mut s = BTreeSet::new();
            s.extend(
                org.transfer_sources(t)
                    .into_iter()
                    .map(|r| AtomicPart::output(r.clone())),
            );
            s.extend(
                org.transfer_destinations(t)
                    .into_iter()
                    .map(|r| AtomicPart::input(r.clone())),
            );
            s
        }
        Filing::Interaction(i) => {
            if !org.interactions.contains(i) {
                return None;
            }
            let mut s = BTreeSet::new();
            s.extend(
                org.interaction_sources(i)
                    .into_iter()
                    .map(|r| AtomicPart::input(r.clone())),
            );
            s.extend(
                org.interaction_destinations(i)
                    .into_iter()
                    .map(|r| AtomicPart::output(r.clone())),
            );
            s
        }
        Filing::Group { group, intragroup } => {
            if !org.groups.contains(group) {
                return None;
            }
            org.roles_of_group(group)
                .flat_map(both)
                .filter(|p| !intragroup || p.side == Side::Output)
                .collect()
        }
        Filing::Organisation => org.roles.iter().flat_map(both).collect(),
    })
}

fn scope_rule(filing: &Filing) -> &'static str {
    match filing {
        Filing::Role(_) => rules::ROLE_SCOPE,
        Filing::Transfer(_) => rules::TRANSFER_SCOPE,
        Filing::Group {
            intragroup: false, ..
        } => rules::GROUP_SCOPE,
        Filing::Group {
            intragroup: true, ..
        } => rules::INTRAGROUP_SCOPE,
        Filing::Interaction(_) => rules::INTERACTION_SCOPE,
        Filing::Organisation => rules::ORGANISATION_SCOPE,
    }
}

fn roles_touched(parts: impl IntoIterator<Item = AtomicPart>) -> BTreeSet<Ident> {
    parts.into_iter().map(|p| p.role).collect()
}

/// Checks that every property only relates the parts, and only uses the
/// vocabulary, that its filing permits.
pub fn validate_dynamics(dyn_: &AgrDyn) -> Vec<Violation> {
    let org = &dyn_.org;
    let mut out = Vec::new();
    for side in [&dyn_.input_ontologies, &dyn_.output_ontologies] {
        for role in side.keys() {
            if !org.roles.contains(role) {
                out.push(Violation::error(
                    crate::structure::rules::UNDECLARED_ROLE,
                    vec![role.clone()],
                    format!("ontology declared for undeclared role `{role}`"),
                ));
            }
        }
    }
    for decl in dyn_.properties.values() {
        let id = &decl.id;
        let Some(permitted) = permitted_parts(org, &decl.filing) else {
            out.push(Violation::error(
                rules::UNDECLARED_ELEMENT,
                vec![id.clone()],
                format!("property `{id}` is filed under undeclared {}", decl.filing),
            ));
            continue;
        };
        let scope = match scope_of(&decl.core, org) {
            Ok(s) => s,
            Err(e) => {
                out.push(Violation::error(
                    rules::UNKNOWN_PART,
                    vec![id.clone()],
                    format!("property `{id}`: {e}"),
                ));
                continue;
            }
        };
        let outside: BTreeSet<AtomicPart> = scope
            .keys()
            .filter(|p| !permitted.contains(p))
            .cloned()
            .collect();
        if !outside.is_empty() {
            out.push(Violation::error(
                scope_rule(&decl.filing),
                vec![id.clone()],
                format!(
                    "property `{id}` filed under {} relates {}, outside its permitted parts",
                    decl.filing,
                    describe_parts(&outside)
                ),
            ));
            continue;
        }
        if let Filing::Group {
            group,
            intragroup: true,
        } = &decl.filing
        {
            let roles = roles_touched(scope.keys().cloned());
            if roles.len() > 2 {
                out.push(Violation::error(
                    rules::INTRAGROUP_SCOPE,
                    vec![id.clone(), group.clone()],
                    format!(
                        "intragroup property `{id}` relates {} roles; at most two are allowed",
                        roles.len()
                    ),
                ));
                continue;
            }
        }
        out.extend(check_vocabulary(dyn_, decl, &scope));
        if let Filing::Role(r) = &decl.filing {
            let sides: BTreeSet<Side> = scope.keys().map(|p| p.side).collect();
            if sides.len() == 1 {
                let only = if sides.contains(&Side::Input) {
                    "input"
                } else {
                    "output"
                };
                out.push(Violation::warning(
                    rules::ROLE_ONE_SIDED,
                    vec![id.clone(), r.clone()],
                    format!("role property `{id}` only refers to the {only} of `{r}`"),
                ));
            }
        }
    }
    out
}

fn check_vocabulary(dyn_: &AgrDyn, decl: &PropertyDecl, scope: &Scope) -> Vec<Violation> {
    let id = &decl.id;
    let mut out = Vec::new();
    let mut report = |rule: &'static str, part: &AtomicPart, pred: &Ident, vocab: &str| {
        out.push(Violation::error(
            rule,
            vec![id.clone(), pred.clone()],
            format!("property `{id}` uses `{pred}` at {part}, which is not in {vocab}"),
        ));
    };
    let check_union =
        |ont: &Ontology,
         rule,
         vocab: &str,
         report: &mut dyn FnMut(&'static str, &AtomicPart, &Ident, &str)| {
            for (part, preds) in scope {
                for p in preds {
                    if !ont.contains(p.as_str()) {
                        report(rule, part, p, vocab);
                    }
                }
            }
        };
    match &decl.filing {
        Filing::Role(r) => check_union(
            &dyn_.role_ontology(r),
            rules::ROLE_ONTOLOGY,
            &format!("the ontology of role `{r}`"),
            &mut report,
        ),
        Filing::Group { group, .. } => check_union(
            &dyn_.group_ontology(group),
            rules::GROUP_ONTOLOGY,
            &format!("the ontology of group `{group}`"),
            &mut report,
        ),
        Filing::Organisation => check_union(
            &dyn_.organisation_ontology(),
            rules::ORGANISATION_ONTOLOGY,
            "the organisation ontology",
            &mut report,
        ),
        Filing::Transfer(_) | Filing::Interaction(_) => {
            let rule = if matches!(decl.filing, Filing::Transfer(_)) {
                rules::TRANSFER_ONTOLOGY
            } else {
                rules::INTERACTION_ONTOLOGY
            };
            for (part, preds) in scope {
                let ont = dyn_.interface_ontology(part);
                for p in preds {
                    if !ont.contains(p.as_str()) {
                        report(rule, part, p, &format!("the ontology of {part}"));
                    }
                }
            }
        }
    }
    out
}

/// Classifies a property by the parts it relates, within the limits of
/// where it is filed.
pub fn property_type_of(dyn_: &AgrDyn, id: &str) -> Result<PropertyType, PropertyTypeError> {
    let decl = dyn_
        .property(id)
        .ok_or_else(|| PropertyTypeError::UnknownProperty(id.to_string()))?;
    let mismatch = |parts: String| PropertyTypeError::Mismatch {
        id: decl.id.clone(),
        filing: decl.filing.clone(),
        parts,
    };
    let scope = scope_of(&decl.core, &dyn_.org).map_err(|e| mismatch(e.to_string()))?;
    let touched: BTreeSet<AtomicPart> = scope.keys().cloned().collect();
    let permitted = permitted_parts(&dyn_.org, &decl.filing)
        .ok_or_else(|| mismatch("an undeclared element".to_string()))?;
    if !touched.is_subset(&permitted) {
        return Err(mismatch(describe_parts(&touched)));
    }
    let outputs_of_two = !touched.is_empty()
        && touched.iter().all(|p| p.side == Side::Output)
        && roles_touched(touched.iter().cloned()).len() <= 2;
    Ok(match &decl.filing {
        Filing::Role(_) => PropertyType::Role,
        Filing::Transfer(_) => PropertyType::Transfer,
        Filing::Interaction(_) => PropertyType::Intergroup,
        Filing::Organisation => PropertyType::Organisation,
        Filing::Group {
            intragroup: true, ..
        } => {
            if roles_touched(touched.iter().cloned()).len() > 2 {
                return Err(mismatch(describe_parts(&touched)));
            }
            PropertyType::Intragroup
        }
        Filing::Group {
            intragroup: false, ..
        } => {
            if outputs_of_two && roles_touched(touched.iter().cloned()).len() == 2 {
                PropertyType::Intragroup
            } else {
                PropertyType::Group
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::id;
    use crate::property::parse_property;
    use crate::state::{ArgKind, Signature};

    fn ont(preds: &[&str]) -> Ontology {
        let mut o = Ontology::new();
        for p in preds {
            o.declare(
                id(p),
                Signature {
                    kinds: Vec::<ArgKind>::new(),
                },
            )
            .unwrap();
        }
        o
    }

    fn base() -> AgrDyn {
        let mut org = OrgStructure::new();
        org.add_group(id("divA"), [id("depA1"), id("depA2")]);
        org.add_group(id("C"), [id("divArep"), id("divBrep")]);
        org.add_group(id("divB"), [id("depB1")]);
        org.add_transfer(id("tA12"), id("depA1"), id("depA2"));
        org.add_transfer(id("tA21"), id("depA2"), id("depA1"));
        org.add_interaction(id("iAC"), id("depA1"), id("divArep"));
        let mut d = AgrDyn::new(org);
        for r in ["depA1", "depA2", "divArep", "divBrep", "depB1"] {
            d.input_ontologies
                .insert(id(r), ont(&["progress", "planning"]));
            d.output_ontologies
                .insert(id(r), ont(&["progress", "planning"]));
        }
        d
    }

    fn add(d: &mut AgrDyn, name: &str, filing: Filing, src: &str) {
        d.add_property(PropertyDecl::new(
            id(name),
            filing,
            parse_property(src).unwrap(),
        ));
    }

    fn rules_of(v: &[Violation]) -> Vec<&'static str> {
        v.iter().map(|v| v.rule).collect()
    }

    #[test]
    fn well_scoped_role_property_passes() {
        let mut d = base();
        add(
            &mut d,
            "DP_depA1",
            Filing::Role(id("depA1")),
            "ttl: forall t. holds(t, input(depA1), progress) => exists t2 in [t, t+1]. holds(t2, output(depA1), planning)",
        );
        assert!(validate_dynamics(&d).is_empty());
        assert_eq!(
            property_type_of(&d, "DP_depA1").unwrap(),
            PropertyType::Role
        );
    }

    #[test]
    fn foreign_part_in_role_property_violates_role_scope() {
        let mut d = base();
        add(
            &mut d,
            "bad",
            Filing::Role(id("depA1")),
            "ttl: forall t. holds(t, input(depA2), progress) => holds(t, output(depA1), planning)",
        );
        assert_eq!(rules_of(&validate_dynamics(&d)), vec![rules::ROLE_SCOPE]);
        assert!(property_type_of(&d, "bad").is_err());
    }

    #[test]
    fn one_sided_role_property_warns() {
        let mut d = base();
        add(
            &mut d,
            "init",
            Filing::Role(id("depA1")),
            "ttl: exists t. holds(t, input(depA1), progress)",
        );
        let v = validate_dynamics(&d);
        assert_eq!(rules_of(&v), vec![rules::ROLE_ONE_SIDED]);
        assert!(!v[0].is_error());
        assert_eq!(property_type_of(&d, "init").unwrap(), PropertyType::Role);
    }

    #[test]
    fn transfer_direction_is_enforced() {
        let mut d = base();
        add(
            &mut d,
            "ok",
            Filing::Transfer(id("tA12")),
            "ltl: C[output(depA1)](planning) => X[input(depA2)](planning)",
        );
        add(
            &mut d,
            "reversed",
            Filing::Transfer(id("tA12")),
            "ltl: C[output(depA2)](progress) => X[input(depA1)](progress)",
        );
        assert_eq!(
            rules_of(&validate_dynamics(&d)),
            vec![rules::TRANSFER_SCOPE]
        );
        assert_eq!(property_type_of(&d, "ok").unwrap(), PropertyType::Transfer);
    }

    #[test]
    fn interaction_scope_and_type() {
        let mut d = base();
        add(
            &mut d,
            "IrRI",
            Filing::Interaction(id("iAC")),
            "ttl: forall t. holds(t, input(depA1), progress) => exists t2 in [t, t+2]. holds(t2, output(divArep), progress)",
        );
        assert!(validate_dynamics(&d).is_empty());
        assert_eq!(
            property_type_of(&d, "IrRI").unwrap(),
            PropertyType::Intergroup
        );
        add(
            &mut d,
            "wrong",
            Filing::Interaction(id("iAC")),
            "ttl: exists t. holds(t, output(depA1), progress)",
        );
        assert_eq!(
            rules_of(&validate_dynamics(&d)),
            vec![rules::INTERACTION_SCOPE]
        );
    }

    #[test]
    fn group_properties_and_intragroup_classification() {
        let mut d = base();
        add(
            &mut d,
            "IaRI",
            Filing::Group { group: id("divA"), intragroup: false },
            "ttl: forall t. holds(t, output(depA1), planning) => exists t2 in [t, t+5]. holds(t2, output(depA2), progress)",
        );
        add(
            &mut d,
            "DP_A",
            Filing::Group {
                group: id("divA"),
                intragroup: false,
            },
            "ttl: exists t. holds(t, group(divA), progress)",
        );
        add(
            &mut d,
            "tagged",
            Filing::Group {
                group: id("divA"),
                intragroup: true,
            },
            "ttl: exists t. holds(t, output(depA1), progress)",
        );
        assert!(validate_dynamics(&d).is_empty());
        assert_eq!(
            property_type_of(&d, "IaRI").unwrap(),
            PropertyType::Intragroup
        );
        assert_eq!(property_type_of(&d, "DP_A").unwrap(), PropertyType::Group);
        assert_eq!(
            property_type_of(&d, "tagged").unwrap(),
            PropertyType::Intragroup
        );
        add(
            &mut d,
            "tagged_input",
            Filing::Group {
                group: id("divA"),
                intragroup: true,
            },
            "ttl: exists t. holds(t, input(depA1), progress)",
        );
        assert_eq!(
            rules_of(&validate_dynamics(&d)),
            vec![rules::INTRAGROUP_SCOPE]
        );
    }

    #[test]
    fn vocabulary_outside_role_ontology() {
        let mut d = base();
        d.input_ontologies
            .insert(id("depA2"), ont(&["progress", "planning", "alien"]));
        add(
            &mut d,
            "p",
            Filing::Role(id("depA1")),
            "ttl: exists t. holds(t, role(depA1), alien)",
        );
        assert_eq!(
            rules_of(&validate_dynamics(&d)),
            vec![rules::ROLE_ONTOLOGY, rules::ROLE_ONTOLOGY]
        );
    }

    #[test]
    fn undeclared_filing() {
        let mut d = base();
        add(&mut d, "p", Filing::Transfer(id("tZZ")), "ttl: true");
        assert_eq!(
            rules_of(&validate_dynamics(&d)),
            vec![rules::UNDECLARED_ELEMENT]
        );
    }
}
