//! Static analyses: which parts and predicates a property touches, and
//! whether its atoms fit an ontology.

use std::collections::{BTreeMap, BTreeSet};

use crate::ident::Ident;
use crate::property::ast::{ArgTerm, DynProp, StateProp};
use crate::state::{check_args, ArgKind, Ontology, OntologyError};
use crate::structure::OrgStructure;
use crate::trace::{AtomicPart, PartError};

/// Atomic parts a property reads, each with the predicates used there.
pub type Scope = BTreeMap<AtomicPart, BTreeSet<Ident>>;

/// The atomic parts and predicates a property refers to. Aggregate parts
/// are expanded into the atomic parts of their roles.
pub fn scope_of(prop: &DynProp, org: &OrgStructure) -> Result<Scope, PartError> {
    let mut scope = Scope::new();
    let mut err = None;
    prop.for_each_holds(&mut |_, _, part, sp| {
        if err.is_some() {
            return;
        }
        match part.atomic_parts(org) {
            Ok(parts) => {
                let mut preds = BTreeSet::new();
                sp.for_each_atom(&mut |a| {
                    preds.insert(a.predicate.clone());
                });
                for p in parts {
                    scope.entry(p).or_default().extend(preds.iter().cloned());
                }
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(scope),
    }
}

/// Checks every atom pattern against `ont`: the predicate must be declared
/// with matching arity, and argument kinds must agree.
pub fn typecheck(prop: &DynProp, ont: &Ontology) -> Result<(), OntologyError> {
    let mut result = Ok(());
    prop.for_each_holds(&mut |_, _, _, sp| {
        if result.is_ok() {
            result = typecheck_state_prop(sp, ont);
        }
    });
    result
}

pub(crate) fn typecheck_state_prop(sp: &StateProp, ont: &Ontology) -> Result<(), OntologyError> {
    let mut result = Ok(());
    sp.for_each_atom(&mut |a| {
        if result.is_err() {
            return;
        }
        result = match ont.get(a.predicate.as_str()) {
            None => Err(OntologyError::UnknownPredicate(a.predicate.clone())),
            Some(sig) => check_args(
                &a.predicate,
                sig,
                a.args.iter().map(|arg| match arg {
                    ArgTerm::Sym(_) => ArgKind::Symbol,
                    ArgTerm::Num(_) | ArgTerm::Var(_) => ArgKind::Number,
                }),
            ),
        };
    });
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::id;
    use crate::property::parse_ttl;
    use crate::state::Signature;

    fn org() -> OrgStructure {
        let mut org = OrgStructure::new();
        org.add_group(id("g"), [id("r1"), id("r2")]);
        org.add_group(id("divA"), [id("depA1"), id("depA2")]);
        org
    }

    fn preds(names: &[&str]) -> BTreeSet<Ident> {
        names.iter().map(|n| id(n)).collect()
    }

    #[test]
    fn role_property_scope() {
        let p = parse_ttl("forall t. holds(t, output(r1), request) => exists t2 in [t, t+10]. holds(t2, output(r1), answer)").unwrap();
        let s = scope_of(&p, &org()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            s[&AtomicPart::output(id("r1"))],
            preds(&["request", "answer"])
        );
    }

    #[test]
    fn transfer_property_scope() {
        let p = parse_ttl("forall t. holds(t, output(r1), answer) => exists t2 in [t, t+1]. holds(t2, input(r2), answer)").unwrap();
        let s = scope_of(&p, &org()).unwrap();
        let expect: Scope = [
            (AtomicPart::output(id("r1")), preds(&["answer"])),
            (AtomicPart::input(id("r2")), preds(&["answer"])),
        ]
        .into_iter()
        .collect();
        assert_eq!(s, expect);
    }

    #[test]
    fn group_parts_expand_to_role_interfaces() {
        let p = parse_ttl("exists t. holds(t, group(divA), x)").unwrap();
        let s = scope_of(&p, &org()).unwrap();
        let mut expect = Scope::new();
        for r in org().roles_of_group(&id("divA")) {
            expect.insert(AtomicPart::input(r.clone()), preds(&["x"]));
            expect.insert(AtomicPart::output(r.clone()), preds(&["x"]));
        }
        assert_eq!(s, expect);
    }

    #[test]
    fn unknown_parts_are_reported() {
        let p = parse_ttl("exists t. holds(t, input(ghost), x)").unwrap();
        assert!(scope_of(&p, &org()).is_err());
    }

    #[test]
    fn typecheck_catches_arity_and_kind() {
        let mut ont = Ontology::new();
        ont.declare(
            id("lvl"),
            Signature {
                kinds: vec![ArgKind::Symbol, ArgKind::Number],
            },
        )
        .unwrap();
        let ok = parse_ttl("forall num w. exists t. holds(t, input(r1), lvl(q, w))").unwrap();
        assert!(typecheck(&ok, &ont).is_ok());
        let arity = parse_ttl("exists t. holds(t, input(r1), lvl(q))").unwrap();
        assert!(matches!(
            typecheck(&arity, &ont),
            Err(OntologyError::Arity { .. })
        ));
        let kind = parse_ttl("exists t. holds(t, input(r1), lvl(1, q))").unwrap();
        assert!(matches!(
            typecheck(&kind, &ont),
            Err(OntologyError::Kind { .. })
        ));
        let unknown = parse_ttl("exists t. holds(t, input(r1), nope)").unwrap();
        assert!(matches!(
            typecheck(&unknown, &ont),
            Err(OntologyError::UnknownPredicate(_))
        ));
    }
}
