use std::collections::BTreeSet;

use agrkit_core::dynamics::validate_dynamics;
use agrkit_core::ident::id;
use agrkit_core::interlevel::{
    check_complete, check_connected, diagnose, falsify_on_traces, standard_assignment,
    validate_assignment, verify_proposition, Finding, PartResult, PropositionReport,
    RelationVerdict,
};
use agrkit_core::model::{parse_assignment, parse_model, parse_realization, Model};
use agrkit_core::property::{check_property, Outcome};
use agrkit_core::realization::{
    check_realization, rules as real_rules, validate_realization, InclusionMode,
};
use agrkit_core::simulator::{extract_executable, simulate};
use agrkit_core::structure::validate_structure;
use agrkit_core::trace::{read_stimuli, write_trace, Trace};

const MODEL: &str = include_str!("../corpus/factory.agr");
const STIMULI: &str = include_str!("../corpus/factory.stim");
const DIAGNOSIS: &str = include_str!("../corpus/factory-diagnosis.assign");
const REALIZATION: &str = include_str!("../corpus/factory.real");

fn model() -> Model {
    parse_model(MODEL).expect("factory model parses")
}

fn run(m: &Model, disabled: &[&str], seed: Option<u64>) -> Trace {
    let (mut rules, _) = extract_executable(&m.dynamics);
    rules.retain(|r| !disabled.contains(&r.id.as_str()));
    let stimuli = read_stimuli(STIMULI).unwrap();
    simulate(&m.dynamics.org, &rules, &stimuli, 50, seed).unwrap()
}

#[test]
fn corpus_validates() {
    let m = model();
    let d = &m.dynamics;
    assert!(validate_structure(&d.org).is_empty());
    assert!(d.authority.validate(&d.org).is_empty());
    assert_eq!(validate_dynamics(d), vec![]);
}

#[test]
fn executable_part_covers_leaves() {
    let m = model();
    let (rules, residue) = extract_executable(&m.dynamics);
    let ids: BTreeSet<&str> = rules.iter().map(|r| r.id.as_str()).collect();
    for leaf in ["DP_depA1", "TRD_A21", "IrRI_CB", "TRD_C12"] {
        assert!(ids.contains(leaf), "{leaf} missing from {ids:?}");
    }
    let dp_depa1 = rules.iter().find(|r| r.id.as_str() == "DP_depA1").unwrap();
    assert_eq!((dp_depa1.delay_min, dp_depa1.delay_max), (1, 1));
    let residue: BTreeSet<&str> = residue.iter().map(|r| r.id.as_str()).collect();
    assert!(residue.contains("DP_F"));
    assert!(residue.contains("DP_A"));
}

#[test]
fn all_properties_hold_on_simulated_trace() {
    let m = model();
    for seed in [Some(7), None, Some(1), Some(99)] {
        let tr = run(&m, &[], seed);
        assert_eq!(tr.horizon(), 50);
        for decl in m.dynamics.properties.values() {
            let v = check_property(&decl.core, &[&tr], &m.dynamics.org).unwrap();
            assert_eq!(
                v.outcome,
                Outcome::Holds,
                "{} with seed {seed:?}: {}",
                decl.id,
                v.explanation
            );
        }
    }
}

#[test]
fn standard_assignment_is_connected_and_complete() {
    let m = model();
    let a = standard_assignment(&m.dynamics);
    assert!(validate_assignment(&a, &m.dynamics).is_empty());
    assert!(check_connected(&a, &m.dynamics).ok);
    assert!(check_complete(&a, &m.dynamics).ok);
    let tr = run(&m, &[], Some(7));
    assert!(falsify_on_traces(&a, &m.dynamics, &[&tr])
        .unwrap()
        .iter()
        .all(|o| o.verdict == RelationVerdict::NotFalsified));
    let confirmed = PartResult {
        confirmed: true,
        violations: vec![],
    };
    assert_eq!(
        verify_proposition(&m.dynamics, &a, &tr).unwrap(),
        PropositionReport::Applicable {
            part_a: confirmed.clone(),
            part_b: Some(confirmed)
        }
    );
}

#[test]
fn broken_transfer_is_diagnosed() {
    let m = model();
    let diag = parse_assignment(DIAGNOSIS).unwrap();
    assert!(validate_assignment(&diag, &m.dynamics).is_empty());
    for seed in [Some(7), None, Some(3), Some(12345)] {
        let tr = run(&m, &["TRD_A21"], seed);
        let dp_f = &m.dynamics.property("DP_F").unwrap().core;
        assert!(check_property(dp_f, &[&tr], &m.dynamics.org)
            .unwrap()
            .fails());
        for a in [standard_assignment(&m.dynamics), diag.clone()] {
            let diag = diagnose(&a, &m.dynamics, &tr, &id("DP_F")).unwrap();
            assert_eq!(
                diag.findings.into_iter().collect::<Vec<_>>(),
                vec![Finding::FailingLeaf(id("TRD_A21"))],
                "seed {seed:?}"
            );
        }
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let m = model();
    assert_eq!(
        write_trace(&run(&m, &[], Some(7))),
        write_trace(&run(&m, &[], Some(7)))
    );
    assert_eq!(
        write_trace(&run(&m, &[], None)),
        write_trace(&run(&m, &[], None))
    );
}

#[test]
fn realization_table_validates_and_is_not_refuted() {
    let m = model();
    let r = parse_realization(REALIZATION).unwrap();
    assert_eq!(
        validate_realization(
            &m.dynamics,
            &r.realization,
            &r.dynamics,
            InclusionMode::Strict
        ),
        vec![]
    );
    let tr = run(&m, &[], Some(7));
    let report = check_realization(&m.dynamics, &r.realization, &r.dynamics, &[&tr]).unwrap();
    assert!(report.refuted().next().is_none());
    assert!(report
        .results
        .iter()
        .any(|res| res.consequent.as_str() == "DP_depA1"));
}

#[test]
fn realization_mutations_are_flagged() {
    let m = model();
    let moved = REALIZATION
        .replace("fulfils agentA1 depA1, divArep", "fulfils agentA1 depA1")
        .replace("fulfils agentA2 depA2", "fulfils agentA2 depA2, divArep");
    let r = parse_realization(&moved).unwrap();
    let v = validate_realization(
        &m.dynamics,
        &r.realization,
        &r.dynamics,
        InclusionMode::Strict,
    );
    let single: Vec<&str> = v
        .iter()
        .filter(|v| v.rule == real_rules::INTERGROUP_SINGLE_AGENT)
        .map(|v| v.subjects[0].as_str())
        .collect();
    assert_eq!(single, vec!["iAC", "iCA"]);

    let dropped = REALIZATION.replace(
        "agentontology agentA1 input { component_progress components_needed }",
        "agentontology agentA1 input { component_progress }",
    );
    let r = parse_realization(&dropped).unwrap();
    let v = validate_realization(
        &m.dynamics,
        &r.realization,
        &r.dynamics,
        InclusionMode::Strict,
    );
    let inclusion: Vec<Vec<&str>> = v
        .iter()
        .filter(|v| v.rule == real_rules::ONTOLOGY_INCLUSION)
        .map(|v| v.subjects.iter().map(|s| s.as_str()).collect())
        .collect();
    assert_eq!(
        inclusion,
        vec![vec!["agentA1", "divArep", "components_needed"]]
    );
}

#[test]
fn samples_corpus_loads() {
    let m = parse_model(include_str!("../corpus/samples.agr")).unwrap();
    let v = validate_dynamics(&m.dynamics);
    assert!(v.iter().all(|v| !v.is_error()), "{v:?}");
    assert!(validate_structure(&m.dynamics.org).is_empty());
}
