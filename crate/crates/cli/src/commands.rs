use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use agrkit_core::dynamics::{validate_dynamics, AgrDyn};
use agrkit_core::ident::Ident;
use agrkit_core::interlevel::{
    check_complete, check_connected, diagnose_with, falsify_with, lint_unused_antecedents,
    render_tree, standard_assignment, validate_assignment, verify_proposition_with,
    InterlevelAssignment, PropositionReport, RelationVerdict, Verdicts,
};
use agrkit_core::model::{parse_assignment, parse_model, parse_realization, Model};
use agrkit_core::property::{check_property, CompiledProperty, Outcome, Verdict};
use agrkit_core::realization::{
    check_realization, validate_realization, EntailmentVerdict, InclusionMode,
};
use agrkit_core::simulator::{extract_executable, simulate as run_simulation};
use agrkit_core::structure::validate_structure;
use agrkit_core::trace::{read_stimuli, read_trace, write_trace, Trace};
use agrkit_core::violation::Violation;

use crate::report::{sha256_hex, Format, Record, RunReport};

/// Parallel map unless `AGRKIT_NO_PARALLEL=1`.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if std::env::var("AGRKIT_NO_PARALLEL").is_ok_and(|v| v == "1") {
        items.iter().map(f).collect()
    } else {
        items.par_iter().map(f).collect()
    }
}

struct Session {
    report: RunReport,
    clock: Instant,
}

impl Session {
    fn new(args: &[String]) -> Self {
        let mut report = RunReport::default();
        report.push(Record::Command {
            args: args.iter().skip(1).cloned().collect(),
        });
        Session {
            report,
            clock: Instant::now(),
        }
    }

    fn read(&mut self, role: &str, path: &Path) -> Result<String> {
        let bytes =
            std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.report.push(Record::Input {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn model(&mut self, path: &Path) -> Result<Model> {
        let text = self.read("model", path)?;
        parse_model(&text).with_context(|| format!("{}", path.display()))
    }

    fn traces(&mut self, paths: &[impl AsRef<Path>]) -> Result<Vec<Trace>> {
        paths
            .iter()
            .map(|p| {
                let p = p.as_ref();
                let text = self.read("trace", p)?;
                read_trace(&text).with_context(|| format!("{}", p.display()))
            })
            .collect()
    }

    fn lap(&mut self, phase: &str) {
        self.report.push(Record::Timing {
            phase: phase.to_string(),
            millis: self.clock.elapsed().as_millis(),
        });
        self.clock = Instant::now();
    }

    fn violations(&mut self, vs: &[Violation]) -> bool {
        for v in vs {
            self.report.push(Record::violation(v));
        }
        vs.iter().any(Violation::is_error)
    }

    fn emit(mut self, exit: u8, format: Format) -> Result<u8> {
        self.report.finish(i32::from(exit));
        print!("{}", self.report.render(format));
        Ok(exit)
    }
}

fn model_violations(m: &Model) -> Vec<Violation> {
    let d = &m.dynamics;
    let mut v = validate_structure(&d.org);
    v.extend(d.authority.validate(&d.org));
    v.extend(validate_dynamics(d));
    if !m.relations.is_empty() {
        v.extend(validate_assignment(&m.relations, d));
        v.extend(lint_unused_antecedents(&m.relations, d));
    }
    v
}

fn mode(overlap: bool) -> InclusionMode {
    if overlap {
        InclusionMode::Overlap
    } else {
        InclusionMode::Strict
    }
}

pub fn validate(
    args: &[String],
    model: &Path,
    realization: Option<&Path>,
    overlap: bool,
    format: Format,
) -> Result<u8> {
    let mut s = Session::new(args);
    let m = s.model(model)?;
    let mut violations = model_violations(&m);
    if let Some(path) = realization {
        let text = s.read("realization", path)?;
        let r = parse_realization(&text).with_context(|| format!("{}", path.display()))?;
        violations.extend(validate_realization(
            &m.dynamics,
            &r.realization,
            &r.dynamics,
            mode(overlap),
        ));
    }
    let failed = s.violations(&violations);
    let d = &m.dynamics;
    s.report.push(Record::note(format!(
        "{} groups, {} roles, {} transfers, {} interactions, {} properties",
        d.org.groups.len(),
        d.org.roles.len(),
        d.org.transfers.len(),
        d.org.interactions.len(),
        d.properties.len()
    )));
    s.lap("validate");
    s.emit(u8::from(failed), format)
}

pub struct SimulateOptions<'a> {
    pub model: &'a Path,
    pub stimuli: &'a Path,
    pub horizon: i64,
    pub seed: Option<u64>,
    pub output: Option<&'a Path>,
    pub disable: &'a [String],
}

pub fn simulate(args: &[String], o: SimulateOptions<'_>, format: Format) -> Result<u8> {
    let mut s = Session::new(args);
    let m = s.model(o.model)?;
    let stim_text = s.read("stimuli", o.stimuli)?;
    let stimuli = read_stimuli(&stim_text).with_context(|| format!("{}", o.stimuli.display()))?;
    if s.violations(&model_violations(&m)) {
        return s.emit(1, format);
    }
    let (mut rules, residue) = extract_executable(&m.dynamics);
    for id in o.disable {
        if m.dynamics.property(id).is_none() {
            bail!("--disable: unknown property `{id}`");
        }
        if !rules.iter().any(|r| r.id.as_str() == id) {
            s.report.push(Record::note(format!(
                "--disable {id}: property has no executable rule"
            )));
        }
    }
    rules.retain(|r| !o.disable.iter().any(|d| d == r.id.as_str()));
    for r in &rules {
        s.report.push(Record::Rule {
            text: r.to_string(),
        });
    }
    for r in &residue {
        s.report.push(Record::Residue {
            property: r.id.to_string(),
            reason: r.reason.clone(),
        });
    }
    let trace = run_simulation(&m.dynamics.org, &rules, &stimuli, o.horizon, o.seed)?;
    let text = write_trace(&trace);
    s.lap("simulate");
    match o.output {
        Some(path) => {
            std::fs::write(path, &text)
                .with_context(|| format!("cannot write {}", path.display()))?;
            s.report.push(Record::Output {
                path: path.display().to_string(),
                sha256: sha256_hex(text.as_bytes()),
            });
            s.emit(0, format)
        }
        None => {
            print!("{text}");
            s.report.finish(0);
            eprint!("{}", s.report.render(format));
            Ok(0)
        }
    }
}

fn select<'a>(d: &'a AgrDyn, props: &[String], all: bool) -> Result<Vec<&'a Ident>> {
    if all {
        return Ok(d.properties.keys().collect());
    }
    if props.is_empty() {
        bail!("give --prop <id> or --all");
    }
    props
        .iter()
        .map(|p| {
            d.properties
                .get_key_value(p.as_str())
                .map(|(k, _)| k)
                .with_context(|| format!("unknown property `{p}`"))
        })
        .collect()
}

pub fn check(
    args: &[String],
    model: &Path,
    trace_paths: &[impl AsRef<Path> + Sync],
    props: &[String],
    all: bool,
    format: Format,
) -> Result<u8> {
    let mut s = Session::new(args);
    let m = s.model(model)?;
    let traces = s.traces(trace_paths)?;
    let d = &m.dynamics;
    let ids = select(d, props, all)?;
    s.lap("load");
    let verdicts: Vec<Result<Verdict, _>> = par_map(&ids, |id| {
        check_property(&d.properties[*id].core, &traces, &d.org)
    });
    let mut worst = Outcome::Holds;
    for (id, v) in ids.iter().zip(verdicts) {
        let v = v.with_context(|| format!("checking `{id}`"))?;
        worst = match (worst, v.outcome) {
            (Outcome::Fails, _) | (_, Outcome::Fails) => Outcome::Fails,
            (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Holds,
        };
        s.report.push(Record::verdict(id.as_str(), &v));
    }
    s.lap("check");
    let exit = match worst {
        Outcome::Holds => 0,
        Outcome::Fails => 1,
        Outcome::Inconclusive => 3,
    };
    s.emit(exit, format)
}

/// Verdicts of the given properties on each trace separately.
fn all_verdicts(d: &AgrDyn, ids: &[Ident], traces: &[Trace]) -> Result<Verdicts> {
    let per_prop: Vec<Result<Vec<Verdict>>> = par_map(ids, |id| {
        let decl = d
            .property(id.as_str())
            .with_context(|| format!("unknown property `{id}`"))?;
        let compiled = CompiledProperty::new(&decl.core, &d.org)
            .with_context(|| format!("checking `{id}`"))?;
        traces
            .iter()
            .map(|t| {
                compiled
                    .check(&[t])
                    .with_context(|| format!("checking `{id}`"))
            })
            .collect()
    });
    let mut map = HashMap::new();
    for (id, vs) in ids.iter().zip(per_prop) {
        for (i, v) in vs?.into_iter().enumerate() {
            map.insert((id.clone(), i), v);
        }
    }
    Ok(Verdicts::from_parts(
        traces.iter().map(|t| t.id.clone()).collect(),
        map,
    ))
}

pub struct InterlevelOptions<'a> {
    pub model: &'a Path,
    pub standard: bool,
    pub assignment: Option<&'a Path>,
    pub traces: &'a [std::path::PathBuf],
    pub diagnose: Option<&'a str>,
}

pub fn interlevel(args: &[String], o: InterlevelOptions<'_>, format: Format) -> Result<u8> {
    let mut s = Session::new(args);
    let m = s.model(o.model)?;
    let d = &m.dynamics;
    let a: InterlevelAssignment = if o.standard {
        standard_assignment(d)
    } else if let Some(path) = o.assignment {
        let text = s.read("assignment", path)?;
        parse_assignment(&text).with_context(|| format!("{}", path.display()))?
    } else {
        m.relations.clone()
    };
    let traces = s.traces(o.traces)?;
    if o.diagnose.is_some() && traces.is_empty() {
        bail!("--diagnose needs at least one trace");
    }
    s.lap("load");

    let mut failed = s.violations(&validate_assignment(&a, d));
    s.violations(&lint_unused_antecedents(&a, d));
    s.report
        .push(Record::note(format!("{} relations", a.relations.len())));
    for (check, cov) in [
        ("connected", check_connected(&a, d)),
        ("complete", check_complete(&a, d)),
    ] {
        s.report.push(Record::Coverage {
            check: check.to_string(),
            ok: cov.ok,
            missing: cov.missing.iter().map(ToString::to_string).collect(),
        });
    }

    let ids: Vec<Ident> = d.properties.keys().cloned().collect();
    let verdicts = all_verdicts(d, &ids, &traces)?;
    s.lap("check");
    let annotate = |id: &Ident| {
        (!traces.is_empty())
            .then(|| verdicts.outcome(id, 0))
            .flatten()
    };
    let tree = render_tree(&a, &annotate);
    if !tree.is_empty() {
        s.report.push(Record::Tree { text: tree });
    }
    for (rel, c, ante) in a.edges() {
        s.report.push(Record::Edge {
            relation: rel.to_string(),
            consequent: c.to_string(),
            antecedent: ante.to_string(),
        });
    }

    if !traces.is_empty() {
        for out in falsify_with(&a, &verdicts) {
            let (falsified, trace, witness) = match out.verdict {
                RelationVerdict::NotFalsified => (false, None, vec![]),
                RelationVerdict::Falsified { trace, witness } => (
                    true,
                    Some(trace.to_string()),
                    witness.iter().map(ToString::to_string).collect(),
                ),
            };
            failed |= falsified;
            s.report.push(Record::Relation {
                relation: out.relation.to_string(),
                falsified,
                trace,
                witness,
            });
        }
        for (i, t) in traces.iter().enumerate() {
            let rep = verify_proposition_with(d, &a, &verdicts, i);
            let (applicable, detail) = match rep {
                PropositionReport::NotApplicable { reason } => (false, reason),
                PropositionReport::Applicable { part_a, part_b } => {
                    failed |= !part_a.confirmed;
                    let mut detail = describe_part("group properties", &part_a);
                    match part_b {
                        Some(b) => {
                            failed |= !b.confirmed;
                            detail.push_str("; ");
                            detail.push_str(&describe_part("all higher-level properties", &b));
                        }
                        None => detail.push_str("; assignment incomplete"),
                    }
                    (true, detail)
                }
            };
            s.report.push(Record::Proposition {
                trace: t.id.to_string(),
                applicable,
                detail,
            });
        }
    }

    if let Some(target) = o.diagnose {
        let target = Ident::new(target).with_context(|| format!("bad property id `{target}`"))?;
        let diag = diagnose_with(&a, &verdicts, 0, &target)?;
        for f in &diag.findings {
            s.report.push(Record::Finding {
                finding: f.to_string(),
                subject: f.subject().to_string(),
            });
        }
        for p in &diag.paths {
            s.report.push(Record::Path {
                nodes: p.iter().map(ToString::to_string).collect(),
            });
        }
        failed = true;
    }
    s.lap("analyse");
    s.emit(u8::from(failed), format)
}

fn describe_part(what: &str, p: &agrkit_core::interlevel::PartResult) -> String {
    if p.confirmed {
        format!("{what} hold")
    } else {
        let v: Vec<&str> = p.violations.iter().map(Ident::as_str).collect();
        format!("{what} do not all hold ({})", v.join(", "))
    }
}

pub fn realize(
    args: &[String],
    model: &Path,
    realization: &Path,
    trace_paths: &[std::path::PathBuf],
    overlap: bool,
    format: Format,
) -> Result<u8> {
    let mut s = Session::new(args);
    let m = s.model(model)?;
    let text = s.read("realization", realization)?;
    let r = parse_realization(&text).with_context(|| format!("{}", realization.display()))?;
    let traces = s.traces(trace_paths)?;
    let mut failed = s.violations(&validate_realization(
        &m.dynamics,
        &r.realization,
        &r.dynamics,
        mode(overlap),
    ));
    let rep = check_realization(&m.dynamics, &r.realization, &r.dynamics, &traces)?;
    for a in &rep.aliases {
        s.report.push(Record::Alias {
            property: a.property.to_string(),
            agent_part: a.agent_part.to_string(),
            predicate: a.predicate.as_ref().map(ToString::to_string),
            role_part: a.role_part.to_string(),
        });
    }
    if !traces.is_empty() {
        for res in &rep.results {
            let (refuted, trace, witness) = match &res.verdict {
                EntailmentVerdict::NotRefuted => (false, None, vec![]),
                EntailmentVerdict::Refuted { trace, witness } => (
                    true,
                    Some(trace.to_string()),
                    witness.iter().map(ToString::to_string).collect(),
                ),
            };
            failed |= refuted;
            s.report.push(Record::Entailment {
                schema: res.schema.to_string(),
                consequent: res.consequent.to_string(),
                refuted,
                trace,
                witness,
            });
        }
    }
    s.lap("realize");
    s.emit(u8::from(failed), format)
}
