//! Drivers comparing the checker against the brute-force oracle. Each
//! returns a tally so tests and the acceptance report share one code path.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use agrkit_core::ident::id;
use agrkit_core::model::{parse_model, Model};
use agrkit_core::property::{compile_ltl, parse_ltl, CompiledProperty, LtlProp, Outcome, Property};
use agrkit_core::state::Value;
use agrkit_core::structure::OrgStructure;
use agrkit_core::trace::{AtomicPart, PartRef, Trace};

use super::gen;
use super::oracle::{dyn_truth, ltl_truth};

pub const SAMPLES: &str = include_str!("../../corpus/samples.agr");

#[derive(Debug, Default)]
pub struct Tally {
    pub cases: usize,
    pub mismatches: Vec<String>,
    pub outcomes: BTreeMap<String, [usize; 3]>,
}

impl Tally {
    fn record(&mut self, key: &str, o: Outcome) {
        let slot = match o {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
            Outcome::Inconclusive => 2,
        };
        self.outcomes.entry(key.to_string()).or_default()[slot] += 1;
    }

    fn mismatch(&mut self, what: String) {
        if self.mismatches.len() < 20 {
            self.mismatches.push(what);
        } else if self.mismatches.len() == 20 {
            self.mismatches.push("...".into());
        }
    }
}

pub fn samples_model() -> Model {
    parse_model(SAMPLES).expect("samples corpus parses")
}

fn describe(traces: &[Trace]) -> String {
    let mut s = String::new();
    for t in traces {
        let _ = write!(s, "[{}: {:?}] ", t.id, t.entries());
    }
    s
}

fn p(role: &str, input: bool) -> AtomicPart {
    if input {
        AtomicPart::input(id(role))
    } else {
        AtomicPart::output(id(role))
    }
}

/// Traces for one property: nullary atoms sprinkled on the parts the
/// property mentions, or ranked numeric profiles for the multi-trace row.
fn samples_traces(rng: &mut ChaCha8Rng, prop: &str) -> Vec<Trace> {
    let horizon = rng.gen_range(0..=30);
    let density = *[0.05, 0.12, 0.3].get(rng.gen_range(0..3)).unwrap();
    let sym = |s: &str| Value::Sym(id(s));
    let one = |rng: &mut ChaCha8Rng, name: &str, spots: &[(AtomicPart, &str)]| {
        let mut tr = Trace::new(id(name), horizon);
        for (part, pred) in spots {
            gen::sprinkle(rng, &mut tr, part, pred, &[], density);
        }
        tr
    };
    match prop {
        "P1" => vec![one(
            rng,
            "t",
            &[(p("r1", false), "request"), (p("r1", false), "answer")],
        )],
        "P2" => vec![one(
            rng,
            "t",
            &[(p("r1", false), "answer"), (p("r2", true), "answer")],
        )],
        "P3" => vec![one(
            rng,
            "t",
            &[(p("p1", true), "request"), (p("p2", false), "request")],
        )],
        _ => {
            let k = rng.gen_range(1..=3);
            (0..k)
                .map(|i| {
                    let h = if rng.gen_bool(0.8) {
                        horizon
                    } else {
                        rng.gen_range(0..=30)
                    };
                    let mut tr = Trace::new(id(&format!("g{i}")), h);
                    let rank = rng.gen_range(0..=3);
                    let level = |rng: &mut ChaCha8Rng| {
                        let n = if rng.gen_bool(0.85) {
                            rank
                        } else {
                            rng.gen_range(0..=3)
                        };
                        [sym("quality"), Value::int(n)]
                    };
                    if rng.gen_bool(0.85) {
                        let args = level(rng);
                        tr.insert(
                            0,
                            p("r", false),
                            agrkit_core::state::Atom::new(id("has_level"), args.to_vec()),
                        )
                        .unwrap();
                    }
                    for t in 0..=h {
                        if rng.gen_bool(0.3) {
                            let n = if rng.gen_bool(0.9) {
                                rank
                            } else {
                                rng.gen_range(0..=3)
                            };
                            tr.insert(
                                t,
                                p("r", true),
                                agrkit_core::state::Atom::new(
                                    id("has_intensity"),
                                    vec![sym("requests"), Value::int(n)],
                                ),
                            )
                            .unwrap();
                        }
                        if rng.gen_bool(0.3) {
                            let args = level(rng);
                            tr.insert(
                                t,
                                p("r", false),
                                agrkit_core::state::Atom::new(id("has_level"), args.to_vec()),
                            )
                            .unwrap();
                        }
                    }
                    tr
                })
                .collect()
        }
    }
}

/// Checks every sample property on `per_property` random trace sets with
/// the checker, the brute-force core oracle and, for LTL rows, the direct
/// LTL oracle.
pub fn samples(per_property: usize, seed: u64) -> Tally {
    let model = samples_model();
    let org = &model.dynamics.org;
    let mut tally = Tally::default();
    for row in ["P1", "P2", "P3", "P4"] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ row.as_bytes()[1] as u64);
        let decls: Vec<_> = model
            .dynamics
            .properties
            .values()
            .filter(|d| d.id.as_str() == row || d.id.as_str().starts_with(&format!("{row}_")))
            .collect();
        let compiled: Vec<_> = decls
            .iter()
            .map(|d| CompiledProperty::new(&d.core, org).expect("compiles"))
            .collect();
        for _ in 0..per_property {
            let traces = samples_traces(&mut rng, row);
            tally.cases += 1;
            for (d, c) in decls.iter().zip(&compiled) {
                let got = c.check(&traces).expect("checks").outcome;
                let want = dyn_truth(org, &d.core, &traces).outcome();
                tally.record(d.id.as_str(), got);
                if got != want {
                    tally.mismatch(format!(
                        "{}: checker {got}, oracle {want} on {}",
                        d.id,
                        describe(&traces)
                    ));
                }
                if let Property::Ltl(l) = &d.source {
                    let direct = ltl_truth(org, l, &traces[0]).outcome();
                    if got != direct {
                        tally.mismatch(format!(
                            "{}: checker {got}, LTL oracle {direct} on {}",
                            d.id,
                            describe(&traces)
                        ));
                    }
                }
            }
        }
    }
    tally
}

/// LTL formulas exercising every operator and constraint form over the
/// parts of [`gen::small_org`].
pub const LTL_SUITE: &[&str] = &[
    "C[input(x)](a)",
    "X[output(x)](b)",
    "F[input(x)](a)",
    "G[output(x)](a or b)",
    "P[input(x)](b)",
    "H[role(x)](a)",
    "F[<=2][input(x)](a)",
    "F[<2][output(x)](b)",
    "F[=2][input(x)](a and b)",
    "F[<0][input(x)](a)",
    "G[<=1][role(x)](not a)",
    "G[<3][output(x)](a => b)",
    "G[=1][input(x)](b)",
    "G[<0][input(x)](false)",
    "P[<=2][output(x)](a)",
    "P[<1][input(x)](b)",
    "P[=1][role(x)](a and not b)",
    "H[<=1][input(x)](a or b)",
    "H[<2][output(x)](b)",
    "H[=2][input(x)](a)",
    "C[input(x)](a) => X[output(x)](b)",
    "C[input(x)](a) => F[<=3][output(x)](b)",
    "not (G[input(x)](a) and P[<=1][output(x)](not b))",
    "F[<=1][group(g)](a) or H[organisation](b)",
];

pub fn suite() -> Vec<(String, LtlProp)> {
    LTL_SUITE
        .iter()
        .map(|s| (s.to_string(), parse_ltl(s).expect("suite formula parses")))
        .collect()
}

fn compare_ltl(
    tally: &mut Tally,
    org: &OrgStructure,
    name: &str,
    f: &LtlProp,
    c: &CompiledProperty,
    tr: &Trace,
) {
    let got = c.check(std::slice::from_ref(tr)).expect("checks").outcome;
    let want = ltl_truth(org, f, tr).outcome();
    tally.cases += 1;
    tally.record(name, got);
    if got != want {
        tally.mismatch(format!(
            "{name}: checker {got}, oracle {want} on {}",
            describe(std::slice::from_ref(tr))
        ));
    }
}

/// Every trace over atoms `a`, `b` and the two parts of role `x` with
/// horizon at most `max_horizon`, against [`LTL_SUITE`].
pub fn ltl_exhaustive(max_horizon: usize) -> Tally {
    let org = gen::small_org();
    let parts = gen::atomic_parts(&org);
    let atoms = [id("a"), id("b")];
    let formulas: Vec<_> = suite()
        .into_iter()
        .map(|(s, f)| {
            let c = CompiledProperty::new(&compile_ltl(&f), &org).expect("compiles");
            (s, f, c)
        })
        .collect();
    let mut tally = Tally::default();
    for h in 0..=max_horizon {
        let bits = (h + 1) * parts.len() * atoms.len();
        for code in 0..1u64 << bits {
            let tr = gen::trace_from_bits("t", h, &parts, &atoms, code);
            for (s, f, c) in &formulas {
                compare_ltl(&mut tally, &org, s, f, c, &tr);
            }
        }
    }
    tally
}

/// Random formulas on random traces over a wider organisation; each
/// compiled formula is also compared with the brute-force core oracle.
pub fn ltl_random(cases: usize, seed: u64) -> Tally {
    let org = gen::wide_org();
    let parts = gen::atomic_parts(&org);
    let refs: Vec<PartRef> = gen::part_refs(&org);
    let atoms = [id("a"), id("b"), id("c")];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for _ in 0..cases {
        let f = gen::random_ltl(&mut rng, &refs, &atoms, 3, 6);
        let h = rng.gen_range(5..=40);
        let density = rng.gen_range(0.05..0.6);
        let tr = gen::random_trace(&mut rng, "t", h, &parts, &atoms, density);
        let core = compile_ltl(&f);
        let c = CompiledProperty::new(&core, &org).expect("compiles");
        let name = f.to_string();
        compare_ltl(&mut tally, &org, "random", &f, &c, &tr);
        let via_core = dyn_truth(&org, &core, std::slice::from_ref(&tr)).outcome();
        let direct = ltl_truth(&org, &f, &tr).outcome();
        if via_core != direct {
            tally.mismatch(format!(
                "{name}: core oracle {via_core}, LTL oracle {direct}"
            ));
        }
    }
    tally
}

/// Random single-trace core formulas against the brute-force oracle.
pub fn dyn_random(cases: usize, seed: u64) -> Tally {
    let org = gen::wide_org();
    let parts = gen::atomic_parts(&org);
    let refs = gen::part_refs(&org);
    let atoms = [id("a"), id("b")];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for _ in 0..cases {
        let f = gen::random_dyn(&mut rng, &refs, &atoms, 4, false);
        let n = rng.gen_range(1..=2);
        let traces: Vec<Trace> = (0..n)
            .map(|i| {
                let h = rng.gen_range(0..=12);
                let d = rng.gen_range(0.1..0.6);
                gen::random_trace(&mut rng, &format!("t{i}"), h, &parts, &atoms, d)
            })
            .collect();
        let got = CompiledProperty::new(&f, &org)
            .expect("compiles")
            .check(&traces)
            .expect("checks")
            .outcome;
        let want = dyn_truth(&org, &f, &traces).outcome();
        tally.cases += 1;
        tally.record("random", got);
        if got != want {
            tally.mismatch(format!(
                "{f}: checker {got}, oracle {want} on {}",
                describe(&traces)
            ));
        }
    }
    tally
}
