//! Run reports: an ordered list of records rendered as text or as
//! line-delimited JSON, with a digest over everything except timings.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use agrkit_core::property::Verdict;
use agrkit_core::violation::{Severity, Violation};

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Command {
        args: Vec<String>,
    },
    Input {
        role: String,
        path: String,
        sha256: String,
    },
    Output {
        path: String,
        sha256: String,
    },
    Violation {
        severity: String,
        rule: String,
        subjects: Vec<String>,
        message: String,
    },
    Verdict {
        property: String,
        outcome: String,
        trace: Option<String>,
        witness: Vec<String>,
        explanation: String,
    },
    Rule {
        text: String,
    },
    Residue {
        property: String,
        reason: String,
    },
    Coverage {
        check: String,
        ok: bool,
        missing: Vec<String>,
    },
    Tree {
        text: String,
    },
    Edge {
        relation: String,
        consequent: String,
        antecedent: String,
    },
    Relation {
        relation: String,
        falsified: bool,
        trace: Option<String>,
        witness: Vec<String>,
    },
    Proposition {
        trace: String,
        applicable: bool,
        detail: String,
    },
    Finding {
        finding: String,
        subject: String,
    },
    Path {
        nodes: Vec<String>,
    },
    Alias {
        property: String,
        agent_part: String,
        predicate: Option<String>,
        role_part: String,
    },
    Entailment {
        schema: String,
        consequent: String,
        refuted: bool,
        trace: Option<String>,
        witness: Vec<String>,
    },
    Note {
        text: String,
    },
    Timing {
        phase: String,
        millis: u128,
    },
    Summary {
        exit: i32,
        digest: String,
    },
}

impl Record {
    pub fn violation(v: &Violation) -> Self {
        Record::Violation {
            severity: match v.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            }
            .to_string(),
            rule: v.rule.to_string(),
            subjects: v.subjects.iter().map(ToString::to_string).collect(),
            message: v.message.clone(),
        }
    }

    pub fn verdict(property: &str, v: &Verdict) -> Self {
        Record::Verdict {
            property: property.to_string(),
            outcome: v.outcome.to_string(),
            trace: v.trace.as_ref().map(ToString::to_string),
            witness: v.witness.iter().map(ToString::to_string).collect(),
            explanation: v.explanation.clone(),
        }
    }

    pub fn note(text: impl Into<String>) -> Self {
        Record::Note { text: text.into() }
    }

    fn text(&self) -> String {
        match self {
            Record::Command { args } => format!("$ {}", args.join(" ")),
            Record::Input { role, path, sha256 } => format!("{role} {path} sha256:{sha256}"),
            Record::Output { path, sha256 } => format!("wrote {path} sha256:{sha256}"),
            Record::Violation {
                severity,
                rule,
                subjects,
                message,
            } => {
                let subj = if subjects.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", subjects.join(", "))
                };
                format!("{severity}[{rule}]{subj}: {message}")
            }
            Record::Verdict {
                property,
                explanation,
                ..
            } => format!("{property}: {explanation}"),
            Record::Rule { text } => format!("rule {text}"),
            Record::Residue { property, reason } => {
                format!("not executable: {property}: {reason}")
            }
            Record::Coverage { check, ok, missing } => {
                if *ok {
                    format!("{check}: yes")
                } else {
                    format!("{check}: no (missing {})", missing.join(", "))
                }
            }
            Record::Tree { text } => text.trim_end().to_string(),
            Record::Edge {
                relation,
                consequent,
                antecedent,
            } => format!("edge {relation} {consequent} {antecedent}"),
            Record::Relation {
                relation,
                falsified,
                trace,
                witness,
            } => {
                if *falsified {
                    format!(
                        "relation {relation}: falsified on {} at {}",
                        trace.as_deref().unwrap_or("?"),
                        witness.join(", ")
                    )
                } else {
                    format!("relation {relation}: not falsified")
                }
            }
            Record::Proposition {
                trace,
                applicable,
                detail,
            } => {
                let state = if *applicable {
                    "applicable"
                } else {
                    "not applicable"
                };
                format!("proposition on {trace}: {state}; {detail}")
            }
            Record::Finding { finding, .. } => format!("diagnosis: {finding}"),
            Record::Path { nodes } => format!("path: {}", nodes.join(" <- ")),
            Record::Alias {
                property,
                agent_part,
                predicate,
                role_part,
            } => format!(
                "alias {property}: {agent_part} {} -> {role_part}",
                predicate.as_deref().unwrap_or("*")
            ),
            Record::Entailment {
                schema,
                consequent,
                refuted,
                trace,
                witness,
            } => {
                if *refuted {
                    format!(
                        "{schema}: {consequent} refuted on {} at {}",
                        trace.as_deref().unwrap_or("?"),
                        witness.join(", ")
                    )
                } else {
                    format!("{schema}: {consequent} not refuted")
                }
            }
            Record::Note { text } => text.clone(),
            Record::Timing { phase, millis } => format!("time {phase}: {millis} ms"),
            Record::Summary { exit, digest } => format!("exit {exit}, report sha256:{digest}"),
        }
    }

    fn json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub records: Vec<Record>,
}

impl RunReport {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    /// SHA-256 over the JSON form of every record except timings.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.records {
            if matches!(r, Record::Timing { .. } | Record::Summary { .. }) {
                continue;
            }
            h.update(r.json().as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn finish(&mut self, exit: i32) {
        let digest = self.digest();
        self.push(Record::Summary { exit, digest });
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = match format {
                Format::Text => r.text(),
                Format::Records => r.json(),
            };
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
