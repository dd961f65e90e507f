//! Text formats for models, interlevel assignments and realizations.
//!
//! One declaration per line; `#` starts a comment; a line starting with
//! whitespace continues the previous declaration.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dynamics::{AgrDyn, Filing, PropertyDecl};
use crate::ident::{is_ident_char, is_ident_start, Ident};
use crate::interlevel::{InterlevelAssignment, InterlevelRelation, RelationKind};
use crate::property::{parse_property, typecheck, Property};
use crate::realization::{AgentPropertyDecl, Owner, Realization, RealizationDyn};
use crate::state::{ArgKind, Ontology, Signature};
use crate::structure::RoleType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LoadError {
    pub line: usize,
    pub message: String,
}

/// A parsed model: structure, authority, ontologies, properties and any
/// interlevel relations declared alongside them.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub dynamics: AgrDyn,
    pub relations: InterlevelAssignment,
}

/// A parsed realization file.
#[derive(Debug, Clone, Default)]
pub struct RealizationModel {
    pub realization: Realization,
    pub dynamics: RealizationDyn,
}

struct Logical {
    line: usize,
    text: String,
}

fn logical_lines(text: &str) -> Vec<Logical> {
    let mut out: Vec<Logical> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split_once('#').map_or(raw, |(b, _)| b);
        if body.trim().is_empty() {
            continue;
        }
        let continues = body.starts_with(|c: char| c.is_whitespace());
        match out.last_mut() {
            Some(prev) if continues => {
                prev.text.push(' ');
                prev.text.push_str(body.trim());
            }
            _ => out.push(Logical {
                line: i + 1,
                text: body.trim().to_string(),
            }),
        }
    }
    out
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(l: &'a Logical) -> Self {
        Cursor {
            src: &l.text,
            pos: 0,
            line: l.line,
        }
    }

    fn err(&self, message: impl Into<String>) -> LoadError {
        LoadError {
            line: self.line,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        if !rest.starts_with(is_ident_start) {
            return None;
        }
        let len = rest
            .char_indices()
            .find(|&(_, c)| !is_ident_char(c))
            .map_or(rest.len(), |(i, _)| i);
        let w = rest[..len].trim_end_matches('.');
        self.pos += w.len();
        Some(w)
    }

    fn ident(&mut self, what: &str) -> Result<Ident, LoadError> {
        let w = self
            .word()
            .ok_or_else(|| self.err(format!("expected {what}")))?;
        Ident::new(w).map_err(|e| self.err(e.to_string()))
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let is_word = lit.starts_with(is_ident_start);
        if rest.starts_with(lit) && !(is_word && rest[lit.len()..].starts_with(is_ident_char)) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), LoadError> {
        if self.eat(lit) {
            Ok(())
        } else {
            let found = self.src[self.pos..]
                .split_whitespace()
                .next()
                .unwrap_or("end of line");
            Err(self.err(format!("expected `{lit}`, found `{found}`")))
        }
    }

    fn finish(&mut self) -> Result<(), LoadError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(format!("unexpected `{}`", &self.src[self.pos..])))
        }
    }

    fn rest(&mut self) -> &'a str {
        self.skip_ws();
        let r = &self.src[self.pos..];
        self.pos = self.src.len();
        r
    }

    fn ident_list(&mut self, what: &str) -> Result<Vec<Ident>, LoadError> {
        let mut out = vec![self.ident(what)?];
        while self.eat(",") {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    /// `{ p q/2 r(sym, num) }`; entries may be separated by `,` or `;`.
    fn signatures(&mut self) -> Result<Ontology, LoadError> {
        self.expect("{")?;
        let mut ont = Ontology::new();
        loop {
            while self.eat(",") || self.eat(";") {}
            if self.eat("}") {
                return Ok(ont);
            }
            let pred = self.ident("predicate or `}`")?;
            let kinds = if self.eat("/") {
                self.skip_ws();
                let digits: String = self.src[self.pos..]
                    .chars()
                    .take_while(char::is_ascii_digit)
                    .collect();
                self.pos += digits.len();
                let n: usize = digits
                    .parse()
                    .map_err(|_| self.err(format!("expected arity after `{pred}/`")))?;
                vec![ArgKind::Any; n]
            } else if self.eat("(") {
                let mut kinds = Vec::new();
                if !self.eat(")") {
                    loop {
                        kinds.push(match self.word() {
                            Some("sym") => ArgKind::Symbol,
                            Some("num") => ArgKind::Number,
                            Some("any") => ArgKind::Any,
                            _ => {
                                return Err(self.err("expected argument kind `sym`, `num` or `any`"))
                            }
                        });
                        if self.eat(")") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                kinds
            } else {
                Vec::new()
            };
            ont.declare(pred, Signature { kinds })
                .map_err(|e| self.err(e.to_string()))?;
        }
    }

    fn property(&mut self) -> Result<Property, LoadError> {
        self.expect(":=")?;
        self.skip_ws();
        let start = self.pos;
        let text = self.rest();
        parse_property(text).map_err(|e| LoadError {
            line: self.line,
            message: format!("{e} (column {})", start + e.pos + 1),
        })
    }
}

fn check_unique<'a>(
    seen: &mut BTreeSet<(&'static str, Ident)>,
    kind: &'static str,
    id: &Ident,
    c: &Cursor<'a>,
) -> Result<(), LoadError> {
    if seen.insert((kind, id.clone())) {
        Ok(())
    } else {
        Err(c.err(format!("duplicate {kind} `{id}`")))
    }
}

/// Endpoints of a transfer or interaction: `from <role> to <role>`.
fn endpoints(c: &mut Cursor<'_>, noun: &str) -> Result<Option<(Ident, Ident)>, LoadError> {
    if c.at_end() {
        return Ok(None);
    }
    c.expect("from")?;
    let src = c.ident("source role")?;
    if c.peek() == Some(',') {
        return Err(c.err(format!("a {noun} has exactly one source role")));
    }
    c.expect("to")?;
    let dst = c.ident("destination role")?;
    if c.peek() == Some(',') {
        return Err(c.err(format!("a {noun} has exactly one destination role")));
    }
    c.finish()?;
    Ok(Some((src, dst)))
}

fn interface_blocks(c: &mut Cursor<'_>) -> Result<(Option<Ontology>, Option<Ontology>), LoadError> {
    let mut input = None;
    let mut output = None;
    while !c.at_end() {
        if c.eat("input") {
            if input.is_some() {
                return Err(c.err("input ontology given twice"));
            }
            input = Some(c.signatures()?);
        } else if c.eat("output") {
            if output.is_some() {
                return Err(c.err("output ontology given twice"));
            }
            output = Some(c.signatures()?);
        } else {
            return Err(c.err("expected `input { ... }` or `output { ... }`"));
        }
    }
    Ok((input, output))
}

fn relation(c: &mut Cursor<'_>) -> Result<InterlevelRelation, LoadError> {
    let id = c.ident("relation id")?;
    c.expect("for")?;
    let kind = if c.eat("group") {
        RelationKind::RoleGroup(c.ident("group")?)
    } else if c.eat("organisation") || c.eat("organization") {
        RelationKind::GroupOrganisation
    } else {
        return Err(c.err("expected `group <id>` or `organisation`"));
    };
    c.expect(":")?;
    let consequent = c.ident("consequent property")?;
    c.expect("<=")?;
    let antecedents = if c.at_end() {
        Vec::new()
    } else {
        c.ident_list("antecedent property")?
    };
    c.finish()?;
    Ok(InterlevelRelation {
        id,
        kind,
        consequent,
        antecedents,
    })
}

fn merge_into(union: &mut Ontology, ont: &Ontology, c: &Cursor<'_>) -> Result<(), LoadError> {
    union.merge(ont).map_err(|e| c.err(e.to_string()))
}

/// Parses a model file.
pub fn parse_model(text: &str) -> Result<Model, LoadError> {
    let mut model = Model::default();
    let d = &mut model.dynamics;
    let mut seen = BTreeSet::new();
    let mut vocabulary = Ontology::new();
    let mut pending: Vec<(usize, Ident)> = Vec::new();

    for l in logical_lines(text) {
        let mut c = Cursor::new(&l);
        let keyword = c
            .word()
            .ok_or_else(|| c.err("expected a declaration keyword"))?;
        match keyword {
            "organisation" | "organization" => {
                if d.org.name.is_some() {
                    return Err(c.err("organisation declared twice"));
                }
                d.org.name = Some(c.ident("organisation name")?);
                c.finish()?;
            }
            "role" => {
                for r in c.ident_list("role")? {
                    check_unique(&mut seen, "role", &r, &c)?;
                    d.org.roles.insert(r);
                }
                c.finish()?;
            }
            "group" => {
                let g = c.ident("group")?;
                check_unique(&mut seen, "group", &g, &c)?;
                if c.eat("{") {
                    if !c.eat("}") {
                        c.expect("roles")?;
                        for r in c.ident_list("role")? {
                            d.org.role_in.insert((r, g.clone()));
                        }
                        c.expect("}")?;
                    }
                }
                c.finish()?;
                d.org.groups.insert(g);
            }
            "role_in" => {
                let r = c.ident("role")?;
                let g = c.ident("group")?;
                c.finish()?;
                d.org.role_in.insert((r, g));
            }
            "transfer" | "interaction" => {
                let e = c.ident(keyword)?;
                check_unique(&mut seen, "element", &e, &c)?;
                let ends = endpoints(&mut c, keyword)?;
                match (keyword, ends) {
                    ("transfer", Some((s, t))) => d.org.add_transfer(e, s, t),
                    ("transfer", None) => {
                        d.org.transfers.insert(e);
                    }
                    (_, Some((s, t))) => d.org.add_interaction(e, s, t),
                    (_, None) => {
                        d.org.interactions.insert(e);
                    }
                }
            }
            "source_of_transfer"
            | "destination_of_transfer"
            | "source_of_interaction"
            | "destination_of_interaction" => {
                let r = c.ident("role")?;
                let e = c.ident("element")?;
                c.finish()?;
                let rel = match keyword {
                    "source_of_transfer" => &mut d.org.source_of_transfer,
                    "destination_of_transfer" => &mut d.org.destination_of_transfer,
                    "source_of_interaction" => &mut d.org.source_of_interaction,
                    _ => &mut d.org.destination_of_interaction,
                };
                rel.insert((r, e));
            }
            "task" => {
                for t in c.ident_list("task")? {
                    check_unique(&mut seen, "task", &t, &c)?;
                    d.authority.tasks.insert(t);
                }
                c.finish()?;
            }
            "roletype" => {
                let r = c.ident("role")?;
                let w = c.word().unwrap_or("");
                let ty = RoleType::parse(w).ok_or_else(|| {
                    c.err(format!(
                        "unknown role type `{w}` (expected line, staff or functional_authority)"
                    ))
                })?;
                c.finish()?;
                if d.authority.role_of_type.insert(r.clone(), ty).is_some() {
                    return Err(c.err(format!("role type of `{r}` given twice")));
                }
            }
            "superior" => {
                let a = c.ident("role")?;
                c.expect("over")?;
                let b = c.ident("role")?;
                c.finish()?;
                d.authority.superior_of.insert((a, b));
            }
            "delegates" => {
                let a = c.ident("role")?;
                c.expect("task")?;
                let t = c.ident("task")?;
                c.expect("to")?;
                let b = c.ident("role")?;
                c.finish()?;
                d.authority.delegates_task_to.insert((a, t, b));
            }
            "authorised" | "authorized" | "responsible" => {
                let r = c.ident("role")?;
                c.expect("for")?;
                let t = c.ident("task")?;
                c.finish()?;
                if keyword == "responsible" {
                    d.authority.responsible_for.insert((r, t));
                } else {
                    d.authority.authorised_for.insert((r, t));
                }
            }
            "ontology" => {
                let r = c.ident("role")?;
                check_unique(&mut seen, "ontology", &r, &c)?;
                let (input, output) = interface_blocks(&mut c)?;
                for (map, ont) in [
                    (&mut d.input_ontologies, input),
                    (&mut d.output_ontologies, output),
                ] {
                    let ont = ont.unwrap_or_default();
                    merge_into(&mut vocabulary, &ont, &c)?;
                    map.insert(r.clone(), ont);
                }
            }
            "property" => {
                let id = c.ident("property id")?;
                check_unique(&mut seen, "property", &id, &c)?;
                let filing = if c.eat("role") {
                    Filing::Role(c.ident("role")?)
                } else if c.eat("transfer") {
                    Filing::Transfer(c.ident("transfer")?)
                } else if c.eat("group") {
                    let group = c.ident("group")?;
                    Filing::Group {
                        group,
                        intragroup: c.eat("intragroup"),
                    }
                } else if c.eat("interaction") {
                    Filing::Interaction(c.ident("interaction")?)
                } else if c.eat("organisation") || c.eat("organization") {
                    Filing::Organisation
                } else {
                    return Err(c.err(
                        "expected `role`, `transfer`, `group`, `interaction` or `organisation`",
                    ));
                };
                let source = c.property()?;
                d.add_property(PropertyDecl::new(id.clone(), filing, source));
                pending.push((l.line, id));
            }
            "relation" => {
                let rel = relation(&mut c)?;
                check_unique(&mut seen, "relation", &rel.id, &c)?;
                model.relations.relations.push(rel);
            }
            other => return Err(c.err(format!("unknown declaration `{other}`"))),
        }
    }

    for (line, id) in pending {
        let decl = &model.dynamics.properties[&id];
        typecheck(&decl.core, &vocabulary).map_err(|e| LoadError {
            line,
            message: format!("property `{id}`: {e}"),
        })?;
    }
    Ok(model)
}

/// Parses a file containing only `relation` declarations.
pub fn parse_assignment(text: &str) -> Result<InterlevelAssignment, LoadError> {
    let mut a = InterlevelAssignment::default();
    let mut seen = BTreeSet::new();
    for l in logical_lines(text) {
        let mut c = Cursor::new(&l);
        match c.word() {
            Some("relation") => {
                let rel = relation(&mut c)?;
                check_unique(&mut seen, "relation", &rel.id, &c)?;
                a.relations.push(rel);
            }
            _ => return Err(c.err("expected `relation`")),
        }
    }
    Ok(a)
}

/// Parses a realization file.
pub fn parse_realization(text: &str) -> Result<RealizationModel, LoadError> {
    let mut m = RealizationModel::default();
    let mut seen = BTreeSet::new();
    let mut vocabulary = Ontology::new();
    let mut pending = Vec::new();
    for l in logical_lines(text) {
        let mut c = Cursor::new(&l);
        let keyword = c
            .word()
            .ok_or_else(|| c.err("expected a declaration keyword"))?;
        match keyword {
            "agent" => {
                for a in c.ident_list("agent")? {
                    check_unique(&mut seen, "agent", &a, &c)?;
                    m.realization.agents.insert(a);
                }
                c.finish()?;
            }
            "fulfils" | "fulfills" => {
                let a = c.ident("agent")?;
                for r in c.ident_list("role")? {
                    m.realization.fulfils.insert((a.clone(), r));
                }
                c.finish()?;
            }
            "agentontology" => {
                let a = c.ident("agent")?;
                check_unique(&mut seen, "agentontology", &a, &c)?;
                let (input, output) = interface_blocks(&mut c)?;
                for (map, ont) in [
                    (&mut m.dynamics.input_ontologies, input),
                    (&mut m.dynamics.output_ontologies, output),
                ] {
                    let ont = ont.unwrap_or_default();
                    merge_into(&mut vocabulary, &ont, &c)?;
                    map.insert(a.clone(), ont);
                }
            }
            "agentproperty" | "commproperty" => {
                let id = c.ident("property id")?;
                check_unique(&mut seen, "property", &id, &c)?;
                let owner = if keyword == "agentproperty" {
                    c.expect("agent")?;
                    Owner::Agent(c.ident("agent")?)
                } else {
                    c.expect("from")?;
                    let from = c.ident("agent")?;
                    c.expect("to")?;
                    let to = c.ident("agent")?;
                    Owner::Comm { from, to }
                };
                let source = c.property()?;
                m.dynamics
                    .add_property(AgentPropertyDecl::new(id.clone(), owner, source));
                pending.push((l.line, id));
            }
            other => return Err(c.err(format!("unknown declaration `{other}`"))),
        }
    }
    for (line, id) in pending {
        let decl = &m.dynamics.properties[&id];
        typecheck(&decl.core, &vocabulary).map_err(|e| LoadError {
            line,
            message: format!("property `{id}`: {e}"),
        })?;
    }
    Ok(m)
}
