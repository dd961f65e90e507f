//! Recursive-descent parser for both property dialects.

use num_rational::Rational64;
use num_traits::Zero;

use crate::ident::Ident;
use crate::property::ast::{
    ArgTerm, AtomPattern, CmpOp, Domain, DynProp, NumTerm, Quantifier, StateProp, Term, TimeTerm,
};
use crate::property::lexer::{tokenize, Spanned, Tok};
use crate::property::ltl::{LtlProp, ModalOp, TimeConstraint};
use crate::property::{Property, SyntaxError};
use crate::trace::PartRef;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarKind {
    Time,
    Num,
    Trace,
}

impl VarKind {
    fn name(self) -> &'static str {
        match self {
            VarKind::Time => "time",
            VarKind::Num => "numeric",
            VarKind::Trace => "trace",
        }
    }
}

/// Parses a property, choosing the dialect by its `ttl:` or `ltl:` prefix.
pub fn parse_property(text: &str) -> Result<Property, SyntaxError> {
    let lead = text.len() - text.trim_start().len();
    let body = &text[lead..];
    let (dialect, rest) = body.split_once(':').ok_or_else(|| {
        SyntaxError::new(char_pos(text, lead), "expected `ttl:` or `ltl:` prefix")
    })?;
    let base = char_pos(text, lead + dialect.len() + 1);
    match dialect.trim() {
        "ttl" => parse_ttl_at(rest, base).map(Property::Ttl),
        "ltl" => parse_ltl_at(rest, base).map(Property::Ltl),
        _ => Err(SyntaxError::new(
            char_pos(text, lead),
            "expected `ttl:` or `ltl:` prefix",
        )),
    }
}

/// Parses a formula of the reified core without a dialect prefix.
pub fn parse_ttl(text: &str) -> Result<DynProp, SyntaxError> {
    parse_ttl_at(text, 0)
}

/// Parses an LTL formula without a dialect prefix.
pub fn parse_ltl(text: &str) -> Result<LtlProp, SyntaxError> {
    parse_ltl_at(text, 0)
}

fn char_pos(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

fn parse_ttl_at(text: &str, base: usize) -> Result<DynProp, SyntaxError> {
    let mut p = Parser::new(text, base)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

fn parse_ltl_at(text: &str, base: usize) -> Result<LtlProp, SyntaxError> {
    let mut p = Parser::new(text, base)?;
    let f = p.ltl_implication()?;
    p.finish()?;
    Ok(f)
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    end: usize,
    scope: Vec<(Ident, VarKind)>,
}

impl Parser {
    fn new(text: &str, base: usize) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text, base)?,
            idx: 0,
            end: base + text.chars().count(),
            scope: Vec::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.idx + n).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |s| s.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|s| s.tok.clone());
        self.idx += 1;
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.pos(), message))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, SyntaxError> {
        match self.peek() {
            None => self.error(format!("unexpected end of input, expected {wanted}")),
            Some(t) => self.error(format!("unexpected {}, expected {wanted}", t.describe())),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn ident(&mut self, what: &str) -> Result<Ident, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let id = Ident::new(s).map_err(|e| SyntaxError::new(self.pos(), e.to_string()))?;
                self.idx += 1;
                Ok(id)
            }
            _ => self.unexpected(what),
        }
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        if self.idx < self.toks.len() {
            return self.unexpected("end of input");
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<VarKind> {
        self.scope
            .iter()
            .rev()
            .find(|(v, _)| v.as_str() == name)
            .map(|(_, k)| *k)
    }

    fn formula(&mut self) -> Result<DynProp, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula()?;
            return Ok(DynProp::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<DynProp, SyntaxError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            acc = DynProp::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<DynProp, SyntaxError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::And) {
            acc = DynProp::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<DynProp, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.idx += 1;
                Ok(DynProp::not(self.unary()?))
            }
            Some(Tok::Forall) => {
                self.idx += 1;
                self.quantified(Quantifier::Forall)
            }
            Some(Tok::Exists) => {
                self.idx += 1;
                self.quantified(Quantifier::Exists)
            }
            _ => self.primary(),
        }
    }

    fn quantified(&mut self, q: Quantifier) -> Result<DynProp, SyntaxError> {
        let kind = match (self.peek_word(), self.peek_at(1)) {
            (Some("trace"), Some(Tok::Ident(_))) => Some(VarKind::Trace),
            (Some("num"), Some(Tok::Ident(_))) => Some(VarKind::Num),
            (Some("time"), Some(Tok::Ident(_))) => Some(VarKind::Time),
            _ => None,
        };
        if kind.is_some() {
            self.idx += 1;
        }
        let kind = kind.unwrap_or(VarKind::Time);
        let mut vars = vec![self.ident("a variable name")?];
        while self.eat(&Tok::Comma) {
            vars.push(self.ident("a variable name")?);
        }
        let domain = if self.peek_word() == Some("in") {
            if kind != VarKind::Time {
                return self.error("only time variables take `in [lo, hi]` bounds");
            }
            self.idx += 1;
            self.expect(Tok::LBracket)?;
            let lo = self.time_term()?;
            self.expect(Tok::Comma)?;
            let hi = if self.eat(&Tok::Star) {
                None
            } else {
                Some(self.time_term()?)
            };
            self.expect(Tok::RBracket)?;
            Domain::Time { lo: Some(lo), hi }
        } else {
            match kind {
                VarKind::Time => Domain::unbounded_time(),
                VarKind::Num => Domain::Num,
                VarKind::Trace => Domain::Trace,
            }
        };
        if !self.eat(&Tok::Dot) && !self.eat(&Tok::Colon) {
            return self.unexpected("`.` after the quantified variables");
        }
        let depth = self.scope.len();
        for v in &vars {
            self.scope.push((v.clone(), kind));
        }
        let body = self.formula();
        self.scope.truncate(depth);
        let mut body = body?;
        for v in vars.into_iter().rev() {
            body = DynProp::Quant {
                q,
                var: v,
                domain: domain.clone(),
                body: Box::new(body),
            };
        }
        Ok(body)
    }

    fn primary(&mut self) -> Result<DynProp, SyntaxError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.idx += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(w)) if w == "true" && self.lookup(w).is_none() => {
                self.idx += 1;
                Ok(DynProp::True)
            }
            Some(Tok::Ident(w)) if w == "false" && self.lookup(w).is_none() => {
                self.idx += 1;
                Ok(DynProp::False)
            }
            Some(Tok::Ident(w))
                if (w == "holds" || w == "state")
                    && matches!(self.peek_at(1), Some(Tok::LParen | Tok::LBracket)) =>
            {
                self.idx += 1;
                self.holds()
            }
            Some(Tok::Ident(_) | Tok::Number(_) | Tok::Minus) => self.comparison(),
            _ => self.unexpected("a formula"),
        }
    }

    fn holds(&mut self) -> Result<DynProp, SyntaxError> {
        let trace = if self.eat(&Tok::LBracket) {
            let pos = self.pos();
            let g = self.ident("a trace variable")?;
            match self.lookup(g.as_str()) {
                Some(VarKind::Trace) | None => {}
                Some(k) => {
                    return Err(SyntaxError::new(
                        pos,
                        format!("`{g}` is a {} variable, not a trace variable", k.name()),
                    ))
                }
            }
            self.expect(Tok::RBracket)?;
            Some(g)
        } else {
            None
        };
        self.expect(Tok::LParen)?;
        let time = self.time_term()?;
        self.expect(Tok::Comma)?;
        let part = self.part()?;
        self.expect(Tok::Comma)?;
        let prop = self.state_prop()?;
        self.expect(Tok::RParen)?;
        Ok(DynProp::Holds {
            trace,
            time,
            part,
            prop,
        })
    }

    fn integer(&mut self) -> Result<i64, SyntaxError> {
        match self.peek() {
            Some(Tok::Number(n)) if n.is_integer() => {
                let v = n.to_integer();
                self.idx += 1;
                Ok(v)
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn time_term(&mut self) -> Result<TimeTerm, SyntaxError> {
        if self.eat(&Tok::Minus) {
            return Ok(TimeTerm::constant(-self.integer()?));
        }
        if matches!(self.peek(), Some(Tok::Number(_))) {
            return Ok(TimeTerm::constant(self.integer()?));
        }
        let pos = self.pos();
        let v = self.ident("a time term")?;
        match self.lookup(v.as_str()) {
            Some(VarKind::Time) => {}
            Some(k) => {
                return Err(SyntaxError::new(
                    pos,
                    format!("`{v}` is a {} variable, not a time variable", k.name()),
                ))
            }
            None => {
                return Err(SyntaxError::new(
                    pos,
                    format!("unbound time variable `{v}`"),
                ))
            }
        }
        let offset = if self.eat(&Tok::Plus) {
            self.integer()?
        } else if self.eat(&Tok::Minus) {
            -self.integer()?
        } else {
            0
        };
        Ok(TimeTerm::plus(v, offset))
    }

    fn part(&mut self) -> Result<PartRef, SyntaxError> {
        let pos = self.pos();
        let word = self.ident("a part")?;
        if matches!(word.as_str(), "organisation" | "organization") {
            return Ok(PartRef::Organisation);
        }
        let ctor: fn(Ident) -> PartRef = match word.as_str() {
            "input" => PartRef::Input,
            "output" => PartRef::Output,
            "role" => PartRef::Role,
            "group" => PartRef::Group,
            _ => {
                return Err(SyntaxError::new(
                    pos,
                    format!("unexpected `{word}`, expected input(..), output(..), role(..), group(..) or organisation"),
                ))
            }
        };
        self.expect(Tok::LParen)?;
        let name = self.ident("a role or group name")?;
        self.expect(Tok::RParen)?;
        Ok(ctor(name))
    }

    fn comparison(&mut self) -> Result<DynProp, SyntaxError> {
        let pos = self.pos();
        let lhs = self.cmp_term()?;
        let op = match self.bump() {
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ne) => CmpOp::Ne,
            Some(Tok::Ge) => CmpOp::Ge,
            Some(Tok::Gt) => CmpOp::Gt,
            _ => {
                self.idx -= 1;
                return self.unexpected("a comparison operator");
            }
        };
        let rhs = self.cmp_term()?;
        let as_time = |t: &Term| match t {
            Term::Num(NumTerm::Const(c)) if c.is_integer() => {
                Some(Term::Time(TimeTerm::constant(c.to_integer())))
            }
            _ => None,
        };
        let (lhs, rhs) = match (&lhs, &rhs) {
            (Term::Time(_), Term::Time(_)) | (Term::Num(_), Term::Num(_)) => (lhs, rhs),
            (Term::Time(_), _) if as_time(&rhs).is_some() => {
                let r = as_time(&rhs).expect("checked");
                (lhs, r)
            }
            (_, Term::Time(_)) if as_time(&lhs).is_some() => {
                let l = as_time(&lhs).expect("checked");
                (l, rhs)
            }
            _ => {
                return Err(SyntaxError::new(
                    pos,
                    "comparison mixes a time term with a numeric term",
                ))
            }
        };
        Ok(DynProp::Cmp(lhs, op, rhs))
    }

    fn cmp_term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.idx += 1;
                match self.bump() {
                    Some(Tok::Number(n)) => Ok(Term::Num(NumTerm::Const(-n))),
                    _ => {
                        self.idx -= 1;
                        self.unexpected("a number")
                    }
                }
            }
            Some(Tok::Number(n)) => {
                let n = *n;
                self.idx += 1;
                Ok(Term::Num(NumTerm::Const(n)))
            }
            Some(Tok::Ident(w)) => match self.lookup(w) {
                Some(VarKind::Num) => {
                    let v = self.ident("a variable")?;
                    Ok(Term::Num(NumTerm::Var(v)))
                }
                Some(VarKind::Trace) => {
                    self.error(format!("trace variable `{w}` cannot be compared"))
                }
                _ => Ok(Term::Time(self.time_term()?)),
            },
            _ => self.unexpected("a term"),
        }
    }

    fn state_prop(&mut self) -> Result<StateProp, SyntaxError> {
        let lhs = self.sp_disjunction()?;
        if self.eat(&Tok::Implies) {
            return Ok(StateProp::implies(lhs, self.state_prop()?));
        }
        Ok(lhs)
    }

    fn sp_disjunction(&mut self) -> Result<StateProp, SyntaxError> {
        let mut acc = self.sp_conjunction()?;
        while self.eat(&Tok::Or) {
            acc = StateProp::or(acc, self.sp_conjunction()?);
        }
        Ok(acc)
    }

    fn sp_conjunction(&mut self) -> Result<StateProp, SyntaxError> {
        let mut acc = self.sp_unary()?;
        while self.eat(&Tok::And) {
            acc = StateProp::and(acc, self.sp_unary()?);
        }
        Ok(acc)
    }

    fn sp_unary(&mut self) -> Result<StateProp, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.idx += 1;
                Ok(StateProp::not(self.sp_unary()?))
            }
            Some(Tok::LParen) => {
                self.idx += 1;
                let p = self.state_prop()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Some(Tok::Ident(w)) if w == "true" => {
                self.idx += 1;
                Ok(StateProp::True)
            }
            Some(Tok::Ident(w)) if w == "false" => {
                self.idx += 1;
                Ok(StateProp::False)
            }
            Some(Tok::Ident(_)) => self.atom_pattern().map(StateProp::Atom),
            _ => self.unexpected("a state property"),
        }
    }

    fn atom_pattern(&mut self) -> Result<AtomPattern, SyntaxError> {
        let predicate = self.ident("a predicate")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.arg_term()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(AtomPattern { predicate, args })
    }

    fn arg_term(&mut self) -> Result<ArgTerm, SyntaxError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.idx += 1;
                match self.bump() {
                    Some(Tok::Number(n)) => Ok(ArgTerm::Num(-n)),
                    _ => {
                        self.idx -= 1;
                        self.unexpected("a number")
                    }
                }
            }
            Some(Tok::Number(n)) => {
                let n = *n;
                self.idx += 1;
                Ok(ArgTerm::Num(n))
            }
            Some(Tok::Ident(w)) => {
                let kind = self.lookup(w);
                let pos = self.pos();
                let id = self.ident("an argument")?;
                match kind {
                    Some(VarKind::Num) => Ok(ArgTerm::Var(id)),
                    Some(k) => Err(SyntaxError::new(
                        pos,
                        format!("{} variable `{id}` cannot appear inside an atom", k.name()),
                    )),
                    None => Ok(ArgTerm::Sym(id)),
                }
            }
            _ => self.unexpected("an atom argument"),
        }
    }

    fn ltl_implication(&mut self) -> Result<LtlProp, SyntaxError> {
        let lhs = self.ltl_disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.ltl_implication()?;
            return Ok(LtlProp::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn ltl_disjunction(&mut self) -> Result<LtlProp, SyntaxError> {
        let mut acc = self.ltl_conjunction()?;
        while self.eat(&Tok::Or) {
            acc = LtlProp::Or(Box::new(acc), Box::new(self.ltl_conjunction()?));
        }
        Ok(acc)
    }

    fn ltl_conjunction(&mut self) -> Result<LtlProp, SyntaxError> {
        let mut acc = self.ltl_unary()?;
        while self.eat(&Tok::And) {
            acc = LtlProp::And(Box::new(acc), Box::new(self.ltl_unary()?));
        }
        Ok(acc)
    }

    fn ltl_unary(&mut self) -> Result<LtlProp, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.idx += 1;
                Ok(LtlProp::Not(Box::new(self.ltl_unary()?)))
            }
            Some(Tok::LParen) => {
                self.idx += 1;
                let p = self.ltl_implication()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Some(Tok::Ident(w)) if w == "true" => {
                self.idx += 1;
                Ok(LtlProp::True)
            }
            Some(Tok::Ident(w)) if w == "false" => {
                self.idx += 1;
                Ok(LtlProp::False)
            }
            Some(Tok::Ident(w)) if ModalOp::parse(w).is_some() => {
                let op = ModalOp::parse(w).expect("checked");
                self.idx += 1;
                self.modal(op)
            }
            _ => self.unexpected("a modal operator C, X, F, G, P or H"),
        }
    }

    fn modal(&mut self, op: ModalOp) -> Result<LtlProp, SyntaxError> {
        self.expect(Tok::LBracket)?;
        let constraint = match self.peek() {
            Some(Tok::Lt | Tok::Le | Tok::Eq | Tok::Number(_)) => {
                if !op.accepts_constraint() {
                    return self.error(format!("operator {op} takes no time constraint"));
                }
                let c = self.constraint()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::LBracket)?;
                Some(c)
            }
            _ => None,
        };
        let part = match (self.peek_word(), self.peek_at(1)) {
            (Some("input" | "output" | "role" | "group"), Some(Tok::LParen))
            | (Some("organisation" | "organization"), _) => self.part()?,
            _ => PartRef::Role(self.ident("a role or part index")?),
        };
        self.expect(Tok::RBracket)?;
        self.expect(Tok::LParen)?;
        let prop = self.state_prop()?;
        self.expect(Tok::RParen)?;
        Ok(LtlProp::modal(op, constraint, part, prop))
    }

    fn constraint(&mut self) -> Result<TimeConstraint, SyntaxError> {
        let ctor: fn(u32) -> TimeConstraint = match self.peek() {
            Some(Tok::Lt) => {
                self.idx += 1;
                TimeConstraint::Lt
            }
            Some(Tok::Le) => {
                self.idx += 1;
                TimeConstraint::Le
            }
            Some(Tok::Eq) => {
                self.idx += 1;
                TimeConstraint::Eq
            }
            _ => TimeConstraint::Eq,
        };
        match self.peek() {
            Some(Tok::Number(n)) if n.is_integer() && !(*n < Rational64::zero()) => {
                let v = u32::try_from(n.to_integer())
                    .map_err(|_| SyntaxError::new(self.pos(), "time constraint too large"))?;
                self.idx += 1;
                Ok(ctor(v))
            }
            _ => self.unexpected("a non-negative integer time constraint"),
        }
    }
}
