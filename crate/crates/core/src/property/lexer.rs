//! Tokenizer shared by both property dialects.

use num_rational::Rational64;

use crate::ident::{is_ident_char, is_ident_start};
use crate::property::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(Rational64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    Implies,
    And,
    Or,
    Not,
    Forall,
    Exists,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    Tok::Dot => ".",
                    Tok::Colon => ":",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Lt => "<",
                    Tok::Le => "<=",
                    Tok::Eq => "=",
                    Tok::Ne => "!=",
                    Tok::Ge => ">=",
                    Tok::Gt => ">",
                    Tok::Implies => "=>",
                    Tok::And => "and",
                    Tok::Or => "or",
                    Tok::Not => "not",
                    Tok::Forall => "forall",
                    Tok::Exists => "exists",
                    Tok::Ident(_) | Tok::Number(_) => unreachable!(),
                };
                format!("`{s}`")
            }
        }
    }
}

/// A token and its character offset in the source.
#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

pub fn tokenize(src: &str, base: usize) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = base + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            ':' => (Tok::Colon, 1),
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '*' => (Tok::Star, 1),
            '&' | '∧' => (Tok::And, 1),
            '|' | '∨' => (Tok::Or, 1),
            '¬' => (Tok::Not, 1),
            '⇒' | '→' => (Tok::Implies, 1),
            '≤' => (Tok::Le, 1),
            '≥' => (Tok::Ge, 1),
            '≠' => (Tok::Ne, 1),
            '∀' => (Tok::Forall, 1),
            '∃' => (Tok::Exists, 1),
            '!' if peek == Some('=') => (Tok::Ne, 2),
            '!' => (Tok::Not, 1),
            '<' if peek == Some('=') => (Tok::Le, 2),
            '<' => (Tok::Lt, 1),
            '>' if peek == Some('=') => (Tok::Ge, 2),
            '>' => (Tok::Gt, 1),
            '=' if peek == Some('>') => (Tok::Implies, 2),
            '=' => (Tok::Eq, 1),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let num: String = chars[i..j].iter().collect();
                let num: i64 = num
                    .parse()
                    .map_err(|_| SyntaxError::new(pos, "number out of range"))?;
                let mut value = Rational64::from_integer(num);
                if chars.get(j) == Some(&'/')
                    && chars.get(j + 1).is_some_and(|c| c.is_ascii_digit())
                {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    let den: String = chars[j + 1..k].iter().collect();
                    let den: i64 = den
                        .parse()
                        .map_err(|_| SyntaxError::new(pos, "number out of range"))?;
                    if den == 0 {
                        return Err(SyntaxError::new(pos, "zero denominator"));
                    }
                    value = Rational64::new(num, den);
                    j = k;
                }
                (Tok::Number(value), j - i)
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        Some(&c) if c == '.' => {
                            if chars
                                .get(j + 1)
                                .is_some_and(|&n| is_ident_char(n) && n != '.')
                            {
                                j += 1;
                            } else {
                                break;
                            }
                        }
                        Some(&c) if is_ident_char(c) => j += 1,
                        _ => break,
                    }
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word),
                };
                (tok, j - i)
            }
            other => {
                return Err(SyntaxError::new(
                    pos,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push(Spanned { tok, pos });
        i += len;
    }
    Ok(out)
}
