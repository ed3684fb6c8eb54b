//! Formula parser.
//!
//! Grammar (precedence `!` > `&` > `|`; quantifier scope extends as far
//! right as possible):
//!
//! ```text
//! formula := quant | disj
//! quant   := ("E" | "A") ident "." formula
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | quant | atom
//! atom    := "T" | "F" | Name "(" terms? ")" | term ("=" | "!=") term
//! term    := ident | ident "(" term ")"
//! ```

use thiserror::Error;

use super::formula::{Formula, Term};
use super::structure::Language;

/// A syntax or symbol error at a byte offset of the input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

const KEYWORDS: [&str; 4] = ["E", "A", "T", "F"];

/// True when `name` can be used as a symbol or variable.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Eq,
    Neq,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

impl Lexer {
    fn new(text: &str) -> Result<Lexer, ParseError> {
        let bytes = text.as_bytes();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            let tok = match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'.' => Tok::Dot,
                b'&' => Tok::And,
                b'|' => Tok::Or,
                b'=' => Tok::Eq,
                b'!' if bytes.get(i + 1) == Some(&b'=') => {
                    i += 1;
                    Tok::Neq
                }
                b'!' => Tok::Not,
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                        i += 1;
                    }
                    Tok::Ident(text[start..=i].to_string())
                }
                _ => {
                    return Err(ParseError { pos: i, msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')) })
                }
            };
            toks.push((tok, start));
            i += 1;
        }
        toks.push((Tok::End, text.len()));
        Ok(Lexer { toks })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    lang: Option<&'a Language>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                Ok(name)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn is_quantifier(&self) -> bool {
        matches!(self.peek(), Tok::Ident(k) if k == "E" || k == "A") && matches!(self.peek2(), Tok::Ident(_))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.is_quantifier() {
            return self.quantified();
        }
        self.disjunction()
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let Tok::Ident(kw) = self.bump() else { unreachable!("checked by is_quantifier") };
        let x = self.ident("a variable after the quantifier")?;
        self.expect(Tok::Dot, "`.` after the quantified variable")?;
        let body = self.formula()?;
        Ok(if kw == "E" { Formula::exists(&x, body) } else { Formula::forall(&x, body) })
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            if self.is_quantifier() {
                parts.push(self.quantified()?);
                break;
            }
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or(parts))
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ if self.is_quantifier() => self.quantified(),
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos();
        let name = match self.peek().clone() {
            Tok::Ident(k) if k == "T" => {
                self.bump();
                return Ok(Formula::True);
            }
            Tok::Ident(k) if k == "F" => {
                self.bump();
                return Ok(Formula::False);
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => name,
            _ => return self.err("expected an atom"),
        };
        let is_relation = match self.lang {
            Some(lang) if lang.relation_arity(&name).is_some() => true,
            Some(lang) => {
                if !lang.has_function(&name) && *self.peek2() == Tok::LParen && !self.term_then_equality() {
                    return self.err(format!("unknown relation symbol {name}"));
                }
                false
            }
            None => {
                // Without a language, `Name(...)` followed by `=`/`!=` is a term.
                *self.peek2() == Tok::LParen && !self.term_then_equality()
            }
        };
        if is_relation {
            self.bump();
            self.expect(Tok::LParen, "`(` after a relation symbol")?;
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                args.push(self.term()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::RParen, "`)` closing the argument list")?;
            if let Some(arity) = self.lang.and_then(|l| l.relation_arity(&name)) {
                if arity != args.len() {
                    return Err(ParseError {
                        pos: start,
                        msg: format!("relation {name} has arity {arity} but is applied to {} arguments", args.len()),
                    });
                }
            }
            return Ok(Formula::Rel(name, args));
        }
        let lhs = self.term()?;
        let negated = match self.bump() {
            Tok::Eq => false,
            Tok::Neq => true,
            _ => {
                self.at -= 1;
                return self.err("expected `=` or `!=` after a term");
            }
        };
        let rhs = self.term()?;
        let eq = Formula::Eq(lhs, rhs);
        Ok(if negated { Formula::not(eq) } else { eq })
    }

    /// Looks ahead past a balanced term starting at the current token and
    /// reports whether an equality operator follows.
    fn term_then_equality(&self) -> bool {
        let mut i = self.at;
        let mut depth = 0usize;
        loop {
            match &self.toks[i].0 {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                    if depth == 0 {
                        return matches!(self.toks[i + 1].0, Tok::Eq | Tok::Neq);
                    }
                }
                Tok::End | Tok::Comma if depth <= 1 => return false,
                _ => {}
            }
            i += 1;
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let start = self.pos();
        let name = self.ident("a term")?;
        if *self.peek() != Tok::LParen {
            if let Some(lang) = self.lang {
                if lang.relation_arity(&name).is_some() || lang.has_function(&name) {
                    return Err(ParseError { pos: start, msg: format!("symbol {name} used as a variable") });
                }
            }
            return Ok(Term::Var(name));
        }
        if let Some(lang) = self.lang {
            if !lang.has_function(&name) {
                return Err(ParseError { pos: start, msg: format!("unknown function symbol {name}") });
            }
        }
        self.bump();
        let arg = self.term()?;
        if *self.peek() == Tok::Comma {
            return self.err(format!("function {name} takes exactly one argument"));
        }
        self.expect(Tok::RParen, "`)` after a function argument")?;
        Ok(Term::App(name, Box::new(arg)))
    }
}

fn run(text: &str, lang: Option<&Language>) -> Result<Formula, ParseError> {
    let lexer = Lexer::new(text)?;
    let mut p = Parser { toks: lexer.toks, at: 0, lang };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

impl Formula {
    /// Parses without a language: `Name(...)` is a relation atom unless it is
    /// one side of an equation.
    pub fn parse(text: &str) -> Result<Formula, ParseError> {
        run(text, None)
    }
}

/// Parses against a language, rejecting unknown symbols and arity mismatches.
pub fn parse_formula(text: &str, lang: &Language) -> Result<Formula, ParseError> {
    run(text, Some(lang))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang() -> Language {
        Language::new(vec![("Edge".into(), 2), ("P".into(), 1), ("B".into(), 0)], vec!["f".into(), "g".into()]).unwrap()
    }

    #[test]
    fn sigma1_and_universal() {
        let f = parse_formula("E x. E y. Edge(x,y)", &lang()).unwrap();
        assert_eq!(f, Formula::exists("x", Formula::exists("y", Formula::rel("Edge", vec![Term::var("x"), Term::var("y")]))));
        let g = parse_formula("A x. Edge(x, f(x))", &lang()).unwrap();
        assert_eq!(g.functions().len(), 1);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("Edge(x,y,z)", &lang()).unwrap_err();
        assert!(e.msg.contains("arity"));
        assert_eq!(e.pos, 0);
        let e = parse_formula("P(x) & Q(x)", &lang()).unwrap_err();
        assert_eq!(e.pos, 7);
        let e = parse_formula("P(h(x))", &lang()).unwrap_err();
        assert!(e.msg.contains("unknown function"));
        assert!(Formula::parse("E x P(x)").is_err());
        assert!(Formula::parse("P(x) &").is_err());
        assert!(Formula::parse("P(x) $").is_err());
    }

    #[test]
    fn precedence_and_scope() {
        let f = Formula::parse("!P(x) & Q(x) | R(x)").unwrap();
        assert!(matches!(&f, Formula::Or(parts) if parts.len() == 2 && matches!(parts[0], Formula::And(_))));
        let g = Formula::parse("E x. P(x) | Q(x)").unwrap();
        assert!(matches!(&g, Formula::Exists(_, body) if matches!(**body, Formula::Or(_))));
        let h = Formula::parse("P(x) | E y. Q(y) & R(y)").unwrap();
        assert!(matches!(&h, Formula::Or(parts) if matches!(parts[1], Formula::Exists(..))));
    }

    #[test]
    fn terms_versus_relations() {
        let f = Formula::parse("f(x) = g(f(y)) & x != y & B()").unwrap();
        let Formula::And(parts) = &f else { panic!("conjunction expected") };
        assert!(matches!(&parts[0], Formula::Eq(..)));
        assert!(matches!(&parts[1], Formula::Not(_)));
        assert!(matches!(&parts[2], Formula::Rel(r, a) if r == "B" && a.is_empty()));
        assert_eq!(Formula::parse(&f.to_string()).unwrap(), f);
        assert_eq!(parse_formula("B() & T | F", &lang()).unwrap().to_string(), "B() & T | F");
    }
}
