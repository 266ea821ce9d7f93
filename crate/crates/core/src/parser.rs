//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula  := hook ('vv' hook)*
//! hook     := or ('=>' hook)?
//! or       := and ('|' and)*
//! and      := unary ('&' unary)*
//! unary    := ('F' | 'neg' | 'some' | '!') unary
//!           | ('E' | 'A') var '.' formula
//!           | '(' formula ')' | atom
//! ```

use crate::error::{Error, Result};
use crate::formula::{negate_fo, Formula, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Const(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Amp,
    Pipe,
    Arrow,
    Eq,
    Neq,
    Bang,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_char = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
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
            b';' => Tok::Semi,
            b'.' => Tok::Dot,
            b'&' => Tok::Amp,
            b'|' => Tok::Pipe,
            b'=' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'=' => Tok::Eq,
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            b'!' => Tok::Bang,
            b'#' => {
                let mut j = i + 1;
                while j < bytes.len() && ident_char(bytes[j]) {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(Error::parse(i, "expected constant name after '#'"));
                }
                out.push((Tok::Const(text[i + 1..j].to_string()), start));
                i = j;
                continue;
            }
            c if ident_char(c) => {
                let mut j = i;
                while j < bytes.len() && ident_char(bytes[j]) {
                    j += 1;
                }
                out.push((Tok::Ident(text[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::parse(i, format!("unexpected character {ch:?}")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "F", "neg", "some", "vv", "TOP", "BOT", "NE", "dep", "const", "anon", "nonconst", "inc",
    "exc", "ind",
];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(Error::parse(self.offset(), format!("expected {what}")))
        }
    }

    fn is_ident(&self, k: usize, name: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if s == name)
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.hook()?;
        while self.is_ident(0, "vv") {
            self.bump();
            let rhs = self.hook()?;
            lhs = Formula::bool_or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn hook(&mut self) -> Result<Formula> {
        let at = self.offset();
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.hook()?;
            if !lhs.is_first_order() {
                return Err(Error::parse(at, "team atom inside hook guard"));
            }
            return Ok(Formula::Hook(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    /// A prefix keyword is an operator unless it is used as a term.
    fn prefix_op(&self, name: &str) -> bool {
        self.is_ident(0, name) && !matches!(self.peek_at(1), Tok::Eq | Tok::Neq)
    }

    fn quantifier_ahead(&self) -> bool {
        (self.is_ident(0, "E") || self.is_ident(0, "A"))
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::Dot
    }

    fn unary(&mut self) -> Result<Formula> {
        let at = self.offset();
        if self.prefix_op("F") {
            self.bump();
            return Ok(Formula::flat(self.unary()?));
        }
        if self.prefix_op("neg") {
            self.bump();
            return Ok(Formula::bool_neg(self.unary()?));
        }
        if self.prefix_op("some") {
            self.bump();
            return Ok(Formula::some_row(self.unary()?));
        }
        if *self.peek() == Tok::Bang {
            self.bump();
            let inner = self.unary()?;
            return negate_fo(&inner)
                .map_err(|_| Error::parse(at, "classical negation of a non-first-order formula"));
        }
        if self.quantifier_ahead() {
            let universal = self.is_ident(0, "A");
            self.bump();
            let var = match self.bump() {
                Tok::Ident(v) => v,
                _ => unreachable!("checked by quantifier_ahead"),
            };
            self.check_var_name(&var, at)?;
            self.bump();
            let body = self.formula()?;
            return Ok(if universal {
                Formula::forall(var, body)
            } else {
                Formula::exists(var, body)
            });
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let inner = self.formula()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(inner);
        }
        self.atom()
    }

    fn check_var_name(&self, name: &str, at: usize) -> Result<()> {
        if KEYWORDS.contains(&name) {
            return Err(Error::parse(at, format!("'{name}' is reserved")));
        }
        Ok(())
    }

    fn term(&mut self) -> Result<Term> {
        let at = self.offset();
        match self.bump() {
            Tok::Ident(v) => {
                self.check_var_name(&v, at)?;
                Ok(Term::Var(v))
            }
            Tok::Const(c) => Ok(Term::Const(c)),
            _ => Err(Error::parse(at, "expected a term")),
        }
    }

    /// Comma-separated terms up to (not including) `;` or `)`.
    fn tuple(&mut self) -> Result<Vec<Term>> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::Semi | Tok::RParen) {
            return Ok(out);
        }
        out.push(self.term()?);
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.term()?);
        }
        Ok(out)
    }

    /// `(` tuple (`;` tuple)* `)` with exactly `parts` tuples.
    fn tuples(&mut self, parts: usize, name: &str) -> Result<Vec<Vec<Term>>> {
        self.expect(Tok::LParen, "'('")?;
        let mut out = vec![self.tuple()?];
        while *self.peek() == Tok::Semi {
            self.bump();
            out.push(self.tuple()?);
        }
        let at = self.offset();
        self.expect(Tok::RParen, "')'")?;
        if out.len() != parts {
            return Err(Error::parse(
                at,
                format!("{name} takes {parts} ';'-separated tuples, got {}", out.len()),
            ));
        }
        Ok(out)
    }

    fn single(&mut self, at: usize, name: &str, tuple: Vec<Term>) -> Result<Term> {
        let mut tuple = tuple;
        if tuple.len() != 1 {
            return Err(Error::parse(at, format!("{name} expects exactly one term here")));
        }
        Ok(tuple.pop().unwrap())
    }

    fn atom(&mut self) -> Result<Formula> {
        let at = self.offset();
        let name = match self.peek() {
            Tok::Ident(n) => n.clone(),
            Tok::Const(_) => return self.equality(),
            Tok::End => return Err(Error::parse(at, "unexpected end of input")),
            _ => return Err(Error::parse(at, "expected a formula")),
        };
        if matches!(self.peek_at(1), Tok::Eq | Tok::Neq) {
            return self.equality();
        }
        let keyword = |n: &str| name == n;
        if keyword("TOP") || keyword("BOT") || keyword("NE") {
            self.bump();
            return Ok(match name.as_str() {
                "TOP" => Formula::Top,
                "BOT" => Formula::Bot,
                _ => Formula::NonEmpty,
            });
        }
        if *self.peek_at(1) != Tok::LParen {
            return Err(Error::parse(at, format!("expected '(' after '{name}'")));
        }
        self.bump();
        match name.as_str() {
            "dep" | "anon" => {
                let mut parts = self.tuples(2, &name)?;
                let last = parts.pop().unwrap();
                let y = self.single(at, &name, last)?;
                let xs = parts.pop().unwrap();
                Ok(if name == "dep" {
                    Formula::Dep(xs, y)
                } else {
                    Formula::Anon(xs, y)
                })
            }
            "const" | "nonconst" => {
                let mut parts = self.tuples(1, &name)?;
                let y = self.single(at, &name, parts.pop().unwrap())?;
                Ok(if name == "const" {
                    Formula::Dep(Vec::new(), y)
                } else {
                    Formula::Anon(Vec::new(), y)
                })
            }
            "inc" | "exc" => {
                let mut parts = self.tuples(2, &name)?;
                let b = parts.pop().unwrap();
                let a = parts.pop().unwrap();
                if a.len() != b.len() {
                    return Err(Error::TupleLength {
                        atom: name,
                        left: a.len(),
                        right: b.len(),
                    });
                }
                Ok(if name == "inc" {
                    Formula::Inc(a, b)
                } else {
                    Formula::Exc(a, b)
                })
            }
            "ind" => {
                let mut parts = self.tuples(3, &name)?;
                let c = parts.pop().unwrap();
                let b = parts.pop().unwrap();
                let a = parts.pop().unwrap();
                Ok(Formula::Ind(a, b, c))
            }
            _ if KEYWORDS.contains(&name.as_str()) => {
                Err(Error::parse(at, format!("'{name}' is reserved")))
            }
            _ => {
                self.expect(Tok::LParen, "'('")?;
                let args = self.tuple()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Formula::Rel(name, args))
            }
        }
    }

    fn equality(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        let at = self.offset();
        let op = self.bump();
        let rhs = self.term()?;
        match op {
            Tok::Eq => Ok(Formula::Equal(lhs, rhs)),
            Tok::Neq => Ok(Formula::NotEqual(lhs, rhs)),
            _ => Err(Error::parse(at, "expected '=' or '!='")),
        }
    }
}

/// Parses a formula. Relation symbols must be used at a single arity.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let phi = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(Error::parse(p.offset(), "unexpected trailing input"));
    }
    phi.signature()?;
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::vars;

    #[test]
    fn dependence_atom() {
        assert_eq!(parse("dep(x; y)").unwrap(), Formula::Dep(vars(["x"]), Term::var("y")));
        assert_eq!(
            parse("dep(x, z; y)").unwrap(),
            Formula::Dep(vars(["x", "z"]), Term::var("y"))
        );
        assert_eq!(parse("const(y)").unwrap(), Formula::Dep(vec![], Term::var("y")));
    }

    #[test]
    fn quantified_flat_nonconstancy() {
        assert_eq!(
            parse("E x. F (anon(; y))").unwrap(),
            Formula::exists("x", Formula::flat(Formula::Anon(vec![], Term::var("y"))))
        );
    }

    #[test]
    fn team_atom_in_guard_rejected() {
        let err = parse("inc(x; y) => NE").unwrap_err();
        assert!(err.to_string().contains("hook guard"), "{err}");
    }

    #[test]
    fn precedence() {
        let f = parse("P(x) & Q(x) | R(x) => NE vv TOP").unwrap();
        let expected = Formula::bool_or(
            Formula::Hook(
                Box::new(Formula::or(
                    Formula::and(Formula::rel("P", vars(["x"])), Formula::rel("Q", vars(["x"]))),
                    Formula::rel("R", vars(["x"])),
                )),
                Box::new(Formula::NonEmpty),
            ),
            Formula::Top,
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn hook_is_right_associative() {
        let f = parse("P(x) => Q(x) => NE").unwrap();
        match f {
            Formula::Hook(_, body) => assert!(matches!(*body, Formula::Hook(..))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse("E x. P(x) & Q(x)").unwrap();
        assert!(matches!(f, Formula::Exists(_, ref b) if matches!(**b, Formula::And(..))));
    }

    #[test]
    fn relation_named_e_is_not_a_quantifier() {
        let f = parse("A z. E(y, z) => NE").unwrap();
        let expected = Formula::forall(
            "z",
            Formula::Hook(
                Box::new(Formula::rel("E", vars(["y", "z"]))),
                Box::new(Formula::NonEmpty),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn classical_negation_goes_to_nnf() {
        assert_eq!(
            parse("!(P(x) & x = y)").unwrap(),
            Formula::or(Formula::NegRel("P".into(), vars(["x"])), Formula::neq(Term::var("x"), Term::var("y")))
        );
        assert!(parse("!dep(x; y)").is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(
            parse("x = #c0").unwrap(),
            Formula::eq(Term::var("x"), Term::constant("c0"))
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse("P(x) & ") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("unexpected {other:?}"),
        }
        match parse("P(x) $ Q(x)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("inc(x, y; z)"), Err(Error::TupleLength { .. })));
        assert!(matches!(parse("R(x) & R(x, y)"), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn empty_tuples() {
        assert_eq!(parse("inc(;)").unwrap(), Formula::Inc(vec![], vec![]));
        assert_eq!(
            parse("ind(; x; y)").unwrap(),
            Formula::Ind(vec![], vars(["x"]), vars(["y"]))
        );
    }
}
