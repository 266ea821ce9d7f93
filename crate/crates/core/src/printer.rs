//! Concrete-syntax rendering. The output always re-parses to the same tree.

use std::fmt::{self, Write};

use crate::formula::{Formula, Term};

// Binding strength of each syntactic layer, loosest first.
const BOOL_OR: u8 = 0;
const HOOK: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, BOOL_OR, true)
    }
}

pub fn render(phi: &Formula) -> String {
    phi.to_string()
}

fn write_terms(out: &mut dyn Write, terms: &[Term]) -> fmt::Result {
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            out.write_str(", ")?;
        }
        write!(out, "{t}")?;
    }
    Ok(())
}

fn write_tuples(out: &mut dyn Write, name: &str, tuples: &[&[Term]]) -> fmt::Result {
    write!(out, "{name}(")?;
    for (i, tuple) in tuples.iter().enumerate() {
        if i > 0 {
            out.write_str(if tuple.is_empty() { ";" } else { "; " })?;
        }
        write_terms(out, tuple)?;
    }
    out.write_str(")")
}

// `last` is false when more text follows `phi` at the same nesting depth.
fn write_formula(out: &mut dyn Write, phi: &Formula, ctx: u8, last: bool) -> fmt::Result {
    let level = match phi {
        Formula::BoolOr(..) => BOOL_OR,
        Formula::Hook(..) => HOOK,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        // A quantifier body extends as far right as possible.
        Formula::Exists(..) | Formula::Forall(..) => BOOL_OR,
        _ => UNARY,
    };
    let quantifier = matches!(phi, Formula::Exists(..) | Formula::Forall(..));
    let paren = ctx > level || (quantifier && !last);
    let last = last || paren;
    if paren {
        out.write_str("(")?;
    }
    match phi {
        Formula::Rel(r, ts) => {
            write!(out, "{r}(")?;
            write_terms(out, ts)?;
            out.write_str(")")?;
        }
        Formula::NegRel(r, ts) => {
            write!(out, "!{r}(")?;
            write_terms(out, ts)?;
            out.write_str(")")?;
        }
        Formula::Equal(a, b) => write!(out, "{a} = {b}")?,
        Formula::NotEqual(a, b) => write!(out, "{a} != {b}")?,
        Formula::Top => out.write_str("TOP")?,
        Formula::Bot => out.write_str("BOT")?,
        Formula::NonEmpty => out.write_str("NE")?,
        Formula::Dep(xs, y) if xs.is_empty() => write!(out, "const({y})")?,
        Formula::Dep(xs, y) => write_tuples(out, "dep", &[xs, std::slice::from_ref(y)])?,
        Formula::Anon(xs, y) if xs.is_empty() => write!(out, "nonconst({y})")?,
        Formula::Anon(xs, y) => write_tuples(out, "anon", &[xs, std::slice::from_ref(y)])?,
        Formula::Inc(a, b) => write_tuples(out, "inc", &[a, b])?,
        Formula::Exc(a, b) => write_tuples(out, "exc", &[a, b])?,
        Formula::Ind(a, b, c) => write_tuples(out, "ind", &[a, b, c])?,
        Formula::And(a, b) => {
            write_formula(out, a, AND, false)?;
            out.write_str(" & ")?;
            write_formula(out, b, UNARY, last)?;
        }
        Formula::Or(a, b) => {
            write_formula(out, a, OR, false)?;
            out.write_str(" | ")?;
            write_formula(out, b, AND, last)?;
        }
        Formula::Hook(a, b) => {
            write_formula(out, a, OR, false)?;
            out.write_str(" => ")?;
            write_formula(out, b, HOOK, last)?;
        }
        Formula::BoolOr(a, b) => {
            write_formula(out, a, BOOL_OR, false)?;
            out.write_str(" vv ")?;
            write_formula(out, b, HOOK, last)?;
        }
        Formula::BoolNeg(a) => {
            out.write_str("neg ")?;
            write_formula(out, a, UNARY, last)?;
        }
        Formula::SomeRow(a) => {
            out.write_str("some ")?;
            write_formula(out, a, UNARY, last)?;
        }
        Formula::Flat(a) => {
            out.write_str("F ")?;
            write_formula(out, a, UNARY, last)?;
        }
        Formula::Exists(v, a) => {
            write!(out, "E {v}. ")?;
            write_formula(out, a, BOOL_OR, last)?;
        }
        Formula::Forall(v, a) => {
            write!(out, "A {v}. ")?;
            write_formula(out, a, BOOL_OR, last)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}
