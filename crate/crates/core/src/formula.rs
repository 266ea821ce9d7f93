//! Terms and formulas of first-order logic extended with team atoms,
//! Boolean connectives, and the flattening operator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A term inside an atom: a variable or a constant symbol.
///
/// Constants are written with a leading `#` in the concrete syntax, so the
/// two namespaces never collide.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "#{c}"),
        }
    }
}

/// Convenience constructor for a tuple of variable terms.
pub fn vars<I, S>(names: I) -> Vec<Term>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(|n| Term::Var(n.into())).collect()
}

/// A formula in negation normal form.
///
/// Classical negation only occurs on literals (`NegRel`, `NotEqual`); the
/// guard of a `Hook` is always first-order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Rel(String, Vec<Term>),
    NegRel(String, Vec<Term>),
    Equal(Term, Term),
    NotEqual(Term, Term),
    Top,
    Bot,
    /// True exactly on non-empty teams.
    NonEmpty,
    /// `dep(t1,...,tk ; t)`: the tuple functionally determines `t`.
    Dep(Vec<Term>, Term),
    /// `anon(t1,...,tk ; t)`: every row has a team-mate agreeing on the
    /// tuple but differing on `t`.
    Anon(Vec<Term>, Term),
    Inc(Vec<Term>, Vec<Term>),
    Exc(Vec<Term>, Vec<Term>),
    /// `ind(cond ; left ; right)`: `left` and `right` are independent
    /// given `cond`.
    Ind(Vec<Term>, Vec<Term>, Vec<Term>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `guard => body`, shorthand for `!guard | (guard & body)`.
    Hook(Box<Formula>, Box<Formula>),
    /// Boolean (intuitionistic) disjunction.
    BoolOr(Box<Formula>, Box<Formula>),
    /// Boolean negation.
    BoolNeg(Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    /// The flattening operator.
    Flat(Box<Formula>),
    /// Some row of the team satisfies the body.
    SomeRow(Box<Formula>),
}

impl Formula {
    pub fn rel(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Rel(name.into(), args)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Equal(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::NotEqual(a, b)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn bool_or(a: Formula, b: Formula) -> Self {
        Formula::BoolOr(Box::new(a), Box::new(b))
    }

    pub fn bool_neg(a: Formula) -> Self {
        Formula::BoolNeg(Box::new(a))
    }

    pub fn some_row(a: Formula) -> Self {
        Formula::SomeRow(Box::new(a))
    }

    pub fn flat(a: Formula) -> Self {
        Formula::Flat(Box::new(a))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(body))
    }

    /// Builds a hook after checking that the guard is first-order.
    pub fn hook(guard: Formula, body: Formula) -> Result<Self> {
        if !guard.is_first_order() {
            return Err(Error::TeamAtomInGuard);
        }
        Ok(Formula::Hook(Box::new(guard), Box::new(body)))
    }

    /// Conjunction of a list, `Top` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Formula::Top,
            Some(first) => iter.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list, `Bot` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Formula::Bot,
            Some(first) => iter.fold(first, Formula::or),
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self,
            Formula::Rel(..)
                | Formula::NegRel(..)
                | Formula::Equal(..)
                | Formula::NotEqual(..)
                | Formula::Top
                | Formula::Bot
        )
    }

    /// Team atoms: the dependency-style atoms plus `NE`.
    pub fn is_team_atom(&self) -> bool {
        matches!(
            self,
            Formula::NonEmpty
                | Formula::Dep(..)
                | Formula::Anon(..)
                | Formula::Inc(..)
                | Formula::Exc(..)
                | Formula::Ind(..)
        )
    }

    /// Pure first-order: literals, `&`, `|`, quantifiers, and hooks with
    /// a first-order body.
    pub fn is_first_order(&self) -> bool {
        match self {
            f if f.is_literal() => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Hook(a, b) => {
                a.is_first_order() && b.is_first_order()
            }
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.is_first_order(),
            _ => false,
        }
    }

    /// True if the formula contains no `neg`, `vv`, or `some` nodes.
    pub fn is_lax_team_logic(&self) -> bool {
        self.all_nodes(&|f| {
            !matches!(
                f,
                Formula::BoolNeg(_) | Formula::BoolOr(..) | Formula::SomeRow(_)
            )
        })
    }

    /// Checks `pred` on every node of the tree.
    pub fn all_nodes(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        if !pred(self) {
            return false;
        }
        self.children().iter().all(|c| c.all_nodes(pred))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Hook(a, b)
            | Formula::BoolOr(a, b) => vec![a, b],
            Formula::BoolNeg(a)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a)
            | Formula::Flat(a)
            | Formula::SomeRow(a) => vec![a],
            _ => Vec::new(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Every term occurring in an atom at this node (not descending).
    pub fn atom_terms(&self) -> Vec<&Term> {
        match self {
            Formula::Rel(_, ts) | Formula::NegRel(_, ts) => ts.iter().collect(),
            Formula::Equal(a, b) | Formula::NotEqual(a, b) => vec![a, b],
            Formula::Dep(ts, t) | Formula::Anon(ts, t) => ts.iter().chain([t]).collect(),
            Formula::Inc(a, b) | Formula::Exc(a, b) => a.iter().chain(b).collect(),
            Formula::Ind(a, b, c) => a.iter().chain(b).chain(c).collect(),
            _ => Vec::new(),
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for t in self.atom_terms() {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// All variables, free or bound.
    pub fn all_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Exists(v, _) | Formula::Forall(v, _) = f {
                out.insert(v.clone());
            }
            for t in f.atom_terms() {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
        });
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Relation symbols with the arities they are used at, and constant
    /// symbols. Fails if a relation is used at two arities.
    pub fn signature(&self) -> Result<Signature> {
        let mut sig = Signature::default();
        let mut err = None;
        self.visit(&mut |f| {
            if let Formula::Rel(name, ts) | Formula::NegRel(name, ts) = f {
                if let Err(e) = sig.add_relation(name, ts.len()) {
                    err.get_or_insert(e);
                }
            }
            for t in f.atom_terms() {
                if let Term::Const(c) = t {
                    sig.constants.insert(c.clone());
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(sig),
        }
    }

    /// Applies `f` bottom-up to every node.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::And(a, b) => Formula::and(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Or(a, b) => Formula::or(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::Hook(a, b) => {
                Formula::Hook(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f)))
            }
            Formula::BoolOr(a, b) => Formula::bool_or(a.map_bottom_up(f), b.map_bottom_up(f)),
            Formula::BoolNeg(a) => Formula::bool_neg(a.map_bottom_up(f)),
            Formula::Exists(v, a) => Formula::exists(v.clone(), a.map_bottom_up(f)),
            Formula::Forall(v, a) => Formula::forall(v.clone(), a.map_bottom_up(f)),
            Formula::Flat(a) => Formula::flat(a.map_bottom_up(f)),
            Formula::SomeRow(a) => Formula::some_row(a.map_bottom_up(f)),
            leaf => leaf.clone(),
        };
        f(rebuilt)
    }
}

/// Relation symbols (with arity) and constant symbols used by formulas or
/// interpreted by structures.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub relations: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
}

impl Signature {
    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<()> {
        match self.relations.get(name) {
            Some(&a) if a != arity => Err(Error::ArityMismatch {
                relation: name.to_string(),
                expected: a,
                found: arity,
            }),
            _ => {
                self.relations.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn merge(&mut self, other: &Signature) -> Result<()> {
        for (name, &arity) in &other.relations {
            self.add_relation(name, arity)?;
        }
        self.constants.extend(other.constants.iter().cloned());
        Ok(())
    }
}

/// Classical negation of a first-order formula, pushed to the literals.
pub fn negate_fo(phi: &Formula) -> Result<Formula> {
    Ok(match phi {
        Formula::Rel(r, ts) => Formula::NegRel(r.clone(), ts.clone()),
        Formula::NegRel(r, ts) => Formula::Rel(r.clone(), ts.clone()),
        Formula::Equal(a, b) => Formula::NotEqual(a.clone(), b.clone()),
        Formula::NotEqual(a, b) => Formula::Equal(a.clone(), b.clone()),
        Formula::Top => Formula::Bot,
        Formula::Bot => Formula::Top,
        Formula::And(a, b) => Formula::or(negate_fo(a)?, negate_fo(b)?),
        Formula::Or(a, b) => Formula::and(negate_fo(a)?, negate_fo(b)?),
        Formula::Exists(v, a) => Formula::forall(v.clone(), negate_fo(a)?),
        Formula::Forall(v, a) => Formula::exists(v.clone(), negate_fo(a)?),
        Formula::Hook(..) => negate_fo(&desugar_hook(phi))?,
        _ => return Err(Error::NotFirstOrder(phi.to_string())),
    })
}

/// Replaces every `guard => body` by `!guard | (guard & body)`.
pub fn desugar_hook(phi: &Formula) -> Formula {
    phi.map_bottom_up(&mut |f| match f {
        Formula::Hook(guard, body) => {
            // The guard is first-order by construction.
            let negated = negate_fo(&guard).expect("hook guard is first-order");
            Formula::or(negated, Formula::And(guard, body))
        }
        other => other,
    })
}

/// Replaces every occurrence of relation `rel` (of arity `arity`) in a
/// first-order formula by `builder(args)`. Negated occurrences become the
/// classical negation of the builder's output.
pub fn substitute_rel_atoms(
    phi: &Formula,
    rel: &str,
    arity: usize,
    builder: &dyn Fn(&[Term]) -> Formula,
) -> Result<Formula> {
    if !phi.is_first_order() {
        return Err(Error::NotFirstOrder(phi.to_string()));
    }
    let check = |ts: &[Term]| -> Result<Formula> {
        if ts.len() != arity {
            return Err(Error::ArityMismatch {
                relation: rel.to_string(),
                expected: arity,
                found: ts.len(),
            });
        }
        let out = builder(ts);
        if !out.is_first_order() {
            return Err(Error::NotFirstOrder(out.to_string()));
        }
        Ok(out)
    };
    fn go(
        phi: &Formula,
        rel: &str,
        check: &dyn Fn(&[Term]) -> Result<Formula>,
    ) -> Result<Formula> {
        Ok(match phi {
            Formula::Rel(r, ts) if r == rel => check(ts)?,
            Formula::NegRel(r, ts) if r == rel => negate_fo(&check(ts)?)?,
            Formula::And(a, b) => Formula::and(go(a, rel, check)?, go(b, rel, check)?),
            Formula::Or(a, b) => Formula::or(go(a, rel, check)?, go(b, rel, check)?),
            Formula::Hook(a, b) => {
                Formula::Hook(Box::new(go(a, rel, check)?), Box::new(go(b, rel, check)?))
            }
            Formula::Exists(v, a) => Formula::exists(v.clone(), go(a, rel, check)?),
            Formula::Forall(v, a) => Formula::forall(v.clone(), go(a, rel, check)?),
            other => other.clone(),
        })
    }
    go(phi, rel, &check)
}
