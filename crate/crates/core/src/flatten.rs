//! The syntactic flattening `φ^f`, the rewrite simplifier for `F`, the
//! flattening-axiom verifier, and the first-order translation of `F ψ`.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{self, Universe};
use crate::error::{Error, Result};
use crate::eval::{Checker, EvalBudget, Strategy};
use crate::formula::{substitute_rel_atoms, Formula, Term};
use crate::report::{PropertyReport, Witness};
use crate::structure::Structure;
use crate::team::{project_relation, Team};

/// How `exc(a; b)` is flattened.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ExclusionMode {
    #[default]
    Top,
    /// `a != b` as tuples: some coordinate differs.
    Inequality,
}

impl fmt::Display for ExclusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExclusionMode::Top => "top",
            ExclusionMode::Inequality => "neq",
        })
    }
}

impl FromStr for ExclusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(ExclusionMode::Top),
            "neq" => Ok(ExclusionMode::Inequality),
            _ => Err(Error::Invalid(format!("unknown exclusion flattening {s:?}"))),
        }
    }
}

fn tuple_neq(a: &[Term], b: &[Term]) -> Formula {
    Formula::disj(
        a.iter()
            .zip(b)
            .map(|(x, y)| Formula::neq(x.clone(), y.clone())),
    )
}

fn tuple_eq(a: &[Term], b: &[Term]) -> Formula {
    Formula::conj(
        a.iter()
            .zip(b)
            .map(|(x, y)| Formula::eq(x.clone(), y.clone())),
    )
}

/// `φ^f`: team atoms replaced by flat formulas, every connective kept.
/// `F ψ` flattens to `ψ^f`.
pub fn flatten(phi: &Formula, mode: ExclusionMode) -> Result<Formula> {
    Ok(match phi {
        f if f.is_literal() => f.clone(),
        Formula::NonEmpty => Formula::NonEmpty,
        Formula::Dep(..) | Formula::Anon(..) | Formula::Inc(..) | Formula::Ind(..) => Formula::Top,
        Formula::Exc(a, b) => match mode {
            ExclusionMode::Top => Formula::Top,
            ExclusionMode::Inequality => tuple_neq(a, b),
        },
        Formula::And(a, b) => Formula::and(flatten(a, mode)?, flatten(b, mode)?),
        Formula::Or(a, b) => Formula::or(flatten(a, mode)?, flatten(b, mode)?),
        Formula::Hook(a, b) => Formula::Hook(a.clone(), Box::new(flatten(b, mode)?)),
        Formula::Exists(v, a) => Formula::exists(v.clone(), flatten(a, mode)?),
        Formula::Forall(v, a) => Formula::forall(v.clone(), flatten(a, mode)?),
        Formula::Flat(a) => flatten(a, mode)?,
        Formula::BoolOr(..) => return Err(Error::Unsupported("vv".into())),
        Formula::BoolNeg(..) => return Err(Error::Unsupported("neg".into())),
        Formula::SomeRow(..) => return Err(Error::Unsupported("some".into())),
        _ => unreachable!("every formula variant is handled above"),
    })
}

/// Applies the `F` rewrite rules bottom-up until nothing changes.
pub fn simplify_f(phi: &Formula) -> Formula {
    let mut cur = phi.clone();
    loop {
        let next = cur.map_bottom_up(&mut rewrite_f);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn rewrite_f(phi: Formula) -> Formula {
    let Formula::Flat(inner) = phi else {
        return phi;
    };
    match *inner {
        Formula::Dep(..) | Formula::Ind(..) => Formula::Top,
        Formula::Anon(..) => Formula::Bot,
        Formula::Inc(a, b) => tuple_eq(&a, &b),
        Formula::Exc(a, b) => tuple_neq(&a, &b),
        Formula::Flat(psi) => Formula::Flat(psi),
        Formula::And(a, b) => Formula::and(
            rewrite_f(Formula::Flat(a)),
            rewrite_f(Formula::Flat(b)),
        ),
        f if f.is_first_order() => f,
        other => Formula::Flat(Box::new(other)),
    }
}

/// Checks the flattening axioms for `candidate` as a flattening of `phi`:
/// `phi` entails it, it is flat, and it commutes with `phi`'s main
/// connective (children flatten as [`flatten`] does, in either exclusion
/// mode).
pub fn verify_flattening_axioms(
    phi: &Formula,
    candidate: &Formula,
    universe: &Universe,
) -> Result<PropertyReport> {
    if let Some(v) = candidate
        .free_variables()
        .into_iter()
        .find(|v| !phi.free_variables().contains(v))
    {
        return Err(Error::Invalid(format!(
            "candidate has free variable {v} not free in the formula"
        )));
    }
    let name = "flattening-axioms";
    let entails = analysis::entails(phi, candidate, universe)?;
    if !entails.holds() {
        return Ok(relabel(entails, name, "axiom 1 (entailment) fails"));
    }
    let flat = analysis::is_flat(candidate, universe)?;
    if !flat.holds() {
        return Ok(relabel(flat, name, "axiom 2 (flatness) fails"));
    }
    let mut report = PropertyReport::new(name, universe.describe());
    report.checked = entails.checked + flat.checked;
    if !commutes(phi, candidate)? {
        return Ok(report.fail(Witness {
            structure: String::new(),
            teams: Vec::new(),
            note: format!("axiom 3 (distributivity) fails: {candidate} does not mirror {phi}"),
        }));
    }
    Ok(report)
}

fn relabel(mut r: PropertyReport, name: &str, what: &str) -> PropertyReport {
    r.property = name.to_string();
    if let Some(w) = &mut r.witness {
        w.note = if w.note.is_empty() {
            what.to_string()
        } else {
            format!("{what}: {}", w.note)
        };
    }
    r
}

fn commutes(phi: &Formula, candidate: &Formula) -> Result<bool> {
    let kids = phi.children();
    if kids.is_empty() {
        return Ok(true);
    }
    let same_shape = std::mem::discriminant(phi) == std::mem::discriminant(candidate)
        && match (phi, candidate) {
            (Formula::Exists(v, _), Formula::Exists(w, _))
            | (Formula::Forall(v, _), Formula::Forall(w, _)) => v == w,
            (Formula::Hook(a, _), Formula::Hook(b, _)) => a == b,
            _ => true,
        };
    if !same_shape {
        // `F ψ` flattens to `ψ^f` directly.
        return Ok(matches!(phi, Formula::Flat(_)) && matches_flattening(kids[0], candidate)?);
    }
    let cand_kids = candidate.children();
    for (i, (k, c)) in kids.iter().zip(&cand_kids).enumerate() {
        if matches!(phi, Formula::Hook(..)) && i == 0 {
            continue;
        }
        if !matches_flattening(k, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn matches_flattening(phi: &Formula, candidate: &Formula) -> Result<bool> {
    Ok(flatten(phi, ExclusionMode::Top)? == *candidate
        || flatten(phi, ExclusionMode::Inequality)? == *candidate)
}

/// `∀y⃗ (¬R(y⃗) ∨ θ)` where `θ` is `psi_star` with each `S(t⃗)` replaced
/// by `y⃗ = t⃗`.
pub fn translate_f_case<S: AsRef<str>, T: AsRef<str>>(
    psi_star: &Formula,
    s_rel: &str,
    xs: &[S],
    r: &str,
    ys: &[T],
) -> Result<Formula> {
    if ys.len() != xs.len() {
        return Err(Error::ArityMismatch {
            relation: r.to_string(),
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let used = psi_star.all_variables();
    if let Some(y) = ys.iter().find(|y| used.contains(y.as_ref())) {
        return Err(Error::VariableCapture(y.as_ref().to_string()));
    }
    let y_terms: Vec<Term> = ys.iter().map(|y| Term::var(y.as_ref())).collect();
    let theta = substitute_rel_atoms(psi_star, s_rel, ys.len(), &|ts| tuple_eq(&y_terms, ts))?;
    let body = Formula::or(Formula::NegRel(r.to_string(), y_terms.clone()), theta);
    Ok(ys
        .iter()
        .rev()
        .fold(body, |acc, y| Formula::forall(y.as_ref(), acc)))
}

/// Compares `F ψ` on `x` with the translation evaluated at every row of
/// `x`, where `R` is interpreted as the projection of `x` onto `xs`.
#[allow(clippy::too_many_arguments)]
pub fn check_translation_biconditional<S: AsRef<str>>(
    s: &Structure,
    x: &Team,
    psi: &Formula,
    psi_star: &Formula,
    s_rel: &str,
    xs: &[S],
    strategy: Strategy,
    budget: &EvalBudget,
) -> Result<PropertyReport> {
    let r_name = fresh_relation(s, psi_star);
    let used: Vec<String> = psi_star
        .all_variables()
        .into_iter()
        .chain(x.vars().iter().cloned())
        .collect();
    let ys: Vec<String> = (0..)
        .map(|i| format!("y{i}"))
        .filter(|y| !used.contains(y))
        .take(xs.len())
        .collect();
    let translated = translate_f_case(psi_star, s_rel, xs, &r_name, &ys)?;
    let relation = project_relation(x, xs)?;
    let extended = s.clone().with_relation(&r_name, xs.len(), relation)?;

    let flat_psi = Formula::flat(psi.clone());
    let lhs = Checker::new(s, &flat_psi, x.vars(), strategy, budget.clone())?.eval(x)?;
    let mut rhs_checker =
        Checker::new(&extended, &translated, x.vars(), strategy, budget.clone())?;
    let mut rhs = true;
    for single in x.singletons() {
        if !rhs_checker.eval(&single)? {
            rhs = false;
            break;
        }
    }
    let mut report = PropertyReport::new(
        "translation-biconditional",
        format!("one structure of size {}, one team of {} rows", s.size(), x.len()),
    );
    report.checked = 1;
    if lhs != rhs {
        return Ok(report.fail(Witness {
            structure: String::new(),
            teams: vec![("X".into(), x.clone())],
            note: format!("F side {lhs}, translation side {rhs}; translation {translated}"),
        }));
    }
    Ok(report)
}

fn fresh_relation(s: &Structure, phi: &Formula) -> String {
    let taken = |name: &str| {
        s.relation(name).is_some()
            || phi
                .signature()
                .map(|sig| sig.relations.contains_key(name))
                .unwrap_or(false)
    };
    (0..)
        .map(|i| if i == 0 { "R".to_string() } else { format!("R{i}") })
        .find(|n| !taken(n))
        .expect("unbounded name supply")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::desugar_hook;
    use crate::parser::parse;

    fn fl(s: &str) -> String {
        flatten(&parse(s).unwrap(), ExclusionMode::Top).unwrap().to_string()
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(fl("dep(x; y)"), "TOP");
        assert_eq!(fl("R(x) & anon(x; y)"), "R(x) & TOP");
        let neq = flatten(&parse("exc(x; y)").unwrap(), ExclusionMode::Inequality).unwrap();
        assert_eq!(neq.to_string(), "x != y");
        assert_eq!(fl("F inc(x; y) | NE"), "TOP | NE");
        assert_eq!(fl("E(x, y) => ind(x; y; z)"), "E(x, y) => TOP");
        assert!(flatten(&parse("neg NE").unwrap(), ExclusionMode::Top).is_err());
        assert!(flatten(&parse("some NE").unwrap(), ExclusionMode::Top).is_err());
        assert!(flatten(&parse("NE vv NE").unwrap(), ExclusionMode::Top).is_err());
    }

    #[test]
    fn hook_flattening_agrees_with_desugaring() {
        for s in [
            "E(y, z) => inc(z; x)",
            "A z. (E(x, z) => (anon(z; x) & z != x))",
            "P(x) | (R(x, y) => (dep(x; y) | exc(x; y)))",
        ] {
            let phi = parse(s).unwrap();
            for mode in [ExclusionMode::Top, ExclusionMode::Inequality] {
                assert_eq!(
                    desugar_hook(&flatten(&phi, mode).unwrap()),
                    flatten(&desugar_hook(&phi), mode).unwrap()
                );
            }
        }
    }

    fn sf(s: &str) -> String {
        simplify_f(&parse(s).unwrap()).to_string()
    }

    #[test]
    fn simplify_examples() {
        assert_eq!(sf("F inc(x; y)"), "x = y");
        assert_eq!(sf("F F dep(x; y)"), "TOP");
        assert_eq!(sf("F (R(x) & anon(; y))"), "R(x) & BOT");
        assert_eq!(sf("F exc(x, y; u, v)"), "x != u | y != v");
        assert_eq!(sf("F inc(;)"), "TOP");
        assert_eq!(sf("F exc(;)"), "BOT");
        assert_eq!(sf("F ind(x; y; z)"), "TOP");
        assert_eq!(sf("F (E x. P(x))"), "E x. P(x)");
        assert_eq!(sf("F (dep(x; y) | NE)"), "F (dep(x; y) | NE)");
        assert_eq!(sf("F F F NE"), "F NE");
    }

    #[test]
    fn translation_examples() {
        let t = |s: &str| {
            translate_f_case(&parse(s).unwrap(), "S", &["x"], "R", &["y"])
                .unwrap()
                .to_string()
        };
        assert_eq!(t("Q(x)"), "A y. !R(y) | Q(x)");
        assert_eq!(t("S(x)"), "A y. !R(y) | y = x");
        assert_eq!(t("S(x) & P(x)"), "A y. !R(y) | y = x & P(x)");
        assert_eq!(t("!S(x)"), "A y. !R(y) | y != x");
        let capture = translate_f_case(&parse("E y. S(y)").unwrap(), "S", &["x"], "R", &["y"]);
        assert!(matches!(capture, Err(Error::VariableCapture(_))));
        let arity = translate_f_case(&parse("S(x)").unwrap(), "S", &["x"], "R", &["y", "z"]);
        assert!(matches!(arity, Err(Error::ArityMismatch { .. })));
        let inner = translate_f_case(&parse("S(x, x)").unwrap(), "S", &["x"], "R", &["y"]);
        assert!(matches!(inner, Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn biconditional_examples() {
        let s = Structure::with_size(2, "e")
            .unwrap()
            .with_relation("P", 1, [vec![0]])
            .unwrap();
        let psi = parse("P(x)").unwrap();
        for team in crate::team::enumerate_teams(&s, &["x"], None).unwrap() {
            let r = check_translation_biconditional(
                &s,
                &team,
                &psi,
                &psi,
                "S",
                &["x"],
                Strategy::Naive,
                &EvalBudget::default(),
            )
            .unwrap();
            assert!(r.holds(), "{team}");
        }
    }
}
