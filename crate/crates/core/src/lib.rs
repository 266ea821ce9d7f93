//! Exact model checking for team-semantics logics with the flattening
//! operator `F`.
//!
//! Formulas cover first-order literals, dependence, anonymity, inclusion,
//! exclusion and independence atoms, `NE`, lax disjunction, the hook
//! connective, Boolean disjunction and negation, `F`, and the `some`
//! operator. Truth is decided exactly on finite structures.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod flatten;
pub mod formula;
pub mod parser;
pub mod pool;
pub mod printer;
pub mod report;
pub mod structure;
pub mod team;

pub use error::{BudgetKind, Error, Result};
pub use eval::{
    eval, eval_sentence, eval_tarski, eval_with_stats, Checker, EvalBudget, EvalStats,
    Optimizations, Strategy,
};
pub use flatten::{flatten, simplify_f, translate_f_case, ExclusionMode};
pub use formula::{desugar_hook, substitute_rel_atoms, Formula, Signature, Term};
pub use parser::parse;
pub use printer::render;
pub use report::{PropertyReport, Verdict, Witness};
pub use structure::{
    automorphisms, check_magma_hypothesis, gen_a, gen_b, gen_cycle, is_connected, Elem,
    Permutation, Structure,
};
pub use team::{
    duplicate, enumerate_teams, project_relation, supplement, team_closure, Assignment, Team,
};
