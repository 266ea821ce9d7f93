mod common;

use common::*;
use proptest::prelude::*;
use teamflat::{
    desugar_hook, eval, flatten, parse, render, simplify_f, EvalBudget, ExclusionMode, Formula,
    Strategy as EvalStrategy, Structure, Term,
};

const VARS: [&str; 2] = ["x", "y"];

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![Just(Term::var("x")), Just(Term::var("y"))]
}

fn literal() -> impl Strategy<Value = Formula> {
    prop_oneof![
        term().prop_map(|t| Formula::rel("P", vec![t])),
        term().prop_map(|t| Formula::NegRel("P".into(), vec![t])),
        (term(), term()).prop_map(|(a, b)| Formula::rel("R", vec![a, b])),
        (term(), term()).prop_map(|(a, b)| Formula::eq(a, b)),
        (term(), term()).prop_map(|(a, b)| Formula::neq(a, b)),
    ]
}

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        4 => literal(),
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
        1 => Just(Formula::NonEmpty),
        1 => (prop::collection::vec(term(), 0..2), term()).prop_map(|(a, b)| Formula::Dep(a, b)),
        1 => (prop::collection::vec(term(), 0..2), term()).prop_map(|(a, b)| Formula::Anon(a, b)),
        1 => (term(), term()).prop_map(|(a, b)| Formula::Inc(vec![a], vec![b])),
        1 => (term(), term()).prop_map(|(a, b)| Formula::Exc(vec![a], vec![b])),
        1 => (term(), term(), term()).prop_map(|(c, a, b)| Formula::Ind(vec![c], vec![a], vec![b])),
    ]
}

/// Lax formulas over `x`, `y`; `boolean` adds `vv`, `neg` and `some`.
fn formula(depth: u32, boolean: bool) -> BoxedStrategy<Formula> {
    leaf()
        .prop_recursive(depth, 16, 2, move |inner| {
            let bin = (inner.clone(), inner.clone());
            let quant = prop_oneof![Just("x"), Just("y")];
            let lax = prop_oneof![
                bin.clone().prop_map(|(a, b)| Formula::and(a, b)),
                bin.clone().prop_map(|(a, b)| Formula::or(a, b)),
                (literal(), inner.clone()).prop_map(|(g, b)| Formula::hook(g, b).unwrap()),
                inner.clone().prop_map(Formula::flat),
                (quant.clone(), inner.clone()).prop_map(|(v, b)| Formula::exists(v, b)),
                (quant, inner.clone()).prop_map(|(v, b)| Formula::forall(v, b)),
            ];
            if boolean {
                prop_oneof![
                    6 => lax,
                    1 => bin.prop_map(|(a, b)| Formula::bool_or(a, b)),
                    1 => inner.clone().prop_map(Formula::bool_neg),
                    1 => inner.prop_map(Formula::some_row),
                ]
                .boxed()
            } else {
                lax.boxed()
            }
        })
        .boxed()
}

fn model() -> Structure {
    Structure::with_size(2, "e")
        .unwrap()
        .with_relation("P", 1, [vec![1]])
        .unwrap()
        .with_relation("R", 2, [vec![0, 1], vec![1, 1]])
        .unwrap()
}

/// A team over `x`, `y` in [`model`], as a bitmask over the four rows.
fn team_of(mask: u8) -> Tm {
    let s = model();
    all_teams(&s, &VARS)
        .into_iter()
        .find(|t| {
            let space: Vec<Asg> = all_teams(&s, &VARS).pop().unwrap().into_iter().collect();
            space
                .iter()
                .enumerate()
                .all(|(i, r)| t.contains(r) == (mask >> i & 1 == 1))
        })
        .unwrap()
}

fn no_team_atoms(phi: &Formula) -> bool {
    phi.all_nodes(&|f| {
        !matches!(
            f,
            Formula::Dep(..)
                | Formula::Anon(..)
                | Formula::Inc(..)
                | Formula::Exc(..)
                | Formula::Ind(..)
                | Formula::Flat(..)
        )
    })
}

fn ev(phi: &Formula, x: &Tm, strategy: EvalStrategy) -> bool {
    eval(&model(), &to_team(&VARS, x), phi, strategy, &EvalBudget::default()).unwrap()
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(phi in formula(4, true)) {
        prop_assert_eq!(parse(&render(&phi)).unwrap(), phi);
    }

    #[test]
    fn desugaring_hooks_keeps_free_variables(phi in formula(4, true)) {
        prop_assert_eq!(desugar_hook(&phi).free_variables(), phi.free_variables());
    }

    #[test]
    fn flattening_removes_team_atoms_and_is_idempotent(phi in formula(4, false)) {
        for mode in [ExclusionMode::Top, ExclusionMode::Inequality] {
            let f = flatten(&phi, mode).unwrap();
            prop_assert!(no_team_atoms(&f), "{}", f);
            prop_assert_eq!(flatten(&f, mode).unwrap(), f);
        }
    }

    #[test]
    fn simplify_f_is_idempotent(phi in formula(4, true)) {
        let once = simplify_f(&phi);
        prop_assert_eq!(simplify_f(&once), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn flat_formula_is_flat(phi in formula(3, true), mask in 0u8..16) {
        let x = team_of(mask);
        let whole = ev(&Formula::flat(phi.clone()), &x, EvalStrategy::optimized());
        let rows = x.iter().all(|r| ev(&phi, &std::iter::once(r.clone()).collect(), EvalStrategy::optimized()));
        prop_assert_eq!(whole, rows);
    }

    #[test]
    fn strategies_and_oracle_agree(phi in formula(3, true), mask in 0u8..16) {
        let x = team_of(mask);
        let want = sat(&model(), &x, &phi);
        prop_assert_eq!(ev(&phi, &x, EvalStrategy::Naive), want);
        prop_assert_eq!(ev(&phi, &x, EvalStrategy::optimized()), want);
    }

    #[test]
    fn simplify_f_preserves_truth(phi in formula(3, true), mask in 0u8..16) {
        let x = team_of(mask);
        let f = Formula::flat(phi);
        prop_assert_eq!(ev(&simplify_f(&f), &x, EvalStrategy::optimized()), ev(&f, &x, EvalStrategy::optimized()));
    }
}
