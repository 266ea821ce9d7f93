mod common;

use common::*;
use teamflat::analysis::{self, Universe, UniverseConfig};
use teamflat::flatten::{check_translation_biconditional, verify_flattening_axioms};
use teamflat::pool::{self, PoolKind, POOL_VARS};
use teamflat::{
    automorphisms, check_magma_hypothesis, eval, gen_cycle, parse, team_closure, EvalBudget,
    Formula, Permutation, Strategy, Structure, Verdict,
};

fn b() -> EvalBudget {
    EvalBudget::default()
}

fn universe(phis: &[&Formula], max_domain: usize) -> Universe {
    let config = UniverseConfig {
        max_domain,
        ..UniverseConfig::default()
    };
    Universe::for_formulas(&config, phis).unwrap()
}

#[test]
fn four_cycle_automorphisms_match_brute_force() {
    let s = gen_cycle(4, true).unwrap();
    let edges = s.relation("E").unwrap().tuples().clone();
    let brute: Vec<Vec<u32>> = permutations(4)
        .into_iter()
        .filter(|p| {
            edges
                .iter()
                .all(|e| edges.contains(&vec![p[e[0] as usize], p[e[1] as usize]]))
        })
        .collect();
    assert_eq!(brute.len(), 8);
    let lib = automorphisms(&s, 8).unwrap();
    let mut lib_images: Vec<Vec<u32>> = lib.iter().map(|p| p.images().to_vec()).collect();
    let mut brute_sorted = brute;
    lib_images.sort();
    brute_sorted.sort();
    assert_eq!(lib_images, brute_sorted);
}

fn hypothesis_c(n: usize, maps: &[Vec<u32>]) -> bool {
    (0..n as u32).all(|m1| {
        (0..n as u32)
            .filter(|&m2| m2 != m1)
            .all(|m2| maps.iter().any(|f| f[m1 as usize] == m1 && f[m2 as usize] != m2))
    })
}

#[test]
fn magma_hypothesis_matches_brute_force() {
    let s = Structure::with_size(3, "e").unwrap();
    let all = permutations(3);
    assert!(hypothesis_c(3, &all));
    let maps: Vec<Permutation> = all.iter().map(|p| Permutation::from_images(p.clone()).unwrap()).collect();
    assert!(check_magma_hypothesis(&s, &maps).unwrap().holds());

    let c4 = gen_cycle(4, true).unwrap();
    let rotations: Vec<Vec<u32>> = (0..4u32).map(|k| (0..4u32).map(|i| (i + k) % 4).collect()).collect();
    assert!(!hypothesis_c(4, &rotations));
    let maps: Vec<Permutation> = rotations.iter().map(|p| Permutation::from_images(p.clone()).unwrap()).collect();
    assert!(!check_magma_hypothesis(&c4, &maps).unwrap().holds());
}

#[test]
fn team_closure_is_idempotent_and_matches_brute_force() {
    let s = Structure::with_size(3, "e").unwrap();
    let swap = vec![vec![0, 1, 2], vec![1, 0, 2]];
    let maps: Vec<Permutation> = swap.iter().map(|p| Permutation::from_images(p.clone()).unwrap()).collect();
    for x in all_teams(&s, &["x", "y"]).into_iter().step_by(7) {
        let team = to_team(&["x", "y"], &x);
        let once = team_closure(&team, &maps);
        assert_eq!(from_team(&once), closure(&x, &swap));
        assert_eq!(team_closure(&once, &maps), once);
    }
}

#[test]
fn anon_with_bot_candidate_violates_entailment() {
    let phi = parse("anon(x; y)").unwrap();
    let u = universe(&[&phi], 2);
    let r = verify_flattening_axioms(&phi, &Formula::Bot, &u).unwrap();
    assert_eq!(r.verdict, Verdict::Counterexample);
    let w = r.witness.unwrap();
    let s = u.structure(&w.structure).unwrap();
    let x = from_team(&w.teams[0].1);
    assert!(sat(s, &x, &phi));
    assert!(!sat(s, &x, &Formula::Bot));
    // The two-row team from the proof: same x, different y.
    let two = to_team(&["x", "y"], &[[("x", 0), ("y", 0)], [("x", 0), ("y", 1)]]
        .iter()
        .map(|r| r.iter().map(|(k, v)| (k.to_string(), *v)).collect())
        .collect());
    assert!(eval(s, &two, &phi, Strategy::Naive, &b()).unwrap());
}

#[test]
fn translation_biconditional_for_unary_relation() {
    let s = Structure::with_size(2, "e")
        .unwrap()
        .with_relation("R0", 1, [vec![1]])
        .unwrap();
    let psi = parse("R0(x)").unwrap();
    let teams = all_teams(&s, &["x"]);
    assert_eq!(teams.len(), 4);
    for x in &teams {
        let team = to_team(&["x"], x);
        let r = check_translation_biconditional(&s, &team, &psi, &psi, "S", &["x"], Strategy::Naive, &b()).unwrap();
        assert!(r.holds(), "{team}");
        let f_side = x.iter().all(|a| tarski(&s, a, &psi));
        assert_eq!(f_side, sat(&s, x, &Formula::flat(psi.clone())));
    }
}

fn union_closed_by_brute_force(phi: &Formula, max_domain: usize, vars: &[&str]) -> bool {
    (1..=max_domain).all(|n| {
        let s = Structure::with_size(n, "e").unwrap();
        let good: Vec<Tm> = all_teams(&s, vars).into_iter().filter(|x| sat(&s, x, phi)).collect();
        sat(&s, &Tm::new(), phi)
            && good.iter().all(|a| good.iter().all(|c| sat(&s, &a.union(c).cloned().collect(), phi)))
    })
}

#[test]
fn inclusion_atom_is_union_closed() {
    let phi = parse("inc(x; y)").unwrap();
    assert!(union_closed_by_brute_force(&phi, 3, &["x", "y"]));
    assert!(analysis::is_union_closed(&phi, &universe(&[&phi], 3)).unwrap().holds());
}

#[test]
fn nonconstancy_flatness_profile() {
    let phi = parse("anon(; y)").unwrap();
    let u = universe(&[&phi], 2);
    // Singletons never satisfy it; two-row teams with distinct y do.
    let s = Structure::with_size(2, "e").unwrap();
    let teams = all_teams(&s, &["y"]);
    let df = teams.iter().all(|x| !sat(&s, x, &phi) || x.iter().all(|r| sat(&s, &std::iter::once(r.clone()).collect(), &phi)));
    let uf = teams.iter().all(|x| !x.iter().all(|r| sat(&s, &std::iter::once(r.clone()).collect(), &phi)) || sat(&s, x, &phi));
    assert!(!df);
    assert!(uf);
    assert_eq!(analysis::is_downwards_flat(&phi, &u).unwrap().holds(), df);
    assert_eq!(analysis::is_upwards_flat(&phi, &u).unwrap().holds(), uf);
}

#[test]
fn disjoint_dependences_are_not_two_coherent() {
    let phi = parse("dep(x; y) | dep(u; v)").unwrap();
    let u = universe(&[&phi], 3);
    let r = analysis::is_n_coherent(&phi, 2, &u).unwrap();
    assert_eq!(r.verdict, Verdict::Counterexample);
    let w = r.witness.unwrap();
    let s = u.structure(&w.structure).unwrap();
    let x = from_team(&w.teams[0].1);
    assert!(!sat(s, &x, &phi));
    let rows: Vec<&Asg> = x.iter().collect();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let pair: Tm = [rows[i].clone(), rows[j].clone()].into_iter().collect();
            assert!(sat(s, &pair, &phi));
        }
    }
}

#[test]
fn magma_lemma_diagonal_refutation() {
    let s = Structure::with_size(3, "e").unwrap();
    let all = permutations(3);
    let phi = parse("anon(x; y)").unwrap();
    let closed: Vec<Tm> = all_teams(&s, &["x", "y"])
        .into_iter()
        .filter(|x| closure(x, &all) == *x)
        .collect();
    // Unions of the two orbits: empty, diagonal, off-diagonal, everything.
    assert_eq!(closed.len(), 4);
    let disagree: Vec<&Tm> = closed.iter().filter(|x| sat(&s, x, &phi) != sat(&s, x, &Formula::Top)).collect();
    assert_eq!(disagree.len(), 1);
    assert!(disagree[0].iter().all(|r| r["x"] == r["y"]));
    let maps: Vec<Permutation> = all.iter().map(|p| Permutation::from_images(p.clone()).unwrap()).collect();
    let r = analysis::magma_lemma_check(&s, &maps, &[phi], Strategy::optimized(), &b()).unwrap();
    assert_eq!(r.verdict, Verdict::Counterexample);
    assert_eq!(from_team(&r.witness.unwrap().teams[0].1), *disagree[0]);
}

#[test]
fn ne_disjunction_sides_by_brute_force() {
    let lhs = parse("F (NE | NE)").unwrap();
    let rhs = parse("F NE | F NE").unwrap();
    for n in 1..=3 {
        let s = Structure::with_size(n, "e").unwrap();
        for x in all_teams(&s, &["x"]) {
            assert_eq!(sat(&s, &x, &lhs), sat(&s, &x, &rhs));
            let team = to_team(&["x"], &x);
            assert_eq!(eval(&s, &team, &lhs, Strategy::Naive, &b()).unwrap(), sat(&s, &x, &lhs));
        }
    }
}

#[test]
fn evaluator_matches_oracle_on_general_pool() {
    let phis = pool::generate(PoolKind::General, 120, 3);
    let mut structures = vec![Structure::with_size(1, "e").unwrap()];
    let full1 = Structure::with_size(1, "e")
        .unwrap()
        .with_relation("P", 1, [vec![0]])
        .unwrap()
        .with_relation("R", 2, [vec![0, 0]])
        .unwrap();
    structures.push(full1);
    let mixed = Structure::with_size(2, "e")
        .unwrap()
        .with_relation("P", 1, [vec![1]])
        .unwrap()
        .with_relation("R", 2, [vec![0, 1], vec![1, 1]])
        .unwrap();
    structures.push(mixed);
    let mut checked = 0;
    for s in &structures {
        let s = if s.relation("P").is_none() {
            s.clone().with_relation("P", 1, Vec::<Vec<u32>>::new()).unwrap().with_relation("R", 2, Vec::<Vec<u32>>::new()).unwrap()
        } else {
            s.clone()
        };
        let teams: Vec<Tm> = all_teams(&s, &POOL_VARS).into_iter().filter(|x| x.len() <= 3).collect();
        for phi in &phis {
            for x in &teams {
                let team = to_team(&POOL_VARS, x);
                let want = sat(&s, x, phi);
                for strategy in [Strategy::Naive, Strategy::optimized()] {
                    assert_eq!(eval(&s, &team, phi, strategy, &b()).unwrap(), want, "{phi} on {team} ({strategy})");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn connectivity_oracle_agrees_with_library() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let g = teamflat::structure::gen_random_graph(5, 0.3, &mut rng).unwrap();
        assert_eq!(connected(&g), teamflat::is_connected(&g, "E").unwrap());
    }
}
