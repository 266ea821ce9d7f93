//! Seeded random formula pools for property suites and experiments.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{Checker, EvalBudget, Strategy};
use crate::formula::{Formula, Signature, Term};
use crate::structure::Structure;
use crate::team::enumerate_teams;

/// Which fragment a pool draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PoolKind {
    /// Every atom and connective, over `P/1` and `R/2`.
    General,
    /// No `neg`, `vv`, `some` or `NE`, so `flatten` applies.
    Flattenable,
    /// Equalities and anonymity atoms of arity at most 1, empty signature.
    AnonUnary,
    /// Literals and dependence atoms under `&`, `|` and `E`.
    ExistentialDep,
    /// Plain first-order formulas over `P/1` and `R/2`.
    FirstOrder,
}

/// Free variables of every pool formula are among these.
pub const POOL_VARS: [&str; 2] = ["x", "y"];

/// Longest root-to-leaf path, counting nodes.
pub const POOL_MAX_DEPTH: usize = 4;

impl PoolKind {
    pub fn signature(self) -> Signature {
        let mut sig = Signature::default();
        if self != PoolKind::AnonUnary {
            sig.add_relation("P", 1).expect("fresh");
            sig.add_relation("R", 2).expect("fresh");
        }
        sig
    }

    fn max_quantifiers(self) -> usize {
        match self {
            PoolKind::AnonUnary | PoolKind::FirstOrder => 2,
            _ => 1,
        }
    }
}

type PoolCache = Mutex<HashMap<(PoolKind, usize, u64), Vec<Formula>>>;

/// `count` distinct formulas of the given fragment. The result is a
/// pure function of the arguments.
///
/// Drawn formulas are discarded when either strategy needs more than
/// `probe_branches` branches on some team over `x, y` in one of a few
/// three-element probe structures, so that exhaustive suites stay
/// tractable.
pub fn generate(kind: PoolKind, count: usize, seed: u64) -> Vec<Formula> {
    static CACHE: OnceLock<PoolCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("pool cache").get(&(kind, count, seed)) {
        return hit.clone();
    }
    let pool = generate_with_probe(kind, count, seed, DEFAULT_PROBE_BRANCHES);
    cache.lock().expect("pool cache").insert((kind, count, seed), pool.clone());
    pool
}

pub const DEFAULT_PROBE_BRANCHES: u64 = 20_000;

pub fn generate_with_probe(kind: PoolKind, count: usize, seed: u64, probe_branches: u64) -> Vec<Formula> {
    let mut g = Gen {
        kind,
        rng: ChaCha8Rng::seed_from_u64(seed),
        quantifiers: 0,
    };
    let probe = Probe::new(kind, probe_branches);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    for phi in g.seeds().into_iter().chain(std::iter::from_fn(|| Some(g.draw()))) {
        if out.len() >= count {
            break;
        }
        if phi.depth() > POOL_MAX_DEPTH || !seen.insert(phi.clone()) || !probe.accepts(&phi) {
            continue;
        }
        out.push(phi);
    }
    out
}

/// Would `generate` keep `phi` for a pool of `kind`?
pub fn tractable(kind: PoolKind, phi: &Formula) -> bool {
    phi.depth() <= POOL_MAX_DEPTH + 1 && Probe::new(kind, DEFAULT_PROBE_BRANCHES).accepts(phi)
}

struct Probe {
    structures: Vec<Structure>,
    budget: EvalBudget,
}

impl Probe {
    fn new(kind: PoolKind, branches: u64) -> Probe {
        let plain = Structure::with_size(3, "e").expect("valid");
        let mut structures = vec![plain.clone()];
        if kind != PoolKind::AnonUnary {
            let all: Vec<_> = (0..3u32).flat_map(|a| (0..3u32).map(move |b| vec![a, b])).collect();
            let full = plain
                .clone()
                .with_relation("P", 1, (0..3u32).map(|a| vec![a]))
                .and_then(|s| s.with_relation("R", 2, all))
                .expect("valid");
            let mixed = plain
                .with_relation("P", 1, [vec![0]])
                .and_then(|s| s.with_relation("R", 2, [vec![0, 1], vec![1, 2], vec![2, 2]]))
                .expect("valid");
            structures.push(full);
            structures.push(mixed);
        }
        Probe {
            structures,
            budget: EvalBudget {
                max_branches: branches,
                ..EvalBudget::default()
            },
        }
    }

    fn accepts(&self, phi: &Formula) -> bool {
        let vars: Vec<&str> = POOL_VARS.to_vec();
        self.structures.iter().all(|s| {
            [Strategy::Naive, Strategy::optimized()].into_iter().all(|strategy| {
                let Ok(mut c) = Checker::new(s, phi, &vars, strategy, self.budget.clone()) else {
                    return false;
                };
                enumerate_teams(s, &vars, None)
                    .map(|it| it.into_iter().all(|x| c.eval(&x).is_ok()))
                    .unwrap_or(false)
            })
        })
    }
}

struct Gen {
    kind: PoolKind,
    rng: ChaCha8Rng,
    quantifiers: usize,
}

impl Gen {
    /// Every atom shape the fragment allows, so each appears at least once.
    fn seeds(&self) -> Vec<Formula> {
        let (x, y) = (Term::var("x"), Term::var("y"));
        let mut v = vec![Formula::eq(x.clone(), y.clone()), Formula::neq(x.clone(), y.clone())];
        let rel = |neg: bool, name: &str, ts: Vec<Term>| {
            if neg {
                Formula::NegRel(name.into(), ts)
            } else {
                Formula::Rel(name.into(), ts)
            }
        };
        let k = self.kind;
        if k != PoolKind::AnonUnary {
            for neg in [false, true] {
                v.push(rel(neg, "P", vec![x.clone()]));
                v.push(rel(neg, "R", vec![x.clone(), y.clone()]));
            }
        }
        if matches!(k, PoolKind::General | PoolKind::Flattenable | PoolKind::ExistentialDep) {
            v.push(Formula::Dep(vec![x.clone()], y.clone()));
            v.push(Formula::Dep(vec![], x.clone()));
        }
        if matches!(k, PoolKind::General | PoolKind::Flattenable | PoolKind::AnonUnary) {
            v.push(Formula::Anon(vec![x.clone()], y.clone()));
            v.push(Formula::Anon(vec![], y.clone()));
        }
        if matches!(k, PoolKind::General | PoolKind::Flattenable) {
            v.push(Formula::Inc(vec![x.clone()], vec![y.clone()]));
            v.push(Formula::Exc(vec![x.clone()], vec![y.clone()]));
            v.push(Formula::Ind(vec![], vec![x.clone()], vec![y.clone()]));
            v.push(Formula::Top);
            v.push(Formula::Bot);
        }
        if k == PoolKind::General {
            v.push(Formula::NonEmpty);
            let guard = Formula::Rel("R".into(), vec![x.clone(), y.clone()]);
            v.push(Formula::hook(guard, Formula::Dep(vec![], y.clone())).expect("FO guard"));
            v.push(Formula::flat(Formula::Anon(vec![], x.clone())));
            v.push(Formula::some_row(Formula::eq(x.clone(), y.clone())));
            v.push(Formula::bool_or(Formula::NonEmpty, Formula::Dep(vec![], x.clone())));
            v.push(Formula::bool_neg(Formula::NonEmpty));
        }
        v
    }

    fn draw(&mut self) -> Formula {
        self.quantifiers = 0;
        let depth = self.rng.random_range(2..=POOL_MAX_DEPTH);
        self.formula(depth, &["x", "y"])
    }

    fn term(&mut self, scope: &[&str]) -> Term {
        Term::var(*scope.choose(&mut self.rng).expect("nonempty scope"))
    }

    fn terms(&mut self, n: usize, scope: &[&str]) -> Vec<Term> {
        (0..n).map(|_| self.term(scope)).collect()
    }

    fn literal(&mut self, scope: &[&str]) -> Formula {
        let relational = self.kind != PoolKind::AnonUnary;
        let pick = self.rng.random_range(0..if relational { 4 } else { 2 });
        let neg = self.rng.random_bool(0.35);
        match pick {
            0 | 1 => {
                let (a, b) = (self.term(scope), self.term(scope));
                if neg {
                    Formula::neq(a, b)
                } else {
                    Formula::eq(a, b)
                }
            }
            2 => {
                let ts = self.terms(1, scope);
                if neg {
                    Formula::NegRel("P".into(), ts)
                } else {
                    Formula::Rel("P".into(), ts)
                }
            }
            _ => {
                let ts = self.terms(2, scope);
                if neg {
                    Formula::NegRel("R".into(), ts)
                } else {
                    Formula::Rel("R".into(), ts)
                }
            }
        }
    }

    fn atom(&mut self, scope: &[&str]) -> Formula {
        let k = self.kind;
        let team_atoms: &[u8] = match k {
            PoolKind::General => &[0, 1, 2, 3, 4, 5, 6, 7],
            PoolKind::Flattenable => &[0, 1, 2, 3, 4, 6, 7],
            PoolKind::AnonUnary => &[1],
            PoolKind::ExistentialDep => &[0],
            PoolKind::FirstOrder => &[],
        };
        if team_atoms.is_empty() || self.rng.random_bool(0.45) {
            return self.literal(scope);
        }
        let arity = self.rng.random_range(0..=1);
        match *team_atoms.choose(&mut self.rng).expect("nonempty") {
            0 => {
                let ts = self.terms(arity, scope);
                Formula::Dep(ts, self.term(scope))
            }
            1 => {
                let ts = self.terms(arity, scope);
                Formula::Anon(ts, self.term(scope))
            }
            2 => {
                let n = self.rng.random_range(1..=2);
                Formula::Inc(self.terms(n, scope), self.terms(n, scope))
            }
            3 => {
                let n = self.rng.random_range(1..=2);
                Formula::Exc(self.terms(n, scope), self.terms(n, scope))
            }
            4 => Formula::Ind(self.terms(arity, scope), self.terms(1, scope), self.terms(1, scope)),
            5 => Formula::NonEmpty,
            6 => Formula::Top,
            _ => Formula::Bot,
        }
    }

    fn guard(&mut self, scope: &[&str]) -> Formula {
        let a = self.literal(scope);
        if self.rng.random_bool(0.3) {
            let b = self.literal(scope);
            if self.rng.random_bool(0.5) {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        } else {
            a
        }
    }

    fn formula(&mut self, depth: usize, scope: &[&str]) -> Formula {
        if depth <= 1 || self.rng.random_bool(0.2) {
            return self.atom(scope);
        }
        let k = self.kind;
        // and, or, hook, E, A, F, some, vv, neg
        let ops: &[u8] = match k {
            PoolKind::General => &[0, 0, 1, 1, 2, 3, 4, 5, 6, 7, 8],
            PoolKind::Flattenable => &[0, 0, 1, 1, 2, 3, 4, 5],
            PoolKind::AnonUnary | PoolKind::FirstOrder => &[0, 1, 2, 3, 4],
            PoolKind::ExistentialDep => &[0, 1, 3],
        };
        let mut op = *ops.choose(&mut self.rng).expect("nonempty");
        if matches!(op, 3 | 4) && self.quantifiers >= k.max_quantifiers() {
            op = 0;
        }
        match op {
            0 => Formula::and(self.formula(depth - 1, scope), self.formula(depth - 1, scope)),
            1 => Formula::or(self.formula(depth - 1, scope), self.formula(depth - 1, scope)),
            2 => {
                let g = self.guard(scope);
                Formula::hook(g, self.formula(depth - 1, scope)).expect("FO guard")
            }
            3 | 4 => {
                self.quantifiers += 1;
                let v = *["x", "y", "z"].choose(&mut self.rng).expect("nonempty");
                let mut inner: Vec<&str> = scope.to_vec();
                if !inner.contains(&v) {
                    inner.push(v);
                }
                let body = self.formula(depth - 1, &inner);
                if op == 3 {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
            5 => Formula::flat(self.formula(depth - 1, scope)),
            6 => Formula::some_row(self.formula(depth - 1, scope)),
            7 => Formula::bool_or(self.formula(depth - 1, scope), self.formula(depth - 1, scope)),
            _ => Formula::bool_neg(self.formula(depth - 1, scope)),
        }
    }
}

/// Does `phi` belong to the fragment `kind` describes?
pub fn in_fragment(kind: PoolKind, phi: &Formula) -> bool {
    let sig_ok = phi
        .signature()
        .map(|s| s.relations.keys().all(|r| kind.signature().relations.contains_key(r)))
        .unwrap_or(false);
    let fv_ok = phi.free_variables().iter().all(|v| POOL_VARS.contains(&v.as_str()));
    sig_ok
        && fv_ok
        && phi.all_nodes(&|f| match kind {
            PoolKind::General => true,
            PoolKind::Flattenable => f.is_lax_team_logic() && *f != Formula::NonEmpty,
            PoolKind::AnonUnary => match f {
                Formula::Anon(ts, _) => ts.len() <= 1,
                Formula::Rel(..) | Formula::NegRel(..) => false,
                f if f.is_team_atom() => false,
                Formula::Flat(_) | Formula::SomeRow(_) | Formula::BoolOr(..) | Formula::BoolNeg(_) => false,
                _ => true,
            },
            PoolKind::ExistentialDep => matches!(
                f,
                Formula::Dep(..) | Formula::And(..) | Formula::Or(..) | Formula::Exists(..)
            ) || f.is_literal(),
            PoolKind::FirstOrder => f.is_first_order(),
        })
}
