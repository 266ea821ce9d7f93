//! A deliberately naive evaluator written straight from the semantic
//! clauses, used as an independent reference in tests. Teams are sets of
//! assignments; nothing is shared with the library's evaluator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use teamflat::{Elem, Formula, Structure, Team, Term};

pub type Asg = BTreeMap<String, Elem>;
pub type Tm = BTreeSet<Asg>;

pub fn from_team(x: &Team) -> Tm {
    x.assignments().collect()
}

fn val(s: &Structure, a: &Asg, t: &Term) -> Elem {
    match t {
        Term::Var(v) => a[v],
        Term::Const(c) => s.constant(c).expect("constant"),
    }
}

fn vals(s: &Structure, a: &Asg, ts: &[Term]) -> Vec<Elem> {
    ts.iter().map(|t| val(s, a, t)).collect()
}

fn rel(s: &Structure, name: &str, tuple: &[Elem]) -> bool {
    s.relation(name).expect("relation").tuples().contains(tuple)
}

/// Tarskian truth of a first-order formula.
pub fn tarski(s: &Structure, a: &Asg, phi: &Formula) -> bool {
    match phi {
        Formula::Rel(r, ts) => rel(s, r, &vals(s, a, ts)),
        Formula::NegRel(r, ts) => !rel(s, r, &vals(s, a, ts)),
        Formula::Equal(l, r) => val(s, a, l) == val(s, a, r),
        Formula::NotEqual(l, r) => val(s, a, l) != val(s, a, r),
        Formula::Top => true,
        Formula::Bot => false,
        Formula::And(l, r) => tarski(s, a, l) && tarski(s, a, r),
        Formula::Or(l, r) => tarski(s, a, l) || tarski(s, a, r),
        Formula::Hook(g, b) => !tarski(s, a, g) || tarski(s, a, b),
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let mut hits = (0..s.size() as Elem).map(|e| {
                let mut a2 = a.clone();
                a2.insert(v.clone(), e);
                tarski(s, &a2, b)
            });
            if matches!(phi, Formula::Exists(..)) {
                hits.any(|h| h)
            } else {
                hits.all(|h| h)
            }
        }
        other => panic!("not first-order: {other}"),
    }
}

fn subsets(x: &Tm) -> Vec<Tm> {
    let rows: Vec<&Asg> = x.iter().collect();
    (0..1u64 << rows.len())
        .map(|m| {
            rows.iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, r)| (*r).clone())
                .collect()
        })
        .collect()
}

/// `X = Y ∪ Z` with `Y ⊨ a` and `Z ⊨ b`, trying every cover.
fn cover(x: &Tm, a: &dyn Fn(&Tm) -> bool, b: &dyn Fn(&Tm) -> bool) -> bool {
    subsets(x).iter().any(|y| {
        if !a(y) {
            return false;
        }
        let rest: Tm = x.difference(y).cloned().collect();
        subsets(y).iter().any(|w| {
            let z: Tm = rest.union(w).cloned().collect();
            b(&z)
        })
    })
}

/// Lax team semantics by definition.
pub fn sat(s: &Structure, x: &Tm, phi: &Formula) -> bool {
    let all = |p: &dyn Fn(&Asg) -> bool| x.iter().all(p);
    match phi {
        f if f.is_literal() => all(&|a| tarski(s, a, f)),
        Formula::NonEmpty => !x.is_empty(),
        Formula::Dep(ts, t) => x.iter().all(|a| {
            x.iter()
                .all(|b| vals(s, a, ts) != vals(s, b, ts) || val(s, a, t) == val(s, b, t))
        }),
        Formula::Anon(ts, t) => x.iter().all(|a| {
            x.iter()
                .any(|b| vals(s, a, ts) == vals(s, b, ts) && val(s, a, t) != val(s, b, t))
        }),
        Formula::Inc(l, r) => x
            .iter()
            .all(|a| x.iter().any(|b| vals(s, a, l) == vals(s, b, r))),
        Formula::Exc(l, r) => x
            .iter()
            .all(|a| x.iter().all(|b| vals(s, a, l) != vals(s, b, r))),
        Formula::Ind(c, l, r) => x.iter().all(|a| {
            x.iter().all(|b| {
                vals(s, a, c) != vals(s, b, c)
                    || x.iter().any(|d| {
                        vals(s, d, c) == vals(s, a, c)
                            && vals(s, d, l) == vals(s, a, l)
                            && vals(s, d, r) == vals(s, b, r)
                    })
            })
        }),
        Formula::And(a, b) => sat(s, x, a) && sat(s, x, b),
        Formula::Or(a, b) => cover(x, &|y| sat(s, y, a), &|z| sat(s, z, b)),
        Formula::Hook(g, b) => cover(
            x,
            &|y| y.iter().all(|r| !tarski(s, r, g)),
            &|z| z.iter().all(|r| tarski(s, r, g)) && sat(s, z, b),
        ),
        Formula::BoolOr(a, b) => sat(s, x, a) || sat(s, x, b),
        Formula::BoolNeg(a) => !sat(s, x, a),
        Formula::Flat(a) => x.iter().all(|r| sat(s, &single(r), a)),
        Formula::SomeRow(a) => x.iter().any(|r| sat(s, &single(r), a)),
        Formula::Forall(v, b) => {
            let dup: Tm = x
                .iter()
                .flat_map(|r| (0..s.size() as Elem).map(move |e| with(r, v, e)))
                .collect();
            sat(s, &dup, b)
        }
        Formula::Exists(v, b) => {
            // Every H: X -> nonempty subsets of M.
            let rows: Vec<&Asg> = x.iter().collect();
            let choices = (1u32 << s.size()) - 1;
            let total = (choices as u64).pow(rows.len() as u32);
            (0..total).any(|mut code| {
                let mut sup = Tm::new();
                for r in &rows {
                    let set = (code % choices as u64) as u32 + 1;
                    code /= choices as u64;
                    for e in 0..s.size() as Elem {
                        if set >> e & 1 == 1 {
                            sup.insert(with(r, v, e));
                        }
                    }
                }
                sat(s, &sup, b)
            })
        }
        other => unreachable!("{other}"),
    }
}

fn single(r: &Asg) -> Tm {
    std::iter::once(r.clone()).collect()
}

fn with(r: &Asg, v: &str, e: Elem) -> Asg {
    let mut r = r.clone();
    r.insert(v.to_string(), e);
    r
}

/// All teams over `vars` in `s`.
pub fn all_teams(s: &Structure, vars: &[&str]) -> Vec<Tm> {
    let mut space = vec![Asg::new()];
    for v in vars {
        space = space
            .into_iter()
            .flat_map(|a| (0..s.size() as Elem).map(move |e| with(&a, v, e)))
            .collect();
    }
    subsets(&space.into_iter().collect())
}

pub fn to_team(vars: &[&str], x: &Tm) -> Team {
    Team::from_assignments(vars, &x.iter().cloned().collect::<Vec<_>>()).expect("valid team")
}

/// Connectivity by depth-first search over the symmetric closure of `E`.
pub fn connected(s: &Structure) -> bool {
    let n = s.size();
    if n == 0 {
        return true;
    }
    let edges: Vec<(Elem, Elem)> = s
        .relation("E")
        .map(|r| r.tuples().iter().map(|t| (t[0], t[1])).collect())
        .unwrap_or_default();
    let mut seen = vec![false; n];
    let mut stack = vec![0 as Elem];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in &edges {
            for (p, q) in [(a, b), (b, a)] {
                if p == v && !seen[q as usize] {
                    seen[q as usize] = true;
                    stack.push(q);
                }
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// Every permutation of `0..n`, by brute force.
pub fn permutations(n: usize) -> Vec<Vec<Elem>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, (n - 1) as Elem);
            out.push(q);
        }
    }
    out
}

/// Closure of `x` under the pointwise action of `maps`, by iteration.
pub fn closure(x: &Tm, maps: &[Vec<Elem>]) -> Tm {
    let mut cur = x.clone();
    loop {
        let mut next = cur.clone();
        for r in &cur {
            for f in maps {
                next.insert(r.iter().map(|(k, &v)| (k.clone(), f[v as usize])).collect());
            }
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}
