//! Semantic property checkers over bounded universes of structures and
//! teams. Every verdict is relative to the universe it was computed on.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{Checker, EvalBudget, Strategy};
use crate::flatten::{flatten, ExclusionMode};
use crate::formula::{Formula, Signature};
use crate::report::{PropertyReport, Witness};
use crate::structure::{check_magma_hypothesis, Elem, Permutation, Structure};
use crate::team::{assignment_space, team_closure, Team, DEFAULT_TEAM_ROW_LIMIT};

/// How a universe is generated.
#[derive(Clone, Debug)]
pub struct UniverseConfig {
    /// Structures of every size `1..=max_domain` are included.
    pub max_domain: usize,
    /// Relation interpretations per domain size: exhaustive up to this
    /// many, otherwise a seeded sample of this many.
    pub structures_per_size: usize,
    pub seed: u64,
    /// Only teams with at most this many rows. When unset, a cap is
    /// chosen for assignment spaces too large to enumerate in full.
    pub team_size_cap: Option<usize>,
    pub strategy: Strategy,
    pub budget: EvalBudget,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        UniverseConfig {
            max_domain: 3,
            structures_per_size: 64,
            seed: 0,
            team_size_cap: None,
            strategy: Strategy::optimized(),
            budget: EvalBudget::default(),
        }
    }
}

/// Teams are bitmasks over the lexicographically ordered assignment space.
struct Family {
    space: Vec<Vec<Elem>>,
    masks: Vec<u128>,
    index: HashMap<u128, usize>,
    /// Mask to position, for assignment spaces of at most 16 rows.
    dense: Vec<u32>,
}

/// Upper bound on teams per structure when a cap is picked automatically.
const AUTO_TEAM_LIMIT: u128 = 100_000;

impl Family {
    fn new(s: &Structure, vars: &[String], cap: Option<usize>) -> Result<(Family, usize)> {
        let space = assignment_space(s, vars);
        let r = space.len();
        if r > 128 {
            return Err(Error::TooLarge(format!(
                "{r} assignments over [{}]; at most 128 supported",
                vars.join(" ")
            )));
        }
        let count = |k: usize| -> u128 { (0..=k).map(|i| binomial(r, i)).sum() };
        let cap = match cap {
            Some(c) => c.min(r),
            None if r <= DEFAULT_TEAM_ROW_LIMIT => r,
            None => (0..=r).take_while(|&k| count(k) <= AUTO_TEAM_LIMIT).last().unwrap_or(0),
        };
        let mut masks = Vec::new();
        for k in 0..=cap {
            for combo in (0..r).combinations(k) {
                masks.push(combo.iter().fold(0u128, |m, &i| m | 1 << i));
            }
        }
        let mut dense = Vec::new();
        let mut index = HashMap::new();
        if r <= 16 {
            dense = vec![u32::MAX; 1 << r];
            for (i, &m) in masks.iter().enumerate() {
                dense[m as usize] = i as u32;
            }
        } else {
            index = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        }
        Ok((
            Family {
                space,
                masks,
                index,
                dense,
            },
            cap,
        ))
    }

    fn pos(&self, mask: u128) -> Option<usize> {
        if self.dense.is_empty() {
            self.index.get(&mask).copied()
        } else {
            self.dense.get(mask as usize).filter(|&&i| i != u32::MAX).map(|&i| i as usize)
        }
    }

    fn at(&self, mask: u128) -> usize {
        self.pos(mask).expect("mask in family")
    }

    fn rows(&self, mask: u128) -> impl Iterator<Item = &[Elem]> {
        (0..self.space.len())
            .filter(move |&i| mask >> i & 1 == 1)
            .map(move |i| self.space[i].as_slice())
    }

    fn team(&self, vars: &[String], mask: u128) -> Team {
        Team::new(vars, self.rows(mask).map(<[Elem]>::to_vec)).expect("rows match vars")
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1u128, |acc, i| acc.saturating_mul(n as u128 - i) / (i + 1))
}

/// A finite set of structures plus, for each, the teams over a fixed
/// variable list.
pub struct Universe {
    structures: Vec<(String, Structure)>,
    families: Vec<Family>,
    vars: Vec<String>,
    caps: BTreeSet<usize>,
    strategy: Strategy,
    budget: EvalBudget,
    origin: String,
}

impl Universe {
    /// Generated structures for `sig`, with teams over `vars`.
    pub fn generate<S: AsRef<str>>(config: &UniverseConfig, sig: &Signature, vars: &[S]) -> Result<Universe> {
        if config.max_domain == 0 {
            return Err(Error::Invalid("universe needs structures of size at least 1".into()));
        }
        let mut structures = Vec::new();
        for n in 1..=config.max_domain {
            for (i, s) in structures_of_size(sig, n, config.structures_per_size, config.seed)?
                .into_iter()
                .enumerate()
            {
                structures.push((format!("M{n}.{i}"), s));
            }
        }
        let origin = format!(
            "|M| in 1..={}, at most {} interpretations per size (seed {})",
            config.max_domain, config.structures_per_size, config.seed
        );
        Universe::from_structures(structures, vars, config, origin)
    }

    /// The default universe for a list of formulas: their joint signature
    /// and free variables.
    pub fn for_formulas(config: &UniverseConfig, formulas: &[&Formula]) -> Result<Universe> {
        let (sig, vars) = joint_signature(formulas)?;
        Universe::generate(config, &sig, &vars)
    }

    /// A universe made of the given structures.
    pub fn from_structures<S: AsRef<str>>(
        structures: Vec<(String, Structure)>,
        vars: &[S],
        config: &UniverseConfig,
        origin: String,
    ) -> Result<Universe> {
        let mut vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        vars.sort();
        vars.dedup();
        let mut families = Vec::new();
        let mut caps = BTreeSet::new();
        for (_, s) in &structures {
            let (f, cap) = Family::new(s, &vars, config.team_size_cap)?;
            families.push(f);
            caps.insert(cap);
        }
        Ok(Universe {
            structures,
            families,
            vars,
            caps,
            strategy: config.strategy,
            budget: config.budget.clone(),
            origin,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn structures(&self) -> &[(String, Structure)] {
        &self.structures
    }

    pub fn structure(&self, name: &str) -> Option<&Structure> {
        self.structures.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Number of (structure, team) pairs.
    pub fn size(&self) -> usize {
        self.families.iter().map(|f| f.masks.len()).sum()
    }

    pub fn describe(&self) -> String {
        let caps = self.caps.iter().join("/");
        format!(
            "{} structures ({}), teams over [{}] with at most {} rows, {} instances",
            self.structures.len(),
            self.origin,
            self.vars.join(" "),
            caps,
            self.size()
        )
    }

    /// Truth values of `phi` on every team of structure `i`, aligned with
    /// the family's mask list.
    fn table(&self, i: usize, phi: &Formula) -> Result<Vec<bool>> {
        let (_, s) = &self.structures[i];
        let fam = &self.families[i];
        let mut c = Checker::new(s, phi, &self.vars, self.strategy, self.budget.clone())?;
        fam.masks.iter().map(|&m| c.eval_rows(fam.rows(m))).collect()
    }

    fn witness(&self, i: usize, teams: &[(&str, u128)], note: String) -> Witness {
        let fam = &self.families[i];
        Witness {
            structure: self.structures[i].0.clone(),
            teams: teams
                .iter()
                .map(|(l, m)| (l.to_string(), fam.team(&self.vars, *m)))
                .collect(),
            note,
        }
    }
}

/// Joint signature and sorted free variables of several formulas.
pub fn joint_signature(formulas: &[&Formula]) -> Result<(Signature, Vec<String>)> {
    let mut sig = Signature::default();
    let mut vars = BTreeSet::new();
    for f in formulas {
        sig.merge(&f.signature()?)?;
        vars.extend(f.free_variables());
    }
    Ok((sig, vars.into_iter().collect()))
}

/// Structures of size `n` over `sig`: every interpretation when there are
/// at most `cap`, otherwise the all-empty and all-full interpretations and
/// seeded random ones, `cap` in total.
pub fn structures_of_size(sig: &Signature, n: usize, cap: usize, seed: u64) -> Result<Vec<Structure>> {
    let rels: Vec<(&String, usize, Vec<Vec<Elem>>)> = sig
        .relations
        .iter()
        .map(|(name, &arity)| {
            let tuples = (0..arity)
                .map(|_| 0..n as Elem)
                .multi_cartesian_product()
                .collect::<Vec<_>>();
            let tuples = if arity == 0 { vec![Vec::new()] } else { tuples };
            (name, arity, tuples)
        })
        .collect();
    let bits: usize = rels.iter().map(|r| r.2.len()).sum();
    let consts: Vec<&String> = sig.constants.iter().collect();
    let build = |choice: &[bool], cvals: &[Elem]| -> Result<Structure> {
        let mut s = Structure::with_size(n, "e")?;
        let mut k = 0;
        for (name, arity, tuples) in &rels {
            let chosen = tuples
                .iter()
                .filter(|_| {
                    k += 1;
                    choice[k - 1]
                })
                .cloned()
                .collect::<Vec<_>>();
            s = s.with_relation(name, *arity, chosen)?;
        }
        for (c, &v) in consts.iter().zip(cvals) {
            s = s.with_constant(c, v)?;
        }
        Ok(s)
    };
    let const_combos = (n as u128).checked_pow(consts.len() as u32).unwrap_or(u128::MAX);
    let total = 1u128
        .checked_shl(bits as u32)
        .filter(|_| bits < 128)
        .and_then(|r| r.checked_mul(const_combos));
    let cap = cap.max(1);
    let mut out = Vec::new();
    if total.is_some_and(|t| t <= cap as u128) {
        let cvals_all: Vec<Vec<Elem>> = if consts.is_empty() {
            vec![Vec::new()]
        } else {
            (0..consts.len())
                .map(|_| 0..n as Elem)
                .multi_cartesian_product()
                .collect()
        };
        for mask in 0..(1u128 << bits) {
            let choice: Vec<bool> = (0..bits).map(|b| mask >> b & 1 == 1).collect();
            for cv in &cvals_all {
                out.push(build(&choice, cv)?);
            }
        }
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let zeros = vec![0; consts.len()];
    for fixed in [false, true] {
        if out.len() < cap {
            out.push(build(&vec![fixed; bits], &zeros)?);
        }
    }
    let mut attempts = 0;
    while out.len() < cap && attempts < cap * 20 {
        attempts += 1;
        let choice: Vec<bool> = (0..bits).map(|_| rng.random_bool(0.5)).collect();
        let cv: Vec<Elem> = consts.iter().map(|_| rng.random_range(0..n as Elem)).collect();
        let s = build(&choice, &cv)?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Checks `phi`'s variables and signature fit the universe.
fn prepare(phi: &Formula, u: &Universe) -> Result<()> {
    if let Some(v) = phi.free_variables().into_iter().find(|v| !u.vars.contains(v)) {
        return Err(Error::UnboundVariable(v));
    }
    Ok(())
}

fn singleton_values(t: &[bool], fam: &Family) -> Vec<bool> {
    (0..fam.space.len()).map(|i| t[fam.at(1u128 << i)]).collect()
}

fn bits(mask: u128) -> impl Iterator<Item = usize> {
    (0..128).filter(move |&i| mask >> i & 1 == 1)
}

/// One pass over the universe: `check` returns a witness description for
/// the first violation on a structure, if any.
fn run_check(
    property: &str,
    phis: &[&Formula],
    u: &Universe,
    mut check: impl FnMut(&Family, &[Vec<bool>]) -> Option<(Vec<(&'static str, u128)>, String)>,
) -> Result<PropertyReport> {
    for phi in phis {
        prepare(phi, u)?;
    }
    let mut report = PropertyReport::new(property, u.describe());
    for i in 0..u.structures.len() {
        let tables = phis
            .iter()
            .map(|phi| u.table(i, phi))
            .collect::<Result<Vec<_>>>()?;
        let fam = &u.families[i];
        if let Some((teams, note)) = check(fam, &tables) {
            return Ok(report.fail(u.witness(i, &teams, note)));
        }
        report.checked += fam.masks.len();
    }
    Ok(report)
}

type Violation = Option<(Vec<(&'static str, u128)>, String)>;

fn flat_violation(fam: &Family, t: &[bool]) -> Violation {
    let sv = singleton_values(t, fam);
    fam.masks.iter().zip(t).find_map(|(&m, &v)| {
        let pointwise = bits(m).all(|i| sv[i]);
        (v != pointwise).then(|| (vec![("X", m)], format!("team {v}, all singletons {pointwise}")))
    })
}

fn df_violation(fam: &Family, t: &[bool]) -> Violation {
    let sv = singleton_values(t, fam);
    fam.masks.iter().zip(t).find_map(|(&m, &v)| match bits(m).find(|&i| !sv[i]) {
        Some(i) if v => Some((
            vec![("X", m), ("s", 1u128 << i)],
            "team satisfies, singleton does not".to_string(),
        )),
        _ => None,
    })
}

fn uf_violation(fam: &Family, t: &[bool]) -> Violation {
    let sv = singleton_values(t, fam);
    fam.masks.iter().zip(t).find_map(|(&m, &v)| {
        (!v && bits(m).all(|i| sv[i]))
            .then(|| (vec![("X", m)], "every singleton satisfies, team does not".to_string()))
    })
}

/// Removing one row at a time reaches every subteam through teams of the
/// family, so one-row removals suffice.
fn dc_violation(fam: &Family, t: &[bool]) -> Violation {
    fam.masks.iter().zip(t).find_map(|(&m, &v)| {
        if !v {
            return None;
        }
        bits(m).find_map(|i| {
            let sub = m & !(1u128 << i);
            (!t[fam.at(sub)])
                .then(|| (vec![("X", m), ("Y", sub)], "X satisfies, subteam Y does not".to_string()))
        })
    })
}

/// The empty family counts, so the empty team must satisfy. Pairwise
/// unions generate every finite union.
fn uc_violation(fam: &Family, t: &[bool]) -> Violation {
    if !t[fam.at(0)] {
        return Some((vec![("X", 0)], "empty union not satisfied".to_string()));
    }
    let sat: Vec<u128> = fam.masks.iter().zip(t).filter(|(_, &v)| v).map(|(&m, _)| m).collect();
    for (a, &ma) in sat.iter().enumerate() {
        for &mb in &sat[a + 1..] {
            if ma & mb == mb || ma & mb == ma {
                continue;
            }
            if let Some(j) = fam.pos(ma | mb) {
                if !t[j] {
                    return Some((
                        vec![("X", ma), ("Y", mb), ("union", ma | mb)],
                        "X and Y satisfy, their union does not".to_string(),
                    ));
                }
            }
        }
    }
    None
}

/// Truth on a team is truth on every singleton subteam.
pub fn is_flat(phi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("flat", &[phi], u, |fam, t| flat_violation(fam, &t[0]))
}

pub fn is_downwards_flat(phi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("downwards-flat", &[phi], u, |fam, t| df_violation(fam, &t[0]))
}

pub fn is_upwards_flat(phi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("upwards-flat", &[phi], u, |fam, t| uf_violation(fam, &t[0]))
}

/// Closed under subteams.
pub fn is_downwards_closed(phi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("downwards-closed", &[phi], u, |fam, t| dc_violation(fam, &t[0]))
}

/// Closed under unions of arbitrary families, including the empty family.
pub fn is_union_closed(phi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("union-closed", &[phi], u, |fam, t| uc_violation(fam, &t[0]))
}

/// `X` satisfies iff every `n`-row subteam does.
pub fn is_n_coherent(phi: &Formula, n: usize, u: &Universe) -> Result<PropertyReport> {
    if n == 0 {
        return Err(Error::Invalid("coherence needs n >= 1".into()));
    }
    run_check(&format!("{n}-coherent"), &[phi], u, |fam, t| {
        fam.masks.iter().zip(&t[0]).find_map(|(&m, &v)| {
            let rows: Vec<usize> = bits(m).collect();
            let failing = rows.iter().copied().combinations(n).find_map(|c| {
                let sub = c.iter().fold(0u128, |acc, &i| acc | 1 << i);
                (!t[0][fam.at(sub)]).then_some(sub)
            });
            match (v, failing) {
                (true, Some(sub)) => Some((
                    vec![("X", m), ("Y", sub)],
                    format!("X satisfies, its {n}-row subteam Y does not"),
                )),
                (false, None) => Some((
                    vec![("X", m)],
                    format!("every {n}-row subteam satisfies, X does not"),
                )),
                _ => None,
            }
        })
    })
}

pub fn equivalent(phi: &Formula, psi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("equivalent", &[phi, psi], u, |fam, t| {
        fam.masks.iter().enumerate().find_map(|(j, &m)| {
            (t[0][j] != t[1][j]).then(|| {
                (
                    vec![("X", m)],
                    format!("left {}, right {}", t[0][j], t[1][j]),
                )
            })
        })
    })
}

pub fn entails(phi: &Formula, psi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("entails", &[phi, psi], u, |fam, t| {
        fam.masks.iter().enumerate().find_map(|(j, &m)| {
            (t[0][j] && !t[1][j]).then(|| (vec![("X", m)], "left true, right false".to_string()))
        })
    })
}

/// Satisfied by the empty team in every structure.
pub fn has_empty_team_property(phi: &Formula, u: &Universe) -> Result<PropertyReport> {
    run_check("empty-team", &[phi], u, |fam, t| {
        (!t[0][fam.at(0)]).then(|| (vec![("X", 0)], "empty team fails".to_string()))
    })
}

/// Verdicts of the five flatness notions on one universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureProfile {
    pub flat: bool,
    pub downwards_closed: bool,
    pub union_closed: bool,
    pub downwards_flat: bool,
    pub upwards_flat: bool,
}

impl ClosureProfile {
    /// The implications between the notions that hold for every formula;
    /// returns the first one this profile violates.
    pub fn violated_implication(&self) -> Option<&'static str> {
        let p = self;
        let rules: [(&str, bool, bool); 8] = [
            ("flat => DC", p.flat, p.downwards_closed),
            ("flat => UC", p.flat, p.union_closed),
            ("flat => DF", p.flat, p.downwards_flat),
            ("flat => UF", p.flat, p.upwards_flat),
            ("DC => DF", p.downwards_closed, p.downwards_flat),
            ("UC => UF", p.union_closed, p.upwards_flat),
            ("DF & UF => flat", p.downwards_flat && p.upwards_flat, p.flat),
            ("DC & UC => flat", p.downwards_closed && p.union_closed, p.flat),
        ];
        rules.iter().find(|(_, a, b)| *a && !*b).map(|r| r.0)
    }
}

pub fn closure_profile(phi: &Formula, u: &Universe) -> Result<ClosureProfile> {
    prepare(phi, u)?;
    let checks: [fn(&Family, &[bool]) -> Violation; 5] =
        [flat_violation, dc_violation, uc_violation, df_violation, uf_violation];
    let mut ok = [true; 5];
    for i in 0..u.structures.len() {
        let t = u.table(i, phi)?;
        for (slot, check) in ok.iter_mut().zip(checks) {
            if *slot && check(&u.families[i], &t).is_some() {
                *slot = false;
            }
        }
    }
    Ok(ClosureProfile {
        flat: ok[0],
        downwards_closed: ok[1],
        union_closed: ok[2],
        downwards_flat: ok[3],
        upwards_flat: ok[4],
    })
}

/// On teams closed under `maps`, `phi` and its flattening agree, provided
/// `maps` satisfies the magma hypothesis on `s`.
pub fn magma_lemma_check(
    s: &Structure,
    maps: &[Permutation],
    phis: &[Formula],
    strategy: Strategy,
    budget: &EvalBudget,
) -> Result<PropertyReport> {
    let hypothesis = check_magma_hypothesis(s, maps)?;
    let universe = format!(
        "one structure of size {}, {} maps, {} formulas",
        s.size(),
        maps.len(),
        phis.len()
    );
    let mut report = PropertyReport::new("magma-lemma", universe);
    if !hypothesis.holds() {
        let why = hypothesis.witness.map(|w| w.note).unwrap_or_default();
        return Ok(report.inapplicable(format!("magma hypothesis fails: {why}")));
    }
    let mut skipped = 0;
    for phi in phis {
        let flat = flatten(phi, ExclusionMode::Top)?;
        let vars: Vec<String> = phi.free_variables().into_iter().collect();
        let mut lhs = Checker::new(s, phi, &vars, strategy, budget.clone())?;
        let mut rhs = Checker::new(s, &flat, &vars, strategy, budget.clone())?;
        for x in crate::team::enumerate_teams(s, &vars, None)? {
            if team_closure(&x, maps) != x {
                skipped += 1;
                continue;
            }
            report.checked += 1;
            let (a, b) = (lhs.eval(&x)?, rhs.eval(&x)?);
            if a != b {
                return Ok(report.fail(Witness {
                    structure: String::new(),
                    teams: vec![("X".into(), x)],
                    note: format!("{phi} is {a}, its flattening {flat} is {b}"),
                }));
            }
        }
    }
    report.universe.push_str(&format!(", {skipped} non-closed teams skipped"));
    Ok(report)
}
