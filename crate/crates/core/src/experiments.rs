//! The reproduction suite: one experiment per proposition or remark.
//!
//! Each experiment returns a [`Status`] plus a single-line detail string.
//! Measured results are reported as found, including refutations.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{self, Universe, UniverseConfig};
use crate::error::{Error, Result};
use crate::eval::{eval_sentence, Checker, EvalBudget, Strategy};
use crate::flatten::{check_translation_biconditional, flatten, verify_flattening_axioms, ExclusionMode};
use crate::formula::Formula;
use crate::parser::parse;
use crate::pool::{self, PoolKind, POOL_VARS};
use crate::report::{PropertyReport, Witness};
use crate::structure::{automorphisms, gen_a, gen_b, gen_random_graph, is_connected, Structure};
use crate::team::enumerate_teams;

pub const DISCONNECT_SENTENCE: &str = "E y. F (E x. (x != y & A z. (E(x, z) => inc(z; x))))";
pub const SEPARATING_SENTENCE: &str =
    "E x. F (E y. (y != x & A z. (E(y, z) => (z != x & anon(y; z) & anon(z; y)))))";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inapplicable => "INAPPLICABLE",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: &'static str,
    pub status: Status,
    pub details: String,
    pub elapsed: Duration,
}

impl Outcome {
    /// `id TAB verdict TAB details`.
    pub fn record(&self) -> String {
        format!("{}\t{}\t{}", self.id, self.status, self.details)
    }
}

/// Knobs shared by all experiments.
#[derive(Clone, Debug)]
pub struct Settings {
    pub strategy: Strategy,
    pub budget: EvalBudget,
    pub exclusion: ExclusionMode,
    pub max_domain: usize,
    pub seed: u64,
    /// Relation interpretations sampled per domain size for pool-wide
    /// checks over `P/1, R/2`.
    pub structures_per_size: usize,
    pub pool_size: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            strategy: Strategy::optimized(),
            budget: EvalBudget::default(),
            exclusion: ExclusionMode::Top,
            max_domain: 3,
            seed: 0,
            structures_per_size: 16,
            pool_size: 200,
        }
    }
}

type Run = fn(&Settings) -> Result<(Status, String)>;

pub struct Experiment {
    pub id: &'static str,
    pub citation: &'static str,
    run: Run,
}

impl Experiment {
    pub fn run(&self, settings: &Settings) -> Result<Outcome> {
        let start = Instant::now();
        let (status, details) = (self.run)(settings)?;
        Ok(Outcome {
            id: self.id,
            status,
            details: details.replace(['\t', '\n'], " "),
            elapsed: start.elapsed(),
        })
    }
}

impl fmt::Debug for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Experiment").field("id", &self.id).finish()
    }
}

static CATALOG: &[Experiment] = &[
    Experiment {
        id: "atoms-flatten",
        citation: "Proposition (flattening of atoms): the flattening of dep, anon, inc and ind atoms is TOP",
        run: atoms_flatten,
    },
    Experiment {
        id: "exclusion-flattening",
        citation: "Remark (exclusion atom): both TOP and x != y satisfy the flattening axioms for exc(x; y)",
        run: exclusion_flattening,
    },
    Experiment {
        id: "F-properties",
        citation: "Property (flattening operator): F phi is flat, phi is flat iff F phi = phi, F F phi = F phi; \
                   Proposition: F(phi & psi) = F phi & F psi",
        run: f_properties,
    },
    Experiment {
        id: "remark-anon-sentence",
        citation: "Remark (converse fails): A x. E y. anon(x; y) on a one-element model",
        run: remark_anon_sentence,
    },
    Experiment {
        id: "atoms-F",
        citation: "Proposition (F on atoms): F dep = TOP, F anon = BOT, F inc is =, F exc is !=, F ind = TOP, F alpha = alpha",
        run: atoms_f,
    },
    Experiment {
        id: "F-or-distribution",
        citation: "Proposition: F(phi | psi) = F phi | F psi when both have the empty team property",
        run: f_or_distribution,
    },
    Experiment {
        id: "ne-distribution",
        citation: "Remark after the distribution proposition: NE | NE as a counterexample without the empty team property",
        run: ne_distribution,
    },
    Experiment {
        id: "quantifier-commutation",
        citation: "Propositions (quantifiers): F(Q x phi) entails Q x F phi under downwards flatness, converse under upwards flatness",
        run: quantifier_commutation,
    },
    Experiment {
        id: "flatness-lattice",
        citation: "Figure (flatness notions): flat, DC, UC, DF, UF implication diagram",
        run: flatness_lattice,
    },
    Experiment {
        id: "closure-preservation",
        citation: "Lemma (preservation): F preserves downward closure, union closure, downward and upward flatness",
        run: closure_preservation,
    },
    Experiment {
        id: "translation-F-case",
        citation: "Theorem (FO(inc, F) into GFP+): the F case of the translation, first-order bodies",
        run: translation_f_case,
    },
    Experiment {
        id: "disconnect",
        citation: "Proposition (FO(inc1, F)): E y. F (E x. (x != y & A z. (E(x, z) => inc(z; x)))) iff the graph is disconnected",
        run: disconnect,
    },
    Experiment {
        id: "separating",
        citation: "Proposition (FO(anon1, F)): the separating sentence is true in A_n and false in B_n",
        run: separating,
    },
    Experiment {
        id: "magma-lemma",
        citation: "Lemma (magma): on closed teams, phi and its flattening agree for phi in FO(anon1)",
        run: magma_lemma,
    },
    Experiment {
        id: "existential-dep",
        citation: "Proposition (existential dependence logic): F phi = phi^f for existential phi in FO(dep)",
        run: existential_dep,
    },
    Experiment {
        id: "strategy-agreement",
        citation: "Evaluator invariant: the optimized strategy agrees with the naive one",
        run: strategy_agreement,
    },
];

pub fn catalog() -> &'static [Experiment] {
    CATALOG
}

pub fn find(id: &str) -> Option<&'static Experiment> {
    CATALOG.iter().find(|e| e.id == id)
}

/// Runs every experiment, or just `select`, in catalog order.
pub fn run_selected(select: Option<&str>, settings: &Settings) -> Result<Vec<Outcome>> {
    let chosen: Vec<&Experiment> = match select {
        None | Some("all") => CATALOG.iter().collect(),
        Some(id) => vec![find(id).ok_or_else(|| Error::Invalid(format!("unknown experiment {id}")))?],
    };
    chosen.into_iter().map(|e| e.run(settings)).collect()
}

fn p(text: &str) -> Formula {
    parse(text).expect("built-in formula parses")
}

fn config(settings: &Settings, per_size: usize) -> UniverseConfig {
    UniverseConfig {
        max_domain: settings.max_domain,
        structures_per_size: per_size,
        seed: settings.seed,
        team_size_cap: None,
        strategy: settings.strategy,
        budget: settings.budget.clone(),
    }
}

/// Universe over `x, y` for formulas in `kind`.
fn pool_universe(settings: &Settings, kind: PoolKind) -> Result<Universe> {
    Universe::generate(&config(settings, settings.structures_per_size), &kind.signature(), &POOL_VARS)
}

fn witness_text(w: &Witness) -> String {
    let mut parts = Vec::new();
    if !w.structure.is_empty() {
        parts.push(format!("in {}", w.structure));
    }
    for (name, t) in &w.teams {
        parts.push(format!("{name} = {t}"));
    }
    if !w.note.is_empty() {
        parts.push(w.note.clone());
    }
    parts.join(", ")
}

fn failure(what: impl fmt::Display, r: &PropertyReport) -> (Status, String) {
    let w = r.witness.as_ref().map(witness_text).unwrap_or_default();
    (Status::Fail, format!("{what}: {} ({w})", r.verdict))
}

/// Sums `checked` across reports, stopping at the first failure.
struct Tally {
    checked: usize,
    formulas: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { checked: 0, formulas: 0 }
    }

    fn add(&mut self, r: &PropertyReport) -> bool {
        self.checked += r.checked;
        r.holds()
    }
}

fn atoms_flatten(s: &Settings) -> Result<(Status, String)> {
    let atoms = ["dep(x; y)", "dep(; x)", "anon(x; y)", "anon(; x)", "inc(x; y)", "inc(x, y; y, x)", "ind(; x; y)", "ind(x; y; y)"];
    let mut tally = Tally::new();
    for text in atoms {
        let phi = p(text);
        let u = Universe::for_formulas(&config(s, 1), &[&phi])?;
        let candidate = flatten(&phi, s.exclusion)?;
        if candidate != Formula::Top {
            return Ok((Status::Fail, format!("{text} flattens to {candidate}, not TOP")));
        }
        let r = verify_flattening_axioms(&phi, &candidate, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("axioms for {text}"), &r));
        }
    }
    Ok((
        Status::Pass,
        format!("{} atoms flatten to TOP; entailment and flatness hold on {} instances (|M| <= {})", atoms.len(), tally.checked, s.max_domain),
    ))
}

fn exclusion_flattening(s: &Settings) -> Result<(Status, String)> {
    let phi = p("exc(x; y)");
    let u = Universe::for_formulas(&config(s, 1), &[&phi])?;
    let mut tally = Tally::new();
    for cand in [p("TOP"), p("x != y")] {
        let r = verify_flattening_axioms(&phi, &cand, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("candidate {cand}"), &r));
        }
    }
    let distinct = analysis::equivalent(&p("TOP"), &p("x != y"), &u)?;
    if distinct.holds() {
        return Ok((Status::Fail, "TOP and x != y coincide on the universe".into()));
    }
    Ok((
        Status::Pass,
        format!(
            "TOP and x != y both satisfy the axioms on {} instances and are inequivalent; mode {} selected",
            tally.checked, s.exclusion
        ),
    ))
}

fn f_properties(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::General, s.pool_size, s.seed);
    let u = pool_universe(s, PoolKind::General)?;
    let mut tally = Tally::new();
    let mut flat_count = 0;
    for (i, phi) in phis.iter().enumerate() {
        let f = Formula::flat(phi.clone());
        let r = analysis::is_flat(&f, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("F phi not flat for {phi}"), &r));
        }
        let r = analysis::equivalent(&Formula::flat(f.clone()), &f, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("F F phi differs from F phi for {phi}"), &r));
        }
        let psi = &phis[(i + 1) % phis.len()];
        let lhs = Formula::flat(Formula::and(phi.clone(), psi.clone()));
        let rhs = Formula::and(f.clone(), Formula::flat(psi.clone()));
        let r = analysis::equivalent(&lhs, &rhs, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("F distributes badly over {phi} & {psi}"), &r));
        }
        let flat = analysis::is_flat(phi, &u)?;
        let fixed = analysis::equivalent(phi, &f, &u)?;
        tally.checked += flat.checked + fixed.checked;
        if flat.holds() != fixed.holds() {
            return Ok((Status::Fail, format!("{phi}: is_flat {} but F phi = phi {}", flat.holds(), fixed.holds())));
        }
        flat_count += usize::from(flat.holds());
        tally.formulas += 1;
    }
    Ok((
        Status::Pass,
        format!(
            "{} pool formulas ({flat_count} flat), four properties each, {} instances; {}",
            tally.formulas,
            tally.checked,
            u.describe()
        ),
    ))
}

fn remark_anon_sentence(s: &Settings) -> Result<(Status, String)> {
    let m = Structure::with_size(1, "a")?;
    let phi = p("A x. E y. anon(x; y)");
    let flat = flatten(&phi, s.exclusion)?;
    let phi_v = eval_sentence(&m, &phi, s.strategy, &s.budget)?;
    let flat_v = eval_sentence(&m, &flat, s.strategy, &s.budget)?;
    let f_v = eval_sentence(&m, &Formula::flat(phi.clone()), s.strategy, &s.budget)?;
    let details = format!("on M = {{a}}: phi {phi_v}, phi^f = {flat} {flat_v}, F phi {f_v}");
    let ok = !phi_v && flat_v && !f_v;
    Ok((if ok { Status::Pass } else { Status::Fail }, details))
}

fn atoms_f(s: &Settings) -> Result<(Status, String)> {
    let pairs = [
        ("F dep(x; y)", "TOP"),
        ("F anon(x; y)", "BOT"),
        ("F inc(x; y)", "x = y"),
        ("F exc(x; y)", "x != y"),
        ("F ind(; x; y)", "TOP"),
        ("F R(x, y)", "R(x, y)"),
        ("F !R(x, y)", "!R(x, y)"),
        ("F x = y", "x = y"),
    ];
    let mut tally = Tally::new();
    for (a, b) in pairs {
        let (fa, fb) = (p(a), p(b));
        let u = Universe::for_formulas(&config(s, 64), &[&fa, &fb])?;
        let r = analysis::equivalent(&fa, &fb, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("{a} vs {b}"), &r));
        }
    }
    Ok((Status::Pass, format!("{} equivalences hold on {} instances", pairs.len(), tally.checked)))
}

fn f_or_distribution(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::General, s.pool_size, s.seed);
    let u = pool_universe(s, PoolKind::General)?;
    let mut etp = Vec::new();
    for phi in &phis {
        if analysis::has_empty_team_property(phi, &u)?.holds() {
            etp.push(phi);
        }
    }
    let mut tally = Tally::new();
    for (i, phi) in etp.iter().enumerate() {
        let psi = etp[(i + 1) % etp.len()];
        let lhs = Formula::flat(Formula::or((*phi).clone(), psi.clone()));
        let rhs = Formula::or(Formula::flat((*phi).clone()), Formula::flat(psi.clone()));
        let r = analysis::equivalent(&lhs, &rhs, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("{phi} | {psi}"), &r));
        }
        tally.formulas += 1;
    }
    Ok((
        Status::Pass,
        format!("{} pairs with the empty team property, {} instances", tally.formulas, tally.checked),
    ))
}

fn ne_distribution(s: &Settings) -> Result<(Status, String)> {
    let lhs = p("F (NE | NE)");
    let rhs = p("F NE | F NE");
    let u = Universe::generate(&config(s, 1), &Default::default(), &POOL_VARS)?;
    let mut per_strategy = Vec::new();
    for strategy in [Strategy::Naive, Strategy::optimized()] {
        let mut profile = Vec::new();
        for (_, m) in u.structures() {
            let mut a = Checker::new(m, &lhs, &POOL_VARS, strategy, s.budget.clone())?;
            let mut b = Checker::new(m, &rhs, &POOL_VARS, strategy, s.budget.clone())?;
            for x in enumerate_teams(m, &POOL_VARS, None)? {
                profile.push((a.eval(&x)?, b.eval(&x)?));
            }
        }
        per_strategy.push(profile);
    }
    if per_strategy[0] != per_strategy[1] {
        return Ok((Status::Fail, "verdicts differ between strategies".into()));
    }
    let profile = &per_strategy[0];
    let differ = profile.iter().filter(|(a, b)| a != b).count();
    let lhs_true = profile.iter().filter(|(a, _)| *a).count();
    let rhs_true = profile.iter().filter(|(_, b)| *b).count();
    let relation = if differ == 0 {
        "equivalent: the claimed counterexample does not materialize under lax semantics".to_string()
    } else {
        format!("not equivalent: differ on {differ} teams")
    };
    Ok((
        Status::Pass,
        format!(
            "measured over {} teams (|M| <= {}), stable across strategies; F(NE | NE) true on {lhs_true}, F NE | F NE true on {rhs_true}; {relation}",
            profile.len(),
            s.max_domain
        ),
    ))
}

/// Counts for one reading of the quantifier propositions: how many
/// formulas met the hypothesis and the first that broke the entailment.
#[derive(Default)]
struct Reading {
    premises: usize,
    broken: usize,
    first: Option<String>,
}

impl Reading {
    fn record(&mut self, premise: bool, r: &PropertyReport, what: impl FnOnce() -> String) {
        if !premise {
            return;
        }
        self.premises += 1;
        if !r.holds() {
            self.broken += 1;
            if self.first.is_none() {
                let w = r.witness.as_ref().map(witness_text).unwrap_or_default();
                self.first = Some(format!("{} ({w})", what()));
            }
        }
    }

    fn summary(&self, name: &str) -> String {
        let mut out = format!("{name}: {} premises, {} violations", self.premises, self.broken);
        if let Some(f) = &self.first {
            out.push_str(&format!(", first: {f}"));
        }
        out
    }
}

const QUANTIFIER_BRANCHES: u64 = 5_000;

fn quantifier_commutation(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::Flattenable, s.pool_size / 4, s.seed);
    let mut capped = config(s, s.structures_per_size);
    capped.budget.max_branches = capped.budget.max_branches.min(QUANTIFIER_BRANCHES);
    let u = Universe::generate(&capped, &PoolKind::Flattenable.signature(), &POOL_VARS)?;
    let mut skipped = 0;
    // Hypothesis on the quantified formula as stated, and on the body as
    // the proofs use it.
    let (mut stated, mut body) = (Reading::default(), Reading::default());
    for phi in &phis {
        let df_body = analysis::is_downwards_flat(phi, &u)?.holds();
        let uf_body = analysis::is_upwards_flat(phi, &u)?.holds();
        for v in ["x", "z"] {
            for exists in [true, false] {
                let q = |b: Formula| if exists { Formula::exists(v, b) } else { Formula::forall(v, b) };
                let whole = q(phi.clone());
                let f_whole = Formula::flat(whole.clone());
                let q_f = q(Formula::flat(phi.clone()));
                let checks = (|| -> Result<_> {
                    Ok((
                        analysis::entails(&f_whole, &q_f, &u)?,
                        analysis::entails(&q_f, &f_whole, &u)?,
                        analysis::is_downwards_flat(&whole, &u)?.holds(),
                        analysis::is_upwards_flat(&whole, &u)?.holds(),
                    ))
                })();
                let (down, up, df, uf) = match checks {
                    Err(e) if e.is_budget() => {
                        skipped += 1;
                        continue;
                    }
                    other => other?,
                };
                stated.record(df, &down, || format!("{whole} is DF, F does not commute downwards"));
                stated.record(uf, &up, || format!("{whole} is UF, F does not commute upwards"));
                body.record(df_body, &down, || format!("body of {whole} is DF, F does not commute downwards"));
                body.record(uf_body, &up, || format!("body of {whole} is UF, F does not commute upwards"));
            }
        }
    }
    let status = if stated.broken == 0 { Status::Pass } else { Status::Fail };
    Ok((
        status,
        format!(
            "{}; {}; {skipped} candidates over {} branches skipped",
            stated.summary("flatness of Q x phi"),
            body.summary("flatness of phi"),
            QUANTIFIER_BRANCHES
        ),
    ))
}

fn flatness_lattice(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::General, s.pool_size, s.seed);
    let u = pool_universe(s, PoolKind::General)?;
    let mut counts = [0usize; 5];
    for phi in &phis {
        let c = analysis::closure_profile(phi, &u)?;
        if let Some(rule) = c.violated_implication() {
            return Ok((Status::Fail, format!("{phi} violates {rule}: {c:?}")));
        }
        for (slot, v) in counts.iter_mut().zip([c.flat, c.downwards_closed, c.union_closed, c.downwards_flat, c.upwards_flat]) {
            *slot += usize::from(v);
        }
    }
    Ok((
        Status::Pass,
        format!(
            "{} formulas: flat {}, DC {}, UC {}, DF {}, UF {}; all implications hold",
            phis.len(),
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            counts[4]
        ),
    ))
}

fn closure_preservation(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::General, s.pool_size, s.seed);
    let u = pool_universe(s, PoolKind::General)?;
    let mut premises = 0;
    for phi in &phis {
        let c = analysis::closure_profile(phi, &u)?;
        let f = analysis::closure_profile(&Formula::flat(phi.clone()), &u)?;
        for (name, before, after) in [
            ("downward closure", c.downwards_closed, f.downwards_closed),
            ("union closure", c.union_closed, f.union_closed),
            ("downward flatness", c.downwards_flat, f.downwards_flat),
            ("upward flatness", c.upwards_flat, f.upwards_flat),
        ] {
            if before {
                premises += 1;
                if !after {
                    return Ok((Status::Fail, format!("{phi} has {name} but F phi does not")));
                }
            }
        }
    }
    Ok((Status::Pass, format!("{} formulas, {premises} closure premises, all preserved", phis.len())))
}

fn translation_f_case(s: &Settings) -> Result<(Status, String)> {
    let bodies = pool::generate(PoolKind::FirstOrder, 24, s.seed);
    let u = pool_universe(s, PoolKind::FirstOrder)?;
    let mut checked = 0;
    for psi in &bodies {
        for (name, m) in u.structures() {
            for x in enumerate_teams(m, &POOL_VARS, None)? {
                let r = check_translation_biconditional(m, &x, psi, psi, "S", &POOL_VARS, s.strategy, &s.budget)?;
                checked += 1;
                if !r.holds() {
                    let mut w = r.witness.clone().unwrap_or_else(|| Witness {
                        structure: String::new(),
                        teams: Vec::new(),
                        note: String::new(),
                    });
                    w.structure = name.clone();
                    return Ok((Status::Fail, format!("{psi}: {}", witness_text(&w))));
                }
            }
        }
    }
    Ok((Status::Pass, format!("{} first-order bodies, {checked} teams; {}", bodies.len(), u.describe())))
}

fn sentence_truth(m: &Structure, phi: &Formula, s: &Settings) -> Result<bool> {
    eval_sentence(m, phi, s.strategy, &s.budget)
}

fn disconnect(s: &Settings) -> Result<(Status, String)> {
    let phi = p(DISCONNECT_SENTENCE);
    for n in 0..=2 {
        if !sentence_truth(&gen_a(n)?, &phi, s)? {
            return Ok((Status::Fail, format!("false on A_{n}")));
        }
        if sentence_truth(&gen_b(n)?, &phi, s)? {
            return Ok((Status::Fail, format!("true on B_{n}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut disconnected = 0;
    for i in 0..20 {
        let n = rng.random_range(1..=6);
        let prob = rng.random_range(0.15..0.6);
        let g = gen_random_graph(n, prob, &mut rng)?;
        let oracle = !is_connected(&g, "E")?;
        disconnected += usize::from(oracle);
        if sentence_truth(&g, &phi, s)? != oracle {
            return Ok((
                Status::Fail,
                format!("random graph {i} ({n} vertices): sentence disagrees with BFS (disconnected = {oracle}); model: {}", g.to_model_text().replace('\n', "; ")),
            ));
        }
    }
    Ok((
        Status::Pass,
        format!("true on A_0..A_2, false on B_0..B_2 (symmetric edges); agrees with BFS on 20 random graphs ({disconnected} disconnected)"),
    ))
}

fn separating(s: &Settings) -> Result<(Status, String)> {
    let phi = p(SEPARATING_SENTENCE);
    let a = sentence_truth(&gen_a(1)?, &phi, s)?;
    let b = sentence_truth(&gen_b(1)?, &phi, s)?;
    let status = if a && !b { Status::Pass } else { Status::Fail };
    Ok((status, format!("A_1 {a}, B_1 {b} (symmetric edges)")))
}

fn magma_lemma(s: &Settings) -> Result<(Status, String)> {
    let m = Structure::with_size(3, "e")?;
    let maps = automorphisms(&m, 8)?;
    let phis = pool::generate(PoolKind::AnonUnary, s.pool_size.clamp(50, 60), s.seed);
    let mut refuted = Vec::new();
    let mut checked = 0;
    for phi in &phis {
        let r = analysis::magma_lemma_check(&m, &maps, std::slice::from_ref(phi), s.strategy, &s.budget)?;
        if r.verdict == crate::report::Verdict::Inapplicable {
            return Ok((Status::Inapplicable, r.witness.map(|w| w.note).unwrap_or_default()));
        }
        checked += r.checked;
        if !r.holds() {
            refuted.push((phi, r));
        }
    }
    if refuted.is_empty() {
        return Ok((
            Status::Pass,
            format!("{} FO(anon1) formulas agree with their flattenings on {checked} closed teams (|M| = 3, {} automorphisms)", phis.len(), maps.len()),
        ));
    }
    let (phi, r) = &refuted[0];
    let w = r.witness.as_ref().map(witness_text).unwrap_or_default();
    Ok((
        Status::Fail,
        format!(
            "{} of {} formulas disagree with their flattening on some closed team (|M| = 3, {} automorphisms); first: {phi} at {w}; rows with equal values for both anonymity variables admit no map fixing one and moving the other",
            refuted.len(),
            phis.len(),
            maps.len()
        ),
    ))
}

fn existential_dep(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::ExistentialDep, 50, s.seed);
    let u = pool_universe(s, PoolKind::ExistentialDep)?;
    let mut tally = Tally::new();
    for phi in &phis {
        let r = analysis::equivalent(&Formula::flat(phi.clone()), &flatten(phi, s.exclusion)?, &u)?;
        if !tally.add(&r) {
            return Ok(failure(format!("F phi vs phi^f for {phi}"), &r));
        }
    }
    Ok((Status::Pass, format!("{} existential FO(dep) formulas, {} instances", phis.len(), tally.checked)))
}

fn strategy_agreement(s: &Settings) -> Result<(Status, String)> {
    let phis = pool::generate(PoolKind::General, s.pool_size, s.seed);
    let wide = config(s, s.structures_per_size * 4);
    let u = Universe::generate(&wide, &PoolKind::General.signature(), &POOL_VARS)?;
    let optimized = match s.strategy {
        Strategy::Naive => Strategy::optimized(),
        other => other,
    };
    let mut checked = 0;
    for (name, m) in u.structures() {
        let teams: Vec<_> = enumerate_teams(m, &POOL_VARS, None)?.collect();
        for phi in &phis {
            let mut naive = Checker::new(m, phi, &POOL_VARS, Strategy::Naive, s.budget.clone())?;
            let mut opt = Checker::new(m, phi, &POOL_VARS, optimized, s.budget.clone())?;
            for x in &teams {
                let (a, b) = (naive.eval(x)?, opt.eval(x)?);
                checked += 1;
                if a != b {
                    return Ok((Status::Fail, format!("{phi} in {name} at X = {x}: naive {a}, {optimized} {b}")));
                }
            }
        }
    }
    Ok((
        Status::Pass,
        format!("{} formulas, {checked} evaluations agree; {}", phis.len(), u.describe()),
    ))
}
