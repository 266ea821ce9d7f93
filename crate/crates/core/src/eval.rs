//! Exact evaluation under lax team semantics.
//!
//! A formula is compiled against a structure and an ordered variable
//! domain into a node arena whose terms are column indices. Teams inside
//! the evaluator are flat, lexicographically sorted row buffers, which
//! makes them usable as memo keys.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{BudgetKind, Error, Result};
use crate::formula::{desugar_hook, Formula, Term};
use crate::structure::{Elem, Relation, Structure};
use crate::team::{Assignment, Team};

/// Individually toggleable rewrites used by [`Strategy::Optimized`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Optimizations {
    /// Disjunctions with a syntactically flat side avoid the full cover
    /// search; first-order subformulas are evaluated row by row.
    pub flat_or: bool,
    /// `a => psi` is evaluated as `psi` on the rows satisfying `a`.
    /// When off, hooks are desugared before evaluation.
    pub hook_split: bool,
    /// Existentials with a flat body pick one witness per row; flat
    /// conjuncts of other bodies prune the candidate values per row.
    pub flat_exists: bool,
    /// Cache results per (node, team), kept across calls on one checker.
    pub memo: bool,
}

impl Optimizations {
    pub const ALL: Optimizations = Optimizations {
        flat_or: true,
        hook_split: true,
        flat_exists: true,
        memo: true,
    };
    pub const NONE: Optimizations = Optimizations {
        flat_or: false,
        hook_split: false,
        flat_exists: false,
        memo: false,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Direct transcription of the semantic clauses.
    Naive,
    Optimized(Optimizations),
}

impl Strategy {
    pub fn optimized() -> Strategy {
        Strategy::Optimized(Optimizations::ALL)
    }

    pub fn optimizations(&self) -> Optimizations {
        match self {
            Strategy::Naive => Optimizations::NONE,
            Strategy::Optimized(o) => *o,
        }
    }
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::optimized()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Naive => f.write_str("naive"),
            Strategy::Optimized(o) if *o == Optimizations::ALL => f.write_str("optimized"),
            Strategy::Optimized(o) => write!(
                f,
                "optimized(flat_or={}, hook_split={}, flat_exists={}, memo={})",
                o.flat_or, o.hook_split, o.flat_exists, o.memo
            ),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "optimized" => Ok(Strategy::optimized()),
            _ => Err(Error::Invalid(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Limits on a single evaluation. Running out is reported as
/// [`Error::BudgetExceeded`], never as `false`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalBudget {
    /// Largest team the evaluator may build.
    pub max_rows: usize,
    /// Candidate covers and supplements examined per call.
    pub max_branches: u64,
    pub timeout: Option<Duration>,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            max_rows: 1 << 20,
            max_branches: 1 << 34,
            timeout: None,
        }
    }
}

impl EvalBudget {
    fn validate(&self) -> Result<()> {
        if self.max_rows == 0 || self.max_branches == 0 || self.timeout == Some(Duration::ZERO) {
            return Err(Error::Invalid("budget limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub branches: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl fmt::Display for EvalStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "branches={} cache_hits={} cache_misses={}",
            self.branches, self.cache_hits, self.cache_misses
        )
    }
}

/// Teams with more cells than this are not memoized.
const MEMO_MAX_CELLS: usize = 32;
/// The memo is cleared when it grows past this many entries.
const MEMO_MAX_ENTRIES: usize = 1 << 18;

#[derive(Clone, Copy, Debug)]
enum Arg {
    Col(usize),
    Elem(Elem),
}

/// A quantified variable: its column, and whether the column is new.
#[derive(Clone, Copy, Debug)]
struct Bind {
    col: usize,
    fresh: bool,
}

#[derive(Debug)]
enum Fo {
    Top,
    Bot,
    Rel {
        rel: usize,
        args: Vec<Arg>,
        positive: bool,
    },
    Eq(Arg, Arg, bool),
    And(Box<Fo>, Box<Fo>),
    Or(Box<Fo>, Box<Fo>),
    Exists(Bind, Box<Fo>),
    Forall(Bind, Box<Fo>),
}

#[derive(Debug)]
enum Op {
    Lit(Fo),
    Ne,
    Dep(Vec<Arg>, Arg),
    Anon(Vec<Arg>, Arg),
    Inc(Vec<Arg>, Vec<Arg>),
    Exc(Vec<Arg>, Vec<Arg>),
    Ind(Vec<Arg>, Vec<Arg>, Vec<Arg>),
    And(usize, usize),
    Or(usize, usize),
    Hook(Fo, usize),
    BoolOr(usize, usize),
    BoolNeg(usize),
    Exists(Bind, usize),
    Forall(Bind, usize),
    Flat(usize),
    SomeRow(usize),
}

#[derive(Debug)]
struct Node {
    op: Op,
    /// Syntactically flat: truth on a team is truth on all its singletons.
    flat: bool,
    /// Row-wise version of a first-order subformula.
    fo: Option<Fo>,
    /// Flat conjuncts of an existential's body.
    prune: Vec<usize>,
}

/// A team inside the evaluator: `n` rows of width `w`, sorted, no repeats.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Rows {
    w: usize,
    n: usize,
    data: Vec<Elem>,
}

impl Rows {
    fn sorted(w: usize, n: usize, data: Vec<Elem>) -> Rows {
        Rows { w, n, data }
    }

    fn canonical(w: usize, n: usize, data: Vec<Elem>) -> Rows {
        if w == 0 {
            return Rows {
                w,
                n: n.min(1),
                data,
            };
        }
        let mut rows: Vec<&[Elem]> = data.chunks(w).collect();
        rows.sort_unstable();
        rows.dedup();
        let n = rows.len();
        let data = rows.concat();
        Rows { w, n, data }
    }

    fn singleton(row: &[Elem]) -> Rows {
        Rows {
            w: row.len(),
            n: 1,
            data: row.to_vec(),
        }
    }

    fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.w..(i + 1) * self.w]
    }

    fn iter(&self) -> impl Iterator<Item = &[Elem]> {
        (0..self.n).map(move |i| self.row(i))
    }

    fn select(&self, mask: u64) -> Rows {
        let mut data = Vec::with_capacity(mask.count_ones() as usize * self.w);
        let mut n = 0;
        for i in 0..self.n {
            if mask >> i & 1 == 1 {
                data.extend_from_slice(self.row(i));
                n += 1;
            }
        }
        Rows::sorted(self.w, n, data)
    }

    fn filter(&self, mut keep: impl FnMut(&[Elem]) -> bool) -> Rows {
        let mut data = Vec::new();
        let mut n = 0;
        for r in self.iter() {
            if keep(r) {
                data.extend_from_slice(r);
                n += 1;
            }
        }
        Rows::sorted(self.w, n, data)
    }
}

fn value(a: Arg, row: &[Elem]) -> Elem {
    match a {
        Arg::Col(c) => row[c],
        Arg::Elem(e) => e,
    }
}

struct Compiler<'s> {
    s: &'s Structure,
    rels: Vec<&'s Relation>,
    rel_index: HashMap<String, usize>,
    nodes: Vec<Node>,
    row_wise_fo: bool,
}

impl<'s> Compiler<'s> {
    fn new(s: &'s Structure, row_wise_fo: bool) -> Self {
        Compiler {
            s,
            rels: Vec::new(),
            rel_index: HashMap::new(),
            nodes: Vec::new(),
            row_wise_fo,
        }
    }

    fn arg(&self, t: &Term, scope: &[String]) -> Result<Arg> {
        match t {
            Term::Var(v) => scope
                .iter()
                .position(|x| x == v)
                .map(Arg::Col)
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
            Term::Const(c) => self
                .s
                .constant(c)
                .map(Arg::Elem)
                .ok_or_else(|| Error::UnknownConstant(c.clone())),
        }
    }

    fn args(&self, ts: &[Term], scope: &[String]) -> Result<Vec<Arg>> {
        ts.iter().map(|t| self.arg(t, scope)).collect()
    }

    /// Arguments of a team atom, whose tuple values are packed into `u64`.
    fn key_args(&self, ts: &[Term], scope: &[String]) -> Result<Vec<Arg>> {
        let fits = (self.s.size() as u128)
            .checked_pow(ts.len() as u32)
            .is_some_and(|c| c <= u64::MAX as u128);
        if !fits {
            return Err(Error::TooLarge(format!("atom tuple of length {}", ts.len())));
        }
        self.args(ts, scope)
    }

    fn rel(&mut self, name: &str, arity: usize) -> Result<usize> {
        if let Some(&i) = self.rel_index.get(name) {
            return Ok(i);
        }
        let r = self
            .s
            .relation(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
        if r.arity() != arity {
            return Err(Error::ArityMismatch {
                relation: name.to_string(),
                expected: r.arity(),
                found: arity,
            });
        }
        self.rels.push(r);
        self.rel_index.insert(name.to_string(), self.rels.len() - 1);
        Ok(self.rels.len() - 1)
    }

    fn bind(v: &str, scope: &mut Vec<String>) -> (Bind, bool) {
        match scope.iter().position(|x| x == v) {
            Some(col) => (Bind { col, fresh: false }, false),
            None => {
                scope.push(v.to_string());
                (
                    Bind {
                        col: scope.len() - 1,
                        fresh: true,
                    },
                    true,
                )
            }
        }
    }

    fn fo(&mut self, phi: &Formula, scope: &mut Vec<String>) -> Result<Fo> {
        Ok(match phi {
            Formula::Top => Fo::Top,
            Formula::Bot => Fo::Bot,
            Formula::Rel(r, ts) | Formula::NegRel(r, ts) => Fo::Rel {
                rel: self.rel(r, ts.len())?,
                args: self.args(ts, scope)?,
                positive: matches!(phi, Formula::Rel(..)),
            },
            Formula::Equal(a, b) => Fo::Eq(self.arg(a, scope)?, self.arg(b, scope)?, true),
            Formula::NotEqual(a, b) => Fo::Eq(self.arg(a, scope)?, self.arg(b, scope)?, false),
            Formula::And(a, b) => Fo::And(Box::new(self.fo(a, scope)?), Box::new(self.fo(b, scope)?)),
            Formula::Or(a, b) => Fo::Or(Box::new(self.fo(a, scope)?), Box::new(self.fo(b, scope)?)),
            Formula::Hook(..) => self.fo(&desugar_hook(phi), scope)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let (bind, pushed) = Self::bind(v, scope);
                let inner = self.fo(body, scope);
                if pushed {
                    scope.pop();
                }
                let inner = Box::new(inner?);
                if matches!(phi, Formula::Exists(..)) {
                    Fo::Exists(bind, inner)
                } else {
                    Fo::Forall(bind, inner)
                }
            }
            other => return Err(Error::NotFirstOrder(other.to_string())),
        })
    }

    fn node(&mut self, phi: &Formula, scope: &mut Vec<String>) -> Result<usize> {
        let op = match phi {
            f if f.is_literal() => Op::Lit(self.fo(f, scope)?),
            Formula::NonEmpty => Op::Ne,
            Formula::Dep(xs, y) => Op::Dep(self.key_args(xs, scope)?, self.arg(y, scope)?),
            Formula::Anon(xs, y) => Op::Anon(self.key_args(xs, scope)?, self.arg(y, scope)?),
            Formula::Inc(a, b) => Op::Inc(self.key_args(a, scope)?, self.key_args(b, scope)?),
            Formula::Exc(a, b) => Op::Exc(self.key_args(a, scope)?, self.key_args(b, scope)?),
            Formula::Ind(c, a, b) => Op::Ind(
                self.key_args(c, scope)?,
                self.key_args(a, scope)?,
                self.key_args(b, scope)?,
            ),
            Formula::And(a, b) => Op::And(self.node(a, scope)?, self.node(b, scope)?),
            Formula::Or(a, b) => Op::Or(self.node(a, scope)?, self.node(b, scope)?),
            Formula::BoolOr(a, b) => Op::BoolOr(self.node(a, scope)?, self.node(b, scope)?),
            Formula::Hook(g, b) => Op::Hook(self.fo(g, scope)?, self.node(b, scope)?),
            Formula::BoolNeg(a) => Op::BoolNeg(self.node(a, scope)?),
            Formula::Flat(a) => Op::Flat(self.node(a, scope)?),
            Formula::SomeRow(a) => Op::SomeRow(self.node(a, scope)?),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let (bind, pushed) = Self::bind(v, scope);
                let inner = self.node(body, scope);
                if pushed {
                    scope.pop();
                }
                if matches!(phi, Formula::Exists(..)) {
                    Op::Exists(bind, inner?)
                } else {
                    Op::Forall(bind, inner?)
                }
            }
            _ => unreachable!("every formula variant is handled above"),
        };
        let flat = match &op {
            Op::Lit(_) | Op::Flat(_) => true,
            Op::And(a, b) | Op::Or(a, b) => self.nodes[*a].flat && self.nodes[*b].flat,
            Op::Hook(_, b) | Op::Exists(_, b) | Op::Forall(_, b) => self.nodes[*b].flat,
            _ => false,
        };
        let prune = match &op {
            Op::Exists(_, b) => self.flat_conjuncts(*b),
            _ => Vec::new(),
        };
        let fo = if self.row_wise_fo && !phi.is_literal() && phi.is_first_order() {
            Some(self.fo(phi, scope)?)
        } else {
            None
        };
        self.nodes.push(Node {
            op,
            flat,
            fo,
            prune,
        });
        Ok(self.nodes.len() - 1)
    }

    fn flat_conjuncts(&self, id: usize) -> Vec<usize> {
        match self.nodes[id].op {
            Op::And(a, b) => {
                let mut out = self.flat_conjuncts(a);
                out.extend(self.flat_conjuncts(b));
                out
            }
            _ if self.nodes[id].flat => vec![id],
            _ => Vec::new(),
        }
    }
}

struct Program<'s> {
    rels: Vec<&'s Relation>,
    nodes: Vec<Node>,
    root: usize,
    opts: Optimizations,
    domain: usize,
}

struct State {
    memo: Vec<HashMap<Rows, bool>>,
    memo_entries: usize,
    stats: EvalStats,
    branches: u64,
    deadline: Option<Instant>,
    budget: EvalBudget,
}

impl State {
    fn tick(&mut self) -> Result<()> {
        self.branches += 1;
        self.stats.branches += 1;
        if self.branches > self.budget.max_branches {
            return Err(Error::BudgetExceeded(BudgetKind::Branches));
        }
        if self.branches & 0xfff == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    return Err(Error::BudgetExceeded(BudgetKind::Timeout));
                }
            }
        }
        Ok(())
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows > self.budget.max_rows {
            return Err(Error::BudgetExceeded(BudgetKind::Rows));
        }
        Ok(())
    }
}

impl Program<'_> {
    fn tarski(&self, fo: &Fo, row: &[Elem]) -> bool {
        match fo {
            Fo::Top => true,
            Fo::Bot => false,
            Fo::Rel {
                rel,
                args,
                positive,
            } => self.rels[*rel].contains_by(self.domain, |i| value(args[i], row)) == *positive,
            Fo::Eq(a, b, positive) => (value(*a, row) == value(*b, row)) == *positive,
            Fo::And(a, b) => self.tarski(a, row) && self.tarski(b, row),
            Fo::Or(a, b) => self.tarski(a, row) || self.tarski(b, row),
            Fo::Exists(bind, body) | Fo::Forall(bind, body) => {
                let mut buf = row.to_vec();
                if bind.fresh {
                    buf.push(0);
                }
                let mut each = (0..self.domain as Elem).map(|m| {
                    buf[bind.col] = m;
                    self.tarski(body, &buf)
                });
                if matches!(fo, Fo::Exists(..)) {
                    each.any(|b| b)
                } else {
                    each.all(|b| b)
                }
            }
        }
    }

    fn eval(&self, st: &mut State, id: usize, x: &Rows) -> Result<bool> {
        let node = &self.nodes[id];
        let cache = self.opts.memo
            && !matches!(node.op, Op::Lit(_))
            && x.data.len() <= MEMO_MAX_CELLS;
        if cache {
            if let Some(&v) = st.memo[id].get(x) {
                st.stats.cache_hits += 1;
                return Ok(v);
            }
            st.stats.cache_misses += 1;
        }
        let v = self.eval_node(st, id, x)?;
        if cache {
            if st.memo_entries >= MEMO_MAX_ENTRIES {
                st.memo.iter_mut().for_each(HashMap::clear);
                st.memo_entries = 0;
            }
            st.memo[id].insert(x.clone(), v);
            st.memo_entries += 1;
        }
        Ok(v)
    }

    fn single(&self, st: &mut State, id: usize, row: &[Elem]) -> Result<bool> {
        self.eval(st, id, &Rows::singleton(row))
    }

    fn eval_node(&self, st: &mut State, id: usize, x: &Rows) -> Result<bool> {
        let node = &self.nodes[id];
        if self.opts.flat_or {
            if let Some(fo) = &node.fo {
                return Ok(x.iter().all(|r| self.tarski(fo, r)));
            }
        }
        match &node.op {
            Op::Lit(fo) => Ok(x.iter().all(|r| self.tarski(fo, r))),
            Op::Ne => Ok(x.n > 0),
            Op::Dep(xs, y) => {
                let mut seen = HashMap::new();
                Ok(x.iter().all(|r| {
                    let v = value(*y, r);
                    *seen.entry(self.key(xs, r)).or_insert(v) == v
                }))
            }
            Op::Anon(xs, y) => {
                // Each x-class needs two distinct y-values.
                let mut classes: HashMap<u64, (Elem, bool)> = HashMap::new();
                for r in x.iter() {
                    let v = value(*y, r);
                    let e = classes.entry(self.key(xs, r)).or_insert((v, false));
                    e.1 |= e.0 != v;
                }
                Ok(classes.values().all(|c| c.1))
            }
            Op::Inc(a, b) => {
                let rhs: HashSet<u64> = x.iter().map(|r| self.key(b, r)).collect();
                Ok(x.iter().all(|r| rhs.contains(&self.key(a, r))))
            }
            Op::Exc(a, b) => {
                let rhs: HashSet<u64> = x.iter().map(|r| self.key(b, r)).collect();
                Ok(x.iter().all(|r| !rhs.contains(&self.key(a, r))))
            }
            Op::Ind(c, a, b) => {
                type Class = (HashSet<u64>, HashSet<u64>, HashSet<(u64, u64)>);
                let mut classes: HashMap<u64, Class> = HashMap::new();
                for r in x.iter() {
                    let (ka, kb) = (self.key(a, r), self.key(b, r));
                    let e = classes.entry(self.key(c, r)).or_default();
                    e.0.insert(ka);
                    e.1.insert(kb);
                    e.2.insert((ka, kb));
                }
                Ok(classes
                    .values()
                    .all(|(l, r, pairs)| pairs.len() == l.len() * r.len()))
            }
            Op::And(a, b) => Ok(self.eval(st, *a, x)? && self.eval(st, *b, x)?),
            Op::Or(a, b) => self.eval_or(st, *a, *b, x),
            Op::Hook(g, b) => {
                let guarded = x.filter(|r| self.tarski(g, r));
                self.eval(st, *b, &guarded)
            }
            Op::BoolOr(a, b) => Ok(self.eval(st, *a, x)? || self.eval(st, *b, x)?),
            Op::BoolNeg(a) => Ok(!self.eval(st, *a, x)?),
            Op::Exists(bind, b) => self.eval_exists(st, id, *bind, *b, x),
            Op::Forall(bind, b) => {
                let t = self.templates(x, *bind);
                st.check_rows(t.n * self.domain)?;
                let full = vec![self.full_mask()?; t.n];
                let dup = self.expand(&t, *bind, &full);
                self.eval(st, *b, &dup)
            }
            Op::Flat(b) => {
                for r in x.iter() {
                    if !self.single(st, *b, r)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Op::SomeRow(b) => {
                for r in x.iter() {
                    if self.single(st, *b, r)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn key(&self, args: &[Arg], row: &[Elem]) -> u64 {
        args.iter()
            .fold(0, |acc, &a| acc * self.domain as u64 + value(a, row) as u64)
    }

    fn full_mask(&self) -> Result<u64> {
        if self.domain > 63 {
            return Err(Error::TooLarge(format!(
                "quantifier over a domain of {} elements",
                self.domain
            )));
        }
        Ok((1u64 << self.domain) - 1)
    }

    /// One row per distinct restriction of `x` to the columns other than
    /// the quantified one; the quantified column holds a placeholder.
    fn templates(&self, x: &Rows, bind: Bind) -> Rows {
        if bind.fresh {
            let w = x.w + 1;
            let mut data = Vec::with_capacity(x.n * w);
            for r in x.iter() {
                data.extend_from_slice(r);
                data.push(0);
            }
            Rows::sorted(w, x.n, data)
        } else {
            let mut data = x.data.clone();
            for r in data.chunks_mut(x.w) {
                r[bind.col] = 0;
            }
            Rows::canonical(x.w, x.n, data)
        }
    }

    /// The team holding `t_i[m/v]` for every template `t_i` and every `m`
    /// in `masks[i]`.
    fn expand(&self, t: &Rows, bind: Bind, masks: &[u64]) -> Rows {
        let mut data = Vec::new();
        let mut n = 0;
        for (i, &mask) in masks.iter().enumerate() {
            let mut bits = mask;
            while bits != 0 {
                let m = bits.trailing_zeros();
                bits &= bits - 1;
                let start = data.len();
                data.extend_from_slice(t.row(i));
                data[start + bind.col] = m;
                n += 1;
            }
        }
        if bind.fresh {
            Rows::sorted(t.w, n, data)
        } else {
            Rows::canonical(t.w, n, data)
        }
    }

    fn eval_exists(&self, st: &mut State, id: usize, bind: Bind, body: usize, x: &Rows) -> Result<bool> {
        let t = self.templates(x, bind);
        let full = self.full_mask()?;
        st.check_rows(t.n * self.domain)?;
        let with = |i: usize, m: Elem| {
            let mut r = t.row(i).to_vec();
            r[bind.col] = m;
            r
        };
        if self.opts.flat_exists && self.nodes[body].flat {
            'rows: for i in 0..t.n {
                for m in 0..self.domain as Elem {
                    if self.single(st, body, &with(i, m))? {
                        continue 'rows;
                    }
                }
                return Ok(false);
            }
            return Ok(true);
        }
        let mut allowed = vec![full; t.n];
        if self.opts.flat_exists {
            for (i, mask) in allowed.iter_mut().enumerate() {
                for m in 0..self.domain as Elem {
                    for &c in &self.nodes[id].prune {
                        if !self.single(st, c, &with(i, m))? {
                            *mask &= !(1 << m);
                            break;
                        }
                    }
                }
                if *mask == 0 {
                    return Ok(false);
                }
            }
        }
        // Odometer over non-empty submasks, largest first.
        let mut cur = allowed.clone();
        loop {
            st.tick()?;
            if self.eval(st, body, &self.expand(&t, bind, &cur))? {
                return Ok(true);
            }
            let mut i = 0;
            loop {
                if i == cur.len() {
                    return Ok(false);
                }
                cur[i] = (cur[i] - 1) & allowed[i];
                if cur[i] != 0 {
                    break;
                }
                cur[i] = allowed[i];
                i += 1;
            }
        }
    }

    fn eval_or(&self, st: &mut State, a: usize, b: usize, x: &Rows) -> Result<bool> {
        let flat_a = self.opts.flat_or && self.nodes[a].flat;
        let flat_b = self.opts.flat_or && self.nodes[b].flat;
        if flat_a && flat_b {
            for r in x.iter() {
                if !(self.single(st, a, r)? || self.single(st, b, r)?) {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        if x.n > 63 {
            return Err(Error::BudgetExceeded(BudgetKind::Rows));
        }
        let full = (1u64 << x.n) - 1;
        if flat_a || flat_b {
            // With a flat side, its largest satisfying subteam is the best
            // choice; only the other side needs a search.
            let (f, other) = if flat_a { (a, b) } else { (b, a) };
            let mut fmask = 0u64;
            for (i, r) in x.iter().enumerate() {
                if self.single(st, f, r)? {
                    fmask |= 1 << i;
                }
            }
            let rest = full & !fmask;
            let mut w = fmask;
            loop {
                st.tick()?;
                if self.eval(st, other, &x.select(rest | w))? {
                    return Ok(true);
                }
                if w == 0 {
                    return Ok(false);
                }
                w = (w - 1) & fmask;
            }
        }
        for y in 0..=full {
            st.tick()?;
            if !self.eval(st, a, &x.select(y))? {
                continue;
            }
            let rest = full & !y;
            let mut w = y;
            loop {
                st.tick()?;
                if self.eval(st, b, &x.select(rest | w))? {
                    return Ok(true);
                }
                if w == 0 {
                    break;
                }
                w = (w - 1) & y;
            }
        }
        Ok(false)
    }
}

/// A formula compiled against one structure and variable domain; reusable
/// across many teams. The memo table survives between calls.
pub struct Checker<'s> {
    prog: Program<'s>,
    state: State,
    vars: Vec<String>,
}

impl<'s> Checker<'s> {
    pub fn new<S: AsRef<str>>(
        s: &'s Structure,
        phi: &Formula,
        vars: &[S],
        strategy: Strategy,
        budget: EvalBudget,
    ) -> Result<Self> {
        budget.validate()?;
        let mut vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        vars.sort();
        vars.dedup();
        if let Some(v) = phi.free_variables().into_iter().find(|v| !vars.contains(v)) {
            return Err(Error::UnboundVariable(v));
        }
        let opts = strategy.optimizations();
        let desugared;
        let phi = if opts.hook_split {
            phi
        } else {
            desugared = desugar_hook(phi);
            &desugared
        };
        let mut c = Compiler::new(s, opts.flat_or);
        let root = c.node(phi, &mut vars.clone())?;
        let prog = Program {
            rels: c.rels,
            root,
            opts,
            domain: s.size(),
            nodes: c.nodes,
        };
        let state = State {
            memo: (0..prog.nodes.len()).map(|_| HashMap::new()).collect(),
            memo_entries: 0,
            stats: EvalStats::default(),
            branches: 0,
            deadline: None,
            budget,
        };
        Ok(Checker { prog, state, vars })
    }

    /// The (sorted) variable domain teams must have.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn eval(&mut self, team: &Team) -> Result<bool> {
        if team.vars() != self.vars.as_slice() {
            return Err(Error::InvalidTeam(format!(
                "team over [{}] but the formula was prepared for [{}]",
                team.vars().join(" "),
                self.vars.join(" ")
            )));
        }
        self.eval_rows(team.rows().iter().map(Vec::as_slice))
    }

    /// Evaluates on rows over [`Checker::vars`], given in strictly
    /// increasing lexicographic order.
    pub(crate) fn eval_rows<'r>(&mut self, rows: impl Iterator<Item = &'r [Elem]>) -> Result<bool> {
        let mut data = Vec::new();
        let mut n = 0;
        for r in rows {
            if let Some(&e) = r.iter().find(|&&e| e as usize >= self.prog.domain) {
                return Err(Error::UnknownElement(e.to_string()));
            }
            data.extend_from_slice(r);
            n += 1;
        }
        self.state.check_rows(n)?;
        let x = Rows::sorted(self.vars.len(), n, data);
        self.state.branches = 0;
        self.state.deadline = self.state.budget.timeout.map(|d| Instant::now() + d);
        self.prog.eval(&mut self.state, self.prog.root, &x)
    }

    /// Counters accumulated over every call so far.
    pub fn stats(&self) -> EvalStats {
        self.state.stats
    }
}

/// Truth of `phi` on the team `x` in `s`.
pub fn eval(
    s: &Structure,
    x: &Team,
    phi: &Formula,
    strategy: Strategy,
    budget: &EvalBudget,
) -> Result<bool> {
    eval_with_stats(s, x, phi, strategy, budget).map(|(v, _)| v)
}

pub fn eval_with_stats(
    s: &Structure,
    x: &Team,
    phi: &Formula,
    strategy: Strategy,
    budget: &EvalBudget,
) -> Result<(bool, EvalStats)> {
    let mut c = Checker::new(s, phi, x.vars(), strategy, budget.clone())?;
    let v = c.eval(x)?;
    Ok((v, c.stats()))
}

/// Truth of a sentence, evaluated on `{∅}`.
pub fn eval_sentence(
    s: &Structure,
    phi: &Formula,
    strategy: Strategy,
    budget: &EvalBudget,
) -> Result<bool> {
    let fv = phi.free_variables();
    if !fv.is_empty() {
        let names: Vec<String> = fv.into_iter().collect();
        return Err(Error::NotASentence(names.join(", ")));
    }
    eval(s, &Team::unit(), phi, strategy, budget)
}

/// Classical truth of a first-order formula under one assignment.
pub fn eval_tarski(s: &Structure, a: &Assignment, alpha: &Formula) -> Result<bool> {
    if !alpha.is_first_order() {
        return Err(Error::NotFirstOrder(alpha.to_string()));
    }
    let mut scope: Vec<String> = a.keys().cloned().collect();
    let row: Vec<Elem> = a.values().copied().collect();
    if let Some(&e) = row.iter().find(|&&e| e as usize >= s.size()) {
        return Err(Error::UnknownElement(e.to_string()));
    }
    let mut c = Compiler::new(s, false);
    let fo = c.fo(alpha, &mut scope)?;
    let prog = Program {
        rels: c.rels,
        nodes: Vec::new(),
        root: 0,
        opts: Optimizations::NONE,
        domain: s.size(),
    };
    Ok(prog.tarski(&fo, &row))
}
