//! Assignments, teams, and the team algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::structure::{Elem, Permutation, Structure};

/// A single assignment: variable name to domain element.
pub type Assignment = BTreeMap<String, Elem>;

/// A set of assignments over a common variable domain.
///
/// Variables are kept sorted by name and rows are stored in lexicographic
/// order, so equal teams compare and hash equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Team {
    vars: Vec<String>,
    rows: BTreeSet<Vec<Elem>>,
}

/// Uncapped team enumeration refuses assignment spaces larger than this.
pub const DEFAULT_TEAM_ROW_LIMIT: usize = 12;

/// Capped enumeration refuses to produce more teams than this.
const TEAM_COUNT_LIMIT: u128 = 50_000_000;

impl Team {
    /// Builds a team whose rows list values for `vars` in the given order.
    pub fn new<S: AsRef<str>>(
        vars: &[S],
        rows: impl IntoIterator<Item = Vec<Elem>>,
    ) -> Result<Team> {
        let given: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let mut sorted = given.clone();
        sorted.sort();
        if let Some((a, _)) = sorted.iter().tuple_windows().find(|(a, b)| a == b) {
            return Err(Error::InvalidTeam(format!("variable {a} listed twice")));
        }
        // Column i of the stored row comes from column perm[i] of the input.
        let perm: Vec<usize> = sorted
            .iter()
            .map(|v| given.iter().position(|g| g == v).unwrap())
            .collect();
        let mut out = BTreeSet::new();
        for row in rows {
            if row.len() != given.len() {
                return Err(Error::InvalidTeam(format!(
                    "row of length {} over {} variables",
                    row.len(),
                    given.len()
                )));
            }
            out.insert(perm.iter().map(|&i| row[i]).collect());
        }
        Ok(Team {
            vars: sorted,
            rows: out,
        })
    }

    pub fn empty<S: AsRef<str>>(vars: &[S]) -> Result<Team> {
        Team::new(vars, std::iter::empty())
    }

    /// The team `{∅}` holding only the empty assignment.
    pub fn unit() -> Team {
        Team {
            vars: Vec::new(),
            rows: BTreeSet::from([Vec::new()]),
        }
    }

    pub fn from_assignments<S: AsRef<str>>(vars: &[S], rows: &[Assignment]) -> Result<Team> {
        let mut out = Vec::new();
        for a in rows {
            if a.len() != vars.len() {
                return Err(Error::InvalidTeam("assignment domain differs from team".into()));
            }
            let row = vars
                .iter()
                .map(|v| {
                    a.get(v.as_ref())
                        .copied()
                        .ok_or_else(|| Error::UnboundVariable(v.as_ref().to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(row);
        }
        Team::new(vars, out)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn rows(&self) -> &BTreeSet<Vec<Elem>> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows
            .iter()
            .map(|row| self.vars.iter().cloned().zip(row.iter().copied()).collect())
    }

    /// A team over the same variables with the given rows.
    pub fn with_rows(&self, rows: impl IntoIterator<Item = Vec<Elem>>) -> Team {
        Team {
            vars: self.vars.clone(),
            rows: rows.into_iter().collect(),
        }
    }

    pub fn singletons(&self) -> impl Iterator<Item = Team> + '_ {
        self.rows.iter().map(|r| self.with_rows([r.clone()]))
    }

    pub fn is_subteam_of(&self, other: &Team) -> bool {
        self.vars == other.vars && self.rows.is_subset(&other.rows)
    }

    pub fn union(&self, other: &Team) -> Result<Team> {
        if self.vars != other.vars {
            return Err(Error::InvalidTeam("union of teams over different variables".into()));
        }
        Ok(self.with_rows(self.rows.union(&other.rows).cloned()))
    }

    /// Parses the team file format (`vars: x y`, then `row: a b` lines),
    /// resolving element names in `s`.
    pub fn parse(text: &str, s: &Structure) -> Result<Team> {
        let mut vars: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<Elem>> = Vec::new();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("vars:") {
                if vars.is_some() {
                    return Err(Error::syntax(line_no, "vars declared twice"));
                }
                vars = Some(rest.split_whitespace().map(str::to_string).collect());
            } else if let Some(rest) = line.strip_prefix("row:") {
                let vs = vars
                    .as_ref()
                    .ok_or_else(|| Error::syntax(line_no, "'vars:' must come first"))?;
                let row = rest
                    .split_whitespace()
                    .map(|n| s.element(n))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::syntax(line_no, e.to_string()))?;
                if row.len() != vs.len() {
                    return Err(Error::syntax(
                        line_no,
                        format!("row has {} values for {} variables", row.len(), vs.len()),
                    ));
                }
                if !seen.insert(row.clone()) {
                    return Err(Error::syntax(line_no, "duplicate row"));
                }
                rows.push(row);
            } else {
                return Err(Error::syntax(line_no, format!("unrecognized line {line:?}")));
            }
        }
        let vars = vars.ok_or_else(|| Error::syntax(1, "missing 'vars:' line"))?;
        Team::new(&vars, rows).map_err(|e| Error::syntax(1, e.to_string()))
    }

    pub fn to_text(&self, s: &Structure) -> String {
        let mut out = format!("vars: {}\n", self.vars.join(" "));
        for row in &self.rows {
            let names = row.iter().map(|&e| s.element_name(e)).join(" ");
            out.push_str(&format!("row: {names}\n"));
        }
        out
    }

    /// Like `Display`, but with element names taken from `s`.
    pub fn render(&self, s: &Structure) -> String {
        self.render_with(|e| s.element_name(e).to_string())
    }

    fn render_with(&self, name: impl Fn(Elem) -> String) -> String {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let cells = self
                    .vars
                    .iter()
                    .zip(row)
                    .map(|(v, &e)| format!("{v}={}", name(e)))
                    .join(", ");
                format!("{{{cells}}}")
            })
            .join(", ");
        format!("{{{rows}}}")
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|e| e.to_string()))
    }
}

/// `X[M/v]`: every row extended (or overwritten) with every value for `v`.
pub fn duplicate(x: &Team, v: &str, s: &Structure) -> Team {
    let all: BTreeSet<Elem> = s.elements().collect();
    supplement(x, v, |_| Some(all.clone())).expect("the domain is non-empty")
}

/// `X[H/v]`: each row `r` replaced by `r[m/v]` for every `m` in `h(r)`.
pub fn supplement<H>(x: &Team, v: &str, h: H) -> Result<Team>
where
    H: Fn(&Assignment) -> Option<BTreeSet<Elem>>,
{
    let mut vars = x.vars.clone();
    let col = match x.column(v) {
        Some(c) => c,
        None => {
            vars.push(v.to_string());
            vars.len() - 1
        }
    };
    let mut rows = Vec::new();
    for (row, a) in x.rows.iter().zip(x.assignments()) {
        let values = h(&a).ok_or_else(|| {
            Error::InvalidTeam(format!("supplement undefined on a row of {x}"))
        })?;
        if values.is_empty() {
            return Err(Error::InvalidTeam("supplement maps a row to the empty set".into()));
        }
        for m in values {
            let mut r = row.clone();
            if col == r.len() {
                r.push(m);
            } else {
                r[col] = m;
            }
            rows.push(r);
        }
    }
    Team::new(&vars, rows)
}

/// The relation `{(s(x1), ..., s(xn)) : s in X}`.
pub fn project_relation<S: AsRef<str>>(x: &Team, vars: &[S]) -> Result<BTreeSet<Vec<Elem>>> {
    let cols = vars
        .iter()
        .map(|v| {
            x.column(v.as_ref())
                .ok_or_else(|| Error::UnboundVariable(v.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(x.rows
        .iter()
        .map(|row| cols.iter().map(|&c| row[c]).collect())
        .collect())
}

/// `{f ∘ s : s in X, f in maps}`.
pub fn team_closure(x: &Team, maps: &[Permutation]) -> Team {
    x.with_rows(
        maps.iter()
            .flat_map(|f| x.rows.iter().map(move |row| row.iter().map(|&e| f.apply(e)).collect())),
    )
}

/// Every assignment to `vars` (in the given order) over the domain of `s`,
/// in lexicographic order.
pub fn assignment_space<S: AsRef<str>>(s: &Structure, vars: &[S]) -> Vec<Vec<Elem>> {
    if vars.is_empty() {
        return vec![Vec::new()];
    }
    (0..vars.len())
        .map(|_| s.elements())
        .multi_cartesian_product()
        .collect()
}

/// Every team over `vars` whose rows come from the full assignment space,
/// optionally only those with at most `size_cap` rows. Teams come in
/// order of size, then lexicographically.
pub fn enumerate_teams<S: AsRef<str>>(
    s: &Structure,
    vars: &[S],
    size_cap: Option<usize>,
) -> Result<impl Iterator<Item = Team>> {
    let mut names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
    names.sort();
    names.dedup();
    let space = assignment_space(s, &names);
    let r = space.len();
    let cap = match size_cap {
        None if r > DEFAULT_TEAM_ROW_LIMIT => {
            return Err(Error::TooLarge(format!(
                "{r} possible rows; teams are enumerated uncapped only up to {DEFAULT_TEAM_ROW_LIMIT}"
            )))
        }
        None => r,
        Some(c) => c.min(r),
    };
    let count: u128 = (0..=cap).map(|k| binomial(r as u128, k as u128)).sum();
    if count > TEAM_COUNT_LIMIT {
        return Err(Error::TooLarge(format!("{count} teams to enumerate")));
    }
    Ok((0..=cap)
        .flat_map(move |k| (0..r).combinations(k))
        .map(move |idx| Team {
            vars: names.clone(),
            rows: idx.iter().map(|&i| space[i].clone()).collect(),
        }))
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::automorphisms;

    fn m(n: usize) -> Structure {
        Structure::with_size(n, "e").unwrap()
    }

    #[test]
    fn new_sorts_columns() {
        let t = Team::new(&["y", "x"], [vec![1, 0]]).unwrap();
        assert_eq!(t.vars(), ["x", "y"]);
        assert!(t.rows().contains(&vec![0, 1]));
        assert!(Team::new(&["x", "x"], [vec![0, 0]]).is_err());
        assert!(Team::new(&["x"], [vec![0, 0]]).is_err());
    }

    #[test]
    fn duplicate_examples() {
        let d = duplicate(&Team::unit(), "x", &m(2));
        assert_eq!(d, Team::new(&["x"], [vec![0], vec![1]]).unwrap());
        let empty = Team::empty(&["y"]).unwrap();
        assert!(duplicate(&empty, "x", &m(2)).is_empty());
        let x = Team::new(&["y"], [vec![0], vec![2]]).unwrap();
        assert_eq!(duplicate(&x, "x", &m(3)).len(), 6);
        // Overwriting an existing column.
        assert_eq!(duplicate(&x, "y", &m(3)).len(), 3);
    }

    #[test]
    fn supplement_examples() {
        let s = m(3);
        let x = Team::new(&["y"], [vec![0], vec![1]]).unwrap();
        let c = supplement(&x, "x", |_| Some([0].into())).unwrap();
        assert_eq!(c, Team::new(&["x", "y"], [vec![0, 0], vec![0, 1]]).unwrap());
        let all = supplement(&x, "x", |_| Some(s.elements().collect())).unwrap();
        assert_eq!(all, duplicate(&x, "x", &s));
        let e = supplement(&Team::empty(&["y"]).unwrap(), "x", |_| None).unwrap();
        assert!(e.is_empty());
        assert!(supplement(&x, "x", |_| Some(BTreeSet::new())).is_err());
        assert!(supplement(&x, "x", |_| None).is_err());
    }

    #[test]
    fn projection() {
        let x = Team::new(&["x", "y"], [vec![0, 1], vec![0, 2]]).unwrap();
        assert_eq!(project_relation(&x, &["x"]).unwrap(), [vec![0]].into());
        assert_eq!(
            project_relation(&x, &["x", "y"]).unwrap(),
            [vec![0, 1], vec![0, 2]].into()
        );
        assert!(project_relation(&x.with_rows([]), &["x"]).unwrap().is_empty());
        assert!(project_relation(&x, &["z"]).is_err());
    }

    #[test]
    fn closure_examples() {
        let s = m(2);
        let x = Team::new(&["x"], [vec![0]]).unwrap();
        assert_eq!(team_closure(&x, &[Permutation::identity(2)]), x);
        let all = automorphisms(&s, 8).unwrap();
        assert_eq!(team_closure(&x, &all).len(), 2);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_teams(&m(2), &["x"], None).unwrap().count(), 4);
        assert_eq!(enumerate_teams(&m(2), &["x", "y"], None).unwrap().count(), 16);
        assert_eq!(enumerate_teams(&m(2), &["x"], Some(1)).unwrap().count(), 3);
        assert_eq!(enumerate_teams(&m(3), &["x", "y"], None).unwrap().count(), 512);
        assert_eq!(enumerate_teams(&m(2), &[] as &[&str], None).unwrap().count(), 2);
        assert!(enumerate_teams(&m(4), &["x", "y"], None).is_err());
        let first: Vec<Team> = enumerate_teams(&m(2), &["x"], None).unwrap().collect();
        assert!(first[0].is_empty());
        assert_eq!(first[3].len(), 2);
    }

    #[test]
    fn team_file_round_trip() {
        let s = Structure::new(["a", "b"]).unwrap();
        let t = Team::parse("vars: x y\nrow: a b\nrow: b b\n", &s).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(Team::parse(&t.to_text(&s), &s).unwrap(), t);
        assert!(Team::parse("vars: x\nrow: a\nrow: a\n", &s).is_err());
        assert!(Team::parse("vars: x\nrow: c\n", &s).is_err());
        assert!(Team::parse("row: a\n", &s).is_err());
    }

    #[test]
    fn display() {
        let t = Team::new(&["x", "y"], [vec![0, 1]]).unwrap();
        assert_eq!(t.to_string(), "{{x=0, y=1}}");
        assert_eq!(Team::unit().to_string(), "{{}}");
    }
}
