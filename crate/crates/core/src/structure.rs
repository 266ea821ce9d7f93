//! Finite relational structures, the cycle graph families, automorphism
//! search, and the magma-hypothesis check.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::formula::Signature;
use crate::report::{PropertyReport, Witness};

/// Index of a domain element.
pub type Elem = u32;

/// Largest `|M|^arity` for which a relation keeps a dense membership table.
const DENSE_LIMIT: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<Elem>>,
    dense: Option<Vec<bool>>,
}

impl Relation {
    fn new(arity: usize, tuples: BTreeSet<Vec<Elem>>, domain_size: usize) -> Self {
        let cells = domain_size.checked_pow(arity as u32).filter(|&c| c <= DENSE_LIMIT);
        let dense = cells.map(|cells| {
            let mut table = vec![false; cells];
            for t in &tuples {
                table[dense_index(t, domain_size)] = true;
            }
            table
        });
        Relation {
            arity,
            tuples,
            dense,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<Elem>> {
        &self.tuples
    }

    pub fn contains(&self, tuple: &[Elem], domain_size: usize) -> bool {
        match &self.dense {
            Some(table) => table[dense_index(tuple, domain_size)],
            None => self.tuples.contains(tuple),
        }
    }

    /// Membership of the tuple whose i-th entry is `entry(i)`, without
    /// materializing it when the dense table is available.
    pub(crate) fn contains_by(&self, domain_size: usize, entry: impl Fn(usize) -> Elem) -> bool {
        match &self.dense {
            Some(table) => {
                let idx = (0..self.arity).fold(0, |acc, i| acc * domain_size + entry(i) as usize);
                table[idx]
            }
            None => {
                let t: Vec<Elem> = (0..self.arity).map(entry).collect();
                self.tuples.contains(&t)
            }
        }
    }
}

fn dense_index(tuple: &[Elem], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * n + e as usize)
}

/// A finite relational structure with named elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    domain: Vec<String>,
    index: HashMap<String, Elem>,
    relations: BTreeMap<String, Relation>,
    constants: BTreeMap<String, Elem>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Structure {
    /// A structure with the given elements and an empty signature.
    pub fn new<I, S>(domain: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.is_empty() {
            return Err(Error::InvalidStructure("domain must be non-empty".into()));
        }
        let mut index = HashMap::new();
        for (i, name) in domain.iter().enumerate() {
            if !valid_name(name) {
                return Err(Error::InvalidStructure(format!("bad element name {name:?}")));
            }
            if index.insert(name.clone(), i as Elem).is_some() {
                return Err(Error::InvalidStructure(format!("duplicate element {name}")));
            }
        }
        Ok(Structure {
            domain,
            index,
            relations: BTreeMap::new(),
            constants: BTreeMap::new(),
        })
    }

    /// Elements named `prefix0 .. prefix{n-1}`.
    pub fn with_size(n: usize, prefix: &str) -> Result<Self> {
        Structure::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    pub fn with_relation<I>(mut self, name: &str, arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<Elem>>,
    {
        let n = self.size();
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(Error::ArityMismatch {
                    relation: name.to_string(),
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(&e) = t.iter().find(|&&e| e as usize >= n) {
                return Err(Error::UnknownElement(e.to_string()));
            }
            set.insert(t);
        }
        if self.relations.contains_key(name) {
            return Err(Error::InvalidStructure(format!("relation {name} declared twice")));
        }
        self.relations
            .insert(name.to_string(), Relation::new(arity, set, n));
        Ok(self)
    }

    pub fn with_constant(mut self, name: &str, elem: Elem) -> Result<Self> {
        if elem as usize >= self.size() {
            return Err(Error::UnknownElement(elem.to_string()));
        }
        self.constants.insert(name.to_string(), elem);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        0..self.size() as Elem
    }

    pub fn element_name(&self, e: Elem) -> &str {
        &self.domain[e as usize]
    }

    pub fn element(&self, name: &str) -> Result<Elem> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> impl Iterator<Item = (&str, Elem)> {
        self.constants.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn holds(&self, relation: &Relation, tuple: &[Elem]) -> bool {
        relation.contains(tuple, self.size())
    }

    pub fn signature(&self) -> Signature {
        Signature {
            relations: self
                .relations
                .iter()
                .map(|(k, r)| (k.clone(), r.arity))
                .collect(),
            constants: self.constants.keys().cloned().collect(),
        }
    }

    /// Parses the line-oriented model format:
    ///
    /// ```text
    /// domain: a b c
    /// rel E/2: (a,b) (b,a)
    /// const c0 = a
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut structure: Option<Structure> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("domain:") {
                if structure.is_some() {
                    return Err(Error::syntax(line_no, "domain declared twice"));
                }
                let names: Vec<&str> = rest.split_whitespace().collect();
                structure = Some(
                    Structure::new(names).map_err(|e| Error::syntax(line_no, e.to_string()))?,
                );
                continue;
            }
            let s = structure
                .take()
                .ok_or_else(|| Error::syntax(line_no, "'domain:' must come first"))?;
            let next = if let Some(rest) = line.strip_prefix("rel ") {
                parse_relation_line(s, rest, line_no)?
            } else if let Some(rest) = line.strip_prefix("const ") {
                let (name, value) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::syntax(line_no, "expected 'const NAME = ELEMENT'"))?;
                let name = name.trim();
                if !valid_name(name) {
                    return Err(Error::syntax(line_no, format!("bad constant name {name:?}")));
                }
                let elem = s
                    .element(value.trim())
                    .map_err(|e| Error::syntax(line_no, e.to_string()))?;
                s.with_constant(name, elem)?
            } else {
                return Err(Error::syntax(line_no, format!("unrecognized line {line:?}")));
            };
            structure = Some(next);
        }
        structure.ok_or_else(|| Error::syntax(1, "missing 'domain:' line"))
    }

    /// Renders in the format accepted by [`Structure::parse`].
    pub fn to_model_text(&self) -> String {
        let mut out = format!("domain: {}\n", self.domain.join(" "));
        for (name, rel) in &self.relations {
            out.push_str(&format!("rel {name}/{}:", rel.arity));
            for t in &rel.tuples {
                let names = t.iter().map(|&e| self.element_name(e)).join(",");
                out.push_str(&format!(" ({names})"));
            }
            out.push('\n');
        }
        for (name, &e) in &self.constants {
            out.push_str(&format!("const {name} = {}\n", self.element_name(e)));
        }
        out
    }

    /// Disjoint union of two structures over the same signature.
    /// Elements of `other` are renamed when they clash.
    pub fn disjoint_union(&self, other: &Structure) -> Result<Structure> {
        let offset = self.size() as Elem;
        let mut names = self.domain.clone();
        for n in &other.domain {
            let mut name = n.clone();
            while self.index.contains_key(&name) || names.contains(&name) {
                name.push('_');
            }
            names.push(name);
        }
        let mut out = Structure::new(names)?;
        for (name, rel) in &self.relations {
            let other_rel = other
                .relations
                .get(name)
                .filter(|r| r.arity == rel.arity)
                .ok_or_else(|| Error::InvalidStructure(format!("signatures differ at {name}")))?;
            let shifted = other_rel
                .tuples
                .iter()
                .map(|t| t.iter().map(|e| e + offset).collect::<Vec<_>>());
            out = out.with_relation(name, rel.arity, rel.tuples.iter().cloned().chain(shifted))?;
        }
        Ok(out)
    }
}

fn parse_relation_line(s: Structure, rest: &str, line_no: usize) -> Result<Structure> {
    let (head, body) = rest
        .split_once(':')
        .ok_or_else(|| Error::syntax(line_no, "expected 'rel NAME/ARITY: tuples'"))?;
    let (name, arity) = head
        .trim()
        .split_once('/')
        .ok_or_else(|| Error::syntax(line_no, "expected NAME/ARITY"))?;
    let arity: usize = arity
        .trim()
        .parse()
        .map_err(|_| Error::syntax(line_no, format!("bad arity {arity:?}")))?;
    let name = name.trim();
    if !valid_name(name) {
        return Err(Error::syntax(line_no, format!("bad relation name {name:?}")));
    }
    let mut tuples = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| Error::syntax(line_no, "expected '(' ... ')'"))?;
        let (tuple_text, tail) = inner;
        let tuple = if tuple_text.trim().is_empty() {
            Vec::new()
        } else {
            tuple_text
                .split(',')
                .map(|n| s.element(n.trim()))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::syntax(line_no, e.to_string()))?
        };
        if tuple.len() != arity {
            return Err(Error::syntax(
                line_no,
                format!("tuple of length {} in relation of arity {arity}", tuple.len()),
            ));
        }
        tuples.push(tuple);
        rest = tail.trim_start();
    }
    s.with_relation(name, arity, tuples)
        .map_err(|e| Error::syntax(line_no, e.to_string()))
}

/// A cycle `v0 -> v1 -> ... -> v{len-1} -> v0` on relation `E`; with
/// `symmetric`, edges go both ways.
pub fn gen_cycle(len: usize, symmetric: bool) -> Result<Structure> {
    if len < 2 {
        return Err(Error::Invalid(format!("cycle length must be at least 2, got {len}")));
    }
    let mut edges = BTreeSet::new();
    for i in 0..len {
        let (a, b) = (i as Elem, ((i + 1) % len) as Elem);
        edges.insert(vec![a, b]);
        if symmetric {
            edges.insert(vec![b, a]);
        }
    }
    Structure::with_size(len, "v")?.with_relation("E", 2, edges)
}

/// Two disjoint symmetric cycles of length `2^(n+1)`.
pub fn gen_a(n: u32) -> Result<Structure> {
    let half = gen_cycle(1 << (n + 1), true)?;
    let both = half.disjoint_union(&half)?;
    // Rename to v0..v{N-1} so the element names do not depend on the union.
    renumbered(&both)
}

/// One symmetric cycle of length `2^(n+2)`.
pub fn gen_b(n: u32) -> Result<Structure> {
    gen_cycle(1 << (n + 2), true)
}

fn renumbered(s: &Structure) -> Result<Structure> {
    let mut out = Structure::with_size(s.size(), "v")?;
    for (name, rel) in s.relations() {
        out = out.with_relation(name, rel.arity(), rel.tuples().iter().cloned())?;
    }
    for (name, e) in s.constants() {
        out = out.with_constant(name, e)?;
    }
    Ok(out)
}

/// A random symmetric loop-free graph on `n` vertices, relation `E`.
pub fn gen_random_graph(n: usize, edge_probability: f64, rng: &mut impl Rng) -> Result<Structure> {
    let mut edges = Vec::new();
    for a in 0..n as Elem {
        for b in a + 1..n as Elem {
            if rng.random_bool(edge_probability) {
                edges.push(vec![a, b]);
                edges.push(vec![b, a]);
            }
        }
    }
    Structure::with_size(n, "v")?.with_relation("E", 2, edges)
}

/// Whether the undirected reachability closure of a binary relation spans
/// the domain.
pub fn is_connected(s: &Structure, rel: &str) -> Result<bool> {
    let r = s
        .relation(rel)
        .ok_or_else(|| Error::UnknownRelation(rel.to_string()))?;
    if r.arity() != 2 {
        return Err(Error::ArityMismatch {
            relation: rel.to_string(),
            expected: 2,
            found: r.arity(),
        });
    }
    let n = s.size();
    let mut adj = vec![Vec::new(); n];
    for t in r.tuples() {
        adj[t[0] as usize].push(t[1] as usize);
        adj[t[1] as usize].push(t[0] as usize);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    Ok(seen.into_iter().all(|b| b))
}

/// A bijection on domain indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation(Vec<Elem>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as Elem).collect())
    }

    pub fn from_images(images: Vec<Elem>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            match seen.get_mut(i as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::Invalid(format!("{images:?} is not a permutation"))),
            }
        }
        Ok(Permutation(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[Elem] {
        &self.0
    }

    pub fn apply(&self, e: Elem) -> Elem {
        self.0[e as usize]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&e| self.apply(e)).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &e) in self.0.iter().enumerate() {
            inv[e as usize] = i as Elem;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &e)| i as Elem == e)
    }

    /// Whether the map preserves every relation and fixes every constant.
    pub fn is_automorphism_of(&self, s: &Structure) -> bool {
        if self.0.len() != s.size() {
            return false;
        }
        if s.constants().any(|(_, c)| self.apply(c) != c) {
            return false;
        }
        // A bijection maps a finite relation into itself iff onto itself.
        s.relations().all(|(_, rel)| {
            rel.tuples().iter().all(|t| {
                let image: Vec<Elem> = t.iter().map(|&e| self.apply(e)).collect();
                s.holds(rel, &image)
            })
        })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().join(" "))
    }
}

/// Default cap on the domain size for automorphism search.
pub const AUTOMORPHISM_DOMAIN_CAP: usize = 8;

/// All automorphisms in lexicographic order of their image lists.
pub fn automorphisms(s: &Structure, domain_cap: usize) -> Result<Vec<Permutation>> {
    let n = s.size();
    if n > domain_cap {
        return Err(Error::TooLarge(format!(
            "automorphism search over {n} elements exceeds cap {domain_cap}"
        )));
    }
    Ok((0..n as Elem)
        .permutations(n)
        .map(Permutation)
        .filter(|p| p.is_automorphism_of(s))
        .collect())
}

/// Checks that `maps` is a unitary magma of automorphisms separating every
/// ordered pair: for `m1 != m2` some map fixes `m1` and moves `m2`.
pub fn check_magma_hypothesis(s: &Structure, maps: &[Permutation]) -> Result<PropertyReport> {
    if let Some(bad) = maps.iter().find(|p| !p.is_automorphism_of(s)) {
        return Err(Error::Invalid(format!("{bad} is not an automorphism")));
    }
    let universe = format!("structure with {} elements, {} maps", s.size(), maps.len());
    let mut report = PropertyReport::new("magma-hypothesis", universe);
    let members: BTreeSet<&Permutation> = maps.iter().collect();
    let fail = |report: PropertyReport, note: String| {
        report.fail(Witness {
            structure: String::new(),
            teams: Vec::new(),
            note,
        })
    };
    for (f, g) in maps.iter().cartesian_product(maps) {
        report.checked += 1;
        let fg = f.compose(g);
        if !members.contains(&fg) {
            return Ok(fail(report, format!("not closed: {f} o {g} = {fg}")));
        }
    }
    if !maps.iter().any(Permutation::is_identity) {
        return Ok(fail(report, "identity missing".into()));
    }
    for (m1, m2) in s.elements().cartesian_product(s.elements()) {
        if m1 == m2 {
            continue;
        }
        report.checked += 1;
        if !maps.iter().any(|f| f.apply(m1) == m1 && f.apply(m2) != m2) {
            let note = format!(
                "no map fixes {} while moving {}",
                s.element_name(m1),
                s.element_name(m2)
            );
            return Ok(fail(report, note));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles() {
        let c4 = gen_cycle(4, true).unwrap();
        assert_eq!(c4.relation("E").unwrap().tuples().len(), 8);
        let c2 = gen_cycle(2, true).unwrap();
        let expected: BTreeSet<Vec<Elem>> = [vec![0, 1], vec![1, 0]].into();
        assert_eq!(c2.relation("E").unwrap().tuples(), &expected);
        let c3 = gen_cycle(3, false).unwrap();
        let expected: BTreeSet<Vec<Elem>> = [vec![0, 1], vec![1, 2], vec![2, 0]].into();
        assert_eq!(c3.relation("E").unwrap().tuples(), &expected);
        assert!(gen_cycle(1, true).is_err());
    }

    #[test]
    fn graph_families() {
        let a1 = gen_a(1).unwrap();
        let b1 = gen_b(1).unwrap();
        assert_eq!(a1.size(), 8);
        assert_eq!(b1.size(), 8);
        assert_eq!(a1.relation("E").unwrap().tuples().len(), 16);
        assert!(!is_connected(&a1, "E").unwrap());
        assert!(is_connected(&b1, "E").unwrap());
        for n in 0..=4 {
            assert_eq!(gen_a(n).unwrap().size(), gen_b(n).unwrap().size());
        }
    }

    #[test]
    fn single_vertex_is_connected() {
        let s = Structure::with_size(1, "v")
            .unwrap()
            .with_relation("E", 2, Vec::new())
            .unwrap();
        assert!(is_connected(&s, "E").unwrap());
        assert!(is_connected(&s, "F").is_err());
    }

    #[test]
    fn empty_signature_automorphisms() {
        let s = Structure::with_size(3, "e").unwrap();
        let auts = automorphisms(&s, AUTOMORPHISM_DOMAIN_CAP).unwrap();
        assert_eq!(auts.len(), 6);
        assert!(auts[0].is_identity());
    }

    #[test]
    fn four_cycle_has_dihedral_group() {
        // Frozen from brute force over all 24 permutations in the tests/ oracle.
        let auts = automorphisms(&gen_cycle(4, true).unwrap(), 8).unwrap();
        assert_eq!(auts.len(), 8);
    }

    #[test]
    fn constants_must_be_fixed() {
        let s = Structure::with_size(3, "e").unwrap().with_constant("c", 0).unwrap();
        assert_eq!(automorphisms(&s, 8).unwrap().len(), 2);
    }

    #[test]
    fn automorphism_cap() {
        let s = Structure::with_size(9, "e").unwrap();
        assert!(matches!(automorphisms(&s, 8), Err(Error::TooLarge(_))));
    }

    #[test]
    fn magma_hypothesis() {
        let s = Structure::with_size(3, "e").unwrap();
        let all = automorphisms(&s, 8).unwrap();
        assert!(check_magma_hypothesis(&s, &all).unwrap().holds());

        let id = vec![Permutation::identity(3)];
        assert!(!check_magma_hypothesis(&s, &id).unwrap().holds());

        let c4 = gen_cycle(4, true).unwrap();
        let r = Permutation::from_images(vec![1, 2, 3, 0]).unwrap();
        let rotations: Vec<_> = (0..4)
            .scan(Permutation::identity(4), |acc, _| {
                let cur = acc.clone();
                *acc = r.compose(acc);
                Some(cur)
            })
            .collect();
        let report = check_magma_hypothesis(&c4, &rotations).unwrap();
        assert!(!report.holds());
        assert!(report.witness.unwrap().note.contains("no map fixes"));
    }

    #[test]
    fn magma_rejects_non_automorphisms() {
        let c3 = gen_cycle(3, false).unwrap();
        let swap = Permutation::from_images(vec![1, 0, 2]).unwrap();
        assert!(check_magma_hypothesis(&c3, &[swap]).is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let text = "# a model\ndomain: a b c\nrel E/2: (a,b) (b,a)\nrel P/1: (c)\nconst c0 = a\n";
        let s = Structure::parse(text).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.constant("c0"), Some(0));
        assert_eq!(Structure::parse(&s.to_model_text()).unwrap(), s);
    }

    #[test]
    fn model_errors() {
        assert!(Structure::parse("rel E/2: (a,b)").is_err());
        assert!(Structure::parse("domain: a\nrel E/2: (a)").is_err());
        assert!(Structure::parse("domain: a\nrel E/1: (b)").is_err());
        assert!(Structure::parse("domain:").is_err());
        assert!(Structure::parse("domain: a a").is_err());
    }
}
