//! Verdicts returned by every property checker.

use std::fmt;

use crate::team::Team;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No counterexample exists in the checked universe.
    Holds,
    Counterexample,
    /// The property's precondition fails, so nothing was checked.
    Inapplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds-on-universe",
            Verdict::Counterexample => "counterexample",
            Verdict::Inapplicable => "inapplicable",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Name of the structure in the universe.
    pub structure: String,
    /// Labelled teams, e.g. `("X", ...)`, `("sub", ...)`.
    pub teams: Vec<(String, Team)>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Human-readable description of what was enumerated.
    pub universe: String,
    /// Number of (structure, team) instances examined.
    pub checked: usize,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub(crate) fn new(property: impl Into<String>, universe: impl Into<String>) -> Self {
        PropertyReport {
            property: property.into(),
            verdict: Verdict::Holds,
            witness: None,
            universe: universe.into(),
            checked: 0,
        }
    }

    pub(crate) fn fail(mut self, witness: Witness) -> Self {
        self.verdict = Verdict::Counterexample;
        self.witness = Some(witness);
        self
    }

    pub(crate) fn inapplicable(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Inapplicable;
        self.witness = Some(Witness {
            structure: String::new(),
            teams: Vec::new(),
            note: note.into(),
        });
        self
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "property: {}", self.property)?;
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(f, "universe: {}", self.universe)?;
        writeln!(f, "checked: {}", self.checked)?;
        if let Some(w) = &self.witness {
            if !w.structure.is_empty() {
                writeln!(f, "structure: {}", w.structure)?;
            }
            for (label, team) in &w.teams {
                writeln!(f, "{label}: {team}")?;
            }
            if !w.note.is_empty() {
                writeln!(f, "note: {}", w.note)?;
            }
        }
        Ok(())
    }
}
