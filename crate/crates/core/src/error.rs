use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which evaluation budget ran out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetKind {
    Rows,
    Branches,
    Timeout,
}

impl std::fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BudgetKind::Rows => "team rows",
            BudgetKind::Branches => "branches",
            BudgetKind::Timeout => "timeout",
        })
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("relation {relation} used with arity {found}, expected {expected}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("{atom} atom has tuples of different lengths ({left} and {right})")]
    TupleLength {
        atom: String,
        left: usize,
        right: usize,
    },
    #[error("team atom inside hook guard")]
    TeamAtomInGuard,
    #[error("formula is not first-order: {0}")]
    NotFirstOrder(String),
    #[error("unsupported connective for this operation: {0}")]
    Unsupported(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("formula has free variables: {0}")]
    NotASentence(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("variable {0} would be captured")]
    VariableCapture(String),
    #[error("evaluation budget exceeded: {0}")]
    BudgetExceeded(BudgetKind),
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid team: {0}")]
    InvalidTeam(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            msg: msg.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_))
    }
}
