use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{var}`: duplicate value label `{label}`")]
    DuplicateLabel { var: String, label: String },
    #[error("variable `{var}`: unknown value label `{label}`")]
    UnknownLabel { var: String, label: String },
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("frame has {configs} configurations, above the cap of {cap}")]
    FrameTooLarge { configs: usize, cap: usize },
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("variable `{0}` is declared with different domains")]
    DomainMismatch(String),
    #[error("variable list must be nonempty and duplicate-free")]
    BadVariableList,
    #[error("empty set where a nonempty one is required: {0}")]
    EmptySet(String),
    #[error("total conflict: every intersection of focal elements is empty")]
    TotalConflict,
    #[error("measure vanishes identically after {0}")]
    ZeroMeasure(&'static str),
    #[error("lattice over {configs} configurations exceeds the cap of {cap}")]
    LatticeTooLarge { configs: usize, cap: usize },
    #[error("set family closure exceeded {0} members")]
    ClosureTooLarge(usize),
    #[error("commonality of the conditioning marginal vanishes where the joint's does not")]
    ZeroCommonality,
    #[error("result is not a pseudo-belief function (min commonality {min_q})")]
    NotPseudo { min_q: f64 },
    #[error("process/evidence must be a proper belief function")]
    NotProper,
    #[error("masses must have absolute sum 1 (got {0})")]
    NotNormalized(f64),
    #[error("population is empty")]
    EmptyPopulation,
    #[error("net signed weight of population is not positive")]
    NonPositiveWeight,
    #[error("every object was rejected: population annihilated")]
    Annihilated,
    #[error("no object generated in {attempts} attempts")]
    ZeroYield { attempts: usize },
    #[error("graph contains a cycle through `{0}`")]
    Cycle(String),
    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),
    #[error("insufficient data: {have} weighted cases, need {need}")]
    InsufficientData { have: f64, need: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// True for outcomes that mean "the evidence is impossible" rather than a
    /// malformed input.
    pub fn is_conflict(&self) -> bool {
        matches!(
            self,
            Error::TotalConflict | Error::Annihilated | Error::ZeroYield { .. }
        )
    }
}
