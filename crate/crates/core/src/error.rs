use alloc::string::String;
use core::fmt;

/// Errors raised by the analysis core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The factor schema itself is malformed.
    InvalidSchema(String),
    /// A case does not conform to the schema.
    InvalidCase {
        /// Case id.
        id: String,
        /// What is wrong with it.
        reason: String,
    },
    /// Two cases carry the same id.
    DuplicateCaseId(String),
    /// A literal refers to a factor index the schema does not have.
    FactorOutOfRange {
        /// Offending index.
        index: usize,
        /// Number of factors in the schema.
        count: usize,
    },
    /// A literal's value exceeds its factor's level count.
    LevelOutOfRange {
        /// Factor name.
        factor: String,
        /// Offending value.
        value: u32,
        /// Admissible level count.
        levels: u32,
    },
    /// Two literals of a conjunction constrain the same factor.
    DuplicateFactor(String),
    /// A ratio whose denominator is zero was requested.
    UndefinedRatio(&'static str),
    /// A parameter is outside its admissible range.
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// Why it was rejected.
        reason: String,
    },
    /// A pathway expression failed to parse.
    Parse {
        /// Byte offset into the input.
        position: usize,
        /// Description.
        message: String,
    },
    /// Neither necessary literals nor selected rules: nothing to report.
    VacuousSolution,
    /// The exhaustive oracle refuses instances this large.
    TooManyCandidates {
        /// Candidates supplied.
        count: usize,
        /// Largest admissible count.
        max: usize,
    },
    /// A full truth table would exceed the configured row bound.
    TruthTableTooLarge {
        /// Rows required (saturating).
        rows: u64,
        /// Configured bound.
        bound: u64,
    },
}

/// Result alias for the analysis core.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSchema(msg) => write!(f, "invalid schema: {msg}"),
            Error::InvalidCase { id, reason } => write!(f, "invalid case `{id}`: {reason}"),
            Error::DuplicateCaseId(id) => write!(f, "duplicate case id `{id}`"),
            Error::FactorOutOfRange { index, count } => {
                write!(f, "factor index {index} out of range (schema has {count} factors)")
            }
            Error::LevelOutOfRange { factor, value, levels } => {
                write!(f, "value {value} out of range for factor `{factor}` ({levels} levels)")
            }
            Error::DuplicateFactor(name) => {
                write!(f, "factor `{name}` appears more than once in a conjunction")
            }
            Error::UndefinedRatio(what) => write!(f, "undefined ratio: {what}"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::Parse { position, message } => {
                write!(f, "parse error at position {position}: {message}")
            }
            Error::VacuousSolution => f.write_str("vacuous solution: no necessary conditions and no admissible cover"),
            Error::TooManyCandidates { count, max } => write!(
                f,
                "{count} candidate rules exceed the exhaustive oracle limit of {max}; \
                 raise the thresholds or restrict the factor set"
            ),
            Error::TruthTableTooLarge { rows, bound } => {
                write!(f, "full truth table needs {rows} rows, bound is {bound}")
            }
        }
    }
}

impl core::error::Error for Error {}
