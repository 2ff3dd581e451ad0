use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base {base:?} at position {position}")]
    InvalidBase { base: char, position: usize },
    #[error("sequence mixes T and U")]
    MixedAlphabet,
    #[error("empty sequence")]
    EmptySequence,
    #[error("invalid residue {residue:?} at position {position}")]
    InvalidResidue { residue: char, position: usize },
    #[error("stop symbol inside protein at position {0}")]
    InternalStopResidue(usize),
    #[error("sequence length {0} is not a multiple of 3")]
    NotCodonAligned(usize),
    #[error("{0} is a stop codon and has no synonym family")]
    StopCodon(String),
    #[error("invalid codon {0:?}")]
    InvalidCodon(String),
    #[error("invalid CDS: {0}")]
    InvalidCds(String),
    #[error("invalid target protein: {0}")]
    InvalidTarget(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("table is missing sense codon {0}")]
    MissingCodon(String),
    #[error("codon {codon} has invalid value {value}: {reason}")]
    InvalidTableValue {
        codon: String,
        value: f64,
        reason: &'static str,
    },
    #[error("codon-pair corpus is empty")]
    EmptyCorpus,

    #[error("illegal character {ch:?} at position {position} in dot-bracket string")]
    IllegalStructureChar { ch: char, position: usize },
    #[error("unbalanced dot-bracket string at position {0}")]
    Unbalanced(usize),
    #[error("structure length {structure} does not match sequence length {sequence}")]
    LengthMismatch { structure: usize, sequence: usize },
    #[error("pair ({0}, {1}) is not a legal base pair")]
    IllegalPair(usize, usize),
    #[error("sequence of {length} nt exceeds the built-in folding limit of {limit} nt")]
    TooLongForBuiltin { length: usize, limit: usize },
    #[error("failed to launch folding engine `{command}`: {source}")]
    EngineLaunch {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("folding engine exited with {status}: {stderr}")]
    EngineFailed { status: String, stderr: String },
    #[error("malformed folding output: {0}")]
    MalformedOutput(String),

    #[error("{0}")]
    Metric(String),
    #[error("fitness weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty population")]
    EmptyPopulation,
    #[error("no valid records in {0}")]
    NoValidRecords(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
