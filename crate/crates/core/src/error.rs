use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("realkernel: precision exhausted (requested {requested} bits, source supplies {available})")]
    PrecisionExhausted { requested: u64, available: u64 },
    #[error("realkernel: comparison undecidable within {max_precision} bits")]
    Undecidable { max_precision: u64 },
    #[error("contfrac: rational expansion terminated after {len} digits")]
    RationalTerminated { len: usize },
    #[error("obstruction: N must be odd")]
    InvalidParity,
    #[error("witnesses: alpha is rational")]
    DegenerateAlpha,
    #[error("witnesses: digit a_{index} = {digit} exceeds the bound")]
    UnboundedDigits { index: usize, digit: String },
    #[error("witnesses: pattern not found within {scanned} digits")]
    PatternNotFound { scanned: usize },
    #[error("exceptional: digit residue {residue} at index {index} exceeds cap {cap}")]
    ScheduleInfeasible { index: usize, residue: String, cap: String },
    #[error("higherdeg: level {level} offers {children} children, need at least 2")]
    BranchExhausted { level: usize, children: String },
    #[error("sumset: bitset of {requested} bytes exceeds memory cap {cap}")]
    MemoryCap { requested: u64, cap: u64 },
    #[error("parse: {0}")]
    Parse(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by insufficient precision rather than bad input.
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::PrecisionExhausted { .. } | Error::Undecidable { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
