use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the core can report. Variants are deliberately distinct so
/// callers (and the CLI exit-code contract) can tell them apart.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    InvalidArgument(String),
    NonScalarLoss {
        rows: usize,
        cols: usize,
    },
    HeadsNotDivisible {
        dim: usize,
        heads: usize,
    },
    UnknownParam(String),
    EmptyInput(&'static str),
    UnknownSource(String),
    SignalTooShort {
        len: usize,
        needed: usize,
    },
    SilentSignal,
    InsufficientDecay {
        reached_db: f64,
        needed_db: f64,
    },
    DegenerateFit {
        slope: f64,
    },
    /// RT60 estimation failed on one side of a pair.
    Estimator {
        side: &'static str,
        source: alloc::boxed::Box<Error>,
    },
    SampleRateMismatch {
        left: u32,
        right: u32,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, left, right } => write!(
                f,
                "{op}: shape mismatch {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonScalarLoss { rows, cols } => {
                write!(f, "loss must be 1x1, got {rows}x{cols}")
            }
            Error::HeadsNotDivisible { dim, heads } => {
                write!(f, "model dim {dim} is not divisible by {heads} heads")
            }
            Error::UnknownParam(name) => write!(f, "unknown parameter `{name}`"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::UnknownSource(tag) => write!(
                f,
                "unknown source `{tag}` (expected rgb, depth, semantic or position)"
            ),
            Error::SignalTooShort { len, needed } => {
                write!(f, "signal has {len} samples, need at least {needed}")
            }
            Error::SilentSignal => f.write_str("signal is all zeros"),
            Error::InsufficientDecay {
                reached_db,
                needed_db,
            } => write!(
                f,
                "insufficient decay: reached {reached_db:.2} dB, fit needs {needed_db:.2} dB"
            ),
            Error::DegenerateFit { slope } => {
                write!(
                    f,
                    "degenerate decay fit (slope {slope} dB/s is not negative)"
                )
            }
            Error::Estimator { side, source } => write!(f, "{side}: {source}"),
            Error::SampleRateMismatch { left, right } => {
                write!(f, "sample rate mismatch: {left} Hz vs {right} Hz")
            }
        }
    }
}

impl core::error::Error for Error {}
